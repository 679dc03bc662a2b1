use flatmoduli::lie::{haar_sample, C64};
use flatmoduli::{GroupElement, GroupSpec};

/// Two-sample Kolmogorov-Smirnov statistic.
fn ks(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

const N: u64 = 10_000;

type Statistic = (&'static str, fn(&GroupElement) -> f64);

fn check(spec: GroupSpec) {
    let h = haar_sample(spec, 999_999);
    let plain: Vec<GroupElement> = (0..N).map(|s| haar_sample(spec, s)).collect();
    let conj: Vec<GroupElement> = (N..2 * N).map(|s| haar_sample(spec, s).conjugated_by(&h)).collect();
    let stats: [Statistic; 3] = [
        ("re tr", |g| g.matrix().trace().re),
        ("|tr|^2", |g| g.matrix().trace().norm_sqr()),
        ("re g00", |g| g.matrix()[(0, 0)].re),
    ];
    for (name, f) in stats {
        let d = ks(plain.iter().map(f).collect(), conj.iter().map(f).collect());
        assert!(d < 0.05, "{spec} {name}: KS = {d}");
    }
    // moments of the trace: E tr = 0, E |tr|^2 = 1 for U(n), SU(n) (n >= 2), SO(3)
    let mean: C64 = conj.iter().map(|g| g.matrix().trace()).sum::<C64>() / N as f64;
    let second: f64 = conj.iter().map(|g| g.matrix().trace().norm_sqr()).sum::<f64>() / N as f64;
    assert!(mean.norm() < 0.05, "{spec}: mean trace {mean}");
    assert!((second - 1.0).abs() < 0.1, "{spec}: E|tr|^2 = {second}");
}

#[test]
fn conjugation_invariance_u3() {
    check(GroupSpec::unitary(3));
}

#[test]
fn conjugation_invariance_su2() {
    check(GroupSpec::special_unitary(2));
}

#[test]
fn conjugation_invariance_so3() {
    check(GroupSpec::so3());
}

#[test]
fn ks_detects_a_shift() {
    let a: Vec<f64> = (0..1000).map(|i| i as f64 / 1000.0).collect();
    let b: Vec<f64> = a.iter().map(|x| x + 0.2).collect();
    assert!((ks(a.clone(), b) - 0.2).abs() < 0.01);
    assert_eq!(ks(a.clone(), a), 0.0);
}

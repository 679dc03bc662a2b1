//! Acceptance criteria, one PASS/FAIL line each. Run with
//! `cargo test -p flatmoduli --test acceptance -- --nocapture`.

use std::time::{Duration, Instant};

use flatmoduli::experiments::{census, commutator_det_defect, commutator_success_rate, pi_rotation_lift_sign};
use flatmoduli::homotopy::{
    certify_path, deform_to_semisimple, key_identity_residual, path_even, path_even_with_lift, path_odd,
    path_odd_with_lift, GroupPath,
};
use flatmoduli::lie::{diagonal, haar_sample, principal_root, C64, I, ONE};
use flatmoduli::rng::stream_rng;
use flatmoduli::rootsys::{
    build_root_system, build_weyl_element, solve_translation, test_matrix, verify_no_unit_eigenvalue, RootType,
};
use flatmoduli::solver::{commutator_preimage, solve_relation, SolverConfig};
use flatmoduli::surface::relation_value;
use flatmoduli::topology::{
    count_components, obstruction, quotient_by_squares, FiniteAbelianGroup, GroupTopology,
};
use flatmoduli::{Error, Exec, GroupElement, GroupSpec, SurfaceSig, TuplePoint};
use nalgebra::DVector;
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(id: u32, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let o = f();
    println!(
        "{} {id} {name}: {} ({:.2} s)",
        if o.pass { "PASS" } else { "FAIL" },
        o.detail,
        t.elapsed().as_secs_f64()
    );
    o.pass
}

fn nonor(k: u32) -> SurfaceSig {
    SurfaceSig::nonorientable(k).unwrap()
}

fn near(z: C64, w: C64, tol: f64) -> bool {
    (z - w).norm() <= tol
}

fn weyl_table() -> Outcome {
    let start = Instant::now();
    let systems = test_matrix();
    let mut bad = Vec::new();
    for &(kind, rank) in &systems {
        let w = build_weyl_element(&build_root_system(kind, rank).unwrap());
        let rep = verify_no_unit_eigenvalue(&w);
        let ev = w.eigenvalues();
        let spectrum_ok = match (kind, rank) {
            (RootType::A, l) => {
                let mut want: Vec<C64> =
                    (1..=l).map(|k| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / (l + 1) as f64)).collect();
                want.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
                ev.len() == l && ev.iter().zip(&want).all(|(a, b)| near(*a, *b, 1e-10))
            }
            (RootType::D, l) if l % 2 == 1 => ev.iter().all(|z| near(*z, I, 1e-10) || near(*z, -I, 1e-10) || near(*z, -ONE, 1e-10)),
            (RootType::E, 7) => ev.iter().all(|z| near(*z, I, 1e-10) || near(*z, -I, 1e-10) || near(*z, -ONE, 1e-10)),
            (RootType::G, _) => {
                let w3 = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
                ev.len() == 2 && near(ev[0], w3.conj(), 1e-10) && near(ev[1], w3, 1e-10)
            }
            _ => true,
        };
        if !(rep.root_permutation_ok && rep.min_distance_to_1 >= 0.5 && spectrum_ok) {
            bad.push(format!("{kind}{rank}"));
        }
    }
    let fast = start.elapsed() < Duration::from_secs(5);
    Outcome {
        pass: bad.is_empty() && fast,
        detail: format!("{} systems, failures {bad:?}, under 5 s: {fast}", systems.len()),
    }
}

fn translation_identity() -> Outcome {
    let mut rng = stream_rng(2024, 0);
    let mut worst: f64 = 0.0;
    for &(kind, rank) in &test_matrix() {
        let w = build_weyl_element(&build_root_system(kind, rank).unwrap());
        let b = w.system().span_basis().clone();
        let wm = w.matrix().map(|v| v as f64);
        for _ in 0..100 {
            let xi = &b * DVector::from_fn(rank, |_, _| rng.random_range(-5.0..5.0));
            let sol = DVector::from_vec(solve_translation(&w, xi.as_slice()).unwrap());
            worst = worst.max((&wm * &sol - &sol - &xi).norm());
        }
    }
    let mut group_worst: f64 = 0.0;
    for n in 2..=4 {
        for _ in 0..20 {
            let mut th: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let m = th.iter().sum::<f64>() / n as f64;
            th.iter_mut().for_each(|x| *x -= m);
            for t in [0.25, 0.5, 1.0] {
                group_worst = group_worst.max(key_identity_residual(n, &th, t).unwrap());
            }
        }
    }
    Outcome {
        pass: worst <= 1e-10 && group_worst <= 1e-10,
        detail: format!("max (w-I)xi' - xi = {worst:.1e}, max group identity residual = {group_worst:.1e}"),
    }
}

fn image_of_mu() -> Outcome {
    let start = Instant::now();
    let det_defect = commutator_det_defect(GroupSpec::unitary(3), 2, 1000, 17, Exec::default());
    let su2 = commutator_success_rate(GroupSpec::special_unitary(2), 1, 100, 1, Exec::default());
    let su3 = commutator_success_rate(GroupSpec::special_unitary(3), 1, 100, 2, Exec::default());
    let elapsed = start.elapsed();
    Outcome {
        pass: det_defect <= 1e-10 && su2.successes >= 99 && su3.successes >= 95 && elapsed < Duration::from_secs(600),
        detail: format!(
            "max |det mu - 1| = {det_defect:.1e}; SU(2) {}/100, SU(3) {}/100",
            su2.successes, su3.successes
        ),
    }
}

fn obstruction_well_defined() -> Outcome {
    let spec = GroupSpec::unitary(2);
    let sig = nonor(5);
    let mut det_worst: f64 = 0.0;
    let mut invariant = true;
    let mut solved = 0;
    for s in 0..50u64 {
        let cfg = SolverConfig { seed: 500 + s, exec: Exec::Sequential, ..Default::default() };
        let Ok(rep) = solve_relation(sig, spec, None, &cfg) else { continue };
        let x = rep.solution.unwrap();
        solved += 1;
        let d = x.crosscap_gens()[0].det();
        det_worst = det_worst.max((d - ONE).norm().min((d + ONE).norm()));
        let class = obstruction(&x).unwrap();
        for j in 0..20 {
            let h = haar_sample(spec, 10_000 * s + j);
            invariant &= obstruction(&x.conjugated_by(&h)).as_ref() == Ok(&class);
        }
    }
    Outcome {
        pass: solved == 50 && det_worst <= 1e-8 && invariant,
        detail: format!("{solved}/50 solved, det(c) off +-1 by {det_worst:.1e}, conjugation invariant: {invariant}"),
    }
}

fn component_census() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    let mut run = |sig: SurfaceSig, spec: GroupSpec, expect: u64| {
        let c = census(sig, spec, 20, 77, Exec::default()).unwrap();
        let ok = c.expected.components == expect && c.matches();
        pass &= ok;
        lines.push(format!("{spec}@{sig}:{}/{}", c.realized.len(), c.expected.components));
    };
    for k in [3, 5] {
        for n in 1..=3 {
            run(nonor(k), GroupSpec::unitary(n), 2);
        }
        run(nonor(k), GroupSpec::special_unitary(2), 1);
        run(nonor(k), GroupSpec::special_unitary(3), 1);
    }
    run(SurfaceSig::orientable(1), GroupSpec::so3(), 2);
    let pi_pair = pi_rotation_lift_sign() == Ok(-1);
    pass &= pi_pair;
    Outcome { pass, detail: format!("{} ; pi-rotation pair lift -1: {pi_pair}", lines.join(" ")) }
}

fn abelian_oracle() -> Outcome {
    let mut groups = 0;
    let mut mismatches = 0;
    for n in 1..=64 {
        for g in FiniteAbelianGroup::all_of_order(n) {
            groups += 1;
            if g.quotient_by_squares_formula() != g.quotient_by_squares_enumerated() {
                mismatches += 1;
            }
        }
    }
    let spots = quotient_by_squares(&FiniteAbelianGroup::cyclic(2)) == 2
        && quotient_by_squares(&FiniteAbelianGroup::cyclic(9)) == 1
        && quotient_by_squares(&FiniteAbelianGroup::from_cyclic_factors(&[2, 4]).unwrap()) == 4;
    Outcome {
        pass: mismatches == 0 && spots && groups > 64,
        detail: format!("{groups} groups of order <= 64, {mismatches} mismatches, spot values ok: {spots}"),
    }
}

fn su_lifted(spec: GroupSpec, seed: u64, minus: bool) -> GroupElement {
    let n = spec.n();
    let h = haar_sample(GroupSpec::special_unitary(n), seed).into_matrix();
    let m = if minus { h * (-ONE) } else { h };
    GroupElement::new(spec, m).unwrap()
}

fn path_certification() -> Outcome {
    let mut mu_worst: f64 = 0.0;
    for s in 0..20u64 {
        let spec = GroupSpec::unitary(2 + (s % 2) as usize);
        let sig = SurfaceSig::orientable(2);
        let gens: Vec<GroupElement> = (0..4).map(|i| haar_sample(spec, 100 * s + i)).collect();
        let x = TuplePoint::from_generators(sig, spec, gens).unwrap();
        let p = deform_to_semisimple(&x, 100).unwrap();
        mu_worst = mu_worst.max(p.relation_constancy(&relation_value(&x)));
    }

    let mut paths: Vec<GroupPath> = Vec::new();
    let specs = [GroupSpec::special_unitary(2), GroupSpec::special_unitary(3), GroupSpec::unitary(3)];
    for s in 0..20u64 {
        let spec = specs[(s % 3) as usize];
        let minus = spec.family() == flatmoduli::Family::U && s % 2 == 0;
        let c = su_lifted(spec, 300 + s, minus);
        paths.push(path_odd(&c, nonor(if s % 2 == 0 { 3 } else { 5 }), 100).unwrap());
    }
    let odd_count = paths.len();
    for s in 0..20u64 {
        let spec = specs[(s % 3) as usize];
        let u = spec.family() == flatmoduli::Family::U;
        let c1 = su_lifted(spec, 400 + s, u && s % 2 == 0);
        let c2 = su_lifted(spec, 500 + s, false);
        paths.push(path_even(&c1, &c2, nonor(if s % 2 == 0 { 6 } else { 8 }), 100).unwrap());
    }
    let certs: Vec<_> = paths.iter().map(certify_path).collect();
    let max_res = certs.iter().map(|c| c.max_residual).fold(0.0, f64::max);
    let max_end = certs.iter().flat_map(|c| c.endpoint_errors.iter().copied()).fold(0.0, f64::max);
    let all_certified = certs.iter().all(|c| c.certified);

    // inadmissible lifts: U(2) and U(4) with det -1, lift a primitive 2n-th root of unity
    let mut demos = Vec::new();
    for (n, seed) in [(2usize, 1u64), (4, 2)] {
        let spec = GroupSpec::unitary(n);
        let mut entries = vec![ONE; n];
        entries[0] = -ONE;
        let c = GroupElement::new(spec, haar_sample(GroupSpec::special_unitary(n), seed).matrix() * diagonal(&entries)).unwrap();
        let lift = principal_root(-ONE, n);
        demos.push(path_odd_with_lift(&c, nonor(3), lift, 100).unwrap());
        let c2 = su_lifted(spec, seed + 10, false);
        demos.push(path_even_with_lift(&c, &c2, nonor(6), lift, 100).unwrap());
    }
    let demos_uncertified = demos.iter().all(|p| !certify_path(p).certified);
    let constancy = paths
        .iter()
        .chain(&demos)
        .map(|p| p.relation_constancy(&p.expected_relation()))
        .fold(0.0, f64::max);

    Outcome {
        pass: mu_worst <= 1e-10 && all_certified && max_res <= 1e-8 && max_end <= 1e-9 && constancy <= 1e-8 && demos_uncertified,
        detail: format!(
            "deform mu drift {mu_worst:.1e}; {odd_count} odd + {} even certified: {all_certified}, max residual {max_res:.1e}, max endpoint {max_end:.1e}; relation = k~^2 within {constancy:.1e} on {} paths incl. {} inadmissible",
            paths.len() - odd_count,
            paths.len() + demos.len(),
            demos.len()
        ),
    }
}

fn negative_controls() -> Outcome {
    let excluded = [1, 2, 4].iter().all(|&k| {
        matches!(
            count_components(nonor(k), &GroupTopology::Spec(GroupSpec::unitary(2))),
            Err(Error::ExcludedSurface { .. })
        )
    });
    let targets = [
        GroupElement::new(GroupSpec::unitary(2), diagonal(&[ONE, -ONE])).unwrap(),
        haar_sample(GroupSpec::unitary(3), 5),
    ];
    let image = targets
        .iter()
        .all(|g| matches!(commutator_preimage(g, 1, &SolverConfig::default()), Err(Error::ImageViolation(_))));
    let c = haar_sample(GroupSpec::special_unitary(3), 8);
    let p = path_odd(&c, nonor(3), 100).unwrap();
    let mut corrupted_fail = certify_path(&p).certified;
    for i in [0, 50, 100] {
        let bad = p.steps()[i].1.with_generator(1, haar_sample(GroupSpec::special_unitary(3), 60 + i as u64)).unwrap();
        corrupted_fail &= !certify_path(&p.with_step(i, bad).unwrap()).certified;
    }
    Outcome {
        pass: excluded && image && corrupted_fail,
        detail: format!("excluded refused: {excluded}, image violations: {image}, corrupted paths rejected: {corrupted_fail}"),
    }
}

#[test]
fn acceptance() {
    let results = [
        report(1, "weyl table", weyl_table),
        report(2, "translation identity", translation_identity),
        report(3, "image of mu", image_of_mu),
        report(4, "obstruction well-defined", obstruction_well_defined),
        report(5, "component census", component_census),
        report(6, "finite abelian oracle", abelian_oracle),
        report(7, "path certification", path_certification),
        report(8, "negative controls", negative_controls),
    ];
    let passed = results.iter().filter(|r| **r).count();
    println!("{passed}/{} criteria passed", results.len());
    assert_eq!(passed, results.len());
}

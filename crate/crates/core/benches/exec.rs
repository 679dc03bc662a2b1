use criterion::{criterion_group, criterion_main, Criterion};
use flatmoduli::experiments::{census, commutator_success_rate};
use flatmoduli::{Exec, GroupSpec, SurfaceSig};

fn strategies() -> Vec<Exec> {
    vec![
        Exec::Sequential,
        #[cfg(feature = "parallel")]
        Exec::Parallel,
    ]
}

fn bench_commutator(c: &mut Criterion) {
    let mut group = c.benchmark_group("commutator_su2_16_trials");
    group.sample_size(10);
    for exec in strategies() {
        group.bench_function(exec.name(), |b| {
            b.iter(|| commutator_success_rate(GroupSpec::special_unitary(2), 1, 16, 7, exec))
        });
    }
    group.finish();
}

fn bench_census(c: &mut Criterion) {
    let mut group = c.benchmark_group("census_u2_crosscaps3");
    group.sample_size(10);
    let sig = SurfaceSig::nonorientable(3).unwrap();
    for exec in strategies() {
        group.bench_function(exec.name(), |b| {
            b.iter(|| census(sig, GroupSpec::unitary(2), 4, 1, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_commutator, bench_census);
criterion_main!(benches);

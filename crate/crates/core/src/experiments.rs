//! Seeded Monte-Carlo harnesses: component censuses and solver success
//! rates. Trials fan out over an [`Exec`]; every trial derives its own seed
//! from the base seed and its index, so results are identical under either
//! strategy.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::lie::{haar_with, quaternion_to_rotation, Family, GroupElement, GroupSpec};
use crate::rng::{split, stream_rng};
use crate::solver::{commutator_preimage, random_target, solve_relation, SolverConfig, SolverReport};
use crate::surface::{commutator_mu, relation_residual, SurfaceSig, TuplePoint};
use crate::topology::{
    component_label, count_components, lift_obstruction, ComponentCount, GroupTopology, ObstructionClass,
};

/// Classes a solver run may be steered towards.
fn candidate_classes(spec: GroupSpec, sig: SurfaceSig) -> Vec<Option<ObstructionClass>> {
    match spec.family() {
        Family::SO3 => ObstructionClass::all(1).into_iter().map(Some).collect(),
        Family::U if !sig.is_orientable() => ObstructionClass::all(spec.dim_s()).into_iter().map(Some).collect(),
        _ => vec![None],
    }
}

fn trial_config(seed: u64, index: u64) -> SolverConfig {
    SolverConfig { seed: split(seed, index), exec: Exec::Sequential, ..Default::default() }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Census {
    pub expected: ComponentCount,
    /// Component labels of the converged solutions.
    pub realized: BTreeSet<Vec<u8>>,
    pub attempts: usize,
    pub converged: usize,
}

impl Census {
    pub fn matches(&self) -> bool {
        self.realized.len() as u64 == self.expected.components
    }
}

/// Solve `seeds_per_class` times for each class and collect the component
/// labels actually reached.
pub fn census(sig: SurfaceSig, spec: GroupSpec, seeds_per_class: usize, seed: u64, exec: Exec) -> Result<Census> {
    let expected = count_components(sig, &GroupTopology::Spec(spec))?;
    let classes = candidate_classes(spec, sig);
    let jobs: Vec<(usize, usize)> =
        (0..classes.len()).flat_map(|c| (0..seeds_per_class).map(move |s| (c, s))).collect();
    let labels = exec.map(jobs.len(), |i| {
        let (c, _) = jobs[i];
        let cfg = trial_config(seed, i as u64);
        solve_relation(sig, spec, classes[c].as_ref(), &cfg)
            .ok()
            .and_then(|r| r.solution)
            .and_then(|x| component_label(&x).ok())
    });
    let mut realized: BTreeSet<Vec<u8>> = labels.iter().flatten().cloned().collect();
    if spec.family() == Family::SO3 && sig.is_orientable() && sig.genus() >= 1 {
        // the explicit pi-rotation pair realizes the nontrivial lift class
        let x = pi_rotation_tuple(sig)?;
        realized.insert(component_label(&x)?);
    }
    Ok(Census {
        expected,
        converged: labels.iter().filter(|l| l.is_some()).count(),
        attempts: jobs.len(),
        realized,
    })
}

/// `(R_x(pi), R_y(pi), e, ..., e)` on an orientable surface of genus >= 1.
pub fn pi_rotation_tuple(sig: SurfaceSig) -> Result<TuplePoint> {
    if !sig.is_orientable() || sig.genus() == 0 {
        return Err(Error::ArityError(format!("{sig} has no handle for the pi-rotation pair")));
    }
    let spec = GroupSpec::so3();
    let rx = GroupElement::new(spec, quaternion_to_rotation([0.0, 1.0, 0.0, 0.0]))?;
    let ry = GroupElement::new(spec, quaternion_to_rotation([0.0, 0.0, 1.0, 0.0]))?;
    let mut gens = vec![rx, ry];
    gens.extend(std::iter::repeat_n(GroupElement::identity(spec), 2 * (sig.genus() - 1)));
    TuplePoint::from_generators(sig, spec, gens)
}

/// Lift sign of the pi-rotation pair (expected `-1`).
pub fn pi_rotation_lift_sign() -> Result<i8> {
    lift_obstruction(&pi_rotation_tuple(SurfaceSig::orientable(1))?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuccessRate {
    pub trials: usize,
    pub successes: usize,
    pub worst_success_residual: f64,
}

/// Commutator preimages of Haar targets (projected into `G_ss` for U(n)).
pub fn commutator_success_rate(spec: GroupSpec, genus: usize, trials: usize, seed: u64, exec: Exec) -> SuccessRate {
    let out = exec.map(trials, |i| {
        let mut rng = stream_rng(seed, i as u64);
        let g = random_target(spec, &mut rng);
        commutator_preimage(&g, genus, &trial_config(seed, i as u64)).ok().map(|r| r.residual)
    });
    SuccessRate {
        trials,
        successes: out.iter().flatten().count(),
        worst_success_residual: out.iter().flatten().fold(0.0, |m: f64, r| m.max(*r)),
    }
}

/// Success rate of unconstrained relation solves.
pub fn relation_success_rate(sig: SurfaceSig, spec: GroupSpec, trials: usize, seed: u64, exec: Exec) -> SuccessRate {
    let out = exec.map(trials, |i| {
        solve_relation(sig, spec, None, &trial_config(seed, i as u64)).ok().map(|r| r.residual)
    });
    SuccessRate {
        trials,
        successes: out.iter().flatten().count(),
        worst_success_residual: out.iter().flatten().fold(0.0, |m: f64, r| m.max(*r)),
    }
}

/// `max |det mu(x) - 1|` over Haar tuples.
pub fn commutator_det_defect(spec: GroupSpec, genus: usize, trials: usize, seed: u64, exec: Exec) -> f64 {
    exec.map(trials, |i| {
        let mut rng = stream_rng(seed, i as u64);
        let handles: Vec<_> = (0..genus).map(|_| (haar_with(spec, &mut rng), haar_with(spec, &mut rng))).collect();
        commutator_mu(&handles).map_or(f64::INFINITY, |m| (m.det() - crate::lie::ONE).norm())
    })
    .into_iter()
    .fold(0.0, f64::max)
}

/// One sampled solution per trial, in trial order.
pub fn sample(
    sig: SurfaceSig,
    spec: GroupSpec,
    class: Option<&ObstructionClass>,
    count: usize,
    seed: u64,
    exec: Exec,
) -> Vec<Result<SolverReport>> {
    exec.map(count, |i| solve_relation(sig, spec, class, &trial_config(seed, i as u64)))
}

/// Residual of a sampled point, recomputed.
pub fn residual_of(report: &SolverReport) -> Option<f64> {
    report.solution.as_ref().map(relation_residual)
}

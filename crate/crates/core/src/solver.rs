//! Numerical solutions of `relation(x) = target` on products of matrix groups.
//!
//! Each restart minimizes `f(x) = ||W(x) - T||_F^2` where `W` is the relation
//! word. Moves are left translations `x_j <- x_j exp(-alpha grad_j)` with
//! Armijo backtracking; once the residual is below `1e-3` a Gauss-Newton
//! polish in left-trivialized coordinates takes it to `polish_tol`.
//! Restarts draw fresh Haar points from `stream_rng(seed, restart)` and the
//! first converging restart (by index) wins, so results do not depend on
//! the execution strategy.

use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::lie::{
    algebra_basis, exp_skew, frobenius, haar_with, identity, project_matrix, quaternion_to_rotation,
    reproject_matrix, AlgebraElement, CMat, Family, GroupElement, GroupSpec, C64, ONE,
};
use crate::rng::{stream_rng, Rng as StreamRng};
use crate::surface::{eval_word, suffix_products, Letter, SurfaceSig, TuplePoint};
use crate::tol;
use crate::topology::{lift_obstruction, obstruction, ObstructionClass};

/// Residual below which the Gauss-Newton polish takes over.
const POLISH_START: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub step_init: f64,
    pub armijo_c: f64,
    pub residual_tol: f64,
    pub polish_tol: f64,
    pub restarts: usize,
    pub seed: u64,
    pub reproject_every: usize,
    pub record_history: bool,
    pub exec: Exec,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iters: 10_000,
            step_init: 0.1,
            armijo_c: 1e-4,
            residual_tol: tol::ACCEPT,
            polish_tol: tol::POLISH,
            restarts: 10,
            seed: 0,
            reproject_every: 100,
            record_history: false,
            exec: Exec::default(),
        }
    }
}

impl SolverConfig {
    pub fn with_seed(seed: u64) -> Self {
        SolverConfig { seed, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = self.max_iters > 0
            && self.step_init > 0.0
            && self.armijo_c > 0.0
            && self.armijo_c < 1.0
            && self.residual_tol > 0.0
            && self.residual_tol < 1.0
            && self.polish_tol > 0.0
            && self.restarts > 0
            && self.reproject_every > 0;
        if positive {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid solver configuration {self:?}")))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverReport {
    pub solution: Option<TuplePoint>,
    pub residual: f64,
    pub iters: usize,
    pub restarts_used: usize,
    pub converged: bool,
    /// Objective `f` after each accepted descent step (if recorded).
    pub history: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum ClassTarget {
    /// Product of crosscap determinants is `(-1)^bit`.
    Det(u8),
    /// SO(3) lift sign.
    Lift(i8),
}

struct Problem {
    sig: SurfaceSig,
    spec: GroupSpec,
    word: Vec<Letter>,
    target: CMat,
    /// Algebra in which each generator moves.
    move_specs: Vec<GroupSpec>,
    class: Option<ClassTarget>,
}

struct RunOutcome {
    mats: Vec<CMat>,
    residual: f64,
    iters: usize,
    history: Vec<f64>,
}

impl Problem {
    fn objective(&self, mats: &[CMat]) -> f64 {
        let r = eval_word(&self.word, mats) - &self.target;
        r.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Per-generator Riemannian gradient of `f` for the metric `Re tr(a* b)`.
    fn gradient(&self, mats: &[CMat]) -> Vec<CMat> {
        let n = self.spec.n();
        let suffixes = suffix_products(&self.word, mats);
        let w = &suffixes[0];
        let p = identity(n) - w.adjoint() * &self.target;
        let mut acc = vec![CMat::zeros(n, n); mats.len()];
        for (k, l) in self.word.iter().enumerate() {
            if l.inverted {
                let q = &suffixes[k];
                acc[l.generator] -= q * &p * q.adjoint();
            } else {
                let q = &suffixes[k + 1];
                acc[l.generator] += q * &p * q.adjoint();
            }
        }
        acc.iter()
            .zip(&self.move_specs)
            .map(|(m, s)| project_matrix(*s, m) * C64::new(2.0, 0.0))
            .collect()
    }

    fn step(&self, mats: &[CMat], dirs: &[CMat], alpha: f64) -> Vec<CMat> {
        mats.iter()
            .zip(dirs)
            .zip(&self.move_specs)
            .map(|((x, d), s)| x * exp_skew(*s, &(d * C64::new(-alpha, 0.0))))
            .collect()
    }

    fn reproject(&self, mats: &[CMat]) -> Vec<CMat> {
        mats.iter().map(|m| reproject_matrix(self.spec, m)).collect()
    }

    /// Gauss-Newton iterations on `r(x) = W(x) - T` in left-trivialized
    /// algebra coordinates.
    fn polish(&self, mats: &[CMat], tol_target: f64) -> Vec<CMat> {
        let n = self.spec.n();
        let bases: Vec<Vec<CMat>> = self.move_specs.iter().map(|s| algebra_basis(*s)).collect();
        let mut x = mats.to_vec();
        let mut f = self.objective(&x);
        for _ in 0..30 {
            if f.sqrt() <= tol_target {
                break;
            }
            let suffixes = suffix_products(&self.word, &x);
            let w = suffixes[0].clone();
            let r = &w - &self.target;
            let cols: usize = bases.iter().map(|b| b.len()).sum();
            let mut jac = DMatrix::<f64>::zeros(2 * n * n, cols);
            let mut col = 0;
            for (j, basis) in bases.iter().enumerate() {
                for e in basis {
                    let mut d = CMat::zeros(n, n);
                    for (k, l) in self.word.iter().enumerate() {
                        if l.generator != j {
                            continue;
                        }
                        if l.inverted {
                            let q = &suffixes[k];
                            d -= q.adjoint() * e * q;
                        } else {
                            let q = &suffixes[k + 1];
                            d += q.adjoint() * e * q;
                        }
                    }
                    let dw = &w * d;
                    for (i, z) in dw.iter().enumerate() {
                        jac[(2 * i, col)] = z.re;
                        jac[(2 * i + 1, col)] = z.im;
                    }
                    col += 1;
                }
            }
            let rv = DVector::from_iterator(2 * n * n, r.iter().flat_map(|z| [z.re, z.im]));
            let svd = jac.svd(true, true);
            let eps = 1e-10 * svd.singular_values.max().max(1e-300);
            let Ok(delta) = svd.solve(&rv, eps) else { break };
            let mut improved = false;
            let mut scale = 1.0;
            for _ in 0..8 {
                let mut trial = Vec::with_capacity(x.len());
                let mut offset = 0;
                for (xj, basis) in x.iter().zip(&bases) {
                    let mut eta = CMat::zeros(n, n);
                    for (b, e) in basis.iter().enumerate() {
                        eta += e * C64::new(-scale * delta[offset + b], 0.0);
                    }
                    offset += basis.len();
                    trial.push(xj * exp_skew(self.move_specs[trial.len()], &eta));
                }
                let ft = self.objective(&trial);
                if ft < f {
                    x = trial;
                    f = ft;
                    improved = true;
                    break;
                }
                scale *= 0.5;
            }
            if !improved {
                break;
            }
        }
        x
    }

    fn run(&self, init: Vec<CMat>, cfg: &SolverConfig) -> RunOutcome {
        let mut x = init;
        let mut f = self.objective(&x);
        let mut history = Vec::new();
        if cfg.record_history {
            history.push(f);
        }
        let mut alpha = cfg.step_init;
        let alpha_max = 1.0f64.max(cfg.step_init);
        let mut last_polish = f64::INFINITY;
        let mut iters = 0;
        while iters < cfg.max_iters {
            let res = f.sqrt();
            if res <= cfg.polish_tol {
                break;
            }
            if res < POLISH_START && res < 0.1 * last_polish {
                last_polish = res;
                let y = self.reproject(&self.polish(&x, cfg.polish_tol));
                let fy = self.objective(&y);
                if fy < f {
                    x = y;
                    f = fy;
                    if cfg.record_history {
                        history.push(f);
                    }
                }
                if f.sqrt() <= cfg.residual_tol {
                    break;
                }
            }
            iters += 1;
            let g = self.gradient(&x);
            let g2: f64 = g.iter().map(|m| m.iter().map(|z| z.norm_sqr()).sum::<f64>()).sum();
            if g2 < 1e-30 {
                break;
            }
            alpha = (alpha * 2.0).min(alpha_max);
            let mut accepted = false;
            while alpha > 1e-14 {
                let trial = self.step(&x, &g, alpha);
                let ft = self.objective(&trial);
                if ft <= f - cfg.armijo_c * alpha * g2 {
                    x = trial;
                    f = ft;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted {
                break;
            }
            if cfg.record_history {
                history.push(f);
            }
            if iters % cfg.reproject_every == 0 {
                x = self.reproject(&x);
                f = self.objective(&x);
            }
        }
        x = self.reproject(&x);
        let residual = frobenius(&(eval_word(&self.word, &x) - &self.target));
        RunOutcome { mats: x, residual, iters, history }
    }

    fn seed_point(&self, rng: &mut StreamRng) -> Vec<CMat> {
        let n = self.spec.n();
        let m = self.sig.crosscaps();
        let arity = self.sig.arity();
        let mut x: Vec<CMat> = (0..arity).map(|_| haar_with(self.spec, rng).into_matrix()).collect();
        match self.class {
            Some(ClassTarget::Det(bit)) => {
                let su = GroupSpec::special_unitary(n);
                for j in 0..m {
                    let mut c = haar_with(su, rng).into_matrix();
                    if j == 0 && bit == 1 {
                        let col = c.column(0) * (-ONE);
                        c.set_column(0, &col);
                    }
                    x[arity - m + j] = c;
                }
            }
            Some(ClassTarget::Lift(-1)) if self.sig.genus() >= 1 => {
                // a random conjugate of the pi-rotation pair, slightly perturbed,
                // with the remaining handles near the identity
                let h = haar_with(self.spec, rng).into_matrix();
                let rx = quaternion_to_rotation([0.0, 1.0, 0.0, 0.0]);
                let ry = quaternion_to_rotation([0.0, 0.0, 1.0, 0.0]);
                x[0] = &h * rx * h.adjoint();
                x[1] = &h * ry * h.adjoint();
                for (j, g) in x.iter_mut().enumerate() {
                    let scale = if j < 2 { 0.05 } else { 0.3 };
                    let eta = AlgebraElement::random(self.spec, rng).scale(scale);
                    let base = if j < 2 { g.clone() } else { identity(n) };
                    *g = base * exp_skew(self.spec, eta.matrix());
                }
            }
            _ => {}
        }
        x
    }

    fn class_ok(&self, x: &TuplePoint) -> bool {
        match self.class {
            None => true,
            Some(ClassTarget::Det(bit)) => {
                obstruction(x).is_ok_and(|c| c.bits() == [bit])
            }
            Some(ClassTarget::Lift(s)) => lift_obstruction(x) == Ok(s),
        }
    }

    fn solve(&self, cfg: &SolverConfig) -> SolverReport {
        let best = AtomicU64::new(f64::INFINITY.to_bits());
        let hit = cfg.exec.find_first(cfg.restarts, |r| {
            let mut rng = stream_rng(cfg.seed, r as u64);
            let out = self.run(self.seed_point(&mut rng), cfg);
            best.fetch_min(out.residual.to_bits(), Ordering::Relaxed);
            let x = TuplePoint::from_matrices(self.sig, self.spec, out.mats.clone());
            (out.residual <= cfg.residual_tol && self.class_ok(&x)).then_some((x, out))
        });
        match hit {
            Some((r, (x, out))) => SolverReport {
                solution: Some(x),
                residual: out.residual,
                iters: out.iters,
                restarts_used: r + 1,
                converged: true,
                history: out.history,
            },
            None => SolverReport {
                solution: None,
                residual: f64::from_bits(best.load(Ordering::Relaxed)),
                iters: 0,
                restarts_used: cfg.restarts,
                converged: false,
                history: Vec::new(),
            },
        }
    }
}

fn finish(report: SolverReport) -> Result<SolverReport> {
    if report.converged {
        Ok(report)
    } else {
        Err(Error::NoConvergence { restarts: report.restarts_used, best: report.residual })
    }
}

fn class_target(sig: SurfaceSig, spec: GroupSpec, class: Option<&ObstructionClass>) -> Result<Option<ClassTarget>> {
    let Some(class) = class else { return Ok(None) };
    match spec.family() {
        Family::SO3 => match class.bits() {
            [b] => Ok(Some(ClassTarget::Lift(if *b == 1 { -1 } else { 1 }))),
            _ => Err(Error::InvalidInput(format!("SO(3) class needs one bit, got {class:?}"))),
        },
        _ if class.bits().len() != spec.dim_s() => Err(Error::InvalidInput(format!(
            "{spec} has dim S = {}, class {:?} has {} bits",
            spec.dim_s(),
            class.bits(),
            class.bits().len()
        ))),
        Family::SU => Ok(None),
        Family::U if sig.is_orientable() => Err(Error::OrientableSurface),
        Family::U => Ok(Some(ClassTarget::Det(class.bits()[0]))),
    }
}

/// Find `x` with `relation(x) = e`, optionally in a prescribed component
/// class (K-bits for U(n), lift bit for SO(3)).
pub fn solve_relation(
    sig: SurfaceSig,
    spec: GroupSpec,
    target: Option<&ObstructionClass>,
    cfg: &SolverConfig,
) -> Result<SolverReport> {
    cfg.validate()?;
    sig.require_not_excluded()?;
    if sig.arity() == 0 {
        return Err(Error::ArityError("the sphere has no generators to solve for".into()));
    }
    let class = class_target(sig, spec, target)?;
    let mut move_specs = vec![spec; sig.arity()];
    if matches!(class, Some(ClassTarget::Det(_))) {
        let su = GroupSpec::special_unitary(spec.n());
        for s in move_specs.iter_mut().skip(2 * sig.genus()) {
            *s = su;
        }
    }
    let problem = Problem { sig, spec, word: sig.word(), target: identity(spec.n()), move_specs, class };
    finish(problem.solve(cfg))
}

/// Find `(a_i, b_i)` with `prod [a_i, b_i] = g`.
pub fn commutator_preimage(g: &GroupElement, genus: usize, cfg: &SolverConfig) -> Result<SolverReport> {
    cfg.validate()?;
    if genus == 0 {
        return Err(Error::ArityError("commutator preimage needs at least one handle".into()));
    }
    let spec = g.spec();
    let dd = (g.det() - ONE).norm();
    if dd > tol::POST {
        return Err(Error::ImageViolation(dd));
    }
    let sig = SurfaceSig::orientable(genus as u32);
    let trivial = g.distance_to_identity();
    if trivial <= tol::POLISH {
        return Ok(SolverReport {
            solution: Some(TuplePoint::identity(sig, spec)),
            residual: trivial,
            iters: 0,
            restarts_used: 0,
            converged: true,
            history: Vec::new(),
        });
    }
    let problem = Problem {
        sig,
        spec,
        word: sig.word(),
        target: g.matrix().clone(),
        move_specs: vec![spec; sig.arity()],
        class: None,
    };
    finish(problem.solve(cfg))
}

/// Haar-random target in `spec` for success-rate trials, pushed into the
/// commutator image for U(n) by dividing out the determinant.
pub fn random_target<R: Rng + ?Sized>(spec: GroupSpec, rng: &mut R) -> GroupElement {
    let g = haar_with(spec, rng);
    match spec.family() {
        Family::U => {
            let root = crate::lie::principal_root(g.det(), spec.n());
            GroupElement::from_raw(spec, g.into_matrix() / root)
        }
        _ => g,
    }
}

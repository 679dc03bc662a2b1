//! Explicit paths inside representation varieties.
//!
//! * [`deform_to_semisimple`] pushes a U(n) tuple on an orientable surface
//!   into SU(n) by stripping central parts, keeping `mu` fixed.
//! * [`path_odd`] joins `(a, e, ..., e, k)` to a tuple ending in a given
//!   crosscap generator `c` (one crosscap).
//! * [`path_even`] does the same for a pair `(c1, c2)` (two crosscaps).
//!
//! Along the odd and even paths the relation word evaluates to `k~^2` where
//! `k~` is the chosen central lift, so the path lies in the solution variety
//! exactly when `k~^2 = e`. The checked constructors insist on such a lift;
//! the `_with_lift` variants take any lift and are used to exhibit the
//! failure when none exists.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{
    det, diagonal, exp_skew, frobenius, group_log, principal_root, scalar_matrix,
    traceless_angles, unitary_eigen, CMat, Family, GroupElement, GroupSpec, C64, ONE,
};
use crate::rootsys::{build_root_system, build_weyl_element, solve_translation, torus_representative, RootType};
use crate::surface::{eval_word, relation_value, SurfaceSig, TuplePoint};
use crate::tol;
use crate::topology::component_label;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathKind {
    #[serde(rename = "deform_ss")]
    DeformSs,
    #[serde(rename = "odd")]
    Odd,
    #[serde(rename = "even")]
    Even,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathEnd {
    Start,
    End,
}

/// A declared value of one generator at one end of the path.
#[derive(Clone, Debug, PartialEq)]
pub struct Pin {
    pub end: PathEnd,
    pub slot: usize,
    pub target: GroupElement,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupPath {
    kind: PathKind,
    steps: Vec<(f64, TuplePoint)>,
    /// `||relation(point) - target||_F` per step.
    residuals: Vec<f64>,
    target: GroupElement,
    lift: Option<C64>,
    pins: Vec<Pin>,
}

impl GroupPath {
    fn build(
        kind: PathKind,
        steps: Vec<(f64, TuplePoint)>,
        target: GroupElement,
        lift: Option<C64>,
        pins: Vec<Pin>,
    ) -> Self {
        let residuals = steps.iter().map(|(_, p)| relation_value(p).distance(&target)).collect();
        GroupPath { kind, steps, residuals, target, lift, pins }
    }

    pub fn kind(&self) -> PathKind {
        self.kind
    }

    pub fn steps(&self) -> &[(f64, TuplePoint)] {
        &self.steps
    }

    pub fn points(&self) -> impl Iterator<Item = &TuplePoint> + '_ {
        self.steps.iter().map(|(_, p)| p)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.steps.iter().map(|(t, _)| *t)
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    /// The relation value a solution must attain (`e`, or `mu(x)` for the
    /// central deformation).
    pub fn target(&self) -> &GroupElement {
        &self.target
    }

    pub fn lift(&self) -> Option<C64> {
        self.lift
    }

    pub fn pins(&self) -> &[Pin] {
        &self.pins
    }

    pub fn start(&self) -> &TuplePoint {
        &self.steps[0].1
    }

    pub fn end(&self) -> &TuplePoint {
        &self.steps[self.steps.len() - 1].1
    }

    /// What the relation word evaluates to along the construction: `k~^2`
    /// for the crosscap paths, the fixed `mu`-value for the deformation.
    pub fn expected_relation(&self) -> GroupElement {
        match self.lift {
            Some(k) => GroupElement::scalar(self.target.spec(), k * k),
            None => self.target.clone(),
        }
    }

    /// `max_t ||relation(gamma(t)) - expected||_F`.
    pub fn relation_constancy(&self, expected: &GroupElement) -> f64 {
        self.points().map(|p| relation_value(p).distance(expected)).fold(0.0, f64::max)
    }

    /// Copy with step `i` replaced (used to build negative controls).
    pub fn with_step(&self, i: usize, point: TuplePoint) -> Result<GroupPath> {
        if i >= self.steps.len() {
            return Err(Error::InvalidInput(format!("path has {} steps, no step {i}", self.steps.len())));
        }
        if point.sig() != self.start().sig() || point.spec() != self.start().spec() {
            return Err(Error::SpecMismatch("replacement point has a different surface or group".into()));
        }
        let mut p = self.clone();
        p.residuals[i] = relation_value(&point).distance(&p.target);
        p.steps[i].1 = point;
        Ok(p)
    }

    pub(crate) fn from_parts(
        kind: PathKind,
        steps: Vec<(f64, TuplePoint)>,
        target: GroupElement,
        lift: Option<C64>,
        pins: Vec<Pin>,
    ) -> Self {
        Self::build(kind, steps, target, lift, pins)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathCertificate {
    pub max_residual: f64,
    pub endpoint_errors: Vec<f64>,
    pub class_constant: bool,
    pub times_ok: bool,
    pub certified: bool,
}

/// Recompute everything from the stored points; nothing cached is trusted.
pub fn certify_path(p: &GroupPath) -> PathCertificate {
    let max_residual = p
        .points()
        .map(|x| relation_value(x).distance(&p.target))
        .fold(0.0, |m: f64, r| if r.is_nan() { f64::INFINITY } else { m.max(r) });
    let endpoint_errors: Vec<f64> = p
        .pins
        .iter()
        .map(|pin| {
            let x = match pin.end {
                PathEnd::Start => p.start(),
                PathEnd::End => p.end(),
            };
            x.generators().get(pin.slot).map_or(f64::INFINITY, |g| g.distance(&pin.target))
        })
        .collect();
    let times: Vec<f64> = p.times().collect();
    let times_ok = !times.is_empty()
        && times[0] == 0.0
        && times[times.len() - 1] == 1.0
        && times.windows(2).all(|w| w[0] < w[1]);
    let labels: Vec<_> = p.points().map(component_label).collect();
    let class_constant = if labels.iter().all(|l| l.is_err()) {
        // not a family of solutions: no class to track
        p.target.distance_to_identity() > tol::ACCEPT
    } else {
        labels.iter().all(|l| l.is_ok() && l == &labels[0])
    };
    let certified = times_ok
        && max_residual <= tol::PATH_RESIDUAL
        && endpoint_errors.iter().all(|e| *e <= tol::PATH_ENDPOINT)
        && class_constant;
    PathCertificate { max_residual, endpoint_errors, class_constant, times_ok, certified }
}

// ---------------------------------------------------------------------------
// helpers

fn time_grid(steps: usize) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(Error::InvalidInput("a path needs at least one step".into()));
    }
    Ok((0..=steps).map(|i| if i == steps { 1.0 } else { i as f64 / steps as f64 }).collect())
}

/// `h = g exp(i diag(angles)) g^-1` with `g = exp(log_g)` in SU(n) and the
/// angles summing to zero.
#[derive(Clone, Debug)]
pub(crate) struct Diagonalization {
    pub log_g: CMat,
    pub angles: Vec<f64>,
}

pub(crate) fn diagonalize_su(h: &CMat) -> Result<Diagonalization> {
    let n = h.nrows();
    let (mut q, d) = unitary_eigen(h);
    let dq = det(&q);
    let col0 = q.column(0) / dq;
    q.set_column(0, &col0);
    let mut angles: Vec<f64> = d.iter().map(|z| z.arg()).collect();
    traceless_angles(&mut angles);
    let su = GroupSpec::special_unitary(n);
    // diagonal SU(n) elements commute with the torus, so right-multiplying
    // g by one leaves the decomposition intact while moving g off the cut
    let shifts = [0.0, 0.7, 1.3, 2.1, 0.31, 1.77, 2.6, 0.05];
    for (k, phi) in shifts.iter().enumerate() {
        let mut entries = vec![ONE; n];
        if n > 1 {
            let i = k % n;
            let j = (k + 1) % n;
            entries[i] = C64::from_polar(1.0, *phi);
            entries[j] = C64::from_polar(1.0, -*phi);
        }
        let g = &q * diagonal(&entries);
        match group_log(&GroupElement::from_raw(su, g)) {
            Ok(x) => return Ok(Diagonalization { log_g: x.matrix().clone(), angles }),
            Err(Error::AmbiguousBranch { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::BranchFailure("no branch-safe diagonalizing element found".into()))
}

fn exp_diag(angles: &[f64], t: f64) -> CMat {
    diagonal(&angles.iter().map(|&a| C64::from_polar(1.0, t * a)).collect::<Vec<_>>())
}

/// The cyclic representative `a` and `xi'` with `a e^{xi'} a^-1 e^{-xi'} = e^{xi}`.
pub(crate) fn weyl_data(n: usize, angles: &[f64]) -> Result<(CMat, Vec<f64>)> {
    if n == 1 {
        return Ok((scalar_matrix(1, ONE), vec![0.0]));
    }
    let system = build_root_system(RootType::A, n - 1)?;
    let w = build_weyl_element(&system);
    let a = torus_representative(GroupSpec::special_unitary(n), &w)?;
    let xi_p = solve_translation(&w, angles)?;
    Ok((a.into_matrix(), xi_p))
}

fn ensure_family(spec: GroupSpec) -> Result<()> {
    match spec.family() {
        Family::U | Family::SU => Ok(()),
        Family::SO3 => Err(Error::UnsupportedGroup(format!("path constructions need U(n) or SU(n), got {spec}"))),
    }
}

/// `+1` or `-1` as a central lift of `k = det` with `lift^2 = 1`.
fn involutive_lift(spec: GroupSpec, k: C64) -> Result<C64> {
    let n = spec.n();
    if (k - ONE).norm() <= tol::ACCEPT {
        Ok(ONE)
    } else if (k + ONE).norm() <= tol::ACCEPT {
        if n % 2 == 1 {
            Ok(-ONE)
        } else {
            Err(Error::NoInvolutiveLift { k: -1, group: spec.to_string() })
        }
    } else {
        Err(Error::ClassNotInK(format!("det = {k} is not +-1")))
    }
}

fn check_lift(spec: GroupSpec, lift: C64, k: C64) -> Result<()> {
    let n = spec.n() as i32;
    if (lift.norm() - 1.0).abs() > tol::POST || (lift.powi(n) - k).norm() > tol::ACCEPT {
        return Err(Error::InvalidLift(format!("{lift} is not a central lift of {k} in {spec}")));
    }
    Ok(())
}

fn require_sig(sig: SurfaceSig, crosscaps: usize, min_genus: usize) -> Result<()> {
    sig.require_not_excluded()?;
    if sig.is_orientable() || sig.crosscaps() != crosscaps {
        return Err(Error::ArityError(format!("{sig} does not have {crosscaps} crosscap generator(s)")));
    }
    if sig.genus() < min_genus {
        return Err(Error::ArityError(format!("{sig} has {} handles, need {min_genus}", sig.genus())));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// constructions

/// Path from `x` to its semisimple parts: `g_j(t) = g_j lambda_j^{-t}` with
/// `lambda_j` the central part of `g_j`. The commutator product is unchanged
/// because central factors cancel in each commutator.
pub fn deform_to_semisimple(x: &TuplePoint, steps: usize) -> Result<GroupPath> {
    let sig = x.sig();
    let spec = x.spec();
    ensure_family(spec)?;
    if !sig.is_orientable() {
        return Err(Error::UnsupportedCombination(format!(
            "central deformation keeps mu fixed only on orientable surfaces, got {sig}"
        )));
    }
    let n = spec.n();
    let angles: Vec<f64> = match spec.family() {
        Family::U => x.generators().iter().map(|g| principal_root(g.det(), n).arg()).collect(),
        _ => vec![0.0; sig.arity()],
    };
    let mats = x.matrices();
    let mut out = Vec::new();
    for t in time_grid(steps)? {
        let gens: Vec<CMat> =
            mats.iter().zip(&angles).map(|(g, a)| g * C64::from_polar(1.0, -t * a)).collect();
        out.push((t, TuplePoint::from_matrices(sig, spec, gens)));
    }
    let end_gens: Vec<CMat> =
        mats.iter().zip(&angles).map(|(g, a)| g * C64::from_polar(1.0, -a)).collect();
    let pins = end_gens
        .into_iter()
        .enumerate()
        .map(|(slot, m)| Pin { end: PathEnd::End, slot, target: GroupElement::from_raw(spec, m) })
        .chain(
            x.generators()
                .iter()
                .enumerate()
                .map(|(slot, g)| Pin { end: PathEnd::Start, slot, target: g.clone() }),
        )
        .collect();
    let target = relation_value(x);
    Ok(GroupPath::build(PathKind::DeformSs, out, target, None, pins))
}

/// One crosscap (`k = 2l + 1`): a path from `(a, e, e, ..., k~)` to a tuple
/// whose crosscap generator is `c`, with `k~ = +-I` the involutive lift of
/// `det c`.
pub fn path_odd(c: &GroupElement, sig: SurfaceSig, steps: usize) -> Result<GroupPath> {
    ensure_family(c.spec())?;
    let lift = involutive_lift(c.spec(), c.det())?;
    path_odd_with_lift(c, sig, lift, steps)
}

/// [`path_odd`] with an arbitrary central lift `lift * I`, `lift^n = det c`.
pub fn path_odd_with_lift(c: &GroupElement, sig: SurfaceSig, lift: C64, steps: usize) -> Result<GroupPath> {
    let spec = c.spec();
    ensure_family(spec)?;
    require_sig(sig, 1, 1)?;
    check_lift(spec, lift, c.det())?;
    let n = spec.n();
    let grid = time_grid(steps)?;

    let h = c.matrix() / lift;
    let dg = diagonalize_su(&h)?;
    let (a, xi_p) = weyl_data(n, &dg.angles)?;
    let su = GroupSpec::special_unitary(n);
    let id = scalar_matrix(n, ONE);
    let k_mat = scalar_matrix(n, lift);

    let mut out = Vec::with_capacity(grid.len());
    for &t in &grid {
        let gb = exp_skew(su, &(&dg.log_g * C64::new(t, 0.0)));
        let gbi = gb.adjoint();
        let a_t = &gb * &a * &gbi;
        let b_t = &gb * exp_diag(&xi_p, -2.0 * t) * &gbi;
        let c_t = &k_mat * &gb * exp_diag(&dg.angles, t) * &gbi;
        let mut gens = vec![a_t, b_t];
        gens.extend(std::iter::repeat_n(id.clone(), 2 * (sig.genus() - 1)));
        gens.push(c_t);
        out.push((t, TuplePoint::from_matrices(sig, spec, gens)));
    }

    let cslot = sig.arity() - 1;
    let mut pins = vec![
        Pin { end: PathEnd::Start, slot: 0, target: GroupElement::from_raw(spec, a) },
        Pin { end: PathEnd::Start, slot: cslot, target: GroupElement::from_raw(spec, k_mat) },
        Pin { end: PathEnd::End, slot: cslot, target: c.clone() },
    ];
    for slot in 1..cslot {
        pins.push(Pin { end: PathEnd::Start, slot, target: GroupElement::identity(spec) });
    }
    Ok(GroupPath::build(PathKind::Odd, out, GroupElement::identity(spec), Some(lift), pins))
}

/// Two crosscaps (`k = 2l + 2`, `l >= 2`): a path ending at `(c1, c2)` in the
/// crosscap slots, starting in the fiber over `(e, k~)`.
pub fn path_even(c1: &GroupElement, c2: &GroupElement, sig: SurfaceSig, steps: usize) -> Result<GroupPath> {
    ensure_family(c1.spec())?;
    let lift = involutive_lift(c1.spec(), c1.det() * c2.det())?;
    path_even_with_lift(c1, c2, sig, lift, steps)
}

pub fn path_even_with_lift(
    c1: &GroupElement,
    c2: &GroupElement,
    sig: SurfaceSig,
    lift: C64,
    steps: usize,
) -> Result<GroupPath> {
    let spec = c1.spec();
    ensure_family(spec)?;
    if c2.spec() != spec {
        return Err(Error::SpecMismatch(format!("{} and {}", spec, c2.spec())));
    }
    require_sig(sig, 2, 2)?;
    check_lift(spec, lift, c1.det() * c2.det())?;
    let n = spec.n();
    let grid = time_grid(steps)?;

    // s1 = lambda1 I is the central part of c1, s2 = s1^-1 k~
    let lambda1 = principal_root(c1.det(), n);
    let lambda2 = lift / lambda1;
    let x_angle = lambda1.arg();
    let d1 = diagonalize_su(&(c1.matrix() / lambda1))?;
    let d2 = diagonalize_su(&(c2.matrix() / lambda2))?;
    let (a, xi1_p) = weyl_data(n, &d1.angles)?;
    let (_, xi2_p) = weyl_data(n, &d2.angles)?;
    let su = GroupSpec::special_unitary(n);
    let id = scalar_matrix(n, ONE);

    let mut out = Vec::with_capacity(grid.len());
    for &t in &grid {
        let g1 = exp_skew(su, &(&d1.log_g * C64::new(t, 0.0)));
        let g2 = exp_skew(su, &(&d2.log_g * C64::new(t, 0.0)));
        let (g1i, g2i) = (g1.adjoint(), g2.adjoint());
        let ex = C64::from_polar(1.0, t * x_angle);
        let a1 = &g2 * &a * &g2i;
        let b1 = &g2 * exp_diag(&xi2_p, -2.0 * t) * &g2i;
        let a2 = &g1 * &a * &g1i;
        let b2 = &g1 * exp_diag(&xi1_p, -2.0 * t) * &g1i;
        let c1_t = &g1 * exp_diag(&d1.angles, t) * &g1i * ex;
        let c2_t = &g2 * exp_diag(&d2.angles, t) * &g2i * (lift / ex);
        let mut gens = vec![a1, b1, a2, b2];
        gens.extend(std::iter::repeat_n(id.clone(), 2 * (sig.genus() - 2)));
        gens.push(c1_t);
        gens.push(c2_t);
        out.push((t, TuplePoint::from_matrices(sig, spec, gens)));
    }

    let s1 = 2 * sig.genus();
    let mut pins = vec![
        Pin { end: PathEnd::Start, slot: 0, target: GroupElement::from_raw(spec, a.clone()) },
        Pin { end: PathEnd::Start, slot: 2, target: GroupElement::from_raw(spec, a) },
        Pin { end: PathEnd::Start, slot: s1, target: GroupElement::identity(spec) },
        Pin { end: PathEnd::Start, slot: s1 + 1, target: GroupElement::scalar(spec, lift) },
        Pin { end: PathEnd::End, slot: s1, target: c1.clone() },
        Pin { end: PathEnd::End, slot: s1 + 1, target: c2.clone() },
    ];
    for slot in [1, 3].into_iter().chain(4..s1) {
        pins.push(Pin { end: PathEnd::Start, slot, target: GroupElement::identity(spec) });
    }
    Ok(GroupPath::build(PathKind::Even, out, GroupElement::identity(spec), Some(lift), pins))
}

/// `a exp(t xi') a^-1 exp(-t xi')` against `exp(t xi)`, Frobenius error.
pub fn key_identity_residual(n: usize, angles: &[f64], t: f64) -> Result<f64> {
    let (a, xi_p) = weyl_data(n, angles)?;
    let lhs = &a * exp_diag(&xi_p, t) * a.adjoint() * exp_diag(&xi_p, -t);
    Ok(frobenius(&(lhs - exp_diag(angles, t))))
}

/// Relation word of raw matrices, exposed for diagnostics.
pub fn word_value(sig: SurfaceSig, mats: &[CMat]) -> CMat {
    eval_word(&sig.word(), mats)
}

//! Matrix groups U(n), SU(n) and SO(3) and their Lie algebras.
//!
//! Elements are dense complex matrices tagged with a [`GroupSpec`]. The
//! exponential and logarithm go through unitary eigendecompositions, so
//! they are exact on maximal tori up to roundoff.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Mul;

use nalgebra::{Complex, DMatrix};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::tol;
use crate::topology::FiniteAbelianGroup;

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    U,
    SU,
    SO3,
}

/// Fundamental group of a supported family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pi1 {
    /// pi_1(U(n)) = Z.
    FreeRank1,
    Trivial,
    Finite(FiniteAbelianGroup),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SpecWire", into = "SpecWire")]
pub struct GroupSpec {
    family: Family,
    n: usize,
}

#[derive(Serialize, Deserialize)]
struct SpecWire {
    family: Family,
    #[serde(default)]
    n: Option<usize>,
}

impl TryFrom<SpecWire> for GroupSpec {
    type Error = Error;
    fn try_from(w: SpecWire) -> Result<Self> {
        match w.family {
            Family::SO3 => match w.n {
                None | Some(3) => Ok(GroupSpec::so3()),
                Some(n) => Err(Error::InvalidInput(format!("SO3 has n = 3, got {n}"))),
            },
            f => {
                let n = w
                    .n
                    .ok_or_else(|| Error::InvalidInput("missing matrix size n".into()))?;
                GroupSpec::new(f, n)
            }
        }
    }
}

impl From<GroupSpec> for SpecWire {
    fn from(s: GroupSpec) -> Self {
        SpecWire { family: s.family, n: Some(s.n) }
    }
}

impl GroupSpec {
    pub fn new(family: Family, n: usize) -> Result<Self> {
        match family {
            Family::SO3 if n != 3 => Err(Error::InvalidInput(format!("SO3 has n = 3, got {n}"))),
            _ if n == 0 => Err(Error::InvalidInput("matrix size must be positive".into())),
            _ => Ok(GroupSpec { family, n }),
        }
    }

    pub fn unitary(n: usize) -> Self {
        GroupSpec::new(Family::U, n).expect("n > 0")
    }

    pub fn special_unitary(n: usize) -> Self {
        GroupSpec::new(Family::SU, n).expect("n > 0")
    }

    pub fn so3() -> Self {
        GroupSpec { family: Family::SO3, n: 3 }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Dimension of the central torus S.
    pub fn dim_s(&self) -> usize {
        match self.family {
            Family::U => 1,
            Family::SU | Family::SO3 => 0,
        }
    }

    pub fn pi1(&self) -> Pi1 {
        match self.family {
            Family::U => Pi1::FreeRank1,
            Family::SU => Pi1::Trivial,
            Family::SO3 => Pi1::Finite(FiniteAbelianGroup::cyclic(2)),
        }
    }

    pub fn ss_simply_connected(&self) -> bool {
        !matches!(self.family, Family::SO3)
    }

    pub fn is_semisimple(&self) -> bool {
        self.dim_s() == 0
    }

    /// The semisimple part: SU(n) for U(n), the group itself otherwise.
    pub fn semisimple(&self) -> GroupSpec {
        match self.family {
            Family::U => GroupSpec { family: Family::SU, n: self.n },
            _ => *self,
        }
    }

    pub fn algebra_dim(&self) -> usize {
        match self.family {
            Family::U => self.n * self.n,
            Family::SU => self.n * self.n - 1,
            Family::SO3 => 3,
        }
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::U => write!(f, "U({})", self.n),
            Family::SU => write!(f, "SU({})", self.n),
            Family::SO3 => write!(f, "SO(3)"),
        }
    }
}

// ---------------------------------------------------------------------------
// matrix helpers

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn adjoint(m: &CMat) -> CMat {
    m.adjoint()
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `||m* m - I||_F`.
pub fn unitarity_defect(m: &CMat) -> f64 {
    frobenius(&(m.adjoint() * m - identity(m.nrows())))
}

pub fn det(m: &CMat) -> C64 {
    m.clone().lu().determinant()
}

pub fn scalar_matrix(n: usize, z: C64) -> CMat {
    CMat::from_diagonal_element(n, n, z)
}

pub fn diagonal(entries: &[C64]) -> CMat {
    CMat::from_diagonal(&nalgebra::DVector::from_column_slice(entries))
}

/// Nearest unitary matrix (polar factor).
pub fn polar(m: &CMat) -> CMat {
    let svd = m.clone().svd(true, true);
    svd.u.expect("u requested") * svd.v_t.expect("v_t requested")
}

/// Principal n-th root of a unit complex number: angle in (-pi/n, pi/n].
pub fn principal_root(z: C64, n: usize) -> C64 {
    C64::from_polar(1.0, z.arg() / n as f64)
}

/// Eigendecomposition `m = q diag(d) q*` of a normal matrix, eigenvalues
/// ordered by ascending angle in (-pi, pi].
pub fn unitary_eigen(m: &CMat) -> (CMat, Vec<C64>) {
    let n = m.nrows();
    let (q, t) = m.clone().schur().unpack();
    let mut order: Vec<usize> = (0..n).collect();
    let angles: Vec<f64> = (0..n).map(|i| t[(i, i)].arg()).collect();
    order.sort_by(|&a, &b| angles[a].total_cmp(&angles[b]).then(a.cmp(&b)));
    let mut q_sorted = CMat::zeros(n, n);
    let mut d = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        q_sorted.set_column(dst, &q.column(src));
        d.push(t[(src, src)]);
    }
    (q_sorted, d)
}

/// Shift principal angles by multiples of 2 pi so they sum to zero.
///
/// Requires the angles to sum to an integer multiple of 2 pi (the
/// eigenvalue angles of a determinant-one matrix). The largest angles move
/// down when the sum is positive, the smallest move up when negative.
pub fn traceless_angles(angles: &mut [f64]) {
    let total: f64 = angles.iter().sum();
    let m = (total / (2.0 * PI)).round() as i64;
    if m == 0 {
        return;
    }
    let mut order: Vec<usize> = (0..angles.len()).collect();
    order.sort_by(|&a, &b| angles[a].total_cmp(&angles[b]));
    if m > 0 {
        for &i in order.iter().rev().take(m as usize) {
            angles[i] -= 2.0 * PI;
        }
    } else {
        for &i in order.iter().take((-m) as usize) {
            angles[i] += 2.0 * PI;
        }
    }
}

// ---------------------------------------------------------------------------
// group elements

#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    spec: GroupSpec,
    mat: CMat,
}

impl GroupElement {
    /// Validating constructor at the post-computation tier.
    pub fn new(spec: GroupSpec, mat: CMat) -> Result<Self> {
        Self::with_tolerance(spec, mat, tol::POST)
    }

    pub fn with_tolerance(spec: GroupSpec, mat: CMat, tolerance: f64) -> Result<Self> {
        let g = GroupElement { spec, mat };
        g.check_invariants(tolerance)?;
        Ok(g)
    }

    pub(crate) fn from_raw(spec: GroupSpec, mat: CMat) -> Self {
        debug_assert_eq!(mat.nrows(), spec.n);
        GroupElement { spec, mat }
    }

    pub fn identity(spec: GroupSpec) -> Self {
        GroupElement { spec, mat: identity(spec.n) }
    }

    /// `z * I`. Caller guarantees `z` lies in the group's center.
    pub fn scalar(spec: GroupSpec, z: C64) -> Self {
        GroupElement { spec, mat: scalar_matrix(spec.n, z) }
    }

    pub fn spec(&self) -> GroupSpec {
        self.spec
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn inverse(&self) -> Self {
        GroupElement { spec: self.spec, mat: self.mat.adjoint() }
    }

    /// `h * self * h^-1`.
    pub fn conjugated_by(&self, h: &GroupElement) -> Self {
        GroupElement { spec: self.spec, mat: &h.mat * &self.mat * h.mat.adjoint() }
    }

    pub fn det(&self) -> C64 {
        det(&self.mat)
    }

    pub fn distance(&self, other: &GroupElement) -> f64 {
        frobenius(&(&self.mat - &other.mat))
    }

    pub fn distance_to_identity(&self) -> f64 {
        frobenius(&(&self.mat - identity(self.spec.n)))
    }

    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.mat)
    }

    pub fn check_invariants(&self, tolerance: f64) -> Result<()> {
        let n = self.spec.n;
        if self.mat.nrows() != n || self.mat.ncols() != n {
            return Err(Error::InvalidElement(format!(
                "{} needs a {n}x{n} matrix, got {}x{}",
                self.spec,
                self.mat.nrows(),
                self.mat.ncols()
            )));
        }
        let defect = self.unitarity_defect();
        if defect.is_nan() || defect > tolerance {
            return Err(Error::InvalidElement(format!("unitarity defect {defect:e}")));
        }
        match self.spec.family {
            Family::U => {}
            Family::SU => {
                let d = (self.det() - ONE).norm();
                if d > tolerance {
                    return Err(Error::InvalidElement(format!("|det - 1| = {d:e}")));
                }
            }
            Family::SO3 => {
                let im = self.mat.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
                let d = (self.det() - ONE).norm();
                if im > tolerance || d > tolerance {
                    return Err(Error::InvalidElement(format!(
                        "not a rotation: max |im| = {im:e}, |det - 1| = {d:e}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Polar projection back onto the group, correcting roundoff drift.
    pub fn reproject(&self) -> Self {
        GroupElement { spec: self.spec, mat: reproject_matrix(self.spec, &self.mat) }
    }

    /// Same matrix viewed in another family (e.g. an SU(n) element as a
    /// U(n) element). Validated at the post-computation tier.
    pub fn recast(&self, spec: GroupSpec) -> Result<Self> {
        GroupElement::new(spec, self.mat.clone())
    }
}

pub(crate) fn reproject_matrix(spec: GroupSpec, m: &CMat) -> CMat {
    match spec.family {
        Family::U => polar(m),
        Family::SU => {
            let p = polar(m);
            let root = principal_root(det(&p), spec.n);
            p / root
        }
        Family::SO3 => {
            let real = m.map(|z| C64::new(z.re, 0.0));
            polar(&real)
        }
    }
}

impl Mul for &GroupElement {
    type Output = GroupElement;
    fn mul(self, rhs: &GroupElement) -> GroupElement {
        debug_assert_eq!(self.spec, rhs.spec);
        GroupElement { spec: self.spec, mat: &self.mat * &rhs.mat }
    }
}

impl Mul for GroupElement {
    type Output = GroupElement;
    fn mul(self, rhs: GroupElement) -> GroupElement {
        &self * &rhs
    }
}

// ---------------------------------------------------------------------------
// algebra elements

#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    spec: GroupSpec,
    mat: CMat,
}

impl AlgebraElement {
    pub fn new(spec: GroupSpec, mat: CMat) -> Result<Self> {
        let n = spec.n;
        if mat.nrows() != n || mat.ncols() != n {
            return Err(Error::InvalidElement(format!("algebra of {spec} needs {n}x{n}")));
        }
        let scale = frobenius(&mat).max(1.0);
        let skew = frobenius(&(&mat + mat.adjoint()));
        if skew > tol::CONSTRUCTION * scale {
            return Err(Error::InvalidElement(format!("not skew-Hermitian: {skew:e}")));
        }
        match spec.family {
            Family::U => {}
            Family::SU => {
                let tr = mat.trace().norm();
                if tr > tol::CONSTRUCTION * scale {
                    return Err(Error::InvalidElement(format!("trace {tr:e} != 0")));
                }
            }
            Family::SO3 => {
                let im = mat.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
                if im > tol::CONSTRUCTION * scale {
                    return Err(Error::InvalidElement("so(3) element must be real".into()));
                }
            }
        }
        Ok(AlgebraElement { spec, mat })
    }

    pub fn zero(spec: GroupSpec) -> Self {
        AlgebraElement { spec, mat: CMat::zeros(spec.n, spec.n) }
    }

    /// Orthogonal projection of an arbitrary matrix onto the algebra, for the
    /// inner product `<a, b> = Re tr(a* b)`.
    pub fn project(spec: GroupSpec, m: &CMat) -> Self {
        AlgebraElement { spec, mat: project_matrix(spec, m) }
    }

    pub fn spec(&self) -> GroupSpec {
        self.spec
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn scale(&self, s: f64) -> Self {
        AlgebraElement { spec: self.spec, mat: &self.mat * C64::new(s, 0.0) }
    }

    pub fn add(&self, other: &AlgebraElement) -> Self {
        AlgebraElement { spec: self.spec, mat: &self.mat + &other.mat }
    }

    pub fn inner(&self, other: &AlgebraElement) -> f64 {
        self.mat.iter().zip(other.mat.iter()).map(|(a, b)| (a.conj() * b).re).sum()
    }

    pub fn norm(&self) -> f64 {
        frobenius(&self.mat)
    }

    /// `Ad_g(self) = g self g^-1`.
    pub fn adjoint_action(&self, g: &GroupElement) -> Self {
        AlgebraElement { spec: self.spec, mat: &g.mat * &self.mat * g.mat.adjoint() }
    }

    /// Orthonormal basis for `<a, b> = Re tr(a* b)`.
    pub fn basis(spec: GroupSpec) -> Vec<AlgebraElement> {
        algebra_basis(spec)
            .into_iter()
            .map(|mat| AlgebraElement { spec, mat })
            .collect()
    }

    /// Gaussian element with independent N(0,1) coordinates in the
    /// orthonormal basis.
    pub fn random<R: Rng + ?Sized>(spec: GroupSpec, rng: &mut R) -> Self {
        let mut mat = CMat::zeros(spec.n, spec.n);
        for b in algebra_basis(spec) {
            let c: f64 = rng.sample(StandardNormal);
            mat += b * C64::new(c, 0.0);
        }
        AlgebraElement { spec, mat }
    }
}

pub(crate) fn project_matrix(spec: GroupSpec, m: &CMat) -> CMat {
    let n = spec.n;
    let mut p = (m - m.adjoint()) * C64::new(0.5, 0.0);
    match spec.family {
        Family::U => {}
        Family::SU => {
            let tr = p.trace() / C64::new(n as f64, 0.0);
            for i in 0..n {
                p[(i, i)] -= tr;
            }
        }
        Family::SO3 => p.apply(|z| *z = C64::new(z.re, 0.0)),
    }
    p
}

pub(crate) fn algebra_basis(spec: GroupSpec) -> Vec<CMat> {
    let n = spec.n;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(spec.algebra_dim());
    let e = |i: usize, j: usize, z: C64| {
        let mut m = CMat::zeros(n, n);
        m[(i, j)] = z;
        m
    };
    for i in 0..n {
        for j in (i + 1)..n {
            out.push(e(i, j, C64::new(r, 0.0)) + e(j, i, C64::new(-r, 0.0)));
            if spec.family != Family::SO3 {
                out.push(e(i, j, C64::new(0.0, r)) + e(j, i, C64::new(0.0, r)));
            }
        }
    }
    match spec.family {
        Family::U => {
            for i in 0..n {
                out.push(e(i, i, I));
            }
        }
        Family::SU => {
            for k in 1..n {
                let norm = ((k * (k + 1)) as f64).sqrt();
                let mut m = CMat::zeros(n, n);
                for j in 0..k {
                    m[(j, j)] = C64::new(0.0, 1.0 / norm);
                }
                m[(k, k)] = C64::new(0.0, -(k as f64) / norm);
                out.push(m);
            }
        }
        Family::SO3 => {}
    }
    out
}

// ---------------------------------------------------------------------------
// exp / log

/// Matrix exponential of a skew-Hermitian element via the Hermitian
/// eigendecomposition of `-i x`.
pub fn group_exp(x: &AlgebraElement) -> GroupElement {
    GroupElement::from_raw(x.spec, exp_skew(x.spec, &x.mat))
}

pub(crate) fn exp_skew(spec: GroupSpec, x: &CMat) -> CMat {
    let n = x.nrows();
    if n == 1 {
        return CMat::from_element(1, 1, C64::from_polar(1.0, x[(0, 0)].im));
    }
    let h = x * C64::new(0.0, -1.0);
    // symmetrize against roundoff before the Hermitian solver
    let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let v = eig.eigenvectors;
    let phases: Vec<C64> = eig.eigenvalues.iter().map(|&l| C64::from_polar(1.0, l)).collect();
    let out = &v * diagonal(&phases) * v.adjoint();
    match spec.family {
        Family::SO3 => out.map(|z| C64::new(z.re, 0.0)),
        _ => out,
    }
}

/// Principal logarithm: eigenvalue angles in (-pi, pi].
///
/// For SU(n) the angles are shifted by multiples of 2 pi when they do not
/// sum to zero, so the result stays traceless and `exp(log g) = g`.
pub fn group_log(g: &GroupElement) -> Result<AlgebraElement> {
    let spec = g.spec;
    let (q, d) = unitary_eigen(&g.mat);
    if d.iter().any(|z| (z + ONE).norm() <= tol::BRANCH) {
        return Err(Error::AmbiguousBranch { tol: tol::BRANCH });
    }
    let mut angles: Vec<f64> = d.iter().map(|z| z.arg()).collect();
    if spec.family == Family::SU {
        traceless_angles(&mut angles);
    }
    let ix: Vec<C64> = angles.iter().map(|&a| C64::new(0.0, a)).collect();
    let raw = &q * diagonal(&ix) * q.adjoint();
    Ok(AlgebraElement::project(spec, &raw))
}

// ---------------------------------------------------------------------------
// sampling

/// Haar-distributed element, deterministic in `seed`.
pub fn haar_sample(spec: GroupSpec, seed: u64) -> GroupElement {
    let mut rng = stream_rng(seed, 0);
    haar_with(spec, &mut rng)
}

pub fn haar_with<R: Rng + ?Sized>(spec: GroupSpec, rng: &mut R) -> GroupElement {
    match spec.family {
        Family::U => GroupElement::from_raw(spec, haar_unitary(spec.n, rng)),
        Family::SU => {
            let u = haar_unitary(spec.n, rng);
            let root = principal_root(det(&u), spec.n);
            GroupElement::from_raw(spec, u / root)
        }
        Family::SO3 => {
            let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
            let norm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
            let q = q.map(|x| x / norm);
            GroupElement::from_raw(spec, quaternion_to_rotation(q))
        }
    }
}

fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let z = CMat::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = z.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases: Vec<C64> = (0..n)
        .map(|i| {
            let d = r[(i, i)];
            if d.norm() == 0.0 {
                ONE
            } else {
                d / d.norm()
            }
        })
        .collect();
    q * diagonal(&phases)
}

/// Rotation matrix of the unit quaternion `(w, x, y, z)`.
pub fn quaternion_to_rotation(q: [f64; 4]) -> CMat {
    let [w, x, y, z] = q;
    let r = [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ];
    CMat::from_fn(3, 3, |i, j| C64::new(r[i][j], 0.0))
}

// ---------------------------------------------------------------------------
// central splitting and projection

/// `g = ss_part * s_part` with `s_part = lambda I`, `lambda` the principal
/// n-th root of `det g`, and `ss_part` in SU(n). Identity split for
/// semisimple families.
pub fn split_central(g: &GroupElement) -> (GroupElement, GroupElement) {
    let spec = g.spec;
    match spec.family {
        Family::U => {
            let lambda = principal_root(g.det(), spec.n);
            let s = GroupElement::scalar(spec, lambda);
            let ss = GroupElement::from_raw(spec, &g.mat / lambda);
            (ss, s)
        }
        _ => (g.clone(), GroupElement::identity(spec)),
    }
}

/// `G -> G/G_ss`, realized by the determinant for U(n).
pub fn project_pi(g: &GroupElement) -> Result<C64> {
    match g.spec.family {
        Family::U => Ok(g.det()),
        Family::SU => Ok(ONE),
        Family::SO3 => Err(Error::UnsupportedGroup(
            "SO(3) has trivial G/G_ss; use the lift obstruction".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    fn specs() -> Vec<GroupSpec> {
        vec![
            GroupSpec::unitary(1),
            GroupSpec::unitary(2),
            GroupSpec::unitary(3),
            GroupSpec::special_unitary(2),
            GroupSpec::special_unitary(3),
            GroupSpec::special_unitary(4),
            GroupSpec::so3(),
        ]
    }

    /// Truncated power series, independent of the eigendecomposition route.
    fn exp_series(x: &CMat, terms: usize) -> CMat {
        let n = x.nrows();
        let mut sum = identity(n);
        let mut term = identity(n);
        for k in 1..terms {
            term = &term * x / C64::new(k as f64, 0.0);
            sum += &term;
        }
        sum
    }

    #[test]
    fn exp_of_zero_is_identity() {
        for spec in specs() {
            let g = group_exp(&AlgebraElement::zero(spec));
            assert!(g.distance_to_identity() < 1e-15);
        }
    }

    #[test]
    fn exp_of_pi_diagonal_is_minus_identity() {
        let spec = GroupSpec::special_unitary(2);
        let x = AlgebraElement::new(spec, diagonal(&[C64::new(0.0, PI), C64::new(0.0, -PI)]))
            .unwrap();
        let g = group_exp(&x);
        assert!(frobenius(&(g.matrix() + identity(2))) < 1e-14);
    }

    #[test]
    fn exp_matches_power_series() {
        let spec = GroupSpec::unitary(3);
        let mut rng = stream_rng(11, 0);
        for _ in 0..20 {
            let x = AlgebraElement::random(spec, &mut rng);
            let g = group_exp(&x);
            let oracle = exp_series(x.matrix(), 60);
            assert!(frobenius(&(g.matrix() - oracle)) < 1e-10);
            g.check_invariants(tol::CONSTRUCTION).unwrap();
        }
    }

    #[test]
    fn log_of_identity_is_zero() {
        for spec in specs() {
            let x = group_log(&GroupElement::identity(spec)).unwrap();
            assert!(x.norm() < 1e-15);
        }
    }

    #[test]
    fn log_of_diagonal() {
        let spec = GroupSpec::unitary(2);
        let g = GroupElement::new(spec, diagonal(&[I, -I])).unwrap();
        let x = group_log(&g).unwrap();
        let want = diagonal(&[C64::new(0.0, PI / 2.0), C64::new(0.0, -PI / 2.0)]);
        assert!(frobenius(&(x.matrix() - want)) < 1e-14);
    }

    #[test]
    fn log_refuses_minus_one() {
        let spec = GroupSpec::special_unitary(2);
        let g = GroupElement::scalar(spec, -ONE);
        assert!(matches!(group_log(&g), Err(Error::AmbiguousBranch { .. })));
    }

    #[test]
    fn log_round_trip_on_haar_samples() {
        for spec in specs() {
            for seed in 0..30 {
                let g = haar_sample(spec, seed);
                let x = group_log(&g).unwrap();
                AlgebraElement::new(spec, x.matrix().clone()).unwrap();
                let back = group_exp(&x);
                assert!(back.distance(&g) < 1e-10, "{spec} seed {seed}");
            }
        }
    }

    #[test]
    fn su_log_stays_traceless_for_central_elements() {
        let spec = GroupSpec::special_unitary(3);
        let omega = C64::from_polar(1.0, 2.0 * PI / 3.0);
        let g = GroupElement::new(spec, scalar_matrix(3, omega)).unwrap();
        let x = group_log(&g).unwrap();
        assert!(x.matrix().trace().norm() < 1e-12);
        assert!(group_exp(&x).distance(&g) < 1e-12);
    }

    #[test]
    fn haar_is_deterministic_and_valid() {
        for spec in specs() {
            let a = haar_sample(spec, 5);
            let b = haar_sample(spec, 5);
            assert_eq!(a, b);
            a.check_invariants(tol::CONSTRUCTION).unwrap();
        }
    }

    #[test]
    fn haar_trace_mean_vanishes() {
        let spec = GroupSpec::unitary(2);
        let mut rng = stream_rng(2024, 0);
        let n = 10_000;
        let mut sum = ZERO;
        for _ in 0..n {
            sum += haar_with(spec, &mut rng).matrix().trace();
        }
        let mean = sum / C64::new(n as f64, 0.0);
        assert!(mean.norm() < 0.05, "mean trace {mean}");
    }

    #[test]
    fn split_of_su_element_is_trivial() {
        let g = haar_sample(GroupSpec::special_unitary(3), 1);
        let (ss, s) = split_central(&g);
        assert_eq!(ss, g);
        assert!(s.distance_to_identity() == 0.0);
    }

    #[test]
    fn split_of_scalar_i() {
        let spec = GroupSpec::unitary(2);
        let g = GroupElement::scalar(spec, I);
        let (ss, s) = split_central(&g);
        // det = -1, principal square root is e^{i pi/2} = i
        assert!((s.matrix()[(0, 0)] - I).norm() < 1e-15);
        assert!((ss.det() - ONE).norm() < 1e-12);
        assert!((&ss * &s).distance(&g) < 1e-12);
        assert!(ss.distance_to_identity() < 1e-12);
    }

    #[test]
    fn split_is_a_section_of_pi() {
        let spec = GroupSpec::unitary(3);
        for seed in 0..50 {
            let g = haar_sample(spec, seed);
            let (ss, s) = split_central(&g);
            assert!((&ss * &s).distance(&g) < 1e-12);
            assert!((ss.det() - ONE).norm() < 1e-12);
            assert!((project_pi(&s).unwrap() - g.det()).norm() < 1e-12);
        }
    }

    #[test]
    fn pi_values() {
        let g = haar_sample(GroupSpec::special_unitary(2), 0);
        assert_eq!(project_pi(&g).unwrap(), ONE);
        let h = GroupElement::new(GroupSpec::unitary(2), diagonal(&[ONE, -ONE])).unwrap();
        assert!((project_pi(&h).unwrap() + ONE).norm() < 1e-15);
        let r = haar_sample(GroupSpec::so3(), 0);
        assert!(matches!(project_pi(&r), Err(Error::UnsupportedGroup(_))));
    }

    #[test]
    fn pi_is_multiplicative() {
        let spec = GroupSpec::unitary(3);
        for seed in 0..20 {
            let g = haar_sample(spec, 2 * seed);
            let h = haar_sample(spec, 2 * seed + 1);
            let lhs = project_pi(&(&g * &h)).unwrap();
            let rhs = project_pi(&g).unwrap() * project_pi(&h).unwrap();
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn basis_is_orthonormal() {
        for spec in specs() {
            let b = AlgebraElement::basis(spec);
            assert_eq!(b.len(), spec.algebra_dim());
            for (i, x) in b.iter().enumerate() {
                AlgebraElement::new(spec, x.matrix().clone()).unwrap();
                for (j, y) in b.iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((x.inner(y) - want).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn reproject_removes_drift() {
        for spec in specs() {
            let g = haar_sample(spec, 9);
            let noisy = GroupElement::from_raw(spec, g.matrix() * C64::new(1.0 + 1e-7, 0.0));
            let fixed = noisy.reproject();
            fixed.check_invariants(tol::CONSTRUCTION).unwrap();
            assert!(fixed.distance(&g) < 1e-12);
        }
    }

    #[test]
    fn invalid_elements_are_rejected() {
        let spec = GroupSpec::special_unitary(2);
        let not_su = diagonal(&[I, I]);
        assert!(GroupElement::new(spec, not_su).is_err());
        assert!(GroupSpec::new(Family::SO3, 2).is_err());
        assert!(GroupSpec::new(Family::U, 0).is_err());
    }
}

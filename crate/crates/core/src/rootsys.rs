//! Irreducible root systems and a Weyl-type element without eigenvalue 1.
//!
//! Roots are stored exactly as doubled integer coordinates (so half-integer
//! roots of E and F are integers here). Eigenvalue work happens in floating
//! point on the restriction of the element to the root span `E`.
//!
//! E6 and E7 use the usual models inside R^8:
//!
//! * E7: `+-e_i +- e_j` (i < j <= 6), `+-(e7 - e8)` and
//!   `+-1/2 (e8 - e7 + sum_{i<=6} +-e_i)` with an odd number of minus signs
//!   among the first six coordinates; `E = (e7 + e8)^perp`.
//! * E6: `+-e_i +- e_j` (i < j <= 5) and
//!   `+-1/2 (e8 - e7 - e6 + sum_{i<=5} +-e_i)` with an even number of minus
//!   signs among the first five coordinates.
//!
//! The chosen elements are signed permutation matrices in ambient
//! coordinates: a cyclic shift for A and G, the map `e1 -> e2, e2 -> -e1,
//! e_i -> -e_i` for D of odd rank, and `-id` otherwise. For E6, `-id` is an
//! automorphism of the root system that lies outside the Weyl group.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{GroupElement, GroupSpec, CMat, Family, C64, ONE, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RootType {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl RootType {
    pub fn letter(self) -> char {
        match self {
            RootType::A => 'A',
            RootType::B => 'B',
            RootType::C => 'C',
            RootType::D => 'D',
            RootType::E => 'E',
            RootType::F => 'F',
            RootType::G => 'G',
        }
    }

    pub fn valid_rank(self, rank: usize) -> bool {
        match self {
            RootType::A => rank >= 1,
            RootType::B => rank >= 2,
            RootType::C => rank >= 3,
            RootType::D => rank >= 4,
            RootType::E => (6..=8).contains(&rank),
            RootType::F => rank == 4,
            RootType::G => rank == 2,
        }
    }

    /// `|Phi|` from the classification.
    pub fn root_count(self, rank: usize) -> usize {
        let l = rank;
        match self {
            RootType::A => l * (l + 1),
            RootType::B | RootType::C => 2 * l * l,
            RootType::D => 2 * l * (l - 1),
            RootType::E => match l {
                6 => 72,
                7 => 126,
                _ => 240,
            },
            RootType::F => 48,
            RootType::G => 12,
        }
    }
}

impl fmt::Display for RootType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for RootType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(RootType::A),
            "B" => Ok(RootType::B),
            "C" => Ok(RootType::C),
            "D" => Ok(RootType::D),
            "E" => Ok(RootType::E),
            "F" => Ok(RootType::F),
            "G" => Ok(RootType::G),
            _ => Err(Error::InvalidInput(format!("unknown root system type {s:?}"))),
        }
    }
}

/// Systems exercised by the property tests: A1-A8, B2-B8, C3-C8, D4-D8,
/// E6-E8, F4, G2.
pub fn test_matrix() -> Vec<(RootType, usize)> {
    let mut v = Vec::new();
    v.extend((1..=8).map(|r| (RootType::A, r)));
    v.extend((2..=8).map(|r| (RootType::B, r)));
    v.extend((3..=8).map(|r| (RootType::C, r)));
    v.extend((4..=8).map(|r| (RootType::D, r)));
    v.extend((6..=8).map(|r| (RootType::E, r)));
    v.push((RootType::F, 4));
    v.push((RootType::G, 2));
    v
}

/// Doubled coordinates: the root is `coords / 2`.
pub type Root = Vec<i32>;

#[derive(Clone, Debug, PartialEq)]
pub struct RootSystem {
    kind: RootType,
    rank: usize,
    ambient_dim: usize,
    roots: Vec<Root>,
    /// ambient_dim x rank, orthonormal columns spanning E.
    span_basis: DMatrix<f64>,
}

fn unit(dim: usize, i: usize, v: i32) -> Root {
    let mut r = vec![0; dim];
    r[i] = v;
    r
}

/// `+-e_i +- e_j` for `i < j < upto`, doubled.
fn long_pairs(dim: usize, upto: usize, out: &mut Vec<Root>) {
    for i in 0..upto {
        for j in (i + 1)..upto {
            for (si, sj) in [(2, 2), (2, -2), (-2, 2), (-2, -2)] {
                let mut r = vec![0; dim];
                r[i] = si;
                r[j] = sj;
                out.push(r);
            }
        }
    }
}

/// Sign patterns on `k` coordinates with the given parity of minus signs.
fn sign_patterns(k: usize, odd_minus: Option<bool>) -> Vec<Vec<i32>> {
    (0..1u32 << k)
        .filter(|m| odd_minus.is_none_or(|odd| (m.count_ones() % 2 == 1) == odd))
        .map(|m| (0..k).map(|i| if (m >> i) & 1 == 1 { -1 } else { 1 }).collect())
        .collect()
}

pub fn build_root_system(kind: RootType, rank: usize) -> Result<RootSystem> {
    if !kind.valid_rank(rank) {
        return Err(Error::InvalidRank { kind: kind.letter(), rank });
    }
    let l = rank;
    let mut roots: Vec<Root> = Vec::new();
    let ambient_dim = match kind {
        RootType::A => {
            let dim = l + 1;
            for i in 0..dim {
                for j in 0..dim {
                    if i != j {
                        let mut r = vec![0; dim];
                        r[i] = 2;
                        r[j] = -2;
                        roots.push(r);
                    }
                }
            }
            dim
        }
        RootType::B => {
            for i in 0..l {
                roots.push(unit(l, i, 2));
                roots.push(unit(l, i, -2));
            }
            long_pairs(l, l, &mut roots);
            l
        }
        RootType::C => {
            for i in 0..l {
                roots.push(unit(l, i, 4));
                roots.push(unit(l, i, -4));
            }
            long_pairs(l, l, &mut roots);
            l
        }
        RootType::D => {
            long_pairs(l, l, &mut roots);
            l
        }
        RootType::E => {
            let dim = 8;
            match l {
                8 => {
                    long_pairs(dim, 8, &mut roots);
                    for s in sign_patterns(8, Some(false)) {
                        roots.push(s);
                    }
                }
                7 => {
                    long_pairs(dim, 6, &mut roots);
                    let mut r = vec![0; dim];
                    r[6] = 2;
                    r[7] = -2;
                    roots.push(r.iter().map(|x| -x).collect());
                    roots.push(r);
                    for s in sign_patterns(6, Some(true)) {
                        let mut r = s.clone();
                        r.extend([-1, 1]);
                        roots.push(r.iter().map(|x| -x).collect());
                        roots.push(r);
                    }
                }
                _ => {
                    long_pairs(dim, 5, &mut roots);
                    for s in sign_patterns(5, Some(false)) {
                        let mut r = s.clone();
                        r.extend([-1, -1, 1]);
                        roots.push(r.iter().map(|x| -x).collect());
                        roots.push(r);
                    }
                }
            }
            dim
        }
        RootType::F => {
            for i in 0..4 {
                roots.push(unit(4, i, 2));
                roots.push(unit(4, i, -2));
            }
            long_pairs(4, 4, &mut roots);
            roots.extend(sign_patterns(4, None));
            4
        }
        RootType::G => {
            for i in 0..3 {
                for j in 0..3 {
                    if i != j {
                        let mut r = vec![0; 3];
                        r[i] = 2;
                        r[j] = -2;
                        roots.push(r);
                    }
                }
            }
            for i in 0..3 {
                let r: Root = (0..3).map(|j| if j == i { 4 } else { -2 }).collect();
                roots.push(r.iter().map(|x| -x).collect());
                roots.push(r);
            }
            3
        }
    };
    roots.sort();
    roots.dedup();
    let span_basis = match kind {
        RootType::A | RootType::G => sum_zero_basis(ambient_dim),
        RootType::E if l < 8 => gram_schmidt_span(&roots, ambient_dim),
        _ => DMatrix::identity(ambient_dim, ambient_dim),
    };
    debug_assert_eq!(span_basis.ncols(), l);
    Ok(RootSystem { kind, rank, ambient_dim, roots, span_basis })
}

/// Helmert basis of the sum-zero hyperplane in R^dim.
fn sum_zero_basis(dim: usize) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(dim, dim - 1);
    for k in 1..dim {
        let norm = ((k * (k + 1)) as f64).sqrt();
        for j in 0..k {
            b[(j, k - 1)] = 1.0 / norm;
        }
        b[(k, k - 1)] = -(k as f64) / norm;
    }
    b
}

fn gram_schmidt_span(roots: &[Root], dim: usize) -> DMatrix<f64> {
    let mut cols: Vec<DVector<f64>> = Vec::new();
    for r in roots {
        let mut v = DVector::from_iterator(dim, r.iter().map(|&x| x as f64 / 2.0));
        for _ in 0..2 {
            for c in &cols {
                let p = c.dot(&v);
                v -= c * p;
            }
        }
        let n = v.norm();
        if n > 1e-8 {
            cols.push(v / n);
        }
    }
    DMatrix::from_columns(&cols)
}

fn dot2(a: &[i32], b: &[i32]) -> i32 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl RootSystem {
    pub fn kind(&self) -> RootType {
        self.kind
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Roots in doubled coordinates.
    pub fn roots(&self) -> &[Root] {
        &self.roots
    }

    pub fn root_vector(&self, i: usize) -> DVector<f64> {
        DVector::from_iterator(self.ambient_dim, self.roots[i].iter().map(|&x| x as f64 / 2.0))
    }

    pub fn span_basis(&self) -> &DMatrix<f64> {
        &self.span_basis
    }

    /// Counts of roots per squared length (lengths in true, undoubled units).
    pub fn length_classes(&self) -> BTreeMap<u32, usize> {
        let mut m = BTreeMap::new();
        for r in &self.roots {
            // |r/2|^2 = dot2 / 4; store 4|alpha|^2 to keep it integral
            *m.entry(dot2(r, r) as u32).or_insert(0) += 1;
        }
        m
    }

    /// `2 (a, b) / (b, b)` is an integer for all pairs.
    pub fn is_crystallographic(&self) -> bool {
        self.roots.iter().all(|a| {
            self.roots.iter().all(|b| (2 * dot2(a, b)) % dot2(b, b) == 0)
        })
    }

    /// Exact membership test on doubled coordinates.
    pub fn contains(&self, r: &[i32]) -> bool {
        self.roots.binary_search_by(|x| x.as_slice().cmp(r)).is_ok()
    }
}

// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub struct WeylElement {
    system: RootSystem,
    /// Signed permutation matrix on the ambient space.
    matrix: DMatrix<i32>,
    eigenvalues: Vec<C64>,
}

pub fn build_weyl_element(system: &RootSystem) -> WeylElement {
    let dim = system.ambient_dim;
    let mut m = DMatrix::<i32>::zeros(dim, dim);
    match system.kind {
        RootType::A | RootType::G => {
            for i in 0..dim {
                m[((i + 1) % dim, i)] = 1;
            }
        }
        RootType::D if system.rank % 2 == 1 => {
            m[(1, 0)] = 1;
            m[(0, 1)] = -1;
            for i in 2..dim {
                m[(i, i)] = -1;
            }
        }
        _ => {
            for i in 0..dim {
                m[(i, i)] = -1;
            }
        }
    }
    let mut w = WeylElement { system: system.clone(), matrix: m, eigenvalues: Vec::new() };
    w.eigenvalues = spectrum(&w.restricted());
    w
}

/// Eigenvalues of a real matrix, ordered by angle then real part.
fn spectrum(m: &DMatrix<f64>) -> Vec<C64> {
    let c = m.map(|x| C64::new(x, 0.0));
    let (_, t) = c.schur().unpack();
    let mut ev: Vec<C64> = (0..t.nrows()).map(|i| t[(i, i)]).collect();
    ev.sort_by(|a, b| a.arg().total_cmp(&b.arg()).then(a.re.total_cmp(&b.re)));
    ev
}

impl WeylElement {
    pub fn system(&self) -> &RootSystem {
        &self.system
    }

    pub fn matrix(&self) -> &DMatrix<i32> {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }

    /// Restriction to E in the orthonormal span basis.
    pub fn restricted(&self) -> DMatrix<f64> {
        let b = &self.system.span_basis;
        let w = self.matrix.map(|x| x as f64);
        b.transpose() * w * b
    }

    pub fn apply_root(&self, r: &[i32]) -> Root {
        let v = DVector::from_column_slice(r);
        (&self.matrix * v).iter().copied().collect()
    }

    /// `{w a : a in Phi} = Phi` exactly.
    pub fn permutes_roots(&self) -> bool {
        let image: HashSet<Root> = self.system.roots.iter().map(|r| self.apply_root(r)).collect();
        image.len() == self.system.roots.len() && image.iter().all(|r| self.system.contains(r))
    }

    /// Whether the ambient matrix maps E into itself.
    pub fn preserves_span(&self) -> bool {
        let b = &self.system.span_basis;
        let wb = self.matrix.map(|x| x as f64) * b;
        let proj = b * (b.transpose() * &wb);
        (wb - proj).norm() < 1e-12
    }

    /// `det(w|_E - I)`.
    pub fn det_minus_identity(&self) -> f64 {
        let r = self.restricted();
        let n = r.nrows();
        (r - DMatrix::identity(n, n)).determinant()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylReport {
    pub min_distance_to_1: f64,
    pub root_permutation_ok: bool,
}

pub fn verify_no_unit_eigenvalue(w: &WeylElement) -> WeylReport {
    let min_distance_to_1 = w
        .eigenvalues
        .iter()
        .map(|z| (z - ONE).norm())
        .fold(f64::INFINITY, f64::min);
    WeylReport { min_distance_to_1, root_permutation_ok: w.permutes_roots() && w.preserves_span() }
}

/// Unique `xi'` in E with `(w - I) xi' = xi`; vectors in ambient coordinates.
pub fn solve_translation(w: &WeylElement, xi: &[f64]) -> Result<Vec<f64>> {
    let b = &w.system.span_basis;
    if xi.len() != w.system.ambient_dim {
        return Err(Error::ArityError(format!(
            "vector of length {} in a {}-dimensional ambient space",
            xi.len(),
            w.system.ambient_dim
        )));
    }
    let v = DVector::from_column_slice(xi);
    let coords = b.transpose() * &v;
    let off = (&v - b * &coords).norm();
    if off > 1e-9 * v.norm().max(1.0) {
        return Err(Error::NotInSpan(off));
    }
    let r = w.restricted();
    let n = r.nrows();
    let lu = (r - DMatrix::identity(n, n)).lu();
    if lu.determinant().abs() < 1e-12 {
        return Err(Error::SingularSystem);
    }
    let sol = lu.solve(&coords).ok_or(Error::SingularSystem)?;
    Ok((b * sol).iter().copied().collect())
}

/// `a in SU(n)` normalizing the diagonal torus and inducing the cyclic
/// element of type A_{n-1}: the cyclic permutation matrix `e_i -> e_{i+1}`
/// with the wrap-around entry scaled by `(-1)^(n-1)`.
pub fn torus_representative(spec: GroupSpec, w: &WeylElement) -> Result<GroupElement> {
    if spec.family() != Family::SU {
        return Err(Error::UnsupportedGroup(format!("torus representative needs SU(n), got {spec}")));
    }
    if w.system.kind != RootType::A {
        return Err(Error::UnsupportedType(w.system.kind.letter()));
    }
    let n = spec.n();
    if w.system.rank + 1 != n {
        return Err(Error::ArityError(format!("A_{} does not match {spec}", w.system.rank)));
    }
    let mut a = CMat::from_element(n, n, ZERO);
    for i in 0..n {
        a[((i + 1) % n, i)] = ONE;
    }
    if n.is_multiple_of(2) {
        a[(0, n - 1)] = -ONE;
    }
    GroupElement::with_tolerance(spec, a, crate::tol::CONSTRUCTION)
}

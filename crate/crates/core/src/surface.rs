//! Surface signatures, generator tuples and the relation map.
//!
//! A nonorientable surface with `k` crosscaps is kept in normal form:
//! genus-l surface plus one crosscap (`k = 2l + 1`) or plus a Klein bottle
//! (`k = 2l + 2`). The relation word is then
//! `a1 b1 a1^-1 b1^-1 ... al bl al^-1 bl^-1 c1^2 [c2^2]`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{
    frobenius, identity, AlgebraElement, CMat, GroupElement, GroupSpec,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SigWire", into = "SigWire")]
pub struct SurfaceSig {
    orientable: bool,
    genus: u32,
    crosscaps: u8,
}

#[derive(Serialize, Deserialize)]
struct SigWire {
    orientable: bool,
    genus: u32,
    crosscaps: u8,
    total_crosscaps: u32,
    excluded: bool,
}

impl TryFrom<SigWire> for SurfaceSig {
    type Error = Error;
    fn try_from(w: SigWire) -> Result<Self> {
        match (w.orientable, w.crosscaps) {
            (true, 0) => Ok(SurfaceSig::orientable(w.genus)),
            (false, 1 | 2) => Ok(SurfaceSig { orientable: false, genus: w.genus, crosscaps: w.crosscaps }),
            _ => Err(Error::InvalidInput(format!(
                "orientable = {} with {} crosscaps is not a normal form",
                w.orientable, w.crosscaps
            ))),
        }
    }
}

impl From<SurfaceSig> for SigWire {
    fn from(s: SurfaceSig) -> Self {
        SigWire {
            orientable: s.orientable,
            genus: s.genus,
            crosscaps: s.crosscaps,
            total_crosscaps: s.total_crosscaps(),
            excluded: s.excluded_by_paper(),
        }
    }
}

impl SurfaceSig {
    pub fn orientable(genus: u32) -> Self {
        SurfaceSig { orientable: true, genus, crosscaps: 0 }
    }

    /// Connected sum of `k >= 1` projective planes, normalized.
    pub fn nonorientable(k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInput("a nonorientable surface needs k >= 1".into()));
        }
        let (genus, crosscaps) = if k % 2 == 1 { ((k - 1) / 2, 1) } else { ((k - 2) / 2, 2) };
        Ok(SurfaceSig { orientable: false, genus, crosscaps })
    }

    pub fn is_orientable(&self) -> bool {
        self.orientable
    }

    /// Number of handles `l`.
    pub fn genus(&self) -> usize {
        self.genus as usize
    }

    /// Crosscap generators in normal form (0, 1 or 2).
    pub fn crosscaps(&self) -> usize {
        self.crosscaps as usize
    }

    pub fn total_crosscaps(&self) -> u32 {
        if self.orientable {
            0
        } else {
            2 * self.genus + self.crosscaps as u32
        }
    }

    /// Nonorientable with k in {1, 2, 4}.
    pub fn excluded_by_paper(&self) -> bool {
        !self.orientable && matches!(self.total_crosscaps(), 1 | 2 | 4)
    }

    pub fn is_sphere(&self) -> bool {
        self.orientable && self.genus == 0
    }

    pub fn require_not_excluded(&self) -> Result<()> {
        if self.excluded_by_paper() {
            Err(Error::ExcludedSurface { k: self.total_crosscaps() })
        } else {
            Ok(())
        }
    }

    /// Total number of generators `2l + m`.
    pub fn arity(&self) -> usize {
        2 * self.genus() + self.crosscaps()
    }

    /// The relation word as `(generator index, inverted)` letters.
    pub fn word(&self) -> Vec<Letter> {
        let mut w = Vec::with_capacity(4 * self.genus() + 2 * self.crosscaps());
        for i in 0..self.genus() {
            let (a, b) = (2 * i, 2 * i + 1);
            w.extend([Letter::new(a, false), Letter::new(b, false), Letter::new(a, true), Letter::new(b, true)]);
        }
        for j in 0..self.crosscaps() {
            let c = 2 * self.genus() + j;
            w.extend([Letter::new(c, false), Letter::new(c, false)]);
        }
        w
    }
}

impl fmt::Display for SurfaceSig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.orientable {
            write!(f, "genus={}", self.genus)
        } else {
            write!(f, "crosscaps={}", self.total_crosscaps())
        }
    }
}

impl FromStr for SurfaceSig {
    type Err = Error;

    /// `genus=<l>` or `crosscaps=<k>`.
    fn from_str(s: &str) -> Result<Self> {
        let (key, value) = s
            .split_once('=')
            .ok_or_else(|| Error::InvalidInput(format!("expected genus=<l> or crosscaps=<k>, got {s:?}")))?;
        let v: u32 = value
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("not a non-negative integer: {value:?}")))?;
        match key.trim() {
            "genus" => Ok(SurfaceSig::orientable(v)),
            "crosscaps" => SurfaceSig::nonorientable(v),
            other => Err(Error::InvalidInput(format!("unknown surface key {other:?}"))),
        }
    }
}

/// One letter of a group word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Letter {
    pub generator: usize,
    pub inverted: bool,
}

impl Letter {
    pub fn new(generator: usize, inverted: bool) -> Self {
        Letter { generator, inverted }
    }
}

/// Evaluate a word on raw matrices.
pub fn eval_word(word: &[Letter], gens: &[CMat]) -> CMat {
    let n = gens.first().map_or(0, |g| g.nrows());
    let mut acc = identity(n);
    for l in word {
        let g = &gens[l.generator];
        acc = if l.inverted { &acc * g.adjoint() } else { &acc * g };
    }
    acc
}

/// Left-trivialized derivative of a word: with `x_j -> x_j exp(eps eta_j)`,
/// returns `D` such that `dW = W D`.
///
/// Letter `k` contributes `Ad_{Q_k^-1} eta` (or minus that for inverted
/// letters) where `Q_k` is the suffix after (respectively from) the letter.
pub fn word_differential(word: &[Letter], gens: &[CMat], dirs: &[CMat]) -> CMat {
    let n = gens.first().map_or(0, |g| g.nrows());
    let suffixes = suffix_products(word, gens);
    let mut d = CMat::zeros(n, n);
    for (k, l) in word.iter().enumerate() {
        let eta = &dirs[l.generator];
        if l.inverted {
            let q = &suffixes[k];
            d -= q.adjoint() * eta * q;
        } else {
            let q = &suffixes[k + 1];
            d += q.adjoint() * eta * q;
        }
    }
    d
}

/// `suffixes[k] = F_k F_{k+1} ... F_{N-1}`, `suffixes[N] = I`.
pub(crate) fn suffix_products(word: &[Letter], gens: &[CMat]) -> Vec<CMat> {
    let n = gens.first().map_or(0, |g| g.nrows());
    let mut out = vec![identity(n); word.len() + 1];
    for k in (0..word.len()).rev() {
        let l = word[k];
        let f = &gens[l.generator];
        out[k] = if l.inverted { f.adjoint() * &out[k + 1] } else { f * &out[k + 1] };
    }
    out
}

// ---------------------------------------------------------------------------

/// A generator tuple `(a1, b1, ..., al, bl, c1[, c2])`.
#[derive(Clone, Debug, PartialEq)]
pub struct TuplePoint {
    sig: SurfaceSig,
    spec: GroupSpec,
    gens: Vec<GroupElement>,
}

impl TuplePoint {
    /// Build from handles and crosscap generators; checks arity and specs.
    pub fn new(
        sig: SurfaceSig,
        spec: GroupSpec,
        handles: Vec<(GroupElement, GroupElement)>,
        crosscaps: Vec<GroupElement>,
    ) -> Result<Self> {
        if handles.len() != sig.genus() || crosscaps.len() != sig.crosscaps() {
            return Err(Error::ArityError(format!(
                "{sig} needs {} handles and {} crosscap generators, got {} and {}",
                sig.genus(),
                sig.crosscaps(),
                handles.len(),
                crosscaps.len()
            )));
        }
        let gens = handles.into_iter().flat_map(|(a, b)| [a, b]).chain(crosscaps).collect();
        Self::from_generators(sig, spec, gens)
    }

    /// Flattened generator order `a1, b1, ..., al, bl, c1, [c2]`.
    pub fn from_generators(sig: SurfaceSig, spec: GroupSpec, gens: Vec<GroupElement>) -> Result<Self> {
        if gens.len() != sig.arity() {
            return Err(Error::ArityError(format!(
                "{sig} needs {} generators, got {}",
                sig.arity(),
                gens.len()
            )));
        }
        if let Some(g) = gens.iter().find(|g| g.spec() != spec) {
            return Err(Error::SpecMismatch(format!("{} in a {spec} tuple", g.spec())));
        }
        Ok(TuplePoint { sig, spec, gens })
    }

    pub fn identity(sig: SurfaceSig, spec: GroupSpec) -> Self {
        TuplePoint { sig, spec, gens: vec![GroupElement::identity(spec); sig.arity()] }
    }

    pub(crate) fn from_matrices(sig: SurfaceSig, spec: GroupSpec, mats: Vec<CMat>) -> Self {
        debug_assert_eq!(mats.len(), sig.arity());
        let gens = mats.into_iter().map(|m| GroupElement::from_raw(spec, m)).collect();
        TuplePoint { sig, spec, gens }
    }

    pub fn sig(&self) -> SurfaceSig {
        self.sig
    }

    pub fn spec(&self) -> GroupSpec {
        self.spec
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.gens
    }

    pub fn handle(&self, i: usize) -> (&GroupElement, &GroupElement) {
        (&self.gens[2 * i], &self.gens[2 * i + 1])
    }

    pub fn handles(&self) -> Vec<(GroupElement, GroupElement)> {
        (0..self.sig.genus())
            .map(|i| (self.gens[2 * i].clone(), self.gens[2 * i + 1].clone()))
            .collect()
    }

    pub fn crosscap_gens(&self) -> &[GroupElement] {
        &self.gens[2 * self.sig.genus()..]
    }

    pub(crate) fn matrices(&self) -> Vec<CMat> {
        self.gens.iter().map(|g| g.matrix().clone()).collect()
    }

    /// Simultaneous conjugation `g x g^-1`.
    pub fn conjugated_by(&self, g: &GroupElement) -> Self {
        TuplePoint {
            sig: self.sig,
            spec: self.spec,
            gens: self.gens.iter().map(|x| x.conjugated_by(g)).collect(),
        }
    }

    pub fn reproject(&self) -> Self {
        TuplePoint { sig: self.sig, spec: self.spec, gens: self.gens.iter().map(|g| g.reproject()).collect() }
    }

    pub fn max_unitarity_defect(&self) -> f64 {
        self.gens.iter().map(|g| g.unitarity_defect()).fold(0.0, f64::max)
    }

    /// Replace generator `slot`.
    pub fn with_generator(&self, slot: usize, g: GroupElement) -> Result<Self> {
        let mut gens = self.gens.clone();
        *gens.get_mut(slot).ok_or_else(|| Error::ArityError(format!("no generator {slot}")))? = g;
        Self::from_generators(self.sig, self.spec, gens)
    }
}

/// Ordered product of commutators `a1 b1 a1^-1 b1^-1 ... al bl al^-1 bl^-1`.
pub fn commutator_mu(handles: &[(GroupElement, GroupElement)]) -> Result<GroupElement> {
    let (first, _) = handles
        .first()
        .ok_or_else(|| Error::ArityError("commutator map needs at least one handle".into()))?;
    let spec = first.spec();
    let mut acc = identity(spec.n());
    for (a, b) in handles {
        if a.spec() != spec || b.spec() != spec {
            return Err(Error::SpecMismatch(format!("{} / {} vs {spec}", a.spec(), b.spec())));
        }
        acc = acc * a.matrix() * b.matrix() * a.matrix().adjoint() * b.matrix().adjoint();
    }
    Ok(GroupElement::from_raw(spec, acc))
}

/// `mu(handles) * prod c_j^2`; the identity exactly on homomorphisms.
pub fn relation_value(x: &TuplePoint) -> GroupElement {
    let w = eval_word(&x.sig.word(), &x.matrices());
    GroupElement::from_raw(x.spec, w)
}

/// `||relation_value(x) - I||_F`.
pub fn relation_residual(x: &TuplePoint) -> f64 {
    frobenius(&(eval_word(&x.sig.word(), &x.matrices()) - identity(x.spec.n())))
}

/// Left-trivialized directional derivative `R^-1 dR` of the relation map
/// along `x_j -> x_j exp(eps direction_j)`.
pub fn relation_differential(x: &TuplePoint, direction: &[AlgebraElement]) -> Result<AlgebraElement> {
    if direction.len() != x.sig.arity() {
        return Err(Error::ArityError(format!(
            "direction has {} entries, tuple has {}",
            direction.len(),
            x.sig.arity()
        )));
    }
    if let Some(d) = direction.iter().find(|d| d.spec() != x.spec) {
        return Err(Error::SpecMismatch(format!("direction in {} for a {} tuple", d.spec(), x.spec)));
    }
    let dirs: Vec<CMat> = direction.iter().map(|d| d.matrix().clone()).collect();
    let d = word_differential(&x.sig.word(), &x.matrices(), &dirs);
    Ok(AlgebraElement::project(x.spec, &d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{diagonal, group_exp, haar_sample, C64, I, ONE};

    fn random_tuple(sig: SurfaceSig, spec: GroupSpec, seed: u64) -> TuplePoint {
        let gens = (0..sig.arity()).map(|i| haar_sample(spec, seed * 100 + i as u64)).collect();
        TuplePoint::from_generators(sig, spec, gens).unwrap()
    }

    #[test]
    fn normal_forms() {
        let s = SurfaceSig::nonorientable(5).unwrap();
        assert_eq!((s.genus(), s.crosscaps(), s.total_crosscaps()), (2, 1, 5));
        let s = SurfaceSig::nonorientable(6).unwrap();
        assert_eq!((s.genus(), s.crosscaps(), s.total_crosscaps()), (2, 2, 6));
        for k in [1, 2, 4] {
            assert!(SurfaceSig::nonorientable(k).unwrap().excluded_by_paper());
        }
        for k in [3, 5, 6, 7, 8] {
            assert!(!SurfaceSig::nonorientable(k).unwrap().excluded_by_paper());
        }
        assert!(!SurfaceSig::orientable(0).excluded_by_paper());
        assert!(SurfaceSig::nonorientable(0).is_err());
    }

    #[test]
    fn parse_surface_syntax() {
        assert_eq!("genus=2".parse::<SurfaceSig>().unwrap(), SurfaceSig::orientable(2));
        let s: SurfaceSig = "crosscaps=5".parse().unwrap();
        assert_eq!((s.genus(), s.crosscaps()), (2, 1));
        assert!("torus".parse::<SurfaceSig>().is_err());
        assert!("genus=-1".parse::<SurfaceSig>().is_err());
        assert_eq!(s.to_string(), "crosscaps=5");
    }

    #[test]
    fn commutator_of_identities_and_commuting_pairs() {
        let spec = GroupSpec::unitary(2);
        let e = GroupElement::identity(spec);
        assert!(commutator_mu(&[(e.clone(), e.clone())]).unwrap().distance_to_identity() == 0.0);
        let a = GroupElement::new(spec, diagonal(&[I, ONE])).unwrap();
        let b = GroupElement::new(spec, diagonal(&[-ONE, C64::from_polar(1.0, 0.3)])).unwrap();
        assert!(commutator_mu(&[(a, b)]).unwrap().distance_to_identity() < 1e-15);
        assert!(commutator_mu(&[]).is_err());
    }

    #[test]
    fn commutator_spec_mismatch() {
        let a = GroupElement::identity(GroupSpec::unitary(2));
        let b = GroupElement::identity(GroupSpec::special_unitary(2));
        assert!(matches!(commutator_mu(&[(a, b)]), Err(Error::SpecMismatch(_))));
    }

    #[test]
    fn commutators_have_unit_determinant() {
        let spec = GroupSpec::unitary(3);
        for seed in 0..50 {
            let x = random_tuple(SurfaceSig::orientable(2), spec, seed);
            let mu = commutator_mu(&x.handles()).unwrap();
            assert!((mu.det() - ONE).norm() < 1e-12);
        }
    }

    #[test]
    fn relation_examples() {
        let spec = GroupSpec::unitary(2);
        let x = TuplePoint::identity(SurfaceSig::orientable(3), spec);
        assert!(relation_residual(&x) == 0.0);

        let sig = SurfaceSig::nonorientable(3).unwrap();
        let c = GroupElement::new(spec, diagonal(&[ONE, -ONE])).unwrap();
        let x = TuplePoint::identity(sig, spec).with_generator(2, c).unwrap();
        assert!(relation_residual(&x) < 1e-15);

        let sig = SurfaceSig::nonorientable(6).unwrap();
        let c = GroupElement::scalar(spec, I);
        let mut x = TuplePoint::identity(sig, spec);
        x = x.with_generator(4, c.clone()).unwrap().with_generator(5, c).unwrap();
        assert!(relation_residual(&x) < 1e-15);
    }

    #[test]
    fn arity_and_spec_checks() {
        let spec = GroupSpec::unitary(2);
        let sig = SurfaceSig::nonorientable(3).unwrap();
        let e = GroupElement::identity(spec);
        assert!(TuplePoint::new(sig, spec, vec![], vec![e.clone()]).is_err());
        let wrong = GroupElement::identity(GroupSpec::unitary(3));
        assert!(matches!(
            TuplePoint::new(sig, spec, vec![(e.clone(), wrong)], vec![e]),
            Err(Error::SpecMismatch(_))
        ));
    }

    #[test]
    fn relation_is_conjugation_equivariant() {
        let spec = GroupSpec::unitary(3);
        let sig = SurfaceSig::nonorientable(6).unwrap();
        for seed in 0..20 {
            let x = random_tuple(sig, spec, seed);
            let g = haar_sample(spec, 9000 + seed);
            let lhs = relation_value(&x.conjugated_by(&g));
            let rhs = relation_value(&x).conjugated_by(&g);
            assert!(lhs.distance(&rhs) < 1e-12);
        }
    }

    #[test]
    fn relation_determinant_comes_from_crosscaps() {
        let spec = GroupSpec::unitary(3);
        let sig = SurfaceSig::nonorientable(6).unwrap();
        for seed in 0..20 {
            let x = random_tuple(sig, spec, seed);
            let c = x.crosscap_gens();
            let want = c[0].det().powi(2) * c[1].det().powi(2);
            assert!((relation_value(&x).det() - want).norm() < 1e-12);
        }
    }

    #[test]
    fn differential_vanishes_at_identity_for_commutators() {
        let spec = GroupSpec::special_unitary(2);
        let sig = SurfaceSig::orientable(1);
        let x = TuplePoint::identity(sig, spec);
        let mut rng = crate::rng::stream_rng(1, 0);
        let dir = vec![AlgebraElement::random(spec, &mut rng), AlgebraElement::zero(spec)];
        let d = relation_differential(&x, &dir).unwrap();
        assert!(d.norm() < 1e-15);
        let zero = vec![AlgebraElement::zero(spec); 2];
        assert!(relation_differential(&random_tuple(sig, spec, 3), &zero).unwrap().norm() < 1e-15);
    }

    #[test]
    fn differential_matches_finite_differences() {
        let h = 1e-5;
        for (spec, sig) in [
            (GroupSpec::unitary(2), SurfaceSig::nonorientable(5).unwrap()),
            (GroupSpec::unitary(3), SurfaceSig::nonorientable(6).unwrap()),
            (GroupSpec::special_unitary(3), SurfaceSig::orientable(2)),
            (GroupSpec::so3(), SurfaceSig::orientable(1)),
        ] {
            let mut rng = crate::rng::stream_rng(77, 0);
            for seed in 0..5 {
                let x = random_tuple(sig, spec, seed);
                let dir: Vec<_> = (0..sig.arity()).map(|_| AlgebraElement::random(spec, &mut rng)).collect();
                let d = relation_differential(&x, &dir).unwrap();
                let shift = |s: f64| {
                    let gens = x
                        .generators()
                        .iter()
                        .zip(&dir)
                        .map(|(g, e)| g * &group_exp(&e.scale(s)))
                        .collect();
                    relation_value(&TuplePoint::from_generators(sig, spec, gens).unwrap())
                };
                let fd = (shift(h).matrix() - shift(-h).matrix()) / C64::new(2.0 * h, 0.0);
                let fd_left = relation_value(&x).matrix().adjoint() * fd;
                let err = frobenius(&(fd_left - d.matrix())) / d.norm().max(1.0);
                assert!(err < 1e-7, "{spec} {sig}: relative error {err:e}");
            }
        }
    }

    #[test]
    fn differential_is_linear() {
        let spec = GroupSpec::unitary(2);
        let sig = SurfaceSig::nonorientable(5).unwrap();
        let x = random_tuple(sig, spec, 4);
        let mut rng = crate::rng::stream_rng(5, 0);
        let u: Vec<_> = (0..sig.arity()).map(|_| AlgebraElement::random(spec, &mut rng)).collect();
        let v: Vec<_> = (0..sig.arity()).map(|_| AlgebraElement::random(spec, &mut rng)).collect();
        let combo: Vec<_> = u.iter().zip(&v).map(|(a, b)| a.scale(2.0).add(&b.scale(-0.5))).collect();
        let lhs = relation_differential(&x, &combo).unwrap();
        let rhs = relation_differential(&x, &u)
            .unwrap()
            .scale(2.0)
            .add(&relation_differential(&x, &v).unwrap().scale(-0.5));
        assert!(frobenius(&(lhs.matrix() - rhs.matrix())) < 1e-12);
    }

    #[test]
    fn perturbation_is_first_order() {
        let spec = GroupSpec::unitary(2);
        let sig = SurfaceSig::nonorientable(3).unwrap();
        let c = GroupElement::new(spec, diagonal(&[ONE, -ONE])).unwrap();
        let x = TuplePoint::identity(sig, spec).with_generator(2, c).unwrap();
        let mut rng = crate::rng::stream_rng(8, 0);
        let eps = 1e-4;
        for slot in 0..3 {
            let xi = AlgebraElement::random(spec, &mut rng);
            let xi = xi.scale(1.0 / xi.norm());
            let g = &x.generators()[slot] * &group_exp(&xi.scale(eps));
            let y = x.with_generator(slot, g).unwrap();
            assert!(relation_residual(&y) <= 2.0 * eps + 1e-7);
        }
    }
}

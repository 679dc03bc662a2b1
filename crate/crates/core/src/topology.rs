//! Component invariants and counts.
//!
//! For U(n) the obstruction of a solution of the nonorientable relation is
//! `det(c)` (one crosscap) or `det(c1) det(c2)` (Klein bottle summand), a
//! square root of unity. For SO(3) the invariant is the sign obtained by
//! lifting every generator to SU(2) and re-evaluating the relation word.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homotopy::GroupPath;
use crate::lie::{frobenius, identity, Family, GroupSpec, C64, CMat, ONE};
use crate::surface::{eval_word, relation_residual, SurfaceSig, TuplePoint};
use crate::tol;

// ---------------------------------------------------------------------------
// finite abelian groups

/// `Z/d1 + Z/d2 + ... + Z/dr` with `d1 | d2 | ... | dr`, each `>= 2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct FiniteAbelianGroup {
    invariant_factors: Vec<u64>,
}

impl FiniteAbelianGroup {
    pub fn new(invariant_factors: Vec<u64>) -> Result<Self> {
        if let Some(&d) = invariant_factors.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidInput(format!("invariant factor {d} < 2")));
        }
        if let Some(w) = invariant_factors.windows(2).find(|w| w[1] % w[0] != 0) {
            return Err(Error::InvalidInput(format!("{} does not divide {}", w[0], w[1])));
        }
        Ok(FiniteAbelianGroup { invariant_factors })
    }

    pub fn trivial() -> Self {
        FiniteAbelianGroup::default()
    }

    pub fn cyclic(n: u64) -> Self {
        if n <= 1 {
            Self::trivial()
        } else {
            FiniteAbelianGroup { invariant_factors: vec![n] }
        }
    }

    /// Normalize an arbitrary direct sum of cyclic groups `Z/n1 + ... + Z/nk`
    /// to invariant-factor form via the primary decomposition.
    pub fn from_cyclic_factors(factors: &[u64]) -> Result<Self> {
        if factors.contains(&0) {
            return Err(Error::InvalidInput("Z/0 is infinite".into()));
        }
        // prime -> exponents of the prime powers appearing
        let mut primary: Vec<(u64, Vec<u32>)> = Vec::new();
        for &n in factors {
            for (p, e) in factorize(n) {
                match primary.iter_mut().find(|(q, _)| *q == p) {
                    Some((_, es)) => es.push(e),
                    None => primary.push((p, vec![e])),
                }
            }
        }
        let rank = primary.iter().map(|(_, es)| es.len()).max().unwrap_or(0);
        let mut out = vec![1u64; rank];
        for (p, mut es) in primary {
            es.sort_unstable();
            // largest powers go to the largest invariant factors
            for (slot, e) in (rank - es.len()..rank).zip(es) {
                out[slot] *= p.pow(e);
            }
        }
        Self::new(out)
    }

    pub fn invariant_factors(&self) -> &[u64] {
        &self.invariant_factors
    }

    pub fn order(&self) -> u64 {
        self.invariant_factors.iter().product()
    }

    /// All groups of order `n`, one per invariant-factor chain.
    pub fn all_of_order(n: u64) -> Vec<Self> {
        fn chains(remaining: u64, bound: u64, acc: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
            if remaining == 1 {
                let mut c = acc.clone();
                c.reverse();
                out.push(c);
                return;
            }
            for d in 2..=remaining.min(bound) {
                if remaining.is_multiple_of(d) && bound.is_multiple_of(d) {
                    acc.push(d);
                    chains(remaining / d, d, acc, out);
                    acc.pop();
                }
            }
        }
        if n == 1 {
            return vec![Self::trivial()];
        }
        let mut out = Vec::new();
        // the largest factor is chosen first; the rest must divide it
        for top in 2..=n {
            if n.is_multiple_of(top) {
                let mut acc = vec![top];
                chains(n / top, top, &mut acc, &mut out);
            }
        }
        out.into_iter().map(|f| Self::new(f).expect("valid chain")).collect()
    }

    /// `|G / 2G|` by the closed form `2^(number of even invariant factors)`.
    pub fn quotient_by_squares_formula(&self) -> u64 {
        1 << self.invariant_factors.iter().filter(|&&d| d % 2 == 0).count()
    }

    /// `|G / 2G|` by enumerating `{a + a}` over every element.
    pub fn quotient_by_squares_enumerated(&self) -> u64 {
        let mut doubles = HashSet::new();
        let mut elem = vec![0u64; self.invariant_factors.len()];
        loop {
            let doubled: Vec<u64> =
                elem.iter().zip(&self.invariant_factors).map(|(x, d)| (2 * x) % d).collect();
            doubles.insert(doubled);
            // mixed-radix increment
            let mut i = 0;
            loop {
                if i == elem.len() {
                    return self.order() / doubles.len() as u64;
                }
                elem[i] += 1;
                if elem[i] < self.invariant_factors[i] {
                    break;
                }
                elem[i] = 0;
                i += 1;
            }
        }
    }
}

impl fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.invariant_factors.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.invariant_factors.iter().map(|d| format!("Z/{d}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// `|G / {a^2}|`, computed by formula and by enumeration.
///
/// Enumeration is skipped above a million elements.
pub fn quotient_by_squares(g: &FiniteAbelianGroup) -> u64 {
    let formula = g.quotient_by_squares_formula();
    if g.order() <= 1_000_000 {
        let enumerated = g.quotient_by_squares_enumerated();
        assert_eq!(formula, enumerated, "quotient-by-squares mismatch for {g}");
    }
    formula
}

// ---------------------------------------------------------------------------
// obstruction classes

/// Element of `K = (Z/2)^dim S`, one bit per circle factor of S.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ObstructionClass {
    bits: Vec<u8>,
}

impl ObstructionClass {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidInput("obstruction bits must be 0 or 1".into()));
        }
        Ok(ObstructionClass { bits })
    }

    pub fn trivial(dim_s: usize) -> Self {
        ObstructionClass { bits: vec![0; dim_s] }
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// Every element of `(Z/2)^dim_s`.
    pub fn all(dim_s: usize) -> Vec<Self> {
        (0..1u32 << dim_s)
            .map(|m| ObstructionClass { bits: (0..dim_s).map(|i| ((m >> i) & 1) as u8).collect() })
            .collect()
    }

    /// The value `+1` / `-1` of the single circle factor of U(n).
    pub fn sign(&self) -> Option<f64> {
        match self.bits.as_slice() {
            [b] => Some(if *b == 1 { -1.0 } else { 1.0 }),
            _ => None,
        }
    }
}

impl fmt::Display for ObstructionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl FromStr for ObstructionClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        // "+1" / "-1" are accepted as the K-value of a single circle factor
        let s = match s {
            "-1" => "1",
            "+1" => "0",
            other => other,
        };
        let bits = s
            .chars()
            .map(|ch| match ch {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::InvalidInput(format!("bad class bit {ch:?} in {s:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        ObstructionClass::new(bits)
    }
}

impl Serialize for ObstructionClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.bits.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ObstructionClass {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let bits = Vec::<u8>::deserialize(d)?;
        ObstructionClass::new(bits).map_err(serde::de::Error::custom)
    }
}

/// Classify a value of `G/G_ss` that should lie in K.
fn k_bit(value: C64) -> Result<u8> {
    if (value - ONE).norm() <= tol::ACCEPT {
        Ok(0)
    } else if (value + ONE).norm() <= tol::ACCEPT {
        Ok(1)
    } else {
        Err(Error::ClassNotInK(format!("{value}")))
    }
}

/// The projection value whose square is trivial: `det c` or `det c1 det c2`.
pub fn pi_value(x: &TuplePoint) -> Result<C64> {
    match x.spec().family() {
        Family::U => Ok(x.crosscap_gens().iter().map(|c| c.det()).product()),
        Family::SU => Ok(ONE),
        Family::SO3 => Err(Error::UnsupportedGroup("SO(3): use lift_obstruction".into())),
    }
}

/// Obstruction class of a relation solution on a nonorientable surface.
pub fn obstruction(x: &TuplePoint) -> Result<ObstructionClass> {
    let spec = x.spec();
    if spec.family() == Family::SO3 {
        return Err(Error::UnsupportedGroup("SO(3): use lift_obstruction".into()));
    }
    let r = relation_residual(x);
    if r.is_nan() || r > tol::ACCEPT {
        return Err(Error::NotASolution(r));
    }
    match spec.family() {
        Family::SU => Ok(ObstructionClass::trivial(0)),
        _ if x.sig().is_orientable() => Err(Error::OrientableSurface),
        _ => Ok(ObstructionClass { bits: vec![k_bit(pi_value(x)?)?] }),
    }
}

// ---------------------------------------------------------------------------
// SO(3) lift obstruction

/// Unit quaternion `(w, x, y, z)` mapping to the rotation `r` (sign arbitrary).
pub fn rotation_to_quaternion(r: &CMat) -> [f64; 4] {
    let m = |i: usize, j: usize| r[(i, j)].re;
    let tr = m(0, 0) + m(1, 1) + m(2, 2);
    let q = if tr > 0.0 {
        let s = (tr + 1.0).sqrt() * 2.0;
        [0.25 * s, (m(2, 1) - m(1, 2)) / s, (m(0, 2) - m(2, 0)) / s, (m(1, 0) - m(0, 1)) / s]
    } else if m(0, 0) > m(1, 1) && m(0, 0) > m(2, 2) {
        let s = (1.0 + m(0, 0) - m(1, 1) - m(2, 2)).sqrt() * 2.0;
        [(m(2, 1) - m(1, 2)) / s, 0.25 * s, (m(0, 1) + m(1, 0)) / s, (m(0, 2) + m(2, 0)) / s]
    } else if m(1, 1) > m(2, 2) {
        let s = (1.0 + m(1, 1) - m(0, 0) - m(2, 2)).sqrt() * 2.0;
        [(m(0, 2) - m(2, 0)) / s, (m(0, 1) + m(1, 0)) / s, 0.25 * s, (m(1, 2) + m(2, 1)) / s]
    } else {
        let s = (1.0 + m(2, 2) - m(0, 0) - m(1, 1)).sqrt() * 2.0;
        [(m(1, 0) - m(0, 1)) / s, (m(0, 2) + m(2, 0)) / s, (m(1, 2) + m(2, 1)) / s, 0.25 * s]
    };
    let norm = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    q.map(|v| v / norm)
}

/// SU(2) matrix of a unit quaternion, `i, j, k -> -i sigma_x, -i sigma_y, -i sigma_z`.
pub fn quaternion_to_su2(q: [f64; 4]) -> CMat {
    let [w, x, y, z] = q;
    CMat::from_row_slice(
        2,
        2,
        &[C64::new(w, -z), C64::new(-y, -x), C64::new(y, -x), C64::new(w, z)],
    )
}

/// Lift an SO(3) rotation to one of its two SU(2) preimages.
pub fn lift_to_su2(r: &CMat) -> CMat {
    quaternion_to_su2(rotation_to_quaternion(r))
}

/// `Z/2`-valued invariant of an SO(3) solution: `+1` or `-1`, the sign of the
/// relation word evaluated on SU(2) lifts.
pub fn lift_obstruction(x: &TuplePoint) -> Result<i8> {
    if x.spec().family() != Family::SO3 {
        return Err(Error::UnsupportedGroup(format!("lift obstruction needs SO(3), got {}", x.spec())));
    }
    let r = relation_residual(x);
    if r.is_nan() || r > tol::ACCEPT {
        return Err(Error::NotASolution(r));
    }
    let lifts: Vec<CMat> = x.generators().iter().map(|g| lift_to_su2(g.matrix())).collect();
    Ok(lifted_word_sign(x.sig(), &lifts))
}

/// Sign of the relation word on explicit SU(2) lifts (any choice of lifts).
pub fn lifted_word_sign(sig: SurfaceSig, lifts: &[CMat]) -> i8 {
    let w = eval_word(&sig.word(), lifts);
    let plus = frobenius(&(&w - identity(2)));
    let minus = frobenius(&(&w + identity(2)));
    if plus <= minus {
        1
    } else {
        -1
    }
}

/// Component label of any solution: K-bits for U(n) on nonorientable
/// surfaces, the lift sign (as a bit) for SO(3), empty otherwise.
pub fn component_label(x: &TuplePoint) -> Result<Vec<u8>> {
    match x.spec().family() {
        Family::SO3 => Ok(vec![u8::from(lift_obstruction(x)? < 0)]),
        Family::U if x.sig().is_orientable() => {
            let r = relation_residual(x);
            if r <= tol::ACCEPT {
                Ok(vec![])
            } else {
                Err(Error::NotASolution(r))
            }
        }
        _ => Ok(obstruction(x)?.bits),
    }
}

/// True iff every step of the path carries the same component label.
pub fn obstruction_is_locally_constant_check(path: &GroupPath) -> bool {
    let mut labels = path.points().map(component_label);
    match labels.next() {
        Some(Ok(first)) => labels.all(|l| l.as_ref() == Ok(&first)),
        _ => false,
    }
}

// ---------------------------------------------------------------------------
// component counts

/// Group data for counting: a concrete family, or a semisimple group given
/// only by its (finite) fundamental group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupTopology {
    Spec(GroupSpec),
    Semisimple { pi1: FiniteAbelianGroup },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Formula {
    #[serde(rename = "trivial")]
    Trivial,
    #[serde(rename = "2^dimS")]
    TwoPowDimS,
    #[serde(rename = "pi1")]
    Pi1,
    #[serde(rename = "pi1_mod_squares")]
    Pi1ModSquares,
}

impl Formula {
    pub fn tag(self) -> &'static str {
        match self {
            Formula::Trivial => "trivial",
            Formula::TwoPowDimS => "2^dimS",
            Formula::Pi1 => "pi1",
            Formula::Pi1ModSquares => "pi1_mod_squares",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentCount {
    pub components: u64,
    pub formula: Formula,
}

fn semisimple_pi1(group: &GroupTopology) -> Option<FiniteAbelianGroup> {
    match group {
        GroupTopology::Semisimple { pi1 } => Some(pi1.clone()),
        GroupTopology::Spec(s) => match s.pi1() {
            crate::lie::Pi1::Finite(g) => Some(g),
            crate::lie::Pi1::Trivial => Some(FiniteAbelianGroup::trivial()),
            crate::lie::Pi1::FreeRank1 => None,
        },
    }
}

/// Number of connected components of the moduli space, with the formula
/// that produced it.
pub fn count_components(sig: SurfaceSig, group: &GroupTopology) -> Result<ComponentCount> {
    sig.require_not_excluded()?;
    if sig.is_sphere() {
        return Ok(ComponentCount { components: 1, formula: Formula::Trivial });
    }
    let formula = match group {
        GroupTopology::Spec(s) if s.ss_simply_connected() => {
            if sig.is_orientable() {
                Formula::Trivial
            } else {
                Formula::TwoPowDimS
            }
        }
        _ if sig.is_orientable() => Formula::Pi1,
        _ => Formula::Pi1ModSquares,
    };
    count_with_formula(sig, group, formula)
}

/// Evaluate one specific formula, refusing combinations whose hypotheses do
/// not hold.
pub fn count_with_formula(sig: SurfaceSig, group: &GroupTopology, formula: Formula) -> Result<ComponentCount> {
    sig.require_not_excluded()?;
    let simply_connected_ss = matches!(group, GroupTopology::Spec(s) if s.ss_simply_connected());
    let components = match formula {
        Formula::Trivial => {
            if !(sig.is_sphere() || (simply_connected_ss && sig.is_orientable())) {
                return Err(Error::UnsupportedCombination(format!(
                    "connectedness is not established for {sig} with this group"
                )));
            }
            1
        }
        Formula::TwoPowDimS => {
            let GroupTopology::Spec(s) = group else {
                return Err(Error::UnsupportedCombination("2^dimS needs a concrete group".into()));
            };
            if !s.ss_simply_connected() || sig.is_orientable() {
                return Err(Error::UnsupportedCombination(format!(
                    "2^dimS needs simply connected G_ss and a nonorientable surface ({s}, {sig})"
                )));
            }
            1 << s.dim_s()
        }
        Formula::Pi1 | Formula::Pi1ModSquares => {
            let pi1 = semisimple_pi1(group).ok_or_else(|| {
                Error::UnsupportedCombination("pi1 formulas need a semisimple group".into())
            })?;
            match (formula, sig.is_orientable()) {
                (Formula::Pi1, true) => pi1.order(),
                (Formula::Pi1ModSquares, false) => quotient_by_squares(&pi1),
                _ => {
                    return Err(Error::UnsupportedCombination(format!(
                        "{} does not apply to {sig}",
                        formula.tag()
                    )))
                }
            }
        }
    };
    Ok(ComponentCount { components, formula })
}

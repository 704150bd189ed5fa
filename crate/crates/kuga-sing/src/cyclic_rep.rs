//! Rational representations of finite cyclic groups and their
//! Hodge-compatible splittings.
//!
//! A [`RationalRep`] is a multiset of cyclotomic components `V_d` (the unique
//! faithful irreducible Q-representation of Z/d, of dimension phi(d)) whose
//! dimensions sum to `2g`. Its complexification has eigenvalue multiset the
//! union of the primitive d-th root angles of its components. A
//! [`HodgeSplitting`] picks one half of that multiset, closed under the
//! constraint that the chosen half and its conjugate reassemble the whole:
//! for each conjugate pair `{a, 1-a}` any split of the pair's multiplicity is
//! allowed, while the 0- and 1/2-eigenspaces are halved exactly.
//!
//! Enumeration is over all abstract splittings, a superset of those realized
//! by actual fixed points of an arithmetic group; everything is exact.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::angle::Angle;

/// Euler totient of `d`, by trial-division factorization.
pub fn euler_phi(d: u64) -> u64 {
    assert!(d >= 1, "euler_phi is defined for d >= 1");
    let mut n = d;
    let mut phi = d;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            phi -= phi / p;
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        phi -= phi / n;
    }
    phi
}

/// The eigenvalue angles of `V_d`: `{k/d : gcd(k, d) = 1, 0 <= k < d}`,
/// each with multiplicity 1. For `d = 1` this is `{0}`.
pub fn component_angles(d: u64) -> Vec<Angle> {
    assert!(d >= 1, "component_angles is defined for d >= 1");
    (0..d)
        .filter(|&k| num::integer::gcd(k, d) == 1)
        .map(|k| Angle::new(k as i64, d as i64))
        .collect()
}

/// One isotypic block `V_d^mult` of a rational representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CyclotomicComponent {
    pub d: u64,
    pub mult: u64,
}

impl CyclotomicComponent {
    /// Contribution `mult * phi(d)` to the total dimension.
    pub fn dimension(&self) -> u64 {
        self.mult * euler_phi(self.d)
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum RepError {
    #[error("cannot parse representation label {0:?}")]
    Syntax(String),
    #[error("V_{d} must appear with even multiplicity, got {mult}")]
    OddSmallMultiplicity { d: u64, mult: u64 },
    #[error("total dimension must be an even integer >= 4, got {0}")]
    BadDimension(u64),
    #[error("component with zero order or zero multiplicity")]
    ZeroComponent,
}

/// A rational representation of a finite cyclic group of dimension `two_g`.
///
/// Components are stored merged by order and sorted by decreasing `d`, which
/// is also the order used by the `V6+V1^2` label form.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RationalRep {
    components: Vec<CyclotomicComponent>,
    two_g: u64,
}

impl RationalRep {
    /// Builds a representation from `(d, mult)` pairs, merging repeated
    /// orders. Enforces the parity constraint at `d = 1, 2` and the
    /// dimension bound `two_g >= 4`.
    pub fn new<I: IntoIterator<Item = (u64, u64)>>(parts: I) -> Result<Self, RepError> {
        let mut by_d: BTreeMap<u64, u64> = BTreeMap::new();
        for (d, mult) in parts {
            if d == 0 || mult == 0 {
                return Err(RepError::ZeroComponent);
            }
            *by_d.entry(d).or_insert(0) += mult;
        }
        let components: Vec<CyclotomicComponent> = by_d
            .into_iter()
            .rev()
            .map(|(d, mult)| CyclotomicComponent { d, mult })
            .collect();
        for c in &components {
            if c.d <= 2 && c.mult % 2 != 0 {
                return Err(RepError::OddSmallMultiplicity { d: c.d, mult: c.mult });
            }
        }
        let two_g: u64 = components.iter().map(|c| c.dimension()).sum();
        if two_g < 4 || two_g % 2 != 0 {
            return Err(RepError::BadDimension(two_g));
        }
        Ok(RationalRep { components, two_g })
    }

    /// The identity representation `V_1^{2g}`.
    pub fn identity(two_g: u64) -> Self {
        RationalRep::new([(1, two_g)]).expect("identity rep is valid for even two_g >= 4")
    }

    pub fn components(&self) -> &[CyclotomicComponent] {
        &self.components
    }

    pub fn two_g(&self) -> u64 {
        self.two_g
    }

    pub fn g(&self) -> u64 {
        self.two_g / 2
    }

    pub fn is_identity(&self) -> bool {
        self.components.len() == 1 && self.components[0].d == 1
    }

    pub fn contains_order(&self, d: u64) -> bool {
        self.components.iter().any(|c| c.d == d)
    }

    /// The full eigenvalue multiset of a generator on the complexification,
    /// sorted ascending.
    pub fn angles(&self) -> Vec<Angle> {
        let mut out = Vec::with_capacity(self.two_g as usize);
        for c in &self.components {
            let base = component_angles(c.d);
            for _ in 0..c.mult {
                out.extend_from_slice(&base);
            }
        }
        out.sort();
        out
    }

    /// Label in the `V6+V1^2` grammar.
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for RationalRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, "+")?;
            }
            write!(f, "V{}", c.d)?;
            if c.mult > 1 {
                write!(f, "^{}", c.mult)?;
            }
        }
        Ok(())
    }
}

impl FromStr for RationalRep {
    type Err = RepError;

    /// Parses the label grammar `V<d>[^<mult>] ('+' V<d>[^<mult>])*`.
    fn from_str(label: &str) -> Result<Self, RepError> {
        let bad = || RepError::Syntax(label.to_string());
        let mut parts = Vec::new();
        for term in label.split('+') {
            let term = term.trim();
            let rest = term.strip_prefix('V').ok_or_else(bad)?;
            let (d_str, mult_str) = match rest.split_once('^') {
                Some((d, m)) => (d, Some(m)),
                None => (rest, None),
            };
            let d: u64 = d_str.parse().map_err(|_| bad())?;
            let mult: u64 = match mult_str {
                Some(m) => m.parse().map_err(|_| bad())?,
                None => 1,
            };
            if d == 0 || mult == 0 {
                return Err(bad());
            }
            parts.push((d, mult));
        }
        if parts.is_empty() {
            return Err(bad());
        }
        RationalRep::new(parts)
    }
}

/// Alias for the label parser, `"V6+V1^2" -> V_6 + V_1^2`.
pub fn parse_rep(label: &str) -> Result<RationalRep, RepError> {
    label.parse()
}

/// All rational representations of dimension exactly `two_g`, in a
/// deterministic canonical order. Includes the identity `V_1^{two_g}`.
pub fn enumerate_reps(two_g: u64) -> Result<Vec<RationalRep>, RepError> {
    if two_g < 4 || two_g % 2 != 0 {
        return Err(RepError::BadDimension(two_g));
    }
    // phi(d) >= sqrt(d/2), so every d with phi(d) <= two_g lies below
    // 2 * two_g^2; a direct scan of that range is exhaustive.
    let candidates: Vec<u64> = (1..=2 * two_g * two_g)
        .filter(|&d| euler_phi(d) <= two_g)
        .collect();

    let mut out = Vec::new();
    let mut stack: Vec<(u64, u64)> = Vec::new();
    enumerate_rec(&candidates, 0, two_g, &mut stack, &mut out);
    out.sort();
    Ok(out)
}

fn enumerate_rec(
    candidates: &[u64],
    idx: usize,
    remaining: u64,
    stack: &mut Vec<(u64, u64)>,
    out: &mut Vec<RationalRep>,
) {
    if remaining == 0 {
        if let Ok(rep) = RationalRep::new(stack.iter().copied()) {
            out.push(rep);
        }
        return;
    }
    if idx == candidates.len() {
        return;
    }
    let d = candidates[idx];
    let phi = euler_phi(d);
    let step = if d <= 2 { 2 } else { 1 };
    // skip d entirely, then each admissible multiplicity
    enumerate_rec(candidates, idx + 1, remaining, stack, out);
    let mut mult = step;
    while mult * phi <= remaining {
        stack.push((d, mult));
        enumerate_rec(candidates, idx + 1, remaining - mult * phi, stack, out);
        stack.pop();
        mult += step;
    }
}

/// A chosen half `lambda(V)` of the eigenvalues of a [`RationalRep`],
/// stored as a sorted multiset of size `g`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HodgeSplitting {
    v_angles: Vec<Angle>,
}

impl HodgeSplitting {
    pub fn from_angles(mut v_angles: Vec<Angle>) -> Self {
        v_angles.sort();
        HodgeSplitting { v_angles }
    }

    pub fn v_angles(&self) -> &[Angle] {
        &self.v_angles
    }

    pub fn g(&self) -> usize {
        self.v_angles.len()
    }

    /// True when this splitting together with its conjugate reassembles the
    /// full eigenvalue multiset of `rep`.
    pub fn belongs_to(&self, rep: &RationalRep) -> bool {
        let mut union: Vec<Angle> = self
            .v_angles
            .iter()
            .copied()
            .chain(self.v_angles.iter().map(Angle::conj))
            .collect();
        union.sort();
        union == rep.angles()
    }
}

impl fmt::Display for HodgeSplitting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, a) in self.v_angles.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "}}")
    }
}

/// All Hodge-compatible splittings of `rep`, deduplicated, in a
/// deterministic order. The count is the product of `m_a + 1` over conjugate
/// pairs `{a, 1-a}` with `a` strictly between 0 and 1/2 of pair multiplicity
/// `m_a`; the 0- and 1/2-eigenspaces are forced to split in half.
pub fn enumerate_splittings(rep: &RationalRep) -> Vec<HodgeSplitting> {
    let mut counts: BTreeMap<Angle, u64> = BTreeMap::new();
    for a in rep.angles() {
        *counts.entry(a).or_insert(0) += 1;
    }

    let mut forced: Vec<Angle> = Vec::new();
    let mut pairs: Vec<(Angle, u64)> = Vec::new();
    for (&a, &m) in &counts {
        if a.is_zero() || a == Angle::half() {
            debug_assert!(m % 2 == 0, "0 and 1/2 eigenvalues come in even multiplicity");
            for _ in 0..m / 2 {
                forced.push(a);
            }
        } else if a < a.conj() {
            debug_assert_eq!(counts.get(&a.conj()), Some(&m), "conjugate multiplicities agree");
            pairs.push((a, m));
        }
    }

    let mut out = Vec::new();
    let mut chosen = forced.clone();
    splitting_rec(&pairs, 0, &mut chosen, &mut out);
    out.sort();
    out.dedup();
    out
}

fn splitting_rec(
    pairs: &[(Angle, u64)],
    idx: usize,
    chosen: &mut Vec<Angle>,
    out: &mut Vec<HodgeSplitting>,
) {
    if idx == pairs.len() {
        out.push(HodgeSplitting::from_angles(chosen.clone()));
        return;
    }
    let (a, m) = pairs[idx];
    for j in 0..=m {
        let before = chosen.len();
        for _ in 0..j {
            chosen.push(a);
        }
        for _ in 0..m - j {
            chosen.push(a.conj());
        }
        splitting_rec(pairs, idx + 1, chosen, out);
        chosen.truncate(before);
    }
}

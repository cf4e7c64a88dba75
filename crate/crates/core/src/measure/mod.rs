//! Exact finite probability spaces and eventually-constant sequences of sets
//! and functions.
//!
//! Every point set is measurable (the σ-algebra is the power set) and all
//! arithmetic is exact. A sequence is stored as a prefix `A_0, …, A_{N-1}`
//! and a tail with `A_n = tail` for every `n ≥ N`, so every statement
//! quantifying over all `n` reduces to finitely many indices.

mod hypothesis;
mod io;

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use hypothesis::{
    body_set, cond1, cond2, cond3, hypothesis_holds, hypothesis_sufficient, Decision,
    DEFAULT_ENUMERATION_BUDGET,
};
pub use io::{FuncSeqFile, Instance, SetSeqFile};

use crate::functional::EvalError;
use crate::num::{fmt_rational, nat_to_usize, Nat, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MeasureError {
    #[error("point {point} is out of range for a space with {size} points")]
    PointOutOfRange { point: usize, size: usize },
    #[error("invalid weights: {0}")]
    BadWeights(String),
    #[error("invalid function value {value} (values must lie in [0,1])")]
    ValueOutOfRange { value: String },
    #[error("function has {got} values but the space has {expected} points")]
    ArityMismatch { expected: usize, got: usize },
    #[error("stabilization index {stab} does not match prefix length {prefix}")]
    StabMismatch { stab: usize, prefix: usize },
    #[error("the functional is not monotone; the capped enumeration would be unsound")]
    NonMonotone,
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A set of point ids.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointSet(BTreeSet<usize>);

impl PointSet {
    pub fn empty() -> Self {
        PointSet(BTreeSet::new())
    }

    pub fn full(size: usize) -> Self {
        PointSet((0..size).collect())
    }

    pub fn contains(&self, x: usize) -> bool {
        self.0.contains(&x)
    }

    pub fn insert(&mut self, x: usize) {
        self.0.insert(x);
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn union(&self, other: &PointSet) -> PointSet {
        PointSet(self.0.union(&other.0).copied().collect())
    }

    pub fn intersection(&self, other: &PointSet) -> PointSet {
        PointSet(self.0.intersection(&other.0).copied().collect())
    }

    pub fn difference(&self, other: &PointSet) -> PointSet {
        PointSet(self.0.difference(&other.0).copied().collect())
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn complement(&self, size: usize) -> PointSet {
        PointSet((0..size).filter(|x| !self.0.contains(x)).collect())
    }
}

impl FromIterator<usize> for PointSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        PointSet(iter.into_iter().collect())
    }
}

impl fmt::Display for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Finitely many points with positive rational weights summing to one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteProbSpace {
    weights: Vec<Rational>,
}

impl FiniteProbSpace {
    pub fn new(weights: Vec<Rational>) -> Result<Self, MeasureError> {
        if weights.is_empty() {
            return Err(MeasureError::BadWeights("at least one point is required".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_positive()) {
            return Err(MeasureError::BadWeights(format!("weight {} is not positive", fmt_rational(w))));
        }
        let total: Rational = weights.iter().cloned().sum();
        if !total.is_one() {
            return Err(MeasureError::BadWeights(format!("weights sum to {}", fmt_rational(&total))));
        }
        Ok(FiniteProbSpace { weights })
    }

    pub fn uniform(size: usize) -> Self {
        assert!(size > 0, "uniform space needs a point");
        let w = Rational::new(1.into(), (size as i64).into());
        FiniteProbSpace { weights: vec![w; size] }
    }

    pub fn size(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn full(&self) -> PointSet {
        PointSet::full(self.size())
    }

    fn check(&self, set: &PointSet) -> Result<(), MeasureError> {
        match set.iter().find(|&x| x >= self.size()) {
            Some(point) => Err(MeasureError::PointOutOfRange { point, size: self.size() }),
            None => Ok(()),
        }
    }
}

/// `μ(A)`
pub fn measure(space: &FiniteProbSpace, set: &PointSet) -> Result<Rational, MeasureError> {
    space.check(set)?;
    Ok(set.iter().map(|x| space.weights[x].clone()).sum())
}

/// An eventually-constant sequence of point sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetSeq {
    prefix: Vec<PointSet>,
    tail: PointSet,
}

impl SetSeq {
    pub fn new(prefix: Vec<PointSet>, tail: PointSet) -> Self {
        SetSeq { prefix, tail }
    }

    pub fn constant(set: PointSet) -> Self {
        SetSeq { prefix: Vec::new(), tail: set }
    }

    /// `N`: `A_n = tail` for all `n ≥ N`.
    pub fn stab_index(&self) -> usize {
        self.prefix.len()
    }

    pub fn prefix(&self) -> &[PointSet] {
        &self.prefix
    }

    pub fn tail(&self) -> &PointSet {
        &self.tail
    }

    pub fn get(&self, n: usize) -> &PointSet {
        self.prefix.get(n).unwrap_or(&self.tail)
    }

    pub fn get_nat(&self, n: &Nat) -> &PointSet {
        match nat_to_usize(n) {
            Some(i) => self.get(i),
            None => &self.tail,
        }
    }

    pub fn validate(&self, space: &FiniteProbSpace) -> Result<(), MeasureError> {
        self.prefix.iter().chain(std::iter::once(&self.tail)).try_for_each(|s| space.check(s))
    }
}

/// An eventually-constant sequence of `[0,1]`-valued functions on the points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuncSeq {
    prefix: Vec<Vec<Rational>>,
    tail: Vec<Rational>,
}

impl FuncSeq {
    pub fn new(prefix: Vec<Vec<Rational>>, tail: Vec<Rational>) -> Result<Self, MeasureError> {
        let arity = tail.len();
        for f in prefix.iter().chain(std::iter::once(&tail)) {
            if f.len() != arity {
                return Err(MeasureError::ArityMismatch { expected: arity, got: f.len() });
            }
            if let Some(v) = f.iter().find(|v| v.is_negative() || **v > Rational::one()) {
                return Err(MeasureError::ValueOutOfRange { value: fmt_rational(v) });
            }
        }
        Ok(FuncSeq { prefix, tail })
    }

    pub fn constant(f: Vec<Rational>) -> Result<Self, MeasureError> {
        FuncSeq::new(Vec::new(), f)
    }

    pub fn stab_index(&self) -> usize {
        self.prefix.len()
    }

    pub fn prefix(&self) -> &[Vec<Rational>] {
        &self.prefix
    }

    pub fn tail(&self) -> &[Rational] {
        &self.tail
    }

    pub fn arity(&self) -> usize {
        self.tail.len()
    }

    pub fn get(&self, n: usize) -> &[Rational] {
        self.prefix.get(n).unwrap_or(&self.tail)
    }

    pub fn validate(&self, space: &FiniteProbSpace) -> Result<(), MeasureError> {
        if self.arity() != space.size() {
            return Err(MeasureError::ArityMismatch { expected: space.size(), got: self.arity() });
        }
        Ok(())
    }
}

/// Indices `[m, b]` after capping at the stabilization index: every index at
/// or beyond `N` carries the tail, so one representative suffices.
pub(crate) fn capped_range(m: &Nat, b: &Nat, stab: usize) -> Option<(usize, usize)> {
    if b < m {
        return None;
    }
    let n = Nat::from(stab);
    if m >= &n {
        return Some((stab, stab));
    }
    let lo = nat_to_usize(m).expect("below stabilization index");
    let hi = if b >= &n { stab } else { nat_to_usize(b).expect("below stabilization index") };
    Some((lo, hi))
}

/// `⋃_{n=m}^{b} A_n`, empty when `b < m`.
pub fn range_union(seq: &SetSeq, m: &Nat, b: &Nat) -> PointSet {
    match capped_range(m, b, seq.stab_index()) {
        None => PointSet::empty(),
        Some((lo, hi)) => (lo..=hi).fold(PointSet::empty(), |acc, n| acc.union(seq.get(n))),
    }
}

/// `{x : ∃ n, n′ ∈ [m, b]. |f_n(x) − f_{n′}(x)| ≥ ε}`
pub fn bad_set(fs: &FuncSeq, epsilon: &Rational, m: &Nat, b: &Nat) -> PointSet {
    let Some((lo, hi)) = capped_range(m, b, fs.stab_index()) else {
        return PointSet::empty();
    };
    (0..fs.arity())
        .filter(|&x| {
            let values = (lo..=hi).map(|n| &fs.get(n)[x]);
            let (min, max) = values.fold((None::<&Rational>, None::<&Rational>), |(lo, hi), v| {
                (Some(lo.map_or(v, |l| l.min(v))), Some(hi.map_or(v, |h| h.max(v))))
            });
            match (min, max) {
                (Some(lo), Some(hi)) => &(hi - lo) >= epsilon,
                _ => false,
            }
        })
        .collect()
}

/// Least `n ≤ m′` with `μ(A_n) < λ`.
pub fn conclusion_check(
    space: &FiniteProbSpace,
    seq: &SetSeq,
    lambda: &Rational,
    m_prime: &Nat,
) -> Result<Option<Nat>, MeasureError> {
    let last = match nat_to_usize(m_prime) {
        Some(m) => m.min(seq.stab_index()),
        None => seq.stab_index(),
    };
    for n in 0..=last {
        if &measure(space, seq.get(n))? < lambda {
            return Ok(Some(Nat::from(n)));
        }
    }
    Ok(None)
}

/// `∫ g dμ`
pub fn integral(space: &FiniteProbSpace, g: &[Rational]) -> Result<Rational, MeasureError> {
    if g.len() != space.size() {
        return Err(MeasureError::ArityMismatch { expected: space.size(), got: g.len() });
    }
    Ok(space.weights.iter().zip(g).map(|(w, v)| w * v).sum())
}

/// `‖g‖_p^p = ∫ |g|^p dμ`
pub fn lp_power(space: &FiniteProbSpace, g: &[Rational], p: u32) -> Result<Rational, MeasureError> {
    if p == 0 {
        return Err(MeasureError::NonPositive("p"));
    }
    if g.len() != space.size() {
        return Err(MeasureError::ArityMismatch { expected: space.size(), got: g.len() });
    }
    Ok(space.weights.iter().zip(g).map(|(w, v)| w * num_traits::pow(v.abs(), p as usize)).sum())
}

pub(crate) fn difference(f: &[Rational], g: &[Rational]) -> Vec<Rational> {
    f.iter().zip(g).map(|(a, b)| a - b).collect()
}

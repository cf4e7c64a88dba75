use std::collections::BTreeSet;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::num::{fmt_rational, Rational};

/// A finite set together with an optional ray `[start, ∞)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NatSet {
    points: BTreeSet<u64>,
    ray: Option<u64>,
}

impl NatSet {
    pub fn empty() -> Self {
        NatSet::default()
    }

    pub fn ray(start: u64) -> Self {
        NatSet { points: BTreeSet::new(), ray: Some(start) }
    }

    /// `[lo, hi)`
    pub fn range(lo: u64, hi: u64) -> Self {
        NatSet { points: (lo..hi).collect(), ray: None }
    }

    pub fn points(points: impl IntoIterator<Item = u64>) -> Self {
        NatSet { points: points.into_iter().collect(), ray: None }
    }

    fn normalized(mut self) -> Self {
        if let Some(mut s) = self.ray {
            self.points.retain(|&p| p < s);
            while s > 0 && self.points.remove(&(s - 1)) {
                s -= 1;
            }
            self.ray = Some(s);
        }
        self
    }

    pub fn contains(&self, x: u64) -> bool {
        self.points.contains(&x) || self.ray.is_some_and(|s| x >= s)
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty() && self.ray.is_none()
    }

    pub fn is_infinite(&self) -> bool {
        self.ray.is_some()
    }

    pub fn union(&self, other: &NatSet) -> NatSet {
        let ray = match (self.ray, other.ray) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        NatSet { points: self.points.union(&other.points).copied().collect(), ray }.normalized()
    }

    pub fn intersection(&self, other: &NatSet) -> NatSet {
        let mut points: BTreeSet<u64> = self.points.iter().copied().filter(|&x| other.contains(x)).collect();
        points.extend(other.points.iter().copied().filter(|&x| self.contains(x)));
        let ray = match (self.ray, other.ray) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
        NatSet { points, ray }.normalized()
    }

    /// Counting measure.
    pub fn measure(&self) -> ExtMeasure {
        match self.ray {
            Some(_) => ExtMeasure::Infinite,
            None => ExtMeasure::Finite(Rational::from_integer(self.points.len().into())),
        }
    }

    /// Elements `≤ w`.
    pub fn restrict(&self, w: u64) -> BTreeSet<u64> {
        (0..=w).filter(|&x| self.contains(x)).collect()
    }
}

impl fmt::Display for NatSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.points.iter().map(u64::to_string).collect();
        if let Some(s) = self.ray {
            parts.push(format!("{s}.."));
        }
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// A measure value in `[0, ∞]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtMeasure {
    Finite(Rational),
    Infinite,
}

impl ExtMeasure {
    pub fn lt(&self, bound: &Rational) -> bool {
        match self {
            ExtMeasure::Finite(v) => v < bound,
            ExtMeasure::Infinite => false,
        }
    }
}

impl fmt::Display for ExtMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtMeasure::Finite(v) => f.write_str(&fmt_rational(v)),
            ExtMeasure::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtMeasure {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

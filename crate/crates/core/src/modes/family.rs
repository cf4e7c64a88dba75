use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::natset::NatSet;
use crate::num::Rational;

/// The built-in sequences on `ℕ` with counting measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `f_n = χ_{{n}}`
    ShiftIndicator,
    /// `h_n = χ_{{x ≥ n}}`
    TailIndicator,
    /// `g_n = (−1)^n χ_{{x ≥ n}}`
    AltTail,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::ShiftIndicator, Family::TailIndicator, Family::AltTail];

    pub fn name(self) -> &'static str {
        match self {
            Family::ShiftIndicator => "shift_indicator",
            Family::TailIndicator => "tail_indicator",
            Family::AltTail => "alt_tail",
        }
    }

    pub fn value(self, n: u64, x: u64) -> i64 {
        match self {
            Family::ShiftIndicator => i64::from(x == n),
            Family::TailIndicator => i64::from(x >= n),
            Family::AltTail if x >= n => {
                if n.is_multiple_of(2) {
                    1
                } else {
                    -1
                }
            }
            Family::AltTail => 0,
        }
    }

    /// `{x : |f_n(x) − f_{n′}(x)| ≥ ε}` in closed form.
    pub fn pair_bad_set(self, n: u64, n2: u64, epsilon: &Rational) -> NatSet {
        let (a, b) = (n.min(n2), n.max(n2));
        let one = reaches(1, epsilon);
        if a == b {
            return NatSet::empty();
        }
        match self {
            Family::ShiftIndicator if one => NatSet::points([a, b]),
            Family::TailIndicator if one => NatSet::range(a, b),
            Family::AltTail => {
                let mut s = if one { NatSet::range(a, b) } else { NatSet::empty() };
                if (a + b) % 2 == 1 && reaches(2, epsilon) {
                    s = s.union(&NatSet::ray(b));
                }
                s
            }
            _ => NatSet::empty(),
        }
    }

    /// `{x : |f_n(x) − 0| ≥ ε}`; `0` is the pointwise limit of every family.
    pub fn limit_bad_set(self, n: u64, epsilon: &Rational) -> NatSet {
        if !reaches(1, epsilon) {
            return NatSet::empty();
        }
        match self {
            Family::ShiftIndicator => NatSet::points([n]),
            Family::TailIndicator | Family::AltTail => NatSet::ray(n),
        }
    }

    /// `{x : ∃n, n′ ≥ m. |f_n(x) − f_{n′}(x)| ≥ ε}` in closed form.
    pub fn uniform_bad_set(self, m: u64, epsilon: &Rational) -> NatSet {
        match self {
            _ if reaches(1, epsilon) => NatSet::ray(m),
            Family::AltTail if reaches(2, epsilon) => NatSet::ray(m + 1),
            _ => NatSet::empty(),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "shift" | "shift_indicator" => Ok(Family::ShiftIndicator),
            "tail" | "tail_indicator" => Ok(Family::TailIndicator),
            "alt" | "alt_tail" => Ok(Family::AltTail),
            _ => Err(format!("unknown family {s:?}: expected shift_indicator, tail_indicator or alt_tail")),
        }
    }
}

/// `d ≥ ε`
fn reaches(d: i64, epsilon: &Rational) -> bool {
    &Rational::from_integer(d.into()) >= epsilon
}

pub(crate) fn deviates(a: i64, b: i64, epsilon: &Rational) -> bool {
    reaches((a - b).abs(), epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rat;

    #[test]
    fn pair_closed_forms_match_direct_evaluation() {
        let w = 20;
        for eps in [rat(1, 2), rat(1, 1), rat(3, 2), rat(2, 1), rat(3, 1)] {
            for fam in Family::ALL {
                for n in 0..=w {
                    for n2 in 0..=w {
                        let direct: std::collections::BTreeSet<u64> =
                            (0..=w).filter(|&x| deviates(fam.value(n, x), fam.value(n2, x), &eps)).collect();
                        assert_eq!(fam.pair_bad_set(n, n2, &eps).restrict(w), direct, "{fam} {n} {n2} {eps}");
                    }
                    let direct: std::collections::BTreeSet<u64> =
                        (0..=w).filter(|&x| deviates(fam.value(n, x), 0, &eps)).collect();
                    assert_eq!(fam.limit_bad_set(n, &eps).restrict(w), direct);
                }
            }
        }
    }

    #[test]
    fn shift_pair_sets_are_small() {
        for n in 0..10 {
            for n2 in 0..10 {
                assert!(Family::ShiftIndicator.pair_bad_set(n, n2, &rat(1, 2)).restrict(100).len() <= 2);
                assert!(!Family::ShiftIndicator.pair_bad_set(n, n2, &rat(1, 2)).is_infinite());
            }
        }
    }

    #[test]
    fn names_round_trip() {
        for fam in Family::ALL {
            assert_eq!(fam.name().parse::<Family>().unwrap(), fam);
        }
        assert!("nope".parse::<Family>().is_err());
    }
}

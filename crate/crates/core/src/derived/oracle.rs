use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::num::{nat_to_usize, Nat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid function {text:?}: expected id, succ, affine:A,B or table:V0,V1,...;TAIL")]
pub struct TotalFnParseError {
    pub text: String,
}

/// A total function `ℕ → ℕ` with a closed form for its maximum on an interval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TotalFn {
    /// `n ↦ mul·n + add`
    Affine { mul: Nat, add: Nat },
    /// `values[n]` below the table length, `tail` beyond.
    Table { values: Vec<Nat>, tail: Nat },
}

impl TotalFn {
    pub fn identity() -> Self {
        TotalFn::Affine { mul: 1u32.into(), add: Nat::zero() }
    }

    pub fn affine(mul: u64, add: u64) -> Self {
        TotalFn::Affine { mul: mul.into(), add: add.into() }
    }

    pub fn table(values: &[u64], tail: u64) -> Self {
        TotalFn::Table { values: values.iter().map(|&v| v.into()).collect(), tail: tail.into() }
    }

    pub fn value(&self, n: &Nat) -> Nat {
        match self {
            TotalFn::Affine { mul, add } => mul * n + add,
            TotalFn::Table { values, tail } => match nat_to_usize(n) {
                Some(i) if i < values.len() => values[i].clone(),
                _ => tail.clone(),
            },
        }
    }

    pub fn value_at(&self, n: usize) -> Nat {
        self.value(&Nat::from(n))
    }

    /// `max_{n ∈ [lo, hi]} F(n)`; requires `lo ≤ hi`.
    pub fn max_on(&self, lo: &Nat, hi: &Nat) -> Nat {
        debug_assert!(lo <= hi);
        match self {
            TotalFn::Affine { .. } => self.value(hi),
            TotalFn::Table { values, tail } => {
                let len = values.len();
                let mut best = nat_to_usize(lo).filter(|&s| s < len).and_then(|s| {
                    let e = nat_to_usize(hi).map_or(len - 1, |h| h.min(len - 1));
                    values[s..=e].iter().max().cloned()
                });
                if hi >= &Nat::from(len) {
                    best = Some(best.map_or_else(|| tail.clone(), |b| b.max(tail.clone())));
                }
                best.expect("nonempty interval")
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self, TotalFnParseError> {
        let err = || TotalFnParseError { text: text.to_string() };
        let nat = |s: &str| s.trim().parse::<Nat>().map_err(|_| err());
        let t = text.trim();
        match t {
            "id" => return Ok(TotalFn::identity()),
            "succ" => return Ok(TotalFn::affine(1, 1)),
            _ => {}
        }
        if let Some(rest) = t.strip_prefix("affine:") {
            let (a, b) = rest.split_once(',').ok_or_else(err)?;
            return Ok(TotalFn::Affine { mul: nat(a)?, add: nat(b)? });
        }
        if let Some(rest) = t.strip_prefix("table:") {
            let (vals, tail) = rest.split_once(';').ok_or_else(err)?;
            let values = if vals.trim().is_empty() {
                Vec::new()
            } else {
                vals.split(',').map(nat).collect::<Result<_, _>>()?
            };
            return Ok(TotalFn::Table { values, tail: nat(tail)? });
        }
        Err(err())
    }
}

impl fmt::Display for TotalFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TotalFn::Affine { mul, add } => write!(f, "affine:{mul},{add}"),
            TotalFn::Table { values, tail } => {
                let v: Vec<String> = values.iter().map(|x| x.to_string()).collect();
                write!(f, "table:{};{tail}", v.join(","))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::nat;

    #[test]
    fn interval_maxima_match_direct_scan() {
        let fns = [TotalFn::affine(2, 1), TotalFn::table(&[3, 0, 7, 1], 2), TotalFn::table(&[], 5)];
        for f in &fns {
            for lo in 0..7u64 {
                for hi in lo..9u64 {
                    let direct = (lo..=hi).map(|n| f.value(&nat(n))).max().unwrap();
                    assert_eq!(f.max_on(&nat(lo), &nat(hi)), direct, "{f} on [{lo},{hi}]");
                }
            }
        }
    }

    #[test]
    fn parse_and_print() {
        for text in ["affine:2,1", "table:3,0,7;2", "table:;4"] {
            assert_eq!(TotalFn::parse(text).unwrap().to_string(), text);
        }
        assert_eq!(TotalFn::parse("id").unwrap(), TotalFn::identity());
        assert_eq!(TotalFn::parse("succ").unwrap().value(&nat(4)), nat(5));
        assert!(TotalFn::parse("square").is_err());
        assert!(TotalFn::parse("table:1,2").is_err());
    }
}

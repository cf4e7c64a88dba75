use std::fmt;

use num_traits::Zero;

use super::{EvalError, Oracle};
use crate::num::Nat;

/// Syntax tree of the functional language.
///
/// Every constructor is monotone in the oracle, so every `Expr` denotes a
/// pointwise-monotone continuous functional.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(Nat),
    /// `F(arg)`
    Apply(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
    /// `F` applied `k` times to `arg`.
    Iter(Nat, Box<Expr>),
}

impl Expr {
    pub fn constant(k: u64) -> Expr {
        Expr::Const(Nat::from(k))
    }

    pub fn apply(arg: Expr) -> Expr {
        Expr::Apply(Box::new(arg))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(l: Expr, r: Expr) -> Expr {
        Expr::Add(Box::new(l), Box::new(r))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(l: Expr, r: Expr) -> Expr {
        Expr::Mul(Box::new(l), Box::new(r))
    }

    pub fn max(l: Expr, r: Expr) -> Expr {
        Expr::Max(Box::new(l), Box::new(r))
    }

    pub fn iter(k: u64, arg: Expr) -> Expr {
        Expr::Iter(Nat::from(k), Box::new(arg))
    }

    /// Nesting depth; constants have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Apply(a) | Expr::Iter(_, a) => 1 + a.depth(),
            Expr::Add(l, r) | Expr::Mul(l, r) | Expr::Max(l, r) => 1 + l.depth().max(r.depth()),
        }
    }

    /// Whether the value depends on the oracle at all.
    pub fn reads_oracle(&self) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Apply(_) => true,
            Expr::Iter(k, a) => !k.is_zero() || a.reads_oracle(),
            Expr::Add(l, r) | Expr::Mul(l, r) | Expr::Max(l, r) => l.reads_oracle() || r.reads_oracle(),
        }
    }

    /// `F ≤ G ⟹ e(F) ≤ e(G)` for all oracles. This fails as soon as an
    /// oracle answer is used as a query position: `F(F(0))` is `0` for
    /// `F = (1, 0)` and `1` for `G = (1, 1)`.
    pub fn is_monotone(&self) -> bool {
        match self {
            Expr::Const(_) => true,
            Expr::Apply(a) => !a.reads_oracle(),
            Expr::Iter(k, a) => {
                if k.is_zero() {
                    a.is_monotone()
                } else {
                    k == &Nat::from(1u32) && !a.reads_oracle()
                }
            }
            Expr::Add(l, r) | Expr::Mul(l, r) | Expr::Max(l, r) => l.is_monotone() && r.is_monotone(),
        }
    }

    pub fn eval(&self, oracle: &mut dyn Oracle) -> Result<Nat, EvalError> {
        match self {
            Expr::Const(k) => Ok(k.clone()),
            Expr::Apply(a) => {
                let p = a.eval(oracle)?;
                oracle.query(&p)
            }
            Expr::Add(l, r) => Ok(l.eval(oracle)? + r.eval(oracle)?),
            Expr::Mul(l, r) => {
                let lv = l.eval(oracle)?;
                let rv = r.eval(oracle)?;
                Ok(lv * rv)
            }
            Expr::Max(l, r) => {
                let lv = l.eval(oracle)?;
                let rv = r.eval(oracle)?;
                Ok(lv.max(rv))
            }
            Expr::Iter(k, a) => {
                let mut v = a.eval(oracle)?;
                let mut i = Nat::zero();
                while &i < k {
                    v = oracle.query(&v)?;
                    i += 1u32;
                }
                Ok(v)
            }
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        // prec: 0 = expr, 1 = term, 2 = factor
        match self {
            Expr::Const(k) => write!(f, "{k}"),
            Expr::Apply(a) => {
                f.write_str("F(")?;
                a.fmt_prec(f, 0)?;
                f.write_str(")")
            }
            Expr::Max(l, r) => {
                f.write_str("max(")?;
                l.fmt_prec(f, 0)?;
                f.write_str(",")?;
                r.fmt_prec(f, 0)?;
                f.write_str(")")
            }
            Expr::Iter(k, a) => {
                write!(f, "iter({k},")?;
                a.fmt_prec(f, 0)?;
                f.write_str(")")
            }
            Expr::Add(l, r) => {
                if prec > 0 {
                    f.write_str("(")?;
                }
                l.fmt_prec(f, 0)?;
                f.write_str("+")?;
                r.fmt_prec(f, 1)?;
                if prec > 0 {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Expr::Mul(l, r) => {
                if prec > 1 {
                    f.write_str("(")?;
                }
                l.fmt_prec(f, 1)?;
                f.write_str("*")?;
                r.fmt_prec(f, 2)?;
                if prec > 1 {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }

    /// `n` applications of `F` written out as nested `Apply`.
    pub fn nested_apply(n: usize, base: Expr) -> Expr {
        (0..n).fold(base, |e, _| Expr::apply(e))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

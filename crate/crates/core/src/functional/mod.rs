//! Continuous functionals `M : (ℕ → ℕ) → ℕ` evaluated as dialogues with an
//! oracle for `F`.
//!
//! Every evaluation logs the positions it asked about. A finite sequence `σ`
//! is treated as secured when evaluating against `σ̂` (σ followed by zeros)
//! only consults positions below `len(σ)`; then every total extension of `σ`
//! produces the same value.

mod expr;
mod parse;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_traits::Zero;
use thiserror::Error;

pub use expr::Expr;
pub use parse::{parse_expr, ParseError, MAX_LITERAL_DIGITS};

use crate::num::{nat_to_usize, Nat};

/// Default bound on oracle queries for one evaluation.
pub const DEFAULT_QUERY_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("evaluation exceeded {limit} oracle queries")]
    QueryLimit { limit: u64 },
    /// The oracle has no answer yet for this position; used by searches that
    /// build `F` lazily.
    #[error("oracle has no answer for position {position}")]
    Interrupted { position: Nat },
    #[error("{0}")]
    Oracle(String),
}

/// Answers queries "what is `F(p)`".
pub trait Oracle {
    fn query(&mut self, position: &Nat) -> Result<Nat, EvalError>;
}

impl<T: FnMut(&Nat) -> Result<Nat, EvalError>> Oracle for T {
    fn query(&mut self, position: &Nat) -> Result<Nat, EvalError> {
        self(position)
    }
}

/// A continuous functional evaluated through an [`Oracle`].
///
/// Implementations must be deterministic: the same answers give the same
/// result and the same queries.
pub trait Functional: Send + Sync + fmt::Debug {
    fn apply(&self, oracle: &mut dyn Oracle) -> Result<Nat, EvalError>;

    /// Whether `F ≤ G` pointwise implies `M(F) ≤ M(G)`.
    fn is_monotone(&self) -> bool;

    /// Whether `M(0) ≤ M(F)` for every `F`.
    fn zero_is_minimal(&self) -> bool {
        self.is_monotone()
    }

    fn describe(&self) -> String;
}

impl Functional for Expr {
    fn apply(&self, oracle: &mut dyn Oracle) -> Result<Nat, EvalError> {
        self.eval(oracle)
    }

    fn is_monotone(&self) -> bool {
        Expr::is_monotone(self)
    }

    fn zero_is_minimal(&self) -> bool {
        true
    }

    fn describe(&self) -> String {
        self.to_string()
    }
}

impl<T: Functional + ?Sized> Functional for Arc<T> {
    fn apply(&self, oracle: &mut dyn Oracle) -> Result<Nat, EvalError> {
        (**self).apply(oracle)
    }

    fn is_monotone(&self) -> bool {
        (**self).is_monotone()
    }

    fn zero_is_minimal(&self) -> bool {
        (**self).zero_is_minimal()
    }

    fn describe(&self) -> String {
        (**self).describe()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalLimits {
    pub max_queries: u64,
}

impl Default for EvalLimits {
    fn default() -> Self {
        EvalLimits { max_queries: DEFAULT_QUERY_LIMIT }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluation {
    pub value: Nat,
    pub queries: BTreeSet<Nat>,
}

/// Runs `f` against `answer`, logging every queried position.
pub fn evaluate(
    f: &dyn Functional,
    mut answer: impl FnMut(&Nat) -> Result<Nat, EvalError>,
    limits: EvalLimits,
) -> Result<Evaluation, EvalError> {
    let mut queries = BTreeSet::new();
    let mut count = 0u64;
    let mut recorder = |p: &Nat| {
        count += 1;
        if count > limits.max_queries {
            return Err(EvalError::QueryLimit { limit: limits.max_queries });
        }
        queries.insert(p.clone());
        answer(p)
    };
    let value = f.apply(&mut recorder)?;
    Ok(Evaluation { value, queries })
}

/// Evaluates `f` against a total function.
pub fn eval_total(f: &dyn Functional, oracle: impl Fn(&Nat) -> Nat) -> Result<Evaluation, EvalError> {
    evaluate(f, |p| Ok(oracle(p)), EvalLimits::default())
}

/// A finite sequence `σ = (σ_0, …, σ_{len-1})`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FiniteSeq(Vec<Nat>);

impl FiniteSeq {
    pub fn empty() -> Self {
        FiniteSeq(Vec::new())
    }

    pub fn from_u64s(values: &[u64]) -> Self {
        FiniteSeq(values.iter().map(|&v| Nat::from(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[Nat] {
        &self.0
    }

    /// `σ⌢n`
    pub fn extended(&self, n: Nat) -> FiniteSeq {
        let mut v = self.0.clone();
        v.push(n);
        FiniteSeq(v)
    }

    pub fn push(&mut self, n: Nat) {
        self.0.push(n);
    }

    pub fn pop(&mut self) -> Option<Nat> {
        self.0.pop()
    }

    /// `σ̂(p)`: the entry below the length, zero above.
    pub fn hat(&self, position: &Nat) -> Nat {
        match nat_to_usize(position) {
            Some(i) if i < self.0.len() => self.0[i].clone(),
            _ => Nat::zero(),
        }
    }

    pub fn is_prefix_of(&self, other: &FiniteSeq) -> bool {
        other.0.starts_with(&self.0)
    }
}

impl From<Vec<Nat>> for FiniteSeq {
    fn from(v: Vec<Nat>) -> Self {
        FiniteSeq(v)
    }
}

impl fmt::Display for FiniteSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

pub fn hat_evaluation(
    f: &dyn Functional,
    sigma: &FiniteSeq,
    limits: EvalLimits,
) -> Result<Evaluation, EvalError> {
    evaluate(f, |p| Ok(sigma.hat(p)), limits)
}

/// `M(σ̂)`
pub fn eval_hat(f: &dyn Functional, sigma: &FiniteSeq) -> Result<Nat, EvalError> {
    Ok(hat_evaluation(f, sigma, EvalLimits::default())?.value)
}

/// Dialogue securedness: evaluation against `σ̂` only reads positions below `len(σ)`.
pub fn is_secured(f: &dyn Functional, sigma: &FiniteSeq) -> Result<bool, EvalError> {
    let ev = hat_evaluation(f, sigma, EvalLimits::default())?;
    Ok(queries_below(&ev.queries, sigma.len()))
}

pub(crate) fn queries_below(queries: &BTreeSet<Nat>, len: usize) -> bool {
    match queries.iter().next_back() {
        None => true,
        Some(max) => nat_to_usize(max).is_some_and(|m| m < len),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::nat;

    fn e(text: &str) -> Expr {
        parse_expr(text).unwrap()
    }

    #[test]
    fn nested_application_is_not_monotone() {
        let nested = e("F(F(0))");
        let small = eval_total(&nested, |p| if p.is_zero() { nat(1) } else { nat(0) }).unwrap().value;
        let large = eval_total(&nested, |_| nat(1)).unwrap().value;
        assert_eq!((small, large), (nat(0), nat(1)));
        assert!(!Functional::is_monotone(&nested));
        assert!(!Functional::is_monotone(&e("iter(2,0)")));
        assert!(nested.zero_is_minimal());
        for text in ["F(0)+F(3)", "max(F(1),2)*F(0)", "iter(1,4)", "iter(0,F(2))", "7"] {
            assert!(Functional::is_monotone(&e(text)), "{text}");
        }
    }

    fn qs(v: &[u64]) -> BTreeSet<Nat> {
        v.iter().map(|&x| nat(x)).collect()
    }

    #[test]
    fn total_evaluation_examples() {
        let succ = |m: &Nat| m + 1u32;
        let ev = eval_total(&e("F(0)+2"), succ).unwrap();
        assert_eq!((ev.value, ev.queries), (nat(3), qs(&[0])));
        let ev = eval_total(&e("iter(3,0)"), succ).unwrap();
        assert_eq!((ev.value, ev.queries), (nat(3), qs(&[0, 1, 2])));
        let ev = eval_total(&e("F(F(0))"), |m: &Nat| m * 2u32 + 2u32).unwrap();
        assert_eq!((ev.value, ev.queries), (nat(6), qs(&[0, 2])));
    }

    #[test]
    fn hat_evaluation_examples() {
        assert_eq!(eval_hat(&e("F(0)+2"), &FiniteSeq::from_u64s(&[7])).unwrap(), nat(9));
        assert_eq!(eval_hat(&e("F(0)+2"), &FiniteSeq::empty()).unwrap(), nat(2));
        assert_eq!(eval_hat(&e("F(F(0))"), &FiniteSeq::from_u64s(&[2, 9, 4])).unwrap(), nat(4));
    }

    #[test]
    fn securedness_examples() {
        assert!(is_secured(&e("5"), &FiniteSeq::empty()).unwrap());
        assert!(!is_secured(&e("F(0)+2"), &FiniteSeq::empty()).unwrap());
        assert!(is_secured(&e("F(0)+2"), &FiniteSeq::from_u64s(&[7])).unwrap());
        assert!(!is_secured(&e("F(F(0))"), &FiniteSeq::from_u64s(&[2])).unwrap());
        assert!(is_secured(&e("F(F(0))"), &FiniteSeq::from_u64s(&[2, 0, 5])).unwrap());
    }

    #[test]
    fn query_guard_trips_on_long_iteration() {
        let f = Expr::iter(1_000, Expr::constant(0));
        let limits = EvalLimits { max_queries: 500 };
        assert_eq!(
            evaluate(&f, |m: &Nat| Ok(m + 1u32), limits),
            Err(EvalError::QueryLimit { limit: 500 })
        );
        let ev = evaluate(&f, |m: &Nat| Ok(m + 1u32), EvalLimits { max_queries: 1_000 }).unwrap();
        assert_eq!(ev.value, nat(1_000));
        assert_eq!(EvalLimits::default().max_queries, 1_000_000);
    }

    #[test]
    fn huge_positions_read_as_zero_beyond_sigma() {
        let sigma = FiniteSeq::from_u64s(&[1]);
        let big = Nat::from(1u32) << 200;
        assert_eq!(sigma.hat(&big), nat(0));
        let f = Expr::apply(Expr::Const(big));
        assert!(!is_secured(&f, &sigma).unwrap());
    }
}

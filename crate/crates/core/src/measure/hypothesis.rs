//! Decision procedures for the quantified hypotheses on finite models.
//!
//! The central one is the statement
//!
//! ```text
//! ∀F  μ(⋂_{m ≤ M(F)} ⋃_{n ∈ [m, F(m)]} A_n) < λ′
//! ```
//!
//! for a monotone functional `M` and an eventually-constant `(A_n)` with
//! stabilization index `N`. Monotone means `F ≤ G ⟹ M(F) ≤ M(G)` for all
//! `F` and `G`; expressions that feed one oracle answer into another query
//! are not monotone and are rejected. It is decided by a finite adversarial
//! search:
//!
//! * Replacing `F(m)` by `min(F(m), max(m, N))` keeps every union the same
//!   and can only lower `M(F)`, so the body can only grow. Likewise every
//!   value in `(0, m)` gives an empty interval, as does `0`, and `0` gives
//!   the smallest `M(F)`. Each position therefore ranges over
//!   `{0} ∪ [m, max(m, N)]`.
//! * `B = M(m ↦ max(m, N))` bounds `M(F)` for every such `F`, and positions
//!   beyond `B` may be set to `0`.
//! * Only positions the functional actually queries are branched on. The
//!   remaining positions up to `M(F)` take their largest value, which
//!   maximizes the body without changing `M(F)`.

use num_traits::Zero;

use super::{measure, range_union, FiniteProbSpace, MeasureError, PointSet, SetSeq};
use crate::functional::{evaluate, EvalError, EvalLimits, Functional};
use crate::num::{fmt_rational, nat_to_usize, Nat, Rational};

/// Default number of candidate evaluations before giving up.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 10_000_000;

/// Largest `B` the enumeration will attempt.
const MAX_SEARCH_BOUND: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decision {
    Holds,
    /// `witness[m]` is `F(m)` for `m ≤ B`; `F` is zero beyond.
    Fails { witness: Vec<Nat>, measure: Rational },
    Undecided { explored: u64 },
}

impl Decision {
    pub fn holds(&self) -> bool {
        matches!(self, Decision::Holds)
    }

    pub fn fails(&self) -> bool {
        matches!(self, Decision::Fails { .. })
    }

    pub fn is_undecided(&self) -> bool {
        matches!(self, Decision::Undecided { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Decision::Holds => "true",
            Decision::Fails { .. } => "false",
            Decision::Undecided { .. } => "undecided",
        }
    }
}

/// Least `M` with `μ(⋃_{n ≥ M} A_n) < λ`, if any.
pub fn cond1(space: &FiniteProbSpace, seq: &SetSeq, lambda: &Rational) -> Result<Option<usize>, MeasureError> {
    let stab = seq.stab_index();
    for m in 0..=stab {
        let tail_union = range_union(seq, &Nat::from(m), &Nat::from(stab.max(m)));
        if &measure(space, &tail_union)? < lambda {
            return Ok(Some(m));
        }
    }
    Ok(None)
}

/// `⋂_{m ≤ bound} ⋃_{n ∈ [m, F(m)]} A_n` for the given `F`.
pub fn body_set(seq: &SetSeq, bound: usize, f: impl Fn(usize) -> Nat) -> PointSet {
    let mut acc: Option<PointSet> = None;
    for m in 0..=bound {
        let u = range_union(seq, &Nat::from(m), &f(m));
        let next = match acc {
            None => u,
            Some(a) => a.intersection(&u),
        };
        if next.is_empty() {
            return next;
        }
        acc = Some(next);
    }
    acc.unwrap_or_default()
}

/// `∀F μ(⋂_{m ≤ M} ⋃_{n ∈ [m, F(m)]} A_n) < λ` for a fixed `M`.
///
/// Each term is largest when `F(m) ≥ max(m, N)`, and terms with `m ≥ N` all
/// equal the tail.
pub fn cond2(space: &FiniteProbSpace, seq: &SetSeq, lambda: &Rational, m_bound: &Nat) -> Result<bool, MeasureError> {
    let stab = seq.stab_index();
    let bound = nat_to_usize(m_bound).map_or(stab, |m| m.min(stab));
    let worst = body_set(seq, bound, |m| Nat::from(m.max(stab)));
    Ok(&measure(space, &worst)? < lambda)
}

/// Condition (3) for the given `λ′ < λ`, with `M(F)` supplied by `f`.
pub fn cond3(
    space: &FiniteProbSpace,
    seq: &SetSeq,
    f: &dyn Functional,
    lambda: &Rational,
    lambda_prime: &Rational,
    budget: u64,
) -> Result<Decision, MeasureError> {
    if lambda_prime >= lambda {
        return Ok(Decision::Fails { witness: Vec::new(), measure: lambda_prime.clone() });
    }
    hypothesis_holds(space, seq, f, lambda_prime, budget)
}

/// Sound, incomplete test: with `M₀ = M(0)`, `μ(⋃_{n ≥ M₀} A_n) < λ′`
/// implies the hypothesis for every `F`.
pub fn hypothesis_sufficient(
    space: &FiniteProbSpace,
    seq: &SetSeq,
    f: &dyn Functional,
    lambda_prime: &Rational,
) -> Result<bool, MeasureError> {
    if !f.zero_is_minimal() {
        return Err(MeasureError::NonMonotone);
    }
    let m0 = evaluate(f, |_| Ok(Nat::zero()), EvalLimits::default())?.value;
    let stab = Nat::from(seq.stab_index());
    let upper = if m0 > stab { m0.clone() } else { stab };
    Ok(&measure(space, &range_union(seq, &m0, &upper))? < lambda_prime)
}

/// Decides `∀F μ(⋂_{m ≤ M(F)} ⋃_{n ∈ [m, F(m)]} A_n) < λ′` exactly.
pub fn hypothesis_holds(
    space: &FiniteProbSpace,
    seq: &SetSeq,
    f: &dyn Functional,
    lambda_prime: &Rational,
    budget: u64,
) -> Result<Decision, MeasureError> {
    if !f.is_monotone() {
        return Err(MeasureError::NonMonotone);
    }
    seq.validate(space)?;
    let stab = seq.stab_index();
    let top = evaluate(f, |p| Ok(p.clone().max(Nat::from(stab))), EvalLimits::default())?.value;
    let bound = match nat_to_usize(&top) {
        Some(b) if b <= MAX_SEARCH_BOUND => b,
        _ => return Ok(Decision::Undecided { explored: 0 }),
    };
    let mut search = Search {
        space,
        seq,
        f,
        lambda_prime,
        bound,
        stab,
        budget,
        explored: 0,
        assign: vec![None; bound + 1],
    };
    Ok(search.explore()?.unwrap_or(Decision::Holds))
}

struct Search<'a> {
    space: &'a FiniteProbSpace,
    seq: &'a SetSeq,
    f: &'a dyn Functional,
    lambda_prime: &'a Rational,
    bound: usize,
    stab: usize,
    budget: u64,
    explored: u64,
    assign: Vec<Option<Nat>>,
}

impl Search<'_> {
    fn choices(&self, p: usize) -> Vec<Nat> {
        let hi = p.max(self.stab);
        let mut out = Vec::with_capacity(hi - p + 2);
        if p > 0 {
            out.push(Nat::zero());
        }
        out.extend((p..=hi).map(Nat::from));
        out
    }

    fn value_at(&self, m: usize) -> Nat {
        self.assign[m].clone().unwrap_or_else(|| Nat::from(m.max(self.stab)))
    }

    /// `Some` stops the search with a final answer.
    fn explore(&mut self) -> Result<Option<Decision>, MeasureError> {
        self.explored += 1;
        if self.explored > self.budget {
            return Ok(Some(Decision::Undecided { explored: self.explored - 1 }));
        }
        let bound = self.bound;
        let assign = &self.assign;
        let result = evaluate(
            self.f,
            |p| match nat_to_usize(p) {
                Some(i) if i <= bound => {
                    assign[i].clone().ok_or_else(|| EvalError::Interrupted { position: p.clone() })
                }
                _ => Ok(Nat::zero()),
            },
            EvalLimits::default(),
        );
        match result {
            Err(EvalError::Interrupted { position }) => {
                let p = nat_to_usize(&position).expect("interrupted positions are at most the bound");
                for v in self.choices(p) {
                    self.assign[p] = Some(v);
                    if let Some(done) = self.explore()? {
                        self.assign[p] = None;
                        return Ok(Some(done));
                    }
                }
                self.assign[p] = None;
                Ok(None)
            }
            Err(e) => Err(e.into()),
            Ok(ev) => {
                let m = match nat_to_usize(&ev.value) {
                    Some(m) if m <= self.bound => m,
                    _ => return Err(MeasureError::NonMonotone),
                };
                let body = body_set(self.seq, m, |i| self.value_at(i));
                let mu = measure(self.space, &body)?;
                if &mu >= self.lambda_prime {
                    let witness = (0..=self.bound).map(|i| self.value_at(i)).collect();
                    return Ok(Some(Decision::Fails { witness, measure: mu }));
                }
                Ok(None)
            }
        }
    }
}

impl std::fmt::Display for Decision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Decision::Holds => f.write_str("holds"),
            Decision::Fails { witness, measure } => {
                let w: Vec<String> = witness.iter().map(|n| n.to_string()).collect();
                write!(f, "fails at F=[{}] with measure {}", w.join(","), fmt_rational(measure))
            }
            Decision::Undecided { explored } => write!(f, "undecided after {explored} candidates"),
        }
    }
}

//! Bounds derived from the engine: the nondecreasing-sequence bound, the
//! metastable Egorov and dominated-convergence theorems with their `L^p`
//! variant, the reduction from cofinal nets, and the comparison tables.

mod lower_bound;
mod oracle;
mod table;

use std::sync::Arc;

use num_traits::{One, Signed};
use thiserror::Error;

pub use lower_bound::{lower_bound_reference, lower_bound_search, LowerBoundReport, LowerBoundWitness, SearchLimits};
pub use oracle::{TotalFn, TotalFnParseError};
pub use table::{budget_grid, nested_recurrence, paper_table, RecurrenceTerm, RowMatch, TableRow, TABLE_HEADER};

use crate::engine::{compute_bound_with, BoundTrace, Budget, EngineError, EngineLimits, WeightSchedule};
use crate::functional::{EvalError, Expr, Functional, Oracle};
use crate::measure::{bad_set, capped_range, difference, integral, lp_power, measure, FiniteProbSpace, FuncSeq, MeasureError, SetSeq};
use crate::num::{ceil_nat, nat_to_usize, Nat, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DerivedError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("epsilon must be positive")]
    NonPositiveEpsilon,
    #[error("cofinal sequence must be strictly increasing")]
    NotIncreasing,
}

/// `F^{⌈1/ε⌉+1}(0)`: a bound on the ε-metastable convergence of every
/// nondecreasing sequence in `[0,1]`.
pub fn monotone_bound(epsilon: &Rational) -> Result<Expr, DerivedError> {
    if !epsilon.is_positive() {
        return Err(DerivedError::NonPositiveEpsilon);
    }
    let k = ceil_nat(&(Rational::one() / epsilon)) + 1u32;
    Ok(Expr::Iter(k, Box::new(Expr::constant(0))))
}

/// `max − min` of `a_m, …, a_b` for a finite sequence continued by its last
/// entry; zero on an empty interval.
pub fn oscillation(seq: &[Rational], m: usize, b: usize) -> Rational {
    if b < m || seq.is_empty() {
        return Rational::default();
    }
    let last = seq.len() - 1;
    let window = (m.min(last)..=b.min(last)).map(|i| &seq[i]);
    let (lo, hi) = window.fold((None::<&Rational>, None::<&Rational>), |(lo, hi), v| {
        (Some(lo.map_or(v, |l| l.min(v))), Some(hi.map_or(v, |h| h.max(v))))
    });
    hi.expect("nonempty") - lo.expect("nonempty")
}

/// Parameters shared by the Egorov, DCT and `L^p` bounds.
#[derive(Debug, Clone)]
pub struct EgorovInput {
    pub m1: Arc<dyn Functional>,
    pub epsilon: Rational,
    pub budget: Budget,
    pub schedule: WeightSchedule,
}

impl EgorovInput {
    pub fn new(
        m1: Arc<dyn Functional>,
        epsilon: Rational,
        budget: Budget,
        schedule: WeightSchedule,
    ) -> Result<Self, DerivedError> {
        if !epsilon.is_positive() {
            return Err(DerivedError::NonPositiveEpsilon);
        }
        Ok(EgorovInput { m1, epsilon, budget, schedule })
    }
}

/// `M(F) = M_1(m ↦ max_{n ∈ [m, F(m)]} F_2(n))`.
///
/// When `F(m) < m` the interval is taken to be `{m}`, which keeps the derived
/// oracle total and monotone in `F`.
#[derive(Debug, Clone)]
pub struct EgorovFunctional {
    m1: Arc<dyn Functional>,
    f2: TotalFn,
}

impl EgorovFunctional {
    pub fn new(m1: Arc<dyn Functional>, f2: TotalFn) -> Self {
        EgorovFunctional { m1, f2 }
    }
}

impl Functional for EgorovFunctional {
    fn apply(&self, oracle: &mut dyn Oracle) -> Result<Nat, EvalError> {
        let f2 = &self.f2;
        let mut derived = |m: &Nat| -> Result<Nat, EvalError> {
            let top = oracle.query(m)?;
            if &top < m {
                Ok(f2.value(m))
            } else {
                Ok(f2.max_on(m, &top))
            }
        };
        self.m1.apply(&mut derived)
    }

    fn is_monotone(&self) -> bool {
        self.m1.is_monotone()
    }

    fn describe(&self) -> String {
        format!("egorov[{}; F2={}]", self.m1.describe(), self.f2)
    }
}

pub fn egorov_functional(input: &EgorovInput, f2: &TotalFn) -> EgorovFunctional {
    EgorovFunctional::new(input.m1.clone(), f2.clone())
}

/// `M_2(F_2)`: the engine bound for the composed functional.
pub fn egorov_bound(input: &EgorovInput, f2: &TotalFn) -> Result<(Nat, BoundTrace), DerivedError> {
    egorov_bound_with(input, f2, EngineLimits::default())
}

pub fn egorov_bound_with(
    input: &EgorovInput,
    f2: &TotalFn,
    limits: EngineLimits,
) -> Result<(Nat, BoundTrace), DerivedError> {
    let composed = egorov_functional(input, f2);
    let trace = compute_bound_with(&composed, &input.budget, &input.schedule, limits)?;
    Ok((trace.m_prime.clone(), trace))
}

/// Outcome of a conclusion check: the bound and the least index meeting the
/// conclusion, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOutcome {
    pub m2: Nat,
    pub witness: Option<Nat>,
}

/// Indices `0..=min(bound, N)`; beyond `N` every condition below is the same
/// as at `N`.
fn candidate_indices(bound: &Nat, stab: usize) -> std::ops::RangeInclusive<usize> {
    0..=nat_to_usize(bound).map_or(stab, |b| b.min(stab))
}

/// Least `m ≤ M_2(F_2)` with `μ({x : ∀n,n′ ∈ [m, F_2(m)]. |f_n(x) − f_{n′}(x)| < ε}) > 1 − λ`.
pub fn egorov_check(
    space: &FiniteProbSpace,
    fs: &FuncSeq,
    input: &EgorovInput,
    f2: &TotalFn,
) -> Result<CheckOutcome, DerivedError> {
    fs.validate(space)?;
    let (m2, _) = egorov_bound(input, f2)?;
    let threshold = Rational::one() - input.budget.lambda();
    for m in candidate_indices(&m2, fs.stab_index()) {
        let mn = Nat::from(m);
        let bad = bad_set(fs, &input.epsilon, &mn, &f2.value(&mn));
        let good = bad.complement(space.size());
        if measure(space, &good)? > threshold {
            return Ok(CheckOutcome { m2, witness: Some(mn) });
        }
    }
    Ok(CheckOutcome { m2, witness: None })
}

fn pairwise_in(fs: &FuncSeq, m: usize, top: &Nat) -> Vec<(usize, usize)> {
    match capped_range(&Nat::from(m), top, fs.stab_index()) {
        None => Vec::new(),
        Some((lo, hi)) => (lo..=hi).flat_map(|a| (a..=hi).map(move |b| (a, b))).collect(),
    }
}

/// Least `m ≤ M_2(F)` with `|∫f_n − ∫f_{n′}| < ε + λ` for all `n, n′ ∈ [m, F(m)]`.
pub fn dct_check(
    space: &FiniteProbSpace,
    fs: &FuncSeq,
    input: &EgorovInput,
    f: &TotalFn,
) -> Result<CheckOutcome, DerivedError> {
    fs.validate(space)?;
    let (m2, _) = egorov_bound(input, f)?;
    let limit = &input.epsilon + input.budget.lambda();
    let integrals: Vec<Rational> =
        (0..=fs.stab_index()).map(|n| integral(space, fs.get(n))).collect::<Result<_, _>>()?;
    for m in candidate_indices(&m2, fs.stab_index()) {
        let ok = pairwise_in(fs, m, &f.value_at(m))
            .into_iter()
            .all(|(a, b)| (&integrals[a] - &integrals[b]).abs() < limit);
        if ok {
            return Ok(CheckOutcome { m2, witness: Some(Nat::from(m)) });
        }
    }
    Ok(CheckOutcome { m2, witness: None })
}

/// Least `m ≤ M_2(F)` with `‖f_n − f_{n′}‖_p^p < ε^p + λ` for all `n, n′ ∈ [m, F(m)]`.
pub fn lp_check(
    space: &FiniteProbSpace,
    fs: &FuncSeq,
    input: &EgorovInput,
    f: &TotalFn,
    p: u32,
) -> Result<CheckOutcome, DerivedError> {
    fs.validate(space)?;
    let (m2, _) = egorov_bound(input, f)?;
    let limit = num_traits::pow(input.epsilon.clone(), p as usize) + input.budget.lambda();
    for m in candidate_indices(&m2, fs.stab_index()) {
        let mut ok = true;
        for (a, b) in pairwise_in(fs, m, &f.value_at(m)) {
            let diff = difference(fs.get(a), fs.get(b));
            if lp_power(space, &diff, p)? >= limit {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(CheckOutcome { m2, witness: Some(Nat::from(m)) });
        }
    }
    Ok(CheckOutcome { m2, witness: None })
}

/// A strictly increasing cofinal sequence `(a_n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cofinal {
    /// `a_n = mul·n + add` with `mul ≥ 1`.
    Affine { mul: usize, add: usize },
    /// Listed values, continued by steps of one.
    Table(Vec<usize>),
}

impl Cofinal {
    pub fn affine(mul: usize, add: usize) -> Result<Self, DerivedError> {
        if mul == 0 {
            return Err(DerivedError::NotIncreasing);
        }
        Ok(Cofinal::Affine { mul, add })
    }

    pub fn table(values: Vec<usize>) -> Result<Self, DerivedError> {
        if values.is_empty() || values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(DerivedError::NotIncreasing);
        }
        Ok(Cofinal::Table(values))
    }

    pub fn at(&self, n: usize) -> usize {
        match self {
            Cofinal::Affine { mul, add } => mul * n + add,
            Cofinal::Table(v) => match v.get(n) {
                Some(&x) => x,
                None => v[v.len() - 1] + (n - (v.len() - 1)),
            },
        }
    }

    pub fn at_nat(&self, n: &Nat) -> Nat {
        match (self, nat_to_usize(n)) {
            (_, Some(i)) => Nat::from(self.at(i)),
            (Cofinal::Affine { mul, add }, None) => n * Nat::from(*mul) + Nat::from(*add),
            (Cofinal::Table(v), None) => {
                n - Nat::from(v.len() - 1) + Nat::from(v[v.len() - 1])
            }
        }
    }
}

/// `A′_n = ⋃_{i ∈ [a_n, a_{n+1}]} A_i`; stabilizes at the least `n` with `a_n ≥ N`.
pub fn net_reduce(seq: &SetSeq, net: &Cofinal) -> SetSeq {
    let stab = seq.stab_index();
    let new_stab = (0..).find(|&n| net.at(n) >= stab).expect("cofinal sequence is unbounded");
    let prefix = (0..new_stab)
        .map(|n| crate::measure::range_union(seq, &Nat::from(net.at(n)), &Nat::from(net.at(n + 1))))
        .collect();
    SetSeq::new(prefix, seq.tail().clone())
}

/// Least `i ≤ a_{M′}` with `μ(A_i) < λ`.
pub fn net_conclusion(
    space: &FiniteProbSpace,
    seq: &SetSeq,
    net: &Cofinal,
    lambda: &Rational,
    m_prime: &Nat,
) -> Result<Option<Nat>, DerivedError> {
    Ok(crate::measure::conclusion_check(space, seq, lambda, &net.at_nat(m_prime))?)
}

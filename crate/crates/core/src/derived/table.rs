use std::fmt;

use num_traits::One;

use crate::engine::{compute_bound_with, Budget, EngineError, EngineLimits, WeightSchedule};
use crate::functional::parse_expr;
use crate::num::{ceil_nat, fmt_rational, nat_to_rational, nat_to_usize, pow2, Nat, Rational};

pub const TABLE_HEADER: &str = "expr,n,lambda,lambda_prime,schedule,engine_m_prime,closed_form,match";

/// Exponents above this are not expanded.
const MAX_EXPONENT: usize = 1 << 20;

/// A value of `m_{i+1} = n·⌈2^{m_i+1}/δ⌉` that is either exact or too large to
/// write out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecurrenceTerm {
    Exact(Nat),
    /// `log2` of the term is at least `log2_at_least`.
    TooLarge { index: usize, log2_at_least: Nat },
}

impl fmt::Display for RecurrenceTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecurrenceTerm::Exact(v) => write!(f, "{v}"),
            RecurrenceTerm::TooLarge { index, log2_at_least } => {
                write!(f, "m{index}>=2^{log2_at_least}")
            }
        }
    }
}

/// `m_0, …, m_c` with `m_0 = n` and `c = ⌈2/δ⌉`. Terms after the first
/// too-large one are dropped.
pub fn nested_recurrence(n: u64, budget: &Budget) -> Vec<RecurrenceTerm> {
    let gap = budget.gap();
    let c = nat_to_usize(&ceil_nat(&(Rational::from_integer(2.into()) / &gap))).expect("small count");
    let n_nat = Nat::from(n);
    let mut terms = vec![RecurrenceTerm::Exact(n_nat.clone())];
    let mut prev = n_nat.clone();
    for i in 1..=c {
        match nat_to_usize(&prev).filter(|&m| m < MAX_EXPONENT) {
            Some(m) => {
                let v = &n_nat * ceil_nat(&(nat_to_rational(&pow2(m + 1)) / &gap));
                terms.push(RecurrenceTerm::Exact(v.clone()));
                prev = v;
            }
            None => {
                terms.push(RecurrenceTerm::TooLarge { index: i, log2_at_least: prev + 1u32 });
                break;
            }
        }
    }
    terms
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowMatch {
    Equal,
    Differ,
    /// Reported side by side, not compared.
    Unchecked,
}

impl RowMatch {
    pub fn label(self) -> &'static str {
        match self {
            RowMatch::Equal => "yes",
            RowMatch::Differ => "no",
            RowMatch::Unchecked => "n/a",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableRow {
    pub expr: String,
    pub n: u64,
    pub lambda: Rational,
    pub lambda_prime: Rational,
    pub schedule: String,
    /// Engine value, or the partial root chain when the engine ran out of budget.
    pub engine: Result<Nat, Vec<Nat>>,
    pub closed_form: RecurrenceTerm,
    pub matches: RowMatch,
}

impl TableRow {
    /// True for rows whose equality is asserted.
    pub fn is_asserted(&self) -> bool {
        self.matches != RowMatch::Unchecked
    }

    pub fn to_csv(&self) -> String {
        let engine = match &self.engine {
            Ok(v) => v.to_string(),
            Err(chain) => {
                let parts: Vec<String> = chain.iter().map(|c| c.to_string()).collect();
                format!("exhausted[{}]", parts.join(" "))
            }
        };
        format!(
            "{},{},{},{},{},{},{},{}",
            self.expr,
            self.n,
            fmt_rational(&self.lambda),
            fmt_rational(&self.lambda_prime),
            self.schedule,
            engine,
            self.closed_form,
            self.matches.label()
        )
    }
}

fn run_engine(
    expr: &str,
    budget: &Budget,
    schedule: &WeightSchedule,
    limits: EngineLimits,
) -> Result<Result<Nat, Vec<Nat>>, EngineError> {
    let f = parse_expr(expr).expect("built-in expression");
    match compute_bound_with(&f, budget, schedule, limits) {
        Ok(trace) => Ok(Ok(trace.m_prime)),
        Err(e) if e.is_exhaustion() => Ok(Err(e.root_chain().map(<[Nat]>::to_vec).unwrap_or_default())),
        Err(e) => Err(e),
    }
}

/// Rows for `F(0)+n` under both schedules, compared with `n·⌈2/δ⌉` and
/// `n·⌈1/δ⌉`, and for `F(F(0))+n` next to the recurrence value `m_c`.
pub fn paper_table(ns: &[u64], budgets: &[Budget], limits: EngineLimits) -> Result<Vec<TableRow>, EngineError> {
    let mut rows = Vec::new();
    for budget in budgets {
        let gap = budget.gap();
        for &n in ns {
            let flat = format!("F(0)+{n}");
            for (schedule, numerator) in [(WeightSchedule::Halving, 2u32), (WeightSchedule::Concentrated, 1)] {
                let closed = Nat::from(n) * ceil_nat(&(Rational::from_integer(numerator.into()) / &gap));
                let engine = run_engine(&flat, budget, &schedule, limits)?;
                let matches = match &engine {
                    Ok(v) if *v == closed => RowMatch::Equal,
                    _ => RowMatch::Differ,
                };
                rows.push(TableRow {
                    expr: flat.clone(),
                    n,
                    lambda: budget.lambda().clone(),
                    lambda_prime: budget.lambda_prime().clone(),
                    schedule: schedule.name(),
                    engine,
                    closed_form: RecurrenceTerm::Exact(closed),
                    matches,
                });
            }
            let nested = format!("F(F(0))+{n}");
            let engine = run_engine(&nested, budget, &WeightSchedule::Halving, limits)?;
            let closed_form = nested_recurrence(n, budget).pop().expect("m_0 present");
            rows.push(TableRow {
                expr: nested,
                n,
                lambda: budget.lambda().clone(),
                lambda_prime: budget.lambda_prime().clone(),
                schedule: WeightSchedule::Halving.name(),
                engine,
                closed_form,
                matches: RowMatch::Unchecked,
            });
        }
    }
    Ok(rows)
}

/// Every budget `(λ, λ−δ)` with `λ ≤ 1` from the given `λ`s and gaps.
pub fn budget_grid(lambdas: &[Rational], gaps: &[Rational]) -> Vec<Budget> {
    let mut out = Vec::new();
    for l in lambdas {
        for g in gaps {
            if l <= &Rational::one() {
                if let Ok(b) = Budget::new(l.clone(), l - g) {
                    out.push(b);
                }
            }
        }
    }
    out
}

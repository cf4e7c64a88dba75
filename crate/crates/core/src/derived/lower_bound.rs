use num_traits::One;

use crate::engine::Budget;
use crate::functional::parse_expr;
use crate::measure::{hypothesis_holds, Decision};
use crate::measure::{measure, FiniteProbSpace, MeasureError, PointSet, SetSeq};
use crate::num::{ceil_nat, Nat, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchLimits {
    pub max_points: usize,
    pub max_stab: usize,
    /// Instances considered before stopping.
    pub max_instances: u64,
    /// Enumeration budget handed to each hypothesis decision.
    pub enumeration_budget: u64,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits { max_points: 3, max_stab: 4, max_instances: 1_000_000, enumeration_budget: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LowerBoundWitness {
    pub space: FiniteProbSpace,
    pub seq: SetSeq,
    /// Least `i` with `μ(A_i) < λ`.
    pub least_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LowerBoundReport {
    pub searched: u64,
    pub undecided: u64,
    pub exhausted: bool,
    pub best: Option<LowerBoundWitness>,
    pub reference: Nat,
}

/// `n·(⌈(1−λ′)/(λ−λ′)⌉ − 1)`
pub fn lower_bound_reference(n: u64, budget: &Budget) -> Nat {
    let q = ceil_nat(&((Rational::one() - budget.lambda_prime()) / budget.gap()));
    let q = if q > Nat::from(0u32) { q - 1u32 } else { q };
    Nat::from(n) * q
}

fn least_small(space: &FiniteProbSpace, seq: &SetSeq, lambda: &Rational) -> Result<Option<usize>, MeasureError> {
    for i in 0..=seq.stab_index() {
        if &measure(space, seq.get(i))? < lambda {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

fn subset(mask: usize, points: usize) -> PointSet {
    (0..points).filter(|i| mask >> i & 1 == 1).collect()
}

/// Searches uniform spaces with at most `max_points` points and sequences
/// with stabilization index at most `max_stab` for an instance satisfying the
/// hypothesis for `F(0)+n` whose least index with `μ(A_i) < λ` is largest.
pub fn lower_bound_search(n: u64, budget: &Budget, limits: SearchLimits) -> Result<LowerBoundReport, MeasureError> {
    let f = parse_expr(&format!("F(0)+{n}")).expect("built-in expression");
    let mut report = LowerBoundReport {
        searched: 0,
        undecided: 0,
        exhausted: false,
        best: None,
        reference: lower_bound_reference(n, budget),
    };
    'outer: for points in 1..=limits.max_points {
        let space = FiniteProbSpace::uniform(points);
        let subsets = 1usize << points;
        for stab in 0..=limits.max_stab {
            let total = subsets.pow(stab as u32 + 1);
            for code in 0..total {
                if report.searched >= limits.max_instances {
                    report.exhausted = true;
                    break 'outer;
                }
                report.searched += 1;
                let mut c = code;
                let mut sets = Vec::with_capacity(stab + 1);
                for _ in 0..=stab {
                    sets.push(subset(c % subsets, points));
                    c /= subsets;
                }
                let tail = sets.pop().expect("tail");
                let seq = SetSeq::new(sets, tail);
                let Some(least) = least_small(&space, &seq, budget.lambda())? else { continue };
                if report.best.as_ref().is_some_and(|b| b.least_index >= least) {
                    continue;
                }
                match hypothesis_holds(&space, &seq, &f, budget.lambda_prime(), limits.enumeration_budget)? {
                    Decision::Holds => {
                        report.best = Some(LowerBoundWitness { space: space.clone(), seq, least_index: least })
                    }
                    Decision::Undecided { .. } => report.undecided += 1,
                    Decision::Fails { .. } => {}
                }
            }
        }
    }
    Ok(report)
}

//! Bound computation by recursion along the tree of unsecured sequences.
//!
//! For a secured `σ`, `N(σ) = M(σ̂)`. For an unsecured `σ` of length `m`,
//! `n_0 = 0`, `n_{i+1} = N(σ⌢n_i)` and `N(σ) = max_{i ≤ c} n_i` with
//! `c = ⌈1/w_m⌉`. The bound is `M′ = N(())`.
//!
//! Two shortcuts keep the computation feasible without changing any value:
//!
//! * Results are memoized by the positions below `len(σ)` that the subtree
//!   actually read. A sequence that agrees with a cached one on those
//!   positions replays exactly the same computation.
//! * The chain `n_{i+1} = N(σ⌢n_i)` is deterministic in `n_i`, so once a
//!   value repeats the rest of the chain cycles through known values.
//!
//! Node counts in the trace are logical: they count every call the plain
//! recursion would make, including the ones the shortcuts skip.

mod schedule;
mod trace;

use std::collections::{BTreeSet, HashMap};

use num_traits::{One, Zero};
use thiserror::Error;

pub use schedule::{iteration_count, Budget, WeightSchedule};
pub use trace::{BoundTrace, NodeRecord};

use crate::functional::{hat_evaluation, EvalError, EvalLimits, FiniteSeq, Functional};
use crate::num::{nat_to_usize, Nat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("invalid budget: need lambda > lambda' > 0, got lambda={lambda}, lambda'={lambda_prime}")]
    InvalidBudget { lambda: String, lambda_prime: String },
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("unsecured node at depth {depth} where the schedule weight is zero")]
    ZeroWeight { depth: usize },
    #[error("recursion depth exceeded {limit} (root chain so far: {})", fmt_chain(root_chain))]
    DepthLimit { limit: usize, root_chain: Vec<Nat> },
    #[error("step budget of {limit} exhausted (root chain so far: {})", fmt_chain(root_chain))]
    StepLimit { limit: u64, root_chain: Vec<Nat> },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl EngineError {
    /// True for guard and budget exhaustion, as opposed to invalid input.
    pub fn is_exhaustion(&self) -> bool {
        matches!(
            self,
            EngineError::DepthLimit { .. }
                | EngineError::StepLimit { .. }
                | EngineError::Eval(EvalError::QueryLimit { .. })
        )
    }

    /// Values `n_0, n_1, …` computed at the root before exhaustion.
    pub fn root_chain(&self) -> Option<&[Nat]> {
        match self {
            EngineError::DepthLimit { root_chain, .. } | EngineError::StepLimit { root_chain, .. } => {
                Some(root_chain)
            }
            _ => None,
        }
    }
}

fn fmt_chain(chain: &[Nat]) -> String {
    let parts: Vec<String> = chain.iter().map(|n| n.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineLimits {
    /// Longest sequence the recursion may visit.
    pub max_depth: usize,
    /// Node expansions plus chain iterations.
    pub max_steps: u64,
    /// Node records kept in a trace; the computation itself is unaffected.
    pub max_records: usize,
    pub eval: EvalLimits,
}

impl Default for EngineLimits {
    fn default() -> Self {
        EngineLimits {
            max_depth: 512,
            max_steps: 10_000_000,
            max_records: 100_000,
            eval: EvalLimits::default(),
        }
    }
}

/// `N(σ)` with default limits.
pub fn n_sigma(
    f: &dyn Functional,
    sigma: &FiniteSeq,
    budget: &Budget,
    schedule: &WeightSchedule,
) -> Result<Nat, EngineError> {
    n_sigma_with(f, sigma, budget, schedule, EngineLimits::default())
}

pub fn n_sigma_with(
    f: &dyn Functional,
    sigma: &FiniteSeq,
    budget: &Budget,
    schedule: &WeightSchedule,
    limits: EngineLimits,
) -> Result<Nat, EngineError> {
    schedule.validate(budget)?;
    let mut engine = Engine::new(f, budget, schedule, limits, false);
    let mut s = sigma.clone();
    engine.run(&mut s).map(|summary| summary.value)
}

/// `M′ = N(())` together with the recursion record.
pub fn compute_bound(
    f: &dyn Functional,
    budget: &Budget,
    schedule: &WeightSchedule,
) -> Result<BoundTrace, EngineError> {
    compute_bound_with(f, budget, schedule, EngineLimits::default())
}

pub fn compute_bound_with(
    f: &dyn Functional,
    budget: &Budget,
    schedule: &WeightSchedule,
    limits: EngineLimits,
) -> Result<BoundTrace, EngineError> {
    schedule.validate(budget)?;
    let mut engine = Engine::new(f, budget, schedule, limits, true);
    let mut root = FiniteSeq::empty();
    let summary = engine.run(&mut root)?;
    Ok(BoundTrace {
        expr: f.describe(),
        budget: budget.clone(),
        schedule: schedule.name(),
        m_prime: summary.value,
        nodes_visited: summary.logical_nodes,
        max_depth: summary.max_len,
        records_truncated: engine.records_truncated,
        nodes: engine.records,
    })
}

#[derive(Debug, Clone)]
struct Summary {
    value: Nat,
    /// Positions below the node's length read anywhere in its subtree.
    footprint: Vec<usize>,
    logical_nodes: Nat,
    /// Longest sequence visited in the subtree.
    max_len: usize,
}

struct MemoTable {
    positions: Vec<usize>,
    entries: HashMap<Vec<Nat>, Summary>,
}

struct Engine<'a> {
    f: &'a dyn Functional,
    budget: &'a Budget,
    schedule: &'a WeightSchedule,
    limits: EngineLimits,
    steps: u64,
    memo: HashMap<usize, Vec<MemoTable>>,
    counts: HashMap<usize, Nat>,
    record: bool,
    records: Vec<NodeRecord>,
    records_truncated: bool,
    root_chain: Vec<Nat>,
}

impl<'a> Engine<'a> {
    fn new(
        f: &'a dyn Functional,
        budget: &'a Budget,
        schedule: &'a WeightSchedule,
        limits: EngineLimits,
        record: bool,
    ) -> Self {
        Engine {
            f,
            budget,
            schedule,
            limits,
            steps: 0,
            memo: HashMap::new(),
            counts: HashMap::new(),
            record,
            records: Vec::new(),
            records_truncated: false,
            root_chain: Vec::new(),
        }
    }

    fn run(&mut self, sigma: &mut FiniteSeq) -> Result<Summary, EngineError> {
        let base_len = sigma.len();
        self.node(sigma, base_len).map_err(|e| match e {
            EngineError::DepthLimit { limit, .. } => {
                EngineError::DepthLimit { limit, root_chain: self.root_chain.clone() }
            }
            EngineError::StepLimit { limit, .. } => {
                EngineError::StepLimit { limit, root_chain: self.root_chain.clone() }
            }
            other => other,
        })
    }

    fn tick(&mut self) -> Result<(), EngineError> {
        self.steps += 1;
        if self.steps > self.limits.max_steps {
            return Err(EngineError::StepLimit { limit: self.limits.max_steps, root_chain: Vec::new() });
        }
        Ok(())
    }

    fn lookup(&self, sigma: &FiniteSeq) -> Option<Summary> {
        let tables = self.memo.get(&sigma.len())?;
        tables.iter().find_map(|t| {
            let key: Vec<Nat> = t.positions.iter().map(|&p| sigma.entries()[p].clone()).collect();
            t.entries.get(&key).cloned()
        })
    }

    fn store(&mut self, sigma: &FiniteSeq, summary: &Summary) {
        let tables = self.memo.entry(sigma.len()).or_default();
        let key: Vec<Nat> = summary.footprint.iter().map(|&p| sigma.entries()[p].clone()).collect();
        match tables.iter_mut().find(|t| t.positions == summary.footprint) {
            Some(t) => {
                t.entries.insert(key, summary.clone());
            }
            None => {
                let mut entries = HashMap::new();
                entries.insert(key, summary.clone());
                tables.push(MemoTable { positions: summary.footprint.clone(), entries });
            }
        }
    }

    fn count_at(&mut self, depth: usize) -> Result<Nat, EngineError> {
        if let Some(c) = self.counts.get(&depth) {
            return Ok(c.clone());
        }
        let c = iteration_count(depth, self.budget, self.schedule)?;
        self.counts.insert(depth, c.clone());
        Ok(c)
    }

    fn push_record(&mut self, rec: NodeRecord) {
        if !self.record {
            return;
        }
        if self.records.len() < self.limits.max_records {
            self.records.push(rec);
        } else {
            self.records_truncated = true;
        }
    }

    /// Runs the recursion with an explicit stack of unsecured frames.
    fn node(&mut self, sigma: &mut FiniteSeq, base_len: usize) -> Result<Summary, EngineError> {
        let mut stack: Vec<Frame> = Vec::new();
        loop {
            // enter the node at `sigma`
            let mut result = match self.enter(sigma, base_len)? {
                Entered::Done(summary) => summary,
                Entered::Unsecured(frame) => {
                    stack.push(frame);
                    sigma.push(Nat::zero());
                    continue;
                }
            };
            // hand results up until some frame needs another child
            loop {
                let Some(frame) = stack.last_mut() else {
                    return Ok(result);
                };
                sigma.pop();
                match frame.absorb(result) {
                    Some(next) => {
                        self.tick()?;
                        sigma.push(next);
                        if frame.at_root {
                            self.root_chain = frame.chain.clone();
                        }
                        break;
                    }
                    None => {
                        let frame = stack.pop().expect("frame present");
                        if frame.at_root {
                            self.root_chain = frame.chain.clone();
                        }
                        result = self.finish(sigma, frame);
                    }
                }
            }
        }
    }

    fn enter(&mut self, sigma: &FiniteSeq, base_len: usize) -> Result<Entered, EngineError> {
        if let Some(hit) = self.lookup(sigma) {
            return Ok(Entered::Done(hit));
        }
        let len = sigma.len();
        if len > self.limits.max_depth {
            return Err(EngineError::DepthLimit { limit: self.limits.max_depth, root_chain: Vec::new() });
        }
        self.tick()?;

        let ev = hat_evaluation(self.f, sigma, self.limits.eval)?;
        let footprint: BTreeSet<usize> = ev
            .queries
            .iter()
            .filter_map(nat_to_usize)
            .filter(|&p| p < len)
            .collect();

        if footprint.len() == ev.queries.len() {
            let summary = Summary {
                value: ev.value.clone(),
                footprint: footprint.into_iter().collect(),
                logical_nodes: Nat::one(),
                max_len: len,
            };
            self.push_record(NodeRecord {
                sigma: sigma.clone(),
                secured: true,
                value: ev.value,
                iteration_count: None,
                chain: Vec::new(),
                cycle_from: None,
            });
            self.store(sigma, &summary);
            return Ok(Entered::Done(summary));
        }

        let count = self.count_at(len)?;
        let at_root = len == base_len;
        if at_root {
            self.root_chain = vec![Nat::zero()];
        }
        Ok(Entered::Unsecured(Frame {
            len,
            count,
            at_root,
            chain: vec![Nat::zero()],
            call_sizes: Vec::new(),
            seen: HashMap::from([(Nat::zero(), 0)]),
            logical: Nat::one(),
            max_len: len,
            footprint,
            cycle_from: None,
        }))
    }

    fn finish(&mut self, sigma: &FiniteSeq, frame: Frame) -> Summary {
        let value = frame.chain.iter().max().expect("nonempty chain").clone();
        let summary = Summary {
            value: value.clone(),
            footprint: frame.footprint.into_iter().collect(),
            logical_nodes: frame.logical,
            max_len: frame.max_len,
        };
        self.push_record(NodeRecord {
            sigma: sigma.clone(),
            secured: false,
            value,
            iteration_count: Some(frame.count),
            chain: frame.chain,
            cycle_from: frame.cycle_from,
        });
        self.store(sigma, &summary);
        summary
    }
}

enum Entered {
    Done(Summary),
    Unsecured(Frame),
}

/// An unsecured node part-way through its chain `n_0, n_1, …`.
struct Frame {
    len: usize,
    count: Nat,
    at_root: bool,
    chain: Vec<Nat>,
    /// Logical size of the call made from `chain[k]`.
    call_sizes: Vec<Nat>,
    seen: HashMap<Nat, usize>,
    logical: Nat,
    max_len: usize,
    footprint: BTreeSet<usize>,
    cycle_from: Option<usize>,
}

impl Frame {
    /// Takes the result of the call from the last chain value; returns the
    /// next value to call from, or `None` once the chain is complete.
    fn absorb(&mut self, child: Summary) -> Option<Nat> {
        let len = self.len;
        self.footprint.extend(child.footprint.iter().copied().filter(|&p| p < len));
        self.max_len = self.max_len.max(child.max_len);
        self.logical += &child.logical_nodes;
        self.call_sizes.push(child.logical_nodes);
        let next = child.value;
        if let Some(&j) = self.seen.get(&next) {
            // chain[k+1] = chain[j]: later calls cycle over chain[j..=k]
            let remaining = &self.count - Nat::from(self.call_sizes.len());
            let period = Nat::from(self.call_sizes.len() - j);
            let cycle_sum: Nat = self.call_sizes[j..].iter().sum();
            let rem = nat_to_usize(&(&remaining % &period)).expect("remainder below period");
            self.logical += (&remaining / &period) * cycle_sum;
            self.logical += self.call_sizes[j..j + rem].iter().sum::<Nat>();
            self.cycle_from = Some(j);
            return None;
        }
        self.seen.insert(next.clone(), self.chain.len());
        self.chain.push(next.clone());
        if Nat::from(self.call_sizes.len()) < self.count {
            Some(next)
        } else {
            None
        }
    }
}

//! Seeded verification campaigns.
//!
//! A campaign draws `size` instances for one [`Check`], evaluates them in
//! parallel and reports one JSON line per instance, ordered by id. Every
//! instance is a self-contained [`CaseFile`]; violations carry theirs so
//! that [`replay`] reproduces the outcome.

mod checks;
pub mod gen;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::derived::DerivedError;
use crate::engine::EngineError;
use crate::functional::{EvalError, ParseError};
use crate::measure::{Instance, MeasureError, DEFAULT_ENUMERATION_BUDGET};
use crate::num::{fmt_rational, NumError};
use gen::*;

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Derived(#[from] DerivedError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("malformed case: {0}")]
    Malformed(String),
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// Bound conclusion on instances whose hypothesis passes the sufficient test.
    Bound,
    /// Bound conclusion on tiny instances with the hypothesis decided exactly.
    BoundExact,
    /// `cond1 ⟹ cond2 ⟹ cond3`.
    Implications,
    /// `cond3 ⟹ cond1` on tiny instances.
    Converse,
    Egorov,
    Dct,
    Lp,
    Monotone,
    Net,
    /// Always reports a violation; exercises the failure path.
    Stub,
}

impl Check {
    pub const ALL: [Check; 9] = [
        Check::Bound,
        Check::BoundExact,
        Check::Implications,
        Check::Converse,
        Check::Egorov,
        Check::Dct,
        Check::Lp,
        Check::Monotone,
        Check::Net,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Bound => "bound",
            Check::BoundExact => "bound_exact",
            Check::Implications => "implications",
            Check::Converse => "converse",
            Check::Egorov => "egorov",
            Check::Dct => "dct",
            Check::Lp => "lp",
            Check::Monotone => "monotone",
            Check::Net => "net",
            Check::Stub => "stub",
        }
    }

    fn stream(self, id: u64) -> u64 {
        ((self as u64) << 48) ^ id
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Check::ALL
            .iter()
            .chain(&[Check::Stub])
            .find(|c| c.name() == s)
            .copied()
            .ok_or_else(|| format!("unknown check {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    /// The hypothesis was not established; nothing to check.
    Vacuous,
    /// The exact decision ran out of enumeration budget.
    Undecided,
    /// The bound computation ran out of steps.
    Exhausted,
    Violation,
}

/// Everything needed to re-run one instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseFile {
    pub check: Check,
    pub seed: u64,
    pub id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<Instance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_prime: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f2: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cofinal: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ps: Option<Vec<u32>>,
    pub enumeration_budget: u64,
    pub engine_steps: u64,
}

impl CaseFile {
    fn new(check: Check, cfg: &CampaignConfig, id: u64) -> Self {
        CaseFile {
            check,
            seed: cfg.seed,
            id,
            instance: None,
            expr: None,
            lambda: None,
            lambda_prime: None,
            epsilon: None,
            f2: None,
            cofinal: None,
            sequence: None,
            ps: None,
            enumeration_budget: cfg.enumeration_budget,
            engine_steps: cfg.engine_steps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseReport {
    pub id: u64,
    pub seed: u64,
    pub check: Check,
    pub status: Status,
    pub detail: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<CaseFile>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CampaignConfig {
    pub check: Check,
    pub seed: u64,
    pub size: u64,
    pub enumeration_budget: u64,
    pub engine_steps: u64,
    /// Worker threads; `0` picks the default.
    pub jobs: usize,
    pub ps: Vec<u32>,
}

impl CampaignConfig {
    pub fn new(check: Check, seed: u64, size: u64) -> Self {
        CampaignConfig {
            check,
            seed,
            size,
            enumeration_budget: DEFAULT_ENUMERATION_BUDGET,
            engine_steps: 1_000_000,
            jobs: 0,
            ps: vec![1, 2, 3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub check: Check,
    pub seed: u64,
    pub size: u64,
    pub counts: BTreeMap<Status, u64>,
    pub violations: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignResult {
    pub reports: Vec<CaseReport>,
    pub summary: Summary,
}

impl CampaignResult {
    pub fn count(&self, status: Status) -> u64 {
        self.summary.counts.get(&status).copied().unwrap_or(0)
    }

    /// JSON lines, one per instance, then the summary.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for r in &self.reports {
            out.push_str(&serde_json::to_string(r).expect("report serializes"));
            out.push('\n');
        }
        out.push_str(&serde_json::json!({ "summary": self.summary }).to_string());
        out.push('\n');
        out
    }
}

/// Draws instance `id` of the campaign.
pub fn generate(cfg: &CampaignConfig, id: u64) -> CaseFile {
    let mut rng = instance_rng(cfg.seed, cfg.check.stream(id));
    let mut case = CaseFile::new(cfg.check, cfg, id);
    let rng = &mut rng;
    let sets = |rng: &mut _, points: usize, stab: usize| {
        let space = random_space(rng, points);
        let seq = random_set_seq(rng, space.size(), stab);
        Some(Instance::with_sets(&space, &seq))
    };
    let budget = |case: &mut CaseFile, rng: &mut _| {
        let (l, lp) = random_budget(rng);
        case.lambda = Some(fmt_rational(&l));
        case.lambda_prime = Some(fmt_rational(&lp));
    };
    match cfg.check {
        Check::Bound | Check::Implications | Check::Net => {
            case.instance = sets(rng, 4, 6);
            budget(&mut case, rng);
            if cfg.check != Check::Implications {
                case.expr = Some(random_expr(rng, 2).to_string());
            }
            if cfg.check == Check::Net {
                case.cofinal = Some(random_cofinal(rng));
            }
        }
        Check::BoundExact | Check::Converse => {
            case.instance = sets(rng, 3, 3);
            budget(&mut case, rng);
            case.expr = Some(random_monotone_expr(rng, 2).to_string());
        }
        Check::Egorov | Check::Dct | Check::Lp => {
            let space = random_space(rng, 4);
            let fs = random_func_seq(rng, space.size(), 6);
            case.instance = Some(Instance::with_funcs(&space, &fs));
            budget(&mut case, rng);
            case.epsilon = Some(fmt_rational(&random_epsilon(rng)));
            case.f2 = Some(random_total_fn(rng).to_string());
            if cfg.check == Check::Lp {
                case.ps = Some(cfg.ps.clone());
            }
        }
        Check::Monotone => {
            use rand::seq::SliceRandom;
            let eps = *["1", "1/2", "1/4"].choose(rng).expect("nonempty");
            case.epsilon = Some(eps.to_string());
            let seq = random_monotone_sequence(rng, checks::MONOTONE_LENGTH);
            case.sequence = Some(seq.iter().map(fmt_rational).collect());
        }
        Check::Stub => {}
    }
    case
}

/// Evaluates a case file.
pub fn replay(case: &CaseFile) -> Result<CaseReport, CampaignError> {
    let (status, detail) = checks::evaluate(case)?;
    Ok(CaseReport {
        id: case.id,
        seed: case.seed,
        check: case.check,
        status,
        detail,
        case: (status == Status::Violation).then(|| case.clone()),
    })
}

pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignResult, CampaignError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| CampaignError::Pool(e.to_string()))?;
    let reports: Vec<CaseReport> =
        pool.install(|| (0..cfg.size).into_par_iter().map(|id| replay(&generate(cfg, id))).collect::<Result<_, _>>())?;
    let mut counts = BTreeMap::new();
    for r in &reports {
        *counts.entry(r.status).or_insert(0) += 1;
    }
    let violations = counts.get(&Status::Violation).copied().unwrap_or(0);
    let summary = Summary { check: cfg.check, seed: cfg.seed, size: cfg.size, counts, violations };
    Ok(CampaignResult { reports, summary })
}

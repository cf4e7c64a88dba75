//! `metastable`: bounds, tables, campaigns and mode reports from the command line.
//!
//! Exit codes: 0 ok, 1 property violation, 2 usage error, 3 resource exhaustion.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use metastable::campaign::{self, CampaignConfig, CaseFile, Check, Status};
use metastable::derived::{
    dct_check, egorov_bound, egorov_check, lower_bound_search, lp_check, paper_table, EgorovInput, SearchLimits,
    TotalFn, TABLE_HEADER,
};
use metastable::engine::{compute_bound_with, Budget, EngineError, EngineLimits, WeightSchedule};
use metastable::functional::{parse_expr, Expr, Functional};
use metastable::measure::{Instance, DEFAULT_ENUMERATION_BUDGET};
use metastable::modes::{classify_family, classify_finite, implication_suite, Family, ModeReport};
use metastable::num::{fmt_rational, parse_rational, Rational};

const BUDGET_ENV: &str = "METASTABLE_BUDGET";

#[derive(Parser)]
#[command(name = "metastable", version, about = "Explicit metastable convergence bounds, checked exactly")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the bound M′ for a functional and print its trace.
    Bound(BoundArgs),
    /// Run a seeded verification campaign, or replay a case file.
    Verify(VerifyArgs),
    /// Engine values next to the closed forms for the flat and nested families.
    Table(TableArgs),
    /// Egorov bound and conclusion check on a function-sequence instance.
    Egorov(DerivedArgs),
    /// Integral (or L^p with --p) bound and conclusion check.
    Dct(DerivedArgs),
    /// Classify convergence modes of a built-in family or a finite instance.
    Modes(ModesArgs),
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value = "1/2")]
    lambda: String,
    #[arg(long = "lambda-prime", default_value = "1/4")]
    lambda_prime: String,
    /// default, concentrated, or a path to a JSON list of "p/q" weights.
    #[arg(long, default_value = "default")]
    schedule: String,
    #[arg(long)]
    format: Option<Format>,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Engine step budget.
    #[arg(long = "max-steps", default_value_t = 10_000_000)]
    max_steps: u64,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    expr: String,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct VerifyArgs {
    /// One of bound, bound_exact, implications, converse, egorov, dct, lp, monotone, net, or all.
    #[arg(long, default_value = "bound")]
    check: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    size: u64,
    /// Enumeration budget for exact hypothesis decisions.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Exponents for the lp check.
    #[arg(long = "p", value_delimiter = ',', default_value = "1,2,3")]
    p: Vec<u32>,
    /// Replay a case file instead of generating instances.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long = "max-steps", default_value_t = 1_000_000)]
    max_steps: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory receiving one case file per violation.
    #[arg(long = "failures-dir")]
    failures_dir: Option<PathBuf>,
}

#[derive(Args)]
struct TableArgs {
    /// `a..b` or a comma-separated list.
    #[arg(long, default_value = "1..5")]
    n: String,
    #[command(flatten)]
    common: Common,
    /// Also search small instances for large least valid indices.
    #[arg(long = "lower-bound")]
    lower_bound: bool,
}

#[derive(Args)]
struct DerivedArgs {
    /// Instance file with `weights` and `funcs`.
    #[arg(long)]
    instance: PathBuf,
    /// Bound M1 for the pointwise statement; defaults to the stabilization index.
    #[arg(long)]
    expr: Option<String>,
    /// F2 (or F): id, succ, affine:A,B or table:V0,V1,...;TAIL.
    #[arg(long, default_value = "succ")]
    f2: String,
    #[arg(long, default_value = "1/2")]
    epsilon: String,
    #[arg(long)]
    p: Option<u32>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ModesArgs {
    /// shift_indicator, tail_indicator, alt_tail, or all.
    #[arg(long, default_value = "all")]
    family: String,
    /// Finite instance with `funcs` instead of a family.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, default_value = "1/2")]
    epsilon: String,
    #[arg(long, default_value = "1")]
    lambda: String,
    #[arg(long, default_value_t = 20)]
    window: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// An error together with its exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure { code: 2, error: e.into() }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: 2, error: anyhow::anyhow!(msg.into()) }
}

fn engine_failure(e: EngineError) -> Failure {
    let code = if e.is_exhaustion() { 3 } else { 2 };
    Failure { code, error: e.into() }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bound(a) => cmd_bound(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Table(a) => cmd_table(a),
        Command::Egorov(a) => cmd_derived(a, false),
        Command::Dct(a) => cmd_derived(a, true),
        Command::Modes(a) => cmd_modes(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn rational(text: &str, what: &str) -> Result<Rational, Failure> {
    parse_rational(text).map_err(|e| usage(format!("--{what}: {e}")))
}

fn budget(c: &Common) -> Result<Budget, Failure> {
    Ok(Budget::new(rational(&c.lambda, "lambda")?, rational(&c.lambda_prime, "lambda-prime")?)?)
}

fn schedule(c: &Common) -> Result<WeightSchedule, Failure> {
    match c.schedule.as_str() {
        "default" => Ok(WeightSchedule::Halving),
        "concentrated" => Ok(WeightSchedule::Concentrated),
        path => {
            let text = fs::read_to_string(path).with_context(|| format!("reading schedule {path}"))?;
            let raw: Vec<String> = serde_json::from_str(&text).context("schedule file must be a JSON list of \"p/q\"")?;
            let w = raw.iter().map(|s| rational(s, "schedule")).collect::<Result<_, _>>()?;
            Ok(WeightSchedule::Explicit(w))
        }
    }
}

fn limits(max_steps: u64) -> EngineLimits {
    EngineLimits { max_steps, ..EngineLimits::default() }
}

fn enumeration_budget(flag: Option<u64>) -> Result<u64, Failure> {
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| usage(format!("{BUDGET_ENV} must be a nonnegative integer"))),
        Err(_) => Ok(flag.unwrap_or(DEFAULT_ENUMERATION_BUDGET)),
    }
}

fn read_instance(path: &Path) -> Result<Instance, Failure> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?)
}

fn cmd_bound(a: BoundArgs) -> Outcome {
    let expr = parse_expr(&a.expr)?;
    let budget = budget(&a.common)?;
    let schedule = schedule(&a.common)?;
    let trace = compute_bound_with(&expr, &budget, &schedule, limits(a.common.max_steps)).map_err(engine_failure)?;
    let text = match a.common.format.unwrap_or(Format::Text) {
        Format::Json => trace.to_json() + "\n",
        Format::Csv => format!("expr,m_prime,nodes_visited,max_depth\n{},{},{},{}\n", trace.expr, trace.m_prime, trace.nodes_visited, trace.max_depth),
        Format::Text => format!(
            "m_prime={}\nnodes_visited={}\nmax_depth={}\nschedule={}\n",
            trace.m_prime, trace.nodes_visited, trace.max_depth, trace.schedule
        ),
    };
    emit(&a.common.out, &text)?;
    Ok(0)
}

fn cmd_verify(a: VerifyArgs) -> Outcome {
    let enumeration_budget = enumeration_budget(a.budget)?;
    if let Some(path) = &a.instance {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let case: CaseFile = serde_json::from_str(&text).context("parsing case file")?;
        let report = campaign::replay(&case)?;
        emit(&a.out, &(serde_json::to_string(&report)? + "\n"))?;
        return Ok(if report.status == Status::Violation { 1 } else { 0 });
    }
    let checks: Vec<Check> = if a.check == "all" {
        Check::ALL.to_vec()
    } else {
        vec![a.check.parse().map_err(usage)?]
    };
    if a.p.contains(&0) {
        return Err(usage("--p values must be at least 1"));
    }
    let mut text = String::new();
    let mut violations = 0;
    for check in checks {
        let cfg = CampaignConfig {
            check,
            seed: a.seed,
            size: a.size,
            enumeration_budget,
            engine_steps: a.max_steps,
            jobs: a.jobs,
            ps: a.p.clone(),
        };
        let result = campaign::run_campaign(&cfg)?;
        violations += result.summary.violations;
        for r in result.reports.iter().filter(|r| r.status == Status::Violation) {
            let case = serde_json::to_string_pretty(r.case.as_ref().expect("violations carry their case"))?;
            eprintln!("violation in {} instance {} (seed {}):\n{case}", check, r.id, r.seed);
            if let Some(dir) = &a.failures_dir {
                fs::create_dir_all(dir)?;
                fs::write(dir.join(format!("{}-{}-{}.json", check, r.seed, r.id)), case + "\n")?;
            }
        }
        text.push_str(&result.to_json_lines());
    }
    emit(&a.out, &text)?;
    Ok(if violations > 0 { 1 } else { 0 })
}

fn parse_ns(spec: &str) -> Result<Vec<u64>, Failure> {
    let bad = || usage(format!("--n: expected a..b or a list, got {spec:?}"));
    if let Some((lo, hi)) = spec.split_once("..") {
        let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        return Ok((lo..=hi).collect());
    }
    spec.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect()
}

fn cmd_table(a: TableArgs) -> Outcome {
    let ns = parse_ns(&a.n)?;
    let budget = budget(&a.common)?;
    let rows = paper_table(&ns, std::slice::from_ref(&budget), limits(a.common.max_steps)).map_err(engine_failure)?;
    let mismatch = rows.iter().any(|r| r.is_asserted() && r.matches != metastable::derived::RowMatch::Equal);
    let lower = if a.lower_bound {
        ns.iter()
            .map(|&n| lower_bound_search(n, &budget, SearchLimits::default()).map(|r| (n, r)))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        Vec::new()
    };
    let text = match a.common.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut t = String::from(TABLE_HEADER);
            t.push('\n');
            for r in &rows {
                t.push_str(&r.to_csv());
                t.push('\n');
            }
            t
        }
        format => {
            let json_rows: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "expr": r.expr,
                        "n": r.n,
                        "lambda": fmt_rational(&r.lambda),
                        "lambda_prime": fmt_rational(&r.lambda_prime),
                        "schedule": r.schedule,
                        "engine_m_prime": match &r.engine {
                            Ok(v) => json!(v.to_string()),
                            Err(chain) => json!({ "exhausted": chain.iter().map(|c| c.to_string()).collect::<Vec<_>>() }),
                        },
                        "closed_form": r.closed_form.to_string(),
                        "match": r.matches.label(),
                    })
                })
                .collect();
            let lower: Vec<Value> = lower
                .iter()
                .map(|(n, r)| {
                    json!({
                        "n": n,
                        "searched": r.searched,
                        "undecided": r.undecided,
                        "best_least_index": r.best.as_ref().map(|b| b.least_index),
                        "witness": r.best.as_ref().map(|b| Instance::with_sets(&b.space, &b.seq)),
                        "reference": r.reference.to_string(),
                    })
                })
                .collect();
            let doc = json!({ "rows": json_rows, "lower_bound": lower });
            if format == Format::Json {
                serde_json::to_string(&doc)? + "\n"
            } else {
                serde_json::to_string_pretty(&doc)? + "\n"
            }
        }
    };
    emit(&a.common.out, &text)?;
    Ok(if mismatch { 1 } else { 0 })
}

fn cmd_derived(a: DerivedArgs, integral: bool) -> Outcome {
    let inst = read_instance(&a.instance)?;
    let space = inst.space()?;
    let fs = inst.func_seq()?.ok_or_else(|| usage("instance has no funcs"))?;
    let m1: Arc<dyn Functional> = match &a.expr {
        Some(e) => Arc::new(parse_expr(e)?),
        None => Arc::new(Expr::Const(fs.stab_index().into())),
    };
    let f = TotalFn::parse(&a.f2)?;
    let epsilon = rational(&a.epsilon, "epsilon")?;
    let input = EgorovInput::new(m1, epsilon, budget(&a.common)?, schedule(&a.common)?)?;
    let (m2, _) = egorov_bound(&input, &f).map_err(|e| match e {
        metastable::derived::DerivedError::Engine(e) => engine_failure(e),
        other => other.into(),
    })?;
    let (kind, out) = match (integral, a.p) {
        (false, _) => ("egorov", egorov_check(&space, &fs, &input, &f)?),
        (true, None) => ("dct", dct_check(&space, &fs, &input, &f)?),
        (true, Some(0)) => return Err(usage("--p must be at least 1")),
        (true, Some(p)) => ("lp", lp_check(&space, &fs, &input, &f, p)?),
    };
    let doc = json!({
        "check": kind,
        "m1": input.m1.describe(),
        "f": f.to_string(),
        "epsilon": fmt_rational(&input.epsilon),
        "lambda": fmt_rational(input.budget.lambda()),
        "lambda_prime": fmt_rational(input.budget.lambda_prime()),
        "p": a.p,
        "m2": m2.to_string(),
        "m": out.witness.as_ref().map(|m| m.to_string()),
    });
    let text = match a.common.format.unwrap_or(Format::Text) {
        Format::Text => format!(
            "m2={}\nm={}\n",
            m2,
            out.witness.as_ref().map_or("none".to_string(), |m| m.to_string())
        ),
        _ => serde_json::to_string(&doc)? + "\n",
    };
    emit(&a.common.out, &text)?;
    Ok(if out.witness.is_some() { 0 } else { 1 })
}

fn cmd_modes(a: ModesArgs) -> Outcome {
    let epsilon = rational(&a.epsilon, "epsilon")?;
    let lambda = rational(&a.lambda, "lambda")?;
    let reports: Vec<ModeReport> = match &a.instance {
        Some(path) => {
            let inst = read_instance(path)?;
            let fs = inst.func_seq()?.ok_or_else(|| usage("instance has no funcs"))?;
            vec![classify_finite(&inst.space()?, &fs, &epsilon, &lambda)?]
        }
        None => {
            let families: Vec<Family> = if a.family == "all" {
                Family::ALL.to_vec()
            } else {
                vec![a.family.parse().map_err(usage)?]
            };
            families
                .into_iter()
                .map(|f| classify_family(f, &epsilon, &lambda, a.window))
                .collect::<Result<_, _>>()?
        }
    };
    let verdict = implication_suite(&reports);
    let mut text = String::new();
    for r in &reports {
        text.push_str(&r.to_json());
        text.push('\n');
    }
    emit(&a.out, &text)?;
    Ok(if verdict.chain_holds() { 0 } else { 1 })
}

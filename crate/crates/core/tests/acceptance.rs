//! Acceptance criteria, one test per criterion. Each prints a single
//! `PASS`/`FAIL` line with the numbers it was decided on.

mod support;

use std::time::{Duration, Instant};

use metastable::campaign::{gen, replay, run_campaign, CampaignConfig, CaseFile, Check, Status};
use metastable::derived::{budget_grid, paper_table, RowMatch};
use metastable::engine::{compute_bound, compute_bound_with, EngineLimits};
use metastable::functional::parse_expr;
use metastable::modes::{classify_family, implication_suite, Family, ModeStatus};
use metastable::num::{fmt_rational, rat};
use metastable::{Budget, Expr, Rational, WeightSchedule};
use num_traits::One;

use support::transcribe_expr;

/// Transcription step budget per expression.
const ORACLE_STEPS: u64 = 2_000_000;
const CRITERION_1_RUNTIME: Duration = Duration::from_secs(1);
const CRITERION_2_RUNTIME: Duration = Duration::from_secs(60);
const SEED: u64 = 20_240_601;

fn report(criterion: &str, pass: bool, detail: String) {
    println!("criterion {criterion}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
}

fn grid() -> Vec<Budget> {
    budget_grid(&[rat(1, 2), rat(3, 4), rat(1, 1)], &[rat(1, 2), rat(1, 4), rat(1, 8)])
}

fn ceil_div(n: u64, gap: &Rational) -> u64 {
    let q = Rational::from_integer(n.into()) / gap;
    let c = q.ceil().to_integer();
    u64::try_from(c).expect("small")
}

#[test]
fn criterion_1_closed_form_regression() {
    let start = Instant::now();
    let mut checked = 0;
    let mut mismatches = Vec::new();
    for budget in grid() {
        let gap = budget.gap();
        for n in 1..=5u64 {
            let e = parse_expr(&format!("F(0)+{n}")).unwrap();
            for (schedule, num) in [(WeightSchedule::Halving, 2), (WeightSchedule::Concentrated, 1)] {
                let got = compute_bound(&e, &budget, &schedule).unwrap().m_prime;
                let want = n * ceil_div(num, &gap);
                checked += 1;
                if got != want.into() {
                    mismatches.push(format!("n={n} gap={} {}: {got} != {want}", fmt_rational(&gap), schedule.name()));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = mismatches.is_empty() && elapsed < CRITERION_1_RUNTIME && checked == 2 * 5 * grid().len();
    report("1", pass, format!("{checked} cases, {} mismatches, {elapsed:?}", mismatches.len()));
    assert!(mismatches.is_empty(), "{mismatches:?}");
    assert!(elapsed < CRITERION_1_RUNTIME);
}

fn engine_matches_oracle(e: &Expr, budget: &Budget) -> Result<bool, String> {
    let oracle = transcribe_expr(e, budget.lambda(), budget.lambda_prime(), ORACLE_STEPS)
        .ok_or_else(|| format!("transcription exhausted on {e}"))?;
    let engine = compute_bound(e, budget, &WeightSchedule::Halving).map_err(|err| format!("engine on {e}: {err}"))?;
    Ok(engine.m_prime == oracle)
}

#[test]
fn criterion_2_oracle_equivalence() {
    let start = Instant::now();
    let mut cases: Vec<(Expr, Budget)> = Vec::new();
    for budget in grid() {
        for n in 1..=5 {
            cases.push((parse_expr(&format!("F(0)+{n}")).unwrap(), budget.clone()));
        }
    }
    let half = Budget::new(rat(3, 4), rat(1, 4)).unwrap();
    for k in 0..=3 {
        cases.push((Expr::iter(k, Expr::constant(0)), half.clone()));
    }

    let mut rng = gen::instance_rng(SEED, 2);
    let mut random = 0;
    let mut skipped = 0;
    while random < 50 {
        let e = gen::random_expr(&mut rng, 3);
        if transcribe_expr(&e, half.lambda(), half.lambda_prime(), ORACLE_STEPS / 10).is_none() {
            skipped += 1;
            continue;
        }
        cases.push((e, half.clone()));
        random += 1;
    }

    let mut failures = Vec::new();
    for (e, b) in &cases {
        match engine_matches_oracle(e, b) {
            Ok(true) => {}
            Ok(false) => failures.push(format!("{e} disagrees")),
            Err(msg) => failures.push(msg),
        }
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && elapsed < CRITERION_2_RUNTIME;
    report(
        "2 (flat grid, iterates, random)",
        pass,
        format!("{} cases, {skipped} random expressions rejected as infeasible, {elapsed:?}", cases.len()),
    );
    assert!(failures.is_empty(), "{failures:?}");
    assert!(elapsed < CRITERION_2_RUNTIME);
}

/// The nested family cannot be evaluated by either route: the root chain
/// reaches `1024` for `n = 1`, `λ − λ′ = 1/2`, and the node at depth 1024
/// then iterates `2^1026` times.
#[test]
fn criterion_2_nested_family() {
    let mut outcomes = Vec::new();
    for n in 1..=2 {
        for budget in [Budget::new(rat(3, 4), rat(1, 4)).unwrap(), Budget::new(rat(1, 2), rat(1, 4)).unwrap()] {
            let e = parse_expr(&format!("F(F(0))+{n}")).unwrap();
            let oracle = transcribe_expr(&e, budget.lambda(), budget.lambda_prime(), ORACLE_STEPS);
            let limits = EngineLimits { max_steps: ORACLE_STEPS, ..EngineLimits::default() };
            let engine = compute_bound_with(&e, &budget, &WeightSchedule::Halving, limits);
            let label = format!("n={n} gap={}", fmt_rational(&budget.gap()));
            let agreed = matches!((&oracle, &engine), (Some(o), Ok(t)) if *o == t.m_prime);
            let engine_text = match &engine {
                Ok(t) => t.m_prime.to_string(),
                Err(err) => err.to_string(),
            };
            outcomes.push((label, agreed, oracle.map(|v| v.to_string()), engine_text));
        }
    }
    let pass = outcomes.iter().all(|o| o.1);
    let detail: Vec<String> = outcomes
        .iter()
        .map(|(l, _, o, e)| format!("{l}: oracle={} engine={e}", o.as_deref().unwrap_or("exhausted")))
        .collect();
    report("2 (nested family)", pass, detail.join("; "));
    assert!(pass, "nested family not computable: {detail:?}");
}

fn campaign(check: Check, size: u64) -> metastable::campaign::CampaignResult {
    let mut cfg = CampaignConfig::new(check, SEED, size);
    cfg.ps = vec![1, 2, 3];
    run_campaign(&cfg).unwrap()
}

#[test]
fn criterion_3_bound_soundness() {
    let sufficient = campaign(Check::Bound, 2_500);
    let exact = campaign(Check::BoundExact, 1_000);
    let checked = sufficient.count(Status::Ok) + sufficient.count(Status::Violation);
    let tiny = exact.count(Status::Ok) + exact.count(Status::Violation);
    let violations = sufficient.summary.violations + exact.summary.violations;
    let pass = violations == 0 && checked >= 1000 && tiny >= 100;
    report(
        "3",
        pass,
        format!(
            "{checked} sufficient-filtered and {tiny} exactly decided instances checked, {violations} violations, \
             {} + {} exhausted, {} undecided",
            sufficient.count(Status::Exhausted),
            exact.count(Status::Exhausted),
            exact.count(Status::Undecided)
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_4_implications() {
    let forward = campaign(Check::Implications, 1_000);
    let converse = campaign(Check::Converse, 500);
    let chains = forward.count(Status::Ok) + forward.count(Status::Violation);
    let converses = converse.count(Status::Ok) + converse.count(Status::Violation);
    let violations = forward.summary.violations + converse.summary.violations;
    let pass = violations == 0 && chains >= 500 && converses >= 50;
    report("4", pass, format!("{chains} forward chains, {converses} converse instances, {violations} violations"));
    assert!(pass);
}

#[test]
fn criterion_5_egorov_dct_lp() {
    let mut lines = Vec::new();
    let mut pass = true;
    for check in [Check::Egorov, Check::Dct, Check::Lp] {
        let r = campaign(check, 500);
        let ok = r.count(Status::Ok);
        pass &= r.summary.violations == 0 && ok >= 500;
        lines.push(format!("{check}: {ok} ok, {} violations", r.summary.violations));
    }
    report("5", pass, lines.join("; "));
    assert!(pass);
}

#[test]
fn criterion_6_monotone_bound() {
    let mut total = 0;
    let mut functions = 0u64;
    let mut violations = 0;
    let cfg = CampaignConfig::new(Check::Monotone, SEED, 0);
    let mut rng = gen::instance_rng(SEED, 6);
    for eps in ["1", "1/2", "1/4"] {
        for id in 0..200 {
            let seq = gen::random_monotone_sequence(&mut rng, 25);
            let case = CaseFile {
                check: Check::Monotone,
                seed: cfg.seed,
                id,
                instance: None,
                expr: None,
                lambda: None,
                lambda_prime: None,
                epsilon: Some(eps.to_string()),
                f2: None,
                cofinal: None,
                sequence: Some(seq.iter().map(fmt_rational).collect()),
                ps: None,
                enumeration_budget: cfg.enumeration_budget,
                engine_steps: cfg.engine_steps,
            };
            let r = replay(&case).unwrap();
            total += 1;
            functions += r.detail["functions"].as_u64().unwrap();
            if r.status != Status::Ok {
                violations += 1;
            }
        }
    }
    let pass = violations == 0 && total == 600;
    report("6", pass, format!("{total} sequences, {functions} capped functions, {violations} violations"));
    assert!(pass);
}

#[test]
fn criterion_7_modes() {
    let (eps, lambda) = (rat(1, 2), Rational::one());
    let reports: Vec<_> = Family::ALL.iter().map(|&f| classify_family(f, &eps, &lambda, 20).unwrap()).collect();
    let expect = |fam: Family| {
        let r = reports.iter().find(|r| r.family == fam.name()).unwrap();
        match fam {
            Family::ShiftIndicator => r.aum.holds() && r.au == ModeStatus::Fails,
            Family::AltTail => r.ae.holds() && r.aum == ModeStatus::Fails,
            Family::TailIndicator => r.aum.holds() && r.aum_prime == ModeStatus::Fails,
        }
    };
    let classified = Family::ALL.iter().all(|&f| expect(f));
    let certified = reports.iter().all(|r| r.verify());
    let verdict = implication_suite(&reports);
    let pass = classified && certified && verdict.chain_holds() && verdict.gaps_witnessed();
    report(
        "7",
        pass,
        format!(
            "classification {}, certificates {}, chain violations {}",
            if classified { "as expected" } else { "unexpected" },
            if certified { "re-verified" } else { "rejected" },
            verdict.violations.len()
        ),
    );
    assert!(pass);
}

#[test]
fn table_rows_for_flat_family_match() {
    let rows = paper_table(&[1, 2, 3, 4, 5], &grid(), EngineLimits { max_steps: 100_000, ..EngineLimits::default() }).unwrap();
    assert!(rows.iter().filter(|r| r.is_asserted()).all(|r| r.matches == RowMatch::Equal));
}

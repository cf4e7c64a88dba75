use std::sync::Arc;

use num_traits::{One, Signed};
use serde_json::{json, Value};

use super::{CampaignError, CaseFile, Check, Status};
use crate::derived::{
    dct_check, egorov_check, lp_check, monotone_bound, net_conclusion, net_reduce, oscillation, Cofinal,
    EgorovInput, TotalFn,
};
use crate::engine::{compute_bound_with, Budget, EngineLimits, WeightSchedule};
use crate::functional::{eval_total, parse_expr, Expr};
use crate::measure::{
    bad_set, capped_range, cond1, cond2, cond3, conclusion_check, difference, hypothesis_holds,
    hypothesis_sufficient, integral, lp_power, measure, range_union, Decision, FiniteProbSpace, FuncSeq, SetSeq,
};
use crate::num::{ceil_nat, fmt_rational, nat_to_usize, parse_rational, Nat, Rational};

/// Length of generated nondecreasing sequences; they are constant afterwards.
pub(super) const MONOTONE_LENGTH: usize = 25;

/// Largest step of the capped `F` family in the nondecreasing-sequence check.
const MONOTONE_STEP: usize = 4;

type Outcome = Result<(Status, Value), CampaignError>;

fn missing(what: &str) -> CampaignError {
    CampaignError::Malformed(format!("missing {what}"))
}

fn rational(field: &Option<String>, what: &str) -> Result<Rational, CampaignError> {
    Ok(parse_rational(field.as_deref().ok_or_else(|| missing(what))?)?)
}

fn expr(case: &CaseFile) -> Result<Expr, CampaignError> {
    Ok(parse_expr(case.expr.as_deref().ok_or_else(|| missing("expr"))?)?)
}

fn sets(case: &CaseFile) -> Result<(FiniteProbSpace, SetSeq), CampaignError> {
    let inst = case.instance.as_ref().ok_or_else(|| missing("instance"))?;
    Ok((inst.space()?, inst.set_seq()?.ok_or_else(|| missing("sets"))?))
}

fn funcs(case: &CaseFile) -> Result<(FiniteProbSpace, FuncSeq), CampaignError> {
    let inst = case.instance.as_ref().ok_or_else(|| missing("instance"))?;
    Ok((inst.space()?, inst.func_seq()?.ok_or_else(|| missing("funcs"))?))
}

fn budget(case: &CaseFile) -> Result<Budget, CampaignError> {
    Ok(Budget::new(rational(&case.lambda, "lambda")?, rational(&case.lambda_prime, "lambda_prime")?)?)
}

fn limits(case: &CaseFile) -> EngineLimits {
    EngineLimits { max_steps: case.engine_steps, ..EngineLimits::default() }
}

fn f2(case: &CaseFile) -> Result<TotalFn, CampaignError> {
    TotalFn::parse(case.f2.as_deref().ok_or_else(|| missing("f2"))?).map_err(|e| CampaignError::Malformed(e.to_string()))
}

/// `M′` for `f`, or `None` on exhaustion.
fn bound_value(f: &Expr, budget: &Budget, case: &CaseFile) -> Result<Option<Nat>, CampaignError> {
    match compute_bound_with(f, budget, &WeightSchedule::Halving, limits(case)) {
        Ok(trace) => Ok(Some(trace.m_prime)),
        Err(e) if e.is_exhaustion() => Ok(None),
        Err(e) => Err(e.into()),
    }
}

pub(super) fn evaluate(case: &CaseFile) -> Outcome {
    match case.check {
        Check::Bound => bound(case, false),
        Check::BoundExact => bound(case, true),
        Check::Implications => implications(case),
        Check::Converse => converse(case),
        Check::Egorov => egorov(case),
        Check::Dct => dct(case),
        Check::Lp => lp(case),
        Check::Monotone => monotone(case),
        Check::Net => net(case),
        Check::Stub => Ok((Status::Violation, json!({ "reason": "stub check always fails" }))),
    }
}

fn bound(case: &CaseFile, exact: bool) -> Outcome {
    let (space, seq) = sets(case)?;
    let f = expr(case)?;
    let budget = budget(case)?;
    let sufficient = hypothesis_sufficient(&space, &seq, &f, budget.lambda_prime())?;
    let mut detail = json!({ "sufficient": sufficient });
    let established = if exact {
        let d = hypothesis_holds(&space, &seq, &f, budget.lambda_prime(), case.enumeration_budget)?;
        detail["decision"] = json!(d.label());
        if sufficient && d.fails() {
            detail["reason"] = json!("sufficient test contradicts exact decision");
            return Ok((Status::Violation, detail));
        }
        match d {
            Decision::Holds => true,
            Decision::Fails { .. } => false,
            Decision::Undecided { .. } => return Ok((Status::Undecided, detail)),
        }
    } else {
        sufficient
    };
    if !established {
        return Ok((Status::Vacuous, detail));
    }
    let Some(m_prime) = bound_value(&f, &budget, case)? else {
        return Ok((Status::Exhausted, detail));
    };
    detail["m_prime"] = json!(m_prime.to_string());
    match conclusion_check(&space, &seq, budget.lambda(), &m_prime)? {
        Some(n) => {
            detail["n"] = json!(n.to_string());
            Ok((Status::Ok, detail))
        }
        None => Ok((Status::Violation, detail)),
    }
}

fn implications(case: &CaseFile) -> Outcome {
    let (space, seq) = sets(case)?;
    let lambda = rational(&case.lambda, "lambda")?;
    let Some(m) = cond1(&space, &seq, &lambda)? else {
        return Ok((Status::Vacuous, json!({ "cond1": null })));
    };
    let mut detail = json!({ "cond1": m });
    let c2 = cond2(&space, &seq, &lambda, &Nat::from(m))?;
    detail["cond2"] = json!(c2);
    if !c2 {
        return Ok((Status::Violation, detail));
    }
    let stab = seq.stab_index();
    let tail = measure(&space, &range_union(&seq, &Nat::from(m), &Nat::from(m.max(stab))))?;
    let lambda_prime = (&tail + &lambda) / Rational::from_integer(2.into());
    detail["lambda_prime"] = json!(fmt_rational(&lambda_prime));
    let d = cond3(&space, &seq, &Expr::Const(Nat::from(m)), &lambda, &lambda_prime, case.enumeration_budget)?;
    detail["cond3"] = json!(d.label());
    let status = match d {
        Decision::Holds => Status::Ok,
        Decision::Fails { .. } => Status::Violation,
        Decision::Undecided { .. } => Status::Undecided,
    };
    Ok((status, detail))
}

fn converse(case: &CaseFile) -> Outcome {
    let (space, seq) = sets(case)?;
    let f = expr(case)?;
    let budget = budget(case)?;
    let d = cond3(&space, &seq, &f, budget.lambda(), budget.lambda_prime(), case.enumeration_budget)?;
    let c1 = cond1(&space, &seq, budget.lambda())?;
    let detail = json!({ "cond3": d.label(), "cond1": c1 });
    let status = match (d, c1) {
        (Decision::Holds, Some(_)) => Status::Ok,
        (Decision::Holds, None) => Status::Violation,
        (Decision::Fails { .. }, _) => Status::Vacuous,
        (Decision::Undecided { .. }, _) => Status::Undecided,
    };
    Ok((status, detail))
}

fn egorov_input(case: &CaseFile, fs: &FuncSeq) -> Result<EgorovInput, CampaignError> {
    let m1 = Arc::new(Expr::Const(Nat::from(fs.stab_index())));
    Ok(EgorovInput::new(m1, rational(&case.epsilon, "epsilon")?, budget(case)?, WeightSchedule::Halving)?)
}

fn egorov(case: &CaseFile) -> Outcome {
    let (space, fs) = funcs(case)?;
    let input = egorov_input(case, &fs)?;
    let f2 = f2(case)?;
    let out = egorov_check(&space, &fs, &input, &f2)?;
    let mut detail = json!({ "m2": out.m2.to_string() });
    let Some(m) = out.witness else { return Ok((Status::Violation, detail)) };
    let good = bad_set(&fs, &input.epsilon, &m, &f2.value(&m)).complement(space.size());
    let mu = measure(&space, &good)?;
    detail["m"] = json!(m.to_string());
    detail["measure"] = json!(fmt_rational(&mu));
    let ok = m <= out.m2 && mu > Rational::one() - input.budget.lambda();
    Ok((if ok { Status::Ok } else { Status::Violation }, detail))
}

fn dct(case: &CaseFile) -> Outcome {
    let (space, fs) = funcs(case)?;
    let input = egorov_input(case, &fs)?;
    let out = dct_check(&space, &fs, &input, &f2(case)?)?;
    let mut detail = json!({ "m2": out.m2.to_string(), "m": out.witness.as_ref().map(Nat::to_string) });
    let stab = fs.stab_index();
    for a in 0..=stab {
        for b in a..=stab {
            let gap = (integral(&space, fs.get(a))? - integral(&space, fs.get(b))?).abs();
            let l1 = lp_power(&space, &difference(fs.get(a), fs.get(b)), 1)?;
            if gap > l1 {
                detail["triangle"] = json!([a, b]);
                return Ok((Status::Violation, detail));
            }
        }
    }
    Ok((if out.witness.is_some() { Status::Ok } else { Status::Violation }, detail))
}

/// Least `m ≤ m2` with `∫|f_n − f_{n′}| < ε + λ` on `[m, F(m)]`, computed
/// with integrals of absolute differences.
fn l1_variant(space: &FiniteProbSpace, fs: &FuncSeq, input: &EgorovInput, f: &TotalFn, m2: &Nat) -> Result<Option<usize>, CampaignError> {
    let stab = fs.stab_index();
    let limit = &input.epsilon + input.budget.lambda();
    let last = nat_to_usize(m2).map_or(stab, |b| b.min(stab));
    for m in 0..=last {
        let mut ok = true;
        if let Some((lo, hi)) = capped_range(&Nat::from(m), &f.value_at(m), stab) {
            'pairs: for a in lo..=hi {
                for b in a..=hi {
                    let abs: Vec<Rational> = difference(fs.get(a), fs.get(b)).iter().map(Rational::abs).collect();
                    if integral(space, &abs)? >= limit {
                        ok = false;
                        break 'pairs;
                    }
                }
            }
        }
        if ok {
            return Ok(Some(m));
        }
    }
    Ok(None)
}

fn lp(case: &CaseFile) -> Outcome {
    let (space, fs) = funcs(case)?;
    let input = egorov_input(case, &fs)?;
    let f = f2(case)?;
    let ps = case.ps.clone().ok_or_else(|| missing("ps"))?;
    let mut detail = json!({});
    let mut status = Status::Ok;
    for &p in &ps {
        if p == 0 {
            return Err(CampaignError::Malformed("p must be at least 1".into()));
        }
        let out = lp_check(&space, &fs, &input, &f, p)?;
        detail[format!("p{p}")] = json!(out.witness.as_ref().map(Nat::to_string));
        if out.witness.is_none() {
            status = Status::Violation;
        }
        if p == 1 {
            let variant = l1_variant(&space, &fs, &input, &f, &out.m2)?;
            if variant.map(Nat::from) != out.witness {
                detail["l1_variant"] = json!(variant);
                status = Status::Violation;
            }
        }
    }
    let stab = fs.stab_index();
    for a in 0..=stab {
        for b in a..=stab {
            let g = difference(fs.get(a), fs.get(b));
            let powers: Vec<Rational> = (1..=3).map(|p| lp_power(&space, &g, p)).collect::<Result<_, _>>()?;
            if powers.windows(2).any(|w| w[1] > w[0]) {
                detail["power_monotonicity"] = json!([a, b]);
                status = Status::Violation;
            }
        }
    }
    Ok((status, detail))
}

/// Every `F` with `m ≤ F(m) ≤ m + 4`; smaller values only shrink the
/// intervals. Only the iterates `0, F(0), F(F(0)), …` affect the bound, so
/// those are enumerated and every other position takes `m + 4`.
fn monotone(case: &CaseFile) -> Outcome {
    let epsilon = rational(&case.epsilon, "epsilon")?;
    let seq: Vec<Rational> = case
        .sequence
        .as_ref()
        .ok_or_else(|| missing("sequence"))?
        .iter()
        .map(|s| parse_rational(s))
        .collect::<Result<_, _>>()?;
    if seq.is_empty() || seq.windows(2).any(|w| w[0] > w[1]) {
        return Err(CampaignError::Malformed("sequence must be nonempty and nondecreasing".into()));
    }
    let bound = monotone_bound(&epsilon)?;
    let k = nat_to_usize(&(ceil_nat(&(Rational::one() / &epsilon)) + 1u32)).expect("small");
    let mut chain = vec![0usize];
    let mut checked = 0u64;
    let mut failure = None;
    explore_chains(&seq, &epsilon, &bound, k, &mut chain, &mut checked, &mut failure)?;
    let detail = json!({ "functions": checked, "failure": failure });
    Ok((if failure.is_none() { Status::Ok } else { Status::Violation }, detail))
}

fn explore_chains(
    seq: &[Rational],
    epsilon: &Rational,
    bound: &Expr,
    k: usize,
    chain: &mut Vec<usize>,
    checked: &mut u64,
    failure: &mut Option<Vec<usize>>,
) -> Result<(), CampaignError> {
    if failure.is_some() {
        return Ok(());
    }
    if chain.len() == k + 1 {
        *checked += 1;
        let f = |m: usize| chain.windows(2).find(|w| w[0] == m).map_or(m + MONOTONE_STEP, |w| w[1]);
        let big_m = eval_total(bound, |x: &Nat| Nat::from(f(nat_to_usize(x).expect("small"))))?.value;
        let big_m = nat_to_usize(&big_m).expect("small");
        if big_m != chain[k] {
            return Err(CampaignError::Malformed("bound disagrees with the enumerated chain".into()));
        }
        if !(0..=big_m).any(|m| &oscillation(seq, m, f(m)) < epsilon) {
            *failure = Some(chain.clone());
        }
        return Ok(());
    }
    let c = *chain.last().expect("nonempty");
    let fixed = chain.windows(2).find(|w| w[0] == c).map(|w| w[1]);
    let choices: Vec<usize> = match fixed {
        Some(v) => vec![v],
        None => (c..=c + MONOTONE_STEP).collect(),
    };
    for v in choices {
        chain.push(v);
        explore_chains(seq, epsilon, bound, k, chain, checked, failure)?;
        chain.pop();
    }
    Ok(())
}

fn net(case: &CaseFile) -> Outcome {
    let (space, seq) = sets(case)?;
    let f = expr(case)?;
    let budget = budget(case)?;
    let net = Cofinal::table(case.cofinal.clone().ok_or_else(|| missing("cofinal"))?)?;
    let reduced = net_reduce(&seq, &net);
    for n in 0..=reduced.stab_index() {
        let mu = measure(&space, reduced.get(n))?;
        for i in net.at(n)..=net.at(n + 1) {
            if measure(&space, seq.get(i))? > mu {
                return Ok((Status::Violation, json!({ "bookkeeping": [n, i] })));
            }
        }
    }
    let sufficient = hypothesis_sufficient(&space, &reduced, &f, budget.lambda_prime())?;
    let mut detail = json!({ "sufficient": sufficient });
    if !sufficient {
        return Ok((Status::Ok, detail));
    }
    let Some(m_prime) = bound_value(&f, &budget, case)? else {
        return Ok((Status::Exhausted, detail));
    };
    detail["m_prime"] = json!(m_prime.to_string());
    match net_conclusion(&space, &seq, &net, budget.lambda(), &m_prime)? {
        Some(i) => {
            detail["i"] = json!(i.to_string());
            Ok((Status::Ok, detail))
        }
        None => Ok((Status::Violation, detail)),
    }
}

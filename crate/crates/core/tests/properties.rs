mod support;

use metastable::engine::{compute_bound_with, iteration_count, EngineLimits};
use metastable::functional::{eval_hat, eval_total, is_secured, parse_expr, FiniteSeq};
use metastable::measure::{
    bad_set, conclusion_check, hypothesis_holds, hypothesis_sufficient, range_union, FiniteProbSpace, FuncSeq, PointSet,
    SetSeq,
};
use metastable::num::rat;
use metastable::{compute_bound, Budget, Expr, Nat, Rational, WeightSchedule};
use proptest::prelude::*;

use support::naive_hypothesis;

fn expr_strategy(depth: u32) -> impl Strategy<Value = Expr> {
    let leaf = (0u64..=4).prop_map(Expr::constant);
    leaf.prop_recursive(depth, 16, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Expr::apply),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Expr::add(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Expr::mul(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Expr::max(l, r)),
            (0u64..=3, inner).prop_map(|(k, e)| Expr::iter(k, e)),
        ]
    })
}

/// A finite window of values, continued by its last entry.
fn window() -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(0u64..8, 1..8)
}

fn lookup(w: &[u64], p: &Nat) -> Nat {
    let i = usize::try_from(p).unwrap_or(usize::MAX).min(w.len() - 1);
    Nat::from(w[i])
}

fn space_strategy(max_points: usize) -> impl Strategy<Value = FiniteProbSpace> {
    prop::collection::vec(1i64..4, 1..=max_points).prop_map(|w| {
        let total: i64 = w.iter().sum();
        FiniteProbSpace::new(w.iter().map(|&x| rat(x, total)).collect()).unwrap()
    })
}

fn set_seq_strategy(points: usize, max_stab: usize) -> impl Strategy<Value = SetSeq> {
    let mask = 0u32..(1 << points);
    let to_set = move |m: u32| -> PointSet { (0..points).filter(|x| m & (1 << x) != 0).collect() };
    (prop::collection::vec(mask.clone(), 0..=max_stab), mask)
        .prop_map(move |(prefix, tail)| SetSeq::new(prefix.into_iter().map(to_set).collect(), to_set(tail)))
}

fn instance(max_points: usize, max_stab: usize) -> impl Strategy<Value = (FiniteProbSpace, SetSeq)> {
    space_strategy(max_points).prop_flat_map(move |s| {
        let n = s.size();
        (Just(s), set_seq_strategy(n, max_stab))
    })
}

fn budget_strategy() -> impl Strategy<Value = Budget> {
    (1i64..=4, 1i64..=4)
        .prop_filter("λ′ < λ", |(l, lp)| lp < l)
        .prop_map(|(l, lp)| Budget::new(rat(l, 4), rat(lp, 4)).unwrap())
}

fn lambda_prime_strategy() -> impl Strategy<Value = Rational> {
    (1i64..=6).prop_map(|k| rat(k, 6))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn print_parse_round_trip(e in expr_strategy(4)) {
        prop_assert_eq!(parse_expr(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn secured_sequences_stay_secured(e in expr_strategy(3), sigma in window(), extra in window()) {
        let sigma = FiniteSeq::from_u64s(&sigma);
        if is_secured(&e, &sigma).unwrap() {
            let mut tau = sigma.clone();
            for v in &extra {
                tau.push(Nat::from(*v));
            }
            prop_assert!(is_secured(&e, &tau).unwrap());
            prop_assert_eq!(eval_hat(&e, &tau).unwrap(), eval_hat(&e, &sigma).unwrap());
        }
    }

    #[test]
    fn value_depends_only_on_queries(e in expr_strategy(3), f in window(), g in window()) {
        let first = eval_total(&e, |p| lookup(&f, p)).unwrap();
        let agree = |p: &Nat| if first.queries.contains(p) { lookup(&f, p) } else { lookup(&g, p) };
        prop_assert_eq!(eval_total(&e, agree).unwrap().value, first.value);
    }

    #[test]
    fn flagged_expressions_are_monotone(e in expr_strategy(3), f in window(), bump in window()) {
        prop_assume!(e.is_monotone());
        let g: Vec<u64> = f.iter().enumerate().map(|(i, v)| v + bump[i.min(bump.len() - 1)]).collect();
        let lo = eval_total(&e, |p| lookup(&f, p)).unwrap().value;
        let hi = eval_total(&e, |p| lookup(&g, p)).unwrap().value;
        prop_assert!(lo <= hi);
    }

    #[test]
    fn expressions_are_monotone_below_nondecreasing_oracles(e in expr_strategy(3), f in window(), bump in window()) {
        let mut g: Vec<u64> = f.iter().enumerate().map(|(i, v)| v + bump[i.min(bump.len() - 1)]).collect();
        for i in 1..g.len() {
            g[i] = g[i].max(g[i - 1]);
        }
        let lo = eval_total(&e, |p| lookup(&f, p)).unwrap().value;
        let hi = eval_total(&e, |p| lookup(&g, p)).unwrap().value;
        prop_assert!(lo <= hi);
        prop_assert!(eval_total(&e, |_| Nat::from(0u32)).unwrap().value <= lo);
    }

    #[test]
    fn constant_functional_has_secured_root(k in 0u64..1000, budget in budget_strategy()) {
        let trace = compute_bound(&Expr::constant(k), &budget, &WeightSchedule::Halving).unwrap();
        prop_assert_eq!(trace.m_prime, Nat::from(k));
        prop_assert_eq!(trace.nodes_visited, Nat::from(1u32));
    }

    #[test]
    fn larger_weights_never_increase_bounds(n in 1u64..=5, budget in budget_strategy(), depth in 0usize..6) {
        let halving = iteration_count(depth, &budget, &WeightSchedule::Halving).unwrap();
        let doubled = WeightSchedule::Explicit(
            (0..=depth).map(|d| WeightSchedule::Halving.weight(d, &budget) * rat(2, 1)).collect(),
        );
        // Doubled halving weights overshoot the budget, so compare counts only.
        let twice = metastable::num::ceil_nat(&(Rational::from_integer(1.into()) / doubled.weight(depth, &budget)));
        prop_assert!(twice <= halving);

        let e = parse_expr(&format!("F(0)+{n}")).unwrap();
        let default = compute_bound(&e, &budget, &WeightSchedule::Halving).unwrap().m_prime;
        let concentrated = compute_bound(&e, &budget, &WeightSchedule::Concentrated).unwrap().m_prime;
        prop_assert!(concentrated <= default);
    }

    #[test]
    fn bound_is_sound((space, seq) in instance(3, 4), n in 0u64..=3, budget in budget_strategy()) {
        let e = parse_expr(&format!("F(0)+{n}")).unwrap();
        let decision = hypothesis_holds(&space, &seq, &e, budget.lambda_prime(), 1_000_000).unwrap();
        prop_assume!(decision.holds());
        let limits = EngineLimits { max_steps: 200_000, ..EngineLimits::default() };
        let m_prime = compute_bound_with(&e, &budget, &WeightSchedule::Halving, limits).unwrap().m_prime;
        prop_assert!(conclusion_check(&space, &seq, budget.lambda(), &m_prime).unwrap().is_some());
    }

    #[test]
    fn sufficient_implies_holds((space, seq) in instance(3, 4), e in expr_strategy(2), lp in lambda_prime_strategy()) {
        prop_assume!(e.is_monotone());
        if hypothesis_sufficient(&space, &seq, &e, &lp).unwrap() {
            let decision = hypothesis_holds(&space, &seq, &e, &lp, 1_000_000).unwrap();
            prop_assert!(!decision.fails());
        }
    }

    #[test]
    fn search_agrees_with_naive_enumeration(
        (space, seq) in instance(3, 3),
        e in expr_strategy(2),
        lp in lambda_prime_strategy(),
    ) {
        prop_assume!(e.is_monotone());
        let stab = seq.stab_index() as u64;
        let top = eval_total(&e, |p| p.clone().max(Nat::from(stab))).unwrap().value;
        prop_assume!(top <= Nat::from(3u32));
        let naive = naive_hypothesis(&space, &seq, &e, &lp);
        let decision = hypothesis_holds(&space, &seq, &e, &lp, 10_000_000).unwrap();
        prop_assert!(!decision.is_undecided());
        prop_assert_eq!(decision.holds(), naive);
    }

    #[test]
    fn range_union_grows_with_upper_end((_, seq) in instance(3, 5), m in 0u64..6, b in 0u64..8) {
        let narrow = range_union(&seq, &Nat::from(m), &Nat::from(b));
        let wide = range_union(&seq, &Nat::from(m), &Nat::from(b + 1));
        prop_assert!(narrow.is_subset(&wide));
    }

    #[test]
    fn bad_set_monotone(
        rows in prop::collection::vec(prop::collection::vec(0i64..=4, 3), 1..5),
        e1 in 1i64..=4,
        e2 in 1i64..=4,
        m in 0u64..5,
        b in 0u64..6,
    ) {
        let to_row = |r: &Vec<i64>| r.iter().map(|&v| rat(v, 4)).collect::<Vec<_>>();
        let fs = FuncSeq::new(rows[..rows.len() - 1].iter().map(to_row).collect(), to_row(rows.last().unwrap())).unwrap();
        let (small, large) = (rat(e1.min(e2), 4), rat(e1.max(e2), 4));
        let (m, b) = (Nat::from(m), Nat::from(b));
        prop_assert!(bad_set(&fs, &large, &m, &b).is_subset(&bad_set(&fs, &small, &m, &b)));
        prop_assert!(bad_set(&fs, &small, &m, &b).is_subset(&bad_set(&fs, &small, &m, &(b.clone() + 1u32))));
    }
}

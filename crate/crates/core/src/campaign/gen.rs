//! Seeded instance generators.
//!
//! Every instance is drawn from a ChaCha8 stream keyed by the campaign seed
//! and the instance id, so instances are independent of evaluation order.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::derived::TotalFn;
use crate::functional::Expr;
use crate::measure::{FiniteProbSpace, FuncSeq, PointSet, SetSeq};
use crate::num::{rat, Rational};

pub fn instance_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Random expression of depth at most `depth` with small constants.
pub fn random_expr(rng: &mut impl Rng, depth: usize) -> Expr {
    if depth == 0 || rng.gen_ratio(1, 5) {
        return Expr::constant(rng.gen_range(0..=3));
    }
    let d = depth - 1;
    match rng.gen_range(0..10) {
        0..=3 => Expr::apply(random_expr(rng, d)),
        4 | 5 => Expr::add(random_expr(rng, d), random_expr(rng, d)),
        6 | 7 => Expr::max(random_expr(rng, d), random_expr(rng, d)),
        8 => Expr::mul(random_expr(rng, d), random_expr(rng, d)),
        _ => Expr::iter(rng.gen_range(0..=2), random_expr(rng, d)),
    }
}

/// As [`random_expr`], redrawn until the result is monotone.
pub fn random_monotone_expr(rng: &mut impl Rng, depth: usize) -> Expr {
    loop {
        let e = random_expr(rng, depth);
        if e.is_monotone() {
            return e;
        }
    }
}

/// Uniform, or weights proportional to small integers.
pub fn random_space(rng: &mut impl Rng, max_points: usize) -> FiniteProbSpace {
    let k = rng.gen_range(1..=max_points);
    if rng.gen_ratio(1, 2) {
        return FiniteProbSpace::uniform(k);
    }
    let raw: Vec<i64> = (0..k).map(|_| rng.gen_range(1..=4)).collect();
    let total: i64 = raw.iter().sum();
    FiniteProbSpace::new(raw.iter().map(|&w| rat(w, total)).collect()).expect("weights sum to one")
}

/// Each point independently with probability `percent/100`.
fn random_subset(rng: &mut impl Rng, points: usize, percent: u32) -> PointSet {
    (0..points).filter(|_| rng.gen_ratio(percent, 100)).collect()
}

/// Sets thin out towards the tail, which is empty more often than not.
pub fn random_set_seq(rng: &mut impl Rng, points: usize, max_stab: usize) -> SetSeq {
    let stab = rng.gen_range(0..=max_stab);
    let density: u32 = rng.gen_range(20..=80);
    let prefix = (0..stab)
        .map(|n| random_subset(rng, points, density * (stab + 1 - n) as u32 / (stab as u32 + 1)))
        .collect();
    let tail = if rng.gen_ratio(3, 5) { PointSet::empty() } else { random_subset(rng, points, density / 2) };
    SetSeq::new(prefix, tail)
}

fn random_unit(rng: &mut impl Rng) -> Rational {
    let d = rng.gen_range(1..=4);
    rat(rng.gen_range(0..=d), d)
}

pub fn random_func_seq(rng: &mut impl Rng, points: usize, max_stab: usize) -> FuncSeq {
    let stab = rng.gen_range(0..=max_stab);
    let mut row = || (0..points).map(|_| random_unit(rng)).collect::<Vec<_>>();
    let prefix = (0..stab).map(|_| row()).collect();
    FuncSeq::new(prefix, row()).expect("values in [0,1]")
}

/// `(λ, λ′)` with `λ ∈ {1/4, 1/2, 3/4, 1}` and `λ′ = kλ/4`, `k ∈ {1, 2, 3}`.
pub fn random_budget(rng: &mut impl Rng) -> (Rational, Rational) {
    let lambda = rat(rng.gen_range(1..=4), 4);
    let lambda_prime = &lambda * rat(rng.gen_range(1..=3), 4);
    (lambda, lambda_prime)
}

pub fn random_epsilon(rng: &mut impl Rng) -> Rational {
    [rat(1, 4), rat(1, 3), rat(1, 2), rat(3, 4)].choose(rng).expect("nonempty").clone()
}

pub fn random_total_fn(rng: &mut impl Rng) -> TotalFn {
    if rng.gen_ratio(1, 2) {
        TotalFn::affine(rng.gen_range(1..=2), rng.gen_range(0..=3))
    } else {
        let values: Vec<u64> = (0..rng.gen_range(0..=6)).map(|_| rng.gen_range(0..=10)).collect();
        TotalFn::table(&values, rng.gen_range(0..=10))
    }
}

/// Nondecreasing sequence in `[0,1]` of the given length; constant afterwards.
pub fn random_monotone_sequence(rng: &mut impl Rng, len: usize) -> Vec<Rational> {
    let d = rng.gen_range(2..=12);
    let mut k = rng.gen_range(0..=d / 2);
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(rat(k, d));
        if k < d && rng.gen_ratio(3, 10) {
            k += rng.gen_range(1..=(d - k).min(3));
        }
    }
    out
}

/// Strictly increasing table for a cofinal sequence.
pub fn random_cofinal(rng: &mut impl Rng) -> Vec<usize> {
    let mut v = vec![rng.gen_range(0..=2)];
    for _ in 0..rng.gen_range(2..=5) {
        let last = *v.last().expect("nonempty");
        v.push(last + rng.gen_range(1..=3));
    }
    v
}

//! Reference implementations used only by the integration tests.
//!
//! Nothing here calls into the engine, the hypothesis search or the
//! expression evaluator of the library.
#![allow(dead_code)]

use std::collections::BTreeSet;

use metastable::measure::{FiniteProbSpace, PointSet, SetSeq};
use metastable::{Expr, Nat, Rational};
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

/// Something that can be evaluated against an oracle `ℕ → ℕ`.
pub trait Evaluate {
    fn eval(&self, f: &mut dyn FnMut(&Nat) -> Nat) -> Nat;
}

/// Direct structural evaluation of an expression.
pub struct Plain<'a>(pub &'a Expr);

fn eval_expr(e: &Expr, f: &mut dyn FnMut(&Nat) -> Nat) -> Nat {
    match e {
        Expr::Const(k) => k.clone(),
        Expr::Apply(a) => {
            let p = eval_expr(a, f);
            f(&p)
        }
        Expr::Add(l, r) => eval_expr(l, f) + eval_expr(r, f),
        Expr::Mul(l, r) => eval_expr(l, f) * eval_expr(r, f),
        Expr::Max(l, r) => eval_expr(l, f).max(eval_expr(r, f)),
        Expr::Iter(k, a) => {
            let mut v = eval_expr(a, f);
            let mut i = Nat::zero();
            while &i < k {
                v = f(&v);
                i += 1u32;
            }
            v
        }
    }
}

impl Evaluate for Plain<'_> {
    fn eval(&self, f: &mut dyn FnMut(&Nat) -> Nat) -> Nat {
        eval_expr(self.0, f)
    }
}

/// `M_1(m ↦ max_{n ∈ [m, F(m)]} F_2(n))`, with `{m}` when `F(m) < m`.
pub struct Composed<'a> {
    pub m1: &'a Expr,
    pub f2: &'a dyn Fn(&Nat) -> Nat,
}

impl Evaluate for Composed<'_> {
    fn eval(&self, f: &mut dyn FnMut(&Nat) -> Nat) -> Nat {
        let f2 = self.f2;
        let mut g = |m: &Nat| {
            let top = f(m);
            let mut best = f2(m);
            let mut n = m.clone();
            while n < top {
                n += 1u32;
                best = best.max(f2(&n));
            }
            best
        };
        eval_expr(self.m1, &mut g)
    }
}

/// The bar recursion written out literally: no memo, no cycle detection,
/// `⌈2^{m+1}/δ⌉` iterations at depth `m`.
pub struct Transcription<'a> {
    functional: &'a dyn Evaluate,
    delta: Rational,
    steps: u64,
    max_steps: u64,
    max_depth: usize,
}

impl<'a> Transcription<'a> {
    pub fn new(functional: &'a dyn Evaluate, lambda: Rational, lambda_prime: Rational, max_steps: u64) -> Self {
        assert!(lambda > lambda_prime && lambda_prime > Rational::zero());
        Transcription { functional, delta: lambda - lambda_prime, steps: 0, max_steps, max_depth: 200 }
    }

    /// `M′`, or `None` when the step or depth budget runs out.
    pub fn bound(mut self) -> Option<Nat> {
        self.node(&mut Vec::new())
    }

    fn iterations(&self, depth: usize) -> Nat {
        let num = BigUint::one() << (depth + 1);
        let q = Rational::from_integer((num * self.delta.denom().magnitude()).into()) / Rational::from_integer(self.delta.numer().clone());
        let (d, r) = q.numer().magnitude().div_rem(q.denom().magnitude());
        if r.is_zero() {
            d
        } else {
            d + 1u32
        }
    }

    fn node(&mut self, sigma: &mut Vec<Nat>) -> Option<Nat> {
        self.steps += 1;
        if self.steps > self.max_steps || sigma.len() > self.max_depth {
            return None;
        }
        let len = sigma.len();
        let mut secured = true;
        let value = {
            let s: &Vec<Nat> = sigma;
            self.functional.eval(&mut |p: &Nat| match p.to_usize() {
                Some(i) if i < len => s[i].clone(),
                _ => {
                    secured = false;
                    Nat::zero()
                }
            })
        };
        if secured {
            return Some(value);
        }
        let count = self.iterations(len);
        let mut current = Nat::zero();
        let mut best = Nat::zero();
        let mut i = Nat::zero();
        while i < count {
            sigma.push(current.clone());
            let next = self.node(sigma);
            sigma.pop();
            let next = next?;
            best = best.clone().max(next.clone());
            current = next;
            i += 1u32;
        }
        Some(best)
    }
}

pub fn transcribe_expr(e: &Expr, lambda: &Rational, lambda_prime: &Rational, max_steps: u64) -> Option<Nat> {
    Transcription::new(&Plain(e), lambda.clone(), lambda_prime.clone(), max_steps).bound()
}

fn mu(space: &FiniteProbSpace, set: &BTreeSet<usize>) -> Rational {
    set.iter().map(|&x| space.weights()[x].clone()).sum()
}

fn set_at(seq: &SetSeq, n: usize) -> BTreeSet<usize> {
    seq.get(n).iter().collect()
}

/// Unpruned search over `F : {0..B} → {0..max(B, N)}`, zero beyond `B`,
/// for `∀F μ(⋂_{m ≤ M(F)} ⋃_{n ∈ [m, F(m)]} A_n) < λ′`.
pub fn naive_hypothesis(space: &FiniteProbSpace, seq: &SetSeq, e: &Expr, lambda_prime: &Rational) -> bool {
    let stab = seq.stab_index();
    let top = Plain(e).eval(&mut |p: &Nat| p.clone().max(Nat::from(stab)));
    let b = top.to_usize().expect("small");
    let values = b.max(stab) + 1;
    let total = values.pow(b as u32 + 1);
    for code in 0..total {
        let mut c = code;
        let f: Vec<usize> = (0..=b)
            .map(|_| {
                let v = c % values;
                c /= values;
                v
            })
            .collect();
        let lookup = |m: usize| f.get(m).copied().unwrap_or(0);
        let big_m = Plain(e).eval(&mut |p: &Nat| Nat::from(p.to_usize().map_or(0, lookup))).to_usize().expect("small");
        let mut body: Option<BTreeSet<usize>> = None;
        for m in 0..=big_m {
            let hi = lookup(m);
            let mut u = BTreeSet::new();
            if hi >= m {
                for n in m..=hi.min(m.max(stab)) {
                    u.extend(set_at(seq, n));
                }
            }
            body = Some(match body {
                None => u,
                Some(prev) => prev.intersection(&u).copied().collect(),
            });
        }
        if &mu(space, &body.unwrap_or_default()) >= lambda_prime {
            return false;
        }
    }
    true
}

pub fn point_set(v: &[usize]) -> PointSet {
    v.iter().copied().collect()
}

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::EngineError;
use crate::num::{ceil_nat, fmt_rational, pow2, serde_rational, Nat, Rational};

/// The pair `λ > λ′ > 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    #[serde(with = "serde_rational")]
    lambda: Rational,
    #[serde(with = "serde_rational")]
    lambda_prime: Rational,
}

impl Budget {
    pub fn new(lambda: Rational, lambda_prime: Rational) -> Result<Self, EngineError> {
        if !(lambda_prime.is_positive() && lambda > lambda_prime) {
            return Err(EngineError::InvalidBudget {
                lambda: fmt_rational(&lambda),
                lambda_prime: fmt_rational(&lambda_prime),
            });
        }
        Ok(Budget { lambda, lambda_prime })
    }

    pub fn lambda(&self) -> &Rational {
        &self.lambda
    }

    pub fn lambda_prime(&self) -> &Rational {
        &self.lambda_prime
    }

    /// `λ − λ′`
    pub fn gap(&self) -> Rational {
        &self.lambda - &self.lambda_prime
    }
}

/// Per-depth share `w_m` of the error budget `λ − λ′`.
///
/// An unsecured node at depth `m` iterates `⌈1/w_m⌉` times. The weights used
/// along any branch must sum to at most `λ − λ′`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum WeightSchedule {
    /// `w_m = (λ − λ′)/2^{m+1}`
    #[default]
    Halving,
    /// All of `λ − λ′` at depth 0, nothing deeper.
    Concentrated,
    /// Explicit weights for depths `0..len`, zero beyond.
    Explicit(Vec<Rational>),
}

impl WeightSchedule {
    pub fn weight(&self, depth: usize, budget: &Budget) -> Rational {
        match self {
            WeightSchedule::Halving => budget.gap() / Rational::from_integer(pow2(depth + 1).into()),
            WeightSchedule::Concentrated => {
                if depth == 0 {
                    budget.gap()
                } else {
                    Rational::zero()
                }
            }
            WeightSchedule::Explicit(w) => w.get(depth).cloned().unwrap_or_else(Rational::zero),
        }
    }

    pub fn validate(&self, budget: &Budget) -> Result<(), EngineError> {
        if let WeightSchedule::Explicit(w) = self {
            if w.iter().any(|x| x.is_negative()) {
                return Err(EngineError::InvalidSchedule("negative weight".into()));
            }
            let total: Rational = w.iter().cloned().sum();
            if total > budget.gap() {
                return Err(EngineError::InvalidSchedule(format!(
                    "weights sum to {} which exceeds lambda - lambda' = {}",
                    fmt_rational(&total),
                    fmt_rational(&budget.gap())
                )));
            }
        }
        Ok(())
    }

    /// `"default"`, `"concentrated"` or `"explicit:w0;w1;…"`.
    pub fn name(&self) -> String {
        match self {
            WeightSchedule::Halving => "default".into(),
            WeightSchedule::Concentrated => "concentrated".into(),
            WeightSchedule::Explicit(w) => {
                let parts: Vec<String> = w.iter().map(fmt_rational).collect();
                format!("explicit:{}", parts.join(";"))
            }
        }
    }
}

/// `⌈1/w_m⌉`; under the default schedule this is `⌈2^{m+1}/(λ−λ′)⌉`.
pub fn iteration_count(depth: usize, budget: &Budget, schedule: &WeightSchedule) -> Result<Nat, EngineError> {
    let w = schedule.weight(depth, budget);
    if !w.is_positive() {
        return Err(EngineError::ZeroWeight { depth });
    }
    Ok(ceil_nat(&(Rational::one() / w)))
}

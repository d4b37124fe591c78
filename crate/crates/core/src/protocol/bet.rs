use crate::distributions::DiscreteDistribution;
use crate::error::{Error, Result};

/// Tolerance on `|P(f) − 1|` for numerically constructed bets.
pub const UNIT_EXPECTATION_TOLERANCE: f64 = 1e-9;

/// Sceptic's move: a nonnegative payoff with unit expectation under the
/// forecast it bets against.
///
/// Infinite payoffs are accepted on labels the forecast deems impossible.
#[derive(Debug, Clone, PartialEq)]
pub struct BetFunction {
    base: DiscreteDistribution,
    payoff: Vec<f64>,
}

impl BetFunction {
    /// The bet that leaves capital unchanged.
    pub fn vacuous(base: &DiscreteDistribution) -> Self {
        Self {
            payoff: vec![1.0; base.len()],
            base: base.clone(),
        }
    }

    pub fn base(&self) -> &DiscreteDistribution {
        &self.base
    }

    pub fn payoff(&self) -> &[f64] {
        &self.payoff
    }

    pub fn at(&self, outcome: usize) -> f64 {
        self.payoff[outcome]
    }

    pub fn into_payoff(self) -> Vec<f64> {
        self.payoff
    }
}

/// Checks that `payoff` is a legal bet against `base`.
pub fn validate_bet(base: &DiscreteDistribution, payoff: Vec<f64>, tol: f64) -> Result<BetFunction> {
    if payoff.len() != base.len() {
        return Err(Error::DimensionMismatch {
            expected: base.len(),
            got: payoff.len(),
        });
    }
    for (i, &v) in payoff.iter().enumerate() {
        if v.is_nan() || v < 0.0 {
            return Err(Error::NegativePayoff {
                label: base.space().label(i).to_string(),
                value: v,
            });
        }
    }
    let expectation = base.expectation(&payoff)?;
    if !((expectation - 1.0).abs() <= tol) {
        return Err(Error::UnfairBet { expectation });
    }
    Ok(BetFunction {
        base: base.clone(),
        payoff,
    })
}

/// Converts an additive stake into a multiplicative payoff,
/// `f(y) = 1 + stake·(y − center)/capital`.
///
/// The result has unit expectation whenever `center` is the forecast mean of
/// `values`. Fails if the stake would make some payoff negative.
pub fn additive_to_multiplicative(
    stake: f64,
    center: f64,
    capital: f64,
    values: &[f64],
) -> Result<Vec<f64>> {
    if !(capital > 0.0) {
        return Err(Error::NonPositiveCapital(capital));
    }
    values
        .iter()
        .map(|&y| {
            let payoff = 1.0 + stake * (y - center) / capital;
            // rounding can leave an exact zero slightly negative
            if payoff < -1e-12 {
                Err(Error::ProducesNegativePayoff { value: y, payoff })
            } else {
                Ok(payoff.max(0.0))
            }
        })
        .collect()
}

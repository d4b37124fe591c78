use rand::Rng;

use crate::distributions::DiscreteDistribution;
use crate::error::Result;
use crate::protocol::{Sceptic, SessionView};
use crate::rng::SessionRng;

/// Payoff placed on labels the forecast calls impossible. Such labels do not
/// enter the expectation, so any finite value keeps the bet fair.
pub const OFF_SUPPORT_PAYOFF: f64 = 1e6;

/// Never bets: `f ≡ 1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct VacuousSceptic;

impl Sceptic for VacuousSceptic {
    fn name(&self) -> String {
        "vacuous".into()
    }

    fn bet(&mut self, _: &SessionView<'_>, forecast: &DiscreteDistribution, _: &mut SessionRng) -> Result<Vec<f64>> {
        Ok(vec![1.0; forecast.len()])
    }
}

/// Bets the same payoff vector every step.
#[derive(Debug, Clone)]
pub struct FixedPayoffSceptic(pub Vec<f64>);

impl Sceptic for FixedPayoffSceptic {
    fn name(&self) -> String {
        "fixed".into()
    }

    fn bet(&mut self, _: &SessionView<'_>, _: &DiscreteDistribution, _: &mut SessionRng) -> Result<Vec<f64>> {
        Ok(self.0.clone())
    }
}

/// Random fair bets: independent weights in `[0, 2)`, rescaled to unit
/// expectation under the forecast.
#[derive(Debug, Clone, Copy, Default)]
pub struct RandomBetSceptic;

impl Sceptic for RandomBetSceptic {
    fn name(&self) -> String {
        "random".into()
    }

    fn bet(&mut self, _: &SessionView<'_>, forecast: &DiscreteDistribution, rng: &mut SessionRng) -> Result<Vec<f64>> {
        let w: Vec<f64> = (0..forecast.len()).map(|_| rng.gen_range(0.0..2.0)).collect();
        let mean = forecast.expectation(&w)?;
        if mean <= 0.0 {
            return Ok(vec![1.0; forecast.len()]);
        }
        Ok(w.iter().map(|x| x / mean).collect())
    }
}

/// Bets the likelihood ratio of Laplace's rule of succession against the
/// forecast: `f(y) = Q_n(y)/P_n(y)` with `Q_n(y) ∝ 1 + #{i < n : y_i = y}`
/// restricted to the forecast's support.
#[derive(Debug, Clone, Copy, Default)]
pub struct LaplaceSceptic;

impl Sceptic for LaplaceSceptic {
    fn name(&self) -> String {
        "laplace".into()
    }

    fn bet(&mut self, view: &SessionView<'_>, forecast: &DiscreteDistribution, _: &mut SessionRng) -> Result<Vec<f64>> {
        let mut counts = vec![1.0; forecast.len()];
        for &y in view.outcomes {
            counts[y] += 1.0;
        }
        let on_support: f64 = counts
            .iter()
            .zip(forecast.probs())
            .filter(|(_, &p)| p > 0.0)
            .map(|(c, _)| c)
            .sum();
        Ok(counts
            .iter()
            .zip(forecast.probs())
            .map(|(&c, &p)| {
                if p > 0.0 {
                    c / on_support / p
                } else {
                    OFF_SUPPORT_PAYOFF
                }
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::OutcomeSpace;
    use crate::protocol::validate_bet;
    use crate::rng::session_rng;

    fn view(outcomes: &[usize]) -> SessionView<'_> {
        SessionView {
            step: outcomes.len() + 1,
            outcomes,
            capital: 1.0,
        }
    }

    #[test]
    fn random_bets_are_fair() {
        let mut rng = session_rng(1);
        let p = DiscreteDistribution::new(OutcomeSpace::numeric(3).unwrap(), vec![0.2, 0.3, 0.5]).unwrap();
        for _ in 0..1000 {
            let f = RandomBetSceptic.bet(&view(&[]), &p, &mut rng).unwrap();
            assert!(validate_bet(&p, f, 1e-12).is_ok());
        }
    }

    #[test]
    fn laplace_bets_are_fair_and_follow_counts() {
        let mut rng = session_rng(1);
        let p = DiscreteDistribution::uniform(OutcomeSpace::binary());
        let f = LaplaceSceptic.bet(&view(&[1, 1, 1]), &p, &mut rng).unwrap();
        // Q = (1/5, 4/5)
        assert!((f[0] - 0.4).abs() < 1e-15 && (f[1] - 1.6).abs() < 1e-15);

        let partial = DiscreteDistribution::new(OutcomeSpace::numeric(3).unwrap(), vec![0.5, 0.5, 0.0]).unwrap();
        let f = LaplaceSceptic.bet(&view(&[2, 2]), &partial, &mut rng).unwrap();
        assert_eq!(f[2], OFF_SUPPORT_PAYOFF);
        assert!(validate_bet(&partial, f, 1e-12).is_ok());
    }
}

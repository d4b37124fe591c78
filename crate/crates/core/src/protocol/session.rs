use std::slice;

use super::bet::{validate_bet, BetFunction, UNIT_EXPECTATION_TOLERANCE};
use super::capital::CapitalProcess;
use crate::distributions::{DiscreteDistribution, OutcomeSpace};
use crate::error::{Error, Result};
use crate::rng::{session_rng, SessionRng};

/// What a Forecaster or Sceptic may look at before moving at step `step`.
#[derive(Debug, Clone, Copy)]
pub struct SessionView<'a> {
    pub step: usize,
    /// `y_1 … y_{step-1}`.
    pub outcomes: &'a [usize],
    /// The moving player's current capital (`K_{step-1}`); 1 for forecasters.
    pub capital: f64,
}

/// What Reality sees before announcing `y_step`: every forecast and bet of
/// the current round, in the order they were announced.
#[derive(Debug, Clone, Copy)]
pub struct RealityView<'a> {
    pub step: usize,
    pub outcomes: &'a [usize],
    pub forecasts: &'a [DiscreteDistribution],
    pub bets: &'a [BetFunction],
}

pub trait Forecaster {
    fn name(&self) -> String;
    fn forecast(&mut self, view: &SessionView<'_>, rng: &mut SessionRng) -> Result<DiscreteDistribution>;
}

pub trait Sceptic {
    fn name(&self) -> String;

    /// Payoff vector on the forecast's space; validated by the engine.
    fn bet(
        &mut self,
        view: &SessionView<'_>,
        forecast: &DiscreteDistribution,
        rng: &mut SessionRng,
    ) -> Result<Vec<f64>>;

    /// Called once Reality has moved and the capital is updated.
    fn settle(&mut self, _step: &StepRecord) {}
}

pub trait Reality {
    fn name(&self) -> String;
    fn outcome(&mut self, view: &RealityView<'_>, rng: &mut SessionRng) -> Result<usize>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub index: usize,
    pub forecast: DiscreteDistribution,
    pub bet: BetFunction,
    pub outcome: usize,
    pub capital_before: f64,
    pub capital_after: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SessionMeta {
    pub seed: u64,
    pub forecaster: String,
    pub sceptic: String,
    pub reality: String,
    /// First step at which capital hit zero; the discrediting attempt failed
    /// from there on.
    pub bankrupt_at: Option<usize>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub space: OutcomeSpace,
    pub steps: Vec<StepRecord>,
    pub capital: CapitalProcess,
    pub meta: SessionMeta,
}

impl Transcript {
    pub fn final_capital(&self) -> f64 {
        self.capital.current()
    }

    pub fn max_capital(&self) -> f64 {
        self.capital.running_max()
    }

    pub fn outcomes(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.outcome).collect()
    }

    pub fn forecasts(&self) -> Vec<DiscreteDistribution> {
        self.steps.iter().map(|s| s.forecast.clone()).collect()
    }

    /// Largest deviation, over `n`, between `ln K_n` and `Σ_{i≤n} ln f_i(y_i)`.
    /// Zero for a bankrupt process that is correctly absorbed.
    pub fn pathwise_log_residual(&self) -> f64 {
        let mut log_product = 0.0f64;
        let mut worst = 0.0f64;
        for (step, &log_k) in self.steps.iter().zip(&self.capital.log_values()[1..]) {
            log_product += step.bet.at(step.outcome).ln();
            if log_product == f64::NEG_INFINITY || log_k == f64::NEG_INFINITY {
                if log_product != log_k {
                    return f64::INFINITY;
                }
                continue;
            }
            worst = worst.max((log_product - log_k).abs());
        }
        worst
    }
}

/// Plays `n_steps` rounds of the testing protocol.
pub fn run_session(
    space: &OutcomeSpace,
    forecaster: &mut dyn Forecaster,
    sceptic: &mut dyn Sceptic,
    reality: &mut dyn Reality,
    n_steps: usize,
    seed: u64,
) -> Result<Transcript> {
    run_session_with_tolerance(
        space,
        forecaster,
        sceptic,
        reality,
        n_steps,
        seed,
        UNIT_EXPECTATION_TOLERANCE,
    )
}

pub fn run_session_with_tolerance(
    space: &OutcomeSpace,
    forecaster: &mut dyn Forecaster,
    sceptic: &mut dyn Sceptic,
    reality: &mut dyn Reality,
    n_steps: usize,
    seed: u64,
    bet_tolerance: f64,
) -> Result<Transcript> {
    let mut rng = session_rng(seed);
    let mut capital = CapitalProcess::new();
    let mut steps = Vec::with_capacity(n_steps);
    let mut outcomes = Vec::with_capacity(n_steps);
    let mut meta = SessionMeta {
        seed,
        forecaster: forecaster.name(),
        sceptic: sceptic.name(),
        reality: reality.name(),
        ..SessionMeta::default()
    };

    for n in 1..=n_steps {
        let forecast = forecaster.forecast(
            &SessionView {
                step: n,
                outcomes: &outcomes,
                capital: 1.0,
            },
            &mut rng,
        )?;
        if forecast.space() != space {
            return Err(Error::SpaceMismatch);
        }
        let capital_before = capital.current();
        let payoff = sceptic.bet(
            &SessionView {
                step: n,
                outcomes: &outcomes,
                capital: capital_before,
            },
            &forecast,
            &mut rng,
        )?;
        let bet = validate_bet(&forecast, payoff, bet_tolerance)?;
        let outcome = reality.outcome(
            &RealityView {
                step: n,
                outcomes: &outcomes,
                forecasts: slice::from_ref(&forecast),
                bets: slice::from_ref(&bet),
            },
            &mut rng,
        )?;
        if outcome >= space.len() {
            return Err(Error::DimensionMismatch {
                expected: space.len(),
                got: outcome + 1,
            });
        }
        let capital_after = capital.apply_factor(bet.at(outcome));
        if capital_after == 0.0 && meta.bankrupt_at.is_none() {
            meta.bankrupt_at = Some(n);
        }
        let record = StepRecord {
            index: n,
            forecast,
            bet,
            outcome,
            capital_before,
            capital_after,
        };
        sceptic.settle(&record);
        outcomes.push(outcome);
        steps.push(record);
    }

    Ok(Transcript {
        space: space.clone(),
        steps,
        capital,
        meta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::reality::{ConstantReality, HonestReality};

    struct Fixed(DiscreteDistribution);
    impl Forecaster for Fixed {
        fn name(&self) -> String {
            "fixed".into()
        }
        fn forecast(&mut self, _: &SessionView<'_>, _: &mut SessionRng) -> Result<DiscreteDistribution> {
            Ok(self.0.clone())
        }
    }

    struct Payoff(Vec<f64>);
    impl Sceptic for Payoff {
        fn name(&self) -> String {
            "payoff".into()
        }
        fn bet(&mut self, _: &SessionView<'_>, _: &DiscreteDistribution, _: &mut SessionRng) -> Result<Vec<f64>> {
            Ok(self.0.clone())
        }
    }

    /// Records what each strategy was shown.
    struct Peeking {
        seen: Vec<usize>,
    }
    impl Sceptic for Peeking {
        fn name(&self) -> String {
            "peek".into()
        }
        fn bet(&mut self, view: &SessionView<'_>, _: &DiscreteDistribution, _: &mut SessionRng) -> Result<Vec<f64>> {
            assert_eq!(view.outcomes.len(), view.step - 1);
            self.seen.push(view.outcomes.len());
            Ok(vec![1.0, 1.0])
        }
    }

    fn coin() -> OutcomeSpace {
        OutcomeSpace::binary()
    }

    #[test]
    fn vacuous_bets_keep_capital_at_one() {
        let space = coin();
        let mut f = Fixed(DiscreteDistribution::uniform(space.clone()));
        let t = run_session(&space, &mut f, &mut Payoff(vec![1.0, 1.0]), &mut HonestReality, 100, 1).unwrap();
        assert!(t.capital.values().iter().all(|&k| k == 1.0));
        assert_eq!(t.steps.len(), 100);
    }

    #[test]
    fn doubling_against_constant_reality() {
        let space = coin();
        let mut f = Fixed(DiscreteDistribution::uniform(space.clone()));
        let t = run_session(&space, &mut f, &mut Payoff(vec![2.0, 0.0]), &mut ConstantReality(0), 20, 1).unwrap();
        for (n, &k) in t.capital.values().iter().enumerate() {
            assert_eq!(k, 2f64.powi(n as i32));
        }
        assert_eq!(t.pathwise_log_residual(), 0.0);
    }

    #[test]
    fn empty_session() {
        let space = coin();
        let mut f = Fixed(DiscreteDistribution::uniform(space.clone()));
        let t = run_session(&space, &mut f, &mut Payoff(vec![1.0, 1.0]), &mut HonestReality, 0, 1).unwrap();
        assert!(t.steps.is_empty());
        assert_eq!(t.capital.values(), [1.0]);
    }

    #[test]
    fn bankruptcy_is_flagged_and_absorbing() {
        let space = coin();
        let mut f = Fixed(DiscreteDistribution::uniform(space.clone()));
        let t = run_session(&space, &mut f, &mut Payoff(vec![2.0, 0.0]), &mut ConstantReality(1), 5, 1).unwrap();
        assert_eq!(t.meta.bankrupt_at, Some(1));
        assert!(t.capital.values()[1..].iter().all(|&k| k == 0.0));
        assert_eq!(t.steps.len(), 5);
        assert_eq!(t.pathwise_log_residual(), 0.0);
    }

    #[test]
    fn illegal_bet_propagates() {
        let space = coin();
        let mut f = Fixed(DiscreteDistribution::uniform(space.clone()));
        let err = run_session(&space, &mut f, &mut Payoff(vec![2.0, 1.0]), &mut HonestReality, 3, 1).unwrap_err();
        assert_eq!(err, Error::UnfairBet { expectation: 1.5 });
    }

    #[test]
    fn forecast_on_wrong_space_rejected() {
        let space = coin();
        let mut f = Fixed(DiscreteDistribution::uniform(OutcomeSpace::numeric(3).unwrap()));
        let err = run_session(&space, &mut f, &mut Payoff(vec![1.0; 3]), &mut HonestReality, 1, 1).unwrap_err();
        assert_eq!(err, Error::SpaceMismatch);
    }

    #[test]
    fn sceptic_never_sees_current_outcome() {
        let space = coin();
        let mut f = Fixed(DiscreteDistribution::uniform(space.clone()));
        let mut s = Peeking { seen: vec![] };
        run_session(&space, &mut f, &mut s, &mut HonestReality, 10, 4).unwrap();
        assert_eq!(s.seen, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn seeded_sessions_repeat() {
        let space = coin();
        let run = |seed| {
            let mut f = Fixed(DiscreteDistribution::uniform(space.clone()));
            run_session(&space, &mut f, &mut Payoff(vec![1.5, 0.5]), &mut HonestReality, 50, seed).unwrap()
        };
        assert_eq!(run(11), run(11));
        assert_ne!(run(11).outcomes(), run(12).outcomes());
    }
}

//! Forcing in the additive protocol.
//!
//! ```text
//! K_0 := 1
//! FOR n = 1, …, N:
//!     Forecaster announces a_n
//!     Sceptic announces A_n
//!     Reality announces y_n ∈ [0, 1]
//!     K_n := K_{n-1} + A_n (y_n − a_n)
//! ```
//!
//! Kolmogorov's martingale for horizon `N`,
//!
//! ```text
//! K_n = 1 + (1/N)(Σ_{i≤n} d_i)² − (1/N) Σ_{i≤n} d_i²,   d_i = y_i − a_i,
//! ```
//!
//! is produced by the stake `A_n = (2/N) Σ_{i<n} d_i`. With `a_n, y_n` in
//! `[0, 1]`, `|d_i| ≤ 1`, so `K_n ≥ 1 − n/N ≥ 0`, and `K_N ≥ (Σ d_i)²/N`.
//! Hence either `K_N ≥ 1/δ` or the mean gap is below `(δN)^{-1/2}`.

use crate::distributions::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::protocol::{additive_to_multiplicative, Sceptic, SessionView, StepRecord};
use crate::rng::SessionRng;

/// Running sums of Kolmogorov's martingale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForcingState {
    pub horizon: usize,
    pub steps: usize,
    pub cumulative_sum: f64,
    pub cumulative_square_sum: f64,
    pub capital: f64,
}

impl ForcingState {
    pub fn new(horizon: usize) -> Self {
        Self {
            horizon,
            steps: 0,
            cumulative_sum: 0.0,
            cumulative_square_sum: 0.0,
            capital: 1.0,
        }
    }

    /// `1 + S²/N − Q/N` from the running sums.
    pub fn closed_form_capital(&self) -> f64 {
        let n = self.horizon as f64;
        1.0 + self.cumulative_sum * self.cumulative_sum / n - self.cumulative_square_sum / n
    }
}

/// Sceptic in the additive protocol.
pub trait AdditiveSceptic {
    fn name(&self) -> String;

    /// Stake `A_n` for the coming step.
    fn stake(&self) -> f64;

    /// Records `(a_n, y_n)` after Reality has moved.
    fn observe(&mut self, forecast: f64, outcome: f64) -> Result<()>;
}

fn check_unit(what: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfUnitInterval { what, value })
    }
}

#[derive(Debug, Clone)]
pub struct KolmogorovSceptic {
    state: ForcingState,
}

/// Kolmogorov's forcing strategy for horizon `horizon`.
pub fn kolmogorov_strategy(horizon: usize) -> KolmogorovSceptic {
    KolmogorovSceptic {
        state: ForcingState::new(horizon),
    }
}

impl KolmogorovSceptic {
    pub fn state(&self) -> &ForcingState {
        &self.state
    }
}

impl AdditiveSceptic for KolmogorovSceptic {
    fn name(&self) -> String {
        format!("kolmogorov[N={}]", self.state.horizon)
    }

    fn stake(&self) -> f64 {
        2.0 * self.state.cumulative_sum / self.state.horizon as f64
    }

    fn observe(&mut self, forecast: f64, outcome: f64) -> Result<()> {
        check_unit("forecast", forecast)?;
        check_unit("observation", outcome)?;
        let gap = outcome - forecast;
        let stake = self.stake();
        let s = &mut self.state;
        s.capital += stake * gap;
        s.cumulative_sum += gap;
        s.cumulative_square_sum += gap * gap;
        s.steps += 1;
        Ok(())
    }
}

/// Never stakes anything.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroStake;

impl AdditiveSceptic for ZeroStake {
    fn name(&self) -> String {
        "zero-stake".into()
    }

    fn stake(&self) -> f64 {
        0.0
    }

    fn observe(&mut self, _: f64, _: f64) -> Result<()> {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForcingStep {
    pub index: usize,
    pub forecast: f64,
    pub stake: f64,
    pub outcome: f64,
    pub capital: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForcingTranscript {
    pub horizon: usize,
    pub sceptic: String,
    pub steps: Vec<ForcingStep>,
    pub warnings: Vec<String>,
}

impl ForcingTranscript {
    pub fn final_capital(&self) -> f64 {
        self.steps.last().map_or(1.0, |s| s.capital)
    }

    /// Smallest capital over `K_0, …, K_n`.
    pub fn min_capital(&self) -> f64 {
        self.steps.iter().map(|s| s.capital).fold(1.0, f64::min)
    }

    /// `(1/N) Σ (y_i − a_i)`.
    pub fn mean_gap(&self) -> f64 {
        self.steps.iter().map(|s| s.outcome - s.forecast).sum::<f64>() / self.horizon as f64
    }
}

/// Plays the additive protocol on recorded forecasts and observations.
///
/// Forecasts outside `[0, 1]` are clamped with a warning (the nonnegativity
/// guarantee needs them in range); observations outside `[0, 1]` are an error.
pub fn run_forcing_session(
    sceptic: &mut dyn AdditiveSceptic,
    horizon: usize,
    forecasts: &[f64],
    outcomes: &[f64],
) -> Result<ForcingTranscript> {
    if forecasts.len() != outcomes.len() {
        return Err(Error::DimensionMismatch {
            expected: forecasts.len(),
            got: outcomes.len(),
        });
    }
    if forecasts.len() > horizon {
        return Err(Error::HorizonMismatch {
            expected: horizon,
            got: forecasts.len(),
        });
    }
    let mut capital = 1.0;
    let mut steps = Vec::with_capacity(forecasts.len());
    let mut warnings = Vec::new();
    for (i, (&raw, &y)) in forecasts.iter().zip(outcomes).enumerate() {
        let a = raw.clamp(0.0, 1.0);
        if a != raw {
            warnings.push(format!("step {}: forecast {raw} clamped to {a}", i + 1));
        }
        let stake = sceptic.stake();
        sceptic.observe(a, y)?;
        capital += stake * (y - a);
        steps.push(ForcingStep {
            index: i + 1,
            forecast: a,
            stake,
            outcome: y,
            capital,
        });
    }
    Ok(ForcingTranscript {
        horizon,
        sceptic: sceptic.name(),
        steps,
        warnings,
    })
}

/// Whether `K_N ≥ 1/δ` or `(1/N) Σ (y_i − a_i) < (δN)^{-1/2}`.
pub fn forcing_dichotomy_check(transcript: &ForcingTranscript, delta: f64) -> bool {
    let n = transcript.horizon as f64;
    transcript.final_capital() >= 1.0 / delta || transcript.mean_gap() < (delta * n).powf(-0.5)
}

/// Plays an additive strategy against classical devices.
///
/// Observations `y ∈ {0, …, m−1}` are rescaled to `y/(m−1)` and the forecast
/// to `½`, the additive stake `A'` becomes `A'/(m−1)` in original units, and
/// the multiplicative bet is `f(y) = 1 + A (y − (m−1)/2)/K_{n−1}`. The
/// multiplicative capital then equals the additive one at every step.
pub struct ClassicalForcingSceptic {
    inner: Box<dyn AdditiveSceptic + Send>,
    device: Option<usize>,
}

impl ClassicalForcingSceptic {
    pub fn new(inner: Box<dyn AdditiveSceptic + Send>) -> Self {
        Self {
            inner,
            device: None,
        }
    }

    /// The adapter around Kolmogorov's strategy.
    pub fn kolmogorov(horizon: usize) -> Self {
        Self::new(Box::new(kolmogorov_strategy(horizon)))
    }
}

impl Sceptic for ClassicalForcingSceptic {
    fn name(&self) -> String {
        format!("classical-forcing[{}]", self.inner.name())
    }

    fn bet(&mut self, view: &SessionView<'_>, forecast: &DiscreteDistribution, _: &mut SessionRng) -> Result<Vec<f64>> {
        let m = forecast.support_size();
        if m < 2 || forecast.probs()[..m].iter().any(|&p| p <= 0.0) {
            return Err(Error::Config(
                "classical forcing needs a uniform forecast on {0, …, m−1}".into(),
            ));
        }
        let scale = (m - 1) as f64;
        let stake = self.inner.stake() / scale;
        let values: Vec<f64> = (0..m).map(|y| y as f64).collect();
        let mut payoff = additive_to_multiplicative(stake, scale / 2.0, view.capital, &values)?;
        payoff.resize(forecast.len(), 1.0);
        self.device = Some(m);
        Ok(payoff)
    }

    fn settle(&mut self, step: &StepRecord) {
        let m = self.device.take().expect("bet precedes settlement");
        let scaled = step.outcome as f64 / (m - 1) as f64;
        // forecast 1/2 and scaled outcome are in range by construction
        self.inner
            .observe(0.5, scaled)
            .expect("rescaled classical observation lies in [0, 1]");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecasters::{ClassicalForecaster, DeviceSet};
    use crate::protocol::{run_session, ConstantReality, HonestReality, ScriptedReality};
    use rand::Rng;

    #[test]
    fn perfect_forecasts_keep_capital_at_one() {
        let a = vec![0.3; 10];
        let t = run_forcing_session(&mut kolmogorov_strategy(10), 10, &a, &a).unwrap();
        assert!(t.steps.iter().all(|s| s.capital == 1.0));
    }

    #[test]
    fn two_step_example() {
        let t = run_forcing_session(&mut kolmogorov_strategy(2), 2, &[0.5, 0.5], &[1.0, 1.0]).unwrap();
        assert_eq!(t.final_capital(), 1.25);
    }

    #[test]
    fn horizon_one_cancels() {
        let mut rng = crate::rng::session_rng(8);
        for _ in 0..100 {
            let (a, y): (f64, f64) = (rng.gen(), rng.gen());
            let t = run_forcing_session(&mut kolmogorov_strategy(1), 1, &[a], &[y]).unwrap();
            assert_eq!(t.final_capital(), 1.0);
        }
    }

    #[test]
    fn capital_matches_closed_form() {
        let mut rng = crate::rng::session_rng(2);
        let n = 50;
        let mut k = kolmogorov_strategy(n);
        for _ in 0..n {
            let (a, y): (f64, f64) = (rng.gen(), rng.gen::<f64>().round());
            k.observe(a, y).unwrap();
            assert!((k.state().capital - k.state().closed_form_capital()).abs() < 1e-12);
            assert!(k.state().capital >= 0.0);
        }
    }

    #[test]
    fn out_of_range_inputs() {
        let err = run_forcing_session(&mut kolmogorov_strategy(2), 2, &[0.5], &[1.5]).unwrap_err();
        assert!(matches!(err, Error::OutOfUnitInterval { what: "observation", .. }));
        let t = run_forcing_session(&mut kolmogorov_strategy(2), 2, &[1.7, -0.2], &[1.0, 0.0]).unwrap();
        assert_eq!(t.warnings.len(), 2);
        assert_eq!(t.steps[0].forecast, 1.0);
        assert!(kolmogorov_strategy(1).observe(2.0, 0.0).is_err());
    }

    #[test]
    fn dichotomy_examples() {
        let n = 64;
        let ones = vec![1.0; n];
        let halves = vec![0.5; n];
        let t = run_forcing_session(&mut kolmogorov_strategy(n), n, &halves, &ones).unwrap();
        assert!(forcing_dichotomy_check(&t, 0.25));
        assert!(t.final_capital() >= 4.0);

        let t = run_forcing_session(&mut kolmogorov_strategy(n), n, &halves, &halves).unwrap();
        assert_eq!(t.final_capital(), 1.0);
        assert!(forcing_dichotomy_check(&t, 0.25));
    }

    #[test]
    fn zero_stake_fails_dichotomy_when_gap_is_large() {
        let n = 16;
        let t = run_forcing_session(&mut ZeroStake, n, &vec![0.0; n], &vec![1.0; n]).unwrap();
        assert_eq!(t.final_capital(), 1.0);
        assert!(!forcing_dichotomy_check(&t, 0.25));
    }

    fn coin_session(
        sceptic: &mut ClassicalForcingSceptic,
        reality: &mut dyn crate::protocol::Reality,
        n: usize,
        seed: u64,
    ) -> crate::protocol::Transcript {
        let mut f = ClassicalForecaster::new(&DeviceSet::default(), vec![2]).unwrap();
        let space = f.space().clone();
        run_session(&space, &mut f, sceptic, reality, n, seed).unwrap()
    }

    #[test]
    fn biased_coin_is_discredited() {
        let n = 100;
        let t = coin_session(&mut ClassicalForcingSceptic::kolmogorov(n), &mut ConstantReality(1), n, 0);
        let delta = 0.04;
        assert!(t.final_capital() >= 1.0 / delta, "{}", t.final_capital());
    }

    #[test]
    fn zero_stake_adapter_is_vacuous() {
        let mut s = ClassicalForcingSceptic::new(Box::new(ZeroStake));
        let t = coin_session(&mut s, &mut HonestReality, 50, 1);
        assert!(t.capital.values().iter().all(|&k| k == 1.0));
    }

    #[test]
    fn multiplicative_capital_tracks_additive_capital() {
        let defaults = DeviceSet::default();
        let mut rng = crate::rng::session_rng(4);
        let n = 120;
        let schedule: Vec<usize> = (0..n).map(|i| defaults.sizes()[i % 3]).collect();
        let outcomes: Vec<usize> = schedule.iter().map(|&m| rng.gen_range(0..m)).collect();
        let mut f = ClassicalForecaster::new(&defaults, schedule.clone()).unwrap();
        let space = f.space().clone();
        let mut sceptic = ClassicalForcingSceptic::kolmogorov(n);
        let t = run_session(&space, &mut f, &mut sceptic, &mut ScriptedReality::new(outcomes.clone()), n, 0).unwrap();

        let a = vec![0.5; n];
        let y: Vec<f64> = outcomes
            .iter()
            .zip(&schedule)
            .map(|(&o, &m)| o as f64 / (m - 1) as f64)
            .collect();
        let additive = run_forcing_session(&mut kolmogorov_strategy(n), n, &a, &y).unwrap();
        for (step, add) in t.steps.iter().zip(&additive.steps) {
            assert!((step.capital_after - add.capital).abs() <= 1e-12 * add.capital.max(1.0));
        }
    }
}

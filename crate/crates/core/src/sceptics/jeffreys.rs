//! Betting against two forecasters.
//!
//! **Team strategy.** Betting against `P¹` and `P²` with the normalized
//! geometric mean `G = √(P¹P²)/H` as the alternative,
//!
//! ```text
//! f¹ = G / P¹,   f² = G / P²,   √(f¹(y) f²(y)) = 1/H(P¹, P²)   for every y,
//! ```
//!
//! so the geometric mean of the two capitals grows by exactly `1/H_i` per
//! step, whatever Reality does.
//!
//! **Tracking strategy.** Sceptic II splits its unit capital into two
//! accounts of ½. One bets the likelihood ratio `(P²/P¹)/χ(P¹,P²)`, the
//! other transfers Sceptic I's bet, `(P¹/P²) f¹`. With
//! `X = ∏ P²_i(y_i)/P¹_i(y_i)`,
//!
//! ```text
//! K²_n = ½ X ∏ 1/χ_i + ½ K¹_n / X ≥ √(K¹_n ∏ 1/χ_i).
//! ```

use crate::distributions::{chi2_distance, chi2_integral, hellinger_distance, hellinger_integral};
use crate::distributions::{DiscreteDistribution, OutcomeSpace};
use crate::error::{Error, Result};
use crate::protocol::{
    validate_bet, BetFunction, CapitalProcess, Forecaster, Reality, RealityView, Sceptic,
    SessionMeta, SessionView, StepRecord, UNIT_EXPECTATION_TOLERANCE,
};
use crate::rng::{session_rng, SessionRng};

/// Capitals against Forecaster I and Forecaster II.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualCapital {
    pub k1: f64,
    pub k2: f64,
}

impl DualCapital {
    pub fn geometric_mean(&self) -> f64 {
        (self.k1 * self.k2).sqrt()
    }
}

fn require_full_support(p: &DiscreteDistribution) -> Result<()> {
    match p.probs().iter().position(|&w| w <= 0.0) {
        Some(i) => Err(Error::ZeroWeight(p.space().label(i).to_string())),
        None => Ok(()),
    }
}

/// The team bets `(f¹, f²)` against `P¹` and `P²`.
pub fn jeffreys_team_bets(
    p1: &DiscreteDistribution,
    p2: &DiscreteDistribution,
) -> Result<(BetFunction, BetFunction)> {
    require_full_support(p1)?;
    require_full_support(p2)?;
    let h = hellinger_integral(p1, p2)?;
    if h <= 0.0 {
        return Err(Error::DisjointForecasts);
    }
    let (f1, f2): (Vec<f64>, Vec<f64>) = p1
        .probs()
        .iter()
        .zip(p2.probs())
        .map(|(&a, &b)| {
            let g = (a * b).sqrt() / h;
            (g / a, g / b)
        })
        .unzip();
    Ok((
        validate_bet(p1, f1, UNIT_EXPECTATION_TOLERANCE)?,
        validate_bet(p2, f2, UNIT_EXPECTATION_TOLERANCE)?,
    ))
}

/// A single Sceptic betting against both forecasters.
pub trait TeamSceptic {
    fn name(&self) -> String;

    fn bets(
        &mut self,
        view: &SessionView<'_>,
        capitals: DualCapital,
        p1: &DiscreteDistribution,
        p2: &DiscreteDistribution,
        rng: &mut SessionRng,
    ) -> Result<(Vec<f64>, Vec<f64>)>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct JeffreysTeam;

impl TeamSceptic for JeffreysTeam {
    fn name(&self) -> String {
        "jeffreys-team".into()
    }

    fn bets(
        &mut self,
        _: &SessionView<'_>,
        _: DualCapital,
        p1: &DiscreteDistribution,
        p2: &DiscreteDistribution,
        _: &mut SessionRng,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let (f1, f2) = jeffreys_team_bets(p1, p2)?;
        Ok((f1.into_payoff(), f2.into_payoff()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TeamStep {
    pub index: usize,
    pub forecast_1: DiscreteDistribution,
    pub forecast_2: DiscreteDistribution,
    pub bet_1: BetFunction,
    pub bet_2: BetFunction,
    pub outcome: usize,
    pub capital_1: f64,
    pub capital_2: f64,
}

/// Transcript of a session with two forecasters and a team Sceptic.
#[derive(Debug, Clone, PartialEq)]
pub struct DualTranscript {
    pub space: OutcomeSpace,
    pub steps: Vec<TeamStep>,
    pub capital_1: CapitalProcess,
    pub capital_2: CapitalProcess,
    pub meta: SessionMeta,
}

impl DualTranscript {
    /// `ln √(K¹_n K²_n)` for `n = 0, …, N`.
    pub fn log_geometric_means(&self) -> Vec<f64> {
        self.capital_1
            .log_values()
            .iter()
            .zip(self.capital_2.log_values())
            .map(|(a, b)| 0.5 * (a + b))
            .collect()
    }

    /// `H(P¹_i, P²_i)` recomputed from the recorded forecasts.
    pub fn hellinger_integrals(&self) -> Result<Vec<f64>> {
        self.steps
            .iter()
            .map(|s| hellinger_integral(&s.forecast_1, &s.forecast_2))
            .collect()
    }

    /// Smallest value over `n` of `ln K¹_n + ln K²_n − Σ_{i≤n} ρ_H(P¹_i, P²_i)`.
    /// Nonnegative for the team strategy.
    pub fn hellinger_growth_slack(&self) -> Result<f64> {
        let mut distance_sum = 0.0;
        let mut worst = 0.0f64;
        for (n, s) in self.steps.iter().enumerate() {
            distance_sum += hellinger_distance(&s.forecast_1, &s.forecast_2)?;
            let total = self.capital_1.log_values()[n + 1] + self.capital_2.log_values()[n + 1];
            worst = worst.min(total - distance_sum);
        }
        Ok(worst)
    }
}

/// Largest deviation `max_n |ln √(K¹_n K²_n) − Σ_{i≤n} ln(1/H_i)|`.
pub fn geometric_identity(transcript: &DualTranscript) -> Result<f64> {
    let means = transcript.log_geometric_means();
    let mut expected = 0.0;
    let mut worst = (means[0] - expected).abs();
    for (h, mean) in transcript.hellinger_integrals()?.iter().zip(&means[1..]) {
        expected -= h.ln();
        worst = worst.max((mean - expected).abs());
    }
    Ok(worst)
}

/// Both forecasters announce, the team bets against each, Reality moves and
/// the two capitals are updated separately.
pub fn run_team_session(
    space: &OutcomeSpace,
    forecaster_1: &mut dyn Forecaster,
    forecaster_2: &mut dyn Forecaster,
    sceptic: &mut dyn TeamSceptic,
    reality: &mut dyn Reality,
    n_steps: usize,
    seed: u64,
) -> Result<DualTranscript> {
    let mut rng = session_rng(seed);
    let mut capital_1 = CapitalProcess::new();
    let mut capital_2 = CapitalProcess::new();
    let mut steps = Vec::with_capacity(n_steps);
    let mut outcomes = Vec::with_capacity(n_steps);
    let mut meta = SessionMeta {
        seed,
        forecaster: format!("{} | {}", forecaster_1.name(), forecaster_2.name()),
        sceptic: sceptic.name(),
        reality: reality.name(),
        ..SessionMeta::default()
    };

    for n in 1..=n_steps {
        let view = SessionView {
            step: n,
            outcomes: &outcomes,
            capital: 1.0,
        };
        let p1 = forecaster_1.forecast(&view, &mut rng)?;
        let p2 = forecaster_2.forecast(&view, &mut rng)?;
        if p1.space() != space || p2.space() != space {
            return Err(Error::SpaceMismatch);
        }
        let capitals = DualCapital {
            k1: capital_1.current(),
            k2: capital_2.current(),
        };
        let (raw_1, raw_2) = sceptic.bets(&view, capitals, &p1, &p2, &mut rng)?;
        let bet_1 = validate_bet(&p1, raw_1, UNIT_EXPECTATION_TOLERANCE)?;
        let bet_2 = validate_bet(&p2, raw_2, UNIT_EXPECTATION_TOLERANCE)?;
        let forecasts = [p1, p2];
        let bets = [bet_1, bet_2];
        let outcome = reality.outcome(
            &RealityView {
                step: n,
                outcomes: &outcomes,
                forecasts: &forecasts,
                bets: &bets,
            },
            &mut rng,
        )?;
        let [p1, p2] = forecasts;
        let [bet_1, bet_2] = bets;
        let k1 = capital_1.apply_factor(bet_1.at(outcome));
        let k2 = capital_2.apply_factor(bet_2.at(outcome));
        if (k1 == 0.0 || k2 == 0.0) && meta.bankrupt_at.is_none() {
            meta.bankrupt_at = Some(n);
        }
        outcomes.push(outcome);
        steps.push(TeamStep {
            index: n,
            forecast_1: p1,
            forecast_2: p2,
            bet_1,
            bet_2,
            outcome,
            capital_1: k1,
            capital_2: k2,
        });
    }

    Ok(DualTranscript {
        space: space.clone(),
        steps,
        capital_1,
        capital_2,
        meta,
    })
}

/// The two half-strategies of Sceptic II: the likelihood-ratio bet
/// `(P²/P¹)/χ(P¹,P²)` and the transferred bet `(P¹/P²) f¹`.
pub fn tracking_components(
    p1: &DiscreteDistribution,
    p2: &DiscreteDistribution,
    f1: &BetFunction,
) -> Result<(BetFunction, BetFunction)> {
    require_full_support(p1)?;
    require_full_support(p2)?;
    if f1.base() != p1 {
        return Err(Error::Config("Sceptic I's bet must be placed against P¹".into()));
    }
    let chi = chi2_integral(p1, p2)?;
    if !chi.is_finite() {
        return Err(Error::InfiniteChiSquared);
    }
    let (ratio, transfer): (Vec<f64>, Vec<f64>) = p1
        .probs()
        .iter()
        .zip(p2.probs())
        .zip(f1.payoff())
        .map(|((&a, &b), &f)| (b / a / chi, a / b * f))
        .unzip();
    Ok((
        validate_bet(p2, ratio, UNIT_EXPECTATION_TOLERANCE)?,
        validate_bet(p2, transfer, UNIT_EXPECTATION_TOLERANCE)?,
    ))
}

/// Equal-weight mix of the two tracking components; this is Sceptic II's
/// bet while both accounts hold the same capital (in particular at step 1).
pub fn tracking_bets(
    p1: &DiscreteDistribution,
    p2: &DiscreteDistribution,
    f1: &BetFunction,
) -> Result<BetFunction> {
    let (ratio, transfer) = tracking_components(p1, p2, f1)?;
    let mixed = ratio
        .payoff()
        .iter()
        .zip(transfer.payoff())
        .map(|(a, b)| 0.5 * a + 0.5 * b)
        .collect();
    validate_bet(p2, mixed, UNIT_EXPECTATION_TOLERANCE)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackingStep {
    pub index: usize,
    pub forecast_1: DiscreteDistribution,
    pub forecast_2: DiscreteDistribution,
    pub bet_1: BetFunction,
    /// Sceptic II's effective bet: the capital-weighted mix of its accounts.
    pub bet_2: BetFunction,
    pub outcome: usize,
    pub chi2: f64,
    pub capital_1: f64,
    pub capital_2: f64,
    /// `ln` of the likelihood-ratio and transfer accounts after the step.
    pub log_accounts: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackingTranscript {
    pub space: OutcomeSpace,
    pub steps: Vec<TrackingStep>,
    pub capital_1: CapitalProcess,
    pub capital_2: CapitalProcess,
    pub meta: SessionMeta,
}

impl TrackingTranscript {
    /// `min_n [ln K²_n − ½(ln K¹_n − Σ_{i≤n} ln χ_i)]`; nonnegative when the
    /// tracking guarantee holds.
    pub fn guarantee_slack(&self) -> f64 {
        let mut log_chi = 0.0;
        let mut worst = 0.0f64;
        for (n, s) in self.steps.iter().enumerate() {
            log_chi += s.chi2.ln();
            let bound = 0.5 * (self.capital_1.log_values()[n + 1] - log_chi);
            let k2 = self.capital_2.log_values()[n + 1];
            if bound == f64::NEG_INFINITY {
                continue;
            }
            worst = worst.min(k2 - bound);
        }
        worst
    }

    /// `min_n [ln K²_n − ½ ln K¹_n + ½ Σ_{i≤n} ρ_χ(P¹_i, P²_i)]`.
    pub fn crude_guarantee_slack(&self) -> Result<f64> {
        let mut distance_sum = 0.0;
        let mut worst = 0.0f64;
        for (n, s) in self.steps.iter().enumerate() {
            distance_sum += chi2_distance(&s.forecast_1, &s.forecast_2)?;
            let k1 = self.capital_1.log_values()[n + 1];
            if k1 == f64::NEG_INFINITY {
                continue;
            }
            let k2 = self.capital_2.log_values()[n + 1];
            worst = worst.min(k2 - 0.5 * k1 + 0.5 * distance_sum);
        }
        Ok(worst)
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    let hi = a.max(b);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + ((a - hi).exp() + (b - hi).exp()).ln()
}

/// Sceptic I plays `sceptic_1` against Forecaster I; Sceptic II plays the
/// tracking strategy against Forecaster II with two half-accounts.
pub fn run_tracking_session(
    space: &OutcomeSpace,
    forecaster_1: &mut dyn Forecaster,
    forecaster_2: &mut dyn Forecaster,
    sceptic_1: &mut dyn Sceptic,
    reality: &mut dyn Reality,
    n_steps: usize,
    seed: u64,
) -> Result<TrackingTranscript> {
    let mut rng = session_rng(seed);
    let mut capital_1 = CapitalProcess::new();
    let mut capital_2 = CapitalProcess::new();
    let half = 0.5f64.ln();
    let mut accounts = (half, half);
    let mut steps = Vec::with_capacity(n_steps);
    let mut outcomes = Vec::with_capacity(n_steps);
    let mut meta = SessionMeta {
        seed,
        forecaster: format!("{} | {}", forecaster_1.name(), forecaster_2.name()),
        sceptic: format!("{} | tracking", sceptic_1.name()),
        reality: reality.name(),
        ..SessionMeta::default()
    };

    for n in 1..=n_steps {
        let fview = SessionView {
            step: n,
            outcomes: &outcomes,
            capital: 1.0,
        };
        let p1 = forecaster_1.forecast(&fview, &mut rng)?;
        let p2 = forecaster_2.forecast(&fview, &mut rng)?;
        if p1.space() != space || p2.space() != space {
            return Err(Error::SpaceMismatch);
        }
        let view_1 = SessionView {
            step: n,
            outcomes: &outcomes,
            capital: capital_1.current(),
        };
        let raw_1 = sceptic_1.bet(&view_1, &p1, &mut rng)?;
        let bet_1 = validate_bet(&p1, raw_1, UNIT_EXPECTATION_TOLERANCE)?;
        let (ratio, transfer) = tracking_components(&p1, &p2, &bet_1)?;
        let chi2 = chi2_integral(&p1, &p2)?;

        let total = log_add(accounts.0, accounts.1);
        let w = (accounts.0 - total).exp();
        let mixed = ratio
            .payoff()
            .iter()
            .zip(transfer.payoff())
            .map(|(a, b)| w * a + (1.0 - w) * b)
            .collect();
        let bet_2 = validate_bet(&p2, mixed, UNIT_EXPECTATION_TOLERANCE)?;

        let forecasts = [p1, p2];
        let bets = [bet_1, bet_2];
        let outcome = reality.outcome(
            &RealityView {
                step: n,
                outcomes: &outcomes,
                forecasts: &forecasts,
                bets: &bets,
            },
            &mut rng,
        )?;
        let [p1, p2] = forecasts;
        let [bet_1, bet_2] = bets;

        let capital_before = capital_1.current();
        let k1 = capital_1.apply_factor(bet_1.at(outcome));
        accounts.0 += ratio.at(outcome).ln();
        accounts.1 += transfer.at(outcome).ln();
        let k2 = capital_2.push_log(log_add(accounts.0, accounts.1));
        if (k1 == 0.0 || k2 == 0.0) && meta.bankrupt_at.is_none() {
            meta.bankrupt_at = Some(n);
        }
        sceptic_1.settle(&StepRecord {
            index: n,
            forecast: p1.clone(),
            bet: bet_1.clone(),
            outcome,
            capital_before,
            capital_after: k1,
        });
        outcomes.push(outcome);
        steps.push(TrackingStep {
            index: n,
            forecast_1: p1,
            forecast_2: p2,
            bet_1,
            bet_2,
            outcome,
            chi2,
            capital_1: k1,
            capital_2: k2,
            log_accounts: accounts,
        });
    }

    Ok(TrackingTranscript {
        space: space.clone(),
        steps,
        capital_1,
        capital_2,
        meta,
    })
}

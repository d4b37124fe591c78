//! Monte Carlo check of Ville's inequality: under honest forecasts
//! `Pr{max_n K_n ≥ c} ≤ 1/c`.

use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, RealityKind, ScepticKind};
use crate::error::{Error, Result};
use crate::protocol::{run_session_with_tolerance, HonestReality};
use crate::rng::path_seed;
use crate::sceptics::{run_team_session, JeffreysTeam};

/// Standard errors allowed above the bound before a violation is flagged.
pub const SLACK_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VilleEstimate {
    pub threshold: f64,
    pub exceedances: usize,
    pub frequency: f64,
    /// `1/c`.
    pub bound: f64,
    /// Binomial standard error at the bound, `√((1/c)(1 − 1/c)/M)`.
    pub sigma: f64,
    /// Wilson score interval for the frequency at `z = 3`.
    pub ci_low: f64,
    pub ci_high: f64,
    /// `frequency > bound + 3σ`.
    pub violation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VilleReport {
    pub paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    /// Whose capital is tracked.
    pub tracked: String,
    pub estimates: Vec<VilleEstimate>,
}

impl VilleReport {
    pub fn any_violation(&self) -> bool {
        self.estimates.iter().any(|e| e.violation)
    }
}

fn wilson(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Exceedance frequencies of per-path running maxima.
pub fn ville_estimates(maxima: &[f64], thresholds: &[f64]) -> Vec<VilleEstimate> {
    let m = maxima.len();
    thresholds
        .iter()
        .map(|&c| {
            let exceedances = maxima.iter().filter(|&&k| k >= c).count();
            let frequency = exceedances as f64 / m as f64;
            let bound = 1.0 / c;
            let sigma = (bound * (1.0 - bound) / m as f64).sqrt();
            let (ci_low, ci_high) = wilson(exceedances, m, SLACK_SIGMAS);
            VilleEstimate {
                threshold: c,
                exceedances,
                frequency,
                bound,
                sigma,
                ci_low,
                ci_high,
                violation: frequency > bound + SLACK_SIGMAS * sigma,
            }
        })
        .collect()
}

/// Runs `config.paths` honest sessions and estimates `Pr{max_n K_n ≥ c}` for
/// each configured threshold.
///
/// With the team strategy the tracked capital is `K¹`, earned against the
/// forecaster Reality samples from. Other strategies play a single session
/// against the first forecaster.
pub fn monte_carlo_ville(config: &ExperimentConfig) -> Result<VilleReport> {
    config.validate()?;
    if config.reality != RealityKind::Honest {
        return Err(Error::Config(format!(
            "Ville experiments need Reality sampling from the forecasts, got {}",
            config.reality
        )));
    }
    let space = config.build_space()?;
    let team = match config.sceptic {
        ScepticKind::Team => true,
        ScepticKind::Tracking => {
            return Err(Error::Config("Ville experiments support single or team strategies".into()))
        }
        _ => false,
    };
    let maxima: Vec<f64> = (0..config.paths as u64)
        .into_par_iter()
        .map(|i| {
            let seed = path_seed(config.seed, i);
            let mut f1 = config.build_forecaster(&config.forecaster)?;
            if team {
                let mut f2 = config.build_forecaster(config.second_forecaster_kind()?)?;
                let t = run_team_session(
                    &space,
                    f1.as_mut(),
                    f2.as_mut(),
                    &mut JeffreysTeam,
                    &mut HonestReality,
                    config.n_steps,
                    seed,
                )?;
                Ok(t.capital_1.running_max())
            } else {
                let mut s = config.build_sceptic()?;
                let t = run_session_with_tolerance(
                    &space,
                    f1.as_mut(),
                    s.as_mut(),
                    &mut HonestReality,
                    config.n_steps,
                    seed,
                    config.tolerance,
                )?;
                Ok(t.max_capital())
            }
        })
        .collect::<Result<_>>()?;
    Ok(VilleReport {
        paths: config.paths,
        n_steps: config.n_steps,
        seed: config.seed,
        tracked: if team {
            "team capital against forecaster I".into()
        } else {
            format!("{} capital", config.sceptic)
        },
        estimates: ville_estimates(&maxima, &config.thresholds),
    })
}

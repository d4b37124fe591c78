//! Experiment runner.
//!
//! An [`ExperimentConfig`] names the components and sizes of a run; the
//! runner plays it and wraps the result in a versioned [`Report`]. Identical
//! configurations give byte-identical reports: every random draw descends
//! from the configured seed, and Monte Carlo paths are reduced in path order.

pub mod certificate;
pub mod config;
pub mod ingest;
pub mod report;
pub mod ville;

use std::sync::Arc;

pub use certificate::{
    mean_gap_event, upper_probability_certificate, Certificate, Counterexample, InstanceFamily,
    MAX_EXHAUSTIVE_HORIZON,
};
pub use config::{
    BiasedReality, ExperimentConfig, ExperimentKind, ForecasterKind, RealityKind, ScepticKind, SpaceSpec,
    VerdictBasis,
};
pub use ingest::{
    format_forecast_stream, ingest_forecast_stream, parse_forecast_stream, replay_stream, write_forecast_stream,
    ForecastStream,
};
pub use report::{
    emit_report, trajectory, trajectory_csv, EvidenceReport, MarketReport, OutputFormat, Report, ReportBody,
    SessionReport, TeamReport, TrackingReport, TrajectoryPoint, SCHEMA_VERSION,
};
pub use ville::{monte_carlo_ville, ville_estimates, VilleEstimate, VilleReport, SLACK_SIGMAS};

use crate::decision::{
    regret_experiment, BayesStrategy, ConstantDecision, DecisionSpace, DecisionStrategy, FollowLast, IidTruth,
    LossFunction, LossSchedule, StrategyFactory, UniformDecision,
};
use crate::error::{Error, Result};
use crate::futures::{run_two_step_session, RandomPositions, RandomPrices, UniformReality};
use crate::protocol::run_session_with_tolerance;
use crate::sceptics::{
    kolmogorov_strategy, run_team_session, run_tracking_session, AdditiveSceptic, JeffreysTeam, RandomBetSceptic,
    ZeroStake,
};

fn stream_id(config: &ExperimentConfig) -> String {
    format!("seed-{}", config.seed)
}

/// Builds a strategy factory from its name.
pub fn decision_strategy(name: &str, decisions: usize) -> Result<Box<StrategyFactory>> {
    Ok(match name {
        "bayes" => Box::new(|| Box::new(BayesStrategy::default()) as Box<dyn DecisionStrategy>),
        "uniform-random" => Box::new(|| Box::new(UniformDecision) as Box<dyn DecisionStrategy>),
        "follow-last" => Box::new(|| Box::new(FollowLast) as Box<dyn DecisionStrategy>),
        other => {
            let d: usize = other
                .strip_prefix("always-")
                .and_then(|d| d.parse().ok())
                .ok_or_else(|| Error::Config(format!("unknown decision strategy {other:?}")))?;
            if d >= decisions {
                return Err(Error::Config(format!("decision {d} outside the decision space")));
            }
            Box::new(move || Box::new(ConstantDecision(d)) as Box<dyn DecisionStrategy>)
        }
    })
}

/// One decision per outcome; loss `[d ≠ y_{n+K−1}]` on the last coordinate
/// of the window.
pub fn last_coordinate_loss(config: &ExperimentConfig) -> Result<LossFunction> {
    let space = config.build_space()?;
    let k = config.window;
    LossFunction::from_fn(DecisionSpace::from_outcomes(&space), space, k, move |d, w| {
        if d == w[k - 1] {
            0.0
        } else {
            1.0
        }
    })
}

fn additive_strategy(config: &ExperimentConfig) -> Result<Box<dyn Fn() -> Box<dyn AdditiveSceptic>>> {
    let n = config.n_steps;
    match config.sceptic {
        ScepticKind::Kolmogorov => Ok(Box::new(move || Box::new(kolmogorov_strategy(n)))),
        ScepticKind::Zero => Ok(Box::new(|| Box::new(ZeroStake))),
        other => Err(Error::Config(format!("certificates need kolmogorov or zero, got {other}"))),
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let id = stream_id(config);
    let body = match config.kind {
        ExperimentKind::Session => {
            let space = config.build_space()?;
            let t = run_session_with_tolerance(
                &space,
                config.build_forecaster(&config.forecaster)?.as_mut(),
                config.build_sceptic()?.as_mut(),
                config.build_reality()?.as_mut(),
                config.n_steps,
                config.seed,
                config.tolerance,
            )?;
            ReportBody::Session(SessionReport::new(&t, &id, config.verdict)?)
        }
        ExperimentKind::Team => {
            let t = run_team_session(
                &config.build_space()?,
                config.build_forecaster(&config.forecaster)?.as_mut(),
                config.build_forecaster(config.second_forecaster_kind()?)?.as_mut(),
                &mut JeffreysTeam,
                config.build_reality()?.as_mut(),
                config.n_steps,
                config.seed,
            )?;
            ReportBody::Team(TeamReport::new(&t, &id, config.verdict)?)
        }
        ExperimentKind::Tracking => {
            let mut sceptic_1 = match config.sceptic {
                ScepticKind::Tracking | ScepticKind::Team => Box::new(RandomBetSceptic),
                _ => config.build_sceptic()?,
            };
            let t = run_tracking_session(
                &config.build_space()?,
                config.build_forecaster(&config.forecaster)?.as_mut(),
                config.build_forecaster(config.second_forecaster_kind()?)?.as_mut(),
                sceptic_1.as_mut(),
                config.build_reality()?.as_mut(),
                config.n_steps,
                config.seed,
            )?;
            ReportBody::Tracking(TrackingReport::new(&t, &id, config.verdict)?)
        }
        ExperimentKind::Market => {
            let t = run_two_step_session(
                &mut RandomPrices::default(),
                &mut RandomPositions { scale: 1.0 },
                &mut UniformReality,
                config.n_steps,
                config.seed,
            )?;
            ReportBody::Market(MarketReport::new(t))
        }
        ExperimentKind::Ville => ReportBody::Ville(monte_carlo_ville(config)?),
        ExperimentKind::Certificate => {
            let strategy = additive_strategy(config)?;
            let event = mean_gap_event(config.delta);
            ReportBody::Certificate(upper_probability_certificate(
                strategy.as_ref(),
                &event,
                config.delta,
                &InstanceFamily::exhaustive_binary(config.n_steps),
            )?)
        }
        ExperimentKind::Regret => {
            let truth = IidTruth::new(config.base_forecast()?, config.window)?;
            let loss = last_coordinate_loss(config)?;
            let decisions = loss.decisions().len();
            let schedule = LossSchedule::Constant(Arc::new(loss));
            let factories = config
                .alternatives
                .iter()
                .map(|a| decision_strategy(a, decisions))
                .collect::<Result<Vec<_>>>()?;
            let refs: Vec<&StrategyFactory> = factories.iter().map(|f| f.as_ref()).collect();
            ReportBody::Regret(regret_experiment(
                &truth,
                &schedule,
                &refs,
                config.window,
                config.n_steps,
                config.paths,
                &config.epsilons,
                config.seed,
            )?)
        }
    };
    Ok(Report::new(config.clone(), body))
}

/// Re-tests an ingested stream with the configured Sceptic.
pub fn verify_stream(stream: &ForecastStream, config: &ExperimentConfig, stream_id: &str) -> Result<Report> {
    let mut config = config.clone();
    config.n_steps = stream.len();
    let mut sceptic = config.build_sceptic()?;
    let t = replay_stream(stream, sceptic.as_mut(), config.seed, config.tolerance)?;
    Ok(Report::new(
        config.clone(),
        ReportBody::Session(SessionReport::new(&t, stream_id, config.verdict)?),
    ))
}

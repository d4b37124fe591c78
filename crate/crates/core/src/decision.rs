//! Decision making with multi-step-ahead forecasts.
//!
//! ```text
//! FOR n = 1, 2, …, N:
//!     Reality announces λ_n : D × Y^K → [0, 1]
//!     Forecaster announces P_n on Y^K
//!     Decision Maker announces d_n ∈ D
//!     Reality announces y_n
//! Loss_N := Σ_{n ≤ N} λ_n(d_n, y_n … y_{n+K−1})
//! ```
//!
//! The Bayes decision minimizes `Σ_x λ(d, x) P({x})`, ties going to the
//! earliest decision in the fixed order. When the forecasts are the true
//! conditionals, `(Loss^B_N − Loss_N)/N ≥ ε` has probability at most
//! `exp(−N ε² / (8 K²))` for every competing strategy; [`regret_experiment`]
//! estimates that tail by Monte Carlo.

use std::collections::HashSet;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::{DiscreteDistribution, OutcomeSpace};
use crate::error::{Error, Result};
use crate::forecasters::JointMeasure;
use crate::protocol::sample;
use crate::rng::{path_rng, SessionRng};

/// Default absolute tolerance for ties between expected losses.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Finite decision set in its fixed linear order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionSpace {
    decisions: Vec<String>,
}

impl DecisionSpace {
    pub fn new<I, S>(decisions: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let decisions: Vec<String> = decisions.into_iter().map(Into::into).collect();
        if decisions.is_empty() {
            return Err(Error::EmptySpace);
        }
        let mut seen = HashSet::new();
        for d in &decisions {
            if !seen.insert(d.as_str()) {
                return Err(Error::DuplicateLabel(d.clone()));
            }
        }
        Ok(Self { decisions })
    }

    /// Decisions named after the labels of an outcome space.
    pub fn from_outcomes(space: &OutcomeSpace) -> Self {
        Self {
            decisions: space.labels().to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.decisions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decisions.is_empty()
    }

    pub fn label(&self, index: usize) -> &str {
        &self.decisions[index]
    }

    pub fn labels(&self) -> &[String] {
        &self.decisions
    }
}

/// Loss table `λ : D × Y^K → [0, 1]`, one row per decision.
#[derive(Debug, Clone, PartialEq)]
pub struct LossFunction {
    decisions: DecisionSpace,
    outcomes: OutcomeSpace,
    windows: OutcomeSpace,
    horizon: usize,
    table: Vec<f64>,
}

impl LossFunction {
    /// `table[d · |Y|^K + x]` with windows `x` in lexicographic order.
    pub fn new(decisions: DecisionSpace, outcomes: OutcomeSpace, horizon: usize, table: Vec<f64>) -> Result<Self> {
        let windows = if horizon == 1 {
            outcomes.clone()
        } else {
            outcomes.power(horizon)?
        };
        let expected = decisions.len() * windows.len();
        if table.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: table.len(),
            });
        }
        if let Some(&bad) = table.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::LossOutOfRange(bad));
        }
        Ok(Self {
            decisions,
            outcomes,
            windows,
            horizon,
            table,
        })
    }

    /// Tabulates `loss(d, window)`.
    pub fn from_fn(
        decisions: DecisionSpace,
        outcomes: OutcomeSpace,
        horizon: usize,
        loss: impl Fn(usize, &[usize]) -> f64,
    ) -> Result<Self> {
        let size = outcomes.len().pow(horizon as u32);
        let table = (0..decisions.len())
            .flat_map(|d| (0..size).map(move |x| (d, x)))
            .map(|(d, x)| loss(d, &outcomes.decode_tuple(x, horizon)))
            .collect();
        Self::new(decisions, outcomes, horizon, table)
    }

    /// `λ(d, y) = [d ≠ y]` with one decision per outcome.
    pub fn zero_one(outcomes: &OutcomeSpace) -> Result<Self> {
        Self::from_fn(DecisionSpace::from_outcomes(outcomes), outcomes.clone(), 1, |d, y| {
            if d == y[0] {
                0.0
            } else {
                1.0
            }
        })
    }

    pub fn decisions(&self) -> &DecisionSpace {
        &self.decisions
    }

    pub fn outcomes(&self) -> &OutcomeSpace {
        &self.outcomes
    }

    /// The space `Y^K` forecasts must live on.
    pub fn window_space(&self) -> &OutcomeSpace {
        &self.windows
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// Row of `λ(d, ·)` indexed by window.
    pub fn row(&self, decision: usize) -> &[f64] {
        let w = self.windows.len();
        &self.table[decision * w..(decision + 1) * w]
    }

    pub fn loss(&self, decision: usize, window: &[usize]) -> Result<f64> {
        if window.len() != self.horizon {
            return Err(Error::HorizonMismatch {
                expected: self.horizon,
                got: window.len(),
            });
        }
        if decision >= self.decisions.len() {
            return Err(Error::DimensionMismatch {
                expected: self.decisions.len(),
                got: decision + 1,
            });
        }
        Ok(self.row(decision)[self.outcomes.encode_tuple(window)])
    }
}

fn check_space(loss: &LossFunction, forecast: &DiscreteDistribution) -> Result<()> {
    if forecast.space() == loss.window_space() {
        Ok(())
    } else {
        Err(Error::SpaceMismatch)
    }
}

/// `Σ_x λ(d, x) P({x})` for every decision `d`.
pub fn expected_losses(loss: &LossFunction, forecast: &DiscreteDistribution) -> Result<Vec<f64>> {
    check_space(loss, forecast)?;
    (0..loss.decisions.len())
        .map(|d| forecast.expectation(loss.row(d)))
        .collect()
}

/// Every decision whose expected loss is within `tolerance` of the minimum.
pub fn bayes_argmin_set(loss: &LossFunction, forecast: &DiscreteDistribution, tolerance: f64) -> Result<Vec<usize>> {
    let e = expected_losses(loss, forecast)?;
    let min = e.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((0..e.len()).filter(|&d| e[d] <= min + tolerance).collect())
}

pub fn bayes_decision(loss: &LossFunction, forecast: &DiscreteDistribution) -> Result<usize> {
    bayes_decision_with_tolerance(loss, forecast, TIE_TOLERANCE)
}

/// Earliest decision in the argmin set.
pub fn bayes_decision_with_tolerance(loss: &LossFunction, forecast: &DiscreteDistribution, tolerance: f64) -> Result<usize> {
    Ok(bayes_argmin_set(loss, forecast, tolerance)?[0])
}

/// One decision, settled once its window is observed.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionRecord {
    pub step: usize,
    pub loss_fn: Arc<LossFunction>,
    pub forecast: DiscreteDistribution,
    pub decision: usize,
    /// `y_n … y_{n+K−1}`; shorter while the window is still open.
    pub window: Vec<usize>,
    pub loss: Option<f64>,
}

impl DecisionRecord {
    pub fn is_complete(&self) -> bool {
        self.window.len() == self.loss_fn.horizon()
    }
}

/// `Σ λ_n(d_n, y_n … y_{n+K−1})`; every window must be complete.
pub fn cumulative_loss(records: &[DecisionRecord]) -> Result<f64> {
    records.iter().try_fold(0.0, |acc, r| match r.loss {
        Some(l) if r.is_complete() => Ok(acc + l),
        _ => Err(Error::IncompleteWindow(r.step)),
    })
}

/// Source of outcomes and of the forecasts Bayes is fed.
pub trait TruthModel: Sync {
    fn name(&self) -> String;
    fn space(&self) -> &OutcomeSpace;
    /// Longest path the model can generate, if bounded.
    fn horizon(&self) -> Option<usize>;
    /// Conditional law of the next `k` outcomes given `prefix`.
    fn window_forecast(&self, prefix: &[usize], k: usize) -> Result<DiscreteDistribution>;
    /// Draws the next outcome given `prefix`.
    fn sample_next(&self, prefix: &[usize], rng: &mut SessionRng) -> Result<usize>;
}

/// Independent draws from a fixed marginal.
#[derive(Debug, Clone)]
pub struct IidTruth {
    marginal: DiscreteDistribution,
    windows: Vec<DiscreteDistribution>,
}

impl IidTruth {
    /// Caches the product law on `Y^k` for `k ≤ max_window`.
    pub fn new(marginal: DiscreteDistribution, max_window: usize) -> Result<Self> {
        let space = marginal.space().clone();
        let windows = (1..=max_window)
            .map(|k| {
                if k == 1 {
                    return Ok(marginal.clone());
                }
                let size = space.len().pow(k as u32);
                let probs = (0..size)
                    .map(|x| space.decode_tuple(x, k).iter().map(|&y| marginal.prob(y)).product())
                    .collect();
                DiscreteDistribution::new(space.power(k)?, probs)
            })
            .collect::<Result<_>>()?;
        Ok(Self { marginal, windows })
    }

    pub fn marginal(&self) -> &DiscreteDistribution {
        &self.marginal
    }
}

impl TruthModel for IidTruth {
    fn name(&self) -> String {
        format!("iid{:?}", self.marginal.probs())
    }

    fn space(&self) -> &OutcomeSpace {
        self.marginal.space()
    }

    fn horizon(&self) -> Option<usize> {
        None
    }

    fn window_forecast(&self, _: &[usize], k: usize) -> Result<DiscreteDistribution> {
        self.windows.get(k.wrapping_sub(1)).cloned().ok_or(Error::HorizonMismatch {
            expected: self.windows.len(),
            got: k,
        })
    }

    fn sample_next(&self, _: &[usize], rng: &mut SessionRng) -> Result<usize> {
        Ok(sample(&self.marginal, rng))
    }
}

impl TruthModel for JointMeasure {
    fn name(&self) -> String {
        format!("joint[N={}]", JointMeasure::horizon(self))
    }

    fn space(&self) -> &OutcomeSpace {
        JointMeasure::space(self)
    }

    fn horizon(&self) -> Option<usize> {
        Some(JointMeasure::horizon(self))
    }

    fn window_forecast(&self, prefix: &[usize], k: usize) -> Result<DiscreteDistribution> {
        self.condition_window(prefix, k)
    }

    fn sample_next(&self, prefix: &[usize], rng: &mut SessionRng) -> Result<usize> {
        Ok(sample(&self.condition(prefix)?, rng))
    }
}

/// Losses announced by Reality, one per step.
#[derive(Debug, Clone)]
pub enum LossSchedule {
    Constant(Arc<LossFunction>),
    PerStep(Vec<Arc<LossFunction>>),
}

impl LossSchedule {
    /// `λ_n` for the 1-based step `n`.
    pub fn at(&self, step: usize) -> Result<&Arc<LossFunction>> {
        match self {
            Self::Constant(l) => Ok(l),
            Self::PerStep(ls) => ls.get(step - 1).ok_or(Error::StreamExhausted(step - 1)),
        }
    }

    fn check(&self, horizon: usize, space: &OutcomeSpace, n_steps: usize) -> Result<()> {
        let all: Vec<&Arc<LossFunction>> = match self {
            Self::Constant(l) => vec![l],
            Self::PerStep(ls) => {
                if ls.len() < n_steps {
                    return Err(Error::StreamExhausted(ls.len()));
                }
                ls.iter().collect()
            }
        };
        for l in all {
            if l.horizon() != horizon {
                return Err(Error::HorizonMismatch {
                    expected: horizon,
                    got: l.horizon(),
                });
            }
            if l.outcomes() != space {
                return Err(Error::SpaceMismatch);
            }
        }
        Ok(())
    }
}

/// Decision Maker's strategy.
pub trait DecisionStrategy: Send {
    fn name(&self) -> String;
    fn decide(
        &mut self,
        loss: &LossFunction,
        forecast: &DiscreteDistribution,
        past: &[usize],
        rng: &mut SessionRng,
    ) -> Result<usize>;
}

#[derive(Debug, Clone, Copy)]
pub struct BayesStrategy {
    pub tolerance: f64,
}

impl Default for BayesStrategy {
    fn default() -> Self {
        Self {
            tolerance: TIE_TOLERANCE,
        }
    }
}

impl DecisionStrategy for BayesStrategy {
    fn name(&self) -> String {
        "bayes".into()
    }

    fn decide(&mut self, loss: &LossFunction, forecast: &DiscreteDistribution, _: &[usize], _: &mut SessionRng) -> Result<usize> {
        bayes_decision_with_tolerance(loss, forecast, self.tolerance)
    }
}

/// Always the same decision.
#[derive(Debug, Clone, Copy)]
pub struct ConstantDecision(pub usize);

impl DecisionStrategy for ConstantDecision {
    fn name(&self) -> String {
        format!("always-{}", self.0)
    }

    fn decide(&mut self, loss: &LossFunction, _: &DiscreteDistribution, _: &[usize], _: &mut SessionRng) -> Result<usize> {
        if self.0 < loss.decisions().len() {
            Ok(self.0)
        } else {
            Err(Error::DimensionMismatch {
                expected: loss.decisions().len(),
                got: self.0 + 1,
            })
        }
    }
}

/// Uniformly random decision.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformDecision;

impl DecisionStrategy for UniformDecision {
    fn name(&self) -> String {
        "uniform-random".into()
    }

    fn decide(&mut self, loss: &LossFunction, _: &DiscreteDistribution, _: &[usize], rng: &mut SessionRng) -> Result<usize> {
        Ok(rng.gen_range(0..loss.decisions().len()))
    }
}

/// Decision indexed by the last outcome (`0` before any), reduced modulo `|D|`.
#[derive(Debug, Clone, Copy, Default)]
pub struct FollowLast;

impl DecisionStrategy for FollowLast {
    fn name(&self) -> String {
        "follow-last".into()
    }

    fn decide(&mut self, loss: &LossFunction, _: &DiscreteDistribution, past: &[usize], _: &mut SessionRng) -> Result<usize> {
        Ok(past.last().copied().unwrap_or(0) % loss.decisions().len())
    }
}

fn check_truth(truth: &dyn TruthModel, schedule: &LossSchedule, horizon: usize, n_steps: usize) -> Result<usize> {
    if horizon == 0 {
        return Err(Error::Config("window length K must be at least 1".into()));
    }
    schedule.check(horizon, truth.space(), n_steps)?;
    let moves = n_steps + horizon - 1;
    if let Some(max) = truth.horizon() {
        if moves > max {
            return Err(Error::HorizonMismatch { expected: max, got: moves });
        }
    }
    Ok(moves)
}

/// Plays `n_steps` rounds, then the `K − 1` extra Reality moves that close
/// the last windows.
pub fn run_decision_session(
    truth: &dyn TruthModel,
    schedule: &LossSchedule,
    strategy: &mut dyn DecisionStrategy,
    horizon: usize,
    n_steps: usize,
    reality_rng: &mut SessionRng,
    strategy_rng: &mut SessionRng,
) -> Result<Vec<DecisionRecord>> {
    let moves = check_truth(truth, schedule, horizon, n_steps)?;
    let mut outcomes = Vec::with_capacity(moves);
    let mut records: Vec<DecisionRecord> = Vec::with_capacity(n_steps);
    for n in 1..=moves {
        if n <= n_steps {
            let loss_fn = schedule.at(n)?.clone();
            let forecast = truth.window_forecast(&outcomes, horizon)?;
            let decision = strategy.decide(&loss_fn, &forecast, &outcomes, strategy_rng)?;
            records.push(DecisionRecord {
                step: n,
                loss_fn,
                forecast,
                decision,
                window: Vec::with_capacity(horizon),
                loss: None,
            });
        }
        let y = truth.sample_next(&outcomes, reality_rng)?;
        outcomes.push(y);
        let first_open = n.saturating_sub(horizon);
        for r in records.iter_mut().skip(first_open) {
            if !r.is_complete() {
                r.window.push(y);
                if r.is_complete() {
                    r.loss = Some(r.loss_fn.loss(r.decision, &r.window)?);
                }
            }
        }
    }
    Ok(records)
}

/// Tail estimate for one `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailEstimate {
    pub epsilon: f64,
    pub frequency: f64,
    /// `exp(−N ε² / (8 K²))`.
    pub bound: f64,
    /// Binomial standard error at the bound.
    pub sigma: f64,
    /// `frequency ≤ bound + 3σ`.
    pub respected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlternativeReport {
    pub strategy: String,
    pub mean_regret: f64,
    pub max_regret: f64,
    pub tails: Vec<TailEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretReport {
    pub truth: String,
    pub horizon: usize,
    pub n_steps: usize,
    pub paths: usize,
    pub seed: u64,
    pub alternatives: Vec<AlternativeReport>,
}

impl RegretReport {
    pub fn all_respected(&self) -> bool {
        self.alternatives.iter().all(|a| a.tails.iter().all(|t| t.respected))
    }
}

/// `exp(−N ε² / (8 K²))`.
pub fn regret_bound(n_steps: usize, horizon: usize, epsilon: f64) -> f64 {
    let k = horizon as f64;
    (-(n_steps as f64) * epsilon * epsilon / (8.0 * k * k)).exp()
}

/// Factory for per-path alternative strategies.
pub type StrategyFactory = dyn Fn() -> Box<dyn DecisionStrategy> + Sync;

/// Monte Carlo estimate of `Pr{(Loss^B_N − Loss^alt_N)/N ≥ ε}`.
///
/// Bayes decides on the truth's own conditionals. Path `i` samples Reality
/// from stream `2i` of `seed` and the alternatives share stream `2i + 1`,
/// so every alternative faces the same outcomes.
#[allow(clippy::too_many_arguments)]
pub fn regret_experiment(
    truth: &dyn TruthModel,
    schedule: &LossSchedule,
    alternatives: &[&StrategyFactory],
    horizon: usize,
    n_steps: usize,
    paths: usize,
    epsilons: &[f64],
    seed: u64,
) -> Result<RegretReport> {
    if paths == 0 {
        return Err(Error::Config("at least one path is required".into()));
    }
    let moves = check_truth(truth, schedule, horizon, n_steps)?;
    let regrets: Vec<Vec<f64>> = (0..paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut reality_rng = path_rng(seed, 2 * i);
            let mut strategy_rng = path_rng(seed, 2 * i + 1);
            let mut strategies: Vec<Box<dyn DecisionStrategy>> = alternatives.iter().map(|f| f()).collect();
            let mut bayes = BayesStrategy::default();
            let mut outcomes = Vec::with_capacity(moves);
            // decisions[n][s], s = 0 for Bayes
            let mut decisions: Vec<Vec<usize>> = Vec::with_capacity(n_steps);
            for n in 1..=n_steps {
                let loss_fn = schedule.at(n)?;
                let forecast = truth.window_forecast(&outcomes, horizon)?;
                let mut ds = Vec::with_capacity(strategies.len() + 1);
                ds.push(bayes.decide(loss_fn, &forecast, &outcomes, &mut strategy_rng)?);
                for s in strategies.iter_mut() {
                    ds.push(s.decide(loss_fn, &forecast, &outcomes, &mut strategy_rng)?);
                }
                decisions.push(ds);
                let y = truth.sample_next(&outcomes, &mut reality_rng)?;
                outcomes.push(y);
            }
            while outcomes.len() < moves {
                let y = truth.sample_next(&outcomes, &mut reality_rng)?;
                outcomes.push(y);
            }
            let mut totals = vec![0.0; strategies.len() + 1];
            for (n, ds) in decisions.iter().enumerate() {
                let loss_fn = schedule.at(n + 1)?;
                let window = &outcomes[n..n + horizon];
                for (t, &d) in totals.iter_mut().zip(ds) {
                    *t += loss_fn.loss(d, window)?;
                }
            }
            Ok(totals[1..]
                .iter()
                .map(|alt| (totals[0] - alt) / n_steps as f64)
                .collect())
        })
        .collect::<Result<_>>()?;

    let m = paths as f64;
    let reports = alternatives
        .iter()
        .enumerate()
        .map(|(s, factory)| {
            let column: Vec<f64> = regrets.iter().map(|r| r[s]).collect();
            let tails = epsilons
                .iter()
                .map(|&epsilon| {
                    let hits = column.iter().filter(|&&r| r >= epsilon).count();
                    let frequency = hits as f64 / m;
                    let bound = regret_bound(n_steps, horizon, epsilon);
                    let p = bound.min(1.0);
                    let sigma = (p * (1.0 - p) / m).sqrt();
                    TailEstimate {
                        epsilon,
                        frequency,
                        bound,
                        sigma,
                        respected: frequency <= bound + 3.0 * sigma,
                    }
                })
                .collect();
            AlternativeReport {
                strategy: factory().name(),
                mean_regret: column.iter().sum::<f64>() / m,
                max_regret: column.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                tails,
            }
        })
        .collect();
    Ok(RegretReport {
        truth: truth.name(),
        horizon,
        n_steps,
        paths,
        seed,
        alternatives: reports,
    })
}

//! Experiment configuration.
//!
//! Component choices are written as short strings (`"numeric:6"`,
//! `"perturbed:0.2"`, `"constant:1"`) both on the command line and in JSON
//! configuration files.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distributions::{DiscreteDistribution, OutcomeSpace};
use crate::error::{Error, Result};
use crate::forecasters::{
    ClassicalForecaster, DaltonismContext, DaltonismForecaster, DeviceSet, FixedForecaster, PerturbedForecaster,
    RandomForecaster,
};
use crate::protocol::{ConstantReality, Forecaster, HonestReality, Reality, RealityView, Sceptic};
use crate::rng::SessionRng;
use crate::sceptics::{ClassicalForcingSceptic, LaplaceSceptic, RandomBetSceptic, VacuousSceptic};

fn parse_list<T: FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad {what} {x:?}")))
        })
        .collect()
}

fn join<T: fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

macro_rules! string_serde {
    ($t:ty) => {
        impl TryFrom<String> for $t {
            type Error = Error;
            fn try_from(s: String) -> Result<Self> {
                s.parse()
            }
        }

        impl From<$t> for String {
            fn from(v: $t) -> String {
                v.to_string()
            }
        }
    };
}

/// `binary`, `numeric:<m>`, `labels:<a>,<b>,…` or `classical:<m>,<m>,…`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SpaceSpec {
    Binary,
    Numeric(usize),
    Labels(Vec<String>),
    /// Union space of the given devices, used with `classical` forecasters.
    Classical(Vec<usize>),
}

impl SpaceSpec {
    pub fn build(&self) -> Result<OutcomeSpace> {
        match self {
            Self::Binary => Ok(OutcomeSpace::binary()),
            Self::Numeric(m) => OutcomeSpace::numeric(*m),
            Self::Labels(ls) => OutcomeSpace::new(ls.iter().cloned()),
            Self::Classical(ms) => OutcomeSpace::numeric(DeviceSet::new(ms.clone())?.largest()),
        }
    }

    fn devices(&self) -> Result<DeviceSet> {
        match self {
            Self::Classical(ms) => DeviceSet::new(ms.clone()),
            _ => Ok(DeviceSet::default()),
        }
    }
}

impl FromStr for SpaceSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (head, tail) = s.split_once(':').unwrap_or((s, ""));
        match head {
            "binary" => Ok(Self::Binary),
            "numeric" => Ok(Self::Numeric(
                tail.parse().map_err(|_| Error::Config(format!("bad space size {tail:?}")))?,
            )),
            "labels" => Ok(Self::Labels(tail.split(',').map(str::to_string).collect())),
            "classical" if tail.is_empty() => Ok(Self::Classical(DeviceSet::default().sizes().to_vec())),
            "classical" => Ok(Self::Classical(parse_list(tail, "device size")?)),
            _ => Err(Error::Config(format!("unknown space {s:?}"))),
        }
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Binary => write!(f, "binary"),
            Self::Numeric(m) => write!(f, "numeric:{m}"),
            Self::Labels(ls) => write!(f, "labels:{}", ls.join(",")),
            Self::Classical(ms) => write!(f, "classical:{}", join(ms)),
        }
    }
}

string_serde!(SpaceSpec);

/// `uniform`, `fixed:<p>,…`, `random`, `perturbed:<spread>`, `classical` or
/// `daltonism`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ForecasterKind {
    Uniform,
    Fixed(Vec<f64>),
    Random,
    /// Perturbs the first forecaster's base forecast.
    Perturbed(f64),
    /// Cycles through the devices of a `classical` space.
    Classical,
    /// Cycles through the twelve birth contexts.
    Daltonism,
}

impl FromStr for ForecasterKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (head, tail) = s.split_once(':').unwrap_or((s, ""));
        match head {
            "uniform" => Ok(Self::Uniform),
            "fixed" => Ok(Self::Fixed(parse_list(tail, "probability")?)),
            "random" => Ok(Self::Random),
            "perturbed" => Ok(Self::Perturbed(
                tail.parse().map_err(|_| Error::Config(format!("bad spread {tail:?}")))?,
            )),
            "classical" => Ok(Self::Classical),
            "daltonism" => Ok(Self::Daltonism),
            _ => Err(Error::Config(format!("unknown forecaster {s:?}"))),
        }
    }
}

impl fmt::Display for ForecasterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Uniform => write!(f, "uniform"),
            Self::Fixed(ps) => write!(f, "fixed:{}", join(ps)),
            Self::Random => write!(f, "random"),
            Self::Perturbed(s) => write!(f, "perturbed:{s}"),
            Self::Classical => write!(f, "classical"),
            Self::Daltonism => write!(f, "daltonism"),
        }
    }
}

string_serde!(ForecasterKind);

/// `vacuous`, `random-bet`, `laplace`, `kolmogorov`, `team`, `tracking` or `zero`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ScepticKind {
    Vacuous,
    RandomBet,
    Laplace,
    /// Kolmogorov's forcing strategy.
    Kolmogorov,
    /// Zero stake in the additive protocol.
    Zero,
    /// Team strategy against two forecasters.
    Team,
    /// Tracking strategy; Sceptic I plays random bets.
    Tracking,
}

impl FromStr for ScepticKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "vacuous" => Self::Vacuous,
            "random-bet" => Self::RandomBet,
            "laplace" => Self::Laplace,
            "kolmogorov" => Self::Kolmogorov,
            "zero" => Self::Zero,
            "team" => Self::Team,
            "tracking" => Self::Tracking,
            _ => return Err(Error::Config(format!("unknown strategy {s:?}"))),
        })
    }
}

impl fmt::Display for ScepticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Vacuous => "vacuous",
            Self::RandomBet => "random-bet",
            Self::Laplace => "laplace",
            Self::Kolmogorov => "kolmogorov",
            Self::Zero => "zero",
            Self::Team => "team",
            Self::Tracking => "tracking",
        })
    }
}

string_serde!(ScepticKind);

/// `honest`, `constant:<outcome index>` or `biased:<p>,…` (samples a fixed
/// distribution regardless of the forecasts).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum RealityKind {
    Honest,
    Constant(usize),
    Biased(Vec<f64>),
}

impl FromStr for RealityKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (head, tail) = s.split_once(':').unwrap_or((s, ""));
        match head {
            "honest" => Ok(Self::Honest),
            "constant" => Ok(Self::Constant(
                tail.parse().map_err(|_| Error::Config(format!("bad outcome {tail:?}")))?,
            )),
            "biased" => Ok(Self::Biased(parse_list(tail, "probability")?)),
            _ => Err(Error::Config(format!("unknown reality {s:?}"))),
        }
    }
}

impl fmt::Display for RealityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Honest => write!(f, "honest"),
            Self::Constant(y) => write!(f, "constant:{y}"),
            Self::Biased(ps) => write!(f, "biased:{}", join(ps)),
        }
    }
}

string_serde!(RealityKind);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// One forecaster, one Sceptic.
    Session,
    /// Two forecasters and the team Sceptic.
    Team,
    /// Two forecasters and the tracking Sceptic.
    Tracking,
    /// Two-steps-ahead futures market.
    Market,
    Ville,
    Certificate,
    Regret,
}

/// Capital the Jeffreys verdict is computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictBasis {
    #[default]
    Max,
    Final,
}

fn default_paths() -> usize {
    1
}

fn default_thresholds() -> Vec<f64> {
    vec![10.0, 100.0]
}

fn default_delta() -> f64 {
    0.25
}

fn default_epsilons() -> Vec<f64> {
    vec![0.3]
}

fn default_window() -> usize {
    1
}

fn default_tolerance() -> f64 {
    crate::protocol::UNIT_EXPECTATION_TOLERANCE
}

fn default_alternatives() -> Vec<String> {
    vec!["always-0".into(), "always-1".into(), "uniform-random".into()]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Mandatory: every random draw derives from it.
    pub seed: u64,
    pub space: SpaceSpec,
    pub forecaster: ForecasterKind,
    pub second_forecaster: Option<ForecasterKind>,
    pub sceptic: ScepticKind,
    pub reality: RealityKind,
    pub n_steps: usize,
    #[serde(default = "default_paths")]
    pub paths: usize,
    /// Capital levels `c` for Ville experiments.
    #[serde(default = "default_thresholds")]
    pub thresholds: Vec<f64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    /// Window length `K` for regret experiments.
    #[serde(default = "default_window")]
    pub window: usize,
    /// Alternatives for regret experiments: `always-<d>`, `uniform-random`,
    /// `follow-last` or `bayes`.
    #[serde(default = "default_alternatives")]
    pub alternatives: Vec<String>,
    /// Tolerance on `|E_P f − 1|` when validating bets.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub verdict: VerdictBasis,
}

impl ExperimentConfig {
    /// Binary space, uniform forecaster, vacuous Sceptic, honest Reality.
    pub fn new(kind: ExperimentKind, seed: u64, n_steps: usize) -> Self {
        Self {
            kind,
            seed,
            space: SpaceSpec::Binary,
            forecaster: ForecasterKind::Uniform,
            second_forecaster: None,
            sceptic: ScepticKind::Vacuous,
            reality: RealityKind::Honest,
            n_steps,
            paths: default_paths(),
            thresholds: default_thresholds(),
            delta: default_delta(),
            epsilons: default_epsilons(),
            window: default_window(),
            alternatives: default_alternatives(),
            tolerance: default_tolerance(),
            verdict: VerdictBasis::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.paths == 0 {
            return Err(Error::Config("paths must be at least 1".into()));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::Config(format!("delta must be positive, got {}", self.delta)));
        }
        if self.thresholds.iter().any(|&c| !(c >= 1.0 && c.is_finite())) {
            return Err(Error::Config("thresholds must be finite and at least 1".into()));
        }
        if self.window == 0 {
            return Err(Error::Config("window must be at least 1".into()));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::Config("tolerance must be nonnegative".into()));
        }
        self.space.build()?;
        Ok(())
    }

    pub fn build_space(&self) -> Result<OutcomeSpace> {
        self.space.build()
    }

    /// Base forecast that `perturbed` second forecasters perturb.
    pub fn base_forecast(&self) -> Result<DiscreteDistribution> {
        let space = self.build_space()?;
        match &self.forecaster {
            ForecasterKind::Fixed(ps) => DiscreteDistribution::new(space, ps.clone()),
            _ => Ok(DiscreteDistribution::uniform(space)),
        }
    }

    pub fn build_forecaster(&self, kind: &ForecasterKind) -> Result<Box<dyn Forecaster + Send>> {
        let space = self.build_space()?;
        Ok(match kind {
            ForecasterKind::Uniform => Box::new(FixedForecaster(DiscreteDistribution::uniform(space))),
            ForecasterKind::Fixed(ps) => Box::new(FixedForecaster(DiscreteDistribution::new(space, ps.clone())?)),
            ForecasterKind::Random => Box::new(RandomForecaster::new(space)),
            ForecasterKind::Perturbed(spread) => Box::new(PerturbedForecaster::new(self.base_forecast()?, *spread)?),
            ForecasterKind::Classical => {
                let devices = self.space.devices()?;
                if devices.largest() != space.len() {
                    return Err(Error::Config("classical forecasters need a classical space".into()));
                }
                let schedule = devices.sizes().iter().copied().cycle().take(self.n_steps).collect();
                Box::new(ClassicalForecaster::new(&devices, schedule)?)
            }
            ForecasterKind::Daltonism => {
                if space != OutcomeSpace::binary() {
                    return Err(Error::Config("daltonism forecasts need the binary space".into()));
                }
                let contexts = DaltonismContext::all().into_iter().cycle().take(self.n_steps).collect();
                Box::new(DaltonismForecaster::new(contexts))
            }
        })
    }

    pub fn second_forecaster_kind(&self) -> Result<&ForecasterKind> {
        self.second_forecaster
            .as_ref()
            .ok_or_else(|| Error::Config("this experiment needs a second forecaster".into()))
    }

    /// Sceptic for one-forecaster sessions.
    pub fn build_sceptic(&self) -> Result<Box<dyn Sceptic + Send>> {
        Ok(match self.sceptic {
            ScepticKind::Vacuous => Box::new(VacuousSceptic),
            ScepticKind::RandomBet => Box::new(RandomBetSceptic),
            ScepticKind::Laplace => Box::new(LaplaceSceptic),
            ScepticKind::Kolmogorov => Box::new(ClassicalForcingSceptic::kolmogorov(self.n_steps)),
            ScepticKind::Zero => Box::new(ClassicalForcingSceptic::new(Box::new(crate::sceptics::ZeroStake))),
            ScepticKind::Team | ScepticKind::Tracking => {
                return Err(Error::Config(format!(
                    "strategy {} needs two forecasters",
                    self.sceptic
                )))
            }
        })
    }

    pub fn build_reality(&self) -> Result<Box<dyn Reality + Send>> {
        let space = self.build_space()?;
        Ok(match &self.reality {
            RealityKind::Honest => Box::new(HonestReality),
            RealityKind::Constant(y) => {
                if *y >= space.len() {
                    return Err(Error::Config(format!("outcome {y} outside the space")));
                }
                Box::new(ConstantReality(*y))
            }
            RealityKind::Biased(ps) => Box::new(BiasedReality(DiscreteDistribution::new(space, ps.clone())?)),
        })
    }
}

/// Draws outcomes from a fixed distribution, ignoring the forecasts.
#[derive(Debug, Clone)]
pub struct BiasedReality(pub DiscreteDistribution);

impl Reality for BiasedReality {
    fn name(&self) -> String {
        format!("biased{:?}", self.0.probs())
    }

    fn outcome(&mut self, _: &RealityView<'_>, rng: &mut SessionRng) -> Result<usize> {
        Ok(crate::protocol::sample(&self.0, rng))
    }
}

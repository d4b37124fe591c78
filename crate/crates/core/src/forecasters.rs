//! Forecaster strategies: classical devices, the genetics of Daltonism,
//! conditioning of a joint measure, replay of recorded forecasts, and a few
//! synthetic forecasters used by experiments.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{DiscreteDistribution, OutcomeSpace};
use crate::error::{Error, Result};
use crate::protocol::{Forecaster, SessionView};
use crate::rng::SessionRng;

// ---------------------------------------------------------------------------
// Classical devices
// ---------------------------------------------------------------------------

/// Set of device sizes `m` (number of equiprobable outcomes) Forecaster may
/// announce. Defaults to coins, dice and roulette wheels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviceSet {
    sizes: Vec<usize>,
}

impl Default for DeviceSet {
    fn default() -> Self {
        Self {
            sizes: vec![2, 6, 37],
        }
    }
}

impl DeviceSet {
    pub fn new(mut sizes: Vec<usize>) -> Result<Self> {
        sizes.sort_unstable();
        sizes.dedup();
        if sizes.is_empty() || sizes[0] < 2 {
            return Err(Error::Config("device sizes must be at least 2".into()));
        }
        Ok(Self { sizes })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn largest(&self) -> usize {
        *self.sizes.last().expect("nonempty")
    }

    pub fn device(&self, m: usize) -> Result<ClassicalDevice> {
        if self.sizes.contains(&m) {
            Ok(ClassicalDevice { m })
        } else {
            Err(Error::UnknownDevice(m))
        }
    }
}

/// A device producing one of `0, …, m−1` with equal probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassicalDevice {
    m: usize,
}

impl ClassicalDevice {
    pub fn outcomes(&self) -> usize {
        self.m
    }
}

/// Uniform distribution on `{0, …, m−1}`.
pub fn classical_forecast(device: ClassicalDevice) -> DiscreteDistribution {
    DiscreteDistribution::uniform(OutcomeSpace::numeric(device.m).expect("m >= 2"))
}

/// Announces a cycle of devices. Forecasts live on the numeric space of the
/// largest device in the set, with zero mass above `m − 1`, so one session can
/// mix coins, dice and wheels.
#[derive(Debug, Clone)]
pub struct ClassicalForecaster {
    space: OutcomeSpace,
    schedule: Vec<ClassicalDevice>,
}

impl ClassicalForecaster {
    pub fn new(devices: &DeviceSet, schedule: Vec<usize>) -> Result<Self> {
        if schedule.is_empty() {
            return Err(Error::Config("device schedule is empty".into()));
        }
        let schedule = schedule
            .into_iter()
            .map(|m| devices.device(m))
            .collect::<Result<Vec<_>>>()?;
        let largest = schedule.iter().map(|d| d.m).max().expect("nonempty");
        Ok(Self {
            space: OutcomeSpace::numeric(largest)?,
            schedule,
        })
    }

    pub fn space(&self) -> &OutcomeSpace {
        &self.space
    }

    pub fn device_at(&self, step: usize) -> ClassicalDevice {
        self.schedule[(step - 1) % self.schedule.len()]
    }
}

impl Forecaster for ClassicalForecaster {
    fn name(&self) -> String {
        let sizes: Vec<String> = self.schedule.iter().map(|d| d.m.to_string()).collect();
        format!("classical[{}]", sizes.join(","))
    }

    fn forecast(&mut self, view: &SessionView<'_>, _: &mut SessionRng) -> Result<DiscreteDistribution> {
        DiscreteDistribution::uniform_prefix(self.space.clone(), self.device_at(view.step).m)
    }
}

// ---------------------------------------------------------------------------
// Daltonism
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Father {
    /// Normal.
    N,
    /// Affected.
    A,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mother {
    /// Normal.
    N,
    /// Carrier.
    C,
    /// Affected.
    A,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sex {
    /// Boy.
    B,
    /// Girl.
    G,
}

/// Statuses announced by Reality before each birth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DaltonismContext {
    pub father: Father,
    pub mother: Mother,
    pub sex: Sex,
}

impl DaltonismContext {
    pub fn new(father: Father, mother: Mother, sex: Sex) -> Self {
        Self { father, mother, sex }
    }

    /// All twelve contexts.
    pub fn all() -> Vec<Self> {
        let mut out = Vec::with_capacity(12);
        for father in [Father::N, Father::A] {
            for mother in [Mother::N, Mother::C, Mother::A] {
                for sex in [Sex::B, Sex::G] {
                    out.push(Self::new(father, mother, sex));
                }
            }
        }
        out
    }

    /// Three-letter code such as `"NCB"`.
    pub fn code(&self) -> String {
        let f = match self.father {
            Father::N => 'N',
            Father::A => 'A',
        };
        let m = match self.mother {
            Mother::N => 'N',
            Mother::C => 'C',
            Mother::A => 'A',
        };
        let s = match self.sex {
            Sex::B => 'B',
            Sex::G => 'G',
        };
        [f, m, s].iter().collect()
    }
}

/// Probability that the child is affected.
///
/// The condition is X-linked recessive: a boy inherits his single X from the
/// mother, a girl is affected only if both parental X chromosomes carry it.
pub fn daltonism_forecast(ctx: DaltonismContext) -> f64 {
    use Father as F;
    use Mother as M;
    match (ctx.father, ctx.mother, ctx.sex) {
        (F::N, M::N, _) | (F::N, M::C, Sex::G) | (F::N, M::A, Sex::G) | (F::A, M::N, _) => 0.0,
        (F::N, M::C, Sex::B) | (F::A, M::C, _) => 0.5,
        (F::N, M::A, Sex::B) | (F::A, M::A, _) => 1.0,
    }
}

/// Bernoulli forecasts for a recorded sequence of birth contexts.
#[derive(Debug, Clone)]
pub struct DaltonismForecaster {
    contexts: Vec<DaltonismContext>,
}

impl DaltonismForecaster {
    pub fn new(contexts: Vec<DaltonismContext>) -> Self {
        Self { contexts }
    }
}

impl Forecaster for DaltonismForecaster {
    fn name(&self) -> String {
        "daltonism".into()
    }

    fn forecast(&mut self, view: &SessionView<'_>, _: &mut SessionRng) -> Result<DiscreteDistribution> {
        let ctx = self
            .contexts
            .get(view.step - 1)
            .ok_or(Error::StreamExhausted(view.step))?;
        DiscreteDistribution::bernoulli(daltonism_forecast(*ctx))
    }
}

// ---------------------------------------------------------------------------
// Conditioning of a joint measure
// ---------------------------------------------------------------------------

/// Probability measure on `Y^N` given by explicit weights over all N-tuples,
/// indexed lexicographically (first coordinate most significant).
#[derive(Debug, Clone, PartialEq)]
pub struct JointMeasure {
    space: OutcomeSpace,
    horizon: usize,
    weights: Vec<f64>,
}

impl JointMeasure {
    pub fn new(space: OutcomeSpace, horizon: usize, weights: Vec<f64>) -> Result<Self> {
        let expected = space
            .len()
            .checked_pow(horizon as u32)
            .ok_or(Error::HorizonTooLarge { max: 0, got: horizon })?;
        // Same checks as a distribution on the product space.
        let product = DiscreteDistribution::new(OutcomeSpace::numeric(expected)?, weights)?;
        Ok(Self {
            space,
            horizon,
            weights: product.probs().to_vec(),
        })
    }

    /// The product measure `P ⊗ … ⊗ P`.
    pub fn iid(marginal: &DiscreteDistribution, horizon: usize) -> Result<Self> {
        let space = marginal.space().clone();
        let size = space.len().pow(horizon as u32);
        let weights = (0..size)
            .map(|idx| {
                space
                    .decode_tuple(idx, horizon)
                    .iter()
                    .map(|&y| marginal.prob(y))
                    .product()
            })
            .collect();
        Self::new(space, horizon, weights)
    }

    pub fn space(&self) -> &OutcomeSpace {
        &self.space
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Q({y_1 … y_N})` for a full path.
    pub fn path_probability(&self, path: &[usize]) -> Result<f64> {
        if path.len() != self.horizon {
            return Err(Error::HorizonMismatch {
                expected: self.horizon,
                got: path.len(),
            });
        }
        Ok(self.weights[self.space.encode_tuple(path)])
    }

    /// Mass of the cylinder of paths starting with `prefix`.
    pub fn prefix_probability(&self, prefix: &[usize]) -> Result<f64> {
        Ok(self.cylinder(prefix)?.iter().sum())
    }

    fn cylinder(&self, prefix: &[usize]) -> Result<&[f64]> {
        if prefix.len() > self.horizon {
            return Err(Error::PrefixTooLong {
                len: prefix.len(),
                horizon: self.horizon,
            });
        }
        if let Some(&bad) = prefix.iter().find(|&&y| y >= self.space.len()) {
            return Err(Error::DimensionMismatch {
                expected: self.space.len(),
                got: bad + 1,
            });
        }
        let block = self.space.len().pow((self.horizon - prefix.len()) as u32);
        let start = self.space.encode_tuple(prefix) * block;
        Ok(&self.weights[start..start + block])
    }

    /// Distribution of the next coordinate given the observed `prefix`.
    pub fn condition(&self, prefix: &[usize]) -> Result<DiscreteDistribution> {
        if prefix.len() >= self.horizon {
            return Err(Error::PrefixTooLong {
                len: prefix.len(),
                horizon: self.horizon,
            });
        }
        let cylinder = self.cylinder(prefix)?;
        let total: f64 = cylinder.iter().sum();
        if total <= 0.0 {
            return Err(Error::ZeroProbabilityPrefix);
        }
        let sub = cylinder.len() / self.space.len();
        let mut probs: Vec<f64> = cylinder
            .chunks(sub)
            .map(|c| c.iter().sum::<f64>() / total)
            .collect();
        let sum: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= sum);
        DiscreteDistribution::new(self.space.clone(), probs)
    }

    /// Joint distribution of the next `k` coordinates given `prefix`.
    pub fn condition_window(&self, prefix: &[usize], k: usize) -> Result<DiscreteDistribution> {
        if prefix.len() + k > self.horizon {
            return Err(Error::PrefixTooLong {
                len: prefix.len() + k,
                horizon: self.horizon,
            });
        }
        let cylinder = self.cylinder(prefix)?;
        let total: f64 = cylinder.iter().sum();
        if total <= 0.0 {
            return Err(Error::ZeroProbabilityPrefix);
        }
        let sub = cylinder.len() / self.space.len().pow(k as u32);
        let probs: Vec<f64> = cylinder
            .chunks(sub)
            .map(|c| c.iter().sum::<f64>() / total)
            .collect();
        let sum: f64 = probs.iter().sum();
        DiscreteDistribution::new(
            self.space.power(k)?,
            probs.into_iter().map(|p| p / sum).collect(),
        )
    }
}

/// Forecasts by conditioning a joint measure on the outcomes seen so far.
#[derive(Debug, Clone)]
pub struct ConditioningForecaster {
    measure: JointMeasure,
}

impl ConditioningForecaster {
    pub fn new(measure: JointMeasure) -> Self {
        Self { measure }
    }
}

impl Forecaster for ConditioningForecaster {
    fn name(&self) -> String {
        format!("conditioning[N={}]", self.measure.horizon)
    }

    fn forecast(&mut self, view: &SessionView<'_>, _: &mut SessionRng) -> Result<DiscreteDistribution> {
        self.measure.condition(view.outcomes)
    }
}

// ---------------------------------------------------------------------------
// Replay and synthetic forecasters
// ---------------------------------------------------------------------------

/// Replays an externally supplied forecast sequence in order.
#[derive(Debug, Clone)]
pub struct StreamForecaster {
    forecasts: Vec<DiscreteDistribution>,
    cursor: usize,
}

impl StreamForecaster {
    pub fn new(forecasts: Vec<DiscreteDistribution>) -> Self {
        Self {
            forecasts,
            cursor: 0,
        }
    }

    pub fn remaining(&self) -> usize {
        self.forecasts.len() - self.cursor
    }
}

impl Forecaster for StreamForecaster {
    fn name(&self) -> String {
        "stream".into()
    }

    fn forecast(&mut self, view: &SessionView<'_>, _: &mut SessionRng) -> Result<DiscreteDistribution> {
        let next = self
            .forecasts
            .get(self.cursor)
            .cloned()
            .ok_or(Error::StreamExhausted(view.step))?;
        self.cursor += 1;
        Ok(next)
    }
}

/// Announces the same distribution every step.
#[derive(Debug, Clone)]
pub struct FixedForecaster(pub DiscreteDistribution);

impl Forecaster for FixedForecaster {
    fn name(&self) -> String {
        "fixed".into()
    }

    fn forecast(&mut self, _: &SessionView<'_>, _: &mut SessionRng) -> Result<DiscreteDistribution> {
        Ok(self.0.clone())
    }
}

/// Random full-support distribution: independent weights in `[floor, 1)`,
/// normalized.
pub fn random_full_support(space: &OutcomeSpace, floor: f64, rng: &mut SessionRng) -> DiscreteDistribution {
    let weights: Vec<f64> = (0..space.len()).map(|_| rng.gen_range(floor..1.0)).collect();
    let total: f64 = weights.iter().sum();
    DiscreteDistribution::new(space.clone(), weights.iter().map(|w| w / total).collect())
        .expect("positive normalized weights")
}

/// Fresh random full-support forecast every step.
#[derive(Debug, Clone)]
pub struct RandomForecaster {
    space: OutcomeSpace,
    floor: f64,
}

impl RandomForecaster {
    pub fn new(space: OutcomeSpace) -> Self {
        Self { space, floor: 0.05 }
    }
}

impl Forecaster for RandomForecaster {
    fn name(&self) -> String {
        "random".into()
    }

    fn forecast(&mut self, _: &SessionView<'_>, rng: &mut SessionRng) -> Result<DiscreteDistribution> {
        Ok(random_full_support(&self.space, self.floor, rng))
    }
}

/// Multiplies each weight of a base forecast by an independent factor drawn
/// from `[1 − spread, 1 + spread]` and renormalizes. Keeps full support when
/// the base has it and `spread < 1`.
#[derive(Debug, Clone)]
pub struct PerturbedForecaster {
    base: DiscreteDistribution,
    spread: f64,
}

impl PerturbedForecaster {
    pub fn new(base: DiscreteDistribution, spread: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&spread) {
            return Err(Error::Config(format!("perturbation spread {spread} must lie in [0, 1)")));
        }
        Ok(Self { base, spread })
    }
}

impl Forecaster for PerturbedForecaster {
    fn name(&self) -> String {
        format!("perturbed[{}]", self.spread)
    }

    fn forecast(&mut self, _: &SessionView<'_>, rng: &mut SessionRng) -> Result<DiscreteDistribution> {
        let weights: Vec<f64> = self
            .base
            .probs()
            .iter()
            .map(|&p| p * (1.0 + self.spread * (2.0 * rng.gen::<f64>() - 1.0)))
            .collect();
        let total: f64 = weights.iter().sum();
        DiscreteDistribution::new(
            self.base.space().clone(),
            weights.iter().map(|w| w / total).collect(),
        )
    }
}

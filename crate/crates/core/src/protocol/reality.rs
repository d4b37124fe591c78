use rand::Rng;

use super::session::{Reality, RealityView};
use crate::distributions::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::rng::SessionRng;

/// Draws an outcome from `dist`.
pub fn sample(dist: &DiscreteDistribution, rng: &mut SessionRng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in dist.probs().iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last_positive = i;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

/// Samples each outcome from the first announced forecast, as when the
/// forecasts are the true conditional probabilities.
#[derive(Debug, Clone, Copy, Default)]
pub struct HonestReality;

impl Reality for HonestReality {
    fn name(&self) -> String {
        "honest".into()
    }

    fn outcome(&mut self, view: &RealityView<'_>, rng: &mut SessionRng) -> Result<usize> {
        let forecast = view
            .forecasts
            .first()
            .ok_or_else(|| Error::Config("honest reality needs a forecast".into()))?;
        Ok(sample(forecast, rng))
    }
}

/// Plays the same label every step.
#[derive(Debug, Clone, Copy)]
pub struct ConstantReality(pub usize);

impl Reality for ConstantReality {
    fn name(&self) -> String {
        format!("constant:{}", self.0)
    }

    fn outcome(&mut self, _: &RealityView<'_>, _: &mut SessionRng) -> Result<usize> {
        Ok(self.0)
    }
}

/// Replays a recorded outcome sequence.
#[derive(Debug, Clone)]
pub struct ScriptedReality {
    outcomes: Vec<usize>,
}

impl ScriptedReality {
    pub fn new(outcomes: Vec<usize>) -> Self {
        Self { outcomes }
    }
}

impl Reality for ScriptedReality {
    fn name(&self) -> String {
        "scripted".into()
    }

    fn outcome(&mut self, view: &RealityView<'_>, _: &mut SessionRng) -> Result<usize> {
        self.outcomes
            .get(view.step - 1)
            .copied()
            .ok_or(Error::StreamExhausted(view.step))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::OutcomeSpace;
    use crate::rng::session_rng;

    #[test]
    fn sampling_matches_weights() {
        let d = DiscreteDistribution::new(OutcomeSpace::numeric(3).unwrap(), vec![0.2, 0.0, 0.8]).unwrap();
        let mut rng = session_rng(5);
        let mut counts = [0usize; 3];
        for _ in 0..20_000 {
            counts[sample(&d, &mut rng)] += 1;
        }
        assert_eq!(counts[1], 0);
        let freq = counts[2] as f64 / 20_000.0;
        assert!((freq - 0.8).abs() < 0.015, "{freq}");
    }

    #[test]
    fn point_mass_always_sampled() {
        let d = DiscreteDistribution::point_mass(OutcomeSpace::numeric(4).unwrap(), 3).unwrap();
        let mut rng = session_rng(0);
        assert!((0..100).all(|_| sample(&d, &mut rng) == 3));
    }
}

//! Certificates for upper game-theoretic probability.
//!
//! A strategy certifies `P̄(not E) ≤ ε` on a family of transcripts when on
//! each of them its capital stays nonnegative and either `E` holds or
//! `K_N ≥ 1/ε`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sceptics::{run_forcing_session, AdditiveSceptic, ForcingTranscript};

/// Largest horizon enumerated exhaustively (`2^12` paths).
pub const MAX_EXHAUSTIVE_HORIZON: usize = 12;

/// Transcripts a certificate is checked on.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceFamily {
    /// Every `y ∈ {0, 1}^N` against the given forecast sequence.
    ExhaustiveBinary { forecasts: Vec<f64> },
    /// Explicit `(forecasts, outcomes)` pairs.
    Explicit {
        horizon: usize,
        instances: Vec<(Vec<f64>, Vec<f64>)>,
    },
}

impl InstanceFamily {
    /// All binary paths of length `horizon` against the constant forecast
    /// `0`, where every gap is `0` or `1`. Against `½` the mean gap never
    /// exceeds `½` and the forcing event is vacuous for small `δN`.
    pub fn exhaustive_binary(horizon: usize) -> Self {
        Self::ExhaustiveBinary {
            forecasts: vec![0.0; horizon],
        }
    }

    pub fn horizon(&self) -> usize {
        match self {
            Self::ExhaustiveBinary { forecasts } => forecasts.len(),
            Self::Explicit { horizon, .. } => *horizon,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub forecasts: Vec<f64>,
    pub outcomes: Vec<f64>,
    pub final_capital: Option<f64>,
    pub min_capital: Option<f64>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub holds: bool,
    pub epsilon: f64,
    pub horizon: usize,
    pub transcripts_checked: usize,
    pub strategy: String,
    pub counterexample: Option<Counterexample>,
}

/// The forcing event `(1/N) Σ (y_n − a_n) < (δN)^{-1/2}`.
pub fn mean_gap_event(delta: f64) -> impl Fn(&ForcingTranscript) -> bool {
    move |t| t.mean_gap() < (delta * t.horizon as f64).powf(-0.5)
}

fn check_one(
    strategy: &dyn Fn() -> Box<dyn AdditiveSceptic>,
    event: &dyn Fn(&ForcingTranscript) -> bool,
    epsilon: f64,
    horizon: usize,
    forecasts: &[f64],
    outcomes: &[f64],
) -> Option<Counterexample> {
    let fail = |reason: String, t: Option<&ForcingTranscript>| Counterexample {
        forecasts: forecasts.to_vec(),
        outcomes: outcomes.to_vec(),
        final_capital: t.map(ForcingTranscript::final_capital),
        min_capital: t.map(ForcingTranscript::min_capital),
        reason,
    };
    if forecasts.len() != horizon {
        return Some(fail(format!("transcript has {} steps, expected {horizon}", forecasts.len()), None));
    }
    let mut sceptic = strategy();
    let t = match run_forcing_session(sceptic.as_mut(), horizon, forecasts, outcomes) {
        Ok(t) => t,
        Err(e) => return Some(fail(format!("invalid move: {e}"), None)),
    };
    if t.min_capital() < 0.0 {
        return Some(fail("capital went negative".into(), Some(&t)));
    }
    if !(event(&t) || t.final_capital() >= 1.0 / epsilon) {
        return Some(fail("event fails and K_N < 1/ε".into(), Some(&t)));
    }
    None
}

/// Checks the strategy on every transcript of `family`; stops at the first
/// counterexample.
pub fn upper_probability_certificate(
    strategy: &dyn Fn() -> Box<dyn AdditiveSceptic>,
    event: &dyn Fn(&ForcingTranscript) -> bool,
    epsilon: f64,
    family: &InstanceFamily,
) -> Result<Certificate> {
    if !(epsilon > 0.0) {
        return Err(Error::Config(format!("ε must be positive, got {epsilon}")));
    }
    let horizon = family.horizon();
    let mut cert = Certificate {
        holds: true,
        epsilon,
        horizon,
        transcripts_checked: 0,
        strategy: strategy().name(),
        counterexample: None,
    };
    let mut record = |c: Option<Counterexample>| {
        cert.transcripts_checked += 1;
        if c.is_some() {
            cert.holds = false;
            cert.counterexample = c;
            false
        } else {
            true
        }
    };
    match family {
        InstanceFamily::ExhaustiveBinary { forecasts } => {
            if horizon > MAX_EXHAUSTIVE_HORIZON {
                return Err(Error::HorizonTooLarge {
                    max: MAX_EXHAUSTIVE_HORIZON,
                    got: horizon,
                });
            }
            let mut outcomes = vec![0.0; horizon];
            for bits in 0u32..(1 << horizon) {
                for (i, y) in outcomes.iter_mut().enumerate() {
                    *y = f64::from((bits >> (horizon - 1 - i)) & 1);
                }
                if !record(check_one(strategy, event, epsilon, horizon, forecasts, &outcomes)) {
                    break;
                }
            }
        }
        InstanceFamily::Explicit { instances, .. } => {
            for (a, y) in instances {
                if !record(check_one(strategy, event, epsilon, horizon, a, y)) {
                    break;
                }
            }
        }
    }
    Ok(cert)
}

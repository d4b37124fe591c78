//! Game-theoretic probability engine.
//!
//! Forecasts are tested by betting: a Sceptic bets against each forecast at
//! the odds it implies, and the resulting capital (a test martingale) measures
//! the evidence against the Forecaster. The crate provides
//!
//! - finite distributions and the Hellinger, χ² and Kullback–Leibler
//!   divergences ([`distributions`]);
//! - the one-step-ahead testing protocol, bet validation and the Jeffreys
//!   evidence scale ([`protocol`]);
//! - Forecaster strategies ([`forecasters`]) and constructive Sceptic
//!   strategies, including the two-forecaster team and tracking strategies
//!   and Kolmogorov's forcing martingale ([`sceptics`]);
//! - two-steps-ahead point prediction with futures settlement ([`futures`]);
//! - Bayes-optimal decision making and regret experiments ([`decision`]);
//! - Monte Carlo, certificate checking, CSV ingestion and reports
//!   ([`harness`]).
// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decision;
pub mod distributions;
pub mod error;
pub mod forecasters;
pub mod futures;
pub mod harness;
pub mod protocol;
pub mod rng;
pub mod sceptics;

pub use distributions::{DiscreteDistribution, OutcomeSpace};
pub use error::{Error, Result};

//! Sceptic strategies.
//!
//! - [`basic`]: vacuous, fixed, random and plug-in likelihood-ratio bets.
//! - [`jeffreys`]: betting against two forecasters at once. The team
//!   strategy bets the normalized geometric mean of the two forecasts, so
//!   that `√(K¹_n K²_n) = ∏ 1/H(P¹_i, P²_i)`; the tracking strategy lets a
//!   second Sceptic follow the first at a cost governed by the χ² integral.
//! - [`forcing`]: Kolmogorov's martingale for the additive protocol with a
//!   finite horizon, and its adapter to classical devices.

pub mod basic;
pub mod forcing;
pub mod jeffreys;

pub use basic::{FixedPayoffSceptic, LaplaceSceptic, RandomBetSceptic, VacuousSceptic};
pub use forcing::{
    forcing_dichotomy_check, kolmogorov_strategy, run_forcing_session, AdditiveSceptic,
    ClassicalForcingSceptic, ForcingState, ForcingStep, ForcingTranscript, KolmogorovSceptic,
    ZeroStake,
};
pub use jeffreys::{
    geometric_identity, jeffreys_team_bets, run_team_session, run_tracking_session,
    tracking_bets, tracking_components, DualCapital, DualTranscript, JeffreysTeam, TeamSceptic,
    TeamStep, TrackingStep, TrackingTranscript,
};

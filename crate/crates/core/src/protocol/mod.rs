//! One-step-ahead testing protocol.
//!
//! ```text
//! K_0 := 1
//! FOR n = 1, 2, …:
//!     Forecaster announces P_n
//!     Sceptic announces f_n ≥ 0 with P_n(f_n) = 1
//!     Reality announces y_n
//!     K_n := K_{n-1} f_n(y_n)
//! ```
//!
//! [`run_session`] drives the three players in exactly this order; each
//! player only sees moves announced before its own.

mod bet;
mod capital;
mod evidence;
mod reality;
mod session;

pub use bet::{additive_to_multiplicative, validate_bet, BetFunction, UNIT_EXPECTATION_TOLERANCE};
pub use capital::CapitalProcess;
pub use evidence::{jeffreys_verdict, EvidenceLevel, EvidenceVerdict};
pub use reality::{sample, ConstantReality, HonestReality, ScriptedReality};
pub use session::{
    run_session, run_session_with_tolerance, Forecaster, Reality, RealityView, Sceptic,
    SessionMeta, SessionView, StepRecord, Transcript,
};

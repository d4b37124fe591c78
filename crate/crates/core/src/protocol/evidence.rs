use serde::Serialize;

use crate::error::{Error, Result};

/// Bands of the Jeffreys evidence scale for capital `K`.
///
/// Intervals are closed below: `[1, √10)`, `[√10, 10)`, `[10, 10^1.5)`,
/// `[10^1.5, 100)`, `[100, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceLevel {
    NoEvidence,
    BareMention,
    Substantial,
    Strong,
    VeryStrong,
    Decisive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvidenceVerdict {
    pub level: EvidenceLevel,
    pub capital: f64,
}

pub fn jeffreys_verdict(capital: f64) -> Result<EvidenceVerdict> {
    if capital.is_nan() || capital < 0.0 {
        return Err(Error::NegativeCapital(capital));
    }
    let sqrt10 = 10f64.sqrt();
    let level = if capital < 1.0 {
        EvidenceLevel::NoEvidence
    } else if capital < sqrt10 {
        EvidenceLevel::BareMention
    } else if capital < 10.0 {
        EvidenceLevel::Substantial
    } else if capital < 10.0 * sqrt10 {
        EvidenceLevel::Strong
    } else if capital < 100.0 {
        EvidenceLevel::VeryStrong
    } else {
        EvidenceLevel::Decisive
    };
    Ok(EvidenceVerdict { level, capital })
}

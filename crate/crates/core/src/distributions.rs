//! Finite outcome spaces, discrete probability measures and the divergences
//! between them.
//!
//! | quantity | definition | range |
//! |----------|------------|-------|
//! | Hellinger integral `H(P,Q)` | `Σ √(P(y)Q(y))` | `[0, 1]` |
//! | Hellinger distance `ρ_H` | `Σ (√P(y) − √Q(y))² = 2 − 2H` | `[0, 2]` |
//! | χ² integral `χ(P,Q)` | `Σ Q(y)²/P(y)` | `[1, ∞]` |
//! | χ² distance `ρ_χ` | `Σ (P(y) − Q(y))²/P(y) = χ − 1` | `[0, ∞]` |
//! | Kullback–Leibler `ρ_K` | `Σ P(y) ln(P(y)/Q(y))` | `[0, ∞]` |
//!
//! Zero-mass conventions: `0²/0 = 0`, `q²/0 = ∞` for `q > 0`, `0·ln 0 = 0`
//! and `p·ln(p/0) = ∞`. All divergences are total functions; infinity is a
//! value, not an error.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Tolerance on `|Σ p − 1|` accepted at construction.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// Ordered, finite set of distinct outcome labels.
///
/// The order is the fixed linear order used for tie-breaking and
/// serialization. Cloning is cheap (the labels are shared).
#[derive(Clone)]
pub struct OutcomeSpace {
    labels: Arc<[String]>,
}

impl OutcomeSpace {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::EmptySpace);
        }
        for (i, label) in labels.iter().enumerate() {
            if labels[..i].contains(label) {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        Ok(Self {
            labels: labels.into(),
        })
    }

    /// Labels `"0"`, `"1"`, …, `"m-1"`.
    pub fn numeric(m: usize) -> Result<Self> {
        Self::new((0..m).map(|i| i.to_string()))
    }

    /// The space `{0, 1}` used for Bernoulli forecasts.
    pub fn binary() -> Self {
        Self::numeric(2).expect("two distinct labels")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Numeric value of every label, if all labels parse as reals.
    pub fn numeric_values(&self) -> Option<Vec<f64>> {
        self.labels.iter().map(|l| l.parse::<f64>().ok()).collect()
    }

    /// The product space `Y^k`, labels joined by `,` in lexicographic order
    /// (first coordinate most significant).
    pub fn power(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Config("power of an outcome space needs k >= 1".into()));
        }
        let size = self.len().pow(k as u32);
        let labels = (0..size).map(|idx| {
            self.decode_tuple(idx, k)
                .iter()
                .map(|&y| self.label(y))
                .collect::<Vec<_>>()
                .join(",")
        });
        Self::new(labels)
    }

    /// Index of a tuple of outcomes in the product space `Y^k`.
    pub fn encode_tuple(&self, tuple: &[usize]) -> usize {
        tuple.iter().fold(0, |acc, &y| acc * self.len() + y)
    }

    /// Inverse of [`OutcomeSpace::encode_tuple`].
    pub fn decode_tuple(&self, mut index: usize, k: usize) -> Vec<usize> {
        let mut tuple = vec![0; k];
        for slot in tuple.iter_mut().rev() {
            *slot = index % self.len();
            index /= self.len();
        }
        tuple
    }
}

impl PartialEq for OutcomeSpace {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.labels, &other.labels) || self.labels == other.labels
    }
}

impl Eq for OutcomeSpace {}

impl fmt::Debug for OutcomeSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.labels.iter()).finish()
    }
}

/// Probability measure on a finite [`OutcomeSpace`].
#[derive(Clone, PartialEq)]
pub struct DiscreteDistribution {
    space: OutcomeSpace,
    probs: Arc<[f64]>,
}

impl DiscreteDistribution {
    /// Validates nonnegativity and normalization (within
    /// [`NORMALIZATION_TOLERANCE`]) and then rescales the weights so they sum
    /// to one.
    pub fn new(space: OutcomeSpace, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != space.len() {
            return Err(Error::DimensionMismatch {
                expected: space.len(),
                got: probs.len(),
            });
        }
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidProbability {
                    label: space.label(i).to_string(),
                    value: p,
                });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::NotNormalized { sum });
        }
        let probs: Vec<f64> = if sum == 1.0 {
            probs
        } else {
            probs.into_iter().map(|p| p / sum).collect()
        };
        Ok(Self {
            space,
            probs: probs.into(),
        })
    }

    pub fn uniform(space: OutcomeSpace) -> Self {
        let m = space.len();
        Self {
            probs: vec![1.0 / m as f64; m].into(),
            space,
        }
    }

    /// Uniform on the first `m` labels of `space`, zero elsewhere.
    pub fn uniform_prefix(space: OutcomeSpace, m: usize) -> Result<Self> {
        if m == 0 || m > space.len() {
            return Err(Error::DimensionMismatch {
                expected: space.len(),
                got: m,
            });
        }
        let probs = (0..space.len())
            .map(|i| if i < m { 1.0 / m as f64 } else { 0.0 })
            .collect::<Vec<_>>();
        Ok(Self {
            space,
            probs: probs.into(),
        })
    }

    pub fn point_mass(space: OutcomeSpace, index: usize) -> Result<Self> {
        if index >= space.len() {
            return Err(Error::DimensionMismatch {
                expected: space.len(),
                got: index + 1,
            });
        }
        let mut probs = vec![0.0; space.len()];
        probs[index] = 1.0;
        Ok(Self {
            space,
            probs: probs.into(),
        })
    }

    /// `(1 − p, p)` on the binary space `{0, 1}`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        Self::bernoulli_on(OutcomeSpace::binary(), p)
    }

    pub fn bernoulli_on(space: OutcomeSpace, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::OutOfUnitInterval {
                what: "Bernoulli parameter",
                value: p,
            });
        }
        Self::new(space, vec![1.0 - p, p])
    }

    pub fn space(&self) -> &OutcomeSpace {
        &self.space
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, index: usize) -> f64 {
        self.probs[index]
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn is_full_support(&self) -> bool {
        self.probs.iter().all(|&p| p > 0.0)
    }

    /// Number of labels with positive mass.
    pub fn support_size(&self) -> usize {
        self.probs.iter().filter(|&&p| p > 0.0).count()
    }

    /// `Σ_y f(y) P({y})`, treating `0 · f(y)` as zero even when `f(y)` is
    /// infinite.
    pub fn expectation(&self, f: &[f64]) -> Result<f64> {
        if f.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: f.len(),
            });
        }
        Ok(self
            .probs
            .iter()
            .zip(f)
            .filter(|(&p, _)| p > 0.0)
            .map(|(&p, &v)| p * v)
            .sum())
    }
}

impl fmt::Debug for DiscreteDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.space.labels().iter().zip(self.probs.iter()))
            .finish()
    }
}

fn same_space(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<()> {
    if p.space != q.space {
        return Err(Error::SpaceMismatch);
    }
    Ok(())
}

/// Hellinger integral (Bhattacharyya coefficient) `Σ √(P(y)Q(y))`.
///
/// Returns exactly 1 when the weight vectors coincide and a value strictly
/// below 1 otherwise.
pub fn hellinger_integral(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    same_space(p, q)?;
    if p.probs == q.probs {
        return Ok(1.0);
    }
    let h: f64 = p
        .probs
        .iter()
        .zip(q.probs.iter())
        .map(|(&a, &b)| (a * b).sqrt())
        .sum();
    // H < 1 for P ≠ Q; rounding may land on or above 1 for near-identical pairs.
    Ok(if h >= 1.0 { 1.0 - f64::EPSILON / 2.0 } else { h })
}

/// Hellinger distance `2 − 2H(P,Q)`.
pub fn hellinger_distance(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    Ok(2.0 - 2.0 * hellinger_integral(p, q)?)
}

/// χ² integral `Σ Q(y)²/P(y)`, with `0²/0 = 0` and `q²/0 = ∞`.
pub fn chi2_integral(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    same_space(p, q)?;
    if p.probs == q.probs {
        return Ok(1.0);
    }
    let chi: f64 = p
        .probs
        .iter()
        .zip(q.probs.iter())
        .map(|(&a, &b)| ratio_square(b, a))
        .sum();
    // χ > 1 for P ≠ Q on full support.
    Ok(if chi <= 1.0 { 1.0 + f64::EPSILON } else { chi })
}

/// χ² distance `Σ (P(y) − Q(y))²/P(y)`.
pub fn chi2_distance(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    same_space(p, q)?;
    Ok(p.probs
        .iter()
        .zip(q.probs.iter())
        .map(|(&a, &b)| ratio_square(a - b, a))
        .sum())
}

fn ratio_square(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num * num / den
    }
}

/// Kullback–Leibler divergence `Σ P(y) ln(P(y)/Q(y))`.
pub fn kl_distance(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    same_space(p, q)?;
    let kl: f64 = p
        .probs
        .iter()
        .zip(q.probs.iter())
        .map(|(&a, &b)| {
            if a == 0.0 {
                0.0
            } else if b == 0.0 {
                f64::INFINITY
            } else {
                a * (a / b).ln()
            }
        })
        .sum();
    Ok(kl.max(0.0))
}

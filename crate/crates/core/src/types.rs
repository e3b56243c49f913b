//! Relay type model: the marginal distribution of relay-destination channel
//! gains, its equidistant quantization into `K` discrete types, and sampling
//! of true type vectors.
//!
//! Only per-subcarrier marginals are represented. Supports must be bounded;
//! callers holding an unbounded model truncate it at a confidence level first.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Tolerance on probability-column sums.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// Marginal distribution of a relay's type on one subcarrier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", try_from = "RawDistribution")]
pub enum TypeDistribution {
    Uniform {
        low: f64,
        high: f64,
    },
    /// Exponential with the given rate, truncated to `[low, high]`.
    TruncatedExponential {
        low: f64,
        high: f64,
        rate: f64,
    },
    /// Piecewise-linear CDF through `(gain, probability)` points.
    Empirical {
        points: Vec<(f64, f64)>,
    },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawDistribution {
    Uniform { low: f64, high: f64 },
    TruncatedExponential { low: f64, high: f64, rate: f64 },
    Empirical { points: Vec<(f64, f64)> },
}

impl TryFrom<RawDistribution> for TypeDistribution {
    type Error = Error;

    fn try_from(raw: RawDistribution) -> Result<Self> {
        let dist = match raw {
            RawDistribution::Uniform { low, high } => TypeDistribution::Uniform { low, high },
            RawDistribution::TruncatedExponential { low, high, rate } => {
                TypeDistribution::TruncatedExponential { low, high, rate }
            }
            RawDistribution::Empirical { points } => TypeDistribution::Empirical { points },
        };
        dist.validate()?;
        Ok(dist)
    }
}

impl TypeDistribution {
    pub fn uniform(low: f64, high: f64) -> Result<Self> {
        let d = TypeDistribution::Uniform { low, high };
        d.validate()?;
        Ok(d)
    }

    pub fn truncated_exponential(low: f64, high: f64, rate: f64) -> Result<Self> {
        let d = TypeDistribution::TruncatedExponential { low, high, rate };
        d.validate()?;
        Ok(d)
    }

    pub fn empirical(points: Vec<(f64, f64)>) -> Result<Self> {
        let d = TypeDistribution::Empirical { points };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let (low, high) = self.support();
        if !low.is_finite() || !high.is_finite() {
            return invalid("type support must be bounded; truncate at a confidence level first");
        }
        if low < 0.0 {
            return invalid(format!(
                "channel gains must be non-negative, got low = {low}"
            ));
        }
        if low >= high {
            return invalid(format!("degenerate type support [{low}, {high}]"));
        }
        match self {
            TypeDistribution::Uniform { .. } => Ok(()),
            TypeDistribution::TruncatedExponential { rate, .. } => {
                if rate.is_finite() && *rate > 0.0 {
                    Ok(())
                } else {
                    invalid(format!(
                        "exponential rate must be positive and finite, got {rate}"
                    ))
                }
            }
            TypeDistribution::Empirical { points } => {
                if points.len() < 2 {
                    return invalid("empirical CDF needs at least two points");
                }
                if points[0].1 != 0.0 || points[points.len() - 1].1 != 1.0 {
                    return invalid("empirical CDF must start at probability 0 and end at 1");
                }
                for w in points.windows(2) {
                    if !(w[1].0 > w[0].0) {
                        return invalid("empirical CDF gains must be strictly increasing");
                    }
                    if !(w[1].1 >= w[0].1) || w[1].1.is_nan() {
                        return invalid("empirical CDF probabilities must be non-decreasing");
                    }
                }
                Ok(())
            }
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match self {
            TypeDistribution::Uniform { low, high }
            | TypeDistribution::TruncatedExponential { low, high, .. } => (*low, *high),
            TypeDistribution::Empirical { points } => match (points.first(), points.last()) {
                (Some(a), Some(b)) => (a.0, b.0),
                _ => (f64::NAN, f64::NAN),
            },
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let (low, high) = self.support();
        if x <= low {
            return 0.0;
        }
        if x >= high {
            return 1.0;
        }
        match self {
            TypeDistribution::Uniform { .. } => (x - low) / (high - low),
            TypeDistribution::TruncatedExponential { rate, .. } => {
                let z = -(-rate * (high - low)).exp_m1();
                -(-rate * (x - low)).exp_m1() / z
            }
            TypeDistribution::Empirical { points } => {
                let i = segment_index(points, x);
                let (x0, p0) = points[i];
                let (x1, p1) = points[i + 1];
                p0 + (p1 - p0) * (x - x0) / (x1 - x0)
            }
        }
    }

    /// Density; zero outside the support.
    pub fn pdf(&self, x: f64) -> f64 {
        let (low, high) = self.support();
        if x < low || x > high {
            return 0.0;
        }
        match self {
            TypeDistribution::Uniform { .. } => 1.0 / (high - low),
            TypeDistribution::TruncatedExponential { rate, .. } => {
                let z = -(-rate * (high - low)).exp_m1();
                rate * (-rate * (x - low)).exp() / z
            }
            TypeDistribution::Empirical { points } => {
                let i = segment_index(points, x);
                let (x0, p0) = points[i];
                let (x1, p1) = points[i + 1];
                (p1 - p0) / (x1 - x0)
            }
        }
    }

    /// Inverse CDF for `u` in `[0, 1]`, clamped to the support.
    pub fn quantile(&self, u: f64) -> f64 {
        let (low, high) = self.support();
        let u = u.clamp(0.0, 1.0);
        let x = match self {
            TypeDistribution::Uniform { .. } => low + u * (high - low),
            TypeDistribution::TruncatedExponential { rate, .. } => {
                let z = -(-rate * (high - low)).exp_m1();
                low - (-u * z).ln_1p() / rate
            }
            TypeDistribution::Empirical { points } => {
                // first segment whose upper probability reaches u
                let i = points
                    .windows(2)
                    .position(|w| w[1].1 >= u && w[1].1 > w[0].1)
                    .unwrap_or(points.len() - 2);
                let (x0, p0) = points[i];
                let (x1, p1) = points[i + 1];
                if p1 > p0 {
                    x0 + (x1 - x0) * (u - p0) / (p1 - p0)
                } else {
                    x0
                }
            }
        };
        x.clamp(low, high)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.gen::<f64>())
    }
}

fn segment_index(points: &[(f64, f64)], x: f64) -> usize {
    let i = points.partition_point(|p| p.0 <= x);
    i.saturating_sub(1).min(points.len() - 2)
}

/// Quantized relay types with their per-subcarrier probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeGrid {
    deltas: Vec<f64>,
    /// `probs[k][n]`: probability that a relay is of type `k` on subcarrier `n`.
    probs: Vec<Vec<f64>>,
}

impl TypeGrid {
    pub fn new(deltas: Vec<f64>, probs: Vec<Vec<f64>>) -> Result<Self> {
        if deltas.is_empty() {
            return invalid("type grid needs at least one type");
        }
        if !(deltas[0] > 0.0) || deltas.iter().any(|d| !d.is_finite()) {
            return invalid("type grid values must be positive and finite");
        }
        if deltas.windows(2).any(|w| !(w[1] > w[0])) {
            return invalid("type grid must be strictly increasing");
        }
        if probs.len() != deltas.len() {
            return invalid(format!(
                "probability rows ({}) do not match type count ({})",
                probs.len(),
                deltas.len()
            ));
        }
        let n = probs[0].len();
        if n == 0 {
            return invalid("type grid needs at least one subcarrier");
        }
        if probs.iter().any(|row| row.len() != n) {
            return invalid("probability matrix rows have unequal lengths");
        }
        for col in 0..n {
            let mut sum = 0.0;
            for row in &probs {
                let p = row[col];
                if !(p >= 0.0) {
                    return invalid(format!("negative or NaN probability on subcarrier {col}"));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > PROB_SUM_TOL {
                return invalid(format!(
                    "probabilities on subcarrier {col} sum to {sum}, not 1"
                ));
            }
        }
        Ok(TypeGrid { deltas, probs })
    }

    /// Equidistant `k`-type grid of `dist` with identical columns on `n` subcarriers.
    pub fn from_distribution(dist: &TypeDistribution, k: usize, n: usize) -> Result<Self> {
        let deltas = quantize_types(dist, k)?;
        let probs = type_probabilities(dist, &deltas, n)?;
        TypeGrid::new(deltas, probs)
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn probs(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn num_types(&self) -> usize {
        self.deltas.len()
    }

    pub fn num_subcarriers(&self) -> usize {
        self.probs[0].len()
    }

    /// `Σ_n π_kn`.
    pub fn type_mass(&self, k: usize) -> f64 {
        self.probs[k].iter().sum()
    }

    /// `Σ_n Σ_{i>k} π_in`, the aggregate mass strictly above type `k`.
    pub fn mass_above(&self, k: usize) -> f64 {
        self.probs[k + 1..].iter().flatten().sum()
    }
}

/// Equidistant quantization `δ_k = low + (k-1)/K · (high - low)`.
pub fn quantize_types(dist: &TypeDistribution, k: usize) -> Result<Vec<f64>> {
    dist.validate()?;
    if k == 0 {
        return invalid("quantization factor K must be at least 1");
    }
    let (low, high) = dist.support();
    let step = (high - low) / k as f64;
    Ok((0..k).map(|i| low + i as f64 * step).collect())
}

/// Forward-difference type probabilities `π_kn = F(δ_{k+1}) − F(δ_k)` with
/// `δ_{K+1}` taken as the upper support end. Returns a `K × n` matrix with
/// identical columns.
///
/// `deltas` must start at the lower support end so that each column sums to one.
pub fn type_probabilities(
    dist: &TypeDistribution,
    deltas: &[f64],
    n: usize,
) -> Result<Vec<Vec<f64>>> {
    dist.validate()?;
    let (low, high) = dist.support();
    if deltas.is_empty() || n == 0 {
        return invalid("need at least one type and one subcarrier");
    }
    if deltas.windows(2).any(|w| !(w[1] > w[0])) {
        return invalid("types must be strictly increasing");
    }
    if deltas.iter().any(|&d| d < low || d >= high) {
        return invalid(format!("types must lie inside the support [{low}, {high})"));
    }
    if (deltas[0] - low).abs() > 1e-12 * low.abs().max(1.0) {
        return invalid("the first type must equal the lower support end");
    }
    let k = deltas.len();
    let column: Vec<f64> = (0..k)
        .map(|i| {
            let upper = if i + 1 < k { deltas[i + 1] } else { high };
            dist.cdf(upper) - dist.cdf(deltas[i])
        })
        .collect();
    Ok(column.into_iter().map(|p| vec![p; n]).collect())
}

/// `n` independent draws from `dist`.
pub fn sample_type_vector<R: Rng + ?Sized>(
    dist: &TypeDistribution,
    n: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    dist.validate()?;
    Ok((0..n).map(|_| dist.sample(rng)).collect())
}

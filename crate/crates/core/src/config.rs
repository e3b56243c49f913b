//! Experiment configuration.
//!
//! The file form is a flat JSON object; every key is optional and defaults to
//! the reference setup (Uniform[50, 300] types, K = 10, N = 16, c = 1):
//!
//! ```json
//! {
//!   "distribution": {"kind": "uniform", "low": 50, "high": 300},
//!   "quant": 10, "subcarriers": 16, "relays": [2, 6, 10], "budget": 16,
//!   "cost": 1.0, "trials": 1000, "seed": 1, "menu": "second_best",
//!   "information": "asymmetric", "resolution": 1000
//! }
//! ```
//!
//! `relays` and `budget` take a single value or a list (a sweep). Unknown keys
//! are rejected.

use serde::{Deserialize, Serialize};

use crate::contract::MenuKind;
use crate::error::{Error, Result};
use crate::selection::DEFAULT_RESOLUTION;
use crate::types::TypeDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Information {
    /// The source sees every relay's true type and pays first-best pairs.
    Complete,
    /// Relays self-select from the broadcast menu.
    Asymmetric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> From<OneOrMany<T>> for Vec<T> {
    fn from(v: OneOrMany<T>) -> Self {
        match v {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(xs) => xs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawConfig {
    distribution: TypeDistribution,
    quant: usize,
    subcarriers: usize,
    relays: OneOrMany<usize>,
    budget: OneOrMany<f64>,
    cost: f64,
    trials: usize,
    seed: u64,
    menu: MenuKind,
    information: Information,
    resolution: u32,
}

impl Default for RawConfig {
    fn default() -> Self {
        let d = ExperimentConfig::default();
        RawConfig {
            distribution: d.distribution,
            quant: d.quant,
            subcarriers: d.subcarriers,
            relays: OneOrMany::Many(d.relays),
            budget: OneOrMany::Many(d.budget),
            cost: d.cost,
            trials: d.trials,
            seed: d.seed,
            menu: d.menu,
            information: d.information,
            resolution: d.resolution,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub distribution: TypeDistribution,
    /// Number of quantized types `K`.
    pub quant: usize,
    /// Number of subcarriers `N`.
    pub subcarriers: usize,
    /// Relay counts `M` to sweep.
    pub relays: Vec<usize>,
    /// Budgets `T` to sweep.
    pub budget: Vec<f64>,
    /// Cost per unit power `c`.
    pub cost: f64,
    pub trials: usize,
    pub seed: u64,
    pub menu: MenuKind,
    pub information: Information,
    pub resolution: u32,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            distribution: TypeDistribution::Uniform {
                low: 50.0,
                high: 300.0,
            },
            quant: 10,
            subcarriers: 16,
            relays: vec![10],
            budget: vec![16.0],
            cost: 1.0,
            trials: 1000,
            seed: 1,
            menu: MenuKind::SecondBest,
            information: Information::Asymmetric,
            resolution: DEFAULT_RESOLUTION,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: RawConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_raw(raw)
    }

    pub fn from_json_value(value: serde_json::Value) -> Result<Self> {
        let raw: RawConfig =
            serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: RawConfig) -> Result<Self> {
        let config = ExperimentConfig {
            distribution: raw.distribution,
            quant: raw.quant,
            subcarriers: raw.subcarriers,
            relays: raw.relays.into(),
            budget: raw.budget.into(),
            cost: raw.cost,
            trials: raw.trials,
            seed: raw.seed,
            menu: raw.menu,
            information: raw.information,
            resolution: raw.resolution,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        self.distribution
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if self.distribution.support().0 <= 0.0 {
            return fail("type support must start above zero".into());
        }
        if self.quant == 0 {
            return fail("quant (K) must be at least 1".into());
        }
        if self.subcarriers == 0 {
            return fail("subcarriers (N) must be at least 1".into());
        }
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if self.relays.is_empty() || self.budget.is_empty() {
            return fail("relays and budget need at least one value".into());
        }
        if let Some(b) = self.budget.iter().find(|b| !(**b >= 0.0) || !b.is_finite()) {
            return fail(format!("budget must be finite and non-negative, got {b}"));
        }
        if !(self.cost > 0.0) || !self.cost.is_finite() {
            return fail(format!("cost must be positive, got {}", self.cost));
        }
        if self.resolution == 0 {
            return fail("resolution must be at least 1".into());
        }
        Ok(())
    }

    /// Copy restricted to a single `(M, T)` cell.
    pub fn cell(&self, relays: usize, budget: f64) -> Self {
        ExperimentConfig {
            relays: vec![relays],
            budget: vec![budget],
            ..self.clone()
        }
    }
}

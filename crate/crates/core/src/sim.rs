//! Monte Carlo driver for the broadcast / accept / select mechanism.
//!
//! One round: build the menu from the quantized type grid, draw every relay's
//! true types, let each relay accept its best pair per subcarrier (or the
//! null contract), then run the selection solvers on the accepted offers.
//! Under complete information the source instead pays each relay the
//! first-best pair for its true type.
//!
//! Each trial draws from its own ChaCha stream seeded by a hash of
//! `(seed, M, T, trial)`, so cells and trials reproduce independently of
//! execution order and thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Information};
use crate::contract::{
    first_best_contract, information_rent, second_best_menu, select_best_contract, ContractMenu,
    ContractPair,
};
use crate::error::{invalid, Result};
use crate::selection::{
    best_snr_baseline, heuristic_candidates, overall_from_candidates, relaxed_solution,
    OfferMatrix, SelectionProblem,
};
use crate::types::{sample_type_vector, TypeDistribution, TypeGrid};

/// Quantities of one Monte Carlo draw; capacities are totals over subcarriers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundResult {
    pub capacity_heuristic: f64,
    pub capacity_best_snr: f64,
    pub capacity_relaxed: f64,
    /// Spend of the overall heuristic's selection.
    pub spend: f64,
    pub offers_accepted: usize,
    /// ESW, ASW, NSW, SSCPA as `(capacity, spend)`.
    pub candidates: [(f64, f64); 4],
    pub spend_best_snr: f64,
    /// Spend of the fractional relaxed selection.
    pub spend_relaxed: f64,
}

/// Prepared mechanism for one configuration: the menu is built once and
/// reused by every round.
#[derive(Debug, Clone)]
pub struct Mechanism {
    distribution: TypeDistribution,
    subcarriers: usize,
    cost: f64,
    information: Information,
    resolution: u32,
    menu: ContractMenu,
}

impl Mechanism {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let grid =
            TypeGrid::from_distribution(&config.distribution, config.quant, config.subcarriers)?;
        let menu = ContractMenu::build(config.menu, &grid, config.cost)?;
        Ok(Mechanism {
            distribution: config.distribution.clone(),
            subcarriers: config.subcarriers,
            cost: config.cost,
            information: config.information,
            resolution: config.resolution,
            menu,
        })
    }

    pub fn menu(&self) -> &ContractMenu {
        &self.menu
    }

    /// Contract pair a relay of true type `theta` ends up offering the source.
    pub fn accepted_pair(&self, theta: f64) -> ContractPair {
        match self.information {
            Information::Complete => {
                first_best_contract(theta, self.cost).unwrap_or(ContractPair::NULL)
            }
            Information::Asymmetric => select_best_contract(&self.menu, theta)
                .map_or(ContractPair::NULL, |k| self.menu.pairs()[k]),
        }
    }

    pub fn offers_for_types(&self, types: &[Vec<f64>]) -> Result<OfferMatrix> {
        let pairs = types
            .iter()
            .map(|row| {
                if row.len() != self.subcarriers {
                    return invalid(format!(
                        "type vector has {} entries for {} subcarriers",
                        row.len(),
                        self.subcarriers
                    ));
                }
                Ok(row.iter().map(|&theta| self.accepted_pair(theta)).collect())
            })
            .collect::<Result<Vec<Vec<ContractPair>>>>()?;
        OfferMatrix::from_pairs(&pairs, self.subcarriers)
    }

    /// Round with given true types, `types[m][n]`.
    pub fn round_from_types(&self, types: &[Vec<f64>], budget: f64) -> Result<RoundResult> {
        let offers = self.offers_for_types(types)?;
        let offers_accepted = offers.offer_count();
        let problem = SelectionProblem::new(offers, budget, self.resolution)?;
        let candidates = heuristic_candidates(&problem);
        let summary = candidates.each_ref().map(|c| (c.capacity, c.spend));
        let overall = overall_from_candidates(candidates);
        let baseline = best_snr_baseline(&problem);
        let relaxed = relaxed_solution(&problem);
        Ok(RoundResult {
            capacity_heuristic: overall.capacity,
            capacity_best_snr: baseline.capacity,
            capacity_relaxed: relaxed.bound,
            spend: overall.spend,
            offers_accepted,
            candidates: summary,
            spend_best_snr: baseline.spend,
            spend_relaxed: relaxed.spend,
        })
    }

    pub fn round(&self, relays: usize, budget: f64, rng: &mut ChaCha8Rng) -> Result<RoundResult> {
        let types = (0..relays)
            .map(|_| sample_type_vector(&self.distribution, self.subcarriers, rng))
            .collect::<Result<Vec<_>>>()?;
        self.round_from_types(&types, budget)
    }
}

/// One round at the first `(M, T)` of the config's sweeps.
pub fn simulate_round(config: &ExperimentConfig, rng: &mut ChaCha8Rng) -> Result<RoundResult> {
    let mechanism = Mechanism::new(config)?;
    mechanism.round(config.relays[0], config.budget[0], rng)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable per-trial seed.
pub fn trial_seed(seed: u64, relays: usize, budget: f64, trial: usize) -> u64 {
    [relays as u64, budget.to_bits(), trial as u64]
        .into_iter()
        .fold(splitmix64(seed), |h, v| splitmix64(h ^ splitmix64(v)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Series {
    Overall,
    Esw,
    Asw,
    Nsw,
    Sscpa,
    BestSnr,
    Relaxed,
}

impl Series {
    pub const ALL: [Series; 7] = [
        Series::Overall,
        Series::Esw,
        Series::Asw,
        Series::Nsw,
        Series::Sscpa,
        Series::BestSnr,
        Series::Relaxed,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Series::Overall => "overall",
            Series::Esw => "esw",
            Series::Asw => "asw",
            Series::Nsw => "nsw",
            Series::Sscpa => "sscpa",
            Series::BestSnr => "best_snr",
            Series::Relaxed => "relaxed",
        }
    }

    fn extract(&self, r: &RoundResult) -> (f64, f64) {
        match self {
            Series::Overall => (r.capacity_heuristic, r.spend),
            Series::Esw => r.candidates[0],
            Series::Asw => r.candidates[1],
            Series::Nsw => r.candidates[2],
            Series::Sscpa => r.candidates[3],
            Series::BestSnr => (r.capacity_best_snr, r.spend_best_snr),
            Series::Relaxed => (r.capacity_relaxed, r.spend_relaxed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub relays: usize,
    pub budget: f64,
    pub series: Series,
    /// Mean over trials of capacity divided by the subcarrier count.
    pub mean_capacity: f64,
    /// Standard error of that mean.
    pub stderr: f64,
    pub mean_spend: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsTable {
    pub subcarriers: usize,
    pub trials: usize,
    pub rows: Vec<MetricsRow>,
}

impl MetricsTable {
    pub fn get(&self, relays: usize, budget: f64, series: Series) -> Option<&MetricsRow> {
        self.rows
            .iter()
            .find(|r| r.relays == relays && r.budget == budget && r.series == series)
    }
}

/// Every round of one `(M, T)` cell, in trial order.
pub fn run_cell(
    mechanism: &Mechanism,
    config: &ExperimentConfig,
    relays: usize,
    budget: f64,
) -> Result<Vec<RoundResult>> {
    (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(config.seed, relays, budget, trial));
            mechanism.round(relays, budget, &mut rng)
        })
        .collect()
}

fn summarize(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn aggregate(
    rounds: &[RoundResult],
    relays: usize,
    budget: f64,
    subcarriers: usize,
) -> Vec<MetricsRow> {
    let per_sub = subcarriers as f64;
    Series::ALL
        .iter()
        .map(|&series| {
            let caps = rounds.iter().map(|r| series.extract(r).0 / per_sub);
            let (mean_capacity, stderr) = summarize(caps);
            let mean_spend =
                rounds.iter().map(|r| series.extract(r).1).sum::<f64>() / rounds.len() as f64;
            MetricsRow {
                relays,
                budget,
                series,
                mean_capacity,
                stderr,
                mean_spend,
            }
        })
        .collect()
}

/// Averages `trials` independent rounds for every `(M, T)` in the sweep.
pub fn run_experiment(config: &ExperimentConfig) -> Result<MetricsTable> {
    let mechanism = Mechanism::new(config)?;
    let mut rows = Vec::new();
    for &relays in &config.relays {
        for &budget in &config.budget {
            let rounds = run_cell(&mechanism, config, relays, budget)?;
            rows.extend(aggregate(&rounds, relays, budget, config.subcarriers));
        }
    }
    Ok(MetricsTable {
        subcarriers: config.subcarriers,
        trials: config.trials,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractTableRow {
    /// 1-based type index.
    pub k: usize,
    pub delta: f64,
    pub prob: f64,
    pub first_best: ContractPair,
    pub second_best: ContractPair,
    pub rent: f64,
}

/// First-best and second-best pairs with information rents for the reference
/// grid: Uniform[50, 300], K = 10, N = 16.
pub fn reproduce_table3(c: f64) -> Result<Vec<ContractTableRow>> {
    let dist = TypeDistribution::uniform(50.0, 300.0)?;
    contract_table(&dist, 10, 16, c)
}

pub fn contract_table(
    dist: &TypeDistribution,
    quant: usize,
    subcarriers: usize,
    c: f64,
) -> Result<Vec<ContractTableRow>> {
    let grid = TypeGrid::from_distribution(dist, quant, subcarriers)?;
    let first = ContractMenu::first_best(&grid, c)?;
    let second = second_best_menu(&grid, c)?;
    let rents = information_rent(&second).rents;
    Ok((0..grid.num_types())
        .map(|k| ContractTableRow {
            k: k + 1,
            delta: grid.deltas()[k],
            prob: grid.probs()[k][0],
            first_best: first.pairs()[k],
            second_best: second.pairs()[k],
            rent: rents[k],
        })
        .collect())
}

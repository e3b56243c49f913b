//! Budget-constrained relay selection across OFDM subcarriers.
//!
//! Given the contract pair each relay accepted on each subcarrier, the
//! source picks a relay subset per subcarrier maximizing
//! `Σ_n log₂(1 + Σ_{m∈S_n} γ_mn)` subject to `Σ_n Σ_{m∈S_n} t_mn ≤ T`.
//! Selected relays' SNRs add up on a subcarrier.

mod exhaustive;
mod heuristics;
mod knapsack;
mod relaxed;

use serde::{Deserialize, Serialize};

use crate::contract::ContractPair;
use crate::error::{invalid, Result};

pub use exhaustive::{exhaustive_optimum, EXHAUSTIVE_LIMIT};
pub use heuristics::{
    best_snr_baseline, heuristic_candidates, overall_from_candidates, overall_heuristic, sscpa,
    weight_profile, weighted_split_selection, WeightProfile,
};
pub use knapsack::{budget_units, knapsack_01, transfer_units};
pub use relaxed::{relaxed_solution, relaxed_upper_bound, RelaxedSolution};

/// Default money-discretization units per 1.0 of currency.
pub const DEFAULT_RESOLUTION: u32 = 1000;

/// Accepted contract pairs, relay-major: entry `(m, n)` is what relay `m`
/// accepted on subcarrier `n`. A zero SNR means no offer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfferMatrix {
    relays: usize,
    subcarriers: usize,
    snr: Vec<f64>,
    transfer: Vec<f64>,
}

impl OfferMatrix {
    pub fn empty(relays: usize, subcarriers: usize) -> Self {
        OfferMatrix {
            relays,
            subcarriers,
            snr: vec![0.0; relays * subcarriers],
            transfer: vec![0.0; relays * subcarriers],
        }
    }

    /// From `snr[m][n]` and `transfer[m][n]`.
    pub fn new(snr: Vec<Vec<f64>>, transfer: Vec<Vec<f64>>, subcarriers: usize) -> Result<Self> {
        let relays = snr.len();
        if transfer.len() != relays {
            return invalid("SNR and transfer matrices have different relay counts");
        }
        let mut offers = OfferMatrix::empty(relays, subcarriers);
        for (m, (srow, trow)) in snr.iter().zip(&transfer).enumerate() {
            if srow.len() != subcarriers || trow.len() != subcarriers {
                return invalid(format!(
                    "relay {m} does not have {subcarriers} subcarrier entries"
                ));
            }
            for n in 0..subcarriers {
                offers.set(m, n, srow[n], trow[n])?;
            }
        }
        Ok(offers)
    }

    pub fn from_pairs(pairs: &[Vec<ContractPair>], subcarriers: usize) -> Result<Self> {
        let mut offers = OfferMatrix::empty(pairs.len(), subcarriers);
        for (m, row) in pairs.iter().enumerate() {
            if row.len() != subcarriers {
                return invalid(format!(
                    "relay {m} does not have {subcarriers} subcarrier entries"
                ));
            }
            for (n, p) in row.iter().enumerate() {
                offers.set(m, n, p.snr, p.transfer)?;
            }
        }
        Ok(offers)
    }

    /// Sets entry `(m, n)`.
    ///
    /// Rejects negative or non-finite values, a payment without SNR, and SNR
    /// offered for free (efficiency would be unbounded).
    pub fn set(&mut self, m: usize, n: usize, snr: f64, transfer: f64) -> Result<()> {
        if m >= self.relays || n >= self.subcarriers {
            return invalid(format!(
                "offer ({m}, {n}) outside {}x{}",
                self.relays, self.subcarriers
            ));
        }
        if !(snr >= 0.0 && snr.is_finite() && transfer >= 0.0 && transfer.is_finite()) {
            return invalid(format!(
                "offer ({m}, {n}) = ({snr}, {transfer}) must be finite and non-negative"
            ));
        }
        if snr == 0.0 && transfer != 0.0 {
            return invalid(format!("offer ({m}, {n}) charges {transfer} for zero SNR"));
        }
        if snr > 0.0 && transfer == 0.0 {
            return invalid(format!("offer ({m}, {n}) provides SNR {snr} for free"));
        }
        let i = m * self.subcarriers + n;
        self.snr[i] = snr;
        self.transfer[i] = transfer;
        Ok(())
    }

    pub fn relays(&self) -> usize {
        self.relays
    }

    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    pub fn snr(&self, m: usize, n: usize) -> f64 {
        self.snr[m * self.subcarriers + n]
    }

    pub fn transfer(&self, m: usize, n: usize) -> f64 {
        self.transfer[m * self.subcarriers + n]
    }

    pub fn is_offer(&self, m: usize, n: usize) -> bool {
        self.snr(m, n) > 0.0
    }

    /// SNR per unit transfer; zero for null offers.
    pub fn efficiency(&self, m: usize, n: usize) -> f64 {
        if self.is_offer(m, n) {
            self.snr(m, n) / self.transfer(m, n)
        } else {
            0.0
        }
    }

    pub fn snr_column(&self, n: usize) -> Vec<f64> {
        (0..self.relays).map(|m| self.snr(m, n)).collect()
    }

    pub fn transfer_column(&self, n: usize) -> Vec<f64> {
        (0..self.relays).map(|m| self.transfer(m, n)).collect()
    }

    pub fn offer_count(&self) -> usize {
        self.snr.iter().filter(|&&g| g > 0.0).count()
    }

    pub fn total_transfer(&self) -> f64 {
        self.transfer.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    Esw,
    Asw,
    Nsw,
    Sscpa,
    Overall,
    BestSnr,
    Exhaustive,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::Esw => "esw",
            Method::Asw => "asw",
            Method::Nsw => "nsw",
            Method::Sscpa => "sscpa",
            Method::Overall => "overall",
            Method::BestSnr => "best_snr",
            Method::Exhaustive => "exhaustive",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    /// Selected relay indices per subcarrier, ascending.
    pub subsets: Vec<Vec<usize>>,
    pub capacity: f64,
    pub spend: f64,
    pub method: Method,
}

impl SelectionResult {
    pub(crate) fn from_subsets(
        offers: &OfferMatrix,
        mut subsets: Vec<Vec<usize>>,
        method: Method,
    ) -> Self {
        for s in &mut subsets {
            s.sort_unstable();
        }
        let capacity = capacity(offers, &subsets).expect("solver produced valid subsets");
        let spend = total_spend(offers, &subsets).expect("solver produced valid subsets");
        SelectionResult {
            subsets,
            capacity,
            spend,
            method,
        }
    }

    pub(crate) fn empty(offers: &OfferMatrix, method: Method) -> Self {
        SelectionResult {
            subsets: vec![Vec::new(); offers.subcarriers()],
            capacity: 0.0,
            spend: 0.0,
            method,
        }
    }

    pub fn selected_count(&self) -> usize {
        self.subsets.iter().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionProblem {
    pub offers: OfferMatrix,
    pub budget: f64,
    /// Money-discretization units per 1.0 of currency for the knapsack DP.
    pub resolution: u32,
}

impl SelectionProblem {
    pub fn new(offers: OfferMatrix, budget: f64, resolution: u32) -> Result<Self> {
        if !(budget >= 0.0) || !budget.is_finite() {
            return invalid(format!(
                "budget must be finite and non-negative, got {budget}"
            ));
        }
        if resolution == 0 {
            return invalid("resolution must be at least 1");
        }
        Ok(SelectionProblem {
            offers,
            budget,
            resolution,
        })
    }
}

fn check_subsets(offers: &OfferMatrix, subsets: &[Vec<usize>]) -> Result<()> {
    if subsets.len() != offers.subcarriers() {
        return invalid(format!(
            "{} subsets for {} subcarriers",
            subsets.len(),
            offers.subcarriers()
        ));
    }
    for (n, s) in subsets.iter().enumerate() {
        for (i, &m) in s.iter().enumerate() {
            if m >= offers.relays() {
                return invalid(format!("relay index {m} out of range on subcarrier {n}"));
            }
            if s[..i].contains(&m) {
                return invalid(format!("relay {m} selected twice on subcarrier {n}"));
            }
        }
    }
    Ok(())
}

/// `Σ_n log₂(1 + Σ_{m∈S_n} γ_mn)`.
pub fn capacity(offers: &OfferMatrix, subsets: &[Vec<usize>]) -> Result<f64> {
    check_subsets(offers, subsets)?;
    Ok(subsets
        .iter()
        .enumerate()
        .map(|(n, s)| (1.0 + s.iter().map(|&m| offers.snr(m, n)).sum::<f64>()).log2())
        .sum())
}

/// `Σ_n Σ_{m∈S_n} t_mn`.
pub fn total_spend(offers: &OfferMatrix, subsets: &[Vec<usize>]) -> Result<f64> {
    check_subsets(offers, subsets)?;
    Ok(subsets
        .iter()
        .enumerate()
        .flat_map(|(n, s)| s.iter().map(move |&m| (m, n)))
        .map(|(m, n)| offers.transfer(m, n))
        .sum())
}

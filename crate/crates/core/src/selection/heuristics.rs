use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::knapsack::knapsack_01;
use super::{Method, OfferMatrix, SelectionProblem, SelectionResult};

/// How the budget is split across subcarriers before the per-subcarrier knapsacks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightProfile {
    /// Equal share per subcarrier.
    Esw,
    /// Mean efficiency `γ/t` over all relays; null offers count as zero.
    Asw,
    /// Net efficiency `Σ_m γ_mn / Σ_m t_mn`.
    Nsw,
}

impl WeightProfile {
    pub const ALL: [WeightProfile; 3] =
        [WeightProfile::Esw, WeightProfile::Asw, WeightProfile::Nsw];

    pub fn method(&self) -> Method {
        match self {
            WeightProfile::Esw => Method::Esw,
            WeightProfile::Asw => Method::Asw,
            WeightProfile::Nsw => Method::Nsw,
        }
    }
}

pub fn weight_profile(offers: &OfferMatrix, kind: WeightProfile) -> Vec<f64> {
    let relays = offers.relays();
    (0..offers.subcarriers())
        .map(|n| match kind {
            WeightProfile::Esw => 1.0,
            WeightProfile::Asw => {
                if relays == 0 {
                    0.0
                } else {
                    (0..relays).map(|m| offers.efficiency(m, n)).sum::<f64>() / relays as f64
                }
            }
            WeightProfile::Nsw => {
                let snr: f64 = (0..relays).map(|m| offers.snr(m, n)).sum();
                let paid: f64 = (0..relays).map(|m| offers.transfer(m, n)).sum();
                if paid > 0.0 {
                    snr / paid
                } else {
                    0.0
                }
            }
        })
        .collect()
}

/// Splits the budget as `T_n = w_n·T / Σ w` and solves one knapsack per
/// subcarrier. Budget left unspent on one subcarrier is not moved to another.
pub fn weighted_split_selection(
    problem: &SelectionProblem,
    kind: WeightProfile,
) -> SelectionResult {
    let offers = &problem.offers;
    let weights = weight_profile(offers, kind);
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return SelectionResult::empty(offers, kind.method());
    }
    let subsets = weights
        .iter()
        .enumerate()
        .map(|(n, &w)| {
            let share = w * problem.budget / total;
            knapsack_01(
                &offers.snr_column(n),
                &offers.transfer_column(n),
                share,
                problem.resolution,
            )
        })
        .collect();
    SelectionResult::from_subsets(offers, subsets, kind.method())
}

/// Sequential subcarrier contract-pair allocation.
///
/// Visits subcarriers round-robin; each visit adds the not-yet-selected relay
/// with the highest efficiency whose transfer fits the remaining budget
/// (ties to the lower relay index). Stops after a full pass adds nothing.
pub fn sscpa(problem: &SelectionProblem) -> SelectionResult {
    let offers = &problem.offers;
    let mut remaining = problem.budget;
    let mut subsets: Vec<Vec<usize>> = vec![Vec::new(); offers.subcarriers()];
    let mut used = vec![false; offers.relays() * offers.subcarriers()];
    loop {
        let mut added = false;
        for (n, subset) in subsets.iter_mut().enumerate() {
            let mut pick: Option<(usize, f64)> = None;
            for m in 0..offers.relays() {
                if used[m * offers.subcarriers() + n]
                    || !offers.is_offer(m, n)
                    || offers.transfer(m, n) > remaining
                {
                    continue;
                }
                let e = offers.efficiency(m, n);
                if pick.is_none_or(|(_, best)| e > best) {
                    pick = Some((m, e));
                }
            }
            if let Some((m, _)) = pick {
                used[m * offers.subcarriers() + n] = true;
                remaining -= offers.transfer(m, n);
                subset.push(m);
                added = true;
            }
        }
        if !added {
            break;
        }
    }
    SelectionResult::from_subsets(offers, subsets, Method::Sscpa)
}

/// ESW, ASW, NSW and SSCPA results, in that order.
pub fn heuristic_candidates(problem: &SelectionProblem) -> [SelectionResult; 4] {
    [
        weighted_split_selection(problem, WeightProfile::Esw),
        weighted_split_selection(problem, WeightProfile::Asw),
        weighted_split_selection(problem, WeightProfile::Nsw),
        sscpa(problem),
    ]
}

/// Highest-capacity candidate of [`heuristic_candidates`]; ties keep the earlier one.
pub fn overall_heuristic(problem: &SelectionProblem) -> SelectionResult {
    overall_from_candidates(heuristic_candidates(problem))
}

pub fn overall_from_candidates(candidates: [SelectionResult; 4]) -> SelectionResult {
    let mut best: Option<SelectionResult> = None;
    for cand in candidates {
        if best.as_ref().is_none_or(|b| cand.capacity > b.capacity) {
            best = Some(cand);
        }
    }
    let mut best = best.expect("four candidates");
    best.method = Method::Overall;
    best
}

/// Greedy by SNR across all subcarriers: highest `γ_mn` first (ties: lower
/// subcarrier, then lower relay), added whenever it fits the remaining budget.
pub fn best_snr_baseline(problem: &SelectionProblem) -> SelectionResult {
    let offers = &problem.offers;
    let mut cells: Vec<(usize, usize)> = (0..offers.subcarriers())
        .flat_map(|n| (0..offers.relays()).map(move |m| (m, n)))
        .filter(|&(m, n)| offers.is_offer(m, n))
        .collect();
    cells.sort_by(|a, b| {
        offers
            .snr(b.0, b.1)
            .partial_cmp(&offers.snr(a.0, a.1))
            .unwrap_or(Ordering::Equal)
            .then(a.1.cmp(&b.1))
            .then(a.0.cmp(&b.0))
    });
    let mut remaining = problem.budget;
    let mut subsets: Vec<Vec<usize>> = vec![Vec::new(); offers.subcarriers()];
    for (m, n) in cells {
        let t = offers.transfer(m, n);
        if t <= remaining {
            remaining -= t;
            subsets[n].push(m);
        }
    }
    SelectionResult::from_subsets(offers, subsets, Method::BestSnr)
}

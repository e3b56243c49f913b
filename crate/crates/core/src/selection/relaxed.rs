//! Continuous relaxation of the selection problem, solved in the dual.
//!
//! With `0 ≤ x_mn ≤ 1` the problem `max Σ_n log₂(1 + Σ_m x_mn γ_mn)` s.t.
//! `Σ x_mn t_mn ≤ T` is concave. For a fixed budget price `λ` the Lagrangian
//! separates by subcarrier: buying SNR in order of decreasing efficiency is
//! cheapest, and the offer with efficiency `e` is bought while the running
//! sum stays below the water level `e/(λ·ln2) − 1`. Spend is continuous and
//! non-increasing in `λ`, so bisection on `λ` drives the duality gap to zero.
//! Every dual value is itself an upper bound on the integer optimum.

use std::f64::consts::LN_2;

use super::SelectionProblem;

const MAX_ITERS: usize = 200;
const GAP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedSolution {
    /// Smallest dual value found; never below the relaxed (or integer) optimum.
    pub bound: f64,
    /// Objective of the best budget-feasible fractional selection found.
    pub primal: f64,
    /// Spend of that fractional selection.
    pub spend: f64,
    pub lambda: f64,
    pub iterations: usize,
}

impl RelaxedSolution {
    pub fn gap(&self) -> f64 {
        self.bound - self.primal
    }
}

struct Carrier {
    /// `(snr, efficiency)`, efficiency descending.
    offers: Vec<(f64, f64)>,
}

struct Evaluation {
    objective: f64,
    spend: f64,
}

fn evaluate(carriers: &[Carrier], lambda: f64) -> Evaluation {
    let mut objective = 0.0;
    let mut spend = 0.0;
    for carrier in carriers {
        let mut level_sum = 0.0;
        for &(snr, eff) in &carrier.offers {
            let level = eff / (lambda * LN_2) - 1.0;
            if level <= level_sum {
                break;
            }
            let bought = snr.min(level - level_sum);
            level_sum += bought;
            spend += bought / eff;
        }
        objective += (1.0 + level_sum).log2();
    }
    Evaluation { objective, spend }
}

pub fn relaxed_solution(problem: &SelectionProblem) -> RelaxedSolution {
    let offers = &problem.offers;
    let budget = problem.budget;
    let mut carriers = Vec::with_capacity(offers.subcarriers());
    let mut everything = 0.0;
    let mut total_spend = 0.0;
    let mut max_eff: f64 = 0.0;
    for n in 0..offers.subcarriers() {
        let mut list: Vec<(f64, f64)> = (0..offers.relays())
            .filter(|&m| offers.is_offer(m, n))
            .map(|m| (offers.snr(m, n), offers.efficiency(m, n)))
            .collect();
        list.sort_by(|a, b| b.1.total_cmp(&a.1));
        let sum: f64 = list.iter().map(|o| o.0).sum();
        everything += (1.0 + sum).log2();
        total_spend += list.iter().map(|o| o.0 / o.1).sum::<f64>();
        max_eff = list.iter().map(|o| o.1).fold(max_eff, f64::max);
        carriers.push(Carrier { offers: list });
    }
    if total_spend <= budget {
        return RelaxedSolution {
            bound: everything,
            primal: everything,
            spend: total_spend,
            lambda: 0.0,
            iterations: 0,
        };
    }

    let mut lo = 0.0;
    let mut hi = max_eff / LN_2 + 1.0;
    let top = evaluate(&carriers, hi);
    let mut bound = top.objective - hi * top.spend + hi * budget;
    let mut primal = top.objective;
    let mut spend = top.spend;
    let mut lambda = hi;
    let mut iterations = 0;
    while iterations < MAX_ITERS && bound - primal > GAP_TOL {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        let eval = evaluate(&carriers, mid);
        let dual = eval.objective - mid * eval.spend + mid * budget;
        if dual < bound {
            bound = dual;
            lambda = mid;
        }
        if eval.spend > budget {
            lo = mid;
        } else {
            hi = mid;
            if eval.objective > primal {
                primal = eval.objective;
                spend = eval.spend;
            }
        }
    }
    RelaxedSolution {
        bound,
        primal,
        spend,
        lambda,
        iterations,
    }
}

/// Upper bound on the best achievable capacity, within `1e-6` of the relaxed optimum.
pub fn relaxed_upper_bound(problem: &SelectionProblem) -> f64 {
    relaxed_solution(problem).bound
}

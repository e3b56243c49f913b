//! 0-1 knapsack over one subcarrier, by dynamic programming on a money grid.
//!
//! Transfers are rounded up and the budget down to integer units, so the
//! selected set never exceeds the true (un-discretized) budget. Products
//! within `SNAP_TOL` of an integer count as that integer, so transfers that
//! are exact multiples of `1/resolution` are not inflated by binary rounding.

const SNAP_TOL: f64 = 1e-9;

fn snapped(x: f64) -> Option<f64> {
    let r = x.round();
    ((x - r).abs() <= SNAP_TOL * r.abs().max(1.0)).then_some(r)
}

/// Transfer in integer money units, rounded up.
pub fn transfer_units(transfer: f64, resolution: u32) -> u64 {
    let x = transfer * resolution as f64;
    snapped(x).unwrap_or_else(|| x.ceil()) as u64
}

/// Budget in integer money units, rounded down.
pub fn budget_units(budget: f64, resolution: u32) -> u64 {
    let x = budget * resolution as f64;
    if !(x > 0.0) {
        return 0;
    }
    snapped(x).unwrap_or_else(|| x.floor()) as u64
}

/// Relay indices maximizing `Σ γ` within `sub_budget`, ascending.
///
/// Null entries (`γ = 0`) are never selected. Ties between equally valuable
/// subsets go to the one recovered by backtracking from the last relay, where
/// a relay is only taken when it strictly improves the table.
pub fn knapsack_01(
    snr_col: &[f64],
    transfer_col: &[f64],
    sub_budget: f64,
    resolution: u32,
) -> Vec<usize> {
    assert_eq!(snr_col.len(), transfer_col.len(), "column lengths differ");
    let resolution = resolution.max(1);
    let weights: Vec<u64> = transfer_col
        .iter()
        .map(|&t| transfer_units(t, resolution))
        .collect();
    let items: Vec<usize> = (0..snr_col.len()).filter(|&m| snr_col[m] > 0.0).collect();
    // capacity beyond the total weight of all items changes nothing
    let total: u64 = items.iter().map(|&m| weights[m]).sum();
    let cap = budget_units(sub_budget, resolution).min(total) as usize;
    if items.is_empty() {
        return Vec::new();
    }

    let width = cap + 1;
    let mut best = vec![0.0f64; width];
    let mut take = vec![false; items.len() * width];
    for (row, &m) in items.iter().enumerate() {
        let w = weights[m] as usize;
        if w > cap {
            continue;
        }
        let value = snr_col[m];
        let decisions = &mut take[row * width..(row + 1) * width];
        for t in (w..width).rev() {
            let candidate = best[t - w] + value;
            if candidate > best[t] {
                best[t] = candidate;
                decisions[t] = true;
            }
        }
    }

    let mut chosen = Vec::new();
    let mut t = cap;
    for (row, &m) in items.iter().enumerate().rev() {
        if take[row * width + t] {
            chosen.push(m);
            t -= weights[m] as usize;
        }
    }
    chosen.reverse();
    chosen
}

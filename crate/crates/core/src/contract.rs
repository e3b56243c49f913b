//! Contract menus for relays with private channel gains.
//!
//! A relay of type `θ` (its relay-destination channel gain) that delivers
//! linear SNR `γ` for transfer `t` earns `t − cγ/θ`, where `c` is the price of
//! one unit of transmit power. The source values SNR through
//! `U(γ) = ½·log₂(1 + γ)`.
//!
//! Every optimal SNR in this module has the form "the `γ ≥ 0` at which
//! `U'(γ)` equals some marginal cost `m`", i.e. `max(0, 1/(2·ln2·m) − 1)`.
//! The first-best contract uses `m = c/θ`; the second-best menu uses a
//! virtual marginal cost that adds the incentive-distortion term. Sharing
//! [`snr_at_marginal_cost`] between both keeps the top type's second-best
//! SNR bit-identical to its first-best SNR.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::types::{TypeDistribution, TypeGrid};

/// Absolute tolerance for money identities (IC/IR slack, binding checks).
pub const MONEY_TOL: f64 = 1e-9;

/// Utility differences below this are treated as ties by relays.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractPair {
    /// Target SNR at the destination, linear scale.
    pub snr: f64,
    pub transfer: f64,
}

impl ContractPair {
    /// The reservation option: no relaying, no payment.
    pub const NULL: ContractPair = ContractPair {
        snr: 0.0,
        transfer: 0.0,
    };

    pub fn new(snr: f64, transfer: f64) -> Result<Self> {
        if !(snr >= 0.0) || !(transfer >= 0.0) || !snr.is_finite() || !transfer.is_finite() {
            return invalid(format!(
                "contract ({snr}, {transfer}) must be finite and non-negative"
            ));
        }
        Ok(ContractPair { snr, transfer })
    }

    pub fn is_null(&self) -> bool {
        self.snr == 0.0 && self.transfer == 0.0
    }

    pub fn snr_db(&self) -> f64 {
        to_db(self.snr)
    }
}

pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Source's half-duplex capacity value of SNR `γ`.
pub fn source_value(snr: f64) -> f64 {
    0.5 * (1.0 + snr).log2()
}

/// `γ ≥ 0` maximizing `U(γ) − m·γ`.
pub fn snr_at_marginal_cost(marginal_cost: f64) -> f64 {
    let x = 2.0 * LN_2 * marginal_cost;
    if x >= 1.0 {
        0.0
    } else {
        1.0 / x - 1.0
    }
}

fn check_cost(c: f64) -> Result<()> {
    if c.is_finite() && c > 0.0 {
        Ok(())
    } else {
        invalid(format!("cost per unit power must be positive, got {c}"))
    }
}

fn check_type(theta: f64) -> Result<()> {
    if theta.is_finite() && theta > 0.0 {
        Ok(())
    } else {
        invalid(format!(
            "relay type must be a positive channel gain, got {theta}"
        ))
    }
}

/// Relay surplus `t − cγ/θ` from accepting `pair`.
pub fn relay_utility(pair: ContractPair, theta: f64, c: f64) -> Result<f64> {
    check_type(theta)?;
    check_cost(c)?;
    Ok(pair.transfer - c * pair.snr / theta)
}

fn utility_unchecked(pair: &ContractPair, theta: f64, c: f64) -> f64 {
    pair.transfer - c * pair.snr / theta
}

/// Complete-information contract for a relay of known type: the efficient SNR,
/// paid exactly its cost so the relay keeps zero surplus.
pub fn first_best_contract(theta: f64, c: f64) -> Result<ContractPair> {
    check_type(theta)?;
    check_cost(c)?;
    let snr = snr_at_marginal_cost(c / theta);
    Ok(ContractPair {
        snr,
        transfer: c * snr / theta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MenuKind {
    FirstBest,
    SecondBest,
}

/// `K` contract pairs, pair `k` designed for type `δ_k` of `grid`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractMenu {
    pairs: Vec<ContractPair>,
    grid: TypeGrid,
    cost: f64,
    /// Set when the pointwise optimum was not monotone and adjacent types were pooled.
    pooled: bool,
}

impl ContractMenu {
    /// Wraps arbitrary pairs without checking IC/IR; see [`verify_menu`].
    pub fn new(pairs: Vec<ContractPair>, grid: TypeGrid, cost: f64) -> Result<Self> {
        check_cost(cost)?;
        if pairs.len() != grid.num_types() {
            return invalid(format!(
                "menu has {} pairs for {} types",
                pairs.len(),
                grid.num_types()
            ));
        }
        Ok(ContractMenu {
            pairs,
            grid,
            cost,
            pooled: false,
        })
    }

    /// First-best pair at every grid type.
    pub fn first_best(grid: &TypeGrid, c: f64) -> Result<Self> {
        let pairs = grid
            .deltas()
            .iter()
            .map(|&d| first_best_contract(d, c))
            .collect::<Result<Vec<_>>>()?;
        ContractMenu::new(pairs, grid.clone(), c)
    }

    pub fn build(kind: MenuKind, grid: &TypeGrid, c: f64) -> Result<Self> {
        match kind {
            MenuKind::FirstBest => ContractMenu::first_best(grid, c),
            MenuKind::SecondBest => second_best_menu(grid, c),
        }
    }

    pub fn pairs(&self) -> &[ContractPair] {
        &self.pairs
    }

    pub fn grid(&self) -> &TypeGrid {
        &self.grid
    }

    pub fn deltas(&self) -> &[f64] {
        self.grid.deltas()
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn is_pooled(&self) -> bool {
        self.pooled
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Virtual marginal cost of SNR for each type: the power price `c/δ_k` plus,
/// below the top, the rent conceded to every higher type on every subcarrier
/// per unit of type-`k` probability mass.
///
/// `f64::INFINITY` marks a type with no mass that still carries rent weight.
pub fn virtual_marginal_costs(grid: &TypeGrid, c: f64) -> Result<Vec<f64>> {
    check_cost(c)?;
    Ok((0..grid.num_types())
        .map(|k| virtual_cost(grid, c, k))
        .collect())
}

fn virtual_cost(grid: &TypeGrid, c: f64, k: usize) -> f64 {
    let deltas = grid.deltas();
    let own = c / deltas[k];
    if k + 1 == deltas.len() {
        return own;
    }
    let mass = grid.type_mass(k);
    let step = c * (1.0 / deltas[k] - 1.0 / deltas[k + 1]);
    let above = grid.mass_above(k);
    if mass > 0.0 {
        own + step * above / mass
    } else if above > 0.0 {
        f64::INFINITY
    } else {
        f64::NAN
    }
}

/// Weighted cost block for pooling: total cost weight `a`, total mass `w`.
#[derive(Debug, Clone, Copy)]
struct Block {
    a: f64,
    w: f64,
    len: usize,
    /// Exact virtual cost of a single-type block.
    single: f64,
}

impl Block {
    fn value(&self) -> f64 {
        if self.len == 1 {
            self.single
        } else if self.w > 0.0 {
            self.a / self.w
        } else if self.a > 0.0 {
            f64::INFINITY
        } else {
            f64::NAN
        }
    }
}

/// Non-increasing fit of virtual costs by pool-adjacent-violators, so the
/// resulting SNR schedule is non-decreasing. Returns the fitted cost per type
/// and whether any pooling happened.
fn pool_costs(grid: &TypeGrid, c: f64) -> (Vec<f64>, bool) {
    let deltas = grid.deltas();
    let k_total = deltas.len();
    let mut blocks: Vec<Block> = Vec::with_capacity(k_total);
    for k in 0..k_total {
        let mass = grid.type_mass(k);
        let a = if k + 1 == k_total {
            mass * c / deltas[k]
        } else {
            mass * c / deltas[k] + c * (1.0 / deltas[k] - 1.0 / deltas[k + 1]) * grid.mass_above(k)
        };
        blocks.push(Block {
            a,
            w: mass,
            len: 1,
            single: virtual_cost(grid, c, k),
        });
        while blocks.len() >= 2 {
            let last = blocks[blocks.len() - 1];
            let prev = blocks[blocks.len() - 2];
            let (lv, pv) = (last.value(), prev.value());
            if lv.is_nan() || pv.is_nan() || lv > pv {
                blocks.pop();
                let merged = blocks.last_mut().expect("at least one block");
                merged.a += last.a;
                merged.w += last.w;
                merged.len += last.len;
            } else {
                break;
            }
        }
    }
    let pooled = blocks.iter().any(|b| b.len > 1);
    let mut costs = Vec::with_capacity(k_total);
    for b in &blocks {
        costs.extend(std::iter::repeat_n(b.value(), b.len));
    }
    (costs, pooled)
}

/// Optimal incentive-compatible menu for the discrete type grid.
///
/// Each SNR maximizes the type's expected virtual surplus; the lowest type's
/// IR and every downward adjacent IC bind, which pins the transfers:
/// `t_1 = cγ_1/δ_1`, `t_k = t_{k−1} + c(γ_k − γ_{k−1})/δ_k`.
pub fn second_best_menu(grid: &TypeGrid, c: f64) -> Result<ContractMenu> {
    check_cost(c)?;
    let (costs, pooled) = pool_costs(grid, c);
    let deltas = grid.deltas();
    let mut pairs = Vec::with_capacity(deltas.len());
    let mut prev = ContractPair::NULL;
    for (k, (&delta, &cost)) in deltas.iter().zip(&costs).enumerate() {
        let snr = snr_at_marginal_cost(cost);
        let transfer = if k == 0 {
            c * snr / delta
        } else {
            prev.transfer + c * (snr - prev.snr) / delta
        };
        prev = ContractPair { snr, transfer };
        pairs.push(prev);
    }
    let mut menu = ContractMenu::new(pairs, grid.clone(), c)?;
    menu.pooled = pooled;
    Ok(menu)
}

/// Pointwise second-best SNR for a continuum of types at `theta`.
pub fn continuous_second_best_snr(theta: f64, dist: &TypeDistribution, c: f64) -> Result<f64> {
    check_type(theta)?;
    check_cost(c)?;
    dist.validate()?;
    let (low, high) = dist.support();
    if theta < low || theta > high {
        return invalid(format!("type {theta} outside support [{low}, {high}]"));
    }
    let density = dist.pdf(theta);
    if !(density > 0.0) {
        return invalid(format!("zero type density at {theta}"));
    }
    let hazard = (1.0 - dist.cdf(theta)) / density;
    Ok(snr_at_marginal_cost(
        c / theta + c / (theta * theta) * hazard,
    ))
}

/// The continuous schedule sampled on `points` equidistant types spanning the support.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousSchedule {
    pub thetas: Vec<f64>,
    pub snrs: Vec<f64>,
    /// False when the pointwise schedule decreases somewhere; such a
    /// schedule would need ironing and is not incentive compatible as is.
    pub monotone: bool,
}

pub fn continuous_schedule(
    dist: &TypeDistribution,
    c: f64,
    points: usize,
) -> Result<ContinuousSchedule> {
    if points < 2 {
        return invalid("schedule needs at least two points");
    }
    let (low, high) = dist.support();
    let step = (high - low) / (points - 1) as f64;
    let mut thetas = Vec::with_capacity(points);
    let mut snrs = Vec::with_capacity(points);
    for i in 0..points {
        let theta = if i + 1 == points {
            high
        } else {
            low + i as f64 * step
        };
        thetas.push(theta);
        snrs.push(continuous_second_best_snr(theta, dist, c)?);
    }
    let monotone = snrs.windows(2).all(|w| w[1] >= w[0]);
    Ok(ContinuousSchedule {
        thetas,
        snrs,
        monotone,
    })
}

/// Index of the pair a relay of type `theta` accepts, or `None` when every
/// pair leaves it worse off than the null contract.
///
/// Indifferent relays take the higher index, so a type sitting exactly on a
/// grid point `δ_k` (indifferent between `k` and `k − 1` under binding
/// adjacent ICs) lands in the bracket `δ_k ≤ θ < δ_{k+1}`.
pub fn select_best_contract(menu: &ContractMenu, theta: f64) -> Option<usize> {
    if !(theta > 0.0) {
        return None;
    }
    let c = menu.cost();
    let utils: Vec<f64> = menu
        .pairs()
        .iter()
        .map(|p| utility_unchecked(p, theta, c))
        .collect();
    let best = utils.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if best < -TIE_TOL {
        return None;
    }
    utils.iter().rposition(|&u| u >= best - TIE_TOL)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MenuAudit {
    pub ir_satisfied: Vec<bool>,
    pub ir_binding_at_bottom: bool,
    /// `ic_matrix[k][j]`: type `δ_k` weakly prefers pair `k` to pair `j`.
    pub ic_matrix: Vec<Vec<bool>>,
    /// `adjacent_ic_binding[k − 1]` for `k ≥ 1`: type `δ_k` is indifferent
    /// between pairs `k` and `k − 1`.
    pub adjacent_ic_binding: Vec<bool>,
    pub monotone: bool,
}

impl MenuAudit {
    pub fn all_ir(&self) -> bool {
        self.ir_satisfied.iter().all(|&b| b)
    }

    pub fn all_ic(&self) -> bool {
        self.ic_matrix.iter().flatten().all(|&b| b)
    }

    /// IC, IR and monotone.
    pub fn is_feasible(&self) -> bool {
        self.all_ir() && self.all_ic() && self.monotone
    }

    /// Feasible with the binding pattern of an optimal screening menu.
    pub fn has_second_best_structure(&self) -> bool {
        self.is_feasible()
            && self.ir_binding_at_bottom
            && self.adjacent_ic_binding.iter().all(|&b| b)
    }
}

pub fn verify_menu(menu: &ContractMenu) -> MenuAudit {
    let c = menu.cost();
    let deltas = menu.deltas();
    let pairs = menu.pairs();
    let k_total = pairs.len();
    let own: Vec<f64> = (0..k_total)
        .map(|k| utility_unchecked(&pairs[k], deltas[k], c))
        .collect();
    let ir_satisfied = own.iter().map(|&u| u >= -MONEY_TOL).collect();
    let ir_binding_at_bottom = own.first().is_some_and(|u| u.abs() <= MONEY_TOL);
    let ic_matrix = (0..k_total)
        .map(|k| {
            (0..k_total)
                .map(|j| own[k] >= utility_unchecked(&pairs[j], deltas[k], c) - MONEY_TOL)
                .collect()
        })
        .collect();
    let adjacent_ic_binding = (1..k_total)
        .map(|k| (own[k] - utility_unchecked(&pairs[k - 1], deltas[k], c)).abs() <= MONEY_TOL)
        .collect();
    let monotone = pairs.windows(2).all(|w| w[1].snr >= w[0].snr);
    MenuAudit {
        ir_satisfied,
        ir_binding_at_bottom,
        ic_matrix,
        adjacent_ic_binding,
        monotone,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RentReport {
    /// Surplus of type `δ_k` under its own pair.
    pub rents: Vec<f64>,
}

pub fn information_rent(menu: &ContractMenu) -> RentReport {
    let c = menu.cost();
    let rents = menu
        .pairs()
        .iter()
        .zip(menu.deltas())
        .map(|(p, &d)| utility_unchecked(p, d, c))
        .collect();
    RentReport { rents }
}

//! Contract-based relay incentives and budget-constrained relay selection
//! for dual-hop OFDM cooperative links.
//!
//! A source that cannot observe relays' channel gains broadcasts a menu of
//! `(SNR, payment)` pairs designed so each relay type picks its own pair
//! ([`contract`]). Relays answer with the pair they accept on each
//! subcarrier, and the source picks relays per subcarrier under a total
//! budget ([`selection`]). [`sim`] runs the whole mechanism as a Monte Carlo
//! experiment.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod contract;
pub mod error;
pub mod io;
pub mod selection;
pub mod sim;
pub mod types;

pub use config::{ExperimentConfig, Information};
pub use contract::{
    continuous_schedule, continuous_second_best_snr, first_best_contract, information_rent,
    relay_utility, second_best_menu, select_best_contract, verify_menu, ContractMenu, ContractPair,
    MenuAudit, MenuKind, RentReport,
};
pub use error::{Error, Result};
pub use selection::{
    best_snr_baseline, capacity, exhaustive_optimum, knapsack_01, overall_heuristic,
    relaxed_upper_bound, sscpa, total_spend, weight_profile, weighted_split_selection, Method,
    OfferMatrix, SelectionProblem, SelectionResult, WeightProfile,
};
pub use sim::{reproduce_table3, run_experiment, simulate_round, MetricsTable, RoundResult};
pub use types::{
    quantize_types, sample_type_vector, type_probabilities, TypeDistribution, TypeGrid,
};

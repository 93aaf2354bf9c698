//! Exact maximization of `A(x)` under the capacity constraint, plus the
//! bounds used to certify it.

mod bnb;
mod brute;
mod lp;
mod simplex;

use serde::{Deserialize, Serialize};

use crate::instance::Assortment;

pub use bnb::{branch_and_bound, branch_and_bound_traced, BnbConfig, BnbTrace, BoundMode};
pub use brute::{brute_force_oracle, MAX_BRUTE_FORCE_N};
pub use lp::{
    knapsack_majorant_bound, lp_relaxation, revenue_upper_bound, LpSolution, MipFormulation,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    /// Proven optimal.
    Optimal,
    /// A budget ran out; the assortment is feasible and `upper_bound` is valid.
    Feasible,
    /// Only a bound was computed; the assortment is a rounding of the relaxation.
    BoundOnly,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub nodes: u64,
    pub lp_solves: u64,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub assortment: Assortment,
    pub a_value: f64,
    pub price: f64,
    pub revenue: f64,
    pub upper_bound: f64,
    pub status: SolveStatus,
    pub stats: SolveStats,
}

//! Capacitated assortment and price optimization under the paired
//! combinatorial logit (PCL) model.
//!
//! The crate is organized bottom-up:
//!
//! * [`instance`]: problem data, assortments, price vectors, JSON format.
//! * [`choice`]: PCL choice probabilities, expected revenue, and a Monte Carlo simulator.
//! * [`objective`]: the pair-sum objective `A(x)` and its bilinear form.
//! * [`lambert`], [`pricing`]: optimal uniform price and revenue for a fixed assortment.
//! * [`exact`]: brute-force oracle, LP relaxation, bounds, and branch-and-bound.
//! * [`heuristics`]: greedy construction and GRASP.
//! * [`bench`]: seeded instance generation and the experiment harness.
//!
//! ```
//! use pcl_assort::prelude::*;
//!
//! let inst = generate_instance(&GeneratorConfig::new(12, 0.06, 7));
//! let exact = branch_and_bound(&inst, &BnbConfig::default());
//! let greedy = greedy(&inst);
//! assert!(exact.revenue >= greedy.revenue);
//! assert!(exact.revenue <= revenue_upper_bound(&inst) + 1e-9);
//! ```

pub mod bench;
pub mod choice;
pub mod error;
pub mod exact;
pub mod heuristics;
pub mod instance;
pub mod lambert;
pub mod objective;
pub mod pricing;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::bench::{generate_instance, GeneratorConfig};
    pub use crate::choice::{
        choice_probabilities, expected_revenue, simulate_choice, ChoiceDistribution,
    };
    pub use crate::exact::{
        branch_and_bound, brute_force_oracle, knapsack_majorant_bound, lp_relaxation,
        revenue_upper_bound, BnbConfig, BoundMode, SolveResult, SolveStatus,
    };
    pub use crate::heuristics::{grasp, greedy, GraspConfig, HeuristicResult};
    pub use crate::instance::{Assortment, Instance, PriceVector};
    pub use crate::objective::{a_value, a_value_linearized, LinearizedCoefficients};
    pub use crate::pricing::{optimal_uniform_price, UniformPrice};
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/choice-model.md")]
    mod choice_model {}
    #[doc = include_str!("../../../book/src/pricing.md")]
    mod pricing {}
    #[doc = include_str!("../../../book/src/linearization.md")]
    mod linearization {}
    #[doc = include_str!("../../../book/src/exact.md")]
    mod exact {}
    #[doc = include_str!("../../../book/src/heuristics.md")]
    mod heuristics {}
    #[doc = include_str!("../../../book/src/benchmarks.md")]
    mod benchmarks {}
}

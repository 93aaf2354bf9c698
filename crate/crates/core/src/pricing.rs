//! Optimal uniform pricing for a fixed assortment.
//!
//! For a fixed offer set every product carries the same optimal price
//! `p* = (1 + W(A/e)) / β`, and the resulting expected revenue is
//! `W(A/e) / β = p* − 1/β`. Revenue is therefore a strictly increasing
//! function of `A`, which is what lets the solvers optimize `A` alone.

use serde::{Deserialize, Serialize};

use crate::instance::{Assortment, Instance};
use crate::lambert::lambert_w0;
use crate::objective::a_value;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformPrice {
    pub a_value: f64,
    pub price: f64,
    pub revenue: f64,
}

/// Price and revenue implied by an objective value `a >= 0`.
pub fn price_from_a_value(a: f64, beta: f64) -> UniformPrice {
    let w = lambert_w0(a.max(0.0) / std::f64::consts::E).expect("argument is nonnegative");
    UniformPrice {
        a_value: a,
        price: (1.0 + w) / beta,
        revenue: w / beta,
    }
}

/// Optimal revenue for an objective value; `W(a/e)/β`.
pub fn revenue_from_a_value(a: f64, beta: f64) -> f64 {
    price_from_a_value(a, beta).revenue
}

pub fn optimal_uniform_price(instance: &Instance, x: &Assortment) -> UniformPrice {
    price_from_a_value(a_value(instance, x), instance.beta())
}

//! Paired combinatorial logit choice probabilities.
//!
//! A customer first picks a nest `{i, j}` (or leaves without buying), then a
//! product inside the nest. With `v_i = exp(α_i − β p_i)` and
//! `V_ij = v_i^{1/γ} x_i + v_j^{1/γ} x_j`:
//!
//! * nest probability `q^{ij} = V_ij^γ / (1 + Σ_{k<l} V_kl^γ)`
//! * within-nest probability `q_i^{ij} = v_i^{1/γ} x_i / V_ij` (zero for an empty nest)
//! * product probability `q_i = Σ_{j≠i} q^{ij} q_i^{ij}`
//!
//! Everything is evaluated in log space so that small `γ` does not overflow.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::instance::{pair_count, pairs, Assortment, Instance, PriceVector};
use crate::objective::log_sum_exp;

/// `exp(α_i − β p)`. The exponent is clamped so the result stays finite and
/// strictly positive.
pub fn preference_weight(alpha_i: f64, beta: f64, price: f64) -> f64 {
    (alpha_i - beta * price).clamp(-700.0, 700.0).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChoiceDistribution {
    pub product_probs: Vec<f64>,
    pub no_purchase: f64,
}

impl ChoiceDistribution {
    pub fn total(&self) -> f64 {
        self.no_purchase + self.product_probs.iter().sum::<f64>()
    }

    /// Largest coordinate-wise difference, including the no-purchase entry.
    pub fn max_abs_diff(&self, other: &ChoiceDistribution) -> f64 {
        self.product_probs
            .iter()
            .zip(&other.product_probs)
            .map(|(a, b)| (a - b).abs())
            .fold((self.no_purchase - other.no_purchase).abs(), f64::max)
    }
}

/// Per-nest quantities for one (prices, assortment) pair.
struct NestTable {
    /// `V_ij^γ`, zero for empty nests.
    value: Vec<f64>,
    /// `q_i^{ij}` for the lower-indexed product of each nest.
    first_share: Vec<f64>,
    /// `q_j^{ij}` for the higher-indexed product.
    second_share: Vec<f64>,
    total: f64,
}

impl NestTable {
    fn build(instance: &Instance, prices: &PriceVector, x: &Assortment) -> Self {
        let n = instance.n();
        assert_eq!(prices.len(), n, "price vector length must equal n");
        assert_eq!(x.len(), n, "assortment length must equal n");
        let alpha = instance.alpha();
        let beta = instance.beta();
        let p = prices.as_slice();
        let m = pair_count(n);
        let mut value = Vec::with_capacity(m);
        let mut first_share = Vec::with_capacity(m);
        let mut second_share = Vec::with_capacity(m);
        for (i, j) in pairs(n) {
            let gamma = instance.gamma(i, j);
            // ln v^{1/γ}
            let li = (alpha[i] - beta * p[i]) / gamma;
            let lj = (alpha[j] - beta * p[j]) / gamma;
            let (v, si, sj) = match (x.offered(i), x.offered(j)) {
                (true, true) => {
                    let lse = log_sum_exp(li, lj);
                    ((gamma * lse).exp(), (li - lse).exp(), (lj - lse).exp())
                }
                (true, false) => ((gamma * li).exp(), 1.0, 0.0),
                (false, true) => ((gamma * lj).exp(), 0.0, 1.0),
                (false, false) => (0.0, 0.0, 0.0),
            };
            value.push(v);
            first_share.push(si);
            second_share.push(sj);
        }
        let total = value.iter().sum();
        NestTable {
            value,
            first_share,
            second_share,
            total,
        }
    }
}

pub fn choice_probabilities(
    instance: &Instance,
    prices: &PriceVector,
    x: &Assortment,
) -> ChoiceDistribution {
    let n = instance.n();
    let table = NestTable::build(instance, prices, x);
    let denom = 1.0 + table.total;
    let mut product_probs = vec![0.0; n];
    for (k, (i, j)) in pairs(n).enumerate() {
        let nest = table.value[k] / denom;
        product_probs[i] += nest * table.first_share[k];
        product_probs[j] += nest * table.second_share[k];
    }
    ChoiceDistribution {
        product_probs,
        no_purchase: 1.0 / denom,
    }
}

/// Expected revenue per customer, `Σ_{i<j} V_ij^γ R_ij / (1 + Σ V^γ)` with
/// `R_ij = p_i q_i^{ij} + p_j q_j^{ij}`.
pub fn expected_revenue(instance: &Instance, prices: &PriceVector, x: &Assortment) -> f64 {
    let table = NestTable::build(instance, prices, x);
    let p = prices.as_slice();
    let numerator: f64 = pairs(instance.n())
        .enumerate()
        .map(|(k, (i, j))| {
            table.value[k] * (p[i] * table.first_share[k] + p[j] * table.second_share[k])
        })
        .sum();
    numerator / (1.0 + table.total)
}

/// Draws `trials` customers through the two-stage nest/product process and
/// returns the empirical frequencies. Deterministic in `seed`.
pub fn simulate_choice(
    instance: &Instance,
    prices: &PriceVector,
    x: &Assortment,
    seed: u64,
    trials: u64,
) -> ChoiceDistribution {
    assert!(trials >= 1, "trials must be positive");
    let n = instance.n();
    let table = NestTable::build(instance, prices, x);
    // Outcome 0 is leaving; outcome k + 1 is nest k.
    let weights = std::iter::once(1.0).chain(table.value.iter().copied());
    let nest_dist = WeightedIndex::new(weights).expect("no-purchase weight is positive");
    let nests: Vec<(usize, usize)> = pairs(n).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; n];
    let mut leaves = 0u64;
    for _ in 0..trials {
        match nest_dist.sample(&mut rng) {
            0 => leaves += 1,
            k => {
                let k = k - 1;
                let (i, j) = nests[k];
                if rng.gen::<f64>() < table.first_share[k] {
                    counts[i] += 1;
                } else {
                    counts[j] += 1;
                }
            }
        }
    }
    let t = trials as f64;
    ChoiceDistribution {
        product_probs: counts.into_iter().map(|c| c as f64 / t).collect(),
        no_purchase: leaves as f64 / t,
    }
}

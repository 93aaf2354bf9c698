//! Greedy construction and GRASP for `max A(x)` under the capacity.
//!
//! Both rank products by `θ_i / w_i`. GRASP repeats a randomized version of
//! the greedy scan for every restricted-candidate-list size `1..=rcl_max`,
//! then runs a swap local search on each constructed solution. Round 1 is
//! deterministic and reproduces the greedy assortment, so GRASP never does
//! worse than greedy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::instance::{within_capacity, Assortment, Instance};
use crate::objective::LinearizedCoefficients;
use crate::pricing::price_from_a_value;

const ACCEPT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraspConfig {
    /// Largest restricted candidate list size.
    pub rcl_max: usize,
    /// Local-search iterations per round.
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for GraspConfig {
    fn default() -> Self {
        GraspConfig {
            rcl_max: 5,
            max_iter: 80,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicResult {
    pub assortment: Assortment,
    pub a_value: f64,
    pub price: f64,
    pub revenue: f64,
    /// RCL size of the winning GRASP round; `None` for greedy.
    pub construction_rcl: Option<usize>,
    /// Accepted local-search moves in the winning round.
    pub improvement_count: usize,
}

/// What happened in one GRASP round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundTrace {
    pub rcl: usize,
    pub constructed: Assortment,
    /// `A` after construction, then after every accepted swap.
    pub accepted_values: Vec<f64>,
    /// `(removed, added, delta)` per accepted swap.
    pub moves: Vec<(usize, usize, f64)>,
}

/// Products sorted by `θ_i / w_i`, best first; ties keep index order.
pub fn ratio_order(instance: &Instance) -> Vec<usize> {
    let w = instance.weights();
    let ratio: Vec<f64> = instance
        .alpha()
        .iter()
        .zip(w)
        .map(|(a, w)| a.exp() / w)
        .collect();
    let mut order: Vec<usize> = (0..instance.n()).collect();
    order.sort_by(|&a, &b| ratio[b].total_cmp(&ratio[a]).then(a.cmp(&b)));
    order
}

fn finish(
    instance: &Instance,
    coeffs: &LinearizedCoefficients,
    x: Vec<bool>,
    construction_rcl: Option<usize>,
    improvement_count: usize,
) -> HeuristicResult {
    let assortment = Assortment::new(x);
    let a = coeffs.a_value(&assortment);
    let up = price_from_a_value(a, instance.beta());
    HeuristicResult {
        assortment,
        a_value: a,
        price: up.price,
        revenue: up.revenue,
        construction_rcl,
        improvement_count,
    }
}

/// One pass over the ratio order, taking every product that still fits.
pub fn greedy(instance: &Instance) -> HeuristicResult {
    let coeffs = LinearizedCoefficients::new(instance);
    let w = instance.weights();
    let mut x = vec![false; instance.n()];
    let mut load = 0.0;
    for i in ratio_order(instance) {
        if within_capacity(load + w[i], instance.capacity()) {
            x[i] = true;
            load += w[i];
        }
    }
    finish(instance, &coeffs, x, None, 0)
}

pub fn grasp(instance: &Instance, config: &GraspConfig) -> HeuristicResult {
    grasp_traced(instance, config).0
}

/// GRASP plus a per-round record of the search.
pub fn grasp_traced(
    instance: &Instance,
    config: &GraspConfig,
) -> (HeuristicResult, Vec<RoundTrace>) {
    let coeffs = LinearizedCoefficients::new(instance);
    let order = ratio_order(instance);
    let mut best: Option<(Vec<bool>, f64, usize, usize)> = None;
    let mut traces = Vec::with_capacity(config.rcl_max);

    for rcl in 1..=config.rcl_max.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(rcl as u64);

        let (mut x, mut load) = construct(instance, &order, rcl, &mut rng);
        let constructed = Assortment::new(x.clone());
        let mut a = coeffs.a_value_bits(&x);
        let mut trace = RoundTrace {
            rcl,
            constructed,
            accepted_values: vec![a],
            moves: Vec::new(),
        };
        let improvements = local_search(
            instance,
            &coeffs,
            config.max_iter,
            &mut rng,
            &mut x,
            &mut load,
            &mut a,
            &mut trace,
        );

        let value = coeffs.a_value_bits(&x);
        let better = match &best {
            None => true,
            Some((bx, bv, _, _)) => {
                value > *bv
                    || (value == *bv
                        && Assortment::new(x.clone()).preferred_over(&Assortment::new(bx.clone())))
            }
        };
        if better {
            best = Some((x, value, rcl, improvements));
        }
        traces.push(trace);
    }

    let (x, _, rcl, improvements) = best.expect("at least one round runs");
    (
        finish(instance, &coeffs, x, Some(rcl), improvements),
        traces,
    )
}

/// Randomized greedy: repeatedly pick uniformly among the first `rcl`
/// unselected products (in ratio order) that still fit.
fn construct(
    instance: &Instance,
    order: &[usize],
    rcl: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<bool>, f64) {
    let w = instance.weights();
    let cap = instance.capacity();
    let mut x = vec![false; instance.n()];
    let mut load = 0.0;
    let mut candidates = Vec::with_capacity(rcl);
    loop {
        candidates.clear();
        candidates.extend(
            order
                .iter()
                .copied()
                .filter(|&i| !x[i] && within_capacity(load + w[i], cap))
                .take(rcl),
        );
        let pick = match candidates.len() {
            0 => break,
            1 => candidates[0],
            len => candidates[rng.gen_range(0..len)],
        };
        x[pick] = true;
        load += w[pick];
    }
    (x, load)
}

/// Random swap moves: draw one offered and one unoffered product, exchange
/// them, keep the exchange if it fits and strictly increases `A`.
#[allow(clippy::too_many_arguments)]
fn local_search(
    instance: &Instance,
    coeffs: &LinearizedCoefficients,
    max_iter: usize,
    rng: &mut ChaCha8Rng,
    x: &mut [bool],
    load: &mut f64,
    a: &mut f64,
    trace: &mut RoundTrace,
) -> usize {
    let w = instance.weights();
    let cap = instance.capacity();
    let mut inside: Vec<usize> = (0..x.len()).filter(|&i| x[i]).collect();
    let mut outside: Vec<usize> = (0..x.len()).filter(|&i| !x[i]).collect();
    let mut accepted = 0;
    for _ in 0..max_iter {
        if inside.is_empty() || outside.is_empty() {
            continue;
        }
        let pi = rng.gen_range(0..inside.len());
        let po = rng.gen_range(0..outside.len());
        let (leave, enter) = (inside[pi], outside[po]);
        let new_load = *load - w[leave] + w[enter];
        if !within_capacity(new_load, cap) {
            continue;
        }
        // Gains measured against the offered set without `leave`.
        let mut delta = coeffs.linear_coefficient(enter) - coeffs.linear_coefficient(leave);
        for &k in &inside {
            if k != leave {
                delta += coeffs.mu(k, enter) - coeffs.mu(k, leave);
            }
        }
        if delta > ACCEPT_TOL * a.abs().max(1.0) {
            x[leave] = false;
            x[enter] = true;
            inside[pi] = enter;
            outside[po] = leave;
            *load = new_load;
            *a += delta;
            accepted += 1;
            trace.accepted_values.push(*a);
            trace.moves.push((leave, enter, delta));
        }
    }
    accepted
}

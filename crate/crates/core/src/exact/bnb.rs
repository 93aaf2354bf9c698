//! Depth-first branch-and-bound on the linearized program.
//!
//! The incumbent is seeded with the greedy and GRASP solutions. Each node is
//! bounded either by the LP relaxation with the node's fixings substituted in,
//! or by the cheaper knapsack majorant. Once every product is fixed the node
//! is evaluated directly. Branching picks the most fractional product (ties to
//! the smaller index), both children are bounded eagerly, and the child with
//! the better bound is explored first.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::lp::{fractional_knapsack, solve_node};
use super::{SolveResult, SolveStats, SolveStatus};
use crate::heuristics::{grasp, greedy, ratio_order, GraspConfig};
use crate::instance::{within_capacity, Assortment, Instance};
use crate::objective::LinearizedCoefficients;
use crate::pricing::price_from_a_value;

const INTEGRALITY_TOL: f64 = 1e-6;
const PRUNE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundMode {
    #[default]
    Lp,
    Majorant,
}

#[derive(Debug, Clone)]
pub struct BnbConfig {
    pub bound_mode: BoundMode,
    pub node_limit: Option<u64>,
    pub time_limit: Option<Duration>,
    /// Configuration of the GRASP run that seeds the incumbent.
    pub grasp: GraspConfig,
}

impl Default for BnbConfig {
    fn default() -> Self {
        BnbConfig {
            bound_mode: BoundMode::Lp,
            node_limit: None,
            time_limit: None,
            grasp: GraspConfig::default(),
        }
    }
}

/// Global bound and incumbent value after each processed node.
#[derive(Debug, Clone, Default)]
pub struct BnbTrace {
    pub global_bound: Vec<f64>,
    pub incumbent: Vec<f64>,
}

struct Node {
    fixed: Vec<Option<bool>>,
    bound: f64,
    /// Point at which the bound was attained.
    point: Vec<f64>,
}

struct Search<'a> {
    instance: &'a Instance,
    coeffs: LinearizedCoefficients,
    mode: BoundMode,
    order: Vec<usize>,
    linear: Vec<f64>,
    incumbent: Vec<bool>,
    incumbent_value: f64,
    lp_solves: u64,
}

impl Search<'_> {
    fn offer(&mut self, candidate: Vec<bool>) {
        let a = self.coeffs.a_value_bits(&candidate);
        let better = a > self.incumbent_value
            || (a == self.incumbent_value
                && Assortment::new(candidate.clone())
                    .preferred_over(&Assortment::new(self.incumbent.clone())));
        if better {
            self.incumbent_value = a;
            self.incumbent = candidate;
        }
    }

    fn prunable(&self, bound: f64) -> bool {
        bound < self.incumbent_value - PRUNE_TOL * self.incumbent_value.abs().max(1.0)
    }

    /// Bounds a node; `None` when its fixings already break the capacity.
    fn bound(&mut self, fixed: Vec<Option<bool>>) -> Option<Node> {
        let n = self.instance.n();
        if fixed.iter().all(Option::is_some) {
            let bits: Vec<bool> = fixed.iter().map(|f| f == &Some(true)).collect();
            if !Assortment::new(bits.clone()).is_feasible(self.instance) {
                return None;
            }
            let a = self.coeffs.a_value_bits(&bits);
            let point = bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
            return Some(Node {
                fixed,
                bound: a,
                point,
            });
        }
        match self.mode {
            BoundMode::Lp => {
                let relax = solve_node(self.instance, &self.coeffs, &fixed)?;
                self.lp_solves += relax.lp_solves;
                Some(Node {
                    fixed,
                    bound: relax.objective,
                    point: relax.x,
                })
            }
            BoundMode::Majorant => {
                let w = self.instance.weights();
                let mut point = vec![0.0; n];
                let mut load = 0.0;
                let mut constant = 0.0;
                let mut ones = Vec::new();
                for i in 0..n {
                    if fixed[i] == Some(true) {
                        point[i] = 1.0;
                        load += w[i];
                        constant += self.linear[i];
                        for &o in &ones {
                            constant += self.coeffs.mu(o, i);
                        }
                        ones.push(i);
                    }
                }
                if !within_capacity(load, self.instance.capacity()) {
                    return None;
                }
                let free: Vec<usize> = self
                    .order
                    .iter()
                    .copied()
                    .filter(|&i| fixed[i].is_none())
                    .collect();
                let residual = (self.instance.capacity() - load).max(0.0);
                let extra = fractional_knapsack(&free, &self.linear, w, residual, &mut point);
                Some(Node {
                    fixed,
                    bound: constant + extra,
                    point,
                })
            }
        }
    }

    /// In LP mode, a node whose relaxation optimum is a feasible 0/1 point
    /// needs no further search: that point is offered and the node dropped.
    fn closes_at_bound(&mut self, node: &Node) -> bool {
        if self.mode != BoundMode::Lp {
            return false;
        }
        let integral = node
            .point
            .iter()
            .all(|&v| v.min(1.0 - v) <= INTEGRALITY_TOL);
        if !integral {
            return false;
        }
        let bits: Vec<bool> = node.point.iter().map(|&v| v > 0.5).collect();
        if !Assortment::new(bits.clone()).is_feasible(self.instance) {
            return false;
        }
        self.offer(bits);
        true
    }

    /// Product to branch on, or `None` if the node is closed by its bound.
    fn branching_product(&mut self, node: &Node) -> Option<usize> {
        let n = self.instance.n();
        let mut best: Option<(usize, f64)> = None;
        for i in 0..n {
            if node.fixed[i].is_some() {
                continue;
            }
            let v = node.point[i];
            let frac = v.min(1.0 - v);
            if frac > INTEGRALITY_TOL && best.is_none_or(|(_, f)| frac > f) {
                best = Some((i, frac));
            }
        }
        if let Some((i, _)) = best {
            return Some(i);
        }

        // Integral point: it is a feasible assortment (up to rounding).
        let rounded: Vec<bool> = node.point.iter().map(|&v| v > 0.5).collect();
        let feasible = Assortment::new(rounded.clone()).is_feasible(self.instance);
        if feasible {
            self.offer(rounded);
        }
        match self.mode {
            // An integral LP optimum is the best point of the subtree.
            BoundMode::Lp if feasible => None,
            BoundMode::Lp => (0..n)
                .filter(|&i| node.fixed[i].is_none())
                .max_by(|&a, &b| {
                    let fa = node.point[a].min(1.0 - node.point[a]);
                    let fb = node.point[b].min(1.0 - node.point[b]);
                    fa.total_cmp(&fb).then(b.cmp(&a))
                }),
            // The majorant ignores interactions among free products, so an
            // integral point only closes the node when nothing free is taken.
            BoundMode::Majorant => (0..n).find(|&i| node.fixed[i].is_none() && node.point[i] > 0.5),
        }
    }
}

pub fn branch_and_bound(instance: &Instance, config: &BnbConfig) -> SolveResult {
    branch_and_bound_traced(instance, config).0
}

/// Like [`branch_and_bound`], also returning the bound/incumbent history.
pub fn branch_and_bound_traced(instance: &Instance, config: &BnbConfig) -> (SolveResult, BnbTrace) {
    let start = Instant::now();
    let n = instance.n();
    let coeffs = LinearizedCoefficients::new(instance);
    let linear = (0..n).map(|i| coeffs.linear_coefficient(i)).collect();

    let seed_greedy = greedy(instance);
    let seed_grasp = grasp(instance, &config.grasp);
    let mut search = Search {
        instance,
        coeffs,
        mode: config.bound_mode,
        order: ratio_order(instance),
        linear,
        incumbent: seed_greedy.assortment.as_slice().to_vec(),
        incumbent_value: seed_greedy.a_value,
        lp_solves: 0,
    };
    search.offer(seed_grasp.assortment.as_slice().to_vec());

    let mut trace = BnbTrace::default();
    let mut stack: Vec<Node> = Vec::new();
    let root = search
        .bound(vec![None; n])
        .expect("the empty assortment is always feasible");
    let mut global = root.bound.max(search.incumbent_value);
    stack.push(root);

    let mut nodes = 0u64;
    let mut exhausted = true;
    while let Some(node) = stack.pop() {
        let over_nodes = config.node_limit.is_some_and(|limit| nodes >= limit);
        let over_time = config
            .time_limit
            .is_some_and(|limit| start.elapsed() >= limit);
        if over_nodes || over_time {
            stack.push(node);
            exhausted = false;
            break;
        }
        nodes += 1;

        if !search.prunable(node.bound) {
            if let Some(k) = search.branching_product(&node) {
                let mut children = Vec::with_capacity(2);
                for value in [false, true] {
                    let mut fixed = node.fixed.clone();
                    fixed[k] = Some(value);
                    if let Some(mut child) = search.bound(fixed) {
                        child.bound = child.bound.min(node.bound);
                        if !search.prunable(child.bound) && !search.closes_at_bound(&child) {
                            children.push(child);
                        }
                    }
                }
                children.retain(|c| !search.prunable(c.bound));
                // Better bound on top; on a tie the x_k = 1 child goes first.
                children.sort_by(|a, b| a.bound.total_cmp(&b.bound));
                stack.extend(children);
            }
        }

        let open = stack
            .iter()
            .map(|nd| nd.bound)
            .fold(f64::NEG_INFINITY, f64::max);
        global = global.min(open.max(search.incumbent_value));
        trace.global_bound.push(global);
        trace.incumbent.push(search.incumbent_value);
    }
    let a = search.incumbent_value;
    let gap_closed = global - a <= PRUNE_TOL * a.abs().max(1.0);
    let status = if exhausted || gap_closed {
        SolveStatus::Optimal
    } else {
        SolveStatus::Feasible
    };
    let up = price_from_a_value(a, instance.beta());
    let result = SolveResult {
        assortment: Assortment::new(search.incumbent),
        a_value: a,
        price: up.price,
        revenue: up.revenue,
        upper_bound: if exhausted { a } else { global.max(a) },
        status,
        stats: SolveStats {
            nodes,
            lp_solves: search.lp_solves,
            wall_seconds: start.elapsed().as_secs_f64(),
        },
    };
    (result, trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::brute_force_oracle;
    use crate::instance::pair_count;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_instance(seed: u64, n: usize, kappa: f64) -> Instance {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let theta: Vec<f64> = (0..n).map(|_| 5.0 * (1.0 - rng.gen::<f64>())).collect();
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..=10.0)).collect();
        let g = (0..pair_count(n))
            .map(|_| rng.gen_range(0.1..=1.0))
            .collect();
        let cap = kappa * w.iter().sum::<f64>();
        Instance::from_theta(&theta, w, cap, 0.1, g).unwrap()
    }

    #[test]
    fn matches_oracle_in_both_modes() {
        for seed in 0..12 {
            let inst = random_instance(seed, 10, [0.15, 0.3, 0.5][seed as usize % 3]);
            let oracle = brute_force_oracle(&inst).unwrap();
            for mode in [BoundMode::Lp, BoundMode::Majorant] {
                let cfg = BnbConfig {
                    bound_mode: mode,
                    ..BnbConfig::default()
                };
                let r = branch_and_bound(&inst, &cfg);
                assert_eq!(r.status, SolveStatus::Optimal);
                assert_eq!(r.a_value, oracle.a_value, "seed {seed} mode {mode:?}");
                assert_eq!(r.assortment, oracle.assortment);
                assert_eq!(r.revenue, oracle.revenue);
            }
        }
    }

    #[test]
    fn trace_is_monotone() {
        let inst = random_instance(99, 14, 0.3);
        let cfg = BnbConfig {
            grasp: GraspConfig {
                rcl_max: 1,
                max_iter: 0,
                seed: 0,
            },
            ..BnbConfig::default()
        };
        let (_, trace) = branch_and_bound_traced(&inst, &cfg);
        assert!(trace.global_bound.windows(2).all(|w| w[1] <= w[0]));
        assert!(trace.incumbent.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn node_budget_yields_feasible_status() {
        let inst = random_instance(3, 40, 0.1);
        let cfg = BnbConfig {
            node_limit: Some(1),
            ..BnbConfig::default()
        };
        let r = branch_and_bound(&inst, &cfg);
        assert!(r.assortment.is_feasible(&inst));
        assert!(r.a_value <= r.upper_bound + 1e-8);
        assert!(matches!(
            r.status,
            SolveStatus::Feasible | SolveStatus::Optimal
        ));
        assert!(r.stats.nodes <= 1);
    }
}

//! The linearized mixed-integer program and its LP relaxation.
//!
//! ```text
//! max  Σ_{i<j} μ_ij y_ij + Σ_i (n − 1) θ_i x_i
//! s.t. Σ_i w_i x_i ≤ C
//!      x_i + x_j − y_ij ≤ 1     for every pair i < j
//!      y ≥ 0,  x ∈ {0, 1}^n     (x ∈ [0, 1]^n in the relaxation)
//! ```
//!
//! Since every `μ_ij ≤ 0`, the constraints `y_ij ≤ x_i` and `y_ij ≤ x_j` are
//! never binding and are left out. A pair row can only bind when
//! `x_i + x_j > 1`, and at typical capacities few products are anywhere near
//! one, so the relaxation is solved by row generation: solve with the pair
//! rows found so far, add every violated one, repeat. The final LP satisfies
//! all rows, so its optimum is the optimum of the full relaxation.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::simplex::LinearProgram;
use crate::instance::{pair_count, pair_index, pairs, within_capacity, Instance};
use crate::objective::LinearizedCoefficients;

const ROW_VIOLATION_TOL: f64 = 1e-9;

/// Explicit data of the linearized program, used to check LP solutions.
#[derive(Debug, Clone)]
pub struct MipFormulation {
    n: usize,
    /// Objective coefficients of `x`, `(n − 1) θ_i`.
    pub x_objective: Vec<f64>,
    /// Objective coefficients of `y` in pair layout, `μ_ij`.
    pub y_objective: Vec<f64>,
    pub weights: Vec<f64>,
    pub capacity: f64,
}

impl MipFormulation {
    pub fn new(instance: &Instance, coeffs: &LinearizedCoefficients) -> Self {
        let n = instance.n();
        MipFormulation {
            n,
            x_objective: (0..n).map(|i| coeffs.linear_coefficient(i)).collect(),
            y_objective: coeffs.mu_upper().to_vec(),
            weights: instance.weights().to_vec(),
            capacity: instance.capacity(),
        }
    }

    pub fn num_x_vars(&self) -> usize {
        self.n
    }

    pub fn num_y_vars(&self) -> usize {
        pair_count(self.n)
    }

    pub fn num_pair_rows(&self) -> usize {
        pair_count(self.n)
    }

    pub fn objective(&self, x: &[f64], y: &[f64]) -> f64 {
        let lin: f64 = x.iter().zip(&self.x_objective).map(|(a, b)| a * b).sum();
        let quad: f64 = y.iter().zip(&self.y_objective).map(|(a, b)| a * b).sum();
        lin + quad
    }

    /// Largest violation of any row or bound of the relaxation.
    pub fn max_violation(&self, x: &[f64], y: &[f64]) -> f64 {
        let load: f64 = x.iter().zip(&self.weights).map(|(a, b)| a * b).sum();
        let mut worst = (load - self.capacity).max(0.0);
        for &v in x {
            worst = worst.max(-v).max(v - 1.0);
        }
        for (k, (i, j)) in pairs(self.n).enumerate() {
            worst = worst.max(-y[k]).max(x[i] + x[j] - y[k] - 1.0);
        }
        worst
    }
}

/// Optimal solution of the LP relaxation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub x_frac: Vec<f64>,
    /// One entry per pair, upper-triangular layout.
    pub y_frac: Vec<f64>,
    pub objective_value: f64,
}

/// LP relaxation at a branch-and-bound node.
#[derive(Debug, Clone)]
pub(crate) struct NodeRelaxation {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub objective: f64,
    pub lp_solves: u64,
}

/// Solves the relaxation with some products fixed. Returns `None` when the
/// fixed products alone exceed the capacity.
pub(crate) fn solve_node(
    instance: &Instance,
    coeffs: &LinearizedCoefficients,
    fixed: &[Option<bool>],
) -> Option<NodeRelaxation> {
    let n = instance.n();
    let w = instance.weights();
    let ones: Vec<usize> = (0..n).filter(|&i| fixed[i] == Some(true)).collect();
    let free: Vec<usize> = (0..n).filter(|&i| fixed[i].is_none()).collect();
    let fixed_load: f64 = ones.iter().map(|&i| w[i]).sum();
    if !within_capacity(fixed_load, instance.capacity()) {
        return None;
    }
    let residual = (instance.capacity() - fixed_load).max(0.0);

    let mut constant: f64 = ones.iter().map(|&i| coeffs.linear_coefficient(i)).sum();
    for (a, &i) in ones.iter().enumerate() {
        for &j in &ones[a + 1..] {
            constant += coeffs.mu(i, j);
        }
    }

    let mut column = vec![usize::MAX; n];
    for (c, &i) in free.iter().enumerate() {
        column[i] = c;
    }

    // Active pair rows as (i, j) with i < j; at least one side is free.
    let mut active: Vec<(usize, usize)> = Vec::new();
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut lp_solves = 0;
    loop {
        let mut lp = LinearProgram::default();
        for &i in &free {
            lp.add_column(coeffs.linear_coefficient(i), 1.0);
        }
        lp.add_row(free.iter().map(|&i| (column[i], w[i])).collect(), residual);
        let mut y_column = Vec::with_capacity(active.len());
        for &(i, j) in &active {
            let y = lp.add_column(coeffs.mu(i, j), f64::INFINITY);
            y_column.push(y);
            let mut entries = vec![(y, -1.0)];
            let mut rhs = 1.0;
            for k in [i, j] {
                if fixed[k].is_none() {
                    entries.push((column[k], 1.0));
                } else {
                    rhs -= 1.0;
                }
            }
            lp.add_row(entries, rhs);
        }
        let out = lp
            .solve()
            .expect("relaxation is bounded and the slack basis is feasible");
        lp_solves += 1;

        let mut x = vec![0.0; n];
        for i in 0..n {
            x[i] = match fixed[i] {
                Some(true) => 1.0,
                Some(false) => 0.0,
                None => out.x[column[i]],
            };
        }

        let mut added = false;
        for (a, &i) in free.iter().enumerate() {
            for &j in &free[a + 1..] {
                if x[i] + x[j] > 1.0 + ROW_VIOLATION_TOL
                    && coeffs.mu(i, j) < 0.0
                    && seen.insert((i, j))
                {
                    active.push((i, j));
                    added = true;
                }
            }
            if x[i] > ROW_VIOLATION_TOL {
                for &o in &ones {
                    let key = (o.min(i), o.max(i));
                    if coeffs.mu(o, i) < 0.0 && seen.insert(key) {
                        active.push(key);
                        added = true;
                    }
                }
            }
        }
        if added {
            continue;
        }

        let mut y = vec![0.0; pair_count(n)];
        for (a, &i) in ones.iter().enumerate() {
            for &j in &ones[a + 1..] {
                y[pair_index(n, i, j)] = 1.0;
            }
        }
        for (&(i, j), &c) in active.iter().zip(&y_column) {
            y[pair_index(n, i, j)] = out.x[c];
        }
        return Some(NodeRelaxation {
            x,
            y,
            objective: out.objective + constant,
            lp_solves,
        });
    }
}

/// Optimum of the LP relaxation of the linearized program.
pub fn lp_relaxation(instance: &Instance) -> LpSolution {
    let coeffs = LinearizedCoefficients::new(instance);
    let root = solve_node(instance, &coeffs, &vec![None; instance.n()])
        .expect("the empty assortment is always feasible");
    LpSolution {
        x_frac: root.x,
        y_frac: root.y,
        objective_value: root.objective,
    }
}

/// Fractional knapsack over `order` (assumed sorted by value density),
/// returning the value and the fill fractions.
pub(crate) fn fractional_knapsack(
    order: &[usize],
    value: &[f64],
    weight: &[f64],
    capacity: f64,
    x: &mut [f64],
) -> f64 {
    let mut remaining = capacity;
    let mut total = 0.0;
    for &i in order {
        if remaining <= 0.0 {
            break;
        }
        let frac = (remaining / weight[i]).min(1.0);
        x[i] = frac;
        total += frac * value[i];
        remaining -= frac * weight[i];
    }
    total
}

/// Bound from `A(x) ≤ (n − 1) Σ θ_i x_i`: `(n − 1)` times the fractional
/// knapsack optimum of `θ` under the capacity.
pub fn knapsack_majorant_bound(instance: &Instance) -> f64 {
    let coeffs = LinearizedCoefficients::new(instance);
    let order = crate::heuristics::ratio_order(instance);
    let mut x = vec![0.0; instance.n()];
    let value: Vec<f64> = (0..instance.n())
        .map(|i| coeffs.linear_coefficient(i))
        .collect();
    fractional_knapsack(
        &order,
        &value,
        instance.weights(),
        instance.capacity(),
        &mut x,
    )
}

/// Revenue bound `W(Ā/e)/β` with `Ā` the LP relaxation optimum.
pub fn revenue_upper_bound(instance: &Instance) -> f64 {
    crate::pricing::revenue_from_a_value(lp_relaxation(instance).objective_value, instance.beta())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Assortment;
    use crate::objective::a_value;

    #[test]
    fn two_products_capacity_binding() {
        let inst =
            Instance::with_uniform_gamma(vec![0.0, 0.0], vec![1.0, 1.0], 1.0, 0.1, 0.5).unwrap();
        let lp = lp_relaxation(&inst);
        assert!((lp.objective_value - 1.0).abs() < 1e-12);
        assert!((lp.x_frac[0] + lp.x_frac[1] - 1.0).abs() < 1e-12);
        assert_eq!(lp.y_frac, vec![0.0]);
        let ub = revenue_upper_bound(&inst);
        assert!((ub - 2.784_645_427_610_74).abs() < 1e-10);
    }

    #[test]
    fn everything_fits() {
        let inst = Instance::new(
            vec![0.3, -0.2, 1.1, 0.5],
            vec![1.0, 2.0, 1.5, 0.5],
            10.0,
            0.1,
            vec![0.2, 0.5, 0.9, 0.3, 1.0, 0.6],
        )
        .unwrap();
        let lp = lp_relaxation(&inst);
        assert!(lp.x_frac.iter().all(|&v| (v - 1.0).abs() < 1e-9));
        let full = a_value(&inst, &Assortment::full(4));
        assert!((lp.objective_value - full).abs() <= 1e-9 * full);
        let coeffs = LinearizedCoefficients::new(&inst);
        let theta_sum: f64 = coeffs.theta().iter().sum();
        assert!((knapsack_majorant_bound(&inst) - 3.0 * theta_sum).abs() < 1e-12);
    }

    #[test]
    fn majorant_single_fractional_item() {
        let inst = Instance::from_theta(
            &[2.0, 3.0, 1.0],
            vec![4.0, 5.0, 8.0],
            2.0,
            0.1,
            vec![0.5; 3],
        )
        .unwrap();
        // Best density is product 1 (3/5); only 2/5 of it fits.
        let expected = 2.0 * 2.0 * (3.0 / 5.0);
        assert!((knapsack_majorant_bound(&inst) - expected).abs() < 1e-12);
    }

    #[test]
    fn fixings_substitute_into_rows() {
        let inst = Instance::with_uniform_gamma(vec![0.0; 3], vec![1.0; 3], 2.0, 0.1, 0.5).unwrap();
        let coeffs = LinearizedCoefficients::new(&inst);
        let node = solve_node(&inst, &coeffs, &[Some(true), Some(true), None]).unwrap();
        // Capacity is used up by the fixed pair; the relaxation is the point itself.
        let x = Assortment::from_indices(3, &[0, 1]);
        assert!((node.objective - a_value(&inst, &x)).abs() < 1e-12);
        assert_eq!(node.x[2], 0.0);
        assert!(solve_node(&inst, &coeffs, &[Some(true), Some(true), Some(true)]).is_none());
    }
}

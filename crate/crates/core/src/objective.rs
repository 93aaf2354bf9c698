//! The pair-sum objective `A(x)`.
//!
//! Each nest `{i, j}` contributes `(e^{α_i/γ} x_i + e^{α_j/γ} x_j)^γ`. With
//! both products offered that is `ρ_ij`, with only `i` offered it collapses
//! to `θ_i = e^{α_i}`, and with neither it is zero. Writing
//! `μ_ij = ρ_ij − θ_i − θ_j ≤ 0` gives the bilinear form
//! `A(x) = Σ_{i<j} μ_ij x_i x_j + (n − 1) Σ_i θ_i x_i`, which is what the
//! exact solver and the local search work with.

use crate::error::{Error, Result};
use crate::instance::{pair_count, pair_index, pairs, Assortment, Instance};

#[inline]
pub(crate) fn log_sum_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `(e^{α_i/γ} + e^{α_j/γ})^γ`, evaluated in log space.
#[inline]
pub(crate) fn joint_term(alpha_i: f64, alpha_j: f64, gamma: f64) -> f64 {
    if gamma == 1.0 {
        return alpha_i.exp() + alpha_j.exp();
    }
    (gamma * log_sum_exp(alpha_i / gamma, alpha_j / gamma)).exp()
}

/// Nest contribution for the given offer indicators.
#[inline]
fn pair_term(alpha_i: f64, alpha_j: f64, gamma: f64, xi: bool, xj: bool) -> f64 {
    match (xi, xj) {
        (true, true) => joint_term(alpha_i, alpha_j, gamma),
        (true, false) => alpha_i.exp(),
        (false, true) => alpha_j.exp(),
        (false, false) => 0.0,
    }
}

/// `A(x)` evaluated term by term from the instance.
pub fn a_value(instance: &Instance, x: &Assortment) -> f64 {
    let alpha = instance.alpha();
    let mut total = 0.0;
    for (i, j) in pairs(instance.n()) {
        total += pair_term(
            alpha[i],
            alpha[j],
            instance.gamma(i, j),
            x.offered(i),
            x.offered(j),
        );
    }
    total
}

/// Precomputed `θ`, `ρ`, `μ` for one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedCoefficients {
    n: usize,
    theta: Vec<f64>,
    rho: Vec<f64>,
    mu: Vec<f64>,
}

impl LinearizedCoefficients {
    pub fn new(instance: &Instance) -> Self {
        let n = instance.n();
        let alpha = instance.alpha();
        let theta: Vec<f64> = alpha.iter().map(|a| a.exp()).collect();
        let mut rho = Vec::with_capacity(pair_count(n));
        let mut mu = Vec::with_capacity(pair_count(n));
        for (i, j) in pairs(n) {
            let gamma = instance.gamma(i, j);
            let r = joint_term(alpha[i], alpha[j], gamma);
            rho.push(r);
            // t -> t^γ is subadditive, so μ is nonpositive and vanishes at γ = 1.
            mu.push(if gamma == 1.0 {
                0.0
            } else {
                (r - theta[i] - theta[j]).min(0.0)
            });
        }
        LinearizedCoefficients { n, theta, rho, mu }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn rho_upper(&self) -> &[f64] {
        &self.rho
    }

    pub fn mu_upper(&self) -> &[f64] {
        &self.mu
    }

    #[inline]
    pub fn mu(&self, i: usize, j: usize) -> f64 {
        self.mu[pair_index(self.n, i, j)]
    }

    #[inline]
    pub fn rho(&self, i: usize, j: usize) -> f64 {
        self.rho[pair_index(self.n, i, j)]
    }

    /// Objective coefficient of `x_i` once the linear terms are grouped per
    /// product: `(n − 1) θ_i`.
    #[inline]
    pub fn linear_coefficient(&self, i: usize) -> f64 {
        (self.n - 1) as f64 * self.theta[i]
    }

    /// `A(x)` from the cached nest terms. Bit-identical to [`a_value`]: the
    /// same term values are summed in the same order.
    pub fn a_value(&self, x: &Assortment) -> f64 {
        self.a_value_bits(x.as_slice())
    }

    pub(crate) fn a_value_bits(&self, x: &[bool]) -> f64 {
        let mut total = 0.0;
        let mut k = 0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                total += match (x[i], x[j]) {
                    (true, true) => self.rho[k],
                    (true, false) => self.theta[i],
                    (false, true) => self.theta[j],
                    (false, false) => 0.0,
                };
                k += 1;
            }
        }
        total
    }

    /// Gain from adding `k` to the offered set `x` (which must not contain it).
    pub(crate) fn add_gain(&self, x: &[bool], k: usize) -> f64 {
        let interaction: f64 = (0..self.n)
            .filter(|&i| i != k && x[i])
            .map(|i| self.mu(i, k))
            .sum();
        interaction + self.linear_coefficient(k)
    }
}

/// `A(x)` through the bilinear form `Σ_{i<j} (μ_ij x_i x_j + θ_i x_i + θ_j x_j)`.
pub fn a_value_linearized(
    instance: &Instance,
    coeffs: &LinearizedCoefficients,
    x: &Assortment,
) -> f64 {
    debug_assert_eq!(instance.n(), coeffs.n());
    let b = |i: usize| if x.offered(i) { 1.0 } else { 0.0 };
    let mut total = 0.0;
    for (k, (i, j)) in pairs(coeffs.n).enumerate() {
        total += coeffs.mu[k] * b(i) * b(j) + coeffs.theta[i] * b(i) + coeffs.theta[j] * b(j);
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    Add,
    Remove,
}

/// `A(x') − A(x)` where `x'` adds or removes `product`, in O(n).
pub fn incremental_a_delta(
    instance: &Instance,
    coeffs: &LinearizedCoefficients,
    current: &Assortment,
    product: usize,
    direction: Move,
) -> Result<f64> {
    debug_assert_eq!(instance.n(), coeffs.n());
    if product >= coeffs.n {
        return Err(Error::Precondition(format!(
            "product {product} out of range for n = {}",
            coeffs.n
        )));
    }
    let offered = current.offered(product);
    match direction {
        Move::Add if offered => Err(Error::Precondition(format!(
            "cannot add product {product}: already offered"
        ))),
        Move::Remove if !offered => Err(Error::Precondition(format!(
            "cannot remove product {product}: not offered"
        ))),
        Move::Add => Ok(coeffs.add_gain(current.as_slice(), product)),
        Move::Remove => Ok(-coeffs.add_gain(current.as_slice(), product)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_instance(rng: &mut ChaCha8Rng, n: usize) -> Instance {
        let theta: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..5.0)).collect();
        let w = (0..n).map(|_| rng.gen_range(1.0..10.0)).collect();
        let g = (0..pair_count(n))
            .map(|_| rng.gen_range(0.1..=1.0))
            .collect();
        Instance::from_theta(&theta, w, 10.0, 0.1, g).unwrap()
    }

    /// Direct power-form evaluation, no log-space and no collapsing shortcut.
    fn a_value_naive(inst: &Instance, x: &Assortment) -> f64 {
        let a = inst.alpha();
        pairs(inst.n())
            .map(|(i, j)| {
                let g = inst.gamma(i, j);
                let b = |k: usize| if x.offered(k) { 1.0 } else { 0.0 };
                ((a[i] / g).exp() * b(i) + (a[j] / g).exp() * b(j)).powf(g)
            })
            .sum()
    }

    #[test]
    fn spec_examples() {
        let inst =
            Instance::with_uniform_gamma(vec![0.0, 0.0], vec![1.0; 2], 2.0, 0.1, 0.5).unwrap();
        assert_eq!(a_value(&inst, &Assortment::empty(2)), 0.0);
        assert!((a_value(&inst, &Assortment::full(2)) - 2f64.sqrt()).abs() < 1e-15);

        let inst =
            Instance::with_uniform_gamma(vec![0.0, 3.7], vec![1.0; 2], 2.0, 0.1, 0.3).unwrap();
        assert_eq!(a_value(&inst, &Assortment::from_indices(2, &[0])), 1.0);
    }

    #[test]
    fn mu_vanishes_at_gamma_one() {
        let inst =
            Instance::with_uniform_gamma(vec![0.0, 0.0], vec![1.0; 2], 2.0, 0.1, 1.0).unwrap();
        let c = LinearizedCoefficients::new(&inst);
        assert_eq!(c.mu(0, 1), 0.0);
        assert_eq!(a_value_linearized(&inst, &c, &Assortment::full(2)), 2.0);
        assert_eq!(a_value_linearized(&inst, &c, &Assortment::empty(2)), 0.0);
    }

    #[test]
    fn log_space_survives_small_gamma() {
        // e^{α/γ} = e^{1000} overflows; the log-space form does not.
        let inst =
            Instance::with_uniform_gamma(vec![5.0, 4.0], vec![1.0; 2], 2.0, 0.1, 0.005).unwrap();
        let a = a_value(&inst, &Assortment::full(2));
        assert!(a.is_finite());
        assert!(a >= 5f64.exp() && a <= 5f64.exp() + 4f64.exp());
    }

    #[test]
    fn exhaustive_identity_and_naive_agreement() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let inst = random_instance(&mut rng, 8);
            let c = LinearizedCoefficients::new(&inst);
            for mask in 0..1u64 << 8 {
                let x = Assortment::from_mask(8, mask);
                let a = a_value(&inst, &x);
                let lin = a_value_linearized(&inst, &c, &x);
                assert!((a - lin).abs() <= 1e-9 * a.max(1.0));
                assert!((a - a_value_naive(&inst, &x)).abs() <= 1e-10 * a.max(1.0));
                assert_eq!(a.to_bits(), c.a_value(&x).to_bits());
            }
        }
    }

    #[test]
    fn coefficient_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let inst = random_instance(&mut rng, 12);
        let c = LinearizedCoefficients::new(&inst);
        for (i, j) in pairs(12) {
            assert!(c.mu(i, j) <= 0.0);
            assert!(c.rho(i, j) >= c.theta()[i].max(c.theta()[j]));
            if inst.gamma(i, j) < 1.0 - 1e-6 {
                assert!(c.mu(i, j) < 0.0);
            }
        }
    }

    #[test]
    fn delta_preconditions() {
        let inst = Instance::with_uniform_gamma(vec![0.0; 3], vec![1.0; 3], 3.0, 0.1, 0.5).unwrap();
        let c = LinearizedCoefficients::new(&inst);
        let x = Assortment::from_indices(3, &[1]);
        assert!(incremental_a_delta(&inst, &c, &x, 1, Move::Add).is_err());
        assert!(incremental_a_delta(&inst, &c, &x, 0, Move::Remove).is_err());
        assert!(incremental_a_delta(&inst, &c, &x, 7, Move::Add).is_err());
        let empty = Assortment::empty(3);
        let d = incremental_a_delta(&inst, &c, &empty, 2, Move::Add).unwrap();
        assert_eq!(d, 2.0 * c.theta()[2]);
    }

    proptest! {
        #[test]
        fn delta_matches_full_recomputation(seed in any::<u64>(), mask in any::<u64>(), k in 0usize..10) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let inst = random_instance(&mut rng, 10);
            let c = LinearizedCoefficients::new(&inst);
            let x = Assortment::from_mask(10, mask);
            let mut y = x.clone();
            let dir = if x.offered(k) { Move::Remove } else { Move::Add };
            y.set(k, !x.offered(k));
            let d = incremental_a_delta(&inst, &c, &x, k, dir).unwrap();
            let full = a_value(&inst, &y) - a_value(&inst, &x);
            let scale = a_value(&inst, &x).max(a_value(&inst, &y)).max(1.0);
            prop_assert!((d - full).abs() <= 1e-9 * scale);
            let back_dir = if dir == Move::Add { Move::Remove } else { Move::Add };
            let back = incremental_a_delta(&inst, &c, &y, k, back_dir).unwrap();
            prop_assert!((d + back).abs() <= 1e-12 * scale);
        }

        #[test]
        fn adding_never_decreases_a(seed in any::<u64>(), mask in any::<u64>(), k in 0usize..9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let inst = random_instance(&mut rng, 9);
            let mut x = Assortment::from_mask(9, mask);
            x.set(k, false);
            let before = a_value(&inst, &x);
            x.set(k, true);
            prop_assert!(a_value(&inst, &x) >= before);
        }
    }
}

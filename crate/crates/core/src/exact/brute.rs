use std::time::Instant;

use super::{SolveResult, SolveStats, SolveStatus};
use crate::error::{Error, Result};
use crate::instance::{within_capacity, Assortment, Instance};
use crate::objective::LinearizedCoefficients;
use crate::pricing::price_from_a_value;

pub const MAX_BRUTE_FORCE_N: usize = 22;

/// Enumerates every assortment and keeps the feasible maximizer of `A`.
/// Ties go to the assortment that includes the smallest differing index.
pub fn brute_force_oracle(instance: &Instance) -> Result<SolveResult> {
    let n = instance.n();
    if n > MAX_BRUTE_FORCE_N {
        return Err(Error::TooLarge {
            n,
            limit: MAX_BRUTE_FORCE_N,
        });
    }
    let start = Instant::now();
    let coeffs = LinearizedCoefficients::new(instance);
    let w = instance.weights();
    let mut bits = vec![false; n];
    let mut best_bits = vec![false; n];
    let mut best = coeffs.a_value_bits(&best_bits);
    for mask in 1u64..1 << n {
        let mut load = 0.0;
        for (i, b) in bits.iter_mut().enumerate() {
            *b = mask >> i & 1 == 1;
            if *b {
                load += w[i];
            }
        }
        if !within_capacity(load, instance.capacity()) {
            continue;
        }
        let a = coeffs.a_value_bits(&bits);
        if a > best || (a == best && prefers(&bits, &best_bits)) {
            best = a;
            best_bits.copy_from_slice(&bits);
        }
    }
    let up = price_from_a_value(best, instance.beta());
    Ok(SolveResult {
        assortment: Assortment::new(best_bits),
        a_value: best,
        price: up.price,
        revenue: up.revenue,
        upper_bound: best,
        status: SolveStatus::Optimal,
        stats: SolveStats {
            nodes: 1 << n,
            lp_solves: 0,
            wall_seconds: start.elapsed().as_secs_f64(),
        },
    })
}

fn prefers(a: &[bool], b: &[bool]) -> bool {
    a.iter()
        .zip(b)
        .find(|(x, y)| x != y)
        .is_some_and(|(x, _)| *x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singletons_only_tie_goes_to_first() {
        let inst =
            Instance::with_uniform_gamma(vec![0.0, 0.0], vec![1.0, 1.0], 1.0, 0.1, 0.7).unwrap();
        let r = brute_force_oracle(&inst).unwrap();
        assert_eq!(r.assortment, Assortment::from_indices(2, &[0]));
        assert_eq!(r.a_value, 1.0);
        assert_eq!(r.status, SolveStatus::Optimal);
    }

    #[test]
    fn both_fit() {
        let inst =
            Instance::with_uniform_gamma(vec![0.0, 0.0], vec![1.0, 1.0], 2.0, 0.1, 0.5).unwrap();
        let r = brute_force_oracle(&inst).unwrap();
        assert_eq!(r.assortment, Assortment::full(2));
        assert!((r.a_value - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn refuses_large_instances() {
        let n = MAX_BRUTE_FORCE_N + 1;
        let inst = Instance::with_uniform_gamma(vec![0.0; n], vec![1.0; n], 3.0, 0.1, 0.5).unwrap();
        assert!(matches!(
            brute_force_oracle(&inst),
            Err(Error::TooLarge { .. })
        ));
    }
}

//! Principal branch of the Lambert W function on the nonnegative ray.

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 50;
const RESIDUAL_TOL: f64 = 1e-14;

/// Solves `w * exp(w) = y` for `w >= 0`.
///
/// Halley iteration started from `ln(1 + y)`, which lies above the root for
/// every `y > 0` and makes the iteration monotone.
///
/// ```
/// # use pcl_assort::lambert::lambert_w0;
/// let w = lambert_w0(std::f64::consts::E).unwrap();
/// assert!((w - 1.0).abs() < 1e-15);
/// assert!(lambert_w0(-1.0).is_err());
/// ```
pub fn lambert_w0(y: f64) -> Result<f64> {
    if y.is_nan() || y < 0.0 {
        return Err(Error::Domain(y));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    if y.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let scale = y.max(1.0);
    let mut w = y.ln_1p();
    for _ in 0..MAX_ITERATIONS {
        let ew = w.exp();
        let f = w * ew - y;
        if f.abs() <= RESIDUAL_TOL * scale {
            break;
        }
        let wp1 = w + 1.0;
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        let next = w - step;
        if next == w {
            break;
        }
        w = next.max(0.0);
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(y: f64) -> f64 {
        let w = lambert_w0(y).unwrap();
        (w * w.exp() - y).abs() / y.max(1.0)
    }

    #[test]
    fn fixed_points() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert!((lambert_w0(std::f64::consts::E).unwrap() - 1.0).abs() < 1e-15);
        // W(1/e), checked against an arbitrary-precision evaluation.
        let w = lambert_w0(1.0 / std::f64::consts::E).unwrap();
        assert!((w - 0.278_464_542_761_074).abs() < 1e-14);
        // Omega constant.
        assert!((lambert_w0(1.0).unwrap() - 0.567_143_290_409_783_8).abs() < 1e-15);
    }

    #[test]
    fn negative_is_domain_error() {
        assert!(matches!(lambert_w0(-1e-300), Err(Error::Domain(_))));
        assert!(lambert_w0(f64::NAN).is_err());
    }

    #[test]
    fn tiny_and_huge_arguments() {
        for y in [1e-300, 1e-200, 1e-30, 1e-12, 1e12, 1e100, 1e300] {
            assert!(residual(y) <= 1e-12, "y = {y}");
        }
        assert!(lambert_w0(1e-300).unwrap() > 0.0);
    }

    #[test]
    fn strictly_increasing_on_a_grid() {
        let mut prev = -1.0;
        for k in 0..2000 {
            let y = (k as f64 * 0.01).exp_m1();
            let w = lambert_w0(y).unwrap();
            assert!(w > prev);
            prev = w;
        }
    }
}

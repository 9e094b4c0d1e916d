//! Perturbation modes of the balanced fluid solution.
//!
//! Around `l_i = 2h/d`, `x_i = h/d` the perturbations `xi_i e^{zt}` of `x`
//! and `theta_i e^{zt}` of `l` satisfy
//!
//! ```text
//! (1 + hz) xi_i = -theta_i/2 + mean(theta) + (theta_i - mean(theta)) e^{-zh}
//! hz theta_i    = (theta_i/2 - xi_i) e^{-zh}
//! ```
//!
//! Zero-sum directions have a real positive growth rate `x0/h` where `x0`
//! solves `g(x) = 1 + x/2 - e^{-x} - x e^x - x^2 e^x = 0`; directions with
//! non-zero sum obey `1 + hz = e^{-zh}/2`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Residual tolerance for [`verify_unstable_mode`].
pub const MODE_TOLERANCE: f64 = 1e-8;

pub fn g(x: f64) -> f64 {
    1.0 + 0.5 * x - (-x).exp() - x * x.exp() - x * x * x.exp()
}

/// Positive root of [`g`] in `(0, 1)` by bisection.
pub fn find_x0() -> Result<f64> {
    let (mut lo, mut hi) = (1e-6, 1.0);
    let (glo, ghi) = (g(lo), g(hi));
    if glo.signum() == ghi.signum() {
        return Err(Error::Numerical(format!(
            "g has no sign change on [{lo}, {hi}]: {glo}, {ghi}"
        )));
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if g(mid).signum() == glo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `r0 = 1/2 - x0 e^{x0}`, the ratio `xi_i / theta_i` of the unstable mode.
pub fn r0(x0: f64) -> f64 {
    0.5 - x0 * x0.exp()
}

/// Characteristic function of directions with non-zero sum.
pub fn mean_mode_characteristic(h: f64) -> impl Fn(Complex64) -> Complex64 {
    move |z| 1.0 + h * z - 0.5 * (-z * h).exp()
}

/// Characteristic function of zero-sum directions (it vanishes at `z = 0`
/// and at `z = x0/h`).
pub fn zero_sum_characteristic(h: f64) -> impl Fn(Complex64) -> Complex64 {
    move |z| {
        let s = h * z;
        let e = (-s).exp();
        s * (1.0 + s) - (1.0 + 0.5 * s - e) * e
    }
}

/// Maximum modulus of the defect of both linearized equations.
pub fn mode_residual(theta: &[f64], xi: &[f64], z: Complex64, h: f64) -> f64 {
    let d = theta.len() as f64;
    let mean = theta.iter().sum::<f64>() / d;
    let e = (-z * h).exp();
    theta
        .iter()
        .zip(xi)
        .flat_map(|(&t, &x)| {
            let first = (1.0 + h * z) * x - (-0.5 * t + mean + (t - mean) * e);
            let second = h * z * t - (0.5 * t - x) * e;
            [first.norm(), second.norm()]
        })
        .fold(0.0, f64::max)
}

/// A candidate exponential solution and how well it satisfies the
/// linearized equations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeCheck {
    pub theta: Vec<f64>,
    pub xi: Vec<f64>,
    /// Perturbation of `w`, `theta - xi`.
    pub eta: Vec<f64>,
    pub z: Complex64,
    pub residual: f64,
}

impl ModeCheck {
    pub fn passed(&self) -> bool {
        self.residual < MODE_TOLERANCE
    }
}

/// Check the unstable mode along `theta = (1, -1, 0, ...)`.
pub fn verify_unstable_mode(d: usize, h: f64) -> Result<ModeCheck> {
    if d < 2 {
        return Err(invalid("an unstable direction needs d >= 2"));
    }
    let mut theta = vec![0.0; d];
    theta[0] = 1.0;
    theta[1] = -1.0;
    verify_unstable_mode_along(&theta, h)
}

/// Check the unstable mode along a zero-sum direction, scaled to unit
/// max-norm.
pub fn verify_unstable_mode_along(theta: &[f64], h: f64) -> Result<ModeCheck> {
    if theta.len() < 2 {
        return Err(invalid("an unstable direction needs d >= 2"));
    }
    if !(h > 0.0) {
        return Err(invalid("delay h must be positive"));
    }
    let scale = theta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Err(invalid("theta must be non-zero"));
    }
    let theta: Vec<f64> = theta.iter().map(|v| v / scale).collect();
    if theta.iter().sum::<f64>().abs() > 1e-12 {
        return Err(invalid("theta must sum to zero"));
    }
    let x0 = find_x0()?;
    let r = r0(x0);
    let xi: Vec<f64> = theta.iter().map(|t| r * t).collect();
    let z = Complex64::new(x0 / h, 0.0);
    let residual = mode_residual(&theta, &xi, z, h);
    let eta = theta.iter().zip(&xi).map(|(t, x)| t - x).collect();
    Ok(ModeCheck {
        theta,
        xi,
        eta,
        z,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stability::roots::{count_roots, SpectralRegion};

    #[test]
    fn x0_bracket_and_value() {
        assert!(g(1.0) < 0.0);
        assert!(g(1e-3) > 0.0);
        let x0 = find_x0().unwrap();
        assert!((x0 - 0.18).abs() < 0.01);
        assert!(g(x0).abs() < 1e-10);
        assert!(g(x0 - 1e-9) > 0.0 && g(x0 + 1e-9) < 0.0);
    }

    #[test]
    fn x0_matches_newton() {
        let dg = |x: f64| 0.5 + (-x).exp() - x.exp() - 3.0 * x * x.exp() - x * x * x.exp();
        let mut x = 0.18;
        for _ in 0..50 {
            x -= g(x) / dg(x);
        }
        let x0 = find_x0().unwrap();
        assert!((x0 - x).abs() < 1e-11);
        // frozen from an independent high-precision refinement
        assert!((x0 - 0.180_801_583_771_506).abs() < 1e-11);
        assert!((r0(x0) - 0.283_367_625_211_334).abs() < 1e-11);
    }

    #[test]
    fn unstable_modes() {
        let x0 = find_x0().unwrap();
        for (d, h) in [(2, 3.0), (3, 0.5), (2, 7.0)] {
            let m = verify_unstable_mode(d, h).unwrap();
            assert!(m.passed(), "residual {}", m.residual);
            assert!((m.z.re - x0 / h).abs() < 1e-15 && m.z.im == 0.0);
        }
        let m = verify_unstable_mode_along(&[4.0, -1.0, -1.0, -1.0, -1.0], 1.0).unwrap();
        assert!(m.passed());
        assert_eq!(m.theta[0], 1.0);
        assert!(verify_unstable_mode_along(&[1.0, 1.0], 1.0).is_err());
        assert!(verify_unstable_mode(1, 1.0).is_err());
    }

    #[test]
    fn residual_detects_wrong_ratio() {
        let x0 = find_x0().unwrap();
        let theta = [1.0, -1.0];
        let xi: Vec<f64> = theta.iter().map(|t| (r0(x0) + 1e-3) * t).collect();
        assert!(mode_residual(&theta, &xi, Complex64::new(x0 / 3.0, 0.0), 3.0) > 1e-5);
    }

    #[test]
    fn characteristic_functions() {
        let x0 = find_x0().unwrap();
        let h = 2.0;
        assert!(zero_sum_characteristic(h)(Complex64::new(x0 / h, 0.0)).norm() < 1e-10);
        assert!(zero_sum_characteristic(h)(Complex64::new(0.0, 0.0)).norm() < 1e-15);
        // non-zero-sum directions: no roots in the right half plane
        for h in [0.5, 1.0, 3.0, 7.0] {
            let r = SpectralRegion::new((0.0, 6.0 / h), (-6.0 / h, 6.0 / h));
            assert_eq!(count_roots(mean_mode_characteristic(h), &r).unwrap(), 0);
        }
        // the real root of 1 + s = e^{-s}/2 sits near s = -0.315
        let r = SpectralRegion::new((-0.4, -0.2), (-0.1, 0.1));
        assert_eq!(count_roots(mean_mode_characteristic(1.0), &r).unwrap(), 1);
    }
}

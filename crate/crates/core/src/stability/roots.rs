//! Root counting by the argument principle.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Smallest `|f|` tolerated on the contour.
pub const MIN_MODULUS: f64 = 1e-9;
const MAX_DEPTH: u32 = 40;

/// Axis-aligned rectangle `[re.0, re.1] x [im.0, im.1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralRegion {
    pub re: (f64, f64),
    pub im: (f64, f64),
    /// Initial samples per edge before adaptive refinement.
    pub samples_per_edge: usize,
}

impl SpectralRegion {
    pub fn new(re: (f64, f64), im: (f64, f64)) -> Self {
        Self {
            re,
            im,
            samples_per_edge: 256,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = |(a, b): (f64, f64)| a.is_finite() && b.is_finite() && a < b;
        if !ok(self.re) || !ok(self.im) {
            return Err(invalid("region bounds must be finite with lo < hi"));
        }
        if self.samples_per_edge == 0 {
            return Err(invalid("samples_per_edge must be positive"));
        }
        Ok(())
    }

    /// Corners in counter-clockwise order.
    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re.0, self.im.0),
            Complex64::new(self.re.1, self.im.0),
            Complex64::new(self.re.1, self.im.1),
            Complex64::new(self.re.0, self.im.1),
        ]
    }

    /// Split at `Re z = cut` into left and right halves.
    pub fn split_re(&self, cut: f64) -> (Self, Self) {
        let mut left = *self;
        let mut right = *self;
        left.re.1 = cut;
        right.re.0 = cut;
        (left, right)
    }

    /// Split at `Im z = cut` into lower and upper halves.
    pub fn split_im(&self, cut: f64) -> (Self, Self) {
        let mut lower = *self;
        let mut upper = *self;
        lower.im.1 = cut;
        upper.im.0 = cut;
        (lower, upper)
    }
}

struct Walker<'a, F> {
    f: &'a F,
    min_modulus: f64,
}

impl<F: Fn(Complex64) -> Complex64> Walker<'_, F> {
    fn eval(&mut self, z: Complex64) -> Result<Complex64> {
        let v = (self.f)(z);
        if !v.is_finite() {
            return Err(Error::Contour(format!("f is not finite at {z}")));
        }
        let m = v.norm();
        self.min_modulus = self.min_modulus.min(m);
        if m <= MIN_MODULUS {
            return Err(Error::Contour(format!("|f| = {m:e} on the contour at {z}")));
        }
        Ok(v)
    }

    fn phase(&mut self, a: Complex64, fa: Complex64, b: Complex64, fb: Complex64, depth: u32) -> Result<f64> {
        let step = (fb / fa).arg();
        if step.abs() < FRAC_PI_2 {
            // a midpoint check guards against a full turn between samples
            let mid = 0.5 * (a + b);
            let fm = self.eval(mid)?;
            let split = (fm / fa).arg() + (fb / fm).arg();
            if (split - step).abs() < 1e-9 {
                return Ok(step);
            }
        }
        if depth == MAX_DEPTH {
            return Err(Error::Contour(format!(
                "phase step {step:.3} between {a} and {b} did not resolve"
            )));
        }
        let mid = 0.5 * (a + b);
        let fm = self.eval(mid)?;
        Ok(self.phase(a, fa, mid, fm, depth + 1)? + self.phase(mid, fm, b, fb, depth + 1)?)
    }
}

/// Number of roots of `f` inside `region`, counted with multiplicity.
///
/// Fails instead of guessing when `|f|` drops to [`MIN_MODULUS`] on the
/// boundary or the phase cannot be resolved into steps below `pi/2`.
pub fn count_roots<F>(f: F, region: &SpectralRegion) -> Result<i64>
where
    F: Fn(Complex64) -> Complex64,
{
    region.validate()?;
    let mut walker = Walker {
        f: &f,
        min_modulus: f64::INFINITY,
    };
    let corners = region.corners();
    let n = region.samples_per_edge;
    let mut total = 0.0;
    for e in 0..4 {
        let (start, end) = (corners[e], corners[(e + 1) % 4]);
        let mut a = start;
        let mut fa = walker.eval(a)?;
        for k in 1..=n {
            let b = start + (end - start) * (k as f64 / n as f64);
            let fb = walker.eval(b)?;
            total += walker.phase(a, fa, b, fb, 0)?;
            a = b;
            fa = fb;
        }
    }
    let winding = total / (2.0 * PI);
    let rounded = winding.round();
    if (winding - rounded).abs() > 1e-6 {
        return Err(Error::Contour(format!("winding number {winding} is not an integer")));
    }
    Ok(rounded as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_roots() {
        let r = SpectralRegion::new((0.0, 2.0), (-1.0, 1.0));
        assert_eq!(count_roots(|z| z - 1.0, &r).unwrap(), 1);
        let r = SpectralRegion::new((-0.5, 0.5), (0.5, 1.5));
        assert_eq!(count_roots(|z| z * z + 1.0, &r).unwrap(), 1);
        let r = SpectralRegion::new((-2.0, 2.0), (-2.0, 2.0));
        assert_eq!(count_roots(|z| z * z + 1.0, &r).unwrap(), 2);
        assert_eq!(count_roots(|z| (z - 0.3).powi(3), &r).unwrap(), 3);
    }

    #[test]
    fn root_on_contour_is_reported() {
        let r = SpectralRegion::new((0.0, 2.0), (-1.0, 1.0));
        assert!(matches!(count_roots(|z| z - 2.0, &r), Err(Error::Contour(_))));
    }

    #[test]
    fn fast_oscillation_is_resolved() {
        // exp(z) - 1 has roots at 2 pi i k
        let r = SpectralRegion::new((-1.0, 1.0), (-20.0, 20.0));
        assert_eq!(count_roots(|z: Complex64| z.exp() - 1.0, &r).unwrap(), 7);
    }

    #[test]
    fn bad_region() {
        let r = SpectralRegion::new((1.0, 0.0), (-1.0, 1.0));
        assert!(count_roots(|z| z, &r).is_err());
    }
}

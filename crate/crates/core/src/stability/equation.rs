//! Textual equation specifications for root counting.
//!
//! - `mean-mode:h=<h>`: `1 + hz - e^{-zh}/2`
//! - `zero-sum-mode:h=<h>`: the zero-sum characteristic function
//! - `poly:c_n,...,c_1,c_0`: real polynomial, highest degree first

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::stability::modes::{mean_mode_characteristic, zero_sum_characteristic};
use crate::stability::roots::SpectralRegion;

pub type Analytic = Box<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// A parsed equation and the region searched by default.
pub struct Equation {
    pub label: String,
    pub f: Analytic,
    pub default_region: SpectralRegion,
}

fn delay_param(rest: &str) -> Result<f64> {
    let h = rest
        .strip_prefix("h=")
        .ok_or_else(|| invalid(format!("expected h=<value>, got {rest:?}")))?
        .parse::<f64>()
        .map_err(|e| invalid(format!("bad h: {e}")))?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid("h must be positive"));
    }
    Ok(h)
}

pub fn parse(spec: &str) -> Result<Equation> {
    let (name, rest) = spec
        .split_once(':')
        .ok_or_else(|| invalid(format!("equation spec {spec:?} needs the form name:params")))?;
    match name {
        "mean-mode" => {
            let h = delay_param(rest)?;
            // any right-half-plane root obeys |1 + hz| <= 1/2, i.e. |z| <= 3/(2h)
            Ok(Equation {
                label: format!("1 + h z - exp(-z h)/2, h = {h}"),
                f: Box::new(mean_mode_characteristic(h)),
                default_region: SpectralRegion::new((0.0, 6.0 / h), (-6.0 / h, 6.0 / h)),
            })
        }
        "zero-sum-mode" => {
            let h = delay_param(rest)?;
            // start just right of the root at z = 0
            Ok(Equation {
                label: format!("zero-sum characteristic, h = {h}"),
                f: Box::new(zero_sum_characteristic(h)),
                default_region: SpectralRegion::new((0.01 / h, 6.0 / h), (-6.0 / h, 6.0 / h)),
            })
        }
        "poly" => {
            let coeffs: Vec<f64> = rest
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| invalid(format!("bad coefficient: {e}")))?;
            if coeffs.is_empty() || coeffs[0] == 0.0 {
                return Err(invalid("leading coefficient must be non-zero"));
            }
            // Cauchy bound on root moduli
            let bound = 1.0 + coeffs[1..].iter().map(|c| (c / coeffs[0]).abs()).fold(0.0, f64::max);
            let r = 2.0 * bound;
            let c2 = coeffs.clone();
            Ok(Equation {
                label: format!("polynomial {coeffs:?}"),
                f: Box::new(move |z| c2.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)),
                default_region: SpectralRegion::new((0.0, r), (-r, r)),
            })
        }
        other => Err(invalid(format!("unknown equation {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stability::roots::count_roots;

    #[test]
    fn parses_and_counts() {
        let e = parse("mean-mode:h=3").unwrap();
        assert_eq!(count_roots(&e.f, &e.default_region).unwrap(), 0);
        let e = parse("zero-sum-mode:h=2").unwrap();
        assert_eq!(count_roots(&e.f, &e.default_region).unwrap(), 1);
        // z^2 - 3z + 2 = (z - 1)(z - 2)
        let e = parse("poly:1,-3,2").unwrap();
        assert_eq!(count_roots(&e.f, &e.default_region).unwrap(), 2);
        let e = parse("poly:1,0,1").unwrap();
        let r = SpectralRegion::new((-0.5, 0.5), (0.5, 1.5));
        assert_eq!(count_roots(&e.f, &r).unwrap(), 1);
    }

    #[test]
    fn rejects_bad_specs() {
        for s in ["mean-mode", "mean-mode:h=-1", "poly:0,1", "poly:a", "cubic:1"] {
            assert!(parse(s).is_err(), "{s}");
        }
    }
}

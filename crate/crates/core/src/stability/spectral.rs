//! Spectral conditions for compliance networks.
//!
//! Linearizing around the static costs gives the matrix
//! `M(z)_ij = D_ij e^{-z tau_{j->i}} / (z + E_i k_i)`; the static solution is
//! locally stable when every eigenvalue of `M(z)` stays below `w/2` in
//! modulus on the closed right half plane.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;
use serde::Serialize;

use crate::compliance::{ComplianceNetwork, RingSpec};
use crate::error::{Error, Result};

/// `M(z)` for `net`.
pub fn compliance_matrix(z: Complex64, net: &ComplianceNetwork) -> Result<DMatrix<Complex64>> {
    let n = net.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let a = &net.activities[i];
        let denom = z + a.sensitivity * a.gain;
        if denom.norm() < 1e-14 {
            return Err(Error::Singular(format!("M(z) has a pole at z = {z} (activity {i})")));
        }
        for j in 0..n {
            let d = net.coupling[i][j];
            if d != 0.0 {
                m[(i, j)] = d * (-z * net.lag(j, i)).exp() / denom;
            }
        }
    }
    Ok(m)
}

/// Eigenvalues of a square complex matrix.
pub fn eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    if m.iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
        return Ok(vec![Complex64::new(0.0, 0.0); m.nrows()]);
    }
    // scaled to unit size; tighter tolerances can stall the shifted QR iteration
    let scale = m.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let a = m.map(|v| v / scale);
    let n = a.nrows();
    // a fixed unitary similarity breaks the symmetric structure some grid points stall on
    let mut v = DVector::from_fn(n, |i, _| Complex64::new(1.0 + i as f64 * 0.37, 0.1 * i as f64));
    v /= Complex64::from(v.norm());
    let house = DMatrix::<Complex64>::identity(n, n) - (&v * v.adjoint()) * Complex64::from(2.0);
    let rotated = &house * &a * &house;
    for mat in [&a, &rotated] {
        for eps in [1e-12, 1e-10, 1e-8] {
            if let Some(vals) = Schur::try_new(mat.clone(), eps, 10_000).and_then(|s| s.eigenvalues()) {
                return Ok(vals.iter().map(|l| l * scale).collect());
            }
        }
    }
    Err(Error::Numerical("Schur iteration did not converge".into()))
}

/// Spectral radius of `M(z)`.
pub fn spectral_radius(z: Complex64, net: &ComplianceNetwork) -> Result<f64> {
    Ok(eigenvalues(&compliance_matrix(z, net)?)?
        .iter()
        .map(|l| l.norm())
        .fold(0.0, f64::max))
}

/// Closed-form eigenvalues of `M(z)` on a ring,
/// `D e^{-z tau} / (z + delta) * 2 cos(2 pi a / n)`.
pub fn ring_eigenvalues(spec: &RingSpec, z: Complex64) -> Vec<Complex64> {
    let factor = spec.coupling * (-z * spec.tau).exp() / (z + spec.delta);
    (0..spec.n)
        .map(|a| factor * 2.0 * (2.0 * std::f64::consts::PI * a as f64 / spec.n as f64).cos())
        .collect()
}

/// Rectangular sample of the right half plane `[0, re_max] x [-im_max, im_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplingGrid {
    pub re_max: f64,
    pub im_max: f64,
    pub re_points: usize,
    pub im_points: usize,
}

impl SamplingGrid {
    /// `re_max = 10 max(E k)`, `im_max = 100 / w`.
    pub fn for_network(net: &ComplianceNetwork) -> Self {
        Self {
            re_max: 10.0 * net.max_loop_gain(),
            im_max: 100.0 / net.window,
            re_points: 41,
            im_points: 401,
        }
    }

    pub fn points(&self) -> impl Iterator<Item = Complex64> + '_ {
        let step = |max: f64, n: usize, k: usize| if n > 1 { max * k as f64 / (n - 1) as f64 } else { 0.0 };
        (0..self.re_points).flat_map(move |a| {
            (0..self.im_points).map(move |b| {
                let im = -self.im_max + 2.0 * step(self.im_max, self.im_points, b);
                Complex64::new(step(self.re_max, self.re_points, a), im)
            })
        })
    }
}

/// Closed-form ring condition `D < w delta / 4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RingCondition {
    pub coupling: f64,
    pub bound: f64,
    pub pass: bool,
}

pub fn ring_condition(spec: &RingSpec) -> RingCondition {
    let bound = spec.window * spec.delta / 4.0;
    RingCondition {
        coupling: spec.coupling,
        bound,
        pass: spec.coupling < bound,
    }
}

/// Outcome of [`check_sufficient_condition`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SufficientReport {
    pub condition: String,
    pub threshold: f64,
    pub max_modulus: f64,
    /// `threshold - max_modulus`.
    pub margin: f64,
    /// Point of largest spectral radius, `[re, im]`.
    pub worst_point: [f64; 2],
    /// First sampled point violating the condition.
    pub witness: Option<[f64; 2]>,
    pub skipped_poles: Vec<[f64; 2]>,
    pub points: usize,
    pub grid: SamplingGrid,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ring: Option<RingCondition>,
    pub pass: bool,
}

/// Sample `max |lambda(M(z))| < w/2` over `grid`.
pub fn check_sufficient_condition(net: &ComplianceNetwork, grid: &SamplingGrid) -> Result<SufficientReport> {
    net.validate()?;
    let threshold = net.window / 2.0;
    let mut report = SufficientReport {
        condition: "max |eig M(z)| < w/2 for Re z >= 0".into(),
        threshold,
        max_modulus: 0.0,
        margin: threshold,
        worst_point: [0.0, 0.0],
        witness: None,
        skipped_poles: Vec::new(),
        points: 0,
        grid: *grid,
        ring: None,
        pass: true,
    };
    for z in grid.points() {
        let radius = match spectral_radius(z, net) {
            Ok(r) => r,
            Err(Error::Singular(_)) => {
                report.skipped_poles.push([z.re, z.im]);
                continue;
            }
            Err(e) => return Err(e),
        };
        report.points += 1;
        if radius > report.max_modulus {
            report.max_modulus = radius;
            report.worst_point = [z.re, z.im];
        }
        if radius >= threshold && report.witness.is_none() {
            report.witness = Some([z.re, z.im]);
        }
    }
    report.margin = threshold - report.max_modulus;
    report.pass = report.witness.is_none();
    Ok(report)
}

/// Sampled check on the ring network plus the closed-form condition.
pub fn check_ring(spec: &RingSpec, grid: Option<SamplingGrid>) -> Result<SufficientReport> {
    let net = ComplianceNetwork::ring(spec)?;
    let grid = grid.unwrap_or_else(|| SamplingGrid::for_network(&net));
    let mut report = check_sufficient_condition(&net, &grid)?;
    let ring = ring_condition(spec);
    report.pass = report.pass && ring.pass;
    report.ring = Some(ring);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compliance::Activity;

    fn decoupled(n: usize) -> ComplianceNetwork {
        ComplianceNetwork::new(
            vec![Activity::new(0.5, 0.2, 1.0, 1.0); n],
            vec![vec![0.0; n]; n],
            vec![vec![0.0; n]; n],
            5.0,
        )
        .unwrap()
    }

    #[test]
    fn decoupled_matrix_is_zero() {
        let net = decoupled(3);
        let m = compliance_matrix(Complex64::new(0.0, 0.0), &net).unwrap();
        assert!(m.iter().all(|v| v.norm() == 0.0));
        assert!(eigenvalues(&m).unwrap().iter().all(|v| v.norm() == 0.0));
        let report = check_sufficient_condition(&net, &SamplingGrid::for_network(&net)).unwrap();
        assert!(report.pass);
        assert_eq!(report.max_modulus, 0.0);
    }

    #[test]
    fn pole_is_reported() {
        let net = decoupled(2);
        assert!(matches!(
            compliance_matrix(Complex64::new(-1.0, 0.0), &net),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn ring_eigenvalues_match_closed_form() {
        let spec = RingSpec::new(8, 1.0, 5.0, 1.0, 0.1);
        let net = ComplianceNetwork::ring(&spec).unwrap();
        for z in [
            Complex64::new(0.0, 0.0),
            Complex64::new(0.3, 2.0),
            Complex64::new(4.0, -7.5),
        ] {
            let mut numeric = eigenvalues(&compliance_matrix(z, &net).unwrap()).unwrap();
            let mut exact = ring_eigenvalues(&spec, z);
            let key = |v: &Complex64| (v.re * 1e6).round() as i64 * 1_000_000_000 + (v.im * 1e6).round() as i64;
            numeric.sort_by_key(key);
            exact.sort_by_key(key);
            for (a, b) in numeric.iter().zip(&exact) {
                assert!((a - b).norm() < 1e-10, "{a} vs {b}");
            }
            if z.im == 0.0 {
                let bound = 2.0 * spec.coupling / spec.delta;
                assert!(exact.iter().all(|v| v.norm() <= bound + 1e-15));
            }
        }
    }

    #[test]
    fn ring_conditions() {
        let ok = check_ring(&RingSpec::new(8, 1.0, 5.0, 1.0, 0.1), None).unwrap();
        assert!(ok.pass && ok.ring.unwrap().pass);
        assert!((ok.max_modulus - 0.2).abs() < 1e-10);
        let bad = RingSpec::new(8, 1.0, 5.0, 1.0, 2.0);
        assert!(!ring_condition(&bad).pass);
        let report = check_ring(&bad, None).unwrap();
        assert!(!report.pass && report.witness.is_some());
    }
}

//! Fluid limit of the tip dynamics as a system of delay differential
//! equations.
//!
//! With `p_i = l_i^2 / sum_j l_j^2` and `u_i = 2 x_i l_i / sum_j l_j^2`:
//!
//! ```text
//! dx_i/dt = a(t-h) p_i(t-h) - a(t) u_i(t)
//! dl_i/dt = a(t-h) p_i(t-h) - a(t-h) u_i(t-h)
//! w_i(t)  = l_i(t) - x_i(t) = integral_{t-h}^{t} a(s) u_i(s) ds
//! ```
//!
//! The first two equations conserve `w_i - integral(a u_i)`; the third pins
//! that constant to zero. An arbitrary initial history on `[0, h]` generally
//! violates it, so by default the integrator starts from the consistent value
//! `l_i(h) = x_i(h) + integral_0^h a u_i` (see [`FluidConfig::consistent_start`]).

use std::io::Write;

use log::warn;

use crate::error::{invalid, Error, Result};

/// Tip counts below this are treated as an extinct type.
pub const EXTINCTION_FLOOR: f64 = 1e-12;

/// Rescaled free tips `x` and tips `l` for every type at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidPoint {
    pub x: Vec<f64>,
    pub l: Vec<f64>,
}

impl FluidPoint {
    pub fn new(x: Vec<f64>, l: Vec<f64>) -> Self {
        Self { x, l }
    }

    pub fn types(&self) -> usize {
        self.l.len()
    }

    pub fn w(&self) -> Vec<f64> {
        self.l.iter().zip(&self.x).map(|(l, x)| l - x).collect()
    }
}

fn sum_sq(l: &[f64]) -> f64 {
    l.iter().filter(|&&v| v >= EXTINCTION_FLOOR).map(|v| v * v).sum()
}

/// Fluid type-selection probabilities `p_i`.
pub fn selection_probabilities(l: &[f64]) -> Result<Vec<f64>> {
    let s = sum_sq(l);
    if s <= 0.0 {
        return Err(Error::Singular("every l_i is zero".into()));
    }
    Ok(l.iter()
        .map(|&v| if v >= EXTINCTION_FLOOR { v * v / s } else { 0.0 })
        .collect())
}

/// Fluid free-tip consumption rates `u_i`.
pub fn tip_consumption(x: &[f64], l: &[f64]) -> Result<Vec<f64>> {
    let s = sum_sq(l);
    if s <= 0.0 {
        return Err(Error::Singular("every l_i is zero".into()));
    }
    Ok(x.iter()
        .zip(l)
        .map(|(&xi, &li)| if li >= EXTINCTION_FLOOR { 2.0 * xi * li / s } else { 0.0 })
        .collect())
}

/// Time derivatives of `x` and `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivatives {
    pub dx: Vec<f64>,
    pub dl: Vec<f64>,
}

/// Right-hand side given the state now, the state one delay ago, and the
/// arrival rate at both instants.
pub fn rhs(now: &FluidPoint, delayed: &FluidPoint, a_now: f64, a_delayed: f64) -> Result<Derivatives> {
    let u_now = tip_consumption(&now.x, &now.l)?;
    let p_del = selection_probabilities(&delayed.l)?;
    let u_del = tip_consumption(&delayed.x, &delayed.l)?;
    let dx = (0..now.types())
        .map(|i| a_delayed * p_del[i] - a_now * u_now[i])
        .collect();
    let dl = (0..now.types())
        .map(|i| a_delayed * (p_del[i] - u_del[i]))
        .collect();
    Ok(Derivatives { dx, dl })
}

/// Time-independent solution supported on a set of types.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticSolution {
    pub support: Vec<usize>,
    pub l: Vec<f64>,
    pub x: Vec<f64>,
    pub w: Vec<f64>,
}

impl StaticSolution {
    pub fn point(&self) -> FluidPoint {
        FluidPoint::new(self.x.clone(), self.l.clone())
    }
}

/// Static solution for unit arrival rate: `l_i = 2h/k`, `x_i = w_i = h/k`
/// on the `k` types of `support`, zero elsewhere.
pub fn static_solution(types: usize, h: f64, support: &[usize]) -> Result<StaticSolution> {
    if support.is_empty() {
        return Err(invalid("support set must be non-empty"));
    }
    if !(h > 0.0) {
        return Err(invalid("delay h must be positive"));
    }
    let mut s: Vec<usize> = support.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.last().is_some_and(|&i| i >= types) {
        return Err(invalid("support index out of range"));
    }
    let k = s.len() as f64;
    let mut l = vec![0.0; types];
    let mut x = vec![0.0; types];
    for &i in &s {
        l[i] = 2.0 * h / k;
        x[i] = h / k;
    }
    let w = x.clone();
    Ok(StaticSolution { support: s, l, x, w })
}

/// Integration settings.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidConfig {
    pub types: usize,
    pub h: f64,
    /// Requested step; the integrator uses `h / ceil(h / step)` so that the
    /// delay is a whole number of steps. Must be at most `h / 100`.
    pub step: f64,
    pub horizon: f64,
    /// Start from `l_i(h) = x_i(h) + integral_0^h a u_i` instead of the
    /// history value at `h`.
    pub consistent_start: bool,
}

impl FluidConfig {
    pub fn new(types: usize, h: f64, horizon: f64) -> Self {
        Self {
            types,
            h,
            step: h / 200.0,
            horizon,
            consistent_start: true,
        }
    }

    fn steps_per_delay(&self) -> Result<usize> {
        if self.types < 1 {
            return Err(invalid("type count must be at least 1"));
        }
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(invalid("delay h must be positive"));
        }
        if !(self.step > 0.0 && self.step <= self.h / 100.0 * (1.0 + 1e-12)) {
            return Err(invalid(format!("step {} must be in (0, h/100]", self.step)));
        }
        if !(self.horizon > self.h) {
            return Err(invalid("horizon must exceed h"));
        }
        Ok((self.h / self.step - 1e-9).ceil() as usize)
    }
}

/// Sampled solution on `[0, horizon]`; samples before `h` are the history.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidTrajectory {
    pub h: f64,
    pub dt: f64,
    pub times: Vec<f64>,
    pub points: Vec<FluidPoint>,
    /// Index of the first integrated sample (time `h`).
    pub start: usize,
}

impl FluidTrajectory {
    pub fn last(&self) -> &FluidPoint {
        self.points.last().expect("non-empty trajectory")
    }

    /// Sample index closest to `t`.
    pub fn index_at(&self, t: f64) -> usize {
        let k = (t / self.dt).round().max(0.0) as usize;
        k.min(self.times.len() - 1)
    }

    pub fn at(&self, t: f64) -> &FluidPoint {
        &self.points[self.index_at(t)]
    }

    /// Rows `t,x_1,l_1,w_1,...`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let d = self.points.first().map_or(0, FluidPoint::types);
        let mut header = String::from("t");
        for i in 1..=d {
            header.push_str(&format!(",x_{i},l_{i},w_{i}"));
        }
        writeln!(out, "{header}")?;
        for (t, p) in self.times.iter().zip(&self.points) {
            let mut row = format!("{t}");
            for i in 0..d {
                row.push_str(&format!(",{},{},{}", p.x[i], p.l[i], p.l[i] - p.x[i]));
            }
            writeln!(out, "{row}")?;
        }
        Ok(())
    }
}

/// A history that is constant and equal to `point` on `[0, h]`.
pub fn constant_history(point: FluidPoint) -> impl Fn(f64) -> FluidPoint {
    move |_| point.clone()
}

fn axpy(base: &FluidPoint, k: &Derivatives, scale: f64) -> FluidPoint {
    FluidPoint {
        x: base.x.iter().zip(&k.dx).map(|(v, d)| v + scale * d).collect(),
        l: base.l.iter().zip(&k.dl).map(|(v, d)| v + scale * d).collect(),
    }
}

/// Four-point Lagrange value halfway between nodes `k` and `k + 1`, using
/// only nodes in `lo..=hi`.
fn midpoint(nodes: &[FluidPoint], k: usize, lo: usize, hi: usize) -> FluidPoint {
    let (idx, wts): ([usize; 4], [f64; 4]) = if k > lo && k + 2 <= hi {
        ([k - 1, k, k + 1, k + 2], [-0.0625, 0.5625, 0.5625, -0.0625])
    } else if k == lo {
        ([k, k + 1, k + 2, k + 3], [0.3125, 0.9375, -0.3125, 0.0625])
    } else {
        ([k - 2, k - 1, k, k + 1], [0.0625, -0.3125, 0.9375, 0.3125])
    };
    let d = nodes[k].types();
    let comb = |f: fn(&FluidPoint) -> &Vec<f64>| -> Vec<f64> {
        (0..d)
            .map(|i| idx.iter().zip(&wts).map(|(&j, w)| w * f(&nodes[j])[i]).sum())
            .collect()
    };
    FluidPoint {
        x: comb(|p| &p.x),
        l: comb(|p| &p.l),
    }
}

/// Integrate from the initial history on `[0, h]` to `cfg.horizon` with the
/// classical fourth-order Runge-Kutta scheme (method of steps).
///
/// Delayed values come from the history function while `t - h < h` and from
/// the stored solution afterwards, using cubic interpolation at half steps.
pub fn integrate<H, A>(cfg: &FluidConfig, history: H, a: A) -> Result<FluidTrajectory>
where
    H: Fn(f64) -> FluidPoint,
    A: Fn(f64) -> f64,
{
    let m = cfg.steps_per_delay()?;
    let h = cfg.h;
    let dt = h / m as f64;
    let d = cfg.types;
    let total = ((cfg.horizon - h) / dt - 1e-9).ceil() as usize;
    let tolerance = 10.0 * dt;

    let hist = |s: f64| -> Result<FluidPoint> {
        let p = history(s);
        if p.types() != d || p.x.len() != d {
            return Err(invalid("history dimension does not match type count"));
        }
        Ok(p)
    };

    let mut times = Vec::with_capacity(m + total + 1);
    let mut points = Vec::with_capacity(m + total + 1);
    for k in 0..m {
        let t = k as f64 * dt;
        times.push(t);
        points.push(hist(t)?);
    }

    let mut start = hist(h)?;
    if cfg.consistent_start {
        // composite Simpson with half-step nodes
        let mut integral = vec![0.0; d];
        for k in 0..m {
            let t0 = k as f64 * dt;
            for (s, wt) in [(t0, 1.0), (t0 + 0.5 * dt, 4.0), (t0 + dt, 1.0)] {
                let p = hist(s)?;
                let u = tip_consumption(&p.x, &p.l)?;
                for i in 0..d {
                    integral[i] += wt * dt / 6.0 * a(s) * u[i];
                }
            }
        }
        for i in 0..d {
            start.l[i] = start.x[i] + integral[i];
        }
    }
    let mut extinct: Vec<bool> = start.l.iter().map(|&v| v < EXTINCTION_FLOOR).collect();
    for i in 0..d {
        if extinct[i] {
            start.l[i] = 0.0;
            start.x[i] = 0.0;
        }
    }

    let mut solution: Vec<FluidPoint> = Vec::with_capacity(total + 1);
    solution.push(start);

    for n in 0..total {
        let t = h + n as f64 * dt;
        let s = t - h;
        let (d0, dm, d1) = if n < m {
            (hist(s)?, hist(s + 0.5 * dt)?, hist(s + dt)?)
        } else {
            let j = n - m;
            // the solution is smooth only between multiples of h
            let lo = j / m * m;
            let hi = (lo + m).min(n);
            (solution[j].clone(), midpoint(&solution, j, lo, hi), solution[j + 1].clone())
        };
        let y = &solution[n];
        let freeze = |mut k: Derivatives| {
            for i in 0..d {
                if extinct[i] {
                    k.dx[i] = 0.0;
                    k.dl[i] = 0.0;
                }
            }
            k
        };
        let k1 = freeze(rhs(y, &d0, a(t), a(s))?);
        let k2 = freeze(rhs(&axpy(y, &k1, 0.5 * dt), &dm, a(t + 0.5 * dt), a(s + 0.5 * dt))?);
        let k3 = freeze(rhs(&axpy(y, &k2, 0.5 * dt), &dm, a(t + 0.5 * dt), a(s + 0.5 * dt))?);
        let k4 = freeze(rhs(&axpy(y, &k3, dt), &d1, a(t + dt), a(s + dt))?);
        let mut next = y.clone();
        for i in 0..d {
            next.x[i] += dt / 6.0 * (k1.dx[i] + 2.0 * k2.dx[i] + 2.0 * k3.dx[i] + k4.dx[i]);
            next.l[i] += dt / 6.0 * (k1.dl[i] + 2.0 * k2.dl[i] + 2.0 * k3.dl[i] + k4.dl[i]);
        }
        for i in 0..d {
            for (name, v) in [("l", &mut next.l[i]), ("x", &mut next.x[i])] {
                if *v < -tolerance {
                    return Err(Error::Numerical(format!(
                        "{name}_{} = {} at t = {}",
                        i + 1,
                        *v,
                        t + dt
                    )));
                }
                if *v < 0.0 {
                    warn!("clamping {name}_{} = {:e} to 0 at t = {}", i + 1, *v, t + dt);
                    *v = 0.0;
                }
            }
            if !extinct[i] && next.l[i] < EXTINCTION_FLOOR {
                extinct[i] = true;
                next.l[i] = 0.0;
                next.x[i] = 0.0;
            }
        }
        solution.push(next);
    }

    for (j, p) in solution.into_iter().enumerate() {
        times.push(h + j as f64 * dt);
        points.push(p);
    }
    Ok(FluidTrajectory {
        h,
        dt,
        times,
        points,
        start: m,
    })
}

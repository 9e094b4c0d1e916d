//! Networks of activities whose compliance levels are steered by
//! per-activity deposit costs.
//!
//! Activity `i` has compliance
//! `Q_i(t) = clamp(b_i + sum_j D_ij Qbar_j(t - tau_{j->i}) + E_i C_i(t), 0, 1)`
//! where `Qbar_j` is the average of `Q_j` over the trailing window `w`, and a
//! cost that follows `dC_i/dt = k_i (Q_i^T - Q_i(t))`, kept non-negative.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// One controlled activity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Activity {
    /// Target compliance `Q^T`.
    pub target: f64,
    /// Baseline compliance `b` at zero cost and zero coupling.
    #[serde(default)]
    pub baseline: f64,
    /// Cost sensitivity `E > 0`.
    pub sensitivity: f64,
    /// Controller gain `k = g'(0) > 0`.
    pub gain: f64,
}

impl Activity {
    pub fn new(target: f64, baseline: f64, sensitivity: f64, gain: f64) -> Self {
        Self {
            target,
            baseline,
            sensitivity,
            gain,
        }
    }

    fn validate(&self, i: usize) -> Result<()> {
        if !(0.0..=1.0).contains(&self.target) {
            return Err(invalid(format!("activity {i}: target must lie in [0, 1]")));
        }
        if !(self.sensitivity > 0.0) {
            return Err(invalid(format!("activity {i}: sensitivity must be positive")));
        }
        if !(self.gain > 0.0) {
            return Err(invalid(format!("activity {i}: gain must be positive")));
        }
        if !self.baseline.is_finite() {
            return Err(invalid(format!("activity {i}: baseline must be finite")));
        }
        Ok(())
    }
}

/// Activities, coupling matrix, lags and averaging window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplianceNetwork {
    pub activities: Vec<Activity>,
    /// `coupling[i][j] = D_ij`, the influence of activity `j` on `i`.
    pub coupling: Vec<Vec<f64>>,
    /// `lags[i][j] = tau_{i->j}`, zero on the diagonal.
    pub lags: Vec<Vec<f64>>,
    /// Averaging window `w`.
    pub window: f64,
}

/// Parameters of the symmetric ring used throughout the examples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingSpec {
    pub n: usize,
    /// Lag between neighbours.
    pub tau: f64,
    pub window: f64,
    /// `delta = E k`; the ring uses `E = 1`, `k = delta`.
    pub delta: f64,
    /// Coupling `D` to each neighbour.
    pub coupling: f64,
    #[serde(default = "RingSpec::default_target")]
    pub target: f64,
    #[serde(default = "RingSpec::default_baseline")]
    pub baseline: f64,
}

impl RingSpec {
    fn default_target() -> f64 {
        0.5
    }

    fn default_baseline() -> f64 {
        0.2
    }

    pub fn new(n: usize, tau: f64, window: f64, delta: f64, coupling: f64) -> Self {
        Self {
            n,
            tau,
            window,
            delta,
            coupling,
            target: Self::default_target(),
            baseline: Self::default_baseline(),
        }
    }
}

impl ComplianceNetwork {
    pub fn new(
        activities: Vec<Activity>,
        coupling: Vec<Vec<f64>>,
        lags: Vec<Vec<f64>>,
        window: f64,
    ) -> Result<Self> {
        let net = Self {
            activities,
            coupling,
            lags,
            window,
        };
        net.validate()?;
        Ok(net)
    }

    /// Ring where each activity couples to its two neighbours with weight
    /// `D` and lag `tau`; lags to other activities grow with hop distance.
    pub fn ring(spec: &RingSpec) -> Result<Self> {
        let n = spec.n;
        if n < 3 {
            return Err(invalid("a ring needs at least 3 activities"));
        }
        let activities = vec![Activity::new(spec.target, spec.baseline, 1.0, spec.delta); n];
        let mut coupling = vec![vec![0.0; n]; n];
        let mut lags = vec![vec![0.0; n]; n];
        for i in 0..n {
            coupling[i][(i + 1) % n] = spec.coupling;
            coupling[i][(i + n - 1) % n] = spec.coupling;
            for j in 0..n {
                let hops = (i + n - j) % n;
                lags[i][j] = spec.tau * hops.min(n - hops) as f64;
            }
        }
        Self::new(activities, coupling, lags, spec.window)
    }

    pub fn len(&self) -> usize {
        self.activities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.activities.is_empty()
    }

    /// `tau_{from->to}`.
    pub fn lag(&self, from: usize, to: usize) -> f64 {
        self.lags[from][to]
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        if n == 0 {
            return Err(invalid("network has no activities"));
        }
        for (i, a) in self.activities.iter().enumerate() {
            a.validate(i)?;
        }
        if self.coupling.len() != n || self.coupling.iter().any(|r| r.len() != n) {
            return Err(invalid("coupling matrix must be n x n"));
        }
        if self.coupling.iter().flatten().any(|v| !v.is_finite()) {
            return Err(invalid("coupling entries must be finite"));
        }
        if self.lags.len() != n || self.lags.iter().any(|r| r.len() != n) {
            return Err(invalid("lag matrix must be n x n"));
        }
        for i in 0..n {
            if self.lags[i][i] != 0.0 {
                return Err(invalid(format!("lag {i}->{i} must be zero")));
            }
            if self.lags[i].iter().any(|&t| !(t >= 0.0 && t.is_finite())) {
                return Err(invalid("lags must be finite and non-negative"));
            }
        }
        if !(self.window > 0.0 && self.window.is_finite()) {
            return Err(invalid("window must be positive"));
        }
        Ok(())
    }

    /// Smallest positive lag, if any.
    pub fn min_positive_lag(&self) -> Option<f64> {
        self.lags
            .iter()
            .flatten()
            .copied()
            .filter(|&t| t > 0.0)
            .min_by(f64::total_cmp)
    }

    pub fn max_lag(&self) -> f64 {
        self.lags.iter().flatten().copied().fold(0.0, f64::max)
    }

    /// Largest `E_i k_i`.
    pub fn max_loop_gain(&self) -> f64 {
        self.activities
            .iter()
            .map(|a| a.sensitivity * a.gain)
            .fold(0.0, f64::max)
    }

    /// Unclamped argument of `f_i`.
    pub fn drive(&self, i: usize, delayed: &[f64], cost: f64) -> f64 {
        let a = &self.activities[i];
        let coupled: f64 = self.coupling[i].iter().zip(delayed).map(|(d, q)| d * q).sum();
        a.baseline + coupled + a.sensitivity * cost
    }

    /// Compliance of activity `i` given the delayed window averages seen by
    /// `i` and its cost.
    pub fn compliance(&self, i: usize, delayed: &[f64], cost: f64) -> f64 {
        self.drive(i, delayed, cost).clamp(0.0, 1.0)
    }

    /// Costs `C^T` that hold every activity at its target.
    pub fn static_solution(&self) -> Result<Vec<f64>> {
        let targets: Vec<f64> = self.activities.iter().map(|a| a.target).collect();
        let costs: Vec<f64> = self
            .activities
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let coupled: f64 = self.coupling[i].iter().zip(&targets).map(|(d, q)| d * q).sum();
                (a.target - a.baseline - coupled) / a.sensitivity
            })
            .collect();
        let offending: Vec<usize> = (0..self.len())
            .filter(|&i| costs[i] < 0.0 || !(targets[i] > 0.0 && targets[i] < 1.0))
            .collect();
        if offending.is_empty() {
            Ok(costs)
        } else {
            Err(Error::Infeasible {
                activities: offending,
                costs,
            })
        }
    }
}

/// Explicit Euler step of the linear cost controller, clamped at zero.
pub fn cost_step(activity: &Activity, q: f64, cost: f64, dt: f64) -> f64 {
    (cost + dt * activity.gain * (activity.target - q)).max(0.0)
}

/// Average of the piecewise-linear interpolant of `(times, values)` over
/// `[t - w, t]`. Before the first sample the first value is extended
/// backwards; `t` must not exceed the last sample time.
pub fn windowed_average(times: &[f64], values: &[f64], t: f64, w: f64) -> Result<f64> {
    if times.is_empty() || times.len() != values.len() {
        return Err(invalid("history must be non-empty with matching lengths"));
    }
    if !(w > 0.0) {
        return Err(invalid("window must be positive"));
    }
    let last = *times.last().unwrap();
    if t > last + 1e-12 {
        return Err(invalid(format!("history ends at {last}, before {t}")));
    }
    let value_at = |s: f64| -> f64 {
        let k = times.partition_point(|&x| x <= s);
        if k == 0 {
            return values[0];
        }
        if k == times.len() {
            return values[k - 1];
        }
        let (t0, t1) = (times[k - 1], times[k]);
        values[k - 1] + (values[k] - values[k - 1]) * (s - t0) / (t1 - t0)
    };
    let (a, b) = (t - w, t);
    let mut knots = vec![a];
    knots.extend(times.iter().copied().filter(|&x| x > a && x < b));
    knots.push(b);
    let integral: f64 = knots
        .windows(2)
        .map(|p| 0.5 * (p[1] - p[0]) * (value_at(p[0]) + value_at(p[1])))
        .sum();
    Ok(integral / w)
}

/// Initial condition for [`simulate`]: compliance held constant on
/// `(-inf, 0]` and the costs at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialState {
    pub compliance: Vec<f64>,
    pub costs: Vec<f64>,
}

impl InitialState {
    /// The static solution with each compliance shifted by `offsets`.
    pub fn perturbed(net: &ComplianceNetwork, offsets: &[f64]) -> Result<Self> {
        let costs = net.static_solution()?;
        let compliance = net
            .activities
            .iter()
            .zip(offsets)
            .map(|(a, d)| (a.target + d).clamp(0.0, 1.0))
            .collect();
        Ok(Self { compliance, costs })
    }
}

/// Sampled closed-loop trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplianceTrajectory {
    pub dt: f64,
    pub times: Vec<f64>,
    pub compliance: Vec<Vec<f64>>,
    pub costs: Vec<Vec<f64>>,
    pub averages: Vec<Vec<f64>>,
}

impl ComplianceTrajectory {
    /// Largest `|Q_i - Q_i^T|` at sample `k`.
    pub fn max_deviation(&self, net: &ComplianceNetwork, k: usize) -> f64 {
        self.compliance[k]
            .iter()
            .zip(&net.activities)
            .map(|(q, a)| (q - a.target).abs())
            .fold(0.0, f64::max)
    }

    pub fn index_at(&self, t: f64) -> usize {
        ((t / self.dt).round() as usize).min(self.times.len() - 1)
    }

    /// Rows `t,Q_1..Q_n,C_1..C_n,Qbar_1..Qbar_n`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let n = self.compliance.first().map_or(0, Vec::len);
        let mut header = vec!["t".to_string()];
        for prefix in ["Q", "C", "Qbar"] {
            header.extend((1..=n).map(|i| format!("{prefix}_{i}")));
        }
        writeln!(out, "{}", header.join(","))?;
        for k in 0..self.times.len() {
            let mut row = vec![self.times[k].to_string()];
            for group in [&self.compliance, &self.costs, &self.averages] {
                row.extend(group[k].iter().map(f64::to_string));
            }
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Closed-loop integration on a fixed grid.
///
/// The step is shrunk so the window is a whole number of steps and must be
/// at most `min(w, smallest positive lag) / 50`. Window averages use
/// trapezoidal prefix sums; delayed averages are linearly interpolated, and
/// lags shorter than one step read the average one step back.
pub fn simulate(
    net: &ComplianceNetwork,
    init: &InitialState,
    horizon: f64,
    step: f64,
) -> Result<ComplianceTrajectory> {
    net.validate()?;
    let n = net.len();
    if init.compliance.len() != n || init.costs.len() != n {
        return Err(invalid("initial state dimension does not match network"));
    }
    let limit = net.min_positive_lag().map_or(net.window, |t| t.min(net.window)) / 50.0;
    if !(step > 0.0 && step <= limit * (1.0 + 1e-12)) {
        return Err(invalid(format!("step {step} must be in (0, {limit}]")));
    }
    if !(horizon > 0.0) {
        return Err(invalid("horizon must be positive"));
    }
    let nw = (net.window / step - 1e-9).ceil() as usize;
    let dt = net.window / nw as f64;
    let steps = (horizon / dt - 1e-9).ceil() as usize;

    let q0 = init.compliance.clone();
    let mut q = vec![q0.clone()];
    let mut c = vec![init.costs.iter().map(|v| v.max(0.0)).collect::<Vec<_>>()];
    // cumulative trapezoid integral of Q from t = 0
    let mut prefix = vec![vec![0.0; n]];
    let mut avg = vec![q0.clone()];

    let prefix_at = |prefix: &[Vec<f64>], k: isize, j: usize| -> f64 {
        if k >= 0 {
            prefix[k as usize][j]
        } else {
            k as f64 * dt * q0[j]
        }
    };
    let avg_at = |avg: &[Vec<f64>], s: f64, j: usize| -> f64 {
        if s <= 0.0 {
            return q0[j];
        }
        let x = s / dt;
        let k = x.floor() as usize;
        let frac = x - k as f64;
        if k + 1 >= avg.len() {
            return avg[avg.len() - 1][j];
        }
        avg[k][j] * (1.0 - frac) + avg[k + 1][j] * frac
    };

    for k in 0..steps {
        let t_next = (k + 1) as f64 * dt;
        let next_c: Vec<f64> = (0..n)
            .map(|i| cost_step(&net.activities[i], q[k][i], c[k][i], dt))
            .collect();
        let next_q: Vec<f64> = (0..n)
            .map(|i| {
                let delayed: Vec<f64> = (0..n)
                    .map(|j| avg_at(&avg, t_next - net.lag(j, i).max(dt), j))
                    .collect();
                net.compliance(i, &delayed, next_c[i])
            })
            .collect();
        let next_prefix: Vec<f64> = (0..n)
            .map(|j| prefix[k][j] + 0.5 * dt * (q[k][j] + next_q[j]))
            .collect();
        prefix.push(next_prefix);
        let kk = (k + 1) as isize;
        let next_avg: Vec<f64> = (0..n)
            .map(|j| (prefix_at(&prefix, kk, j) - prefix_at(&prefix, kk - nw as isize, j)) / net.window)
            .collect();
        avg.push(next_avg);
        q.push(next_q);
        c.push(next_c);
    }
    let times = (0..=steps).map(|k| k as f64 * dt).collect();
    Ok(ComplianceTrajectory {
        dt,
        times,
        compliance: q,
        costs: c,
        averages: avg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn single(target: f64, baseline: f64, e: f64) -> ComplianceNetwork {
        ComplianceNetwork::new(
            vec![Activity::new(target, baseline, e, 0.5)],
            vec![vec![0.0]],
            vec![vec![0.0]],
            2.0,
        )
        .unwrap()
    }

    #[test]
    fn window_averages() {
        let times: Vec<f64> = (0..=40).map(|k| k as f64 * 0.25).collect();
        let flat = vec![0.7; times.len()];
        assert_abs_diff_eq!(windowed_average(&times, &flat, 10.0, 4.0).unwrap(), 0.7, epsilon = 1e-15);
        let ramp: Vec<f64> = times.clone();
        assert_abs_diff_eq!(windowed_average(&times, &ramp, 4.0, 4.0).unwrap(), 2.0, epsilon = 1e-12);
        // square wave with period 2 sampled finely
        let fine: Vec<f64> = (0..=4000).map(|k| k as f64 * 0.001).collect();
        let square: Vec<f64> = fine.iter().map(|t| if t % 2.0 < 1.0 { 1.0 } else { 0.0 }).collect();
        assert_abs_diff_eq!(windowed_average(&fine, &square, 4.0, 2.0).unwrap(), 0.5, epsilon = 1e-3);
        // constant backwards extension
        assert_abs_diff_eq!(windowed_average(&times, &ramp, 1.0, 2.0).unwrap(), 0.25, epsilon = 1e-12);
        assert!(windowed_average(&times, &ramp, 11.0, 2.0).is_err());
    }

    #[test]
    fn compliance_function() {
        let net = single(0.95, 0.0, 0.6);
        assert_abs_diff_eq!(net.compliance(0, &[0.0], 1.0), 0.6);
        assert_eq!(net.compliance(0, &[0.0], 5.0), 1.0);
        let (c, eps) = (0.5, 1e-6);
        let fd = (net.compliance(0, &[0.0], c + eps) - net.compliance(0, &[0.0], c)) / eps;
        assert!(((fd - 0.6) / 0.6).abs() < 1e-4);
    }

    #[test]
    fn cost_controller() {
        let a = Activity::new(0.9, 0.0, 1.0, 2.0);
        assert_eq!(cost_step(&a, 0.9, 1.3, 0.1), 1.3);
        assert!(cost_step(&a, 0.5, 1.3, 0.1) > 1.3);
        assert_eq!(cost_step(&a, 1.0, 0.0, 0.1), 0.0);
    }

    #[test]
    fn static_costs() {
        let c = single(0.95, 0.0, 0.6).static_solution().unwrap();
        assert_abs_diff_eq!(c[0], 0.95 / 0.6, epsilon = 1e-15);

        let a = Activity::new(0.9, 0.5, 1.0, 1.0);
        let net = ComplianceNetwork::new(
            vec![a.clone(), a],
            vec![vec![0.0, 0.1], vec![0.1, 0.0]],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            5.0,
        )
        .unwrap();
        for c in net.static_solution().unwrap() {
            assert_abs_diff_eq!(c, 0.31, epsilon = 1e-12);
        }

        match single(0.2, 0.5, 1.0).static_solution() {
            Err(Error::Infeasible { activities, costs }) => {
                assert_eq!(activities, vec![0]);
                assert_abs_diff_eq!(costs[0], -0.3, epsilon = 1e-12);
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn validation() {
        let a = Activity::new(0.5, 0.0, 1.0, 1.0);
        assert!(ComplianceNetwork::new(vec![a.clone()], vec![vec![0.0]], vec![vec![1.0]], 1.0).is_err());
        assert!(ComplianceNetwork::new(vec![a.clone()], vec![vec![0.0]], vec![vec![0.0]], 0.0).is_err());
        let bad = Activity::new(0.5, 0.0, 0.0, 1.0);
        assert!(ComplianceNetwork::new(vec![bad], vec![vec![0.0]], vec![vec![0.0]], 1.0).is_err());
        assert!(ComplianceNetwork::ring(&RingSpec::new(2, 1.0, 5.0, 1.0, 0.1)).is_err());
    }

    #[test]
    fn ring_layout() {
        let net = ComplianceNetwork::ring(&RingSpec::new(6, 1.0, 5.0, 1.0, 0.1)).unwrap();
        assert_eq!(net.coupling[0], vec![0.0, 0.1, 0.0, 0.0, 0.0, 0.1]);
        assert_eq!(net.lag(0, 3), 3.0);
        assert_eq!(net.lag(5, 0), 1.0);
        assert_eq!(net.min_positive_lag(), Some(1.0));
    }

    #[test]
    fn fixed_point_is_held() {
        let net = ComplianceNetwork::ring(&RingSpec::new(5, 1.0, 5.0, 1.0, 0.1)).unwrap();
        let init = InitialState::perturbed(&net, &[0.0; 5]).unwrap();
        let tr = simulate(&net, &init, 50.0, 0.02).unwrap();
        for k in 0..tr.times.len() {
            assert!(tr.max_deviation(&net, k) < 1e-12);
        }
    }

    #[test]
    fn decoupled_loops_converge_monotonically() {
        let a = Activity::new(0.8, 0.1, 0.5, 0.4);
        let net = ComplianceNetwork::new(
            vec![a.clone(), a],
            vec![vec![0.0; 2]; 2],
            vec![vec![0.0, 2.0], vec![2.0, 0.0]],
            4.0,
        )
        .unwrap();
        let init = InitialState {
            compliance: vec![0.1, 0.1],
            costs: vec![0.0, 0.0],
        };
        let tr = simulate(&net, &init, 60.0, 0.02).unwrap();
        for w in tr.costs.windows(2) {
            assert!(w[1][0] >= w[0][0]);
        }
        assert_abs_diff_eq!(tr.compliance.last().unwrap()[1], 0.8, epsilon = 1e-4);
    }

    #[test]
    fn step_limit_is_enforced() {
        let net = ComplianceNetwork::ring(&RingSpec::new(4, 1.0, 5.0, 1.0, 0.1)).unwrap();
        let init = InitialState::perturbed(&net, &[0.0; 4]).unwrap();
        assert!(simulate(&net, &init, 10.0, 0.05).is_err());
    }
}

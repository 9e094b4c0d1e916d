//! Single signalised junction with three queues, stochastic compliance and
//! a discrete deposit-cost controller.

use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::harness::ensemble::{run_seeded, EnsembleStats};
use crate::rng::SimRng;

pub const QUEUES: usize = 3;

/// Junction timing and demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct JunctionConfig {
    /// Time units between signal changes, `T_s`.
    pub switch_period: u64,
    /// Crossing time per vehicle, `T_J`.
    pub crossing_time: f64,
    /// Extra delay caused by a violation, `tau_d`.
    pub slowdown: f64,
    /// Vehicles served per time unit on green, `F_J`.
    pub capacity: f64,
    /// Mean total arrivals per time unit.
    pub arrival_rate: f64,
    pub service: ServiceRule,
}

impl Default for JunctionConfig {
    fn default() -> Self {
        Self {
            switch_period: 10,
            crossing_time: 1.0,
            slowdown: 1.0,
            capacity: 3.0,
            arrival_rate: 1.0,
            service: ServiceRule::default(),
        }
    }
}

impl JunctionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.switch_period == 0 {
            return Err(invalid("switch_period must be positive"));
        }
        for (name, v) in [
            ("crossing_time", self.crossing_time),
            ("slowdown", self.slowdown),
            ("capacity", self.capacity),
            ("arrival_rate", self.arrival_rate),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive")));
            }
        }
        Ok(())
    }
}

/// How violations reduce the green throughput.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ServiceRule {
    /// Each violating vehicle occupies the junction for `T_J + tau_d`;
    /// occupation not used up in the current unit carries over. Green
    /// serves `floor(F_J * free fraction of the unit)`.
    #[default]
    Occupancy,
    /// Violations in the unit stretch the crossing time to
    /// `T_J + v tau_d`; green serves `floor(F_J T_J / (T_J + v tau_d))`.
    Stretch,
}

/// Queue lengths, signal phase and controller state.
#[derive(Debug, Clone, PartialEq)]
pub struct JunctionState {
    pub queues: [u64; QUEUES],
    /// Index of the road with the green light.
    pub green: usize,
    pub t: u64,
    pub compliance: f64,
    pub cost: f64,
    /// Junction occupation (time units) still owed by past violations.
    pub blocked: f64,
}

impl JunctionState {
    pub fn new(compliance: f64) -> Self {
        Self {
            queues: [0; QUEUES],
            green: 0,
            t: 0,
            compliance,
            cost: 0.0,
            blocked: 0.0,
        }
    }

    /// Average queue length.
    pub fn mean_queue(&self) -> f64 {
        self.queues.iter().sum::<u64>() as f64 / QUEUES as f64
    }

    pub fn total(&self) -> u64 {
        self.queues.iter().sum()
    }
}

/// What happened during one time unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepOutcome {
    pub arrivals: u64,
    pub violations: u64,
    pub served: u64,
}

/// Vehicles the green road may serve this unit.
pub fn service_capacity(cfg: &JunctionConfig, violations: u64, blocked: &mut f64) -> u64 {
    match cfg.service {
        ServiceRule::Stretch => {
            let stretched = cfg.crossing_time + violations as f64 * cfg.slowdown;
            (cfg.capacity * cfg.crossing_time / stretched).floor().max(0.0) as u64
        }
        ServiceRule::Occupancy => {
            *blocked += violations as f64 * (cfg.crossing_time + cfg.slowdown);
            let free = (1.0 - *blocked).max(0.0);
            *blocked = (*blocked - 1.0).max(0.0);
            (cfg.capacity * free + 1e-12).floor() as u64
        }
    }
}

/// Advance one time unit: arrivals, red-light violations, green service,
/// then the signal changes every `T_s` units.
pub fn step(state: &mut JunctionState, cfg: &JunctionConfig, rng: &mut SimRng) -> StepOutcome {
    let arrivals = Poisson::new(cfg.arrival_rate)
        .expect("validated rate")
        .sample(rng) as u64;
    for _ in 0..arrivals {
        state.queues[rng.random_range(0..QUEUES)] += 1;
    }
    let p_violate = 1.0 - state.compliance;
    let mut violations = 0;
    for q in 0..QUEUES {
        if q != state.green && state.queues[q] > 0 && rng.random::<f64>() < p_violate {
            state.queues[q] -= 1;
            violations += 1;
        }
    }
    let capacity = service_capacity(cfg, violations, &mut state.blocked);
    let served = capacity.min(state.queues[state.green]);
    state.queues[state.green] -= served;
    if (state.t + 1).is_multiple_of(cfg.switch_period) {
        state.green = (state.green + 1) % QUEUES;
    }
    state.t += 1;
    StepOutcome {
        arrivals,
        violations,
        served,
    }
}

/// Discrete cost controller parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerParams {
    /// Compliance per unit cost, `beta`.
    pub beta: f64,
    /// Cost memory `tau_C`.
    pub memory: f64,
    /// Gain `K`.
    pub gain: f64,
    /// Target compliance `Q^T`.
    pub target: f64,
}

impl ControllerParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) {
            return Err(invalid("beta must be positive"));
        }
        if !(0.0..=1.0).contains(&self.target) {
            return Err(invalid("target must lie in [0, 1]"));
        }
        if !(self.gain.is_finite() && self.memory.is_finite()) {
            return Err(invalid("gain and memory must be finite"));
        }
        Ok(())
    }

    /// Steady cost `Q^T / beta` of the closed loop with unit memory.
    pub fn steady_cost(&self) -> f64 {
        self.target / self.beta
    }

    /// With unit memory the cost obeys `C' = (1 - K beta) C + K Q^T`.
    pub fn is_stable(&self) -> bool {
        let kb = self.gain * self.beta;
        self.memory == 1.0 && kb > 0.0 && kb < 2.0
    }
}

/// `C(t+1) = tau_C C(t) + K (Q^T - Q(t))`, then `Q(t+1) = beta C(t+1)`.
pub fn controller_step(state: &mut JunctionState, params: &ControllerParams) {
    state.cost = (params.memory * state.cost + params.gain * (params.target - state.compliance)).max(0.0);
    state.compliance = (params.beta * state.cost).clamp(0.0, 1.0);
}

/// Fixed compliance or cost-controlled compliance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode", deny_unknown_fields)]
pub enum Mode {
    FixedQ { compliance: f64 },
    ClosedLoop(ControllerParams),
}

impl Mode {
    pub fn validate(&self) -> Result<()> {
        match self {
            Mode::FixedQ { compliance } if !(0.0..=1.0).contains(compliance) => {
                Err(invalid("compliance must lie in [0, 1]"))
            }
            Mode::FixedQ { .. } => Ok(()),
            Mode::ClosedLoop(p) => p.validate(),
        }
    }
}

/// One run sampled at `t = 0..=horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSeries {
    pub mean_queue: Vec<f64>,
    pub compliance: Vec<f64>,
    pub cost: Vec<f64>,
}

pub fn run(cfg: &JunctionConfig, mode: &Mode, horizon: u64, rng: &mut SimRng) -> Result<RunSeries> {
    cfg.validate()?;
    mode.validate()?;
    let mut state = match mode {
        Mode::FixedQ { compliance } => JunctionState::new(*compliance),
        Mode::ClosedLoop(_) => JunctionState::new(0.0),
    };
    let cap = horizon as usize + 1;
    let mut out = RunSeries {
        mean_queue: Vec::with_capacity(cap),
        compliance: Vec::with_capacity(cap),
        cost: Vec::with_capacity(cap),
    };
    let record = |s: &JunctionState, out: &mut RunSeries| {
        out.mean_queue.push(s.mean_queue());
        out.compliance.push(s.compliance);
        out.cost.push(s.cost);
    };
    record(&state, &mut out);
    for _ in 0..horizon {
        step(&mut state, cfg, rng);
        if let Mode::ClosedLoop(p) = mode {
            controller_step(&mut state, p);
        }
        record(&state, &mut out);
    }
    Ok(out)
}

/// Per-time ensemble statistics of the mean queue, compliance and cost.
#[derive(Debug, Clone, PartialEq)]
pub struct JunctionEnsemble {
    pub mean_queue: EnsembleStats,
    pub compliance: EnsembleStats,
    pub cost: EnsembleStats,
}

impl JunctionEnsemble {
    pub fn runs(&self) -> usize {
        self.mean_queue.runs
    }

    /// Rows `t,mean_V,std_V,mean_Q,mean_C`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,mean_V,std_V,mean_Q,mean_C")?;
        for (k, v) in self.mean_queue.series.iter().enumerate() {
            writeln!(
                out,
                "{k},{},{},{},{}",
                v.mean, v.std, self.compliance.series[k].mean, self.cost.series[k].mean
            )?;
        }
        Ok(())
    }
}

pub fn run_ensemble(
    cfg: &JunctionConfig,
    mode: &Mode,
    runs: usize,
    horizon: u64,
    seed: u64,
    workers: usize,
) -> Result<JunctionEnsemble> {
    let series = run_seeded(runs, seed, workers, |_, rng| run(cfg, mode, horizon, rng))?;
    let pick = |f: fn(&RunSeries) -> &Vec<f64>| -> Result<EnsembleStats> {
        EnsembleStats::from_runs(&series.iter().map(|s| f(s).clone()).collect::<Vec<_>>())
    };
    Ok(JunctionEnsemble {
        mean_queue: pick(|s| &s.mean_queue)?,
        compliance: pick(|s| &s.compliance)?,
        cost: pick(|s| &s.cost)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seed_stream;

    #[test]
    fn stretch_rule_values() {
        let cfg = JunctionConfig {
            service: ServiceRule::Stretch,
            ..Default::default()
        };
        let mut b = 0.0;
        assert_eq!(service_capacity(&cfg, 0, &mut b), 3);
        assert_eq!(service_capacity(&cfg, 2, &mut b), 1);
        assert_eq!(b, 0.0);
    }

    #[test]
    fn occupancy_rule_carries_over() {
        let cfg = JunctionConfig::default();
        let mut b = 0.0;
        assert_eq!(service_capacity(&cfg, 0, &mut b), 3);
        // one violation blocks this unit and the next
        assert_eq!(service_capacity(&cfg, 1, &mut b), 0);
        assert_eq!(b, 1.0);
        assert_eq!(service_capacity(&cfg, 0, &mut b), 0);
        assert_eq!(service_capacity(&cfg, 0, &mut b), 3);
        let half = JunctionConfig {
            crossing_time: 0.25,
            slowdown: 0.25,
            ..Default::default()
        };
        let mut b = 0.0;
        assert_eq!(service_capacity(&half, 1, &mut b), 1);
        assert_eq!(b, 0.0);
    }

    #[test]
    fn conservation_and_full_compliance() {
        let cfg = JunctionConfig::default();
        let mut rng = seed_stream(4, 0);
        let mut s = JunctionState::new(1.0);
        for _ in 0..2000 {
            let before = s.total();
            let o = step(&mut s, &cfg, &mut rng);
            assert_eq!(o.violations, 0);
            assert_eq!(before + o.arrivals - o.served - o.violations, s.total());
            assert!(o.served <= 3);
        }
        assert!(s.mean_queue() < 20.0);
        let mut s = JunctionState::new(0.5);
        for _ in 0..2000 {
            let before = s.total();
            let o = step(&mut s, &cfg, &mut rng);
            assert_eq!(before + o.arrivals - o.served - o.violations, s.total());
        }
    }

    #[test]
    fn phase_rotates_every_period() {
        let cfg = JunctionConfig::default();
        let mut rng = seed_stream(1, 1);
        let mut s = JunctionState::new(1.0);
        let mut greens = Vec::new();
        for _ in 0..30 {
            greens.push(s.green);
            step(&mut s, &cfg, &mut rng);
        }
        assert_eq!(&greens[..10], &[0; 10]);
        assert_eq!(&greens[10..20], &[1; 10]);
        assert_eq!(&greens[20..], &[2; 10]);
        assert_eq!(s.green, 0);
    }

    #[test]
    fn controller_fixed_point() {
        let p = ControllerParams {
            beta: 0.6,
            memory: 1.0,
            gain: 0.1,
            target: 0.95,
        };
        assert!(p.is_stable());
        let mut s = JunctionState::new(0.95);
        s.cost = 1.2;
        controller_step(&mut s, &p);
        assert_eq!(s.cost, 1.2);

        // oracle: iterate the scalar affine map C' = (1 - K beta) C + K Q^T
        let mut c = 0.0;
        for _ in 0..10_000 {
            c = (1.0 - p.gain * p.beta) * c + p.gain * p.target;
        }
        assert!((c - p.steady_cost()).abs() < 1e-12);

        let mut s = JunctionState::new(0.0);
        for _ in 0..500 {
            controller_step(&mut s, &p);
        }
        assert!((s.compliance - 0.95).abs() < 0.02);
        assert!((s.cost - 0.95 / 0.6).abs() < 0.02 * 0.95 / 0.6);
    }

    #[test]
    fn ensemble_is_deterministic() {
        let cfg = JunctionConfig::default();
        let mode = Mode::FixedQ { compliance: 0.9 };
        let a = run_ensemble(&cfg, &mode, 8, 200, 3, 2).unwrap();
        let b = run_ensemble(&cfg, &mode, 8, 200, 3, 0).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.mean_queue.series.len(), 201);
        let bad = Mode::FixedQ { compliance: 1.5 };
        assert!(run_ensemble(&cfg, &bad, 2, 10, 0, 1).is_err());
    }

    #[test]
    fn queues_order_with_compliance() {
        let cfg = JunctionConfig::default();
        let end = |q: f64| {
            let e = run_ensemble(&cfg, &Mode::FixedQ { compliance: q }, 40, 1000, 5, 0).unwrap();
            let last = e.mean_queue.series.last().copied().unwrap();
            (last.mean, last.standard_error(e.mean_queue.runs))
        };
        let (full, se_full) = end(1.0);
        let (mid, se_mid) = end(0.9);
        let (low, _) = end(0.8);
        // 0.9 and 1.0 sit within sampling noise of each other
        assert!(mid + se_mid + se_full > full, "{mid} {full}");
        assert!(mid < low, "{mid} {low}");
        assert!(low > 10.0, "{low}");
    }
}

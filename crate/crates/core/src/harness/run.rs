//! Scenario dispatch and output files.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::compliance::{self, InitialState};
use crate::error::Result;
use crate::fluid::{self, FluidConfig, FluidPoint};
use crate::harness::ensemble::linear_slope;
use crate::harness::scenario::{NetworkSpec, Scenario, StabilityScenario};
use crate::harness::tangle_runs::{time_average, TangleEnsemble, TangleModel, Variable};
use crate::junction;
use crate::stability::spectral::{self, SamplingGrid, SufficientReport};

/// Command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub kind: String,
    pub config_hash: String,
    pub seed: u64,
    pub runs: usize,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pass: Option<bool>,
    pub results: Value,
}

struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        self.files.push(name.to_string());
        Ok(BufWriter::new(File::create(path)?))
    }
}

/// Sampling grid for a network, with scenario overrides.
pub fn stability_grid(s: &StabilityScenario, net: &compliance::ComplianceNetwork) -> SamplingGrid {
    let mut grid = SamplingGrid::for_network(net);
    if let Some(g) = &s.grid {
        grid.re_max = g.re_max.unwrap_or(grid.re_max);
        grid.im_max = g.im_max.unwrap_or(grid.im_max);
        grid.re_points = g.re_points.unwrap_or(grid.re_points);
        grid.im_points = g.im_points.unwrap_or(grid.im_points);
    }
    grid
}

/// Sufficient-condition report for a network description.
pub fn stability_report(network: &NetworkSpec, grid: Option<SamplingGrid>) -> Result<SufficientReport> {
    match network {
        NetworkSpec::Ring(r) => spectral::check_ring(r, grid),
        NetworkSpec::Explicit(n) => {
            let grid = grid.unwrap_or_else(|| SamplingGrid::for_network(n));
            spectral::check_sufficient_condition(n, &grid)
        }
    }
}

/// Run `scenario` and write its CSV files and `summary.json` into the
/// output directory (option, then scenario field, then `./out`).
pub fn run_scenario(scenario: &Scenario, opts: &RunOptions) -> Result<RunSummary> {
    scenario.validate()?;
    let dir = opts
        .out
        .clone()
        .or_else(|| scenario.output().map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir)?;
    let mut out = Outputs { dir, files: Vec::new() };
    let started = Instant::now();
    let seed = scenario.seed();
    let runs = scenario.runs();
    let mut pass = None;

    let results = match scenario {
        Scenario::TangleAgent(s) | Scenario::TangleReduced(s) => {
            let model = if matches!(scenario, Scenario::TangleAgent(_)) {
                TangleModel::Agent
            } else {
                TangleModel::Reduced
            };
            let cfg = s.config();
            let ens = TangleEnsemble::run(model, &cfg, runs, seed, opts.workers, s.per_run_csv)?;
            for v in Variable::ALL {
                ens.write_csv(v, out.create(&format!("{}.csv", v.name()))?)?;
            }
            if let Some(trajs) = &ens.trajectories {
                for (i, t) in trajs.iter().enumerate() {
                    t.write_csv(out.create(&format!("runs/run_{i:04}.csv"))?)?;
                }
            }
            let plateau: Vec<f64> = (0..cfg.types)
                .map(|i| time_average(&ens.times, &ens.mean(i, Variable::L), cfg.horizon / 2.0, cfg.horizon))
                .collect::<Result<_>>()?;
            let last = ens.times.len() - 1;
            let final_l: Vec<f64> = (0..cfg.types).map(|i| ens.mean(i, Variable::L)[last]).collect();
            json!({ "mean_L_second_half": plateau, "mean_L_final": final_l })
        }
        Scenario::Fluid(s) => {
            let d = s.initial.l.len();
            let mut cfg = FluidConfig::new(d, s.h, s.horizon);
            if let Some(step) = s.step {
                cfg.step = step;
            }
            cfg.consistent_start = s.consistent_start;
            let start = FluidPoint::new(s.initial.x.clone(), s.initial.l.clone());
            let rate = s.arrival_rate;
            let tr = fluid::integrate(&cfg, fluid::constant_history(start), |_| rate)?;
            tr.write_csv(out.create("fluid.csv")?)?;
            let end = tr.last();
            json!({ "x_final": end.x, "l_final": end.l, "w_final": end.w() })
        }
        Scenario::Stability(s) => {
            let net = s.network.build()?;
            let report = stability_report(&s.network, Some(stability_grid(s, &net)))?;
            serde_json::to_writer_pretty(out.create("stability.json")?, &report)?;
            pass = Some(report.pass);
            serde_json::to_value(&report)?
        }
        Scenario::ComplianceNet(s) => {
            let net = s.network.build()?;
            let offsets = if s.perturbation.is_empty() {
                vec![0.0; net.len()]
            } else {
                s.perturbation.clone()
            };
            let init = InitialState::perturbed(&net, &offsets)?;
            let limit = net.min_positive_lag().map_or(net.window, |t| t.min(net.window)) / 50.0;
            let tr = compliance::simulate(&net, &init, s.horizon, s.step.unwrap_or(limit))?;
            tr.write_csv(out.create("compliance.csv")?)?;
            let last = tr.times.len() - 1;
            json!({
                "static_costs": init.costs,
                "initial_max_deviation": tr.max_deviation(&net, 0),
                "final_max_deviation": tr.max_deviation(&net, last),
            })
        }
        Scenario::Junction(s) => {
            let ens = junction::run_ensemble(&s.config, &s.control, runs, s.horizon, seed, opts.workers)?;
            ens.write_csv(out.create("junction.csv")?)?;
            let means = ens.mean_queue.means();
            let half = means.len() / 2;
            let xs: Vec<f64> = (half..means.len()).map(|k| k as f64).collect();
            let last = means.len() - 1;
            json!({
                "mean_V_final": means[last],
                "se_V_final": ens.mean_queue.series[last].standard_error(runs),
                "slope_V_second_half": linear_slope(&xs, &means[half..]),
                "mean_Q_final": ens.compliance.series[last].mean,
                "mean_C_final": ens.cost.series[last].mean,
            })
        }
    };

    let mut summary = RunSummary {
        kind: scenario.kind().to_string(),
        config_hash: scenario.config_hash(),
        seed,
        runs,
        wall_time_s: started.elapsed().as_secs_f64(),
        outputs: out.files.clone(),
        pass,
        results,
    };
    summary.outputs.push("summary.json".into());
    serde_json::to_writer_pretty(out.create("summary.json")?, &summary)?;
    Ok(summary)
}

//! Ensembles of tip-dynamics simulations.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::harness::ensemble::{run_seeded, EnsembleStats};
use crate::tangle::{agent, reduced, TangleConfig, Trajectory, TypeCounts};

/// Which simulator to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TangleModel {
    Agent,
    Reduced,
}

impl TangleModel {
    pub fn run(self, cfg: &TangleConfig, rng: &mut crate::rng::SimRng) -> Result<Trajectory> {
        match self {
            TangleModel::Agent => agent::run(cfg, rng),
            TangleModel::Reduced => reduced::run(cfg, rng),
        }
    }
}

/// Counter tracked across an ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variable {
    L,
    X,
    W,
    N,
}

impl Variable {
    pub const ALL: [Variable; 4] = [Variable::L, Variable::X, Variable::W, Variable::N];

    pub fn get(self, c: &TypeCounts) -> u64 {
        match self {
            Variable::L => c.l,
            Variable::X => c.x,
            Variable::W => c.w,
            Variable::N => c.n,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variable::L => "L",
            Variable::X => "X",
            Variable::W => "W",
            Variable::N => "N",
        }
    }
}

/// Per-type, per-variable statistics on the output grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TangleEnsemble {
    pub model: TangleModel,
    pub times: Vec<f64>,
    /// `stats[type][variable]` in [`Variable::ALL`] order.
    pub stats: Vec<Vec<EnsembleStats>>,
    /// Per-run trajectories when requested.
    pub trajectories: Option<Vec<Trajectory>>,
}

impl TangleEnsemble {
    pub fn run(
        model: TangleModel,
        cfg: &TangleConfig,
        runs: usize,
        seed: u64,
        workers: usize,
        keep_runs: bool,
    ) -> Result<Self> {
        cfg.validate()?;
        let trajectories = run_seeded(runs, seed, workers, |_, rng| model.run(cfg, rng))?;
        let times = trajectories[0].times.clone();
        let mut stats = Vec::with_capacity(cfg.types);
        for i in 0..cfg.types {
            let mut per_var = Vec::with_capacity(4);
            for v in Variable::ALL {
                let runs: Vec<Vec<f64>> = trajectories.iter().map(|t| t.series(i, |c| v.get(c))).collect();
                per_var.push(EnsembleStats::from_runs(&runs)?);
            }
            stats.push(per_var);
        }
        Ok(Self {
            model,
            times,
            stats,
            trajectories: keep_runs.then_some(trajectories),
        })
    }

    pub fn types(&self) -> usize {
        self.stats.len()
    }

    pub fn runs(&self) -> usize {
        self.stats[0][0].runs
    }

    pub fn stats(&self, type_index: usize, v: Variable) -> &EnsembleStats {
        let k = Variable::ALL.iter().position(|&x| x == v).unwrap();
        &self.stats[type_index][k]
    }

    pub fn mean(&self, type_index: usize, v: Variable) -> Vec<f64> {
        self.stats(type_index, v).means()
    }

    /// Rows `t,mean_1,std_1,p5_1,p95_1,...` for one variable.
    pub fn write_csv<W: Write>(&self, v: Variable, mut out: W) -> std::io::Result<()> {
        let mut header = vec!["t".to_string()];
        for i in 1..=self.types() {
            for s in ["mean", "std", "p5", "p95"] {
                header.push(format!("{s}_{}_{i}", v.name()));
            }
        }
        writeln!(out, "{}", header.join(","))?;
        for (k, t) in self.times.iter().enumerate() {
            let mut row = vec![t.to_string()];
            for i in 0..self.types() {
                let s = &self.stats(i, v).series[k];
                row.extend([s.mean, s.std, s.p5, s.p95].iter().map(f64::to_string));
            }
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Time average of `series` over samples with `lo <= t <= hi`.
pub fn time_average(times: &[f64], series: &[f64], lo: f64, hi: f64) -> Result<f64> {
    let picked: Vec<f64> = times
        .iter()
        .zip(series)
        .filter(|(t, _)| **t >= lo - 1e-9 && **t <= hi + 1e-9)
        .map(|(_, v)| *v)
        .collect();
    if picked.is_empty() {
        return Err(invalid(format!("no samples in [{lo}, {hi}]")));
    }
    Ok(picked.iter().sum::<f64>() / picked.len() as f64)
}

//! Comparison of agent-based and reduced-model ensembles.

use serde::Serialize;

use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::scenario::Scenario;
use crate::harness::tangle_runs::{TangleEnsemble, TangleModel, Variable};

/// Default pass threshold on the relative difference of ensemble means.
pub const THRESHOLD: f64 = 0.05;
/// Fraction of a series' maximum used as the floor of the denominator, so
/// that near-zero means do not inflate the relative difference.
pub const FLOOR_FRACTION: f64 = 0.05;

/// Worst disagreement for one type and variable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesDiff {
    /// Type index, from 1.
    pub type_index: usize,
    pub variable: Variable,
    pub max_relative_difference: f64,
    pub at_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub pass: bool,
    pub threshold: f64,
    /// Only times strictly after this are compared.
    pub t_min: f64,
    pub max_relative_difference: f64,
    pub series: Vec<SeriesDiff>,
    pub runs_agent: usize,
    pub runs_reduced: usize,
}

/// Pointwise relative difference of mean `L` and `X` for `t > t_min`,
/// `|a - r| / max(|r|, 5% of max r over the window)`.
pub fn compare(agent: &TangleEnsemble, reduced: &TangleEnsemble, t_min: f64) -> Result<ValidationReport> {
    if agent.times.len() != reduced.times.len()
        || agent.times.iter().zip(&reduced.times).any(|(a, b)| (a - b).abs() > 1e-9)
    {
        return Err(Error::Mismatch("output grids differ".into()));
    }
    if agent.types() != reduced.types() {
        return Err(Error::Mismatch(format!(
            "type counts differ: {} vs {}",
            agent.types(),
            reduced.types()
        )));
    }
    let window: Vec<usize> = (0..agent.times.len()).filter(|&k| agent.times[k] > t_min).collect();
    if window.is_empty() {
        return Err(Error::Mismatch(format!("no output times after {t_min}")));
    }
    let mut series = Vec::new();
    for i in 0..agent.types() {
        for v in [Variable::L, Variable::X] {
            let (a, r) = (agent.mean(i, v), reduced.mean(i, v));
            let peak = window.iter().map(|&k| r[k].abs()).fold(0.0, f64::max);
            let floor = (FLOOR_FRACTION * peak).max(f64::MIN_POSITIVE);
            let (worst, at) = window
                .iter()
                .map(|&k| ((a[k] - r[k]).abs() / r[k].abs().max(floor), agent.times[k]))
                .fold((0.0, t_min), |acc, x| if x.0 > acc.0 { x } else { acc });
            series.push(SeriesDiff {
                type_index: i + 1,
                variable: v,
                max_relative_difference: worst,
                at_time: at,
            });
        }
    }
    let max = series.iter().map(|s| s.max_relative_difference).fold(0.0, f64::max);
    Ok(ValidationReport {
        pass: max < THRESHOLD,
        threshold: THRESHOLD,
        t_min,
        max_relative_difference: max,
        series,
        runs_agent: agent.runs(),
        runs_reduced: reduced.runs(),
    })
}

/// Run an agent-based and a reduced-model scenario and compare them after
/// five delays (the larger `h` of the two).
pub fn validate_scenarios(agent: &Scenario, reduced: &Scenario, workers: usize) -> Result<ValidationReport> {
    let (a, r) = match (agent, reduced) {
        (Scenario::TangleAgent(a), Scenario::TangleReduced(r)) => (a, r),
        _ => {
            return Err(Error::Mismatch(format!(
                "expected tangle-agent and tangle-reduced scenarios, got {} and {}",
                agent.kind(),
                reduced.kind()
            )))
        }
    };
    if a.seed == r.seed {
        return Err(Error::Mismatch("the two scenarios must use different seeds".into()));
    }
    if a.dt_out != r.dt_out || a.horizon != r.horizon {
        return Err(Error::Mismatch("output grids differ".into()));
    }
    let ea = TangleEnsemble::run(TangleModel::Agent, &a.config(), a.runs, a.seed, workers, false)?;
    let er = TangleEnsemble::run(TangleModel::Reduced, &r.config(), r.runs, r.seed, workers, false)?;
    compare(&ea, &er, 5.0 * a.h.max(r.h))
}

pub fn validate_files(agent: &Path, reduced: &Path, workers: usize) -> Result<ValidationReport> {
    validate_scenarios(&Scenario::from_file(agent)?, &Scenario::from_file(reduced)?, workers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::tangle_runs::TangleModel;
    use crate::tangle::TangleConfig;

    #[test]
    fn grids_must_match() {
        let a = TangleEnsemble::run(TangleModel::Reduced, &TangleConfig::new(10.0, 1.0, 1, 10.0), 2, 1, 1, false).unwrap();
        let b = TangleEnsemble::run(TangleModel::Reduced, &TangleConfig::new(10.0, 1.0, 1, 12.0), 2, 2, 1, false).unwrap();
        assert!(matches!(compare(&a, &b, 5.0), Err(Error::Mismatch(_))));
    }

    #[test]
    fn identical_ensembles_agree() {
        let cfg = TangleConfig::new(10.0, 1.0, 1, 10.0);
        let a = TangleEnsemble::run(TangleModel::Reduced, &cfg, 3, 1, 1, false).unwrap();
        let r = compare(&a, &a, 5.0).unwrap();
        assert!(r.pass);
        assert_eq!(r.max_relative_difference, 0.0);
        assert_eq!(r.series.len(), 2);
    }
}

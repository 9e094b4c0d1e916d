//! Seeded ensembles and per-time statistics.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::rng::{seed_stream, SimRng};

/// Run `f(index, rng)` for every index in `0..runs`, each with its own seed
/// stream, on at most `workers` threads (0 means all cores). Results are in
/// index order regardless of completion order.
pub fn run_seeded<T, F>(runs: usize, master: u64, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &mut SimRng) -> Result<T> + Sync,
{
    if runs == 0 {
        return Err(invalid("runs must be at least 1"));
    }
    let job = || {
        (0..runs)
            .into_par_iter()
            .map(|i| f(i, &mut seed_stream(master, i as u64)))
            .collect::<Result<Vec<T>>>()
    };
    if workers == 0 {
        job()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| invalid(format!("thread pool: {e}")))?
            .install(job)
    }
}

/// Ensemble summary at one output time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation (zero for a single run).
    pub std: f64,
    pub p5: f64,
    pub p95: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Self {
            mean,
            std,
            p5: nearest_rank(&sorted, 5.0),
            p95: nearest_rank(&sorted, 95.0),
        }
    }

    /// Standard error of the mean for `runs` samples.
    pub fn standard_error(&self, runs: usize) -> f64 {
        self.std / (runs as f64).sqrt()
    }
}

/// Nearest-rank percentile of sorted data.
pub fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = ((p / 100.0) * n as f64).ceil().max(1.0) as usize;
    sorted[rank.min(n) - 1]
}

/// Per-time summaries of a variable tracked by every run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub runs: usize,
    pub series: Vec<Summary>,
}

impl EnsembleStats {
    /// `runs[r][k]` is run `r` at output time `k`; all runs share the grid.
    pub fn from_runs(runs: &[Vec<f64>]) -> Result<Self> {
        let len = runs.first().map(Vec::len).ok_or_else(|| invalid("no runs"))?;
        if runs.iter().any(|r| r.len() != len) {
            return Err(invalid("runs have different lengths"));
        }
        let series = (0..len)
            .map(|k| Summary::of(&runs.iter().map(|r| r[k]).collect::<Vec<_>>()))
            .collect();
        Ok(Self {
            runs: runs.len(),
            series,
        })
    }

    pub fn means(&self) -> Vec<f64> {
        self.series.iter().map(|s| s.mean).collect()
    }
}

/// Least-squares slope of `ys` against `xs`.
pub fn linear_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn summary_values() {
        let s = Summary::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(s.p5, 1.0);
        assert_eq!(s.p95, 4.0);
        let data: Vec<f64> = (1..=100).map(f64::from).collect();
        let s = Summary::of(&data);
        assert_eq!((s.p5, s.p95), (5.0, 95.0));
        assert_eq!(Summary::of(&[7.0]).std, 0.0);
    }

    #[test]
    fn runs_are_ordered_and_reproducible() {
        let f = |i: usize, rng: &mut SimRng| Ok((i, rng.random::<u64>()));
        let a = run_seeded(16, 9, 4, f).unwrap();
        let b = run_seeded(16, 9, 1, f).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().enumerate().all(|(k, (i, _))| k == *i));
        assert!(run_seeded(0, 9, 1, f).is_err());
    }

    #[test]
    fn slope_of_a_line() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 0.5 * x).collect();
        assert!((linear_slope(&xs, &ys) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn stats_from_runs() {
        let s = EnsembleStats::from_runs(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(s.means(), vec![2.0, 3.0]);
        assert!(EnsembleStats::from_runs(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }
}

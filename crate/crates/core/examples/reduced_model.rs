//! Ensemble of reduced-model runs: mean tip counts with percentile bands.

use tangle_compliance::harness::tangle_runs::{TangleEnsemble, TangleModel, Variable};
use tangle_compliance::tangle::TangleConfig;

fn main() -> tangle_compliance::error::Result<()> {
    let mut cfg = TangleConfig::new(60.0, 3.0, 1, 60.0);
    cfg.dt_out = 2.0;
    let ens = TangleEnsemble::run(TangleModel::Reduced, &cfg, 200, 7, 0, false)?;
    let l = ens.stats(0, Variable::L);
    let x = ens.stats(0, Variable::X);
    println!("{:>5} {:>8} {:>7} {:>7} {:>8}", "t", "mean L", "p5", "p95", "mean X");
    for (k, t) in ens.times.iter().enumerate().step_by(3) {
        let s = l.series[k];
        println!("{t:>5.0} {:>8.1} {:>7.0} {:>7.0} {:>8.1}", s.mean, s.p5, s.p95, x.series[k].mean);
    }
    Ok(())
}

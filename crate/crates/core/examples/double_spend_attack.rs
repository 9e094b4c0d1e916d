//! A conflicting branch seeded with a burst of transactions competes with
//! the honest branch for tips.

use tangle_compliance::harness::tangle_runs::{TangleEnsemble, TangleModel, Variable};
use tangle_compliance::tangle::TangleConfig;

fn main() -> tangle_compliance::error::Result<()> {
    let mut cfg = TangleConfig::new(60.0, 3.0, 2, 200.0).with_injection(50.0, 40, 1);
    cfg.dt_out = 1.0;
    let ens = TangleEnsemble::run(TangleModel::Reduced, &cfg, 100, 4, 0, true)?;
    println!("{:>5} {:>10} {:>10}", "t", "honest L", "attack L");
    for (k, t) in ens.times.iter().enumerate().step_by(25) {
        println!(
            "{t:>5.0} {:>10.1} {:>10.1}",
            ens.stats(0, Variable::L).series[k].mean,
            ens.stats(1, Variable::L).series[k].mean
        );
    }
    let extinct = ens
        .trajectories
        .as_ref()
        .map_or(0, |runs| runs.iter().filter(|r| r.samples.last().is_some_and(|s| s[1].x == 0)).count());
    println!("runs whose attack branch has no free tips at the end: {extinct} of {}", ens.runs());
    Ok(())
}

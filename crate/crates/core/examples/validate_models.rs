//! Agent-based and reduced ensembles with independent seeds, compared
//! series by series.

use tangle_compliance::harness::tangle_runs::{TangleEnsemble, TangleModel};
use tangle_compliance::harness::validate::compare;
use tangle_compliance::tangle::TangleConfig;

fn main() -> tangle_compliance::error::Result<()> {
    let mut cfg = TangleConfig::new(30.0, 2.0, 2, 80.0).with_injection(20.0, 15, 1);
    cfg.dt_out = 1.0;
    let agent = TangleEnsemble::run(TangleModel::Agent, &cfg, 600, 1, 0, false)?;
    let reduced = TangleEnsemble::run(TangleModel::Reduced, &cfg, 600, 2, 0, false)?;
    let report = compare(&agent, &reduced, 5.0 * cfg.h)?;
    for s in &report.series {
        println!(
            "type {} {}: max relative difference {:.4} at t = {}",
            s.type_index, s.variable.name(), s.max_relative_difference, s.at_time
        );
    }
    println!("{}", if report.pass { "PASS" } else { "FAIL" });
    Ok(())
}

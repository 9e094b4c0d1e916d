//! One agent-based tangle run with full structural checks.

use tangle_compliance::harness::tangle_runs::time_average;
use tangle_compliance::rng::seed_stream;
use tangle_compliance::tangle::agent::AgentTangle;
use tangle_compliance::tangle::{simulate, TangleConfig};

fn main() -> tangle_compliance::error::Result<()> {
    let (lambda, h) = (40.0, 2.0);
    let cfg = TangleConfig::new(lambda, h, 1, 100.0);
    let mut tangle = AgentTangle::new(1, h)?;
    let traj = simulate(&mut tangle, &cfg, &mut seed_stream(1, 0))?;
    tangle.check_structure()?;

    println!("{:>6} {:>6} {:>6} {:>6}", "t", "L", "X", "W");
    for k in (0..traj.times.len()).step_by(20) {
        let c = traj.samples[k][0];
        println!("{:>6.1} {:>6} {:>6} {:>6}", traj.times[k], c.l, c.x, c.w);
    }
    let l = traj.series(0, |c| c.l);
    let avg = time_average(&traj.times, &l, 50.0, 100.0)?;
    println!("sites {}, edges {}", tangle.sites().len(), tangle.edge_count());
    println!("time-averaged tips over [50, 100]: {avg:.1} (2 lambda h = {})", 2.0 * lambda * h);
    Ok(())
}

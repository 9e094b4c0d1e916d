//! Closed-loop enforcement: the cost controller drives compliance to target.

use tangle_compliance::junction::{run_ensemble, ControllerParams, JunctionConfig, Mode};

fn main() -> tangle_compliance::error::Result<()> {
    let params = ControllerParams {
        beta: 0.6,
        memory: 1.0,
        gain: 0.1,
        target: 0.95,
    };
    println!("steady cost {:.4}, stable = {}", params.steady_cost(), params.is_stable());
    let e = run_ensemble(&JunctionConfig::default(), &Mode::ClosedLoop(params), 100, 2000, 10, 0)?;
    println!("{:>6} {:>8} {:>8} {:>8}", "t", "Q", "C", "V");
    for t in [0, 10, 20, 50, 100, 500, 1000, 1999] {
        println!(
            "{t:>6} {:>8.4} {:>8.4} {:>8.2}",
            e.compliance.series[t].mean, e.cost.series[t].mean, e.mean_queue.series[t].mean
        );
    }
    Ok(())
}

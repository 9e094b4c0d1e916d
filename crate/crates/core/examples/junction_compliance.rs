//! Queue growth at a three-way junction for fixed compliance levels.

use tangle_compliance::junction::{run_ensemble, JunctionConfig, Mode};

fn main() -> tangle_compliance::error::Result<()> {
    let cfg = JunctionConfig::default();
    println!("{:>5} {:>10} {:>8} {:>12}", "Q", "mean V", "se", "slope");
    for q in [1.0, 0.95, 0.9, 0.8, 0.7] {
        let e = run_ensemble(&cfg, &Mode::FixedQ { compliance: q }, 100, 3000, 9, 0)?;
        let last = *e.mean_queue.series.last().unwrap();
        let means = e.mean_queue.means();
        let half = means.len() / 2;
        let slope = (means[means.len() - 1] - means[half]) / (means.len() - 1 - half) as f64;
        println!(
            "{q:>5} {:>10.2} {:>8.2} {slope:>12.2e}",
            last.mean,
            last.standard_error(e.mean_queue.runs)
        );
    }
    Ok(())
}

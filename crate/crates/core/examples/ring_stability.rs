//! Sufficient stability condition on rings, checked against simulation.

use tangle_compliance::compliance::{simulate, ComplianceNetwork, InitialState, RingSpec};
use tangle_compliance::stability::spectral::check_ring;

fn main() -> tangle_compliance::error::Result<()> {
    println!("{:>8} {:>8} {:>10} {:>6} {:>12}", "D", "bound", "max|lam|", "pass", "dev(60)/dev0");
    for coupling in [0.05, 0.1, 0.2, 0.25] {
        let spec = RingSpec::new(6, 1.0, 5.0, 1.0, coupling);
        let report = check_ring(&spec, None)?;
        let net = ComplianceNetwork::ring(&spec)?;
        let offsets: Vec<f64> = (0..spec.n).map(|i| if i % 2 == 0 { 0.04 } else { -0.04 }).collect();
        let tr = simulate(&net, &InitialState::perturbed(&net, &offsets)?, 60.0, 0.02)?;
        let ratio = tr.max_deviation(&net, tr.times.len() - 1) / tr.max_deviation(&net, 0);
        let bound = report.ring.map_or(f64::NAN, |r| r.bound);
        println!(
            "{coupling:>8} {bound:>8} {:>10.4} {:>6} {ratio:>12.2e}",
            report.max_modulus, report.pass
        );
    }
    Ok(())
}

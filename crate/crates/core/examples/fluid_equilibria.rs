//! Fluid limit: convergence to the single-type equilibrium and departure
//! from the balanced two-type point.

use tangle_compliance::fluid::{constant_history, integrate, static_solution, FluidConfig, FluidPoint};

fn main() -> tangle_compliance::error::Result<()> {
    let h = 2.0;
    let target = static_solution(1, h, &[0])?;
    let cfg = FluidConfig::new(1, h, 40.0 * h);
    let tr = integrate(&cfg, constant_history(FluidPoint::new(vec![1.5], vec![5.0])), |_| 1.0)?;
    println!("single type, static l = {}", target.l[0]);
    for t in [0.0, 5.0, 10.0, 20.0, 40.0, 80.0] {
        let p = tr.at(t);
        println!("  t = {t:>4}: l = {:.8}, x = {:.8}", p.l[0], p.x[0]);
    }

    let h = 3.0;
    let balanced = static_solution(2, h, &[0, 1])?;
    let start = FluidPoint::new(
        balanced.x.iter().zip([0.01, -0.01]).map(|(x, d)| x + d).collect(),
        balanced.l.clone(),
    );
    let cfg = FluidConfig::new(2, h, 150.0);
    let tr = integrate(&cfg, constant_history(start), |_| 1.0)?;
    println!("two types, balanced l = {:?}", balanced.l);
    for t in [0.0, 25.0, 50.0, 75.0, 100.0, 150.0] {
        let p = tr.at(t);
        println!("  t = {t:>5}: l = [{:.4}, {:.4}]", p.l[0], p.l[1]);
    }
    Ok(())
}

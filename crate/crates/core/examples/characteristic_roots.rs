//! Roots of the linearized fluid equations.

use num_complex::Complex64;
use tangle_compliance::stability::modes::{find_x0, mean_mode_characteristic, r0, zero_sum_characteristic};
use tangle_compliance::stability::{count_roots, verify_unstable_mode, SpectralRegion};

fn main() -> tangle_compliance::error::Result<()> {
    let x0 = find_x0()?;
    println!("x0 = {x0:.12}, r0 = {:.12}", r0(x0));

    let h = 3.0;
    let mean = mean_mode_characteristic(h);
    let zero_sum = zero_sum_characteristic(h);
    let right = SpectralRegion::new((0.01 / h, 6.0 / h), (-6.0 / h, 6.0 / h));
    println!("h = {h}");
    println!("  mean mode roots with Re z > 0: {}", count_roots(&mean, &right)?);
    println!("  zero-sum mode roots with Re z > 0: {}", count_roots(&zero_sum, &right)?);
    let z = Complex64::new(x0 / h, 0.0);
    println!("  |zero-sum characteristic at x0/h| = {:.2e}", zero_sum(z).norm());

    for d in [2, 3, 5] {
        let m = verify_unstable_mode(d, h)?;
        println!("d = {d}: growth rate {:.6}, residual {:.2e}, ok = {}", m.z.re, m.residual, m.passed());
    }
    Ok(())
}

//! Semiclassical double well: barrier against zero-point energy.

use lmg_sim::analytic::{
    finite_size_critical_point, finite_size_critical_point_numeric, SystemSize, WellDescription,
};

fn main() -> lmg_sim::Result<()> {
    for s in [0.45, 0.55, 0.65, 0.75] {
        let w = WellDescription::new(s, SystemSize::Finite(200))?;
        println!(
            "s = {s}: z_min = {:.4}, barrier = {:.3e}, zpe = {:.3e}",
            w.z_min,
            w.barrier_height,
            w.zero_point_energy.unwrap_or(0.0)
        );
    }
    for n in [50, 100, 200, 400] {
        println!(
            "N = {n}: closed form {:.4}, barrier = zpe at {:.4}",
            finite_size_critical_point(SystemSize::Finite(n))?,
            finite_size_critical_point_numeric(n)?
        );
    }
    Ok(())
}

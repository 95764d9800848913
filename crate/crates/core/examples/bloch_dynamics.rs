//! Mean-field trajectory on the Bloch sphere, with and without the drive.

use lmg_sim::classical::{integrate, time_average_x};
use lmg_sim::model::{classical_energy, BlochState, ModelParams};

fn main() -> lmg_sim::Result<()> {
    let initial = BlochState::from_angles(1.2, 0.3)?;
    for params in [ModelParams::clean(0.8, 200)?, ModelParams::new(0.8, 200, 0.05, 1.0)?] {
        let traj = integrate(initial, params, 50.0, 1e-3, 0.5)?;
        println!("eps0 = {}", params.eps0());
        for (t, p) in traj.times.iter().zip(&traj.states).step_by(10) {
            println!(
                "  t = {t:5.1}  X = {:+.4}  Y = {:+.4}  Z = {:+.4}  E = {:+.6}",
                p.x(),
                p.y(),
                p.z(),
                classical_energy(p, params.s())
            );
        }
        let drift = traj
            .states
            .iter()
            .map(|p| (p.norm() - 1.0).abs())
            .fold(0.0, f64::max);
        println!("  max |norm - 1| = {drift:.1e}, time-averaged X = {:.4}", time_average_x(&traj)?);
    }
    Ok(())
}

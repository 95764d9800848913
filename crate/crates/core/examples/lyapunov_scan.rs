//! Largest Lyapunov exponent along `s` for the two protocol initial states.

use lmg_sim::classical::{lyapunov_exponent, LyapunovSettings};
use lmg_sim::model::{BlochState, ModelParams, EPS_THERMODYNAMIC};
use std::f64::consts::FRAC_PI_2;

fn main() -> lmg_sim::Result<()> {
    let settings = LyapunovSettings {
        dt: 1e-2,
        ..Default::default()
    };
    let gsqpt = BlochState::from_angles(EPS_THERMODYNAMIC, 0.0)?;
    let dqpt = BlochState::from_angles(FRAC_PI_2, 0.0)?;
    println!("{:>5} {:>10} {:>10} {:>10}", "s", "clean", "gsqpt", "dqpt");
    for k in 1..=19 {
        let s = 0.05 * k as f64;
        let clean = lyapunov_exponent(dqpt, ModelParams::clean(s, 200)?, &settings)?;
        let driven = ModelParams::new(s, 200, 0.05, 1.0)?;
        let g = lyapunov_exponent(gsqpt, driven, &settings)?;
        let d = lyapunov_exponent(dqpt, driven, &settings)?;
        println!("{s:>5.2} {:>10.4} {:>10.4} {:>10.4}", clean.lambda, g.lambda, d.lambda);
    }
    Ok(())
}

//! Closed-form order parameter of the clean mean-field flow against a
//! direct time average of `X(t)`.

use lmg_sim::analytic::{bifurcation_point, lambda_param, xbar_analytic};
use lmg_sim::classical::time_averaged_x;
use lmg_sim::model::{BlochState, ModelParams};
use std::f64::consts::FRAC_PI_2;

fn main() -> lmg_sim::Result<()> {
    let theta0 = FRAC_PI_2;
    println!("s_c(pi/2) = {:.6}", bifurcation_point(theta0));
    println!("{:>6} {:>10} {:>12} {:>12} {:>10}", "s", "Lambda", "analytic", "numeric", "error");
    let initial = BlochState::from_angles(theta0, 0.0)?;
    for s in [0.6, 0.7, 0.75, 0.8, 0.9, 0.95] {
        let exact = xbar_analytic(theta0, s)?;
        let numeric = time_averaged_x(initial, ModelParams::clean(s, 200)?, 500.0, 1e-3, 1e-2)?;
        println!(
            "{s:>6.2} {:>10.5} {exact:>12.6} {numeric:>12.6} {:>10.2e}",
            lambda_param(theta0, s)?,
            (exact - numeric).abs()
        );
    }
    Ok(())
}

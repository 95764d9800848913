//! Stroboscopic section of the driven flow, summarised per orbit.
//!
//! Orbits that stay on a curve keep a narrow `θ` band; chaotic ones wander.

use lmg_sim::classical::{fibonacci_sphere, poincare_section};
use lmg_sim::model::ModelParams;

fn main() -> lmg_sim::Result<()> {
    let initials = fibonacci_sphere(12);
    for s in [0.3, 0.8] {
        let params = ModelParams::new(s, 200, 0.05, 1.0)?;
        let pts = poincare_section(&initials, params, 300, 1e-2)?;
        println!("s = {s}");
        for id in 0..initials.len() {
            let theta: Vec<f64> = pts.iter().filter(|p| p.ic_id == id).map(|p| p.theta).collect();
            let lo = theta.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = theta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            println!("  orbit {id:2}: theta in [{lo:.3}, {hi:.3}]");
        }
    }
    Ok(())
}

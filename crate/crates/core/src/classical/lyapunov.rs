//! Largest Lyapunov exponent by the two-trajectory (Benettin) method.
//!
//! A neighbor starts `neighbor_offset` away along a tangent direction. Every
//! `renorm_interval` the separation `d_k` is measured, `ln(d_k/d_0)` is
//! accumulated, and the neighbor is pulled back to distance `d_0` along the
//! current separation.

use serde::{Deserialize, Serialize};

use super::{LmgField, SamplingPlan, SphereStepper};
use crate::error::{invalid, Result};
use crate::model::{BlochState, ModelParams};

/// Drift of the running estimate over the last quarter below which the
/// estimate is reported as converged.
pub const CONVERGENCE_DRIFT: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LyapunovSettings {
    pub horizon: f64,
    pub renorm_interval: f64,
    pub neighbor_offset: f64,
    pub dt: f64,
}

impl Default for LyapunovSettings {
    fn default() -> Self {
        Self {
            horizon: 2000.0,
            renorm_interval: 1.0,
            neighbor_offset: 1e-8,
            dt: 1e-3,
        }
    }
}

impl LyapunovSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.renorm_interval > 0.0) || !(self.horizon >= 100.0 * self.renorm_interval) {
            return Err(invalid(
                "horizon",
                format!(
                    "need horizon ({}) >= 100 · renorm_interval ({})",
                    self.horizon, self.renorm_interval
                ),
            ));
        }
        if !(self.neighbor_offset > 0.0 && self.neighbor_offset <= 1e-5) {
            return Err(invalid(
                "neighbor_offset",
                format!("{} must lie in (0, 1e-5]", self.neighbor_offset),
            ));
        }
        if !(self.dt > 0.0 && self.dt <= self.renorm_interval) {
            return Err(invalid("dt", format!("{} must lie in (0, renorm_interval]", self.dt)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovResult {
    /// Largest exponent estimate, in inverse time units.
    pub lambda: f64,
    pub horizon: f64,
    pub renorm_interval: f64,
    pub neighbor_offset: f64,
    /// `|λ(T) - λ(3T/4)|`.
    pub last_quarter_drift: f64,
    pub converged: bool,
}

/// Unit tangent vector at `p`, chosen deterministically.
fn tangent(p: [f64; 3]) -> [f64; 3] {
    // ẑ × p, or x̂ × p near the poles
    let (mut v, rho) = ([-p[1], p[0], 0.0], p[0].hypot(p[1]));
    if rho < 0.1 {
        v = [0.0, -p[2], p[1]];
    }
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

pub fn lyapunov_exponent(
    initial: BlochState,
    params: ModelParams,
    settings: &LyapunovSettings,
) -> Result<LyapunovResult> {
    settings.validate()?;
    let plan = SamplingPlan::new(settings.horizon, settings.dt, settings.renorm_interval)?;
    let field = LmgField::from(&params);
    let mut stepper = SphereStepper::new(&field, 0.0, plan.h);

    let mut a = initial.to_array();
    let u = tangent(a);
    let mut b = super::project([
        a[0] + settings.neighbor_offset * u[0],
        a[1] + settings.neighbor_offset * u[1],
        a[2] + settings.neighbor_offset * u[2],
    ]);
    let d0 = dist(&a, &b);

    let events = plan.samples;
    let quarter_mark = (3 * events) / 4;
    let mut log_sum = 0.0;
    let mut at_three_quarters = 0.0;
    for k in 1..=events {
        for _ in 0..plan.substeps {
            stepper.advance_pair(&mut a, &mut b)?;
        }
        let d = dist(&a, &b);
        log_sum += (d / d0).ln();
        let scale = d0 / d;
        b = super::project([
            a[0] + (b[0] - a[0]) * scale,
            a[1] + (b[1] - a[1]) * scale,
            a[2] + (b[2] - a[2]) * scale,
        ]);
        if k == quarter_mark {
            at_three_quarters = log_sum / (k as f64 * plan.sample_dt);
        }
    }
    let lambda = log_sum / settings.horizon;
    let drift = (lambda - at_three_quarters).abs();
    Ok(LyapunovResult {
        lambda,
        horizon: settings.horizon,
        renorm_interval: plan.sample_dt,
        neighbor_offset: settings.neighbor_offset,
        last_quarter_drift: drift,
        converged: drift < CONVERGENCE_DRIFT,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn rejects_bad_settings() {
        let p = ModelParams::clean(0.5, 2).unwrap();
        let init = BlochState::from_angles(1.0, 0.0).unwrap();
        let short = LyapunovSettings {
            horizon: 50.0,
            ..Default::default()
        };
        assert!(lyapunov_exponent(init, p, &short).is_err());
        let wide = LyapunovSettings {
            neighbor_offset: 1e-3,
            ..Default::default()
        };
        assert!(lyapunov_exponent(init, p, &wide).is_err());
    }

    #[test]
    fn integrable_flow_has_vanishing_exponent() {
        let settings = LyapunovSettings {
            horizon: 1000.0,
            dt: 1e-2,
            ..Default::default()
        };
        for s in [0.3, 0.8] {
            let p = ModelParams::clean(s, 2).unwrap();
            let init = BlochState::from_angles(FRAC_PI_2, 0.0).unwrap();
            let r = lyapunov_exponent(init, p, &settings).unwrap();
            assert!(r.lambda.abs() < 0.01, "s = {s}: {}", r.lambda);
        }
    }

    #[test]
    fn tangent_is_orthogonal_unit() {
        for p in [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.6, 0.0, 0.8], [0.0, -1.0, 0.0]] {
            let t = tangent(p);
            let dot: f64 = t.iter().zip(&p).map(|(a, b)| a * b).sum();
            let n: f64 = t.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(dot.abs() < 1e-15 && (n - 1.0).abs() < 1e-15);
        }
    }
}

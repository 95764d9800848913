//! Mean-field dynamics on the unit sphere.
//!
//! The flow is integrated with fixed-step classical Runge-Kutta and the state
//! is projected back onto the sphere after every step. Fixed steps keep every
//! sweep cell a pure function of its inputs.

mod chaos;
mod lyapunov;

pub use chaos::{
    chaos_map, chaotic_fraction, fibonacci_sphere, poincare_section, FractionResult, SectionPoint,
};
pub use lyapunov::{lyapunov_exponent, LyapunovResult, LyapunovSettings};

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{invalid, Error, Result};
use crate::model::{BlochState, ModelParams};
use crate::numeric::simpson_uniform;

/// Right-hand side of the unperturbed mean-field equations:
///
/// ```text
/// dX/dt = (1-s) Y
/// dY/dt = -(1-s) X + s X Z
/// dZ/dt = -s X Y
/// ```
pub fn lmg_flow(state: &BlochState, s: f64) -> [f64; 3] {
    rate(state.to_array(), s, 0.0)
}

/// Mean-field equations with the `-ε0 cos(ωt) J_y` drive, which rotates the
/// spin about `y`: `dX/dt += -ε0 cos(ωt) Z`, `dZ/dt += ε0 cos(ωt) X`.
pub fn driven_flow(state: &BlochState, s: f64, eps0: f64, omega: f64, t: f64) -> [f64; 3] {
    let c = if eps0 == 0.0 {
        0.0
    } else {
        eps0 * (omega * t).cos()
    };
    rate(state.to_array(), s, c)
}

#[inline(always)]
fn rate(p: [f64; 3], s: f64, drive: f64) -> [f64; 3] {
    let [x, y, z] = p;
    let a = 1.0 - s;
    [
        a * y - drive * z,
        -a * x + s * x * z,
        -s * x * y + drive * x,
    ]
}

/// A vector field on the sphere whose time dependence enters through one
/// scalar coefficient, so Runge-Kutta stages can share its evaluations.
pub trait SphereField: Sync {
    fn coefficient(&self, t: f64) -> f64;
    fn rate(&self, p: [f64; 3], coefficient: f64) -> [f64; 3];
}

/// The (driven) LMG mean-field vector field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmgField {
    pub s: f64,
    pub eps0: f64,
    pub omega: f64,
}

impl From<&ModelParams> for LmgField {
    fn from(p: &ModelParams) -> Self {
        Self {
            s: p.s(),
            eps0: p.eps0(),
            omega: p.omega(),
        }
    }
}

impl SphereField for LmgField {
    #[inline(always)]
    fn coefficient(&self, t: f64) -> f64 {
        if self.eps0 == 0.0 {
            0.0
        } else {
            self.eps0 * (self.omega * t).cos()
        }
    }

    #[inline(always)]
    fn rate(&self, p: [f64; 3], c: f64) -> [f64; 3] {
        rate(p, self.s, c)
    }
}

#[inline(always)]
fn axpy(p: [f64; 3], h: f64, k: [f64; 3]) -> [f64; 3] {
    [p[0] + h * k[0], p[1] + h * k[1], p[2] + h * k[2]]
}

/// One RK4 step given the field coefficient at `t`, `t + h/2` and `t + h`.
/// Returns the raw (un-normalized) update.
#[inline(always)]
pub(crate) fn rk4_raw<F: SphereField>(f: &F, p: [f64; 3], h: f64, c: [f64; 3]) -> [f64; 3] {
    let k1 = f.rate(p, c[0]);
    let k2 = f.rate(axpy(p, 0.5 * h, k1), c[1]);
    let k3 = f.rate(axpy(p, 0.5 * h, k2), c[1]);
    let k4 = f.rate(axpy(p, h, k3), c[2]);
    let w = h / 6.0;
    [
        p[0] + w * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        p[1] + w * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        p[2] + w * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    ]
}

#[inline(always)]
pub(crate) fn project(p: [f64; 3]) -> [f64; 3] {
    let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    [p[0] / r, p[1] / r, p[2] / r]
}

#[inline(always)]
pub(crate) fn finite(p: &[f64; 3]) -> bool {
    p.iter().all(|v| v.is_finite())
}

/// Fixed-step RK4 stepper with projection onto the sphere.
///
/// Times are computed as `t0 + k h` rather than accumulated.
pub struct SphereStepper<'a, F: SphereField> {
    field: &'a F,
    h: f64,
    t0: f64,
    step: u64,
    c_start: f64,
}

impl<'a, F: SphereField> SphereStepper<'a, F> {
    pub fn new(field: &'a F, t0: f64, h: f64) -> Self {
        Self {
            field,
            h,
            t0,
            step: 0,
            c_start: field.coefficient(t0),
        }
    }

    pub fn time(&self) -> f64 {
        self.t0 + self.h * self.step as f64
    }

    /// Field coefficients for the next step; advances the clock.
    #[inline(always)]
    fn next_coefficients(&mut self) -> [f64; 3] {
        let t = self.time();
        let mid = self.field.coefficient(t + 0.5 * self.h);
        self.step += 1;
        let end = self.field.coefficient(self.time());
        let c = [self.c_start, mid, end];
        self.c_start = end;
        c
    }

    /// Advances one state by one step.
    #[inline]
    pub fn advance(&mut self, p: &mut [f64; 3]) -> Result<()> {
        let c = self.next_coefficients();
        let q = project(rk4_raw(self.field, *p, self.h, c));
        if !finite(&q) {
            return Err(Error::Diverged { time: self.time() });
        }
        *p = q;
        Ok(())
    }

    /// Advances two states in lockstep under the same field coefficients.
    #[inline]
    pub fn advance_pair(&mut self, a: &mut [f64; 3], b: &mut [f64; 3]) -> Result<()> {
        let c = self.next_coefficients();
        let qa = project(rk4_raw(self.field, *a, self.h, c));
        let qb = project(rk4_raw(self.field, *b, self.h, c));
        if !finite(&qa) || !finite(&qb) {
            return Err(Error::Diverged { time: self.time() });
        }
        *a = qa;
        *b = qb;
        Ok(())
    }
}

/// Sampled mean-field trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<BlochState>,
    pub params: ModelParams,
    pub sample_dt: f64,
}

impl ClassicalTrajectory {
    pub fn duration(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0) - self.times.first().copied().unwrap_or(0.0)
    }

    pub fn last(&self) -> &BlochState {
        self.states.last().expect("trajectories hold at least the initial state")
    }
}

/// Uniform sampling plan: `samples` intervals of `sample_dt`, each split into
/// `substeps` integrator steps of length `h <= dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SamplingPlan {
    pub samples: usize,
    pub sample_dt: f64,
    pub substeps: usize,
    pub h: f64,
}

impl SamplingPlan {
    /// Snaps `sample_dt` so that it tiles `[0, T]` and the step so that it
    /// tiles one sampling interval.
    pub fn new(t_final: f64, dt: f64, sample_dt: f64) -> Result<Self> {
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(invalid("t_final", format!("{t_final} must be > 0")));
        }
        if !(dt > 0.0 && dt <= sample_dt && sample_dt <= t_final) {
            return Err(invalid(
                "dt",
                format!("need 0 < dt ({dt}) <= sample_dt ({sample_dt}) <= T ({t_final})"),
            ));
        }
        let samples = ((t_final / sample_dt).round() as usize).max(1);
        let sample_dt = t_final / samples as f64;
        let substeps = ((sample_dt / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        Ok(Self {
            samples,
            sample_dt,
            substeps,
            h: sample_dt / substeps as f64,
        })
    }
}

fn check_driven_step(params: &ModelParams, dt: f64) -> Result<()> {
    if params.is_driven() {
        let bound = 0.01f64.min(0.1 * TAU / params.omega());
        if dt > bound * (1.0 + 1e-12) {
            return Err(invalid(
                "dt",
                format!("driven runs need dt <= min(0.01, 0.1·2π/ω) = {bound}, got {dt}"),
            ));
        }
    }
    Ok(())
}

/// Integrates the (driven) mean-field flow over `[0, T]`, sampling every
/// `sample_dt`.
pub fn integrate(
    initial: BlochState,
    params: ModelParams,
    t_final: f64,
    dt: f64,
    sample_dt: f64,
) -> Result<ClassicalTrajectory> {
    check_driven_step(&params, dt)?;
    let plan = SamplingPlan::new(t_final, dt, sample_dt)?;
    let field = LmgField::from(&params);
    let mut stepper = SphereStepper::new(&field, 0.0, plan.h);
    let mut p = initial.to_array();
    let mut times = Vec::with_capacity(plan.samples + 1);
    let mut states = Vec::with_capacity(plan.samples + 1);
    times.push(0.0);
    states.push(initial);
    for k in 1..=plan.samples {
        for _ in 0..plan.substeps {
            stepper.advance(&mut p)?;
        }
        times.push(k as f64 * plan.sample_dt);
        states.push(BlochState::from_array_unchecked(p));
    }
    Ok(ClassicalTrajectory {
        times,
        states,
        params,
        sample_dt: plan.sample_dt,
    })
}

/// `(1/T) ∫ X dt` over the trajectory by composite Simpson.
pub fn time_average_x(traj: &ClassicalTrajectory) -> Result<f64> {
    if traj.states.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "time average needs at least 3 samples, got {}",
            traj.states.len()
        )));
    }
    let xs: Vec<f64> = traj.states.iter().map(|s| s.x()).collect();
    let integral = simpson_uniform(&xs, traj.sample_dt)?;
    Ok((integral / traj.duration()).clamp(-1.0, 1.0))
}

/// Integrates and averages `X` without storing the trajectory.
pub fn time_averaged_x(
    initial: BlochState,
    params: ModelParams,
    t_final: f64,
    dt: f64,
    sample_dt: f64,
) -> Result<f64> {
    check_driven_step(&params, dt)?;
    let plan = SamplingPlan::new(t_final, dt, sample_dt)?;
    let field = LmgField::from(&params);
    let mut stepper = SphereStepper::new(&field, 0.0, plan.h);
    let mut p = initial.to_array();
    let mut xs = Vec::with_capacity(plan.samples + 1);
    xs.push(p[0]);
    for _ in 0..plan.samples {
        for _ in 0..plan.substeps {
            stepper.advance(&mut p)?;
        }
        xs.push(p[0]);
    }
    let integral = simpson_uniform(&xs, plan.sample_dt)?;
    Ok((integral / t_final).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::classical_energy;
    use std::f64::consts::FRAC_PI_2;

    fn close(a: [f64; 3], b: [f64; 3], tol: f64) -> bool {
        a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn flow_examples() {
        let north = BlochState::from_angles(0.0, 0.0).unwrap();
        for s in [0.0, 0.4, 1.0] {
            assert_eq!(lmg_flow(&north, s), [0.0, 0.0, 0.0]);
        }
        let px = BlochState::from_cartesian(1.0, 0.0, 0.0).unwrap();
        assert_eq!(lmg_flow(&px, 1.0), [0.0, 0.0, 0.0]);
        let py = BlochState::from_cartesian(0.0, 1.0, 0.0).unwrap();
        assert_eq!(lmg_flow(&py, 0.5), [0.5, 0.0, 0.0]);
    }

    #[test]
    fn driven_flow_examples() {
        let st = BlochState::from_angles(1.1, 0.4).unwrap();
        assert_eq!(driven_flow(&st, 0.6, 0.0, 3.0, 2.0), lmg_flow(&st, 0.6));
        let north = BlochState::from_angles(0.0, 0.0).unwrap();
        assert!(close(driven_flow(&north, 0.7, 0.05, 2.3, 0.0), [-0.05, 0.0, 0.0], 1e-17));
        let px = BlochState::from_cartesian(1.0, 0.0, 0.0).unwrap();
        let omega = 2.0;
        let t = FRAC_PI_2 / omega;
        assert!(close(driven_flow(&px, 1.0, 0.05, omega, t), [0.0; 3], 1e-17));
    }

    #[test]
    fn flow_is_tangent() {
        for &(th, ph, s) in &[(0.3, 0.1, 0.2), (1.2, -2.0, 0.7), (2.9, 3.0, 0.95)] {
            let st = BlochState::from_angles(th, ph).unwrap();
            let f = driven_flow(&st, s, 0.05, 1.0, 0.37);
            let dot = st.x() * f[0] + st.y() * f[1] + st.z() * f[2];
            assert!(dot.abs() < 1e-16);
        }
    }

    #[test]
    fn precession_period_at_s0() {
        let p = ModelParams::clean(0.0, 2).unwrap();
        let init = BlochState::from_angles(FRAC_PI_2, 0.0).unwrap();
        let tr = integrate(init, p, TAU, 1e-3, 1e-2).unwrap();
        assert!(tr.last().distance(&init) < 1e-8);
        let mid = &tr.states[tr.states.len() / 2];
        assert!((mid.x() + 1.0).abs() < 1e-8);
    }

    #[test]
    fn fixed_point_at_s1() {
        let p = ModelParams::clean(1.0, 2).unwrap();
        let init = BlochState::from_angles(FRAC_PI_2, 0.0).unwrap();
        let tr = integrate(init, p, 50.0, 1e-3, 0.1).unwrap();
        assert!(tr.states.iter().all(|s| s.distance(&init) < 1e-8));
        assert!((time_average_x(&tr).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn libration_stays_in_right_well() {
        let p = ModelParams::clean(0.8, 2).unwrap();
        let init = BlochState::from_angles(FRAC_PI_2, 0.0).unwrap();
        let tr = integrate(init, p, 200.0, 1e-3, 0.01).unwrap();
        let min_x = tr.states.iter().map(|s| s.x()).fold(f64::INFINITY, f64::min);
        assert!(min_x > 0.0, "min X = {min_x}");
    }

    #[test]
    fn paramagnetic_average_vanishes() {
        let p = ModelParams::clean(0.3, 2).unwrap();
        let init = BlochState::from_angles(FRAC_PI_2, 0.0).unwrap();
        let v = time_averaged_x(init, p, 1000.0, 1e-2, 0.05).unwrap();
        assert!(v.abs() < 0.01, "{v}");
    }

    #[test]
    fn streaming_and_stored_averages_agree() {
        let p = ModelParams::clean(0.75, 2).unwrap();
        let init = BlochState::from_angles(1.0, 0.2).unwrap();
        let tr = integrate(init, p, 40.0, 1e-3, 0.02).unwrap();
        let a = time_average_x(&tr).unwrap();
        let b = time_averaged_x(init, p, 40.0, 1e-3, 0.02).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unit_norm_and_energy_short_run() {
        let p = ModelParams::clean(0.5, 2).unwrap();
        let init = BlochState::from_angles(2.0, 1.0).unwrap();
        let e0 = classical_energy(&init, 0.5);
        let tr = integrate(init, p, 100.0, 1e-3, 0.5).unwrap();
        for s in &tr.states {
            assert!((s.norm() - 1.0).abs() < 1e-8);
            assert!((classical_energy(s, 0.5) - e0).abs() < 1e-10);
        }
    }

    #[test]
    fn driven_step_bound_enforced() {
        let p = ModelParams::new(0.5, 2, 0.05, 1.0).unwrap();
        let init = BlochState::from_angles(1.0, 0.0).unwrap();
        assert!(integrate(init, p, 10.0, 0.02, 0.1).is_err());
        assert!(integrate(init, p, 10.0, 0.01, 0.1).is_ok());
        let fast = ModelParams::new(0.5, 2, 0.05, 200.0).unwrap();
        assert!(integrate(init, fast, 1.0, 0.01, 0.1).is_err());
    }

    #[test]
    fn plan_snaps_to_uniform_grid() {
        let plan = SamplingPlan::new(1.0, 0.003, 0.1).unwrap();
        assert_eq!(plan.samples, 10);
        assert!(plan.h <= 0.003);
        assert!((plan.h * plan.substeps as f64 - 0.1).abs() < 1e-15);
        assert!(SamplingPlan::new(1.0, 0.2, 0.1).is_err());
    }
}

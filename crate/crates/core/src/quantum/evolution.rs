//! Coherent states, Schrödinger propagation and time-averaged `⟨J_x⟩/J`.

use std::f64::consts::{PI, TAU};

use super::hamiltonian::{eigendecompose, HamiltonianSpec, Spectrum};
use super::operators::{jx_expectation, C64};
use crate::classical::SamplingPlan;
use crate::error::{invalid, Error, Result};
use crate::model::{dicke_dim, DickeState};
use crate::numeric::simpson_uniform;

/// Norm drift that aborts driven propagation.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;

/// Largest accepted `dt · ‖H‖_max` for driven stepping.
pub const MAX_PHASE_PER_STEP: f64 = 2.0;

fn xlog(n: f64, y: f64) -> f64 {
    if n == 0.0 {
        0.0
    } else {
        n * y.ln()
    }
}

/// Spin-coherent state pointing along `(θ, φ)`, `θ` from `+z`.
///
/// `c_m = √C(2J, J+m) cos(θ/2)^{J+m} sin(θ/2)^{J-m} e^{i(J-m)φ}`, so that
/// `⟨J⟩ = J (sinθ cosφ, sinθ sinφ, cosθ)`.
pub fn coherent_state(j: f64, theta: f64, phi: f64) -> Result<DickeState> {
    let dim = dicke_dim(j)?;
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::Domain(format!("θ = {theta} outside [0, π]")));
    }
    if !phi.is_finite() {
        return Err(Error::Domain(format!("φ = {phi} is not finite")));
    }
    let n = dim - 1;
    let (c, s) = ((0.5 * theta).cos(), (0.5 * theta).sin());
    let mut log_binom = 0.0;
    let mut amps = Vec::with_capacity(dim);
    for k in 0..=n {
        if k > 0 {
            log_binom += ((n - k + 1) as f64 / k as f64).ln();
        }
        let down = (n - k) as f64;
        let mag = (0.5 * log_binom + xlog(k as f64, c) + xlog(down, s)).exp();
        amps.push(C64::from_polar(mag, down * phi));
    }
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    DickeState::new(amps)
}

fn require_autonomous(h: &HamiltonianSpec) -> Result<()> {
    if h.params().is_driven() {
        return Err(invalid("eps0", "autonomous evolution requires eps0 = 0"));
    }
    Ok(())
}

fn check_state(state: &DickeState, h: &HamiltonianSpec) -> Result<()> {
    if state.dim() != h.dim() {
        return Err(invalid(
            "state",
            format!("dimension {} does not match Hamiltonian dimension {}", state.dim(), h.dim()),
        ));
    }
    Ok(())
}

/// `e^{-iH_0 t}|ψ⟩` with a precomputed spectrum.
pub fn evolve_with_spectrum(state: &DickeState, spectrum: &Spectrum, t: f64) -> DickeState {
    let mut coeffs = spectrum.project(state.amplitudes());
    for (blk, c) in spectrum.blocks.iter().zip(coeffs.iter_mut()) {
        for (cc, &e) in c.iter_mut().zip(&blk.energies) {
            *cc *= C64::from_polar(1.0, -e * t);
        }
    }
    DickeState::from_vec_unchecked(spectrum.assemble(&coeffs))
}

/// `e^{-iH_0 t}|ψ⟩` by phases in the eigenbasis.
pub fn evolve_autonomous(state: &DickeState, h: &HamiltonianSpec, t: f64) -> Result<DickeState> {
    require_autonomous(h)?;
    check_state(state, h)?;
    let spectrum = eigendecompose(h)?;
    Ok(evolve_with_spectrum(state, &spectrum, t))
}

/// Applies `exp(-iτ(H_0 + f D))` with `D = -J_y` by a truncated Taylor
/// series around the centre of the Gershgorin interval.
pub(crate) struct TaylorStepper<'a> {
    h: &'a HamiltonianSpec,
    shift: f64,
    radius: f64,
    term: Vec<C64>,
    next: Vec<C64>,
    acc: Vec<C64>,
}

impl<'a> TaylorStepper<'a> {
    const TERM_TOL: f64 = 1e-16;
    const MAX_TERMS: usize = 60;

    pub fn new(h: &'a HamiltonianSpec) -> Self {
        let (lo, hi) = h.spectral_interval();
        let shift = 0.5 * (lo + hi);
        let d = h.dim();
        Self {
            h,
            shift,
            radius: 0.5 * (hi - lo),
            term: vec![C64::new(0.0, 0.0); d],
            next: vec![C64::new(0.0, 0.0); d],
            acc: vec![C64::new(0.0, 0.0); d],
        }
    }

    /// `out = -i·scale·(H - shift) x`.
    fn apply(h: &HamiltonianSpec, shift: f64, x: &[C64], out: &mut [C64], f: f64, scale: f64) {
        let diag = h.diag();
        let off2 = h.off2();
        let lad = h.ladder();
        let d = x.len();
        let half_f = 0.5 * f;
        for k in 0..d {
            let mut y = x[k] * (diag[k] - shift);
            if k + 2 < d {
                y += x[k + 2] * off2[k];
            }
            if k >= 2 {
                y += x[k - 2] * off2[k - 2];
            }
            // drive: i f/2 (a_{k-1} x_{k-1} - a_k x_{k+1})
            let mut g = C64::new(0.0, 0.0);
            if k >= 1 {
                g += x[k - 1] * lad[k - 1];
            }
            if k + 1 < d {
                g -= x[k + 1] * lad[k];
            }
            y += C64::new(-g.im * half_f, g.re * half_f);
            // multiply by -i·scale
            out[k] = C64::new(y.im * scale, -y.re * scale);
        }
    }

    fn exp_chunk(&mut self, psi: &mut [C64], f: f64, tau: f64) -> Result<()> {
        self.term.copy_from_slice(psi);
        self.acc.copy_from_slice(psi);
        let mut converged = false;
        for n in 1..=Self::MAX_TERMS {
            Self::apply(self.h, self.shift, &self.term, &mut self.next, f, tau / n as f64);
            std::mem::swap(&mut self.term, &mut self.next);
            let mut size = 0.0;
            for (a, t) in self.acc.iter_mut().zip(&self.term) {
                *a += t;
                size += t.norm_sqr();
            }
            if size < Self::TERM_TOL * Self::TERM_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NumericSolve(format!(
                "Taylor series did not converge in {} terms (τ = {tau})",
                Self::MAX_TERMS
            )));
        }
        let phase = C64::from_polar(1.0, -tau * self.shift);
        for (p, a) in psi.iter_mut().zip(&self.acc) {
            *p = a * phase;
        }
        Ok(())
    }

    /// One step of length `tau` with the drive coefficient `f` held fixed.
    pub fn step(&mut self, psi: &mut [C64], f: f64, tau: f64) -> Result<()> {
        let chunks = (tau.abs() * self.radius).ceil().max(1.0) as usize;
        let sub = tau / chunks as f64;
        for _ in 0..chunks {
            self.exp_chunk(psi, f, sub)?;
        }
        Ok(())
    }
}

fn norm_of(psi: &[C64]) -> f64 {
    psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖H‖_max ≈ (1-s)J + sJ/2 + ε0 J`.
pub fn hamiltonian_scale(h: &HamiltonianSpec) -> f64 {
    let p = h.params();
    let j = p.j();
    (1.0 - p.s()) * j + 0.5 * p.s() * j + p.eps0().abs() * j
}

/// Step bound for driven propagation: `dt ≤ 0.05 · 2π/ω` and
/// `dt · ‖H‖_max ≤ MAX_PHASE_PER_STEP`.
pub fn check_quantum_step(h: &HamiltonianSpec, dt: f64) -> Result<()> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(invalid("dt", format!("{dt} must be > 0")));
    }
    let omega = h.params().omega();
    if h.params().is_driven() && omega > 0.0 && dt > 0.05 * TAU / omega {
        return Err(invalid("dt", format!("{dt} exceeds 0.05 · 2π/ω = {}", 0.05 * TAU / omega)));
    }
    let scale = hamiltonian_scale(h);
    if dt * scale > MAX_PHASE_PER_STEP {
        return Err(invalid(
            "dt",
            format!("dt · ‖H‖ = {} exceeds {MAX_PHASE_PER_STEP}", dt * scale),
        ));
    }
    Ok(())
}

/// One fourth-order commutator-free Magnus step from `t` to `t + h`:
/// `exp(-ih(α₁H₁ + α₂H₂)) · exp(-ih(α₂H₁ + α₁H₂))` with `H_i` at the two
/// Gauss nodes. Since `H(t) = H_0 + f(t)D`, each factor is
/// `exp(-i(h/2)(H_0 + f̃ D))` with `f̃ = 2(α f₁ + β f₂)`.
pub(crate) fn magnus_step(
    stepper: &mut TaylorStepper<'_>,
    psi: &mut [C64],
    h: &HamiltonianSpec,
    t: f64,
    step: f64,
) -> Result<()> {
    let p = h.params();
    if !p.is_driven() {
        return stepper.step(psi, 0.0, step);
    }
    let r3 = 3f64.sqrt();
    let (a1, a2) = ((3.0 - 2.0 * r3) / 12.0, (3.0 + 2.0 * r3) / 12.0);
    let f1 = p.drive(t + (0.5 - r3 / 6.0) * step);
    let f2 = p.drive(t + (0.5 + r3 / 6.0) * step);
    stepper.step(psi, 2.0 * (a2 * f1 + a1 * f2), 0.5 * step)?;
    stepper.step(psi, 2.0 * (a1 * f1 + a2 * f2), 0.5 * step)
}

/// Propagates from `t_span.0` to `t_span.1` with fourth-order Magnus steps;
/// the step is shrunk to divide the span evenly.
pub fn evolve_driven(
    state: &DickeState,
    h: &HamiltonianSpec,
    t_span: (f64, f64),
    dt: f64,
) -> Result<DickeState> {
    check_state(state, h)?;
    check_quantum_step(h, dt)?;
    let (t0, t1) = t_span;
    if !(t1 >= t0) {
        return Err(invalid("t_span", format!("end {t1} precedes start {t0}")));
    }
    let span = t1 - t0;
    let steps = (span / dt).ceil() as usize;
    let mut psi = state.amplitudes().to_vec();
    if steps > 0 {
        let step = span / steps as f64;
        let mut stepper = TaylorStepper::new(h);
        for k in 0..steps {
            magnus_step(&mut stepper, &mut psi, h, t0 + k as f64 * step, step)?;
        }
        let drift = (norm_of(&psi) - 1.0).abs();
        if drift > NORM_DRIFT_LIMIT {
            return Err(Error::StepSize { drift, dt: step });
        }
    }
    Ok(DickeState::from_vec_unchecked(psi))
}

fn check_averaging(t_avg: f64, sample_dt: f64) -> Result<()> {
    if !(sample_dt > 0.0) || !(t_avg >= 100.0 * sample_dt) {
        return Err(invalid(
            "t_avg",
            format!("need T ({t_avg}) >= 100 · sample_dt ({sample_dt})"),
        ));
    }
    Ok(())
}

/// Autonomous `X̄` from a precomputed spectrum by eigenbasis phase sums:
/// `⟨J_x⟩(t) = 2 Re Σ_{a∈even, b∈odd} c̄_a c_b A_ab e^{i(E_a - E_b)t}`.
pub fn autonomous_average_x(
    initial: &DickeState,
    spectrum: &Spectrum,
    ladder: &[f64],
    t_avg: f64,
    sample_dt: f64,
) -> Result<f64> {
    check_averaging(t_avg, sample_dt)?;
    let samples = (t_avg / sample_dt).round() as usize;
    let h = t_avg / samples as f64;
    let coeffs = spectrum.project(initial.amplitudes());
    let [even, odd] = &spectrum.blocks;

    // B = Jx_{even,odd} · U_odd, then A = U_even^T · B (row-major)
    let (de, d_o) = (even.indices.len(), odd.indices.len());
    let mut position = vec![usize::MAX; spectrum.len()];
    for (i, &k) in odd.indices.iter().enumerate() {
        position[k] = i;
    }
    let mut b = nalgebra::DMatrix::<f64>::zeros(de, d_o);
    for (r, &k) in even.indices.iter().enumerate() {
        for (nb, a) in [(k.wrapping_sub(1), k.checked_sub(1).map(|i| ladder[i])), (k + 1, ladder.get(k).copied())] {
            if let Some(a) = a {
                let i = position[nb];
                for c in 0..d_o {
                    b[(r, c)] += 0.5 * a * odd.vectors[(i, c)];
                }
            }
        }
    }
    let a_mat = even.vectors.transpose() * b;
    let a_rows: Vec<f64> = (0..de).flat_map(|r| (0..d_o).map(move |c| (r, c))).map(|(r, c)| a_mat[(r, c)]).collect();

    let mut values = Vec::with_capacity(samples + 1);
    let mut v_re = vec![0.0; d_o];
    let mut v_im = vec![0.0; d_o];
    for i in 0..=samples {
        let t = i as f64 * h;
        for (jdx, (c, &e)) in coeffs[1].iter().zip(&odd.energies).enumerate() {
            let v = c * C64::from_polar(1.0, -e * t);
            v_re[jdx] = v.re;
            v_im[jdx] = v.im;
        }
        let mut total = 0.0;
        for (r, (c, &e)) in coeffs[0].iter().zip(&even.energies).enumerate() {
            let row = &a_rows[r * d_o..(r + 1) * d_o];
            let (mut wr, mut wi) = (0.0, 0.0);
            for ((&a, &x), &y) in row.iter().zip(&v_re).zip(&v_im) {
                wr += a * x;
                wi += a * y;
            }
            let u = (c * C64::from_polar(1.0, -e * t)).conj();
            total += u.re * wr - u.im * wi;
        }
        values.push(2.0 * total);
    }
    let integral = simpson_uniform(&values, h)?;
    Ok(integral / t_avg / initial.j())
}

/// Driven `X̄` by Magnus stepping, sampling `⟨J_x⟩` every `sample_dt`.
pub fn driven_average_x(
    initial: &DickeState,
    h: &HamiltonianSpec,
    t_avg: f64,
    sample_dt: f64,
    dt: f64,
) -> Result<f64> {
    check_state(initial, h)?;
    check_averaging(t_avg, sample_dt)?;
    check_quantum_step(h, dt)?;
    let plan = SamplingPlan::new(t_avg, dt, sample_dt)?;
    let ladder = h.ladder();
    let mut psi = initial.amplitudes().to_vec();
    let mut stepper = TaylorStepper::new(h);
    let mut values = Vec::with_capacity(plan.samples + 1);
    values.push(jx_expectation(&psi, ladder));
    let mut step_index = 0usize;
    for _ in 0..plan.samples {
        for _ in 0..plan.substeps {
            magnus_step(&mut stepper, &mut psi, h, step_index as f64 * plan.h, plan.h)?;
            step_index += 1;
        }
        values.push(jx_expectation(&psi, ladder));
    }
    let drift = (norm_of(&psi) - 1.0).abs();
    if drift > NORM_DRIFT_LIMIT {
        return Err(Error::StepSize { drift, dt: plan.h });
    }
    let integral = simpson_uniform(&values, plan.sample_dt)?;
    Ok(integral / t_avg / initial.j())
}

/// `X̄ = (1/T)∫⟨J_x⟩dt / J`; eigenbasis phase sums when `eps0 = 0`,
/// Magnus stepping with step `dt` otherwise.
pub fn time_averaged_magnetization(
    initial: &DickeState,
    h: &HamiltonianSpec,
    t_avg: f64,
    sample_dt: f64,
    dt: f64,
) -> Result<f64> {
    check_state(initial, h)?;
    let xbar = if h.params().is_driven() {
        driven_average_x(initial, h, t_avg, sample_dt, dt)?
    } else {
        let spectrum = eigendecompose(h)?;
        autonomous_average_x(initial, &spectrum, h.ladder(), t_avg, sample_dt)?
    };
    Ok(xbar.clamp(-1.0, 1.0))
}

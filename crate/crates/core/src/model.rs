//! Domain types shared by every simulation layer.
//!
//! Units: ħ = 1 and the Hamiltonian is `H(s) = -(1-s) J_z - (s/N) J_x²`, so
//! times are measured in inverse units of the scaled energy. With `J = N/2`
//! the mean-field energy per spin-length is
//!
//! ```text
//! E/J = -(1-s) Z - (s/2) X²
//! ```
//!
//! because `(s/N) J_x² / J = s (J/N) X² = (s/2) X²`. This is the generator of
//! the flow in [`crate::classical::lmg_flow`]; every module uses this
//! normalization.

use nalgebra::Complex;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{invalid, Error, Result};

/// Below this `sin θ` the azimuth is undefined and reported as zero.
pub const POLE_EPS: f64 = 1e-12;

/// GSQPT initial polar angle used in the mean-field protocol.
pub const EPS_THERMODYNAMIC: f64 = PI / 60.0;

/// GSQPT initial polar angle for `N` spins: `π/60 + 1/√N`.
pub fn eps_finite(n: usize) -> f64 {
    EPS_THERMODYNAMIC + 1.0 / (n as f64).sqrt()
}

/// Detection threshold `sin(δ/√(2J))` on `|X̄|`.
pub fn xbar_threshold(delta: f64, j: f64) -> f64 {
    (delta / (2.0 * j).sqrt()).sin()
}

/// Parameters of the (possibly driven) LMG Hamiltonian
/// `H = -(1-s) J_z - (s/N) J_x² - ε0 cos(ωt) J_y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    s: f64,
    n: usize,
    eps0: f64,
    omega: f64,
}

impl ModelParams {
    pub fn new(s: f64, n: usize, eps0: f64, omega: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&s) {
            return Err(invalid("s", format!("{s} is outside [0, 1]")));
        }
        if n < 2 || n % 2 != 0 {
            return Err(invalid("n", format!("{n} must be an even integer >= 2")));
        }
        if !(eps0 >= 0.0) || !eps0.is_finite() {
            return Err(invalid("eps0", format!("{eps0} must be finite and >= 0")));
        }
        if !omega.is_finite() || omega < 0.0 || (eps0 > 0.0 && omega <= 0.0) {
            return Err(invalid(
                "omega",
                format!("{omega} must be > 0 when the drive is on"),
            ));
        }
        Ok(Self { s, n, eps0, omega })
    }

    /// Undriven model.
    pub fn clean(s: f64, n: usize) -> Result<Self> {
        Self::new(s, n, 0.0, 1.0)
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Total spin `J = N/2`.
    pub fn j(&self) -> f64 {
        self.n as f64 / 2.0
    }

    pub fn eps0(&self) -> f64 {
        self.eps0
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn is_driven(&self) -> bool {
        self.eps0 > 0.0
    }

    pub fn with_s(&self, s: f64) -> Result<Self> {
        Self::new(s, self.n, self.eps0, self.omega)
    }

    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(self.s, n, self.eps0, self.omega)
    }

    pub fn with_eps0(&self, eps0: f64) -> Result<Self> {
        Self::new(self.s, self.n, eps0, self.omega)
    }

    pub fn with_omega(&self, omega: f64) -> Result<Self> {
        Self::new(self.s, self.n, self.eps0, omega)
    }

    /// Drive strength `ε0 cos(ωt)` multiplying `-J_y`.
    #[inline]
    pub fn drive(&self, t: f64) -> f64 {
        if self.eps0 == 0.0 {
            0.0
        } else {
            self.eps0 * (self.omega * t).cos()
        }
    }
}

/// A point on the mean-field unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochState {
    x: f64,
    y: f64,
    z: f64,
}

impl BlochState {
    /// `X = sinθ cosφ, Y = sinθ sinφ, Z = cosθ`.
    pub fn from_angles(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::Domain(format!("theta = {theta} is outside [0, π]")));
        }
        if !phi.is_finite() {
            return Err(Error::Domain(format!("phi = {phi} is not finite")));
        }
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Ok(Self {
            x: st * cp,
            y: st * sp,
            z: ct,
        })
    }

    /// Accepts a Cartesian triple that is already unit-norm within 1e-12.
    pub fn from_cartesian(x: f64, y: f64, z: f64) -> Result<Self> {
        let r2 = x * x + y * y + z * z;
        if !r2.is_finite() || (r2 - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "|(x, y, z)|² = {r2} is not unit within 1e-12"
            )));
        }
        Ok(Self { x, y, z })
    }

    /// Projects any non-zero finite vector onto the sphere.
    pub fn normalized(x: f64, y: f64, z: f64) -> Result<Self> {
        let r = (x * x + y * y + z * z).sqrt();
        if !r.is_finite() || r == 0.0 {
            return Err(Error::Domain(format!("cannot normalize ({x}, {y}, {z})")));
        }
        Ok(Self {
            x: x / r,
            y: y / r,
            z: z / r,
        })
    }

    pub(crate) fn from_array_unchecked(v: [f64; 3]) -> Self {
        Self {
            x: v[0],
            y: v[1],
            z: v[2],
        }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Polar angle in `[0, π]`.
    pub fn theta(&self) -> f64 {
        self.z.clamp(-1.0, 1.0).acos()
    }

    /// Azimuth in `(-π, π]`, zero at the poles.
    pub fn phi(&self) -> f64 {
        let rho = self.x.hypot(self.y);
        if rho < POLE_EPS {
            return 0.0;
        }
        let p = self.y.atan2(self.x);
        if p <= -PI {
            PI
        } else {
            p
        }
    }

    /// Parity image `(X, Y, Z) -> (-X, -Y, Z)`.
    pub fn parity_mirror(&self) -> Self {
        Self {
            x: -self.x,
            y: -self.y,
            z: self.z,
        }
    }

    pub fn distance(&self, other: &Self) -> f64 {
        let d = [self.x - other.x, self.y - other.y, self.z - other.z];
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }
}

/// Mean-field energy per spin length, `E/J = -(1-s) Z - (s/2) X²`.
pub fn classical_energy(state: &BlochState, s: f64) -> f64 {
    -(1.0 - s) * state.z - 0.5 * s * state.x * state.x
}

/// Amplitudes over the Dicke states `|J, m⟩`, `m = -J, …, +J` (ascending).
#[derive(Debug, Clone, PartialEq)]
pub struct DickeState {
    amplitudes: Vec<Complex<f64>>,
}

impl DickeState {
    pub const NORM_TOL: f64 = 1e-10;

    pub fn new(amplitudes: Vec<Complex<f64>>) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(Error::Domain("a Dicke state needs 2J+1 >= 2 amplitudes".into()));
        }
        let norm2: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if !norm2.is_finite() || (norm2 - 1.0).abs() > Self::NORM_TOL {
            return Err(Error::Domain(format!(
                "state norm² = {norm2} differs from 1 by more than {}",
                Self::NORM_TOL
            )));
        }
        Ok(Self { amplitudes })
    }

    pub(crate) fn from_vec_unchecked(amplitudes: Vec<Complex<f64>>) -> Self {
        Self { amplitudes }
    }

    /// Basis state `|J, m⟩`.
    pub fn basis(j: f64, m: f64) -> Result<Self> {
        let dim = dicke_dim(j)?;
        let k = m + j;
        if k < 0.0 || k > 2.0 * j || k.fract() != 0.0 {
            return Err(Error::Domain(format!("m = {m} is not a level of J = {j}")));
        }
        let mut amps = vec![Complex::new(0.0, 0.0); dim];
        amps[k as usize] = Complex::new(1.0, 0.0);
        Ok(Self { amplitudes: amps })
    }

    pub fn amplitudes(&self) -> &[Complex<f64>] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex<f64>> {
        self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// Total spin `J = (dim - 1)/2`.
    pub fn j(&self) -> f64 {
        (self.amplitudes.len() - 1) as f64 / 2.0
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Euclidean distance between amplitude vectors.
    pub fn distance(&self, other: &Self) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Hilbert-space dimension `2J + 1`, checking that `2J` is a positive integer.
pub fn dicke_dim(j: f64) -> Result<usize> {
    let two_j = 2.0 * j;
    if !(two_j >= 1.0) || two_j.fract() != 0.0 || !two_j.is_finite() {
        return Err(Error::Domain(format!("2J = {two_j} is not a positive integer")));
    }
    Ok(two_j as usize + 1)
}

/// Initial condition family of a bifurcation protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolKind {
    Gsqpt,
    Dqpt,
    Custom { theta0: f64, phi0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Classical,
    Quantum,
}

/// Settings of one bifurcation protocol run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSpec {
    pub kind: ProtocolKind,
    pub regime: Regime,
    /// Averaging time `T`.
    pub t_avg: f64,
    /// Integrator step.
    pub dt: f64,
    /// Observable sampling interval.
    pub sample_dt: f64,
    /// Threshold parameter δ.
    pub delta: f64,
}

impl ProtocolSpec {
    pub fn new(
        kind: ProtocolKind,
        regime: Regime,
        t_avg: f64,
        dt: f64,
        sample_dt: f64,
        delta: f64,
    ) -> Result<Self> {
        let spec = Self {
            kind,
            regime,
            t_avg,
            dt,
            sample_dt,
            delta,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Classical defaults: `T = 1000`, `dt = 1e-3`, samples every `0.01`.
    pub fn classical(kind: ProtocolKind) -> Self {
        Self {
            kind,
            regime: Regime::Classical,
            t_avg: 1000.0,
            dt: 1e-3,
            sample_dt: 1e-2,
            delta: 1.0,
        }
    }

    /// Quantum defaults: `T = 200`, `dt = 1e-2` (driven runs), samples every `0.1`.
    ///
    /// `T` must exceed single-well oscillation periods yet stay below the
    /// tunnelling time of the ferromagnetic phase at the sizes of interest.
    pub fn quantum(kind: ProtocolKind) -> Self {
        Self {
            kind,
            regime: Regime::Quantum,
            t_avg: 200.0,
            dt: 1e-2,
            sample_dt: 0.1,
            delta: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_avg > 0.0) || !self.t_avg.is_finite() {
            return Err(invalid("t_avg", format!("{} must be > 0", self.t_avg)));
        }
        if !(self.dt > 0.0 && self.dt <= self.sample_dt && self.sample_dt <= self.t_avg) {
            return Err(invalid(
                "dt",
                format!(
                    "need 0 < dt ({}) <= sample_dt ({}) <= T ({})",
                    self.dt, self.sample_dt, self.t_avg
                ),
            ));
        }
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(invalid("delta", format!("{} must be > 0", self.delta)));
        }
        if let ProtocolKind::Custom { theta0, phi0 } = self.kind {
            if !(0.0..=PI).contains(&theta0) || !phi0.is_finite() {
                return Err(invalid("theta0", format!("{theta0} is outside [0, π]")));
            }
        }
        Ok(())
    }

    /// Initial `(θ0, φ0)` for this protocol at `n` spins.
    pub fn initial_angles(&self, n: usize) -> (f64, f64) {
        match (self.kind, self.regime) {
            (ProtocolKind::Gsqpt, Regime::Classical) => (EPS_THERMODYNAMIC, 0.0),
            (ProtocolKind::Gsqpt, Regime::Quantum) => (eps_finite(n), 0.0),
            (ProtocolKind::Dqpt, _) => (FRAC_PI_2, 0.0),
            (ProtocolKind::Custom { theta0, phi0 }, _) => (theta0, phi0),
        }
    }
}

/// One sample of a bifurcation curve. Failed cells carry `xbar = NaN`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub s: f64,
    pub xbar: f64,
    pub complete: bool,
}

/// Sampled map `s ↦ X̄` from one protocol run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationCurve {
    points: Vec<CurvePoint>,
    pub spec: ProtocolSpec,
    pub params: ModelParams,
}

impl BifurcationCurve {
    pub fn new(points: Vec<CurvePoint>, spec: ProtocolSpec, params: ModelParams) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InsufficientData("empty bifurcation curve".into()));
        }
        for w in points.windows(2) {
            if !(w[1].s > w[0].s) {
                return Err(invalid("s_grid", "s values must be strictly increasing"));
            }
        }
        if let Some(p) = points
            .iter()
            .find(|p| p.complete && !(p.xbar.abs() <= 1.0 + 1e-9))
        {
            return Err(Error::Domain(format!("|xbar| = {} exceeds 1 at s = {}", p.xbar, p.s)));
        }
        Ok(Self {
            points,
            spec,
            params,
        })
    }

    /// Curve built from raw `(s, xbar)` pairs, all complete.
    pub fn from_pairs(pairs: &[(f64, f64)], spec: ProtocolSpec, params: ModelParams) -> Result<Self> {
        let points = pairs
            .iter()
            .map(|&(s, xbar)| CurvePoint {
                s,
                xbar,
                complete: true,
            })
            .collect();
        Self::new(points, spec, params)
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    pub fn is_complete(&self) -> bool {
        self.points.iter().all(|p| p.complete)
    }

    pub fn s_values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.s).collect()
    }

    pub fn xbar_values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.xbar).collect()
    }

    /// X̄ at the sample whose `s` is closest to the request.
    pub fn xbar_near(&self, s: f64) -> Option<f64> {
        self.points
            .iter()
            .filter(|p| p.complete)
            .min_by(|a, b| (a.s - s).abs().total_cmp(&(b.s - s).abs()))
            .map(|p| p.xbar)
    }
}

/// Settings of the exponential-separation detector used for chaotic fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChaosDetection {
    /// Initial conditions with `λ` above this are flagged chaotic.
    pub lambda_threshold: f64,
    pub horizon: f64,
    pub renorm_interval: f64,
    pub neighbor_offset: f64,
    pub dt: f64,
    /// Number of Fibonacci-lattice initial conditions.
    pub ic_count: usize,
}

impl Default for ChaosDetection {
    fn default() -> Self {
        Self {
            lambda_threshold: 0.01,
            horizon: 2000.0,
            renorm_interval: 1.0,
            neighbor_offset: 1e-8,
            dt: 1e-2,
            ic_count: 200,
        }
    }
}

/// Grid `(ω, s) ↦` chaotic fraction, stored omega-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaosMap {
    pub omega_grid: Vec<f64>,
    pub s_grid: Vec<f64>,
    /// `fraction[i][k]` belongs to `omega_grid[i]`, `s_grid[k]`.
    pub fraction: Vec<Vec<f64>>,
    /// Initial conditions that diverged, per cell.
    pub diverged: Vec<Vec<usize>>,
    pub eps0: f64,
    pub detection: ChaosDetection,
}

impl ChaosMap {
    pub fn get(&self, omega_index: usize, s_index: usize) -> f64 {
        self.fraction[omega_index][s_index]
    }

    /// Largest fraction and its `(ω, s)` location.
    pub fn max_cell(&self) -> (f64, f64, f64) {
        let mut best = (f64::NEG_INFINITY, f64::NAN, f64::NAN);
        for (i, row) in self.fraction.iter().enumerate() {
            for (k, &f) in row.iter().enumerate() {
                if f > best.0 {
                    best = (f, self.omega_grid[i], self.s_grid[k]);
                }
            }
        }
        best
    }
}

/// Checks that a grid is non-empty, finite and strictly increasing.
pub fn check_grid(field: &'static str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(invalid(field, "grid is empty"));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(invalid(field, "grid has non-finite entries"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid(field, "grid must be strictly increasing"));
    }
    Ok(())
}

/// `count` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let h = (stop - start) / (count - 1) as f64;
            (0..count)
                .map(|i| if i + 1 == count { stop } else { start + h * i as f64 })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bloch_from_angles_examples() {
        let north = BlochState::from_angles(0.0, 1.3).unwrap();
        assert_eq!(north.to_array(), [0.0, 0.0, 1.0]);
        let px = BlochState::from_angles(FRAC_PI_2, 0.0).unwrap();
        assert!((px.x() - 1.0).abs() < 1e-15 && px.y() == 0.0 && px.z().abs() < 1e-15);
        let g = BlochState::from_angles(PI / 60.0, 0.0).unwrap();
        assert_eq!(g.x(), (PI / 60.0).sin());
        assert_eq!(g.z(), (PI / 60.0).cos());
        assert!(BlochState::from_angles(-0.1, 0.0).is_err());
        assert!(BlochState::from_angles(PI + 1e-9, 0.0).is_err());
    }

    #[test]
    fn pole_azimuth_is_zero() {
        let s = BlochState::from_angles(0.0, 2.0).unwrap();
        assert_eq!(s.phi(), 0.0);
        let s = BlochState::from_angles(PI, -1.0).unwrap();
        assert_eq!(s.phi(), 0.0);
    }

    #[test]
    fn energy_examples() {
        let north = BlochState::from_angles(0.0, 0.0).unwrap();
        assert_eq!(classical_energy(&north, 0.0), -1.0);
        let px = BlochState::from_cartesian(1.0, 0.0, 0.0).unwrap();
        assert_eq!(classical_energy(&px, 1.0), -0.5);
        for s in [0.2, 0.5, 0.9] {
            assert!((classical_energy(&north, s) + (1.0 - s)).abs() < 1e-15);
        }
    }

    #[test]
    fn params_invariants() {
        assert!(ModelParams::new(0.5, 200, 0.0, 1.0).is_ok());
        assert!(ModelParams::new(1.1, 200, 0.0, 1.0).is_err());
        assert!(ModelParams::new(0.5, 201, 0.0, 1.0).is_err());
        assert!(ModelParams::new(0.5, 0, 0.0, 1.0).is_err());
        assert!(ModelParams::new(0.5, 200, -0.1, 1.0).is_err());
        assert!(ModelParams::new(0.5, 200, 0.05, 0.0).is_err());
        assert_eq!(ModelParams::new(0.5, 200, 0.0, 1.0).unwrap().j(), 100.0);
    }

    #[test]
    fn protocol_initial_angles() {
        let g = ProtocolSpec::classical(ProtocolKind::Gsqpt);
        assert_eq!(g.initial_angles(200), (PI / 60.0, 0.0));
        let gq = ProtocolSpec::quantum(ProtocolKind::Gsqpt);
        assert_eq!(gq.initial_angles(200).0, PI / 60.0 + 1.0 / 200f64.sqrt());
        let d = ProtocolSpec::quantum(ProtocolKind::Dqpt);
        assert_eq!(d.initial_angles(200), (FRAC_PI_2, 0.0));
        assert!(ProtocolSpec::new(ProtocolKind::Dqpt, Regime::Classical, 10.0, 0.1, 0.01, 1.0).is_err());
    }

    #[test]
    fn curve_rejects_unsorted_and_oversized() {
        let spec = ProtocolSpec::classical(ProtocolKind::Dqpt);
        let p = ModelParams::clean(0.5, 200).unwrap();
        assert!(BifurcationCurve::from_pairs(&[(0.2, 0.0), (0.1, 0.0)], spec, p).is_err());
        assert!(BifurcationCurve::from_pairs(&[(0.2, 1.1)], spec, p).is_err());
        assert!(BifurcationCurve::from_pairs(&[(0.2, 1.0 + 1e-10)], spec, p).is_ok());
    }

    #[test]
    fn dicke_state_norm_checked() {
        let c = Complex::new(0.5f64.sqrt(), 0.0);
        assert!(DickeState::new(vec![c, c]).is_ok());
        assert!(DickeState::new(vec![c, c, c]).is_err());
        let b = DickeState::basis(1.0, -1.0).unwrap();
        assert_eq!(b.amplitudes()[0], Complex::new(1.0, 0.0));
    }

    #[test]
    fn threshold_form() {
        assert!((xbar_threshold(1.0, 100.0) - (1.0 / 200f64.sqrt()).sin()).abs() < 1e-16);
    }
}

//! Closed-form results for the integrable mean-field model and its
//! large-`N` semiclassical double well.
//!
//! The elliptic integral takes the *parameter* `m` (not the modulus
//! `k = √m`): `K(m) = ∫₀^{π/2} dθ / √(1 - m sin²θ)`. The order-parameter
//! argument `Λ(θ0, s)` is passed to `K` directly, so `Λ → 1` is the onset
//! where `K` diverges and `X̄ → 0`.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

const AGM_MAX_ITER: usize = 64;

/// Complete elliptic integral of the first kind, `K(m)` for `m < 1`.
///
/// Uses the arithmetic-geometric mean, `K(m) = π / (2 AGM(1, √(1-m)))`,
/// which is also valid for negative `m`.
pub fn elliptic_k(m: f64) -> Result<f64> {
    if m.is_nan() || m >= 1.0 {
        return Err(Error::Domain(format!("K(m) requires m < 1, got {m}")));
    }
    if m == 0.0 {
        return Ok(FRAC_PI_2);
    }
    let mut a = 1.0f64;
    let mut b = (1.0 - m).sqrt();
    for _ in 0..AGM_MAX_ITER {
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        if (an - bn).abs() <= 4.0 * f64::EPSILON * an {
            return Ok(PI / (2.0 * an));
        }
        a = an;
        b = bn;
    }
    Ok(PI / (a + b))
}

/// `Λ(θ0, s) = -4(1-s) / (s sin²θ0) · (cos θ0 - (1-s)/s)`.
pub fn lambda_param(theta0: f64, s: f64) -> Result<f64> {
    if !(theta0 > 0.0 && theta0 < PI) {
        return Err(Error::Domain(format!("Λ needs 0 < θ0 < π, got {theta0}")));
    }
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::Domain(format!("Λ needs 0 < s <= 1, got {s}")));
    }
    let sin2 = theta0.sin().powi(2);
    let r = (1.0 - s) / s;
    Ok(-4.0 * (1.0 - s) / (s * sin2) * (theta0.cos() - r))
}

/// Bifurcation point `s_c(θ0) = 1 / (1 + cos²(θ0/2))` of the protocol
/// started at `(θ0, 0)`.
pub fn bifurcation_point(theta0: f64) -> f64 {
    1.0 / (1.0 + (0.5 * theta0).cos().powi(2))
}

/// Long-time average of `X` for the unperturbed flow from `(θ0, φ0 = 0)`.
///
/// Zero below [`bifurcation_point`], `(π/2) sin θ0 / K(Λ(θ0, s))` above.
/// The magnitude of the positive branch is returned; the mirrored initial
/// condition `(θ0, π)` gives the negative branch.
pub fn xbar_analytic(theta0: f64, s: f64) -> Result<f64> {
    if !(theta0 > 0.0 && theta0 < PI) {
        return Err(Error::Domain(format!("X̄ needs 0 < θ0 < π, got {theta0}")));
    }
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Domain(format!("X̄ needs 0 <= s <= 1, got {s}")));
    }
    if s < bifurcation_point(theta0) {
        return Ok(0.0);
    }
    let lambda = lambda_param(theta0, s)?;
    if lambda >= 1.0 {
        // rounding at the onset itself, where K diverges
        return Ok(0.0);
    }
    Ok(FRAC_PI_2 * theta0.sin() / elliptic_k(lambda)?)
}

/// Value of `cos²φ` forced by energy conservation at polar angle `θ` on the
/// orbit through `(θ0, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitAzimuth {
    pub cos2_phi: f64,
    /// False when `cos²φ ∉ [0, 1]`: the orbit never reaches this `θ`.
    pub reachable: bool,
}

pub fn energy_conservation_relation(theta0: f64, s: f64, theta: f64) -> Result<OrbitAzimuth> {
    let sin_t = theta.sin();
    if sin_t.abs() < 1e-300 || !(0.0..=PI).contains(&theta) {
        return Err(Error::Domain(format!("θ = {theta} lies on a pole")));
    }
    if !(0.0..=PI).contains(&theta0) || !(s > 0.0 && s <= 1.0) {
        return Err(Error::Domain(format!("invalid θ0 = {theta0} or s = {s}")));
    }
    let num = 2.0 * (1.0 - s) * (theta0.cos() - theta.cos()) + s * theta0.sin().powi(2);
    let mut v = num / (s * sin_t * sin_t);
    if v > 1.0 && v <= 1.0 + 1e-12 {
        v = 1.0;
    }
    Ok(OrbitAzimuth {
        cos2_phi: v,
        reachable: (0.0..=1.0).contains(&v),
    })
}

/// Number of spins for the semiclassical potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SystemSize {
    Finite(usize),
    Infinite,
}

impl SystemSize {
    fn inv(self) -> f64 {
        match self {
            SystemSize::Finite(n) => 1.0 / n as f64,
            SystemSize::Infinite => 0.0,
        }
    }
}

/// Semiclassical double-well potential including its `1/N` and `1/N²` terms:
///
/// ```text
/// V(s, z) = -(1-s)/2 √(1-z²) - s z²/4
///           - (1-s)/4 · ( 2 / (N √(1-z²)) - (1+z²) / (N² (1-z²)^{3/2}) )
/// ```
pub fn semiclassical_potential(s: f64, z: f64, size: SystemSize) -> Result<f64> {
    check_z(z)?;
    let inv_n = size.inv();
    let u = 1.0 - z * z;
    let r = u.sqrt();
    let base = -0.5 * (1.0 - s) * r - 0.25 * s * z * z;
    let corr = -0.25 * (1.0 - s) * (2.0 * inv_n / r - inv_n * inv_n * (1.0 + z * z) / (u * r));
    Ok(base + corr)
}

fn check_z(z: f64) -> Result<()> {
    if !(z.abs() < 1.0) {
        return Err(Error::Domain(format!("|z| = {} must be < 1", z.abs())));
    }
    Ok(())
}

/// `dV/dz = z · g(z)`; returns `g`.
fn potential_slope_factor(s: f64, z: f64, inv_n: f64) -> f64 {
    let u = 1.0 - z * z;
    let c = 0.5 * (1.0 - s) * inv_n;
    let d = 0.25 * (1.0 - s) * inv_n * inv_n;
    0.5 * (1.0 - s) / u.sqrt() - 0.5 * s - c / (u * u.sqrt()) + d * (5.0 + z * z) / (u * u * u.sqrt())
}

/// First derivative `dV/dz`.
pub fn potential_first_derivative(s: f64, z: f64, size: SystemSize) -> Result<f64> {
    check_z(z)?;
    Ok(z * potential_slope_factor(s, z, size.inv()))
}

/// Second derivative `d²V/dz²`.
pub fn potential_curvature(s: f64, z: f64, size: SystemSize) -> Result<f64> {
    check_z(z)?;
    let inv_n = size.inv();
    let u = 1.0 - z * z;
    let z2 = z * z;
    let c = 0.5 * (1.0 - s) * inv_n;
    let d = 0.25 * (1.0 - s) * inv_n * inv_n;
    let a = 0.5 * (1.0 - s) * u.powf(-1.5);
    let b = -0.5 * s;
    let cc = -c * u.powf(-2.5) * (1.0 + 2.0 * z2);
    let dd = d * u.powf(-3.5) * (5.0 + 23.0 * z2 + 2.0 * z2 * z2);
    Ok(a + b + cc + dd)
}

/// Position-dependent effective mass read from the kinetic term,
/// `1/(2m) = (1-s) √(1-z²)`.
pub fn effective_mass(s: f64, z: f64) -> Result<f64> {
    check_z(z)?;
    if s >= 1.0 {
        return Err(Error::Domain("effective mass diverges at s = 1".into()));
    }
    Ok(1.0 / (2.0 * (1.0 - s) * (1.0 - z * z).sqrt()))
}

/// Shape of the semiclassical well at one `(s, N)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WellDescription {
    pub s: f64,
    pub size: SystemSize,
    /// Location of the right minimum (zero for a single well).
    pub z_min: f64,
    pub barrier_height: f64,
    /// `(1/N) ω/2` with `ω = √(V''(z_min)/m)`; `None` for `N = ∞`.
    pub zero_point_energy: Option<f64>,
}

impl WellDescription {
    pub fn new(s: f64, size: SystemSize) -> Result<Self> {
        if !(0.0..1.0).contains(&s) {
            return Err(Error::Domain(format!("well needs 0 <= s < 1, got {s}")));
        }
        let inv_n = size.inv();
        let z_min = if potential_slope_factor(s, 0.0, inv_n) >= 0.0 {
            0.0
        } else if inv_n == 0.0 {
            (1.0 - ((1.0 - s) / s).powi(2)).sqrt()
        } else {
            // g(0) < 0 and g → +∞ as z → 1 (the 1/N² term dominates)
            let mut lo = 0.0f64;
            let mut hi = 1.0 - 1e-15;
            while potential_slope_factor(s, hi, inv_n) < 0.0 {
                hi = 0.5 * (hi + 1.0);
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if potential_slope_factor(s, mid, inv_n) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-15 {
                    break;
                }
            }
            0.5 * (lo + hi)
        };
        let barrier_height =
            semiclassical_potential(s, 0.0, size)? - semiclassical_potential(s, z_min, size)?;
        let zero_point_energy = match size {
            SystemSize::Infinite => None,
            SystemSize::Finite(n) => {
                let curv = potential_curvature(s, z_min, size)?.max(0.0);
                let omega = (curv / effective_mass(s, z_min)?).sqrt();
                Some(0.5 * omega / n as f64)
            }
        };
        Ok(Self {
            s,
            size,
            z_min,
            barrier_height,
            zero_point_energy,
        })
    }

    pub fn potential(&self, z: f64) -> Result<f64> {
        semiclassical_potential(self.s, z, self.size)
    }

    pub fn is_double_well(&self) -> bool {
        self.z_min > 0.0
    }
}

/// Finite-size ground-state critical point `1/2 + N^{-2/3} / 2^{1/3}`.
pub fn finite_size_critical_point(size: SystemSize) -> Result<f64> {
    match size {
        SystemSize::Infinite => Ok(0.5),
        SystemSize::Finite(n) if n >= 2 => {
            Ok(0.5 + (n as f64).powf(-2.0 / 3.0) / 2f64.powf(1.0 / 3.0))
        }
        SystemSize::Finite(n) => Err(Error::Domain(format!("N = {n} must be >= 2"))),
    }
}

/// Solves `barrier_height(s, N) = zero_point_energy(s, N)` by bisection.
///
/// The lower bracket sits just above the `s` at which the corrected
/// potential first develops two minima.
pub fn finite_size_critical_point_numeric(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("N = {n} must be >= 2")));
    }
    let size = SystemSize::Finite(n);
    let inv_n = 1.0 / n as f64;
    // g(0) = 0  ⇔  (1-s) a = s/2
    let a = 0.5 - 0.5 * inv_n + 1.25 * inv_n * inv_n;
    let onset = a / (a + 0.5);
    let excess = |s: f64| -> Result<f64> {
        let w = WellDescription::new(s, size)?;
        Ok(w.barrier_height - w.zero_point_energy.unwrap_or(0.0))
    };
    let mut lo = onset + 1e-9;
    let mut hi = 1.0 - 1e-9;
    let (flo, fhi) = (excess(lo)?, excess(hi)?);
    if !(flo < 0.0 && fhi > 0.0) {
        return Err(Error::NumericSolve(format!(
            "barrier - ZPE does not change sign on [{lo}, {hi}]: f(lo) = {flo:e}, f(hi) = {fhi:e}"
        )));
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if excess(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

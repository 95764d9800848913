//! Stroboscopic sections and chaotic-fraction maps of the driven flow.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::{lyapunov_exponent, LmgField, LyapunovSettings, SphereStepper};
use crate::error::{invalid, Error, Result};
use crate::model::{check_grid, BlochState, ChaosDetection, ChaosMap, ModelParams};

/// One stroboscopic sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionPoint {
    pub ic_id: usize,
    /// `k` in `t_k = k · 2π/ω`, starting at 1.
    pub period_index: usize,
    pub theta: f64,
    pub phi: f64,
}

impl SectionPoint {
    pub fn state(&self) -> BlochState {
        BlochState::from_angles(self.theta, self.phi).expect("section angles are in range")
    }
}

/// Samples each trajectory at `t_k = k · 2π/ω`, `k = 1..=n_periods`.
///
/// The step is the largest divisor of the drive period not exceeding `dt`.
pub fn poincare_section(
    initials: &[BlochState],
    params: ModelParams,
    n_periods: usize,
    dt: f64,
) -> Result<Vec<SectionPoint>> {
    if n_periods == 0 {
        return Err(invalid("n_periods", "must be >= 1"));
    }
    if !(params.omega() > 0.0) {
        return Err(invalid("omega", "stroboscopic sampling needs ω > 0"));
    }
    if !(dt > 0.0) {
        return Err(invalid("dt", format!("{dt} must be > 0")));
    }
    let period = TAU / params.omega();
    let substeps = (period / dt).ceil().max(1.0) as usize;
    let h = period / substeps as f64;
    let field = LmgField::from(&params);

    let per_ic: Vec<Result<Vec<SectionPoint>>> = initials
        .par_iter()
        .enumerate()
        .map(|(id, init)| {
            let mut stepper = SphereStepper::new(&field, 0.0, h);
            let mut p = init.to_array();
            let mut out = Vec::with_capacity(n_periods);
            for k in 1..=n_periods {
                for _ in 0..substeps {
                    stepper.advance(&mut p).map_err(|e| match e {
                        Error::Diverged { time } => Error::DivergedInitial { id, time },
                        other => other,
                    })?;
                }
                let st = BlochState::from_array_unchecked(p);
                out.push(SectionPoint {
                    ic_id: id,
                    period_index: k,
                    theta: st.theta(),
                    phi: st.phi(),
                });
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::with_capacity(initials.len() * n_periods);
    for r in per_ic {
        all.extend(r?);
    }
    Ok(all)
}

/// Quasi-uniform Fibonacci lattice of `n` points on the sphere.
pub fn fibonacci_sphere(n: usize) -> Vec<BlochState> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            BlochState::normalized(rho * phi.cos(), rho * phi.sin(), z)
                .expect("lattice points are non-zero")
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionResult {
    pub fraction: f64,
    pub chaotic: usize,
    pub total: usize,
    /// Lattice indices whose integration diverged (counted as chaotic).
    pub diverged: Vec<usize>,
}

fn detector_settings(d: &ChaosDetection) -> LyapunovSettings {
    LyapunovSettings {
        horizon: d.horizon,
        renorm_interval: d.renorm_interval,
        neighbor_offset: d.neighbor_offset,
        dt: d.dt,
    }
}

fn check_detection(d: &ChaosDetection) -> Result<()> {
    if d.ic_count < 50 {
        return Err(invalid("ic_count", format!("{} must be >= 50", d.ic_count)));
    }
    if !(d.lambda_threshold > 0.0) {
        return Err(invalid("lambda_threshold", "must be > 0"));
    }
    detector_settings(d).validate()
}

fn fraction_serial(s: f64, omega: f64, eps0: f64, detection: &ChaosDetection) -> Result<FractionResult> {
    let total = detection.ic_count;
    if eps0 == 0.0 {
        // autonomous single degree of freedom: integrable
        return Ok(FractionResult {
            fraction: 0.0,
            chaotic: 0,
            total,
            diverged: Vec::new(),
        });
    }
    let params = ModelParams::new(s, 2, eps0, omega)?;
    let settings = detector_settings(detection);
    let mut chaotic = 0;
    let mut diverged = Vec::new();
    for (i, ic) in fibonacci_sphere(total).into_iter().enumerate() {
        match lyapunov_exponent(ic, params, &settings) {
            Ok(r) if r.lambda > detection.lambda_threshold => chaotic += 1,
            Ok(_) => {}
            Err(Error::Diverged { time }) => {
                log::warn!("s = {s}, ω = {omega}: initial condition {i} diverged at t = {time}; counted chaotic");
                chaotic += 1;
                diverged.push(i);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(FractionResult {
        fraction: chaotic as f64 / total as f64,
        chaotic,
        total,
        diverged,
    })
}

/// Share of a Fibonacci lattice of initial conditions whose largest
/// Lyapunov exponent exceeds `detection.lambda_threshold`.
pub fn chaotic_fraction(
    s: f64,
    omega: f64,
    eps0: f64,
    detection: &ChaosDetection,
) -> Result<FractionResult> {
    check_detection(detection)?;
    fraction_serial(s, omega, eps0, detection)
}

/// Chaotic fraction on the `(ω, s)` grid; cells run in parallel and are
/// collected in grid order.
pub fn chaos_map(
    s_grid: &[f64],
    omega_grid: &[f64],
    eps0: f64,
    detection: &ChaosDetection,
) -> Result<ChaosMap> {
    check_grid("s_grid", s_grid)?;
    check_grid("omega_grid", omega_grid)?;
    check_detection(detection)?;
    if omega_grid[0] <= 0.0 {
        return Err(invalid("omega_grid", "frequencies must be > 0"));
    }
    let cells: Vec<(usize, usize)> = (0..omega_grid.len())
        .flat_map(|i| (0..s_grid.len()).map(move |k| (i, k)))
        .collect();
    let results: Vec<Result<FractionResult>> = cells
        .par_iter()
        .map(|&(i, k)| fraction_serial(s_grid[k], omega_grid[i], eps0, detection))
        .collect();
    let mut fraction = vec![vec![0.0; s_grid.len()]; omega_grid.len()];
    let mut diverged = vec![vec![0usize; s_grid.len()]; omega_grid.len()];
    for (&(i, k), r) in cells.iter().zip(results) {
        let r = r?;
        fraction[i][k] = r.fraction;
        diverged[i][k] = r.diverged.len();
    }
    Ok(ChaosMap {
        omega_grid: omega_grid.to_vec(),
        s_grid: s_grid.to_vec(),
        fraction,
        diverged,
        eps0,
        detection: *detection,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::classical_energy;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn lattice_is_on_sphere_and_balanced() {
        let pts = fibonacci_sphere(200);
        assert_eq!(pts.len(), 200);
        let mean_z: f64 = pts.iter().map(|p| p.z()).sum::<f64>() / 200.0;
        assert!(mean_z.abs() < 1e-12);
        assert!(pts.iter().all(|p| (p.norm() - 1.0).abs() < 1e-14));
    }

    #[test]
    fn section_counts_and_energy_contour() {
        let p = ModelParams::new(0.7, 2, 0.0, 1.0).unwrap();
        let ics = [
            BlochState::from_angles(FRAC_PI_2, 0.0).unwrap(),
            BlochState::from_angles(0.4, 2.0).unwrap(),
        ];
        let pts = poincare_section(&ics, p, 30, 1e-2).unwrap();
        assert_eq!(pts.len(), 60);
        for (id, ic) in ics.iter().enumerate() {
            let e0 = classical_energy(ic, 0.7);
            let mine: Vec<_> = pts.iter().filter(|q| q.ic_id == id).collect();
            assert_eq!(mine.len(), 30);
            assert_eq!(mine[0].period_index, 1);
            for q in mine {
                assert!((classical_energy(&q.state(), 0.7) - e0).abs() < 1e-6);
            }
        }
        assert!(poincare_section(&ics, p, 0, 1e-2).is_err());
    }

    #[test]
    fn fraction_validation_and_integrable_zero() {
        let d = ChaosDetection {
            ic_count: 10,
            ..Default::default()
        };
        assert!(chaotic_fraction(0.5, 1.0, 0.05, &d).is_err());
        let d = ChaosDetection::default();
        assert_eq!(chaotic_fraction(0.8, 1.0, 0.0, &d).unwrap().fraction, 0.0);
    }

    #[test]
    fn map_of_undriven_model_is_zero() {
        let d = ChaosDetection::default();
        let m = chaos_map(&[0.2, 0.7], &[0.5, 1.0, 1.5], 0.0, &d).unwrap();
        assert!(m.fraction.iter().flatten().all(|&f| f == 0.0));
        assert!(chaos_map(&[0.7, 0.2], &[1.0], 0.0, &d).is_err());
    }

    // sample cells inside and at the edge of the chaotic band
    const SAMPLE: [(f64, f64); 3] = [(0.8, 0.6), (0.6, 1.0), (0.95, 1.5)];

    #[test]
    fn doubling_horizon_keeps_fractions() {
        let base = ChaosDetection {
            ic_count: 100,
            ..Default::default()
        };
        let long = ChaosDetection {
            horizon: 2.0 * base.horizon,
            ..base
        };
        for (s, w) in SAMPLE {
            let a = chaotic_fraction(s, w, 0.05, &base).unwrap().fraction;
            let b = chaotic_fraction(s, w, 0.05, &long).unwrap().fraction;
            assert!((a - b).abs() < 0.05, "s = {s}, ω = {w}: {a} vs {b}");
        }
    }

    #[test]
    fn halving_step_keeps_fractions() {
        let base = ChaosDetection {
            ic_count: 100,
            ..Default::default()
        };
        let fine = ChaosDetection {
            dt: 0.5 * base.dt,
            ..base
        };
        for (s, w) in SAMPLE {
            let a = chaotic_fraction(s, w, 0.05, &base).unwrap().fraction;
            let b = chaotic_fraction(s, w, 0.05, &fine).unwrap().fraction;
            assert!((a - b).abs() < 0.05, "s = {s}, ω = {w}: {a} vs {b}");
        }
    }
}

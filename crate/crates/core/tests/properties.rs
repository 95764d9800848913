//! Property tests over randomly drawn parameters.

use std::f64::consts::{FRAC_PI_2, PI};

use lmg_sim::analytic::{bifurcation_point, elliptic_k, lambda_param, xbar_analytic};
use lmg_sim::classical::{driven_flow, integrate, lmg_flow, time_averaged_x};
use lmg_sim::model::{classical_energy, BlochState, ModelParams};
use lmg_sim::quantum::{coherent_state, ladder_coefficients, spin_expectations};
use proptest::prelude::*;

/// Composite 10-point Gauss-Legendre on 400 panels.
fn k_quadrature(m: f64) -> f64 {
    const X: [f64; 5] = [
        0.148_874_338_981_631_2,
        0.433_395_394_129_247_2,
        0.679_409_568_299_024_4,
        0.865_063_366_688_984_5,
        0.973_906_528_517_171_7,
    ];
    const W: [f64; 5] = [
        0.295_524_224_714_752_9,
        0.269_266_719_309_996_4,
        0.219_086_362_515_982_0,
        0.149_451_349_150_580_6,
        0.066_671_344_308_688_1,
    ];
    let f = |t: f64| 1.0 / (1.0 - m * t.sin().powi(2)).sqrt();
    let panels = 400;
    let h = FRAC_PI_2 / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let c = (p as f64 + 0.5) * h;
        for (x, w) in X.iter().zip(&W) {
            sum += w * (f(c - 0.5 * h * x) + f(c + 0.5 * h * x));
        }
    }
    0.5 * h * sum
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn angles_round_trip(theta in 1e-6..PI - 1e-6, phi in -PI + 1e-9..PI) {
        let b = BlochState::from_angles(theta, phi).unwrap();
        prop_assert!((b.norm() - 1.0).abs() < 1e-15);
        prop_assert!((b.theta() - theta).abs() < 1e-7);
        prop_assert!((b.phi() - phi).abs() < 1e-9);
    }

    #[test]
    fn flow_commutes_with_parity(theta in 0.0..PI, phi in -PI..PI, s in 0.0..=1.0f64) {
        let b = BlochState::from_angles(theta, phi).unwrap();
        let f = lmg_flow(&b, s);
        let g = lmg_flow(&b.parity_mirror(), s);
        prop_assert!((f[0] + g[0]).abs() < 1e-15 && (f[1] + g[1]).abs() < 1e-15 && (f[2] - g[2]).abs() < 1e-15);
        // tangent to the sphere, with and without the drive
        let d = driven_flow(&b, s, 0.05, 1.3, 0.7);
        let p = b.to_array();
        prop_assert!((f[0] * p[0] + f[1] * p[1] + f[2] * p[2]).abs() < 1e-14);
        prop_assert!((d[0] * p[0] + d[1] * p[1] + d[2] * p[2]).abs() < 1e-14);
    }

    #[test]
    fn lambda_is_one_at_onset(theta0 in 1e-3..PI - 1e-3) {
        let sc = bifurcation_point(theta0);
        // Λ cancels to O(θ0²) near the poles
        let tol = 1e-13 / theta0.sin().powi(2);
        prop_assert!((lambda_param(theta0, sc).unwrap() - 1.0).abs() < tol.max(1e-12));
        prop_assert_eq!(xbar_analytic(theta0, 0.999 * sc).unwrap(), 0.0);
    }

    #[test]
    fn elliptic_k_matches_quadrature(m in -5.0..0.95f64) {
        let k = elliptic_k(m).unwrap();
        prop_assert!((k - k_quadrature(m)).abs() < 1e-12, "m = {m}");
    }

    #[test]
    fn clean_flow_conserves_norm_and_energy(theta in 0.05..PI - 0.05, phi in -PI..PI, s in 0.0..=1.0f64) {
        let init = BlochState::from_angles(theta, phi).unwrap();
        let traj = integrate(init, ModelParams::clean(s, 200).unwrap(), 20.0, 1e-3, 0.5).unwrap();
        let e0 = classical_energy(&init, s);
        for st in &traj.states {
            prop_assert!((st.norm() - 1.0).abs() < 1e-12);
            prop_assert!((classical_energy(st, s) - e0).abs() < 1e-9);
        }
    }

    #[test]
    fn mirrored_start_negates_average(theta in 0.1..PI - 0.1, s in 0.0..=1.0f64) {
        let p = ModelParams::clean(s, 200).unwrap();
        let a = time_averaged_x(BlochState::from_angles(theta, 0.0).unwrap(), p, 30.0, 1e-2, 0.1).unwrap();
        let b = time_averaged_x(BlochState::from_angles(theta, PI).unwrap(), p, 30.0, 1e-2, 0.1).unwrap();
        prop_assert!((a + b).abs() < 1e-10);
    }

    #[test]
    fn coherent_state_points_along_bloch_vector(n in 1usize..60, theta in 0.0..PI, phi in -PI..PI) {
        let j = n as f64;
        let psi = coherent_state(j, theta, phi).unwrap();
        prop_assert!((psi.norm() - 1.0).abs() < 1e-12);
        let m = spin_expectations(&psi, &ladder_coefficients(j).unwrap());
        let b = BlochState::from_angles(theta, phi).unwrap().to_array();
        for k in 0..3 {
            prop_assert!((m[k] / j - b[k]).abs() < 1e-10);
        }
    }
}

//! Bifurcation protocols, critical-point extraction and parameter sweeps.
//!
//! Every sweep is a parallel map over independent cells collected in grid
//! order, so results do not depend on the number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::time_averaged_x;
use crate::error::{invalid, Error, Result};
use crate::model::{
    check_grid, xbar_threshold, BifurcationCurve, BlochState, CurvePoint, ModelParams,
    ProtocolKind, ProtocolSpec, Regime,
};
use crate::numeric::{fit_line, LineFit};
use crate::quantum::{coherent_state, time_averaged_magnetization, HamiltonianSpec};

/// `X̄` for one protocol at one parameter point.
pub fn protocol_xbar(spec: &ProtocolSpec, params: ModelParams) -> Result<f64> {
    let (theta0, phi0) = spec.initial_angles(params.n());
    match spec.regime {
        Regime::Classical => time_averaged_x(
            BlochState::from_angles(theta0, phi0)?,
            params,
            spec.t_avg,
            spec.dt,
            spec.sample_dt,
        ),
        Regime::Quantum => {
            let h = HamiltonianSpec::new(params)?;
            let psi = coherent_state(params.j(), theta0, phi0)?;
            time_averaged_magnetization(&psi, &h, spec.t_avg, spec.sample_dt, spec.dt)
        }
    }
}

fn check_s_grid(s_grid: &[f64]) -> Result<()> {
    check_grid("s_grid", s_grid)?;
    if s_grid[0] < 0.0 || s_grid[s_grid.len() - 1] > 1.0 {
        return Err(invalid("s_grid", "values must lie in [0, 1]"));
    }
    Ok(())
}

/// `X̄(s)` over `s_grid`. Failed cells are kept as incomplete points.
pub fn run_bifurcation(
    spec: &ProtocolSpec,
    template: ModelParams,
    s_grid: &[f64],
) -> Result<BifurcationCurve> {
    spec.validate()?;
    check_s_grid(s_grid)?;
    let points: Vec<CurvePoint> = s_grid
        .par_iter()
        .map(|&s| {
            match template.with_s(s).and_then(|p| protocol_xbar(spec, p)) {
                Ok(xbar) => CurvePoint { s, xbar, complete: true },
                Err(e) => {
                    log::warn!("bifurcation cell s = {s} failed: {e}");
                    CurvePoint { s, xbar: f64::NAN, complete: false }
                }
            }
        })
        .collect();
    BifurcationCurve::new(points, *spec, template)
}

/// First-crossing estimate of a critical point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPointEstimate {
    /// Interpolated crossing of `|X̄| = X̄_th`.
    pub s_hat: f64,
    /// First sampled `s` with `|X̄| ≥ X̄_th`.
    pub s_first_above: f64,
    pub delta: f64,
    pub threshold: f64,
    pub j: f64,
    pub kind: ProtocolKind,
    pub regime: Regime,
    pub eps0: f64,
    pub omega: f64,
}

impl CriticalPointEstimate {
    pub const METHOD: &'static str = "first-crossing";
}

/// Smallest sampled `s` with `|X̄(s)| ≥ sin(δ/√(2J))`, refined by linear
/// interpolation against the previous sample. Incomplete points are skipped.
pub fn extract_critical_point(
    curve: &BifurcationCurve,
    delta: f64,
    j: f64,
) -> Result<CriticalPointEstimate> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(invalid("delta", format!("{delta} must be > 0")));
    }
    if !(j > 0.0) {
        return Err(invalid("j", format!("{j} must be > 0")));
    }
    let threshold = xbar_threshold(delta, j);
    let pts: Vec<&CurvePoint> = curve.points().iter().filter(|p| p.complete).collect();
    if pts.is_empty() {
        return Err(Error::InsufficientData("curve has no complete points".into()));
    }
    let i = pts
        .iter()
        .position(|p| p.xbar.abs() >= threshold)
        .ok_or(Error::NoTransition { threshold })?;
    let s_hat = if i == 0 {
        pts[0].s
    } else {
        let (a, b) = (pts[i - 1], pts[i]);
        let (ya, yb) = (a.xbar.abs(), b.xbar.abs());
        a.s + (threshold - ya) / (yb - ya) * (b.s - a.s)
    };
    Ok(CriticalPointEstimate {
        s_hat,
        s_first_above: pts[i].s,
        delta,
        threshold,
        j,
        kind: curve.spec.kind,
        regime: curve.spec.regime,
        eps0: curve.params.eps0(),
        omega: curve.params.omega(),
    })
}

/// One labelled output column of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSeries {
    pub label: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// `"eps0"`, `"delta"` or `"n"`.
    pub axis: String,
    pub axis_values: Vec<f64>,
    pub series: Vec<SweepSeries>,
    pub spec: ProtocolSpec,
    pub params: ModelParams,
    /// Fitted `log(s_hat - 1/2)` against `log N`, for scaling studies.
    pub fit: Option<LineFit>,
    /// Max minus min of each series, for threshold scans.
    pub spread: Option<Vec<f64>>,
    /// Curves behind the estimates, when the sweep produced any.
    #[serde(skip)]
    pub curves: Vec<BifurcationCurve>,
}

impl SweepResult {
    fn new(axis: &str, axis_values: Vec<f64>, spec: ProtocolSpec, params: ModelParams) -> Self {
        Self {
            axis: axis.into(),
            axis_values,
            series: Vec::new(),
            spec,
            params,
            fit: None,
            spread: None,
            curves: Vec::new(),
        }
    }

    pub fn series(&self, label: &str) -> Option<&SweepSeries> {
        self.series.iter().find(|s| s.label == label)
    }
}

fn check_eps0_grid(eps0_grid: &[f64]) -> Result<()> {
    check_grid("eps0_grid", eps0_grid)?;
    if eps0_grid[0] < 0.0 {
        return Err(invalid("eps0_grid", "amplitudes must be >= 0"));
    }
    Ok(())
}

/// `X̄` at each selected `s` against the drive amplitude.
pub fn perturbation_sweep(
    spec: &ProtocolSpec,
    template: ModelParams,
    s_select: &[f64],
    eps0_grid: &[f64],
) -> Result<SweepResult> {
    spec.validate()?;
    check_eps0_grid(eps0_grid)?;
    if s_select.is_empty() {
        return Err(invalid("s_select", "must not be empty"));
    }
    let cells: Vec<(f64, f64)> = s_select
        .iter()
        .flat_map(|&s| eps0_grid.iter().map(move |&e| (s, e)))
        .collect();
    let values: Vec<f64> = cells
        .par_iter()
        .map(|&(s, e)| {
            template
                .with_s(s)
                .and_then(|p| p.with_eps0(e))
                .and_then(|p| protocol_xbar(spec, p))
                .unwrap_or_else(|err| {
                    log::warn!("sweep cell s = {s}, eps0 = {e} failed: {err}");
                    f64::NAN
                })
        })
        .collect();
    let mut out = SweepResult::new("eps0", eps0_grid.to_vec(), *spec, template);
    for (k, &s) in s_select.iter().enumerate() {
        out.series.push(SweepSeries {
            label: format!("xbar@s={s}"),
            values: values[k * eps0_grid.len()..(k + 1) * eps0_grid.len()].to_vec(),
        });
    }
    Ok(out)
}

/// Bifurcation curves for every drive amplitude, cells in parallel.
fn curves_per_eps0(
    spec: &ProtocolSpec,
    template: ModelParams,
    s_grid: &[f64],
    eps0_grid: &[f64],
) -> Result<Vec<BifurcationCurve>> {
    spec.validate()?;
    check_s_grid(s_grid)?;
    check_eps0_grid(eps0_grid)?;
    let cells: Vec<(usize, f64)> = (0..eps0_grid.len())
        .flat_map(|i| s_grid.iter().map(move |&s| (i, s)))
        .collect();
    let values: Vec<(f64, bool)> = cells
        .par_iter()
        .map(|&(i, s)| {
            let e = eps0_grid[i];
            match template
                .with_s(s)
                .and_then(|p| p.with_eps0(e))
                .and_then(|p| protocol_xbar(spec, p))
            {
                Ok(x) => (x, true),
                Err(err) => {
                    log::warn!("cell s = {s}, eps0 = {e} failed: {err}");
                    (f64::NAN, false)
                }
            }
        })
        .collect();
    eps0_grid
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            let points = s_grid
                .iter()
                .enumerate()
                .map(|(k, &s)| {
                    let (xbar, complete) = values[i * s_grid.len() + k];
                    CurvePoint { s, xbar, complete }
                })
                .collect();
            BifurcationCurve::new(points, *spec, template.with_eps0(e)?)
        })
        .collect()
}

/// `s_hat` against the drive amplitude.
pub fn critical_point_vs_perturbation(
    spec: &ProtocolSpec,
    template: ModelParams,
    s_grid: &[f64],
    eps0_grid: &[f64],
) -> Result<SweepResult> {
    let curves = curves_per_eps0(spec, template, s_grid, eps0_grid)?;
    let j = template.j();
    let s_hat = curves
        .iter()
        .map(|c| extract_critical_point(c, spec.delta, j).map(|e| e.s_hat))
        .collect::<Result<Vec<f64>>>()?;
    let mut out = SweepResult::new("eps0", eps0_grid.to_vec(), *spec, template);
    out.series.push(SweepSeries {
        label: "s_hat".into(),
        values: s_hat,
    });
    out.curves = curves;
    Ok(out)
}

/// `s_hat` against δ for each drive amplitude, with the spread over δ.
pub fn threshold_sensitivity(
    spec: &ProtocolSpec,
    template: ModelParams,
    s_grid: &[f64],
    delta_grid: &[f64],
    eps0_list: &[f64],
) -> Result<SweepResult> {
    check_grid("delta_grid", delta_grid)?;
    if delta_grid[0] <= 0.0 {
        return Err(invalid("delta_grid", "values must be > 0"));
    }
    let curves = curves_per_eps0(spec, template, s_grid, eps0_list)?;
    let j = template.j();
    let mut out = SweepResult::new("delta", delta_grid.to_vec(), *spec, template);
    let mut spread = Vec::with_capacity(curves.len());
    for (curve, &e) in curves.iter().zip(eps0_list) {
        let values = delta_grid
            .iter()
            .map(|&d| extract_critical_point(curve, d, j).map(|est| est.s_hat))
            .collect::<Result<Vec<f64>>>()?;
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        spread.push(hi - lo);
        out.series.push(SweepSeries {
            label: format!("s_hat@eps0={e}"),
            values,
        });
    }
    out.spread = Some(spread);
    out.curves = curves;
    Ok(out)
}

/// Least-squares line through `(log N, log(s_hat - 1/2))`.
pub fn scaling_fit(n_values: &[usize], s_hat: &[f64]) -> Result<LineFit> {
    let (x, y): (Vec<f64>, Vec<f64>) = n_values
        .iter()
        .zip(s_hat)
        .filter(|(_, &s)| s > 0.5)
        .map(|(&n, &s)| ((n as f64).ln(), (s - 0.5).ln()))
        .unzip();
    if x.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} usable points for the scaling fit",
            x.len()
        )));
    }
    fit_line(&x, &y)
}

/// Quantum GSQPT `s_hat(N)` for each `N` and the fitted exponent.
pub fn finite_size_scaling_study(
    n_list: &[usize],
    spec: &ProtocolSpec,
    template: ModelParams,
    s_grid: &[f64],
) -> Result<SweepResult> {
    if n_list.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "scaling needs at least 3 system sizes, got {}",
            n_list.len()
        )));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) || n_list.iter().any(|n| n % 2 != 0) {
        return Err(invalid("n_list", "sizes must be even and strictly increasing"));
    }
    let spec = ProtocolSpec {
        kind: ProtocolKind::Gsqpt,
        regime: Regime::Quantum,
        ..*spec
    };
    let mut s_hat = Vec::with_capacity(n_list.len());
    let mut curves = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let params = template.with_n(n)?;
        let curve = run_bifurcation(&spec, params, s_grid)?;
        let est = extract_critical_point(&curve, spec.delta, params.j())?;
        if est.s_hat <= 0.5 {
            log::warn!("N = {n}: s_hat = {} <= 1/2 excluded from the fit", est.s_hat);
        }
        s_hat.push(est.s_hat);
        curves.push(curve);
    }
    let fit = scaling_fit(n_list, &s_hat)?;
    let mut out = SweepResult::new(
        "n",
        n_list.iter().map(|&n| n as f64).collect(),
        spec,
        template,
    );
    out.series.push(SweepSeries {
        label: "s_hat".into(),
        values: s_hat,
    });
    out.fit = Some(fit);
    out.curves = curves;
    Ok(out)
}

//! Command runner behind the `lmg` binary.
//!
//! A run reads a TOML config, validates it into a [`Job`], refuses or
//! replaces existing outputs, computes inside a worker pool of the requested
//! size and only then writes the data file and `manifest.json`.

mod config;
mod output;

pub use config::{
    build_job, resolved_config, CommandKind, GridSpec, HeatmapSection, InitialSection, Job,
    KindName, LyapunovSection, ModelSection, PoincareSection, ProtocolSection, RunConfig,
    ScalingSection, SweepMode, SweepSection,
};
pub use output::{
    config_hash, csv_bytes, fmt_f64, sha256_hex, Completeness, CsvTable, FileRecord, RunManifest,
    MANIFEST_FILE,
};

use rayon::prelude::*;
use serde_json::json;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::classical::{chaos_map, fibonacci_sphere, lyapunov_exponent, poincare_section};
use crate::error::Error;
use crate::model::BlochState;
use crate::protocols::{
    critical_point_vs_perturbation, extract_critical_point, finite_size_scaling_study,
    perturbation_sweep, run_bifurcation, threshold_sensitivity, SweepResult,
};
use crate::quantum::{eigendecompose, HamiltonianSpec};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "LMG_WORKERS";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("computation failed: {0}")]
    Compute(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("{0}")]
    Refused(String),
}

impl RunError {
    /// 1 validation, 2 compute, 3 IO (including refusal to overwrite).
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Validation(_) => 1,
            RunError::Compute(_) => 2,
            RunError::Io(_) | RunError::Refused(_) => 3,
        }
    }
}

fn validation(e: Error) -> RunError {
    RunError::Validation(e.to_string())
}

fn compute(e: Error) -> RunError {
    match e {
        Error::InvalidParameter { .. } | Error::Domain(_) => RunError::Validation(e.to_string()),
        other => RunError::Compute(other.to_string()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OverwritePolicy {
    #[default]
    Deny,
    Replace,
}

impl std::str::FromStr for OverwritePolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "deny" => Ok(OverwritePolicy::Deny),
            "replace" => Ok(OverwritePolicy::Replace),
            other => Err(format!("unknown overwrite policy '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub command: CommandKind,
    pub config: Option<PathBuf>,
    pub out_dir: PathBuf,
    /// `None` falls back to all available cores.
    pub workers: Option<usize>,
    pub overwrite: OverwritePolicy,
}

/// Tabular result of a job plus manifest extras.
#[derive(Debug, Clone, PartialEq)]
pub struct JobOutput {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub completeness: Completeness,
    pub results: serde_json::Value,
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, RunError> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| RunError::Io(format!("{}: {e}", p.display())))?;
            RunConfig::from_toml(&text).map_err(|e| RunError::Validation(format!("{}: {e}", p.display())))
        }
    }
}

fn check_overwrite(inv: &Invocation, cfg_hash: &str) -> Result<(), RunError> {
    let manifest = inv.out_dir.join(MANIFEST_FILE);
    let data = inv.out_dir.join(inv.command.data_file());
    if inv.overwrite == OverwritePolicy::Replace || !(manifest.exists() || data.exists()) {
        return Ok(());
    }
    let notice = match RunManifest::read(&inv.out_dir) {
        Ok(m) if m.config_sha256 == cfg_hash && m.command == inv.command.name() => {
            "manifest matches this configuration; outputs are already present"
        }
        Ok(_) => "existing manifest was produced by a different configuration",
        Err(_) => "existing outputs have no readable manifest",
    };
    Err(RunError::Refused(format!(
        "refusing to overwrite {} ({notice}); pass --overwrite replace to recompute",
        inv.out_dir.display()
    )))
}

pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Runs one command end to end and returns the written manifest.
pub fn run(inv: &Invocation) -> Result<RunManifest, RunError> {
    let started_at = now();
    let clock = Instant::now();
    let cfg = load_config(inv.config.as_deref())?;
    let job = build_job(inv.command, &cfg).map_err(validation)?;
    let resolved = serde_json::to_value(resolved_config(inv.command, &cfg))
        .map_err(|e| RunError::Validation(e.to_string()))?;
    let cfg_hash = config_hash(inv.command.name(), &resolved);
    let workers = inv.workers.unwrap_or_else(default_workers);
    if workers == 0 {
        return Err(RunError::Validation("workers must be >= 1".into()));
    }
    check_overwrite(inv, &cfg_hash)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| RunError::Compute(format!("worker pool: {e}")))?;
    log::info!("{}: running with {workers} workers", inv.command.name());
    let out = pool.install(|| execute(&job))?;

    let data = csv_bytes(&out.headers, &out.rows)?;
    fs::create_dir_all(&inv.out_dir).map_err(|e| RunError::Io(format!("{}: {e}", inv.out_dir.display())))?;
    let name = inv.command.data_file();
    write(&inv.out_dir.join(name), &data)?;
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: inv.command.name().into(),
        started_at,
        finished_at: now(),
        wall_seconds: clock.elapsed().as_secs_f64(),
        workers,
        config: resolved,
        config_sha256: cfg_hash,
        files: vec![FileRecord {
            name: name.into(),
            sha256: sha256_hex(&data),
            bytes: data.len(),
            rows: out.rows.len(),
        }],
        completeness: out.completeness,
        results: out.results,
    };
    let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| RunError::Io(e.to_string()))?;
    text.push('\n');
    write(&inv.out_dir.join(MANIFEST_FILE), text.as_bytes())?;
    Ok(manifest)
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), RunError> {
    fs::write(path, bytes).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))
}

fn f(v: f64) -> String {
    fmt_f64(v)
}

fn all_complete(total: usize) -> Completeness {
    Completeness {
        total_cells: total,
        complete_cells: total,
        incomplete: Vec::new(),
    }
}

fn sweep_rows(r: &SweepResult) -> Vec<Vec<String>> {
    r.series
        .iter()
        .flat_map(|ser| {
            r.axis_values
                .iter()
                .zip(&ser.values)
                .map(move |(&a, &v)| vec![f(a), ser.label.clone(), f(v)])
        })
        .collect()
}

fn curve_completeness(r: &SweepResult) -> Completeness {
    let mut c = Completeness::default();
    for curve in &r.curves {
        for p in curve.points() {
            c.total_cells += 1;
            if p.complete {
                c.complete_cells += 1;
            } else {
                c.incomplete.push(format!("eps0={},s={}", curve.params.eps0(), p.s));
            }
        }
    }
    c
}

const SWEEP_HEADERS: [&str; 3] = ["axis_value", "s_or_xbar", "value"];

/// Computes a job; parallel parts use the current rayon pool.
pub fn execute(job: &Job) -> Result<JobOutput, RunError> {
    match job {
        Job::Bifurcation { spec, params, s_grid } => {
            let curve = run_bifurcation(spec, *params, s_grid).map_err(compute)?;
            let rows = curve
                .points()
                .iter()
                .map(|p| vec![f(p.s), f(p.xbar), p.complete.to_string()])
                .collect();
            let incomplete: Vec<String> = curve
                .points()
                .iter()
                .filter(|p| !p.complete)
                .map(|p| format!("s={}", p.s))
                .collect();
            let estimate = match extract_critical_point(&curve, spec.delta, params.j()) {
                Ok(e) => json!({ "method": "first-crossing", "estimate": e }),
                Err(e) => json!({ "method": "first-crossing", "error": e.to_string() }),
            };
            Ok(JobOutput {
                headers: vec!["s", "xbar", "completeness"],
                rows,
                completeness: Completeness {
                    total_cells: s_grid.len(),
                    complete_cells: s_grid.len() - incomplete.len(),
                    incomplete,
                },
                results: json!({ "critical_point": estimate }),
            })
        }
        Job::Heatmap { s_grid, omega_grid, eps0, detection } => {
            let map = chaos_map(s_grid, omega_grid, *eps0, detection).map_err(compute)?;
            let mut rows = Vec::with_capacity(s_grid.len() * omega_grid.len());
            let mut incomplete = Vec::new();
            for (i, &w) in omega_grid.iter().enumerate() {
                for (k, &s) in s_grid.iter().enumerate() {
                    rows.push(vec![f(w), f(s), f(map.fraction[i][k])]);
                    if map.diverged[i][k] > 0 {
                        incomplete.push(format!("omega={w},s={s}: {} diverged", map.diverged[i][k]));
                    }
                }
            }
            let (fmax, wmax, smax) = map.max_cell();
            Ok(JobOutput {
                headers: vec!["omega", "s", "fraction"],
                rows,
                completeness: Completeness {
                    total_cells: s_grid.len() * omega_grid.len(),
                    complete_cells: s_grid.len() * omega_grid.len() - incomplete.len(),
                    incomplete,
                },
                results: json!({ "max_fraction": fmax, "max_omega": wmax, "max_s": smax }),
            })
        }
        Job::Lyapunov { params, initial, s_grid, settings } => {
            let init = BlochState::from_angles(initial.0, initial.1).map_err(validation)?;
            let per_s: Vec<Result<_, Error>> = s_grid
                .par_iter()
                .map(|&s| lyapunov_exponent(init, params.with_s(s)?, settings))
                .collect();
            let mut rows = Vec::with_capacity(s_grid.len());
            let mut incomplete = Vec::new();
            for (&s, r) in s_grid.iter().zip(per_s) {
                match r {
                    Ok(r) => rows.push(vec![f(s), f(r.lambda), r.converged.to_string()]),
                    Err(e @ (Error::InvalidParameter { .. } | Error::Domain(_))) => return Err(validation(e)),
                    Err(e) => {
                        log::warn!("lyapunov s = {s}: {e}");
                        incomplete.push(format!("s={s}: {e}"));
                        rows.push(vec![f(s), f(f64::NAN), "false".into()]);
                    }
                }
            }
            Ok(JobOutput {
                headers: vec!["s", "lambda", "converged"],
                rows,
                completeness: Completeness {
                    total_cells: s_grid.len(),
                    complete_cells: s_grid.len() - incomplete.len(),
                    incomplete,
                },
                results: json!({ "initial": { "theta0": initial.0, "phi0": initial.1 } }),
            })
        }
        Job::Poincare { params, initials, lattice, n_periods, dt } => {
            let states: Vec<BlochState> = if initials.is_empty() {
                fibonacci_sphere(*lattice)
            } else {
                initials
                    .iter()
                    .map(|&(t, p)| BlochState::from_angles(t, p))
                    .collect::<Result<_, _>>()
                    .map_err(validation)?
            };
            let pts = poincare_section(&states, *params, *n_periods, *dt).map_err(compute)?;
            let rows = pts
                .iter()
                .map(|p| vec![p.ic_id.to_string(), p.period_index.to_string(), f(p.theta), f(p.phi)])
                .collect();
            Ok(JobOutput {
                headers: vec!["ic_id", "period_index", "theta", "phi"],
                rows,
                completeness: all_complete(states.len()),
                results: json!({ "initial_conditions": states.len() }),
            })
        }
        Job::Sweep { mode, spec, params, s_grid, eps0_grid, s_select, delta_grid } => {
            let r = match mode {
                SweepMode::Perturbation => perturbation_sweep(spec, *params, s_select, eps0_grid),
                SweepMode::CriticalPoint => critical_point_vs_perturbation(spec, *params, s_grid, eps0_grid),
                SweepMode::Threshold => threshold_sensitivity(spec, *params, s_grid, delta_grid, eps0_grid),
            }
            .map_err(compute)?;
            let mut completeness = curve_completeness(&r);
            if r.curves.is_empty() {
                let cells: Vec<String> = r
                    .series
                    .iter()
                    .flat_map(|ser| {
                        r.axis_values
                            .iter()
                            .zip(&ser.values)
                            .filter(|(_, v)| v.is_nan())
                            .map(move |(a, _)| format!("{}@eps0={a}", ser.label))
                    })
                    .collect();
                let total = r.series.len() * r.axis_values.len();
                completeness = Completeness {
                    total_cells: total,
                    complete_cells: total - cells.len(),
                    incomplete: cells,
                };
            }
            Ok(JobOutput {
                headers: SWEEP_HEADERS.to_vec(),
                rows: sweep_rows(&r),
                completeness,
                results: json!({ "axis": r.axis, "spread": r.spread }),
            })
        }
        Job::Scaling { spec, params, n_list, s_grid } => {
            let r = finite_size_scaling_study(n_list, spec, *params, s_grid).map_err(compute)?;
            Ok(JobOutput {
                headers: SWEEP_HEADERS.to_vec(),
                rows: sweep_rows(&r),
                completeness: curve_completeness(&r),
                results: json!({ "axis": r.axis, "fit": r.fit }),
            })
        }
        Job::Spectrum { params, s_grid } => {
            let per_s: Vec<Result<Vec<Vec<String>>, Error>> = s_grid
                .par_iter()
                .map(|&s| {
                    let h = HamiltonianSpec::new(params.with_s(s)?.with_eps0(0.0)?)?;
                    let sp = eigendecompose(&h)?;
                    Ok((0..sp.len())
                        .map(|l| vec![f(s), l.to_string(), f(sp.energy(l)), sp.parity(l).to_string()])
                        .collect())
                })
                .collect();
            let mut rows = Vec::new();
            for r in per_s {
                rows.extend(r.map_err(compute)?);
            }
            Ok(JobOutput {
                headers: vec!["s", "level_index", "energy", "parity"],
                rows,
                completeness: all_complete(s_grid.len()),
                results: json!({ "levels_per_s": params.n() + 1 }),
            })
        }
    }
}

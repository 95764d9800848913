//! TOML run configuration and its validation into concrete jobs.

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use crate::classical::LyapunovSettings;
use crate::error::{invalid, Result};
use crate::model::{
    check_grid, linspace, ChaosDetection, ModelParams, ProtocolKind, ProtocolSpec, Regime,
    EPS_THERMODYNAMIC,
};

/// Grid given as an inclusive range or explicit values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum GridSpec {
    Range { start: f64, stop: f64, count: usize },
    Values { values: Vec<f64> },
}

impl GridSpec {
    pub fn range(start: f64, stop: f64, count: usize) -> Self {
        GridSpec::Range { start, stop, count }
    }

    pub fn resolve(&self, field: &'static str) -> Result<Vec<f64>> {
        let v = match self {
            GridSpec::Range { start, stop, count } => {
                if *count == 0 || !start.is_finite() || !stop.is_finite() {
                    return Err(invalid(field, "range needs finite bounds and count >= 1"));
                }
                if *count > 1 && !(stop > start) {
                    return Err(invalid(field, "range needs stop > start"));
                }
                linspace(*start, *stop, *count)
            }
            GridSpec::Values { values } => values.clone(),
        };
        check_grid(field, &v)?;
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub s: f64,
    pub n: usize,
    pub eps0: f64,
    pub omega: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            s: 0.5,
            n: 200,
            eps0: 0.0,
            omega: 1.0,
        }
    }
}

impl ModelSection {
    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.s, self.n, self.eps0, self.omega)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindName {
    Gsqpt,
    Dqpt,
    Custom,
}

/// Initial-condition family; `theta0`/`phi0` only with `kind = "custom"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub kind: KindName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi0: Option<f64>,
}

impl Default for InitialSection {
    fn default() -> Self {
        Self {
            kind: KindName::Dqpt,
            theta0: None,
            phi0: None,
        }
    }
}

impl InitialSection {
    pub fn kind(&self) -> Result<ProtocolKind> {
        match (self.kind, self.theta0, self.phi0) {
            (KindName::Gsqpt, None, None) => Ok(ProtocolKind::Gsqpt),
            (KindName::Dqpt, None, None) => Ok(ProtocolKind::Dqpt),
            (KindName::Custom, Some(theta0), phi0) => Ok(ProtocolKind::Custom {
                theta0,
                phi0: phi0.unwrap_or(0.0),
            }),
            (KindName::Custom, None, _) => Err(invalid("theta0", "custom kind needs theta0")),
            _ => Err(invalid("theta0", "theta0/phi0 are only allowed with kind = \"custom\"")),
        }
    }

    /// Classical `(θ0, φ0)`.
    pub fn classical_angles(&self) -> Result<(f64, f64)> {
        Ok(match self.kind()? {
            ProtocolKind::Gsqpt => (EPS_THERMODYNAMIC, 0.0),
            ProtocolKind::Dqpt => (FRAC_PI_2, 0.0),
            ProtocolKind::Custom { theta0, phi0 } => (theta0, phi0),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    #[serde(default = "default_kind")]
    pub kind: KindName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi0: Option<f64>,
    #[serde(default = "default_regime")]
    pub regime: Regime,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_avg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

fn default_kind() -> KindName {
    KindName::Dqpt
}

fn default_regime() -> Regime {
    Regime::Classical
}

impl Default for ProtocolSection {
    fn default() -> Self {
        Self {
            kind: KindName::Dqpt,
            theta0: None,
            phi0: None,
            regime: Regime::Classical,
            t_avg: None,
            dt: None,
            sample_dt: None,
            delta: None,
        }
    }
}

impl ProtocolSection {
    pub fn initial(&self) -> InitialSection {
        InitialSection {
            kind: self.kind,
            theta0: self.theta0,
            phi0: self.phi0,
        }
    }

    pub fn spec(&self) -> Result<ProtocolSpec> {
        let kind = self.initial().kind()?;
        let base = match self.regime {
            Regime::Classical => ProtocolSpec::classical(kind),
            Regime::Quantum => ProtocolSpec::quantum(kind),
        };
        ProtocolSpec::new(
            kind,
            self.regime,
            self.t_avg.unwrap_or(base.t_avg),
            self.dt.unwrap_or(base.dt),
            self.sample_dt.unwrap_or(base.sample_dt),
            self.delta.unwrap_or(base.delta),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatmapSection {
    #[serde(default = "default_omega_grid")]
    pub omega_grid: GridSpec,
    #[serde(default)]
    pub detection: ChaosDetection,
}

fn default_omega_grid() -> GridSpec {
    GridSpec::range(0.1, 2.0, 20)
}

impl Default for HeatmapSection {
    fn default() -> Self {
        Self {
            omega_grid: default_omega_grid(),
            detection: ChaosDetection::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct LyapunovSection {
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub settings: LyapunovSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoincareSection {
    pub n_periods: usize,
    pub dt: f64,
    /// Explicit `[θ, φ]` initial conditions; a Fibonacci lattice otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initials: Option<Vec<[f64; 2]>>,
    pub lattice: usize,
}

impl Default for PoincareSection {
    fn default() -> Self {
        Self {
            n_periods: 200,
            dt: 1e-2,
            initials: None,
            lattice: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// `X̄` at selected `s` against `ε0`.
    Perturbation,
    /// `s_hat` against `ε0`.
    CriticalPoint,
    /// `s_hat` against δ for each `ε0`.
    Threshold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub mode: SweepMode,
    #[serde(default = "default_eps0_grid")]
    pub eps0_grid: GridSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_select: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_grid: Option<GridSpec>,
}

fn default_eps0_grid() -> GridSpec {
    GridSpec::range(0.0, 0.05, 5)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingSection {
    pub n_list: Vec<usize>,
}

impl Default for ScalingSection {
    fn default() -> Self {
        Self {
            n_list: vec![50, 100, 200, 400],
        }
    }
}

/// Whole configuration document. Sections irrelevant to a command are
/// ignored; missing sections take defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol: Option<ProtocolSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heatmap: Option<HeatmapSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lyapunov: Option<LyapunovSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poincare: Option<PoincareSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<ScalingSection>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Bifurcation,
    Heatmap,
    Lyapunov,
    Poincare,
    Sweep,
    Scaling,
    Spectrum,
}

impl CommandKind {
    pub const ALL: [CommandKind; 7] = [
        CommandKind::Bifurcation,
        CommandKind::Heatmap,
        CommandKind::Lyapunov,
        CommandKind::Poincare,
        CommandKind::Sweep,
        CommandKind::Scaling,
        CommandKind::Spectrum,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CommandKind::Bifurcation => "bifurcation",
            CommandKind::Heatmap => "heatmap",
            CommandKind::Lyapunov => "lyapunov",
            CommandKind::Poincare => "poincare",
            CommandKind::Sweep => "sweep",
            CommandKind::Scaling => "scaling",
            CommandKind::Spectrum => "spectrum",
        }
    }

    /// Data file written by the command.
    pub fn data_file(&self) -> &'static str {
        match self {
            CommandKind::Bifurcation => "bifurcation.csv",
            CommandKind::Heatmap => "heatmap.csv",
            CommandKind::Lyapunov => "lyapunov.csv",
            CommandKind::Poincare => "poincare.csv",
            CommandKind::Sweep | CommandKind::Scaling => "sweep.csv",
            CommandKind::Spectrum => "spectrum.csv",
        }
    }

    fn default_s_grid(&self) -> GridSpec {
        match self {
            CommandKind::Heatmap | CommandKind::Lyapunov => GridSpec::range(0.05, 1.0, 20),
            CommandKind::Spectrum => GridSpec::range(0.0, 1.0, 21),
            CommandKind::Scaling => GridSpec::range(0.45, 0.75, 121),
            _ => GridSpec::range(0.0, 1.0, 101),
        }
    }
}

impl std::str::FromStr for CommandKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        CommandKind::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown command '{s}'"))
    }
}

/// A validated, fully resolved unit of work.
#[derive(Debug, Clone, PartialEq)]
pub enum Job {
    Bifurcation {
        spec: ProtocolSpec,
        params: ModelParams,
        s_grid: Vec<f64>,
    },
    Heatmap {
        s_grid: Vec<f64>,
        omega_grid: Vec<f64>,
        eps0: f64,
        detection: ChaosDetection,
    },
    Lyapunov {
        params: ModelParams,
        initial: (f64, f64),
        s_grid: Vec<f64>,
        settings: LyapunovSettings,
    },
    Poincare {
        params: ModelParams,
        initials: Vec<(f64, f64)>,
        lattice: usize,
        n_periods: usize,
        dt: f64,
    },
    Sweep {
        mode: SweepMode,
        spec: ProtocolSpec,
        params: ModelParams,
        s_grid: Vec<f64>,
        eps0_grid: Vec<f64>,
        s_select: Vec<f64>,
        delta_grid: Vec<f64>,
    },
    Scaling {
        spec: ProtocolSpec,
        params: ModelParams,
        n_list: Vec<usize>,
        s_grid: Vec<f64>,
    },
    Spectrum {
        params: ModelParams,
        s_grid: Vec<f64>,
    },
}

fn unit_interval(field: &'static str, grid: &[f64]) -> Result<()> {
    if grid.iter().any(|s| !(0.0..=1.0).contains(s)) {
        return Err(invalid(field, "values must lie in [0, 1]"));
    }
    Ok(())
}

/// Resolved config with every default filled in, as recorded in manifests.
pub fn resolved_config(command: CommandKind, cfg: &RunConfig) -> RunConfig {
    let mut out = RunConfig {
        model: cfg.model,
        s_grid: Some(cfg.s_grid.clone().unwrap_or_else(|| command.default_s_grid())),
        ..Default::default()
    };
    match command {
        CommandKind::Bifurcation => out.protocol = Some(cfg.protocol.unwrap_or_default()),
        CommandKind::Heatmap => out.heatmap = Some(cfg.heatmap.clone().unwrap_or_default()),
        CommandKind::Lyapunov => out.lyapunov = Some(cfg.lyapunov.unwrap_or_default()),
        CommandKind::Poincare => {
            out.s_grid = None;
            out.poincare = Some(cfg.poincare.clone().unwrap_or_default());
        }
        CommandKind::Sweep => {
            out.protocol = Some(cfg.protocol.unwrap_or(ProtocolSection {
                regime: Regime::Quantum,
                ..Default::default()
            }));
            out.sweep = cfg.sweep.clone();
        }
        CommandKind::Scaling => {
            out.protocol = Some(cfg.protocol.unwrap_or(ProtocolSection {
                kind: KindName::Gsqpt,
                regime: Regime::Quantum,
                ..Default::default()
            }));
            out.scaling = Some(cfg.scaling.clone().unwrap_or_default());
        }
        CommandKind::Spectrum => {}
    }
    out
}

/// Validates `cfg` for `command` without computing anything.
pub fn build_job(command: CommandKind, cfg: &RunConfig) -> Result<Job> {
    let cfg = resolved_config(command, cfg);
    let params = cfg.model.params()?;
    let s_grid = match &cfg.s_grid {
        Some(g) => {
            let v = g.resolve("s_grid")?;
            unit_interval("s_grid", &v)?;
            v
        }
        None => Vec::new(),
    };
    Ok(match command {
        CommandKind::Bifurcation => Job::Bifurcation {
            spec: cfg.protocol.unwrap_or_default().spec()?,
            params,
            s_grid,
        },
        CommandKind::Heatmap => {
            let h = cfg.heatmap.unwrap_or_default();
            let omega_grid = h.omega_grid.resolve("omega_grid")?;
            if omega_grid[0] <= 0.0 {
                return Err(invalid("omega_grid", "frequencies must be > 0"));
            }
            if h.detection.ic_count < 50 {
                return Err(invalid("ic_count", format!("{} must be >= 50", h.detection.ic_count)));
            }
            if !(h.detection.lambda_threshold > 0.0) {
                return Err(invalid("lambda_threshold", "must be > 0"));
            }
            LyapunovSettings {
                horizon: h.detection.horizon,
                renorm_interval: h.detection.renorm_interval,
                neighbor_offset: h.detection.neighbor_offset,
                dt: h.detection.dt,
            }
            .validate()?;
            Job::Heatmap {
                s_grid,
                omega_grid,
                eps0: params.eps0(),
                detection: h.detection,
            }
        }
        CommandKind::Lyapunov => {
            let l = cfg.lyapunov.unwrap_or_default();
            l.settings.validate()?;
            let initial = l.initial.classical_angles()?;
            crate::model::BlochState::from_angles(initial.0, initial.1)?;
            Job::Lyapunov {
                params,
                initial,
                s_grid,
                settings: l.settings,
            }
        }
        CommandKind::Poincare => {
            let p = cfg.poincare.unwrap_or_default();
            if p.n_periods == 0 {
                return Err(invalid("n_periods", "must be >= 1"));
            }
            if !(p.dt > 0.0) {
                return Err(invalid("dt", "must be > 0"));
            }
            if !(params.omega() > 0.0) {
                return Err(invalid("omega", "stroboscopic sampling needs ω > 0"));
            }
            let initials: Vec<(f64, f64)> = p
                .initials
                .unwrap_or_default()
                .into_iter()
                .map(|[t, f]| (t, f))
                .collect();
            for &(t, f) in &initials {
                crate::model::BlochState::from_angles(t, f)?;
            }
            if initials.is_empty() && p.lattice == 0 {
                return Err(invalid("lattice", "need initials or lattice >= 1"));
            }
            Job::Poincare {
                params,
                initials,
                lattice: p.lattice,
                n_periods: p.n_periods,
                dt: p.dt,
            }
        }
        CommandKind::Sweep => {
            let sw = cfg
                .sweep
                .ok_or_else(|| invalid("sweep", "a [sweep] section with a mode is required"))?;
            let spec = cfg.protocol.unwrap_or_default().spec()?;
            let eps0_grid = sw.eps0_grid.resolve("eps0_grid")?;
            if eps0_grid[0] < 0.0 {
                return Err(invalid("eps0_grid", "amplitudes must be >= 0"));
            }
            let s_select = sw.s_select.unwrap_or_default();
            unit_interval("s_select", &s_select)?;
            let delta_grid = match sw.delta_grid {
                Some(g) => g.resolve("delta_grid")?,
                None => vec![spec.delta],
            };
            if delta_grid[0] <= 0.0 {
                return Err(invalid("delta_grid", "values must be > 0"));
            }
            if sw.mode == SweepMode::Perturbation && s_select.is_empty() {
                return Err(invalid("s_select", "perturbation sweeps need s_select"));
            }
            Job::Sweep {
                mode: sw.mode,
                spec,
                params,
                s_grid,
                eps0_grid,
                s_select,
                delta_grid,
            }
        }
        CommandKind::Scaling => {
            let sc = cfg.scaling.unwrap_or_default();
            if sc.n_list.len() < 3 {
                return Err(invalid("n_list", "need at least 3 system sizes"));
            }
            if sc.n_list.windows(2).any(|w| w[1] <= w[0]) || sc.n_list.iter().any(|n| n % 2 != 0 || *n == 0) {
                return Err(invalid("n_list", "sizes must be even, positive and strictly increasing"));
            }
            Job::Scaling {
                spec: cfg.protocol.unwrap_or_default().spec()?,
                params,
                n_list: sc.n_list,
                s_grid,
            }
        }
        CommandKind::Spectrum => Job::Spectrum { params, s_grid },
    })
}

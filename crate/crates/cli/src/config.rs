//! Run configuration: a TOML file with dotted sections.
//!
//! ```toml
//! seed = 7
//!
//! [grid]
//! xmin = -12.0
//! xmax = 12.0
//! n = 400
//!
//! [kernel1]
//! family = "asymmetric_laplace"
//! rate_left = 2.0
//! rate_right = 3.0
//! weight_left = 0.5
//!
//! [model]
//! d1 = 1.0
//! d2 = 1.0
//! a = { kind = "constant", value = 0.1 }
//! b = { kind = "constant", value = 0.1 }
//! gamma = { kind = "constant", value = 0.1 }
//! incidence = { model = "bilinear", beta0 = 1.0 }
//!
//! [initial]
//! h0 = 1.0
//! s0 = { kind = "bump", amplitude = 3.0 }
//! i0 = { kind = "bump", amplitude = 0.1 }
//! ```

use std::path::Path;

use frontera::dynamics::DynamicsError;
use frontera::experiments::{ClassifyTolerances, MuStarOptions};
use frontera::kernels::KernelConfig;
use frontera::spectral::BisectionTolerances;
use frontera::{
    DiscretizationError, DriftSign, EigenOptions, Grid1D, IncidenceModel, InitialProfile, KernelSpec,
    Profile, SimConfig,
};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{key}: {message}")]
    Validation { key: String, message: String },
}

impl ConfigError {
    fn invalid(key: impl Into<String>, message: impl ToString) -> Self {
        ConfigError::Validation { key: key.into(), message: message.to_string() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    seed: u64,
    grid: RawGrid,
    kernel1: KernelConfig,
    kernel2: Option<KernelConfig>,
    model: RawModel,
    initial: RawInitial,
    #[serde(default)]
    dynamics: RawDynamics,
    #[serde(default)]
    eigen: RawEigen,
    #[serde(default)]
    spectral: RawSpectral,
    #[serde(default)]
    critical_length: RawCriticalLength,
    #[serde(default)]
    classify: RawClassify,
    #[serde(default)]
    mu_star: RawMuStar,
    compare: Option<RawCompare>,
    sweep: Option<RawSweep>,
    #[serde(default)]
    block: RawBlock,
    #[serde(default)]
    kernel_check: RawKernelCheck,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    xmin: f64,
    xmax: f64,
    #[serde(default = "default_n")]
    n: usize,
}

fn default_n() -> usize {
    400
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    d1: f64,
    d2: f64,
    a: Profile,
    b: Profile,
    gamma: Profile,
    period: Option<f64>,
    incidence: IncidenceModel,
    #[serde(default)]
    drift_sign: DriftSign,
    #[serde(default = "one")]
    scap: f64,
}

fn one() -> f64 {
    1.0
}

/// Initial datum; `csv` reads `x,value` rows from a file next to the config.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawProfile {
    Bump { amplitude: f64 },
    Constant { value: f64 },
    Tabulated { points: Vec<(f64, f64)> },
    Csv { path: String },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    h0: f64,
    s0: RawProfile,
    i0: RawProfile,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawDynamics {
    mu: f64,
    horizon: f64,
    cfl_safety: f64,
    record_every: usize,
    snapshots: bool,
    clamp: bool,
    clamp_budget: f64,
}

impl Default for RawDynamics {
    fn default() -> Self {
        Self {
            mu: 1.0,
            horizon: 40.0,
            cfl_safety: 0.5,
            record_every: 0,
            snapshots: false,
            clamp: true,
            clamp_budget: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEigen {
    #[serde(default = "perron")]
    convention: String,
    tol: Option<f64>,
    max_iter: Option<usize>,
    power_budget: Option<usize>,
    reducible_floor: Option<f64>,
}

fn perron() -> String {
    "perron".into()
}

impl Default for RawEigen {
    fn default() -> Self {
        Self { convention: perron(), tol: None, max_iter: None, power_budget: None, reducible_floor: None }
    }
}

/// Which operator `eigen` analyses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    /// `d2 (K2 - I) + b ∂x + β` with `β` from the disease-free state.
    #[default]
    Infection,
    /// `d1 (K1 - I) + a ∂x`.
    Susceptible,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpectral {
    interval: Option<(f64, f64)>,
    cells: Option<usize>,
    #[serde(default)]
    operator: OperatorKind,
    beta: Option<Profile>,
    #[serde(default)]
    export_operator: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawCriticalLength {
    bracket: (f64, f64),
    cells: usize,
    tol_lambda: f64,
    tol_length: f64,
    max_iter: usize,
}

impl Default for RawCriticalLength {
    fn default() -> Self {
        let t = BisectionTolerances::default();
        Self {
            bracket: (0.05, 20.0),
            cells: 200,
            tol_lambda: t.lambda,
            tol_length: t.length,
            max_iter: t.max_iter,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawClassify {
    tol_i: f64,
    tol_g: f64,
    margin: f64,
    min_samples: usize,
    ell_star: Option<f64>,
}

impl Default for RawClassify {
    fn default() -> Self {
        let t = ClassifyTolerances::default();
        Self { tol_i: t.tol_i, tol_g: t.tol_g, margin: t.margin, min_samples: t.min_samples, ell_star: None }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawMuStar {
    bracket: Option<(f64, f64)>,
    max_iter: usize,
    rel_width: f64,
    /// Extra log-spaced verdict samples over the bracket; 0 disables the sweep.
    sweep_points: usize,
}

impl Default for RawMuStar {
    fn default() -> Self {
        let o = MuStarOptions::default();
        Self { bracket: None, max_iter: o.max_iter, rel_width: o.rel_width, sweep_points: 0 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCompare {
    s0: RawProfile,
    i0: RawProfile,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    beta: Profile,
    drift: Option<Profile>,
    #[serde(default = "default_sweep_cells")]
    cells: usize,
    interval: Option<(f64, f64)>,
    d_list: Option<Vec<f64>>,
    x0: Option<f64>,
    d: Option<f64>,
    eps_list: Option<Vec<f64>>,
}

fn default_sweep_cells() -> usize {
    200
}

/// How `block-check` fills the coupling diagonals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingMode {
    /// Linearization at `(S*, 0)`.
    #[default]
    Model,
    /// Seeded uniform draws in `[0, coupling)`.
    Random,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawBlock {
    alpha_extra: f64,
    coupling_mode: CouplingMode,
    coupling: f64,
}

impl Default for RawBlock {
    fn default() -> Self {
        Self { alpha_extra: 0.4, coupling_mode: CouplingMode::Model, coupling: 1e-2 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawKernelCheck {
    exp_rate: f64,
}

impl Default for RawKernelCheck {
    fn default() -> Self {
        Self { exp_rate: 1.0 }
    }
}

#[derive(Debug, Clone)]
pub struct SpectralSettings {
    pub interval: (f64, f64),
    pub cells: usize,
    pub operator: OperatorKind,
    pub beta: Option<Profile>,
    pub export_operator: bool,
}

#[derive(Debug, Clone)]
pub struct CriticalLengthSettings {
    pub bracket: (f64, f64),
    pub cells: usize,
    pub tols: BisectionTolerances,
}

#[derive(Debug, Clone)]
pub struct MuStarSettings {
    pub bracket: Option<(f64, f64)>,
    pub options: MuStarOptions,
    pub sweep_points: usize,
}

#[derive(Debug, Clone)]
pub struct SweepSettings {
    pub beta: Profile,
    pub drift: Profile,
    pub cells: usize,
    pub interval: Option<(f64, f64)>,
    pub d_list: Option<Vec<f64>>,
    pub x0: Option<f64>,
    pub d: f64,
    pub eps_list: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct BlockSettings {
    pub alpha_extra: f64,
    pub coupling_mode: CouplingMode,
    pub coupling: f64,
}

/// A validated run configuration with every default filled in.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub sim: SimConfig,
    pub scap: f64,
    pub eigen: EigenOptions,
    pub spectral: SpectralSettings,
    pub critical_length: CriticalLengthSettings,
    pub classify: ClassifyTolerances,
    pub ell_star: Option<f64>,
    pub mu_star: MuStarSettings,
    pub compare: Option<(InitialProfile, InitialProfile)>,
    pub sweep: Option<SweepSettings>,
    pub block: BlockSettings,
    pub exp_rate: f64,
    pub kernel1_distinct: bool,
}

/// Reads, parses and validates a configuration file.
pub fn parse_config(path: &Path) -> Result<(RunConfig, Vec<u8>), ConfigError> {
    let bytes = std::fs::read(path)
        .map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
    let text = std::str::from_utf8(&bytes).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let cfg = parse_str(text, base)?;
    Ok((cfg, bytes))
}

fn kernel(key: &str, raw: KernelConfig) -> Result<KernelSpec, ConfigError> {
    let spec = KernelSpec::try_from(raw).map_err(|e| ConfigError::invalid(key, format!("(J1) {e}")))?;
    let report = spec.validate(1.0);
    if let Some(f) = report.failures.iter().find(|f| f.starts_with("(J1)")) {
        return Err(ConfigError::invalid(key, f));
    }
    Ok(spec)
}

fn initial(key: &str, raw: RawProfile, base: &Path) -> Result<InitialProfile, ConfigError> {
    Ok(match raw {
        RawProfile::Bump { amplitude } => InitialProfile::Bump { amplitude },
        RawProfile::Constant { value } => InitialProfile::Constant { value },
        RawProfile::Tabulated { points } => InitialProfile::Tabulated { points },
        RawProfile::Csv { path } => {
            let full = base.join(&path);
            let text = std::fs::read_to_string(&full)
                .map_err(|e| ConfigError::invalid(key, format!("cannot read {}: {e}", full.display())))?;
            InitialProfile::Tabulated {
                points: read_points(&text).map_err(|e| ConfigError::invalid(key, e))?,
            }
        }
    })
}

/// `x,value` rows; a non-numeric first line is taken as a header.
fn read_points(text: &str) -> Result<Vec<(f64, f64)>, String> {
    let mut points = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed = match fields.as_slice() {
            [x, v] => x.parse::<f64>().ok().zip(v.parse::<f64>().ok()),
            _ => None,
        };
        match parsed {
            Some(p) => points.push(p),
            None if k == 0 => continue,
            None => return Err(format!("line {}: expected two numbers, got {line:?}", k + 1)),
        }
    }
    Ok(points)
}

fn dynamics_key(err: &DynamicsError) -> String {
    match err {
        DynamicsError::InitialSupport { field, .. } | DynamicsError::InitialSign { field, .. } => {
            format!("initial.{}", field.to_lowercase())
        }
        DynamicsError::Incidence(_) => "model.incidence".into(),
        DynamicsError::Discretization(DiscretizationError::CoefficientSign { name, .. })
        | DynamicsError::Discretization(DiscretizationError::NotPeriodic { name, .. }) => {
            format!("model.{name}")
        }
        DynamicsError::InvalidParameter { name, .. } => match *name {
            "d1" | "d2" => format!("model.{name}"),
            "h0" => "initial.h0".into(),
            "initial.points" => "initial".into(),
            other => format!("dynamics.{other}"),
        },
        DynamicsError::BoundaryHitGridEdge { .. } => "initial.h0".into(),
        _ => "grid".into(),
    }
}

pub fn parse_str(text: &str, base: &Path) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.message().to_string()))?;
    if raw.eigen.convention != "perron" {
        return Err(ConfigError::invalid("eigen.convention", "only \"perron\" is supported"));
    }
    let grid =
        Grid1D::new(raw.grid.xmin, raw.grid.xmax, raw.grid.n).map_err(|e| ConfigError::invalid("grid", e))?;
    let kernel1_distinct = raw.kernel2.is_some();
    let kernel2 = raw.kernel2.clone().unwrap_or_else(|| raw.kernel1.clone());
    let kernel1 = kernel("kernel1", raw.kernel1)?;
    let kernel2 = kernel(if kernel1_distinct { "kernel2" } else { "kernel1" }, kernel2)?;
    if !(raw.model.scap.is_finite() && raw.model.scap > 0.0) {
        return Err(ConfigError::invalid("model.scap", "must be > 0"));
    }

    let sim = SimConfig {
        grid,
        kernel1,
        kernel2,
        d1: raw.model.d1,
        d2: raw.model.d2,
        a: raw.model.a,
        b: raw.model.b,
        gamma: raw.model.gamma,
        period: raw.model.period,
        incidence: raw.model.incidence,
        drift_sign: raw.model.drift_sign,
        mu: raw.dynamics.mu,
        h0: raw.initial.h0,
        s0: initial("initial.s0", raw.initial.s0, base)?,
        i0: initial("initial.i0", raw.initial.i0, base)?,
        horizon: raw.dynamics.horizon,
        cfl_safety: raw.dynamics.cfl_safety,
        record_every: raw.dynamics.record_every,
        snapshots: raw.dynamics.snapshots,
        clamp: raw.dynamics.clamp,
        clamp_budget: raw.dynamics.clamp_budget,
    };
    sim.validate().map_err(|e| ConfigError::invalid(dynamics_key(&e), e))?;

    let defaults = EigenOptions::default();
    let eigen = EigenOptions {
        tol: raw.eigen.tol.unwrap_or(defaults.tol),
        max_iter: raw.eigen.max_iter.unwrap_or(defaults.max_iter),
        power_budget: raw.eigen.power_budget.unwrap_or(defaults.power_budget),
        reducible_floor: raw.eigen.reducible_floor.unwrap_or(defaults.reducible_floor),
    };
    if !(eigen.tol > 0.0) || eigen.max_iter == 0 {
        return Err(ConfigError::invalid("eigen", "tol must be > 0 and max_iter >= 1"));
    }

    let spectral = SpectralSettings {
        interval: raw.spectral.interval.unwrap_or((-sim.h0, sim.h0)),
        cells: raw.spectral.cells.unwrap_or(raw.grid.n),
        operator: raw.spectral.operator,
        beta: raw.spectral.beta,
        export_operator: raw.spectral.export_operator,
    };
    Grid1D::new(spectral.interval.0, spectral.interval.1, spectral.cells)
        .map_err(|e| ConfigError::invalid("spectral", e))?;

    let cl = raw.critical_length;
    let critical_length = CriticalLengthSettings {
        bracket: cl.bracket,
        cells: cl.cells,
        tols: BisectionTolerances { lambda: cl.tol_lambda, length: cl.tol_length, max_iter: cl.max_iter },
    };
    let c = raw.classify;
    let classify =
        ClassifyTolerances { tol_i: c.tol_i, tol_g: c.tol_g, margin: c.margin, min_samples: c.min_samples };
    let mu_star = MuStarSettings {
        bracket: raw.mu_star.bracket,
        options: MuStarOptions { max_iter: raw.mu_star.max_iter, rel_width: raw.mu_star.rel_width, classify },
        sweep_points: raw.mu_star.sweep_points,
    };

    let compare = match raw.compare {
        Some(cmp) => Some((initial("compare.s0", cmp.s0, base)?, initial("compare.i0", cmp.i0, base)?)),
        None => None,
    };
    let sweep = raw.sweep.map(|s| SweepSettings {
        beta: s.beta,
        drift: s.drift.unwrap_or_else(|| sim.b.clone()),
        cells: s.cells,
        interval: s.interval,
        d_list: s.d_list,
        x0: s.x0,
        d: s.d.unwrap_or(sim.d2),
        eps_list: s.eps_list,
    });
    if raw.block.alpha_extra < 0.0 || raw.block.coupling < 0.0 {
        return Err(ConfigError::invalid("block", "alpha_extra and coupling must be >= 0"));
    }

    Ok(RunConfig {
        seed: raw.seed,
        sim,
        scap: raw.model.scap,
        eigen,
        spectral,
        critical_length,
        classify,
        ell_star: c.ell_star,
        mu_star,
        compare,
        sweep,
        block: BlockSettings {
            alpha_extra: raw.block.alpha_extra,
            coupling_mode: raw.block.coupling_mode,
            coupling: raw.block.coupling,
        },
        exp_rate: raw.kernel_check.exp_rate,
        kernel1_distinct,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const MINIMAL: &str = r#"
[grid]
xmin = -12.0
xmax = 12.0

[kernel1]
family = "asymmetric_laplace"
rate_left = 2.0
rate_right = 3.0
weight_left = 0.5

[model]
d1 = 1.0
d2 = 1.0
a = { kind = "constant", value = 0.1 }
b = { kind = "constant", value = 0.1 }
gamma = { kind = "constant", value = 0.1 }
incidence = { model = "bilinear", beta0 = 1.0 }

[initial]
h0 = 1.0
s0 = { kind = "bump", amplitude = 3.0 }
i0 = { kind = "bump", amplitude = 0.1 }
"#;

    fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        parse_str(text, Path::new("."))
    }

    #[test]
    fn defaults_are_filled() {
        let cfg = parse(MINIMAL).unwrap();
        assert_eq!(cfg.sim.grid.len(), 400);
        assert_eq!(cfg.sim.cfl_safety, 0.5);
        assert_eq!(cfg.sim.horizon, 40.0);
        assert_eq!(cfg.scap, 1.0);
        assert_eq!(cfg.sim.kernel1, cfg.sim.kernel2);
        assert_eq!(cfg.spectral.interval, (-1.0, 1.0));
        assert_eq!(cfg.seed, 0);
    }

    #[test]
    fn negative_gamma_cites_h2() {
        let text = MINIMAL.replace(
            "gamma = { kind = \"constant\", value = 0.1 }",
            "gamma = { kind = \"constant\", value = -0.1 }",
        );
        let err = parse(&text).unwrap_err().to_string();
        assert!(err.starts_with("model.gamma:") && err.contains("(H2)"), "{err}");
    }

    #[test]
    fn initial_support_cites_h3() {
        let text = MINIMAL.replace(
            "i0 = { kind = \"bump\", amplitude = 0.1 }",
            "i0 = { kind = \"tabulated\", points = [[-0.5, 0.1], [1.5, 0.2]] }",
        );
        let err = parse(&text).unwrap_err().to_string();
        assert!(err.starts_with("initial.i0:") && err.contains("(H3)"), "{err}");
    }

    #[test]
    fn bad_kernel_cites_j1() {
        let text = MINIMAL.replace("weight_left = 0.5", "weight_left = 1.5");
        let err = parse(&text).unwrap_err().to_string();
        assert!(err.starts_with("kernel1:") && err.contains("(J1)"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{MINIMAL}\n[dynamics]\nmu = 1.0\nbogus = 2\n");
        assert!(matches!(parse(&text), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn csv_points_skip_a_header() {
        assert_eq!(read_points("x,value\n-0.5,0\n0,1\n").unwrap(), vec![(-0.5, 0.0), (0.0, 1.0)]);
        assert!(read_points("x,value\n1,2,3\n").is_err());
    }
}

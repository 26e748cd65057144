//! One function per subcommand. Each returns the summary results, warnings
//! and the files to write; nothing here touches the filesystem.

use clap::ValueEnum;
use frontera::discretization::assemble_operator;
use frontera::dynamics::{compare_runs, Simulator};
use frontera::equilibrium::{alpha_profile, beta_profile, disease_free_profile, infection_slope};
use frontera::experiments::{
    classify, estimate_mu_star, gaps_decreasing, model_beta, model_critical_length, model_lambda_p, mu_sweep,
    verdicts_monotone, SweepProblem,
};
use frontera::export;
use frontera::spectral::{
    block_spectral_bound, dense_spectral_bound, effective_bound, principal_eigenpair, BlockOperator,
    NextGeneration,
};
use frontera::{Error, Grid1D, SimConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::{CouplingMode, OperatorKind, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Subcommand {
    ValidateKernel,
    Eigen,
    R0,
    CriticalLength,
    DiseaseFree,
    Simulate,
    Compare,
    Classify,
    MuStar,
    SweepSmallD,
    SweepSmallEps,
    BlockCheck,
}

impl Subcommand {
    pub fn name(self) -> String {
        self.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
    }
}

#[derive(Debug, Error)]
pub enum CommandError {
    /// The configuration lacks a section the subcommand needs.
    #[error("{0}")]
    Missing(String),
    #[error(transparent)]
    Compute(#[from] Error),
}

macro_rules! compute_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CommandError {
            fn from(e: $t) -> Self {
                CommandError::Compute(e.into())
            }
        }
    )*};
}

compute_from!(
    frontera::KernelError,
    frontera::DiscretizationError,
    frontera::SpectralError,
    frontera::EquilibriumError,
    frontera::DynamicsError,
    frontera::ExperimentError
);

type Result<T> = std::result::Result<T, CommandError>;

#[derive(Debug, Default)]
pub struct Outcome {
    pub results: Value,
    pub warnings: Vec<String>,
    /// `(file name, contents)` in write order.
    pub files: Vec<(String, String)>,
    /// Printed on standard output instead of the summary when set.
    pub stdout: Option<Value>,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn missing(what: &str) -> CommandError {
    CommandError::Missing(what.to_string())
}

pub fn dispatch(cmd: Subcommand, cfg: &RunConfig, snapshots: bool) -> Result<Outcome> {
    match cmd {
        Subcommand::ValidateKernel => validate_kernel(cfg),
        Subcommand::Eigen => eigen(cfg),
        Subcommand::R0 => r0(cfg),
        Subcommand::CriticalLength => critical_length(cfg),
        Subcommand::DiseaseFree => disease_free(cfg),
        Subcommand::Simulate => simulate(cfg, snapshots),
        Subcommand::Compare => compare(cfg),
        Subcommand::Classify => classify_run(cfg, snapshots),
        Subcommand::MuStar => mu_star(cfg),
        Subcommand::SweepSmallD => sweep_small_d(cfg),
        Subcommand::SweepSmallEps => sweep_small_eps(cfg),
        Subcommand::BlockCheck => block_check(cfg),
    }
}

fn spectral_grid(cfg: &RunConfig) -> Result<Grid1D> {
    let s = &cfg.spectral;
    Ok(Grid1D::new(s.interval.0, s.interval.1, s.cells)?)
}

fn validate_kernel(cfg: &RunConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut results = serde_json::Map::new();
    let mut kernels = vec![("kernel1", &cfg.sim.kernel1)];
    if cfg.kernel1_distinct {
        kernels.push(("kernel2", &cfg.sim.kernel2));
    }
    for (name, k) in kernels {
        let report = k.validate(cfg.exp_rate);
        for f in &report.failures {
            out.warnings.push(format!("{name}: {f}"));
        }
        results.insert(name.to_string(), to_value(&report));
    }
    out.results = Value::Object(results);
    Ok(out)
}

fn eigen(cfg: &RunConfig) -> Result<Outcome> {
    let grid = spectral_grid(cfg)?;
    let sim = &cfg.sim;
    let (d, kernel, drift, zeroth) = match cfg.spectral.operator {
        OperatorKind::Infection => {
            let beta = match &cfg.spectral.beta {
                Some(p) => p.sample(&grid)?,
                None => model_beta(sim, &grid, cfg.scap, &cfg.eigen)?,
            };
            (sim.d2, &sim.kernel2, sim.b.sample(&grid)?, beta)
        }
        OperatorKind::Susceptible => (sim.d1, &sim.kernel1, sim.a.sample(&grid)?, vec![0.0; grid.len()]),
    };
    let op = assemble_operator(&grid, d, kernel, &drift, &zeroth, sim.drift_sign)?;
    let r = principal_eigenpair(&op.entries, &cfg.eigen)?;
    let mut out = Outcome {
        stdout: Some(json!({ "lambda": r.lambda, "residual": r.residual, "iterations": r.iterations })),
        results: json!({
            "lambda": r.lambda,
            "residual": r.residual,
            "iterations": r.iterations,
            "bracket": [r.bracket.0, r.bracket.1],
            "interval": [grid.xmin(), grid.xmax()],
            "cells": grid.len(),
        }),
        ..Default::default()
    };
    out.files.push(("eigenfunction.csv".into(), export::eigenfunction_csv(&grid.centers(), &r.phi)));
    if cfg.spectral.export_operator {
        out.files.push(("operator.csv".into(), export::operator_csv(&op.entries)));
    }
    Ok(out)
}

fn r0(cfg: &RunConfig) -> Result<Outcome> {
    let grid = spectral_grid(cfg)?;
    let sim = &cfg.sim;
    let profile = disease_free_profile(
        &grid,
        sim.d1,
        &sim.kernel1,
        &sim.a.sample(&grid)?,
        sim.drift_sign,
        cfg.scap,
        &cfg.eigen,
    )?;
    let f = infection_slope(&profile, &sim.incidence);
    let ng = NextGeneration::new(
        &grid,
        sim.d2,
        &sim.kernel2,
        &sim.b.sample(&grid)?,
        &sim.gamma.sample(&grid)?,
        &f,
        sim.drift_sign,
        cfg.eigen,
    )?;
    let r0 = ng.r0()?;
    let lam = ng.lambda_p()?;
    let mut out = Outcome { warnings: profile.warnings.clone(), ..Default::default() };
    let radius = match ng.k_lambda_radius(lam.lambda) {
        Ok(k) => Some(k.value),
        Err(e) => {
            out.warnings.push(format!("r(K_lambda) at lambda_p unavailable: {e}"));
            None
        }
    };
    if (lam.lambda > 0.0) != (r0.value > 1.0) && lam.lambda != 0.0 {
        out.warnings.push("sign(lambda_p) and sign(R0 - 1) disagree".into());
    }
    out.results = json!({
        "R0": r0.value,
        "r0_residual": r0.residual,
        "lambda": lam.lambda,
        "residual": lam.residual,
        "iterations": lam.iterations,
        "k_lambda_radius": radius,
        "interval": [grid.xmin(), grid.xmax()],
        "cells": grid.len(),
    });
    Ok(out)
}

fn ell_star(cfg: &RunConfig) -> Result<f64> {
    if let Some(ell) = cfg.ell_star {
        return Ok(ell);
    }
    let cl = &cfg.critical_length;
    Ok(model_critical_length(&cfg.sim, cfg.scap, cl.cells, cl.bracket, cl.tols, &cfg.eigen)?.ell_star)
}

fn critical_length(cfg: &RunConfig) -> Result<Outcome> {
    let cl = &cfg.critical_length;
    let r = model_critical_length(&cfg.sim, cfg.scap, cl.cells, cl.bracket, cl.tols, &cfg.eigen)?;
    let h = 0.5 * r.ell_star;
    let step = 10.0 * cl.tols.length;
    let below = model_lambda_p(&cfg.sim, h - step, cl.cells, cfg.scap, &cfg.eigen)?;
    let above = model_lambda_p(&cfg.sim, h + step, cl.cells, cfg.scap, &cfg.eigen)?;
    let mut out = Outcome::default();
    if !(below < 0.0 && above > 0.0) {
        out.warnings
            .push(format!("lambda_p at ell*/2 -/+ 10 tol is {below}, {above}; expected a sign change"));
    }
    let mut results = to_value(&r);
    results["lambda_below"] = json!(below);
    results["lambda_above"] = json!(above);
    results["cells"] = json!(cl.cells);
    out.results = results;
    Ok(out)
}

fn disease_free(cfg: &RunConfig) -> Result<Outcome> {
    let grid = spectral_grid(cfg)?;
    let sim = &cfg.sim;
    let profile = disease_free_profile(
        &grid,
        sim.d1,
        &sim.kernel1,
        &sim.a.sample(&grid)?,
        sim.drift_sign,
        cfg.scap,
        &cfg.eigen,
    )?;
    let beta = beta_profile(&profile, &sim.incidence, &sim.gamma.sample(&grid)?)?;
    let alpha = alpha_profile(&profile, &sim.incidence);
    let top = beta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(Outcome {
        results: json!({
            "lambda0": profile.lambda0,
            "cap": profile.cap,
            "interval": [profile.interval.0, profile.interval.1],
            "max_beta": top,
            "cells": grid.len(),
        }),
        warnings: profile.warnings.clone(),
        files: vec![("profile.csv".into(), export::profile_csv(&profile.x, &profile.sstar, &beta, &alpha))],
        stdout: None,
    })
}

fn sim_config(cfg: &RunConfig, snapshots: bool) -> SimConfig {
    let mut sim = cfg.sim.clone();
    sim.snapshots = sim.snapshots || snapshots;
    sim
}

fn trajectory_files(traj: &frontera::Trajectory, files: &mut Vec<(String, String)>) {
    files.push(("trajectory.csv".into(), export::trajectory_csv(traj)));
    if !traj.snapshots.is_empty() {
        files.push(("snapshots.csv".into(), export::snapshots_csv(traj)));
    }
}

fn envelope_warnings(traj: &frontera::Trajectory) -> Vec<String> {
    let d = &traj.diagnostics;
    let mut w = Vec::new();
    if d.s_envelope_excess > 0.0 || d.i_envelope_excess > 0.0 || d.length_envelope_excess > 0.0 {
        w.push("a sup-norm or length envelope was exceeded".to_string());
    }
    if d.speed_excess > 0.0 || d.moment_excess > 0.0 {
        w.push("boundary speed exceeded its flux bound".to_string());
    }
    if !d.monotone_boundaries {
        w.push("boundaries were not monotone".to_string());
    }
    if d.clamp_total > 0.0 {
        w.push(format!("clamped {:e} of negative mass", d.clamp_total));
    }
    w
}

fn simulate(cfg: &RunConfig, snapshots: bool) -> Result<Outcome> {
    let traj = Simulator::new(sim_config(cfg, snapshots))?.run()?;
    let last = traj.len() - 1;
    let mut out = Outcome {
        results: json!({
            "final_time": traj.times[last],
            "g_final": traj.g[last],
            "h_final": traj.h[last],
            "supS_final": traj.sup_s[last],
            "supI_final": traj.sup_i[last],
            "samples": traj.len(),
            "diagnostics": to_value(&traj.diagnostics),
        }),
        warnings: envelope_warnings(&traj),
        ..Default::default()
    };
    trajectory_files(&traj, &mut out.files);
    Ok(out)
}

fn compare(cfg: &RunConfig) -> Result<Outcome> {
    let (s0, i0) =
        cfg.compare.clone().ok_or_else(|| missing("compare needs a [compare] section with s0 and i0"))?;
    let low = sim_config(cfg, false);
    let high = SimConfig { s0, i0, ..low.clone() };
    high.validate()?;
    let rep = compare_runs(&low, &high)?;
    let mut out = Outcome { results: to_value(&rep), ..Default::default() };
    if !rep.holds {
        out.warnings.push("ordering was violated".into());
    }
    Ok(out)
}

fn classify_run(cfg: &RunConfig, snapshots: bool) -> Result<Outcome> {
    let mut warnings = Vec::new();
    let ell = match ell_star(cfg) {
        Ok(v) => Some(v),
        Err(e) => {
            warnings.push(format!("no critical length reference: {e}"));
            None
        }
    };
    let sim = sim_config(cfg, snapshots);
    let traj = Simulator::new(sim.clone())?.run()?;
    let verdict = classify(&traj, &sim, ell, &cfg.classify)?;
    warnings.extend(envelope_warnings(&traj));
    let mut out = Outcome { results: to_value(&verdict), warnings, ..Default::default() };
    trajectory_files(&traj, &mut out.files);
    Ok(out)
}

fn mu_star(cfg: &RunConfig) -> Result<Outcome> {
    let m = &cfg.mu_star;
    let bracket = m.bracket.ok_or_else(|| missing("mu-star needs mu_star.bracket"))?;
    let ell = ell_star(cfg)?;
    let est = estimate_mu_star(&cfg.sim, bracket, ell, &m.options)?;
    let mut samples = est.samples.clone();
    samples.sort_by(|a, b| a.mu.total_cmp(&b.mu));
    let mut out = Outcome::default();
    let mut results = to_value(&est);
    results["ell_star"] = json!(ell);
    results["relative_width"] = json!((est.bracket.1 - est.bracket.0) / est.mu_star);
    if m.sweep_points >= 2 {
        let (lo, hi) = bracket;
        let k = m.sweep_points - 1;
        let mus: Vec<f64> = (0..=k)
            .map(|j| {
                if lo > 0.0 {
                    lo * (hi / lo).powf(j as f64 / k as f64)
                } else {
                    lo + (hi - lo) * j as f64 / k as f64
                }
            })
            .collect();
        let sweep = mu_sweep(&cfg.sim, &mus, Some(ell), &m.options.classify)?;
        let monotone = verdicts_monotone(&sweep);
        if !monotone {
            out.warnings.push("verdicts are not monotone in mu".into());
        }
        results["sweep_monotone"] = json!(monotone);
        out.files.push(("mu_sweep.csv".into(), export::mu_csv(&sweep)));
    }
    out.files.insert(0, ("mu.csv".into(), export::mu_csv(&samples)));
    out.results = results;
    Ok(out)
}

fn sweep_problem(cfg: &RunConfig) -> Result<(SweepProblem, &crate::config::SweepSettings)> {
    let s = cfg.sweep.as_ref().ok_or_else(|| missing("this subcommand needs a [sweep] section"))?;
    Ok((
        SweepProblem {
            kernel: cfg.sim.kernel2.clone(),
            drift: s.drift.clone(),
            beta: s.beta.clone(),
            drift_sign: cfg.sim.drift_sign,
            cells: s.cells,
            opts: cfg.eigen,
        },
        s,
    ))
}

fn sweep_outcome(rows: Vec<frontera::experiments::SweepRow>, name: &str, csv: String) -> Outcome {
    let decreasing = gaps_decreasing(&rows);
    let mut out = Outcome {
        results: json!({ "rows": to_value(&rows), "gaps_decreasing": decreasing }),
        files: vec![(name.into(), csv)],
        ..Default::default()
    };
    if !decreasing {
        out.warnings.push("gap column is not strictly decreasing".into());
    }
    out
}

fn sweep_small_d(cfg: &RunConfig) -> Result<Outcome> {
    let (p, s) = sweep_problem(cfg)?;
    let interval = s.interval.ok_or_else(|| missing("sweep-small-d needs sweep.interval"))?;
    let d_list = s.d_list.as_ref().ok_or_else(|| missing("sweep-small-d needs sweep.d_list"))?;
    let rows = p.sweep_small_d(interval, d_list)?;
    let csv = export::sweep_d_csv(&rows);
    Ok(sweep_outcome(rows, "sweep_d.csv", csv))
}

fn sweep_small_eps(cfg: &RunConfig) -> Result<Outcome> {
    let (p, s) = sweep_problem(cfg)?;
    let x0 = s.x0.ok_or_else(|| missing("sweep-small-eps needs sweep.x0"))?;
    let eps = s.eps_list.as_ref().ok_or_else(|| missing("sweep-small-eps needs sweep.eps_list"))?;
    let rows = p.sweep_small_interval(x0, s.d, eps)?;
    let csv = export::sweep_eps_csv(&rows);
    Ok(sweep_outcome(rows, "sweep_eps.csv", csv))
}

fn block_check(cfg: &RunConfig) -> Result<Outcome> {
    let grid = spectral_grid(cfg)?;
    let sim = &cfg.sim;
    let n = grid.len();
    let profile = disease_free_profile(
        &grid,
        sim.d1,
        &sim.kernel1,
        &sim.a.sample(&grid)?,
        sim.drift_sign,
        cfg.scap,
        &cfg.eigen,
    )?;
    let gamma = sim.gamma.sample(&grid)?;
    let beta = beta_profile(&profile, &sim.incidence, &gamma)?;
    let alpha = alpha_profile(&profile, &sim.incidence);
    let alpha_total: Vec<f64> = alpha.iter().map(|a| a + cfg.block.alpha_extra).collect();
    let minus_alpha: Vec<f64> = alpha_total.iter().map(|a| -a).collect();
    let a_s =
        assemble_operator(&grid, sim.d1, &sim.kernel1, &sim.a.sample(&grid)?, &minus_alpha, sim.drift_sign)?
            .entries;
    let a_i =
        assemble_operator(&grid, sim.d2, &sim.kernel2, &sim.b.sample(&grid)?, &beta, sim.drift_sign)?.entries;
    let (b, c) = match cfg.block.coupling_mode {
        CouplingMode::Model => {
            let f = infection_slope(&profile, &sim.incidence);
            (gamma.iter().zip(&f).map(|(g, f)| g - f).collect(), alpha)
        }
        CouplingMode::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let width = cfg.block.coupling;
            let mut draw = || if width > 0.0 { rng.random_range(0.0..width) } else { 0.0 };
            let b: Vec<f64> = (0..n).map(|_| draw()).collect();
            let c: Vec<f64> = (0..n).map(|_| draw()).collect();
            (b, c)
        }
    };
    let block = BlockOperator::new(a_s, a_i, b, c)?;
    let s_block = block_spectral_bound(&block);
    let s_as = dense_spectral_bound(&block.a_s);
    let s_ai = dense_spectral_bound(&block.a_i);
    let alpha_min = alpha_total.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut out = Outcome::default();
    let eff = match effective_bound(&block, &cfg.eigen) {
        Ok(v) => Some(v),
        Err(e) => {
            out.warnings.push(format!("effective operator unavailable: {e}"));
            None
        }
    };
    if s_as > -alpha_min + 1e-8 {
        out.warnings.push(format!("s(A_s) = {s_as} exceeds -min alpha = {}", -alpha_min));
    }
    out.results = json!({
        "s_block": s_block,
        "s_as": s_as,
        "s_ai": s_ai,
        "alpha_min": alpha_min,
        "lambda_eff": eff,
        "gap": eff.map(|e| (s_block - e).abs()),
        "coupling_mode": match cfg.block.coupling_mode { CouplingMode::Model => "model", CouplingMode::Random => "random" },
        "cells": n,
    });
    Ok(out)
}

//! Finite-horizon spreading/vanishing classification, the `μ*` bisection and
//! the small-diffusion / small-interval eigenvalue sweeps.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::discretization::{assemble_operator, DiscretizationError, DriftSign, Grid1D, Profile};
use crate::dynamics::{DynamicsError, SimConfig, Simulator, Trajectory};
use crate::equilibrium::{beta_profile, disease_free_profile, EquilibriumError};
use crate::kernels::KernelSpec;
use crate::spectral::{
    dense_spectral_bound, lambda_p, principal_eigenpair, BisectionTolerances, CriticalLength, EigenOptions,
    SpectralError, SymmetricIntervalProblem,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Equilibrium(#[from] EquilibriumError),
    #[error(transparent)]
    Discretization(#[from] DiscretizationError),
    #[error("trajectory has {0} samples; at least 50 are needed")]
    TooShort(usize),
    #[error("invalid bracket: {0}")]
    BracketInvalid(String),
    #[error("h0 = {h0} >= ell*/2 = {half}: spreading always occurs, so mu* is undefined")]
    SupercriticalStart { h0: f64, half: f64 },
    #[error("midpoint mu = {mu} stays undecided after extending the horizon; bracket ({lo}, {hi})")]
    UndecidedAtMidpoint { mu: f64, lo: f64, hi: f64 },
    #[error("beta attains its maximum on the boundary of the sample range (index {0})")]
    NoInteriorMax(usize),
    #[error("sweep list must be nonempty and strictly decreasing")]
    BadSweepList,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VerdictKind {
    Spreading,
    Vanishing,
    Undecided,
}

impl VerdictKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VerdictKind::Spreading => "Spreading",
            VerdictKind::Vanishing => "Vanishing",
            VerdictKind::Undecided => "Undecided",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    pub final_length: f64,
    /// `d ln(h - g) / dt` over the last 20% of the horizon.
    pub length_growth_rate: f64,
    pub sup_i_final: f64,
    /// `d ln ‖I‖_∞ / dt` over the last 20% of the horizon.
    pub sup_i_trend: f64,
    pub ell_star_reference: Option<f64>,
    /// `‖S/‖S‖ - S*/‖S*‖‖_∞` on the final window, for vanishing runs.
    pub sup_s_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub evidence: Evidence,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyTolerances {
    pub tol_i: f64,
    pub tol_g: f64,
    pub margin: f64,
    pub min_samples: usize,
}

impl Default for ClassifyTolerances {
    fn default() -> Self {
        Self { tol_i: 1e-4, tol_g: 1e-4, margin: 0.05, min_samples: 50 }
    }
}

fn log_rate(t0: f64, v0: f64, t1: f64, v1: f64) -> f64 {
    if t1 <= t0 {
        return 0.0;
    }
    if v0 <= 0.0 || v1 <= 0.0 {
        return if v1 > 0.0 {
            f64::INFINITY
        } else if v0 > 0.0 {
            f64::NEG_INFINITY
        } else {
            0.0
        };
    }
    (v1 / v0).ln() / (t1 - t0)
}

/// Shape distance between the final susceptible field and the disease-free
/// profile of the final window.
pub fn susceptible_shape_gap(
    traj: &Trajectory,
    cfg: &SimConfig,
    opts: &EigenOptions,
) -> Result<f64, ExperimentError> {
    let state = &traj.final_state;
    let w = state.window;
    let sub = traj.grid.subgrid(w.lo, w.hi)?;
    let a = cfg.a.sample(&traj.grid)?;
    let profile =
        disease_free_profile(&sub, cfg.d1, &cfg.kernel1, &a[w.lo..=w.hi], cfg.drift_sign, 1.0, opts)?;
    let s = &state.s[w.lo..=w.hi];
    let top = s.iter().cloned().fold(0.0, f64::max);
    if top <= 0.0 {
        return Ok(1.0);
    }
    Ok(s.iter().zip(&profile.sstar).map(|(v, p)| (v / top - p).abs()).fold(0.0, f64::max))
}

/// Applies the finite-horizon spreading/vanishing rules to a trajectory.
pub fn classify(
    traj: &Trajectory,
    cfg: &SimConfig,
    ell_star: Option<f64>,
    tols: &ClassifyTolerances,
) -> Result<Verdict, ExperimentError> {
    let n = traj.len();
    if n < tols.min_samples {
        return Err(ExperimentError::TooShort(n));
    }
    let t_end = traj.times[n - 1];
    let t_start = traj.times[0];
    let cut = t_end - 0.2 * (t_end - t_start);
    let k = traj.times.iter().position(|t| *t >= cut).unwrap_or(0).min(n - 2);
    let lengths = traj.lengths();
    let growth = log_rate(traj.times[k], lengths[k], t_end, lengths[n - 1]);
    let sup_i_final = traj.sup_i[n - 1];
    let trend = log_rate(traj.times[k], traj.sup_i[k], t_end, sup_i_final);
    let final_length = lengths[n - 1];

    let kind = if sup_i_final < tols.tol_i && growth < tols.tol_g {
        VerdictKind::Vanishing
    } else if sup_i_final > tols.tol_i
        && match ell_star {
            Some(ell) => final_length > ell + tols.margin,
            None => growth >= tols.tol_g,
        }
    {
        VerdictKind::Spreading
    } else {
        VerdictKind::Undecided
    };
    let sup_s_gap = if kind == VerdictKind::Vanishing {
        Some(susceptible_shape_gap(traj, cfg, &EigenOptions::default())?)
    } else {
        None
    };
    Ok(Verdict {
        kind,
        evidence: Evidence {
            final_length,
            length_growth_rate: growth,
            sup_i_final,
            sup_i_trend: trend,
            ell_star_reference: ell_star,
            sup_s_gap,
        },
    })
}

/// `β` on `grid` for the model in `cfg`, with `S*` scaled to `scap`.
pub fn model_beta(
    cfg: &SimConfig,
    grid: &Grid1D,
    scap: f64,
    opts: &EigenOptions,
) -> Result<Vec<f64>, ExperimentError> {
    let a = cfg.a.sample(grid)?;
    let gamma = cfg.gamma.sample(grid)?;
    let profile = disease_free_profile(grid, cfg.d1, &cfg.kernel1, &a, cfg.drift_sign, scap, opts)?;
    Ok(beta_profile(&profile, &cfg.incidence, &gamma)?)
}

/// `λ_p(L_{(-h,h), d2, b} + β)` for the model in `cfg`.
pub fn model_lambda_p(
    cfg: &SimConfig,
    h: f64,
    cells: usize,
    scap: f64,
    opts: &EigenOptions,
) -> Result<f64, ExperimentError> {
    let grid = Grid1D::new(-h, h, cells)?;
    let beta = model_beta(cfg, &grid, scap, opts)?;
    let b = cfg.b.sample(&grid)?;
    Ok(lambda_p(&grid, cfg.d2, &cfg.kernel2, &b, &beta, cfg.drift_sign, opts)?.lambda)
}

/// Critical length of the model in `cfg` with `β` rebuilt on every interval.
pub fn model_critical_length(
    cfg: &SimConfig,
    scap: f64,
    cells: usize,
    bracket: (f64, f64),
    tols: BisectionTolerances,
    opts: &EigenOptions,
) -> Result<CriticalLength, ExperimentError> {
    let problem = SymmetricIntervalProblem {
        d: cfg.d2,
        kernel: &cfg.kernel2,
        drift: &cfg.b,
        drift_sign: cfg.drift_sign,
        cells,
        opts: *opts,
    };
    problem.critical_length(bracket, tols, |grid: &Grid1D| model_beta(cfg, grid, scap, opts))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MuSample {
    pub mu: f64,
    pub verdict: VerdictKind,
    pub sup_i_final: f64,
    pub final_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdEstimate {
    pub mu_star: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
    pub verdict_lo: VerdictKind,
    pub verdict_hi: VerdictKind,
    pub samples: Vec<MuSample>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuStarOptions {
    pub max_iter: usize,
    /// Stop once `(hi - lo) / mid` drops below this.
    pub rel_width: f64,
    pub classify: ClassifyTolerances,
}

impl Default for MuStarOptions {
    fn default() -> Self {
        Self { max_iter: 12, rel_width: 0.05, classify: ClassifyTolerances::default() }
    }
}

/// Simulates at `mu` and classifies; an undecided run is retried once with
/// twice the horizon.
pub fn verdict_at(
    template: &SimConfig,
    mu: f64,
    ell_star: Option<f64>,
    tols: &ClassifyTolerances,
) -> Result<(Verdict, MuSample), ExperimentError> {
    let mut cfg = template.clone();
    cfg.mu = mu;
    cfg.snapshots = false;
    let mut verdict = classify(&Simulator::new(cfg.clone())?.run()?, &cfg, ell_star, tols)?;
    if verdict.kind == VerdictKind::Undecided {
        cfg.horizon *= 2.0;
        verdict = classify(&Simulator::new(cfg.clone())?.run()?, &cfg, ell_star, tols)?;
    }
    let sample = MuSample {
        mu,
        verdict: verdict.kind,
        sup_i_final: verdict.evidence.sup_i_final,
        final_length: verdict.evidence.final_length,
    };
    Ok((verdict, sample))
}

/// Bisection for the expansion rate separating vanishing from spreading.
///
/// `ell_star` is the critical length of the model; it both guards the
/// subcritical precondition `h0 < ℓ*/2` and serves as the spreading reference.
/// Brackets with `lo > 0` are bisected geometrically.
pub fn estimate_mu_star(
    template: &SimConfig,
    bracket: (f64, f64),
    ell_star: f64,
    opts: &MuStarOptions,
) -> Result<ThresholdEstimate, ExperimentError> {
    if template.h0 >= 0.5 * ell_star {
        return Err(ExperimentError::SupercriticalStart { h0: template.h0, half: 0.5 * ell_star });
    }
    let (mut lo, mut hi) = bracket;
    if !(lo >= 0.0 && hi > lo) {
        return Err(ExperimentError::BracketInvalid(format!(
            "mu bracket ({lo}, {hi}) must satisfy 0 <= lo < hi"
        )));
    }
    let tols = &opts.classify;
    let (v_lo, s_lo) = verdict_at(template, lo, Some(ell_star), tols)?;
    if v_lo.kind != VerdictKind::Vanishing {
        return Err(ExperimentError::BracketInvalid(format!(
            "verdict at mu = {lo} is {}, expected Vanishing",
            v_lo.kind.as_str()
        )));
    }
    let (v_hi, s_hi) = verdict_at(template, hi, Some(ell_star), tols)?;
    if v_hi.kind != VerdictKind::Spreading {
        return Err(ExperimentError::BracketInvalid(format!(
            "verdict at mu = {hi} is {}, expected Spreading",
            v_hi.kind.as_str()
        )));
    }
    let mut samples = vec![s_lo, s_hi];
    let mut iterations = 0;
    while iterations < opts.max_iter && (hi - lo) > opts.rel_width * 0.5 * (hi + lo) {
        let mid = if lo > 0.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        let (v, s) = verdict_at(template, mid, Some(ell_star), tols)?;
        samples.push(s);
        iterations += 1;
        match v.kind {
            VerdictKind::Vanishing => lo = mid,
            VerdictKind::Spreading => hi = mid,
            VerdictKind::Undecided => return Err(ExperimentError::UndecidedAtMidpoint { mu: mid, lo, hi }),
        }
    }
    Ok(ThresholdEstimate {
        mu_star: 0.5 * (lo + hi),
        bracket: (lo, hi),
        iterations,
        verdict_lo: VerdictKind::Vanishing,
        verdict_hi: VerdictKind::Spreading,
        samples,
    })
}

/// Verdicts on an increasing `μ` grid, evaluated concurrently.
pub fn mu_sweep(
    template: &SimConfig,
    mus: &[f64],
    ell_star: Option<f64>,
    tols: &ClassifyTolerances,
) -> Result<Vec<MuSample>, ExperimentError> {
    mus.par_iter().map(|mu| verdict_at(template, *mu, ell_star, tols).map(|(_, s)| s)).collect()
}

/// `true` when the verdicts read Vanishing*, Undecided?, Spreading*.
pub fn verdicts_monotone(samples: &[MuSample]) -> bool {
    let rank = |k: VerdictKind| match k {
        VerdictKind::Vanishing => 0,
        VerdictKind::Undecided => 1,
        VerdictKind::Spreading => 2,
    };
    let undecided = samples.iter().filter(|s| s.verdict == VerdictKind::Undecided).count();
    undecided <= 1 && samples.windows(2).all(|w| rank(w[0].verdict) <= rank(w[1].verdict))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub param: f64,
    pub lambda_p: f64,
    pub gap: f64,
}

/// Fixed operator data for the eigenvalue sweeps.
#[derive(Debug, Clone)]
pub struct SweepProblem {
    pub kernel: KernelSpec,
    pub drift: Profile,
    pub beta: Profile,
    pub drift_sign: DriftSign,
    pub cells: usize,
    pub opts: EigenOptions,
}

fn check_decreasing(list: &[f64]) -> Result<(), ExperimentError> {
    if list.is_empty() || list.iter().any(|v| !(*v >= 0.0)) || list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(ExperimentError::BadSweepList);
    }
    Ok(())
}

impl SweepProblem {
    // A reducible matrix (e.g. d = 0 without drift) still has a well-defined
    // spectral bound; take it from the dense spectrum.
    fn lambda_on(&self, grid: &Grid1D, d: f64) -> Result<f64, ExperimentError> {
        let beta = self.beta.sample(grid)?;
        let drift = self.drift.sample(grid)?;
        let op = assemble_operator(grid, d, &self.kernel, &drift, &beta, self.drift_sign)?;
        match principal_eigenpair(&op.entries, &self.opts) {
            Ok(r) => Ok(r.lambda),
            Err(SpectralError::ReducibleSuspected { .. }) => Ok(dense_spectral_bound(&op.entries)),
            Err(e) => Err(e.into()),
        }
    }

    /// `λ_p` on `interval` for each `d`, with gap `|λ_p - max β|`.
    pub fn sweep_small_d(
        &self,
        interval: (f64, f64),
        d_list: &[f64],
    ) -> Result<Vec<SweepRow>, ExperimentError> {
        check_decreasing(d_list)?;
        let grid = Grid1D::new(interval.0, interval.1, self.cells)?;
        let beta = self.beta.sample(&grid)?;
        let top = beta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let inner = beta[1..beta.len() - 1].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        // Ties with an endpoint still count as interior maxima.
        if inner < top - 1e-12 * top.abs().max(1.0) {
            let arg = if beta[0] == top { 0 } else { beta.len() - 1 };
            return Err(ExperimentError::NoInteriorMax(arg));
        }
        d_list
            .par_iter()
            .map(|&d| {
                let lambda = self.lambda_on(&grid, d)?;
                Ok(SweepRow { param: d, lambda_p: lambda, gap: (lambda - top).abs() })
            })
            .collect()
    }

    /// `λ_p` on `(x0 - ε/2, x0 + ε/2)` for each `ε`, with gap `|λ_p - (β(x0) - d)|`.
    pub fn sweep_small_interval(
        &self,
        x0: f64,
        d: f64,
        eps_list: &[f64],
    ) -> Result<Vec<SweepRow>, ExperimentError> {
        check_decreasing(eps_list)?;
        let beta_x0 = self.beta.at(x0).ok_or(ExperimentError::BadSweepList)?;
        let limit = beta_x0 - d;
        eps_list
            .par_iter()
            .map(|&eps| {
                let grid = Grid1D::new(x0 - 0.5 * eps, x0 + 0.5 * eps, self.cells)?;
                let lambda = self.lambda_on(&grid, d)?;
                Ok(SweepRow { param: eps, lambda_p: lambda, gap: (lambda - limit).abs() })
            })
            .collect()
    }
}

/// `true` when the gap column strictly decreases.
pub fn gaps_decreasing(rows: &[SweepRow]) -> bool {
    rows.windows(2).all(|w| w[1].gap < w[0].gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::InitialProfile;
    use crate::equilibrium::IncidenceModel;

    fn decay_config() -> SimConfig {
        SimConfig {
            grid: Grid1D::new(-3.0, 3.0, 120).unwrap(),
            kernel1: KernelSpec::asymmetric_laplace(4.0, 3.0, 0.5).unwrap(),
            kernel2: KernelSpec::asymmetric_laplace(4.0, 3.0, 0.5).unwrap(),
            d1: 0.5,
            d2: 0.5,
            a: Profile::constant(0.0),
            b: Profile::constant(0.0),
            gamma: Profile::constant(1.0),
            period: None,
            incidence: IncidenceModel::Bilinear { beta0: 0.0 },
            drift_sign: DriftSign::Plus,
            mu: 0.0,
            h0: 1.0,
            s0: InitialProfile::Bump { amplitude: 1.0 },
            i0: InitialProfile::Bump { amplitude: 0.5 },
            horizon: 20.0,
            cfl_safety: 0.5,
            record_every: 0,
            snapshots: false,
            clamp: true,
            clamp_budget: 1e-6,
        }
    }

    #[test]
    fn pure_recovery_vanishes() {
        let cfg = decay_config();
        let traj = Simulator::new(cfg.clone()).unwrap().run().unwrap();
        let v = classify(&traj, &cfg, None, &Default::default()).unwrap();
        assert_eq!(v.kind, VerdictKind::Vanishing);
        assert!(v.evidence.sup_i_final < 1e-4);
        assert!(v.evidence.sup_s_gap.is_some());
    }

    #[test]
    fn short_trajectory_is_rejected() {
        let mut cfg = decay_config();
        cfg.horizon = 0.5;
        cfg.record_every = 1000;
        let traj = Simulator::new(cfg.clone()).unwrap().run().unwrap();
        assert!(matches!(
            classify(&traj, &cfg, None, &Default::default()),
            Err(ExperimentError::TooShort(_))
        ));
    }

    #[test]
    fn verdict_order() {
        let s = |v| MuSample { mu: 0.0, verdict: v, sup_i_final: 0.0, final_length: 0.0 };
        use VerdictKind::*;
        assert!(verdicts_monotone(&[s(Vanishing), s(Vanishing), s(Undecided), s(Spreading)]));
        assert!(!verdicts_monotone(&[s(Vanishing), s(Spreading), s(Vanishing)]));
        assert!(!verdicts_monotone(&[s(Undecided), s(Vanishing)]));
    }

    #[test]
    fn zero_diffusion_sweep_is_exact() {
        let p = SweepProblem {
            kernel: KernelSpec::asymmetric_laplace(1.0, 2.0, 0.5).unwrap(),
            drift: Profile::constant(0.0),
            beta: Profile::cosine(0.5, 0.3, 1.0),
            drift_sign: DriftSign::Plus,
            cells: 41,
            opts: Default::default(),
        };
        // Cell 20 sits at x = 0, the maximum of β.
        let rows = p.sweep_small_d((-1.0, 1.0), &[0.0]).unwrap();
        assert!(rows[0].gap < 1e-15);
        assert!(matches!(p.sweep_small_d((-1.0, 1.0), &[0.1, 0.2]), Err(ExperimentError::BadSweepList)));
        let edge = SweepProblem { beta: Profile::cosine(0.5, 0.3, 4.0), ..p };
        assert!(matches!(edge.sweep_small_d((0.0, 1.0), &[0.1]), Err(ExperimentError::NoInteriorMax(0))));
    }
}

//! Explicit method-of-lines integration of the free-boundary SIS system on a
//! fixed global grid.
//!
//! Fields live on all cells and are exactly zero outside the active window
//! `(g, h)`. One step advances `S`, `I` by forward Euler (nonlocal terms by
//! midpoint quadrature over the window, drift by upwinding) and moves the
//! boundaries with the nonlocal outward flux of the pre-step `S`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::discretization::{
    active_window, kernel_weights, ActiveWindow, CoefficientSet, DiscretizationError, DriftSign, Grid1D,
    Profile,
};
use crate::equilibrium::{EquilibriumError, IncidenceModel};
use crate::kernels::KernelSpec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error(transparent)]
    Discretization(#[from] DiscretizationError),
    #[error(transparent)]
    Incidence(#[from] EquilibriumError),
    #[error("(H3) initial {field} is not supported in [-h0, h0]: value {value} at x = {x}")]
    InitialSupport { field: &'static str, x: f64, value: f64 },
    #[error("(H3) initial {field} must be >= 0 and finite: value {value} at x = {x}")]
    InitialSign { field: &'static str, x: f64, value: f64 },
    #[error("invalid simulation parameter {name} = {value}: {reason}")]
    InvalidParameter { name: &'static str, value: f64, reason: &'static str },
    #[error("boundary reached the grid edge at t = {t} (g = {g}, h = {h}); widen the grid")]
    BoundaryHitGridEdge { t: f64, g: f64, h: f64 },
    #[error("cumulative clamping {total:e} exceeds budget {budget:e} at t = {t}; reduce dt")]
    ClampBudgetExceeded { t: f64, total: f64, budget: f64 },
    #[error("non-finite field value at t = {t}")]
    NonFinite { t: f64 },
    #[error("runs are not comparable: {0}")]
    PreconditionUnordered(String),
}

/// Initial datum generator; every variant vanishes outside `[-h0, h0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialProfile {
    /// `amplitude * max(0, cos(π x / (2 h0)))^2`.
    Bump { amplitude: f64 },
    /// `value` on `[-h0, h0]`.
    Constant { value: f64 },
    /// Piecewise-linear through `(x, value)` points, 0 outside their range.
    Tabulated { points: Vec<(f64, f64)> },
}

impl InitialProfile {
    pub fn eval(&self, x: f64, h0: f64) -> f64 {
        match self {
            InitialProfile::Bump { amplitude } => {
                if x.abs() >= h0 {
                    0.0
                } else {
                    let c = (std::f64::consts::PI * x / (2.0 * h0)).cos().max(0.0);
                    amplitude * c * c
                }
            }
            InitialProfile::Constant { value } => {
                if x.abs() <= h0 {
                    *value
                } else {
                    0.0
                }
            }
            InitialProfile::Tabulated { points } => interpolate(points, x),
        }
    }

    /// Samples on the whole grid, zero outside `window`.
    pub fn sample(&self, grid: &Grid1D, window: &ActiveWindow, h0: f64) -> Vec<f64> {
        (0..grid.len())
            .map(|i| if window.contains(i) { self.eval(grid.center(i), h0) } else { 0.0 })
            .collect()
    }

    pub fn sup(&self) -> f64 {
        match self {
            InitialProfile::Bump { amplitude } => amplitude.max(0.0),
            InitialProfile::Constant { value } => value.max(0.0),
            InitialProfile::Tabulated { points } => points.iter().map(|p| p.1).fold(0.0, f64::max),
        }
    }

    pub fn validate(&self, field: &'static str, h0: f64) -> Result<(), DynamicsError> {
        let check_sign = |x: f64, value: f64| {
            if value.is_finite() && value >= 0.0 {
                Ok(())
            } else {
                Err(DynamicsError::InitialSign { field, x, value })
            }
        };
        match self {
            InitialProfile::Bump { amplitude } => check_sign(0.0, *amplitude),
            InitialProfile::Constant { value } => check_sign(0.0, *value),
            InitialProfile::Tabulated { points } => {
                for w in points.windows(2) {
                    if !(w[1].0 > w[0].0) {
                        return Err(DynamicsError::InvalidParameter {
                            name: "initial.points",
                            value: w[1].0,
                            reason: "abscissae must be strictly increasing",
                        });
                    }
                }
                for &(x, value) in points {
                    check_sign(x, value)?;
                    if value > 0.0 && x.abs() > h0 {
                        return Err(DynamicsError::InitialSupport { field, x, value });
                    }
                }
                Ok(())
            }
        }
    }
}

fn interpolate(points: &[(f64, f64)], x: f64) -> f64 {
    let k = points.partition_point(|p| p.0 <= x);
    if k == 0 || k == points.len() {
        return if k == points.len() && points.last().is_some_and(|p| p.0 == x) {
            points[k - 1].1
        } else {
            0.0
        };
    }
    let (x0, y0) = points[k - 1];
    let (x1, y1) = points[k];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub grid: Grid1D,
    pub kernel1: KernelSpec,
    pub kernel2: KernelSpec,
    pub d1: f64,
    pub d2: f64,
    pub a: Profile,
    pub b: Profile,
    pub gamma: Profile,
    pub period: Option<f64>,
    pub incidence: IncidenceModel,
    pub drift_sign: DriftSign,
    pub mu: f64,
    pub h0: f64,
    pub s0: InitialProfile,
    pub i0: InitialProfile,
    pub horizon: f64,
    pub cfl_safety: f64,
    /// Steps between recorded samples; 0 picks about 200 samples.
    pub record_every: usize,
    pub snapshots: bool,
    pub clamp: bool,
    /// Clamping budget relative to `‖S0‖_∞ + ‖I0‖_∞`.
    pub clamp_budget: f64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let positive = |name, value: f64| {
            if value.is_finite() && value > 0.0 {
                Ok(())
            } else {
                Err(DynamicsError::InvalidParameter { name, value, reason: "must be > 0" })
            }
        };
        let nonnegative = |name, value: f64| {
            if value.is_finite() && value >= 0.0 {
                Ok(())
            } else {
                Err(DynamicsError::InvalidParameter { name, value, reason: "must be >= 0" })
            }
        };
        nonnegative("d1", self.d1)?;
        nonnegative("d2", self.d2)?;
        nonnegative("mu", self.mu)?;
        positive("h0", self.h0)?;
        positive("horizon", self.horizon)?;
        positive("cfl_safety", self.cfl_safety)?;
        if self.cfl_safety > 1.0 {
            return Err(DynamicsError::InvalidParameter {
                name: "cfl_safety",
                value: self.cfl_safety,
                reason: "must lie in (0, 1]",
            });
        }
        self.incidence.validate()?;
        self.s0.validate("S0", self.h0)?;
        self.i0.validate("I0", self.h0)?;
        CoefficientSet::new(&self.grid, &self.a, &self.b, &self.gamma, self.period)?;
        let first = self.grid.center(0);
        let last = self.grid.center(self.grid.len() - 1);
        if !(-self.h0 > first && self.h0 < last) {
            return Err(DynamicsError::BoundaryHitGridEdge { t: 0.0, g: -self.h0, h: self.h0 });
        }
        active_window(&self.grid, -self.h0, self.h0)?;
        Ok(())
    }

    /// `R = 2 (‖S0‖ + ‖I0‖)`, the state bound used for the incidence Lipschitz constant.
    pub fn state_bound(&self) -> f64 {
        2.0 * (self.s0.sup() + self.i0.sup())
    }
}

/// `safety * min(dx / max|a|, dx / max|b|, 1 / (d1 + d2 + max γ + L_F))`.
pub fn cfl_dt(cfg: &SimConfig) -> Result<f64, DynamicsError> {
    let coeffs = CoefficientSet::new(&cfg.grid, &cfg.a, &cfg.b, &cfg.gamma, cfg.period)?;
    Ok(cfl_from_coefficients(cfg, &coeffs))
}

fn cfl_from_coefficients(cfg: &SimConfig, coeffs: &CoefficientSet) -> f64 {
    let sup = |v: &[f64]| v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let dx = cfg.grid.dx();
    let lf = cfg.incidence.lipschitz(cfg.state_bound());
    let mut bound = f64::INFINITY;
    for p in [sup(&coeffs.a), sup(&coeffs.b)] {
        if p > 0.0 {
            bound = bound.min(dx / p);
        }
    }
    let rate = cfg.d1 + cfg.d2 + sup(&coeffs.gamma) + lf;
    if rate > 0.0 {
        bound = bound.min(1.0 / rate);
    }
    cfg.cfl_safety * bound
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Right,
    Left,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationState {
    pub t: f64,
    #[serde(skip)]
    pub window: ActiveWindow,
    pub s: Vec<f64>,
    pub i: Vec<f64>,
    /// Last computed `h'`.
    pub flux_right: f64,
    /// Last computed `g'`.
    pub flux_left: f64,
}

impl SimulationState {
    pub fn g(&self) -> f64 {
        self.window.g
    }

    pub fn h(&self) -> f64 {
        self.window.h
    }
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// `h' = μ Σ dx S_i P(Z <= x_i - h)` (right) or `g' = -μ Σ dx S_i P(Z >= x_i - g)` (left).
pub fn boundary_flux(
    grid: &Grid1D,
    state: &SimulationState,
    kernel1: &KernelSpec,
    side: Side,
    mu: f64,
) -> f64 {
    let dx = grid.dx();
    let w = &state.window;
    let mut acc = 0.0;
    for i in w.indices() {
        let s = state.s[i];
        if s == 0.0 {
            continue;
        }
        let x = grid.center(i);
        acc += s * match side {
            Side::Right => kernel1.cdf(x - w.h),
            Side::Left => kernel1.survival(x - w.g),
        };
    }
    match side {
        Side::Right => mu * dx * acc,
        Side::Left => -mu * dx * acc,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct StepReport {
    pub clamped: f64,
    pub min_s: f64,
    pub min_i: f64,
    pub sup_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub t: f64,
    pub s: Vec<f64>,
    pub i: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Diagnostics {
    pub dt: f64,
    pub steps: usize,
    /// Smallest field values seen before clamping.
    pub min_s: f64,
    pub min_i: f64,
    pub clamp_total: f64,
    /// `max(h' - μ‖S‖(h - g), |g'| - μ‖S‖(h - g))` over all steps (≤ 0 when the bound holds).
    pub speed_excess: f64,
    /// Same with `C_J` in place of `h - g`.
    pub moment_excess: f64,
    pub c_j: f64,
    /// Largest observed `max(‖S‖, ‖I‖)`, used as `R` in the envelopes.
    pub envelope_r: f64,
    pub s_envelope_excess: f64,
    pub i_envelope_excess: f64,
    pub length_envelope_excess: f64,
    pub monotone_boundaries: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    #[serde(skip)]
    pub grid: Grid1D,
    pub times: Vec<f64>,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
    pub sup_s: Vec<f64>,
    pub sup_i: Vec<f64>,
    /// `M_S(t)`, `M_I(t)` and `2 h0 e^{2 μ M_S(t) t}` at each sample.
    pub ms_envelope: Vec<f64>,
    pub mi_envelope: Vec<f64>,
    pub len_envelope: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    pub diagnostics: Diagnostics,
    pub final_state: SimulationState,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.g.iter().zip(&self.h).map(|(g, h)| h - g).collect()
    }
}

/// Precomputed data for one configuration.
#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: SimConfig,
    coeffs: CoefficientSet,
    w1: DMatrix<f64>,
    w2: DMatrix<f64>,
    dt: f64,
    c_j: f64,
}

impl Simulator {
    pub fn new(cfg: SimConfig) -> Result<Self, DynamicsError> {
        cfg.validate()?;
        let coeffs = CoefficientSet::new(&cfg.grid, &cfg.a, &cfg.b, &cfg.gamma, cfg.period)?;
        let dt = cfl_from_coefficients(&cfg, &coeffs);
        Ok(Self {
            w1: kernel_weights(&cfg.grid, &cfg.kernel1),
            w2: kernel_weights(&cfg.grid, &cfg.kernel2),
            c_j: cfg.kernel1.abs_first_moment(),
            cfg,
            coeffs,
            dt,
        })
    }

    /// Forces a time step (it must not exceed the CFL value to keep positivity).
    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn initial_state(&self) -> Result<SimulationState, DynamicsError> {
        let grid = &self.cfg.grid;
        let window = active_window(grid, -self.cfg.h0, self.cfg.h0)?;
        let mut state = SimulationState {
            t: 0.0,
            window,
            s: self.cfg.s0.sample(grid, &window, self.cfg.h0),
            i: self.cfg.i0.sample(grid, &window, self.cfg.h0),
            flux_right: 0.0,
            flux_left: 0.0,
        };
        self.update_fluxes(&mut state);
        Ok(state)
    }

    /// Replaces the sampled initial fields (values outside the window are discarded).
    pub fn state_from_fields(&self, s: Vec<f64>, i: Vec<f64>) -> Result<SimulationState, DynamicsError> {
        let mut state = self.initial_state()?;
        let n = self.cfg.grid.len();
        for (what, len) in [("S0 samples", s.len()), ("I0 samples", i.len())] {
            if len != n {
                return Err(DiscretizationError::LengthMismatch { what, expected: n, got: len }.into());
            }
        }
        for k in 0..n {
            let inside = state.window.contains(k);
            state.s[k] = if inside { s[k] } else { 0.0 };
            state.i[k] = if inside { i[k] } else { 0.0 };
        }
        self.update_fluxes(&mut state);
        Ok(state)
    }

    fn update_fluxes(&self, state: &mut SimulationState) {
        let grid = &self.cfg.grid;
        state.flux_right = boundary_flux(grid, state, &self.cfg.kernel1, Side::Right, self.cfg.mu);
        state.flux_left = boundary_flux(grid, state, &self.cfg.kernel1, Side::Left, self.cfg.mu);
    }

    fn convolve(&self, w: &DMatrix<f64>, field: &[f64], window: &ActiveWindow) -> DVector<f64> {
        let m = window.len();
        let block = w.view((window.lo, window.lo), (m, m));
        let v = DVector::from_column_slice(&field[window.lo..=window.hi]);
        block * v
    }

    fn upwind(&self, p: f64, field: &[f64], i: usize) -> f64 {
        let n = field.len();
        let dx = self.cfg.grid.dx();
        if p > 0.0 {
            let next = if i + 1 < n { field[i + 1] } else { 0.0 };
            p * (next - field[i]) / dx
        } else if p < 0.0 {
            let prev = if i > 0 { field[i - 1] } else { 0.0 };
            -p * (prev - field[i]) / dx
        } else {
            0.0
        }
    }

    /// One explicit Euler step of length `dt`.
    pub fn step(
        &self,
        state: &SimulationState,
        dt: f64,
    ) -> Result<(SimulationState, StepReport), DynamicsError> {
        let cfg = &self.cfg;
        let grid = &cfg.grid;
        let w = state.window;
        let sign = cfg.drift_sign.factor();
        let ks = self.convolve(&self.w1, &state.s, &w);
        let ki = self.convolve(&self.w2, &state.i, &w);
        let mut s = state.s.clone();
        let mut i_new = state.i.clone();
        let mut report = StepReport {
            min_s: f64::INFINITY,
            min_i: f64::INFINITY,
            sup_s: sup_norm(&state.s),
            ..Default::default()
        };
        for (k, idx) in w.indices().enumerate() {
            let (sv, iv) = (state.s[idx], state.i[idx]);
            let gamma = self.coeffs.gamma[idx];
            let f = cfg.incidence.f(sv, iv);
            let ds =
                cfg.d1 * (ks[k] - sv) + self.upwind(sign * self.coeffs.a[idx], &state.s, idx) + gamma * iv
                    - f;
            let di = cfg.d2 * (ki[k] - iv) + self.upwind(sign * self.coeffs.b[idx], &state.i, idx)
                - gamma * iv
                + f;
            s[idx] = sv + dt * ds;
            i_new[idx] = iv + dt * di;
        }
        if w.indices().any(|k| !(s[k].is_finite() && i_new[k].is_finite())) {
            return Err(DynamicsError::NonFinite { t: state.t + dt });
        }
        for idx in w.indices() {
            report.min_s = report.min_s.min(s[idx]);
            report.min_i = report.min_i.min(i_new[idx]);
            if cfg.clamp {
                for v in [&mut s[idx], &mut i_new[idx]] {
                    if *v < 0.0 {
                        if *v < -1e-12 {
                            report.clamped += -*v;
                        }
                        *v = 0.0;
                    }
                }
            }
        }

        let g = w.g + dt * state.flux_left;
        let h = w.h + dt * state.flux_right;
        let t = state.t + dt;
        if g <= grid.center(0) || h >= grid.center(grid.len() - 1) {
            return Err(DynamicsError::BoundaryHitGridEdge { t, g, h });
        }
        let window = active_window(grid, g, h)?;
        let mut next = SimulationState { t, window, s, i: i_new, flux_right: 0.0, flux_left: 0.0 };
        self.update_fluxes(&mut next);
        Ok((next, report))
    }

    /// `M_S(t)` and `M_I(t)` with `R` bounding both fields on `[0, t]`.
    pub fn envelopes(&self, t: f64, r: f64, s0: f64, i0: f64) -> (f64, f64) {
        let cfg = &self.cfg;
        let gamma_max = sup_norm(&self.coeffs.gamma);
        let gamma_min = self.coeffs.gamma.iter().cloned().fold(f64::INFINITY, f64::min);
        let expm1_over = |rate: f64| if rate == 0.0 { t } else { (rate * t).exp_m1() / rate };
        let ms = (cfg.d1 * t).exp() * s0 + gamma_max * expm1_over(cfg.d1) * r;
        let l = cfg.incidence.lipschitz(r);
        let alpha = cfg.d2 - gamma_min + l;
        let mi = (alpha * t).exp() * i0 + l * ms * expm1_over(alpha);
        (ms, mi)
    }

    pub fn run(&self) -> Result<Trajectory, DynamicsError> {
        let state = self.initial_state()?;
        self.run_from(state)
    }

    pub fn run_from(&self, mut state: SimulationState) -> Result<Trajectory, DynamicsError> {
        let cfg = &self.cfg;
        let dt = self.dt;
        let total_steps = (cfg.horizon / dt).ceil().max(1.0) as usize;
        let record_every =
            if cfg.record_every == 0 { total_steps.div_ceil(200).max(1) } else { cfg.record_every };
        let s0 = sup_norm(&state.s);
        let i0 = sup_norm(&state.i);
        let budget = cfg.clamp_budget * (s0 + i0);
        let mut diag = Diagnostics {
            dt,
            c_j: self.c_j,
            min_s: state.s.iter().cloned().fold(f64::INFINITY, f64::min),
            min_i: state.i.iter().cloned().fold(f64::INFINITY, f64::min),
            envelope_r: s0.max(i0),
            s_envelope_excess: f64::NEG_INFINITY,
            i_envelope_excess: f64::NEG_INFINITY,
            length_envelope_excess: f64::NEG_INFINITY,
            speed_excess: f64::NEG_INFINITY,
            moment_excess: f64::NEG_INFINITY,
            monotone_boundaries: true,
            ..Default::default()
        };
        let mut traj = Trajectory {
            grid: cfg.grid,
            times: Vec::new(),
            g: Vec::new(),
            h: Vec::new(),
            sup_s: Vec::new(),
            sup_i: Vec::new(),
            ms_envelope: Vec::new(),
            mi_envelope: Vec::new(),
            len_envelope: Vec::new(),
            snapshots: Vec::new(),
            diagnostics: Diagnostics::default(),
            final_state: state.clone(),
        };
        self.record(&mut traj, &mut diag, &state, s0, i0);
        for step in 1..=total_steps {
            let step_dt = if step == total_steps { (cfg.horizon - state.t).max(0.0) } else { dt };
            let sup_s = sup_norm(&state.s);
            let len = state.h() - state.g();
            let mu_s = cfg.mu * sup_s;
            let worst = state.flux_right.max(-state.flux_left);
            diag.speed_excess = diag.speed_excess.max(worst - mu_s * len);
            diag.moment_excess = diag.moment_excess.max(worst - mu_s * self.c_j);
            let (next, report) = self.step(&state, step_dt)?;
            diag.min_s = diag.min_s.min(report.min_s);
            diag.min_i = diag.min_i.min(report.min_i);
            diag.clamp_total += report.clamped;
            if diag.clamp_total > budget {
                return Err(DynamicsError::ClampBudgetExceeded {
                    t: next.t,
                    total: diag.clamp_total,
                    budget,
                });
            }
            if next.h() < state.h() || next.g() > state.g() {
                diag.monotone_boundaries = false;
            }
            diag.steps = step;
            state = next;
            diag.envelope_r = diag.envelope_r.max(sup_norm(&state.s)).max(sup_norm(&state.i));
            if step % record_every == 0 || step == total_steps {
                self.record(&mut traj, &mut diag, &state, s0, i0);
            }
        }
        traj.diagnostics = diag;
        traj.final_state = state;
        Ok(traj)
    }

    fn record(
        &self,
        traj: &mut Trajectory,
        diag: &mut Diagnostics,
        state: &SimulationState,
        s0: f64,
        i0: f64,
    ) {
        let t = state.t;
        let (ms, mi) = self.envelopes(t, diag.envelope_r, s0, i0);
        let len_env = 2.0 * self.cfg.h0 * (2.0 * self.cfg.mu * ms * t).exp();
        let sup_s = sup_norm(&state.s);
        let sup_i = sup_norm(&state.i);
        diag.s_envelope_excess = diag.s_envelope_excess.max(sup_s - ms);
        diag.i_envelope_excess = diag.i_envelope_excess.max(sup_i - mi);
        diag.length_envelope_excess = diag.length_envelope_excess.max(state.h() - state.g() - len_env);
        traj.times.push(t);
        traj.g.push(state.g());
        traj.h.push(state.h());
        traj.sup_s.push(sup_s);
        traj.sup_i.push(sup_i);
        traj.ms_envelope.push(ms);
        traj.mi_envelope.push(mi);
        traj.len_envelope.push(len_env);
        if self.cfg.snapshots {
            traj.snapshots.push(Snapshot { t, s: state.s.clone(), i: state.i.clone() });
        }
    }
}

pub fn simulate(cfg: &SimConfig) -> Result<Trajectory, DynamicsError> {
    Simulator::new(cfg.clone())?.run()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingReport {
    pub samples: usize,
    /// Largest `S_low - S_high` over all samples and cells (≤ 1e-9 when ordered).
    pub worst_s: f64,
    pub worst_i: f64,
    /// Largest `g_high - g_low`.
    pub worst_g: f64,
    /// Largest `h_low - h_high`.
    pub worst_h: f64,
    pub holds: bool,
    pub h_final: (f64, f64),
}

/// Runs two ordered configurations with a common time step and checks that
/// the order of `S`, `I` and the nesting of `(g, h)` persist.
pub fn compare_runs(low: &SimConfig, high: &SimConfig) -> Result<OrderingReport, DynamicsError> {
    let same = low.grid == high.grid
        && low.kernel1 == high.kernel1
        && low.kernel2 == high.kernel2
        && low.d1 == high.d1
        && low.d2 == high.d2
        && low.a == high.a
        && low.b == high.b
        && low.gamma == high.gamma
        && low.incidence == high.incidence
        && low.drift_sign == high.drift_sign
        && low.mu == high.mu
        && low.h0 == high.h0
        && low.horizon == high.horizon;
    if !same {
        return Err(DynamicsError::PreconditionUnordered(
            "configurations differ in something other than initial data".into(),
        ));
    }
    let mut lo_cfg = low.clone();
    let mut hi_cfg = high.clone();
    lo_cfg.snapshots = true;
    hi_cfg.snapshots = true;
    let lo_sim = Simulator::new(lo_cfg)?;
    let hi_sim = Simulator::new(hi_cfg)?;
    let dt = lo_sim.dt().min(hi_sim.dt());
    let lo_sim = lo_sim.with_dt(dt);
    let hi_sim = hi_sim.with_dt(dt);
    let lo0 = lo_sim.initial_state()?;
    let hi0 = hi_sim.initial_state()?;
    for k in 0..lo0.s.len() {
        if lo0.s[k] > hi0.s[k] || lo0.i[k] > hi0.i[k] {
            return Err(DynamicsError::PreconditionUnordered(format!(
                "initial data not ordered at x = {}",
                low.grid.center(k)
            )));
        }
    }
    let a = lo_sim.run_from(lo0)?;
    let b = hi_sim.run_from(hi0)?;
    let mut report = OrderingReport {
        samples: a.len(),
        worst_s: f64::NEG_INFINITY,
        worst_i: f64::NEG_INFINITY,
        worst_g: f64::NEG_INFINITY,
        worst_h: f64::NEG_INFINITY,
        holds: true,
        h_final: (*a.h.last().unwrap_or(&0.0), *b.h.last().unwrap_or(&0.0)),
    };
    for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
        for k in 0..sa.s.len() {
            report.worst_s = report.worst_s.max(sa.s[k] - sb.s[k]);
            report.worst_i = report.worst_i.max(sa.i[k] - sb.i[k]);
        }
    }
    for k in 0..a.len() {
        report.worst_g = report.worst_g.max(b.g[k] - a.g[k]);
        report.worst_h = report.worst_h.max(a.h[k] - b.h[k]);
    }
    report.holds =
        report.worst_s <= 1e-9 && report.worst_i <= 1e-9 && report.worst_g <= 0.0 && report.worst_h <= 0.0;
    Ok(report)
}

//! Cell-centered collocation grids, the moving active window, and dense
//! assembly of the nonlocal dispersal + advection operator
//!
//! ```text
//! L[φ](x_i) = d Σ_j J(x_i - y_j) φ_j dx - d φ_i + p_i D_up φ_i + c_i φ_i
//! ```
//!
//! with the zero exterior condition. `D_up` is the one-sided difference toward
//! the neighbour selected by `sign(p)`, so every off-diagonal entry is
//! nonnegative (Metzler).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernels::KernelSpec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscretizationError {
    #[error("grid needs n >= 3 cells, got {0}")]
    TooFewCells(usize),
    #[error("grid needs finite xmin < xmax, got [{xmin}, {xmax}]")]
    EmptyGrid { xmin: f64, xmax: f64 },
    #[error("interval ({g}, {h}) contains no cell center")]
    EmptyWindow { g: f64, h: f64 },
    #[error("interval ({g}, {h}) is not inside the grid span [{xmin}, {xmax}]")]
    OutsideGrid { g: f64, h: f64, xmin: f64, xmax: f64 },
    #[error("{what}: expected {expected} samples, got {got}")]
    LengthMismatch { what: &'static str, expected: usize, got: usize },
    #[error("diffusion coefficient must be >= 0, got {0}")]
    NegativeDiffusion(f64),
    #[error("(H2) coefficient {name} violates its sign condition at x = {x}: {value}")]
    CoefficientSign { name: &'static str, x: f64, value: f64 },
    #[error("(H2) coefficient {name} is not {period}-periodic on the grid (x = {x})")]
    NotPeriodic { name: &'static str, period: f64, x: f64 },
    #[error("cell size must be > 0, got {0}")]
    BadSpacing(f64),
}

/// Uniform grid of `n` cells on `[xmin, xmin + n dx]`; node `i` is the cell center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    xmin: f64,
    dx: f64,
    n: usize,
}

impl Grid1D {
    pub fn new(xmin: f64, xmax: f64, n: usize) -> Result<Self, DiscretizationError> {
        if n < 3 {
            return Err(DiscretizationError::TooFewCells(n));
        }
        if !(xmin.is_finite() && xmax.is_finite() && xmax > xmin) {
            return Err(DiscretizationError::EmptyGrid { xmin, xmax });
        }
        Ok(Self { xmin, dx: (xmax - xmin) / n as f64, n })
    }

    /// Grid on `[xmin, xmax]` with cell size as close as possible to `dx`.
    pub fn with_spacing(xmin: f64, xmax: f64, dx: f64) -> Result<Self, DiscretizationError> {
        if !(dx.is_finite() && dx > 0.0) {
            return Err(DiscretizationError::BadSpacing(dx));
        }
        let n = ((xmax - xmin) / dx).round();
        if n < 3.0 {
            return Err(DiscretizationError::EmptyWindow { g: xmin, h: xmax });
        }
        Self::new(xmin, xmax, n as usize)
    }

    pub fn xmin(&self) -> f64 {
        self.xmin
    }

    pub fn xmax(&self) -> f64 {
        self.xmin + self.dx * self.n as f64
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn center(&self, i: usize) -> f64 {
        self.xmin + (i as f64 + 0.5) * self.dx
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.center(i)).collect()
    }

    /// Cells `lo..=hi` as a grid of their own (same alignment and spacing).
    pub fn subgrid(&self, lo: usize, hi: usize) -> Result<Self, DiscretizationError> {
        let n = hi + 1 - lo;
        if n < 3 {
            return Err(DiscretizationError::TooFewCells(n));
        }
        Ok(Self { xmin: self.xmin + lo as f64 * self.dx, dx: self.dx, n })
    }
}

/// Inclusive range of cell centers lying strictly inside `(g, h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActiveWindow {
    pub g: f64,
    pub h: f64,
    pub lo: usize,
    pub hi: usize,
}

impl ActiveWindow {
    pub fn len(&self) -> usize {
        self.hi + 1 - self.lo
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, i: usize) -> bool {
        i >= self.lo && i <= self.hi
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<usize> {
        self.lo..=self.hi
    }
}

pub fn active_window(grid: &Grid1D, g: f64, h: f64) -> Result<ActiveWindow, DiscretizationError> {
    let slack = 1e-12 * grid.dx();
    if !(g < h) || g < grid.xmin() - slack || h > grid.xmax() + slack {
        return Err(DiscretizationError::OutsideGrid { g, h, xmin: grid.xmin(), xmax: grid.xmax() });
    }
    // Start from the arithmetic guess, then settle the strict inequalities exactly.
    let guess = |x: f64| ((x - grid.xmin()) / grid.dx() - 0.5).clamp(0.0, grid.len() as f64 - 1.0);
    let mut lo = guess(g).floor() as usize;
    while lo < grid.len() && grid.center(lo) <= g {
        lo += 1;
    }
    while lo > 0 && grid.center(lo - 1) > g {
        lo -= 1;
    }
    let mut hi = guess(h).ceil() as usize;
    while hi > 0 && grid.center(hi) >= h {
        hi -= 1;
    }
    while hi + 1 < grid.len() && grid.center(hi + 1) < h {
        hi += 1;
    }
    if lo >= grid.len() || grid.center(hi) >= h || lo > hi {
        return Err(DiscretizationError::EmptyWindow { g, h });
    }
    Ok(ActiveWindow { g, h, lo, hi })
}

/// A coefficient function sampled at cell centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Constant {
        value: f64,
    },
    /// `mean + amplitude * cos(2π (x - phase) / period)`.
    Cosine {
        mean: f64,
        amplitude: f64,
        period: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Explicit values, one per cell of the grid it is sampled on.
    Samples {
        values: Vec<f64>,
    },
}

impl Profile {
    pub fn constant(value: f64) -> Self {
        Profile::Constant { value }
    }

    pub fn cosine(mean: f64, amplitude: f64, period: f64) -> Self {
        Profile::Cosine { mean, amplitude, period, phase: 0.0 }
    }

    /// Pointwise value; `None` for grid-bound samples.
    pub fn at(&self, x: f64) -> Option<f64> {
        match self {
            Profile::Constant { value } => Some(*value),
            Profile::Cosine { mean, amplitude, period, phase } => {
                Some(mean + amplitude * (2.0 * std::f64::consts::PI * (x - phase) / period).cos())
            }
            Profile::Samples { .. } => None,
        }
    }

    pub fn sample(&self, grid: &Grid1D) -> Result<Vec<f64>, DiscretizationError> {
        match self {
            Profile::Samples { values } => {
                if values.len() != grid.len() {
                    return Err(DiscretizationError::LengthMismatch {
                        what: "profile samples",
                        expected: grid.len(),
                        got: values.len(),
                    });
                }
                Ok(values.clone())
            }
            _ => Ok(grid.centers().into_iter().map(|x| self.at(x).unwrap_or(0.0)).collect()),
        }
    }

    /// Natural period of the profile, if it has one.
    pub fn period(&self) -> Option<f64> {
        match self {
            Profile::Cosine { period, .. } => Some(*period),
            _ => None,
        }
    }

    /// Lower and upper bound over all `x`; samples use their own extremes.
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            Profile::Constant { value } => (*value, *value),
            Profile::Cosine { mean, amplitude, .. } => (mean - amplitude.abs(), mean + amplitude.abs()),
            Profile::Samples { values } => {
                values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)))
            }
        }
    }
}

/// Sampled model coefficients `a` (S-drift), `b` (I-drift), `γ` (recovery).
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub gamma: Vec<f64>,
    pub period: Option<f64>,
}

impl CoefficientSet {
    /// Samples and validates the coefficients: `γ > 0` and `a, b >= 0`
    /// everywhere, and, if `period` is given, periodicity on every pair of
    /// nodes a whole period apart.
    pub fn new(
        grid: &Grid1D,
        a: &Profile,
        b: &Profile,
        gamma: &Profile,
        period: Option<f64>,
    ) -> Result<Self, DiscretizationError> {
        let set = Self { a: a.sample(grid)?, b: b.sample(grid)?, gamma: gamma.sample(grid)?, period };
        let xs = grid.centers();
        for (name, values, strict) in
            [("a", &set.a, false), ("b", &set.b, false), ("gamma", &set.gamma, true)]
        {
            for (x, v) in xs.iter().zip(values.iter()) {
                let ok = v.is_finite() && if strict { *v > 0.0 } else { *v >= 0.0 };
                if !ok {
                    return Err(DiscretizationError::CoefficientSign { name, x: *x, value: *v });
                }
            }
        }
        if let Some(ell) = period {
            let shift = ell / grid.dx();
            let k = shift.round();
            if k >= 1.0 && (shift - k).abs() < 1e-9 * shift.max(1.0) {
                let k = k as usize;
                for (name, values) in [("a", &set.a), ("b", &set.b), ("gamma", &set.gamma)] {
                    for i in 0..grid.len().saturating_sub(k) {
                        if (values[i] - values[i + k]).abs() > 1e-9 {
                            return Err(DiscretizationError::NotPeriodic { name, period: ell, x: xs[i] });
                        }
                    }
                }
            }
        }
        Ok(set)
    }
}

/// How the sampled drift `p` enters the operator: `+p φ'` or `-p φ'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftSign {
    #[default]
    Plus,
    Minus,
}

impl DriftSign {
    pub fn factor(self) -> f64 {
        match self {
            DriftSign::Plus => 1.0,
            DriftSign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMeta {
    pub d: f64,
    pub kernel: String,
    pub drift_sign: DriftSign,
    pub zeroth: Vec<f64>,
}

/// Dense collocation matrix of a nonlocal-advection operator on `grid`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub grid: Grid1D,
    pub entries: DMatrix<f64>,
    pub meta: OperatorMeta,
}

impl OperatorMatrix {
    pub fn interval(&self) -> (f64, f64) {
        (self.grid.xmin(), self.grid.xmax())
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    /// Smallest off-diagonal entry (0 for a 1x1 matrix).
    pub fn min_off_diagonal(&self) -> f64 {
        min_off_diagonal(&self.entries)
    }

    pub fn apply(&self, field: &[f64]) -> Result<Vec<f64>, DiscretizationError> {
        apply(&self.entries, field)
    }
}

pub fn min_off_diagonal(m: &DMatrix<f64>) -> f64 {
    let mut min = f64::INFINITY;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if i != j {
                min = min.min(m[(i, j)]);
            }
        }
    }
    if min.is_finite() {
        min
    } else {
        0.0
    }
}

/// `W[i][j] = J(x_i - x_j) dx`, the quadrature weights of the convolution.
pub fn kernel_weights(grid: &Grid1D, kernel: &KernelSpec) -> DMatrix<f64> {
    let dx = grid.dx();
    let n = grid.len() as isize;
    // Offsets are multiples of dx, so the matrix is exactly Toeplitz.
    let diagonals: Vec<f64> = (-(n - 1)..n).map(|k| kernel.evaluate(k as f64 * dx) * dx).collect();
    DMatrix::from_fn(grid.len(), grid.len(), |i, j| diagonals[(i as isize - j as isize + n - 1) as usize])
}

/// Assembles `d (K - I) + p D_up + diag(c)` on `grid` with zero exterior values.
pub fn assemble_operator(
    grid: &Grid1D,
    d: f64,
    kernel: &KernelSpec,
    drift: &[f64],
    zeroth: &[f64],
    drift_sign: DriftSign,
) -> Result<OperatorMatrix, DiscretizationError> {
    if !(d >= 0.0) {
        return Err(DiscretizationError::NegativeDiffusion(d));
    }
    let n = grid.len();
    for (what, len) in [("drift samples", drift.len()), ("zeroth-order samples", zeroth.len())] {
        if len != n {
            return Err(DiscretizationError::LengthMismatch { what, expected: n, got: len });
        }
    }
    let dx = grid.dx();
    let mut m = if d > 0.0 { kernel_weights(grid, kernel) * d } else { DMatrix::zeros(n, n) };
    for i in 0..n {
        m[(i, i)] += zeroth[i] - d;
        let p = drift_sign.factor() * drift[i];
        if p == 0.0 {
            continue;
        }
        let rate = p.abs() / dx;
        m[(i, i)] -= rate;
        // Forward neighbour for p > 0 (transport of u_t = p u_x runs right to left).
        let neighbour = if p > 0.0 { i.checked_add(1).filter(|&j| j < n) } else { i.checked_sub(1) };
        if let Some(j) = neighbour {
            m[(i, j)] += rate;
        }
    }
    Ok(OperatorMatrix {
        grid: *grid,
        entries: m,
        meta: OperatorMeta { d, kernel: kernel.id(), drift_sign, zeroth: zeroth.to_vec() },
    })
}

/// Dense matrix-vector product with a length check.
pub fn apply(matrix: &DMatrix<f64>, field: &[f64]) -> Result<Vec<f64>, DiscretizationError> {
    if field.len() != matrix.ncols() {
        return Err(DiscretizationError::LengthMismatch {
            what: "field",
            expected: matrix.ncols(),
            got: field.len(),
        });
    }
    let v = DVector::from_column_slice(field);
    Ok((matrix * v).iter().copied().collect())
}

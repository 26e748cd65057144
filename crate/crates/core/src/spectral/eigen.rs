use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::SpectralError;
use crate::discretization::{assemble_operator, DriftSign, Grid1D};
use crate::kernels::KernelSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Success threshold for `‖Mφ - λφ‖_∞ / max(1, ‖M‖_∞)`.
    pub tol: f64,
    pub max_iter: usize,
    /// Shifted power steps spent warming up the start vector.
    pub power_budget: usize,
    /// Off-diagonal entries below `reducible_floor * ‖M‖_∞` do not count as
    /// couplings when testing irreducibility.
    pub reducible_floor: f64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 50_000, power_budget: 1000, reducible_floor: 1e-14 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenResult {
    pub lambda: f64,
    /// Positive eigenvector with sup-norm 1.
    pub phi: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    /// Collatz–Wielandt bracket `[min_i (Mφ)_i/φ_i, max_i (Mφ)_i/φ_i]`.
    pub bracket: (f64, f64),
}

pub(crate) fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

pub(crate) fn check_metzler(m: &DMatrix<f64>) -> Result<(), SpectralError> {
    if m.nrows() == 0 || m.nrows() != m.ncols() {
        return Err(SpectralError::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if !v.is_finite() {
                return Err(SpectralError::NonFinite);
            }
            if i != j && v < 0.0 {
                return Err(SpectralError::NotMetzler { row: i, col: j, value: v });
            }
        }
    }
    Ok(())
}

fn collatz_wielandt(x: &DVector<f64>, mx: &DVector<f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (a, b) in x.iter().zip(mx.iter()) {
        let r = b / a;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    (lo, hi)
}

/// Strong connectivity of the graph of off-diagonal entries above `floor`.
fn strongly_connected(m: &DMatrix<f64>, floor: f64) -> bool {
    let n = m.nrows();
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                let v = if forward { m[(i, j)] } else { m[(j, i)] };
                if !seen[j] && i != j && v > floor {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.iter().all(|s| *s)
    };
    reach(true) && reach(false)
}

fn normalize(x: &mut DVector<f64>) {
    let s = x.amax();
    if s > 0.0 {
        *x /= s;
    }
}

/// Perron root and positive eigenvector of a Metzler matrix.
///
/// A shifted power phase on `M + sI` (`s = 1 + max|M_ii|`) produces a good
/// positive start vector; Noda's shifted inverse iteration, with the shift
/// taken from the upper Collatz–Wielandt bound, then converges quadratically.
pub fn principal_eigenpair(m: &DMatrix<f64>, opts: &EigenOptions) -> Result<EigenResult, SpectralError> {
    check_metzler(m)?;
    let n = m.nrows();
    let scale = inf_norm(m).max(1.0);
    let target = opts.tol * scale;

    let off_diagonal_zero = (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)] == 0.0));
    if off_diagonal_zero {
        let diag = m.diagonal();
        let top = diag.max();
        if n > 1 && diag.iter().any(|v| *v != top) {
            return Err(SpectralError::ReducibleSuspected { lambda: top });
        }
        return Ok(EigenResult {
            lambda: top,
            phi: vec![1.0; n],
            residual: 0.0,
            iterations: 0,
            bracket: (top, top),
        });
    }

    if !strongly_connected(m, opts.reducible_floor * scale) {
        return Err(SpectralError::ReducibleSuspected { lambda: dense_spectral_bound(m) });
    }

    let shift = 1.0 + m.diagonal().iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let mut x = DVector::from_element(n, 1.0);
    let mut iterations = 0;
    let mut mx = m * &x;
    for _ in 0..opts.power_budget.min(opts.max_iter) {
        let (lo, hi) = collatz_wielandt(&x, &mx);
        if hi - lo <= 1e-6 * scale {
            break;
        }
        x = &mx + &x * shift;
        normalize(&mut x);
        mx = m * &x;
        iterations += 1;
    }

    type Candidate = (f64, DVector<f64>, f64, (f64, f64));
    let mut best: Option<Candidate> = None;
    let mut stalled = 0;
    while iterations < opts.max_iter {
        let (lo, hi) = collatz_wielandt(&x, &mx);
        // Ratios at tiny entries of a localized eigenvector are inaccurate,
        // so the estimate is the Rayleigh quotient kept inside the bracket.
        let lambda = (x.dot(&mx) / x.dot(&x)).clamp(lo.min(hi), hi);
        let residual = (&mx - &x * lambda).amax();
        let improved = best.as_ref().is_none_or(|b| residual < b.2);
        if improved {
            best = Some((lambda, x.clone(), residual, (lo, hi)));
            stalled = 0;
        } else {
            stalled += 1;
        }
        if residual <= 1e-13 * scale || stalled >= 3 || !lambda.is_finite() {
            break;
        }
        let sigma = hi + 1e-15 * scale;
        let shifted = DMatrix::from_diagonal_element(n, n, sigma) - m;
        let Some(y) = shifted.lu().solve(&x) else { break };
        let top = y.amax();
        // Entries of size 1e-30 relative to the peak can come out with the wrong sign.
        if !y.iter().all(|v| v.is_finite() && *v >= -1e-12 * top) || top == 0.0 {
            break;
        }
        x = y.abs();
        normalize(&mut x);
        mx = m * &x;
        iterations += 1;
    }

    let (lambda, phi, residual, bracket) = best.ok_or(SpectralError::NonFinite)?;
    if residual > target {
        return Err(SpectralError::NonConvergence { iterations, residual });
    }
    Ok(EigenResult { lambda, phi: phi.iter().copied().collect(), residual, iterations, bracket })
}

/// Rightmost real part of the full spectrum (dense Schur decomposition).
pub fn dense_spectral_bound(m: &DMatrix<f64>) -> f64 {
    m.clone().complex_eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

/// `λ_p` of `d (K - I) + p ∂x + diag(β)` on `grid`.
#[allow(clippy::too_many_arguments)]
pub fn lambda_p(
    grid: &Grid1D,
    d: f64,
    kernel: &KernelSpec,
    drift: &[f64],
    beta: &[f64],
    drift_sign: DriftSign,
    opts: &EigenOptions,
) -> Result<EigenResult, SpectralError> {
    let op = assemble_operator(grid, d, kernel, drift, beta, drift_sign)?;
    principal_eigenpair(&op.entries, opts)
}

use nalgebra::DMatrix;
use serde::Serialize;

use super::eigen::{lambda_p, principal_eigenpair, EigenOptions, EigenResult};
use super::SpectralError;
use crate::discretization::{assemble_operator, DriftSign, Grid1D, Profile};
use crate::kernels::KernelSpec;

const SINGULAR_MARGIN: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct R0Result {
    pub value: f64,
    /// Nonnegative eigenvector of `K` with sup-norm 1 (all zeros when `F ≡ 0`).
    pub eigvec: Vec<f64>,
    pub residual: f64,
}

/// Next-generation data on one interval: `A_I = L_{d2,b} - diag(γ)` and
/// `F = diag(F_I(S*, 0))`, with `V = -A_I`.
#[derive(Debug, Clone, PartialEq)]
pub struct NextGeneration {
    a_i: DMatrix<f64>,
    f: Vec<f64>,
    opts: EigenOptions,
}

impl NextGeneration {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        grid: &Grid1D,
        d2: f64,
        kernel2: &KernelSpec,
        drift: &[f64],
        gamma: &[f64],
        f: &[f64],
        drift_sign: DriftSign,
        opts: EigenOptions,
    ) -> Result<Self, SpectralError> {
        if f.len() != grid.len() {
            return Err(SpectralError::LengthMismatch { expected: grid.len(), got: f.len() });
        }
        if let Some(v) = f.iter().find(|v| !(**v >= 0.0)) {
            return Err(SpectralError::NegativeIncidence(*v));
        }
        let minus_gamma: Vec<f64> = gamma.iter().map(|g| -g).collect();
        let op = assemble_operator(grid, d2, kernel2, drift, &minus_gamma, drift_sign)?;
        Ok(Self { a_i: op.entries, f: f.to_vec(), opts })
    }

    /// Builds directly from an assembled `A_I` and the diagonal of `F`.
    pub fn from_parts(a_i: DMatrix<f64>, f: Vec<f64>, opts: EigenOptions) -> Self {
        Self { a_i, f, opts }
    }

    pub fn a_i(&self) -> &DMatrix<f64> {
        &self.a_i
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    /// Spectral bound `s(A_I)`.
    pub fn infection_bound(&self) -> Result<f64, SpectralError> {
        Ok(principal_eigenpair(&self.a_i, &self.opts)?.lambda)
    }

    /// `λ_p(A_I + F)`.
    pub fn lambda_p(&self) -> Result<EigenResult, SpectralError> {
        let mut m = self.a_i.clone();
        for (i, f) in self.f.iter().enumerate() {
            m[(i, i)] += f;
        }
        principal_eigenpair(&m, &self.opts)
    }

    /// `R0 = r(V^{-1} F)`.
    pub fn r0(&self) -> Result<R0Result, SpectralError> {
        let bound = self.infection_bound()?;
        if bound >= -SINGULAR_MARGIN {
            return Err(SpectralError::SingularV { bound });
        }
        self.radius_with_shift(0.0)
    }

    /// `r(K_λ)` with `K_λ = (V + λI)^{-1} F`; requires `λ > s(A_I)`.
    pub fn k_lambda_radius(&self, lambda: f64) -> Result<R0Result, SpectralError> {
        let bound = self.infection_bound()?;
        if lambda <= bound + SINGULAR_MARGIN {
            return Err(SpectralError::SingularShift { lambda, bound });
        }
        self.radius_with_shift(lambda)
    }

    // r(V_λ^{-1} F) = r(F_S V_λ^{-1}[S, S]) on the support S of F, and an
    // eigenvector w of the latter lifts to u = V_λ^{-1}[:, S] w.
    fn radius_with_shift(&self, lambda: f64) -> Result<R0Result, SpectralError> {
        let n = self.f.len();
        let support: Vec<usize> = (0..n).filter(|&i| self.f[i] > 0.0).collect();
        if support.is_empty() {
            return Ok(R0Result { value: 0.0, eigvec: vec![0.0; n], residual: 0.0 });
        }
        let v = DMatrix::from_diagonal_element(n, n, lambda) - &self.a_i;
        let mut rhs = DMatrix::zeros(n, support.len());
        for (c, &i) in support.iter().enumerate() {
            rhs[(i, c)] = 1.0;
        }
        let cols = v.lu().solve(&rhs).ok_or(SpectralError::SingularShift { lambda, bound: f64::NAN })?;
        let k = support.len();
        let reduced = DMatrix::from_fn(k, k, |r, c| {
            // Entries are nonnegative in exact arithmetic; drop rounding noise.
            (self.f[support[r]] * cols[(support[r], c)]).max(0.0)
        });
        let eig = principal_eigenpair(&reduced, &self.opts)?;
        let w = nalgebra::DVector::from_column_slice(&eig.phi);
        let mut u = &cols * &w;
        let top = u.amax();
        if top > 0.0 {
            u /= top;
        }
        let fu = nalgebra::DVector::from_fn(k, |r, _| self.f[support[r]] * u[support[r]]);
        let ku = &cols * fu;
        let residual = (&ku - &u * eig.lambda).amax();
        Ok(R0Result { value: eig.lambda, eigvec: u.iter().copied().collect(), residual })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectionTolerances {
    pub lambda: f64,
    pub length: f64,
    pub max_iter: usize,
}

impl Default for BisectionTolerances {
    fn default() -> Self {
        Self { lambda: 1e-6, length: 1e-4, max_iter: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalLength {
    /// `ℓ* = 2h*`.
    pub ell_star: f64,
    pub h_bracket: (f64, f64),
    pub lambda_bracket: (f64, f64),
    pub iterations: usize,
}

/// Operator data for `λ_p(L_{(-h,h), d, b} + β)` with `β` rebuilt per interval.
#[derive(Debug, Clone, Copy)]
pub struct SymmetricIntervalProblem<'a> {
    pub d: f64,
    pub kernel: &'a KernelSpec,
    pub drift: &'a Profile,
    pub drift_sign: DriftSign,
    pub cells: usize,
    pub opts: EigenOptions,
}

impl SymmetricIntervalProblem<'_> {
    pub fn grid(&self, h: f64) -> Result<Grid1D, SpectralError> {
        Ok(Grid1D::new(-h, h, self.cells)?)
    }

    /// `λ_p` on `(-h, h)` with `β` supplied by `beta(grid)`.
    pub fn lambda_at<E, B>(&self, h: f64, beta: &mut B) -> Result<(f64, f64), E>
    where
        E: From<SpectralError>,
        B: FnMut(&Grid1D) -> Result<Vec<f64>, E>,
    {
        let grid = self.grid(h)?;
        let b = beta(&grid)?;
        let sup = b.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let drift = self.drift.sample(&grid).map_err(SpectralError::from)?;
        let r = lambda_p(&grid, self.d, self.kernel, &drift, &b, self.drift_sign, &self.opts)?;
        Ok((r.lambda, sup))
    }

    /// Bisection on the half-length for the sign change of `λ_p`.
    pub fn critical_length<E, B>(
        &self,
        bracket: (f64, f64),
        tols: BisectionTolerances,
        mut beta: B,
    ) -> Result<CriticalLength, E>
    where
        E: From<SpectralError>,
        B: FnMut(&Grid1D) -> Result<Vec<f64>, E>,
    {
        let (mut lo, mut hi) = bracket;
        if !(lo > 0.0 && hi > lo) {
            return Err(SpectralError::BracketInvalid(format!(
                "half-length bracket ({lo}, {hi}) must satisfy 0 < lo < hi"
            ))
            .into());
        }
        let (mut f_hi, sup_hi) = self.lambda_at(hi, &mut beta)?;
        if sup_hi <= 0.0 {
            return Err(SpectralError::BracketInvalid(format!(
                "sup beta = {sup_hi} <= 0, so lambda_p < 0 on every interval"
            ))
            .into());
        }
        let (mut f_lo, _) = self.lambda_at(lo, &mut beta)?;
        if !(f_lo < 0.0 && f_hi > 0.0) {
            return Err(SpectralError::BracketInvalid(format!(
                "lambda_p({lo}) = {f_lo}, lambda_p({hi}) = {f_hi}; need a sign change"
            ))
            .into());
        }
        let mut iterations = 0;
        while iterations < tols.max_iter && 2.0 * (hi - lo) > tols.length {
            let mid = 0.5 * (lo + hi);
            let (f_mid, _) = self.lambda_at(mid, &mut beta)?;
            iterations += 1;
            if f_mid.abs() < tols.lambda {
                lo = mid;
                hi = mid;
                f_lo = f_mid;
                f_hi = f_mid;
                break;
            }
            if f_mid < 0.0 {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
                f_hi = f_mid;
            }
        }
        Ok(CriticalLength {
            ell_star: lo + hi,
            h_bracket: (lo, hi),
            lambda_bracket: (f_lo, f_hi),
            iterations,
        })
    }
}

//! Disease-free susceptible profile `S*` and the linearization coefficients
//! `α = F_S(S*, 0)`, `β = F_I(S*, 0) - γ`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::discretization::{assemble_operator, DiscretizationError, DriftSign, Grid1D};
use crate::kernels::KernelSpec;
use crate::spectral::{principal_eigenpair, EigenOptions, SpectralError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquilibriumError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Discretization(#[from] DiscretizationError),
    #[error("normalization cap must be > 0, got {0}")]
    BadCap(f64),
    #[error("expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("(H1) incidence parameter {name} must be >= 0, got {value}")]
    BadIncidence { name: &'static str, value: f64 },
}

/// Incidence function `F(S, I)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum IncidenceModel {
    /// `β0 S I`.
    Bilinear { beta0: f64 },
    /// `β0 S I / (1 + α I + κ S)`.
    Saturated { beta0: f64, alpha_sat: f64, kappa_sat: f64 },
}

impl IncidenceModel {
    pub fn validate(&self) -> Result<(), EquilibriumError> {
        let params: &[(&'static str, f64)] = match self {
            IncidenceModel::Bilinear { beta0 } => &[("beta0", *beta0)],
            IncidenceModel::Saturated { beta0, alpha_sat, kappa_sat } => {
                &[("beta0", *beta0), ("alpha_sat", *alpha_sat), ("kappa_sat", *kappa_sat)]
            }
        };
        for (name, value) in params {
            if !(value.is_finite() && *value >= 0.0) {
                return Err(EquilibriumError::BadIncidence { name, value: *value });
            }
        }
        Ok(())
    }

    pub fn beta0(&self) -> f64 {
        match self {
            IncidenceModel::Bilinear { beta0 } | IncidenceModel::Saturated { beta0, .. } => *beta0,
        }
    }

    pub fn f(&self, s: f64, i: f64) -> f64 {
        match *self {
            IncidenceModel::Bilinear { beta0 } => beta0 * s * i,
            IncidenceModel::Saturated { beta0, alpha_sat, kappa_sat } => {
                beta0 * s * i / (1.0 + alpha_sat * i + kappa_sat * s)
            }
        }
    }

    pub fn f_s(&self, s: f64, i: f64) -> f64 {
        match *self {
            IncidenceModel::Bilinear { beta0 } => beta0 * i,
            IncidenceModel::Saturated { beta0, alpha_sat, kappa_sat } => {
                let den = 1.0 + alpha_sat * i + kappa_sat * s;
                beta0 * i * (1.0 + alpha_sat * i) / (den * den)
            }
        }
    }

    pub fn f_i(&self, s: f64, i: f64) -> f64 {
        match *self {
            IncidenceModel::Bilinear { beta0 } => beta0 * s,
            IncidenceModel::Saturated { beta0, alpha_sat, kappa_sat } => {
                let den = 1.0 + alpha_sat * i + kappa_sat * s;
                beta0 * s * (1.0 + kappa_sat * s) / (den * den)
            }
        }
    }

    /// Bound on `|F_S|` and `|F_I|` over `[0, r]^2`.
    pub fn lipschitz(&self, r: f64) -> f64 {
        self.beta0() * r.max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiseaseFreeProfile {
    pub interval: (f64, f64),
    pub x: Vec<f64>,
    pub sstar: Vec<f64>,
    /// Perron root of the susceptible operator (negative under Dirichlet leakage).
    pub lambda0: f64,
    pub cap: f64,
    pub warnings: Vec<String>,
}

/// Perron vector of `d1 (K1 - I) + a ∂x` on `grid`, scaled to `max = cap`.
pub fn disease_free_profile(
    grid: &Grid1D,
    d1: f64,
    kernel1: &KernelSpec,
    a: &[f64],
    drift_sign: DriftSign,
    cap: f64,
    opts: &EigenOptions,
) -> Result<DiseaseFreeProfile, EquilibriumError> {
    if !(cap.is_finite() && cap > 0.0) {
        return Err(EquilibriumError::BadCap(cap));
    }
    let op = assemble_operator(grid, d1, kernel1, a, &vec![0.0; grid.len()], drift_sign)?;
    let eig = principal_eigenpair(&op.entries, opts)?;
    let mut warnings = Vec::new();
    if eig.lambda.abs() > 0.05 * d1 {
        warnings.push(format!(
            "susceptible operator has |lambda0| = {:.3e} > 0.05*d1; S* reflects strong boundary leakage at this resolution",
            eig.lambda.abs()
        ));
    }
    Ok(DiseaseFreeProfile {
        interval: (grid.xmin(), grid.xmax()),
        x: grid.centers(),
        sstar: eig.phi.iter().map(|v| v * cap).collect(),
        lambda0: eig.lambda,
        cap,
        warnings,
    })
}

/// `β(x) = F_I(S*(x), 0) - γ(x)`.
pub fn beta_profile(
    profile: &DiseaseFreeProfile,
    incidence: &IncidenceModel,
    gamma: &[f64],
) -> Result<Vec<f64>, EquilibriumError> {
    if gamma.len() != profile.sstar.len() {
        return Err(EquilibriumError::LengthMismatch { expected: profile.sstar.len(), got: gamma.len() });
    }
    Ok(profile.sstar.iter().zip(gamma).map(|(s, g)| incidence.f_i(*s, 0.0) - g).collect())
}

/// `α(x) = F_S(S*(x), 0)`.
pub fn alpha_profile(profile: &DiseaseFreeProfile, incidence: &IncidenceModel) -> Vec<f64> {
    profile.sstar.iter().map(|s| incidence.f_s(*s, 0.0)).collect()
}

/// `F_I(S*(x), 0)`, the diagonal of the next-generation `F`.
pub fn infection_slope(profile: &DiseaseFreeProfile, incidence: &IncidenceModel) -> Vec<f64> {
    profile.sstar.iter().map(|s| incidence.f_i(*s, 0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_profile_on_symmetric_interval() {
        let g = Grid1D::new(-1.0, 1.0, 80).unwrap();
        let k = KernelSpec::uniform(-0.5, 0.5).unwrap();
        let p =
            disease_free_profile(&g, 1.0, &k, &[0.0; 80], DriftSign::Plus, 1.0, &Default::default()).unwrap();
        for i in 0..40 {
            assert!((p.sstar[i] - p.sstar[79 - i]).abs() < 1e-8);
        }
        assert!(p.lambda0 < 0.0);
        assert_eq!(p.sstar.iter().cloned().fold(0.0, f64::max), 1.0);
        assert!(p.sstar.iter().all(|v| *v > 0.0));
    }

    #[test]
    fn drift_moves_the_peak() {
        let g = Grid1D::new(-1.0, 1.0, 100).unwrap();
        let k = KernelSpec::uniform(-0.5, 0.5).unwrap();
        let opts = EigenOptions::default();
        let argmax = |a: f64| {
            let p = disease_free_profile(&g, 1.0, &k, &[a; 100], DriftSign::Plus, 2.0, &opts).unwrap();
            let top = p.sstar.iter().cloned().fold(0.0, f64::max);
            assert_eq!(top, 2.0);
            p.sstar.iter().position(|v| *v == top).unwrap()
        };
        // `+a ∂x` transports mass toward -x.
        assert!(argmax(0.3) < argmax(0.0));
    }

    #[test]
    fn coefficient_profiles() {
        let prof = DiseaseFreeProfile {
            interval: (0.0, 1.0),
            x: vec![0.25, 0.75],
            sstar: vec![0.5, 1.0],
            lambda0: -0.1,
            cap: 1.0,
            warnings: vec![],
        };
        let bil = IncidenceModel::Bilinear { beta0: 2.0 };
        assert_eq!(beta_profile(&prof, &bil, &[0.4, 0.4]).unwrap(), vec![0.6, 1.6]);
        assert_eq!(alpha_profile(&prof, &bil), vec![0.0, 0.0]);
        let none = IncidenceModel::Bilinear { beta0: 0.0 };
        assert_eq!(beta_profile(&prof, &none, &[0.4, 0.3]).unwrap(), vec![-0.4, -0.3]);
        let sat = IncidenceModel::Saturated { beta0: 1.0, alpha_sat: 2.0, kappa_sat: 3.0 };
        let b = beta_profile(&prof, &sat, &[0.0, 0.0]).unwrap();
        assert!((b[0] - 0.5 / 2.5).abs() < 1e-15 && (b[1] - 0.25).abs() < 1e-15);
        assert_eq!(alpha_profile(&prof, &sat), vec![0.0, 0.0]);
        assert!(beta_profile(&prof, &sat, &[0.0]).is_err());
    }
}

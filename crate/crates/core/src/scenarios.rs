//! Preset model configurations used by the experiment suite and the CLI
//! examples.
//!
//! All presets share one parameter set: `β_max = β0·Scap - γ = 0.9 < d2`, so
//! a critical length exists (`ℓ* ≈ 0.79` at 200 cells); only `h0`, `μ` and
//! the horizon differ.

use crate::discretization::{DriftSign, Grid1D, Profile};
use crate::dynamics::{InitialProfile, SimConfig};
use crate::equilibrium::IncidenceModel;
use crate::kernels::KernelSpec;

fn kernel() -> KernelSpec {
    KernelSpec::asymmetric_laplace(2.0, 3.0, 0.5).expect("valid preset kernel")
}

/// Moving-boundary run starting from a habitat above the critical length.
pub fn baseline() -> SimConfig {
    SimConfig {
        grid: Grid1D::new(-12.0, 12.0, 400).expect("valid preset grid"),
        kernel1: kernel(),
        kernel2: kernel(),
        d1: 1.0,
        d2: 1.0,
        a: Profile::constant(0.1),
        b: Profile::constant(0.1),
        gamma: Profile::constant(0.1),
        period: None,
        incidence: IncidenceModel::Bilinear { beta0: 1.0 },
        drift_sign: DriftSign::Plus,
        mu: 1.0,
        h0: 1.0,
        s0: InitialProfile::Bump { amplitude: 3.0 },
        i0: InitialProfile::Bump { amplitude: 0.1 },
        horizon: 40.0,
        cfl_safety: 0.5,
        record_every: 0,
        snapshots: false,
        clamp: true,
        clamp_budget: 1e-6,
    }
}

/// `h0 = 0.35 < ℓ*/2` with slow expansion; the infection dies out.
pub fn subcritical() -> SimConfig {
    SimConfig { h0: 0.35, mu: 1e-3, ..baseline() }
}

/// `h0 = 2`, where `λ_p > 0` from the start.
pub fn supercritical() -> SimConfig {
    SimConfig { h0: 2.0, mu: 1.0, ..baseline() }
}

/// Bracket on `μ` over which [`subcritical`] flips from vanishing to spreading.
pub const SUBCRITICAL_MU_BRACKET: (f64, f64) = (1e-3, 20.0);

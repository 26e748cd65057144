//! Nonlocal free-boundary SIS epidemic model with advection and
//! non-symmetric dispersal kernels: threshold spectral quantities and
//! finite-horizon simulation.

// `!(x > 0.0)` is the NaN-rejecting form used for input checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod discretization;
pub mod dynamics;
pub mod equilibrium;
pub mod experiments;
pub mod export;
pub mod kernels;
pub mod scenarios;
pub mod spectral;

pub use discretization::{DiscretizationError, DriftSign, Grid1D, Profile};
pub use dynamics::{DynamicsError, InitialProfile, SimConfig, Trajectory};
pub use equilibrium::{EquilibriumError, IncidenceModel};
pub use experiments::{ExperimentError, Verdict, VerdictKind};
pub use kernels::{KernelError, KernelSpec};
pub use spectral::{EigenOptions, EigenResult, SpectralError};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Discretization(#[from] DiscretizationError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Equilibrium(#[from] EquilibriumError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
}

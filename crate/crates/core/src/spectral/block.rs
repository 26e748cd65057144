use nalgebra::DMatrix;

use super::eigen::{dense_spectral_bound, principal_eigenpair, EigenOptions};
use super::SpectralError;

/// Linearization at `(S*, 0)`:
///
/// ```text
/// 𝒜 = | A_s  B  |    B = diag(γ - F_I(S*, 0)),  C = diag(F_S(S*, 0))
///     | C    A_i |
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOperator {
    pub a_s: DMatrix<f64>,
    pub a_i: DMatrix<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl BlockOperator {
    pub fn new(
        a_s: DMatrix<f64>,
        a_i: DMatrix<f64>,
        b: Vec<f64>,
        c: Vec<f64>,
    ) -> Result<Self, SpectralError> {
        let m = a_s.nrows();
        for got in [a_s.ncols(), a_i.nrows(), a_i.ncols(), b.len(), c.len()] {
            if got != m {
                return Err(SpectralError::LengthMismatch { expected: m, got });
            }
        }
        Ok(Self { a_s, a_i, b, c })
    }

    pub fn size(&self) -> usize {
        self.a_s.nrows()
    }

    pub fn assemble(&self) -> DMatrix<f64> {
        let m = self.size();
        let mut full = DMatrix::zeros(2 * m, 2 * m);
        full.view_mut((0, 0), (m, m)).copy_from(&self.a_s);
        full.view_mut((m, m), (m, m)).copy_from(&self.a_i);
        for i in 0..m {
            full[(i, m + i)] = self.b[i];
            full[(m + i, i)] = self.c[i];
        }
        full
    }

    /// `s(A_s)`; `A_s` is Metzler, so this is its Perron root.
    pub fn susceptible_bound(&self, opts: &EigenOptions) -> Result<f64, SpectralError> {
        match principal_eigenpair(&self.a_s, opts) {
            Ok(r) => Ok(r.lambda),
            Err(SpectralError::ReducibleSuspected { .. }) => Ok(dense_spectral_bound(&self.a_s)),
            Err(e) => Err(e),
        }
    }
}

/// `s(𝒜)` from the dense spectrum of the assembled `2m x 2m` matrix.
pub fn block_spectral_bound(block: &BlockOperator) -> f64 {
    dense_spectral_bound(&block.assemble())
}

/// `L_eff = A_i - C A_s^{-1} B`.
pub fn effective_operator(block: &BlockOperator, opts: &EigenOptions) -> Result<DMatrix<f64>, SpectralError> {
    let bound = block.susceptible_bound(opts)?;
    if bound >= 0.0 {
        return Err(SpectralError::UnstableAs { bound });
    }
    let m = block.size();
    let rhs = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&block.b));
    let x = block.a_s.clone().lu().solve(&rhs).ok_or(SpectralError::UnstableAs { bound })?;
    let mut eff = block.a_i.clone();
    for i in 0..m {
        for j in 0..m {
            eff[(i, j)] -= block.c[i] * x[(i, j)];
        }
    }
    Ok(eff)
}

/// `λ_p(L_eff)`: the Perron root when `L_eff` is Metzler, else the dense bound.
pub fn effective_bound(block: &BlockOperator, opts: &EigenOptions) -> Result<f64, SpectralError> {
    let eff = effective_operator(block, opts)?;
    match principal_eigenpair(&eff, opts) {
        Ok(r) => Ok(r.lambda),
        Err(SpectralError::NotMetzler { .. } | SpectralError::ReducibleSuspected { .. }) => {
            Ok(dense_spectral_bound(&eff))
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{assemble_operator, DriftSign, Grid1D};
    use crate::kernels::KernelSpec;

    fn blocks(alpha: f64, coupling: f64) -> BlockOperator {
        let g = Grid1D::new(-1.0, 1.0, 20).unwrap();
        let k1 = KernelSpec::asymmetric_laplace(2.0, 1.0, 0.6).unwrap();
        let k2 = KernelSpec::uniform(-0.3, 0.5).unwrap();
        let a_s =
            assemble_operator(&g, 1.0, &k1, &[0.2; 20], &[-alpha; 20], DriftSign::Plus).unwrap().entries;
        let beta: Vec<f64> = g.centers().iter().map(|x| 0.6 + 0.2 * x).collect();
        let a_i = assemble_operator(&g, 0.5, &k2, &[0.1; 20], &beta, DriftSign::Plus).unwrap().entries;
        BlockOperator::new(a_s, a_i, vec![-coupling; 20], vec![coupling; 20]).unwrap()
    }

    #[test]
    fn uncoupled_bound_is_max_of_blocks() {
        let b = blocks(0.4, 0.0);
        let opts = EigenOptions::default();
        let s_s = principal_eigenpair(&b.a_s, &opts).unwrap().lambda;
        let s_i = principal_eigenpair(&b.a_i, &opts).unwrap().lambda;
        assert!((block_spectral_bound(&b) - s_s.max(s_i)).abs() < 1e-9);
        assert!(s_s <= -0.4 + 1e-8);
        assert_eq!(effective_operator(&b, &opts).unwrap(), b.a_i);
    }

    #[test]
    fn weak_coupling_matches_effective() {
        let b = blocks(0.4, 1e-2);
        let opts = EigenOptions::default();
        let gap = (block_spectral_bound(&b) - effective_bound(&b, &opts).unwrap()).abs();
        assert!(gap < 1e-4, "{gap}");
    }

    #[test]
    fn unstable_susceptible_block() {
        let mut b = blocks(0.0, 0.1);
        b.a_s = DMatrix::identity(20, 20) * 0.1;
        assert!(matches!(effective_operator(&b, &Default::default()), Err(SpectralError::UnstableAs { .. })));
    }
}

//! Reference computations used as oracles by the integration tests. None of
//! them call into the library's numerical code.

#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Simpson over `[a, b]` split at every breakpoint inside it.
pub fn simpson_pieces<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
    let mut pts = vec![a];
    pts.extend(breaks.iter().copied().filter(|x| *x > a && *x < b));
    pts.push(b);
    pts.windows(2).map(|w| simpson(f, w[0], w[1], tol)).sum()
}

/// Elementwise double loop.
pub fn naive_matvec(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m.nrows()];
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out[i] += m[(i, j)] * x[j];
        }
    }
    out
}

/// `true` when `λI - M` is a nonsingular M-matrix, i.e. Gaussian elimination
/// without pivoting keeps every pivot positive.
fn is_nonsingular_m_matrix(m: &DMatrix<f64>, lambda: f64) -> bool {
    let n = m.nrows();
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { lambda - m[(i, j)] } else { -m[(i, j)] }).collect())
        .collect();
    for k in 0..n {
        if a[k][k].is_nan() || a[k][k] <= 0.0 {
            return false;
        }
        let (top, rest) = a.split_at_mut(k + 1);
        let pivot = &top[k];
        for row in rest {
            let f = row[k] / pivot[k];
            for (r, p) in row[k..].iter_mut().zip(&pivot[k..]) {
                *r -= f * p;
            }
        }
    }
    true
}

/// Spectral bound of a Metzler matrix by bisection on the M-matrix property.
pub fn metzler_bound_oracle(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let radius = (0..n).map(|i| (0..n).map(|j| m[(i, j)].abs()).sum::<f64>()).fold(0.0, f64::max);
    let (mut lo, mut hi) = (-radius - 1.0, radius + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if is_nonsingular_m_matrix(m, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-13 * (1.0 + hi.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Centered finite difference.
pub fn central_diff<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Seeded irreducible Metzler matrix with entries of mixed scale.
pub fn random_metzler(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            rng.random_range(-3.0..1.0)
        } else if (i + 1) % n == j {
            rng.random_range(0.1..1.0)
        } else if rng.random_bool(0.3) {
            rng.random_range(0.0..2.0)
        } else {
            0.0
        }
    })
}

/// Dense rightmost real part via the full complex spectrum.
pub fn dense_rightmost(m: &DMatrix<f64>) -> f64 {
    m.clone().complex_eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

/// Random kernel whose support reaches both grid neighbours at spacing `dx`,
/// so assembled operators are irreducible.
pub fn random_kernel(rng: &mut ChaCha8Rng, dx: f64) -> frontera::KernelSpec {
    use frontera::KernelSpec;
    match rng.random_range(0..3) {
        0 => KernelSpec::uniform(
            -1.05 * dx - rng.random_range(0.0..0.6),
            1.05 * dx + rng.random_range(0.0..0.6),
        )
        .unwrap(),
        1 => KernelSpec::asymmetric_laplace(
            rng.random_range(0.8..5.0),
            rng.random_range(0.8..5.0),
            rng.random_range(0.1..0.9),
        )
        .unwrap(),
        _ => KernelSpec::shifted_gaussian(rng.random_range(-0.3..0.3), rng.random_range(0.1..0.6)).unwrap(),
    }
}

/// Smooth profile `c + a cos(k x + φ)` sampled at `xs`.
pub fn random_profile(rng: &mut ChaCha8Rng, xs: &[f64], mean: (f64, f64), amp: f64) -> Vec<f64> {
    let c = rng.random_range(mean.0..mean.1);
    let a = if amp > 0.0 { rng.random_range(0.0..amp) } else { 0.0 };
    let k = rng.random_range(0.5..4.0);
    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    xs.iter().map(|x| c + a * (k * x + phase).cos()).collect()
}

/// Operator data for `d (K - I) + p ∂x + diag(β)`.
#[derive(Debug, Clone)]
pub struct OperatorInstance {
    pub grid: frontera::Grid1D,
    pub d: f64,
    pub kernel: frontera::KernelSpec,
    pub drift: Vec<f64>,
    pub beta: Vec<f64>,
    pub sign: frontera::DriftSign,
}

impl OperatorInstance {
    pub fn random(rng: &mut ChaCha8Rng) -> Self {
        let n = rng.random_range(12..=40);
        let lo = -rng.random_range(0.5..3.0);
        let hi = rng.random_range(0.5..3.0);
        let grid = frontera::Grid1D::new(lo, hi, n).unwrap();
        let xs = grid.centers();
        let drift = random_profile(rng, &xs, (-0.8, 0.8), 0.5);
        let beta = random_profile(rng, &xs, (-1.0, 1.0), 0.8);
        let sign = if rng.random_bool(0.5) { frontera::DriftSign::Plus } else { frontera::DriftSign::Minus };
        Self {
            grid,
            d: rng.random_range(0.05..2.0),
            kernel: random_kernel(rng, grid.dx()),
            drift,
            beta,
            sign,
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda_with(&self.beta)
    }

    pub fn lambda_with(&self, beta: &[f64]) -> f64 {
        frontera::spectral::lambda_p(
            &self.grid,
            self.d,
            &self.kernel,
            &self.drift,
            beta,
            self.sign,
            &Default::default(),
        )
        .unwrap()
        .lambda
    }

    /// The same operator restricted to cells `lo..=hi`.
    pub fn restrict(&self, lo: usize, hi: usize) -> Self {
        Self {
            grid: self.grid.subgrid(lo, hi).unwrap(),
            drift: self.drift[lo..=hi].to_vec(),
            beta: self.beta[lo..=hi].to_vec(),
            ..self.clone()
        }
    }
}

/// Next-generation data: `A_I = d (K - I) + p ∂x - γ`, `F ≥ 0`.
pub fn random_next_generation(rng: &mut ChaCha8Rng, scale: f64) -> frontera::spectral::NextGeneration {
    let inst = OperatorInstance::random(rng);
    let xs = inst.grid.centers();
    let gamma = random_profile(rng, &xs, (0.2, 1.5), 0.15);
    let f: Vec<f64> = random_profile(rng, &xs, (0.0, 1.0), 1.0).iter().map(|v| scale * v.max(0.0)).collect();
    frontera::spectral::NextGeneration::new(
        &inst.grid,
        inst.d,
        &inst.kernel,
        &inst.drift,
        &gamma,
        &f,
        inst.sign,
        Default::default(),
    )
    .unwrap()
}

/// Block operator with `A_s = d (K - I) + p ∂x - α`, `α ≥ alpha`, the matching
/// infective block, and coupling diagonals drawn from `[0, coupling)`.
pub fn block_instance(
    rng: &mut ChaCha8Rng,
    alpha: f64,
    coupling: f64,
    beta_mean: (f64, f64),
) -> frontera::spectral::BlockOperator {
    use frontera::discretization::assemble_operator;
    let mut inst = OperatorInstance::random(rng);
    let n = inst.grid.len();
    let xs = inst.grid.centers();
    inst.beta = random_profile(rng, &xs, beta_mean, 0.8);
    let minus_alpha: Vec<f64> =
        random_profile(rng, &xs, (alpha, alpha + 0.5), 0.0).iter().map(|a| -a).collect();
    let a_s = assemble_operator(&inst.grid, inst.d, &inst.kernel, &inst.drift, &minus_alpha, inst.sign)
        .unwrap()
        .entries;
    let a_i = assemble_operator(&inst.grid, inst.d, &inst.kernel, &inst.drift, &inst.beta, inst.sign)
        .unwrap()
        .entries;
    let mut sample = || if coupling > 0.0 { rng.random_range(0.0..coupling) } else { 0.0 };
    let b = (0..n).map(|_| sample()).collect();
    let c = (0..n).map(|_| sample()).collect();
    frontera::spectral::BlockOperator::new(a_s, a_i, b, c).unwrap()
}

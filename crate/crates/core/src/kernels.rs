//! Dispersal kernels.
//!
//! Every family is normalized to unit mass and none of them assumes
//! `J(z) = J(-z)`. Closed-form families answer mass queries through their
//! analytic CDF / survival function so that far-tail boundary fluxes keep
//! their relative precision.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while constructing a kernel.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("uniform kernel needs finite lo < hi, got [{lo}, {hi}]")]
    EmptySupport { lo: f64, hi: f64 },
    #[error("{name} must be finite and > 0, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("weight_left must lie in [0, 1], got {0}")]
    WeightOutOfRange(f64),
    #[error("tabulated kernel needs at least 2 samples")]
    TooFewSamples,
    #[error("tabulated density must be finite and >= 0 (sample {index}: {value})")]
    NegativeDensity { index: usize, value: f64 },
    #[error("tabulated samples are not uniformly spaced at {spacing} (sample {index})")]
    NonUniformSpacing { index: usize, spacing: f64 },
    #[error("tabulated kernel has zero total mass")]
    ZeroMass,
}

/// Piecewise-linear kernel reconstructed from equally spaced samples.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedKernel {
    start: f64,
    spacing: f64,
    density: Vec<f64>,
    /// `cumulative[k]` is the mass on `[start, start + k*spacing]`.
    cumulative: Vec<f64>,
    raw_mass: f64,
}

impl TabulatedKernel {
    fn new(start: f64, spacing: f64, raw: Vec<f64>) -> Result<Self, KernelError> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(KernelError::NonPositive { name: "spacing", value: spacing });
        }
        if raw.len() < 2 {
            return Err(KernelError::TooFewSamples);
        }
        if let Some((index, &value)) = raw.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(KernelError::NegativeDensity { index, value });
        }
        let raw_mass: f64 = raw.windows(2).map(|w| 0.5 * spacing * (w[0] + w[1])).sum();
        if raw_mass <= 0.0 {
            return Err(KernelError::ZeroMass);
        }
        let density: Vec<f64> = raw.iter().map(|v| v / raw_mass).collect();
        let mut cumulative = Vec::with_capacity(density.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in density.windows(2) {
            acc += 0.5 * spacing * (w[0] + w[1]);
            cumulative.push(acc);
        }
        Ok(Self { start, spacing, density, cumulative, raw_mass })
    }

    fn end(&self) -> f64 {
        self.start + self.spacing * (self.density.len() - 1) as f64
    }

    /// Locates `z` as (segment index, offset within segment) for `z` inside the support.
    fn locate(&self, z: f64) -> (usize, f64) {
        let last = self.density.len() - 2;
        let k = (((z - self.start) / self.spacing).floor().max(0.0) as usize).min(last);
        (k, z - (self.start + k as f64 * self.spacing))
    }

    fn evaluate(&self, z: f64) -> f64 {
        if z < self.start || z > self.end() {
            return 0.0;
        }
        let (k, s) = self.locate(z);
        let t = (s / self.spacing).clamp(0.0, 1.0);
        self.density[k] * (1.0 - t) + self.density[k + 1] * t
    }

    fn cdf(&self, z: f64) -> f64 {
        if z <= self.start {
            return 0.0;
        }
        if z >= self.end() {
            return 1.0;
        }
        let (k, s) = self.locate(z);
        // Midpoint rule on [node_k, z] is exact for the linear interpolant.
        self.cumulative[k] + s * self.evaluate(self.start + k as f64 * self.spacing + 0.5 * s)
    }

    fn segments(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        self.density.windows(2).enumerate().map(move |(k, w)| {
            let z0 = self.start + k as f64 * self.spacing;
            (z0, z0 + self.spacing, w[0], w[1])
        })
    }

    /// `∫ |z| J(z) dz` over `z >= 0` (`right`) or `z < 0`.
    fn half_moment(&self, right: bool) -> f64 {
        // Integral of z*(linear) on a segment, split at 0, done exactly.
        let seg = |a: f64, b: f64, fa: f64, fb: f64, lo: f64, hi: f64| -> f64 {
            let (lo, hi) = (lo.max(a), hi.min(b));
            if hi <= lo {
                return 0.0;
            }
            let slope = (fb - fa) / (b - a);
            let c0 = fa - slope * a;
            // ∫ z (c0 + slope z) dz
            let prim = |z: f64| c0 * z * z / 2.0 + slope * z * z * z / 3.0;
            prim(hi) - prim(lo)
        };
        self.segments()
            .map(|(a, b, fa, fb)| {
                if right {
                    seg(a, b, fa, fb, 0.0, f64::INFINITY)
                } else {
                    -seg(a, b, fa, fb, f64::NEG_INFINITY, 0.0)
                }
            })
            .sum()
    }

    fn exp_moment(&self, rate: f64) -> f64 {
        // Exact integral of e^{rate z} times a linear function on each segment.
        self.segments()
            .map(|(a, b, fa, fb)| {
                if rate.abs() < 1e-12 {
                    return 0.5 * (b - a) * (fa + fb);
                }
                let slope = (fb - fa) / (b - a);
                let prim = |z: f64| {
                    let f = fa + slope * (z - a);
                    (rate * z).exp() * (f / rate - slope / (rate * rate))
                };
                prim(b) - prim(a)
            })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Family {
    UniformAsymmetric { lo: f64, hi: f64 },
    AsymmetricLaplace { rate_left: f64, rate_right: f64, weight_left: f64 },
    ShiftedGaussian { mean: f64, stddev: f64 },
    Tabulated(TabulatedKernel),
}

/// A normalized, possibly asymmetric dispersal kernel `J`.
///
/// Immutable after construction; all queries are pure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelConfig", into = "KernelConfig")]
pub struct KernelSpec {
    family: Family,
}

/// Serialized form of a kernel, tagged by `family`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelConfig {
    UniformAsymmetric {
        lo: f64,
        hi: f64,
    },
    AsymmetricLaplace {
        rate_left: f64,
        rate_right: f64,
        weight_left: f64,
    },
    ShiftedGaussian {
        mean: f64,
        stddev: f64,
    },
    /// `samples` are `(z, density)` pairs on a uniform lattice of step `spacing`.
    Tabulated {
        samples: Vec<(f64, f64)>,
        spacing: f64,
    },
}

impl TryFrom<KernelConfig> for KernelSpec {
    type Error = KernelError;

    fn try_from(cfg: KernelConfig) -> Result<Self, Self::Error> {
        match cfg {
            KernelConfig::UniformAsymmetric { lo, hi } => Self::uniform(lo, hi),
            KernelConfig::AsymmetricLaplace { rate_left, rate_right, weight_left } => {
                Self::asymmetric_laplace(rate_left, rate_right, weight_left)
            }
            KernelConfig::ShiftedGaussian { mean, stddev } => Self::shifted_gaussian(mean, stddev),
            KernelConfig::Tabulated { samples, spacing } => Self::from_samples(&samples, spacing),
        }
    }
}

impl From<KernelSpec> for KernelConfig {
    fn from(k: KernelSpec) -> Self {
        match k.family {
            Family::UniformAsymmetric { lo, hi } => KernelConfig::UniformAsymmetric { lo, hi },
            Family::AsymmetricLaplace { rate_left, rate_right, weight_left } => {
                KernelConfig::AsymmetricLaplace { rate_left, rate_right, weight_left }
            }
            Family::ShiftedGaussian { mean, stddev } => KernelConfig::ShiftedGaussian { mean, stddev },
            Family::Tabulated(t) => KernelConfig::Tabulated {
                samples: t
                    .density
                    .iter()
                    .enumerate()
                    .map(|(k, d)| (t.start + k as f64 * t.spacing, d * t.raw_mass))
                    .collect(),
                spacing: t.spacing,
            },
        }
    }
}

fn positive(name: &'static str, value: f64) -> Result<f64, KernelError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(KernelError::NonPositive { name, value })
    }
}

impl KernelSpec {
    /// Uniform density `1/(hi-lo)` on `[lo, hi]`; the support need not contain 0.
    pub fn uniform(lo: f64, hi: f64) -> Result<Self, KernelError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(KernelError::EmptySupport { lo, hi });
        }
        Ok(Self { family: Family::UniformAsymmetric { lo, hi } })
    }

    /// `w_L r_L e^{r_L z}` for `z < 0` and `(1-w_L) r_R e^{-r_R z}` for `z >= 0`.
    pub fn asymmetric_laplace(
        rate_left: f64,
        rate_right: f64,
        weight_left: f64,
    ) -> Result<Self, KernelError> {
        positive("rate_left", rate_left)?;
        positive("rate_right", rate_right)?;
        if !(0.0..=1.0).contains(&weight_left) {
            return Err(KernelError::WeightOutOfRange(weight_left));
        }
        Ok(Self { family: Family::AsymmetricLaplace { rate_left, rate_right, weight_left } })
    }

    pub fn shifted_gaussian(mean: f64, stddev: f64) -> Result<Self, KernelError> {
        if !mean.is_finite() {
            return Err(KernelError::NonPositive { name: "mean (finite)", value: mean });
        }
        positive("stddev", stddev)?;
        Ok(Self { family: Family::ShiftedGaussian { mean, stddev } })
    }

    /// Tabulated kernel from raw densities on `start + k*spacing`, renormalized to unit mass.
    pub fn tabulated(start: f64, spacing: f64, density: Vec<f64>) -> Result<Self, KernelError> {
        Ok(Self { family: Family::Tabulated(TabulatedKernel::new(start, spacing, density)?) })
    }

    /// Tabulated kernel from `(z, density)` pairs, which must sit on a lattice of step `spacing`.
    pub fn from_samples(samples: &[(f64, f64)], spacing: f64) -> Result<Self, KernelError> {
        positive("spacing", spacing)?;
        if samples.len() < 2 {
            return Err(KernelError::TooFewSamples);
        }
        let start = samples[0].0;
        for (index, (z, _)) in samples.iter().enumerate() {
            let expected = start + index as f64 * spacing;
            if (z - expected).abs() > 1e-9 * spacing.max(expected.abs()) {
                return Err(KernelError::NonUniformSpacing { index, spacing });
            }
        }
        Self::tabulated(start, spacing, samples.iter().map(|s| s.1).collect())
    }

    /// Samples `other` on `[lo, hi]` at the given spacing and wraps it as a tabulated kernel.
    pub fn tabulate(other: &KernelSpec, lo: f64, hi: f64, spacing: f64) -> Result<Self, KernelError> {
        positive("spacing", spacing)?;
        let count = ((hi - lo) / spacing).round() as usize + 1;
        let density = (0..count).map(|k| other.evaluate(lo + k as f64 * spacing)).collect();
        Self::tabulated(lo, spacing, density)
    }

    /// Short identifier used in operator metadata and file headers.
    pub fn id(&self) -> String {
        match &self.family {
            Family::UniformAsymmetric { lo, hi } => format!("uniform_asymmetric({lo},{hi})"),
            Family::AsymmetricLaplace { rate_left, rate_right, weight_left } => {
                format!("asymmetric_laplace({rate_left},{rate_right},{weight_left})")
            }
            Family::ShiftedGaussian { mean, stddev } => format!("shifted_gaussian({mean},{stddev})"),
            Family::Tabulated(t) => {
                format!("tabulated({},{},{})", t.start, t.spacing, t.density.len())
            }
        }
    }

    /// Pointwise density `J(z) >= 0`; at a jump, the mean of the one-sided limits.
    pub fn evaluate(&self, z: f64) -> f64 {
        match &self.family {
            Family::UniformAsymmetric { lo, hi } => {
                if z > *lo && z < *hi {
                    1.0 / (hi - lo)
                } else if z == *lo || z == *hi {
                    0.5 / (hi - lo)
                } else {
                    0.0
                }
            }
            Family::AsymmetricLaplace { rate_left, rate_right, weight_left } => {
                let left = weight_left * rate_left;
                let right = (1.0 - weight_left) * rate_right;
                if z < 0.0 {
                    left * (rate_left * z).exp()
                } else if z > 0.0 {
                    right * (-rate_right * z).exp()
                } else {
                    0.5 * (left + right)
                }
            }
            Family::ShiftedGaussian { mean, stddev } => {
                let u = (z - mean) / stddev;
                (-0.5 * u * u).exp() / (stddev * (2.0 * std::f64::consts::PI).sqrt())
            }
            Family::Tabulated(t) => t.evaluate(z),
        }
    }

    /// Mass on `(-inf, z]`.
    pub fn cdf(&self, z: f64) -> f64 {
        match &self.family {
            Family::UniformAsymmetric { lo, hi } => ((z - lo) / (hi - lo)).clamp(0.0, 1.0),
            Family::AsymmetricLaplace { rate_left, rate_right, weight_left } => {
                if z < 0.0 {
                    weight_left * (rate_left * z).exp()
                } else {
                    1.0 - (1.0 - weight_left) * (-rate_right * z).exp()
                }
            }
            Family::ShiftedGaussian { mean, stddev } => {
                0.5 * libm::erfc(-(z - mean) / (stddev * std::f64::consts::SQRT_2))
            }
            Family::Tabulated(t) => t.cdf(z),
        }
    }

    /// Mass on `(z, +inf)`, evaluated without cancellation in the right tail.
    pub fn survival(&self, z: f64) -> f64 {
        match &self.family {
            Family::UniformAsymmetric { lo, hi } => ((hi - z) / (hi - lo)).clamp(0.0, 1.0),
            Family::AsymmetricLaplace { rate_left, rate_right, weight_left } => {
                if z < 0.0 {
                    1.0 - weight_left * (rate_left * z).exp()
                } else {
                    (1.0 - weight_left) * (-rate_right * z).exp()
                }
            }
            Family::ShiftedGaussian { mean, stddev } => {
                0.5 * libm::erfc((z - mean) / (stddev * std::f64::consts::SQRT_2))
            }
            Family::Tabulated(t) => 1.0 - t.cdf(z),
        }
    }

    fn center(&self) -> f64 {
        match &self.family {
            Family::UniformAsymmetric { lo, hi } => 0.5 * (lo + hi),
            Family::AsymmetricLaplace { .. } => 0.0,
            Family::ShiftedGaussian { mean, .. } => *mean,
            Family::Tabulated(t) => 0.5 * (t.start + t.end()),
        }
    }

    /// `∫_lo^hi J(z) dz` for `lo <= hi`; either end may be infinite.
    pub fn interval_mass(&self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        let c = self.center();
        let m = if hi <= c {
            self.cdf(hi) - self.cdf(lo)
        } else if lo >= c {
            self.survival(lo) - self.survival(hi)
        } else {
            1.0 - self.cdf(lo) - self.survival(hi)
        };
        m.clamp(0.0, 1.0)
    }

    /// `∫_0^∞ z J(z) dz`.
    pub fn right_moment(&self) -> f64 {
        match &self.family {
            Family::UniformAsymmetric { lo, hi } => {
                let (a, b) = (lo.max(0.0), hi.max(0.0));
                (b * b - a * a) / (2.0 * (hi - lo))
            }
            Family::AsymmetricLaplace { rate_right, weight_left, .. } => (1.0 - weight_left) / rate_right,
            Family::ShiftedGaussian { mean, stddev } => gaussian_positive_part(*mean, *stddev),
            Family::Tabulated(t) => t.half_moment(true),
        }
    }

    /// `∫_{-∞}^0 |z| J(z) dz`.
    pub fn left_moment(&self) -> f64 {
        match &self.family {
            Family::UniformAsymmetric { lo, hi } => {
                let (a, b) = (lo.min(0.0), hi.min(0.0));
                (a * a - b * b) / (2.0 * (hi - lo))
            }
            Family::AsymmetricLaplace { rate_left, weight_left, .. } => weight_left / rate_left,
            Family::ShiftedGaussian { mean, stddev } => gaussian_positive_part(-*mean, *stddev),
            Family::Tabulated(t) => t.half_moment(false),
        }
    }

    /// `C_J = ∫ |z| J(z) dz`.
    pub fn abs_first_moment(&self) -> f64 {
        self.left_moment() + self.right_moment()
    }

    /// `∫ e^{rate z} J(z) dz`, or `None` when it diverges.
    pub fn exp_moment(&self, rate: f64) -> Option<f64> {
        match &self.family {
            Family::UniformAsymmetric { lo, hi } => {
                if rate.abs() < 1e-12 {
                    Some(1.0)
                } else {
                    Some(((rate * hi).exp() - (rate * lo).exp()) / (rate * (hi - lo)))
                }
            }
            Family::AsymmetricLaplace { rate_left, rate_right, weight_left } => {
                let wr = 1.0 - weight_left;
                let right_ok = wr == 0.0 || rate < *rate_right;
                let left_ok = *weight_left == 0.0 || -rate < *rate_left;
                if !(right_ok && left_ok) {
                    return None;
                }
                let left =
                    if *weight_left == 0.0 { 0.0 } else { weight_left * rate_left / (rate_left + rate) };
                let right = if wr == 0.0 { 0.0 } else { wr * rate_right / (rate_right - rate) };
                Some(left + right)
            }
            Family::ShiftedGaussian { mean, stddev } => {
                Some((rate * mean + 0.5 * rate * rate * stddev * stddev).exp())
            }
            Family::Tabulated(t) => Some(t.exp_moment(rate)),
        }
    }

    /// Mass defect removed at construction (nonzero only for tabulated kernels).
    pub fn normalization_defect(&self) -> f64 {
        match &self.family {
            Family::Tabulated(t) => (1.0 - t.raw_mass).abs(),
            _ => 0.0,
        }
    }

    /// Smallest and largest `z` with `J(z) > 0`, possibly infinite.
    pub fn support(&self) -> (f64, f64) {
        match &self.family {
            Family::UniformAsymmetric { lo, hi } => (*lo, *hi),
            Family::AsymmetricLaplace { weight_left, .. } => {
                let lo = if *weight_left > 0.0 { f64::NEG_INFINITY } else { 0.0 };
                let hi = if *weight_left < 1.0 { f64::INFINITY } else { 0.0 };
                (lo, hi)
            }
            Family::ShiftedGaussian { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Family::Tabulated(t) => (t.start, t.end()),
        }
    }

    /// Checks the kernel hypotheses: unit mass, finite first moments on both
    /// sides, and finite exponential moments at `±exp_rate`.
    pub fn validate(&self, exp_rate: f64) -> ValidationReport {
        let mass_error = (1.0 - self.interval_mass(f64::NEG_INFINITY, f64::INFINITY)).abs();
        let left_moment = self.left_moment();
        let right_moment = self.right_moment();
        let abs_moment = left_moment + right_moment;
        let rate_ok = exp_rate.is_finite() && exp_rate > 0.0;
        let exp_moment_plus = if rate_ok { self.exp_moment(exp_rate) } else { None };
        let exp_moment_minus = if rate_ok { self.exp_moment(-exp_rate) } else { None };
        let mut failures = Vec::new();
        if mass_error > 1e-10 {
            failures.push(format!("(J1) total mass differs from 1 by {mass_error:e}"));
        }
        if !abs_moment.is_finite() {
            failures.push("(J1) first absolute moment is not finite".to_string());
        }
        if !rate_ok {
            failures.push(format!("(J2) exponential rate must be > 0, got {exp_rate}"));
        } else if exp_moment_plus.is_none() || exp_moment_minus.is_none() {
            failures.push(format!("(J2) exponential moment diverges at rate ±{exp_rate}"));
        }
        ValidationReport {
            kernel: self.id(),
            exp_rate,
            mass_error,
            normalization_defect: self.normalization_defect(),
            left_moment,
            right_moment,
            abs_moment,
            exp_moment_plus,
            exp_moment_minus,
            passed: failures.is_empty(),
            failures,
        }
    }
}

/// `E[max(X, 0)]` for `X ~ N(mean, stddev²)`.
fn gaussian_positive_part(mean: f64, stddev: f64) -> f64 {
    let u = mean / stddev;
    let pdf = (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let cdf = 0.5 * libm::erfc(-u / std::f64::consts::SQRT_2);
    stddev * pdf + mean * cdf
}

/// Outcome of [`KernelSpec::validate`]. A failed check is data, not an error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub kernel: String,
    pub exp_rate: f64,
    pub mass_error: f64,
    pub normalization_defect: f64,
    pub left_moment: f64,
    pub right_moment: f64,
    pub abs_moment: f64,
    pub exp_moment_plus: Option<f64>,
    pub exp_moment_minus: Option<f64>,
    pub passed: bool,
    pub failures: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace(l: f64, r: f64, w: f64) -> KernelSpec {
        KernelSpec::asymmetric_laplace(l, r, w).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let u = KernelSpec::uniform(-0.5, 0.5).unwrap();
        assert_eq!(u.evaluate(0.0), 1.0);
        assert_eq!(u.evaluate(0.7), 0.0);
        assert!((laplace(1.0, 1.0, 0.5).evaluate(0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn interval_mass_examples() {
        let u = KernelSpec::uniform(-0.5, 0.5).unwrap();
        assert!((u.interval_mass(0.0, 0.25) - 0.25).abs() < 1e-15);
        assert!((laplace(1.0, 2.0, 0.5).interval_mass(0.0, f64::INFINITY) - 0.5).abs() < 1e-15);
        for k in [u, laplace(1.0, 3.0, 0.2), KernelSpec::shifted_gaussian(0.4, 0.7).unwrap()] {
            let m = k.interval_mass(f64::NEG_INFINITY, f64::INFINITY);
            assert!((m - 1.0).abs() < 1e-12, "{}: {m}", k.id());
        }
    }

    #[test]
    fn moments() {
        let u = KernelSpec::uniform(-0.5, 0.5).unwrap();
        assert!((u.abs_first_moment() - 0.25).abs() < 1e-15);
        assert!((laplace(1.0, 1.0, 0.5).abs_first_moment() - 1.0).abs() < 1e-15);
        let g = KernelSpec::shifted_gaussian(0.0, 1.0).unwrap();
        assert!((g.abs_first_moment() - 0.797_884_560_8).abs() < 1e-10);
        // Skewed support entirely to the right of 0.
        let s = KernelSpec::uniform(0.2, 0.6).unwrap();
        assert!((s.abs_first_moment() - 0.4).abs() < 1e-14);
        assert_eq!(s.left_moment(), 0.0);
    }

    #[test]
    fn validate_examples() {
        assert!(laplace(1.0, 1.0, 0.5).validate(0.5).passed);
        let r = laplace(1.0, 1.0, 0.5).validate(1.5);
        assert!(!r.passed);
        assert!(r.failures.iter().any(|f| f.starts_with("(J2)")));
        assert!(KernelSpec::uniform(-0.5, 0.5).unwrap().validate(10.0).passed);
        // A one-sided Laplace only needs the populated tail to decay.
        assert!(laplace(1.0, 5.0, 0.0).validate(3.0).passed);
    }

    #[test]
    fn tabulated_renormalizes_and_records_defect() {
        let k = KernelSpec::tabulated(-1.0, 0.5, vec![0.0, 1.0, 2.0, 1.0, 0.0]).unwrap();
        // Raw trapezoid mass is 2.0.
        assert!((k.normalization_defect() - 1.0).abs() < 1e-15);
        assert!((k.interval_mass(f64::NEG_INFINITY, f64::INFINITY) - 1.0).abs() < 1e-15);
        assert!((k.evaluate(0.0) - 1.0).abs() < 1e-15);
        assert!((k.evaluate(0.25) - 0.75).abs() < 1e-15);
        assert_eq!(k.evaluate(1.2), 0.0);
        // Symmetric hat: half the mass on each side.
        assert!((k.cdf(0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn construction_errors() {
        assert!(KernelSpec::uniform(1.0, 1.0).is_err());
        assert!(KernelSpec::asymmetric_laplace(0.0, 1.0, 0.5).is_err());
        assert!(KernelSpec::asymmetric_laplace(1.0, 1.0, 1.5).is_err());
        assert!(KernelSpec::shifted_gaussian(0.0, -1.0).is_err());
        assert!(KernelSpec::tabulated(0.0, 0.1, vec![1.0]).is_err());
        assert!(KernelSpec::tabulated(0.0, 0.1, vec![1.0, -1.0]).is_err());
        assert!(KernelSpec::tabulated(0.0, 0.1, vec![0.0, 0.0]).is_err());
        assert!(KernelSpec::from_samples(&[(0.0, 1.0), (0.1, 1.0), (0.35, 1.0)], 0.1).is_err());
    }

    #[test]
    fn config_round_trip() {
        let json = r#"{"family":"asymmetric_laplace","rate_left":1.0,"rate_right":2.0,"weight_left":0.5}"#;
        let k: KernelSpec = serde_json::from_str(json).unwrap();
        assert_eq!(k, laplace(1.0, 2.0, 0.5));
        let back = serde_json::to_string(&k).unwrap();
        assert_eq!(serde_json::from_str::<KernelSpec>(&back).unwrap(), k);
        let bad = r#"{"family":"asymmetric_laplace","rate_left":-1.0,"rate_right":2.0,"weight_left":0.5}"#;
        assert!(serde_json::from_str::<KernelSpec>(bad).is_err());
    }
}

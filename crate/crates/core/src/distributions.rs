//! Weight and bias distributions.
//!
//! The three supported families — centered Gaussian, centered uniform, and
//! the uniform law over a finite symmetric set — are the even laws for which
//! the trajectory-growth lower bounds hold. A [`DistributionSpec`] couples a
//! family with a sparsity mixture weight `alpha`: a draw is exactly 0 with
//! probability `1 − alpha` and a family sample otherwise. Biases use the
//! same type with `alpha = 1`.
//!
//! Besides sampling, this module exposes the analytic constants the bounds
//! are built from: the per-family `M` with `E|uᵀw| ≥ M‖u‖`, the optimal
//! Marcinkiewicz–Zygmund constants, and a Monte Carlo / enumeration oracle
//! for `E|uᵀw|` used to cross-check all of them.

use ndarray::{Array1, Array2};
use rand::RngExt;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::rng::StreamRng;

/// Maximum number of outcomes the discrete enumeration path will visit.
pub const ENUMERATION_LIMIT: usize = 1_000_000;

/// A weight family: the law `P` that non-zero entries are drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    /// `N(0, sigma²)`.
    Gaussian { sigma: f64 },
    /// `U(−half_width, half_width)`.
    Uniform { half_width: f64 },
    /// Uniform over a finite symmetric set (sorted, deduplicated).
    Discrete { values: Vec<f64> },
}

impl Family {
    /// Standard deviation of the family itself (no sparsity mixing).
    pub fn std(&self) -> f64 {
        match self {
            Family::Gaussian { sigma } => *sigma,
            Family::Uniform { half_width } => half_width / 3.0f64.sqrt(),
            Family::Discrete { values } => {
                let n = values.len() as f64;
                (values.iter().map(|v| v * v).sum::<f64>() / n).sqrt()
            }
        }
    }

    /// Mean absolute value of a family draw.
    pub fn mean_abs(&self) -> f64 {
        match self {
            Family::Gaussian { sigma } => sigma * (2.0 / PI).sqrt(),
            Family::Uniform { half_width } => half_width / 2.0,
            Family::Discrete { values } => {
                values.iter().map(|v| v.abs()).sum::<f64>() / values.len() as f64
            }
        }
    }

    /// The family's natural scale parameter: `sigma`, the half-width, or the
    /// largest magnitude in the discrete set.
    pub fn scale_param(&self) -> f64 {
        match self {
            Family::Gaussian { sigma } => *sigma,
            Family::Uniform { half_width } => *half_width,
            Family::Discrete { values } => values.iter().fold(0.0, |m, v| v.abs().max(m)),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Gaussian { .. } => "gaussian",
            Family::Uniform { .. } => "uniform",
            Family::Discrete { .. } => "discrete",
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Family::Gaussian { sigma } => {
                if !(sigma.is_finite() && *sigma > 0.0) {
                    return Err(Error::Domain(format!(
                        "gaussian sigma must be > 0, got {sigma}"
                    )));
                }
            }
            Family::Uniform { half_width } => {
                if !(half_width.is_finite() && *half_width > 0.0) {
                    return Err(Error::Domain(format!(
                        "uniform half-width must be > 0, got {half_width}"
                    )));
                }
            }
            Family::Discrete { values } => {
                if values.is_empty() {
                    return Err(Error::Domain("discrete set must be nonempty".into()));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Domain("discrete set must be finite-valued".into()));
                }
                let mut sorted = values.clone();
                sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
                if sorted != *values {
                    return Err(Error::Domain("discrete set must be sorted".into()));
                }
                if sorted.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::Domain("discrete set must be deduplicated".into()));
                }
                let n = sorted.len();
                for i in 0..n {
                    if sorted[i] + sorted[n - 1 - i] != 0.0 {
                        return Err(Error::Domain(format!(
                            "discrete set must be symmetric: {} has no matching {}",
                            sorted[i], -sorted[i]
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A sparse weight (or bias) law: a family plus the sparsity mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecRepr", into = "SpecRepr")]
pub struct DistributionSpec {
    family: Family,
    alpha: f64,
    scale_by_inv_sqrt_k: bool,
}

/// Flat serialized form so configs read naturally:
/// `family = "gaussian"`, `sigma = 2.0`, `alpha = 0.5`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct SpecRepr {
    #[serde(flatten)]
    family: Family,
    #[serde(default = "one")]
    alpha: f64,
    #[serde(default)]
    scale_by_inv_sqrt_k: bool,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<SpecRepr> for DistributionSpec {
    type Error = Error;

    fn try_from(raw: SpecRepr) -> Result<Self> {
        DistributionSpec::new(raw.family, raw.alpha, raw.scale_by_inv_sqrt_k)
    }
}

impl From<DistributionSpec> for SpecRepr {
    fn from(spec: DistributionSpec) -> Self {
        SpecRepr {
            family: spec.family,
            alpha: spec.alpha,
            scale_by_inv_sqrt_k: spec.scale_by_inv_sqrt_k,
        }
    }
}

impl DistributionSpec {
    pub fn new(family: Family, alpha: f64, scale_by_inv_sqrt_k: bool) -> Result<Self> {
        family.validate()?;
        if !(alpha.is_finite() && (0.0..=1.0).contains(&alpha)) {
            return Err(Error::Domain(format!(
                "alpha must be in [0, 1], got {alpha}"
            )));
        }
        let family = match family {
            Family::Discrete { mut values } => {
                // Stored sorted; validate() has already checked order/symmetry.
                values.sort_by(|a, b| a.partial_cmp(b).unwrap());
                Family::Discrete { values }
            }
            f => f,
        };
        Ok(Self {
            family,
            alpha,
            scale_by_inv_sqrt_k,
        })
    }

    pub fn gaussian(sigma: f64, alpha: f64) -> Result<Self> {
        Self::new(Family::Gaussian { sigma }, alpha, false)
    }

    pub fn uniform(half_width: f64, alpha: f64) -> Result<Self> {
        Self::new(Family::Uniform { half_width }, alpha, false)
    }

    pub fn discrete(values: &[f64], alpha: f64) -> Result<Self> {
        let mut values = values.to_vec();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values.dedup();
        Self::new(Family::Discrete { values }, alpha, false)
    }

    /// The symmetric integer set `{−c, …, −1, 0, 1, …, c}` (zero included).
    pub fn discrete_integer_range(c: u32, alpha: f64) -> Result<Self> {
        let values: Vec<f64> = (-(c as i64)..=c as i64).map(|v| v as f64).collect();
        Self::new(Family::Discrete { values }, alpha, false)
    }

    /// Enable or disable dividing the family scale by √fan-in at sampling time.
    pub fn with_inv_sqrt_k_scaling(mut self, enabled: bool) -> Self {
        self.scale_by_inv_sqrt_k = enabled;
        self
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn scales_by_inv_sqrt_k(&self) -> bool {
        self.scale_by_inv_sqrt_k
    }

    /// Standard deviation of the full sparse mixture: `√alpha ×` family std.
    pub fn std_dev(&self) -> f64 {
        self.alpha.sqrt() * self.family.std()
    }

    /// The direction constant `M` with `E|uᵀw| ≥ M‖u‖` for `w` drawn from
    /// the (dense) family: `√2·σ/√π` for Gaussian, `C/(2√2)` for uniform,
    /// `Σ|w|/(√2·N)` for discrete. Always uses the unscaled parameter;
    /// callers divide by √k where fan-in scaling applies.
    pub fn m_constant(&self) -> f64 {
        match &self.family {
            Family::Gaussian { sigma } => 2.0f64.sqrt() * sigma / PI.sqrt(),
            Family::Uniform { half_width } => half_width / (2.0 * 2.0f64.sqrt()),
            Family::Discrete { .. } => self.family.mean_abs() / 2.0f64.sqrt(),
        }
    }

    /// One mixture draw, with the family at its unscaled parameter.
    pub fn sample_scalar(&self, rng: &mut StreamRng) -> f64 {
        self.sample_with_divisor(1.0, rng)
    }

    fn sample_with_divisor(&self, divisor: f64, rng: &mut StreamRng) -> f64 {
        if self.alpha < 1.0 {
            let u: f64 = rng.random();
            if u >= self.alpha {
                return 0.0;
            }
        }
        match &self.family {
            Family::Gaussian { sigma } => {
                let z: f64 = StandardNormal.sample(rng);
                z * (sigma / divisor)
            }
            Family::Uniform { half_width } => {
                let c = half_width / divisor;
                let u: f64 = rng.random();
                c * (2.0 * u - 1.0)
            }
            Family::Discrete { values } => {
                let idx = rng.random_range(0..values.len());
                values[idx] / divisor
            }
        }
    }

    /// A `rows × cols` matrix of iid mixture draws. When √k scaling is
    /// enabled the family parameter is divided by `√cols` (the fan-in).
    pub fn sample_matrix(&self, rows: usize, cols: usize, rng: &mut StreamRng) -> Array2<f64> {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be >= 1");
        let divisor = if self.scale_by_inv_sqrt_k {
            (cols as f64).sqrt()
        } else {
            1.0
        };
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            data.push(self.sample_with_divisor(divisor, rng));
        }
        Array2::from_shape_vec((rows, cols), data).expect("shape matches data length")
    }

    /// A vector of iid mixture draws at the unscaled parameter (bias use).
    pub fn sample_vector(&self, len: usize, rng: &mut StreamRng) -> Array1<f64> {
        Array1::from_iter((0..len).map(|_| self.sample_with_divisor(1.0, rng)))
    }
}

fn sqrt_pi_over_two() -> f64 {
    PI.sqrt() / 2.0
}

/// Breakpoint `p0` of the optimal Marcinkiewicz–Zygmund lower constant: the
/// root of `Γ((p+1)/2) = √π/2` inside `(1, 2)`. `p = 2` also solves the
/// equation, so the bisection bracket is located by a coarse scan first.
pub fn mz_p0() -> f64 {
    static P0: OnceLock<f64> = OnceLock::new();
    *P0.get_or_init(|| {
        let f = |p: f64| gamma((p + 1.0) / 2.0) - sqrt_pi_over_two();
        let mut lo = 1.0;
        let mut hi = 2.0;
        let steps = 20;
        for i in 1..steps {
            let p = 1.0 + i as f64 / steps as f64;
            if f(p) < 0.0 {
                hi = p;
                break;
            }
            lo = p;
        }
        let mut flo = f(lo);
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            let fm = f(mid);
            if (fm > 0.0) == (flo > 0.0) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    })
}

/// Optimal lower constant `A_p` of the Marcinkiewicz–Zygmund inequality.
pub fn mz_constant_a(p: f64) -> Result<f64> {
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::Domain(format!(
            "MZ constant requires p > 0, got {p}"
        )));
    }
    let a = if p <= mz_p0() {
        2.0f64.powf(p / 2.0 - 1.0)
    } else if p < 2.0 {
        2.0f64.powf(p / 2.0) * gamma((p + 1.0) / 2.0) / PI.sqrt()
    } else {
        1.0
    };
    Ok(a)
}

/// Optimal upper constant `B_p` of the Marcinkiewicz–Zygmund inequality.
pub fn mz_constant_b(p: f64) -> Result<f64> {
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::Domain(format!(
            "MZ constant requires p > 0, got {p}"
        )));
    }
    let b = if p <= 2.0 {
        1.0
    } else {
        2.0f64.powf(p / 2.0) * gamma((p + 1.0) / 2.0) / PI.sqrt()
    };
    Ok(b)
}

/// Estimate of `E|uᵀw|` for `w` with iid entries from the DENSE family
/// (sparsity is ignored here: the constant `M` concerns family-distributed
/// entries only). Returns `(mean, stderr)`.
///
/// Discrete families with at most [`ENUMERATION_LIMIT`] joint outcomes are
/// evaluated exactly by full enumeration, with `stderr = 0`; everything else
/// is Monte Carlo over `trials` draws.
pub fn abs_dot_expectation_oracle(
    spec: &DistributionSpec,
    u: &[f64],
    trials: usize,
    rng: &mut StreamRng,
) -> Result<(f64, f64)> {
    if u.iter().all(|&x| x == 0.0) {
        return Err(Error::Domain("direction u must be nonzero".into()));
    }
    if trials < 1_000 {
        return Err(Error::Domain(format!(
            "need at least 1000 trials, got {trials}"
        )));
    }
    let dense = DistributionSpec {
        alpha: 1.0,
        ..spec.clone()
    };

    if let Family::Discrete { values } = dense.family() {
        let n = values.len();
        if outcome_count(n, u.len()).is_some_and(|c| c <= ENUMERATION_LIMIT) {
            return Ok((enumerate_abs_dot(values, u), 0.0));
        }
    }

    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for _ in 0..trials {
        let mut dot = 0.0;
        for &ui in u {
            dot += ui * dense.sample_with_divisor(1.0, rng);
        }
        let x = dot.abs();
        sum += x;
        sumsq += x * x;
    }
    let n = trials as f64;
    let mean = sum / n;
    let var = (sumsq - n * mean * mean).max(0.0) / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

/// `n_values^dim` if it fits in usize without overflow.
pub(crate) fn outcome_count(n_values: usize, dim: usize) -> Option<usize> {
    let mut total: usize = 1;
    for _ in 0..dim {
        total = total.checked_mul(n_values)?;
        if total > ENUMERATION_LIMIT {
            return Some(total);
        }
    }
    Some(total)
}

/// Exact `E|uᵀw|` over all `N^dim` equally likely discrete outcomes, via a
/// mixed-radix odometer.
fn enumerate_abs_dot(values: &[f64], u: &[f64]) -> f64 {
    let n = values.len();
    let dim = u.len();
    let total: usize = (0..dim).fold(1usize, |acc, _| acc * n);
    let mut digits = vec![0usize; dim];
    let mut sum = 0.0;
    for _ in 0..total {
        let mut dot = 0.0;
        for (i, &d) in digits.iter().enumerate() {
            dot += u[i] * values[d];
        }
        sum += dot.abs();
        for d in digits.iter_mut() {
            *d += 1;
            if *d < n {
                break;
            }
            *d = 0;
        }
    }
    sum / total as f64
}

//! Theoretical lower-bound bases for expected trajectory growth.
//!
//! The general per-layer factor is `α·M·√k / 2`, where `M` is the weight
//! family's direction constant (`E|uᵀw| ≥ M‖u‖`). Substituting each
//! family's `M` gives the closed forms below; the expected length after `d`
//! layers is then bounded below by the product of per-layer bases times the
//! input length. All bases take the family parameter actually used at
//! sampling time, so with `1/√k` scaling callers pass `σ/√k` and recover
//! the width-independent form.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::distributions::{DistributionSpec, Family};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundProvenance {
    General,
    Gaussian,
    Uniform,
    Discrete,
    /// Earlier Gaussian-only result; an order-of-magnitude factor with an
    /// unstated constant, for comparison plots only.
    PriorGaussian,
}

/// A per-layer multiplicative lower-bound factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundBase {
    pub base: f64,
    pub provenance: BoundProvenance,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && (0.0..=1.0).contains(&alpha)) {
        return Err(Error::Domain(format!(
            "alpha must be in [0, 1], got {alpha}"
        )));
    }
    Ok(())
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::Domain("width k must be at least 1".into()));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::Domain(format!("{name} must be > 0, got {v}")));
    }
    Ok(())
}

/// `α·M·√k / 2` for any family with direction constant `m`.
pub fn base_general(alpha: f64, m: f64, k: usize) -> Result<BoundBase> {
    check_alpha(alpha)?;
    check_k(k)?;
    if !(m.is_finite() && m >= 0.0) {
        return Err(Error::Domain(format!("M must be >= 0, got {m}")));
    }
    Ok(BoundBase {
        base: alpha * m * (k as f64).sqrt() / 2.0,
        provenance: BoundProvenance::General,
    })
}

/// `α·σ_w·√k / √(2π)` for sparse-Gaussian weights.
pub fn base_gaussian(alpha: f64, sigma_w: f64, k: usize) -> Result<BoundBase> {
    check_alpha(alpha)?;
    check_k(k)?;
    check_positive("sigma_w", sigma_w)?;
    Ok(BoundBase {
        base: alpha * sigma_w * (k as f64).sqrt() / (2.0 * PI).sqrt(),
        provenance: BoundProvenance::Gaussian,
    })
}

/// `α·C_w·√k / (4√2)` for sparse-uniform weights.
pub fn base_uniform(alpha: f64, c_w: f64, k: usize) -> Result<BoundBase> {
    check_alpha(alpha)?;
    check_k(k)?;
    check_positive("C_w", c_w)?;
    Ok(BoundBase {
        base: alpha * c_w * (k as f64).sqrt() / (4.0 * 2.0f64.sqrt()),
        provenance: BoundProvenance::Uniform,
    })
}

/// `(α·√k / (2√2)) · Σ|w|/N` for sparse-discrete weights.
pub fn base_discrete(alpha: f64, values: &[f64], k: usize) -> Result<BoundBase> {
    check_alpha(alpha)?;
    check_k(k)?;
    // Reuse the spec validation for symmetry and non-emptiness.
    let spec = DistributionSpec::discrete(values, alpha)?;
    let mean_abs = spec.family().mean_abs();
    Ok(BoundBase {
        base: alpha * (k as f64).sqrt() / (2.0 * 2.0f64.sqrt()) * mean_abs,
        provenance: BoundProvenance::Discrete,
    })
}

/// Bare factor `σ_w·√k / √(k+1)` of the earlier dense-Gaussian bound. The
/// published result hides a constant inside O(·); this returns the factor
/// alone and is labeled order-of-magnitude in outputs.
pub fn base_prior_gaussian(sigma_w: f64, k: usize) -> Result<BoundBase> {
    check_k(k)?;
    check_positive("sigma_w", sigma_w)?;
    Ok(BoundBase {
        base: sigma_w * (k as f64).sqrt() / ((k + 1) as f64).sqrt(),
        provenance: BoundProvenance::PriorGaussian,
    })
}

/// Bound base matching a weight spec at fan-in `k`, using the effective
/// (possibly `1/√k`-scaled) family parameter — i.e. the base that applies to
/// networks actually sampled from this spec.
pub fn base_for_spec(spec: &DistributionSpec, k: usize) -> Result<BoundBase> {
    let divisor = if spec.scales_by_inv_sqrt_k() {
        (k as f64).sqrt()
    } else {
        1.0
    };
    match spec.family() {
        Family::Gaussian { sigma } => base_gaussian(spec.alpha(), sigma / divisor, k),
        Family::Uniform { half_width } => base_uniform(spec.alpha(), half_width / divisor, k),
        Family::Discrete { values } => {
            let scaled: Vec<f64> = values.iter().map(|v| v / divisor).collect();
            base_discrete(spec.alpha(), &scaled, k)
        }
    }
}

/// Product of per-layer bases times the input length (the layer-varying
/// form of the bound).
pub fn bound_length(bases: &[BoundBase], input_length: f64) -> f64 {
    bases.iter().map(|b| b.base).product::<f64>() * input_length
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn general_base_values() {
        let k = 64;
        let m = 2.0 / (k as f64).sqrt();
        assert_relative_eq!(base_general(1.0, m, k).unwrap().base, 1.0, epsilon = 1e-15);
        assert_eq!(base_general(0.0, 5.0, 10).unwrap().base, 0.0);
        // Frozen from a 30-digit evaluation of 0.5 * 0.79788.. * 10 / 2.
        assert_relative_eq!(
            base_general(0.5, 0.7978845608028654, 100).unwrap().base,
            1.9947114020071635,
            epsilon = 1e-12
        );
    }

    #[test]
    fn gaussian_base_values() {
        assert_relative_eq!(
            base_gaussian(1.0, (2.0 * PI).sqrt(), 1).unwrap().base,
            1.0,
            epsilon = 1e-15
        );
        // 0.5 * 2 * 28 / sqrt(2*pi), 30-digit reference.
        assert_relative_eq!(
            base_gaussian(0.5, 2.0, 784).unwrap().base,
            11.170383851240115,
            epsilon = 1e-12
        );
        // Effective sigma 2/sqrt(784): the width-independent dense form.
        assert_relative_eq!(
            base_gaussian(1.0, 2.0 / 28.0, 784).unwrap().base,
            0.7978845608028654,
            epsilon = 1e-12
        );
    }

    #[test]
    fn uniform_base_values() {
        assert_relative_eq!(
            base_uniform(1.0, 4.0 * 2.0f64.sqrt(), 1).unwrap().base,
            1.0,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            base_uniform(0.5, 2.0, 100).unwrap().base,
            1.7677669529663689,
            epsilon = 1e-12
        );
        assert_eq!(base_uniform(0.0, 2.0, 100).unwrap().base, 0.0);
    }

    #[test]
    fn discrete_base_values() {
        assert_relative_eq!(
            base_discrete(1.0, &[-1.0, 1.0], 8).unwrap().base,
            1.0,
            epsilon = 1e-15
        );
        // sqrt(2)/(2 sqrt(2)) * 6/5 = 0.6 exactly.
        assert_relative_eq!(
            base_discrete(1.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 2)
                .unwrap()
                .base,
            0.6,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            base_discrete(0.5, &[-1.0, 1.0], 784).unwrap().base,
            4.949747468305833,
            epsilon = 1e-12
        );
        // Two-point set at +-c: alpha sqrt(k) c / (2 sqrt 2).
        let c = 1.7;
        let base = base_discrete(0.25, &[-c, c], 49).unwrap().base;
        assert_relative_eq!(
            base,
            0.25 * 7.0 * c / (2.0 * 2.0f64.sqrt()),
            epsilon = 1e-14
        );
    }

    #[test]
    fn prior_gaussian_values() {
        // k -> infinity limit approaches sigma.
        assert_relative_eq!(
            base_prior_gaussian(1.0, 1_000_000).unwrap().base,
            1.0,
            epsilon = 1e-6
        );
        assert_relative_eq!(
            base_prior_gaussian(2.0, 784).unwrap().base,
            1.998725708695099,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            base_prior_gaussian(0.1, 1).unwrap().base,
            0.07071067811865475,
            epsilon = 1e-15
        );
    }

    #[test]
    fn bound_length_products() {
        let one = BoundBase {
            base: 1.0,
            provenance: BoundProvenance::General,
        };
        assert_eq!(bound_length(&[one; 4], 7.5), 7.5);
        let two = BoundBase {
            base: 2.0,
            provenance: BoundProvenance::General,
        };
        assert_eq!(bound_length(&[two; 3], 5.0), 40.0);
        let cor1 = base_gaussian(0.5, 2.0, 784).unwrap();
        assert_relative_eq!(
            bound_length(&[cor1; 3], 1.0),
            1393.8122960284578,
            max_relative = 1e-12
        );
    }

    #[test]
    fn corollaries_equal_general_with_family_m() {
        // A 3x3x3 grid plus assorted widths; relative gap must be ~1 ulp.
        let alphas = [0.1, 0.5, 1.0];
        let scales = [0.5, 2.0, 6.0];
        let ks = [1usize, 10, 784];
        for &alpha in &alphas {
            for &s in &scales {
                for &k in &ks {
                    let g = DistributionSpec::gaussian(s, alpha).unwrap();
                    assert_relative_eq!(
                        base_gaussian(alpha, s, k).unwrap().base,
                        base_general(alpha, g.m_constant(), k).unwrap().base,
                        max_relative = 1e-12
                    );
                    let u = DistributionSpec::uniform(s, alpha).unwrap();
                    assert_relative_eq!(
                        base_uniform(alpha, s, k).unwrap().base,
                        base_general(alpha, u.m_constant(), k).unwrap().base,
                        max_relative = 1e-12
                    );
                    let d = DistributionSpec::discrete(&[-s, 0.0, s], alpha).unwrap();
                    assert_relative_eq!(
                        base_discrete(alpha, &[-s, 0.0, s], k).unwrap().base,
                        base_general(alpha, d.m_constant(), k).unwrap().base,
                        max_relative = 1e-12
                    );
                }
            }
        }
    }

    #[test]
    fn base_for_spec_applies_scaling() {
        let spec = DistributionSpec::gaussian(2.0, 1.0)
            .unwrap()
            .with_inv_sqrt_k_scaling(true);
        let b = base_for_spec(&spec, 784).unwrap();
        assert_relative_eq!(b.base, 2.0 / (2.0 * PI).sqrt(), epsilon = 1e-12);
        let unscaled = DistributionSpec::gaussian(2.0, 1.0).unwrap();
        let b2 = base_for_spec(&unscaled, 784).unwrap();
        assert_relative_eq!(b2.base, 2.0 * 28.0 / (2.0 * PI).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn domain_violations_rejected() {
        assert!(base_general(-0.1, 1.0, 4).is_err());
        assert!(base_general(1.1, 1.0, 4).is_err());
        assert!(base_general(0.5, -1.0, 4).is_err());
        assert!(base_general(0.5, 1.0, 0).is_err());
        assert!(base_gaussian(0.5, 0.0, 4).is_err());
        assert!(base_uniform(0.5, -2.0, 4).is_err());
        assert!(base_discrete(0.5, &[1.0], 4).is_err());
        assert!(base_discrete(0.5, &[], 4).is_err());
        assert!(base_prior_gaussian(0.0, 4).is_err());
    }

    #[test]
    fn zero_base_only_at_zero_alpha_or_zero_m() {
        assert_eq!(base_general(0.0, 3.0, 9).unwrap().base, 0.0);
        assert_eq!(base_general(0.5, 0.0, 9).unwrap().base, 0.0);
        assert!(base_general(0.5, 0.1, 9).unwrap().base > 0.0);
        // The all-zero singleton set has M = 0.
        assert_eq!(base_discrete(1.0, &[0.0], 9).unwrap().base, 0.0);
    }
}

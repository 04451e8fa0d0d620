//! Closed-form scalar Gaussian fusion.
//!
//! A prior belief (the bias-corrected gradient EMA) and an observation (the
//! fresh stochastic gradient) are combined by the product of their Gaussian
//! densities. The fused mean is the minimum-variance interpolation between the
//! two, with weight [`optimal_gain`] on the observation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianBelief {
    pub mean: f64,
    pub variance: f64,
}

impl GaussianBelief {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !(variance >= 0.0) || !variance.is_finite() {
            return Err(Error::InvalidVariance(variance));
        }
        Ok(Self { mean, variance })
    }
}

/// Product-of-Gaussians fusion of `prior` and `obs`.
///
/// The mean is written as `prior.mean + K·(obs.mean − prior.mean)` so it agrees
/// bit-for-bit with the gain form used by the optimizers.
pub fn fuse(prior: GaussianBelief, obs: GaussianBelief) -> Result<GaussianBelief> {
    let (vm, vg) = (prior.variance, obs.variance);
    if vm == 0.0 && vg == 0.0 {
        if prior.mean == obs.mean {
            return Ok(prior);
        }
        return Err(Error::DegenerateFusion {
            prior_mean: prior.mean,
            obs_mean: obs.mean,
        });
    }
    let gain = optimal_gain(vm, vg)?;
    let mean = prior.mean + gain * (obs.mean - prior.mean);
    // min·(max/(vm+vg)) avoids the cancellation in (1 − K)·vm when K ≈ 1.
    let (lo, hi) = if vm <= vg { (vm, vg) } else { (vg, vm) };
    let variance = lo * (hi / (hi + lo));
    Ok(GaussianBelief { mean, variance: variance.min(lo) })
}

/// Minimum mean-squared-error interpolation weight `var_m / (var_m + var_g)`.
pub fn optimal_gain(var_m: f64, var_g: f64) -> Result<f64> {
    for v in [var_m, var_g] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::InvalidVariance(v));
        }
    }
    let total = var_m + var_g;
    if total == 0.0 {
        return Err(Error::DegenerateFusion {
            prior_mean: f64::NAN,
            obs_mean: f64::NAN,
        });
    }
    Ok((var_m / total).clamp(0.0, 1.0))
}

/// `Var(m_t) / σ_g²` for an EMA with decay `beta1` over `t` i.i.d. inputs:
/// `(1 − β1)(1 − β1^{2t}) / (1 + β1)`.
pub fn momentum_variance_factor(beta1: f64, t: u64) -> Result<f64> {
    if !(0.0..1.0).contains(&beta1) {
        return Err(Error::InvalidBeta(beta1));
    }
    if t == 0 {
        return Err(Error::InvalidStepCount);
    }
    let exponent = i32::try_from(t.saturating_mul(2)).unwrap_or(i32::MAX);
    let decay = beta1.powi(exponent);
    Ok(variance_factor_from_power(beta1, decay))
}

/// Same factor given a precomputed `β1^{2t}`.
pub(crate) fn variance_factor_from_power(beta1: f64, beta1_pow_2t: f64) -> f64 {
    (1.0 - beta1) * (1.0 - beta1_pow_2t) / (1.0 + beta1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn b(mean: f64, variance: f64) -> GaussianBelief {
        GaussianBelief::new(mean, variance).unwrap()
    }

    #[test]
    fn equal_variances_give_midpoint() {
        assert_eq!(fuse(b(0.0, 1.0), b(2.0, 1.0)).unwrap(), b(1.0, 0.5));
    }

    #[test]
    fn unequal_variances() {
        let f = fuse(b(1.0, 1.0), b(3.0, 3.0)).unwrap();
        assert_relative_eq!(f.mean, 1.5, max_relative = 1e-15);
        assert_relative_eq!(f.variance, 0.75, max_relative = 1e-15);
    }

    #[test]
    fn certain_prior_dominates() {
        assert_eq!(fuse(b(5.0, 0.0), b(7.0, 3.0)).unwrap(), b(5.0, 0.0));
    }

    #[test]
    fn contradictory_certainty_is_an_error() {
        assert!(matches!(
            fuse(b(1.0, 0.0), b(2.0, 0.0)),
            Err(Error::DegenerateFusion { .. })
        ));
        assert_eq!(fuse(b(2.0, 0.0), b(2.0, 0.0)).unwrap(), b(2.0, 0.0));
    }

    #[test]
    fn gain_examples() {
        assert_eq!(optimal_gain(1.0, 1.0).unwrap(), 0.5);
        assert_eq!(optimal_gain(0.0, 3.0).unwrap(), 0.0);
        assert_eq!(optimal_gain(0.0081, 0.0).unwrap(), 1.0);
        assert!(matches!(optimal_gain(0.0, 0.0), Err(Error::DegenerateFusion { .. })));
        assert!(matches!(optimal_gain(-1.0, 1.0), Err(Error::InvalidVariance(_))));
    }

    #[test]
    fn variance_factor_examples() {
        assert_relative_eq!(momentum_variance_factor(0.9, 1).unwrap(), 0.01, max_relative = 1e-13);
        assert_relative_eq!(
            momentum_variance_factor(0.9, 10_000).unwrap(),
            1.0 / 19.0,
            max_relative = 1e-13
        );
        for t in [1, 2, 50, 1_000_000] {
            assert_eq!(momentum_variance_factor(0.0, t).unwrap(), 1.0);
        }
        assert_eq!(momentum_variance_factor(1.0, 1), Err(Error::InvalidBeta(1.0)));
        assert_eq!(momentum_variance_factor(-0.1, 1), Err(Error::InvalidBeta(-0.1)));
        assert_eq!(momentum_variance_factor(0.5, 0), Err(Error::InvalidStepCount));
    }

    #[test]
    fn variance_factor_matches_geometric_sum() {
        // (1-β)² Σ_{i<t} β^{2i}, summed term by term.
        for beta in [0.3f64, 0.9, 0.99] {
            for t in [1u64, 2, 5, 40, 300] {
                let direct: f64 = (0..t).map(|i| beta.powi(2 * i as i32)).sum::<f64>()
                    * (1.0 - beta).powi(2);
                assert_relative_eq!(
                    momentum_variance_factor(beta, t).unwrap(),
                    direct,
                    max_relative = 1e-12
                );
            }
        }
    }

    proptest! {
        #[test]
        fn fused_variance_below_both(vm in 1e-8..1e4f64, vg in 1e-8..1e4f64,
                                     mm in -1e3..1e3f64, mg in -1e3..1e3f64) {
            let f = fuse(b(mm, vm), b(mg, vg)).unwrap();
            prop_assert!(f.variance < vm.min(vg));
            let exact = vm * vg / (vm + vg);
            prop_assert!((f.variance - exact).abs() <= 1e-12 * exact);
        }

        #[test]
        fn fusion_mean_equals_gain_form(vm in 0.0..1e4f64, vg in 0.0..1e4f64,
                                        mm in -1e3..1e3f64, mg in -1e3..1e3f64) {
            prop_assume!(vm + vg > 0.0);
            let f = fuse(b(mm, vm), b(mg, vg)).unwrap();
            let k = optimal_gain(vm, vg).unwrap();
            prop_assert_eq!(f.mean, mm + k * (mg - mm));
            prop_assert!((0.0..=1.0).contains(&k));
        }
    }
}

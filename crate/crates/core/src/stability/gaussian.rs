use ordered_float::OrderedFloat;
use serde::{Deserialize, Serialize};

use crate::info::{FiniteDistribution, Nats};
use crate::kernel::{AlgorithmKernel, Selector, Supersample, SELECTOR_CAP_LOG2};
use crate::{Error, Result};

/// The variance surrogate for a Gaussian-perturbed loss release and its
/// uniform-stability cap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianSurrogate {
    /// `(1/2σ²) Σ_{i,j} Var_S[ℓ(A(z̃_S), z̃_{i,j})]` over uniform `S`.
    pub computed: Nats,
    /// `γ²n²/2σ²`.
    pub cap: Nats,
}

/// Evaluates the surrogate that bounds the evaluated CMI of releasing the
/// `2n` supersample losses with `N(0, σ²)` noise, for a deterministic
/// algorithm whose loss is `γ`-uniformly stable.
///
/// Efron–Stein gives `Var_S ≤ nγ²/2` for each coordinate, so `computed ≤
/// cap` whenever `γ` is a valid stability constant.
pub fn ecmi_gaussian_bound<Z, K, L>(kernel: &K, loss: L, gamma: f64, z: &Supersample<Z>, sigma: f64) -> Result<GaussianSurrogate>
where
    Z: Clone,
    K: AlgorithmKernel<Z>,
    L: Fn(&K::Output, &Z) -> f64,
{
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
    }
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::invalid(format!("stability constant {gamma} is not finite and nonnegative")));
    }
    let n = z.n();
    if n > SELECTOR_CAP_LOG2 {
        return Err(Error::TooLargeForExact { what: "selector enumeration", size: 2f64.powi(n as i32), cap: 2f64.powi(SELECTOR_CAP_LOG2 as i32) });
    }
    let points: Vec<&Z> = z.points().collect();
    let mut sum = vec![0.0; points.len()];
    let mut sum_sq = vec![0.0; points.len()];
    let count = 1u64 << n;
    for s in Selector::all(n) {
        let law = kernel.evaluate(&z.select(&s)?)?;
        let w = law
            .as_point()
            .ok_or_else(|| Error::NotDeterministic(format!("output law on selector {} has {} atoms", s.index(), law.len())))?;
        for (k, p) in points.iter().enumerate() {
            let v = loss(w, p);
            sum[k] += v;
            sum_sq[k] += v * v;
        }
    }
    let total_variance: f64 = sum
        .iter()
        .zip(&sum_sq)
        .map(|(s, q)| {
            let mean = s / count as f64;
            (q / count as f64 - mean * mean).max(0.0)
        })
        .sum();
    let scale = 2.0 * sigma * sigma;
    Ok(GaussianSurrogate {
        computed: Nats(total_variance / scale),
        cap: Nats(gamma * gamma * (n * n) as f64 / scale),
    })
}

/// The empirical mean of real-valued data.
#[derive(Clone, Copy, Debug, Default)]
pub struct MeanEstimator;

impl AlgorithmKernel<f64> for MeanEstimator {
    type Output = OrderedFloat<f64>;
    fn evaluate(&self, data: &[f64]) -> Result<FiniteDistribution<OrderedFloat<f64>>> {
        if data.is_empty() {
            return Err(Error::invalid("mean of an empty dataset"));
        }
        Ok(FiniteDistribution::point(OrderedFloat(data.iter().sum::<f64>() / data.len() as f64)))
    }
}

/// `min((w − z)², clip)`.
pub fn clipped_squared_loss(clip: f64) -> impl Fn(&OrderedFloat<f64>, &f64) -> f64 + Copy {
    move |w, z| (w.0 - z).powi(2).min(clip)
}

/// Uniform stability of [`MeanEstimator`] under [`clipped_squared_loss`] on
/// data in an interval of width `range`.
///
/// Replacing one of `n` points moves the mean by at most `range/n`, which
/// changes `(w − z)²` by at most `2·range²/n`; clipping is 1-Lipschitz and
/// keeps every loss in `[0, clip]`.
pub fn mean_estimator_stability(n: usize, range: f64, clip: f64) -> f64 {
    (2.0 * range * range / n as f64).min(clip)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{ConstantKernel, TableKernel};

    fn grid_supersample(n: usize) -> Supersample<f64> {
        Supersample::new((0..n).map(|i| [i as f64 / (2 * n) as f64, (2 * n - 1 - i) as f64 / (2 * n) as f64]).collect()).unwrap()
    }

    #[test]
    fn constant_algorithm_has_zero_surrogate() {
        let z = grid_supersample(4);
        let s = ecmi_gaussian_bound(&ConstantKernel(OrderedFloat(0.5)), clipped_squared_loss(1.0), 0.0, &z, 1.0).unwrap();
        assert_eq!(s.computed.0, 0.0);
    }

    #[test]
    fn scaling_in_sigma() {
        let z = grid_supersample(5);
        let gamma = mean_estimator_stability(5, 1.0, 1.0);
        let a = ecmi_gaussian_bound(&MeanEstimator, clipped_squared_loss(1.0), gamma, &z, 0.5).unwrap();
        let b = ecmi_gaussian_bound(&MeanEstimator, clipped_squared_loss(1.0), gamma, &z, 1.0).unwrap();
        assert!((a.computed.0 / 4.0 - b.computed.0).abs() < 1e-15);
        assert!((a.cap.0 / 4.0 - b.cap.0).abs() < 1e-15);
    }

    #[test]
    fn toy_estimator_stays_under_cap() {
        for n in 1..=8 {
            for clip in [0.05, 0.25, 1.0] {
                let z = grid_supersample(n);
                let gamma = mean_estimator_stability(n, 1.0, clip);
                let s = ecmi_gaussian_bound(&MeanEstimator, clipped_squared_loss(clip), gamma, &z, 1.0).unwrap();
                assert!(s.computed.0 > 0.0);
                assert!(s.computed.0 <= s.cap.0 + 1e-9, "n={n} clip={clip}: {s:?}");
            }
        }
    }

    #[test]
    fn stochastic_kernels_are_rejected() {
        let z = Supersample::new(vec![[1u8, 2], [3, 4]]).unwrap();
        let err = ecmi_gaussian_bound(&TableKernel::new(3, 1), |w: &u32, _: &u8| *w as f64, 1.0, &z, 1.0);
        assert!(matches!(err, Err(Error::NotDeterministic(_))));
        let det = ecmi_gaussian_bound(&TableKernel::deterministic(3, 1), |w: &u32, _: &u8| *w as f64, 1.0, &z, 1.0);
        assert!(det.is_ok());
        assert!(ecmi_gaussian_bound(&TableKernel::deterministic(3, 1), |w: &u32, _: &u8| *w as f64, 1.0, &z, 0.0).is_err());
    }
}

use std::fmt::Debug;

use crate::info::FiniteDistribution;
use crate::kernel::AlgorithmKernel;
use crate::{Error, Result};

/// A sample compression scheme of size `k`: the chooser keeps `k` of the
/// training points and the output depends only on those.
#[derive(Clone, Debug)]
pub struct CompressionScheme<C, E> {
    pub k: usize,
    pub chooser: C,
    pub encoder: E,
}

/// Wraps a chooser `Z^n → [n]^k` and an encoder `Z^k → W` into a kernel.
///
/// ```
/// use cmi_lab::kernel::{cmi_exact_fixed, Supersample};
/// use cmi_lab::learners::compression_wrap;
///
/// // Keep the largest point and output it.
/// let largest = compression_wrap(
///     1,
///     |d: &[u32]| vec![(0..d.len()).max_by_key(|&i| d[i]).unwrap()],
///     |kept: &[u32]| kept[0],
/// );
/// let z = Supersample::new(vec![[0, 1], [2, 3], [4, 5]]).unwrap();
/// let cmi = cmi_exact_fixed(&z, &largest).unwrap();
/// assert!(cmi.value.0 <= (6f64).ln());
/// ```
pub fn compression_wrap<C, E>(k: usize, chooser: C, encoder: E) -> CompressionScheme<C, E> {
    CompressionScheme { k, chooser, encoder }
}

impl<C, E> CompressionScheme<C, E> {
    /// The points kept from `data`, in the chooser's order.
    pub fn compress<Z: Clone>(&self, data: &[Z]) -> Result<Vec<Z>>
    where
        C: Fn(&[Z]) -> Vec<usize>,
    {
        let chosen = (self.chooser)(data);
        if chosen.len() != self.k {
            return Err(Error::invalid(format!("chooser returned {} indices, expected {}", chosen.len(), self.k)));
        }
        chosen
            .into_iter()
            .map(|i| {
                data.get(i).cloned().ok_or_else(|| {
                    Error::invalid(format!("chooser index {i} is out of range for {} points", data.len()))
                })
            })
            .collect()
    }
}

impl<Z, W, C, E> AlgorithmKernel<Z> for CompressionScheme<C, E>
where
    Z: Clone,
    W: Ord + Clone + Send + Sync + Debug,
    C: Fn(&[Z]) -> Vec<usize> + Sync,
    E: Fn(&[Z]) -> W + Sync,
{
    type Output = W;
    fn evaluate(&self, data: &[Z]) -> Result<FiniteDistribution<W>> {
        Ok(FiniteDistribution::point((self.encoder)(&self.compress(data)?)))
    }
}

/// The compression CMI bound `k·log(2n)`.
pub fn compression_cmi_bound(k: usize, n: usize) -> f64 {
    k as f64 * (2.0 * n as f64).ln()
}

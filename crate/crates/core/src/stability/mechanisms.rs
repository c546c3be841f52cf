use std::fmt::Debug;

use serde::{Deserialize, Serialize};

use super::{Certified, DpParams, Notion, StabilityCertificate, TvParams};
use crate::info::{jsd_tv, kl, FiniteDistribution, Nats};
use crate::kernel::{capacity_bracket, AlgorithmKernel, CapacityOptions, Supersample};
use crate::{Error, Result};

/// Largest dataset randomized response will tabulate (`2^20` outputs).
pub const MAX_RESPONSE_BITS: usize = 20;

/// Releases each input bit independently, flipped with probability `p`.
/// The output is the released bits packed into a word, bit `i` for point
/// `i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomizedResponse {
    pub params: DpParams,
    pub n: usize,
}

/// Randomized response on `n` bits, which is `ln((1−p)/p)`-DP.
pub fn randomized_response(p: f64, n: usize) -> Result<RandomizedResponse> {
    if n > MAX_RESPONSE_BITS {
        return Err(Error::invalid(format!("randomized response is tabulated for at most {MAX_RESPONSE_BITS} bits")));
    }
    Ok(RandomizedResponse { params: DpParams::from_flip_prob(p)?, n })
}

impl AlgorithmKernel<bool> for RandomizedResponse {
    type Output = u64;
    fn evaluate(&self, data: &[bool]) -> Result<FiniteDistribution<u64>> {
        Error::check_len(self.n, data.len())?;
        let p = self.params.flip_prob;
        let input: u64 = data.iter().enumerate().map(|(i, &b)| u64::from(b) << i).sum();
        let weight: Vec<f64> = (0..=self.n).map(|flips| p.powi(flips as i32) * (1.0 - p).powi((self.n - flips) as i32)).collect();
        let atoms = (0..1u64 << self.n).map(|out| (out, weight[(out ^ input).count_ones() as usize]));
        FiniteDistribution::new(atoms)
    }
}

impl Certified for RandomizedResponse {
    fn certificate(&self) -> StabilityCertificate {
        StabilityCertificate::new(Notion::Dp, self.params.epsilon, self.n).expect("epsilon is finite")
    }
}

/// Output of the TV lottery: a fixed symbol or the whole dataset.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LotteryOutput<Z> {
    Bottom,
    Reveal(Vec<Z>),
}

/// With probability `1 − δ` outputs ⊥, otherwise the dataset itself.
/// Neighbouring datasets get output laws exactly `δ` apart in total
/// variation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TvLottery {
    pub params: TvParams,
    pub n: usize,
}

pub fn tv_lottery(delta: f64, n: usize) -> Result<TvLottery> {
    Ok(TvLottery { params: TvParams::new(delta)?, n })
}

impl<Z: Ord + Clone + Send + Sync + Debug> AlgorithmKernel<Z> for TvLottery {
    type Output = LotteryOutput<Z>;
    fn evaluate(&self, data: &[Z]) -> Result<FiniteDistribution<LotteryOutput<Z>>> {
        Error::check_len(self.n, data.len())?;
        let delta = self.params.delta;
        let atoms = [(LotteryOutput::Bottom, 1.0 - delta), (LotteryOutput::Reveal(data.to_vec()), delta)];
        FiniteDistribution::new(atoms.into_iter().filter(|(_, m)| *m > 0.0))
    }
}

impl Certified for TvLottery {
    fn certificate(&self) -> StabilityCertificate {
        StabilityCertificate::new(Notion::Tv, self.params.delta, self.n).expect("delta is in [0, 1]")
    }
}

/// Largest divergence between output laws on neighbouring datasets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeighbourDivergence {
    pub tv: f64,
    pub kl: Nats,
}

/// Maximum total variation and KL divergence between the output laws on
/// every pair of datasets in `domain^n` that differ in one position.
pub fn max_neighbour_divergence<Z, K>(kernel: &K, domain: &[Z], n: usize) -> Result<NeighbourDivergence>
where
    Z: Clone,
    K: AlgorithmKernel<Z>,
{
    if domain.is_empty() {
        return Err(Error::invalid("domain is empty"));
    }
    let size = (domain.len() as f64).powi(n as i32);
    if size > 1e6 {
        return Err(Error::TooLargeForExact { what: "neighbouring-dataset enumeration", size, cap: 1e6 });
    }
    let mut worst = NeighbourDivergence { tv: 0.0, kl: Nats::ZERO };
    let mut digits = vec![0usize; n];
    loop {
        let data: Vec<Z> = digits.iter().map(|&d| domain[d].clone()).collect();
        let law = kernel.evaluate(&data)?;
        for i in 0..n {
            for alt in (0..domain.len()).filter(|&a| a != digits[i]) {
                let mut other = data.clone();
                other[i] = domain[alt].clone();
                let other_law = kernel.evaluate(&other)?;
                worst.tv = worst.tv.max(jsd_tv(&law, &other_law).1);
                let d = kl(&law, &other_law);
                if d.0 > worst.kl.0 {
                    worst.kl = d;
                }
            }
        }
        let Some(pos) = digits.iter().position(|&d| d + 1 < domain.len()) else {
            break;
        };
        digits[pos] += 1;
        digits[..pos].fill(0);
    }
    Ok(worst)
}

/// Universal CMI of a DP kernel on one supersample against the `εn` bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UcmiCheck {
    /// Achieved lower end of the Blahut–Arimoto bracket.
    pub ucmi: Nats,
    /// Upper end of the bracket.
    pub ucmi_upper: Nats,
    pub bound: Nats,
    pub satisfied: bool,
}

/// Slack allowed between the universal CMI and `εn`.
pub const UCMI_CHECK_SLACK: f64 = 1e-6;

/// Checks `uCMI(z̃) ≤ εn + 1e-6` on each candidate supersample for a kernel
/// certified `ε`-DP. Kernels without a DP certificate are rejected.
pub fn ucmi_dp_check<Z, K>(
    kernel: &K,
    certificate: Option<&StabilityCertificate>,
    candidates: &[Supersample<Z>],
    opts: CapacityOptions,
) -> Result<Vec<UcmiCheck>>
where
    Z: Clone + Sync,
    K: AlgorithmKernel<Z>,
{
    let certificate =
        certificate.ok_or_else(|| Error::MissingCertificate("universal CMI check needs an epsilon-DP certificate".into()))?;
    candidates
        .iter()
        .map(|z| {
            let bound = certificate.ucmi_bound(z.n())?;
            let cap = capacity_bracket(z, kernel, opts)?;
            Ok(UcmiCheck {
                ucmi: Nats(cap.lower),
                ucmi_upper: Nats(cap.upper),
                bound,
                satisfied: cap.lower <= bound.0 + UCMI_CHECK_SLACK,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{cmi_exact_fixed, ucmi_fixed};

    const LN2: f64 = std::f64::consts::LN_2;

    fn bits(n: usize) -> Supersample<bool> {
        Supersample::new(vec![[false, true]; n]).unwrap()
    }

    fn bsc_information(p: f64) -> f64 {
        let h = if p == 0.5 { LN2 } else { -(p * p.ln() + (1.0 - p) * (1.0 - p).ln()) };
        LN2 - h
    }

    #[test]
    fn randomized_response_examples() {
        let rr = randomized_response(0.5, 6).unwrap();
        assert!(cmi_exact_fixed(&bits(6), &rr).unwrap().value.0.abs() < 1e-12);
        let rr = randomized_response(0.25, 10).unwrap();
        let cmi = cmi_exact_fixed(&bits(10), &rr).unwrap().value.0;
        assert!((cmi - 10.0 * 0.130812).abs() < 1e-5);
        assert!((cmi - 10.0 * bsc_information(0.25)).abs() < 1e-10);
        assert!(cmi <= rr.certificate().implied_cmi_bound.0);
        assert!(randomized_response(0.7, 3).is_err());
        assert!(rr.evaluate(&[true]).is_err());
    }

    #[test]
    fn randomized_response_is_kl_and_tv_stable() {
        let rr = randomized_response(0.25, 1).unwrap();
        let worst = max_neighbour_divergence(&rr, &[false, true], 1).unwrap();
        assert!((worst.kl.0 - 0.549306).abs() < 1e-6);
        assert!((worst.tv - 0.5).abs() < 1e-12);
        let cert = StabilityCertificate::new(Notion::Kl, worst.kl.0, 1).unwrap();
        assert!(cmi_exact_fixed(&bits(1), &rr).unwrap().value.0 <= cert.implied_cmi_bound.0);
        let rr3 = randomized_response(0.25, 3).unwrap();
        let worst3 = max_neighbour_divergence(&rr3, &[false, true], 3).unwrap();
        assert!((worst3.kl.0 - worst.kl.0).abs() < 1e-12);
    }

    #[test]
    fn lottery_examples() {
        let z = Supersample::new((0..5).map(|i| [2 * i, 2 * i + 1]).collect()).unwrap();
        assert_eq!(cmi_exact_fixed(&z, &tv_lottery(0.0, 5).unwrap()).unwrap().value.0, 0.0);
        let all = cmi_exact_fixed(&z, &tv_lottery(1.0, 5).unwrap()).unwrap().value.0;
        assert!((all - 5.0 * LN2).abs() < 1e-12);
        let lottery = tv_lottery(0.1, 5).unwrap();
        let tenth = cmi_exact_fixed(&z, &lottery).unwrap().value.0;
        assert!((tenth - 0.5 * LN2).abs() < 1e-12);
        assert!(tenth <= lottery.certificate().implied_cmi_bound.0);
        assert!(tv_lottery(1.1, 5).is_err());
    }

    #[test]
    fn lottery_neighbour_tv_is_delta() {
        for delta in [0.0, 0.1, 0.35, 1.0] {
            let worst = max_neighbour_divergence(&tv_lottery(delta, 3).unwrap(), &[0u8, 1, 2], 3).unwrap();
            assert!((worst.tv - delta).abs() < 1e-12);
        }
    }

    #[test]
    fn ucmi_dp_examples() {
        let opts = CapacityOptions::default();
        let rr = randomized_response(0.5, 3).unwrap();
        let checks = ucmi_dp_check(&rr, Some(&rr.certificate()), &[bits(3)], opts).unwrap();
        assert!(checks[0].ucmi.0.abs() < 1e-12);
        let rr = randomized_response(0.25, 4).unwrap();
        let checks = ucmi_dp_check(&rr, Some(&rr.certificate()), &[bits(4)], opts).unwrap();
        assert!((checks[0].ucmi.0 - 4.0 * bsc_information(0.25)).abs() < 1e-9);
        assert!((checks[0].bound.0 - 4.394449).abs() < 1e-6);
        assert!(checks[0].satisfied);
        let rr = randomized_response(0.4, 3).unwrap();
        let u = ucmi_fixed(&bits(3), &rr, 1e-9, 100_000).unwrap().value.0;
        assert!(u <= 3.0 * 1.5f64.ln());
        assert!(matches!(ucmi_dp_check(&rr, None, &[bits(3)], opts), Err(Error::MissingCertificate(_))));
        let lottery = tv_lottery(0.5, 3).unwrap();
        let err = ucmi_dp_check(&lottery, Some(&lottery.certificate()), &[bits(3)], opts);
        assert!(matches!(err, Err(Error::MissingCertificate(_))));
    }
}

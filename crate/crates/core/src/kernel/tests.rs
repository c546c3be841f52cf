use proptest::prelude::*;

use super::*;
use crate::info::{entropy, mutual_information, FiniteDistribution, JointPmf};
use crate::Result;

const LN2: f64 = std::f64::consts::LN_2;

/// Each input bit is released independently, flipped with probability `p`.
struct BitFlip(f64);

impl AlgorithmKernel<bool> for BitFlip {
    type Output = Vec<bool>;
    fn evaluate(&self, data: &[bool]) -> Result<FiniteDistribution<Vec<bool>>> {
        let mut law = FiniteDistribution::point(Vec::new());
        for &b in data {
            let bit = FiniteDistribution::new([(b, 1.0 - self.0), (!b, self.0)])?;
            law = law.product(&bit).map(|(v, b)| {
                let mut v = v.clone();
                v.push(*b);
                v
            });
        }
        Ok(law)
    }
}

fn bits(n: usize) -> Supersample<bool> {
    Supersample::new(vec![[false, true]; n]).unwrap()
}

/// Reference value through the generic joint-table route.
fn joint_route<Z: Clone + Sync, K: AlgorithmKernel<Z>>(z: &Supersample<Z>, k: &K) -> f64 {
    let selectors = FiniteDistribution::uniform(Selector::all(z.n())).unwrap();
    let joint = JointPmf::from_channel(&selectors, |s| k.evaluate(&z.select(s).unwrap()).unwrap()).unwrap();
    mutual_information(&joint).0
}

fn binary_entropy(p: f64) -> f64 {
    -(p * p.ln() + (1.0 - p) * (1.0 - p).ln())
}

#[test]
fn fixed_cmi_examples() {
    let z = bits(4);
    assert_eq!(cmi_exact_fixed(&z, &ConstantKernel(0u8)).unwrap().value.0, 0.0);
    let reveal = cmi_exact_fixed(&z, &RevealKernel).unwrap();
    assert!((reveal.value.0 - 4.0 * LN2).abs() < 1e-12);
    assert_eq!(reveal.ci_halfwidth, 0.0);
    let rr = cmi_exact_fixed(&bits(1), &BitFlip(0.25)).unwrap().value.0;
    assert!((rr - 0.130812035).abs() < 1e-9);
    assert!((rr - (LN2 - binary_entropy(0.25))).abs() < 1e-12);
}

#[test]
fn selector_cap_is_enforced() {
    let z = Supersample::new(vec![[0u8, 1]; 21]).unwrap();
    let err = cmi_exact_fixed(&z, &ConstantKernel(0u8)).unwrap_err();
    assert!(matches!(err, crate::Error::TooLargeForExact { .. }));
}

#[test]
fn capacity_examples() {
    let z = bits(3);
    assert_eq!(ucmi_fixed(&z, &ConstantKernel(1u8), 1e-9, 1000).unwrap().value.0, 0.0);
    let reveal = ucmi_fixed(&z, &RevealKernel, 1e-9, 1000).unwrap().value.0;
    assert!((reveal - 3.0 * LN2).abs() < 1e-9);
    let rr = ucmi_fixed(&bits(1), &BitFlip(0.25), 1e-9, 1000).unwrap().value.0;
    assert!((rr - (LN2 - binary_entropy(0.25))).abs() < 1e-9);
}

#[test]
fn capacity_of_asymmetric_channel_matches_closed_form() {
    // Z-channel: input 0 always yields 0, input 1 yields 1 w.p. 1/2.
    // Its capacity is ln(1 + (1/2)(1/2)^1) = ln(5/4).
    let z = Supersample::new(vec![[false, true]]).unwrap();
    let k = Deterministic(|d: &[bool]| d[0]);
    let zc = postprocess(k, StochasticMap::new([(false, vec![(0u8, 1.0)]), (true, vec![(0, 0.5), (1, 0.5)])]).unwrap());
    let cap = channel_capacity(&z, &zc, CapacityOptions::default()).unwrap();
    assert!((cap.value - (1.25f64).ln()).abs() < 1e-9);
    assert!(cap.lower_history.windows(2).all(|w| w[1] >= w[0] - 1e-15));
    assert!(cap.lower <= cap.upper);
}

#[test]
fn capacity_reports_bracket_when_out_of_iterations() {
    let z = Supersample::new(vec![[false, true]]).unwrap();
    let zc = postprocess(
        Deterministic(|d: &[bool]| d[0]),
        StochasticMap::new([(false, vec![(0u8, 1.0)]), (true, vec![(0, 0.5), (1, 0.5)])]).unwrap(),
    );
    match channel_capacity(&z, &zc, CapacityOptions { tol: 1e-12, max_iters: 2 }) {
        Err(crate::Error::NotConverged { lower, upper, iterations }) => {
            assert_eq!(iterations, 2);
            assert!(lower <= 1.25f64.ln() && 1.25f64.ln() <= upper);
        }
        other => panic!("expected non-convergence, got {other:?}"),
    }
}

#[test]
fn ecmi_examples() {
    let z = Supersample::new(vec![[0.1, 0.7], [0.4, 0.9], [0.2, 0.5]]).unwrap();
    let mean = Deterministic(|d: &[f64]| ordered_float::OrderedFloat(d.iter().sum::<f64>()));
    let constant = ecmi_fixed(&z, &mean, |_, _| 1.0).unwrap().value.0;
    assert_eq!(constant, 0.0);
    let cmi = cmi_exact_fixed(&z, &mean).unwrap().value.0;
    let injective = ecmi_fixed(&z, &mean, |w, x| w.0 - x).unwrap().value.0;
    assert!((cmi - injective).abs() < 1e-12);
}

#[test]
fn composition_with_reveal_is_tight() {
    let z = bits(3);
    let k = compose_pair(ConstantKernel(0u8), RevealKernel);
    let v = cmi_exact_fixed(&z, &k).unwrap().value.0;
    assert!((v - 3.0 * LN2).abs() < 1e-12);
    let both = compose_pair(ConstantKernel(0u8), ConstantKernel(1u8));
    assert_eq!(cmi_exact_fixed(&z, &both).unwrap().value.0, 0.0);
}

#[test]
fn rr_pair_is_subadditive() {
    let z = bits(3);
    let a = cmi_exact_fixed(&z, &BitFlip(0.2)).unwrap().value.0;
    let b = cmi_exact_fixed(&z, &BitFlip(0.35)).unwrap().value.0;
    let ab = cmi_exact_fixed(&z, &compose_pair(BitFlip(0.2), BitFlip(0.35))).unwrap().value.0;
    assert!(ab <= a + b + 1e-9);
    assert!(ab > a.max(b));
}

#[test]
fn postprocess_examples() {
    let z = bits(2);
    let reveal = cmi_exact_fixed(&z, &RevealKernel).unwrap().value.0;
    let outputs: Vec<Vec<bool>> = Selector::all(2).map(|s| s.bits().to_vec()).collect();
    let collapse = StochasticMap::deterministic(outputs.clone(), |_| 0u8);
    assert_eq!(cmi_exact_fixed(&z, &postprocess(RevealKernel, collapse)).unwrap().value.0, 0.0);
    let permute = StochasticMap::deterministic(outputs.clone(), |v| v.iter().map(|b| !b).collect::<Vec<_>>());
    let permuted = cmi_exact_fixed(&z, &postprocess(RevealKernel, permute)).unwrap().value.0;
    assert!((permuted - reveal).abs() < 1e-10);
    let merge = StochasticMap::deterministic(outputs, |v| v[0]);
    let merged = cmi_exact_fixed(&z, &postprocess(RevealKernel, merge)).unwrap().value.0;
    assert!(merged < reveal - 0.1);
}

#[test]
fn distributional_exact_and_mc() {
    let law = FiniteDistribution::new([(0u8, 0.5), (1, 0.3), (2, 0.2)]).unwrap();
    let sampler = IidSampler { law, n: 2 };
    let zero = cmi_distributional(&ConstantKernel(0u8), &sampler, &CmiMode::Exact).unwrap();
    assert_eq!(zero.value.0, 0.0);

    let exact = cmi_distributional(&RevealKernel, &sampler, &CmiMode::Exact).unwrap();
    // Reference: E over supersamples of the entropy of the revealed dataset.
    let mut reference = 0.0;
    let atoms: Vec<(u8, f64)> = sampler.law.iter().map(|(l, m)| (*l, m)).collect();
    for &(a, pa) in &atoms {
        for &(b, pb) in &atoms {
            for &(c, pc) in &atoms {
                for &(d, pd) in &atoms {
                    let z = Supersample::new(vec![[a, b], [c, d]]).unwrap();
                    let outputs = FiniteDistribution::from_weights(
                        Selector::all(2).map(|s| (z.select(&s).unwrap(), 0.25)),
                    )
                    .unwrap();
                    reference += pa * pb * pc * pd * entropy(&outputs).0;
                }
            }
        }
    }
    assert!((exact.value.0 - reference).abs() < 1e-12);

    let mc = cmi_distributional(&RevealKernel, &sampler, &CmiMode::MonteCarlo(MonteCarlo::new(4000, 5))).unwrap();
    assert_eq!(mc.method, Method::MonteCarlo);
    assert!((mc.value.0 - reference).abs() < 4.0 * mc.ci_halfwidth);
    let few = cmi_distributional(&RevealKernel, &sampler, &CmiMode::MonteCarlo(MonteCarlo::new(9, 5)));
    assert!(few.is_err());
}

#[test]
fn exact_distributional_refuses_large_enumerations() {
    let law = FiniteDistribution::uniform(0u8..16).unwrap();
    let sampler = IidSampler { law, n: 5 };
    let err = cmi_distributional(&RevealKernel, &sampler, &CmiMode::Exact).unwrap_err();
    assert!(matches!(err, crate::Error::TooLargeForExact { .. }));
}

#[test]
fn distribution_free_is_a_flagged_max() {
    let cands: Vec<Supersample<u8>> = vec![
        Supersample::new(vec![[0, 0], [1, 1]]).unwrap(),
        Supersample::new(vec![[0, 1], [1, 1]]).unwrap(),
    ];
    let one = cmi_distribution_free(&RevealKernel, &cands[..1]).unwrap();
    let both = cmi_distribution_free(&RevealKernel, &cands).unwrap();
    assert!(both.lower_bound);
    assert_eq!(one.value.0, 0.0);
    assert!((both.value.0 - LN2).abs() < 1e-12);
    assert!(cmi_distribution_free(&RevealKernel, &cands[..0]).is_err());
}

#[test]
fn estimate_json_shape() {
    let e = CmiEstimate::exact(0.5);
    let json = serde_json::to_value(&e).unwrap();
    assert_eq!(json, serde_json::json!({"value_nats": 0.5, "method": "exact", "ci": 0.0, "trials": 1, "seed": null}));
}

#[test]
fn thread_count_does_not_change_results() {
    let z = Supersample::new((0..10u8).map(|i| [2 * i, 2 * i + 1]).collect()).unwrap();
    let k = TableKernel::new(6, 11);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| cmi_exact_fixed(&z, &k).unwrap().value.0)
    };
    assert_eq!(run(1).to_bits(), run(4).to_bits());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn engine_agrees_with_joint_table_route(n in 1usize..6, outputs in 1u32..6, seed in any::<u64>()) {
        let z = Supersample::new((0..n as u8).map(|i| [2 * i, 2 * i + 1]).collect()).unwrap();
        let k = TableKernel::new(outputs, seed);
        let fast = cmi_exact_fixed(&z, &k).unwrap().value.0;
        let slow = joint_route(&z, &k);
        prop_assert!((fast - slow).abs() < 1e-10);
        prop_assert!(fast <= (n as f64) * LN2 + 1e-9);
        prop_assert!(fast <= (outputs as f64).ln() + 1e-10);
    }

    #[test]
    fn capacity_dominates_uniform_information(n in 1usize..5, outputs in 2u32..5, seed in any::<u64>()) {
        let z = Supersample::new((0..n as u8).map(|i| [2 * i, 2 * i + 1]).collect()).unwrap();
        let k = TableKernel::new(outputs, seed);
        let cmi = cmi_exact_fixed(&z, &k).unwrap().value.0;
        let cap = capacity_bracket(&z, &k, CapacityOptions { tol: 1e-9, max_iters: 20_000 }).unwrap();
        prop_assert!(cap.lower >= cmi - 1e-12);
        prop_assert!(cap.lower <= cap.upper);
        prop_assert!(cap.lower <= (outputs as f64).ln() + 1e-9);
        prop_assert!(cap.lower_history.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    }
}

use rand::{Rng as _, RngCore};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::config::Component;
use crate::info::{dv_gap, event_probability_bound, jsd_tv, kl_gaussian, FiniteDistribution};
use crate::kernel::{
    adaptive_compose, capacity_bracket, cmi_distributional, cmi_exact_fixed, compose_pair, ecmi_fixed, postprocess,
    CapacityOptions, CmiMode, IidSampler, MonteCarlo, StochasticMap, Supersample, TableKernel,
};
use crate::learners::{
    compression_cmi_bound, compression_wrap, erm_cmi_bound, parity_cmi_bound, parity_failure_probability,
    pseudodeterministic_bound, sauer_shelah_bound, subsets, threshold_cmi_fixed, uncoupled_threshold_cmi,
    ConsistentErm, DecimalGrid, Example, HypothesisClass, ParityHypothesis, ParityLearner, PathologicalErm,
    ThresholdLearner,
};
use crate::mc::{trial_rng, Rng};
use crate::stability::{
    clipped_squared_loss, ecmi_gaussian_bound, mean_estimator_stability, randomized_response, tv_lottery,
    ucmi_dp_check, Certified, MeanEstimator,
};
use crate::{Error, Result};

const LN2: f64 = std::f64::consts::LN_2;

/// Outcome of one property family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyResult {
    pub id: String,
    pub satisfied: bool,
    /// Number of individual inequalities checked.
    pub checks: u64,
    /// Smallest `bound − value` seen (tolerances included in the bound).
    pub worst_slack: f64,
    /// Up to five failing checks.
    pub failures: Vec<String>,
}

/// One inequality `value ≤ bound`.
struct Check {
    what: String,
    value: f64,
    bound: f64,
}

fn check(what: impl Into<String>, value: f64, bound: f64) -> Check {
    Check { what: what.into(), value, bound }
}

#[derive(Default)]
struct Tally {
    checks: u64,
    worst: Option<f64>,
    failures: Vec<String>,
}

impl Tally {
    fn add(&mut self, c: Check) {
        self.checks += 1;
        let slack = c.bound - c.value;
        self.worst = Some(self.worst.map_or(slack, |w| w.min(slack)));
        if !(c.value <= c.bound) && self.failures.len() < 5 {
            self.failures.push(format!("{}: {} > {}", c.what, c.value, c.bound));
        }
    }

    fn extend(&mut self, checks: impl IntoIterator<Item = Check>) {
        checks.into_iter().for_each(|c| self.add(c));
    }

    fn finish(self, id: &str) -> PropertyResult {
        PropertyResult {
            id: id.into(),
            satisfied: self.failures.is_empty(),
            checks: self.checks,
            worst_slack: self.worst.unwrap_or(0.0),
            failures: self.failures,
        }
    }
}

fn n_range(lo: usize, hi: usize, i: usize) -> usize {
    lo + i % (hi - lo + 1)
}

/// Supersample `[[2r, 2r+1]]` with `2n` distinct points.
fn distinct(n: usize) -> Supersample<u8> {
    Supersample::new((0..n as u8).map(|r| [2 * r, 2 * r + 1]).collect()).expect("n >= 1")
}

/// Scales nonnegative weights to total one.
fn normalize<L>(weights: Vec<(L, f64)>) -> Vec<(L, f64)> {
    let total: f64 = weights.iter().map(|(_, w)| w).sum();
    weights.into_iter().map(|(l, w)| (l, w / total)).collect()
}

fn random_law(rng: &mut Rng, k: usize, floor: f64) -> Result<FiniteDistribution<usize>> {
    FiniteDistribution::new(normalize((0..k).map(|i| (i, floor + rng.random::<f64>())).collect()))
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThresholdCmiParams {
    pub supersamples: usize,
    pub n_min: usize,
    pub n_max: usize,
    /// Size of the distinct-valued separation witness.
    pub witness_n: usize,
}

impl Default for ThresholdCmiParams {
    fn default() -> Self {
        ThresholdCmiParams { supersamples: 10_000, n_min: 2, n_max: 8, witness_n: 8 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParityParams {
    pub d: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub draws: usize,
}

impl Default for ParityParams {
    fn default() -> Self {
        ParityParams { d: 3, n_min: 4, n_max: 8, draws: 2000 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompressionParams {
    pub supersamples: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub sizes: Vec<usize>,
}

impl Default for CompressionParams {
    fn default() -> Self {
        CompressionParams { supersamples: 1000, n_min: 4, n_max: 8, sizes: vec![1, 2] }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ErmVcParams {
    /// Largest number of realizable supersamples enumerated per `(class, n)`.
    pub enumeration_budget: usize,
    pub domains: Vec<usize>,
    pub n_max_full: usize,
    /// Sample sizes for seeded realizable candidates on the largest domain.
    pub sampled_n: Vec<usize>,
    pub sampled_candidates: usize,
    /// Domain size for the Sauer–Shelah labelling counts.
    pub shatter_domain: usize,
    pub random_class_sizes: Vec<usize>,
}

impl Default for ErmVcParams {
    fn default() -> Self {
        ErmVcParams {
            enumeration_budget: 1_500_000,
            domains: vec![2, 3, 4, 6, 12],
            n_max_full: 3,
            sampled_n: vec![4, 6, 8, 10],
            sampled_candidates: 100,
            shatter_domain: 12,
            random_class_sizes: vec![4, 12, 40, 200],
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DpTvParams {
    pub flip_probs: Vec<f64>,
    pub rr_n_max: usize,
    pub deltas: Vec<f64>,
    pub tv_n_max: usize,
    pub jsd_pairs: usize,
}

impl Default for DpTvParams {
    fn default() -> Self {
        DpTvParams {
            flip_probs: (0..8).map(|i| 0.1 + 0.05 * i as f64).collect(),
            rr_n_max: 12,
            deltas: (0..=10).map(|i| i as f64 / 10.0).collect(),
            tv_n_max: 10,
            jsd_pairs: 1000,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompositionParams {
    pub pairs: usize,
    pub n_max: usize,
    pub adaptive: usize,
    pub adaptive_n_max: usize,
}

impl Default for CompositionParams {
    fn default() -> Self {
        CompositionParams { pairs: 500, n_max: 6, adaptive: 100, adaptive_n_max: 4 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EcmiParams {
    pub triples: usize,
    pub n_max: usize,
    pub gaussian_n_max: usize,
    pub gaussian_draws: usize,
    pub sigma: f64,
    pub clip: f64,
}

impl Default for EcmiParams {
    fn default() -> Self {
        EcmiParams { triples: 500, n_max: 6, gaussian_n_max: 8, gaussian_draws: 20, sigma: 1.0, clip: 1.0 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TriplesParams {
    pub triples: usize,
}

impl Default for TriplesParams {
    fn default() -> Self {
        TriplesParams { triples: 1000 }
    }
}

/// A registered property family with its parameters.
#[derive(Clone, Debug)]
pub enum Property {
    GaussianKl,
    ThresholdCmi(ThresholdCmiParams),
    Parity(ParityParams),
    Compression(CompressionParams),
    ErmVc(ErmVcParams),
    DpTvUcmi(DpTvParams),
    Composition(CompositionParams),
    Ecmi(EcmiParams),
    DvProbability(TriplesParams),
}

fn params<T: DeserializeOwned>(c: &Component) -> Result<T> {
    c.parse("property")
}

impl Property {
    pub const IDS: [&'static str; 9] = [
        "gaussian-kl",
        "threshold-cmi",
        "parity",
        "compression",
        "erm-vc",
        "dp-tv-ucmi",
        "composition",
        "ecmi",
        "dv-probability",
    ];

    pub fn build(c: &Component) -> Result<Self> {
        Ok(match c.id.as_str() {
            "gaussian-kl" => {
                params::<serde_json::Map<String, serde_json::Value>>(c)?
                    .is_empty()
                    .then_some(())
                    .ok_or_else(|| Error::invalid("gaussian-kl takes no parameters"))?;
                Property::GaussianKl
            }
            "threshold-cmi" => Property::ThresholdCmi(params(c)?),
            "parity" => Property::Parity(params(c)?),
            "compression" => Property::Compression(params(c)?),
            "erm-vc" => Property::ErmVc(params(c)?),
            "dp-tv-ucmi" => Property::DpTvUcmi(params(c)?),
            "composition" => Property::Composition(params(c)?),
            "ecmi" => Property::Ecmi(params(c)?),
            "dv-probability" => Property::DvProbability(params(c)?),
            other => return Err(Error::UnknownId { kind: "property", id: other.into() }),
        })
    }

    pub fn id(&self) -> &'static str {
        match self {
            Property::GaussianKl => "gaussian-kl",
            Property::ThresholdCmi(_) => "threshold-cmi",
            Property::Parity(_) => "parity",
            Property::Compression(_) => "compression",
            Property::ErmVc(_) => "erm-vc",
            Property::DpTvUcmi(_) => "dp-tv-ucmi",
            Property::Composition(_) => "composition",
            Property::Ecmi(_) => "ecmi",
            Property::DvProbability(_) => "dv-probability",
        }
    }

    /// Runs every check of the family. Draw `i` uses
    /// `trial_rng(seed, "<id>/<part>", i)`.
    pub fn run(&self, seed: u64) -> Result<PropertyResult> {
        let mut tally = Tally::default();
        match self {
            Property::GaussianKl => gaussian_kl(&mut tally)?,
            Property::ThresholdCmi(p) => threshold_cmi(p, seed, &mut tally)?,
            Property::Parity(p) => parity(p, seed, &mut tally)?,
            Property::Compression(p) => compression(p, seed, &mut tally)?,
            Property::ErmVc(p) => erm_vc(p, seed, &mut tally)?,
            Property::DpTvUcmi(p) => dp_tv_ucmi(p, seed, &mut tally)?,
            Property::Composition(p) => composition(p, seed, &mut tally)?,
            Property::Ecmi(p) => ecmi(p, seed, &mut tally)?,
            Property::DvProbability(p) => dv_probability(p, seed, &mut tally)?,
        }
        Ok(tally.finish(self.id()))
    }
}

fn gaussian_kl(tally: &mut Tally) -> Result<()> {
    let cases: [(&[f64], &[f64], f64, f64); 3] =
        [(&[0.0], &[1.0], 1.0, 0.5), (&[1.0, 2.0, 3.0], &[0.0, 0.0, 0.0], 2.0, 1.75), (&[0.3], &[0.3], 0.1, 0.0)];
    for (mu, nu, sigma, expected) in cases {
        let kl = kl_gaussian(mu, nu, sigma)?.0;
        tally.add(check(format!("kl({mu:?}, {nu:?}, {sigma})"), (kl - expected).abs(), 1e-12));
    }
    Ok(())
}

fn threshold_cmi(p: &ThresholdCmiParams, seed: u64, tally: &mut Tally) -> Result<()> {
    let random = (0..p.supersamples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, "threshold-cmi/random", i);
            let n = n_range(p.n_min, p.n_max, i as usize);
            let mut point = || Example::new(rng.random::<f64>(), rng.random_bool(0.5));
            let z = Supersample::new((0..n).map(|_| [point(), point()]).collect())?;
            let cmi = threshold_cmi_fixed(&z)?.0;
            Ok(check(format!("random supersample {i} (n = {n})"), cmi, 2.0))
        })
        .collect::<Result<Vec<_>>>()?;
    tally.extend(random);

    for n in p.n_min..=p.n_max {
        for m in 0..=n {
            let mut rng = trial_rng(seed, "threshold-cmi/uncoupled", (n * 100 + m) as u64);
            let rows: Vec<[Example<f64>; 2]> = (0..n)
                .map(|r| {
                    let a = Example::new(rng.random::<f64>(), false);
                    let b = Example::new(rng.random::<f64>(), r < m);
                    if rng.random_bool(0.5) {
                        [a, b]
                    } else {
                        [b, a]
                    }
                })
                .collect();
            let cmi = threshold_cmi_fixed(&Supersample::new(rows)?)?.0;
            let expected = uncoupled_threshold_cmi(m).0;
            tally.add(check(format!("uncoupled n = {n}, m = {m}"), (cmi - expected).abs(), 1e-9));
        }
    }

    // Separation: negatives below positives, one positive per row.
    let n = p.witness_n;
    let rows: Vec<[Example<f64>; 2]> =
        (0..n).map(|r| [Example::negative(r as f64), Example::positive((n + r) as f64)]).collect();
    let z = Supersample::new(rows)?;
    let grid = DecimalGrid::new(0, 0, 2 * n as i64)?;
    let pathological = cmi_exact_fixed(&z, &PathologicalErm { grid })?.value.0;
    let threshold = cmi_exact_fixed(&z, &ThresholdLearner)?.value.0;
    tally.add(check("pathological witness lower bound", 0.9 * n as f64 * LN2, pathological));
    tally.add(check("threshold on the witness", threshold, 1.386));
    Ok(())
}

fn parity(p: &ParityParams, seed: u64, tally: &mut Tally) -> Result<()> {
    let d = p.d;
    for n in p.n_min..=p.n_max {
        let mut rng = trial_rng(seed, "parity/target", n as u64);
        let code = rng.random_range(1..1u64 << d);
        let w_star = ParityHypothesis::new((0..d).map(|j| code >> (d - 1 - j) & 1 == 1).collect());
        let law = FiniteDistribution::uniform((0..1u64 << d).map(|v| {
            let x: Vec<bool> = (0..d).map(|j| v >> (d - 1 - j) & 1 == 1).collect();
            let y = x.iter().zip(w_star.weights()).filter(|(a, b)| **a && **b).count() % 2 == 1;
            Example::new(x, y)
        }))?;
        let plan = MonteCarlo::new(p.draws, seed).with_stream(format!("parity/n{n}"));
        let est = cmi_distributional(&ParityLearner { d }, &IidSampler { law, n }, &CmiMode::MonteCarlo(plan))?;
        let slack = 3.0 * est.ci_halfwidth;
        tally.add(check(format!("n = {n} against 2^(d-n)(n log 2 + 1)"), est.value.0, parity_cmi_bound(d, n) + slack));
        let fail = parity_failure_probability(&w_star, n)?;
        let pseudo = pseudodeterministic_bound(fail, d as f64 * LN2)?;
        tally.add(check(format!("n = {n} against the pseudodeterministic bound (p = {fail})"), est.value.0, pseudo + slack));
    }
    Ok(())
}

fn compression(p: &CompressionParams, seed: u64, tally: &mut Tally) -> Result<()> {
    if p.sizes.is_empty() {
        return Err(Error::invalid("compression needs at least one scheme size"));
    }
    let checks = (0..p.supersamples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, "compression", i);
            let n = n_range(p.n_min, p.n_max, i as usize);
            let k = p.sizes[(i as usize / (p.n_max - p.n_min + 1)) % p.sizes.len()].min(n);
            let z = Supersample::new((0..n).map(|_| [rng.random_range(0..1_000_000u32), rng.random_range(0..1_000_000)]).collect())?;
            // Keep the k largest points; output them sorted.
            let scheme = compression_wrap(
                k,
                move |d: &[u32]| {
                    let mut idx: Vec<usize> = (0..d.len()).collect();
                    idx.sort_by_key(|&j| (std::cmp::Reverse(d[j]), j));
                    idx.truncate(k);
                    idx
                },
                |kept: &[u32]| {
                    let mut v = kept.to_vec();
                    v.sort_unstable();
                    v
                },
            );
            let cmi = cmi_exact_fixed(&z, &scheme)?.value.0;
            Ok(check(format!("supersample {i} (k = {k}, n = {n})"), cmi, compression_cmi_bound(k, n) + 1e-9))
        })
        .collect::<Result<Vec<_>>>()?;
    tally.extend(checks);
    Ok(())
}

/// The supersample with rows `xs[2r], xs[2r+1]`, labelled by one member of
/// the class.
fn realizable_supersample(class: &HypothesisClass, member: usize, xs: &[usize]) -> Result<Supersample<Example<usize>>> {
    let h = &class.members()[member];
    let rows = xs.chunks(2).map(|c| [Example::new(c[0], h.labels()[c[0]]), Example::new(c[1], h.labels()[c[1]])]);
    Supersample::new(rows.collect())
}

fn erm_vc(p: &ErmVcParams, seed: u64, tally: &mut Tally) -> Result<()> {
    let classes = |m: usize| [(1usize, HypothesisClass::thresholds(m)), (2, HypothesisClass::intervals(m))];
    for &m in &p.domains {
        for (d, class) in classes(m) {
            tally.add(check(format!("VC dimension of the d = {d} class on {m} points"), class.vc_dimension() as f64, d as f64));
            let kernel = ConsistentErm { class: class.clone() };
            let members = class.members().len();
            for n in 1..=p.n_max_full {
                let count = members as f64 * (m as f64).powi(2 * n as i32);
                if count > p.enumeration_budget as f64 {
                    continue;
                }
                let worst = (0..count as u64)
                    .into_par_iter()
                    .map(|t| {
                        let member = (t % members as u64) as usize;
                        let mut rest = t / members as u64;
                        let xs: Vec<usize> = (0..2 * n)
                            .map(|_| {
                                let x = (rest % m as u64) as usize;
                                rest /= m as u64;
                                x
                            })
                            .collect();
                        Ok::<f64, Error>(cmi_exact_fixed(&realizable_supersample(&class, member, &xs)?, &kernel)?.value.0)
                    })
                    .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;
                tally.add(check(format!("full enumeration, d = {d}, m = {m}, n = {n}"), worst, erm_cmi_bound(d, n)));
            }
        }
    }

    let m = p.domains.iter().copied().max().unwrap_or(p.shatter_domain);
    for (d, class) in classes(m) {
        let kernel = ConsistentErm { class: class.clone() };
        for &n in &p.sampled_n {
            let checks = (0..p.sampled_candidates as u64)
                .into_par_iter()
                .map(|i| {
                    let mut rng = trial_rng(seed, &format!("erm-vc/d{d}/n{n}"), i);
                    let member = rng.random_range(0..class.members().len());
                    let xs: Vec<usize> = (0..2 * n).map(|_| rng.random_range(0..m)).collect();
                    let cmi = cmi_exact_fixed(&realizable_supersample(&class, member, &xs)?, &kernel)?.value.0;
                    Ok(check(format!("sampled candidate {i}, d = {d}, m = {m}, n = {n}"), cmi, erm_cmi_bound(d, n)))
                })
                .collect::<Result<Vec<_>>>()?;
            tally.extend(checks);
        }
    }

    let m = p.shatter_domain;
    let mut shatter_classes = vec![HypothesisClass::thresholds(m), HypothesisClass::intervals(m)];
    for (j, &size) in p.random_class_sizes.iter().enumerate() {
        shatter_classes.push(HypothesisClass::random(m, size, crate::mc::derive_seed(seed, "erm-vc/class", j as u64))?);
    }
    for class in &shatter_classes {
        let d = class.vc_dimension();
        for k in 0..=m {
            for set in subsets(m, k) {
                let count = class.labelling_count(&set) as f64;
                tally.add(check(format!("labellings of {set:?} (d = {d})"), count, sauer_shelah_bound(k, d) as f64));
            }
        }
    }
    Ok(())
}

fn dp_tv_ucmi(p: &DpTvParams, seed: u64, tally: &mut Tally) -> Result<()> {
    let opts = CapacityOptions::default();
    for &flip in &p.flip_probs {
        for n in 1..=p.rr_n_max {
            let rr = randomized_response(flip, n)?;
            let cert = rr.certificate();
            let z = Supersample::new(vec![[false, true]; n])?;
            let cmi = cmi_exact_fixed(&z, &rr)?.value.0;
            tally.add(check(format!("randomized response p = {flip}, n = {n}"), cmi, cert.implied_cmi_bound.0 + 1e-12));
            for c in ucmi_dp_check(&rr, Some(&cert), std::slice::from_ref(&z), opts)? {
                tally.add(check(format!("uCMI of randomized response p = {flip}, n = {n}"), c.ucmi.0, c.bound.0 + 1e-6));
            }
        }
    }
    for &delta in &p.deltas {
        for n in 1..=p.tv_n_max {
            let lottery = tv_lottery(delta, n)?;
            let cmi = cmi_exact_fixed(&distinct(n), &lottery)?.value.0;
            tally.add(check(format!("TV lottery delta = {delta}, n = {n}"), cmi, lottery.certificate().implied_cmi_bound.0 + 1e-9));
        }
    }
    for i in 0..p.jsd_pairs as u64 {
        let mut rng = trial_rng(seed, "dp-tv-ucmi/jsd", i);
        let k = rng.random_range(2..=8);
        // Zero floor with cubed weights gives near-disjoint supports too.
        let mut law = || FiniteDistribution::new(normalize((0..k).map(|j| (j, rng.random::<f64>().powi(3) + 1e-12)).collect()));
        let (jsd, tv) = jsd_tv(&law()?, &law()?);
        tally.add(check(format!("JSD against TV, pair {i}"), jsd.0, tv + 1e-12));
    }
    Ok(())
}

fn table(rng: &mut Rng) -> TableKernel {
    TableKernel::new(rng.random_range(2..=5), rng.next_u64())
}

fn composition(p: &CompositionParams, seed: u64, tally: &mut Tally) -> Result<()> {
    let checks = (0..p.pairs as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, "composition/pairs", i);
            let z = distinct(n_range(1, p.n_max, i as usize));
            let (a, b) = (table(&mut rng), table(&mut rng));
            let ca = cmi_exact_fixed(&z, &a)?.value.0;
            let cb = cmi_exact_fixed(&z, &b)?.value.0;
            let pair = cmi_exact_fixed(&z, &compose_pair(a, b))?.value.0;
            let targets = rng.random_range(1..=4u32);
            let map = StochasticMap::new((0..a.outputs).map(|w| {
                (w, normalize((0..targets).map(|v| (v, rng.random::<f64>().powi(2) + 1e-3)).collect()))
            }))?;
            let post = cmi_exact_fixed(&z, &postprocess(a, map))?.value.0;
            Ok([
                check(format!("pair {i} subadditivity"), pair, ca + cb + 1e-10),
                check(format!("pair {i} post-processing"), post, ca + 1e-10),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    tally.extend(checks.into_iter().flatten());

    let opts = CapacityOptions::default();
    let checks = (0..p.adaptive as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, "composition/adaptive", i);
            let z = distinct(n_range(1, p.adaptive_n_max, i as usize));
            let first = table(&mut rng);
            let second = table(&mut rng);
            let family = move |w1: &u32| TableKernel { seed: second.seed ^ u64::from(*w1).wrapping_mul(0x9e37_79b9), ..second };
            let upper_first = capacity_bracket(&z, &first, opts)?.upper;
            let upper_second = (0..first.outputs)
                .map(|w1| Ok(capacity_bracket(&z, &family(&w1), opts)?.upper))
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            let composed = capacity_bracket(&z, &adaptive_compose(first, family), opts)?.lower;
            Ok(check(format!("adaptive instance {i}"), composed, upper_first + upper_second + 1e-6))
        })
        .collect::<Result<Vec<_>>>()?;
    tally.extend(checks);
    Ok(())
}

fn ecmi(p: &EcmiParams, seed: u64, tally: &mut Tally) -> Result<()> {
    let checks = (0..p.triples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, "ecmi/triples", i);
            let z = distinct(n_range(1, p.n_max, i as usize));
            let kernel = if rng.random_bool(0.5) { table(&mut rng) } else { TableKernel::deterministic(rng.random_range(2..=6), rng.next_u64()) };
            let salt = rng.random_range(0..3u32);
            let levels = rng.random_range(2..=3u32);
            // Loss values in {0, 1/2, 1}, exactly representable.
            let loss = move |w: &u32, x: &u8| f64::from((w * 7 + u32::from(*x) * 5 + salt) % levels) / 2.0;
            let e = ecmi_fixed(&z, &kernel, loss)?.value.0;
            let c = cmi_exact_fixed(&z, &kernel)?.value.0;
            Ok(check(format!("triple {i}"), e, c + 1e-10))
        })
        .collect::<Result<Vec<_>>>()?;
    tally.extend(checks);

    for n in 1..=p.gaussian_n_max {
        let gamma = mean_estimator_stability(n, 1.0, p.clip);
        for t in 0..p.gaussian_draws as u64 {
            let mut rng = trial_rng(seed, &format!("ecmi/gaussian/n{n}"), t);
            let z = Supersample::new((0..n).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect())?;
            let s = ecmi_gaussian_bound(&MeanEstimator, clipped_squared_loss(p.clip), gamma, &z, p.sigma)?;
            tally.add(check(format!("Gaussian surrogate n = {n}, draw {t}"), s.computed.0, s.cap.0 + 1e-12));
        }
    }
    Ok(())
}

fn dv_probability(p: &TriplesParams, seed: u64, tally: &mut Tally) -> Result<()> {
    for i in 0..p.triples as u64 {
        let mut rng = trial_rng(seed, "dv-probability", i);
        let k = rng.random_range(2..=6);
        let pl = random_law(&mut rng, k, 0.01)?;
        let ql = random_law(&mut rng, k, 0.01)?;
        let f: Vec<f64> = (0..k).map(|_| rng.random_range(-3.0..3.0)).collect();
        tally.add(check(format!("DV slack, triple {i}"), -dv_gap(|x| f[*x], &pl, &ql).0, 1e-10));
        let opt = dv_gap(|x| (pl.mass(x) / ql.mass(x)).ln(), &pl, &ql).0;
        tally.add(check(format!("DV slack at the optimum, triple {i}"), opt.abs(), 1e-9));
        let mask = rng.random_range(1..(1u32 << k) - 1);
        let event = |x: &usize| mask >> x & 1 == 1;
        let bound = event_probability_bound(&pl, &ql, event)?;
        tally.add(check(format!("event bound, triple {i}"), pl.probability(event), bound));
    }
    Ok(())
}

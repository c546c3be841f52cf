use std::collections::{BTreeMap, BTreeSet};

use super::{xlogxy, FiniteDistribution, JointPmf, Nats};
use crate::{Error, Result};

/// Shannon entropy `−Σ p ln p`.
pub fn entropy<L: Ord + Clone>(p: &FiniteDistribution<L>) -> Nats {
    Nats(-p.iter().map(|(_, m)| if m > 0.0 { m * m.ln() } else { 0.0 }).sum::<f64>())
}

/// Kullback–Leibler divergence `KL(P ‖ Q)`, infinite when `P` charges a label
/// that `Q` does not.
pub fn kl<L: Ord + Clone>(p: &FiniteDistribution<L>, q: &FiniteDistribution<L>) -> Nats {
    let mut total = 0.0;
    for (label, pm) in p.iter().filter(|(_, m)| *m > 0.0) {
        let term = xlogxy(pm, q.mass(label));
        if term.is_infinite() {
            return Nats::INFINITY;
        }
        total += term;
    }
    Nats(total)
}

/// KL divergence between `N(mu, σ² I)` and `N(nu, σ² I)`: `‖mu − nu‖² / 2σ²`.
pub fn kl_gaussian(mu: &[f64], nu: &[f64], sigma: f64) -> Result<Nats> {
    Error::check_len(mu.len(), nu.len())?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
    }
    let sq: f64 = mu.iter().zip(nu).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(Nats(sq / (2.0 * sigma * sigma)))
}

/// `I(X; Y)` of a two-variable joint.
pub fn mutual_information<X: Ord + Clone, Y: Ord + Clone>(joint: &JointPmf<X, Y>) -> Nats {
    conditional_mutual_information(joint)
}

/// `I(X; Y | C)`; with `C = ()` this is plain mutual information.
///
/// Computed as `Σ p(x,y,c) ln[p(x,y,c) p(c) / (p(x,c) p(y,c))]`.
pub fn conditional_mutual_information<X, Y, C>(joint: &JointPmf<X, Y, C>) -> Nats
where
    X: Ord + Clone,
    Y: Ord + Clone,
    C: Ord + Clone,
{
    let mut pxc: BTreeMap<(&X, &C), f64> = BTreeMap::new();
    let mut pyc: BTreeMap<(&Y, &C), f64> = BTreeMap::new();
    let mut pc: BTreeMap<&C, f64> = BTreeMap::new();
    for ((x, y, c), m) in joint.table().iter() {
        *pxc.entry((x, c)).or_insert(0.0) += m;
        *pyc.entry((y, c)).or_insert(0.0) += m;
        *pc.entry(c).or_insert(0.0) += m;
    }
    let total = joint
        .table()
        .iter()
        .filter(|(_, m)| *m > 0.0)
        .map(|((x, y, c), m)| m * (m * pc[c] / (pxc[&(x, c)] * pyc[&(y, c)])).ln())
        .sum();
    Nats(total)
}

/// Jensen–Shannon divergence and total-variation distance of two laws.
pub fn jsd_tv<L: Ord + Clone>(p0: &FiniteDistribution<L>, p1: &FiniteDistribution<L>) -> (Nats, f64) {
    let labels: BTreeSet<&L> = p0.support().chain(p1.support()).collect();
    let mut jsd = 0.0;
    let mut tv = 0.0;
    for label in labels {
        let a = p0.mass(label);
        let b = p1.mass(label);
        let m = 0.5 * (a + b);
        jsd += 0.5 * xlogxy(a, m) + 0.5 * xlogxy(b, m);
        tv += (a - b).abs();
    }
    (Nats(jsd), 0.5 * tv)
}

/// The slack `KL(P‖Q) − (E_P[f] − ln E_Q[e^f])` in the Donsker–Varadhan
/// variational formula. It is nonnegative and vanishes at `f = ln(P/Q)`.
pub fn dv_gap<L: Ord + Clone>(
    f: impl Fn(&L) -> f64,
    p: &FiniteDistribution<L>,
    q: &FiniteDistribution<L>,
) -> Nats {
    let divergence = kl(p, q);
    if divergence.is_infinite() {
        return Nats::INFINITY;
    }
    let ep = p.expectation(&f);
    let values: Vec<(f64, f64)> = q.iter().filter(|(_, m)| *m > 0.0).map(|(l, m)| (m, f(l))).collect();
    let shift = values.iter().map(|(_, v)| *v).fold(f64::NEG_INFINITY, f64::max);
    let log_mgf = shift + values.iter().map(|(m, v)| m * (v - shift).exp()).sum::<f64>().ln();
    Nats(divergence.0 - (ep - log_mgf))
}

/// Upper bound `(KL(P‖Q) + ln 2) / ln(1 / Q(E))` on `P(E)`.
///
/// Requires `0 < Q(E) < 1`.
pub fn event_probability_bound<L: Ord + Clone>(
    p: &FiniteDistribution<L>,
    q: &FiniteDistribution<L>,
    event: impl Fn(&L) -> bool,
) -> Result<f64> {
    let qe = q.probability(event);
    if !(qe > 0.0 && qe < 1.0) {
        return Err(Error::invalid(format!("event probability under Q must lie in (0, 1), got {qe}")));
    }
    Ok((kl(p, q).0 + std::f64::consts::LN_2) / -qe.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::{CLOSED_FORM_TOL, SUMMATION_TOL};

    fn bern(p: f64) -> FiniteDistribution<bool> {
        FiniteDistribution::<bool>::bernoulli(p).unwrap()
    }

    // Reference values below were computed by direct summation, e.g.
    // KL(Bern(3/4) ‖ Bern(1/2)) = 3/4 ln(3/2) + 1/4 ln(1/2).

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&FiniteDistribution::point(7)).0, 0.0);
        let u4 = FiniteDistribution::uniform(0..4).unwrap();
        assert!((entropy(&u4).0 - 1.386294361).abs() < 1e-9);
        let geo = FiniteDistribution::new([(1, 0.5), (2, 0.25), (3, 0.25)]).unwrap();
        assert!((entropy(&geo).0 - 1.039720771).abs() < 1e-9);
        assert!((entropy(&geo).0 - 1.5 * std::f64::consts::LN_2).abs() < CLOSED_FORM_TOL);
    }

    #[test]
    fn kl_examples() {
        let p = bern(0.75);
        assert_eq!(kl(&p, &p).0, 0.0);
        assert!((kl(&p, &bern(0.5)).0 - 0.130812035).abs() < 1e-9);
        assert!(kl(&p, &bern(0.0)).is_infinite());
        assert_eq!(kl(&bern(0.0), &bern(0.5)).0, std::f64::consts::LN_2);
    }

    #[test]
    fn gaussian_kl_examples() {
        assert_eq!(kl_gaussian(&[0.0], &[0.0], 1.0).unwrap().0, 0.0);
        assert!((kl_gaussian(&[0.0], &[1.0], 1.0).unwrap().0 - 0.5).abs() < CLOSED_FORM_TOL);
        assert!((kl_gaussian(&[0.0], &[2.0], 1.0).unwrap().0 - 2.0).abs() < CLOSED_FORM_TOL);
        assert!(kl_gaussian(&[0.0], &[1.0], 0.0).is_err());
        assert!(kl_gaussian(&[0.0], &[1.0, 2.0], 1.0).is_err());
    }

    #[test]
    fn mutual_information_examples() {
        let indep = JointPmf::from_channel(&bern(0.3), |_| bern(0.6)).unwrap();
        assert!(mutual_information(&indep).0.abs() < CLOSED_FORM_TOL);
        let copy = JointPmf::new([((0, 0), 0.5), ((1, 1), 0.5)]).unwrap();
        assert!((mutual_information(&copy).0 - std::f64::consts::LN_2).abs() < CLOSED_FORM_TOL);
        let bsc = JointPmf::from_channel(&bern(0.5), |&x| bern(if x { 0.75 } else { 0.25 })).unwrap();
        assert!((mutual_information(&bsc).0 - 0.130812035).abs() < 1e-9);
        let swapped = mutual_information(&bsc.swapped()).0;
        assert!((swapped - mutual_information(&bsc).0).abs() < CLOSED_FORM_TOL);
    }

    #[test]
    fn conditional_mi_degenerate_axis_matches_plain_mi() {
        let table = [((0, 0), 0.4), ((0, 1), 0.1), ((1, 0), 0.2), ((1, 1), 0.3)];
        let plain = JointPmf::new(table).unwrap();
        let cond = JointPmf::with_condition(table.map(|((x, y), m)| ((x, y, 'c'), m))).unwrap();
        let a = mutual_information(&plain).0;
        let b = conditional_mutual_information(&cond).0;
        assert!((a - b).abs() < CLOSED_FORM_TOL);

        // X ⊥ Y given each c, but dependent marginally.
        let ci = JointPmf::with_condition([((0, 0, 0), 0.5), ((1, 1, 1), 0.5)]).unwrap();
        assert!(conditional_mutual_information(&ci).0.abs() < CLOSED_FORM_TOL);
    }

    #[test]
    fn jsd_tv_examples() {
        let (j, t) = jsd_tv(&bern(0.3), &bern(0.3));
        assert_eq!((j.0, t), (0.0, 0.0));
        let (j, t) = jsd_tv(&bern(0.0), &bern(1.0));
        assert!((j.0 - std::f64::consts::LN_2).abs() < CLOSED_FORM_TOL);
        assert_eq!(t, 1.0);
        let (j, t) = jsd_tv(&bern(0.25), &bern(0.75));
        assert_eq!(t, 0.5);
        assert!((j.0 - 0.130812035).abs() < 1e-9);
    }

    #[test]
    fn dv_gap_examples() {
        let p = FiniteDistribution::new([(0, 0.2), (1, 0.5), (2, 0.3)]).unwrap();
        let q = FiniteDistribution::new([(0, 0.4), (1, 0.4), (2, 0.2)]).unwrap();
        let constant = dv_gap(|_| 3.0, &p, &q).0;
        assert!((constant - kl(&p, &q).0).abs() < SUMMATION_TOL);
        let optimal = dv_gap(|l| (p.mass(l) / q.mass(l)).ln(), &p, &q).0;
        assert!(optimal.abs() < 1e-9);
        let off = FiniteDistribution::new([(0, 0.5), (1, 0.5)]).unwrap();
        let skewed = FiniteDistribution::new([(0, 1.0), (1, 0.0)]).unwrap();
        assert!(dv_gap(|_| 0.0, &off, &skewed).is_infinite());
    }

    #[test]
    fn event_bound_examples() {
        let q = FiniteDistribution::uniform(0..4).unwrap();
        let b = event_probability_bound(&q, &q, |&l| l == 0).unwrap();
        assert!((b - 0.5).abs() < CLOSED_FORM_TOL);
        assert!(event_probability_bound(&q, &q, |_| true).is_err());
        assert!(event_probability_bound(&q, &q, |_| false).is_err());
    }
}

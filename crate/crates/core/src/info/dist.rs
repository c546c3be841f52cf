use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::RENORMALIZE_SLACK;
use crate::{Error, Result};

/// A probability law on finitely many labels.
///
/// Atoms are kept sorted by label with distinct labels; masses are
/// nonnegative and sum to one within `1e-12`. Zero-mass atoms are allowed
/// and simply contribute nothing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Atoms<L>", into = "Atoms<L>")]
#[serde(bound(
    serialize = "L: Serialize + Clone",
    deserialize = "L: Deserialize<'de> + Ord + Clone"
))]
pub struct FiniteDistribution<L> {
    atoms: Vec<(L, f64)>,
}

#[derive(Serialize, Deserialize)]
struct Atoms<L> {
    atoms: Vec<(L, f64)>,
}

impl<L: Ord + Clone> TryFrom<Atoms<L>> for FiniteDistribution<L> {
    type Error = Error;
    fn try_from(raw: Atoms<L>) -> Result<Self> {
        FiniteDistribution::new(raw.atoms)
    }
}

impl<L> From<FiniteDistribution<L>> for Atoms<L> {
    fn from(d: FiniteDistribution<L>) -> Self {
        Atoms { atoms: d.atoms }
    }
}

impl<L: Ord + Clone> FiniteDistribution<L> {
    /// Builds a distribution from `(label, mass)` pairs with distinct labels.
    ///
    /// Masses must be finite and nonnegative. A total within
    /// [`RENORMALIZE_SLACK`] of one is rescaled to one; anything else is
    /// rejected.
    pub fn new(atoms: impl IntoIterator<Item = (L, f64)>) -> Result<Self> {
        let mut atoms: Vec<(L, f64)> = atoms.into_iter().collect();
        atoms.sort_by(|a, b| a.0.cmp(&b.0));
        if atoms.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidDistribution("duplicate label".into()));
        }
        Self::validated(atoms)
    }

    /// Like [`FiniteDistribution::new`] but sums the masses of repeated labels.
    pub fn from_weights(atoms: impl IntoIterator<Item = (L, f64)>) -> Result<Self> {
        let mut merged: BTreeMap<L, f64> = BTreeMap::new();
        for (label, mass) in atoms {
            if !mass.is_finite() || mass < 0.0 {
                return Err(Error::InvalidDistribution(format!("mass {mass} is not a probability")));
            }
            *merged.entry(label).or_insert(0.0) += mass;
        }
        Self::validated(merged.into_iter().collect())
    }

    fn validated(mut atoms: Vec<(L, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidDistribution("no atoms".into()));
        }
        if let Some((_, m)) = atoms.iter().find(|(_, m)| !m.is_finite() || *m < 0.0) {
            return Err(Error::InvalidDistribution(format!("mass {m} is not a probability")));
        }
        let total: f64 = atoms.iter().map(|(_, m)| m).sum();
        if (total - 1.0).abs() > RENORMALIZE_SLACK {
            return Err(Error::InvalidDistribution(format!("masses sum to {total}, not 1")));
        }
        if total != 1.0 {
            atoms.iter_mut().for_each(|(_, m)| *m /= total);
        }
        Ok(FiniteDistribution { atoms })
    }

    /// Internal constructor for tables whose total is one by construction.
    pub(crate) fn from_sorted_map(map: BTreeMap<L, f64>) -> Self {
        debug_assert!((map.values().sum::<f64>() - 1.0).abs() <= RENORMALIZE_SLACK);
        FiniteDistribution { atoms: map.into_iter().collect() }
    }

    /// The point mass at `label`.
    pub fn point(label: L) -> Self {
        FiniteDistribution { atoms: vec![(label, 1.0)] }
    }

    /// Uniform law over the distinct labels given.
    pub fn uniform(labels: impl IntoIterator<Item = L>) -> Result<Self> {
        let mut labels: Vec<L> = labels.into_iter().collect();
        labels.sort();
        labels.dedup();
        if labels.is_empty() {
            return Err(Error::InvalidDistribution("no atoms".into()));
        }
        let m = 1.0 / labels.len() as f64;
        Ok(FiniteDistribution { atoms: labels.into_iter().map(|l| (l, m)).collect() })
    }

    /// Mass of `label`, zero when absent.
    pub fn mass(&self, label: &L) -> f64 {
        self.atoms
            .binary_search_by(|(l, _)| l.cmp(label))
            .map(|i| self.atoms[i].1)
            .unwrap_or(0.0)
    }

    /// Probability of the event described by `pred`.
    pub fn probability(&self, pred: impl Fn(&L) -> bool) -> f64 {
        self.atoms.iter().filter(|(l, _)| pred(l)).map(|(_, m)| m).sum()
    }

    pub fn atoms(&self) -> &[(L, f64)] {
        &self.atoms
    }

    pub fn iter(&self) -> impl Iterator<Item = (&L, f64)> + '_ {
        self.atoms.iter().map(|(l, m)| (l, *m))
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Labels carrying positive mass.
    pub fn support(&self) -> impl Iterator<Item = &L> + '_ {
        self.atoms.iter().filter(|(_, m)| *m > 0.0).map(|(l, _)| l)
    }

    /// The label of a point mass, if this law is one.
    pub fn as_point(&self) -> Option<&L> {
        let mut support = self.support();
        match (support.next(), support.next()) {
            (Some(l), None) => Some(l),
            _ => None,
        }
    }

    /// Pushforward through `f`, merging labels that collide.
    pub fn map<M: Ord + Clone>(&self, f: impl Fn(&L) -> M) -> FiniteDistribution<M> {
        let mut out: BTreeMap<M, f64> = BTreeMap::new();
        for (l, m) in &self.atoms {
            *out.entry(f(l)).or_insert(0.0) += m;
        }
        FiniteDistribution::from_sorted_map(out)
    }

    /// Law of the independent pair.
    pub fn product<M: Ord + Clone>(&self, other: &FiniteDistribution<M>) -> FiniteDistribution<(L, M)> {
        let atoms = self
            .atoms
            .iter()
            .flat_map(|(a, p)| other.atoms.iter().map(move |(b, q)| ((a.clone(), b.clone()), p * q)))
            .collect();
        FiniteDistribution { atoms }
    }

    /// Convex combination `Σ w_k · P_k`; weights must form a probability vector.
    pub fn mixture<'a>(parts: impl IntoIterator<Item = (f64, &'a FiniteDistribution<L>)>) -> Result<Self>
    where
        L: 'a,
    {
        let mut out: BTreeMap<L, f64> = BTreeMap::new();
        let mut total = 0.0;
        for (w, d) in parts {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidDistribution(format!("mixture weight {w} is not a probability")));
            }
            total += w;
            for (l, m) in &d.atoms {
                *out.entry(l.clone()).or_insert(0.0) += w * m;
            }
        }
        if (total - 1.0).abs() > RENORMALIZE_SLACK {
            return Err(Error::InvalidDistribution(format!("mixture weights sum to {total}")));
        }
        Self::validated(out.into_iter().collect())
    }

    /// `E[f]` under this law.
    pub fn expectation(&self, f: impl Fn(&L) -> f64) -> f64 {
        self.atoms.iter().filter(|(_, m)| *m > 0.0).map(|(l, m)| m * f(l)).sum()
    }

    /// Draws one label by inverse-CDF sampling.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &L {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (l, m) in &self.atoms {
            acc += m;
            if u < acc {
                return l;
            }
        }
        // Rounding can leave the cumulative total a hair below one.
        self.support().last().unwrap_or(&self.atoms[self.atoms.len() - 1].0)
    }
}

impl FiniteDistribution<bool> {
    /// Bernoulli law on `{false, true}` with `P(true) = p`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidDistribution(format!("Bernoulli parameter {p} outside [0, 1]")));
        }
        FiniteDistribution::new([(false, 1.0 - p), (true, p)])
    }
}

/// A joint law of `(X, Y)` with an optional conditioning coordinate `C`.
///
/// Use `C = ()` for a plain two-variable joint.
#[derive(Clone, Debug, PartialEq)]
pub struct JointPmf<X, Y, C = ()> {
    table: FiniteDistribution<(X, Y, C)>,
}

impl<X: Ord + Clone, Y: Ord + Clone> JointPmf<X, Y, ()> {
    /// A joint of `(X, Y)` from its probability table.
    pub fn new(table: impl IntoIterator<Item = ((X, Y), f64)>) -> Result<Self> {
        let table = FiniteDistribution::from_weights(table.into_iter().map(|((x, y), m)| ((x, y, ()), m)))?;
        Ok(JointPmf { table })
    }

    /// The joint of an input law and a channel `x ↦ P(Y | X = x)`.
    pub fn from_channel(
        input: &FiniteDistribution<X>,
        channel: impl Fn(&X) -> FiniteDistribution<Y>,
    ) -> Result<Self> {
        let mut entries = Vec::new();
        for (x, px) in input.iter().filter(|(_, m)| *m > 0.0) {
            for (y, py) in channel(x).iter() {
                entries.push(((x.clone(), y.clone()), px * py));
            }
        }
        Self::new(entries)
    }
}

impl<X: Ord + Clone, Y: Ord + Clone, C: Ord + Clone> JointPmf<X, Y, C> {
    /// A joint of `(X, Y, C)` where `C` is the conditioning coordinate.
    pub fn with_condition(table: impl IntoIterator<Item = ((X, Y, C), f64)>) -> Result<Self> {
        Ok(JointPmf { table: FiniteDistribution::from_weights(table)? })
    }

    pub fn table(&self) -> &FiniteDistribution<(X, Y, C)> {
        &self.table
    }

    pub fn marginal_x(&self) -> FiniteDistribution<X> {
        self.table.map(|(x, _, _)| x.clone())
    }

    pub fn marginal_y(&self) -> FiniteDistribution<Y> {
        self.table.map(|(_, y, _)| y.clone())
    }

    pub fn marginal_c(&self) -> FiniteDistribution<C> {
        self.table.map(|(_, _, c)| c.clone())
    }

    /// The conditional joint of `(X, Y)` given `C = c`, or `None` when `c`
    /// has zero probability.
    pub fn slice(&self, c: &C) -> Option<JointPmf<X, Y>> {
        let pc: f64 = self.table.iter().filter(|((_, _, k), _)| k == c).map(|(_, m)| m).sum();
        if pc <= 0.0 {
            return None;
        }
        let entries = self
            .table
            .iter()
            .filter(|((_, _, k), _)| k == c)
            .map(|((x, y, _), m)| ((x.clone(), y.clone()), m / pc));
        JointPmf::new(entries).ok()
    }

    /// The same joint with the roles of `X` and `Y` exchanged.
    pub fn swapped(&self) -> JointPmf<Y, X, C> {
        JointPmf { table: self.table.map(|(x, y, c)| (y.clone(), x.clone(), c.clone())) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::CLOSED_FORM_TOL;

    #[test]
    fn rescales_small_normalization_error() {
        let d = FiniteDistribution::new([(0, 0.5), (1, 0.5 + 5e-10)]).unwrap();
        let total: f64 = d.iter().map(|(_, m)| m).sum();
        assert!((total - 1.0).abs() <= CLOSED_FORM_TOL);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(FiniteDistribution::new([(0, 0.5), (1, 0.6)]).is_err());
        assert!(FiniteDistribution::new([(0, -0.1), (1, 1.1)]).is_err());
        assert!(FiniteDistribution::new([(0, 0.5), (0, 0.5)]).is_err());
        assert!(FiniteDistribution::<u8>::new([]).is_err());
        assert!(FiniteDistribution::new([(0, f64::NAN)]).is_err());
    }

    #[test]
    fn from_weights_merges_repeats() {
        let d = FiniteDistribution::from_weights([("a", 0.25), ("b", 0.5), ("a", 0.25)]).unwrap();
        assert_eq!(d.mass(&"a"), 0.5);
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn json_shape_is_atom_list() {
        let d = FiniteDistribution::new([("x".to_string(), 0.25), ("y".to_string(), 0.75)]).unwrap();
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(json, r#"{"atoms":[["x",0.25],["y",0.75]]}"#);
        let back: FiniteDistribution<String> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
        let bad = serde_json::from_str::<FiniteDistribution<i64>>(r#"{"atoms":[[1,0.4]]}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn marginals_are_consistent_with_table() {
        let j = JointPmf::with_condition([
            ((0, 0, 'a'), 0.1),
            ((0, 1, 'a'), 0.2),
            ((1, 1, 'b'), 0.3),
            ((1, 0, 'b'), 0.4),
        ])
        .unwrap();
        assert!((j.marginal_x().mass(&0) - 0.3).abs() < CLOSED_FORM_TOL);
        assert!((j.marginal_y().mass(&1) - 0.5).abs() < CLOSED_FORM_TOL);
        assert!((j.marginal_c().mass(&'b') - 0.7).abs() < CLOSED_FORM_TOL);
        let s = j.slice(&'a').unwrap();
        assert!((s.marginal_y().mass(&1) - 2.0 / 3.0).abs() < CLOSED_FORM_TOL);
        assert!(j.slice(&'z').is_none());
    }

    #[test]
    fn sampling_hits_only_support() {
        use rand::SeedableRng;
        let d = FiniteDistribution::new([(0, 0.0), (1, 0.3), (2, 0.7)]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut counts = [0usize; 3];
        for _ in 0..10_000 {
            counts[*d.sample(&mut rng)] += 1;
        }
        assert_eq!(counts[0], 0);
        assert!((counts[1] as f64 / 10_000.0 - 0.3).abs() < 0.03);
    }
}

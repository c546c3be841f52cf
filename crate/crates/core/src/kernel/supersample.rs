use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// An `n × 2` array of data points; a selector picks one point per row.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<[Z; 2]>", into = "Vec<[Z; 2]>")]
#[serde(bound(serialize = "Z: Serialize + Clone", deserialize = "Z: Deserialize<'de>"))]
pub struct Supersample<Z> {
    rows: Vec<[Z; 2]>,
}

impl<Z> TryFrom<Vec<[Z; 2]>> for Supersample<Z> {
    type Error = Error;
    fn try_from(rows: Vec<[Z; 2]>) -> Result<Self> {
        Supersample::new(rows)
    }
}

impl<Z> From<Supersample<Z>> for Vec<[Z; 2]> {
    fn from(s: Supersample<Z>) -> Self {
        s.rows
    }
}

impl<Z> Supersample<Z> {
    pub fn new(rows: Vec<[Z; 2]>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid("a supersample needs at least one row"));
        }
        Ok(Supersample { rows })
    }

    /// Number of rows, which is the dataset size `n`.
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[[Z; 2]] {
        &self.rows
    }

    pub fn get(&self, row: usize, col: usize) -> &Z {
        &self.rows[row][col]
    }

    /// All `2n` points, row by row.
    pub fn points(&self) -> impl Iterator<Item = &Z> + '_ {
        self.rows.iter().flat_map(|r| r.iter())
    }
}

impl<Z: Clone> Supersample<Z> {
    /// The training set: row `i` contributes column `s_i`.
    pub fn select(&self, s: &Selector) -> Result<Vec<Z>> {
        Error::check_len(self.n(), s.len())?;
        Ok(self.select_unchecked(s))
    }

    /// The ghost set selected by the complement of `s`.
    pub fn ghost(&self, s: &Selector) -> Result<Vec<Z>> {
        self.select(&s.complement())
    }

    pub(crate) fn select_unchecked(&self, s: &Selector) -> Vec<Z> {
        self.rows.iter().zip(s.bits()).map(|(row, &b)| row[b as usize].clone()).collect()
    }

    /// The dataset for selector number `index` (bit `i` of `index` is `s_i`).
    pub(crate) fn select_index(&self, index: u64) -> Vec<Z> {
        self.rows.iter().enumerate().map(|(i, row)| row[((index >> i) & 1) as usize].clone()).collect()
    }
}

/// A bitstring `s ∈ {0,1}^n` choosing column `s_i` of row `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Selector {
    bits: Vec<bool>,
}

impl Selector {
    pub fn new(bits: Vec<bool>) -> Self {
        Selector { bits }
    }

    /// Selector number `index`: `s_i` is bit `i` of `index`.
    pub fn from_index(index: u64, n: usize) -> Self {
        Selector { bits: (0..n).map(|i| (index >> i) & 1 == 1).collect() }
    }

    /// Inverse of [`Selector::from_index`]; only meaningful for `n ≤ 64`.
    pub fn index(&self) -> u64 {
        self.bits.iter().enumerate().map(|(i, &b)| (b as u64) << i).sum()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn complement(&self) -> Selector {
        Selector { bits: self.bits.iter().map(|b| !b).collect() }
    }

    /// All `2^n` selectors in index order.
    pub fn all(n: usize) -> impl Iterator<Item = Selector> {
        (0..1u64 << n).map(move |i| Selector::from_index(i, n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Supersample<&'static str> {
        Supersample::new(vec![["a0", "a1"], ["b0", "b1"]]).unwrap()
    }

    #[test]
    fn selection_rules() {
        let z = grid();
        assert_eq!(z.select(&Selector::new(vec![false, false])).unwrap(), ["a0", "b0"]);
        assert_eq!(z.select(&Selector::new(vec![true, true])).unwrap(), ["a1", "b1"]);
        let s = Selector::new(vec![false, true]);
        assert_eq!(z.select(&s).unwrap(), ["a0", "b1"]);
        assert_eq!(z.ghost(&s).unwrap(), ["a1", "b0"]);
        assert!(z.select(&Selector::new(vec![true])).is_err());
    }

    #[test]
    fn index_round_trip_and_involution() {
        for i in 0..16 {
            let s = Selector::from_index(i, 4);
            assert_eq!(s.index(), i);
            assert_eq!(s.complement().complement(), s);
            assert_eq!(grid_n4().select(&s).unwrap(), grid_n4().select_index(i));
        }
        assert_eq!(Selector::all(3).count(), 8);
    }

    fn grid_n4() -> Supersample<u8> {
        Supersample::new(vec![[0, 1], [2, 3], [4, 5], [6, 7]]).unwrap()
    }

    #[test]
    fn json_is_row_pairs() {
        let json = serde_json::to_string(&grid_n4()).unwrap();
        assert_eq!(json, "[[0,1],[2,3],[4,5],[6,7]]");
        let back: Supersample<u8> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, grid_n4());
        assert!(serde_json::from_str::<Supersample<u8>>("[]").is_err());
    }
}

//! An empirical risk minimizer for thresholds that hides its whole training
//! set in the low-order digits of the threshold it returns.
//!
//! Features live on a decimal grid `x = k·10^{-g}` with integer
//! `lo ≤ k ≤ hi`. The returned threshold is written as a decimal string in
//! three parts:
//!
//! 1. A base value `B·10^{-(g+1)}` with `B = 10·k_min − 5`, halfway between
//!    the smallest positive `k_min` and the grid point below it. With no
//!    positives, `B = 10·hi + 5`, above every grid point.
//! 2. Six guard zeros.
//! 3. The payload: for each example in order, `k − lo` zero-padded to the
//!    number of digits of `hi − lo`, followed by the label digit.
//!
//! The payload moves `t` by less than `10^{-(g+7)}`, so the threshold still
//! falls strictly between two grid points and fits the data whenever any
//! threshold does. For negative `B` the digits extend the magnitude and a
//! leading `-` is written.
//!
//! ```
//! use cmi_lab::learners::{decode_pathological, pathological_erm, DecimalGrid, Example};
//!
//! let grid = DecimalGrid::new(1, 0, 99).unwrap();
//! let z = vec![Example::negative(0.3), Example::positive(1.2)];
//! let h = pathological_erm(&grid, &z).unwrap();
//! assert_eq!(h.as_decimal(), "1.15000000030121");
//! assert_eq!(decode_pathological(&grid, &h).unwrap(), z);
//! ```

use super::{Example, ThresholdHypothesis};
use crate::info::FiniteDistribution;
use crate::kernel::AlgorithmKernel;
use crate::{Error, Result};

const GUARD_DIGITS: usize = 6;
const MAX_DECIMALS: u32 = 9;

/// The points `k·10^{-decimals}` for `lo ≤ k ≤ hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecimalGrid {
    decimals: u32,
    lo: i64,
    hi: i64,
}

impl DecimalGrid {
    pub fn new(decimals: u32, lo: i64, hi: i64) -> Result<Self> {
        if decimals > MAX_DECIMALS {
            return Err(Error::invalid(format!("at most {MAX_DECIMALS} decimals are supported")));
        }
        if lo > hi || lo.abs().max(hi.abs()) > 1 << 40 {
            return Err(Error::invalid(format!("grid index range {lo}..={hi} is empty or too wide")));
        }
        Ok(DecimalGrid { decimals, lo, hi })
    }

    fn scale(&self) -> f64 {
        10f64.powi(self.decimals as i32)
    }

    pub fn point(&self, k: i64) -> f64 {
        k as f64 / self.scale()
    }

    /// Grid index of `x`, which must lie on the grid.
    pub fn index_of(&self, x: f64) -> Result<i64> {
        let scaled = x * self.scale();
        let k = scaled.round();
        if !x.is_finite() || (scaled - k).abs() > 1e-6 || k < self.lo as f64 || k > self.hi as f64 {
            return Err(Error::invalid(format!("{x} is not a point of the grid")));
        }
        Ok(k as i64)
    }

    fn width(&self) -> usize {
        (self.hi - self.lo).to_string().len()
    }
}

/// Returns the zero-loss threshold just below the smallest positive, with
/// the dataset encoded in its trailing digits.
pub fn pathological_erm(grid: &DecimalGrid, data: &[Example<f64>]) -> Result<ThresholdHypothesis> {
    let indexed: Vec<(i64, bool)> = data.iter().map(|e| Ok((grid.index_of(e.x)?, e.y))).collect::<Result<_>>()?;
    let base = match indexed.iter().filter(|(_, y)| *y).map(|(k, _)| *k).min() {
        Some(k) => 10 * k - 5,
        None => 10 * grid.hi + 5,
    };
    let frac_len = grid.decimals as usize + 1;
    let unit = 10u64.pow(frac_len as u32);
    let mag = base.unsigned_abs();
    let mut s = String::new();
    if base < 0 {
        s.push('-');
    }
    s.push_str(&format!("{}.{:0frac_len$}", mag / unit, mag % unit));
    s.push_str(&"0".repeat(GUARD_DIGITS));
    let width = grid.width();
    for (k, y) in indexed {
        s.push_str(&format!("{:0width$}{}", k - grid.lo, u8::from(y)));
    }
    ThresholdHypothesis::from_decimal(&s)
}

/// Recovers the training set from a [`pathological_erm`] output.
pub fn decode_pathological(grid: &DecimalGrid, h: &ThresholdHypothesis) -> Result<Vec<Example<f64>>> {
    let s = h.as_decimal();
    let bad = || Error::Decode(format!("`{s}` is not a pathological threshold for this grid"));
    let (_, frac) = s.trim_start_matches('-').split_once('.').ok_or_else(bad)?;
    let head = grid.decimals as usize + 1 + GUARD_DIGITS;
    let chunk = grid.width() + 1;
    if frac.len() < head || (frac.len() - head) % chunk != 0 || !frac[head - GUARD_DIGITS..head].bytes().all(|b| b == b'0') {
        return Err(bad());
    }
    frac.as_bytes()[head..]
        .chunks(chunk)
        .map(|c| {
            let c = std::str::from_utf8(c).map_err(|_| bad())?;
            let k: i64 = c[..chunk - 1].parse().map_err(|_| bad())?;
            let y = match &c[chunk - 1..] {
                "0" => false,
                "1" => true,
                _ => return Err(bad()),
            };
            Ok(Example::new(grid.point(grid.lo + k), y))
        })
        .collect()
}

/// [`pathological_erm`] as a kernel.
#[derive(Clone, Copy, Debug)]
pub struct PathologicalErm {
    pub grid: DecimalGrid,
}

impl AlgorithmKernel<Example<f64>> for PathologicalErm {
    type Output = ThresholdHypothesis;
    fn evaluate(&self, data: &[Example<f64>]) -> Result<FiniteDistribution<ThresholdHypothesis>> {
        Ok(FiniteDistribution::point(pathological_erm(&self.grid, data)?))
    }
}

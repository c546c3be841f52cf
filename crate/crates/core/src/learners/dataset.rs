use std::cmp::Ordering;
use std::fmt::Debug;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// A feature point that can be totally ordered and written as numeric columns.
pub trait Feature: Clone + Debug + Send + Sync {
    fn total_cmp(&self, other: &Self) -> Ordering;

    /// Parses the feature from the leading columns of a CSV record.
    fn from_columns(columns: &[f64]) -> Result<Self>;

    fn to_columns(&self) -> Vec<f64>;
}

impl Feature for f64 {
    fn total_cmp(&self, other: &Self) -> Ordering {
        f64::total_cmp(self, other)
    }

    fn from_columns(columns: &[f64]) -> Result<Self> {
        match columns {
            [x] if !x.is_nan() => Ok(*x),
            [_] => Err(Error::invalid("feature is NaN")),
            _ => Err(Error::LengthMismatch { expected: 1, got: columns.len() }),
        }
    }

    fn to_columns(&self) -> Vec<f64> {
        vec![*self]
    }
}

/// Points of a finite domain `{0, 1, …, m−1}`.
impl Feature for usize {
    fn total_cmp(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }

    fn from_columns(columns: &[f64]) -> Result<Self> {
        match columns {
            [x] if *x >= 0.0 && x.fract() == 0.0 && *x < 2f64.powi(53) => Ok(*x as usize),
            [x] => Err(Error::invalid(format!("domain index {x} is not a nonnegative integer"))),
            _ => Err(Error::LengthMismatch { expected: 1, got: columns.len() }),
        }
    }

    fn to_columns(&self) -> Vec<f64> {
        vec![*self as f64]
    }
}

/// Points of the Boolean cube, one 0/1 column per coordinate.
impl Feature for Vec<bool> {
    fn total_cmp(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }

    fn from_columns(columns: &[f64]) -> Result<Self> {
        columns
            .iter()
            .map(|&c| match c {
                0.0 => Ok(false),
                1.0 => Ok(true),
                _ => Err(Error::invalid(format!("cube coordinate {c} is not 0 or 1"))),
            })
            .collect()
    }

    fn to_columns(&self) -> Vec<f64> {
        self.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
    }
}

impl Feature for Vec<f64> {
    fn total_cmp(&self, other: &Self) -> Ordering {
        self.iter().zip(other).map(|(a, b)| a.total_cmp(b)).find(|o| o.is_ne()).unwrap_or(self.len().cmp(&other.len()))
    }

    fn from_columns(columns: &[f64]) -> Result<Self> {
        if columns.iter().any(|c| c.is_nan()) {
            return Err(Error::invalid("feature is NaN"));
        }
        Ok(columns.to_vec())
    }

    fn to_columns(&self) -> Vec<f64> {
        self.clone()
    }
}

/// A labelled example `(x, y)` with `y ∈ {0,1}`.
///
/// Examples are ordered by feature, then label, so they can key output
/// tables and be merged when repeated.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(serialize = "X: Serialize", deserialize = "X: Deserialize<'de>"))]
pub struct Example<X> {
    pub x: X,
    #[serde(serialize_with = "label_out", deserialize_with = "label_in")]
    pub y: bool,
}

fn label_out<S: Serializer>(y: &bool, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_u8(u8::from(*y))
}

fn label_in<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<bool, D::Error> {
    match u8::deserialize(d)? {
        0 => Ok(false),
        1 => Ok(true),
        other => Err(serde::de::Error::custom(format!("label {other} is not 0 or 1"))),
    }
}

impl<X> Example<X> {
    pub fn new(x: X, y: bool) -> Self {
        Example { x, y }
    }

    pub fn positive(x: X) -> Self {
        Example { x, y: true }
    }

    pub fn negative(x: X) -> Self {
        Example { x, y: false }
    }
}

impl<X: Feature> PartialEq for Example<X> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl<X: Feature> Eq for Example<X> {}

impl<X: Feature> PartialOrd for Example<X> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<X: Feature> Ord for Example<X> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.x.total_cmp(&other.x).then(self.y.cmp(&other.y))
    }
}

/// A sequence of labelled examples, readable from CSV (feature columns then
/// a final 0/1 label column) and from JSON (`{"pairs": [{"x": …, "y": 0}]}`).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(serialize = "X: Serialize", deserialize = "X: Deserialize<'de>"))]
pub struct LabeledDataset<X> {
    pub pairs: Vec<Example<X>>,
}

impl<X: Feature> PartialEq for LabeledDataset<X> {
    fn eq(&self, other: &Self) -> bool {
        self.pairs == other.pairs
    }
}

impl<X: Feature> LabeledDataset<X> {
    pub fn new(pairs: Vec<Example<X>>) -> Self {
        LabeledDataset { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Reads CSV records; a first row that does not parse as numbers is
    /// taken as a header.
    pub fn read_csv(reader: impl Read) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
        let mut pairs = Vec::new();
        for (row, record) in csv.records().enumerate() {
            let record = record?;
            let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
            let values = match parsed {
                Ok(v) => v,
                Err(_) if row == 0 => continue,
                Err(e) => return Err(Error::invalid(format!("CSV row {}: {e}", row + 1))),
            };
            let Some((&label, features)) = values.split_last() else {
                continue;
            };
            let y = match label {
                0.0 => false,
                1.0 => true,
                _ => return Err(Error::invalid(format!("CSV row {}: label {label} is not 0 or 1", row + 1))),
            };
            pairs.push(Example { x: X::from_columns(features)?, y });
        }
        Ok(LabeledDataset { pairs })
    }

    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let mut csv = csv::Writer::from_writer(writer);
        let width = self.pairs.first().map_or(1, |e| e.x.to_columns().len());
        let mut header: Vec<String> = (1..=width).map(|i| format!("x{i}")).collect();
        header.push("y".into());
        csv.write_record(&header)?;
        for e in &self.pairs {
            let mut record: Vec<String> = e.x.to_columns().iter().map(f64::to_string).collect();
            record.push(u8::from(e.y).to_string());
            csv.write_record(&record)?;
        }
        csv.flush().map_err(|source| Error::Io { path: "<csv>".into(), source })?;
        Ok(())
    }
}

impl<X: Feature + for<'de> Deserialize<'de>> LabeledDataset<X> {
    /// Loads a dataset, choosing the format from the extension (`.json`,
    /// otherwise CSV).
    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|source| Error::Io { path: path.into(), source })?;
        if path.extension().is_some_and(|e| e == "json") {
            Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
        } else {
            Self::read_csv(file)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_with_and_without_header() {
        let data = LabeledDataset::new(vec![Example::negative(1.0), Example::positive(3.5), Example::positive(-2.0)]);
        let mut buf = Vec::new();
        data.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "x1,y\n1,0\n3.5,1\n-2,1\n");
        assert_eq!(LabeledDataset::<f64>::read_csv(buf.as_slice()).unwrap(), data);
        let bare = "1,0\n3.5,1\n-2,1\n";
        assert_eq!(LabeledDataset::<f64>::read_csv(bare.as_bytes()).unwrap(), data);
    }

    #[test]
    fn csv_cube_points() {
        let text = "1,0,1\n0,1,0\n";
        let data = LabeledDataset::<Vec<bool>>::read_csv(text.as_bytes()).unwrap();
        assert_eq!(data.pairs[0], Example::positive(vec![true, false]));
        assert_eq!(data.pairs[1], Example::negative(vec![false, true]));
    }

    #[test]
    fn bad_labels_are_rejected() {
        assert!(LabeledDataset::<f64>::read_csv("x,y\n1,2\n".as_bytes()).is_err());
        assert!(serde_json::from_str::<LabeledDataset<f64>>(r#"{"pairs":[{"x":1.0,"y":2}]}"#).is_err());
        assert!(LabeledDataset::<Vec<bool>>::read_csv("2,1\n".as_bytes()).is_err());
    }

    #[test]
    fn json_labels_are_bits() {
        let data = LabeledDataset::new(vec![Example::positive(4usize)]);
        let text = serde_json::to_string(&data).unwrap();
        assert_eq!(text, r#"{"pairs":[{"x":4,"y":1}]}"#);
        assert_eq!(serde_json::from_str::<LabeledDataset<usize>>(&text).unwrap(), data);
    }

    #[test]
    fn examples_order_by_feature_then_label() {
        let mut v = vec![Example::positive(2.0), Example::negative(2.0), Example::negative(-1.0)];
        v.sort();
        assert_eq!(v, vec![Example::negative(-1.0), Example::negative(2.0), Example::positive(2.0)]);
    }
}

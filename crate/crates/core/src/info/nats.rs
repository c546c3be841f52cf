use std::fmt;
use std::ops::{Add, Mul};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An amount of information in natural-log units.
///
/// The value may be `+∞` when a divergence fails absolute continuity.
/// Finite values computed by this crate are nonnegative up to rounding slop
/// of order `1e-12`; the wrapper does not clamp them.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd)]
pub struct Nats(pub f64);

impl Nats {
    pub const ZERO: Nats = Nats(0.0);
    pub const INFINITY: Nats = Nats(f64::INFINITY);

    /// One bit of information, `ln 2` nats.
    pub const BIT: Nats = Nats(std::f64::consts::LN_2);

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0 == f64::INFINITY
    }

    pub fn to_bits(self) -> f64 {
        self.0 / std::f64::consts::LN_2
    }
}

impl From<f64> for Nats {
    fn from(v: f64) -> Self {
        Nats(v)
    }
}

impl Add for Nats {
    type Output = Nats;
    fn add(self, rhs: Nats) -> Nats {
        Nats(self.0 + rhs.0)
    }
}

impl Mul<f64> for Nats {
    type Output = Nats;
    fn mul(self, rhs: f64) -> Nats {
        Nats(self.0 * rhs)
    }
}

impl std::iter::Sum for Nats {
    fn sum<I: Iterator<Item = Nats>>(iter: I) -> Nats {
        Nats(iter.map(|n| n.0).sum())
    }
}

impl fmt::Display for Nats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf nats")
        } else {
            write!(f, "{} nats", self.0)
        }
    }
}

/// JSON has no infinity literal, so `+∞` is written as the string `"inf"`.
impl Serialize for Nats {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else if self.0 > 0.0 {
            s.serialize_str("inf")
        } else {
            Err(serde::ser::Error::custom(format!("cannot serialize {} nats", self.0)))
        }
    }
}

impl<'de> Deserialize<'de> for Nats {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(Nats(v)),
            Repr::Str(s) if s == "inf" => Ok(Nats::INFINITY),
            Repr::Str(s) => Err(serde::de::Error::custom(format!("invalid nats value `{s}`"))),
        }
    }
}

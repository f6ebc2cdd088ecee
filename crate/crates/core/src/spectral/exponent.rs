use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Integrability or summability exponent in `(0, inf]`.
///
/// Serialized as a JSON number, or as the string `"inf"` for infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(Exponent::Infinite)
        } else if p.is_finite() && p > 0.0 {
            Ok(Exponent::Finite(p))
        } else {
            Err(Error::InvalidExponent(p))
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinite)
    }

    /// Hölder conjugate `p'` with `1/p + 1/p' = 1`; requires `p >= 1`.
    pub fn conjugate(self) -> Result<Self> {
        match self {
            Exponent::Infinite => Ok(Exponent::Finite(1.0)),
            Exponent::Finite(1.0) => Ok(Exponent::Infinite),
            Exponent::Finite(p) if p > 1.0 => Ok(Exponent::Finite(p / (p - 1.0))),
            Exponent::Finite(p) => Err(Error::InvalidExponent(p)),
        }
    }

    /// `1/p`, zero for infinity.
    pub fn reciprocal(self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Infinite => 0.0,
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self.value() <= other.value() {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self.value() >= other.value() {
            self
        } else {
            other
        }
    }

    /// `l^q` aggregation of nonnegative terms, `max` for `q = inf`.
    pub fn aggregate<I: IntoIterator<Item = f64>>(self, terms: I) -> f64 {
        match self {
            Exponent::Infinite => terms.into_iter().fold(0.0, f64::max),
            Exponent::Finite(q) => terms
                .into_iter()
                .map(|t| t.powf(q))
                .sum::<f64>()
                .powf(1.0 / q),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => serializer.serialize_f64(*p),
            Exponent::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct ExponentVisitor;

        impl Visitor<'_> for ExponentVisitor {
            type Value = Exponent;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a positive number or \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Exponent, E> {
                Exponent::new(v).map_err(E::custom)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Exponent, E> {
                self.visit_f64(v as f64)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Exponent, E> {
                self.visit_f64(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Exponent, E> {
                match v {
                    "inf" | "infinity" | "Infinity" => Ok(Exponent::Infinite),
                    other => other
                        .parse::<f64>()
                        .map_err(|_| E::invalid_value(de::Unexpected::Str(other), &self))
                        .and_then(|p| Exponent::new(p).map_err(E::custom)),
                }
            }
        }

        deserializer.deserialize_any(ExponentVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonpositive() {
        assert!(Exponent::new(0.0).is_err());
        assert!(Exponent::new(-1.0).is_err());
        assert!(Exponent::new(f64::NAN).is_err());
        assert_eq!(Exponent::new(f64::INFINITY).unwrap(), Exponent::Infinite);
    }

    #[test]
    fn conjugates() {
        assert_eq!(
            Exponent::Finite(2.0).conjugate().unwrap(),
            Exponent::Finite(2.0)
        );
        assert_eq!(
            Exponent::Finite(1.0).conjugate().unwrap(),
            Exponent::Infinite
        );
        assert_eq!(
            Exponent::Infinite.conjugate().unwrap(),
            Exponent::Finite(1.0)
        );
        assert!(Exponent::Finite(0.5).conjugate().is_err());
    }

    #[test]
    fn serde_encoding() {
        let e: Exponent = serde_json::from_str("\"inf\"").unwrap();
        assert_eq!(e, Exponent::Infinite);
        let e: Exponent = serde_json::from_str("2").unwrap();
        assert_eq!(e, Exponent::Finite(2.0));
        assert!(serde_json::from_str::<Exponent>("0").is_err());
        assert_eq!(
            serde_json::to_string(&Exponent::Infinite).unwrap(),
            "\"inf\""
        );
    }
}

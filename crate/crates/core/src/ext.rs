//! Values in `N ∪ {−∞}` (degrees) and `N ∪ {∞}` (valuations).

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

/// A degree in `N ∪ {−∞}`; `−∞` is reserved for the zero function or
/// the zero polynomial and sorts below every finite value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Degree {
    NegInfinity,
    Finite(u64),
}

pub type FunctionalDegree = Degree;

impl Degree {
    pub fn finite(self) -> Option<u64> {
        match self {
            Degree::NegInfinity => None,
            Degree::Finite(d) => Some(d),
        }
    }

    pub fn is_neg_infinity(self) -> bool {
        matches!(self, Degree::NegInfinity)
    }

    /// Sum in `N ∪ {−∞}`; `−∞` absorbs.
    pub fn saturating_add(self, other: Degree) -> Degree {
        match (self, other) {
            (Degree::Finite(a), Degree::Finite(b)) => Degree::Finite(a + b),
            _ => Degree::NegInfinity,
        }
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::NegInfinity => write!(f, "-inf"),
            Degree::Finite(d) => write!(f, "{d}"),
        }
    }
}

impl Serialize for Degree {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Degree::NegInfinity => s.serialize_str("-inf"),
            Degree::Finite(d) => s.serialize_u64(*d),
        }
    }
}

impl<'de> Deserialize<'de> for Degree {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Degree;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a nonnegative integer or \"-inf\"")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Degree, E> {
                Ok(Degree::Finite(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Degree, E> {
                u64::try_from(v)
                    .map(Degree::Finite)
                    .map_err(|_| E::custom("negative degree"))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Degree, E> {
                match v {
                    "-inf" => Ok(Degree::NegInfinity),
                    _ => Err(E::custom(format!("unknown degree {v:?}"))),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// A p-adic valuation in `N ∪ {∞}`, with `ord_p(0) = ∞`. Also used for
/// lower bounds on valuations, where `∞` means the bound forces an empty
/// zero set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(u64),
    Infinity,
}

impl Valuation {
    pub fn finite(self) -> Option<u64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinity => None,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Infinity => write!(f, "inf"),
            Valuation::Finite(v) => write!(f, "{v}"),
        }
    }
}

impl Serialize for Valuation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Valuation::Infinity => s.serialize_str("inf"),
            Valuation::Finite(v) => s.serialize_u64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for Valuation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Valuation;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a nonnegative integer or \"inf\"")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Valuation, E> {
                Ok(Valuation::Finite(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Valuation, E> {
                u64::try_from(v)
                    .map(Valuation::Finite)
                    .map_err(|_| E::custom("negative valuation"))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Valuation, E> {
                match v {
                    "inf" => Ok(Valuation::Infinity),
                    _ => Err(E::custom(format!("unknown valuation {v:?}"))),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// `ord_p(m)`: the exponent of the largest power of `p` dividing `m`.
pub fn ord_p(m: &BigInt, p: u64) -> Valuation {
    if m.is_zero() {
        return Valuation::Infinity;
    }
    let p = BigInt::from(p);
    let mut m = m.clone();
    let mut v = 0;
    loop {
        let (q, r) = num_integer::Integer::div_rem(&m, &p);
        if !r.is_zero() {
            return Valuation::Finite(v);
        }
        m = q;
        v += 1;
    }
}

pub(crate) fn ord_p_u64(mut m: u64, p: u64) -> Valuation {
    if m == 0 {
        return Valuation::Infinity;
    }
    let mut v = 0;
    while m.is_multiple_of(p) {
        m /= p;
        v += 1;
    }
    Valuation::Finite(v)
}

/// JSON encoding of big integers: a number when it fits in `i64`, else a
/// decimal string. Both forms are accepted on input.
pub(crate) mod big_json {
    use num_bigint::BigInt;
    use num_traits::ToPrimitive;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Small(i64),
        Unsigned(u64),
        Text(String),
    }

    fn to_repr(x: &BigInt) -> Repr {
        match x.to_i64() {
            Some(v) => Repr::Small(v),
            None => Repr::Text(x.to_string()),
        }
    }

    fn from_repr<E: serde::de::Error>(r: Repr) -> Result<BigInt, E> {
        match r {
            Repr::Small(v) => Ok(v.into()),
            Repr::Unsigned(v) => Ok(v.into()),
            Repr::Text(t) => t
                .parse()
                .map_err(|_| E::custom(format!("{t:?} is not an integer"))),
        }
    }

    pub fn serialize<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        to_repr(x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        from_repr(Repr::deserialize(d)?)
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(x: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(x.iter().map(to_repr))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
            Vec::<Repr>::deserialize(d)?
                .into_iter()
                .map(from_repr)
                .collect()
        }
    }
}

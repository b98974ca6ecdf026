//! Explicit weightings and matrices on infinite strong digraphs, each
//! packaged as a [`TruncationFamily`].

mod beaded;
mod example1;
mod example2;
mod finite;
mod gap;
mod prop2;

pub use beaded::{BeadLengths, BeadedWeighting, LengthTail, TargetRule};
pub use example1::{Example1, Example1Sequence};
pub use example2::{Example2, Example2Sequence};
pub use finite::FiniteFamily;
pub use gap::{GapRule, GapTarget};
pub use prop2::{EpsilonSchedule, LengthCertificate, Prop2, Prop2Cycle, Prop2Report};

use serde::{Deserialize, Deserializer};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::family::TruncationFamily;
use crate::scalar::{parse_rational, rational_to_f64, Rational, Scalar};

/// A rational parameter accepted from JSON as `"p/q"`, a decimal string or a
/// plain number.
#[derive(Clone, Debug, PartialEq)]
pub struct Q(pub Rational);

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        let text = match &v {
            Value::String(s) => s.clone(),
            Value::Number(n) => n.to_string(),
            other => return Err(serde::de::Error::custom(format!("expected a rational, got {other}"))),
        };
        parse_rational(&text).map(Q).map_err(serde::de::Error::custom)
    }
}

/// A weight produced by a builder: exact when the construction allows it.
#[derive(Clone, Debug, PartialEq)]
pub enum Num {
    Exact(Rational),
    Float(f64),
}

impl Num {
    pub fn to_f64(&self) -> f64 {
        match self {
            Num::Exact(r) => rational_to_f64(r),
            Num::Float(x) => *x,
        }
    }

    pub(crate) fn to_scalar<T: Scalar>(&self, family: &str) -> Result<T> {
        match self {
            Num::Exact(r) => Ok(T::from_rational(r)),
            Num::Float(x) if !T::EXACT => Ok(T::from_f64(*x)),
            Num::Float(_) => Err(Error::Family {
                family: family.to_string(),
                reason: "weights are irrational for these parameters; use float mode".into(),
            }),
        }
    }
}

/// Names accepted by [`build_named`].
pub const FAMILY_NAMES: [&str; 8] =
    ["example1", "example2", "prop1", "prop2", "corollary1", "theorem2-fast", "loop", "finite"];

/// Builds a family from its CLI name and JSON parameters (`null` or `{}` for
/// defaults).
pub fn build_named<T: Scalar>(name: &str, params: &Value) -> Result<TruncationFamily<T>> {
    let params = if params.is_null() { Value::Object(Default::default()) } else { params.clone() };
    match name {
        "example1" => Example1::from_params(params)?.family(),
        "example2" => Example2::from_params(params)?.family(),
        "prop1" => BeadedWeighting::prop1_from_params(params)?.family(),
        "corollary1" => BeadedWeighting::corollary1_from_params(params)?.family(),
        "theorem2-fast" | "theorem2_fast" => BeadedWeighting::theorem2_from_params(params)?.family(),
        "prop2" => Prop2::from_params(params)?.family(),
        "loop" => FiniteFamily::loop_from_params(params)?.family(),
        "finite" => FiniteFamily::from_params(params)?.family(),
        other => Err(Error::InvalidParameter(format!(
            "unknown family {other:?}; expected one of {}",
            FAMILY_NAMES.join(", ")
        ))),
    }
}

pub(crate) fn from_params<P: serde::de::DeserializeOwned>(family: &str, params: Value) -> Result<P> {
    serde_json::from_value(params)
        .map_err(|e| Error::InvalidParameter(format!("{family} parameters: {e}")))
}

pub(crate) fn family_error(family: &str, reason: impl Into<String>) -> Error {
    Error::Family { family: family.to_string(), reason: reason.into() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;

    #[test]
    fn rational_params_accept_strings_and_numbers() {
        let q: Q = serde_json::from_str("\"3/4\"").unwrap();
        assert_eq!(q.0, rational(3, 4));
        let q: Q = serde_json::from_str("0.6").unwrap();
        assert_eq!(q.0, rational(3, 5));
        assert!(serde_json::from_str::<Q>("[1]").is_err());
    }

    #[test]
    fn every_name_builds_with_defaults() {
        for name in FAMILY_NAMES.iter().filter(|n| **n != "finite") {
            let f = build_named::<f64>(name, &Value::Null).unwrap_or_else(|e| panic!("{name}: {e}"));
            let n = f.presentation().max_order().map_or(3, |m| m.min(3));
            assert_eq!(f.truncate(n).unwrap().order(), n, "{name}");
        }
        assert!(build_named::<f64>("nope", &Value::Null).is_err());
    }
}

//! Target functions g(n) for the fast-gap constructions.

use std::sync::Mutex;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::Deserialize;

use super::Q;
use crate::error::{Error, Result};
use crate::scalar::{rational, Rational};

/// Raw target g(n), n ≥ 1.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GapRule {
    /// g(n) = ratio^n.
    Geometric { ratio: Q },
    /// g(n) = n^-exponent.
    Power { exponent: u32 },
    Constant { value: Q },
    /// g(1), …, g(m); undefined beyond m.
    Explicit { values: Vec<Q> },
}

/// Deepest n for which the normalised minorant is tabulated.
const MAX_DEPTH: usize = 1_000_000;

/// g together with its normalisation g′: g′(1) = min(g(1), 1/2) and
/// g′(n) = min(g(n), g′(n−1)·n/(n+1)). g′ ≤ g, g′ < 1, g′ strictly
/// decreasing and g′(n) ≤ 1/(n+1) → 0.
#[derive(Debug)]
pub struct GapTarget {
    rule: GapRule,
    table: Mutex<Vec<Rational>>,
}

impl Clone for GapTarget {
    fn clone(&self) -> Self {
        Self { rule: self.rule.clone(), table: Mutex::new(self.table.lock().unwrap().clone()) }
    }
}

impl GapTarget {
    pub fn new(rule: GapRule) -> Result<Self> {
        let bad = |m: &str| Err(Error::InvalidParameter(format!("gap target: {m}")));
        match &rule {
            GapRule::Geometric { ratio } if !ratio.0.is_positive() || ratio.0 >= Rational::one() => {
                return bad("ratio must lie in (0, 1)");
            }
            GapRule::Power { exponent: 0 } => return bad("exponent must be positive"),
            GapRule::Constant { value } if !value.0.is_positive() => return bad("value must be positive"),
            GapRule::Explicit { values } if values.is_empty() || values.iter().any(|v| !v.0.is_positive()) => {
                return bad("explicit values must be a nonempty list of positive numbers");
            }
            _ => {}
        }
        Ok(Self { rule, table: Mutex::new(Vec::new()) })
    }

    pub fn geometric(ratio: Rational) -> Result<Self> {
        Self::new(GapRule::Geometric { ratio: Q(ratio) })
    }

    pub fn rule(&self) -> &GapRule {
        &self.rule
    }

    /// g(n) before normalisation.
    pub fn raw(&self, n: usize) -> Result<Rational> {
        assert!(n >= 1);
        Ok(match &self.rule {
            GapRule::Geometric { ratio } => num_traits::pow(ratio.0.clone(), n),
            GapRule::Power { exponent } => {
                Rational::new(BigInt::one(), num_traits::pow(BigInt::from(n), *exponent as usize))
            }
            GapRule::Constant { value } => value.0.clone(),
            GapRule::Explicit { values } => match values.get(n - 1) {
                Some(v) => v.0.clone(),
                None => {
                    return Err(Error::InvalidParameter(format!(
                        "gap target is only given up to n = {}",
                        values.len()
                    )))
                }
            },
        })
    }

    /// g′(n).
    pub fn normalized(&self, n: usize) -> Result<Rational> {
        assert!(n >= 1);
        if n > MAX_DEPTH {
            return Err(Error::InvalidParameter(format!("gap target evaluated beyond n = {MAX_DEPTH}")));
        }
        let mut table = self.table.lock().unwrap();
        while table.len() < n {
            let m = table.len() + 1;
            let g = self.raw(m)?;
            let cap = match table.last() {
                None => rational(1, 2),
                Some(prev) => prev * rational(m as i64, m as i64 + 1),
            };
            table.push(if g < cap { g } else { cap });
        }
        Ok(table[n - 1].clone())
    }

    /// Orders n ≤ m at which normalisation lowered g.
    pub fn normalization_changes(&self, m: usize) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for n in 1..=m {
            if self.normalized(n)? < self.raw(n)? {
                out.push(n);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powers_of_two_are_already_normal() {
        let g = GapTarget::geometric(rational(1, 2)).unwrap();
        for n in 1..40 {
            assert_eq!(g.normalized(n).unwrap(), g.raw(n).unwrap());
        }
        assert!(g.normalization_changes(40).unwrap().is_empty());
    }

    #[test]
    fn non_monotone_input_gets_a_decreasing_minorant() {
        let vals = ["1/3", "1/2", "1/5", "1/4", "2"].iter().map(|s| Q(crate::scalar::parse_rational(s).unwrap()));
        let g = GapTarget::new(GapRule::Explicit { values: vals.collect() }).unwrap();
        let mut prev = rational(1, 1);
        for n in 1..=5 {
            let x = g.normalized(n).unwrap();
            assert!(x <= g.raw(n).unwrap());
            assert!(x < prev);
            assert!(x < rational(1, 1));
            prev = x;
        }
        assert_eq!(g.normalization_changes(5).unwrap(), vec![2, 3, 4, 5]);
        assert!(g.normalized(6).is_err());
    }

    #[test]
    fn constant_target_is_driven_to_zero() {
        let g = GapTarget::new(GapRule::Constant { value: Q(rational(1, 2)) }).unwrap();
        assert_eq!(g.normalized(1).unwrap(), rational(1, 2));
        assert_eq!(g.normalized(3).unwrap(), rational(1, 4));
        assert!(g.normalized(99).unwrap() <= rational(1, 100));
    }

    #[test]
    fn rejects_bad_rules() {
        assert!(GapTarget::geometric(rational(1, 1)).is_err());
        assert!(GapTarget::new(GapRule::Power { exponent: 0 }).is_err());
        assert!(GapTarget::new(GapRule::Explicit { values: vec![] }).is_err());
    }
}

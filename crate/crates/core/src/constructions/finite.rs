//! A finite digraph viewed as a family: truncation n is the leading induced
//! subdigraph on the first n vertices.

use num_traits::Signed;
use serde::Deserialize;

use super::{family_error, from_params, Q};
use crate::digraph::{DigraphFile, WeightedDigraph};
use crate::error::Result;
use crate::family::{DeclaredLimit, Presentation, TruncationFamily};
use crate::scalar::{rational, rational_to_f64, Rational, Scalar};
use crate::spectral::{perron_enclosure, perron_root, DEFAULT_TOL};

/// Above this order the declared limit comes from power iteration only.
const EXACT_LIMIT_ORDER: usize = 40;

#[derive(Clone, Debug)]
pub struct FiniteFamily {
    name: String,
    digraph: WeightedDigraph<Rational>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LoopParams {
    #[serde(default = "half")]
    weight: Q,
}

fn half() -> Q {
    Q(rational(1, 2))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FiniteParams {
    digraph: DigraphFile,
}

impl FiniteFamily {
    pub fn new(name: impl Into<String>, digraph: WeightedDigraph<Rational>) -> Self {
        Self { name: name.into(), digraph }
    }

    /// One vertex with a loop of the given weight.
    pub fn single_loop(weight: Rational) -> Result<Self> {
        if !weight.is_positive() {
            return Err(family_error("loop", "loop weight must be positive"));
        }
        Ok(Self::new("loop", WeightedDigraph::new(1, [(0, 0, weight)])?))
    }

    pub(crate) fn loop_from_params(params: serde_json::Value) -> Result<Self> {
        let p: LoopParams = from_params("loop", params)?;
        Self::single_loop(p.weight.0)
    }

    pub(crate) fn from_params(params: serde_json::Value) -> Result<Self> {
        let p: FiniteParams = from_params("finite", params)?;
        Ok(Self::new("finite", p.digraph.to_digraph()?))
    }

    pub fn family<T: Scalar>(&self) -> Result<TruncationFamily<T>> {
        let d = self.digraph.map_weights(|w| T::from_rational(w));
        let reason = "Perron root of the whole finite digraph".to_string();
        let limit = if self.digraph.order() <= EXACT_LIMIT_ORDER {
            let (lo, hi) = perron_enclosure(&self.digraph, &Rational::new(1.into(), (1u64 << 52).into()));
            DeclaredLimit {
                value: 0.5 * (rational_to_f64(&lo) + rational_to_f64(&hi)),
                exact: (lo == hi).then_some(lo),
                reason,
            }
        } else {
            DeclaredLimit { value: perron_root(&self.digraph.to_f64(), DEFAULT_TOL).value, exact: None, reason }
        };
        Ok(TruncationFamily::new(FinitePresentation { name: self.name.clone(), d, limit }))
    }
}

struct FinitePresentation<T> {
    name: String,
    d: WeightedDigraph<T>,
    limit: DeclaredLimit,
}

impl<T: Scalar> Presentation<T> for FinitePresentation<T> {
    fn name(&self) -> &str {
        &self.name
    }

    fn arcs_from(&self, v: usize, n: usize) -> Result<Vec<(usize, T)>> {
        Ok(self.d.out(v).iter().filter(|(w, _)| *w < n).cloned().collect())
    }

    fn out_weight(&self, v: usize) -> Option<T> {
        Some(self.d.out_weight(v))
    }

    fn limit(&self) -> Option<DeclaredLimit> {
        Some(self.limit.clone())
    }

    fn max_order(&self) -> Option<usize> {
        Some(self.d.order())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loop_family_declares_its_root() {
        let f: TruncationFamily<Rational> = FiniteFamily::single_loop(rational(1, 2)).unwrap().family().unwrap();
        assert_eq!(f.limit().unwrap().exact, Some(rational(1, 2)));
        assert!(f.truncate(2).is_err());
        assert_eq!(f.truncate(1).unwrap().weight(0, 0), Some(&rational(1, 2)));
        assert!(f.metadata().sct_size.is_none());
    }
}

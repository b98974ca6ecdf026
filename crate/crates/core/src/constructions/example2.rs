//! The symmetric star: M(1, k+1) = M(k+1, 1) = a_k. Every cycle has length 2
//! and passes through the hub, and λ(M_n) = b_n with b_n² = Σ_{k<n} a_k².

use std::marker::PhantomData;

use num_traits::Signed;
use serde::Deserialize;

use super::{family_error, from_params, Num, Q};
use crate::error::Result;
use crate::family::{DeclaredLimit, Extent, FamilyMetadata, Presentation, TruncationFamily};
use crate::scalar::{rational_to_f64, Rational, Scalar};
use crate::special::{hurwitz_zeta, zeta};

const NAME: &str = "example2";

/// Below this order b_n is summed directly.
const DIRECT_SUM_LIMIT: usize = 1 << 16;

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Example2Sequence {
    /// a_k = k^{−p}, p > 1/2.
    PowerLaw { p: f64 },
    /// a_k = k^{−(1+ε)/2}.
    EpsilonPowerLaw { epsilon: f64 },
    /// a_1, …, a_m given explicitly.
    Prefix { values: Vec<Q> },
}

#[derive(Clone, Debug)]
pub struct Example2 {
    p: Option<f64>,
    prefix: Vec<Rational>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Params {
    #[serde(default = "default_sequence")]
    sequence: Example2Sequence,
    #[serde(default)]
    sorted: bool,
}

fn default_sequence() -> Example2Sequence {
    Example2Sequence::EpsilonPowerLaw { epsilon: 0.5 }
}

impl Example2 {
    /// `sorted` orders a prefix decreasingly, which makes the leading
    /// truncations the best ones of each order.
    pub fn new(sequence: Example2Sequence, sorted: bool) -> Result<Self> {
        match sequence {
            Example2Sequence::PowerLaw { p } => Self::power_law(p),
            Example2Sequence::EpsilonPowerLaw { epsilon } => Self::power_law((1.0 + epsilon) / 2.0),
            Example2Sequence::Prefix { values } => {
                if values.is_empty() || values.iter().any(|v| !v.0.is_positive()) {
                    return Err(family_error(NAME, "prefix entries must be positive"));
                }
                let mut prefix: Vec<Rational> = values.into_iter().map(|q| q.0).collect();
                if sorted {
                    prefix.sort_by(|a, b| b.cmp(a));
                }
                Ok(Self { p: None, prefix })
            }
        }
    }

    pub fn power_law(p: f64) -> Result<Self> {
        if !(p.is_finite() && 2.0 * p > 1.0) {
            return Err(family_error(NAME, format!("a_k = k^-{p} is not square-summable (need p > 1/2)")));
        }
        Ok(Self { p: Some(p), prefix: Vec::new() })
    }

    pub(crate) fn from_params(params: serde_json::Value) -> Result<Self> {
        let p: Params = from_params(NAME, params)?;
        Self::new(p.sequence, p.sorted)
    }

    pub fn a(&self, k: usize) -> Num {
        assert!(k >= 1);
        match self.p {
            Some(p) => Num::Float((k as f64).powf(-p)),
            None => Num::Exact(self.prefix[k - 1].clone()),
        }
    }

    pub fn max_order(&self) -> Option<usize> {
        self.p.is_none().then_some(self.prefix.len() + 1)
    }

    /// b² = Σ a_k².
    pub fn limit_squared(&self) -> f64 {
        match self.p {
            Some(p) => zeta(2.0 * p),
            None => self.prefix.iter().map(|a| rational_to_f64(&(a * a))).sum(),
        }
    }

    /// b_n² = Σ_{k<n} a_k², exact for a prefix.
    pub fn lambda_squared_exact(&self, n: usize) -> Option<Rational> {
        self.p.is_none().then(|| self.prefix.iter().take(n.saturating_sub(1)).map(|a| a * a).sum())
    }

    /// λ(M_n) = b_n.
    pub fn lambda(&self, n: usize) -> f64 {
        match self.p {
            Some(p) if n > DIRECT_SUM_LIMIT => (zeta(2.0 * p) - hurwitz_zeta(2.0 * p, n as f64)).sqrt(),
            Some(p) => (1..n).map(|k| (k as f64).powf(-2.0 * p)).sum::<f64>().sqrt(),
            None => rational_to_f64(&self.lambda_squared_exact(n).unwrap()).sqrt(),
        }
    }

    /// λ(M) − λ(M_n) = (Σ_{k≥n} a_k²) / (b + b_n), free of cancellation.
    pub fn gap(&self, n: usize) -> f64 {
        let tail = match self.p {
            Some(p) => hurwitz_zeta(2.0 * p, n as f64),
            None => self.prefix.iter().skip(n.saturating_sub(1)).map(|a| rational_to_f64(&(a * a))).sum(),
        };
        tail / (self.limit_squared().sqrt() + self.lambda(n))
    }

    pub fn family<T: Scalar>(&self) -> Result<TruncationFamily<T>> {
        self.a(1).to_scalar::<T>(NAME)?;
        Ok(TruncationFamily::new(Example2Presentation::<T> { e: self.clone(), _t: PhantomData }))
    }
}

struct Example2Presentation<T> {
    e: Example2,
    _t: PhantomData<fn() -> T>,
}

impl<T: Scalar> Presentation<T> for Example2Presentation<T> {
    fn name(&self) -> &str {
        NAME
    }

    fn arcs_from(&self, v: usize, n: usize) -> Result<Vec<(usize, T)>> {
        if v == 0 {
            (1..n).map(|k| Ok((k, self.e.a(k).to_scalar(NAME)?))).collect()
        } else {
            Ok(vec![(0, self.e.a(v).to_scalar(NAME)?)])
        }
    }

    fn metadata(&self) -> FamilyMetadata {
        FamilyMetadata {
            transversal: Some(vec![0]),
            sct_size: Some(Extent::Finite(1)),
            ell_max: Some(Extent::Finite(2)),
            ell_min: Some(2),
        }
    }

    fn limit(&self) -> Option<DeclaredLimit> {
        Some(DeclaredLimit {
            value: self.e.limit_squared().sqrt(),
            exact: None,
            reason: "b = (Σ a_k²)^{1/2}".into(),
        })
    }

    fn lambda_closed_form(&self, n: usize) -> Option<f64> {
        Some(self.e.lambda(n))
    }

    fn max_order(&self) -> Option<usize> {
        self.e.max_order()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;
    use crate::spectral::{perron_enclosure, perron_root};

    #[test]
    fn prefix_point_six_point_eight() {
        let e = Example2::new(
            Example2Sequence::Prefix { values: vec![Q(rational(3, 5)), Q(rational(4, 5))] },
            false,
        )
        .unwrap();
        assert_eq!(e.lambda_squared_exact(3), Some(rational(1, 1)));
        let f: TruncationFamily<Rational> = e.family().unwrap();
        let (lo, hi) = perron_enclosure(&f.truncate(3).unwrap(), &rational(1, 1 << 30));
        assert_eq!((lo, hi), (rational(1, 1), rational(1, 1)));
        // order 2 is the antidiagonal [[0, a1], [a1, 0]]
        let (lo, hi) = perron_enclosure(&f.truncate(2).unwrap(), &rational(1, 1 << 30));
        assert!(lo <= rational(3, 5) && rational(3, 5) <= hi);
        assert!(f.truncate(4).is_err());
    }

    #[test]
    fn closed_form_matches_power_iteration() {
        let e = Example2::power_law(0.75).unwrap();
        let f: TruncationFamily<f64> = e.family().unwrap();
        for n in [2, 10, 100] {
            let r = perron_root(&f.truncate(n).unwrap(), 1e-14).value;
            assert!((r - e.lambda(n)).abs() <= 1e-10 * r, "n = {n}");
        }
        assert_eq!(e.lambda(2), 1.0);
    }

    #[test]
    fn gap_is_consistent_with_difference() {
        let e = Example2::power_law(0.75).unwrap();
        let b = e.limit_squared().sqrt();
        for n in [10, 1000] {
            assert!((b - e.lambda(n) - e.gap(n)).abs() < 1e-12);
        }
        // both branches of b_n agree at the switch-over
        let n = DIRECT_SUM_LIMIT + 1;
        let direct = (1..n).map(|k| (k as f64).powf(-1.5)).sum::<f64>().sqrt();
        assert!((direct - e.lambda(n)).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_square_summable() {
        assert!(Example2::power_law(0.5).is_err());
        assert!(Example2::new(Example2Sequence::EpsilonPowerLaw { epsilon: 0.0 }, false).is_err());
    }

    #[test]
    fn sorting_prefix() {
        let e = Example2::new(
            Example2Sequence::Prefix { values: vec![Q(rational(1, 5)), Q(rational(4, 5))] },
            true,
        )
        .unwrap();
        assert_eq!(e.a(1), Num::Exact(rational(4, 5)));
    }
}

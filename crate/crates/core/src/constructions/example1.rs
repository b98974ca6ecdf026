//! The path with back-arcs to vertex 1: arcs (n, n+1), (n, 1) and the loop
//! at 1, weighted so that the cycle γ_n = 1 → 2 → … → n → 1 has weight f_n.
//!
//! With the hazard x_n = f_n / (1 − F_{n−1}) (F the partial sums):
//! S(1,1) = a·x_1, S(n, n+1) = 1 − x_n, S(n, 1) = x_n for n ≥ 2.

use std::marker::PhantomData;

use num_traits::{One, Signed, Zero};
use serde::Deserialize;

use super::{family_error, from_params, Num, Q};
use crate::error::Result;
use crate::family::{DeclaredLimit, Extent, FamilyMetadata, Presentation, TruncationFamily};
use crate::scalar::{rational, Rational, Scalar};
use crate::special::{hurwitz_zeta, zeta};

const NAME: &str = "example1";

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Example1Sequence {
    /// f_n = (1 − q) q^{n−1}.
    Geometric { q: Q },
    /// f_n = n^{−(1+ε)} / ζ(1+ε).
    PowerLaw { epsilon: f64 },
    /// f_1, …, f_m given explicitly.
    Prefix { values: Vec<Q> },
}

#[derive(Clone, Debug)]
pub struct Example1 {
    a: Rational,
    sequence: Example1Sequence,
    /// Hazards for a prefix sequence.
    hazards: Vec<Rational>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Params {
    #[serde(default = "default_a")]
    a: Q,
    #[serde(default = "default_sequence")]
    sequence: Example1Sequence,
}

fn default_a() -> Q {
    Q(rational(1, 2))
}

fn default_sequence() -> Example1Sequence {
    Example1Sequence::PowerLaw { epsilon: 0.5 }
}

impl Example1 {
    pub fn new(a: Rational, sequence: Example1Sequence) -> Result<Self> {
        if !a.is_positive() || a >= Rational::one() {
            return Err(family_error(NAME, "a must lie in (0, 1)"));
        }
        let mut hazards = Vec::new();
        match &sequence {
            Example1Sequence::Geometric { q } => {
                if !q.0.is_positive() || q.0 >= Rational::one() {
                    return Err(family_error(NAME, "q must lie in (0, 1)"));
                }
            }
            Example1Sequence::PowerLaw { epsilon } => {
                if !(*epsilon > 0.0 && epsilon.is_finite()) {
                    return Err(family_error(NAME, "epsilon must be positive"));
                }
            }
            Example1Sequence::Prefix { values } => {
                if values.is_empty() {
                    return Err(family_error(NAME, "empty sequence"));
                }
                let mut tail = Rational::one();
                for (i, f) in values.iter().enumerate() {
                    if !f.0.is_positive() {
                        return Err(family_error(NAME, format!("f_{} is not positive", i + 1)));
                    }
                    if tail <= Rational::zero() {
                        return Err(family_error(NAME, format!("partial sum F_{} reaches 1", i)));
                    }
                    hazards.push(&f.0 / &tail);
                    tail -= &f.0;
                }
                if tail.is_negative() {
                    return Err(family_error(NAME, "the sequence sums to more than 1"));
                }
            }
        }
        Ok(Self { a, sequence, hazards })
    }

    /// The power-law schedule with a = 1/2.
    pub fn power_law(epsilon: f64) -> Result<Self> {
        Self::new(rational(1, 2), Example1Sequence::PowerLaw { epsilon })
    }

    pub(crate) fn from_params(params: serde_json::Value) -> Result<Self> {
        let p: Params = from_params(NAME, params)?;
        Self::new(p.a.0, p.sequence)
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    /// Number of vertices the sequence supports, if finite.
    pub fn max_order(&self) -> Option<usize> {
        match &self.sequence {
            Example1Sequence::Prefix { values } => Some(values.len()),
            _ => None,
        }
    }

    /// f_n, n ≥ 1.
    pub fn f(&self, n: usize) -> Num {
        assert!(n >= 1);
        match &self.sequence {
            Example1Sequence::Geometric { q } => {
                Num::Exact((Rational::one() - &q.0) * num_traits::pow(q.0.clone(), n - 1))
            }
            Example1Sequence::PowerLaw { epsilon } => {
                let s = 1.0 + epsilon;
                Num::Float((n as f64).powf(-s) / zeta(s))
            }
            Example1Sequence::Prefix { values } => Num::Exact(values[n - 1].0.clone()),
        }
    }

    /// x_n = f_n / (1 − F_{n−1}).
    pub fn hazard(&self, n: usize) -> Num {
        assert!(n >= 1);
        match &self.sequence {
            Example1Sequence::Geometric { q } => Num::Exact(Rational::one() - &q.0),
            Example1Sequence::PowerLaw { epsilon } => {
                let s = 1.0 + epsilon;
                Num::Float((n as f64).powf(-s) / hurwitz_zeta(s, n as f64))
            }
            Example1Sequence::Prefix { .. } => Num::Exact(self.hazards[n - 1].clone()),
        }
    }

    fn complement(x: &Num) -> Num {
        match x {
            Num::Exact(r) => Num::Exact(Rational::one() - r),
            Num::Float(v) => Num::Float(1.0 - v),
        }
    }

    fn loop_weight(&self) -> Num {
        match self.hazard(1) {
            Num::Exact(r) => Num::Exact(&self.a * r),
            Num::Float(v) => Num::Float(crate::scalar::rational_to_f64(&self.a) * v),
        }
    }

    /// ω_S(D, n) = max(a·f_1, max_{2≤k≤n} f_k^{1/k}): every cycle is γ_k or
    /// the loop.
    pub fn omega_closed_form(&self, n: usize) -> f64 {
        let mut best = self.loop_weight().to_f64();
        for k in 2..=n {
            let g = match self.f(k) {
                Num::Float(x) => x.ln() / k as f64,
                Num::Exact(r) => crate::scalar::rational_to_f64(&r).ln() / k as f64,
            };
            best = best.max(g.exp());
        }
        best
    }

    /// (1 − a)·f_1, a lower bound for det(I − S_n) on every truncation.
    pub fn det_lower_bound(&self) -> f64 {
        (1.0 - crate::scalar::rational_to_f64(&self.a)) * self.f(1).to_f64()
    }

    /// Exact when the sequence is rational.
    pub fn det_lower_bound_exact(&self) -> Option<Rational> {
        match self.f(1) {
            Num::Exact(f1) => Some((Rational::one() - &self.a) * f1),
            Num::Float(_) => None,
        }
    }

    pub fn family<T: Scalar>(&self) -> Result<TruncationFamily<T>> {
        // fail early in exact mode
        self.hazard(1).to_scalar::<T>(NAME)?;
        Ok(TruncationFamily::new(Example1Presentation::<T> { e: self.clone(), _t: PhantomData }))
    }
}

struct Example1Presentation<T> {
    e: Example1,
    _t: PhantomData<fn() -> T>,
}

impl<T: Scalar> Presentation<T> for Example1Presentation<T> {
    fn name(&self) -> &str {
        NAME
    }

    fn arcs_from(&self, v: usize, n: usize) -> Result<Vec<(usize, T)>> {
        let e = &self.e;
        let x = e.hazard(v + 1);
        let mut arcs = Vec::with_capacity(2);
        if v == 0 {
            arcs.push((0, e.loop_weight().to_scalar(NAME)?));
        } else {
            arcs.push((0, x.to_scalar(NAME)?));
        }
        let forward = Example1::complement(&x);
        if v + 1 < n && forward.to_f64() > 0.0 {
            arcs.push((v + 1, forward.to_scalar(NAME)?));
        }
        Ok(arcs)
    }

    fn out_weight(&self, v: usize) -> Option<T> {
        if v == 0 {
            let w = match (self.e.loop_weight(), Example1::complement(&self.e.hazard(1))) {
                (Num::Exact(a), Num::Exact(b)) => Num::Exact(a + b),
                (a, b) => Num::Float(a.to_f64() + b.to_f64()),
            };
            w.to_scalar(NAME).ok()
        } else {
            Some(T::one())
        }
    }

    fn metadata(&self) -> FamilyMetadata {
        FamilyMetadata {
            transversal: Some(vec![0]),
            sct_size: Some(Extent::Finite(1)),
            ell_max: Some(match self.e.max_order() {
                Some(m) => Extent::Finite(m),
                None => Extent::Infinite,
            }),
            ell_min: Some(1),
        }
    }

    fn limit(&self) -> Option<DeclaredLimit> {
        match &self.e.sequence {
            Example1Sequence::PowerLaw { .. } => Some(DeclaredLimit {
                value: 1.0,
                exact: Some(Rational::one()),
                reason: "cycle gains f_n^{1/n} tend to 1 in a substochastic weighting".into(),
            }),
            Example1Sequence::Geometric { q } => {
                // z = 1/λ solves (1−q)q(1−a) z² + (a(1−q) + q) z − 1 = 0
                let q = crate::scalar::rational_to_f64(&q.0);
                let a = crate::scalar::rational_to_f64(&self.e.a);
                let (qa, qb) = ((1.0 - q) * q * (1.0 - a), a * (1.0 - q) + q);
                let z = 2.0 / (qb + (qb * qb + 4.0 * qa).sqrt());
                Some(DeclaredLimit {
                    value: 1.0 / z,
                    exact: None,
                    reason: "root of the cycle generating function a f_1 z + Σ f_n z^n = 1".into(),
                })
            }
            Example1Sequence::Prefix { .. } => None,
        }
    }

    fn max_order(&self) -> Option<usize> {
        self.e.max_order()
    }

    fn all_ones_witness(&self) -> Option<usize> {
        // all-ones is sub-invariant for λ = 1, strict at vertex 1 since a < 1
        matches!(self.e.sequence, Example1Sequence::PowerLaw { .. }).then_some(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycles::Cycle;

    fn geometric_half() -> Example1 {
        Example1::new(rational(1, 2), Example1Sequence::Geometric { q: Q(rational(1, 2)) }).unwrap()
    }

    #[test]
    fn telescoping_cycle_weights_equal_f() {
        let e = geometric_half();
        let f: TruncationFamily<Rational> = e.family().unwrap();
        let d = f.truncate(30).unwrap();
        for n in 2..=30 {
            let vs: Vec<usize> = (0..n).collect();
            let c = Cycle::from_vertices(&d, &vs).unwrap();
            assert_eq!(c.weight, num_traits::pow(rational(1, 2), n), "n = {n}");
        }
    }

    #[test]
    fn out_weights_of_geometric_schedule() {
        let f: TruncationFamily<Rational> = geometric_half().family().unwrap();
        let d = f.truncate(12).unwrap();
        // vertex 1: a f_1 + 1 − f_1 = 1/4 + 1/2
        assert_eq!(f.presentation().out_weight(0), Some(rational(3, 4)));
        for v in 1..11 {
            assert_eq!(d.out_weight(v), Rational::one());
        }
    }

    #[test]
    fn prefix_reaching_one_is_rejected() {
        let vals = vec![Q(rational(1, 2)), Q(rational(1, 2)), Q(rational(1, 8))];
        assert!(Example1::new(rational(1, 2), Example1Sequence::Prefix { values: vals }).is_err());
        let ok = vec![Q(rational(1, 2)), Q(rational(1, 4))];
        let e = Example1::new(rational(1, 2), Example1Sequence::Prefix { values: ok }).unwrap();
        assert_eq!(e.max_order(), Some(2));
        assert_eq!(e.hazard(2), Num::Exact(rational(1, 2)));
    }

    #[test]
    fn power_law_needs_float_mode() {
        let e = Example1::power_law(0.5).unwrap();
        assert!(e.family::<Rational>().is_err());
        let f: TruncationFamily<f64> = e.family().unwrap();
        let d = f.truncate(50).unwrap();
        for v in 1..49 {
            assert!((d.out_weight(v) - 1.0).abs() < 1e-15);
        }
        let det_lb = e.det_lower_bound();
        assert!((det_lb - 0.5 / zeta(1.5)).abs() < 1e-15);
    }

    #[test]
    fn geometric_declared_limit_solves_the_generating_equation() {
        let f: TruncationFamily<f64> = geometric_half().family().unwrap();
        let lam = f.limit().unwrap().value;
        let z = 1.0 / lam;
        // a f_1 z + Σ_{n≥2} 2^{-n} z^n = 1
        let s: f64 = 0.25 * z + (2..200).map(|n| (0.5 * z).powi(n)).sum::<f64>();
        assert!((s - 1.0).abs() < 1e-12, "{s}");
        let big = crate::spectral::perron_root(&f.truncate(200).unwrap(), 1e-13).value;
        assert!((big - lam).abs() < 1e-9);
    }
}

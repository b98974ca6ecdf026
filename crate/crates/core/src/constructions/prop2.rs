//! A strictly substochastic weighting of a union of nested cycles
//! γ_k = 1 → 2 → … → ℓ_k → 1 whose gains tend to 1, on the host of Example 1.
//!
//! Arc weights on Γ = ∪ γ_k: an arc leaving a vertex first reached by γ_k
//! gets 1 − ε_k; the one new arc leaving an old vertex, (ℓ_{k−1}, ℓ_{k−1}+1),
//! gets ε_k/2^k. The lengths ℓ_k are chosen by doubling so that
//! ((1−ε_k)/(1−2ε_k))^{ℓ_k} > (2^k(1−ε_k)/ε_k)^{L_{k−1}}, L_{k−1} = ℓ_1 + … + ℓ_{k−1}.

use std::marker::PhantomData;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{family_error, from_params, Q};
use crate::digraph::{classify_out_weights, WeightingTag};
use crate::error::Result;
use crate::family::{Extent, FamilyMetadata, Presentation, TruncationFamily};
use crate::interval::{ln_enclosure, Interval, IntervalSummary};
use crate::scalar::{rational, rational_to_f64, Rational, Scalar};

const NAME: &str = "prop2";

/// Powers above this length are compared through log enclosures.
const DIRECT_LIMIT: u128 = 1 << 17;

/// ε_1 > ε_2 > … > 0 with ε_1 < 1/2.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonSchedule {
    eps: Vec<Rational>,
}

impl EpsilonSchedule {
    pub fn new(eps: Vec<Rational>) -> Result<Self> {
        if eps.is_empty() {
            return Err(family_error(NAME, "empty epsilon schedule"));
        }
        if eps.iter().any(|e| !e.is_positive() || *e >= rational(1, 2)) {
            return Err(family_error(NAME, "every ε_k must lie in (0, 1/2)"));
        }
        if eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(family_error(NAME, "ε_k must be strictly decreasing"));
        }
        Ok(Self { eps })
    }

    /// ε_k = 4^{−k}, k = 1..=count.
    pub fn power_of_four(count: usize) -> Result<Self> {
        Self::new((1..=count).map(|k| Rational::new(BigInt::one(), BigInt::from(4).pow(k as u32))).collect())
    }

    pub fn len(&self) -> usize {
        self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps.is_empty()
    }

    /// ε_k, k ≥ 1.
    pub fn get(&self, k: usize) -> &Rational {
        &self.eps[k - 1]
    }
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum EpsilonParams {
    PowerOfFour { count: usize },
    Explicit { values: Vec<Q> },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Params {
    #[serde(default = "default_eps")]
    epsilon: EpsilonParams,
    #[serde(default = "one")]
    first_length: u64,
}

fn default_eps() -> EpsilonParams {
    EpsilonParams::PowerOfFour { count: 4 }
}

fn one() -> u64 {
    1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertMethod {
    /// Both sides expanded as exact rationals.
    Direct,
    /// Rigorous rational enclosures of the logarithms.
    LogEnclosure,
}

/// Certification of the length inequality for one k ≥ 2.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LengthCertificate {
    pub holds: bool,
    pub method: CertMethod,
    /// ℓ_k ln A − L_{k−1} ln B.
    pub log_margin: IntervalSummary,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Prop2Cycle {
    pub k: usize,
    pub epsilon: String,
    pub length: u128,
    /// L_k = ℓ_1 + … + ℓ_k.
    pub cumulative: u128,
    pub inequality: Option<LengthCertificate>,
    pub gain: f64,
    pub gain_lower_bound: String,
    pub gain_certified: bool,
    pub gain_method: CertMethod,
    /// Largest Γ out-weight over vertices first reached by γ_k.
    pub max_new_out_weight: String,
    pub out_weight_bound: String,
    pub out_weight_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Prop2Report {
    pub cycles: Vec<Prop2Cycle>,
    /// Class of the weighting restricted to Γ.
    pub gamma_class: WeightingTag,
    /// Certified: 1 − 2ε_K ≤ ω_S(D) ≤ 1.
    pub omega_lower_bound: String,
    pub all_certified: bool,
}

#[derive(Clone, Debug)]
pub struct Prop2 {
    eps: EpsilonSchedule,
    lengths: Vec<u128>,
    report: Prop2Report,
}

impl Prop2 {
    pub fn new(eps: EpsilonSchedule, first_length: u64) -> Result<Self> {
        if first_length == 0 {
            return Err(family_error(NAME, "ℓ_1 must be positive"));
        }
        let mut lengths = vec![first_length as u128];
        let mut certs = vec![None];
        for k in 2..=eps.len() {
            let total: u128 = lengths.iter().sum();
            let (l, cert) = choose_length(k, eps.get(k), total)?;
            lengths.push(l);
            certs.push(Some(cert));
        }
        let mut cycles = Vec::new();
        let mut class_weights = Vec::new();
        let mut log_prefix = Interval::point(Rational::zero());
        let mut prefix_exact = Some(Rational::one());
        let mut cumulative = 0u128;
        for k in 1..=eps.len() {
            let e = eps.get(k);
            let l = lengths[k - 1];
            let prev = if k == 1 { 0 } else { lengths[k - 2] };
            cumulative += l;
            let one_minus = Rational::one() - e;
            let bridge = bridge_weight(k, e);
            let run = l - prev;
            let lower = Rational::one() - e * rational(2, 1);
            // gain of γ_k: P_{k−1} · bridge · (1−ε_k)^{ℓ_k − ℓ_{k−1}}
            let (gain, certified, method) = if k == 1 {
                (rational_to_f64(&one_minus), one_minus >= lower, CertMethod::Direct)
            } else if l <= DIRECT_LIMIT {
                let w = prefix_exact.clone().expect("short prefix is exact")
                    * &bridge
                    * num_traits::pow(one_minus.clone(), run as usize);
                let ok = w >= num_traits::pow(lower.clone(), l as usize);
                (rational_to_f64(&w).ln() / l as f64, ok, CertMethod::Direct)
            } else {
                let ln_w = log_prefix
                    .add(&ln_enclosure(&bridge))
                    .add(&ln_enclosure(&one_minus).scale(&big(run)));
                let margin = ln_w.sub(&ln_enclosure(&lower).scale(&big(l)));
                (ln_w.midpoint() / l as f64, margin.is_nonnegative(), CertMethod::LogEnclosure)
            };
            let gain = if k == 1 { gain } else { gain.exp() };
            // arcs (i, i+1), i < ℓ_k, feed the next prefix
            let interior = run - 1;
            log_prefix = log_prefix
                .add(&if k == 1 { Interval::point(Rational::zero()) } else { ln_enclosure(&bridge) })
                .add(&ln_enclosure(&one_minus).scale(&big(interior)))
                .rounded(crate::interval::LOG_BITS);
            prefix_exact = match prefix_exact {
                Some(p) if cumulative <= DIRECT_LIMIT => {
                    let b = if k == 1 { Rational::one() } else { bridge.clone() };
                    Some(p * b * num_traits::pow(one_minus.clone(), interior as usize))
                }
                _ => None,
            };
            // out-weights within Γ of vertices first reached by γ_k
            let endpoint = if k < eps.len() { &one_minus + bridge_weight(k + 1, eps.get(k + 1)) } else { one_minus.clone() };
            let max_new = if run >= 2 { Rational::max_of(endpoint.clone(), one_minus.clone()) } else { endpoint.clone() };
            if run >= 2 {
                class_weights.push(one_minus.clone());
            }
            class_weights.push(endpoint);
            let bound = Rational::one() - e / rational(2, 1);
            cycles.push(Prop2Cycle {
                k,
                epsilon: e.to_string(),
                length: l,
                cumulative,
                inequality: certs[k - 1].clone(),
                gain,
                gain_lower_bound: lower.to_string(),
                gain_certified: certified,
                gain_method: method,
                out_weight_ok: max_new <= bound,
                max_new_out_weight: max_new.to_string(),
                out_weight_bound: bound.to_string(),
            });
        }
        let gamma_class = classify_out_weights(class_weights, 0.0).tag;
        let all_certified = cycles.iter().all(|c| {
            c.gain_certified && c.out_weight_ok && c.inequality.as_ref().is_none_or(|i| i.holds)
        }) && gamma_class == WeightingTag::StrictlySubstochastic;
        let last = eps.get(eps.len());
        let report = Prop2Report {
            cycles,
            gamma_class,
            omega_lower_bound: (Rational::one() - last * rational(2, 1)).to_string(),
            all_certified,
        };
        Ok(Self { eps, lengths, report })
    }

    pub fn from_params(params: serde_json::Value) -> Result<Self> {
        let p: Params = from_params(NAME, params)?;
        let eps = match p.epsilon {
            EpsilonParams::PowerOfFour { count } => EpsilonSchedule::power_of_four(count)?,
            EpsilonParams::Explicit { values } => EpsilonSchedule::new(values.into_iter().map(|q| q.0).collect())?,
        };
        Self::new(eps, p.first_length)
    }

    pub fn lengths(&self) -> &[u128] {
        &self.lengths
    }

    pub fn report(&self) -> &Prop2Report {
        &self.report
    }

    pub fn schedule(&self) -> &EpsilonSchedule {
        &self.eps
    }

    /// The weighting of the whole host: slack of each vertex spread over its
    /// arcs outside Γ, vertex 1 keeping half of its slack.
    pub fn family<T: Scalar>(&self) -> Result<TruncationFamily<T>> {
        Ok(TruncationFamily::new(Prop2Presentation::<T> { p: self.clone(), gamma_only: false, _t: PhantomData }))
    }

    /// Only the arcs of Γ.
    pub fn gamma_family<T: Scalar>(&self) -> Result<TruncationFamily<T>> {
        Ok(TruncationFamily::new(Prop2Presentation::<T> { p: self.clone(), gamma_only: true, _t: PhantomData }))
    }

    /// Run k containing the 1-based vertex i: ℓ_{k−1} < i ≤ ℓ_k.
    fn run_of(&self, i: u128) -> Option<usize> {
        let k = self.lengths.partition_point(|&l| l < i);
        (k < self.lengths.len()).then_some(k + 1)
    }
}

fn big(x: u128) -> Rational {
    Rational::from_integer(BigInt::from(x))
}

/// ε_k / 2^k.
fn bridge_weight(k: usize, e: &Rational) -> Rational {
    e / Rational::from_integer(BigInt::one() << k)
}

/// Smallest (L+1)·2^j satisfying the length inequality, with its certificate.
fn choose_length(k: usize, e: &Rational, total: u128) -> Result<(u128, LengthCertificate)> {
    let one_minus = Rational::one() - e;
    let a = &one_minus / (Rational::one() - e * rational(2, 1));
    let b = Rational::from_integer(BigInt::one() << k) * &one_minus / e;
    let (ln_a, ln_b) = (ln_enclosure(&a), ln_enclosure(&b));
    let margin = |l: u128| ln_a.scale(&big(l)).sub(&ln_b.scale(&big(total)));
    let mut l = total + 1;
    loop {
        let m = margin(l);
        if m.is_positive() {
            let cert = if l <= DIRECT_LIMIT {
                let lhs = num_traits::pow(a.clone(), l as usize);
                let rhs = num_traits::pow(b.clone(), total as usize);
                LengthCertificate { holds: lhs > rhs, method: CertMethod::Direct, log_margin: m.summary() }
            } else {
                LengthCertificate { holds: true, method: CertMethod::LogEnclosure, log_margin: m.summary() }
            };
            return Ok((l, cert));
        }
        l = l.checked_mul(2).ok_or_else(|| family_error(NAME, format!("ℓ_{k} overflows 128 bits")))?;
    }
}

struct Prop2Presentation<T> {
    p: Prop2,
    gamma_only: bool,
    _t: PhantomData<fn() -> T>,
}

impl<T: Scalar> Presentation<T> for Prop2Presentation<T> {
    fn name(&self) -> &str {
        if self.gamma_only {
            "prop2-gamma"
        } else {
            NAME
        }
    }

    fn arcs_from(&self, v: usize, n: usize) -> Result<Vec<(usize, T)>> {
        let i = v as u128 + 1;
        let k = self.p.run_of(i).ok_or_else(|| family_error(NAME, format!("vertex {i} lies beyond ℓ_K")))?;
        let e = self.p.eps.get(k);
        let l = self.p.lengths[k - 1];
        let one_minus = T::from_rational(&(Rational::one() - e));
        let mut arcs = Vec::with_capacity(2);
        let push = |arcs: &mut Vec<(usize, T)>, w: usize, x: T| {
            if w < n {
                arcs.push((w, x));
            }
        };
        if i < l {
            push(&mut arcs, v + 1, one_minus);
            if !self.gamma_only {
                let slack = if v == 0 { e / rational(2, 1) } else { e.clone() };
                push(&mut arcs, 0, T::from_rational(&slack));
            }
        } else {
            push(&mut arcs, 0, one_minus);
            if k < self.p.eps.len() {
                push(&mut arcs, v + 1, T::from_rational(&bridge_weight(k + 1, self.p.eps.get(k + 1))));
            }
        }
        Ok(arcs)
    }

    fn metadata(&self) -> FamilyMetadata {
        FamilyMetadata {
            transversal: Some(vec![0]),
            sct_size: Some(Extent::Finite(1)),
            ell_max: None,
            ell_min: Some(1),
        }
    }

    fn max_order(&self) -> Option<usize> {
        Some(self.p.lengths.last().copied().unwrap_or(0).min(usize::MAX as u128) as usize)
    }

    fn notes(&self) -> Vec<String> {
        vec![format!("weighting defined on vertices 1..={}", self.p.lengths.last().unwrap())]
    }
}

impl Prop2 {
    /// Exact weight of γ_k, for k with ℓ_k small enough to expand.
    pub fn gamma_weight_exact(&self, k: usize) -> Option<Rational> {
        let l = *self.lengths.get(k - 1)?;
        if l > DIRECT_LIMIT {
            return None;
        }
        let mut w = Rational::one();
        for i in 1..=l {
            let run = self.run_of(i)?;
            let e = self.eps.get(run);
            let x = if i == l {
                Rational::one() - e
            } else if run < k && i == self.lengths[run - 1] {
                bridge_weight(run + 1, self.eps.get(run + 1))
            } else {
                Rational::one() - e
            };
            w *= x;
        }
        Some(w)
    }

    pub fn gains_f64(&self) -> Vec<f64> {
        self.report.cycles.iter().map(|c| c.gain).collect()
    }

    pub fn length_u64(&self, k: usize) -> Option<u64> {
        self.lengths.get(k - 1).and_then(|l| l.to_u64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycles::Cycle;
    use crate::digraph::classify_weighting;

    #[test]
    fn schedule_validation() {
        assert!(EpsilonSchedule::new(vec![rational(1, 2)]).is_err());
        assert!(EpsilonSchedule::new(vec![rational(1, 8), rational(1, 4)]).is_err());
        assert!(EpsilonSchedule::new(vec![]).is_err());
        assert_eq!(EpsilonSchedule::power_of_four(3).unwrap().get(3), &rational(1, 64));
    }

    #[test]
    fn first_lengths_by_doubling() {
        let p = Prop2::new(EpsilonSchedule::power_of_four(3).unwrap(), 1).unwrap();
        // (15/14)^ℓ > 60 first holds at ℓ = 64 among 2, 4, 8, …
        assert_eq!(p.lengths(), &[1, 64, 33_792]);
        assert!(p.report().all_certified, "{:#?}", p.report());
    }

    #[test]
    fn gains_match_explicit_cycle_products() {
        let p = Prop2::new(EpsilonSchedule::power_of_four(2).unwrap(), 1).unwrap();
        let f: TruncationFamily<Rational> = p.gamma_family().unwrap();
        let d = f.truncate(64).unwrap();
        let c1 = Cycle::from_vertices(&d, &[0]).unwrap();
        assert_eq!(c1.weight, rational(3, 4));
        let vs: Vec<usize> = (0..64).collect();
        let c2 = Cycle::from_vertices(&d, &vs).unwrap();
        assert_eq!(Some(c2.weight.clone()), p.gamma_weight_exact(2));
        // 1/64 · (15/16)^63
        assert_eq!(c2.weight, rational(1, 64) * num_traits::pow(rational(15, 16), 63));
        assert!(c2.weight >= num_traits::pow(rational(7, 8), 64));
        assert_eq!(classify_weighting(&d, 0.0).tag, WeightingTag::StrictlySubstochastic);
    }

    #[test]
    fn full_weighting_is_truthly_substochastic() {
        let p = Prop2::new(EpsilonSchedule::power_of_four(2).unwrap(), 1).unwrap();
        let f: TruncationFamily<Rational> = p.family().unwrap();
        let d = f.truncate(64).unwrap();
        for v in 1..63 {
            assert_eq!(d.out_weight(v), Rational::one());
        }
        assert!(d.out_weight(0) < Rational::one());
        assert!(f.truncate(65).is_err());
    }

    #[test]
    fn longer_first_cycle() {
        let p = Prop2::new(EpsilonSchedule::power_of_four(2).unwrap(), 3).unwrap();
        let f: TruncationFamily<Rational> = p.gamma_family().unwrap();
        let d = f.truncate(3).unwrap();
        let c = Cycle::from_vertices(&d, &[0, 1, 2]).unwrap();
        assert_eq!(c.weight, num_traits::pow(rational(3, 4), 3));
        assert!(p.report().all_certified);
    }
}

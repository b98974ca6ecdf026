//! The beaded host: bead k is a cycle on consecutive vertices whose first
//! vertex h_k is its head; heads are chained both ways by connector arcs
//! h_k ↔ h_{k+1}. Bead arcs carry β_k and each head spends its slack
//! σ_k = 1 − β_k evenly on its connectors. The first head has no backward
//! connector, so its out-weight is 1 − σ_1/2 < 1.
//!
//! Cycles of the host are the beads and the 2-cycles h_k ↔ h_{k+1}; the beads
//! are pairwise disjoint, so no finite set of vertices meets every cycle.

use std::marker::PhantomData;

use num_traits::{One, Signed};
use serde::Deserialize;

use super::{family_error, from_params, GapRule, GapTarget, Num, Q};
use crate::error::Result;
use crate::family::{DeclaredLimit, Extent, FamilyMetadata, Presentation, TruncationFamily};
use crate::interval::exact_root;
use crate::scalar::{rational, rational_to_f64, Rational, Scalar};

/// How far normalisation changes are listed in the builder notes.
const NOTE_DEPTH: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthTail {
    /// ℓ_{k+1} = ℓ_k + 1 after the prefix.
    Increment,
    /// ℓ_{k+1} = 2ℓ_k after the prefix.
    Double,
    /// ℓ_k repeats the last prefix entry.
    Constant,
}

/// Bead lengths ℓ_1, ℓ_2, …: an explicit prefix continued by a tail rule.
#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeadLengths {
    pub prefix: Vec<usize>,
    pub tail: LengthTail,
}

impl Default for BeadLengths {
    fn default() -> Self {
        Self::linear()
    }
}

impl BeadLengths {
    /// 1, 2, 3, …
    pub fn linear() -> Self {
        Self { prefix: vec![1], tail: LengthTail::Increment }
    }

    /// 2, 4, 8, …
    pub fn powers_of_two() -> Self {
        Self { prefix: vec![2], tail: LengthTail::Double }
    }

    pub fn constant(l: usize) -> Self {
        Self { prefix: vec![l], tail: LengthTail::Constant }
    }

    fn validate(&self, family: &str) -> Result<()> {
        if self.prefix.is_empty() || self.prefix.contains(&0) {
            return Err(family_error(family, "bead lengths need a nonempty prefix of positive entries"));
        }
        Ok(())
    }

    /// ℓ_k for k ≥ 1 (saturating).
    pub fn length(&self, k: usize) -> usize {
        assert!(k >= 1);
        if k <= self.prefix.len() {
            return self.prefix[k - 1];
        }
        let last = *self.prefix.last().unwrap();
        let j = k - self.prefix.len();
        match self.tail {
            LengthTail::Increment => last.saturating_add(j),
            LengthTail::Double => {
                if j >= 64 {
                    usize::MAX
                } else {
                    last.saturating_mul(1usize << j)
                }
            }
            LengthTail::Constant => last,
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.tail == LengthTail::Constant
    }

    fn strictly_increasing_prefix(&self) -> bool {
        self.prefix.windows(2).all(|w| w[0] < w[1])
    }
}

/// Prop-1 targets c_k ∈ (0, 1); bead k gets gain c_k^{1/ℓ_k}.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetRule {
    Constant { value: Q },
    /// c_k = 1 − 1/ℓ_k (ℓ_k ≥ 2).
    OneMinusInverseLength,
    Explicit { values: Vec<Q> },
}

#[derive(Clone, Debug)]
enum BeadRule {
    Prop1(TargetRule),
    Corollary1(GapTarget),
}

/// A weighting of the beaded host, optionally scaled by a constant.
#[derive(Clone, Debug)]
pub struct BeadedWeighting {
    name: &'static str,
    lengths: BeadLengths,
    rule: BeadRule,
    scale: Rational,
    notes: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Prop1Params {
    #[serde(default)]
    lengths: BeadLengths,
    #[serde(default = "default_targets")]
    targets: TargetRule,
}

fn default_targets() -> TargetRule {
    TargetRule::Constant { value: Q(rational(1, 2)) }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GapParams {
    #[serde(default)]
    lengths: BeadLengths,
    #[serde(default = "default_gap")]
    gap: GapRule,
}

fn default_gap() -> GapRule {
    GapRule::Geometric { ratio: Q(rational(1, 2)) }
}

impl BeadedWeighting {
    pub fn prop1(lengths: BeadLengths, targets: TargetRule) -> Result<Self> {
        const NAME: &str = "prop1";
        lengths.validate(NAME)?;
        let check = |c: &Rational| c.is_positive() && *c < Rational::one();
        match &targets {
            TargetRule::Constant { value } if !check(&value.0) => {
                return Err(family_error(NAME, "targets must lie in (0, 1)"));
            }
            TargetRule::Explicit { values } if values.is_empty() || !values.iter().all(|v| check(&v.0)) => {
                return Err(family_error(NAME, "targets must be a nonempty list in (0, 1)"));
            }
            TargetRule::OneMinusInverseLength if lengths.length(1) < 2 || lengths.prefix.contains(&1) => {
                return Err(family_error(NAME, "c_k = 1 − 1/ℓ_k needs every ℓ_k ≥ 2"));
            }
            _ => {}
        }
        Ok(Self { name: NAME, lengths, rule: BeadRule::Prop1(targets), scale: Rational::one(), notes: Vec::new() })
    }

    pub fn corollary1(lengths: BeadLengths, gap: GapTarget) -> Result<Self> {
        Self::gap_weighting("corollary1", lengths, gap)
    }

    /// c·S for the Corollary-1 weighting S, with c = min_{n ≤ ℓ_min} g′(n)/2.
    pub fn theorem2_fast(lengths: BeadLengths, gap: GapTarget) -> Result<Self> {
        let mut w = Self::gap_weighting("theorem2-fast", lengths, gap)?;
        let l_min = w.ell_min();
        let BeadRule::Corollary1(g) = &w.rule else { unreachable!() };
        let mut c = g.normalized(1)?;
        for n in 2..=l_min {
            c = Rational::min_of(c, g.normalized(n)?);
        }
        w.scale = c / rational(2, 1);
        w.notes.push(format!("scale c = {} below g on [1, ℓ_min = {l_min}]", w.scale));
        Ok(w)
    }

    fn gap_weighting(name: &'static str, lengths: BeadLengths, gap: GapTarget) -> Result<Self> {
        lengths.validate(name)?;
        if lengths.length(1) > 2 {
            return Err(family_error(
                name,
                "the first bead must be a shortest cycle; the connector 2-cycles force ℓ_1 ≤ 2",
            ));
        }
        if !lengths.strictly_increasing_prefix() {
            return Err(family_error(name, "bead lengths must increase strictly before the tail"));
        }
        let checked = match gap.rule() {
            GapRule::Explicit { values } => values.len().min(NOTE_DEPTH),
            _ => NOTE_DEPTH,
        };
        let changed = gap.normalization_changes(checked)?;
        let mut notes = Vec::new();
        if !changed.is_empty() {
            notes.push(format!("g replaced by a decreasing minorant below 1 at n = {changed:?} (n ≤ {checked} checked)"));
        }
        Ok(Self { name, lengths, rule: BeadRule::Corollary1(gap), scale: Rational::one(), notes })
    }

    pub(crate) fn prop1_from_params(params: serde_json::Value) -> Result<Self> {
        let p: Prop1Params = from_params("prop1", params)?;
        Self::prop1(p.lengths, p.targets)
    }

    pub(crate) fn corollary1_from_params(params: serde_json::Value) -> Result<Self> {
        let p: GapParams = from_params("corollary1", params)?;
        Self::corollary1(p.lengths, GapTarget::new(p.gap)?)
    }

    pub(crate) fn theorem2_from_params(params: serde_json::Value) -> Result<Self> {
        let p: GapParams = from_params("theorem2-fast", params)?;
        Self::theorem2_fast(p.lengths, GapTarget::new(p.gap)?)
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn lengths(&self) -> &BeadLengths {
        &self.lengths
    }

    pub fn scale(&self) -> &Rational {
        &self.scale
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    /// Shortest cycle length of the host: the beads and the connector 2-cycles.
    pub fn ell_min(&self) -> usize {
        // tails never go below the last prefix entry
        self.lengths.prefix.iter().copied().min().unwrap().min(2)
    }

    /// First vertex (0-based) of bead k.
    pub fn start(&self, k: usize) -> usize {
        (1..k).map(|j| self.lengths.length(j)).fold(0usize, usize::saturating_add)
    }

    /// Number of beads in the prefix of the host that the explicit target list
    /// covers, if finite.
    fn bead_count(&self) -> Option<usize> {
        match &self.rule {
            BeadRule::Prop1(TargetRule::Explicit { values }) => Some(values.len()),
            _ => None,
        }
    }

    /// Unscaled bead weight β_k.
    pub fn beta(&self, k: usize) -> Result<Num> {
        let l = self.lengths.length(k);
        match &self.rule {
            BeadRule::Prop1(t) => {
                let c = match t {
                    TargetRule::Constant { value } => value.0.clone(),
                    TargetRule::OneMinusInverseLength => Rational::one() - rational(1, l as i64),
                    TargetRule::Explicit { values } => match values.get(k - 1) {
                        Some(v) => v.0.clone(),
                        None => return Err(family_error(self.name, format!("no target given for bead {k}"))),
                    },
                };
                Ok(match u32::try_from(l).ok().and_then(|l| exact_root(&c, l)) {
                    Some(r) => Num::Exact(r),
                    None => Num::Float(rational_to_f64(&c).powf(1.0 / l as f64)),
                })
            }
            BeadRule::Corollary1(g) => {
                let m = self.lengths.length(k + 1).max(k);
                Ok(Num::Exact(Rational::one() - g.normalized(m)?))
            }
        }
    }

    /// Gain of bead k in the (scaled) weighting.
    pub fn bead_gain(&self, k: usize) -> Result<f64> {
        Ok(rational_to_f64(&self.scale) * self.beta(k)?.to_f64())
    }

    /// 1 − β_k, exact when β_k is.
    pub fn slack(&self, k: usize) -> Result<Num> {
        Ok(match self.beta(k)? {
            Num::Exact(b) => Num::Exact(Rational::one() - b),
            Num::Float(b) => Num::Float(1.0 - b),
        })
    }

    /// Whether the cycle gains tend to 1, so that λ(S) = 1.
    pub fn gains_tend_to_one(&self) -> bool {
        match &self.rule {
            BeadRule::Corollary1(_) => true,
            BeadRule::Prop1(TargetRule::Explicit { .. }) => false,
            BeadRule::Prop1(TargetRule::OneMinusInverseLength) => !self.lengths.is_bounded(),
            BeadRule::Prop1(TargetRule::Constant { .. }) => !self.lengths.is_bounded(),
        }
    }

    pub fn family<T: Scalar>(&self) -> Result<TruncationFamily<T>> {
        let p = BeadedPresentation::<T> { w: self.clone(), _t: PhantomData };
        p.weight(&self.beta(1)?)?;
        Ok(TruncationFamily::new(p))
    }

    fn scaled(&self, x: &Num) -> Num {
        match x {
            Num::Exact(r) => Num::Exact(r * &self.scale),
            Num::Float(v) => Num::Float(v * rational_to_f64(&self.scale)),
        }
    }

    fn half(x: &Num) -> Num {
        match x {
            Num::Exact(r) => Num::Exact(r / rational(2, 1)),
            Num::Float(v) => Num::Float(v / 2.0),
        }
    }
}

struct BeadedPresentation<T> {
    w: BeadedWeighting,
    _t: PhantomData<fn() -> T>,
}

impl<T: Scalar> BeadedPresentation<T> {
    fn weight(&self, x: &Num) -> Result<T> {
        self.w.scaled(x).to_scalar(self.w.name)
    }

    /// (k, start, length) for every bead that starts below n.
    fn beads_below(&self, n: usize) -> Result<Vec<(usize, usize, usize)>> {
        let mut out = Vec::new();
        let mut s = 0usize;
        let mut k = 1usize;
        while s < n {
            if let Some(m) = self.w.bead_count() {
                if k > m {
                    break;
                }
            }
            let l = self.w.lengths.length(k);
            out.push((k, s, l));
            s = s.saturating_add(l);
            k += 1;
        }
        Ok(out)
    }
}

impl<T: Scalar> Presentation<T> for BeadedPresentation<T> {
    fn name(&self) -> &str {
        self.w.name
    }

    fn arcs_from(&self, v: usize, n: usize) -> Result<Vec<(usize, T)>> {
        Ok(self.truncation_arcs(n.max(v + 1))?.into_iter().filter(|a| a.0 == v).map(|(_, w, x)| (w, x)).collect())
    }

    fn truncation_arcs(&self, n: usize) -> Result<Vec<(usize, usize, T)>> {
        let beads = self.beads_below(n)?;
        let mut arcs = Vec::new();
        for (i, &(k, s, l)) in beads.iter().enumerate() {
            let beta = self.weight(&self.w.beta(k)?)?;
            for j in 0..l {
                let (u, v) = (s + j, s + (j + 1) % l);
                if u < n && v < n {
                    arcs.push((u, v, beta.clone()));
                }
            }
            let half_slack = self.weight(&BeadedWeighting::half(&self.w.slack(k)?))?;
            if let Some(&(_, next, _)) = beads.get(i + 1) {
                arcs.push((s, next, half_slack.clone()));
            }
            if i > 0 {
                arcs.push((s, beads[i - 1].1, half_slack));
            }
        }
        Ok(arcs)
    }

    fn out_weight(&self, v: usize) -> Option<T> {
        let beads = self.beads_below(v + 1).ok()?;
        let &(k, s, _) = beads.last()?;
        let x = if v == s && k == 1 {
            // β_1 + σ_1/2
            match (self.w.beta(1).ok()?, self.w.slack(1).ok()?) {
                (Num::Exact(b), Num::Exact(sl)) => Num::Exact(b + sl / rational(2, 1)),
                (b, sl) => Num::Float(b.to_f64() + sl.to_f64() / 2.0),
            }
        } else if v == s {
            Num::Exact(Rational::one())
        } else {
            self.w.beta(k).ok()?
        };
        self.weight(&x).ok()
    }

    fn metadata(&self) -> FamilyMetadata {
        let l = &self.w.lengths;
        FamilyMetadata {
            transversal: None,
            sct_size: Some(Extent::Infinite),
            ell_max: Some(if l.is_bounded() {
                Extent::Finite(l.prefix.iter().copied().max().unwrap().max(2))
            } else {
                Extent::Infinite
            }),
            ell_min: Some(self.w.ell_min()),
        }
    }

    fn limit(&self) -> Option<DeclaredLimit> {
        self.w.gains_tend_to_one().then(|| DeclaredLimit {
            value: rational_to_f64(&self.w.scale),
            exact: Some(self.w.scale.clone()),
            reason: "bead gains tend to 1 in a substochastic weighting, times the scale".into(),
        })
    }

    fn max_order(&self) -> Option<usize> {
        self.w.bead_count().map(|m| self.w.start(m + 1))
    }

    fn all_ones_witness(&self) -> Option<usize> {
        self.w.gains_tend_to_one().then_some(0)
    }

    fn notes(&self) -> Vec<String> {
        self.w.notes.clone()
    }
}

impl BeadedWeighting {
    /// Vertices of bead k (0-based).
    pub fn bead_vertices(&self, k: usize) -> std::ops::Range<usize> {
        let s = self.start(k);
        s..s + self.lengths.length(k)
    }

    /// Smallest truncation order containing beads 1..=k.
    pub fn order_through(&self, k: usize) -> usize {
        self.start(k + 1)
    }

    /// Largest k with ℓ_k ≤ n among the first `search` beads.
    pub fn longest_bead_within(&self, n: usize, search: usize) -> Option<usize> {
        (1..=search).filter(|&k| self.lengths.length(k) <= n).max_by_key(|&k| (self.lengths.length(k), k))
    }

    /// Exact bead weight times scale, when available.
    pub fn bead_weight_exact(&self, k: usize) -> Result<Option<Rational>> {
        Ok(match self.scaled(&self.beta(k)?) {
            Num::Exact(r) => Some(r),
            Num::Float(_) => None,
        })
    }

}

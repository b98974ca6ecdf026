//! Finitely presented infinite digraphs, seen through their leading
//! truncations on vertices {1..n}.

use std::fmt;
use std::ops::ControlFlow;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::cycles::for_each_cycle;
use crate::digraph::WeightedDigraph;
use crate::error::{Error, Result};
use crate::graph;
use crate::scalar::{Rational, Scalar};

/// A structural quantity that is either a finite count or infinite.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extent {
    Finite(usize),
    Infinite,
}

impl Extent {
    pub fn is_finite(self) -> bool {
        matches!(self, Extent::Finite(_))
    }
}

impl fmt::Display for Extent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extent::Finite(n) => write!(f, "{n}"),
            Extent::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Extent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Extent::Finite(n) => s.serialize_u64(*n as u64),
            Extent::Infinite => s.serialize_str("inf"),
        }
    }
}

/// Declared structural facts about the infinite digraph.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct FamilyMetadata {
    /// A cycle transversal of the whole digraph, 0-based.
    #[serde(serialize_with = "one_based_opt")]
    pub transversal: Option<Vec<usize>>,
    pub sct_size: Option<Extent>,
    pub ell_max: Option<Extent>,
    pub ell_min: Option<usize>,
}

fn one_based_opt<S: Serializer>(v: &Option<Vec<usize>>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.collect_seq(v.iter().map(|x| x + 1)),
        None => s.serialize_none(),
    }
}

/// Known value of the intrinsic spectral radius of the presentation.
#[derive(Clone, Debug, PartialEq)]
pub struct DeclaredLimit {
    pub value: f64,
    /// Present when the value is known exactly (e.g. 1 for constructions
    /// whose cycle gains tend to 1 inside a substochastic weighting).
    pub exact: Option<Rational>,
    pub reason: String,
}

/// The generator side of a family. Vertex ids are 0-based.
pub trait Presentation<T: Scalar>: Send + Sync {
    fn name(&self) -> &str;

    /// Out-arcs of `v` whose heads lie below `n`, in any order.
    fn arcs_from(&self, v: usize, n: usize) -> Result<Vec<(usize, T)>>;

    /// All arcs of the truncation on `0..n`. Presentations with expensive
    /// per-vertex lookups override this.
    fn truncation_arcs(&self, n: usize) -> Result<Vec<(usize, usize, T)>> {
        let mut arcs = Vec::new();
        for v in 0..n {
            arcs.extend(self.arcs_from(v, n)?.into_iter().map(|(w, x)| (v, w, x)));
        }
        Ok(arcs)
    }

    /// Out-weight of `v` in the infinite digraph, if the presentation knows it.
    fn out_weight(&self, _v: usize) -> Option<T> {
        None
    }

    fn metadata(&self) -> FamilyMetadata {
        FamilyMetadata::default()
    }

    fn limit(&self) -> Option<DeclaredLimit> {
        None
    }

    /// Closed form for the leading-truncation Perron root, when known.
    fn lambda_closed_form(&self, _n: usize) -> Option<f64> {
        None
    }

    /// Largest truncation the presentation can materialise.
    fn max_order(&self) -> Option<usize> {
        None
    }

    /// A vertex at which the all-ones vector is strictly sub-invariant: the
    /// presentation guarantees out-weight ≤ λ everywhere by construction, with
    /// λ the exact declared limit, and strict inequality at the returned vertex.
    fn all_ones_witness(&self) -> Option<usize> {
        None
    }

    fn return_vertex(&self) -> usize {
        0
    }

    /// Free-form records of choices the builder made (normalisations etc.).
    fn notes(&self) -> Vec<String> {
        Vec::new()
    }
}

/// Largest truncation order [`TruncationFamily::truncate`] will build.
pub const MAX_MATERIALISED_ORDER: usize = 10_000_000;

/// Shared handle to a presentation.
pub struct TruncationFamily<T: Scalar> {
    inner: Arc<dyn Presentation<T>>,
}

impl<T: Scalar> Clone for TruncationFamily<T> {
    fn clone(&self) -> Self {
        Self { inner: Arc::clone(&self.inner) }
    }
}

impl<T: Scalar> fmt::Debug for TruncationFamily<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TruncationFamily").field("name", &self.name()).finish()
    }
}

impl<T: Scalar> TruncationFamily<T> {
    pub fn new(p: impl Presentation<T> + 'static) -> Self {
        Self { inner: Arc::new(p) }
    }

    pub fn presentation(&self) -> &dyn Presentation<T> {
        self.inner.as_ref()
    }

    pub fn name(&self) -> &str {
        self.inner.name()
    }

    pub fn metadata(&self) -> FamilyMetadata {
        self.inner.metadata()
    }

    pub fn limit(&self) -> Option<DeclaredLimit> {
        self.inner.limit()
    }

    fn family_error(&self, reason: impl Into<String>) -> Error {
        Error::Family { family: self.name().to_string(), reason: reason.into() }
    }

    /// Induced subdigraph on the first `n` vertices.
    pub fn truncate(&self, n: usize) -> Result<WeightedDigraph<T>> {
        if n == 0 {
            return Err(Error::InvalidParameter("truncation order must be at least 1".into()));
        }
        if let Some(m) = self.inner.max_order() {
            if n > m {
                return Err(self.family_error(format!("truncation {n} exceeds the largest materialisable order {m}")));
            }
        }
        if n > MAX_MATERIALISED_ORDER {
            return Err(self.family_error(format!("truncation {n} is above the materialisation cap {MAX_MATERIALISED_ORDER}")));
        }
        let arcs = self.inner.truncation_arcs(n)?;
        if let Some((v, w, _)) = arcs.iter().find(|(v, w, _)| *v >= n || *w >= n) {
            return Err(self.family_error(format!("arc ({}, {}) leaves the truncation", v + 1, w + 1)));
        }
        WeightedDigraph::new(n, arcs).map_err(|e| self.family_error(e.to_string()))
    }

    /// Checks declared metadata and the nesting invariant on every truncation
    /// up to `n_max`. `cycle_budget` caps the longest-cycle search per order.
    pub fn validate_metadata(&self, n_max: usize, cycle_budget: usize) -> Result<MetadataReport> {
        let meta = self.metadata();
        let mut violations = Vec::new();
        let mut inconclusive = Vec::new();
        let mut previous: Option<WeightedDigraph<T>> = None;
        for n in 1..=n_max {
            let d = self.truncate(n)?;
            if let Some(prev) = &previous {
                let restricted = d.induced(&(0..n - 1).collect::<Vec<_>>());
                if &restricted != prev {
                    violations.push(MetadataViolation::new(n, "nesting", "truncation is not nested in the next one"));
                }
            }
            if let Some(t) = &meta.transversal {
                let hit: Vec<usize> = t.iter().copied().filter(|&v| v < n).collect();
                if !d.is_transversal(&hit) {
                    let alive: Vec<bool> = (0..n).map(|v| !hit.contains(&v)).collect();
                    let c = graph::shortest_cycle(&d.adjacency(), &alive).unwrap_or_default();
                    violations.push(MetadataViolation::new(
                        n,
                        "transversal",
                        format!("cycle {:?} avoids the declared transversal", one_based(&c)),
                    ));
                }
            }
            if let Some(Extent::Finite(limit)) = meta.ell_max {
                let mut seen = 0usize;
                let mut offender = None;
                let complete = for_each_cycle(&d, None, |vs, _| {
                    seen += 1;
                    if vs.len() > limit {
                        offender = Some(vs.to_vec());
                        return ControlFlow::Break(());
                    }
                    if seen >= cycle_budget {
                        return ControlFlow::Break(());
                    }
                    ControlFlow::Continue(())
                });
                if let Some(c) = offender {
                    violations.push(MetadataViolation::new(
                        n,
                        "ell_max",
                        format!("cycle {:?} has length {} > {limit}", one_based(&c), c.len()),
                    ));
                } else if !complete {
                    inconclusive.push(n);
                }
            }
            if let Some(lmin) = meta.ell_min {
                let alive = vec![true; n];
                if let Some(c) = graph::shortest_cycle(&d.adjacency(), &alive) {
                    if c.len() < lmin {
                        violations.push(MetadataViolation::new(
                            n,
                            "ell_min",
                            format!("cycle {:?} is shorter than {lmin}", one_based(&c)),
                        ));
                    }
                }
            }
            previous = Some(d);
        }
        Ok(MetadataReport { family: self.name().to_string(), checked_up_to: n_max, violations, inconclusive })
    }
}

fn one_based(vs: &[usize]) -> Vec<usize> {
    vs.iter().map(|v| v + 1).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetadataViolation {
    pub n: usize,
    pub kind: String,
    pub detail: String,
}

impl MetadataViolation {
    fn new(n: usize, kind: &str, detail: impl Into<String>) -> Self {
        Self { n, kind: kind.to_string(), detail: detail.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetadataReport {
    pub family: String,
    pub checked_up_to: usize,
    pub violations: Vec<MetadataViolation>,
    /// Orders where the longest-cycle search hit its budget.
    pub inconclusive: Vec<usize>,
}

impl MetadataReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Vertex 0 joined to every other vertex both ways; all weights 1/2.
    struct Star;

    impl Presentation<f64> for Star {
        fn name(&self) -> &str {
            "star"
        }
        fn arcs_from(&self, v: usize, n: usize) -> Result<Vec<(usize, f64)>> {
            Ok(if v == 0 { (1..n).map(|w| (w, 0.5)).collect() } else { vec![(0, 0.5)] })
        }
        fn metadata(&self) -> FamilyMetadata {
            FamilyMetadata {
                transversal: Some(vec![0]),
                sct_size: Some(Extent::Finite(1)),
                ell_max: Some(Extent::Finite(2)),
                ell_min: Some(2),
            }
        }
    }

    struct Leaky;

    impl Presentation<f64> for Leaky {
        fn name(&self) -> &str {
            "leaky"
        }
        fn arcs_from(&self, v: usize, _n: usize) -> Result<Vec<(usize, f64)>> {
            Ok(vec![(v + 1, 0.5)])
        }
    }

    #[test]
    fn star_truncations_and_metadata() {
        let f = TruncationFamily::new(Star);
        assert_eq!(f.truncate(1).unwrap().arc_count(), 0);
        assert_eq!(f.truncate(4).unwrap().arc_count(), 6);
        let r = f.validate_metadata(12, 10_000).unwrap();
        assert!(r.is_clean(), "{r:?}");
    }

    #[test]
    fn arcs_leaving_truncation_are_rejected() {
        let f = TruncationFamily::new(Leaky);
        assert!(matches!(f.truncate(3), Err(Error::Family { .. })));
        assert!(f.truncate(0).is_err());
    }

    #[test]
    fn extent_serialises_compactly() {
        assert_eq!(serde_json::to_string(&Extent::Finite(3)).unwrap(), "3");
        assert_eq!(serde_json::to_string(&Extent::Infinite).unwrap(), "\"inf\"");
        let m = Star.metadata();
        let js = serde_json::to_value(&m).unwrap();
        assert_eq!(js["transversal"], serde_json::json!([1]));
    }
}

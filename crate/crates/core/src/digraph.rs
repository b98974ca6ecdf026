//! Finite weighted digraphs and weighting classes.
//!
//! Vertices are dense 0-based indices internally; every file format and CLI
//! surface uses 1-based ids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{self, Adjacency};
use crate::linalg::DenseMatrix;
use crate::scalar::{Rational, Scalar};

/// A vertex index, 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId(pub usize);

impl VertexId {
    pub fn from_one_based(v: usize) -> Result<Self> {
        v.checked_sub(1)
            .map(VertexId)
            .ok_or_else(|| Error::InvalidParameter("vertex ids are 1-based".into()))
    }

    pub fn one_based(self) -> usize {
        self.0 + 1
    }
}

/// Finite digraph with strictly positive arc weights, loops allowed, no
/// multiple arcs. Immutable after construction.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedDigraph<T> {
    out: Vec<Vec<(usize, T)>>,
    arc_count: usize,
}

impl<T: Scalar> WeightedDigraph<T> {
    pub fn new(order: usize, arcs: impl IntoIterator<Item = (usize, usize, T)>) -> Result<Self> {
        let mut out: Vec<Vec<(usize, T)>> = vec![Vec::new(); order];
        for (u, v, w) in arcs {
            if u >= order || v >= order {
                return Err(Error::InvalidDigraph(format!(
                    "arc ({}, {}) outside vertex range 1..={order}",
                    u + 1,
                    v + 1
                )));
            }
            if w <= T::zero() {
                return Err(Error::InvalidDigraph(format!(
                    "arc ({}, {}) has non-positive weight {w}",
                    u + 1,
                    v + 1
                )));
            }
            out[u].push((v, w));
        }
        let mut arc_count = 0;
        for (u, row) in out.iter_mut().enumerate() {
            row.sort_by_key(|(v, _)| *v);
            if let Some(pair) = row.windows(2).find(|p| p[0].0 == p[1].0) {
                return Err(Error::InvalidDigraph(format!(
                    "multiple arcs ({}, {})",
                    u + 1,
                    pair[0].0 + 1
                )));
            }
            arc_count += row.len();
        }
        Ok(Self { out, arc_count })
    }

    /// A directed cycle 0 -> 1 -> ... -> k-1 -> 0 with the given arc weights.
    pub fn cycle(weights: &[T]) -> Self {
        let k = weights.len();
        Self::new(k, weights.iter().enumerate().map(|(i, w)| (i, (i + 1) % k, w.clone())))
            .expect("valid cycle")
    }

    pub fn order(&self) -> usize {
        self.out.len()
    }

    pub fn arc_count(&self) -> usize {
        self.arc_count
    }

    pub fn out(&self, v: usize) -> &[(usize, T)] {
        &self.out[v]
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<&T> {
        self.out[u].binary_search_by_key(&v, |(w, _)| *w).ok().map(|i| &self.out[u][i].1)
    }

    pub fn has_loop(&self, v: usize) -> bool {
        self.weight(v, v).is_some()
    }

    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize, &T)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(u, row)| row.iter().map(move |(v, w)| (u, *v, w)))
    }

    pub fn out_weight(&self, v: usize) -> T {
        self.out[v].iter().fold(T::zero(), |acc, (_, w)| acc + w.clone())
    }

    pub fn adjacency(&self) -> Adjacency {
        self.out.iter().map(|row| row.iter().map(|(v, _)| *v).collect()).collect()
    }

    pub fn matrix(&self) -> DenseMatrix<T> {
        let mut m = DenseMatrix::zeros(self.order());
        for (u, v, w) in self.arcs() {
            m[(u, v)] = w.clone();
        }
        m
    }

    /// Induced subdigraph on `vertices`, relabelled in the given order.
    pub fn induced(&self, vertices: &[usize]) -> Self {
        let mut pos = vec![usize::MAX; self.order()];
        for (i, &v) in vertices.iter().enumerate() {
            pos[v] = i;
        }
        let mut out = vec![Vec::new(); vertices.len()];
        let mut arc_count = 0;
        for (i, &u) in vertices.iter().enumerate() {
            for (v, w) in &self.out[u] {
                if pos[*v] != usize::MAX {
                    out[i].push((pos[*v], w.clone()));
                }
            }
            out[i].sort_by_key(|(v, _)| *v);
            arc_count += out[i].len();
        }
        Self { out, arc_count }
    }

    /// Deletes the listed vertices and all incident arcs.
    pub fn without(&self, removed: &[usize]) -> Self {
        let keep: Vec<usize> = (0..self.order()).filter(|v| !removed.contains(v)).collect();
        self.induced(&keep)
    }

    pub fn map_weights<U: Scalar>(&self, f: impl Fn(&T) -> U) -> WeightedDigraph<U> {
        WeightedDigraph {
            out: self.out.iter().map(|row| row.iter().map(|(v, w)| (*v, f(w))).collect()).collect(),
            arc_count: self.arc_count,
        }
    }

    pub fn to_f64(&self) -> WeightedDigraph<f64> {
        self.map_weights(|w| w.to_f64())
    }

    pub fn scaled(&self, c: &T) -> Self {
        self.map_weights(|w| w.clone() * c.clone())
    }

    pub fn is_strongly_connected(&self) -> bool {
        graph::is_strongly_connected(&self.adjacency())
    }

    pub fn strong_components(&self) -> Vec<Vec<usize>> {
        graph::strong_components(&self.adjacency(), &vec![true; self.order()])
    }

    /// True when deleting `removed` leaves no cycle.
    pub fn is_transversal(&self, removed: &[usize]) -> bool {
        let mut alive = vec![true; self.order()];
        for &v in removed {
            alive[v] = false;
        }
        graph::is_acyclic(&self.adjacency(), &alive)
    }

    pub fn to_file(&self) -> DigraphFile {
        DigraphFile {
            order: self.order(),
            arcs: self.arcs().map(|(u, v, w)| (u + 1, v + 1, w.weight_string())).collect(),
        }
    }
}

/// Strong connectivity as a free function (single vertex counts as strong).
pub fn is_strongly_connected<T: Scalar>(d: &WeightedDigraph<T>) -> bool {
    d.is_strongly_connected()
}

/// JSON form: `{"order": n, "arcs": [[u, v, "weight"], ...]}` with 1-based ids
/// and weights as decimals or `"p/q"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DigraphFile {
    pub order: usize,
    pub arcs: Vec<(usize, usize, String)>,
}

impl DigraphFile {
    pub fn to_digraph<T: Scalar>(&self) -> Result<WeightedDigraph<T>> {
        let mut arcs = Vec::with_capacity(self.arcs.len());
        for (u, v, w) in &self.arcs {
            if *u == 0 || *v == 0 {
                return Err(Error::InvalidDigraph("vertex ids are 1-based".into()));
            }
            arcs.push((u - 1, v - 1, T::parse_weight(w)?));
        }
        WeightedDigraph::new(self.order, arcs)
    }

    pub fn parse(json: &str) -> Result<Self> {
        Ok(serde_json::from_str(json)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightingTag {
    Stochastic,
    TruthlySubstochastic,
    StrictlySubstochastic,
    Substochastic,
    NotSubstochastic,
}

/// Weighting class with an optional witness vertex (0-based) whose
/// out-weight certifies the tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightingClass {
    pub tag: WeightingTag,
    pub witness: Option<usize>,
}

impl WeightingClass {
    pub fn is_substochastic(&self) -> bool {
        !matches!(self.tag, WeightingTag::NotSubstochastic)
    }

    pub fn is_truthly(&self) -> bool {
        matches!(self.tag, WeightingTag::TruthlySubstochastic | WeightingTag::StrictlySubstochastic)
    }
}

/// Classifies the weighting by out-weights. `tol` is the float comparison
/// slack; it is ignored in exact mode.
pub fn classify_weighting<T: Scalar>(d: &WeightedDigraph<T>, tol: f64) -> WeightingClass {
    classify_out_weights((0..d.order()).map(|v| d.out_weight(v)), tol)
}

pub(crate) fn classify_out_weights<T: Scalar>(
    weights: impl IntoIterator<Item = T>,
    tol: f64,
) -> WeightingClass {
    let tol = if T::EXACT { T::zero() } else { T::from_f64(tol) };
    let one = T::one();
    let mut any = false;
    let mut all_strict = true;
    let mut first_strict = None;
    let mut first_excess = None;
    for (v, w) in weights.into_iter().enumerate() {
        any = true;
        if w.clone() > one.clone() + tol.clone() {
            first_excess.get_or_insert(v);
        } else if w < one.clone() - tol.clone() {
            first_strict.get_or_insert(v);
        } else {
            all_strict = false;
        }
    }
    if let Some(v) = first_excess {
        return WeightingClass { tag: WeightingTag::NotSubstochastic, witness: Some(v) };
    }
    if !any {
        return WeightingClass { tag: WeightingTag::Substochastic, witness: None };
    }
    match (all_strict, first_strict) {
        (true, Some(v)) => WeightingClass { tag: WeightingTag::StrictlySubstochastic, witness: Some(v) },
        (false, Some(v)) => WeightingClass { tag: WeightingTag::TruthlySubstochastic, witness: Some(v) },
        _ => WeightingClass { tag: WeightingTag::Stochastic, witness: None },
    }
}

pub type RationalDigraph = WeightedDigraph<Rational>;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;

    #[test]
    fn rejects_bad_arcs() {
        assert!(WeightedDigraph::new(2, [(0, 1, 0.0)]).is_err());
        assert!(WeightedDigraph::new(2, [(0, 2, 1.0)]).is_err());
        assert!(WeightedDigraph::new(2, [(0, 1, 0.5), (0, 1, 0.2)]).is_err());
        assert!(WeightedDigraph::new(1, [(0, 0, 1.0)]).is_ok());
    }

    #[test]
    fn classification_examples() {
        let loop1 = WeightedDigraph::new(1, [(0, 0, rational(1, 1))]).unwrap();
        assert_eq!(classify_weighting(&loop1, 0.0).tag, WeightingTag::Stochastic);

        let two = WeightedDigraph::new(2, [(0, 1, 0.9), (1, 0, 0.9)]).unwrap();
        let c = classify_weighting(&two, 0.0);
        assert_eq!(c.tag, WeightingTag::StrictlySubstochastic);
        assert!(c.is_truthly());

        let over = WeightedDigraph::new(2, [(0, 1, 0.9), (0, 0, 0.2), (1, 0, 1.0)]).unwrap();
        assert_eq!(classify_weighting(&over, 0.0), WeightingClass {
            tag: WeightingTag::NotSubstochastic,
            witness: Some(0)
        });

        let mixed = WeightedDigraph::new(2, [(0, 1, rational(1, 2)), (1, 0, rational(1, 1))]).unwrap();
        assert_eq!(classify_weighting(&mixed, 0.0), WeightingClass {
            tag: WeightingTag::TruthlySubstochastic,
            witness: Some(0)
        });
    }

    #[test]
    fn float_tolerance_relaxes_comparison() {
        let d = WeightedDigraph::new(1, [(0, 0, 1.0 + 1e-14)]).unwrap();
        assert_eq!(classify_weighting(&d, 0.0).tag, WeightingTag::NotSubstochastic);
        assert_eq!(classify_weighting(&d, 1e-12).tag, WeightingTag::Stochastic);
    }

    #[test]
    fn strong_connectivity() {
        let single = WeightedDigraph::new(1, [(0, 0, 0.5)]).unwrap();
        assert!(is_strongly_connected(&single));
        let path = WeightedDigraph::new(2, [(0, 1, 0.5)]).unwrap();
        assert!(!is_strongly_connected(&path));
    }

    #[test]
    fn file_round_trip_keeps_exact_weights() {
        let json = r#"{"order": 2, "arcs": [[1, 2, "1/3"], [2, 1, "0.75"]]}"#;
        let d: RationalDigraph = DigraphFile::parse(json).unwrap().to_digraph().unwrap();
        assert_eq!(d.weight(0, 1), Some(&rational(1, 3)));
        assert_eq!(d.weight(1, 0), Some(&rational(3, 4)));
        let back: RationalDigraph = d.to_file().to_digraph().unwrap();
        assert_eq!(back, d);
    }
}

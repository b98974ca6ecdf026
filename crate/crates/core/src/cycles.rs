//! Simple cycles, gains, extremal cycle lengths and disjoint packings.

use std::cmp::Ordering;
use std::ops::ControlFlow;

use serde::Serialize;

use crate::digraph::WeightedDigraph;
use crate::graph;
use crate::scalar::Scalar;

/// A simple directed cycle, rotated so that its smallest vertex leads.
#[derive(Clone, Debug, PartialEq)]
pub struct Cycle<T> {
    pub vertices: Vec<usize>,
    pub weight: T,
}

impl<T: Scalar> Cycle<T> {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn gain(&self) -> Gain<T> {
        Gain { weight: self.weight.clone(), length: self.len() }
    }

    /// Rebuilds a cycle from a closed vertex list, canonicalising the rotation.
    pub fn from_vertices(d: &WeightedDigraph<T>, vertices: &[usize]) -> Option<Self> {
        if vertices.is_empty() {
            return None;
        }
        let k = vertices.len();
        let mut weight = T::one();
        for i in 0..k {
            weight = weight * d.weight(vertices[i], vertices[(i + 1) % k])?.clone();
        }
        let lead = (0..k).min_by_key(|&i| vertices[i]).unwrap();
        let mut rotated = vertices[lead..].to_vec();
        rotated.extend_from_slice(&vertices[..lead]);
        Some(Self { vertices: rotated, weight })
    }
}

/// The gain `weight^(1/length)` of a cycle, kept as the exact pair so that
/// comparisons never need an irrational root.
#[derive(Clone, Debug, PartialEq)]
pub struct Gain<T> {
    pub weight: T,
    pub length: usize,
}

impl<T: Scalar> Gain<T> {
    pub fn value(&self) -> f64 {
        let w = self.weight.to_f64();
        if self.length == 1 {
            w
        } else {
            (w.ln() / self.length as f64).exp()
        }
    }

    /// Compares gains by cross-powering in exact mode, through logarithms in
    /// float mode.
    pub fn compare(&self, other: &Self) -> Ordering {
        if T::EXACT && self.length.max(other.length) <= 4096 {
            let a = self.weight.powi(other.length as u32);
            let b = other.weight.powi(self.length as u32);
            a.partial_cmp(&b).unwrap_or(Ordering::Equal)
        } else {
            let a = self.weight.to_f64().ln() / self.length as f64;
            let b = other.weight.to_f64().ln() / other.length as f64;
            a.total_cmp(&b)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GainReport {
    pub gain: String,
    pub weight: String,
    pub length: usize,
}

impl<T: Scalar> From<&Gain<T>> for GainReport {
    fn from(g: &Gain<T>) -> Self {
        GainReport { gain: format!("{:.17}", g.value()), weight: g.weight.weight_string(), length: g.length }
    }
}

/// Vertex-disjoint family of cycles; one term of the Coates expansion.
#[derive(Clone, Debug, PartialEq)]
pub struct CycleUnion<T> {
    pub cycles: Vec<Cycle<T>>,
}

impl<T: Scalar> CycleUnion<T> {
    pub fn count(&self) -> usize {
        self.cycles.len()
    }

    pub fn total_length(&self) -> usize {
        self.cycles.iter().map(Cycle::len).sum()
    }

    pub fn weight(&self) -> T {
        self.cycles.iter().fold(T::one(), |acc, c| acc * c.weight.clone())
    }

    pub fn is_disjoint(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.cycles.iter().flat_map(|c| c.vertices.iter()).all(|v| seen.insert(*v))
    }
}

/// Calls `visit(vertices, weight)` once per simple cycle of length at most
/// `max_length`, with the smallest vertex first. Returns `false` when the
/// visitor stopped early.
///
/// Unbounded searches use Johnson's blocking scheme; length-bounded ones fall
/// back to plain backtracking inside each strong component.
pub fn for_each_cycle<T: Scalar>(
    d: &WeightedDigraph<T>,
    max_length: Option<usize>,
    mut visit: impl FnMut(&[usize], &T) -> ControlFlow<()>,
) -> bool {
    let n = d.order();
    let adj = d.adjacency();
    if max_length == Some(0) {
        return true;
    }
    let mut alive = vec![true; n];
    let mut in_comp = vec![false; n];
    let mut blocked = vec![false; n];
    let mut block_map: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut s = 0;
    while s < n {
        for (v, a) in alive.iter_mut().enumerate() {
            *a = v >= s;
        }
        let comps = graph::strong_components(&adj, &alive);
        let Some(comp) = comps
            .iter()
            .filter(|c| graph::component_is_cyclic(&adj, c))
            .min_by_key(|c| c[0])
        else {
            break;
        };
        s = comp[0];
        for &v in comp {
            in_comp[v] = true;
            blocked[v] = false;
            block_map[v].clear();
        }
        let flow = circuit_search(
            d,
            s,
            &in_comp,
            max_length,
            &mut blocked,
            &mut block_map,
            &mut visit,
        );
        for &v in comp {
            in_comp[v] = false;
        }
        if flow.is_break() {
            return false;
        }
        s += 1;
    }
    true
}

fn circuit_search<T: Scalar>(
    d: &WeightedDigraph<T>,
    s: usize,
    in_comp: &[bool],
    max_length: Option<usize>,
    blocked: &mut [bool],
    block_map: &mut [Vec<usize>],
    visit: &mut impl FnMut(&[usize], &T) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let use_blocking = max_length.is_none();
    let limit = max_length.unwrap_or(usize::MAX);
    let mut path = vec![s];
    let mut prefix = vec![T::one()];
    // (next arc index, found a circuit below)
    let mut frames: Vec<(usize, bool)> = vec![(0, false)];
    blocked[s] = true;

    while let Some(&(idx, found)) = frames.last() {
        let v = *path.last().unwrap();
        let row = d.out(v);
        if idx < row.len() {
            frames.last_mut().unwrap().0 += 1;
            let (w, ref weight) = row[idx];
            if !in_comp[w] {
                continue;
            }
            if w == s {
                let total = prefix.last().unwrap().clone() * weight.clone();
                visit(&path, &total)?;
                frames.last_mut().unwrap().1 = true;
            } else if !blocked[w] && path.len() < limit {
                blocked[w] = true;
                let p = prefix.last().unwrap().clone() * weight.clone();
                path.push(w);
                prefix.push(p);
                frames.push((0, false));
            }
        } else {
            frames.pop();
            path.pop();
            prefix.pop();
            if use_blocking {
                if found {
                    unblock(v, blocked, block_map);
                } else {
                    for &(w, _) in row {
                        if in_comp[w] && !block_map[w].contains(&v) {
                            block_map[w].push(v);
                        }
                    }
                }
            } else {
                blocked[v] = false;
            }
            if let Some(parent) = frames.last_mut() {
                parent.1 |= found;
            }
        }
    }
    ControlFlow::Continue(())
}

fn unblock(v: usize, blocked: &mut [bool], block_map: &mut [Vec<usize>]) {
    let mut stack = vec![v];
    while let Some(u) = stack.pop() {
        if !blocked[u] {
            continue;
        }
        blocked[u] = false;
        stack.extend(std::mem::take(&mut block_map[u]));
    }
}

#[derive(Clone, Debug)]
pub struct CycleEnumeration<T> {
    pub cycles: Vec<Cycle<T>>,
    /// True when `max_count` cut the enumeration short.
    pub truncated: bool,
}

pub fn enumerate_cycles<T: Scalar>(
    d: &WeightedDigraph<T>,
    max_length: Option<usize>,
    max_count: Option<usize>,
) -> CycleEnumeration<T> {
    let mut cycles = Vec::new();
    let mut truncated = false;
    for_each_cycle(d, max_length, |vs, w| {
        if max_count.is_some_and(|m| cycles.len() >= m) {
            truncated = true;
            return ControlFlow::Break(());
        }
        cycles.push(Cycle { vertices: vs.to_vec(), weight: w.clone() });
        ControlFlow::Continue(())
    });
    CycleEnumeration { cycles, truncated }
}

#[derive(Clone, Debug)]
pub struct OmegaBudgetExceeded<T> {
    pub budget: usize,
    /// Best gain seen before the budget ran out; a valid lower bound.
    pub partial: Option<Gain<T>>,
}

/// Supremum of cycle gains over cycles of length at most `n`. With
/// `proper_only`, a cycle using every arc of `d` (i.e. `d` itself) is skipped.
/// `Ok(None)` means no cycle qualifies (gain 0).
pub fn omega<T: Scalar>(
    d: &WeightedDigraph<T>,
    n: usize,
    proper_only: bool,
    budget: Option<usize>,
) -> Result<Option<Gain<T>>, OmegaBudgetExceeded<T>> {
    let mut best: Option<Gain<T>> = None;
    let mut seen = 0usize;
    let arcs = d.arc_count();
    let complete = for_each_cycle(d, Some(n), |vs, w| {
        if budget.is_some_and(|b| seen >= b) {
            return ControlFlow::Break(());
        }
        seen += 1;
        if proper_only && vs.len() >= arcs {
            return ControlFlow::Continue(());
        }
        let g = Gain { weight: w.clone(), length: vs.len() };
        if best.as_ref().is_none_or(|b| g.compare(b) == Ordering::Greater) {
            best = Some(g);
        }
        ControlFlow::Continue(())
    });
    if complete {
        Ok(best)
    } else {
        Err(OmegaBudgetExceeded { budget: budget.unwrap_or(0), partial: best })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CycleLengthExtremes {
    pub min: Option<usize>,
    pub max: Option<usize>,
    /// False when the budget stopped the longest-cycle search; `max` is then a
    /// lower bound.
    pub max_exact: bool,
}

/// Shortest and longest cycle lengths. `budget` caps the number of cycles
/// the longest-cycle search may visit.
pub fn ell_extremes<T: Scalar>(d: &WeightedDigraph<T>, budget: Option<usize>) -> CycleLengthExtremes {
    let adj = d.adjacency();
    let alive = vec![true; d.order()];
    let min = graph::shortest_cycle(&adj, &alive).map(|c| c.len());
    if min.is_none() {
        return CycleLengthExtremes { min: None, max: None, max_exact: true };
    }
    let ceiling = graph::strong_components(&adj, &alive)
        .iter()
        .filter(|c| graph::component_is_cyclic(&adj, c))
        .map(Vec::len)
        .max()
        .unwrap_or(0);
    let mut best = 0usize;
    let mut seen = 0usize;
    let mut exhausted_budget = false;
    for_each_cycle(d, None, |vs, _| {
        best = best.max(vs.len());
        seen += 1;
        if best == ceiling {
            return ControlFlow::Break(());
        }
        if budget.is_some_and(|b| seen >= b) {
            exhausted_budget = true;
            return ControlFlow::Break(());
        }
        ControlFlow::Continue(())
    });
    CycleLengthExtremes { min, max: Some(best), max_exact: !exhausted_budget || best == ceiling }
}

/// Greedy shortest-first family of pairwise vertex-disjoint cycles. Its size
/// is a lower bound on the minimum cycle transversal.
pub fn disjoint_cycle_packing<T: Scalar>(d: &WeightedDigraph<T>) -> Vec<Cycle<T>> {
    let adj = d.adjacency();
    let mut alive = vec![true; d.order()];
    let mut packing = Vec::new();
    while let Some(c) = graph::shortest_cycle(&adj, &alive) {
        for &v in &c {
            alive[v] = false;
        }
        packing.push(Cycle::from_vertices(d, &c).expect("cycle arcs exist"));
    }
    packing
}

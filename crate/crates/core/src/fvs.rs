//! Minimum cycle transversals (directed feedback vertex sets).

use serde::Serialize;

use crate::digraph::WeightedDigraph;
use crate::graph::{self, Adjacency};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Optimality {
    Exact,
    UpperBound,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TransversalResult {
    /// 0-based, sorted.
    pub vertices: Vec<usize>,
    pub optimality: Optimality,
}

impl TransversalResult {
    pub fn size(&self) -> usize {
        self.vertices.len()
    }

    /// Wraps a caller-supplied set after checking that it hits every cycle.
    pub fn verified<T: Scalar>(d: &WeightedDigraph<T>, vertices: Vec<usize>) -> Option<Self> {
        let mut vertices = vertices;
        vertices.sort_unstable();
        vertices.dedup();
        d.is_transversal(&vertices).then_some(Self { vertices, optimality: Optimality::UpperBound })
    }
}

pub const DEFAULT_NODE_BUDGET: usize = 2_000_000;

/// Branch and bound: branch on the vertices of a shortest surviving cycle
/// (take vertex i, forbid vertices 0..i), bound by a greedy disjoint-cycle
/// packing. When `budget` search nodes are spent the best set found so far is
/// returned as an upper bound.
pub fn min_cycle_transversal<T: Scalar>(d: &WeightedDigraph<T>, budget: usize) -> TransversalResult {
    let adj = d.adjacency();
    let n = d.order();
    let mut search = Search { adj: &adj, best: greedy_transversal(&adj), nodes: 0, budget, exhausted: false };
    let alive = vec![true; n];
    let forbidden = vec![false; n];
    search.branch(alive, forbidden, Vec::new());
    let mut vertices = search.best;
    vertices.sort_unstable();
    debug_assert!(d.is_transversal(&vertices));
    TransversalResult {
        vertices,
        optimality: if search.exhausted { Optimality::UpperBound } else { Optimality::Exact },
    }
}

struct Search<'a> {
    adj: &'a Adjacency,
    best: Vec<usize>,
    nodes: usize,
    budget: usize,
    exhausted: bool,
}

impl Search<'_> {
    fn branch(&mut self, mut alive: Vec<bool>, forbidden: Vec<bool>, mut chosen: Vec<usize>) {
        if self.nodes >= self.budget {
            self.exhausted = true;
            return;
        }
        self.nodes += 1;

        // Vertices outside cyclic components never need to be taken.
        let comps = graph::strong_components(self.adj, &alive);
        for c in &comps {
            if !graph::component_is_cyclic(self.adj, c) {
                for &v in c {
                    alive[v] = false;
                }
            }
        }
        // Loops force their vertex.
        for v in 0..alive.len() {
            if alive[v] && self.adj[v].contains(&v) {
                if forbidden[v] {
                    return;
                }
                chosen.push(v);
                alive[v] = false;
            }
        }
        if chosen.len() >= self.best.len() {
            return;
        }
        let Some(cycle) = graph::shortest_cycle(self.adj, &alive) else {
            self.best = chosen;
            return;
        };
        if chosen.len() + packing_bound(self.adj, &alive) >= self.best.len() {
            return;
        }
        let candidates: Vec<usize> = cycle.into_iter().filter(|&v| !forbidden[v]).collect();
        for (i, &v) in candidates.iter().enumerate() {
            let mut a = alive.clone();
            a[v] = false;
            let mut f = forbidden.clone();
            for &u in &candidates[..i] {
                f[u] = true;
            }
            let mut c = chosen.clone();
            c.push(v);
            self.branch(a, f, c);
        }
    }
}

fn packing_bound(adj: &Adjacency, alive: &[bool]) -> usize {
    let mut alive = alive.to_vec();
    let mut count = 0;
    while let Some(c) = graph::shortest_cycle(adj, &alive) {
        for v in c {
            alive[v] = false;
        }
        count += 1;
    }
    count
}

/// Repeatedly removes the vertex with the largest in·out degree inside a
/// cyclic component, then drops redundant picks.
pub(crate) fn greedy_transversal(adj: &Adjacency) -> Vec<usize> {
    let n = adj.len();
    let mut alive = vec![true; n];
    let mut picked = Vec::new();
    loop {
        let comps = graph::strong_components(adj, &alive);
        let cyclic: Vec<&Vec<usize>> = comps.iter().filter(|c| graph::component_is_cyclic(adj, c)).collect();
        if cyclic.is_empty() {
            break;
        }
        let mut in_cyclic = vec![false; n];
        for c in &cyclic {
            for &v in c.iter() {
                in_cyclic[v] = true;
            }
        }
        let mut indeg = vec![0usize; n];
        for v in (0..n).filter(|&v| in_cyclic[v]) {
            for &w in &adj[v] {
                if in_cyclic[w] {
                    indeg[w] += 1;
                }
            }
        }
        let pick = (0..n)
            .filter(|&v| in_cyclic[v])
            .max_by_key(|&v| {
                let self_loop = adj[v].contains(&v) as usize;
                let out = adj[v].iter().filter(|&&w| in_cyclic[w]).count();
                (self_loop, indeg[v] * out)
            })
            .unwrap();
        alive[pick] = false;
        picked.push(pick);
    }
    // Drop picks that are not needed.
    let mut i = 0;
    while i < picked.len() {
        let v = picked[i];
        alive[v] = true;
        if graph::is_acyclic(adj, &alive) {
            picked.remove(i);
        } else {
            alive[v] = false;
            i += 1;
        }
    }
    picked
}

/// All inclusion-minimal cycle transversals, by subset enumeration. Orders
/// above 20 are refused.
pub fn inclusion_minimal_transversals<T: Scalar>(d: &WeightedDigraph<T>) -> Option<Vec<Vec<usize>>> {
    let n = d.order();
    if n > 20 {
        return None;
    }
    let adj = d.adjacency();
    let is_transversal = |mask: u32| {
        let alive: Vec<bool> = (0..n).map(|v| mask >> v & 1 == 0).collect();
        graph::is_acyclic(&adj, &alive)
    };
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << n) {
        if !is_transversal(mask) {
            continue;
        }
        let minimal = (0..n).filter(|v| mask >> v & 1 == 1).all(|v| !is_transversal(mask & !(1 << v)));
        if minimal {
            out.push((0..n).filter(|v| mask >> v & 1 == 1).collect());
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> WeightedDigraph<f64> {
        let arcs = (0..n).flat_map(move |u| (0..n).filter(move |&v| v != u).map(move |v| (u, v, 0.1)));
        WeightedDigraph::new(n, arcs).unwrap()
    }

    #[test]
    fn small_examples() {
        let t = WeightedDigraph::cycle(&[0.5; 3]);
        assert_eq!(min_cycle_transversal(&t, DEFAULT_NODE_BUDGET).size(), 1);
        let k3 = min_cycle_transversal(&complete(3), DEFAULT_NODE_BUDGET);
        assert_eq!(k3.size(), 2);
        assert_eq!(k3.optimality, Optimality::Exact);
        assert_eq!(min_cycle_transversal(&complete(5), DEFAULT_NODE_BUDGET).size(), 4);
        let dag = WeightedDigraph::new(2, [(0, 1, 1.0)]).unwrap();
        assert_eq!(min_cycle_transversal(&dag, DEFAULT_NODE_BUDGET).size(), 0);
    }

    #[test]
    fn loops_are_forced() {
        let d = WeightedDigraph::new(3, [(0, 0, 0.5), (1, 1, 0.5), (1, 2, 0.5), (2, 1, 0.5)]).unwrap();
        assert_eq!(min_cycle_transversal(&d, DEFAULT_NODE_BUDGET).vertices, vec![0, 1]);
    }

    #[test]
    fn exhausted_budget_is_flagged() {
        let r = min_cycle_transversal(&complete(6), 1);
        assert_eq!(r.optimality, Optimality::UpperBound);
        assert!(complete(6).is_transversal(&r.vertices));
    }

    #[test]
    fn minimal_transversals_of_k3() {
        let all = inclusion_minimal_transversals(&complete(3)).unwrap();
        assert_eq!(all, vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
    }

    #[test]
    fn verified_rejects_non_transversal() {
        assert!(TransversalResult::verified(&complete(3), vec![0]).is_none());
        assert!(TransversalResult::verified(&complete(3), vec![2, 0]).is_some());
    }
}

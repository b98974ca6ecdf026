//! Unweighted structure: strong components, shortest cycles, acyclicity.
//!
//! Everything here works on out-adjacency lists plus an `alive` mask so that
//! vertex deletion is free.

use std::collections::VecDeque;

pub type Adjacency = Vec<Vec<usize>>;

/// Strong components restricted to alive vertices (iterative Tarjan).
/// Components come out in reverse topological order.
pub fn strong_components(adj: &[Vec<usize>], alive: &[bool]) -> Vec<Vec<usize>> {
    let n = adj.len();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut counter = 0usize;
    // (vertex, next neighbour position)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if !alive[root] || index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if *pos < adj[v].len() {
                let w = adj[v][*pos];
                *pos += 1;
                if !alive[w] {
                    continue;
                }
                if index[w] == UNSEEN {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    comps.push(comp);
                }
            }
        }
    }
    comps
}

/// True when the component carries at least one cycle.
pub fn component_is_cyclic(adj: &[Vec<usize>], comp: &[usize]) -> bool {
    comp.len() > 1 || adj[comp[0]].contains(&comp[0])
}

pub fn is_strongly_connected(adj: &[Vec<usize>]) -> bool {
    let alive = vec![true; adj.len()];
    adj.is_empty() || strong_components(adj, &alive).len() == 1
}

/// Kahn's algorithm on the alive subgraph.
pub fn is_acyclic(adj: &[Vec<usize>], alive: &[bool]) -> bool {
    let n = adj.len();
    let mut indeg = vec![0usize; n];
    for v in (0..n).filter(|&v| alive[v]) {
        for &w in &adj[v] {
            if alive[w] {
                indeg[w] += 1;
            }
        }
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| alive[v] && indeg[v] == 0).collect();
    let mut seen = 0;
    while let Some(v) = queue.pop_front() {
        seen += 1;
        for &w in &adj[v] {
            if alive[w] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    queue.push_back(w);
                }
            }
        }
    }
    seen == alive.iter().filter(|&&a| a).count()
}

/// Shortest cycle through `start` within the alive subgraph, as a vertex list
/// beginning at `start`. Loops count as length-1 cycles.
pub fn shortest_cycle_through(adj: &[Vec<usize>], alive: &[bool], start: usize) -> Option<Vec<usize>> {
    if !alive[start] {
        return None;
    }
    if adj[start].contains(&start) {
        return Some(vec![start]);
    }
    let n = adj.len();
    let mut parent = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    parent[start] = start;
    queue.push_back(start);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !alive[w] {
                continue;
            }
            if w == start {
                let mut path = vec![v];
                let mut cur = v;
                while cur != start {
                    cur = parent[cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            if parent[w] == usize::MAX {
                parent[w] = v;
                queue.push_back(w);
            }
        }
    }
    None
}

/// Globally shortest cycle of the alive subgraph.
pub fn shortest_cycle(adj: &[Vec<usize>], alive: &[bool]) -> Option<Vec<usize>> {
    let mut best: Option<Vec<usize>> = None;
    for v in 0..adj.len() {
        if !alive[v] {
            continue;
        }
        if let Some(c) = shortest_cycle_through(adj, alive, v) {
            let better = best.as_ref().is_none_or(|b| c.len() < b.len());
            if better {
                let len = c.len();
                best = Some(c);
                if len == 1 {
                    break;
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tarjan_finds_components() {
        // 0 <-> 1 -> 2 -> 3 -> 2
        let adj = vec![vec![1], vec![0, 2], vec![3], vec![2]];
        let mut comps = strong_components(&adj, &[true; 4]);
        comps.sort();
        assert_eq!(comps, vec![vec![0, 1], vec![2, 3]]);
        assert!(!is_strongly_connected(&adj));
    }

    #[test]
    fn deep_path_does_not_overflow() {
        let n = 200_000;
        let mut adj: Adjacency = (0..n).map(|i| vec![(i + 1) % n]).collect();
        adj[n - 1] = vec![0];
        assert!(is_strongly_connected(&adj));
    }

    #[test]
    fn acyclicity_and_shortest_cycle() {
        let adj = vec![vec![1], vec![2], vec![0, 1]];
        let alive = [true; 3];
        assert!(!is_acyclic(&adj, &alive));
        assert_eq!(shortest_cycle(&adj, &alive).unwrap().len(), 2);
        assert!(is_acyclic(&adj, &[true, false, true]));
        assert_eq!(shortest_cycle(&adj, &[false, true, true]).unwrap(), vec![1, 2]);
        assert!(shortest_cycle(&adj, &[true, true, false]).is_none());
    }
}

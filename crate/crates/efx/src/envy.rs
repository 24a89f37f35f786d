//! Envy-graph construction, source detection, dicycle detection, and the
//! cycle-elimination transformation.
//!
//! The envy graph of an allocation has one vertex per agent and an edge
//! `i → j` exactly when `i` envies `j` (strictly prefers `j`'s bundle under
//! the symbolic order). Rotating bundles backwards along a directed cycle —
//! each agent on the cycle receives the bundle of the agent it envies —
//! strictly improves every on-cycle agent while permuting the same bundles,
//! so repeating until no dicycle remains terminates and yields an allocation
//! that Pareto dominates the input and, when the input was EFX, is still EFX
//! (pairwise EFX only depends on the multiset of bundles and each viewer's
//! own value, which never decreases).
//!
//! Downstream engine cases rely on acyclicity: an acyclic envy graph has at
//! least one *source* (an agent nobody envies), and the champion-based steps
//! are driven by how many sources exist.

use crate::model::{Allocation, Instance, ItemSet};
use crate::valuation;

/// The envy relation of one allocation, as adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvyGraph {
    /// `out_edges[i]` holds every `j` with `i → j`, ascending.
    out_edges: Vec<Vec<usize>>,
}

impl EnvyGraph {
    pub fn agent_count(&self) -> usize {
        self.out_edges.len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.out_edges[i].binary_search(&j).is_ok()
    }

    /// Agents envied by `i`, in ascending index order.
    pub fn out_neighbors(&self, i: usize) -> &[usize] {
        &self.out_edges[i]
    }

    /// The vertices with no incoming edge (agents nobody envies), ascending.
    pub fn sources(&self) -> Vec<usize> {
        let mut has_incoming = vec![false; self.agent_count()];
        for neighbors in &self.out_edges {
            for &j in neighbors {
                has_incoming[j] = true;
            }
        }
        (0..self.agent_count())
            .filter(|&v| !has_incoming[v])
            .collect()
    }

    /// Finds some directed cycle as a vertex sequence `[c_0, …, c_{k-1}]`
    /// with edges `c_0 → c_1 → … → c_{k-1} → c_0`, or `None` when acyclic.
    ///
    /// Deterministic: depth-first search started from the lowest unvisited
    /// vertex, neighbors explored in ascending order; the cycle is read off
    /// the gray stack at the first back edge.
    pub fn find_dicycle(&self) -> Option<Vec<usize>> {
        #[derive(Clone, Copy, PartialEq)]
        enum Color {
            White,
            Gray,
            Black,
        }

        fn dfs(
            graph: &EnvyGraph,
            v: usize,
            colors: &mut [Color],
            stack: &mut Vec<usize>,
        ) -> Option<Vec<usize>> {
            colors[v] = Color::Gray;
            stack.push(v);
            for &w in graph.out_neighbors(v) {
                match colors[w] {
                    Color::Gray => {
                        let start = stack.iter().position(|&x| x == w).expect("gray on stack");
                        return Some(stack[start..].to_vec());
                    }
                    Color::White => {
                        if let Some(cycle) = dfs(graph, w, colors, stack) {
                            return Some(cycle);
                        }
                    }
                    Color::Black => {}
                }
            }
            stack.pop();
            colors[v] = Color::Black;
            None
        }

        let mut colors = vec![Color::White; self.agent_count()];
        let mut stack = Vec::new();
        for start in 0..self.agent_count() {
            if colors[start] == Color::White {
                if let Some(cycle) = dfs(self, start, &mut colors, &mut stack) {
                    return Some(cycle);
                }
            }
        }
        None
    }
}

/// Builds the exact envy relation of `allocation` under symbolic comparison.
pub fn build_envy_graph(instance: &Instance, allocation: &Allocation) -> EnvyGraph {
    let n = instance.agent_count();
    let out_edges = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| valuation::envies(instance, allocation, i, j))
                .collect()
        })
        .collect();
    EnvyGraph { out_edges }
}

/// Rotates bundles backwards along envy dicycles until the envy graph is
/// acyclic. Returns the resulting allocation together with every rotated
/// cycle, in application order.
///
/// The input must be EFX (symbolically); the output then is too, Pareto
/// dominates the input whenever at least one rotation occurred, and holds
/// exactly the same bundles as the input, permuted. Terminates because each
/// rotation strictly increases the sum of own-bundle values, a quantity with
/// finitely many possible values over permutations of fixed bundles.
pub fn eliminate_cycles(
    instance: &Instance,
    allocation: &Allocation,
) -> (Allocation, Vec<Vec<usize>>) {
    let mut current = allocation.clone();
    let mut rotations = Vec::new();
    loop {
        let graph = build_envy_graph(instance, &current);
        let Some(cycle) = graph.find_dicycle() else {
            return (current, rotations);
        };
        let changes: Vec<(usize, ItemSet)> = cycle
            .iter()
            .enumerate()
            .map(|(l, &agent)| (agent, current.bundle(cycle[(l + 1) % cycle.len()]).clone()))
            .collect();
        current = current.with_bundles(&changes);
        rotations.push(cycle);
    }
}

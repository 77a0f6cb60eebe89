//! Undirected simple graph over dense node ids `0..n`.
//!
//! Node ids double as birth order for grown networks: id 0 is the first-born
//! node. File formats present ids 1-based.

use std::collections::VecDeque;

use crate::growth::Point;

/// Counts of input pairs discarded while building a simple graph.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MergeReport {
    pub self_loops: usize,
    pub duplicates: usize,
}

/// Undirected simple graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    positions: Option<Vec<Point>>,
    edge_count: usize,
}

impl Graph {
    /// Graph with `node_count` isolated nodes.
    pub fn empty(node_count: usize) -> Self {
        Graph {
            adjacency: vec![Vec::new(); node_count],
            positions: None,
            edge_count: 0,
        }
    }

    /// Builds a simple graph from arbitrary pairs, dropping self-loops and
    /// merging duplicate or reversed pairs.
    ///
    /// Panics if a pair references a node `>= node_count`.
    pub fn from_edges<I>(node_count: usize, pairs: I) -> (Self, MergeReport)
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut report = MergeReport::default();
        let mut adjacency = vec![Vec::new(); node_count];
        let mut raw = 0usize;
        for (u, v) in pairs {
            assert!(
                u < node_count && v < node_count,
                "edge ({u}, {v}) out of range for {node_count} nodes"
            );
            if u == v {
                report.self_loops += 1;
                continue;
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
            raw += 1;
        }
        let mut twice = 0usize;
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
            twice += list.len();
        }
        let edge_count = twice / 2;
        report.duplicates = raw - edge_count;
        (
            Graph {
                adjacency,
                positions: None,
                edge_count,
            },
            report,
        )
    }

    /// Takes adjacency lists that are already symmetric and free of
    /// duplicates; only sorts them.
    pub(crate) fn from_simple_adjacency(mut adjacency: Vec<Vec<usize>>) -> Self {
        let mut twice = 0;
        for list in &mut adjacency {
            list.sort_unstable();
            twice += list.len();
        }
        Graph {
            adjacency,
            positions: None,
            edge_count: twice / 2,
        }
    }

    pub fn with_positions(mut self, positions: Vec<Point>) -> Self {
        assert_eq!(positions.len(), self.node_count());
        self.positions = Some(positions);
        self
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn degrees(&self) -> impl Iterator<Item = usize> + '_ {
        self.adjacency.iter().map(Vec::len)
    }

    pub fn mean_degree(&self) -> f64 {
        if self.adjacency.is_empty() {
            return 0.0;
        }
        2.0 * self.edge_count as f64 / self.node_count() as f64
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency
            .get(u)
            .is_some_and(|list| list.binary_search(&v).is_ok())
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn positions(&self) -> Option<&[Point]> {
        self.positions.as_deref()
    }

    /// Connected components, largest first; equal sizes ordered by smallest member.
    /// Members of each component are sorted.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            queue.push_back(start);
            let mut members = Vec::new();
            while let Some(u) = queue.pop_front() {
                members.push(u);
                for &v in &self.adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
        out
    }

    pub fn is_connected(&self) -> bool {
        self.node_count() > 0 && self.components().len() == 1
    }

    /// Subgraph induced by `nodes` (sorted, distinct), relabelled densely in
    /// the given order. Returns the subgraph and the original id of each new id.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> (Graph, Vec<usize>) {
        let mut local = vec![usize::MAX; self.node_count()];
        for (i, &u) in nodes.iter().enumerate() {
            local[u] = i;
        }
        let adjacency: Vec<Vec<usize>> = nodes
            .iter()
            .map(|&u| {
                self.adjacency[u]
                    .iter()
                    .filter_map(|&v| (local[v] != usize::MAX).then_some(local[v]))
                    .collect()
            })
            .collect();
        let mut sub = Graph::from_simple_adjacency(adjacency);
        if let Some(pos) = &self.positions {
            sub.positions = Some(nodes.iter().map(|&u| pos[u]).collect());
        }
        (sub, nodes.to_vec())
    }

    /// Compressed adjacency (offsets, targets) for traversal kernels.
    pub(crate) fn csr(&self) -> (Vec<u32>, Vec<u32>) {
        let mut offsets = Vec::with_capacity(self.node_count() + 1);
        let mut targets = Vec::with_capacity(2 * self.edge_count);
        offsets.push(0u32);
        for list in &self.adjacency {
            targets.extend(list.iter().map(|&v| v as u32));
            offsets.push(targets.len() as u32);
        }
        (offsets, targets)
    }
}

/// Small named graphs used by tests and examples.
pub mod named {
    use super::Graph;

    pub fn path(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).0
    }

    pub fn complete(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)))).0
    }

    /// Star with center 0 and `leaves` leaves.
    pub fn star(leaves: usize) -> Graph {
        Graph::from_edges(leaves + 1, (1..=leaves).map(|v| (0, v))).0
    }

    pub fn cycle(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).0
    }
}

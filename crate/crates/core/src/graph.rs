//! Undirected weighted graphs, classical shortest paths and the statistics
//! the decoder consults.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type NodeId = usize;
pub type Weight = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub weight: Weight,
}

impl Edge {
    /// Edge with endpoints stored as `u < v`.
    pub fn new(a: NodeId, b: NodeId, weight: Weight) -> Self {
        let (u, v) = if a <= b { (a, b) } else { (b, a) };
        Edge { u, v, weight }
    }
}

/// Connected, loopless, simple undirected graph with positive integer weights.
///
/// Edges are kept sorted by `(u, v)` and each adjacency list is sorted by
/// neighbour id, so every traversal below is deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedGraph {
    node_count: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(NodeId, Weight)>>,
}

impl WeightedGraph {
    pub fn new(node_count: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::InvalidGraph("graph has no nodes".into()));
        }
        let mut seen = BTreeSet::new();
        let mut sorted = Vec::new();
        for e in edges {
            let e = Edge::new(e.u, e.v, e.weight);
            if e.v >= node_count {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) references a node outside 0..{node_count}",
                    e.u, e.v
                )));
            }
            if e.u == e.v {
                return Err(Error::InvalidGraph(format!("self-loop on node {}", e.u)));
            }
            if e.weight == 0 {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) has zero weight",
                    e.u, e.v
                )));
            }
            if !seen.insert((e.u, e.v)) {
                return Err(Error::InvalidGraph(format!(
                    "parallel edge ({}, {})",
                    e.u, e.v
                )));
            }
            sorted.push(e);
        }
        sorted.sort();

        let mut adjacency = vec![Vec::new(); node_count];
        for e in &sorted {
            adjacency[e.u].push((e.v, e.weight));
            adjacency[e.v].push((e.u, e.weight));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }

        let graph = WeightedGraph {
            node_count,
            edges: sorted,
            adjacency,
        };
        if !graph.is_connected() {
            return Err(Error::InvalidGraph("graph is not connected".into()));
        }
        Ok(graph)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges sorted by `(u, v)` with `u < v`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, node: NodeId) -> &[(NodeId, Weight)] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.adjacency[node].len()
    }

    pub fn edge_weight(&self, a: NodeId, b: NodeId) -> Option<Weight> {
        let list = self.adjacency.get(a)?;
        list.binary_search_by_key(&b, |&(n, _)| n)
            .ok()
            .map(|i| list[i].1)
    }

    /// Total weight of a node sequence, or `None` if two consecutive nodes
    /// are not adjacent.
    pub fn walk_cost(&self, walk: &[NodeId]) -> Option<Weight> {
        walk.windows(2)
            .map(|w| self.edge_weight(w[0], w[1]))
            .sum()
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.node_count];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &(v, _) in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == self.node_count
    }

    /// Classical shortest-path distances from `source` as `(cost, hops)`.
    ///
    /// Among equal-cost paths the one with fewer edges wins.
    pub fn distances_from(&self, source: NodeId) -> Vec<(Weight, usize)> {
        let mut dist = vec![(Weight::MAX, usize::MAX); self.node_count];
        let mut heap = BinaryHeap::new();
        dist[source] = (0, 0);
        heap.push(Reverse(((0, 0), source)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &(v, w) in &self.adjacency[u] {
                let cand = (d.0 + w, d.1 + 1);
                if cand < dist[v] {
                    dist[v] = cand;
                    heap.push(Reverse((cand, v)));
                }
            }
        }
        dist
    }

    /// Single-source shortest paths with a fully deterministic choice of path:
    /// minimum cost, then fewest nodes, then lexicographically smallest node
    /// sequence. Indexed by target node.
    pub fn dijkstra_sssp(&self, source: NodeId) -> Vec<PathResult> {
        assert!(source < self.node_count, "source {source} not in graph");
        let dist = self.distances_from(source);
        let on_dag = |u: NodeId, v: NodeId, w: Weight| {
            let (cu, hu) = dist[u];
            (cu + w, hu + 1) == dist[v]
        };

        let mut results = Vec::with_capacity(self.node_count);
        let mut can_reach = vec![false; self.node_count];
        let mut stack = Vec::new();
        for target in 0..self.node_count {
            // Nodes from which the optimal-path DAG reaches `target`.
            can_reach.iter_mut().for_each(|r| *r = false);
            can_reach[target] = true;
            stack.push(target);
            while let Some(v) = stack.pop() {
                for &(u, w) in &self.adjacency[v] {
                    if !can_reach[u] && on_dag(u, v, w) {
                        can_reach[u] = true;
                        stack.push(u);
                    }
                }
            }

            let mut sequence = vec![source];
            let mut current = source;
            while current != target {
                current = self.adjacency[current]
                    .iter()
                    .find(|&&(v, w)| can_reach[v] && on_dag(current, v, w))
                    .map(|&(v, _)| v)
                    .expect("optimal-path DAG is connected to its target");
                sequence.push(current);
            }
            results.push(PathResult {
                cost: dist[target].0,
                node_count: sequence.len(),
                node_sequence: sequence,
            });
        }
        results
    }

    pub fn stats(&self) -> GraphStats {
        GraphStats::new(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathResult {
    pub cost: Weight,
    pub node_sequence: Vec<NodeId>,
    /// Nodes on the path, both endpoints included.
    pub node_count: usize,
}

/// Degree and weight aggregates used by the node-colouring rule.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphStats {
    pub node_degrees: Vec<usize>,
    pub avg_graph_degree: f64,
    /// Mean edge weight over the whole graph.
    pub avg_graph_weight: f64,
    /// Mean weight of the edges incident to each node.
    pub avg_node_weight: Vec<f64>,
}

impl GraphStats {
    pub fn new(graph: &WeightedGraph) -> Self {
        let n = graph.node_count();
        let node_degrees: Vec<usize> = (0..n).map(|i| graph.degree(i)).collect();
        let avg_node_weight = (0..n)
            .map(|i| {
                let list = graph.neighbors(i);
                if list.is_empty() {
                    0.0
                } else {
                    list.iter().map(|&(_, w)| w as f64).sum::<f64>() / list.len() as f64
                }
            })
            .collect();
        let m = graph.edge_count();
        let avg_graph_weight = if m == 0 {
            0.0
        } else {
            graph.edges().iter().map(|e| e.weight as f64).sum::<f64>() / m as f64
        };
        GraphStats {
            node_degrees,
            avg_graph_degree: 2.0 * m as f64 / n as f64,
            avg_graph_weight,
            avg_node_weight,
        }
    }
}

/// Maps a mean path length to an odd colour count.
///
/// `⌊x⌋ = 2` gives 3, an even floor above 2 gives `⌊x⌋ - 1` and an odd floor
/// is returned as is.
pub fn cd(x: f64) -> Result<u32> {
    if !x.is_finite() || x < 2.0 {
        return Err(Error::Domain(format!("cd is defined for x >= 2, got {x}")));
    }
    let floor = x.floor();
    if floor > u32::MAX as f64 {
        return Err(Error::Domain(format!("cd argument {x} is too large")));
    }
    let floor = floor as u32;
    Ok(match floor {
        2 => 3,
        f if f % 2 == 0 => f - 1,
        f => f,
    })
}

/// Mean number of nodes on the classical shortest path over all unordered
/// node pairs.
pub fn mean_path_node_count(graph: &WeightedGraph) -> f64 {
    let n = graph.node_count();
    let mut total = 0usize;
    for s in 0..n {
        let dist = graph.distances_from(s);
        total += dist[s + 1..].iter().map(|&(_, hops)| hops + 1).sum::<usize>();
    }
    let pairs = n * (n - 1) / 2;
    total as f64 / pairs as f64
}

/// Number of colours for a graph: `cd` of the mean shortest-path node count.
pub fn compute_num_colors(graph: &WeightedGraph) -> Result<u32> {
    if graph.node_count() < 2 {
        return Err(Error::InvalidGraph(
            "colour count needs at least two nodes".into(),
        ));
    }
    cd(mean_path_node_count(graph))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3(w01: Weight, w12: Weight) -> WeightedGraph {
        WeightedGraph::new(3, [Edge::new(0, 1, w01), Edge::new(1, 2, w12)]).unwrap()
    }

    fn complete(n: usize, w: Weight) -> WeightedGraph {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push(Edge::new(i, j, w));
            }
        }
        WeightedGraph::new(n, edges).unwrap()
    }

    #[test]
    fn rejects_invalid_graphs() {
        assert!(WeightedGraph::new(2, [Edge::new(0, 0, 1)]).is_err());
        assert!(WeightedGraph::new(2, [Edge::new(0, 1, 0)]).is_err());
        assert!(WeightedGraph::new(2, [Edge::new(0, 1, 1), Edge::new(1, 0, 2)]).is_err());
        assert!(WeightedGraph::new(3, [Edge::new(0, 1, 1)]).is_err());
        assert!(WeightedGraph::new(2, [Edge::new(0, 2, 1)]).is_err());
        assert!(WeightedGraph::new(1, []).is_ok());
    }

    #[test]
    fn dijkstra_small_cases() {
        let k2 = WeightedGraph::new(2, [Edge::new(0, 1, 5)]).unwrap();
        let r = k2.dijkstra_sssp(0);
        assert_eq!(r[0].cost, 0);
        assert_eq!(r[0].node_count, 1);
        assert_eq!(r[1].cost, 5);
        assert_eq!(r[1].node_count, 2);

        let p = path3(1, 1);
        let r = p.dijkstra_sssp(0);
        assert_eq!(r[2].cost, 2);
        assert_eq!(r[2].node_count, 3);
        assert_eq!(r[2].node_sequence, vec![0, 1, 2]);
    }

    #[test]
    fn tie_break_prefers_fewer_nodes_then_lexicographic() {
        // 0-3 direct (cost 4) vs 0-1-3 (2+2) vs 0-2-3 (2+2): direct wins on hops.
        let g = WeightedGraph::new(
            4,
            [
                Edge::new(0, 3, 4),
                Edge::new(0, 1, 2),
                Edge::new(1, 3, 2),
                Edge::new(0, 2, 2),
                Edge::new(2, 3, 2),
            ],
        )
        .unwrap();
        assert_eq!(g.dijkstra_sssp(0)[3].node_sequence, vec![0, 3]);

        // Without the direct edge, 0-1-3 beats 0-2-3 lexicographically.
        let g = WeightedGraph::new(
            4,
            [
                Edge::new(0, 2, 2),
                Edge::new(2, 3, 2),
                Edge::new(0, 1, 2),
                Edge::new(1, 3, 2),
            ],
        )
        .unwrap();
        assert_eq!(g.dijkstra_sssp(0)[3].node_sequence, vec![0, 1, 3]);
        assert_eq!(g.dijkstra_sssp(3)[0].node_sequence, vec![3, 1, 0]);
    }

    #[test]
    fn cd_table() {
        assert_eq!(cd(2.0).unwrap(), 3);
        assert_eq!(cd(2.4).unwrap(), 3);
        assert_eq!(cd(2.999).unwrap(), 3);
        assert_eq!(cd(3.0).unwrap(), 3);
        assert_eq!(cd(4.5).unwrap(), 3);
        assert_eq!(cd(6.0).unwrap(), 5);
        assert_eq!(cd(7.9).unwrap(), 7);
        assert_eq!(cd(8.0).unwrap(), 7);
        assert!(cd(1.99).is_err());
        assert!(cd(f64::NAN).is_err());
    }

    #[test]
    fn num_colors_hand_cases() {
        // Pair node counts {2, 3, 2}: mean 7/3.
        assert!((mean_path_node_count(&path3(1, 1)) - 7.0 / 3.0).abs() < 1e-12);
        assert_eq!(compute_num_colors(&path3(1, 1)).unwrap(), 3);
        assert_eq!(mean_path_node_count(&complete(4, 1)), 2.0);
        assert_eq!(compute_num_colors(&complete(4, 1)).unwrap(), 3);
    }

    #[test]
    fn num_colors_on_long_path() {
        // Path on 16 nodes: mean node count = 2 + (n-2)/3 = 6.666.. -> 5.
        let n = 16;
        let g = WeightedGraph::new(n, (0..n - 1).map(|i| Edge::new(i, i + 1, 3))).unwrap();
        let mean = mean_path_node_count(&g);
        assert!((mean - (2.0 + (n as f64 - 2.0) / 3.0)).abs() < 1e-12);
        assert_eq!(compute_num_colors(&g).unwrap(), 5);
    }

    #[test]
    fn stats_small_cases() {
        let k2 = WeightedGraph::new(2, [Edge::new(0, 1, 8)]).unwrap();
        let s = k2.stats();
        assert_eq!(s.avg_graph_degree, 1.0);
        assert_eq!(s.avg_graph_weight, 8.0);
        assert_eq!(s.avg_node_weight, vec![8.0, 8.0]);

        let s = path3(2, 4).stats();
        assert_eq!(s.node_degrees, vec![1, 2, 1]);
        assert_eq!(s.avg_node_weight, vec![2.0, 3.0, 4.0]);
        assert_eq!(s.avg_graph_weight, 3.0);
    }

    #[test]
    fn walk_cost_checks_adjacency() {
        let p = path3(2, 4);
        assert_eq!(p.walk_cost(&[0, 1, 2, 1]), Some(10));
        assert_eq!(p.walk_cost(&[0, 2]), None);
        assert_eq!(p.walk_cost(&[1]), Some(0));
    }
}

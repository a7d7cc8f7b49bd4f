//! Colour-constrained shortest paths.
//!
//! A covering walk from `s` to `t` must visit at least one node of every
//! colour, in any order. The search runs Dijkstra over product states
//! `(node, colours collected so far)`: it starts at `(s, colour(s))` and
//! accepts `(t, all colours)`. Walks may revisit nodes, so the result is never
//! worse than the best simple covering path.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeId, Weight, WeightedGraph};
use crate::instance::MAX_COLORS;

/// Bitset over colour indices.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ColorSet(pub u32);

impl ColorSet {
    pub const EMPTY: ColorSet = ColorSet(0);

    pub fn full(num_colors: usize) -> Self {
        debug_assert!(num_colors <= 32);
        if num_colors == 32 {
            ColorSet(u32::MAX)
        } else {
            ColorSet((1u32 << num_colors) - 1)
        }
    }

    pub fn single(color: usize) -> Self {
        ColorSet(1 << color)
    }

    pub fn contains(self, color: usize) -> bool {
        self.0 & (1 << color) != 0
    }

    pub fn union(self, other: ColorSet) -> Self {
        ColorSet(self.0 | other.0)
    }

    pub fn is_superset(self, other: ColorSet) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

/// Partial assignment of at most one colour per node.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coloring(Vec<Option<u8>>);

impl Coloring {
    pub fn uncolored(node_count: usize) -> Self {
        Coloring(vec![None; node_count])
    }

    pub fn from_assignment(assignment: Vec<Option<u8>>) -> Self {
        Coloring(assignment)
    }

    pub fn node_count(&self) -> usize {
        self.0.len()
    }

    pub fn color(&self, node: NodeId) -> Option<usize> {
        self.0[node].map(usize::from)
    }

    pub fn set(&mut self, node: NodeId, color: Option<usize>) {
        self.0[node] = color.map(|c| u8::try_from(c).expect("colour index fits in u8"));
    }

    pub fn assignment(&self) -> &[Option<u8>] {
        &self.0
    }

    /// Colour set contributed by visiting `node`.
    pub fn node_set(&self, node: NodeId) -> ColorSet {
        self.0[node].map_or(ColorSet::EMPTY, |c| ColorSet::single(c as usize))
    }

    /// Union of every assigned colour.
    pub fn present(&self) -> ColorSet {
        (0..self.0.len()).fold(ColorSet::EMPTY, |acc, i| acc.union(self.node_set(i)))
    }

    pub fn colored_count(&self) -> usize {
        self.0.iter().filter(|c| c.is_some()).count()
    }

    /// Total deployment cost under the given per-colour costs.
    pub fn cost(&self, color_costs: &[u64]) -> u64 {
        self.0
            .iter()
            .flatten()
            .map(|&c| color_costs[c as usize])
            .sum()
    }

    fn check(&self, graph: &WeightedGraph, num_colors: usize) -> Result<()> {
        if num_colors > MAX_COLORS {
            return Err(Error::Capacity {
                what: "colour-set search",
                required: num_colors as u128,
                limit: MAX_COLORS as u128,
            });
        }
        if self.0.len() != graph.node_count() {
            return Err(Error::InvalidArguments(format!(
                "colouring covers {} nodes, graph has {}",
                self.0.len(),
                graph.node_count()
            )));
        }
        if let Some(node) = self.0.iter().position(|c| matches!(c, Some(c) if *c as usize >= num_colors)) {
            return Err(Error::InvalidArguments(format!(
                "node {node} carries colour {} outside 0..{num_colors}",
                self.0[node].unwrap()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoveringPathResult {
    /// `None` when no covering walk exists.
    pub cost: Option<Weight>,
    pub walk: Vec<NodeId>,
    /// Colours collected along `walk`; for an infeasible query, every colour
    /// the colouring offers at all.
    pub covered: ColorSet,
    pub feasible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllPairsCost {
    /// Sum over unordered pairs; `None` once any pair is infeasible.
    pub total_path_cost: Option<Weight>,
    pub feasible: bool,
}

const NO_PRED: u64 = u64::MAX;
const DENSE_STATE_LIMIT: usize = 1 << 22;

#[derive(Clone, Copy)]
struct Label {
    cost: Weight,
    pred: u64,
    settled: bool,
}

const UNREACHED: Label = Label {
    cost: Weight::MAX,
    pred: NO_PRED,
    settled: false,
};

/// Labels for `(node, colour set)` states, dense when the product space is small.
enum Labels {
    Dense { shift: u32, slots: Vec<Label> },
    Sparse(HashMap<u64, Label>),
}

impl Labels {
    fn new(node_count: usize, num_colors: usize) -> Self {
        let states = node_count << num_colors;
        if states <= DENSE_STATE_LIMIT {
            Labels::Dense {
                shift: num_colors as u32,
                slots: vec![UNREACHED; states],
            }
        } else {
            Labels::Sparse(HashMap::new())
        }
    }

    fn get(&self, key: u64) -> Label {
        match self {
            Labels::Dense { shift, slots } => slots[dense_index(key, *shift)],
            Labels::Sparse(map) => map.get(&key).copied().unwrap_or(UNREACHED),
        }
    }

    fn get_mut(&mut self, key: u64) -> &mut Label {
        match self {
            Labels::Dense { shift, slots } => &mut slots[dense_index(key, *shift)],
            Labels::Sparse(map) => map.entry(key).or_insert(UNREACHED),
        }
    }
}

fn state_key(node: NodeId, set: ColorSet) -> u64 {
    ((node as u64) << 32) | set.0 as u64
}

fn key_node(key: u64) -> NodeId {
    (key >> 32) as NodeId
}

fn key_set(key: u64) -> ColorSet {
    ColorSet(key as u32)
}

fn dense_index(key: u64, shift: u32) -> usize {
    (key_node(key) << shift) | key_set(key).0 as usize
}

/// Label-setting search from one source. States pop in order of
/// `(cost, node id, larger colour set first)`.
struct CoveringSearch<'a> {
    graph: &'a WeightedGraph,
    node_sets: Vec<ColorSet>,
    full: ColorSet,
    labels: Labels,
}

impl<'a> CoveringSearch<'a> {
    fn new(graph: &'a WeightedGraph, coloring: &Coloring, num_colors: usize) -> Self {
        CoveringSearch {
            graph,
            node_sets: (0..graph.node_count()).map(|i| coloring.node_set(i)).collect(),
            full: ColorSet::full(num_colors),
            labels: Labels::new(graph.node_count(), num_colors),
        }
    }

    /// Runs until every node in `targets` has settled its full-coverage state,
    /// or the queue is exhausted.
    fn run(&mut self, source: NodeId, targets: &[NodeId]) {
        let mut waiting = targets.len();
        let mut is_target = vec![false; self.graph.node_count()];
        for &t in targets {
            is_target[t] = true;
        }

        let start = state_key(source, self.node_sets[source]);
        let label = self.labels.get_mut(start);
        label.cost = 0;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((0, source, Reverse(self.node_sets[source].len()), start)));

        while let Some(Reverse((cost, node, _, key))) = heap.pop() {
            let label = self.labels.get_mut(key);
            if label.settled || cost > label.cost {
                continue;
            }
            label.settled = true;
            let set = key_set(key);
            if set == self.full && is_target[node] {
                is_target[node] = false;
                waiting -= 1;
                if waiting == 0 {
                    return;
                }
            }
            for &(next, w) in self.graph.neighbors(node) {
                let next_set = set.union(self.node_sets[next]);
                let next_key = state_key(next, next_set);
                let cand = cost + w;
                let slot = self.labels.get_mut(next_key);
                if !slot.settled && cand < slot.cost {
                    slot.cost = cand;
                    slot.pred = key;
                    heap.push(Reverse((cand, next, Reverse(next_set.len()), next_key)));
                }
            }
        }
    }

    fn full_cost(&self, node: NodeId) -> Option<Weight> {
        let label = self.labels.get(state_key(node, self.full));
        label.settled.then_some(label.cost)
    }

    fn walk_to(&self, node: NodeId) -> Vec<NodeId> {
        let mut walk = Vec::new();
        let mut key = state_key(node, self.full);
        while key != NO_PRED {
            walk.push(key_node(key));
            key = self.labels.get(key).pred;
        }
        walk.reverse();
        walk
    }
}

/// Cheapest `s`–`t` walk whose nodes together carry every colour in
/// `0..num_colors`.
pub fn covering_shortest_path(
    graph: &WeightedGraph,
    coloring: &Coloring,
    num_colors: usize,
    s: NodeId,
    t: NodeId,
) -> Result<CoveringPathResult> {
    coloring.check(graph, num_colors)?;
    let n = graph.node_count();
    if s >= n || t >= n {
        return Err(Error::InvalidArguments(format!(
            "query ({s}, {t}) outside 0..{n}"
        )));
    }
    if s == t {
        return Err(Error::InvalidArguments(format!(
            "source and target coincide ({s})"
        )));
    }
    let full = ColorSet::full(num_colors);
    let present = coloring.present();
    if !present.is_superset(full) {
        return Ok(CoveringPathResult {
            cost: None,
            walk: Vec::new(),
            covered: present,
            feasible: false,
        });
    }

    let mut search = CoveringSearch::new(graph, coloring, num_colors);
    search.run(s, &[t]);
    Ok(match search.full_cost(t) {
        Some(cost) => CoveringPathResult {
            cost: Some(cost),
            walk: search.walk_to(t),
            covered: full,
            feasible: true,
        },
        None => CoveringPathResult {
            cost: None,
            walk: Vec::new(),
            covered: present,
            feasible: false,
        },
    })
}

/// Covering costs from `source` to every other node (`None` when no covering
/// walk exists). The entry for `source` itself is always `None`.
pub fn covering_costs_from(
    graph: &WeightedGraph,
    coloring: &Coloring,
    num_colors: usize,
    source: NodeId,
) -> Result<Vec<Option<Weight>>> {
    coloring.check(graph, num_colors)?;
    if source >= graph.node_count() {
        return Err(Error::InvalidArguments(format!("source {source} not in graph")));
    }
    if !coloring.present().is_superset(ColorSet::full(num_colors)) {
        return Ok(vec![None; graph.node_count()]);
    }
    let targets: Vec<NodeId> = (0..graph.node_count()).filter(|&t| t != source).collect();
    let mut search = CoveringSearch::new(graph, coloring, num_colors);
    search.run(source, &targets);
    Ok((0..graph.node_count())
        .map(|t| if t == source { None } else { search.full_cost(t) })
        .collect())
}

/// Sum of covering costs over all unordered node pairs. Stops at the first
/// pair without a covering walk.
pub fn all_pairs_covering_cost(
    graph: &WeightedGraph,
    coloring: &Coloring,
    num_colors: usize,
) -> Result<AllPairsCost> {
    coloring.check(graph, num_colors)?;
    const INFEASIBLE: AllPairsCost = AllPairsCost {
        total_path_cost: None,
        feasible: false,
    };
    let n = graph.node_count();
    if !coloring.present().is_superset(ColorSet::full(num_colors)) {
        return Ok(INFEASIBLE);
    }
    let mut total: Weight = 0;
    for s in 0..n.saturating_sub(1) {
        // Covering cost is symmetric on undirected graphs, so only t > s is needed.
        let targets: Vec<NodeId> = (s + 1..n).collect();
        let mut search = CoveringSearch::new(graph, coloring, num_colors);
        search.run(s, &targets);
        for &t in &targets {
            match search.full_cost(t) {
                Some(c) => total += c,
                None => return Ok(INFEASIBLE),
            }
        }
    }
    Ok(AllPairsCost {
        total_path_cost: Some(total),
        feasible: true,
    })
}

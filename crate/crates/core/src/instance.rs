//! APSPC instances: a graph plus colour count and colour costs, the seeded
//! random generator, and the JSON file format.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{compute_num_colors, Edge, NodeId, WeightedGraph, Weight};
use crate::rng;

pub const INSTANCE_SCHEMA_VERSION: u32 = 1;

/// Largest colour count any module accepts; colour sets are `u32` bitsets and
/// the covering search allocates `n * 2^k` labels.
pub const MAX_COLORS: usize = 24;

/// Inclusive bounds for drawn edge weights.
pub const EDGE_WEIGHT_RANGE: (Weight, Weight) = (1, 200);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostRange {
    pub lo: u64,
    pub hi: u64,
}

impl CostRange {
    pub fn new(lo: u64, hi: u64) -> Result<Self> {
        if lo == 0 || lo > hi {
            return Err(Error::InvalidParameters(format!(
                "cost range [{lo}, {hi}] must satisfy 1 <= lo <= hi"
            )));
        }
        Ok(CostRange { lo, hi })
    }

    pub fn contains(&self, v: u64) -> bool {
        (self.lo..=self.hi).contains(&v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub n: usize,
    pub d: f64,
    pub cr_lo: u64,
    pub cr_hi: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    graph: WeightedGraph,
    num_colors: usize,
    color_costs: Vec<u64>,
    seed: u64,
    gen_params: Option<GenParams>,
}

impl Instance {
    /// Builds an instance from explicit parts. Generated instances always carry
    /// an odd colour count of at least 3; hand-built ones may use any count in
    /// `1..=MAX_COLORS`.
    pub fn new(graph: WeightedGraph, color_costs: Vec<u64>) -> Result<Self> {
        let num_colors = color_costs.len();
        if num_colors == 0 || num_colors > MAX_COLORS {
            return Err(Error::InvalidParameters(format!(
                "colour count {num_colors} outside 1..={MAX_COLORS}"
            )));
        }
        if let Some(c) = color_costs.iter().position(|&c| c == 0) {
            return Err(Error::InvalidParameters(format!("colour {c} has zero cost")));
        }
        Ok(Instance {
            graph,
            num_colors,
            color_costs,
            seed: 0,
            gen_params: None,
        })
    }

    pub fn with_provenance(mut self, seed: u64, gen_params: Option<GenParams>) -> Self {
        self.seed = seed;
        self.gen_params = gen_params;
        self
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn num_colors(&self) -> usize {
        self.num_colors
    }

    pub fn color_costs(&self) -> &[u64] {
        &self.color_costs
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn gen_params(&self) -> Option<&GenParams> {
        self.gen_params.as_ref()
    }

    pub fn to_json(&self) -> String {
        let file = InstanceFile {
            version: INSTANCE_SCHEMA_VERSION,
            n: self.graph.node_count(),
            num_colors: self.num_colors,
            color_costs: self.color_costs.clone(),
            edges: self
                .graph
                .edges()
                .iter()
                .map(|e| [e.u as u64, e.v as u64, e.weight])
                .collect(),
            seed: self.seed,
            gen_params: self.gen_params,
        };
        serde_json::to_string_pretty(&file).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        if file.version != INSTANCE_SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found: file.version,
                expected: INSTANCE_SCHEMA_VERSION,
            });
        }
        if file.color_costs.len() != file.num_colors {
            return Err(Error::InvalidParameters(format!(
                "num_colors is {} but {} colour costs are listed",
                file.num_colors,
                file.color_costs.len()
            )));
        }
        let edges = file.edges.iter().map(|&[u, v, w]| Edge::new(u as NodeId, v as NodeId, w));
        let graph = WeightedGraph::new(file.n, edges)?;
        Ok(Instance::new(graph, file.color_costs)?.with_provenance(file.seed, file.gen_params))
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    version: u32,
    n: usize,
    num_colors: usize,
    color_costs: Vec<u64>,
    edges: Vec<[u64; 3]>,
    seed: u64,
    gen_params: Option<GenParams>,
}

/// `round(d * n(n-1)/2)` after checking that the budget can hold a spanning tree.
pub fn edge_budget(n: usize, density: f64) -> Result<usize> {
    if n < 2 {
        return Err(Error::InvalidParameters(format!("need n >= 2, got {n}")));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidParameters(format!(
            "density must lie in (0, 1], got {density}"
        )));
    }
    let pairs = n * (n - 1) / 2;
    let raw = density * pairs as f64;
    if raw < (n - 1) as f64 {
        return Err(Error::InvalidParameters(format!(
            "edge budget {raw} is below the {} edges of a spanning tree",
            n - 1
        )));
    }
    Ok((raw.round() as usize).min(pairs))
}

/// Random connected graph: weights are drawn for every node pair, the minimum
/// spanning tree of that complete graph is kept, then the remaining pairs are
/// shuffled and added until the budget is met. Edges are returned in
/// acceptance order, tree edges first.
pub(crate) fn generate_edges<R: Rng>(n: usize, budget: usize, rng: &mut R) -> Vec<Edge> {
    let (wlo, whi) = EDGE_WEIGHT_RANGE;
    let mut candidates = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            candidates.push(Edge::new(i, j, rng.gen_range(wlo..=whi)));
        }
    }

    let mut by_weight: Vec<usize> = (0..candidates.len()).collect();
    by_weight.sort_by_key(|&k| (candidates[k].weight, candidates[k].u, candidates[k].v));
    let mut dsu = DisjointSets::new(n);
    let mut in_tree = vec![false; candidates.len()];
    let mut accepted = Vec::with_capacity(budget);
    for k in by_weight {
        let e = candidates[k];
        if dsu.union(e.u, e.v) {
            in_tree[k] = true;
            accepted.push(e);
            if accepted.len() == n - 1 {
                break;
            }
        }
    }

    let mut rest: Vec<Edge> = candidates
        .iter()
        .zip(&in_tree)
        .filter(|(_, &t)| !t)
        .map(|(e, _)| *e)
        .collect();
    shuffle(&mut rest, rng);
    accepted.extend(rest.into_iter().take(budget - (n - 1)));
    accepted
}

/// Fisher-Yates with 64-bit index draws so the permutation does not depend on
/// the platform's pointer width.
fn shuffle<T, R: Rng>(items: &mut [T], rng: &mut R) {
    for i in (1..items.len()).rev() {
        let j = rng.gen_range(0..=i as u64) as usize;
        items.swap(i, j);
    }
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

pub fn generate_instance(n: usize, density: f64, cr: CostRange, seed: u64) -> Result<Instance> {
    let budget = edge_budget(n, density)?;
    let mut rng = rng::seeded(seed);
    let edges = generate_edges(n, budget, &mut rng);
    let graph = WeightedGraph::new(n, edges)?;
    let num_colors = compute_num_colors(&graph)? as usize;
    let color_costs = (0..num_colors)
        .map(|_| rng.gen_range(cr.lo..=cr.hi))
        .collect();
    let params = GenParams {
        n,
        d: density,
        cr_lo: cr.lo,
        cr_hi: cr.hi,
    };
    Ok(Instance::new(graph, color_costs)?.with_provenance(seed, Some(params)))
}

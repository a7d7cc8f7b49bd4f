//! Exhaustive solver and solution validator for small instances.
//!
//! The solver enumerates every colouring (each node uncoloured or one of the
//! colours) and prices it either with covering walks or with covering simple
//! paths. The validator checks an explicit solution against the semantics of
//! the integer model: flow conservation along each path, subtour freedom in
//! simple mode, at most one colour per node, every colour on every path, and
//! consistent objective arithmetic.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::color_path::{all_pairs_covering_cost, covering_shortest_path, ColorSet, Coloring};
use crate::error::{Error, Result};
use crate::graph::{NodeId, Weight, WeightedGraph};
use crate::instance::Instance;

/// Largest number of colourings the solver will enumerate.
pub const MAX_COLORINGS: u128 = 10_000_000;
/// Largest number of simple paths the simple mode will materialise.
pub const MAX_SIMPLE_PATHS: usize = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathMode {
    /// Routes may revisit nodes.
    Walk,
    /// Routes must be simple paths.
    Simple,
}

impl fmt::Display for PathMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PathMode::Walk => "walk",
            PathMode::Simple => "simple",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairPath {
    pub s: NodeId,
    pub t: NodeId,
    pub path: Vec<NodeId>,
    pub cost: Weight,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplicitSolution {
    pub coloring: Coloring,
    /// One route per unordered pair, `s < t`.
    pub pairs: Vec<PairPath>,
    /// Colouring cost plus route costs over ordered pairs, i.e. each listed
    /// route counted in both directions.
    pub objective: u64,
    pub mode: PathMode,
}

impl ExplicitSolution {
    /// Expresses a colouring with explicit cheapest covering walks.
    pub fn from_coloring(instance: &Instance, coloring: &Coloring) -> Result<Self> {
        let graph = instance.graph();
        let n = graph.node_count();
        let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for s in 0..n {
            for t in s + 1..n {
                let r = covering_shortest_path(graph, coloring, instance.num_colors(), s, t)?;
                let cost = r.cost.ok_or_else(|| {
                    Error::Infeasible(format!("pair ({s}, {t}) has no covering walk"))
                })?;
                pairs.push(PairPath { s, t, path: r.walk, cost });
            }
        }
        let objective = coloring.cost(instance.color_costs()) + ordered_total(&pairs);
        Ok(ExplicitSolution {
            coloring: coloring.clone(),
            pairs,
            objective,
            mode: PathMode::Walk,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BruteForceOutcome {
    pub solution: ExplicitSolution,
    /// Colourings enumerated, always `(num_colors + 1)^n`.
    pub colorings_visited: u64,
}

/// Mixed-radix colouring index: node 0 is the most significant digit and the
/// digit `num_colors` means uncoloured, so index order is lexicographic order
/// with every colour sorting before "uncoloured".
fn coloring_from_index(mut index: u64, n: usize, num_colors: usize) -> Coloring {
    let base = num_colors as u64 + 1;
    let mut assignment = vec![None; n];
    for node in (0..n).rev() {
        let digit = (index % base) as usize;
        index /= base;
        if digit < num_colors {
            assignment[node] = Some(digit as u8);
        }
    }
    Coloring::from_assignment(assignment)
}

/// Every simple path between unordered pairs, sorted by cost within a pair.
struct SimplePaths {
    /// Indexed by `s * n + t` for `s < t`.
    by_pair: Vec<Vec<(Weight, Vec<NodeId>)>>,
}

impl SimplePaths {
    fn enumerate(graph: &WeightedGraph) -> Result<Self> {
        let n = graph.node_count();
        let mut by_pair = vec![Vec::new(); n * n];
        let mut total = 0usize;
        for s in 0..n {
            let mut on_path = vec![false; n];
            let mut path = vec![s];
            on_path[s] = true;
            Self::extend(graph, &mut path, &mut on_path, 0, &mut by_pair, &mut total)?;
        }
        for list in &mut by_pair {
            list.sort();
        }
        Ok(SimplePaths { by_pair })
    }

    fn extend(
        graph: &WeightedGraph,
        path: &mut Vec<NodeId>,
        on_path: &mut [bool],
        cost: Weight,
        by_pair: &mut [Vec<(Weight, Vec<NodeId>)>],
        total: &mut usize,
    ) -> Result<()> {
        let n = graph.node_count();
        let last = *path.last().expect("path starts at its source");
        for &(next, w) in graph.neighbors(last) {
            if on_path[next] {
                continue;
            }
            path.push(next);
            on_path[next] = true;
            if path[0] < next {
                *total += 1;
                if *total > MAX_SIMPLE_PATHS {
                    return Err(Error::Capacity {
                        what: "simple-path enumeration",
                        required: *total as u128,
                        limit: MAX_SIMPLE_PATHS as u128,
                    });
                }
                by_pair[path[0] * n + next].push((cost + w, path.clone()));
            }
            Self::extend(graph, path, on_path, cost + w, by_pair, total)?;
            on_path[next] = false;
            path.pop();
        }
        Ok(())
    }

    fn pair(&self, n: usize, s: NodeId, t: NodeId) -> &[(Weight, Vec<NodeId>)] {
        &self.by_pair[s * n + t]
    }

    /// Cheapest simple path of the pair that sees every colour.
    fn covering<'a>(
        &'a self,
        n: usize,
        s: NodeId,
        t: NodeId,
        node_sets: &[ColorSet],
        full: ColorSet,
    ) -> Option<&'a (Weight, Vec<NodeId>)> {
        self.pair(n, s, t).iter().find(|(_, path)| {
            path.iter()
                .fold(ColorSet::EMPTY, |acc, &v| acc.union(node_sets[v]))
                .is_superset(full)
        })
    }

    fn total_cost(&self, n: usize, coloring: &Coloring, full: ColorSet) -> Option<Weight> {
        let node_sets: Vec<ColorSet> = (0..n).map(|i| coloring.node_set(i)).collect();
        let mut total = 0;
        for s in 0..n {
            for t in s + 1..n {
                total += self.covering(n, s, t, &node_sets, full)?.0;
            }
        }
        Some(2 * total)
    }
}

fn lower_bound(graph: &WeightedGraph) -> Weight {
    (0..graph.node_count())
        .map(|s| {
            graph.distances_from(s)[s + 1..]
                .iter()
                .map(|&(c, _)| c)
                .sum::<Weight>()
        })
        .sum::<Weight>()
        * 2
}

/// Path part of the objective. Routes are listed once per unordered pair and
/// the reverse route costs the same, so every listed cost counts twice.
fn ordered_total(pairs: &[PairPath]) -> Weight {
    2 * pairs.iter().map(|p| p.cost).sum::<Weight>()
}

/// Minimum objective over every colouring. Among optimal colourings the
/// lexicographically smallest (colours before "uncoloured") is returned.
pub fn brute_force_solve(instance: &Instance, mode: PathMode) -> Result<BruteForceOutcome> {
    let graph = instance.graph();
    let n = graph.node_count();
    let k = instance.num_colors();
    let required = (k as u128 + 1).checked_pow(n as u32).unwrap_or(u128::MAX);
    if required > MAX_COLORINGS {
        return Err(Error::Capacity {
            what: "colouring enumeration",
            required,
            limit: MAX_COLORINGS,
        });
    }
    let total = required as u64;
    let full = ColorSet::full(k);
    let simple = match mode {
        PathMode::Simple => Some(SimplePaths::enumerate(graph)?),
        PathMode::Walk => None,
    };
    let bound = lower_bound(graph);

    // Each chunk keeps its own incumbent; the reduction is by (objective,
    // index), so the result does not depend on chunking or scheduling.
    let chunk = 4096u64;
    let chunks = total.div_ceil(chunk);
    let best = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<Option<(u64, u64)>> {
            let mut best: Option<(u64, u64)> = None;
            for index in c * chunk..((c + 1) * chunk).min(total) {
                let coloring = coloring_from_index(index, n, k);
                if !coloring.present().is_superset(full) {
                    continue;
                }
                let cost_c = coloring.cost(instance.color_costs());
                if let Some((b, _)) = best {
                    if cost_c + bound >= b {
                        continue;
                    }
                }
                let paths = match &simple {
                    Some(sp) => sp.total_cost(n, &coloring, full),
                    None => all_pairs_covering_cost(graph, &coloring, k)?.total_path_cost.map(|p| 2 * p),
                };
                if let Some(p) = paths {
                    let objective = cost_c + p;
                    if best.is_none_or(|(b, _)| objective < b) {
                        best = Some((objective, index));
                    }
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .min();

    let (objective, index) = best.ok_or_else(|| {
        Error::Infeasible(format!("no colouring of {n} nodes covers all {k} colours"))
    })?;
    let coloring = coloring_from_index(index, n, k);
    let solution = match &simple {
        None => ExplicitSolution::from_coloring(instance, &coloring)?,
        Some(sp) => {
            let node_sets: Vec<ColorSet> = (0..n).map(|i| coloring.node_set(i)).collect();
            let mut pairs = Vec::new();
            for s in 0..n {
                for t in s + 1..n {
                    let (cost, path) = sp
                        .covering(n, s, t, &node_sets, full)
                        .expect("optimal colouring covers every pair");
                    pairs.push(PairPath { s, t, path: path.clone(), cost: *cost });
                }
            }
            ExplicitSolution {
                coloring,
                pairs,
                objective,
                mode: PathMode::Simple,
            }
        }
    };
    debug_assert_eq!(solution.objective, objective);
    Ok(BruteForceOutcome {
        solution,
        colorings_visited: total,
    })
}

/// A broken constraint of the integer model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    ColoringLength { expected: usize, found: usize },
    /// Colour index outside the instance's colour set.
    ColorOutOfRange { node: NodeId, color: usize },
    MissingPair { s: NodeId, t: NodeId },
    DuplicatePair { s: NodeId, t: NodeId },
    /// The route does not start at `s` and end at `t`.
    BadEndpoints { s: NodeId, t: NodeId },
    NotAdjacent { s: NodeId, t: NodeId, from: NodeId, to: NodeId },
    RepeatedNode { s: NodeId, t: NodeId, node: NodeId },
    MissingColor { s: NodeId, t: NodeId, color: usize },
    PathCostMismatch { s: NodeId, t: NodeId, declared: Weight, actual: Weight },
    ObjectiveMismatch { declared: u64, actual: u64 },
}

impl Violation {
    /// Constraint family of the integer model the violation belongs to.
    pub fn constraint(&self) -> &'static str {
        match self {
            Violation::ColoringLength { .. } | Violation::ColorOutOfRange { .. } => {
                "each node carries at most one colour"
            }
            Violation::MissingPair { .. }
            | Violation::DuplicatePair { .. }
            | Violation::BadEndpoints { .. }
            | Violation::NotAdjacent { .. } => "flow conservation from s to t",
            Violation::RepeatedNode { .. } => "subtour elimination",
            Violation::MissingColor { .. } => "every path sees every colour",
            Violation::PathCostMismatch { .. } | Violation::ObjectiveMismatch { .. } => {
                "objective value"
            }
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {self:?}", self.constraint())
    }
}

pub fn validate_solution(instance: &Instance, sol: &ExplicitSolution, mode: PathMode) -> Vec<Violation> {
    let graph = instance.graph();
    let n = graph.node_count();
    let k = instance.num_colors();
    let mut violations = Vec::new();

    if sol.coloring.node_count() != n {
        violations.push(Violation::ColoringLength {
            expected: n,
            found: sol.coloring.node_count(),
        });
        return violations;
    }
    for node in 0..n {
        if let Some(c) = sol.coloring.color(node) {
            if c >= k {
                violations.push(Violation::ColorOutOfRange { node, color: c });
            }
        }
    }

    let mut seen = vec![false; n * n];
    let mut path_total: u64 = 0;
    for pp in &sol.pairs {
        let (s, t) = (pp.s.min(pp.t), pp.s.max(pp.t));
        if s == t || t >= n {
            violations.push(Violation::BadEndpoints { s: pp.s, t: pp.t });
            continue;
        }
        if std::mem::replace(&mut seen[s * n + t], true) {
            violations.push(Violation::DuplicatePair { s, t });
            continue;
        }
        let path = &pp.path;
        let forward = path.first() == Some(&pp.s) && path.last() == Some(&pp.t);
        if !forward || path.iter().any(|&v| v >= n) {
            violations.push(Violation::BadEndpoints { s: pp.s, t: pp.t });
            continue;
        }

        let mut actual: Weight = 0;
        for w in path.windows(2) {
            match graph.edge_weight(w[0], w[1]) {
                Some(weight) => actual += weight,
                None => violations.push(Violation::NotAdjacent {
                    s: pp.s,
                    t: pp.t,
                    from: w[0],
                    to: w[1],
                }),
            }
        }
        if mode == PathMode::Simple {
            let mut on_path = vec![false; n];
            for &v in path {
                if std::mem::replace(&mut on_path[v], true) {
                    violations.push(Violation::RepeatedNode { s: pp.s, t: pp.t, node: v });
                    break;
                }
            }
        }
        let covered = path
            .iter()
            .fold(ColorSet::EMPTY, |acc, &v| acc.union(sol.coloring.node_set(v)));
        for color in 0..k {
            if !covered.contains(color) {
                violations.push(Violation::MissingColor { s: pp.s, t: pp.t, color });
            }
        }
        if actual != pp.cost {
            violations.push(Violation::PathCostMismatch {
                s: pp.s,
                t: pp.t,
                declared: pp.cost,
                actual,
            });
        }
        path_total += pp.cost;
    }
    for s in 0..n {
        for t in s + 1..n {
            if !seen[s * n + t] {
                violations.push(Violation::MissingPair { s, t });
            }
        }
    }

    let actual = sol.coloring.cost(instance.color_costs()) + 2 * path_total;
    if actual != sol.objective {
        violations.push(Violation::ObjectiveMismatch {
            declared: sol.objective,
            actual,
        });
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    fn k2() -> Instance {
        Instance::new(WeightedGraph::new(2, [Edge::new(0, 1, 5)]).unwrap(), vec![7]).unwrap()
    }

    fn triangle() -> Instance {
        let g = WeightedGraph::new(3, [Edge::new(0, 1, 1), Edge::new(1, 2, 1), Edge::new(0, 2, 1)]).unwrap();
        Instance::new(g, vec![1, 1, 1]).unwrap()
    }

    #[test]
    fn index_order_is_lexicographic() {
        let c = |i| coloring_from_index(i, 2, 1).assignment().to_vec();
        assert_eq!(c(0), vec![Some(0), Some(0)]);
        assert_eq!(c(1), vec![Some(0), None]);
        assert_eq!(c(2), vec![None, Some(0)]);
        assert_eq!(c(3), vec![None, None]);
    }

    #[test]
    fn k2_optimum_colours_node_zero() {
        for mode in [PathMode::Walk, PathMode::Simple] {
            let out = brute_force_solve(&k2(), mode).unwrap();
            // Colour 7 plus the edge counted in both directions.
            assert_eq!(out.solution.objective, 17);
            assert_eq!(out.solution.coloring.assignment(), &[Some(0), None]);
            assert_eq!(out.colorings_visited, 4);
            assert!(validate_solution(&k2(), &out.solution, mode).is_empty());
        }
    }

    #[test]
    fn triangle_optimum_colours_everything() {
        let out = brute_force_solve(&triangle(), PathMode::Walk).unwrap();
        assert_eq!(out.solution.objective, 15);
        assert_eq!(out.solution.coloring.colored_count(), 3);
        assert_eq!(out.colorings_visited, 64);
    }

    #[test]
    fn capacity_guard() {
        let n = 12;
        let g = WeightedGraph::new(n, (0..n - 1).map(|i| Edge::new(i, i + 1, 1))).unwrap();
        let inst = Instance::new(g, vec![1, 1, 1, 1]).unwrap();
        assert!(matches!(
            brute_force_solve(&inst, PathMode::Walk),
            Err(Error::Capacity { required: 244_140_625, .. })
        ));
    }

    #[test]
    fn too_few_nodes_is_infeasible() {
        let inst = Instance::new(WeightedGraph::new(2, [Edge::new(0, 1, 5)]).unwrap(), vec![1, 1, 1]).unwrap();
        assert!(matches!(brute_force_solve(&inst, PathMode::Walk), Err(Error::Infeasible(_))));
    }

    #[test]
    fn validator_flags_missing_colour() {
        let inst = triangle();
        let mut sol = brute_force_solve(&inst, PathMode::Walk).unwrap().solution;
        // Route (0, 1) directly: it misses colour 2 but keeps cost and objective consistent.
        let pair = sol.pairs.iter_mut().find(|p| (p.s, p.t) == (0, 1)).unwrap();
        pair.path = vec![0, 1];
        let saved = pair.cost - 1;
        pair.cost = 1;
        sol.objective -= 2 * saved;
        let v = validate_solution(&inst, &sol, PathMode::Walk);
        assert_eq!(v, vec![Violation::MissingColor { s: 0, t: 1, color: 2 }]);
        assert!(v[0].constraint().starts_with("every path sees"));
    }

    #[test]
    fn validator_flags_repeated_node_in_simple_mode() {
        let g = WeightedGraph::new(3, [Edge::new(0, 1, 1), Edge::new(1, 2, 1)]).unwrap();
        let inst = Instance::new(g, vec![1]).unwrap();
        let c = Coloring::from_assignment(vec![None, None, Some(0)]);
        let sol = ExplicitSolution::from_coloring(&inst, &c).unwrap();
        assert!(validate_solution(&inst, &sol, PathMode::Walk).is_empty());
        let v = validate_solution(&inst, &sol, PathMode::Simple);
        assert_eq!(v, vec![Violation::RepeatedNode { s: 0, t: 1, node: 1 }]);
        assert_eq!(v[0].constraint(), "subtour elimination");
    }

    #[test]
    fn validator_flags_structural_problems() {
        let inst = triangle();
        let mut sol = brute_force_solve(&inst, PathMode::Walk).unwrap().solution;
        sol.pairs.pop();
        sol.objective += 1;
        let v = validate_solution(&inst, &sol, PathMode::Walk);
        assert!(v.iter().any(|x| matches!(x, Violation::MissingPair { .. })));
        assert!(v.iter().any(|x| matches!(x, Violation::ObjectiveMismatch { .. })));

        let mut sol = brute_force_solve(&inst, PathMode::Walk).unwrap().solution;
        sol.pairs[0].path.reverse();
        let v = validate_solution(&inst, &sol, PathMode::Walk);
        assert!(matches!(v[0], Violation::BadEndpoints { .. }));
    }

    #[test]
    fn json_shape() {
        let sol = brute_force_solve(&k2(), PathMode::Walk).unwrap().solution;
        let value: serde_json::Value = serde_json::from_str(&sol.to_json()).unwrap();
        assert_eq!(value["mode"], "walk");
        assert_eq!(value["objective"], 17);
        assert_eq!(value["coloring"], serde_json::json!([0, null]));
        assert_eq!(value["pairs"][0]["path"], serde_json::json!([0, 1]));
        assert_eq!(ExplicitSolution::from_json(&sol.to_json()).unwrap(), sol);
    }
}

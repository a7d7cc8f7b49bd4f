//! Randomised invariants over small graphs.

use apspc_core::brkga::{evolve, BrkgaParams, RunReport};
use apspc_core::oracle::{brute_force_solve, validate_solution, PathMode};
use apspc_core::{
    cd, compute_num_colors, covering_costs_from, generate_instance, Coloring, CostRange, Edge,
    Instance, WeightedGraph,
};
use proptest::prelude::*;

/// Connected graph: a random tree plus a random subset of the other pairs.
fn graph_strategy(max_n: usize) -> impl Strategy<Value = WeightedGraph> {
    (2..=max_n)
        .prop_flat_map(|n| {
            let pairs = n * (n - 1) / 2;
            (
                Just(n),
                proptest::collection::vec(0usize..1000, n - 1),
                proptest::collection::vec(1u64..=20, pairs),
                proptest::collection::vec(proptest::bool::weighted(0.3), pairs),
            )
        })
        .prop_map(|(n, parents, weights, extra)| {
            let mut tree = vec![vec![false; n]; n];
            for v in 1..n {
                tree[parents[v - 1] % v][v] = true;
            }
            let mut edges = Vec::new();
            let mut idx = 0;
            for u in 0..n {
                for v in u + 1..n {
                    if tree[u][v] || extra[idx] {
                        edges.push(Edge::new(u, v, weights[idx]));
                    }
                    idx += 1;
                }
            }
            WeightedGraph::new(n, edges).expect("tree edges keep the graph connected")
        })
}

fn coloring_strategy(n: usize, k: usize) -> impl Strategy<Value = Coloring> {
    proptest::collection::vec(proptest::option::of(0..k as u8), n).prop_map(Coloring::from_assignment)
}

fn case_strategy(max_n: usize, max_k: usize) -> impl Strategy<Value = (WeightedGraph, usize, Coloring)> {
    (graph_strategy(max_n), 1..=max_k).prop_flat_map(|(g, k)| {
        let n = g.node_count();
        (Just(g), Just(k), coloring_strategy(n, k))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn covering_cost_is_at_least_classical((g, k, c) in case_strategy(8, 3)) {
        for s in 0..g.node_count() {
            let classical = g.distances_from(s);
            let covering = covering_costs_from(&g, &c, k, s).unwrap();
            for t in 0..g.node_count() {
                if let Some(cost) = covering[t] {
                    prop_assert!(cost >= classical[t].0);
                }
            }
        }
    }

    #[test]
    fn fully_coloured_single_colour_matches_classical(g in graph_strategy(8)) {
        let c = Coloring::from_assignment(vec![Some(0); g.node_count()]);
        for s in 0..g.node_count() {
            let classical = g.distances_from(s);
            let covering = covering_costs_from(&g, &c, 1, s).unwrap();
            for t in 0..g.node_count() {
                let expected = (t != s).then_some(classical[t].0);
                prop_assert_eq!(covering[t], expected);
            }
        }
    }

    #[test]
    fn adding_a_colour_never_hurts((g, k, c) in case_strategy(8, 3), pick in 0usize..64, color in 0usize..3) {
        let uncoloured: Vec<usize> = (0..g.node_count()).filter(|&v| c.color(v).is_none()).collect();
        prop_assume!(!uncoloured.is_empty());
        let node = uncoloured[pick % uncoloured.len()];
        let mut more = c.clone();
        more.set(node, Some(color % k));
        for s in 0..g.node_count() {
            let before = covering_costs_from(&g, &c, k, s).unwrap();
            let after = covering_costs_from(&g, &more, k, s).unwrap();
            for t in 0..g.node_count() {
                match (before[t], after[t]) {
                    (Some(b), Some(a)) => prop_assert!(a <= b),
                    (Some(_), None) => prop_assert!(false, "pair ({}, {}) lost its walk", s, t),
                    _ => {}
                }
            }
        }
    }

    #[test]
    fn cd_is_monotone(a in 2.0f64..40.0, b in 2.0f64..40.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(cd(lo).unwrap() <= cd(hi).unwrap());
    }

    #[test]
    fn generated_colour_counts_are_odd(n in 4usize..=14, d in 0.5f64..=1.0, seed in any::<u64>()) {
        let inst = generate_instance(n, d, CostRange::new(1, 125).unwrap(), seed).unwrap();
        let k = inst.num_colors();
        prop_assert!(k >= 3 && k % 2 == 1);
        prop_assert_eq!(k as u32, compute_num_colors(inst.graph()).unwrap());
    }

    #[test]
    fn generation_is_deterministic(n in 2usize..=16, d in 0.2f64..=1.0, seed in any::<u64>()) {
        let cr = CostRange::new(50, 150).unwrap();
        let a = generate_instance(n, d, cr, seed);
        let b = generate_instance(n, d, cr, seed);
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a.to_json(), b.to_json()),
            (Err(a), Err(b)) => prop_assert_eq!(a.to_string(), b.to_string()),
            _ => prop_assert!(false, "same inputs, different outcomes"),
        }
    }
}

#[test]
fn cd_is_idempotent_on_odd_integers() {
    for k in (3..=41).step_by(2) {
        assert_eq!(cd(k as f64).unwrap(), k);
        assert_eq!(cd(cd(k as f64).unwrap() as f64).unwrap(), k);
    }
}

fn small_instance(g: WeightedGraph, k: usize) -> Instance {
    let costs = (0..k as u64).map(|i| 10 + 7 * i).collect();
    Instance::new(g, costs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn validator_accepts_oracle_output(g in graph_strategy(6), k in 1usize..=3) {
        let inst = small_instance(g, k);
        for mode in [PathMode::Walk, PathMode::Simple] {
            if let Ok(out) = brute_force_solve(&inst, mode) {
                prop_assert_eq!(validate_solution(&inst, &out.solution, mode), vec![]);
            }
        }
    }

    #[test]
    fn walk_optimum_never_exceeds_simple_optimum(g in graph_strategy(6), k in 1usize..=3) {
        let inst = small_instance(g, k);
        match (brute_force_solve(&inst, PathMode::Walk), brute_force_solve(&inst, PathMode::Simple)) {
            (Ok(walk), Ok(simple)) => prop_assert!(walk.solution.objective <= simple.solution.objective),
            (Err(_), Ok(_)) => prop_assert!(false, "simple feasible but walk infeasible"),
            _ => {}
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn incumbent_never_gets_worse(n in 4usize..=7, seed in 0u64..1000) {
        let inst = generate_instance(n, 0.5, CostRange::new(1, 125).unwrap(), seed).unwrap();
        let params = BrkgaParams { master_seed: seed, ..BrkgaParams::default() };
        let run = evolve(&inst, &params).unwrap();
        for w in run.history.windows(2) {
            prop_assert!(!w[0].best_feasible || w[1].best_feasible);
            if w[0].best_feasible {
                prop_assert!(w[1].best_fitness <= w[0].best_fitness);
            }
        }
    }

    #[test]
    fn runs_are_reproducible(n in 4usize..=7, seed in 0u64..1000) {
        let inst = generate_instance(n, 0.5, CostRange::new(50, 150).unwrap(), seed).unwrap();
        let params = BrkgaParams { master_seed: seed, ..BrkgaParams::default() };
        let a = RunReport::new("inst", &params, &evolve(&inst, &params).unwrap()).without_timing();
        let b = RunReport::new("inst", &params, &evolve(&inst, &params).unwrap()).without_timing();
        prop_assert_eq!(a.to_json(), b.to_json());
    }
}

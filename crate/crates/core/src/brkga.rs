//! Multi-parent, multi-population biased random-key genetic algorithm.
//!
//! A chromosome holds one key in `[0, 1]` per node. The decoder seeds a
//! generator from the first key, then walks the nodes in order: it draws a
//! candidate colour and asks [`should_color_node`] whether to assign it. The
//! resulting colouring is scored by [`calculate_fitness`], which adds the
//! colouring cost to the all-pairs covering path cost.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::color_path::{all_pairs_covering_cost, ColorSet, Coloring};
use crate::error::{Error, Result};
use crate::graph::{GraphStats, NodeId};
use crate::instance::Instance;
use crate::rng::{self, StreamRng};

/// Keys below this value bypass the degree/weight scaling and colour the node.
const LOW_GENE_THRESHOLD: f64 = 0.1;
/// Colour-cost factor at or below which a node is coloured unconditionally.
const CHEAP_COLOR_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Chromosome(Vec<f64>);

impl Chromosome {
    pub fn new(keys: Vec<f64>) -> Result<Self> {
        if let Some(i) = keys.iter().position(|k| !(0.0..=1.0).contains(k)) {
            return Err(Error::InvalidArguments(format!(
                "key {i} = {} lies outside [0, 1]",
                keys[i]
            )));
        }
        Ok(Chromosome(keys))
    }

    pub fn random<R: Rng>(len: usize, rng: &mut R) -> Self {
        Chromosome((0..len).map(|_| rng.gen::<f64>()).collect())
    }

    pub fn keys(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Seed for the decoder's generator: `floor(key[0] * 2^64)`, saturating.
    pub fn decoder_seed(&self) -> u64 {
        // Float-to-int `as` casts saturate, so key 1.0 maps to u64::MAX.
        (self.0[0] * 18_446_744_073_709_551_616.0) as u64
    }

    /// Node ids ordered by ascending key, ties by id.
    fn permutation(&self) -> Vec<NodeId> {
        let mut order: Vec<NodeId> = (0..self.0.len()).collect();
        order.sort_by(|&a, &b| self.0[a].total_cmp(&self.0[b]).then(a.cmp(&b)));
        order
    }
}

/// Rank weighting for multi-parent crossover; rank 1 is the fittest parent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasFunction {
    /// `1 / r^2`
    InverseQuadratic,
    /// `1 / r`
    Inverse,
    Constant,
}

impl BiasFunction {
    pub fn weight(self, rank: usize) -> f64 {
        let r = rank as f64;
        match self {
            BiasFunction::InverseQuadratic => 1.0 / (r * r),
            BiasFunction::Inverse => 1.0 / r,
            BiasFunction::Constant => 1.0,
        }
    }
}

/// How path-relinking picks its pair of chromosomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IprSelection {
    /// One elite drawn uniformly from each population of the pair.
    RandS,
    /// The best member of each population.
    BestSolution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IprParams {
    pub enabled: bool,
    pub sel: IprSelection,
    /// Minimum normalised Kendall-tau distance for a pair to be relinked.
    pub md: f64,
    /// Fraction of the differing positions walked in each direction.
    pub pct_p: f64,
    /// Generations between relinking rounds.
    pub interval: u32,
}

impl Default for IprParams {
    fn default() -> Self {
        IprParams {
            enabled: false,
            sel: IprSelection::RandS,
            md: 0.15,
            pct_p: 0.85,
            interval: 25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrkgaParams {
    /// Population size factor: each population holds `alpha * n` chromosomes.
    pub alpha: f64,
    pub pct_e: f64,
    pub pct_m: f64,
    /// Parents per child.
    pub pi_t: usize,
    /// Parents per child drawn from the elite set.
    pub pi_e: usize,
    pub bias: BiasFunction,
    /// Number of populations.
    pub m: usize,
    pub ipr: IprParams,
    pub time_limit_s: f64,
    /// Consecutive generations without improvement before stopping.
    pub wi: u32,
    pub master_seed: u64,
    pub exchange_interval: u32,
    pub exchange_count: usize,
}

impl Default for BrkgaParams {
    fn default() -> Self {
        BrkgaParams {
            alpha: 20.0,
            pct_e: 0.1,
            pct_m: 0.6,
            pi_t: 3,
            pi_e: 1,
            bias: BiasFunction::InverseQuadratic,
            m: 2,
            ipr: IprParams::default(),
            time_limit_s: 900.0,
            wi: 10,
            master_seed: 0,
            exchange_interval: 25,
            exchange_count: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PopulationSizes {
    pub population: usize,
    pub elite: usize,
    pub mutants: usize,
    pub offspring: usize,
}

/// `ceil` that ignores representation noise such as `200 * 0.1 = 20.000000000000004`.
fn ceil_count(x: f64) -> usize {
    (x - 1e-9).ceil().max(0.0) as usize
}

impl BrkgaParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameters(msg));
        if !(self.alpha >= 1.0) {
            return bad(format!("alpha must be >= 1, got {}", self.alpha));
        }
        if !(0.1..=0.25).contains(&self.pct_e) {
            return bad(format!("pct_e must lie in [0.1, 0.25], got {}", self.pct_e));
        }
        if !(0.0..=1.0).contains(&self.pct_m) || self.pct_e + self.pct_m > 1.0 {
            return bad(format!(
                "pct_m = {} must be in [0, 1] with pct_e + pct_m <= 1",
                self.pct_m
            ));
        }
        if self.pi_e == 0 || self.pi_e >= self.pi_t {
            return bad(format!(
                "need 1 <= pi_e < pi_t, got pi_e = {}, pi_t = {}",
                self.pi_e, self.pi_t
            ));
        }
        if self.m == 0 {
            return bad("at least one population is required".into());
        }
        if !(self.time_limit_s >= 0.0) {
            return bad(format!("time limit must be >= 0, got {}", self.time_limit_s));
        }
        if self.exchange_interval == 0 || self.ipr.interval == 0 {
            return bad("exchange and relinking intervals must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.ipr.md) || !(0.0..=1.0).contains(&self.ipr.pct_p) {
            return bad("ipr md and pct_p must lie in [0, 1]".into());
        }
        Ok(())
    }

    pub fn sizes(&self, node_count: usize) -> Result<PopulationSizes> {
        let population = ceil_count(self.alpha * node_count as f64);
        let elite = ceil_count(population as f64 * self.pct_e);
        let mutants = ceil_count(population as f64 * self.pct_m);
        if elite + mutants > population {
            return Err(Error::InvalidParameters(format!(
                "population {population} cannot hold {elite} elites and {mutants} mutants"
            )));
        }
        if elite < self.pi_e || population - elite < self.pi_t - self.pi_e {
            return Err(Error::InvalidParameters(format!(
                "population {population} with {elite} elites cannot supply {} elite and {} other parents",
                self.pi_e,
                self.pi_t - self.pi_e
            )));
        }
        Ok(PopulationSizes {
            population,
            elite,
            mutants,
            offspring: population - elite - mutants,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodedSolution {
    pub coloring: Coloring,
    /// Total cost; `None` when infeasible.
    pub fitness: Option<u64>,
    pub cost_c: u64,
    /// Covering cost summed over ordered pairs.
    pub cost_p: Option<u64>,
    pub feasible: bool,
    /// Colours that no node carries.
    pub missing_colors: u32,
}

impl DecodedSolution {
    /// Number of coloured (deployed) nodes.
    pub fn ndy(&self) -> usize {
        self.coloring.colored_count()
    }

    /// Total order used by the search: feasible before infeasible, then by
    /// cost; infeasible solutions prefer fewer missing colours.
    pub fn rank_key(&self) -> (bool, u32, u64) {
        match self.fitness {
            Some(f) if self.feasible => (false, 0, f),
            _ => (true, self.missing_colors, self.cost_c),
        }
    }

    pub fn is_better_than(&self, other: &DecodedSolution) -> bool {
        self.rank_key() < other.rank_key()
    }
}

pub fn calculate_fitness(coloring: &Coloring, instance: &Instance) -> Result<DecodedSolution> {
    let cost_c = coloring.cost(instance.color_costs());
    let all = all_pairs_covering_cost(instance.graph(), coloring, instance.num_colors())?;
    // The objective counts both directions of every pair; covering cost is
    // symmetric, so that is twice the unordered sum.
    let cost_p = all.total_path_cost.map(|p| 2 * p);
    let missing = ColorSet::full(instance.num_colors()).len() - coloring.present().len();
    Ok(DecodedSolution {
        coloring: coloring.clone(),
        fitness: cost_p.map(|p| p + cost_c),
        cost_c,
        cost_p,
        feasible: all.feasible,
        missing_colors: missing,
    })
}

/// Probabilistic colouring rule for one node.
///
/// Cheap colours relative to the node's incident weights are always placed.
/// Otherwise the node's key, scaled by relative degree and inverse relative
/// incident weight, is the acceptance probability (keys under 0.1 accept).
pub fn should_color_node<R: Rng>(
    node: NodeId,
    chromosome: &Chromosome,
    color_cost: u64,
    stats: &GraphStats,
    rng: &mut R,
) -> bool {
    let n = stats.node_degrees.len();
    let avg_node_weight = stats.avg_node_weight[node];
    let color_cost_factor = color_cost as f64 / (avg_node_weight * (n as f64 - 1.0));
    if color_cost_factor <= CHEAP_COLOR_THRESHOLD {
        return true;
    }
    let gene = chromosome.keys()[node];
    let probability = if gene >= LOW_GENE_THRESHOLD {
        gene * (stats.node_degrees[node] as f64 / stats.avg_graph_degree)
            * (stats.avg_graph_weight / avg_node_weight)
    } else {
        1.0
    };
    rng.gen::<f64>() < probability
}

/// Decoder bound to one instance, caching its graph statistics.
pub struct Decoder<'a> {
    instance: &'a Instance,
    stats: GraphStats,
}

impl<'a> Decoder<'a> {
    pub fn new(instance: &'a Instance) -> Self {
        Decoder {
            instance,
            stats: instance.graph().stats(),
        }
    }

    pub fn instance(&self) -> &Instance {
        self.instance
    }

    pub fn coloring(&self, chromosome: &Chromosome) -> Result<Coloring> {
        let n = self.instance.node_count();
        if chromosome.len() != n {
            return Err(Error::InvalidArguments(format!(
                "chromosome has {} keys, instance has {n} nodes",
                chromosome.len()
            )));
        }
        let mut gen = rng::seeded(chromosome.decoder_seed());
        let mut coloring = Coloring::uncolored(n);
        let k = self.instance.num_colors() as u32;
        for node in 0..n {
            let color = gen.gen_range(0..k) as usize;
            let cost = self.instance.color_costs()[color];
            if should_color_node(node, chromosome, cost, &self.stats, &mut gen) {
                coloring.set(node, Some(color));
            }
        }
        Ok(coloring)
    }

    pub fn decode(&self, chromosome: &Chromosome) -> Result<DecodedSolution> {
        calculate_fitness(&self.coloring(chromosome)?, self.instance)
    }
}

pub fn decode(chromosome: &Chromosome, instance: &Instance) -> Result<DecodedSolution> {
    Decoder::new(instance).decode(chromosome)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub chromosome: Chromosome,
    pub solution: DecodedSolution,
}

/// Members kept sorted best first.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    members: Vec<Member>,
}

impl Population {
    pub fn from_members(mut members: Vec<Member>) -> Self {
        sort_members(&mut members);
        Population { members }
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn best(&self) -> &Member {
        &self.members[0]
    }
}

fn sort_members(members: &mut [Member]) {
    members.sort_by_key(|m| m.solution.rank_key());
}

/// Each population receives the `count` best members of every other
/// population in place of its worst ones.
pub fn exchange_elites(populations: &mut [Population], count: usize) {
    if populations.len() < 2 || count == 0 {
        return;
    }
    let tops: Vec<Vec<Member>> = populations
        .iter()
        .map(|p| p.members.iter().take(count).cloned().collect())
        .collect();
    for (i, pop) in populations.iter_mut().enumerate() {
        let incoming: Vec<Member> = tops
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .flat_map(|(_, t)| t.iter().cloned())
            .take(pop.members.len())
            .collect();
        let keep = pop.members.len() - incoming.len();
        pop.members.truncate(keep);
        pop.members.extend(incoming);
        sort_members(&mut pop.members);
    }
}

/// Normalised Kendall-tau distance between the key orders of two chromosomes.
pub fn kendall_tau_distance(a: &Chromosome, b: &Chromosome) -> f64 {
    let n = a.len();
    if n < 2 {
        return 0.0;
    }
    let mut discordant = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            let oa = a.0[i].total_cmp(&a.0[j]).then(i.cmp(&j));
            let ob = b.0[i].total_cmp(&b.0[j]).then(i.cmp(&j));
            if oa != ob {
                discordant += 1;
            }
        }
    }
    discordant as f64 / (n * (n - 1) / 2) as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct IprOutcome {
    pub best: Member,
    pub evaluations: usize,
}

/// Greedy walk from `start` toward `guide`'s key permutation. Each step
/// evaluates every move that puts one more rank position in agreement with
/// the guide (by swapping two keys) and keeps the best one.
fn relink(
    start: &Chromosome,
    guide: &Chromosome,
    pct_p: f64,
    decoder: &Decoder,
    best: &mut Member,
    evaluations: &mut usize,
) -> Result<()> {
    let guide_order = guide.permutation();
    let mut current = start.clone();
    let initial_diff = current
        .permutation()
        .iter()
        .zip(&guide_order)
        .filter(|(a, b)| a != b)
        .count();
    let steps = ((pct_p * initial_diff as f64).floor() as usize).max(1);

    for _ in 0..steps {
        let order = current.permutation();
        let moves: Vec<usize> = (0..order.len()).filter(|&i| order[i] != guide_order[i]).collect();
        if moves.is_empty() {
            break;
        }
        let trials: Vec<Chromosome> = moves
            .iter()
            .map(|&i| {
                let mut keys = current.0.clone();
                keys.swap(order[i], guide_order[i]);
                Chromosome(keys)
            })
            .collect();
        let solutions: Vec<DecodedSolution> = trials
            .par_iter()
            .map(|c| decoder.decode(c))
            .collect::<Result<_>>()?;
        *evaluations += trials.len();

        let (step_idx, _) = solutions
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.rank_key().cmp(&b.1.rank_key()).then(a.0.cmp(&b.0)))
            .expect("at least one move");
        if solutions[step_idx].is_better_than(&best.solution) {
            *best = Member {
                chromosome: trials[step_idx].clone(),
                solution: solutions[step_idx].clone(),
            };
        }
        current = trials[step_idx].clone();
    }
    Ok(())
}

/// Bidirectional permutation-based implicit path-relinking between two
/// members. Returns the best point evaluated, endpoints included.
pub fn ipr_permutation(a: &Member, b: &Member, ipr: &IprParams, decoder: &Decoder) -> Result<IprOutcome> {
    let mut best = if b.solution.is_better_than(&a.solution) {
        b.clone()
    } else {
        a.clone()
    };
    let mut evaluations = 0;
    if a.chromosome == b.chromosome || kendall_tau_distance(&a.chromosome, &b.chromosome) < ipr.md {
        return Ok(IprOutcome { best, evaluations });
    }
    relink(&a.chromosome, &b.chromosome, ipr.pct_p, decoder, &mut best, &mut evaluations)?;
    relink(&b.chromosome, &a.chromosome, ipr.pct_p, decoder, &mut best, &mut evaluations)?;
    Ok(IprOutcome { best, evaluations })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    NoImprovement,
    TimeLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub generation: u32,
    pub best_fitness: Option<u64>,
    pub best_feasible: bool,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub best: Member,
    /// Wall-clock seconds until the final incumbent was found.
    pub best_time_s: f64,
    pub total_time_s: f64,
    pub generations: u32,
    pub stop_reason: StopReason,
    pub history: Vec<IterationRecord>,
}

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error(transparent)]
    Invalid(#[from] Error),
    #[error("no feasible solution found after {} generations", .0.generations)]
    NoFeasibleSolution(Box<RunResult>),
}

/// `count` distinct indices from `lo..hi`, partial Fisher-Yates with 64-bit draws.
fn sample_distinct(rng: &mut StreamRng, lo: usize, hi: usize, count: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (lo..hi).collect();
    for i in 0..count {
        let j = i + rng.gen_range(0..(pool.len() - i) as u64) as usize;
        pool.swap(i, j);
    }
    pool.truncate(count);
    pool
}

fn crossover(pop: &Population, params: &BrkgaParams, elite: usize, rng: &mut StreamRng) -> Chromosome {
    let mut parents = sample_distinct(rng, 0, elite, params.pi_e);
    parents.extend(sample_distinct(rng, elite, pop.len(), params.pi_t - params.pi_e));
    // Population order is fitness order, so sorting indices ranks the parents.
    parents.sort_unstable();
    let weights: Vec<f64> = (1..=parents.len()).map(|r| params.bias.weight(r)).collect();
    let total: f64 = weights.iter().sum();
    let n = pop.best().chromosome.len();
    let keys = (0..n)
        .map(|gene| {
            let mut u = rng.gen::<f64>() * total;
            let mut chosen = parents.len() - 1;
            for (slot, w) in weights.iter().enumerate() {
                if u < *w {
                    chosen = slot;
                    break;
                }
                u -= w;
            }
            pop.members[parents[chosen]].chromosome.0[gene]
        })
        .collect();
    Chromosome(keys)
}

fn decode_all(decoder: &Decoder, chromosomes: Vec<Chromosome>) -> Result<Vec<Member>> {
    chromosomes
        .into_par_iter()
        .map(|chromosome| {
            let solution = decoder.decode(&chromosome)?;
            Ok(Member { chromosome, solution })
        })
        .collect()
}

const IPR_STREAM: u64 = u64::MAX;

/// Runs the genetic search until `wi` generations pass without improvement
/// or the time limit is hit (checked after each complete generation).
///
/// Random streams are keyed by `(master_seed, generation, population, slot)`,
/// so results do not depend on how decoding is scheduled across threads.
pub fn evolve(instance: &Instance, params: &BrkgaParams) -> Result<RunResult, EvolveError> {
    params.validate()?;
    let n = instance.node_count();
    let sizes = params.sizes(n)?;
    let decoder = Decoder::new(instance);
    let seed = params.master_seed;
    let started = Instant::now();

    let mut populations = (0..params.m)
        .map(|p| {
            let chromosomes = (0..sizes.population)
                .map(|i| Chromosome::random(n, &mut rng::derived(seed, 0, p as u64, i as u64)))
                .collect();
            Ok(Population::from_members(decode_all(&decoder, chromosomes)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let overall_best = |pops: &[Population]| -> Member {
        pops.iter()
            .map(Population::best)
            .fold(None::<&Member>, |acc, m| match acc {
                Some(b) if !m.solution.is_better_than(&b.solution) => Some(b),
                _ => Some(m),
            })
            .expect("at least one population")
            .clone()
    };

    let mut generation = 1u32;
    let mut incumbent = overall_best(&populations);
    let mut best_time_s = started.elapsed().as_secs_f64();
    let mut history = vec![IterationRecord {
        generation,
        best_fitness: incumbent.solution.fitness,
        best_feasible: incumbent.solution.feasible,
        elapsed_s: best_time_s,
    }];
    let mut stall = 0u32;

    let stop_reason = loop {
        if started.elapsed().as_secs_f64() >= params.time_limit_s {
            break StopReason::TimeLimit;
        }
        if stall >= params.wi {
            break StopReason::NoImprovement;
        }
        generation += 1;
        let g = generation as u64;

        for (p, pop) in populations.iter_mut().enumerate() {
            let p = p as u64;
            let mut fresh = Vec::with_capacity(sizes.mutants + sizes.offspring);
            for i in 0..sizes.mutants {
                fresh.push(Chromosome::random(n, &mut rng::derived(seed, g, p, i as u64)));
            }
            for i in 0..sizes.offspring {
                let mut r = rng::derived(seed, g, p, (sizes.mutants + i) as u64);
                fresh.push(crossover(pop, params, sizes.elite, &mut r));
            }
            let mut next: Vec<Member> = pop.members[..sizes.elite].to_vec();
            next.extend(decode_all(&decoder, fresh)?);
            *pop = Population::from_members(next);
        }

        if populations.len() > 1 && generation % params.exchange_interval == 0 {
            exchange_elites(&mut populations, params.exchange_count);
        }
        if params.ipr.enabled && generation % params.ipr.interval == 0 {
            relink_populations(&mut populations, params, sizes.elite, &decoder, g)?;
        }

        let candidate = overall_best(&populations);
        let elapsed = started.elapsed().as_secs_f64();
        if candidate.solution.is_better_than(&incumbent.solution) {
            incumbent = candidate;
            best_time_s = elapsed;
            stall = 0;
        } else {
            stall += 1;
        }
        history.push(IterationRecord {
            generation,
            best_fitness: incumbent.solution.fitness,
            best_feasible: incumbent.solution.feasible,
            elapsed_s: elapsed,
        });
    };

    let result = RunResult {
        best: incumbent,
        best_time_s,
        total_time_s: started.elapsed().as_secs_f64(),
        generations: generation,
        stop_reason,
        history,
    };
    if result.best.solution.feasible {
        Ok(result)
    } else {
        Err(EvolveError::NoFeasibleSolution(Box::new(result)))
    }
}

/// Relinks each population with the next one (cyclically) and lets the result
/// replace the receiving population's worst member when it is better.
fn relink_populations(
    populations: &mut [Population],
    params: &BrkgaParams,
    elite: usize,
    decoder: &Decoder,
    generation: u64,
) -> Result<()> {
    let m = populations.len();
    for i in 0..m {
        let j = (i + 1) % m;
        let mut r = rng::derived(params.master_seed, generation, IPR_STREAM, i as u64);
        let (a, b) = match params.ipr.sel {
            IprSelection::RandS => {
                let ia = r.gen_range(0..elite as u64) as usize;
                let mut ib = r.gen_range(0..elite as u64) as usize;
                if i == j && elite > 1 && ia == ib {
                    ib = (ib + 1) % elite;
                }
                (populations[i].members[ia].clone(), populations[j].members[ib].clone())
            }
            IprSelection::BestSolution => {
                let other = if i == j { 1.min(populations[j].len() - 1) } else { 0 };
                (populations[i].members[0].clone(), populations[j].members[other].clone())
            }
        };
        let outcome = ipr_permutation(&a, &b, &params.ipr, decoder)?;
        let pop = &mut populations[i];
        let worst = pop.members.last().expect("non-empty population");
        if outcome.best.solution.is_better_than(&worst.solution) && !pop.members.contains(&outcome.best) {
            pop.members.pop();
            pop.members.push(outcome.best);
            sort_members(&mut pop.members);
        }
    }
    Ok(())
}

/// Serializable record of one solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub instance_ref: String,
    pub params: BrkgaParams,
    pub best: BestRecord,
    pub best_time_s: f64,
    pub total_time_s: f64,
    pub generations: u32,
    pub stop_reason: StopReason,
    pub history: Vec<IterationRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestRecord {
    pub coloring: Coloring,
    pub fitness: Option<u64>,
    pub cost_c: u64,
    pub cost_p: Option<u64>,
    pub feasible: bool,
    pub ndy: usize,
}

impl RunReport {
    pub fn new(instance_ref: impl Into<String>, params: &BrkgaParams, run: &RunResult) -> Self {
        let s = &run.best.solution;
        RunReport {
            instance_ref: instance_ref.into(),
            params: params.clone(),
            best: BestRecord {
                coloring: s.coloring.clone(),
                fitness: s.fitness,
                cost_c: s.cost_c,
                cost_p: s.cost_p,
                feasible: s.feasible,
                ndy: s.ndy(),
            },
            best_time_s: run.best_time_s,
            total_time_s: run.total_time_s,
            generations: run.generations,
            stop_reason: run.stop_reason,
            history: run.history.clone(),
        }
    }

    /// Copy with every wall-clock field zeroed, for reproducibility checks.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        r.best_time_s = 0.0;
        r.total_time_s = 0.0;
        r.history.iter_mut().for_each(|h| h.elapsed_s = 0.0);
        r
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, WeightedGraph};

    fn k2_instance(cost: u64) -> Instance {
        let g = WeightedGraph::new(2, [Edge::new(0, 1, 5)]).unwrap();
        Instance::new(g, vec![cost]).unwrap()
    }

    fn stats_for(node_count: usize, degree: usize, node_weight: f64) -> GraphStats {
        GraphStats {
            node_degrees: vec![degree; node_count],
            avg_graph_degree: degree as f64,
            avg_graph_weight: node_weight,
            avg_node_weight: vec![node_weight; node_count],
        }
    }

    #[test]
    fn cheap_colour_always_placed() {
        let stats = stats_for(11, 3, 100.0);
        let chrom = Chromosome::new(vec![0.99; 11]).unwrap();
        let mut r = rng::seeded(1);
        for _ in 0..100 {
            assert!(should_color_node(4, &chrom, 10, &stats, &mut r));
        }
    }

    #[test]
    fn low_gene_always_placed() {
        let stats = stats_for(11, 3, 1.0);
        let chrom = Chromosome::new(vec![0.05; 11]).unwrap();
        let mut r = rng::seeded(2);
        for _ in 0..1000 {
            assert!(should_color_node(3, &chrom, 1000, &stats, &mut r));
        }
    }

    #[test]
    fn acceptance_rate_tracks_node_probability() {
        let stats = stats_for(11, 3, 1.0);
        let chrom = Chromosome::new(vec![0.5; 11]).unwrap();
        let mut r = rng::seeded(3);
        let draws = 100_000;
        let hits = (0..draws)
            .filter(|_| should_color_node(0, &chrom, 1000, &stats, &mut r))
            .count();
        let rate = hits as f64 / draws as f64;
        assert!((rate - 0.5).abs() <= 0.01, "rate {rate}");
    }

    #[test]
    fn decoder_seed_mapping() {
        assert_eq!(Chromosome(vec![0.0]).decoder_seed(), 0);
        assert_eq!(Chromosome(vec![1.0]).decoder_seed(), u64::MAX);
        assert_eq!(Chromosome(vec![0.5]).decoder_seed(), 1 << 63);
        assert!(Chromosome::new(vec![1.5]).is_err());
        assert!(Chromosome::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn decode_checks_length() {
        let inst = k2_instance(7);
        assert!(matches!(
            decode(&Chromosome(vec![0.3]), &inst),
            Err(Error::InvalidArguments(_))
        ));
    }

    #[test]
    fn fitness_small_cases() {
        let inst = k2_instance(7);
        let s = calculate_fitness(&Coloring::from_assignment(vec![Some(0), None]), &inst).unwrap();
        // The single edge is paid once per direction.
        assert_eq!((s.cost_c, s.cost_p, s.fitness), (7, Some(10), Some(17)));
        assert!(s.feasible);
        let s = calculate_fitness(&Coloring::uncolored(2), &inst).unwrap();
        assert!(!s.feasible);
        assert_eq!(s.fitness, None);
        assert_eq!(s.missing_colors, 1);
    }

    #[test]
    fn rank_key_orders_feasibility_first() {
        let inst = k2_instance(7);
        let good = calculate_fitness(&Coloring::from_assignment(vec![Some(0), Some(0)]), &inst).unwrap();
        let bad = calculate_fitness(&Coloring::uncolored(2), &inst).unwrap();
        assert!(good.is_better_than(&bad));
        assert!(!bad.is_better_than(&good));
    }

    #[test]
    fn params_defaults_and_sizes() {
        let p = BrkgaParams::default();
        p.validate().unwrap();
        let s = p.sizes(10).unwrap();
        assert_eq!(s, PopulationSizes { population: 200, elite: 20, mutants: 120, offspring: 60 });
        let s = p.sizes(7).unwrap();
        assert_eq!((s.population, s.elite, s.mutants), (140, 14, 84));

        let mut bad = p.clone();
        bad.pct_e = 0.3;
        assert!(bad.validate().is_err());
        bad = p.clone();
        bad.pi_e = 3;
        assert!(bad.validate().is_err());
        bad = p.clone();
        bad.alpha = 0.5;
        assert!(bad.validate().is_err());
        bad = p.clone();
        bad.pct_m = 0.95;
        assert!(bad.validate().is_err());
    }

    fn member(fitness: u64, tag: f64) -> Member {
        Member {
            chromosome: Chromosome(vec![tag]),
            solution: DecodedSolution {
                coloring: Coloring::uncolored(1),
                fitness: Some(fitness),
                cost_c: 0,
                cost_p: Some(fitness),
                feasible: true,
                missing_colors: 0,
            },
        }
    }

    #[test]
    fn exchange_replaces_worst() {
        let mut pops = vec![
            Population::from_members(vec![member(10, 0.1), member(20, 0.2), member(30, 0.3)]),
            Population::from_members(vec![member(5, 0.4), member(50, 0.5), member(60, 0.6)]),
        ];
        exchange_elites(&mut pops, 1);
        let f = |p: &Population| p.members().iter().map(|m| m.solution.fitness.unwrap()).collect::<Vec<_>>();
        assert_eq!(f(&pops[0]), vec![5, 10, 20]);
        assert_eq!(f(&pops[1]), vec![5, 10, 50]);

        let mut single = vec![Population::from_members(vec![member(1, 0.0), member(2, 0.1)])];
        let before = single.clone();
        exchange_elites(&mut single, 2);
        assert_eq!(single, before);
    }

    #[test]
    fn kendall_tau_extremes() {
        let a = Chromosome(vec![0.1, 0.2, 0.3, 0.4]);
        let b = Chromosome(vec![0.4, 0.3, 0.2, 0.1]);
        assert_eq!(kendall_tau_distance(&a, &a), 0.0);
        assert_eq!(kendall_tau_distance(&a, &b), 1.0);
    }
}

//! `apspc`: generate, solve, check and evaluate APSPC instances.
//!
//! Exit codes: 0 on success, 1 for usage or I/O errors, 2 when a solve ends
//! infeasible or a validation finds violations.

mod campaign;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use apspc_core::brkga::{self, BrkgaParams, EvolveError, RunReport};
use apspc_core::metrics;
use apspc_core::oracle::{self, ExplicitSolution, PathMode};
use apspc_core::{generate_instance, Coloring, CostRange, Instance};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "apspc", version, about = "All-pairs shortest path colouring toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance.
    Gen(GenArgs),
    /// Solve an instance with the genetic algorithm.
    Solve(SolveArgs),
    /// Solve a small instance exactly by enumeration.
    Exact(ExactArgs),
    /// Check an explicit solution against the model constraints.
    Validate(ValidateArgs),
    /// Compute the weighted detour metric of a solution.
    Awdelay(AwdelayArgs),
    /// Generate and solve a grid of instances and write summary tables.
    Campaign(campaign::CampaignArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    /// Edge density in (0, 1].
    #[arg(long)]
    d: f64,
    /// Colour cost range as LO:HI.
    #[arg(long, value_parser = parse_cost_range)]
    cr: CostRange,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: PathBuf,
}

/// Overrides for the solver defaults.
#[derive(Args, Clone, Default)]
pub struct BrkgaFlags {
    /// Wall-clock limit in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Generations without improvement before stopping.
    #[arg(long)]
    wi: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    pct_e: Option<f64>,
    #[arg(long)]
    pct_m: Option<f64>,
    #[arg(long)]
    pi_t: Option<usize>,
    #[arg(long)]
    pi_e: Option<usize>,
    /// Number of populations.
    #[arg(long)]
    populations: Option<usize>,
    #[arg(long)]
    exchange_interval: Option<u32>,
    #[arg(long)]
    exchange_count: Option<usize>,
    /// Enable implicit path-relinking between populations.
    #[arg(long)]
    ipr: bool,
}

impl BrkgaFlags {
    pub fn apply(&self, mut p: BrkgaParams) -> BrkgaParams {
        if let Some(v) = self.time_limit {
            p.time_limit_s = v;
        }
        if let Some(v) = self.wi {
            p.wi = v;
        }
        if let Some(v) = self.seed {
            p.master_seed = v;
        }
        if let Some(v) = self.alpha {
            p.alpha = v;
        }
        if let Some(v) = self.pct_e {
            p.pct_e = v;
        }
        if let Some(v) = self.pct_m {
            p.pct_m = v;
        }
        if let Some(v) = self.pi_t {
            p.pi_t = v;
        }
        if let Some(v) = self.pi_e {
            p.pi_e = v;
        }
        if let Some(v) = self.populations {
            p.m = v;
        }
        if let Some(v) = self.exchange_interval {
            p.exchange_interval = v;
        }
        if let Some(v) = self.exchange_count {
            p.exchange_count = v;
        }
        p.ipr.enabled |= self.ipr;
        p
    }

    pub fn seed_overridden(&self) -> bool {
        self.seed.is_some()
    }
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    #[command(flatten)]
    brkga: BrkgaFlags,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Walk,
    Simple,
}

impl From<ModeArg> for PathMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Walk => PathMode::Walk,
            ModeArg::Simple => PathMode::Simple,
        }
    }
}

#[derive(Args)]
struct ExactArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "walk")]
    mode: ModeArg,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    instance: PathBuf,
    /// Explicit solution JSON.
    solution: PathBuf,
    /// Path semantics to check; defaults to the solution's own mode.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
}

#[derive(Args)]
struct AwdelayArgs {
    instance: PathBuf,
    /// Run report or explicit solution JSON.
    solution: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

pub(crate) fn parse_cost_range(s: &str) -> Result<CostRange, String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected LO:HI, got {s:?}"))?;
    let lo = lo.trim().parse().map_err(|e| format!("bad lower bound: {e}"))?;
    let hi = hi.trim().parse().map_err(|e| format!("bad upper bound: {e}"))?;
    CostRange::new(lo, hi).map_err(|e| e.to_string())
}

enum Outcome {
    Ok,
    /// Infeasible result or constraint violations.
    Flagged,
}

fn cmd_gen(args: &GenArgs) -> Result<Outcome> {
    let inst = generate_instance(args.n, args.d, args.cr, args.seed)?;
    io::write_atomic(&args.output, &inst.to_json())?;
    println!(
        "wrote {} ({} nodes, {} edges), #colors = {}",
        args.output.display(),
        inst.node_count(),
        inst.graph().edge_count(),
        inst.num_colors()
    );
    Ok(Outcome::Ok)
}

fn cmd_solve(args: &SolveArgs) -> Result<Outcome> {
    let inst = io::read_instance(&args.instance)?;
    let params = args.brkga.apply(BrkgaParams::default());
    let instance_ref = args.instance.display().to_string();
    let (run, outcome) = match brkga::evolve(&inst, &params) {
        Ok(run) => (run, Outcome::Ok),
        Err(EvolveError::NoFeasibleSolution(run)) => (*run, Outcome::Flagged),
        Err(EvolveError::Invalid(e)) => return Err(e.into()),
    };
    let report = RunReport::new(instance_ref, &params, &run);
    io::write_atomic(&args.output, &report.to_json())?;
    let best = &report.best;
    match best.fitness {
        Some(f) => println!(
            "cost {f} (colouring {}, paths {}), {} nodes deployed, {} generations, stop: {:?}",
            best.cost_c,
            best.cost_p.unwrap_or(0),
            best.ndy,
            report.generations,
            report.stop_reason
        ),
        None => println!("no feasible solution after {} generations", report.generations),
    }
    Ok(outcome)
}

fn cmd_exact(args: &ExactArgs) -> Result<Outcome> {
    let inst = io::read_instance(&args.instance)?;
    let out = oracle::brute_force_solve(&inst, args.mode.into())?;
    io::write_atomic(&args.output, &out.solution.to_json())?;
    println!(
        "objective {} over {} colourings ({} mode)",
        out.solution.objective,
        out.colorings_visited,
        out.solution.mode
    );
    Ok(Outcome::Ok)
}

fn cmd_validate(args: &ValidateArgs) -> Result<Outcome> {
    let inst = io::read_instance(&args.instance)?;
    let sol = ExplicitSolution::from_json(&io::read_text(&args.solution)?)
        .with_context(|| format!("invalid solution file {}", args.solution.display()))?;
    let mode = args.mode.map_or(sol.mode, PathMode::from);
    let violations = oracle::validate_solution(&inst, &sol, mode);
    if violations.is_empty() {
        println!("ok: no violations ({mode} mode)");
        return Ok(Outcome::Ok);
    }
    for v in &violations {
        println!("{v}");
    }
    println!("{} violation(s)", violations.len());
    Ok(Outcome::Flagged)
}

/// Reads the colouring from either a run report or an explicit solution.
fn read_coloring(path: &std::path::Path) -> Result<Coloring> {
    let text = io::read_text(path)?;
    if let Ok(report) = RunReport::from_json(&text) {
        return Ok(report.best.coloring);
    }
    if let Ok(sol) = ExplicitSolution::from_json(&text) {
        return Ok(sol.coloring);
    }
    bail!("{} is neither a run report nor an explicit solution", path.display())
}

fn cmd_awdelay(args: &AwdelayArgs) -> Result<Outcome> {
    let inst: Instance = io::read_instance(&args.instance)?;
    let coloring = read_coloring(&args.solution)?;
    let report = match metrics::awdelay(&inst, &coloring) {
        Ok(r) => r,
        Err(apspc_core::Error::Infeasible(msg)) => {
            eprintln!("error: {msg}");
            return Ok(Outcome::Flagged);
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(out) = &args.output {
        io::write_atomic(out, &report.to_json())?;
    }
    println!("awdelay {:.6} ({:.4}%)", report.awdelay, 100.0 * report.awdelay);
    Ok(Outcome::Ok)
}

fn run(cli: Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Exact(a) => cmd_exact(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Awdelay(a) => cmd_awdelay(a),
        Command::Campaign(a) => campaign::run(a).map(|flagged| if flagged { Outcome::Flagged } else { Outcome::Ok }),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Flagged) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {:#}", anyhow!(e));
            ExitCode::from(1)
        }
    }
}

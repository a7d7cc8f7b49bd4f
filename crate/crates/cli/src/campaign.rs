use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use apspc_core::brkga::{self, BrkgaParams, EvolveError, RunReport};
use apspc_core::metrics::{self, summarize_campaign, CampaignSummary, GroupBy, RunRecord};
use apspc_core::{generate_instance, CostRange, Instance};
use clap::Args;
use rayon::prelude::*;

use crate::io::write_atomic;
use crate::BrkgaFlags;

#[derive(Args)]
pub struct CampaignArgs {
    /// Node counts, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = vec![10usize, 30])]
    nodes: Vec<usize>,
    /// Edge densities, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.25f64, 0.55])]
    densities: Vec<f64>,
    /// Colour cost ranges as LO:HI, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        value_parser = crate::parse_cost_range,
        default_values = ["1:125", "50:150", "75:175", "100:200"]
    )]
    cost_ranges: Vec<CostRange>,
    /// Instances per (nodes, density, cost range) combination.
    #[arg(long, default_value_t = 6)]
    cells: u64,
    /// Instance seeds are seed_base, seed_base + 1, ...
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
    /// Concurrent cells; defaults to the number of CPUs.
    #[arg(long, env = "APSPC_JOBS")]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(short, long)]
    out: PathBuf,
    #[command(flatten)]
    brkga: BrkgaFlags,
}

struct Cell {
    n: usize,
    density: f64,
    cr: CostRange,
    seed: u64,
}

impl Cell {
    fn name(&self) -> String {
        format!("N{}_D{}_CR{}-{}_S{}", self.n, self.density, self.cr.lo, self.cr.hi, self.seed)
    }
}

enum CellOutcome {
    Solved(RunRecord),
    Infeasible(String),
}

fn run_cell(cell: &Cell, base: &BrkgaParams, seed_override: bool, out: &Path) -> Result<CellOutcome> {
    let name = cell.name();
    let record_path = out.join("records").join(format!("{name}.json"));
    // Finished cells are kept, so an interrupted campaign resumes where it stopped.
    if let Ok(text) = fs::read_to_string(&record_path) {
        if let Ok(rec) = serde_json::from_str::<RunRecord>(&text) {
            return Ok(CellOutcome::Solved(rec));
        }
    }

    let inst: Instance = generate_instance(cell.n, cell.density, cell.cr, cell.seed)
        .with_context(|| format!("cell {name}"))?;
    let mut params = base.clone();
    if !seed_override {
        params.master_seed = cell.seed;
    }
    let instance_file = out.join("instances").join(format!("{name}.json"));
    write_atomic(&instance_file, &inst.to_json())?;

    let run = match brkga::evolve(&inst, &params) {
        Ok(run) => run,
        Err(EvolveError::NoFeasibleSolution(run)) => {
            let report = RunReport::new(instance_file.display().to_string(), &params, &run);
            write_atomic(&out.join("runs").join(format!("{name}.json")), &report.to_json())?;
            return Ok(CellOutcome::Infeasible(name));
        }
        Err(EvolveError::Invalid(e)) => return Err(e).with_context(|| format!("cell {name}")),
    };
    let report = RunReport::new(instance_file.display().to_string(), &params, &run);
    write_atomic(&out.join("runs").join(format!("{name}.json")), &report.to_json())?;

    let best = &run.best.solution;
    let aw = metrics::awdelay(&inst, &best.coloring)?;
    let cost_p = best.cost_p.context("feasible run without path cost")?;
    let record = RunRecord {
        n: cell.n,
        density: cell.density,
        cr_lo: cell.cr.lo,
        cr_hi: cell.cr.hi,
        seed: cell.seed,
        num_colors: inst.num_colors(),
        best_time_s: run.best_time_s,
        time_s: run.total_time_s,
        ndy: best.ndy(),
        cost: best.cost_c + cost_p,
        cost_c: best.cost_c,
        cost_p,
        awdelay: Some(aw.awdelay),
    };
    write_atomic(&record_path, &serde_json::to_string_pretty(&record)?)?;
    Ok(CellOutcome::Solved(record))
}

fn summary_csv(rows: &[CampaignSummary]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CampaignSummary::CSV_HEADER)?;
    for r in rows {
        w.write_record(r.csv_row())?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn awdelay_csv(rows: &[CampaignSummary]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["set", "runs", "awdelay_avg", "awdelay_var"])?;
    for r in rows {
        let fmt = |v: Option<f64>| v.map_or_else(String::new, |x| format!("{x:.8}"));
        w.write_record([
            r.set_label.clone(),
            r.runs.to_string(),
            fmt(r.awdelay_avg),
            fmt(r.awdelay_var),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn runs_csv(records: &[RunRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// Runs the grid. Returns true when some cell ended without a feasible solution.
pub fn run(args: &CampaignArgs) -> Result<bool> {
    if args.nodes.is_empty() || args.densities.is_empty() || args.cost_ranges.is_empty() {
        bail!("--nodes, --densities and --cost-ranges must each list at least one value");
    }
    if args.cells == 0 {
        bail!("--cells must be at least 1");
    }
    if args.jobs == Some(0) {
        bail!("--jobs must be at least 1");
    }
    let params = args.brkga.apply(BrkgaParams::default());
    params.validate()?;

    let mut cells = Vec::new();
    for &n in &args.nodes {
        for &density in &args.densities {
            for &cr in &args.cost_ranges {
                for i in 0..args.cells {
                    cells.push(Cell { n, density, cr, seed: args.seed_base + i });
                }
            }
        }
    }

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = args.jobs {
        pool = pool.num_threads(j);
    }
    let pool = pool.build()?;
    let seed_override = args.brkga.seed_overridden();
    let outcomes: Vec<CellOutcome> = pool.install(|| {
        cells
            .par_iter()
            .map(|c| run_cell(c, &params, seed_override, &args.out))
            .collect::<Result<_>>()
    })?;

    let mut records = Vec::new();
    let mut infeasible = Vec::new();
    for o in outcomes {
        match o {
            CellOutcome::Solved(r) => records.push(r),
            CellOutcome::Infeasible(name) => infeasible.push(name),
        }
    }
    for name in &infeasible {
        eprintln!("warning: cell {name} has no feasible solution and is left out of the tables");
    }
    if records.is_empty() {
        bail!("no cell produced a feasible solution");
    }

    let by_set = summarize_campaign(&records, &[GroupBy::Nodes, GroupBy::Density])?;
    let by_nodes = summarize_campaign(&records, &[GroupBy::Nodes])?;
    let mut aw_rows = by_set.clone();
    aw_rows.extend(by_nodes);
    write_atomic(&args.out.join("summary.csv"), &summary_csv(&by_set)?)?;
    write_atomic(&args.out.join("awdelay.csv"), &awdelay_csv(&aw_rows)?)?;
    write_atomic(&args.out.join("runs.csv"), &runs_csv(&records)?)?;

    for row in &by_set {
        let aw = row.awdelay_avg.unwrap_or(f64::NAN);
        println!(
            "{}: {} runs, cost {:.1}, #NDy {:.2}, awdelay {:.3}%",
            row.set_label,
            row.runs,
            row.cost_avg,
            row.ndy_avg,
            100.0 * aw
        );
    }
    println!("wrote {}", args.out.display());
    Ok(!infeasible.is_empty())
}

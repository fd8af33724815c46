//! `pcf`: colour, verify, exact, bounds and bench subcommands.
//!
//! Exit codes: 0 success, 1 verification failure (or no certified answer), 2 usage, parse or
//! configuration error.

mod bench;
mod settings;

use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use pcf_core::baselines::{ascending_order, exact_pcf, greedy_pcf, greedy_proper};
use pcf_core::bounds::{all_bounds, find_delta0, BoundReport, Delta, Delta0};
use pcf_core::colouring::{Colouring, ColouringFile};
use pcf_core::dimacs::parse_dimacs_reader;
use pcf_core::graph::{Adjacency, Graph};
use pcf_core::stage_final::run_pipeline;
use pcf_core::verify::{check_pcf, ViolationReport};
use serde::Serialize;

use crate::settings::Preset;

pub const DEFAULT_EXACT_BUDGET: u64 = 50_000_000;

#[derive(Parser)]
#[command(name = "pcf", version, about = "Proper conflict-free graph colouring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Colour a DIMACS graph and verify the result.
    Colour(ColourArgs),
    /// Check a colouring file against a DIMACS graph.
    Verify(VerifyArgs),
    /// Compute the exact PCF chromatic number of a small graph.
    Exact(ExactArgs),
    /// Evaluate the probability and palette inequalities at a given Δ.
    Bounds(BoundsArgs),
    /// Run solvers over seeded random graphs and write one CSV row per trial and solver.
    Bench(bench::BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Solver {
    Pipeline,
    Greedy,
    GreedyProper,
    Exact,
}

#[derive(clap::Args)]
struct ColourArgs {
    /// DIMACS edge file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "pipeline")]
    mode: Solver,
    /// Required by the pipeline mode.
    #[arg(long)]
    seed: Option<u64>,
    /// Flat TOML file overriding fields of the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "desk")]
    preset: Preset,
    /// Colouring JSON destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Pipeline stage diagnostics JSON destination.
    #[arg(long)]
    diagnostics: Option<PathBuf>,
    /// Node budget for the exact search.
    #[arg(long, default_value_t = DEFAULT_EXACT_BUDGET)]
    budget: u64,
}

#[derive(clap::Args)]
struct VerifyArgs {
    #[arg(long)]
    input: PathBuf,
    /// Colouring JSON file.
    #[arg(long)]
    colouring: PathBuf,
    /// Only require a proper colouring.
    #[arg(long)]
    proper_only: bool,
}

#[derive(clap::Args)]
struct ExactArgs {
    #[arg(long)]
    input: PathBuf,
    /// Largest colour count to try; defaults to the greedy PCF count.
    #[arg(long)]
    max_colours: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_EXACT_BUDGET)]
    budget: u64,
    /// Witness colouring JSON destination.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct BoundsArgs {
    /// Δ as an integer, a decimal or scientific literal, or `e^X`.
    #[arg(long, required_unless_present = "find_delta0")]
    delta: Option<String>,
    /// Print the least Δ at which every non-auxiliary inequality holds.
    #[arg(long)]
    find_delta0: bool,
    /// Emit JSON instead of a table.
    #[arg(long)]
    json: bool,
    /// Flat TOML file overriding the constants.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Input or configuration problem: exit status 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub fn usage<E: Into<anyhow::Error>>(e: E) -> anyhow::Error {
    anyhow::Error::new(Usage(format!("{:#}", e.into())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Colour(a) => cmd_colour(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Exact(a) => cmd_exact(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Bench(a) => bench::cmd_bench(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let is_usage = e.is::<Usage>();
            eprintln!("error: {e:#}");
            ExitCode::from(if is_usage { 2 } else { 1 })
        }
    }
}

pub fn read_graph(path: &Path) -> Result<Graph> {
    let file = fs::File::open(path)
        .with_context(|| format!("cannot open {}", path.display()))
        .map_err(usage)?;
    let parsed = parse_dimacs_reader(BufReader::new(file))
        .with_context(|| format!("cannot parse {}", path.display()))
        .map_err(usage)?;
    Ok(parsed.graph)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

/// The verifier the exit status depends on: properness and totality only for `greedy-proper`.
pub fn verify_for(solver: Solver, g: &Graph, c: &Colouring) -> ViolationReport {
    let mut report = check_pcf(g, c);
    if solver == Solver::GreedyProper {
        report.cf_violations.clear();
    }
    report
}

#[derive(Serialize)]
struct Diagnostics<'a> {
    seed: u64,
    config: &'a pcf_core::config::PipelineConfig,
    result: &'a pcf_core::stage_final::PipelineResult,
}

fn cmd_colour(a: ColourArgs) -> Result<ExitCode> {
    let g = read_graph(&a.input)?;
    let order = ascending_order(&g);
    let mut fallback = "none";
    let colouring = match a.mode {
        Solver::Pipeline => {
            let seed = a.seed.context("--seed is required for the pipeline mode").map_err(usage)?;
            let cfg = settings::load(a.preset, g.max_degree(), a.config.as_deref()).map_err(usage)?;
            let r = run_pipeline(&g, &cfg, seed).map_err(usage)?;
            if let Some(path) = &a.diagnostics {
                let d = Diagnostics { seed, config: &cfg, result: &r };
                let text = serde_json::to_string_pretty(&d)? + "\n";
                write_output(Some(path), &text)?;
            }
            if r.fallback != pcf_core::stage_final::Fallback::None {
                fallback = "greedy-pcf";
            }
            r.colouring
        }
        Solver::Greedy => greedy_pcf(&g, &order)?,
        Solver::GreedyProper => greedy_proper(&g, &order)?,
        Solver::Exact => {
            let cap = greedy_pcf(&g, &order)?.distinct_colours().max(1);
            exact_pcf(&g, cap, a.budget).map_err(usage)?.witness
        }
    };
    write_output(a.out.as_deref(), &(colouring.to_json() + "\n"))?;
    let report = verify_for(a.mode, &g, &colouring);
    let ok = report.is_empty();
    eprintln!(
        "colours_used={} max_degree={} fallback={} verified={}",
        colouring.distinct_colours(),
        g.max_degree(),
        fallback,
        ok
    );
    if !ok {
        eprintln!("{}", serde_json::to_string(&report)?);
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_verify(a: VerifyArgs) -> Result<ExitCode> {
    let g = read_graph(&a.input)?;
    let text = fs::read_to_string(&a.colouring)
        .with_context(|| format!("cannot open {}", a.colouring.display()))
        .map_err(usage)?;
    let file: ColouringFile = serde_json::from_str(&text)
        .with_context(|| format!("cannot parse {}", a.colouring.display()))
        .map_err(usage)?;
    let c = Colouring::from_file(&file, g.vertex_count()).map_err(usage)?;
    let solver = if a.proper_only { Solver::GreedyProper } else { Solver::Pipeline };
    let report = verify_for(solver, &g, &c);
    println!("{}", serde_json::to_string_pretty(&report)?);
    let ok = report.is_empty();
    eprintln!("colours_used={} verified={}", c.distinct_colours(), ok);
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_exact(a: ExactArgs) -> Result<ExitCode> {
    let g = read_graph(&a.input)?;
    let max = match a.max_colours {
        Some(k) => k,
        None => greedy_pcf(&g, &ascending_order(&g))?.distinct_colours().max(1),
    };
    let r = match exact_pcf(&g, max, a.budget) {
        Ok(r) => r,
        Err(e @ pcf_core::baselines::ExactError::TooLarge { .. }) => return Err(usage(e)),
        Err(e @ pcf_core::baselines::ExactError::ZeroColours) => return Err(usage(e)),
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(1));
        }
    };
    if !check_pcf(&g, &r.witness).is_empty() {
        eprintln!("error: witness failed verification");
        return Ok(ExitCode::from(1));
    }
    if let Some(path) = &a.out {
        write_output(Some(path), &(r.witness.to_json() + "\n"))?;
    }
    println!("{}", r.chi_pcf);
    eprintln!("nodes_explored={}", r.nodes_explored);
    Ok(ExitCode::SUCCESS)
}

fn cmd_bounds(a: BoundsArgs) -> Result<ExitCode> {
    let cfg = settings::load(Preset::Paper, 0, a.config.as_deref()).map_err(usage)?;
    if a.find_delta0 {
        return Ok(match find_delta0(&cfg) {
            Delta0::Found(d) => {
                println!("{d}");
                ExitCode::SUCCESS
            }
            Delta0::NotFound { cap } => {
                eprintln!("no threshold up to {cap}");
                ExitCode::from(1)
            }
        });
    }
    let text = a.delta.expect("clap requires --delta without --find-delta0");
    let delta = Delta::parse(&text).map_err(usage)?;
    let reports = all_bounds(&delta, &cfg);
    if a.json {
        println!("{}", serde_json::to_string_pretty(&reports)?);
    } else {
        print!("{}", bounds_table(&reports));
    }
    Ok(ExitCode::SUCCESS)
}

fn bounds_table(reports: &[BoundReport]) -> String {
    let width = reports.iter().map(|r| r.name.len()).max().unwrap_or(4).max(4);
    let mut out = format!(
        "{:<width$}  {:>14}  {:>14}  {:>5}  {:>14}  note\n",
        "name", "lhs_log", "rhs_log", "holds", "margin"
    );
    for r in reports {
        let mut note = r.note.clone().unwrap_or_default();
        if r.auxiliary {
            note = if note.is_empty() { "auxiliary".into() } else { format!("auxiliary; {note}") };
        }
        let line = format!(
            "{:<width$}  {:>14.6e}  {:>14.6e}  {:>5}  {:>14.6e}  {}",
            r.name, r.lhs_log, r.rhs_log, r.holds, r.margin, note
        );
        out += line.trim_end();
        out.push('\n');
    }
    out
}

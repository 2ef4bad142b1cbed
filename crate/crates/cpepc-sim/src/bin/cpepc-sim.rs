//! Thin command-line front end over the simulator library.
//!
//! Subcommands: `run` one configuration, `sweep` a plan file, `partition` a
//! topology into communities, and `reproduce` a published figure sweep. All
//! heavy lifting lives in the library; this binary only parses arguments,
//! moves files, and sets the exit code (nonzero when any sweep row failed).

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use cpepc_sim::community::{community_count, detect_communities_with_target};
use cpepc_sim::experiment::{
    figure_plan, results_to_csv, results_to_json, run_plan, ExperimentPlan, OutputFormat,
    ResultRow, SweepScale,
};
use cpepc_sim::{prepare_topology, run, NetworkGraph, RunConfig, PARTITION_SEED};

#[derive(Parser)]
#[command(
    name = "cpepc-sim",
    about = "Deterministic simulator for cooperative in-network caching",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one run config and print its metrics as JSON.
    Run {
        /// Run configuration (JSON).
        config: PathBuf,
        /// Write the metrics here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every sweep point of a plan file and emit the result table.
    Sweep {
        /// Experiment plan (JSON).
        plan: PathBuf,
        /// Output encoding.
        #[arg(long, default_value = "csv")]
        format: String,
        /// Write the table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Partition a topology into communities and print the assignment JSON.
    Partition {
        /// Topology file (JSON).
        topology: PathBuf,
        /// Scaling factor when no explicit community count is given.
        #[arg(long, default_value_t = 0.15)]
        tau: f64,
        /// Explicit community count (overrides --tau).
        #[arg(long)]
        communities: Option<usize>,
        /// Write the assignment here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rebuild the sweep behind a published figure and emit its table.
    Reproduce {
        /// Figure name: fig5, fig6, fig7, fig8, fig9, fig10, or fig13.
        figure: String,
        /// Topology file (JSON).
        #[arg(long)]
        topology: PathBuf,
        /// Sweep size: `desk` (counts / 10) or `paper` (published counts).
        #[arg(long, default_value = "desk")]
        scale: String,
        /// Output encoding.
        #[arg(long, default_value = "csv")]
        format: String,
        /// Output file; defaults to `<figure>-<scale>.<format>`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn write_or_print(text: &str, out: Option<&PathBuf>) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Emits rows in the requested format and reports whether any point failed.
fn emit_rows(rows: &[ResultRow], format: OutputFormat, out: Option<&PathBuf>) -> anyhow::Result<bool> {
    let text = match format {
        OutputFormat::Csv => results_to_csv(rows)?,
        OutputFormat::Json => results_to_json(rows)?,
    };
    write_or_print(&text, out)?;
    let mut any_failed = false;
    for row in rows.iter().filter(|r| r.is_failed()) {
        any_failed = true;
        eprintln!(
            "failed point: strategy={} cache_frac={} alpha={}: {}",
            row.strategy,
            row.cache_frac,
            row.alpha,
            row.error.as_deref().unwrap_or("unknown error")
        );
    }
    Ok(any_failed)
}

fn main() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out } => {
            let text = std::fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let cfg: RunConfig = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", config.display()))?;
            let report = run(&cfg)?;
            let mut json = serde_json::to_string_pretty(&report)?;
            json.push('\n');
            write_or_print(&json, out.as_ref())?;
        }
        Command::Sweep { plan, format, out } => {
            let plan = ExperimentPlan::load(&plan)?;
            let format: OutputFormat = format.parse()?;
            let rows = run_plan(&plan)?;
            if emit_rows(&rows, format, out.as_ref())? {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Partition {
            topology,
            tau,
            communities,
            out,
        } => {
            let graph = prepare_topology(&NetworkGraph::load(&topology)?)?;
            let target = match communities {
                Some(n) => n,
                None => community_count(tau, graph.node_count())?,
            };
            let assignment = detect_communities_with_target(&graph, target, PARTITION_SEED)?;
            let mut json = serde_json::to_string_pretty(&assignment.to_document(&graph))?;
            json.push('\n');
            write_or_print(&json, out.as_ref())?;
        }
        Command::Reproduce {
            figure,
            topology,
            scale,
            format,
            out,
        } => {
            let scale: SweepScale = scale.parse()?;
            let format: OutputFormat = format.parse()?;
            let plan = figure_plan(&figure, &topology, scale)?;
            let rows = run_plan(&plan)?;
            let scale_name = match scale {
                SweepScale::Desk => "desk",
                SweepScale::Paper => "paper",
            };
            let extension = match format {
                OutputFormat::Csv => "csv",
                OutputFormat::Json => "json",
            };
            let out = out.unwrap_or_else(|| PathBuf::from(format!("{figure}-{scale_name}.{extension}")));
            let failed = emit_rows(&rows, format, Some(&out))?;
            eprintln!("wrote {}", out.display());
            if failed {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

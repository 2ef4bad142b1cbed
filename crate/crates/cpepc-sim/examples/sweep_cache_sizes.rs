//! Sweeps per-router cache size and emits the result table as CSV.
//!
//! This is the desk-scale version of the headline cache-size experiment:
//! every strategy across store sizes from 0.05% to 0.25% of the catalog,
//! three repetitions per point (bump `repetitions` for smoother intervals).
//! Hit ratio rises with cache size for every strategy; the cooperative
//! strategy stays on top throughout because each community holds distinct
//! contents instead of duplicating the same popular few.
//!
//! The CSV columns are fixed across every sweep:
//! strategy,replacement,cache_frac,alpha,catalog,communities,hit_ratio,
//! hit_ratio_ci,latency_ms,latency_ci,hit_distance,hit_distance_ci,
//! messages,seed_base,reps
//!
//! Run with: cargo run --release --example sweep_cache_sizes

use std::path::PathBuf;

use anyhow::Result;
use cpepc_sim::experiment::{figure_plan, results_to_csv, run_plan_on, SweepScale};
use cpepc_sim::NetworkGraph;

fn main() -> Result<()> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../topologies/exodus_as3967.json");
    let graph = NetworkGraph::load(&path)?;

    let mut plan = figure_plan("fig5", &path, SweepScale::Desk)?;
    plan.repetitions = 3;

    let rows = run_plan_on(&graph, &plan)?;
    print!("{}", results_to_csv(&rows)?);

    let failed = rows.iter().filter(|r| r.is_failed()).count();
    if failed > 0 {
        anyhow::bail!("{failed} sweep points failed");
    }
    Ok(())
}

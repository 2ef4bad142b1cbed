//! Crosses caching strategies with cache replacement policies.
//!
//! The replacement policy decides which stored content makes room for a new
//! arrival: least-recently-used, seeded-random, or perfect-LFU (which also
//! refuses to admit contents requested less often than everything already
//! cached). The admission strategies are orthogonal to replacement, so the
//! sweep runs the cooperative strategy and leave-copy-everywhere under all
//! three policies on the same workload.
//!
//! Run with: cargo run --release --example replacement_policies

use std::path::PathBuf;

use anyhow::Result;
use cpepc_sim::experiment::{run_plan_on, ExperimentPlan};
use cpepc_sim::{NetworkGraph, ReplacementPolicy, RunConfig, Strategy};

fn main() -> Result<()> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../topologies/exodus_as3967.json");
    let graph = NetworkGraph::load(&path)?;

    let base = RunConfig {
        topology: path.clone(),
        catalog: 1_000,
        requests: 10_000,
        warmup: 5_000,
        cache_frac: 0.2,
        ..RunConfig::default()
    };
    let mut plan = ExperimentPlan::single(base);
    plan.strategies = vec![Strategy::Cpepc, Strategy::Lce];
    plan.replacements = vec![
        ReplacementPolicy::Lru,
        ReplacementPolicy::Random,
        ReplacementPolicy::Plfu,
    ];
    plan.repetitions = 5;

    let rows = run_plan_on(&graph, &plan)?;
    println!(
        "{:<10} {:<12} {:>18} {:>18}",
        "strategy", "replacement", "hit ratio", "hit distance"
    );
    for row in &rows {
        println!(
            "{:<10} {:<12} {:>11.4} ±{:<6.4} {:>11.3} ±{:<6.3}",
            row.strategy, row.replacement, row.hit_ratio, row.hit_ratio_ci,
            row.hit_distance, row.hit_distance_ci,
        );
    }
    Ok(())
}

//! Runs one simulation and prints its metrics report as JSON.
//!
//! The setup mirrors the bundled defaults at desk scale: the Exodus-sized
//! topology, cooperative community caching, a 1000-content Zipf(0.8)
//! catalog, 10 requests/s, 5000 warmup requests and 10000 measured ones.
//! Identical configuration and seed always produce the identical report.
//!
//! Run with: cargo run --release --example run_single

use std::path::PathBuf;

use anyhow::Result;
use cpepc_sim::{run, RunConfig, Strategy};

fn main() -> Result<()> {
    let config = RunConfig {
        topology: PathBuf::from(env!("CARGO_MANIFEST_DIR"))
            .join("../../topologies/exodus_as3967.json"),
        strategy: Strategy::Cpepc,
        catalog: 1_000,
        requests: 10_000,
        warmup: 5_000,
        ..RunConfig::default()
    };

    println!("config:\n{}\n", serde_json::to_string_pretty(&config)?);
    let report = run(&config)?;
    println!("report:\n{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

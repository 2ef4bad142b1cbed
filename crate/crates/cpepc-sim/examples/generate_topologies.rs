//! Rebuilds the topology files bundled under `topologies/`.
//!
//! Three graphs ship with the crate:
//!
//! * `desk12.json` — a 12-router two-cluster toy, small enough to trace by
//!   hand, with a single expensive bridge link between the clusters.
//! * `exodus_as3967.json` — a 79-router preferential-attachment core sized
//!   like the Exodus ISP backbone: with endpoints attached it reaches
//!   161 nodes and 229 links.
//! * `abovenet_as6461.json` — a 138-router core sized like the AboveNet
//!   backbone: 282 nodes and 516 links once endpoints attach.
//!
//! The files are router-only; every simulation run (and the `partition`
//! subcommand) attaches one consumer per router and sources on the 5%
//! best-connected routers automatically. Generation is seeded, so this
//! example reproduces byte-identical files on every machine.
//!
//! Run with: cargo run --release --example generate_topologies

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use cpepc_sim::topology::synth;
use cpepc_sim::{prepare_topology, NetworkGraph};

fn write_topology(g: &NetworkGraph, path: &Path) -> Result<()> {
    let mut json = serde_json::to_string_pretty(&g.to_document())?;
    json.push('\n');
    fs::write(path, &json).with_context(|| format!("writing {}", path.display()))?;

    let attached = prepare_topology(g)?;
    let routers = g.node_count();
    let links: usize = g.to_document().edges.len();
    let attached_links = attached.to_document().edges.len();
    println!(
        "{:<24} {:>3} routers / {:>3} links   -> attached: {:>3} nodes / {:>3} links",
        path.file_name().unwrap().to_string_lossy(),
        routers,
        links,
        attached.node_count(),
        attached_links,
    );
    Ok(())
}

fn main() -> Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../topologies");
    fs::create_dir_all(&dir)?;

    write_topology(&synth::desk12(), &dir.join("desk12.json"))?;
    write_topology(
        &synth::preferential_core(79, 147, 40, 3967)?,
        &dir.join("exodus_as3967.json"),
    )?;
    write_topology(
        &synth::preferential_core(138, 372, 40, 6461)?,
        &dir.join("abovenet_as6461.json"),
    )?;

    println!("\nwrote topologies to {}", dir.canonicalize()?.display());
    Ok(())
}

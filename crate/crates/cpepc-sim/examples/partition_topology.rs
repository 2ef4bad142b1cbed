//! Partitions a topology into router communities and shows the leaders.
//!
//! The cooperative caching strategy groups routers with Louvain modularity
//! optimization, tuning the resolution until the community count matches
//! `ceil(tau * nodes)`, then elects the most between (most path-central)
//! member of each community as its leader. This example prints the
//! partition for the Exodus-sized topology at the default `tau = 0.15` and
//! shows how the community count tracks other `tau` values.
//!
//! Run with: cargo run --release --example partition_topology

use std::path::PathBuf;

use anyhow::Result;
use cpepc_sim::community::{community_count, detect_communities_with_target};
use cpepc_sim::{prepare_topology, NetworkGraph, PARTITION_SEED};

fn main() -> Result<()> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../topologies/exodus_as3967.json");
    let graph = prepare_topology(&NetworkGraph::load(&path)?)?;
    println!(
        "{}: {} nodes after endpoint attachment\n",
        path.file_name().unwrap().to_string_lossy(),
        graph.node_count()
    );

    let target = community_count(0.15, graph.node_count())?;
    let assignment = detect_communities_with_target(&graph, target, PARTITION_SEED)?;
    println!(
        "tau = 0.15 -> target {} communities, achieved {} (modularity {:.4}, resolution {:.3})\n",
        target,
        assignment.communities.len(),
        assignment.modularity,
        assignment.resolution,
    );

    for (i, members) in assignment.communities.iter().enumerate() {
        let leader = assignment.leaders[i];
        let routers = members
            .iter()
            .filter(|&&n| graph.role(n) == cpepc_sim::NodeRole::Router)
            .count();
        println!(
            "community {i:>2}: {:>3} nodes ({routers:>2} routers), leader {}",
            members.len(),
            graph.name(leader),
        );
    }

    println!("\ncommunity count across tau values:");
    for tau in [0.05, 0.1, 0.15, 0.2, 0.3] {
        let target = community_count(tau, graph.node_count())?;
        let assignment = detect_communities_with_target(&graph, target, PARTITION_SEED)?;
        println!(
            "  tau {tau:>4}: target {target:>2}, achieved {:>2}",
            assignment.communities.len()
        );
    }
    Ok(())
}

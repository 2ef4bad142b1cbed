//! Sanity-checks the request workload: Zipf popularity and Poisson timing.
//!
//! Requests draw content names from a Zipf distribution (rank r carries
//! probability proportional to 1/r^alpha) and arrive with exponential gaps
//! at the configured rate. This example compares analytic probabilities
//! with empirical frequencies over 200k draws, then inspects a scheduled
//! workload: arrival-gap mean versus 1/rate and the warmup/measured split.
//!
//! Run with: cargo run --release --example workload_stats

use anyhow::Result;
use rand::rngs::StdRng;
use rand::SeedableRng;

use cpepc_sim::popularity::ContentId;
use cpepc_sim::topology::synth;
use cpepc_sim::{prepare_topology, Workload, ZipfSampler};

fn main() -> Result<()> {
    let catalog = 1_000;
    let alpha = 0.8;
    let sampler = ZipfSampler::new(catalog, alpha)?;

    let mut rng = StdRng::seed_from_u64(7);
    let draws = 200_000usize;
    let mut counts = vec![0u64; catalog];
    for _ in 0..draws {
        counts[sampler.sample(&mut rng).idx()] += 1;
    }

    println!("zipf(alpha = {alpha}, catalog = {catalog}), {draws} draws:");
    println!("{:>6} {:>12} {:>12}", "rank", "analytic", "empirical");
    for rank in [0usize, 1, 2, 3, 9, 99, 999] {
        println!(
            "{:>6} {:>12.6} {:>12.6}",
            rank + 1,
            sampler.probability(ContentId(rank as u32)),
            counts[rank] as f64 / draws as f64,
        );
    }

    let graph = prepare_topology(&synth::desk12())?;
    let consumers: Vec<_> = graph.consumers().collect();
    let workload = Workload {
        catalog,
        alpha,
        rate_per_s: 10.0,
        requests: 20_000,
        warmup: 5_000,
    };
    let mut rng = StdRng::seed_from_u64(7);
    let injections = workload.schedule(&consumers, &mut rng)?;

    let gaps: Vec<f64> = injections.windows(2).map(|w| w[1].time_ms - w[0].time_ms).collect();
    let mean_gap = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let measured = injections.iter().filter(|i| i.measured).count();
    println!("\nscheduled {} requests over {} consumers:", injections.len(), consumers.len());
    println!("  mean arrival gap {:.2} ms (expected {:.2} ms)", mean_gap, 1_000.0 / workload.rate_per_s);
    println!("  warmup {} + measured {}", injections.len() - measured, measured);
    println!("  span {:.1} s", injections.last().unwrap().time_ms / 1_000.0);
    Ok(())
}

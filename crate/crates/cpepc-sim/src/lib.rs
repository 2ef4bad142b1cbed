//! Deterministic discrete-event simulator for cooperative in-network caching
//! on named-data topologies.
//!
//! The crate models a network of routers with attached consumers and content
//! sources. Consumers issue interests for named content drawn from a Zipf
//! catalog; routers forward interests along static shortest paths and may
//! cache passing data packets according to a pluggable caching strategy:
//!
//! * **CPePC** — routers are grouped into communities (Louvain partition of
//!   the router graph); each community elects a max-betweenness leader that
//!   tracks content popularity for the whole community and admits cache
//!   insertions through an occupancy-adaptive three-band filter, keeping at
//!   most one replica of a content per community.
//! * **PePC** — the same three-band occupancy/popularity filter, applied by
//!   every router independently with purely local request counts.
//! * **LCE** — leave-copy-everywhere: every router on the data path caches.
//! * **Prob(p)** — every router on the data path caches with probability `p`.
//!
//! Replacement inside a content store is LRU, seeded-random, or perfect-LFU.
//!
//! # Architecture
//!
//! | module       | responsibility                                              |
//! |--------------|--------------------------------------------------------------|
//! | [`topology`] | graph documents, endpoint attachment, deterministic routing  |
//! | [`community`]| Louvain partitioning, betweenness centrality, leader election|
//! | [`popularity`]| per-leader popularity tables with periodic EWMA updates     |
//! | [`cache`]    | content stores, replacement policies, occupancy tracking     |
//! | [`policy`]   | per-strategy caching decisions (three-band admission filter) |
//! | [`engine`]   | event queue, packet walks, workload injection, metrics       |
//! | [`experiment`]| sweep plans, repetition statistics, CSV/JSON emission       |
//!
//! Every run is a pure function of its configuration and seed: identical
//! inputs produce bit-identical metrics on any platform.
//!
//! # Examples
//!
//! The `examples/` directory is the front door; each file exercises one
//! capability end to end:
//!
//! ```text
//! cargo run --release --example run_single          # one simulation run
//! cargo run --release --example partition_topology  # communities + leaders
//! cargo run --release --example compare_strategies  # CPePC vs baselines
//! cargo run --release --example sweep_cache_sizes   # sweep with 95% CIs
//! cargo run --release --example replacement_policies
//! cargo run --release --example workload_stats      # Zipf/Poisson sanity
//! cargo run --release --example generate_topologies # rebuild bundled graphs
//! ```
//!
//! A thin `cpepc-sim` binary wraps the same library calls behind `run`,
//! `sweep`, `partition`, and `reproduce` subcommands for scripted use.

pub mod cache;
pub mod community;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod policy;
pub mod popularity;
pub mod topology;

pub use cache::{ContentStore, InsertOutcome, OccupancyTracker, ReplacementPolicy, Thresholds};
pub use community::CommunityAssignment;
pub use engine::{
    prepare_topology, run, run_on, MetricsReport, RunConfig, Strategy, Workload, ZipfSampler,
    PARTITION_SEED,
};
pub use error::{Error, Result};
pub use experiment::{
    emit_results, figure_plan, run_plan, run_plan_on, ExperimentPlan, OutputFormat, ResultRow,
    SweepScale,
};
pub use popularity::{ContentId, PTable};
pub use topology::{NetworkGraph, NodeId, NodeRole, RoutePath};

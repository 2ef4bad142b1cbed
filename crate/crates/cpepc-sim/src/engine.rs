//! Deterministic discrete-event simulation of named-data request traffic.
//!
//! A run injects Zipf-distributed content requests from random consumers
//! as a Poisson process, walks each Interest hop-by-hop toward the
//! content's source over static shortest-path routes, serves it from the
//! first router store holding the content (or from the source), and walks
//! the Data packet back along the reverse path, applying the configured
//! caching strategy at on-path routers.
//!
//! Under the community-coordinated strategy, the first on-path router of
//! each community additionally consults its leader before forwarding: the
//! leader can serve the content itself, redirect the Interest to the
//! community member holding it, or report a miss. Leaders track request
//! popularity and exchange tables periodically; caching decisions on the
//! Data path go through the leader so each community stores at most one
//! copy of any content.
//!
//! Everything is driven by a single `(time, sequence)`-ordered event
//! queue, so identical configurations and seeds produce bit-identical
//! [`MetricsReport`]s.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::path::PathBuf;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::cache::{
    compute_thresholds, ContentStore, InsertOutcome, OccupancyTracker, ReplacementPolicy,
};
use crate::community::{community_count, detect_communities_with_target, CommunityAssignment};
use crate::error::{Error, Result};
use crate::policy::{cpepc_decide, lce_decide, pepc_decide, prob_decide, PopularityView, RedState};
use crate::popularity::{ContentId, PTable};
use crate::topology::{NetworkGraph, NodeId, NodeRole, RouteTable};

/// Seed for community detection, fixed so the partition depends only on
/// the topology and the target count, never on the workload seed.
pub const PARTITION_SEED: u64 = 0;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Caching strategy applied on the Data return path.
///
/// In JSON the unit strategies are plain strings (`"cpepc"`, `"pepc"`,
/// `"lce"`) and the parameterized one an object (`{"prob": {"p": 0.5}}`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Community-coordinated popularity caching with leader search.
    Cpepc,
    /// Per-router popularity caching, no coordination.
    Pepc,
    /// Cache everywhere.
    Lce,
    /// Cache with fixed probability `p` at each on-path router.
    Prob { p: f64 },
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Strategy::Cpepc => f.write_str("cpepc"),
            Strategy::Pepc => f.write_str("pepc"),
            Strategy::Lce => f.write_str("lce"),
            Strategy::Prob { p } => write!(f, "prob({p})"),
        }
    }
}

/// Full configuration of one simulation run.
///
/// Defaults: catalog 10^4, 10^5 measured requests after 5x10^4 warmup
/// requests at 10 req/s, Zipf 0.8, store 0.1% of the catalog under LRU,
/// smoothing 0.125 for both popularity and occupancy, 10 s exchange
/// period, thresholds at 20%/60% of capacity, community fraction 0.15.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Path to the topology JSON (used by [`run`]; ignored by [`run_on`]).
    pub topology: PathBuf,
    pub strategy: Strategy,
    pub replacement: ReplacementPolicy,
    /// Store capacity as a percentage of the catalog (0.1 means 0.1%).
    pub cache_frac: f64,
    /// Explicit per-router slot count; overrides `cache_frac` when set.
    pub cache_slots: Option<usize>,
    pub catalog: usize,
    /// Zipf skewness of the request popularity distribution.
    pub alpha: f64,
    /// Poisson request rate, requests per second.
    pub rate_per_s: f64,
    /// Measured request count (injected after the warmup requests).
    pub requests: usize,
    /// Unmeasured leading requests that warm the caches.
    pub warmup: usize,
    /// Popularity-exchange period in seconds.
    pub period_s: f64,
    /// Fraction of nodes electing the community count target.
    pub tau: f64,
    /// Explicit community count target; overrides `tau` when set.
    pub community_target: Option<usize>,
    /// Lower occupancy threshold as a fraction of capacity.
    pub rho1: f64,
    /// Upper occupancy threshold as a fraction of capacity.
    pub rho2: f64,
    /// Cap of the mid-band base admission probability.
    pub p_max: f64,
    /// Popularity smoothing factor.
    pub lambda: f64,
    /// Occupancy smoothing factor.
    pub omega: f64,
    pub seed: u64,
    /// Audit the one-copy-per-community invariant while running.
    pub validate_redundancy: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            topology: PathBuf::new(),
            strategy: Strategy::Cpepc,
            replacement: ReplacementPolicy::Lru,
            cache_frac: 0.1,
            cache_slots: None,
            catalog: 10_000,
            alpha: 0.8,
            rate_per_s: 10.0,
            requests: 100_000,
            warmup: 50_000,
            period_s: 10.0,
            tau: 0.15,
            community_target: None,
            rho1: 0.2,
            rho2: 0.6,
            p_max: 1.0,
            lambda: 0.125,
            omega: 0.125,
            seed: 1,
            validate_redundancy: false,
        }
    }
}

impl RunConfig {
    /// Per-router store capacity in slots.
    pub fn store_slots(&self) -> usize {
        self.cache_slots
            .unwrap_or_else(|| ((self.cache_frac / 100.0 * self.catalog as f64).round() as usize).max(1))
    }

    pub fn validate(&self) -> Result<()> {
        let err = |msg: String| Err(Error::Config(msg));
        if self.catalog == 0 {
            return err("catalog must hold at least one content".into());
        }
        if self.requests == 0 {
            return err("at least one measured request is required".into());
        }
        if !(self.rate_per_s > 0.0) {
            return err(format!("request rate must be positive, got {}", self.rate_per_s));
        }
        if !(self.alpha >= 0.0) {
            return err(format!("alpha must be >= 0, got {}", self.alpha));
        }
        if !(self.period_s > 0.0) {
            return err(format!("exchange period must be positive, got {}", self.period_s));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return err(format!("tau must lie in (0, 1], got {}", self.tau));
        }
        if self.cache_slots.is_none() && !(self.cache_frac > 0.0) {
            return err(format!(
                "cache_frac must be positive when cache_slots is unset, got {}",
                self.cache_frac
            ));
        }
        for (name, v) in [
            ("p_max", self.p_max),
            ("lambda", self.lambda),
            ("omega", self.omega),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return err(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        if let Strategy::Prob { p } = self.strategy {
            if !(0.0..=1.0).contains(&p) {
                return err(format!("prob strategy probability must lie in [0, 1], got {p}"));
            }
        }
        compute_thresholds(self.store_slots(), self.rho1, self.rho2)?;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Workload
// ---------------------------------------------------------------------------

/// Zipf sampler over content ranks via inverse-CDF binary search on a
/// precomputed cumulative table. Content id `n` is popularity rank `n+1`.
#[derive(Debug, Clone)]
pub struct ZipfSampler {
    cumulative: Vec<f64>,
}

impl ZipfSampler {
    pub fn new(catalog: usize, alpha: f64) -> Result<Self> {
        if catalog == 0 {
            return Err(Error::Config("cannot sample from an empty catalog".into()));
        }
        if !(alpha >= 0.0) {
            return Err(Error::Config(format!("alpha must be >= 0, got {alpha}")));
        }
        let mut cumulative: Vec<f64> = Vec::with_capacity(catalog);
        let mut acc = 0.0;
        for rank in 1..=catalog {
            acc += (rank as f64).powf(-alpha);
            cumulative.push(acc);
        }
        let total = acc;
        for c in &mut cumulative {
            *c /= total;
        }
        *cumulative.last_mut().unwrap() = 1.0;
        Ok(ZipfSampler { cumulative })
    }

    /// Probability mass of content id `n` (rank `n+1`).
    pub fn probability(&self, name: ContentId) -> f64 {
        let i = name.idx();
        let prev = if i == 0 { 0.0 } else { self.cumulative[i - 1] };
        self.cumulative[i] - prev
    }

    pub fn sample(&self, rng: &mut StdRng) -> ContentId {
        let u: f64 = rng.gen();
        let idx = self.cumulative.partition_point(|&c| c <= u);
        ContentId(idx.min(self.cumulative.len() - 1) as u32)
    }
}

/// Request-generation parameters.
#[derive(Debug, Clone, Copy)]
pub struct Workload {
    pub catalog: usize,
    pub alpha: f64,
    pub rate_per_s: f64,
    /// Measured requests, injected after the warmup ones.
    pub requests: usize,
    pub warmup: usize,
}

/// One scheduled request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Injection {
    pub time_ms: f64,
    pub consumer: NodeId,
    pub content: ContentId,
    pub measured: bool,
}

impl Workload {
    /// Draws the full injection schedule: exponential inter-arrival gaps
    /// at `rate_per_s`, uniformly chosen consumers, Zipf-ranked contents.
    /// The first `warmup` injections are unmeasured.
    pub fn schedule(&self, consumers: &[NodeId], rng: &mut StdRng) -> Result<Vec<Injection>> {
        if consumers.is_empty() {
            return Err(Error::Config("topology has no consumers".into()));
        }
        let zipf = ZipfSampler::new(self.catalog, self.alpha)?;
        let total = self.warmup + self.requests;
        let mut out = Vec::with_capacity(total);
        let mut t = 0.0f64;
        for i in 0..total {
            let u: f64 = rng.gen();
            t += -(1.0 - u).ln() / self.rate_per_s * 1000.0;
            let consumer = consumers[rng.gen_range(0..consumers.len())];
            let content = zipf.sample(rng);
            out.push(Injection {
                time_ms: t,
                consumer,
                content,
                measured: i >= self.warmup,
            });
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Events and packets
// ---------------------------------------------------------------------------

/// A community consultation performed during the Interest walk: the
/// community id and the router where the Interest entered it.
#[derive(Debug, Clone, Copy)]
struct ConsultRecord {
    community: u32,
    entry: NodeId,
}

/// In-flight Interest.
#[derive(Debug, Clone)]
struct InterestPkt {
    content: ContentId,
    injection_ms: f64,
    measured: bool,
    /// Leaders already consulted (at most one per community).
    leaders: Vec<NodeId>,
    consults: Vec<ConsultRecord>,
    /// Every node traversed so far, starting at the consumer; the Data
    /// packet retraces it in reverse.
    path: Vec<NodeId>,
}

/// Who generated a Data packet.
#[derive(Debug, Clone, Copy, PartialEq)]
enum ServedBy {
    Router,
    Source,
}

/// In-flight Data, walking `route` from provider (index 0) to consumer.
#[derive(Debug, Clone)]
struct DataPkt {
    content: ContentId,
    injection_ms: f64,
    measured: bool,
    route: Vec<NodeId>,
    pos: usize,
    /// Router-to-router links in `route` (artificial endpoint links
    /// excluded): the request's hit distance.
    router_hops: u64,
    consults: Vec<ConsultRecord>,
    /// Communities whose caching protocol already ran for this Data.
    handled: BTreeSet<u32>,
}

/// What the leader answered at consult time.
#[derive(Debug, Clone)]
enum ConsultOutcome {
    /// No copy in the community: resume forwarding toward the source.
    Miss,
    /// A community member holds it: detour the Interest along this path.
    Redirect(Vec<NodeId>),
}

#[derive(Debug)]
enum Action {
    Inject(Injection),
    InterestAt(Box<InterestPkt>, NodeId),
    /// Consult Control arriving at the leader; `from` is the waiting router.
    ConsultAt(Box<InterestPkt>, NodeId, NodeId),
    /// Leader's reply arriving back at the waiting router.
    ConsultReply(Box<InterestPkt>, NodeId, ConsultOutcome),
    DataAt(Box<DataPkt>),
    ExchangeTick,
}

struct SimEvent {
    time_ms: f64,
    seq: u64,
    action: Action,
}

impl PartialEq for SimEvent {
    fn eq(&self, other: &Self) -> bool {
        self.time_ms == other.time_ms && self.seq == other.seq
    }
}
impl Eq for SimEvent {}
impl PartialOrd for SimEvent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for SimEvent {
    // Reversed so the max-heap pops the earliest (time, seq) first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time_ms
            .partial_cmp(&self.time_ms)
            .expect("event times are never NaN")
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

/// Deterministic outcome of one run. Contains no wall-clock measurements,
/// so identical configurations and seeds serialize identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Measured (post-warmup) requests delivered.
    pub measured_requests: u64,
    /// Measured requests served from a router store.
    pub cache_hits: u64,
    /// Measured requests served by a content source.
    pub source_hits: u64,
    /// `cache_hits / measured_requests`.
    pub cache_hit_ratio: f64,
    /// Mean injection-to-delivery time over measured requests, ms.
    pub avg_latency_ms: f64,
    /// Mean router-to-router Data hop count over measured requests.
    pub avg_hit_distance: f64,
    /// Link traversals by any packet (Interest + Data + Control).
    pub message_count: u64,
    pub interest_messages: u64,
    pub data_messages: u64,
    pub control_messages: u64,
    /// Communities detected (0 for strategies that use none).
    pub achieved_communities: usize,
    /// Simulated clock at the last event, ms.
    pub sim_duration_ms: f64,
}

#[derive(Debug, Default)]
struct MetricsAccumulator {
    measured_requests: u64,
    cache_hits: u64,
    source_hits: u64,
    latency_sum_ms: f64,
    hop_sum: u64,
}

// ---------------------------------------------------------------------------
// Simulation state
// ---------------------------------------------------------------------------

struct Sim<'a> {
    g: &'a NetworkGraph,
    routes: RouteTable,
    strategy: Strategy,
    lambda: f64,
    validate_redundancy: bool,

    /// Content id -> owning source node.
    source_of: Vec<NodeId>,

    // Per-node state, indexed by NodeId. Non-routers keep zero-capacity
    // stores that reject everything.
    stores: Vec<ContentStore>,
    trackers: Vec<OccupancyTracker>,
    reds: Vec<RedState>,
    /// Per-router request tables (router-local strategy only).
    local_tables: Vec<PTable>,

    // Community state (community strategy only).
    assignment: Option<CommunityAssignment>,
    leader_tables: Vec<PTable>,
    /// Per community: content -> the single member router holding it.
    holder_index: Vec<BTreeMap<ContentId, NodeId>>,

    policy_rng: StdRng,
    queue: BinaryHeap<SimEvent>,
    seq: u64,
    now: f64,

    interest_messages: u64,
    data_messages: u64,
    control_messages: u64,
    metrics: MetricsAccumulator,
}

impl<'a> Sim<'a> {
    fn push(&mut self, time_ms: f64, action: Action) {
        debug_assert!(time_ms >= self.now, "event scheduled before its cause");
        self.queue.push(SimEvent {
            time_ms,
            seq: self.seq,
            action,
        });
        self.seq += 1;
    }

    /// Delay of the direct link between adjacent nodes.
    fn link_delay(&self, a: NodeId, b: NodeId) -> f64 {
        self.g
            .neighbors(a)
            .iter()
            .find(|&&(n, _)| n == b)
            .map(|&(_, d)| d)
            .expect("route steps over an existing link")
    }

    fn community_of(&self, node: NodeId) -> u32 {
        self.assignment
            .as_ref()
            .expect("community state exists under the community strategy")
            .community_of(node)
    }

    fn leader_of_community(&self, community: u32) -> NodeId {
        self.assignment.as_ref().unwrap().leaders[community as usize]
    }

    // -- Interest path ------------------------------------------------------

    fn process_interest(&mut self, mut pkt: Box<InterestPkt>, at: NodeId) {
        let role = self.g.role(at);
        if role == NodeRole::Router {
            if self.strategy == Strategy::Pepc {
                self.local_tables[at.idx()].record_request(pkt.content);
            }
            // Serve from the local store if it holds the content.
            if self.stores[at.idx()].lookup(pkt.content) {
                self.serve(&pkt, at, ServedBy::Router);
                return;
            }
            // Community search: consult each community's leader once, at
            // the router where the Interest enters the community.
            if self.strategy == Strategy::Cpepc {
                let community = self.community_of(at);
                let leader = self.leader_of_community(community);
                if !pkt.leaders.contains(&leader) {
                    pkt.leaders.push(leader);
                    pkt.consults.push(ConsultRecord {
                        community,
                        entry: at,
                    });
                    let hops = self.routes.hop_count(at, leader) as u64;
                    let delay = self.routes.delay_ms(at, leader);
                    self.control_messages += hops;
                    let when = self.now + delay;
                    self.push(when, Action::ConsultAt(pkt, leader, at));
                    return;
                }
            }
        }
        if role == NodeRole::Source && self.source_of[pkt.content.idx()] == at {
            self.serve(&pkt, at, ServedBy::Source);
            return;
        }
        self.forward_interest(pkt, at);
    }

    fn forward_interest(&mut self, mut pkt: Box<InterestPkt>, at: NodeId) {
        let dst = self.source_of[pkt.content.idx()];
        let next = self
            .routes
            .next_hop(at, dst)
            .expect("every node reaches every source in a validated topology");
        let delay = self.link_delay(at, next);
        self.interest_messages += 1;
        pkt.path.push(next);
        let when = self.now + delay;
        self.push(when, Action::InterestAt(pkt, next));
    }

    /// Consult Control arrived at the leader: record the request, then
    /// serve, redirect, or report a miss.
    fn process_consult(&mut self, pkt: Box<InterestPkt>, leader: NodeId, from: NodeId) {
        let community = self.community_of(leader);
        self.leader_tables[community as usize].record_request(pkt.content);

        // The leader's own store can serve directly: the consult reply is
        // the Data packet itself, walking leader -> router -> consumer.
        if self.stores[leader.idx()].lookup(pkt.content) {
            let spine = self
                .routes
                .path(leader, from)
                .expect("leader and member are connected");
            let mut route = spine.nodes;
            route.extend(pkt.path.iter().rev().skip(1));
            self.dispatch_data(&pkt, route, ServedBy::Router);
            return;
        }

        let reply_hops = self.routes.hop_count(leader, from) as u64;
        let reply_delay = self.routes.delay_ms(leader, from);
        self.control_messages += reply_hops;
        let outcome = match self.holder_index[community as usize].get(&pkt.content) {
            Some(&holder) => {
                let hint = self
                    .routes
                    .path(from, holder)
                    .expect("community members are connected")
                    .nodes;
                ConsultOutcome::Redirect(hint)
            }
            None => ConsultOutcome::Miss,
        };
        let when = self.now + reply_delay;
        self.push(when, Action::ConsultReply(pkt, from, outcome));
    }

    fn process_consult_reply(&mut self, mut pkt: Box<InterestPkt>, at: NodeId, outcome: ConsultOutcome) {
        match outcome {
            ConsultOutcome::Miss => self.forward_interest(pkt, at),
            ConsultOutcome::Redirect(hint) => {
                // Walk the detour in one step: intermediate routers are
                // transparent (no lookups), but every link costs a
                // traversal and its delay, and the Data retraces them.
                let mut delay = 0.0;
                for pair in hint.windows(2) {
                    delay += self.link_delay(pair[0], pair[1]);
                    self.interest_messages += 1;
                }
                pkt.path.extend(hint.iter().skip(1));
                let target = *hint.last().expect("hint paths are nonempty");
                let when = self.now + delay;
                if delay == 0.0 && target == at {
                    // Degenerate self-redirect; resolve in place.
                    self.process_redirect_arrival(pkt, target);
                } else {
                    self.push(when, Action::InterestAt(pkt, target));
                }
            }
        }
    }

    /// A redirected Interest reached the hinted holder. A stale hint (the
    /// holder evicted the content while the Interest traveled) falls back
    /// to normal forwarding.
    fn process_redirect_arrival(&mut self, pkt: Box<InterestPkt>, at: NodeId) {
        self.process_interest(pkt, at);
    }

    // -- Data path ----------------------------------------------------------

    /// Content found at `at`: build the Data route (reverse Interest path)
    /// and start the walk.
    fn serve(&mut self, pkt: &InterestPkt, at: NodeId, served_by: ServedBy) {
        debug_assert_eq!(*pkt.path.last().unwrap(), at);
        let route: Vec<NodeId> = pkt.path.iter().rev().copied().collect();
        self.dispatch_data(pkt, route, served_by);
    }

    fn dispatch_data(&mut self, pkt: &InterestPkt, route: Vec<NodeId>, served_by: ServedBy) {
        if pkt.measured {
            match served_by {
                ServedBy::Router => self.metrics.cache_hits += 1,
                ServedBy::Source => self.metrics.source_hits += 1,
            }
        }
        let router_hops = route
            .windows(2)
            .filter(|w| self.g.role(w[0]) == NodeRole::Router && self.g.role(w[1]) == NodeRole::Router)
            .count() as u64;
        let mut handled = BTreeSet::new();
        if self.strategy == Strategy::Cpepc && served_by == ServedBy::Router {
            // The serving community demonstrably holds the content;
            // skip its caching protocol on the way back.
            handled.insert(self.community_of(route[0]));
        }
        let data = Box::new(DataPkt {
            content: pkt.content,
            injection_ms: pkt.injection_ms,
            measured: pkt.measured,
            route,
            pos: 0,
            router_hops,
            consults: pkt.consults.clone(),
            handled,
        });
        self.process_data(data);
    }

    fn process_data(&mut self, mut pkt: Box<DataPkt>) {
        let at = pkt.route[pkt.pos];
        if pkt.pos > 0 && self.g.role(at) == NodeRole::Router {
            self.apply_caching(&mut pkt, at);
        }
        if pkt.pos + 1 == pkt.route.len() {
            self.deliver(&pkt);
            return;
        }
        let next = pkt.route[pkt.pos + 1];
        let delay = self.link_delay(at, next);
        self.data_messages += 1;
        pkt.pos += 1;
        let when = self.now + delay;
        self.push(when, Action::DataAt(pkt));
    }

    fn deliver(&mut self, pkt: &DataPkt) {
        debug_assert_eq!(self.g.role(*pkt.route.last().unwrap()), NodeRole::Consumer);
        if pkt.measured {
            self.metrics.measured_requests += 1;
            self.metrics.latency_sum_ms += self.now - pkt.injection_ms;
            self.metrics.hop_sum += pkt.router_hops;
        }
    }

    /// Per-strategy caching evaluation as the Data passes router `at`.
    fn apply_caching(&mut self, pkt: &mut DataPkt, at: NodeId) {
        match self.strategy {
            Strategy::Lce => {
                if !self.stores[at.idx()].contains(pkt.content) && lce_decide().cache {
                    self.stores[at.idx()].insert(pkt.content, &mut self.policy_rng);
                }
            }
            Strategy::Prob { p } => {
                if !self.stores[at.idx()].contains(pkt.content) {
                    let d = prob_decide(p, &mut self.policy_rng)
                        .expect("probability validated with the config");
                    if d.cache {
                        self.stores[at.idx()].insert(pkt.content, &mut self.policy_rng);
                    }
                }
            }
            Strategy::Pepc => {
                if !self.stores[at.idx()].contains(pkt.content) {
                    let avg = self.trackers[at.idx()].update(self.stores[at.idx()].len());
                    let view = PopularityView::from_table(&self.local_tables[at.idx()], pkt.content);
                    let d = pepc_decide(&mut self.reds[at.idx()], avg, view);
                    if d.cache {
                        self.stores[at.idx()].insert(pkt.content, &mut self.policy_rng);
                    }
                }
            }
            Strategy::Cpepc => {
                let community = self.community_of(at);
                let is_entry = pkt
                    .consults
                    .iter()
                    .any(|r| r.community == community && r.entry == at);
                if is_entry && pkt.handled.insert(community) {
                    self.community_caching(pkt.content, at, community);
                }
            }
        }
    }

    /// Leader-coordinated caching at a community's entry router. All
    /// Control legs resolve at the current instant (they are off the Data
    /// path and add no consumer latency), but every leg's link traversals
    /// are counted.
    fn community_caching(&mut self, content: ContentId, candidate: NodeId, community: u32) {
        if self.stores[candidate.idx()].contains(content) {
            // The entry router already holds it: nothing to coordinate.
            return;
        }
        let leader = self.leader_of_community(community);
        let leg_hops = self.routes.hop_count(candidate, leader) as u64;
        // Caching query to the leader.
        self.control_messages += leg_hops;

        let duplicate = self.holder_index[community as usize].contains_key(&content);
        let avg = self.trackers[candidate.idx()].update(self.stores[candidate.idx()].len());
        let view = PopularityView::from_table(&self.leader_tables[community as usize], content);
        let decision = cpepc_decide(&mut self.reds[candidate.idx()], avg, view, duplicate);
        if !decision.cache {
            return;
        }
        // Grant traveling back to the candidate.
        self.control_messages += leg_hops;
        match self.stores[candidate.idx()].insert(content, &mut self.policy_rng) {
            InsertOutcome::Stored { evicted } => {
                self.holder_index[community as usize].insert(content, candidate);
                if let Some(gone) = evicted {
                    // Eviction notice keeps the leader's index exact.
                    self.control_messages += leg_hops;
                    let removed = self.holder_index[community as usize].remove(&gone);
                    debug_assert_eq!(removed, Some(candidate));
                }
            }
            InsertOutcome::Rejected => {
                // Store-level refusal (frequency admission): tell the
                // leader the grant was not applied.
                self.control_messages += leg_hops;
            }
            InsertOutcome::AlreadyPresent => unreachable!("checked above"),
        }
    }

    // -- Popularity exchange -------------------------------------------------

    fn process_tick(&mut self) {
        match self.strategy {
            Strategy::Cpepc => {
                let assignment = self.assignment.as_ref().unwrap();
                let leaders = assignment.leaders.clone();
                let snapshots: Vec<BTreeMap<ContentId, u64>> = self
                    .leader_tables
                    .iter()
                    .map(|t| t.local_snapshot())
                    .collect();
                for (i, table) in self.leader_tables.iter_mut().enumerate() {
                    let remotes: Vec<&BTreeMap<ContentId, u64>> = snapshots
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != i)
                        .map(|(_, s)| s)
                        .collect();
                    table.merge_remote(&remotes);
                    table.finish_period(self.lambda);
                }
                // Each ordered leader pair moves one table transfer.
                for (i, &from) in leaders.iter().enumerate() {
                    for (j, &to) in leaders.iter().enumerate() {
                        if i != j {
                            self.control_messages += self.routes.hop_count(from, to) as u64;
                        }
                    }
                }
            }
            Strategy::Pepc => {
                for router in self.g.routers() {
                    let table = &mut self.local_tables[router.idx()];
                    table.merge_remote(&[]);
                    table.finish_period(self.lambda);
                }
            }
            Strategy::Lce | Strategy::Prob { .. } => {}
        }
    }

    // -- Invariant audit -----------------------------------------------------

    /// Checks that no content name appears in two stores of one community
    /// and that the leader index mirrors the stores exactly.
    fn audit_redundancy(&self) {
        let Some(assignment) = self.assignment.as_ref() else {
            return;
        };
        for (c, members) in assignment.communities.iter().enumerate() {
            let mut seen: BTreeMap<ContentId, NodeId> = BTreeMap::new();
            for &m in members {
                if self.g.role(m) != NodeRole::Router {
                    continue;
                }
                for &name in self.stores[m.idx()].entries() {
                    if let Some(&other) = seen.get(&name) {
                        panic!(
                            "{} cached at both {} and {} of community {c}",
                            name,
                            self.g.name(other),
                            self.g.name(m)
                        );
                    }
                    seen.insert(name, m);
                }
            }
            assert_eq!(
                seen, self.holder_index[c],
                "leader index of community {c} diverged from the stores"
            );
        }
    }
}

// ---------------------------------------------------------------------------
// Run entry points
// ---------------------------------------------------------------------------

/// Loads the topology named by `config.topology` and simulates one run.
pub fn run(config: &RunConfig) -> Result<MetricsReport> {
    if config.topology.as_os_str().is_empty() {
        return Err(Error::Config("config names no topology file".into()));
    }
    let g = NetworkGraph::load(&config.topology)?;
    run_on(&g, config)
}

/// Applies the endpoint rule every run uses: router-only topologies get one
/// consumer per router plus sources on the 5% best-connected routers, while
/// topologies that already carry consumers pass through unchanged.
pub fn prepare_topology(graph: &NetworkGraph) -> Result<NetworkGraph> {
    if graph.consumers().next().is_none() {
        graph.attach_endpoints(0.05)
    } else {
        Ok(graph.clone())
    }
}

/// Simulates one run on an already-loaded topology. Router-only
/// topologies get consumers and sources attached automatically (one
/// consumer per router, sources on the best-connected routers).
pub fn run_on(graph: &NetworkGraph, config: &RunConfig) -> Result<MetricsReport> {
    config.validate()?;
    let attached = prepare_topology(graph)?;
    let g = &attached;

    let slots = config.store_slots();
    let thresholds = compute_thresholds(slots, config.rho1, config.rho2)?;
    let routes = g.all_pairs_routes();

    // Seeded RNG streams: one per concern so draws never interleave
    // across unrelated mechanisms.
    let mut workload_rng = StdRng::seed_from_u64(config.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(1));
    let mut assignment_rng = StdRng::seed_from_u64(config.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(2));
    let policy_rng = StdRng::seed_from_u64(config.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(3));

    // Contents are spread uniformly over the sources.
    let sources: Vec<NodeId> = g.sources().collect();
    if sources.is_empty() {
        return Err(Error::Config("topology has no content sources".into()));
    }
    let source_of: Vec<NodeId> = (0..config.catalog)
        .map(|_| sources[assignment_rng.gen_range(0..sources.len())])
        .collect();

    let assignment = if config.strategy == Strategy::Cpepc {
        let target = match config.community_target {
            Some(t) => t,
            None => community_count(config.tau, g.node_count())?,
        };
        Some(detect_communities_with_target(g, target, PARTITION_SEED)?)
    } else {
        None
    };

    let n = g.node_count();
    let mut stores = Vec::with_capacity(n);
    for id in g.node_ids() {
        let capacity = if g.role(id) == NodeRole::Router { slots } else { 0 };
        stores.push(ContentStore::new(capacity, config.replacement));
    }
    let trackers = vec![OccupancyTracker::new(config.omega)?; n];
    let reds = vec![RedState::new(thresholds, config.p_max)?; n];
    let local_tables: Vec<PTable> = g.node_ids().map(PTable::new).collect();
    let (leader_tables, holder_index) = match &assignment {
        Some(a) => (
            a.leaders.iter().map(|&l| PTable::new(l)).collect(),
            vec![BTreeMap::new(); a.len()],
        ),
        None => (Vec::new(), Vec::new()),
    };

    let consumers: Vec<NodeId> = g.consumers().collect();
    let workload = Workload {
        catalog: config.catalog,
        alpha: config.alpha,
        rate_per_s: config.rate_per_s,
        requests: config.requests,
        warmup: config.warmup,
    };
    let injections = workload.schedule(&consumers, &mut workload_rng)?;
    let horizon_ms = injections.last().map(|i| i.time_ms).unwrap_or(0.0);

    let achieved_communities = assignment.as_ref().map(|a| a.len()).unwrap_or(0);
    let mut sim = Sim {
        g,
        routes,
        strategy: config.strategy,
        lambda: config.lambda,
        validate_redundancy: config.validate_redundancy,
        source_of,
        stores,
        trackers,
        reds,
        local_tables,
        assignment,
        leader_tables,
        holder_index,
        policy_rng,
        queue: BinaryHeap::new(),
        seq: 0,
        now: 0.0,
        interest_messages: 0,
        data_messages: 0,
        control_messages: 0,
        metrics: MetricsAccumulator::default(),
    };

    for injection in injections {
        sim.push(injection.time_ms, Action::Inject(injection));
    }
    let period_ms = config.period_s * 1000.0;
    let mut k = 1u64;
    while k as f64 * period_ms <= horizon_ms {
        sim.push(k as f64 * period_ms, Action::ExchangeTick);
        k += 1;
    }

    while let Some(event) = sim.queue.pop() {
        sim.now = event.time_ms;
        match event.action {
            Action::Inject(injection) => {
                let pkt = Box::new(InterestPkt {
                    content: injection.content,
                    injection_ms: injection.time_ms,
                    measured: injection.measured,
                    leaders: Vec::new(),
                    consults: Vec::new(),
                    path: vec![injection.consumer],
                });
                sim.process_interest(pkt, injection.consumer);
            }
            Action::InterestAt(pkt, at) => sim.process_interest(pkt, at),
            Action::ConsultAt(pkt, leader, from) => sim.process_consult(pkt, leader, from),
            Action::ConsultReply(pkt, at, outcome) => sim.process_consult_reply(pkt, at, outcome),
            Action::DataAt(pkt) => sim.process_data(pkt),
            Action::ExchangeTick => sim.process_tick(),
        }
        if sim.validate_redundancy {
            sim.audit_redundancy();
        }
    }

    let m = &sim.metrics;
    let n_req = m.measured_requests;
    let denom = if n_req == 0 { 1.0 } else { n_req as f64 };
    Ok(MetricsReport {
        measured_requests: n_req,
        cache_hits: m.cache_hits,
        source_hits: m.source_hits,
        cache_hit_ratio: m.cache_hits as f64 / denom,
        avg_latency_ms: m.latency_sum_ms / denom,
        avg_hit_distance: m.hop_sum as f64 / denom,
        message_count: sim.interest_messages + sim.data_messages + sim.control_messages,
        interest_messages: sim.interest_messages,
        data_messages: sim.data_messages,
        control_messages: sim.control_messages,
        achieved_communities,
        sim_duration_ms: sim.now,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::synth;

    fn desk_config(strategy: Strategy) -> RunConfig {
        RunConfig {
            strategy,
            catalog: 200,
            requests: 2_000,
            warmup: 1_000,
            cache_frac: 2.0, // 4 slots on a 200-content catalog
            period_s: 10.0,
            seed: 42,
            ..RunConfig::default()
        }
    }

    #[test]
    fn zipf_table_matches_analytic_values() {
        // Two contents, skew 1: weights {1, 1/2} normalize to {2/3, 1/3}.
        let z = ZipfSampler::new(2, 1.0).unwrap();
        assert!((z.probability(ContentId(0)) - 2.0 / 3.0).abs() < 1e-12);
        assert!((z.probability(ContentId(1)) - 1.0 / 3.0).abs() < 1e-12);

        // Zero skew: uniform.
        let z = ZipfSampler::new(5, 0.0).unwrap();
        for n in 0..5 {
            assert!((z.probability(ContentId(n)) - 0.2).abs() < 1e-12);
        }

        assert!(ZipfSampler::new(0, 1.0).is_err());
        assert!(ZipfSampler::new(5, -0.1).is_err());
    }

    #[test]
    fn zipf_samples_follow_the_pmf() {
        let catalog = 100;
        let z = ZipfSampler::new(catalog, 0.8).unwrap();
        let mut rng = StdRng::seed_from_u64(7);
        let mut counts = vec![0u64; catalog];
        let draws = 100_000;
        for _ in 0..draws {
            counts[z.sample(&mut rng).idx()] += 1;
        }
        for (i, &c) in counts.iter().enumerate() {
            let analytic = z.probability(ContentId(i as u32));
            let empirical = c as f64 / draws as f64;
            assert!(
                (empirical - analytic).abs() < 0.01,
                "rank {} off: {empirical} vs {analytic}",
                i + 1
            );
        }
    }

    #[test]
    fn arrival_gaps_average_to_the_rate() {
        let g = synth::desk12().attach_endpoints(0.05).unwrap();
        let consumers: Vec<NodeId> = g.consumers().collect();
        let w = Workload {
            catalog: 50,
            alpha: 0.8,
            rate_per_s: 10.0,
            requests: 10_000,
            warmup: 0,
        };
        let mut rng = StdRng::seed_from_u64(9);
        let schedule = w.schedule(&consumers, &mut rng).unwrap();
        let mean_gap = schedule.last().unwrap().time_ms / schedule.len() as f64;
        assert!(
            (mean_gap - 100.0).abs() < 5.0,
            "mean gap {mean_gap} ms too far from 100 ms"
        );
        assert!(schedule.windows(2).all(|w| w[0].time_ms <= w[1].time_ms));
    }

    #[test]
    fn warmup_requests_are_marked_unmeasured() {
        let g = synth::desk12().attach_endpoints(0.05).unwrap();
        let consumers: Vec<NodeId> = g.consumers().collect();
        let w = Workload {
            catalog: 10,
            alpha: 1.0,
            rate_per_s: 10.0,
            requests: 3,
            warmup: 2,
        };
        let mut rng = StdRng::seed_from_u64(1);
        let schedule = w.schedule(&consumers, &mut rng).unwrap();
        assert_eq!(
            schedule.iter().map(|i| i.measured).collect::<Vec<_>>(),
            vec![false, false, true, true, true]
        );

        let mut rng = StdRng::seed_from_u64(1);
        assert_eq!(schedule, w.schedule(&consumers, &mut rng).unwrap());
    }

    #[test]
    fn single_router_serves_with_zero_distance_and_latency() {
        // One router with one consumer and one source attached over
        // zero-delay links: every Data travels only artificial links.
        let g = synth::router_graph(&["r0"], &[]);
        let g = g.attach_endpoints(0.05).unwrap();
        let cfg = RunConfig {
            strategy: Strategy::Lce,
            catalog: 1,
            requests: 9,
            warmup: 1,
            cache_slots: Some(1),
            seed: 3,
            ..RunConfig::default()
        };
        let report = run_on(&g, &cfg).unwrap();
        assert_eq!(report.measured_requests, 9);
        // After the first request caches the only content at both
        // routers, every consumer is served by its ingress router.
        assert_eq!(report.cache_hits, 9);
        assert_eq!(report.avg_hit_distance, 0.0);
        assert_eq!(report.avg_latency_ms, 0.0);
    }

    #[test]
    fn conservation_and_message_split_hold_for_every_strategy() {
        let g = synth::desk12();
        for strategy in [
            Strategy::Lce,
            Strategy::Prob { p: 0.5 },
            Strategy::Pepc,
            Strategy::Cpepc,
        ] {
            let cfg = desk_config(strategy);
            let report = run_on(&g, &cfg).unwrap();
            assert_eq!(
                report.measured_requests,
                report.cache_hits + report.source_hits,
                "{strategy}: a request went missing"
            );
            assert_eq!(
                report.message_count,
                report.interest_messages + report.data_messages + report.control_messages
            );
            assert!(report.measured_requests == 2_000);
            assert!(report.cache_hit_ratio > 0.0, "{strategy} never hit");
        }
    }

    #[test]
    fn cache_everywhere_sends_no_control_traffic() {
        let g = synth::desk12();
        let report = run_on(&g, &desk_config(Strategy::Lce)).unwrap();
        assert_eq!(report.control_messages, 0);
        assert_eq!(
            report.message_count,
            report.interest_messages + report.data_messages
        );
        assert_eq!(report.achieved_communities, 0);
    }

    #[test]
    fn community_strategy_pays_control_overhead() {
        let g = synth::desk12();
        let cpepc = run_on(&g, &desk_config(Strategy::Cpepc)).unwrap();
        let lce = run_on(&g, &desk_config(Strategy::Lce)).unwrap();
        assert!(cpepc.control_messages > 0);
        assert!(cpepc.achieved_communities > 0);
        assert!(
            cpepc.message_count > lce.interest_messages + lce.data_messages
                || cpepc.message_count > cpepc.interest_messages + cpepc.data_messages
        );
    }

    #[test]
    fn repeated_runs_are_bit_identical() {
        let g = synth::desk12();
        for strategy in [
            Strategy::Lce,
            Strategy::Prob { p: 0.3 },
            Strategy::Pepc,
            Strategy::Cpepc,
        ] {
            let cfg = desk_config(strategy);
            let a = run_on(&g, &cfg).unwrap();
            let b = run_on(&g, &cfg).unwrap();
            assert_eq!(a, b, "{strategy} diverged across identical runs");
            assert_eq!(
                serde_json::to_string(&a).unwrap(),
                serde_json::to_string(&b).unwrap()
            );
        }
    }

    #[test]
    fn different_seeds_differ() {
        let g = synth::desk12();
        let mut cfg = desk_config(Strategy::Lce);
        let a = run_on(&g, &cfg).unwrap();
        cfg.seed = 43;
        let b = run_on(&g, &cfg).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn oversized_caches_drive_hit_ratio_to_one() {
        // Stores at least as large as the catalog never evict, so after a
        // long warmup every measured request hits at its ingress router.
        let g = synth::desk12();
        let cfg = RunConfig {
            strategy: Strategy::Lce,
            catalog: 5,
            requests: 500,
            warmup: 2_000,
            cache_slots: Some(5),
            seed: 11,
            ..RunConfig::default()
        };
        let report = run_on(&g, &cfg).unwrap();
        assert_eq!(report.cache_hit_ratio, 1.0);
        assert_eq!(report.source_hits, 0);
    }

    #[test]
    fn redundancy_audit_passes_on_a_community_run() {
        let g = synth::desk12();
        let mut cfg = desk_config(Strategy::Cpepc);
        cfg.validate_redundancy = true;
        cfg.replacement = ReplacementPolicy::Lru;
        let report = run_on(&g, &cfg).unwrap();
        assert!(report.measured_requests > 0);
    }

    #[test]
    fn exchange_ticks_cost_exactly_the_leader_pair_hops() {
        use crate::community::{community_count, detect_communities_with_target};

        // Reproduce the partition the engine computes internally.
        let g = synth::desk12().attach_endpoints(0.05).unwrap();
        let target = community_count(0.15, g.node_count()).unwrap();
        let assignment = detect_communities_with_target(&g, target, 0).unwrap();
        let routes = g.all_pairs_routes();
        let mut per_tick = 0u64;
        for &a in &assignment.leaders {
            for &b in &assignment.leaders {
                if a != b {
                    per_tick += routes.hop_count(a, b) as u64;
                }
            }
        }
        assert!(assignment.len() > 1 && per_tick > 0);

        // A single request injected after every tick: the ticks move
        // still-empty tables, so the silent run differs only by the
        // transfer traffic, a whole number of per-tick volumes.
        let base = RunConfig {
            strategy: Strategy::Cpepc,
            catalog: 10,
            requests: 1,
            warmup: 0,
            cache_frac: 10.0,
            seed: 42,
            ..RunConfig::default()
        };
        let mut ticking = base.clone();
        ticking.period_s = 0.001;
        let mut silent = base;
        silent.period_s = 1e9;
        let a = run_on(&g, &ticking).unwrap();
        let b = run_on(&g, &silent).unwrap();
        assert_eq!(a.interest_messages, b.interest_messages);
        assert_eq!(a.data_messages, b.data_messages);
        assert_eq!(a.cache_hits, b.cache_hits);
        let delta = a.control_messages - b.control_messages;
        assert!(delta > 0, "no tick fired before the request");
        assert_eq!(delta % per_tick, 0);
    }

    #[test]
    fn exchange_period_affects_behavior() {
        // With exchange, leaders learn global popularity and admission
        // sharpens; the reports must diverge from a never-exchanging run.
        let g = synth::desk12();
        let mut with_ticks = desk_config(Strategy::Cpepc);
        with_ticks.period_s = 5.0;
        let mut without_ticks = with_ticks.clone();
        without_ticks.period_s = 1e9; // beyond the horizon: no exchange

        let a = run_on(&g, &with_ticks).unwrap();
        let b = run_on(&g, &without_ticks).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn replacement_policies_all_complete() {
        let g = synth::desk12();
        for replacement in [
            ReplacementPolicy::Lru,
            ReplacementPolicy::Random,
            ReplacementPolicy::Plfu,
        ] {
            for strategy in [Strategy::Lce, Strategy::Cpepc] {
                let mut cfg = desk_config(strategy);
                cfg.replacement = replacement;
                cfg.validate_redundancy = true;
                let report = run_on(&g, &cfg).unwrap();
                assert_eq!(
                    report.measured_requests,
                    report.cache_hits + report.source_hits
                );
            }
        }
    }

    #[test]
    fn config_json_round_trip_and_defaults() {
        let text = r#"{
            "topology": "topologies/desk12.json",
            "strategy": {"prob": {"p": 0.5}},
            "requests": 100
        }"#;
        let cfg: RunConfig = serde_json::from_str(text).unwrap();
        assert_eq!(cfg.strategy, Strategy::Prob { p: 0.5 });
        assert_eq!(cfg.requests, 100);
        assert_eq!(cfg.catalog, 10_000); // default preserved
        assert_eq!(cfg.lambda, 0.125);

        let plain: RunConfig =
            serde_json::from_str(r#"{"strategy": "lce"}"#).unwrap();
        assert_eq!(plain.strategy, Strategy::Lce);

        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back.strategy, cfg.strategy);
        assert_eq!(back.requests, cfg.requests);

        assert!(serde_json::from_str::<RunConfig>(r#"{"no_such_field": 1}"#).is_err());
    }

    #[test]
    fn config_validation_rejects_bad_values() {
        let bad = |f: fn(&mut RunConfig)| {
            let mut cfg = RunConfig::default();
            f(&mut cfg);
            cfg.validate().is_err()
        };
        assert!(bad(|c| c.catalog = 0));
        assert!(bad(|c| c.requests = 0));
        assert!(bad(|c| c.rate_per_s = 0.0));
        assert!(bad(|c| c.alpha = -1.0));
        assert!(bad(|c| c.rho1 = 0.9));
        assert!(bad(|c| c.lambda = 1.5));
        assert!(bad(|c| c.strategy = Strategy::Prob { p: 1.5 }));
        assert!(bad(|c| c.cache_frac = 0.0));
        assert!(RunConfig::default().validate().is_ok());
    }

    #[test]
    fn store_slots_follow_fraction_or_override() {
        let mut cfg = RunConfig {
            catalog: 10_000,
            cache_frac: 0.1,
            ..RunConfig::default()
        };
        assert_eq!(cfg.store_slots(), 10);
        cfg.cache_frac = 0.004; // rounds below 1: floor of one slot
        assert_eq!(cfg.store_slots(), 1);
        cfg.cache_slots = Some(7);
        assert_eq!(cfg.store_slots(), 7);
    }

    #[test]
    fn run_requires_a_topology_path() {
        let cfg = RunConfig::default();
        assert!(run(&cfg).is_err());
    }
}

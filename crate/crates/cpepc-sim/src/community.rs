//! Community detection and leader election on the router core.
//!
//! Routers are partitioned with the Louvain method (unit edge weights,
//! seeded sweep order, optional resolution multiplier). The target number
//! of communities is `ceil(tau * V)` where `V` counts every node in the
//! topology; the Louvain resolution is tuned by bisection until the
//! achieved count is as close to the target as the method allows.
//! Consumers and sources inherit the community of their attachment router.
//!
//! Each community elects the router with the highest betweenness
//! centrality inside the community-induced subgraph as its leader; ties
//! fall back to the smallest mean intra-community hop distance, then the
//! smallest node name.

use std::collections::VecDeque;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::{NetworkGraph, NodeId, NodeRole};

/// Tuning for [`detect_communities`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommunityParams {
    /// Community-count fraction: the target is `ceil(tau * nodes)`.
    pub tau: f64,
    /// Louvain resolution used when no count target applies.
    pub resolution: f64,
}

impl Default for CommunityParams {
    fn default() -> Self {
        CommunityParams {
            tau: 0.15,
            resolution: 1.0,
        }
    }
}

/// Result of community detection over a topology.
#[derive(Debug, Clone, PartialEq)]
pub struct CommunityAssignment {
    /// Community index per node (indexed by `NodeId::idx`), covering every
    /// node of the graph the assignment was computed for.
    pub membership: Vec<u32>,
    /// Member nodes per community, each sorted by id; communities are
    /// ordered by their smallest member.
    pub communities: Vec<Vec<NodeId>>,
    /// Elected leader router per community.
    pub leaders: Vec<NodeId>,
    /// Newman modularity of the router-core partition at resolution 1.
    pub modularity: f64,
    /// Louvain resolution that produced the partition.
    pub resolution: f64,
}

impl CommunityAssignment {
    #[inline]
    pub fn community_of(&self, node: NodeId) -> u32 {
        self.membership[node.idx()]
    }

    #[inline]
    pub fn leader_of(&self, node: NodeId) -> NodeId {
        self.leaders[self.community_of(node) as usize]
    }

    pub fn len(&self) -> usize {
        self.communities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.communities.is_empty()
    }

    /// Serializable document: member names per community, leader names,
    /// modularity, and the resolution used.
    pub fn to_document(&self, g: &NetworkGraph) -> AssignmentDocument {
        AssignmentDocument {
            communities: self
                .communities
                .iter()
                .map(|c| c.iter().map(|&n| g.name(n).to_string()).collect())
                .collect(),
            leaders: self
                .leaders
                .iter()
                .map(|&n| g.name(n).to_string())
                .collect(),
            modularity: self.modularity,
            resolution: self.resolution,
        }
    }
}

/// JSON shape written by the `partition` subcommand.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssignmentDocument {
    pub communities: Vec<Vec<String>>,
    pub leaders: Vec<String>,
    pub modularity: f64,
    pub resolution: f64,
}

/// Target community count: `ceil(tau * node_count)`.
///
/// `tau` must lie in `(0, 1]`.
pub fn community_count(tau: f64, node_count: usize) -> Result<usize> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::Community(format!("tau {tau} outside (0, 1]")));
    }
    Ok((tau * node_count as f64).ceil() as usize)
}

/// Newman modularity of a node partition with unit edge weights:
/// `Q = sum_c [ in_c / m - resolution * (deg_c / 2m)^2 ]`.
///
/// `membership[i]` is the community label of node `i` (labels need not be
/// contiguous). Errors on an edgeless graph or a membership of the wrong
/// length.
pub fn modularity(g: &NetworkGraph, membership: &[u32], resolution: f64) -> Result<f64> {
    if membership.len() != g.node_count() {
        return Err(Error::Community(format!(
            "membership covers {} nodes, graph has {}",
            membership.len(),
            g.node_count()
        )));
    }
    if g.link_count() == 0 {
        return Err(Error::Community(
            "modularity is undefined on an edgeless graph".into(),
        ));
    }
    let labels = membership.iter().copied().max().unwrap_or(0) as usize + 1;
    let mut internal = vec![0.0f64; labels]; // intra-community edge count
    let mut degree = vec![0.0f64; labels]; // summed degree per community
    for u in g.node_ids() {
        let cu = membership[u.idx()] as usize;
        degree[cu] += g.degree(u) as f64;
        for &(v, _) in g.neighbors(u) {
            if u < v && membership[v.idx()] as usize == cu {
                internal[cu] += 1.0;
            }
        }
    }
    let m = g.link_count() as f64;
    let mut q = 0.0;
    for c in 0..labels {
        q += internal[c] / m - resolution * (degree[c] / (2.0 * m)).powi(2);
    }
    Ok(q)
}

/// Modularity-based community detection at a fixed resolution over the
/// router core of `g`; consumers and sources inherit their attachment
/// router's community. Cores of up to ten routers are partitioned exactly
/// by enumeration; larger cores use the Louvain heuristic with seeded
/// restarts.
pub fn louvain(g: &NetworkGraph, resolution: f64, seed: u64) -> Result<CommunityAssignment> {
    let core = RouterCore::new(g)?;
    let membership = core.louvain(resolution, seed);
    assemble(g, &core, membership, resolution)
}

/// Louvain with the resolution tuned by bisection so the achieved
/// community count approaches `ceil(params.tau * node_count)`.
pub fn detect_communities(
    g: &NetworkGraph,
    params: &CommunityParams,
    seed: u64,
) -> Result<CommunityAssignment> {
    let target = community_count(params.tau, g.node_count())?;
    detect_communities_with_target(g, target, seed)
}

/// Louvain with the resolution tuned by bisection toward an explicit
/// community-count target. The search covers resolutions in `[0.1, 10]`
/// with at most 30 refinement steps and keeps the partition whose count is
/// closest to the target (the earliest evaluated partition on ties).
pub fn detect_communities_with_target(
    g: &NetworkGraph,
    target: usize,
    seed: u64,
) -> Result<CommunityAssignment> {
    if target == 0 {
        return Err(Error::Community("community target must be positive".into()));
    }
    let core = RouterCore::new(g)?;

    // (count distance, resolution, membership) of the best partition so far.
    let mut best: Option<(usize, f64, Vec<u32>)> = None;
    fn consider(
        target: usize,
        resolution: f64,
        membership: Vec<u32>,
        best: &mut Option<(usize, f64, Vec<u32>)>,
    ) -> usize {
        let count = distinct(&membership);
        let distance = count.abs_diff(target);
        if best.as_ref().map_or(true, |(d, _, _)| distance < *d) {
            *best = Some((distance, resolution, membership));
        }
        count
    }

    let (mut lo, mut hi) = (0.1f64, 10.0f64);
    let count_lo = consider(target, lo, core.louvain(lo, seed), &mut best);
    let count_hi = consider(target, hi, core.louvain(hi, seed), &mut best);

    // Louvain community counts grow with resolution; bisect on a log scale
    // while the target stays bracketed.
    if count_lo < target && target < count_hi {
        for _ in 0..30 {
            let mid = (lo * hi).sqrt();
            let count = consider(target, mid, core.louvain(mid, seed), &mut best);
            if count == target {
                break;
            }
            if count < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi / lo < 1.0 + 1e-6 {
                break;
            }
        }
    }

    let (_, resolution, membership) = best.expect("at least one partition evaluated");
    assemble(g, &core, membership, resolution)
}

/// Betweenness centrality of the subgraph induced by `members`, with unit
/// link weights. Each unordered node pair contributes once, so the middle
/// of a 3-node path scores exactly 1. Result order matches `members`.
pub fn betweenness_centrality(g: &NetworkGraph, members: &[NodeId]) -> Vec<f64> {
    let sub = Induced::new(g, members);
    let k = sub.adj.len();
    let mut bc = vec![0.0f64; k];

    // Brandes' accumulation over the BFS shortest-path DAG of each origin.
    for s in 0..k {
        let mut stack = Vec::with_capacity(k);
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); k];
        let mut sigma = vec![0.0f64; k];
        let mut dist = vec![usize::MAX; k];
        sigma[s] = 1.0;
        dist[s] = 0;
        let mut queue = VecDeque::new();
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            stack.push(u);
            for &v in &sub.adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
                if dist[v] == dist[u] + 1 {
                    sigma[v] += sigma[u];
                    preds[v].push(u);
                }
            }
        }
        let mut delta = vec![0.0f64; k];
        while let Some(w) = stack.pop() {
            for &p in &preds[w] {
                delta[p] += sigma[p] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                bc[w] += delta[w];
            }
        }
    }
    // Every unordered pair was counted from both endpoints.
    for v in &mut bc {
        *v /= 2.0;
    }
    bc
}

/// Elects the leader of a community: highest betweenness centrality in the
/// induced subgraph, ties broken by smallest mean intra-community hop
/// distance, then by smallest node name.
pub fn select_leader(g: &NetworkGraph, members: &[NodeId]) -> Result<NodeId> {
    if members.is_empty() {
        return Err(Error::Community(
            "cannot elect a leader of an empty community".into(),
        ));
    }
    let sub = Induced::new(g, members);
    let bc = betweenness_centrality(g, members);
    const TIE: f64 = 1e-9;

    let best_bc = bc.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<usize> = (0..sub.members.len())
        .filter(|&i| bc[i] >= best_bc - TIE)
        .collect();
    if tied.len() == 1 {
        return Ok(sub.members[tied[0]]);
    }

    // Mean intra-community hop distance per tied candidate; members that
    // are unreachable inside the induced subgraph count as infinite.
    let mut best: Option<(f64, NodeId)> = None;
    for &i in &tied {
        let dist = sub.bfs_distances(i);
        let mut sum = 0.0;
        for (j, d) in dist.iter().enumerate() {
            if j != i {
                sum += d.map_or(f64::INFINITY, |h| h as f64);
            }
        }
        let avg = if sub.members.len() > 1 {
            sum / (sub.members.len() - 1) as f64
        } else {
            0.0
        };
        let better = match &best {
            None => true,
            Some((cur_avg, cur_id)) => {
                avg < cur_avg - TIE || (avg <= cur_avg + TIE && sub.members[i] < *cur_id)
            }
        };
        if better {
            best = Some((avg, sub.members[i]));
        }
    }
    Ok(best.expect("candidates nonempty").1)
}

fn distinct(membership: &[u32]) -> usize {
    let mut labels: Vec<u32> = membership.to_vec();
    labels.sort_unstable();
    labels.dedup();
    labels.len()
}

/// Subgraph induced by a member list, with BFS support.
struct Induced {
    members: Vec<NodeId>,
    adj: Vec<Vec<usize>>,
}

impl Induced {
    fn new(g: &NetworkGraph, members: &[NodeId]) -> Self {
        let members = members.to_vec();
        let mut index = vec![usize::MAX; g.node_count()];
        for (i, &n) in members.iter().enumerate() {
            index[n.idx()] = i;
        }
        let adj = members
            .iter()
            .map(|&n| {
                g.neighbors(n)
                    .iter()
                    .filter_map(|&(v, _)| {
                        let j = index[v.idx()];
                        (j != usize::MAX).then_some(j)
                    })
                    .collect()
            })
            .collect();
        Induced {
            members,
            adj,
        }
    }

    fn bfs_distances(&self, from: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.adj.len()];
        dist[from] = Some(0);
        let mut queue = VecDeque::new();
        queue.push_back(from);
        while let Some(u) = queue.pop_front() {
            for &v in &self.adj[u] {
                if dist[v].is_none() {
                    dist[v] = Some(dist[u].unwrap() + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

/// Compact router-only view used by Louvain.
/// Largest router core solved by exhaustive partition enumeration instead
/// of the Louvain heuristic. Bell(10) = 115,975 partitions, a few
/// milliseconds of scoring, while greedy local moves are at their least
/// reliable on graphs this small.
const EXACT_NODE_LIMIT: usize = 10;

struct RouterCore {
    nodes: Vec<NodeId>,
    adj: Vec<Vec<usize>>,
    edges: usize,
}

impl RouterCore {
    fn new(g: &NetworkGraph) -> Result<Self> {
        let nodes: Vec<NodeId> = g.routers().collect();
        let mut index = vec![usize::MAX; g.node_count()];
        for (i, &n) in nodes.iter().enumerate() {
            index[n.idx()] = i;
        }
        let mut adj = vec![Vec::new(); nodes.len()];
        let mut edges = 0;
        for (i, &n) in nodes.iter().enumerate() {
            for &(v, _) in g.neighbors(n) {
                if g.role(v) == NodeRole::Router {
                    adj[i].push(index[v.idx()]);
                    if n < v {
                        edges += 1;
                    }
                }
            }
        }
        if nodes.len() > 1 && edges == 0 {
            return Err(Error::Community(
                "router core has no links; communities are undefined".into(),
            ));
        }
        Ok(RouterCore {
            nodes,
            adj,
            edges,
        })
    }

    /// Best membership over router indices, labels compacted to `0..count`.
    ///
    /// Tiny cores are solved exactly by enumerating every partition:
    /// greedy local moves can stall in states where no single move or
    /// community merge improves modularity (perfect-matching traps), and
    /// enumeration is cheap there. Larger cores use the Louvain heuristic,
    /// restarted with distinct seeded sweep orders, keeping the
    /// highest-modularity partition (the earliest one on ties).
    /// Deterministic for a fixed seed either way.
    fn louvain(&self, resolution: f64, seed: u64) -> Vec<u32> {
        let n = self.nodes.len();
        if n == 0 {
            return Vec::new();
        }
        if self.edges == 0 {
            return vec![0; n]; // single router, no links
        }
        if n <= EXACT_NODE_LIMIT {
            return self.exact_partition(resolution);
        }
        const RESTARTS: u64 = 16;
        let mut best: Option<(f64, Vec<u32>)> = None;
        for r in 0..RESTARTS {
            let mut rng =
                StdRng::seed_from_u64(seed.wrapping_add(r.wrapping_mul(0x9E37_79B9_7F4A_7C15)));
            let membership = self.louvain_once(resolution, &mut rng);
            let q = self.core_modularity(&membership, resolution);
            if best.as_ref().map_or(true, |(bq, _)| q > bq + 1e-12) {
                best = Some((q, membership));
            }
        }
        best.expect("at least one restart ran").1
    }

    /// Exhaustive modularity maximization over every partition of the core
    /// (restricted growth strings). First maximum in enumeration order wins,
    /// so the result is deterministic and seed-independent.
    fn exact_partition(&self, resolution: f64) -> Vec<u32> {
        fn rec(
            core: &RouterCore,
            resolution: f64,
            labels: &mut Vec<u32>,
            used: u32,
            best: &mut (f64, Vec<u32>),
        ) {
            if labels.len() == core.nodes.len() {
                let q = core.core_modularity(labels, resolution);
                if q > best.0 + 1e-12 {
                    *best = (q, labels.clone());
                }
                return;
            }
            for label in 0..=used {
                labels.push(label);
                rec(core, resolution, labels, used.max(label + 1), best);
                labels.pop();
            }
        }
        let mut best = (f64::NEG_INFINITY, Vec::new());
        let mut labels = Vec::with_capacity(self.nodes.len());
        rec(self, resolution, &mut labels, 0, &mut best);
        best.1
    }

    /// A single Louvain pass hierarchy driven by `rng`'s sweep orders.
    fn louvain_once(&self, resolution: f64, rng: &mut StdRng) -> Vec<u32> {
        let n = self.nodes.len();
        // Level-0 weighted view: unit weights, no self-loops.
        let mut level = LevelGraph::unit(&self.adj);
        // membership[i] = current community of original node i, expressed
        // as a node index of the current level graph.
        let mut membership: Vec<usize> = (0..n).collect();

        loop {
            let (comm, improved) = level.one_level(resolution, rng);
            for slot in membership.iter_mut() {
                *slot = comm[*slot];
            }
            let count = comm.iter().copied().max().unwrap_or(0) + 1;
            if !improved || count == level.len() {
                break;
            }
            level = level.aggregate(&comm, count);
        }
        compact_labels(&membership)
    }

    /// Modularity of a router-core partition with unit edge weights; the
    /// restart loop uses it to rank candidate partitions.
    fn core_modularity(&self, membership: &[u32], resolution: f64) -> f64 {
        let labels = membership.iter().copied().max().unwrap_or(0) as usize + 1;
        let mut internal = vec![0.0f64; labels];
        let mut degree = vec![0.0f64; labels];
        for u in 0..self.adj.len() {
            let cu = membership[u] as usize;
            degree[cu] += self.adj[u].len() as f64;
            for &v in &self.adj[u] {
                if u < v && membership[v] as usize == cu {
                    internal[cu] += 1.0;
                }
            }
        }
        let m = self.edges as f64;
        (0..labels)
            .map(|c| internal[c] / m - resolution * (degree[c] / (2.0 * m)).powi(2))
            .sum()
    }
}

/// Weighted multigraph for the aggregation levels of Louvain.
struct LevelGraph {
    /// `(neighbor, weight)` excluding self-loops.
    adj: Vec<Vec<(usize, f64)>>,
    /// Self-loop weight per node (already counted twice, once per
    /// direction, as degrees conventionally do).
    self_w: Vec<f64>,
    /// Weighted degree per node, including the self-loop weight.
    k: Vec<f64>,
    /// Total weight `2m`.
    m2: f64,
}

impl LevelGraph {
    fn unit(adj: &[Vec<usize>]) -> Self {
        let adj: Vec<Vec<(usize, f64)>> = adj
            .iter()
            .map(|list| list.iter().map(|&v| (v, 1.0)).collect())
            .collect();
        let self_w = vec![0.0; adj.len()];
        let k: Vec<f64> = adj.iter().map(|l| l.len() as f64).collect();
        let m2 = k.iter().sum();
        LevelGraph {
            adj,
            self_w,
            k,
            m2,
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    /// One modularity-optimization pass: sweeps nodes in a seeded shuffled
    /// order, greedily moving each to the neighboring community with the
    /// highest gain, until a full sweep makes no move. Returns compacted
    /// community labels and whether anything moved.
    fn one_level(&self, resolution: f64, rng: &mut StdRng) -> (Vec<usize>, bool) {
        const EPS: f64 = 1e-12;
        let n = self.len();
        let mut comm: Vec<usize> = (0..n).collect();
        let mut sigma_tot = self.k.clone();

        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);

        // Scratch: weight from the sweep node to each touched community.
        let mut w_to = vec![0.0f64; n];
        let mut touched: Vec<usize> = Vec::new();

        let mut improved = false;
        loop {
            let mut moved = false;
            for &u in &order {
                let cu = comm[u];
                touched.clear();
                for &(v, w) in &self.adj[u] {
                    let cv = comm[v];
                    if w_to[cv] == 0.0 {
                        touched.push(cv);
                    }
                    w_to[cv] += w;
                }
                sigma_tot[cu] -= self.k[u];

                // Gain of placing u in community c, up to shared constants:
                // w(u->c) - resolution * sigma_tot(c) * k(u) / 2m.
                let gain = |c: usize, w_uc: f64| {
                    w_uc - resolution * sigma_tot[c] * self.k[u] / self.m2
                };
                let mut best_c = cu;
                let mut best_gain = gain(cu, w_to[cu]);
                touched.sort_unstable();
                for &c in &touched {
                    if c == cu {
                        continue;
                    }
                    let g = gain(c, w_to[c]);
                    if g > best_gain + EPS {
                        best_gain = g;
                        best_c = c;
                    }
                }

                sigma_tot[best_c] += self.k[u];
                comm[u] = best_c;
                if best_c != cu {
                    moved = true;
                    improved = true;
                }
                for &c in &touched {
                    w_to[c] = 0.0;
                }
            }
            if !moved {
                break;
            }
        }

        // Compact labels by first appearance in node order.
        let mut relabel = vec![usize::MAX; n];
        let mut next = 0;
        for slot in comm.iter_mut() {
            if relabel[*slot] == usize::MAX {
                relabel[*slot] = next;
                next += 1;
            }
            *slot = relabel[*slot];
        }
        (comm, improved)
    }

    /// Collapses communities into single nodes, preserving total weight.
    fn aggregate(&self, comm: &[usize], count: usize) -> LevelGraph {
        let mut self_w = vec![0.0f64; count];
        let mut between: Vec<std::collections::BTreeMap<usize, f64>> =
            vec![std::collections::BTreeMap::new(); count];
        for u in 0..self.len() {
            let cu = comm[u];
            self_w[cu] += self.self_w[u];
            for &(v, w) in &self.adj[u] {
                let cv = comm[v];
                if cu == cv {
                    self_w[cu] += w; // both directions visit this edge
                } else {
                    *between[cu].entry(cv).or_insert(0.0) += w;
                }
            }
        }
        let adj: Vec<Vec<(usize, f64)>> = between
            .into_iter()
            .map(|m| m.into_iter().collect())
            .collect();
        let k: Vec<f64> = (0..count)
            .map(|c| self_w[c] + adj[c].iter().map(|&(_, w)| w).sum::<f64>())
            .collect();
        LevelGraph {
            adj,
            self_w,
            k,
            m2: self.m2,
        }
    }
}

fn compact_labels(membership: &[usize]) -> Vec<u32> {
    let mut relabel = std::collections::BTreeMap::new();
    let mut out = Vec::with_capacity(membership.len());
    for &c in membership {
        let next = relabel.len() as u32;
        out.push(*relabel.entry(c).or_insert(next));
    }
    out
}

/// Groups the router partition, elects leaders, extends membership to
/// consumers and sources, and scores the partition.
fn assemble(
    g: &NetworkGraph,
    core: &RouterCore,
    membership: Vec<u32>,
    resolution: f64,
) -> Result<CommunityAssignment> {
    let count = distinct(&membership);
    let mut groups: Vec<Vec<NodeId>> = vec![Vec::new(); count];
    // Labels are compacted; nodes are id-sorted, so groups come out sorted
    // and ordering groups by first member is deterministic.
    let mut relabel = vec![u32::MAX; count];
    let mut next = 0u32;
    let mut router_comm = vec![u32::MAX; g.node_count()];
    for (i, &label) in membership.iter().enumerate() {
        let label = label as usize;
        if relabel[label] == u32::MAX {
            relabel[label] = next;
            next += 1;
        }
        let c = relabel[label];
        groups[c as usize].push(core.nodes[i]);
        router_comm[core.nodes[i].idx()] = c;
    }

    let leaders: Vec<NodeId> = groups
        .iter()
        .map(|members| select_leader(g, members))
        .collect::<Result<_>>()?;

    // Extend membership to the whole graph and fold attached endpoints
    // into their router's community listing.
    let mut full = vec![u32::MAX; g.node_count()];
    let mut communities = groups;
    for node in g.node_ids() {
        let c = match g.role(node) {
            NodeRole::Router => router_comm[node.idx()],
            _ => router_comm[g.attachment_router(node).idx()],
        };
        full[node.idx()] = c;
        if g.role(node) != NodeRole::Router {
            communities[c as usize].push(node);
        }
    }
    for members in &mut communities {
        members.sort();
    }

    let modularity = core_modularity(core, &membership);
    Ok(CommunityAssignment {
        membership: full,
        communities,
        leaders,
        modularity,
        resolution,
    })
}

/// Newman modularity (resolution 1) of the router-core partition. A core
/// with no links (single router) scores 0 by convention.
fn core_modularity(core: &RouterCore, membership: &[u32]) -> f64 {
    if core.edges == 0 {
        return 0.0;
    }
    let labels = membership.iter().copied().max().unwrap_or(0) as usize + 1;
    let mut internal = vec![0.0f64; labels];
    let mut degree = vec![0.0f64; labels];
    for u in 0..core.nodes.len() {
        let cu = membership[u] as usize;
        degree[cu] += core.adj[u].len() as f64;
        for &v in &core.adj[u] {
            if u < v && membership[v] as usize == cu {
                internal[cu] += 1.0;
            }
        }
    }
    let m = core.edges as f64;
    (0..labels)
        .map(|c| internal[c] / m - (degree[c] / (2.0 * m)).powi(2))
        .sum()
}

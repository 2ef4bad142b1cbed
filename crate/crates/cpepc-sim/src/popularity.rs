//! Per-leader popularity accounting.
//!
//! A community leader keeps one table entry per content name it has seen:
//! a per-period local request count `L`, a merged network-wide count `G`,
//! and an exponentially weighted popularity `P`. At the end of every
//! exchange period the leaders swap their local counts, fold them into
//! `G`, and fade them into `P`:
//!
//! ```text
//! P <- lambda * P + (1 - lambda) * G
//! ```
//!
//! so a small `lambda` makes popularity track the latest period closely
//! while a large one remembers history. Decision inputs derived from the
//! table are the admission threshold `mean(P)` over current entries and
//! the relative popularity `P(name) / max(P)`.
//!
//! Entries whose popularity decays below `PRUNE_EPSILON` after an update
//! are dropped, which keeps steady-state tables proportional to the
//! recently requested catalog slice rather than the whole catalog.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::topology::NodeId;

/// Catalog rank of a content name; rank 0 is the head of the catalog.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct ContentId(pub u32);

impl ContentId {
    #[inline]
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ContentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "content-{}", self.0)
    }
}

/// Popularity below which an idle entry is dropped at period end.
pub const PRUNE_EPSILON: f64 = 1e-6;

/// One tracked content name.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PTableEntry {
    /// Requests seen by this table's owner in the current period.
    pub local_count: u64,
    /// Summed request count across all tables after the last merge.
    pub global_count: u64,
    /// Exponentially weighted popularity over past periods.
    pub popularity: f64,
}

impl PTableEntry {
    fn new() -> Self {
        PTableEntry {
            local_count: 0,
            global_count: 0,
            popularity: 0.0,
        }
    }

    /// Folds the merged period count into the running popularity
    /// (`P <- lambda * P + (1 - lambda) * G`) and resets both period
    /// counters. `lambda` must lie in `[0, 1]`.
    pub fn update_popularity(&mut self, lambda: f64) {
        debug_assert!((0.0..=1.0).contains(&lambda), "lambda {lambda} outside [0,1]");
        self.popularity = lambda * self.popularity + (1.0 - lambda) * self.global_count as f64;
        self.local_count = 0;
        self.global_count = 0;
    }
}

/// Popularity table owned by one node (a community leader, or a single
/// router running the strategy locally).
#[derive(Debug, Clone, PartialEq)]
pub struct PTable {
    owner: NodeId,
    period: u64,
    entries: BTreeMap<ContentId, PTableEntry>,
    /// Exact running aggregates; popularity values change only inside
    /// `finish_period`, which recomputes both, and new entries carry
    /// popularity 0, so these never drift.
    sum_p: f64,
    max_p: f64,
}

impl PTable {
    pub fn new(owner: NodeId) -> Self {
        PTable {
            owner,
            period: 0,
            entries: BTreeMap::new(),
            sum_p: 0.0,
            max_p: 0.0,
        }
    }

    #[inline]
    pub fn owner(&self) -> NodeId {
        self.owner
    }

    /// Completed exchange periods.
    #[inline]
    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, name: ContentId) -> Option<&PTableEntry> {
        self.entries.get(&name)
    }

    pub fn entries(&self) -> impl Iterator<Item = (ContentId, &PTableEntry)> {
        self.entries.iter().map(|(&k, v)| (k, v))
    }

    /// Counts one request for `name`, creating the entry on first sight.
    pub fn record_request(&mut self, name: ContentId) {
        self.entries.entry(name).or_insert_with(PTableEntry::new).local_count += 1;
    }

    /// Local counts of the current period (names actually seen), in the
    /// shape the periodic exchange ships between leaders.
    pub fn local_snapshot(&self) -> BTreeMap<ContentId, u64> {
        self.entries
            .iter()
            .filter(|(_, e)| e.local_count > 0)
            .map(|(&k, e)| (k, e.local_count))
            .collect()
    }

    /// Folds remote per-period counts into `G`: for every name appearing
    /// locally or remotely, `G = local L + sum of remote L`. Names first
    /// seen remotely get fresh entries with `L = 0`.
    pub fn merge_remote(&mut self, remotes: &[&BTreeMap<ContentId, u64>]) {
        // Materialize remote-only names first so a single uniform pass can
        // compute G over the union.
        for remote in remotes {
            for &name in remote.keys() {
                self.entries.entry(name).or_insert_with(PTableEntry::new);
            }
        }
        for (name, entry) in self.entries.iter_mut() {
            let remote: u64 = remotes.iter().filter_map(|r| r.get(name)).sum();
            entry.global_count = entry.local_count + remote;
        }
    }

    /// Applies the popularity fade to every entry, drops entries whose
    /// popularity fell below [`PRUNE_EPSILON`], refreshes the cached
    /// aggregates, and advances the period counter.
    pub fn finish_period(&mut self, lambda: f64) {
        for entry in self.entries.values_mut() {
            entry.update_popularity(lambda);
        }
        self.entries.retain(|_, e| e.popularity >= PRUNE_EPSILON);
        self.sum_p = self.entries.values().map(|e| e.popularity).sum();
        self.max_p = self
            .entries
            .values()
            .map(|e| e.popularity)
            .fold(0.0, f64::max);
        self.period += 1;
    }

    /// Admission threshold: mean popularity over current entries
    /// (0 for an empty table).
    pub fn popularity_threshold(&self) -> f64 {
        if self.entries.is_empty() {
            0.0
        } else {
            self.sum_p / self.entries.len() as f64
        }
    }

    /// Popularity of `name`, 0 when untracked.
    pub fn popularity(&self, name: ContentId) -> f64 {
        self.entries.get(&name).map_or(0.0, |e| e.popularity)
    }

    /// Popularity of `name` relative to the most popular tracked name;
    /// 0 when `name` is untracked or nothing has positive popularity yet.
    pub fn relative_popularity(&self, name: ContentId) -> f64 {
        if self.max_p == 0.0 {
            return 0.0;
        }
        self.popularity(name) / self.max_p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn table() -> PTable {
        PTable::new(NodeId(0))
    }

    #[test]
    fn record_request_counts_and_creates() {
        let mut t = table();
        t.record_request(ContentId(7));
        t.record_request(ContentId(7));
        let e = t.entry(ContentId(7)).unwrap();
        assert_eq!(
            (e.local_count, e.global_count, e.popularity),
            (2, 0, 0.0)
        );

        t.record_request(ContentId(9));
        let e = t.entry(ContentId(9)).unwrap();
        assert_eq!((e.local_count, e.global_count), (1, 0));
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn local_count_sums_match_recorded_requests() {
        let mut t = table();
        let mut rng = StdRng::seed_from_u64(3);
        let mut issued = 0u64;
        for _ in 0..500 {
            t.record_request(ContentId(rng.gen_range(0..40)));
            issued += 1;
        }
        let total: u64 = t.entries().map(|(_, e)| e.local_count).sum();
        assert_eq!(total, issued);
    }

    #[test]
    fn merge_sums_local_and_remote_counts() {
        let mut t = table();
        for _ in 0..3 {
            t.record_request(ContentId(1));
        }
        let mut remote = BTreeMap::new();
        remote.insert(ContentId(1), 5u64);
        t.merge_remote(&[&remote]);
        let e = t.entry(ContentId(1)).unwrap();
        assert_eq!((e.local_count, e.global_count), (3, 8));

        // No remotes: G mirrors L.
        let mut t = table();
        t.record_request(ContentId(2));
        t.merge_remote(&[]);
        let e = t.entry(ContentId(2)).unwrap();
        assert_eq!((e.local_count, e.global_count), (1, 1));

        // Name only known remotely appears with L = 0.
        let mut t = table();
        let mut remote = BTreeMap::new();
        remote.insert(ContentId(4), 7u64);
        t.merge_remote(&[&remote]);
        let e = t.entry(ContentId(4)).unwrap();
        assert_eq!((e.local_count, e.global_count, e.popularity), (0, 7, 0.0));
    }

    #[test]
    fn merge_is_order_independent() {
        let mut snapshots: Vec<BTreeMap<ContentId, u64>> = Vec::new();
        let mut rng = StdRng::seed_from_u64(8);
        for _ in 0..4 {
            let mut snap = BTreeMap::new();
            for name in 0..10u32 {
                if rng.gen_bool(0.5) {
                    snap.insert(ContentId(name), rng.gen_range(1..20));
                }
            }
            snapshots.push(snap);
        }
        let build = |order: &[usize]| {
            let mut t = table();
            t.record_request(ContentId(0));
            let refs: Vec<&BTreeMap<ContentId, u64>> =
                order.iter().map(|&i| &snapshots[i]).collect();
            t.merge_remote(&refs);
            t
        };
        assert_eq!(build(&[0, 1, 2, 3]), build(&[3, 1, 0, 2]));
        assert_eq!(build(&[0, 1, 2, 3]), build(&[2, 3, 1, 0]));
    }

    #[test]
    fn update_popularity_fades_toward_global_count() {
        // Frozen arithmetic: 0.125 * 4 + 0.875 * 8 = 7.5.
        let mut e = PTableEntry {
            local_count: 3,
            global_count: 8,
            popularity: 4.0,
        };
        e.update_popularity(0.125);
        assert_eq!(e.popularity, 7.5);
        assert_eq!((e.local_count, e.global_count), (0, 0));

        // lambda = 1 keeps history; lambda = 0 copies the period count.
        let mut keep = PTableEntry {
            local_count: 0,
            global_count: 9,
            popularity: 2.0,
        };
        keep.update_popularity(1.0);
        assert_eq!(keep.popularity, 2.0);
        let mut copy = PTableEntry {
            local_count: 0,
            global_count: 9,
            popularity: 2.0,
        };
        copy.update_popularity(0.0);
        assert_eq!(copy.popularity, 9.0);
    }

    #[test]
    fn repeated_periods_converge_geometrically() {
        // Constant period count c: P after k periods is c * (1 - lambda^k),
        // which is exact in binary for lambda = 0.125 and c = 100.
        let mut t = table();
        let name = ContentId(0);
        for k in 1..=3u32 {
            for _ in 0..100 {
                t.record_request(name);
            }
            t.merge_remote(&[]);
            t.finish_period(0.125);
            let expect = 100.0 * (1.0 - 0.125f64.powi(k as i32));
            assert_eq!(t.popularity(name), expect, "period {k}");
        }
        assert_eq!(t.popularity(name), 99.8046875);
        assert_eq!(t.period(), 3);

        // Twenty idle-free periods land within 1e-9 of the fixed point.
        let mut t = table();
        for _ in 0..20 {
            for _ in 0..100 {
                t.record_request(name);
            }
            t.merge_remote(&[]);
            t.finish_period(0.125);
        }
        assert!((t.popularity(name) - 100.0).abs() < 1e-9);
    }

    #[test]
    fn idle_entries_decay_and_get_pruned() {
        let mut t = table();
        let name = ContentId(5);
        for _ in 0..8 {
            t.record_request(name);
        }
        t.merge_remote(&[]);
        t.finish_period(0.125);
        assert_eq!(t.popularity(name), 7.0); // 0.875 * 8

        // Idle periods multiply P by lambda; 7 * 0.125^7 ≈ 3.3e-6 stays,
        // one more period falls under the prune threshold and drops out.
        for _ in 0..7 {
            t.merge_remote(&[]);
            t.finish_period(0.125);
        }
        assert!(t.entry(name).is_some());
        assert!((t.popularity(name) - 7.0 * 0.125f64.powi(7)).abs() < 1e-18);
        t.merge_remote(&[]);
        t.finish_period(0.125);
        assert!(t.entry(name).is_none(), "entry should be pruned");
        assert!(t.is_empty());
    }

    #[test]
    fn threshold_is_mean_popularity() {
        let mut t = table();
        // Two names with period counts 2 and 4 and lambda = 0: P = G.
        for _ in 0..2 {
            t.record_request(ContentId(0));
        }
        for _ in 0..4 {
            t.record_request(ContentId(1));
        }
        t.merge_remote(&[]);
        t.finish_period(0.0);
        assert_eq!(t.popularity_threshold(), 3.0);

        // Empty table reports 0.
        assert_eq!(table().popularity_threshold(), 0.0);
    }

    #[test]
    fn threshold_lies_between_min_and_max() {
        let mut rng = StdRng::seed_from_u64(17);
        for _ in 0..20 {
            let mut t = table();
            for name in 0..rng.gen_range(1..30u32) {
                for _ in 0..rng.gen_range(1..50) {
                    t.record_request(ContentId(name));
                }
            }
            t.merge_remote(&[]);
            t.finish_period(0.125);
            let ps: Vec<f64> = t.entries().map(|(_, e)| e.popularity).collect();
            let (lo, hi) = (
                ps.iter().cloned().fold(f64::INFINITY, f64::min),
                ps.iter().cloned().fold(0.0, f64::max),
            );
            let mid = t.popularity_threshold();
            assert!(lo <= mid + 1e-12 && mid <= hi + 1e-12);
        }
    }

    #[test]
    fn relative_popularity_ratios() {
        let mut t = table();
        for _ in 0..2 {
            t.record_request(ContentId(0));
        }
        for _ in 0..8 {
            t.record_request(ContentId(1));
        }
        t.merge_remote(&[]);
        t.finish_period(0.0);
        assert_eq!(t.relative_popularity(ContentId(0)), 0.25);
        assert_eq!(t.relative_popularity(ContentId(1)), 1.0);
        // Untracked name, and the all-zero table, both report 0.
        assert_eq!(t.relative_popularity(ContentId(99)), 0.0);
        assert_eq!(table().relative_popularity(ContentId(0)), 0.0);
    }

    #[test]
    fn relative_popularity_is_scale_invariant() {
        // Tables whose counts differ by a constant factor rank identically.
        let build = |scale: u64| {
            let mut t = table();
            for (name, base) in [(0u32, 2u64), (1, 5), (2, 9)] {
                for _ in 0..base * scale {
                    t.record_request(ContentId(name));
                }
            }
            t.merge_remote(&[]);
            t.finish_period(0.0);
            t
        };
        let (small, large) = (build(1), build(7));
        for name in [0u32, 1, 2] {
            let a = small.relative_popularity(ContentId(name));
            let b = large.relative_popularity(ContentId(name));
            assert!((a - b).abs() < 1e-12, "name {name}: {a} vs {b}");
        }
    }

    #[test]
    fn merge_keeps_global_at_least_local() {
        let mut rng = StdRng::seed_from_u64(29);
        let mut t = table();
        for _ in 0..200 {
            t.record_request(ContentId(rng.gen_range(0..20)));
        }
        let mut remote = BTreeMap::new();
        for name in 0..30u32 {
            if rng.gen_bool(0.4) {
                remote.insert(ContentId(name), rng.gen_range(1..10));
            }
        }
        t.merge_remote(&[&remote]);
        for (_, e) in t.entries() {
            assert!(e.global_count >= e.local_count);
        }
    }

    #[test]
    fn snapshot_carries_only_requested_names() {
        let mut t = table();
        t.record_request(ContentId(3));
        t.merge_remote(&[]);
        t.finish_period(0.125); // leaves the entry with L = 0 but P > 0
        t.record_request(ContentId(6));
        let snap = t.local_snapshot();
        assert_eq!(snap.len(), 1);
        assert_eq!(snap.get(&ContentId(6)), Some(&1));
    }
}

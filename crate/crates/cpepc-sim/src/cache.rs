//! Router content stores, replacement policies, and occupancy tracking.
//!
//! A [`ContentStore`] holds up to `capacity` content names under one of
//! three replacement policies:
//!
//! * **LRU** — evicts the least recently used entry; lookups refresh
//!   recency, duplicate inserts do not.
//! * **Random** — evicts a uniformly chosen entry using the caller's
//!   seeded generator.
//! * **PLFU** (perfect LFU) — tracks an access counter per name for every
//!   lookup that reaches the store, *including misses*. A new name is
//!   admitted only when its counter strictly exceeds the smallest counter
//!   among cached entries, which then get evicted (ties evict the smallest
//!   name).
//!
//! The [`OccupancyTracker`] keeps an exponentially weighted moving average
//! of the occupied slot count, updated whenever a caching decision is
//! evaluated against the store; [`Thresholds`] splits the resulting
//! average into the three admission bands used by the decision policies.

use std::collections::BTreeMap;

use rand::rngs::StdRng;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::popularity::ContentId;

/// Which entry a full store sacrifices for a new one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReplacementPolicy {
    Lru,
    Random,
    Plfu,
}

impl std::fmt::Display for ReplacementPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ReplacementPolicy::Lru => "lru",
            ReplacementPolicy::Random => "random",
            ReplacementPolicy::Plfu => "plfu",
        })
    }
}

/// What an insertion attempt did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertOutcome {
    /// The name is now cached; `evicted` names the displaced entry, if any.
    Stored { evicted: Option<ContentId> },
    /// The name was already cached; nothing changed (recency included).
    AlreadyPresent,
    /// The store refused the name (zero capacity, or PLFU admission).
    Rejected,
}

impl InsertOutcome {
    /// True when the insert physically added the name.
    pub fn stored(&self) -> bool {
        matches!(self, InsertOutcome::Stored { .. })
    }
}

/// Fixed-capacity named-content cache.
#[derive(Debug, Clone)]
pub struct ContentStore {
    capacity: usize,
    policy: ReplacementPolicy,
    /// Cached names; for LRU the vector is recency-ordered with the
    /// least recently used entry at the front.
    entries: Vec<ContentId>,
    /// PLFU access counters over every name ever looked up here.
    counters: BTreeMap<ContentId, u64>,
}

impl ContentStore {
    pub fn new(capacity: usize, policy: ReplacementPolicy) -> Self {
        ContentStore {
            capacity,
            policy,
            entries: Vec::with_capacity(capacity),
            counters: BTreeMap::new(),
        }
    }

    #[inline]
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    #[inline]
    pub fn policy(&self) -> ReplacementPolicy {
        self.policy
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Cached names, in policy-internal order.
    pub fn entries(&self) -> &[ContentId] {
        &self.entries
    }

    /// Presence check with no side effects on recency or counters.
    pub fn contains(&self, name: ContentId) -> bool {
        self.entries.contains(&name)
    }

    /// PLFU access counter for `name` (0 when never looked up).
    pub fn access_count(&self, name: ContentId) -> u64 {
        self.counters.get(&name).copied().unwrap_or(0)
    }

    /// Queries the store for `name`, applying policy side effects: LRU
    /// refreshes recency on a hit; PLFU counts the access whether or not
    /// it hits.
    pub fn lookup(&mut self, name: ContentId) -> bool {
        if self.policy == ReplacementPolicy::Plfu {
            *self.counters.entry(name).or_insert(0) += 1;
        }
        match self.entries.iter().position(|&e| e == name) {
            None => false,
            Some(pos) => {
                if self.policy == ReplacementPolicy::Lru {
                    let entry = self.entries.remove(pos);
                    self.entries.push(entry);
                }
                true
            }
        }
    }

    /// Attempts to cache `name`. Duplicates are no-ops; a zero-capacity
    /// store rejects everything; a full store consults the replacement
    /// policy (PLFU may refuse the newcomer instead of evicting).
    pub fn insert(&mut self, name: ContentId, rng: &mut StdRng) -> InsertOutcome {
        if self.capacity == 0 {
            return InsertOutcome::Rejected;
        }
        if self.contains(name) {
            return InsertOutcome::AlreadyPresent;
        }
        if self.entries.len() < self.capacity {
            self.entries.push(name);
            return InsertOutcome::Stored { evicted: None };
        }
        let victim_pos = match self.policy {
            ReplacementPolicy::Lru => 0,
            ReplacementPolicy::Random => rng.gen_range(0..self.entries.len()),
            ReplacementPolicy::Plfu => {
                // Admission: the newcomer must strictly out-count the
                // least-counted cached entry; ties evict the smallest name.
                let (victim_pos, victim_count) = self
                    .entries
                    .iter()
                    .enumerate()
                    .map(|(i, &e)| (i, self.access_count(e)))
                    .min_by_key(|&(i, count)| (count, self.entries[i]))
                    .expect("store is full, hence nonempty");
                if self.access_count(name) <= victim_count {
                    return InsertOutcome::Rejected;
                }
                victim_pos
            }
        };
        let evicted = self.entries.remove(victim_pos);
        self.entries.push(name);
        InsertOutcome::Stored {
            evicted: Some(evicted),
        }
    }
}

/// Exponentially weighted moving average of store occupancy.
///
/// Updated on every caching-decision evaluation against the store:
/// `A <- (1 - omega) * A + omega * occupied`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OccupancyTracker {
    avg: f64,
    omega: f64,
}

impl OccupancyTracker {
    /// Starts from an empty store (average 0). `omega` in `[0, 1]` weighs
    /// the newest sample.
    pub fn new(omega: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&omega) {
            return Err(Error::Cache(format!("omega {omega} outside [0, 1]")));
        }
        Ok(OccupancyTracker {
            avg: 0.0,
            omega,
        })
    }

    /// Folds the current occupancy into the average and returns it.
    pub fn update(&mut self, occupied: usize) -> f64 {
        self.avg = (1.0 - self.omega) * self.avg + self.omega * occupied as f64;
        self.avg
    }

    #[inline]
    pub fn average(&self) -> f64 {
        self.avg
    }
}

/// Admission-band boundaries derived from the store capacity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub min_th: f64,
    pub max_th: f64,
}

/// `min_th = rho1 * capacity`, `max_th = rho2 * capacity`, requiring
/// `0 <= rho1 < rho2 <= 1` so the three bands are nonempty and ordered.
pub fn compute_thresholds(capacity: usize, rho1: f64, rho2: f64) -> Result<Thresholds> {
    if !(0.0..=1.0).contains(&rho1) || !(0.0..=1.0).contains(&rho2) || rho1 >= rho2 {
        return Err(Error::Cache(format!(
            "occupancy fractions must satisfy 0 <= rho1 < rho2 <= 1, got {rho1} and {rho2}"
        )));
    }
    Ok(Thresholds {
        min_th: rho1 * capacity as f64,
        max_th: rho2 * capacity as f64,
    })
}

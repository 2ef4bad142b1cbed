//! Caching-decision strategies evaluated on the content download path.
//!
//! Four strategies are provided:
//!
//! * [`lce_decide`] — cache everywhere (every on-path store that lacks the
//!   content takes a copy).
//! * [`prob_decide`] — cache with a fixed probability `p` per store.
//! * [`pepc_decide`] — occupancy- and popularity-aware admission evaluated
//!   independently per router against its own request statistics.
//! * [`cpepc_decide`] — the same three-band admission, but driven by the
//!   community leader's popularity table and guarded by a community-wide
//!   duplicate check so each community stores at most one copy.
//!
//! The popularity-aware strategies split the smoothed store occupancy `A`
//! into three bands using [`Thresholds`]:
//!
//! * `A < min_th` — plenty of space: always cache.
//! * `min_th <= A < max_th` — admission pressure grows with occupancy: the
//!   content's relative popularity must reach the adaptive probability
//!   [`RedState::probability`], which escalates with every consecutive
//!   decline (the `beta` counter) until an admission resets it.
//! * `A >= max_th` — nearly full: only content at least as popular as the
//!   table-wide mean is admitted.

use rand::rngs::StdRng;
use rand::Rng;

use crate::cache::Thresholds;
use crate::error::{Error, Result};
use crate::popularity::{ContentId, PTable};

/// Adaptive admission state kept per router store.
///
/// `beta` counts consecutive mid-band evaluations that declined to cache
/// since the last admission; it inflates the admission probability
/// denominator so sustained pressure admits only increasingly popular
/// content.
#[derive(Debug, Clone, PartialEq)]
pub struct RedState {
    thresholds: Thresholds,
    p_max: f64,
    beta: u32,
}

impl RedState {
    /// `p_max` in `[0, 1]` caps the base admission probability.
    pub fn new(thresholds: Thresholds, p_max: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_max) {
            return Err(Error::Policy(format!("p_max {p_max} outside [0, 1]")));
        }
        Ok(RedState {
            thresholds,
            p_max,
            beta: 0,
        })
    }

    #[inline]
    pub fn beta(&self) -> u32 {
        self.beta
    }

    #[inline]
    pub fn thresholds(&self) -> &Thresholds {
        &self.thresholds
    }

    /// Mid-band admission requirement `P2` for occupancy average `avg`.
    ///
    /// The base value `P1 = p_max * (avg - min_th) / (max_th - min_th)`
    /// ramps linearly across the band; `P2 = P1 / (1 - beta * P1)`
    /// escalates it with each consecutive decline, saturating at 1 once
    /// `beta * P1 >= 1`.
    pub fn probability(&self, avg: f64) -> f64 {
        let Thresholds { min_th, max_th } = self.thresholds;
        let p1 = (self.p_max * (avg - min_th) / (max_th - min_th)).clamp(0.0, self.p_max);
        let pressure = self.beta as f64 * p1;
        if pressure >= 1.0 {
            1.0
        } else {
            (p1 / (1.0 - pressure)).min(1.0)
        }
    }
}

/// One content name's standing in the popularity table governing a
/// decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopularityView {
    /// Smoothed popularity score `P` of the name.
    pub popularity: f64,
    /// `P / max P` over the table, in `[0, 1]`.
    pub relative_popularity: f64,
    /// Mean popularity over the table (the dynamic popular/unpopular cut).
    pub threshold: f64,
}

impl PopularityView {
    /// Snapshot of `name`'s standing in `table`.
    pub fn from_table(table: &PTable, name: ContentId) -> Self {
        PopularityView {
            popularity: table.popularity(name),
            relative_popularity: table.relative_popularity(name),
            threshold: table.popularity_threshold(),
        }
    }
}

/// Which rule produced a decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecisionReason {
    /// Occupancy below `min_th`: cache unconditionally.
    BelowMin,
    /// Occupancy in the adaptive band: relative popularity vs. `P2`.
    MidBand,
    /// Occupancy at or above `max_th`: popularity vs. the table mean.
    AboveMax,
    /// The content is already held (store or community); nothing to do.
    Duplicate,
    /// Unconditional admission (cache-everywhere strategy).
    Always,
    /// Fixed-probability draw.
    CoinFlip,
}

/// Outcome of one caching evaluation at one store.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CacheDecision {
    pub cache: bool,
    pub reason: DecisionReason,
    /// Admission requirement in force for mid-band evaluations, 0 elsewhere.
    pub probability: f64,
}

impl CacheDecision {
    fn no(reason: DecisionReason) -> Self {
        CacheDecision {
            cache: false,
            reason,
            probability: 0.0,
        }
    }

    fn yes(reason: DecisionReason) -> Self {
        CacheDecision {
            cache: true,
            reason,
            probability: 0.0,
        }
    }
}

/// Shared three-band evaluation for the popularity-aware strategies.
///
/// `duplicate` short-circuits the evaluation (the holder keeps its copy and
/// `beta` is untouched). Otherwise the band of `avg` picks the rule; an
/// admission in any band resets `beta`, a mid-band decline increments it,
/// and a high-band decline leaves it unchanged.
fn three_band_admission(
    red: &mut RedState,
    avg: f64,
    view: PopularityView,
    duplicate: bool,
) -> CacheDecision {
    if duplicate {
        return CacheDecision::no(DecisionReason::Duplicate);
    }
    if avg < red.thresholds.min_th {
        red.beta = 0;
        return CacheDecision::yes(DecisionReason::BelowMin);
    }
    if avg < red.thresholds.max_th {
        let p2 = red.probability(avg);
        let cache = view.relative_popularity >= p2;
        if cache {
            red.beta = 0;
        } else {
            red.beta += 1;
        }
        return CacheDecision {
            cache,
            reason: DecisionReason::MidBand,
            probability: p2,
        };
    }
    if view.popularity >= view.threshold {
        red.beta = 0;
        CacheDecision::yes(DecisionReason::AboveMax)
    } else {
        CacheDecision::no(DecisionReason::AboveMax)
    }
}

/// Community-coordinated admission: the leader's popularity view plus a
/// community-wide duplicate guard drive the decision for the candidate
/// router whose smoothed occupancy is `avg`.
pub fn cpepc_decide(
    red: &mut RedState,
    avg: f64,
    view: PopularityView,
    community_duplicate: bool,
) -> CacheDecision {
    three_band_admission(red, avg, view, community_duplicate)
}

/// Router-local admission: identical banding, but the view comes from the
/// router's own request table and no community duplicate check exists.
pub fn pepc_decide(red: &mut RedState, avg: f64, view: PopularityView) -> CacheDecision {
    three_band_admission(red, avg, view, false)
}

/// Cache everywhere: every store lacking the content takes a copy.
pub fn lce_decide() -> CacheDecision {
    CacheDecision::yes(DecisionReason::Always)
}

/// Cache with fixed probability `p` using the run's seeded generator.
pub fn prob_decide(p: f64, rng: &mut StdRng) -> Result<CacheDecision> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Policy(format!("caching probability {p} outside [0, 1]")));
    }
    let cache = rng.gen::<f64>() < p;
    Ok(CacheDecision {
        cache,
        reason: DecisionReason::CoinFlip,
        probability: p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn red(min_th: f64, max_th: f64, p_max: f64) -> RedState {
        RedState::new(Thresholds { min_th, max_th }, p_max).unwrap()
    }

    fn view(p: f64, ro: f64, delta: f64) -> PopularityView {
        PopularityView {
            popularity: p,
            relative_popularity: ro,
            threshold: delta,
        }
    }

    #[test]
    fn probability_frozen_points() {
        let state = red(20.0, 60.0, 1.0);
        // At the band floor the requirement vanishes.
        assert_eq!(state.probability(20.0), 0.0);
        // Midpoint of the band with beta 0: 1.0 * (40-20)/(60-20) = 0.5.
        assert_eq!(state.probability(40.0), 0.5);

        // Base value 0.4 (avg 36), escalated by consecutive declines:
        // beta 0 -> 0.4, beta 1 -> 0.4/0.6, beta 2 and 3 saturate at 1.
        let mut state = red(20.0, 60.0, 1.0);
        let low_popularity = view(0.0, 0.0, 1.0);
        let expected = [0.4, 0.4 / 0.6, 1.0, 1.0];
        for want in expected {
            assert!((state.probability(36.0) - want).abs() < 1e-12);
            let d = pepc_decide(&mut state, 36.0, low_popularity);
            assert!(!d.cache);
        }
        assert_eq!(state.beta(), 4);
    }

    #[test]
    fn probability_is_monotone_and_bounded() {
        for beta_steps in 0..6u32 {
            let mut prev_over_avg = 0.0;
            for tenths in 0..=80u32 {
                let avg = 20.0 + (tenths as f64) * 0.5;
                let mut state = red(20.0, 60.0, 1.0);
                // Drive beta up via declines at a fixed mid-band point.
                for _ in 0..beta_steps {
                    pepc_decide(&mut state, 30.0, view(0.0, 0.0, 1.0));
                }
                assert_eq!(state.beta(), beta_steps);
                let p = state.probability(avg.min(59.999));
                assert!((0.0..=1.0).contains(&p));
                assert!(p >= prev_over_avg - 1e-12, "not monotone in avg");
                prev_over_avg = p;

                // Monotone in beta at fixed avg.
                let mut escalated = state.clone();
                escalated.beta += 1;
                assert!(escalated.probability(avg.min(59.999)) >= p - 1e-12);
            }
        }
    }

    #[test]
    fn low_band_caches_regardless_of_popularity() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..50 {
            let mut state = red(20.0, 60.0, 1.0);
            // Arbitrary popularity standing must not matter below min_th.
            let v = view(
                rng.gen_range(0.0..10.0),
                rng.gen_range(0.0..1.0),
                rng.gen_range(0.0..10.0),
            );
            let d = pepc_decide(&mut state, rng.gen_range(0.0..20.0), v);
            assert!(d.cache);
            assert_eq!(d.reason, DecisionReason::BelowMin);
        }
    }

    #[test]
    fn low_band_resets_escalation() {
        let mut state = red(20.0, 60.0, 1.0);
        for _ in 0..5 {
            pepc_decide(&mut state, 40.0, view(0.0, 0.0, 1.0));
        }
        assert_eq!(state.beta(), 5);
        pepc_decide(&mut state, 10.0, view(0.0, 0.0, 1.0));
        assert_eq!(state.beta(), 0);
    }

    #[test]
    fn mid_band_compares_relative_popularity() {
        let mut state = red(20.0, 60.0, 1.0);
        // avg 40 -> requirement 0.5.
        let d = cpepc_decide(&mut state, 40.0, view(3.0, 0.9, 1.0), false);
        assert!(d.cache);
        assert_eq!(d.reason, DecisionReason::MidBand);
        assert_eq!(d.probability, 0.5);
        assert_eq!(state.beta(), 0);

        let d = cpepc_decide(&mut state, 40.0, view(1.0, 0.3, 1.0), false);
        assert!(!d.cache);
        assert_eq!(state.beta(), 1);
        let d = cpepc_decide(&mut state, 40.0, view(1.0, 0.3, 1.0), false);
        assert!(!d.cache);
        assert_eq!(state.beta(), 2);

        // A later admission clears the escalation.
        let d = cpepc_decide(&mut state, 40.0, view(3.0, 1.0, 1.0), false);
        assert!(d.cache);
        assert_eq!(state.beta(), 0);
    }

    #[test]
    fn escalation_tightens_admission() {
        let mut state = red(20.0, 60.0, 1.0);
        // avg 36 -> base requirement 0.4; RO 0.5 passes initially.
        assert!(cpepc_decide(&mut state, 36.0, view(1.0, 0.5, 2.0), false).cache);
        // Two declines saturate the requirement at 1.
        cpepc_decide(&mut state, 36.0, view(0.1, 0.01, 2.0), false);
        cpepc_decide(&mut state, 36.0, view(0.1, 0.01, 2.0), false);
        assert_eq!(state.probability(36.0), 1.0);
        assert!(!cpepc_decide(&mut state, 36.0, view(1.0, 0.99, 2.0), false).cache);
        assert!(cpepc_decide(&mut state, 36.0, view(1.0, 1.0, 2.0), false).cache);
    }

    #[test]
    fn high_band_requires_mean_popularity() {
        let mut state = red(20.0, 60.0, 1.0);
        state.beta = 3;
        let d = cpepc_decide(&mut state, 70.0, view(2.0, 0.4, 5.0), false);
        assert!(!d.cache);
        assert_eq!(d.reason, DecisionReason::AboveMax);
        // High-band declines leave the mid-band escalation alone.
        assert_eq!(state.beta(), 3);

        let d = cpepc_decide(&mut state, 70.0, view(7.0, 1.0, 5.0), false);
        assert!(d.cache);
        assert_eq!(state.beta(), 0);
    }

    #[test]
    fn duplicate_short_circuits() {
        let mut state = red(20.0, 60.0, 1.0);
        state.beta = 2;
        // Even in the always-cache band a duplicate is refused untouched.
        let d = cpepc_decide(&mut state, 5.0, view(9.0, 1.0, 1.0), true);
        assert!(!d.cache);
        assert_eq!(d.reason, DecisionReason::Duplicate);
        assert_eq!(state.beta(), 2);
    }

    #[test]
    fn empty_table_mid_band_declines() {
        // A router with no recorded requests sees zero popularity
        // everywhere; inside the band the requirement is positive, so
        // nothing is admitted.
        let mut state = red(20.0, 60.0, 1.0);
        let d = pepc_decide(&mut state, 40.0, view(0.0, 0.0, 0.0));
        assert!(!d.cache);
        assert_eq!(d.reason, DecisionReason::MidBand);
    }

    #[test]
    fn view_reads_table() {
        use crate::topology::NodeId;
        let mut table = PTable::new(NodeId(0));
        for _ in 0..4 {
            table.record_request(ContentId(1));
        }
        table.record_request(ContentId(2));
        table.merge_remote(&[]);
        table.finish_period(0.0); // popularity = current counts
        let v = PopularityView::from_table(&table, ContentId(2));
        assert_eq!(v.popularity, 1.0);
        assert_eq!(v.relative_popularity, 0.25);
        assert_eq!(v.threshold, 2.5);
        let missing = PopularityView::from_table(&table, ContentId(9));
        assert_eq!(missing.popularity, 0.0);
        assert_eq!(missing.relative_popularity, 0.0);
    }

    #[test]
    fn always_and_coin_flip_strategies() {
        assert!(lce_decide().cache);
        assert_eq!(lce_decide().reason, DecisionReason::Always);

        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..20 {
            assert!(prob_decide(1.0, &mut rng).unwrap().cache);
            assert!(!prob_decide(0.0, &mut rng).unwrap().cache);
        }
        assert!(prob_decide(1.2, &mut rng).is_err());
        assert!(prob_decide(-0.1, &mut rng).is_err());

        // Same seed, same draw sequence.
        let seq = |seed: u64| {
            let mut rng = StdRng::seed_from_u64(seed);
            (0..64)
                .map(|_| prob_decide(0.5, &mut rng).unwrap().cache)
                .collect::<Vec<_>>()
        };
        assert_eq!(seq(7), seq(7));
        assert!(seq(7).iter().any(|&c| c) && seq(7).iter().any(|&c| !c));
    }

    #[test]
    fn decisions_are_pure() {
        let base = red(20.0, 60.0, 1.0);
        for avg in [5.0, 30.0, 45.0, 70.0] {
            for dup in [false, true] {
                let v = view(2.0, 0.6, 1.5);
                let mut a = base.clone();
                let mut b = base.clone();
                assert_eq!(
                    cpepc_decide(&mut a, avg, v, dup),
                    cpepc_decide(&mut b, avg, v, dup)
                );
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn state_validation() {
        let t = Thresholds {
            min_th: 2.0,
            max_th: 6.0,
        };
        assert!(RedState::new(t, 1.0).is_ok());
        assert!(RedState::new(t, 0.0).is_ok());
        assert!(RedState::new(t, 1.5).is_err());
        assert!(RedState::new(t, -0.2).is_err());
    }
}

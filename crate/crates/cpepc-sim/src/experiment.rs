//! Parameter sweeps over simulation runs: cross-product plans, repeated
//! seeded executions, 95% confidence intervals, and CSV/JSON result tables.
//!
//! An [`ExperimentPlan`] wraps a base [`RunConfig`] with lists of values to
//! sweep. Every sweep point is executed `repetitions` times (repetition `r`
//! uses seed `seed_base + r`) and aggregated into one [`ResultRow`] carrying
//! metric means and Student-t 95% half-widths. Rows come back in the
//! deterministic nested order of the sweep axes, so rerunning the same plan
//! reproduces the same table byte for byte.

use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::cache::ReplacementPolicy;
use crate::engine::{run_on, MetricsReport, RunConfig, Strategy};
use crate::error::{Error, Result};
use crate::topology::NetworkGraph;

/// Environment variable capping the number of worker threads used by
/// [`run_plan`]. Unset or unparsable values fall back to rayon's default.
pub const WORKERS_ENV: &str = "CPEPC_SIM_WORKERS";

fn default_repetitions() -> usize {
    10
}

fn default_seed_base() -> u64 {
    1
}

/// A sweep: a base configuration plus lists of parameter values to vary.
///
/// Every axis left empty is pinned to the corresponding value in `base`.
/// The cross-product of all axes defines the sweep points; each point runs
/// `repetitions` times with seeds `seed_base`, `seed_base + 1`, ….
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    /// Configuration shared by every run unless overridden by an axis.
    pub base: RunConfig,
    /// Caching strategies to compare.
    #[serde(default)]
    pub strategies: Vec<Strategy>,
    /// Replacement policies to compare.
    #[serde(default)]
    pub replacements: Vec<ReplacementPolicy>,
    /// Per-router store sizes as a percentage of the catalog.
    #[serde(default)]
    pub cache_fracs: Vec<f64>,
    /// Zipf skew values for the request popularity distribution.
    #[serde(default)]
    pub alphas: Vec<f64>,
    /// Catalog sizes (number of distinct content names).
    #[serde(default)]
    pub catalogs: Vec<usize>,
    /// Explicit community counts for the cooperative strategy.
    #[serde(default)]
    pub community_targets: Vec<usize>,
    /// Community scaling factors (used when no explicit target is swept).
    #[serde(default)]
    pub taus: Vec<f64>,
    /// Lower occupancy threshold fractions.
    #[serde(default)]
    pub rho1s: Vec<f64>,
    /// Upper occupancy threshold fractions.
    #[serde(default)]
    pub rho2s: Vec<f64>,
    /// Number of repeated runs per sweep point (>= 1).
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    /// Seed of the first repetition; repetition `r` runs with `seed_base + r`.
    #[serde(default = "default_seed_base")]
    pub seed_base: u64,
}

impl ExperimentPlan {
    /// A plan with no sweep axes: `base` runs as-is, `repetitions` times.
    pub fn single(base: RunConfig) -> Self {
        Self {
            base,
            strategies: Vec::new(),
            replacements: Vec::new(),
            cache_fracs: Vec::new(),
            alphas: Vec::new(),
            catalogs: Vec::new(),
            community_targets: Vec::new(),
            taus: Vec::new(),
            rho1s: Vec::new(),
            rho2s: Vec::new(),
            repetitions: default_repetitions(),
            seed_base: default_seed_base(),
        }
    }

    /// Reads a plan from a JSON file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let plan: Self = serde_json::from_str(&text)?;
        plan.validate()?;
        Ok(plan)
    }

    /// Checks plan-level invariants (per-point settings are validated when
    /// each point runs, so one bad value fails its row, not the whole plan).
    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::Experiment(
                "repetitions must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Expands the cross-product of all sweep axes into concrete run
    /// configurations, ordered by the nesting
    /// strategy > replacement > cache_frac > alpha > catalog >
    /// community_target > tau > rho1 > rho2.
    ///
    /// The per-point `seed` field is a placeholder; [`run_plan`] overrides it
    /// with `seed_base + r` for each repetition `r`.
    pub fn points(&self) -> Vec<RunConfig> {
        fn axis<T: Clone>(values: &[T], base: T) -> Vec<T> {
            if values.is_empty() {
                vec![base]
            } else {
                values.to_vec()
            }
        }

        let strategies = axis(&self.strategies, self.base.strategy.clone());
        let replacements = axis(&self.replacements, self.base.replacement);
        let cache_fracs = axis(&self.cache_fracs, self.base.cache_frac);
        let alphas = axis(&self.alphas, self.base.alpha);
        let catalogs = axis(&self.catalogs, self.base.catalog);
        let targets: Vec<Option<usize>> = if self.community_targets.is_empty() {
            vec![self.base.community_target]
        } else {
            self.community_targets.iter().map(|&n| Some(n)).collect()
        };
        let taus = axis(&self.taus, self.base.tau);
        let rho1s = axis(&self.rho1s, self.base.rho1);
        let rho2s = axis(&self.rho2s, self.base.rho2);

        let mut points = Vec::new();
        for strategy in &strategies {
            for &replacement in &replacements {
                for &cache_frac in &cache_fracs {
                    for &alpha in &alphas {
                        for &catalog in &catalogs {
                            for &community_target in &targets {
                                for &tau in &taus {
                                    for &rho1 in &rho1s {
                                        for &rho2 in &rho2s {
                                            let mut cfg = self.base.clone();
                                            cfg.strategy = strategy.clone();
                                            cfg.replacement = replacement;
                                            cfg.cache_frac = cache_frac;
                                            cfg.alpha = alpha;
                                            cfg.catalog = catalog;
                                            cfg.community_target = community_target;
                                            cfg.tau = tau;
                                            cfg.rho1 = rho1;
                                            cfg.rho2 = rho2;
                                            points.push(cfg);
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        points
    }
}

/// One sweep point aggregated over all its repetitions.
///
/// The serialized fields (and their order) are exactly the CSV columns, so
/// the JSON emission mirrors the CSV schema. Metric fields hold means across
/// repetitions; `_ci` fields hold 95% half-widths (0 when `reps` is 1). A
/// point whose runs failed carries NaN metrics; see [`ResultRow::is_failed`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultRow {
    /// Caching strategy, e.g. `cpepc` or `prob(0.5)`.
    pub strategy: String,
    /// Replacement policy: `lru`, `random`, or `plfu`.
    pub replacement: String,
    /// Store size as a percentage of the catalog.
    pub cache_frac: f64,
    /// Zipf skew of the request distribution.
    pub alpha: f64,
    /// Number of distinct content names.
    pub catalog: usize,
    /// Achieved community count (0 for strategies without communities).
    pub communities: usize,
    /// Mean cache hit ratio.
    pub hit_ratio: f64,
    /// 95% half-width of the hit ratio.
    pub hit_ratio_ci: f64,
    /// Mean per-request latency in milliseconds.
    pub latency_ms: f64,
    /// 95% half-width of the latency.
    pub latency_ci: f64,
    /// Mean hops from consumer's router to the serving node.
    pub hit_distance: f64,
    /// 95% half-width of the hit distance.
    pub hit_distance_ci: f64,
    /// Mean total message count (Interest + Data + Control link traversals).
    pub messages: f64,
    /// Seed of the first repetition.
    pub seed_base: u64,
    /// Number of repetitions aggregated into this row.
    pub reps: usize,
    /// Wall-clock seconds spent running this point (not serialized; varies
    /// between machines while the metric columns do not).
    #[serde(skip)]
    pub runtime_s: f64,
    /// First error message when the point failed (not serialized).
    #[serde(skip)]
    pub error: Option<String>,
}

impl ResultRow {
    /// True when the point's runs errored and the metric fields are NaN.
    pub fn is_failed(&self) -> bool {
        self.error.is_some()
    }
}

/// Output encoding for [`emit_results`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    /// Comma-separated table with the fixed header.
    Csv,
    /// Array of row objects with the same field names as the CSV columns.
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::Experiment(format!(
                "unknown output format '{other}' (expected csv or json)"
            ))),
        }
    }
}

/// The fixed CSV column set, identical across every plan and figure recipe.
pub const CSV_HEADER: &str = "strategy,replacement,cache_frac,alpha,catalog,communities,\
hit_ratio,hit_ratio_ci,latency_ms,latency_ci,hit_distance,hit_distance_ci,messages,\
seed_base,reps";

/// Rounds to 6 significant digits (NaN and infinities pass through).
fn sig6(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().expect("scientific form round-trips")
}

/// Formats a metric with 6 significant digits; NaN marks a failed row.
fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        sig6(x).to_string()
    }
}

/// Renders rows as a CSV table with the pinned header. Errors on no rows.
pub fn results_to_csv(rows: &[ResultRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Experiment("no result rows to emit".into()));
    }
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            row.strategy,
            row.replacement,
            fmt_num(row.cache_frac),
            fmt_num(row.alpha),
            row.catalog,
            row.communities,
            fmt_num(row.hit_ratio),
            fmt_num(row.hit_ratio_ci),
            fmt_num(row.latency_ms),
            fmt_num(row.latency_ci),
            fmt_num(row.hit_distance),
            fmt_num(row.hit_distance_ci),
            fmt_num(row.messages),
            row.seed_base,
            row.reps,
        ));
    }
    Ok(out)
}

/// Renders rows as a JSON array whose objects carry exactly the CSV columns,
/// with numbers rounded to the same 6 significant digits. NaN metrics of
/// failed rows become `null`. Errors on no rows.
pub fn results_to_json(rows: &[ResultRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Experiment("no result rows to emit".into()));
    }
    let rounded: Vec<ResultRow> = rows
        .iter()
        .map(|row| {
            let mut r = row.clone();
            r.cache_frac = sig6(r.cache_frac);
            r.alpha = sig6(r.alpha);
            r.hit_ratio = sig6(r.hit_ratio);
            r.hit_ratio_ci = sig6(r.hit_ratio_ci);
            r.latency_ms = sig6(r.latency_ms);
            r.latency_ci = sig6(r.latency_ci);
            r.hit_distance = sig6(r.hit_distance);
            r.hit_distance_ci = sig6(r.hit_distance_ci);
            r.messages = sig6(r.messages);
            r
        })
        .collect();
    let mut out = serde_json::to_string_pretty(&rounded)?;
    out.push('\n');
    Ok(out)
}

/// Writes rows to `path` in the requested format.
pub fn emit_results(rows: &[ResultRow], format: OutputFormat, path: &Path) -> Result<()> {
    let text = match format {
        OutputFormat::Csv => results_to_csv(rows)?,
        OutputFormat::Json => results_to_json(rows)?,
    };
    fs::write(path, text)?;
    Ok(())
}

/// Sample mean and 95% confidence half-width (Student-t, n−1 degrees of
/// freedom). A single observation or an all-equal sample yields half-width 0,
/// and an all-equal sample returns its value as the mean exactly.
fn mean_ci(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    assert!(n > 0, "mean of an empty sample");
    let first = values[0];
    if values.iter().all(|&v| v == first) {
        return (first, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|&v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    if sd == 0.0 {
        return (mean, 0.0);
    }
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("valid t distribution")
        .inverse_cdf(0.975);
    (mean, t * sd / (n as f64).sqrt())
}

/// Collapses one sweep point's repetition reports into a row.
fn aggregate(cfg: &RunConfig, plan: &ExperimentPlan, reports: &[MetricsReport]) -> ResultRow {
    let pull = |f: fn(&MetricsReport) -> f64| -> Vec<f64> { reports.iter().map(f).collect() };
    let (hit_ratio, hit_ratio_ci) = mean_ci(&pull(|r| r.cache_hit_ratio));
    let (latency_ms, latency_ci) = mean_ci(&pull(|r| r.avg_latency_ms));
    let (hit_distance, hit_distance_ci) = mean_ci(&pull(|r| r.avg_hit_distance));
    let (messages, _) = mean_ci(&pull(|r| r.message_count as f64));
    ResultRow {
        strategy: cfg.strategy.to_string(),
        replacement: cfg.replacement.to_string(),
        cache_frac: cfg.cache_frac,
        alpha: cfg.alpha,
        catalog: cfg.catalog,
        communities: reports[0].achieved_communities,
        hit_ratio,
        hit_ratio_ci,
        latency_ms,
        latency_ci,
        hit_distance,
        hit_distance_ci,
        messages,
        seed_base: plan.seed_base,
        reps: reports.len(),
        runtime_s: 0.0,
        error: None,
    }
}

/// Row for a point whose runs failed: parameters are kept, metrics are NaN.
fn failed_row(cfg: &RunConfig, plan: &ExperimentPlan, error: String) -> ResultRow {
    ResultRow {
        strategy: cfg.strategy.to_string(),
        replacement: cfg.replacement.to_string(),
        cache_frac: cfg.cache_frac,
        alpha: cfg.alpha,
        catalog: cfg.catalog,
        communities: 0,
        hit_ratio: f64::NAN,
        hit_ratio_ci: f64::NAN,
        latency_ms: f64::NAN,
        latency_ci: f64::NAN,
        hit_distance: f64::NAN,
        hit_distance_ci: f64::NAN,
        messages: f64::NAN,
        seed_base: plan.seed_base,
        reps: plan.repetitions,
        runtime_s: 0.0,
        error: Some(error),
    }
}

/// Builds the thread pool for sweep execution, honoring [`WORKERS_ENV`].
fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var(WORKERS_ENV) {
        if let Ok(n) = value.parse::<usize>() {
            if n > 0 {
                builder = builder.num_threads(n);
            }
        }
    }
    builder
        .build()
        .map_err(|e| Error::Experiment(format!("could not build worker pool: {e}")))
}

/// Runs every sweep point of the plan, loading the topology from
/// `plan.base.topology`. See [`run_plan_on`].
pub fn run_plan(plan: &ExperimentPlan) -> Result<Vec<ResultRow>> {
    plan.validate()?;
    if plan.base.topology.as_os_str().is_empty() {
        return Err(Error::Experiment(
            "plan base config has no topology path".into(),
        ));
    }
    let graph = NetworkGraph::load(&plan.base.topology)?;
    run_plan_on(&graph, plan)
}

/// Runs every sweep point of the plan against an already-loaded topology.
///
/// Points × repetitions execute in parallel (cap the worker count with the
/// `CPEPC_SIM_WORKERS` environment variable); each run is internally
/// single-threaded and seeded, so the returned rows — ordered by the sweep
/// axes — are identical on every invocation. A repetition error marks its
/// whole point as a failed row (NaN metrics) without aborting the sweep.
pub fn run_plan_on(graph: &NetworkGraph, plan: &ExperimentPlan) -> Result<Vec<ResultRow>> {
    plan.validate()?;
    let points = plan.points();
    let jobs: Vec<(usize, u64)> = (0..points.len())
        .flat_map(|p| (0..plan.repetitions as u64).map(move |r| (p, r)))
        .collect();

    let pool = worker_pool()?;
    let started = Instant::now();
    let outcomes: Vec<(usize, Result<MetricsReport>)> = pool.install(|| {
        jobs.par_iter()
            .map(|&(p, r)| {
                let mut cfg = points[p].clone();
                cfg.seed = plan.seed_base + r;
                (p, run_on(graph, &cfg))
            })
            .collect()
    });
    let elapsed = started.elapsed().as_secs_f64();

    let mut rows = Vec::with_capacity(points.len());
    for (p, cfg) in points.iter().enumerate() {
        let mut reports = Vec::with_capacity(plan.repetitions);
        let mut failure: Option<String> = None;
        for (_, outcome) in outcomes.iter().filter(|(q, _)| *q == p) {
            match outcome {
                Ok(report) => reports.push(report.clone()),
                Err(e) => {
                    failure.get_or_insert_with(|| e.to_string());
                }
            }
        }
        let mut row = match failure {
            Some(message) => failed_row(cfg, plan, message),
            None => aggregate(cfg, plan, &reports),
        };
        row.runtime_s = elapsed / points.len() as f64;
        rows.push(row);
    }
    Ok(rows)
}

/// How large a figure reproduction should be.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepScale {
    /// Catalog, request, and warmup counts divided by 10: minutes, not hours.
    Desk,
    /// The full published setup: catalog 10^4, 10^5 requests, 5×10^4 warmup.
    Paper,
}

impl FromStr for SweepScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Self::Desk),
            "paper" => Ok(Self::Paper),
            other => Err(Error::Experiment(format!(
                "unknown scale '{other}' (expected desk or paper)"
            ))),
        }
    }
}

/// Names accepted by [`figure_plan`].
pub const FIGURE_NAMES: [&str; 7] =
    ["fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig13"];

/// All four strategies compared in the headline sweeps.
fn all_strategies() -> Vec<Strategy> {
    vec![
        Strategy::Cpepc,
        Strategy::Pepc,
        Strategy::Prob { p: 0.5 },
        Strategy::Lce,
    ]
}

/// Builds the sweep plan behind one of the published result figures.
///
/// - `fig5`/`fig6`/`fig7`: every strategy across store sizes 0.05%–0.25% of
///   the catalog (hit ratio, latency, and hit distance are all columns of the
///   same table, hence three names for one sweep).
/// - `fig8`: every strategy across Zipf skew 0.6–1.2.
/// - `fig9`: every strategy across catalog sizes with a fixed 10-slot store.
/// - `fig10`: the cooperative strategy across community counts 10–50.
/// - `fig13`: every strategy at the default operating point, for comparing
///   message overhead.
///
/// `scale` picks between the full published workload and a desk-sized one
/// (all counts divided by 10). Unknown names list the valid recipes.
pub fn figure_plan(name: &str, topology: &Path, scale: SweepScale) -> Result<ExperimentPlan> {
    let mut base = RunConfig {
        topology: topology.to_path_buf(),
        ..RunConfig::default()
    };
    if scale == SweepScale::Desk {
        base.catalog /= 10;
        base.requests /= 10;
        base.warmup /= 10;
    }
    let mut plan = ExperimentPlan::single(base);
    plan.strategies = all_strategies();

    match name {
        "fig5" | "fig6" | "fig7" => {
            plan.cache_fracs = vec![0.05, 0.1, 0.15, 0.2, 0.25];
        }
        "fig8" => {
            plan.alphas = vec![0.6, 0.8, 1.0, 1.2];
        }
        "fig9" => {
            plan.base.cache_slots = Some(10);
            plan.catalogs = match scale {
                SweepScale::Desk => vec![250, 500, 1_000, 2_000, 4_000],
                SweepScale::Paper => vec![2_500, 5_000, 10_000, 20_000, 40_000],
            };
        }
        "fig10" => {
            plan.strategies = vec![Strategy::Cpepc];
            plan.community_targets = vec![10, 20, 30, 40, 50];
        }
        "fig13" => {}
        other => {
            return Err(Error::Experiment(format!(
                "unknown figure '{other}'; valid recipes: {}",
                FIGURE_NAMES.join(", ")
            )));
        }
    }
    Ok(plan)
}

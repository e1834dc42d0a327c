//! End-to-end discovery and join runs, with JSON-serializable reports.

use std::collections::BTreeSet;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::candidates::generate_candidates;
use crate::config::{ConfigError, RunConfig};
use crate::coverage::{
    coverage_fraction, evaluate_coverage_sets, fraction_meets_support, greedy_cover_indices, sample_pairs, top_k_indices,
    CoverPick, CoverageRecord, NonCoveringCache,
};
use crate::io::{ingest, read_pairs, read_transformations, ColumnSelector, IoError};
use crate::joiner::{evaluate_join, transform_join, JoinMetrics, JoinResult};
use crate::row_match::find_candidate_pairs;
use crate::table::{pairs_from_ids, CandidatePair, ColumnTable, RowId};
use crate::transform::Transformation;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("cannot start worker pool: {0}")]
    Workers(String),
    #[error("no transformations to join with")]
    NoTransformations,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportEntry {
    pub transformation: String,
    pub coverage: f64,
    pub covered_pairs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverEntry {
    pub transformation: String,
    pub coverage: f64,
    pub covered_pairs: usize,
    /// Pairs first covered by this pick.
    pub new_pairs: usize,
}

/// Wall-clock milliseconds per stage.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct StageTimings {
    pub row_matching: f64,
    pub sampling: f64,
    pub generation: f64,
    pub coverage: f64,
    pub selection: f64,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscoverReport {
    pub source_rows: usize,
    pub target_rows: usize,
    /// `golden` or `ngram`.
    pub pair_source: &'static str,
    pub candidate_pairs: usize,
    pub pairs_used: usize,
    pub generated: u64,
    pub unique_transformations: usize,
    pub duplicate_count: u64,
    pub duplicate_fraction: f64,
    pub cache_attempted: u64,
    pub cache_skipped: u64,
    pub cache_hit_ratio: f64,
    pub supported_transformations: usize,
    pub top: Vec<ReportEntry>,
    pub cover: Vec<CoverEntry>,
    /// Fraction of used pairs covered by the union of `cover`.
    pub cover_coverage: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<StageTimings>,
}

impl DiscoverReport {
    pub fn cover_transformations(&self) -> Vec<Transformation> {
        self.cover
            .iter()
            .map(|c| c.transformation.parse().expect("report holds printed transformations"))
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Full results of a discovery run.
#[derive(Clone, Debug)]
pub struct Discovery {
    pub report: DiscoverReport,
    pub pairs: Vec<CandidatePair>,
    pub top: Vec<CoverageRecord>,
    pub cover: Vec<CoverPick>,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1000.0
}

/// Runs `f` on a pool with `workers` threads, or on the global pool for 0.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, PipelineError> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| PipelineError::Workers(e.to_string()))?;
    Ok(pool.install(f))
}

fn discover_inner(
    cfg: &RunConfig,
    src: &ColumnTable,
    tgt: &ColumnTable,
    golden: Option<&BTreeSet<(RowId, RowId)>>,
) -> Discovery {
    let start = Instant::now();
    let mut timings = StageTimings::default();

    let t = Instant::now();
    let (pair_source, candidates) = match golden {
        Some(g) => ("golden", pairs_from_ids(src, tgt, g.iter().copied())),
        None => ("ngram", find_candidate_pairs(src, tgt, cfg.n0, cfg.n_max)),
    };
    timings.row_matching = ms(t);

    let t = Instant::now();
    let pairs = match cfg.sample {
        Some(s) if s < candidates.len() => sample_pairs(&candidates, s, cfg.seed),
        _ => candidates.clone(),
    };
    timings.sampling = ms(t);

    let t = Instant::now();
    let pool = generate_candidates(&pairs, &cfg.generation());
    timings.generation = ms(t);

    let t = Instant::now();
    let mut cache = NonCoveringCache::new(pairs.len());
    let sets = evaluate_coverage_sets(&pool, &pairs, &mut cache);
    timings.coverage = ms(t);

    let t = Instant::now();
    let n = pairs.len();
    let all_ranks = pool.preference_ranks();
    let supported: Vec<usize> = (0..pool.len())
        .filter(|&i| fraction_meets_support(coverage_fraction(sets[i].len(), n), cfg.min_support))
        .collect();
    let rank: Vec<usize> = supported.iter().map(|&i| all_ranks[i]).collect();
    let covered_of = |j: usize| sets[supported[j]].as_slice();
    let record = |j: usize| CoverageRecord::new(pool.transformation(supported[j]), sets[supported[j]].clone(), n);
    let top: Vec<CoverageRecord> = if supported.is_empty() {
        Vec::new()
    } else {
        top_k_indices(supported.len(), covered_of, &rank, cfg.top_k)
            .into_iter()
            .map(record)
            .collect()
    };
    let cover: Vec<CoverPick> = greedy_cover_indices(supported.len(), covered_of, &rank, n)
        .into_iter()
        .map(|(j, marginal)| CoverPick {
            record: record(j),
            marginal,
        })
        .collect();
    timings.selection = ms(t);
    timings.total = ms(start);

    let covered: usize = cover.iter().map(|p| p.marginal.len()).sum();
    let entry = |r: &CoverageRecord| ReportEntry {
        transformation: r.transformation.to_string(),
        coverage: r.coverage_fraction,
        covered_pairs: r.covered.len(),
    };
    let report = DiscoverReport {
        source_rows: src.len(),
        target_rows: tgt.len(),
        pair_source,
        candidate_pairs: candidates.len(),
        pairs_used: pairs.len(),
        generated: pool.generated(),
        unique_transformations: pool.len(),
        duplicate_count: pool.duplicate_count(),
        duplicate_fraction: pool.duplicate_fraction(),
        cache_attempted: cache.attempted(),
        cache_skipped: cache.skipped(),
        cache_hit_ratio: cache.hit_ratio(),
        supported_transformations: supported.len(),
        top: top.iter().map(entry).collect(),
        cover: cover
            .iter()
            .map(|p| CoverEntry {
                transformation: p.record.transformation.to_string(),
                coverage: p.record.coverage_fraction,
                covered_pairs: p.record.covered.len(),
                new_pairs: p.marginal.len(),
            })
            .collect(),
        cover_coverage: if pairs.is_empty() {
            0.0
        } else {
            covered as f64 / pairs.len() as f64
        },
        timings_ms: cfg.timings.then_some(timings),
    };
    Discovery {
        report,
        pairs,
        top,
        cover,
    }
}

/// Discovery on in-memory tables. Golden pairs, when given, replace row
/// matching.
pub fn discover(
    cfg: &RunConfig,
    src: &ColumnTable,
    tgt: &ColumnTable,
    golden: Option<&BTreeSet<(RowId, RowId)>>,
) -> Result<Discovery, PipelineError> {
    cfg.validate()?;
    with_workers(cfg.workers, || discover_inner(cfg, src, tgt, golden))
}

/// Where to find a table column on disk.
#[derive(Clone, Debug)]
pub struct TableSpec<'a> {
    pub path: &'a Path,
    pub column: ColumnSelector,
}

pub fn load_tables(cfg: &RunConfig, src: &TableSpec, tgt: &TableSpec) -> Result<(ColumnTable, ColumnTable), PipelineError> {
    Ok((
        ingest(src.path, &src.column, cfg.normalize)?,
        ingest(tgt.path, &tgt.column, cfg.normalize)?,
    ))
}

pub fn run_discover(
    cfg: &RunConfig,
    src: &TableSpec,
    tgt: &TableSpec,
    golden: Option<&Path>,
) -> Result<Discovery, PipelineError> {
    cfg.validate()?;
    let (s, t) = load_tables(cfg, src, tgt)?;
    let golden = golden.map(read_pairs).transpose()?;
    discover(cfg, &s, &t, golden.as_ref())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JoinReport {
    pub transformations: Vec<String>,
    pub joined_pairs: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<JoinMetrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<f64>,
}

impl JoinReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn join(
    cfg: &RunConfig,
    src: &ColumnTable,
    tgt: &ColumnTable,
    ts: &[Transformation],
    golden: Option<&BTreeSet<(RowId, RowId)>>,
) -> Result<(JoinResult, JoinReport), PipelineError> {
    if ts.is_empty() {
        return Err(PipelineError::NoTransformations);
    }
    let start = Instant::now();
    let result = with_workers(cfg.workers, || transform_join(src, tgt, ts))?;
    let elapsed = ms(start);
    let report = JoinReport {
        transformations: ts.iter().map(|t| t.to_string()).collect(),
        joined_pairs: result.pairs.len(),
        metrics: golden.map(|g| evaluate_join(&result, g)),
        timings_ms: cfg.timings.then_some(elapsed),
    };
    Ok((result, report))
}

pub fn run_join(
    cfg: &RunConfig,
    src: &TableSpec,
    tgt: &TableSpec,
    transformations: &Path,
    golden: Option<&Path>,
) -> Result<(JoinResult, JoinReport), PipelineError> {
    cfg.validate()?;
    let ts = read_transformations(transformations)?;
    let (s, t) = load_tables(cfg, src, tgt)?;
    let golden = golden.map(read_pairs).transpose()?;
    join(cfg, &s, &t, &ts, golden.as_ref())
}

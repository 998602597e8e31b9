//! Benchmark harness: ranking metrics, ground truth, timing and footprint.

pub mod study;
pub mod synth;

use std::collections::HashSet;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::catalog::{ingest_directory, store_profiles, IngestOptions};
use crate::error::{Error, Result};
use crate::model::Regressor;
use crate::profiler::{compute_normalization_stats, profile_lake, ProfileSet};
use crate::search::{rank, QuerySpec, Ranking};

/// Label of a ground-truth pair: joined on meaning, or merely on values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JoinLabel {
    Semantic,
    Syntactic,
}

impl std::fmt::Display for JoinLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            JoinLabel::Semantic => write!(f, "semantic"),
            JoinLabel::Syntactic => write!(f, "syntactic"),
        }
    }
}

/// A column named by dataset and column name only.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ColumnKey {
    pub dataset: String,
    pub column: String,
}

impl ColumnKey {
    pub fn new(dataset: impl Into<String>, column: impl Into<String>) -> Self {
        ColumnKey {
            dataset: dataset.into(),
            column: column.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroundTruthEntry {
    pub query: ColumnKey,
    pub candidate: ColumnKey,
    pub label: JoinLabel,
}

/// Read a ground-truth CSV with columns
/// `query_dataset,query_column,candidate_dataset,candidate_column,label`.
pub fn read_ground_truth(path: &Path) -> Result<Vec<GroundTruthEntry>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::MalformedTruth {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::MalformedTruth {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let field = |i: usize| -> Result<String> {
            record
                .get(i)
                .map(|s| s.to_string())
                .ok_or_else(|| Error::MalformedTruth {
                    path: path.to_path_buf(),
                    message: format!("row {:?} has fewer than 5 fields", record.position()),
                })
        };
        let label = match field(4)?.as_str() {
            "semantic" => JoinLabel::Semantic,
            "syntactic" => JoinLabel::Syntactic,
            other => {
                return Err(Error::MalformedTruth {
                    path: path.to_path_buf(),
                    message: format!("unknown label `{other}`"),
                })
            }
        };
        let entry = GroundTruthEntry {
            query: ColumnKey::new(field(0)?, field(1)?),
            candidate: ColumnKey::new(field(2)?, field(3)?),
            label,
        };
        if entry.query == entry.candidate {
            return Err(Error::MalformedTruth {
                path: path.to_path_buf(),
                message: format!("query equals candidate: {:?}", entry.query),
            });
        }
        if !seen.insert((entry.query.clone(), entry.candidate.clone())) {
            return Err(Error::MalformedTruth {
                path: path.to_path_buf(),
                message: format!("duplicate pair: {:?} -> {:?}", entry.query, entry.candidate),
            });
        }
        entries.push(entry);
    }
    Ok(entries)
}

pub fn write_ground_truth(entries: &[GroundTruthEntry], path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::MalformedTruth {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    writer
        .write_record([
            "query_dataset",
            "query_column",
            "candidate_dataset",
            "candidate_column",
            "label",
        ])
        .and_then(|_| {
            entries.iter().try_for_each(|e| {
                writer.write_record([
                    e.query.dataset.as_str(),
                    e.query.column.as_str(),
                    e.candidate.dataset.as_str(),
                    e.candidate.column.as_str(),
                    &e.label.to_string(),
                ])
            })
        })
        .map_err(|e| Error::MalformedTruth {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    writer.flush().map_err(|e| Error::io(path, e))
}

/// Share of the first `k` ranking positions that are relevant:
/// |top-k ∩ truth| / min(k, ranking length). An empty ranking scores 0.
pub fn precision_at_k(ranking: &Ranking, relevant: &HashSet<ColumnKey>, k: usize) -> f64 {
    debug_assert!(k >= 1);
    if ranking.is_empty() || k == 0 {
        return 0.0;
    }
    let hits = ranking
        .entries
        .iter()
        .take(k)
        .filter(|e| {
            relevant.contains(&ColumnKey::new(
                e.candidate.dataset_id.clone(),
                e.candidate.column_name.clone(),
            ))
        })
        .count();
    hits as f64 / k.min(ranking.len()) as f64
}

/// Share of all relevant pairs retrieved within the first `k` positions.
/// Errors when the relevant set is empty.
pub fn recall_at_k(ranking: &Ranking, relevant: &HashSet<ColumnKey>, k: usize) -> Result<f64> {
    if relevant.is_empty() {
        return Err(Error::TooFew {
            what: "relevant ground-truth entries",
            need: 1,
            got: 0,
        });
    }
    let hits = ranking
        .entries
        .iter()
        .take(k)
        .filter(|e| {
            relevant.contains(&ColumnKey::new(
                e.candidate.dataset_id.clone(),
                e.candidate.column_name.clone(),
            ))
        })
        .count();
    Ok(hits as f64 / relevant.len() as f64)
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    pearson(&rx, &ry)
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &orig in &idx[i..=j] {
            ranks[orig] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        cov += (x - mx) * (y - my);
        vx += (x - mx).powi(2);
        vy += (y - my).powi(2);
    }
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    cov / (vx * vy).sqrt()
}

/// Full benchmark output: effectiveness, timing and footprint.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub ks: Vec<usize>,
    /// Mean precision at each k over evaluated queries.
    pub precision: Vec<f64>,
    /// Mean recall at each k over evaluated queries.
    pub recall: Vec<f64>,
    pub preparation_seconds: f64,
    pub query_seconds_mean: f64,
    pub query_seconds_max: f64,
    pub profile_bytes: u64,
    pub lake_bytes: u64,
    pub profile_ratio: f64,
    pub queries_evaluated: usize,
    pub queries_skipped: usize,
    /// True when query scoring ran multithreaded; timings are then not
    /// comparable with sequential runs.
    pub parallel: bool,
}

impl EvalReport {
    /// Aligned-column text rendering.
    pub fn table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:>6} {:>12} {:>12}\n",
            "k", "precision", "recall"
        ));
        for (i, k) in self.ks.iter().enumerate() {
            out.push_str(&format!(
                "{:>6} {:>12.4} {:>12.4}\n",
                k, self.precision[i], self.recall[i]
            ));
        }
        out.push_str(&format!(
            "\npreparation   {:>10.3} s\nquery mean    {:>10.4} s\nquery max     {:>10.4} s\n",
            self.preparation_seconds, self.query_seconds_mean, self.query_seconds_max
        ));
        out.push_str(&format!(
            "profiles      {:>10} B ({:.3}% of {} B lake)\nqueries       {:>10} evaluated, {} skipped{}\n",
            self.profile_bytes,
            100.0 * self.profile_ratio,
            self.lake_bytes,
            self.queries_evaluated,
            self.queries_skipped,
            if self.parallel { " [parallel]" } else { "" },
        ));
        out
    }

    /// `k,precision,recall` rows for plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,precision,recall\n");
        for (i, k) in self.ks.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", k, self.precision[i], self.recall[i]));
        }
        out
    }
}

fn median3(mut xs: [f64; 3]) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[1]
}

fn dir_size(dir: &Path) -> Result<u64> {
    let mut total = 0;
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        if entry.path().is_file() {
            total += entry.metadata().map_err(|e| Error::io(entry.path(), e))?.len();
        }
    }
    Ok(total)
}

/// Run the full benchmark on a lake: profile it (preparation, median of three
/// runs), answer one ranking query per distinct ground-truth query column,
/// and aggregate precision/recall at k = 1..=k_max together with timing and
/// footprint numbers. Queries without a usable profile are skipped with a
/// warning.
pub fn run_benchmark(
    lake_dir: &Path,
    truth: &[GroundTruthEntry],
    model: &Regressor,
    k_max: usize,
    parallel: bool,
) -> Result<EvalReport> {
    let profile_dir = tempfile::Builder::new()
        .prefix("lakescout-profiles")
        .tempdir()
        .map_err(|e| Error::io(lake_dir, e))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(if parallel { 0 } else { 1 })
        .build()
        .expect("thread pool");

    // Preparation: ingest + profile + normalization stats, median of 3.
    let mut prep_times = [0.0f64; 3];
    let mut prepared = None;
    for t in prep_times.iter_mut() {
        let start = Instant::now();
        let (catalog, profiles, stats) = pool.install(|| -> Result<_> {
            let catalog = ingest_directory(lake_dir, IngestOptions::default())?;
            let profiles = profile_lake(&catalog)?;
            let stats = compute_normalization_stats(
                &profiles.iter().map(|(_, p)| p.clone()).collect::<Vec<_>>(),
            )?;
            Ok((catalog, profiles, stats))
        })?;
        *t = start.elapsed().as_secs_f64();
        prepared = Some((catalog, profiles, stats));
    }
    let (catalog, profiles, stats) = prepared.expect("three preparation runs");
    store_profiles(&profiles, profile_dir.path())?;
    stats.save(&profile_dir.path().join("stats.json"))?;

    let lake_bytes: u64 = catalog
        .datasets()
        .iter()
        .map(|d| std::fs::metadata(&d.path).map(|m| m.len()).unwrap_or(0))
        .sum();
    let profile_bytes = dir_size(profile_dir.path())?;
    let set = ProfileSet::new(profiles, stats);

    // One query per distinct ground-truth query column, in first-seen order.
    let mut queries: Vec<ColumnKey> = Vec::new();
    for e in truth {
        if !queries.contains(&e.query) {
            queries.push(e.query.clone());
        }
    }

    let ks: Vec<usize> = (1..=k_max.max(1)).collect();
    let mut precision_sums = vec![0.0; ks.len()];
    let mut recall_sums = vec![0.0; ks.len()];
    let mut query_times: Vec<f64> = Vec::new();
    let mut evaluated = 0usize;
    let mut skipped = 0usize;

    for q in &queries {
        if set.find(&q.dataset, &q.column).is_none() {
            log::warn!("query {}.{} has no profile; skipped", q.dataset, q.column);
            skipped += 1;
            continue;
        }
        let relevant: HashSet<ColumnKey> = truth
            .iter()
            .filter(|e| e.query == *q && e.label == JoinLabel::Semantic)
            .map(|e| e.candidate.clone())
            .collect();
        if relevant.is_empty() {
            log::warn!(
                "query {}.{} has no semantic truth entries; skipped",
                q.dataset,
                q.column
            );
            skipped += 1;
            continue;
        }

        let spec = QuerySpec::new(q.dataset.clone(), q.column.clone(), k_max);
        let mut times = [0.0f64; 3];
        let mut ranking = Ranking::default();
        for t in times.iter_mut() {
            let start = Instant::now();
            ranking = pool.install(|| rank(&spec, &set, model))?;
            *t = start.elapsed().as_secs_f64();
        }
        query_times.push(median3(times));

        for (i, &k) in ks.iter().enumerate() {
            precision_sums[i] += precision_at_k(&ranking, &relevant, k);
            recall_sums[i] += recall_at_k(&ranking, &relevant, k)?;
        }
        evaluated += 1;
    }

    let n = evaluated.max(1) as f64;
    Ok(EvalReport {
        ks,
        precision: precision_sums.iter().map(|s| s / n).collect(),
        recall: recall_sums.iter().map(|s| s / n).collect(),
        preparation_seconds: median3(prep_times),
        query_seconds_mean: if query_times.is_empty() {
            0.0
        } else {
            query_times.iter().sum::<f64>() / query_times.len() as f64
        },
        query_seconds_max: query_times.iter().copied().fold(0.0, f64::max),
        profile_bytes,
        lake_bytes,
        profile_ratio: if lake_bytes > 0 {
            profile_bytes as f64 / lake_bytes as f64
        } else {
            0.0
        },
        queries_evaluated: evaluated,
        queries_skipped: skipped,
        parallel,
    })
}

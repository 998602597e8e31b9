//! Discovery-by-attribute: rank candidate columns for a query column.
//!
//! [`rank`] scores every eligible candidate profile against the query profile
//! with the predictive model — a full scan, no index, and no raw data access.
//! [`rank_exact`] is the oracle mode: it scans raw values and scores with the
//! exact continuous quality instead. Both produce the same ranking contract:
//! scores nonincreasing, ties broken lexicographically by dataset then column
//! name, truncated to the requested length.

use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::{Catalog, ColumnKind, ColumnRef};
use crate::error::{Error, Result};
use crate::joinmetric::{continuous_quality, measure, QualityParams};
use crate::model::{distance_vector, Regressor};
use crate::profiler::ProfileSet;

#[derive(Debug, Clone)]
pub struct QuerySpec {
    pub dataset: String,
    pub column: String,
    /// Maximum ranking length.
    pub k: usize,
    /// Only rank textual candidates.
    pub textual_only: bool,
    /// Drop candidates from the query's own dataset.
    pub exclude_same_dataset: bool,
}

impl QuerySpec {
    pub fn new(dataset: impl Into<String>, column: impl Into<String>, k: usize) -> Self {
        QuerySpec {
            dataset: dataset.into(),
            column: column.into(),
            k,
            textual_only: true,
            exclude_same_dataset: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedJoin {
    pub candidate: ColumnRef,
    pub score: f64,
}

/// A ranking: scores nonincreasing, ties lexicographic, length at most `k`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Ranking {
    pub entries: Vec<RankedJoin>,
}

#[derive(Serialize)]
struct RankingRow<'a> {
    rank: usize,
    dataset: &'a str,
    column: &'a str,
    score: f64,
}

impl Ranking {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Candidate keys of the top `k` entries.
    pub fn top_k(&self, k: usize) -> Vec<(String, String)> {
        self.entries
            .iter()
            .take(k)
            .map(|e| {
                (
                    e.candidate.dataset_id.clone(),
                    e.candidate.column_name.clone(),
                )
            })
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<RankingRow> = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| RankingRow {
                rank: i + 1,
                dataset: &e.candidate.dataset_id,
                column: &e.candidate.column_name,
                score: e.score,
            })
            .collect();
        serde_json::to_value(rows).expect("ranking serialization")
    }
}

fn finish_ranking(mut scored: Vec<RankedJoin>, k: usize) -> Ranking {
    scored.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.candidate.dataset_id.cmp(&b.candidate.dataset_id))
            .then_with(|| a.candidate.column_name.cmp(&b.candidate.column_name))
    });
    scored.truncate(k);
    Ranking { entries: scored }
}

fn is_candidate(spec: &QuerySpec, col: &ColumnRef) -> bool {
    if col.dataset_id == spec.dataset && col.column_name == spec.column {
        return false;
    }
    if spec.exclude_same_dataset && col.dataset_id == spec.dataset {
        return false;
    }
    if spec.textual_only && col.kind != ColumnKind::Textual {
        return false;
    }
    true
}

fn require_k(spec: &QuerySpec) -> Result<()> {
    if spec.k < 1 {
        return Err(Error::Domain {
            what: "k",
            value: spec.k as f64,
        });
    }
    Ok(())
}

/// Rank candidates by predicted join quality. Cost is one distance vector
/// and one model inference per candidate profile.
pub fn rank(spec: &QuerySpec, profiles: &ProfileSet, model: &Regressor) -> Result<Ranking> {
    require_k(spec)?;
    let query = profiles
        .find(&spec.dataset, &spec.column)
        .ok_or_else(|| Error::ColumnNotFound {
            dataset: spec.dataset.clone(),
            column: spec.column.clone(),
        })?;

    let scored: Vec<RankedJoin> = profiles
        .entries()
        .par_iter()
        .filter(|e| is_candidate(spec, &e.column))
        .map(|e| {
            let v = distance_vector(&query.normalized, &e.normalized);
            RankedJoin {
                candidate: e.column.clone(),
                score: model.predict(&v),
            }
        })
        .collect();
    Ok(finish_ranking(scored, spec.k))
}

/// Rank candidates by the exact continuous quality, scanning raw values.
pub fn rank_exact(spec: &QuerySpec, catalog: &Catalog, params: &QualityParams) -> Result<Ranking> {
    require_k(spec)?;
    let query_col = catalog.column(&spec.dataset, &spec.column)?.clone();
    let query_values = catalog.read_column(&query_col)?;

    let per_dataset: Vec<Result<Vec<RankedJoin>>> = catalog
        .datasets()
        .par_iter()
        .map(|ds| {
            if spec.exclude_same_dataset && ds.id == spec.dataset {
                return Ok(Vec::new());
            }
            let mut out = Vec::new();
            for (col, values) in catalog.read_dataset(&ds.id)? {
                if !is_candidate(spec, &col) {
                    continue;
                }
                let m = measure(&query_values, &values)?;
                out.push(RankedJoin {
                    candidate: col,
                    score: continuous_quality(m.j, m.k, params)?,
                });
            }
            Ok(out)
        })
        .collect();

    let mut scored = Vec::new();
    for r in per_dataset {
        scored.extend(r?);
    }
    Ok(finish_ranking(scored, spec.k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{ingest_directory, IngestOptions};
    use crate::model::SamplingConfig;
    use crate::profiler::{compute_normalization_stats, profile_lake};

    fn lake(files: &[(&str, String)]) -> (tempfile::TempDir, Catalog, ProfileSet) {
        let dir = tempfile::tempdir().unwrap();
        for (name, content) in files {
            std::fs::write(dir.path().join(name), content).unwrap();
        }
        let catalog = ingest_directory(dir.path(), IngestOptions::default()).unwrap();
        let profiles = profile_lake(&catalog).unwrap();
        let stats = compute_normalization_stats(
            &profiles.iter().map(|(_, p)| p.clone()).collect::<Vec<_>>(),
        )
        .unwrap();
        let set = ProfileSet::new(profiles, stats);
        (dir, catalog, set)
    }

    fn column_of(values: &[String]) -> String {
        let mut s = "c\n".to_string();
        for v in values {
            s.push_str(v);
            s.push('\n');
        }
        s
    }

    fn trained_model(catalog: &Catalog, set: &ProfileSet) -> Regressor {
        let pairs = crate::model::make_training_set(
            catalog,
            set,
            &SamplingConfig {
                max_pairs: 400,
                ..SamplingConfig::default()
            },
        )
        .unwrap();
        // Duplicate the sample if the lake is too small for the floor.
        let mut all = pairs.clone();
        while all.len() < 100 {
            all.extend(pairs.iter().cloned());
        }
        crate::model::train(&all, &Default::default()).unwrap()
    }

    fn family(stem: &str, lo: usize, n: usize) -> Vec<String> {
        (lo..lo + n).map(|i| format!("{stem} member{i:05}")).collect()
    }

    #[test]
    fn duplicate_column_ranks_first() {
        let q = family("oak", 0, 80);
        let files = vec![
            ("query.csv".to_string(), column_of(&q)),
            ("dup.csv".to_string(), column_of(&q)),
            ("partial.csv".to_string(), column_of(&family("oak", 40, 80))),
            ("other.csv".to_string(), column_of(&family("elm", 0, 80))),
            ("far.csv".to_string(), column_of(&family("yew", 500, 30))),
        ];
        let named: Vec<(&str, String)> =
            files.iter().map(|(n, c)| (n.as_str(), c.clone())).collect();
        let (_dir, catalog, set) = lake(&named);

        let spec = QuerySpec::new("query", "c", 10);
        let exact = rank_exact(&spec, &catalog, &QualityParams::default()).unwrap();
        assert_eq!(exact.entries[0].candidate.dataset_id, "dup");
        let top = continuous_quality(0.5, 1.0, &QualityParams::default()).unwrap();
        assert!((exact.entries[0].score - top).abs() < 1e-12);

        let model = trained_model(&catalog, &set);
        let predicted = rank(&spec, &set, &model).unwrap();
        assert_eq!(predicted.entries[0].candidate.dataset_id, "dup");
    }

    #[test]
    fn k_larger_than_candidates_returns_all_sorted() {
        let files = vec![
            ("a.csv".to_string(), column_of(&family("ash", 0, 30))),
            ("b.csv".to_string(), column_of(&family("ash", 10, 30))),
            ("c.csv".to_string(), column_of(&family("fir", 0, 30))),
        ];
        let named: Vec<(&str, String)> =
            files.iter().map(|(n, c)| (n.as_str(), c.clone())).collect();
        let (_dir, catalog, _set) = lake(&named);
        let spec = QuerySpec::new("a", "c", 50);
        let r = rank_exact(&spec, &catalog, &QualityParams::default()).unwrap();
        assert_eq!(r.len(), 2);
        for w in r.entries.windows(2) {
            assert!(w[0].score >= w[1].score);
        }
    }

    #[test]
    fn ties_break_lexicographically() {
        // Two disjoint candidates score exactly zero; order must be by name.
        let files = vec![
            ("q.csv".to_string(), column_of(&family("oak", 0, 30))),
            ("zebra.csv".to_string(), column_of(&family("elm", 0, 30))),
            ("alpha.csv".to_string(), column_of(&family("ivy", 0, 30))),
        ];
        let named: Vec<(&str, String)> =
            files.iter().map(|(n, c)| (n.as_str(), c.clone())).collect();
        let (_dir, catalog, _set) = lake(&named);
        let spec = QuerySpec::new("q", "c", 10);
        let r = rank_exact(&spec, &catalog, &QualityParams::default()).unwrap();
        assert_eq!(r.entries[0].score, 0.0);
        assert_eq!(r.entries[0].candidate.dataset_id, "alpha");
        assert_eq!(r.entries[1].candidate.dataset_id, "zebra");
    }

    #[test]
    fn same_dataset_excluded_by_default() {
        let q = family("oak", 0, 40);
        let content = format!(
            "c1,c2\n{}",
            q.iter()
                .map(|v| format!("{v},{v}\n"))
                .collect::<String>()
        );
        let files = vec![
            ("a.csv".to_string(), content),
            ("b.csv".to_string(), column_of(&q)),
        ];
        let named: Vec<(&str, String)> =
            files.iter().map(|(n, c)| (n.as_str(), c.clone())).collect();
        let (_dir, catalog, _set) = lake(&named);

        let mut spec = QuerySpec::new("a", "c1", 10);
        let r = rank_exact(&spec, &catalog, &QualityParams::default()).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r.entries[0].candidate.dataset_id, "b");

        spec.exclude_same_dataset = false;
        let r = rank_exact(&spec, &catalog, &QualityParams::default()).unwrap();
        assert_eq!(r.len(), 2);
    }

    #[test]
    fn unknown_query_column_errors() {
        let files = vec![
            ("a.csv".to_string(), column_of(&family("oak", 0, 10))),
            ("b.csv".to_string(), column_of(&family("elm", 0, 10))),
        ];
        let named: Vec<(&str, String)> =
            files.iter().map(|(n, c)| (n.as_str(), c.clone())).collect();
        let (_dir, catalog, set) = lake(&named);
        let spec = QuerySpec::new("a", "nope", 5);
        assert!(matches!(
            rank_exact(&spec, &catalog, &QualityParams::default()),
            Err(Error::ColumnNotFound { .. })
        ));
        let model = Regressor {
            config: Default::default(),
            base: 0.0,
            trees: Vec::new(),
        };
        assert!(matches!(
            rank(&spec, &set, &model),
            Err(Error::ColumnNotFound { .. })
        ));
    }

    #[test]
    fn ranking_json_shape() {
        let r = Ranking {
            entries: vec![RankedJoin {
                candidate: ColumnRef {
                    dataset_id: "d".into(),
                    column_name: "c".into(),
                    position: 0,
                    kind: ColumnKind::Textual,
                },
                score: 0.75,
            }],
        };
        let v = r.to_json();
        assert_eq!(v[0]["rank"], 1);
        assert_eq!(v[0]["dataset"], "d");
        assert_eq!(v[0]["column"], "c");
        assert_eq!(v[0]["score"], 0.75);
    }
}

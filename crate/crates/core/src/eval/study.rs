//! Set-overlap metric comparison study.
//!
//! Ranks each query's candidates three ways: containment, plain Jaccard
//! (both over distinct-value sets) and multiset Jaccard, and reports the
//! mean precision at k of each metric against the semantic ground truth.
//! The study runs on raw values, not profiles.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::catalog::{Catalog, ColumnKind, ColumnValues};
use crate::error::Result;
use crate::eval::{precision_at_k, ColumnKey, GroundTruthEntry, JoinLabel};
use crate::joinmetric::multiset_jaccard;
use crate::search::{RankedJoin, Ranking};

/// Distinct-set intersection size.
fn distinct_intersection(a: &ColumnValues, b: &ColumnValues) -> u64 {
    let (small, large) = if a.distinct_count() <= b.distinct_count() {
        (a, b)
    } else {
        (b, a)
    };
    small
        .counts()
        .filter(|(v, _)| large.count_of(v) > 0)
        .count() as u64
}

/// |A ∩ B| / min(|A|, |B|) over distinct sets.
pub fn containment(a: &ColumnValues, b: &ColumnValues) -> f64 {
    let inter = distinct_intersection(a, b) as f64;
    inter / a.distinct_count().min(b.distinct_count()) as f64
}

/// |A ∩ B| / |A ∪ B| over distinct sets.
pub fn set_jaccard(a: &ColumnValues, b: &ColumnValues) -> f64 {
    let inter = distinct_intersection(a, b);
    let union = a.distinct_count() + b.distinct_count() - inter;
    inter as f64 / union as f64
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyReport {
    pub ks: Vec<usize>,
    /// Mean P@k per metric, aligned with `ks`.
    pub containment: Vec<f64>,
    pub jaccard: Vec<f64>,
    pub multiset_jaccard: Vec<f64>,
    pub queries: usize,
}

impl StudyReport {
    pub fn table(&self) -> String {
        let mut out = format!(
            "{:>6} {:>14} {:>14} {:>18}\n",
            "k", "containment", "jaccard", "multiset_jaccard"
        );
        for (i, k) in self.ks.iter().enumerate() {
            out.push_str(&format!(
                "{:>6} {:>14.4} {:>14.4} {:>18.4}\n",
                k, self.containment[i], self.jaccard[i], self.multiset_jaccard[i]
            ));
        }
        out
    }
}

/// Compare the three set-overlap metrics on the lake's raw values against
/// the semantic ground truth, at the given cutoffs.
pub fn metric_comparison_study(
    catalog: &Catalog,
    truth: &[GroundTruthEntry],
    ks: &[usize],
) -> Result<StudyReport> {
    // Load every textual column's values once.
    let mut values: HashMap<ColumnKey, ColumnValues> = HashMap::new();
    let mut order: Vec<ColumnKey> = Vec::new();
    for ds in catalog.datasets() {
        for (col, v) in catalog.read_dataset(&ds.id)? {
            if col.kind == ColumnKind::Textual {
                let key = ColumnKey::new(col.dataset_id.clone(), col.column_name.clone());
                order.push(key.clone());
                values.insert(key, v);
            }
        }
    }

    let mut queries: Vec<ColumnKey> = Vec::new();
    for e in truth {
        if !queries.contains(&e.query) {
            queries.push(e.query.clone());
        }
    }

    let mut report = StudyReport {
        ks: ks.to_vec(),
        containment: vec![0.0; ks.len()],
        jaccard: vec![0.0; ks.len()],
        multiset_jaccard: vec![0.0; ks.len()],
        queries: 0,
    };

    for q in &queries {
        let Some(q_values) = values.get(q) else {
            log::warn!("study query {}.{} not found; skipped", q.dataset, q.column);
            continue;
        };
        let relevant: HashSet<ColumnKey> = truth
            .iter()
            .filter(|e| e.query == *q && e.label == JoinLabel::Semantic)
            .map(|e| e.candidate.clone())
            .collect();
        if relevant.is_empty() {
            continue;
        }

        let mut scored: [Vec<RankedJoin>; 3] = [Vec::new(), Vec::new(), Vec::new()];
        for key in &order {
            if key == q || key.dataset == q.dataset {
                continue;
            }
            let cand = &values[key];
            let col = catalog.column(&key.dataset, &key.column)?.clone();
            let metrics = [
                containment(q_values, cand),
                set_jaccard(q_values, cand),
                multiset_jaccard(q_values, cand)?,
            ];
            for (list, score) in scored.iter_mut().zip(metrics) {
                list.push(RankedJoin {
                    candidate: col.clone(),
                    score,
                });
            }
        }

        let k_top = ks.iter().copied().max().unwrap_or(10);
        for (i, list) in scored.into_iter().enumerate() {
            let mut list = list;
            list.sort_by(|a, b| {
                b.score
                    .total_cmp(&a.score)
                    .then_with(|| a.candidate.dataset_id.cmp(&b.candidate.dataset_id))
                    .then_with(|| a.candidate.column_name.cmp(&b.candidate.column_name))
            });
            list.truncate(k_top);
            let ranking = Ranking { entries: list };
            for (ki, &k) in ks.iter().enumerate() {
                let p = precision_at_k(&ranking, &relevant, k);
                match i {
                    0 => report.containment[ki] += p,
                    1 => report.jaccard[ki] += p,
                    _ => report.multiset_jaccard[ki] += p,
                }
            }
        }
        report.queries += 1;
    }

    let n = report.queries.max(1) as f64;
    for v in report
        .containment
        .iter_mut()
        .chain(report.jaccard.iter_mut())
        .chain(report.multiset_jaccard.iter_mut())
    {
        *v /= n;
    }
    Ok(report)
}

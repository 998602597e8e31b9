//! Ensemble training and training-set construction.
//!
//! Training pairs are sampled from a lake: exact J and K are computed from
//! raw values for each sampled column pair and the continuous quality at the
//! configured strictness becomes the regression target. A floor on the share
//! of disjoint pairs (J = 0) keeps the regressor honest about non-joins.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::catalog::{Catalog, ColumnKind, ColumnRef, ColumnValues};
use crate::error::{Error, Result};
use crate::joinmetric::{
    cardinality_proportion, continuous_quality, multiset_jaccard, QualityParams,
};
use crate::model::{
    distance_vector, presort_features, Regressor, RegressorConfig, TreeBuilder, COMPONENT_NAMES,
};
use crate::profiler::{NormalizedProfile, ProfileSet};

/// One labeled training example: two normalized profiles and the exact
/// continuous quality of the underlying columns.
#[derive(Debug, Clone)]
pub struct TrainingPair {
    pub a_ref: ColumnRef,
    pub b_ref: ColumnRef,
    pub a: NormalizedProfile,
    pub b: NormalizedProfile,
    pub target: f64,
}

/// Controls for [`make_training_set`].
#[derive(Debug, Clone)]
pub struct SamplingConfig {
    /// Upper bound on the number of pairs returned.
    pub max_pairs: usize,
    /// Minimum share of disjoint (J = 0) pairs, when the lake has them.
    pub negative_fraction: f64,
    /// Strictness used for the exact-quality targets.
    pub strictness: f64,
    pub seed: u64,
    /// Restrict sampling to textual columns.
    pub textual_only: bool,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            max_pairs: 4000,
            negative_fraction: 0.3,
            strictness: 0.25,
            seed: 42,
            textual_only: true,
        }
    }
}

/// Fit the boosted ensemble: base prediction is the target mean, then each
/// round fits one depth-bounded tree to the residuals. Training is fully
/// deterministic for a given input order and configuration.
pub fn train(pairs: &[TrainingPair], cfg: &RegressorConfig) -> Result<Regressor> {
    cfg.validate()?;
    if pairs.len() < 100 {
        return Err(Error::TooFew {
            what: "training pairs",
            need: 100,
            got: pairs.len(),
        });
    }

    let mut rows = Vec::with_capacity(pairs.len());
    let mut targets = Vec::with_capacity(pairs.len());
    for pair in pairs {
        if !(0.0..=1.0).contains(&pair.target) {
            return Err(Error::Domain {
                what: "training target",
                value: pair.target,
            });
        }
        let v = distance_vector(&pair.a, &pair.b);
        for (i, c) in v.0.iter().enumerate() {
            if !c.is_finite() {
                return Err(Error::NonFiniteFeature {
                    feature: COMPONENT_NAMES[i],
                    a: pair.a_ref.qualified_name(),
                    b: pair.b_ref.qualified_name(),
                });
            }
        }
        rows.push(v.0);
        targets.push(pair.target);
    }

    let base = targets.iter().sum::<f64>() / targets.len() as f64;
    let sorted = presort_features(&rows);
    let mut predictions = vec![base; rows.len()];
    let mut residuals = vec![0.0; rows.len()];
    let mut trees = Vec::with_capacity(cfg.n_trees);
    for _ in 0..cfg.n_trees {
        for i in 0..rows.len() {
            residuals[i] = targets[i] - predictions[i];
        }
        let tree = TreeBuilder::new(
            &rows,
            &residuals,
            &sorted,
            cfg.max_tree_depth,
            cfg.min_samples_leaf,
        )
        .fit();
        for (i, row) in rows.iter().enumerate() {
            predictions[i] += cfg.learning_rate * tree.predict(row);
        }
        trees.push(tree);
    }

    Ok(Regressor {
        config: *cfg,
        base,
        trees,
    })
}

/// Columns eligible for pair sampling, with their values loaded once.
fn eligible_columns(
    catalog: &Catalog,
    profiles: &ProfileSet,
    textual_only: bool,
) -> Result<Vec<(ColumnRef, NormalizedProfile, ColumnValues)>> {
    let mut wanted: HashMap<&str, Vec<(&ColumnRef, &NormalizedProfile)>> = HashMap::new();
    for entry in profiles.entries() {
        if textual_only && entry.column.kind != ColumnKind::Textual {
            continue;
        }
        wanted
            .entry(entry.column.dataset_id.as_str())
            .or_default()
            .push((&entry.column, &entry.normalized));
    }

    let mut out = Vec::new();
    for ds in catalog.datasets() {
        let Some(cols) = wanted.get(ds.id.as_str()) else {
            continue;
        };
        let mut values: HashMap<String, ColumnValues> = catalog
            .read_dataset(&ds.id)?
            .into_iter()
            .map(|(c, v)| (c.column_name, v))
            .collect();
        for (col, norm) in cols {
            if let Some(v) = values.remove(&col.column_name) {
                out.push(((*col).clone(), (*norm).clone(), v));
            } else {
                log::warn!(
                    "profiled column {} has no readable values; skipped",
                    col.qualified_name()
                );
            }
        }
    }
    Ok(out)
}

/// Candidate pair order: a seeded shuffle of all pairs when enumerable,
/// otherwise seeded rejection sampling without replacement.
fn pair_order(n: usize, budget: usize, rng: &mut ChaCha8Rng) -> Vec<(u32, u32)> {
    const ENUMERATION_CAP: u64 = 2_000_000;
    let total = n as u64 * (n as u64 - 1) / 2;
    if total <= ENUMERATION_CAP {
        let mut pairs = Vec::with_capacity(total as usize);
        for i in 0..n as u32 {
            for j in (i + 1)..n as u32 {
                pairs.push((i, j));
            }
        }
        pairs.shuffle(rng);
        pairs
    } else {
        let mut seen = std::collections::HashSet::with_capacity(budget * 2);
        let mut pairs = Vec::with_capacity(budget);
        let mut attempts = 0u64;
        while pairs.len() < budget && attempts < budget as u64 * 64 {
            attempts += 1;
            let i = rng.random_range(0..n as u32);
            let j = rng.random_range(0..n as u32);
            if i == j {
                continue;
            }
            let key = (i.min(j), i.max(j));
            if seen.insert(key) {
                pairs.push(key);
            }
        }
        pairs
    }
}

/// Sample column pairs, label them with the exact continuous quality at the
/// configured strictness, and return a seed-shuffled training set holding at
/// least `negative_fraction` disjoint pairs whenever the lake provides them.
pub fn make_training_set(
    catalog: &Catalog,
    profiles: &ProfileSet,
    sampling: &SamplingConfig,
) -> Result<Vec<TrainingPair>> {
    let columns = eligible_columns(catalog, profiles, sampling.textual_only)?;
    if columns.len() < 2 {
        return Err(Error::TooFew {
            what: "textual columns",
            need: 2,
            got: columns.len(),
        });
    }
    let frac = sampling.negative_fraction;
    if !(0.0..=0.9).contains(&frac) {
        return Err(Error::Domain {
            what: "negative_fraction",
            value: frac,
        });
    }
    let params = QualityParams::with_strictness(sampling.strictness);
    params.validate()?;

    let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
    let order = pair_order(columns.len(), sampling.max_pairs * 32, &mut rng);

    let want_total = sampling.max_pairs.min(order.len());
    let pos_quota = (((1.0 - frac) * want_total as f64).ceil() as usize).min(want_total);
    let neg_quota = want_total - pos_quota;

    // Measure pairs in deterministic order, in parallel blocks, stopping
    // once both quotas can be met.
    let mut positives: Vec<(u32, u32, f64)> = Vec::new();
    let mut negatives: Vec<(u32, u32, f64)> = Vec::new();
    for block in order.chunks(8192) {
        if positives.len() >= want_total && negatives.len() >= want_total {
            break;
        }
        let measured: Vec<(u32, u32, f64)> = block
            .par_iter()
            .map(|&(i, j)| {
                let jv = multiset_jaccard(&columns[i as usize].2, &columns[j as usize].2)
                    .expect("eligible columns are non-empty");
                (i, j, jv)
            })
            .collect();
        for (i, j, jv) in measured {
            if jv > 0.0 {
                if positives.len() < want_total {
                    let k = cardinality_proportion(&columns[i as usize].2, &columns[j as usize].2)?;
                    let target = continuous_quality(jv, k, &params)?;
                    positives.push((i, j, target));
                }
            } else if negatives.len() < want_total {
                negatives.push((i, j, 0.0));
            }
        }
        if positives.len() >= pos_quota && negatives.len() >= neg_quota {
            break;
        }
    }

    // Selection holds the configured mixture. When joinable pairs are
    // scarce, negatives shrink with them rather than flooding the budget
    // with disjoint pairs (which would also cap any rank-correlation
    // fidelity measure through tied zero targets). Scarce negatives are
    // backfilled with positives.
    let mut n_pos = positives.len().min(pos_quota);
    let mixture_neg = if n_pos == 0 {
        want_total
    } else {
        (n_pos as f64 * frac / (1.0 - frac)).ceil() as usize
    };
    let n_neg = negatives.len().min(mixture_neg).min(want_total - n_pos);
    if n_neg < mixture_neg.min(want_total - n_pos) {
        n_pos = positives.len().min(want_total - n_neg);
    }

    let mut selected: Vec<(u32, u32, f64)> = Vec::with_capacity(n_pos + n_neg);
    selected.extend_from_slice(&positives[..n_pos]);
    selected.extend_from_slice(&negatives[..n_neg]);
    selected.shuffle(&mut rng);

    Ok(selected
        .into_iter()
        .map(|(i, j, target)| {
            let a = &columns[i as usize];
            let b = &columns[j as usize];
            TrainingPair {
                a_ref: a.0.clone(),
                b_ref: b.0.clone(),
                a: a.1.clone(),
                b: b.1.clone(),
                target,
            }
        })
        .collect())
}

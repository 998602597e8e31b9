//! Per-column meta-feature profiles and lake-wide normalization.
//!
//! A [`ColumnProfile`] condenses one column into a fixed set of statistics:
//! cardinalities, the shape of the value-frequency distribution (entropy,
//! octiles, extremes), character-length and word-count statistics, the ten
//! most frequent words and the lexicographically smallest word. Profiles are
//! O(1) in size regardless of row count.
//!
//! Features measured in raw magnitudes (counts, lengths) are Z-scored against
//! lake-wide [`NormalizationStats`] before profiles are compared; bounded
//! features (ratios, percentages) and word features are left as computed.

use std::collections::HashMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{Catalog, ColumnRef, ColumnValues};
use crate::error::{Error, Result};

/// Meta-features of one column. Field order matches the JSON profile schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnProfile {
    /// Distinct-value count.
    pub cardinality: f64,
    /// Distinct over total count, in [0, 1].
    pub uniqueness: f64,
    /// Shannon entropy (bits) of the value-frequency distribution.
    pub entropy: f64,
    pub min_frequency: f64,
    pub max_frequency: f64,
    /// The 1/8..7/8 quantiles (nearest rank) of the per-value frequency
    /// percentages, ascending, each in [0, 100].
    pub octiles: [f64; 7],
    pub max_perc_frequency: f64,
    pub sd_perc_frequency: f64,
    /// Ten most frequent words, lowercased; ties broken lexicographically.
    pub frequent_words: Vec<String>,
    pub longest_string: f64,
    pub shortest_string: f64,
    pub avg_string: f64,
    pub avg_words: f64,
    pub min_words: f64,
    pub max_words: f64,
    pub sd_words: f64,
    /// Lexicographically smallest word in the column; empty when the column
    /// contains no alphanumeric content.
    pub first_word: String,
}

/// Lowercased alphanumeric runs of a cell; everything else separates words.
pub fn tokenize_words(cell: &str) -> impl Iterator<Item = String> + '_ {
    cell.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(|w| w.to_lowercase())
}

/// Compute the profile of a non-empty column.
pub fn compute_profile(values: &ColumnValues) -> Result<ColumnProfile> {
    if values.total_count() == 0 {
        return Err(Error::EmptyColumn("profile input".to_string()));
    }
    let sorted = values.sorted_counts();
    let total = values.total_count() as f64;
    let distinct = sorted.len() as f64;

    let mut min_freq = u64::MAX;
    let mut max_freq = 0u64;
    let mut entropy = 0.0;
    for &(_, count) in &sorted {
        min_freq = min_freq.min(count);
        max_freq = max_freq.max(count);
        let p = count as f64 / total;
        entropy -= p * p.log2();
    }
    let entropy = entropy.max(0.0);

    let mut percs: Vec<f64> = sorted
        .iter()
        .map(|&(_, count)| 100.0 * count as f64 / total)
        .collect();
    percs.sort_unstable_by(f64::total_cmp);
    let octiles = std::array::from_fn(|i| {
        let p = (i + 1) as f64 / 8.0;
        let rank = ((p * percs.len() as f64).ceil() as usize).max(1);
        percs[rank - 1]
    });
    let perc_mean = percs.iter().sum::<f64>() / percs.len() as f64;
    let sd_perc = (percs.iter().map(|p| (p - perc_mean).powi(2)).sum::<f64>()
        / percs.len() as f64)
        .sqrt();

    // Character-length and word-count statistics, weighted by multiplicity.
    let mut len_min = f64::INFINITY;
    let mut len_max: f64 = 0.0;
    let mut len_sum = 0.0;
    let mut wc_min = f64::INFINITY;
    let mut wc_max: f64 = 0.0;
    let mut wc_sum = 0.0;
    let mut wc_sq_sum = 0.0;
    let mut word_counts: HashMap<String, u64> = HashMap::new();
    for &(value, count) in &sorted {
        let cf = count as f64;
        let len = value.chars().count() as f64;
        len_min = len_min.min(len);
        len_max = len_max.max(len);
        len_sum += len * cf;
        let mut words_in_cell = 0.0;
        for word in tokenize_words(value) {
            words_in_cell += 1.0;
            *word_counts.entry(word).or_insert(0) += count;
        }
        wc_min = wc_min.min(words_in_cell);
        wc_max = wc_max.max(words_in_cell);
        wc_sum += words_in_cell * cf;
        wc_sq_sum += words_in_cell * words_in_cell * cf;
    }
    let avg_words = wc_sum / total;
    let sd_words = (wc_sq_sum / total - avg_words * avg_words).max(0.0).sqrt();

    let first_word = word_counts.keys().min().cloned().unwrap_or_default();
    let mut ranked_words: Vec<(String, u64)> = word_counts.into_iter().collect();
    ranked_words.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked_words.truncate(10);
    let frequent_words = ranked_words.into_iter().map(|(w, _)| w).collect();

    Ok(ColumnProfile {
        cardinality: distinct,
        uniqueness: distinct / total,
        entropy,
        min_frequency: min_freq as f64,
        max_frequency: max_freq as f64,
        octiles,
        max_perc_frequency: 100.0 * max_freq as f64 / total,
        sd_perc_frequency: sd_perc,
        frequent_words,
        longest_string: len_max,
        shortest_string: len_min,
        avg_string: len_sum / total,
        avg_words,
        min_words: wc_min,
        max_words: wc_max,
        sd_words,
        first_word,
    })
}

/// Names of the Z-scored features, in distance-vector order.
pub const ZSCORED_FEATURES: [&str; 11] = [
    "cardinality",
    "entropy",
    "min_frequency",
    "max_frequency",
    "longest_string",
    "shortest_string",
    "avg_string",
    "avg_words",
    "min_words",
    "max_words",
    "sd_words",
];

pub(crate) fn zscored_get(p: &ColumnProfile, idx: usize) -> f64 {
    match idx {
        0 => p.cardinality,
        1 => p.entropy,
        2 => p.min_frequency,
        3 => p.max_frequency,
        4 => p.longest_string,
        5 => p.shortest_string,
        6 => p.avg_string,
        7 => p.avg_words,
        8 => p.min_words,
        9 => p.max_words,
        10 => p.sd_words,
        _ => unreachable!("z-scored feature index {idx}"),
    }
}

fn zscored_set(p: &mut ColumnProfile, idx: usize, v: f64) {
    match idx {
        0 => p.cardinality = v,
        1 => p.entropy = v,
        2 => p.min_frequency = v,
        3 => p.max_frequency = v,
        4 => p.longest_string = v,
        5 => p.shortest_string = v,
        6 => p.avg_string = v,
        7 => p.avg_words = v,
        8 => p.min_words = v,
        9 => p.max_words = v,
        10 => p.sd_words = v,
        _ => unreachable!("z-scored feature index {idx}"),
    }
}

/// Mean and population standard deviation of one feature over a lake.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureStat {
    pub mean: f64,
    pub std: f64,
}

impl FeatureStat {
    /// A feature whose value never varies across the lake.
    pub fn is_constant(&self) -> bool {
        self.std == 0.0
    }
}

/// Lake-wide Z-score statistics for every feature measured in raw magnitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub cardinality: FeatureStat,
    pub entropy: FeatureStat,
    pub min_frequency: FeatureStat,
    pub max_frequency: FeatureStat,
    pub longest_string: FeatureStat,
    pub shortest_string: FeatureStat,
    pub avg_string: FeatureStat,
    pub avg_words: FeatureStat,
    pub min_words: FeatureStat,
    pub max_words: FeatureStat,
    pub sd_words: FeatureStat,
}

impl NormalizationStats {
    pub fn feature(&self, idx: usize) -> &FeatureStat {
        match idx {
            0 => &self.cardinality,
            1 => &self.entropy,
            2 => &self.min_frequency,
            3 => &self.max_frequency,
            4 => &self.longest_string,
            5 => &self.shortest_string,
            6 => &self.avg_string,
            7 => &self.avg_words,
            8 => &self.min_words,
            9 => &self.max_words,
            10 => &self.sd_words,
            _ => unreachable!("z-scored feature index {idx}"),
        }
    }

    fn feature_mut(&mut self, idx: usize) -> &mut FeatureStat {
        match idx {
            0 => &mut self.cardinality,
            1 => &mut self.entropy,
            2 => &mut self.min_frequency,
            3 => &mut self.max_frequency,
            4 => &mut self.longest_string,
            5 => &mut self.shortest_string,
            6 => &mut self.avg_string,
            7 => &mut self.avg_words,
            8 => &mut self.min_words,
            9 => &mut self.max_words,
            10 => &mut self.sd_words,
            _ => unreachable!("z-scored feature index {idx}"),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).expect("stats serialization");
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::MalformedProfile {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}

/// Mean and population standard deviation per Z-scored feature over all
/// profiles of a lake. Needs at least two profiles.
pub fn compute_normalization_stats(profiles: &[ColumnProfile]) -> Result<NormalizationStats> {
    if profiles.len() < 2 {
        return Err(Error::TooFew {
            what: "profiles",
            need: 2,
            got: profiles.len(),
        });
    }
    let n = profiles.len() as f64;
    let zero = FeatureStat { mean: 0.0, std: 0.0 };
    let mut stats = NormalizationStats {
        cardinality: zero,
        entropy: zero,
        min_frequency: zero,
        max_frequency: zero,
        longest_string: zero,
        shortest_string: zero,
        avg_string: zero,
        avg_words: zero,
        min_words: zero,
        max_words: zero,
        sd_words: zero,
    };
    for idx in 0..ZSCORED_FEATURES.len() {
        let mean = profiles.iter().map(|p| zscored_get(p, idx)).sum::<f64>() / n;
        let var = profiles
            .iter()
            .map(|p| (zscored_get(p, idx) - mean).powi(2))
            .sum::<f64>()
            / n;
        *stats.feature_mut(idx) = FeatureStat {
            mean,
            std: var.max(0.0).sqrt(),
        };
    }
    Ok(stats)
}

/// A profile whose raw-magnitude features have been Z-scored. Comparing
/// profiles is only meaningful between values normalized with the same stats;
/// the wrapper type keeps raw and normalized profiles from mixing.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedProfile(ColumnProfile);

impl NormalizedProfile {
    pub fn as_profile(&self) -> &ColumnProfile {
        &self.0
    }
}

/// Z-score the raw-magnitude features of a profile. Constant features map to
/// zero; bounded and word features pass through unchanged.
pub fn normalize(profile: &ColumnProfile, stats: &NormalizationStats) -> NormalizedProfile {
    let mut p = profile.clone();
    for idx in 0..ZSCORED_FEATURES.len() {
        let s = stats.feature(idx);
        let v = if s.is_constant() {
            0.0
        } else {
            (zscored_get(&p, idx) - s.mean) / s.std
        };
        zscored_set(&mut p, idx, v);
    }
    NormalizedProfile(p)
}

/// Profile every profilable column of every dataset in the lake.
/// Datasets are processed in parallel and results are returned in catalog
/// order (lexicographic by dataset, then by column position).
pub fn profile_lake(catalog: &Catalog) -> Result<Vec<(ColumnRef, ColumnProfile)>> {
    let per_dataset: Vec<Result<Vec<(ColumnRef, ColumnProfile)>>> = catalog
        .datasets()
        .par_iter()
        .map(|ds| {
            let mut out = Vec::new();
            for (col, values) in catalog.read_dataset(&ds.id)? {
                out.push((col, compute_profile(&values)?));
            }
            Ok(out)
        })
        .collect();
    let mut profiles = Vec::new();
    for r in per_dataset {
        profiles.extend(r?);
    }
    Ok(profiles)
}

/// Loaded profiles plus the lake stats, with normalized profiles precomputed
/// and an index for query-column lookup.
#[derive(Debug, Clone)]
pub struct ProfileSet {
    entries: Vec<ProfileEntry>,
    stats: NormalizationStats,
    index: HashMap<(String, String), usize>,
}

#[derive(Debug, Clone)]
pub struct ProfileEntry {
    pub column: ColumnRef,
    pub raw: ColumnProfile,
    pub normalized: NormalizedProfile,
}

impl ProfileSet {
    pub fn new(profiles: Vec<(ColumnRef, ColumnProfile)>, stats: NormalizationStats) -> Self {
        let entries: Vec<ProfileEntry> = profiles
            .into_iter()
            .map(|(column, raw)| {
                let normalized = normalize(&raw, &stats);
                ProfileEntry {
                    column,
                    raw,
                    normalized,
                }
            })
            .collect();
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, e)| {
                (
                    (e.column.dataset_id.clone(), e.column.column_name.clone()),
                    i,
                )
            })
            .collect();
        ProfileSet {
            entries,
            stats,
            index,
        }
    }

    pub fn entries(&self) -> &[ProfileEntry] {
        &self.entries
    }

    pub fn stats(&self) -> &NormalizationStats {
        &self.stats
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn find(&self, dataset_id: &str, column_name: &str) -> Option<&ProfileEntry> {
        self.index
            .get(&(dataset_id.to_string(), column_name.to_string()))
            .map(|&i| &self.entries[i])
    }
}

//! Join-quality prediction from profile differences.
//!
//! A [`DistanceVector`] holds the componentwise absolute differences between
//! two normalized profiles (plus set distances over the word features); a
//! [`Regressor`] is a gradient-boosted ensemble of shallow regression trees
//! mapping distance vectors to predicted continuous join quality. Training
//! targets come from the exact metrics, so a trained model approximates the
//! exact quality ranking at profile-comparison cost.

mod tree;
mod training;

pub use training::{make_training_set, train, SamplingConfig, TrainingPair};
pub(crate) use tree::{presort_features, Tree, TreeBuilder};

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profiler::NormalizedProfile;

/// Number of distance-vector components.
pub const DISTANCE_COMPONENTS: usize = 23;

/// Component names, in vector order: 14 scalar feature deltas, 7 octile
/// deltas, the word-set distance and the first-word mismatch flag.
pub const COMPONENT_NAMES: [&str; DISTANCE_COMPONENTS] = [
    "cardinality",
    "uniqueness",
    "entropy",
    "min_frequency",
    "max_frequency",
    "max_perc_frequency",
    "sd_perc_frequency",
    "longest_string",
    "shortest_string",
    "avg_string",
    "avg_words",
    "min_words",
    "max_words",
    "sd_words",
    "octile_1",
    "octile_2",
    "octile_3",
    "octile_4",
    "octile_5",
    "octile_6",
    "octile_7",
    "word_set_distance",
    "first_word_mismatch",
];

/// Fixed-order nonnegative distances between two normalized profiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceVector(pub [f64; DISTANCE_COMPONENTS]);

impl DistanceVector {
    pub fn components(&self) -> &[f64; DISTANCE_COMPONENTS] {
        &self.0
    }
}

/// Jaccard distance between the frequent-word sets. Two empty sets are
/// identical, hence at distance zero.
fn word_set_distance(a: &[String], b: &[String]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let sa: HashSet<&str> = a.iter().map(|s| s.as_str()).collect();
    let sb: HashSet<&str> = b.iter().map(|s| s.as_str()).collect();
    let inter = sa.intersection(&sb).count() as f64;
    let union = sa.union(&sb).count() as f64;
    1.0 - inter / union
}

/// Distance vector of two profiles normalized with the same lake stats.
pub fn distance_vector(a: &NormalizedProfile, b: &NormalizedProfile) -> DistanceVector {
    let pa = a.as_profile();
    let pb = b.as_profile();
    let mut c = [0.0; DISTANCE_COMPONENTS];
    c[0] = (pa.cardinality - pb.cardinality).abs();
    c[1] = (pa.uniqueness - pb.uniqueness).abs();
    c[2] = (pa.entropy - pb.entropy).abs();
    c[3] = (pa.min_frequency - pb.min_frequency).abs();
    c[4] = (pa.max_frequency - pb.max_frequency).abs();
    c[5] = (pa.max_perc_frequency - pb.max_perc_frequency).abs();
    c[6] = (pa.sd_perc_frequency - pb.sd_perc_frequency).abs();
    c[7] = (pa.longest_string - pb.longest_string).abs();
    c[8] = (pa.shortest_string - pb.shortest_string).abs();
    c[9] = (pa.avg_string - pb.avg_string).abs();
    c[10] = (pa.avg_words - pb.avg_words).abs();
    c[11] = (pa.min_words - pb.min_words).abs();
    c[12] = (pa.max_words - pb.max_words).abs();
    c[13] = (pa.sd_words - pb.sd_words).abs();
    for i in 0..7 {
        c[14 + i] = (pa.octiles[i] - pb.octiles[i]).abs();
    }
    c[21] = word_set_distance(&pa.frequent_words, &pb.frequent_words);
    c[22] = if pa.first_word == pb.first_word { 0.0 } else { 1.0 };
    DistanceVector(c)
}

/// Hyperparameters of the boosted ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressorConfig {
    pub n_trees: usize,
    pub learning_rate: f64,
    pub max_tree_depth: usize,
    pub min_samples_leaf: usize,
    pub seed: u64,
}

impl Default for RegressorConfig {
    fn default() -> Self {
        RegressorConfig {
            n_trees: 50,
            learning_rate: 0.1,
            max_tree_depth: 3,
            min_samples_leaf: 5,
            seed: 42,
        }
    }
}

impl RegressorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees < 1 {
            return Err(Error::Domain {
                what: "n_trees",
                value: self.n_trees as f64,
            });
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::Domain {
                what: "learning_rate",
                value: self.learning_rate,
            });
        }
        if self.max_tree_depth < 1 {
            return Err(Error::Domain {
                what: "max_tree_depth",
                value: self.max_tree_depth as f64,
            });
        }
        Ok(())
    }
}

/// Gradient-boosted regression ensemble over distance vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Regressor {
    pub(crate) config: RegressorConfig,
    pub(crate) base: f64,
    pub(crate) trees: Vec<Tree>,
}

impl Regressor {
    pub fn config(&self) -> &RegressorConfig {
        &self.config
    }

    /// Predicted join quality for a distance vector, clamped to [0, 1].
    pub fn predict(&self, v: &DistanceVector) -> f64 {
        self.raw_predict(v).clamp(0.0, 1.0)
    }

    pub(crate) fn raw_predict(&self, v: &DistanceVector) -> f64 {
        let mut acc = self.base;
        for tree in &self.trees {
            acc += self.config.learning_rate * tree.predict(&v.0);
        }
        acc
    }
}

const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    config: RegressorConfig,
    base: f64,
    trees: Vec<Tree>,
}

/// Write a model as JSON.
pub fn save_model(model: &Regressor, path: &Path) -> Result<()> {
    let file = ModelFile {
        version: MODEL_VERSION,
        config: model.config,
        base: model.base,
        trees: model.trees.clone(),
    };
    let json = serde_json::to_string(&file).expect("model serialization");
    std::fs::write(path, json).map_err(|e| Error::io(path, e))
}

/// Load and validate a model. Unknown versions, malformed trees and
/// out-of-range feature indices are fatal.
pub fn load_model(path: &Path) -> Result<Regressor> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: ModelFile = serde_json::from_str(&text).map_err(|e| Error::MalformedModel {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let bad = |message: String| Error::MalformedModel {
        path: path.to_path_buf(),
        message,
    };
    if file.version != MODEL_VERSION {
        return Err(bad(format!(
            "unsupported model version {} (expected {MODEL_VERSION})",
            file.version
        )));
    }
    file.config.validate().map_err(|e| bad(e.to_string()))?;
    if file.trees.len() != file.config.n_trees {
        return Err(bad(format!(
            "model has {} trees but config says {}",
            file.trees.len(),
            file.config.n_trees
        )));
    }
    if !file.base.is_finite() {
        return Err(bad("non-finite base prediction".to_string()));
    }
    for (i, tree) in file.trees.iter().enumerate() {
        tree.validate().map_err(|m| bad(format!("tree {i}: {m}")))?;
    }
    Ok(Regressor {
        config: file.config,
        base: file.base,
        trees: file.trees,
    })
}

//! Regression trees for the boosted ensemble.
//!
//! Trees are stored as a flat node arena. Split search is exact greedy: for
//! every feature the rows are scanned in presorted order and the variance
//! reduction of every admissible threshold is evaluated with running sums.

use serde::{Deserialize, Serialize};

use crate::model::DISTANCE_COMPONENTS;

/// One tree node. Internal nodes carry a feature/threshold split and child
/// indices; leaves carry a value and use -1 sentinels elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub feature: i32,
    pub threshold: f64,
    pub left: i32,
    pub right: i32,
    pub leaf: Option<f64>,
}

impl Node {
    fn leaf(value: f64) -> Self {
        Node {
            feature: -1,
            threshold: 0.0,
            left: -1,
            right: -1,
            leaf: Some(value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, row: &[f64; DISTANCE_COMPONENTS]) -> f64 {
        let mut idx = 0usize;
        loop {
            let node = &self.nodes[idx];
            if let Some(value) = node.leaf {
                return value;
            }
            idx = if row[node.feature as usize] <= node.threshold {
                node.left as usize
            } else {
                node.right as usize
            };
        }
    }

    /// Structural checks used when deserializing model files.
    pub fn validate(&self) -> Result<(), String> {
        if self.nodes.is_empty() {
            return Err("tree has no nodes".to_string());
        }
        for (i, node) in self.nodes.iter().enumerate() {
            match node.leaf {
                Some(v) => {
                    if !v.is_finite() {
                        return Err(format!("node {i}: non-finite leaf value"));
                    }
                }
                None => {
                    if node.feature < 0 || node.feature as usize >= DISTANCE_COMPONENTS {
                        return Err(format!(
                            "node {i}: split feature {} out of range 0..{DISTANCE_COMPONENTS}",
                            node.feature
                        ));
                    }
                    let (l, r) = (node.left, node.right);
                    if l < 0 || r < 0 || l as usize >= self.nodes.len() || r as usize >= self.nodes.len()
                    {
                        return Err(format!("node {i}: child index out of range"));
                    }
                    if !node.threshold.is_finite() {
                        return Err(format!("node {i}: non-finite threshold"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Training context shared by all nodes of one tree.
pub(crate) struct TreeBuilder<'a> {
    rows: &'a [[f64; DISTANCE_COMPONENTS]],
    targets: &'a [f64],
    /// Row indices presorted per feature, shared across nodes.
    sorted_by_feature: &'a [Vec<u32>],
    max_depth: usize,
    min_samples_leaf: usize,
    /// Node-membership stamp per row; a row belongs to the node currently
    /// being split when its stamp equals the node's stamp value.
    stamp: Vec<u32>,
}

pub(crate) fn presort_features(rows: &[[f64; DISTANCE_COMPONENTS]]) -> Vec<Vec<u32>> {
    (0..DISTANCE_COMPONENTS)
        .map(|f| {
            let mut idx: Vec<u32> = (0..rows.len() as u32).collect();
            idx.sort_by(|&a, &b| rows[a as usize][f].total_cmp(&rows[b as usize][f]));
            idx
        })
        .collect()
}

impl<'a> TreeBuilder<'a> {
    pub(crate) fn new(
        rows: &'a [[f64; DISTANCE_COMPONENTS]],
        targets: &'a [f64],
        sorted_by_feature: &'a [Vec<u32>],
        max_depth: usize,
        min_samples_leaf: usize,
    ) -> Self {
        TreeBuilder {
            rows,
            targets,
            sorted_by_feature,
            max_depth,
            min_samples_leaf,
            stamp: vec![0; rows.len()],
        }
    }

    pub(crate) fn fit(&mut self) -> Tree {
        let mut nodes = Vec::new();
        let all: Vec<u32> = (0..self.rows.len() as u32).collect();
        let mut next_stamp = 1u32;
        self.build(&all, 0, &mut nodes, &mut next_stamp);
        Tree { nodes }
    }

    fn mean(&self, members: &[u32]) -> f64 {
        members.iter().map(|&i| self.targets[i as usize]).sum::<f64>() / members.len() as f64
    }

    fn build(
        &mut self,
        members: &[u32],
        depth: usize,
        nodes: &mut Vec<Node>,
        next_stamp: &mut u32,
    ) -> usize {
        let here = nodes.len();
        if depth >= self.max_depth || members.len() < 2 * self.min_samples_leaf {
            nodes.push(Node::leaf(self.mean(members)));
            return here;
        }
        let Some((feature, threshold)) = self.best_split(members, next_stamp) else {
            nodes.push(Node::leaf(self.mean(members)));
            return here;
        };

        let (mut left, mut right) = (Vec::new(), Vec::new());
        for &i in members {
            if self.rows[i as usize][feature] <= threshold {
                left.push(i);
            } else {
                right.push(i);
            }
        }
        debug_assert!(left.len() >= self.min_samples_leaf && right.len() >= self.min_samples_leaf);

        nodes.push(Node::leaf(0.0)); // placeholder, overwritten below
        let left_idx = self.build(&left, depth + 1, nodes, next_stamp);
        let right_idx = self.build(&right, depth + 1, nodes, next_stamp);
        nodes[here] = Node {
            feature: feature as i32,
            threshold,
            left: left_idx as i32,
            right: right_idx as i32,
            leaf: None,
        };
        here
    }

    /// Best (feature, threshold) by squared-error reduction, or None when no
    /// split satisfies the leaf-size floor or reduces the error.
    fn best_split(&mut self, members: &[u32], next_stamp: &mut u32) -> Option<(usize, f64)> {
        let stamp = *next_stamp;
        *next_stamp += 1;
        for &i in members {
            self.stamp[i as usize] = stamp;
        }

        let n = members.len() as f64;
        let total_sum: f64 = members.iter().map(|&i| self.targets[i as usize]).sum();

        let mut best: Option<(f64, usize, f64)> = None;
        for feature in 0..DISTANCE_COMPONENTS {
            // Members in ascending feature order, via the shared presort.
            let mut left_sum = 0.0;
            let mut left_n = 0usize;
            let mut prev_value: Option<f64> = None;
            for &i in &self.sorted_by_feature[feature] {
                if self.stamp[i as usize] != stamp {
                    continue;
                }
                let value = self.rows[i as usize][feature];
                if let Some(prev) = prev_value {
                    if value > prev
                        && left_n >= self.min_samples_leaf
                        && members.len() - left_n >= self.min_samples_leaf
                    {
                        // Gain = between-group variance term; larger is better.
                        let right_sum = total_sum - left_sum;
                        let right_n = n - left_n as f64;
                        let gain = left_sum * left_sum / left_n as f64
                            + right_sum * right_sum / right_n
                            - total_sum * total_sum / n;
                        // Strict improvement; ties go to the earliest feature
                        // and threshold scanned.
                        let better = match best {
                            None => gain > 1e-12,
                            Some((g, _, _)) => gain > g + 1e-12,
                        };
                        if better {
                            best = Some((gain, feature, 0.5 * (prev + value)));
                        }
                    }
                }
                prev_value = Some(value);
                left_sum += self.targets[i as usize];
                left_n += 1;
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}

//! CART decision trees over sparse features, split by weighted Gini impurity.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{argmax_counts, check_training_data, Hyperparams};
use crate::error::Result;
use crate::features::{FeatureMatrix, SparseVector};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        class: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub nodes: Vec<TreeNode>,
    pub root: usize,
}

impl TreeModel {
    pub fn predict_row(&self, x: &SparseVector) -> usize {
        let mut at = self.root;
        loop {
            match self.nodes[at] {
                TreeNode::Leaf { class } => return class,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x.get(feature) <= threshold { left } else { right },
            }
        }
    }

    /// Length of the longest root-to-leaf path; a lone leaf has depth 0.
    pub fn depth(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(self.root, 0)];
        while let Some((at, d)) = stack.pop() {
            best = best.max(d);
            if let TreeNode::Split { left, right, .. } = self.nodes[at] {
                stack.push((left, d + 1));
                stack.push((right, d + 1));
            }
        }
        best
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Leaf { .. }))
            .count()
    }

    /// Checks that every child index exists and every node is reached
    /// exactly once from the root.
    pub fn is_well_formed(&self) -> bool {
        if self.root >= self.nodes.len() {
            return false;
        }
        let mut visits = vec![0usize; self.nodes.len()];
        let mut stack = vec![self.root];
        while let Some(at) = stack.pop() {
            visits[at] += 1;
            if visits[at] > 1 {
                return false;
            }
            if let TreeNode::Split { left, right, .. } = self.nodes[at] {
                if left >= self.nodes.len() || right >= self.nodes.len() {
                    return false;
                }
                stack.push(left);
                stack.push(right);
            }
        }
        visits.iter().all(|&v| v == 1)
    }
}

/// Weighted Gini impurity of a node's class counts, `1 − Σ p²`.
pub fn gini(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

/// Exact split score `Σc_L²/n_L + Σc_R²/n_R` as a fraction; minimizing the
/// weighted Gini is maximizing this.
#[derive(Clone, Copy, Debug)]
struct SplitScore {
    num: u128,
    den: u128,
}

impl SplitScore {
    fn new(left: &[usize], right: &[usize]) -> Self {
        let sq = |c: &[usize]| c.iter().map(|&v| (v as u128) * (v as u128)).sum::<u128>();
        let nl: u128 = left.iter().map(|&v| v as u128).sum();
        let nr: u128 = right.iter().map(|&v| v as u128).sum();
        Self {
            num: sq(left) * nr + sq(right) * nl,
            den: nl * nr,
        }
    }

    fn beats(&self, other: &SplitScore) -> bool {
        self.num * other.den > other.num * self.den
    }
}

#[derive(Clone, Copy, Debug)]
struct Candidate {
    feature: usize,
    threshold: f64,
    score: SplitScore,
}

pub(crate) struct GrowParams {
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// Features examined per split; `None` examines all of them.
    pub features_per_split: Option<usize>,
}

impl GrowParams {
    pub(crate) fn from_hyperparams(hp: &Hyperparams) -> Self {
        Self {
            max_depth: hp.tree_max_depth,
            min_samples_leaf: hp.tree_min_samples_leaf,
            features_per_split: None,
        }
    }
}

/// Best threshold on one feature. `entries` holds the non-zero values of the
/// node's samples with their classes; the remaining samples are zeros.
fn best_split_on_feature(
    feature: usize,
    entries: &mut [(f64, usize)],
    node_counts: &[usize],
    min_leaf: usize,
) -> Option<Candidate> {
    let k = node_counts.len();
    let n: usize = node_counts.iter().sum();
    entries.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut zero_counts = node_counts.to_vec();
    for &(_, c) in entries.iter() {
        zero_counts[c] -= 1;
    }
    let n_zero = n - entries.len();

    // Distinct values in ascending order with their class counts.
    let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
    let mut zero_placed = n_zero == 0;
    for &(v, c) in entries.iter() {
        if !zero_placed && v > 0.0 {
            groups.push((0.0, zero_counts.clone()));
            zero_placed = true;
        }
        match groups.last_mut() {
            Some((gv, counts)) if *gv == v => counts[c] += 1,
            _ => {
                let mut counts = vec![0; k];
                counts[c] = 1;
                groups.push((v, counts));
            }
        }
    }
    if !zero_placed {
        groups.push((0.0, zero_counts));
    }

    let mut best: Option<Candidate> = None;
    let mut left = vec![0usize; k];
    let mut n_left = 0;
    for pair in groups.windows(2) {
        let (lo, counts) = (&pair[0].0, &pair[0].1);
        let hi = pair[1].0;
        for (l, &c) in left.iter_mut().zip(counts) {
            *l += c;
        }
        n_left += counts.iter().sum::<usize>();
        if n_left < min_leaf || n - n_left < min_leaf {
            continue;
        }
        let right: Vec<usize> = node_counts.iter().zip(&left).map(|(a, b)| a - b).collect();
        let score = SplitScore::new(&left, &right);
        if best.as_ref().is_none_or(|b| score.beats(&b.score)) {
            let mid = lo + (hi - lo) / 2.0;
            let threshold = if mid < hi { mid } else { *lo };
            best = Some(Candidate {
                feature,
                threshold,
                score,
            });
        }
    }
    best
}

/// Grows a tree on the (possibly repeated) row indices in `samples`.
pub(crate) fn grow(
    x: &FeatureMatrix,
    y: &[usize],
    n_classes: usize,
    samples: Vec<usize>,
    params: &GrowParams,
    mut rng: Option<&mut ChaCha8Rng>,
) -> TreeModel {
    let mut nodes = vec![TreeNode::Leaf { class: 0 }];
    let mut work = vec![(0usize, samples, 0usize)];

    while let Some((at, samples, depth)) = work.pop() {
        let mut counts = vec![0usize; n_classes];
        for &s in &samples {
            counts[y[s]] += 1;
        }
        let leaf_class = argmax_counts(&counts);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let depth_capped = params.max_depth.is_some_and(|d| depth >= d);
        if pure || depth_capped || samples.len() < 2 * params.min_samples_leaf {
            nodes[at] = TreeNode::Leaf { class: leaf_class };
            continue;
        }

        let mut by_feature: BTreeMap<usize, Vec<(f64, usize)>> = BTreeMap::new();
        for &s in &samples {
            for &(f, v) in x.rows()[s].entries() {
                by_feature.entry(f).or_default().push((v, y[s]));
            }
        }

        let keys: Vec<usize> = by_feature.keys().copied().collect();
        let mut evaluate = |f: usize| -> Option<Candidate> {
            let entries = by_feature.get_mut(&f)?;
            best_split_on_feature(f, entries, &counts, params.min_samples_leaf)
        };
        let pick_best = |cands: Vec<Candidate>| {
            cands.into_iter().fold(None::<Candidate>, |best, c| match best {
                Some(b) if !c.score.beats(&b.score) => Some(b),
                _ => Some(c),
            })
        };

        let split = match (params.features_per_split, rng.as_deref_mut()) {
            (Some(m), Some(rng)) if m < x.dim() => {
                let mut chosen = rand::seq::index::sample(rng, x.dim(), m).into_vec();
                chosen.sort_unstable();
                let found = pick_best(chosen.into_iter().filter_map(&mut evaluate).collect());
                match found {
                    Some(c) => Some(c),
                    None => {
                        // No valid split among the sampled features: take one
                        // uniformly among the features that admit a split.
                        let valid: Vec<Candidate> = keys.iter().copied().filter_map(&mut evaluate).collect();
                        if valid.is_empty() {
                            None
                        } else {
                            let i = rng.random_range(0..valid.len() as u64) as usize;
                            Some(valid[i])
                        }
                    }
                }
            }
            _ => {
                pick_best(keys.iter().copied().filter_map(&mut evaluate).collect())
            }
        };

        let Some(split) = split else {
            nodes[at] = TreeNode::Leaf { class: leaf_class };
            continue;
        };
        let (left_s, right_s): (Vec<usize>, Vec<usize>) = samples
            .into_iter()
            .partition(|&s| x.rows()[s].get(split.feature) <= split.threshold);
        let left = nodes.len();
        let right = left + 1;
        nodes.push(TreeNode::Leaf { class: 0 });
        nodes.push(TreeNode::Leaf { class: 0 });
        nodes[at] = TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        // right pushed first so the left subtree is expanded first
        work.push((right, right_s, depth + 1));
        work.push((left, left_s, depth + 1));
    }
    TreeModel { nodes, root: 0 }
}

pub fn train_tree(x: &FeatureMatrix, y: &[usize], n_classes: usize, hp: &Hyperparams) -> Result<TreeModel> {
    check_training_data(x, y, n_classes)?;
    hp.validate()?;
    Ok(grow(
        x,
        y,
        n_classes,
        (0..y.len()).collect(),
        &GrowParams::from_hyperparams(hp),
        None,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(rows: &[&[f64]]) -> FeatureMatrix {
        let dim = rows[0].len();
        FeatureMatrix::from_rows(dim, rows.iter().map(|r| SparseVector::from_dense(r)).collect()).unwrap()
    }

    #[test]
    fn gini_values() {
        assert_eq!(gini(&[2, 2]), 0.5);
        assert_eq!(gini(&[4, 0]), 0.0);
    }

    #[test]
    fn single_class_is_one_leaf() {
        let x = dense(&[&[1.0, 0.0], &[0.0, 2.0]]);
        let t = train_tree(&x, &[1, 1], 3, &Hyperparams::default()).unwrap();
        assert_eq!(t.depth(), 0);
        assert_eq!(t.nodes, vec![TreeNode::Leaf { class: 1 }]);
    }

    #[test]
    fn xor_needs_depth_two() {
        let x = dense(&[&[0.0, 0.0], &[1.0, 1.0], &[0.0, 1.0], &[1.0, 0.0]]);
        let y = [0, 0, 1, 1];
        let t = train_tree(&x, &y, 2, &Hyperparams { tree_max_depth: None, ..Hyperparams::default() }).unwrap();
        assert_eq!(t.depth(), 2);
        assert!(t.is_well_formed());
        for (r, &l) in x.rows().iter().zip(&y) {
            assert_eq!(t.predict_row(r), l);
        }
        // first-best tie-break: feature 0 at the midpoint
        assert!(matches!(t.nodes[0], TreeNode::Split { feature: 0, threshold, .. } if threshold == 0.5));
    }

    #[test]
    fn depth_cap_and_min_leaf() {
        let x = dense(&[&[0.0, 0.0], &[1.0, 1.0], &[0.0, 1.0], &[1.0, 0.0]]);
        let y = [0, 0, 1, 1];
        let stump = train_tree(&x, &y, 2, &Hyperparams { tree_max_depth: Some(1), ..Hyperparams::default() }).unwrap();
        assert_eq!(stump.depth(), 1);
        let wide = train_tree(&x, &y, 2, &Hyperparams { tree_min_samples_leaf: 3, ..Hyperparams::default() }).unwrap();
        assert_eq!(wide.depth(), 0);
        assert_eq!(wide.nodes, vec![TreeNode::Leaf { class: 0 }]);
    }

    #[test]
    fn identical_rows_with_mixed_labels_stop() {
        let x = dense(&[&[1.0], &[1.0], &[1.0]]);
        let t = train_tree(&x, &[2, 1, 1], 3, &Hyperparams::default()).unwrap();
        assert_eq!(t.nodes, vec![TreeNode::Leaf { class: 1 }]);
    }

    #[test]
    fn negative_values_split_around_zero() {
        let x = dense(&[&[-2.0], &[0.0], &[3.0]]);
        let t = train_tree(&x, &[0, 1, 2], 3, &Hyperparams::default()).unwrap();
        for (r, l) in x.rows().iter().zip(0..) {
            assert_eq!(t.predict_row(r), l);
        }
    }

    #[test]
    fn malformed_tree_detected() {
        let t = TreeModel {
            nodes: vec![TreeNode::Split { feature: 0, threshold: 0.5, left: 0, right: 1 }, TreeNode::Leaf { class: 0 }],
            root: 0,
        };
        assert!(!t.is_well_formed());
    }
}

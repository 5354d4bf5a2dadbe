use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{grow, GrowParams, TreeModel};
use super::{argmax_counts, check_training_data, FeatureSubset, Hyperparams};
use crate::error::Result;
use crate::features::{FeatureMatrix, SparseVector};

/// Bagged CART trees with per-split feature sampling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<TreeModel>,
    /// Number of features examined at each split.
    pub features_per_split: usize,
    pub bootstrap: bool,
    /// Tree `i` draws from a ChaCha8 generator seeded with `seed` on stream `i`.
    pub seed: u64,
    pub n_classes: usize,
}

impl ForestModel {
    /// Plurality vote, ties to the smallest class index.
    pub fn predict_row(&self, x: &SparseVector) -> usize {
        let mut votes = vec![0usize; self.n_classes];
        for t in &self.trees {
            votes[t.predict_row(x)] += 1;
        }
        argmax_counts(&votes)
    }
}

pub fn tree_rng(seed: u64, tree_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tree_index as u64);
    rng
}

pub fn train_forest(
    x: &FeatureMatrix,
    y: &[usize],
    n_classes: usize,
    hp: &Hyperparams,
) -> Result<ForestModel> {
    check_training_data(x, y, n_classes)?;
    hp.validate()?;
    let dim = x.dim();
    let m = match hp.forest_feature_fraction {
        FeatureSubset::Sqrt => (dim as f64).sqrt().floor() as usize,
        FeatureSubset::Fraction(f) => (f * dim as f64).floor() as usize,
    }
    .max(1);
    let params = GrowParams {
        features_per_split: Some(m),
        ..GrowParams::from_hyperparams(hp)
    };
    let n = y.len();

    let trees = (0..hp.forest_n_trees)
        .into_par_iter()
        .map(|i| {
            let mut rng = tree_rng(hp.seed, i);
            let samples: Vec<usize> = if hp.forest_bootstrap {
                (0..n).map(|_| rng.random_range(0..n as u64) as usize).collect()
            } else {
                (0..n).collect()
            };
            grow(x, y, n_classes, samples, &params, Some(&mut rng))
        })
        .collect();

    Ok(ForestModel {
        trees,
        features_per_split: m,
        bootstrap: hp.forest_bootstrap,
        seed: hp.seed,
        n_classes,
    })
}

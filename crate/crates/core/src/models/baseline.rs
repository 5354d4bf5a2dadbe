use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::argmax_counts;
use crate::error::{Error, Result};

/// Always predicts the most frequent training class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MajorityModel {
    pub class: usize,
}

/// Uniform random class per row. Row `i` draws from a ChaCha8 generator
/// seeded with `seed` on stream `i`, so a row's prediction does not depend
/// on which other rows are predicted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomModel {
    pub n_classes: usize,
    pub seed: u64,
}

impl RandomModel {
    pub fn predict_index(&self, row: usize) -> usize {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(row as u64);
        rng.random_range(0..self.n_classes as u64) as usize
    }
}

pub fn train_majority(y: &[usize], n_classes: usize) -> Result<MajorityModel> {
    if y.is_empty() {
        return Err(Error::Train("majority baseline needs at least one label".into()));
    }
    let mut counts = vec![0usize; n_classes];
    for &l in y {
        if l >= n_classes {
            return Err(Error::Argument(format!("label {l} outside {n_classes} classes")));
        }
        counts[l] += 1;
    }
    Ok(MajorityModel {
        class: argmax_counts(&counts),
    })
}

pub fn train_random(n_classes: usize, seed: u64) -> Result<RandomModel> {
    if n_classes == 0 {
        return Err(Error::Argument("random baseline needs at least one class".into()));
    }
    Ok(RandomModel { n_classes, seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn majority_and_tie() {
        assert_eq!(train_majority(&[0, 0, 1], 2).unwrap().class, 0);
        let tie: Vec<usize> = [vec![1; 5], vec![0; 5]].concat();
        assert_eq!(train_majority(&tie, 2).unwrap().class, 0);
        assert!(matches!(train_majority(&[], 2), Err(Error::Train(_))));
    }

    #[test]
    fn random_single_class_and_zero() {
        let m = train_random(1, 9).unwrap();
        assert!((0..100).all(|i| m.predict_index(i) == 0));
        assert!(train_random(0, 1).is_err());
    }

    #[test]
    fn random_frequencies_within_four_sigma() {
        for k in [2usize, 5, 6] {
            let m = train_random(k, 2025).unwrap();
            let n = 10_000;
            let mut counts = vec![0usize; k];
            for i in 0..n {
                counts[m.predict_index(i)] += 1;
            }
            let p = 1.0 / k as f64;
            let sd = (p * (1.0 - p) / n as f64).sqrt();
            for c in counts {
                assert!((c as f64 / n as f64 - p).abs() <= 4.0 * sd, "k={k} count={c}");
            }
        }
    }
}

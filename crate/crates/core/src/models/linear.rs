//! Multinomial logistic regression and one-vs-rest linear SVM, trained by
//! seeded mini-batch (sub)gradient descent from zero weights.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{argmax, check_training_data, Hyperparams};
use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, SparseVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinearKind {
    LogReg,
    Svm,
}

/// `k × V` weights plus `k` biases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub kind: LinearKind,
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl LinearModel {
    pub fn zeros(kind: LinearKind, n_classes: usize, dim: usize) -> Self {
        Self {
            kind,
            weights: vec![vec![0.0; dim]; n_classes],
            bias: vec![0.0; n_classes],
        }
    }

    pub fn n_classes(&self) -> usize {
        self.bias.len()
    }

    pub fn dim(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    pub fn decision(&self, x: &SparseVector) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| x.dot(w) + b)
            .collect()
    }

    pub fn predict_row(&self, x: &SparseVector) -> usize {
        argmax(&self.decision(x))
    }

    /// Softmax over decision values.
    pub fn probabilities(&self, x: &SparseVector) -> Vec<f64> {
        softmax(&self.decision(x))
    }

    /// Same model with weights and biases multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            kind: self.kind,
            weights: self
                .weights
                .iter()
                .map(|w| w.iter().map(|v| v * factor).collect())
                .collect(),
            bias: self.bias.iter().map(|b| b * factor).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.bias.iter().chain(self.weights.iter().flatten()).all(|v| v.is_finite())
    }
}

pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

/// Loss of one sample and its derivative with respect to the `k` decision
/// values.
fn sample_loss(kind: LinearKind, scores: &[f64], label: usize) -> (f64, Vec<f64>) {
    match kind {
        LinearKind::LogReg => {
            let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let z: f64 = scores.iter().map(|s| (s - max).exp()).sum();
            let log_z = max + z.ln();
            let mut d: Vec<f64> = scores.iter().map(|s| (s - log_z).exp()).collect();
            d[label] -= 1.0;
            (log_z - scores[label], d)
        }
        LinearKind::Svm => {
            let mut loss = 0.0;
            let d = scores
                .iter()
                .enumerate()
                .map(|(c, &f)| {
                    let sign = if c == label { 1.0 } else { -1.0 };
                    let margin = sign * f;
                    if margin < 1.0 {
                        loss += 1.0 - margin;
                        -sign
                    } else {
                        0.0
                    }
                })
                .collect();
            (loss, d)
        }
    }
}

/// Gradient of an objective with respect to weights and biases.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearGradient {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

/// Full training objective and its (sub)gradient: mean per-sample loss plus
/// `(l2 / 2)·‖W‖²`. Biases are not regularized.
///
/// For `LogReg` the per-sample loss is softmax cross-entropy; for `Svm` it is
/// the sum over classes of the one-vs-rest hinge `max(0, 1 − s·f_c)`.
pub fn objective(
    model: &LinearModel,
    rows: &[SparseVector],
    labels: &[usize],
    l2: f64,
) -> (f64, LinearGradient) {
    let k = model.n_classes();
    let mut grad = LinearGradient {
        weights: vec![vec![0.0; model.dim()]; k],
        bias: vec![0.0; k],
    };
    let n = rows.len().max(1) as f64;
    let mut loss = 0.0;
    for (x, &y) in rows.iter().zip(labels) {
        let (l, d) = sample_loss(model.kind, &model.decision(x), y);
        loss += l;
        for (c, &dc) in d.iter().enumerate() {
            if dc == 0.0 {
                continue;
            }
            grad.bias[c] += dc / n;
            for &(i, v) in x.entries() {
                grad.weights[c][i] += dc * v / n;
            }
        }
    }
    loss /= n;
    let mut sq = 0.0;
    for (gw, w) in grad.weights.iter_mut().zip(&model.weights) {
        for (g, &wv) in gw.iter_mut().zip(w) {
            *g += l2 * wv;
            sq += wv * wv;
        }
    }
    (loss + 0.5 * l2 * sq, grad)
}

/// Weights held as `scale · raw` so the L2 shrinkage costs O(1) per step.
struct ScaledWeights {
    raw: Vec<Vec<f64>>,
    scale: f64,
    bias: Vec<f64>,
}

impl ScaledWeights {
    fn decision(&self, x: &SparseVector) -> Vec<f64> {
        self.raw
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| self.scale * x.dot(w) + b)
            .collect()
    }

    fn shrink(&mut self, factor: f64) {
        if factor <= 0.0 {
            self.raw.iter_mut().flatten().for_each(|v| *v = 0.0);
            self.scale = 1.0;
            return;
        }
        self.scale *= factor;
        if self.scale < 1e-100 {
            self.materialize_scale();
        }
    }

    fn materialize_scale(&mut self) {
        let s = self.scale;
        self.raw.iter_mut().flatten().for_each(|v| *v *= s);
        self.scale = 1.0;
    }

    fn into_model(mut self, kind: LinearKind) -> LinearModel {
        self.materialize_scale();
        LinearModel {
            kind,
            weights: self.raw,
            bias: self.bias,
        }
    }
}

/// Trained model plus the full objective after each epoch.
pub struct LinearFit {
    pub model: LinearModel,
    pub loss_history: Vec<f64>,
}

pub fn train_linear(
    kind: LinearKind,
    x: &FeatureMatrix,
    y: &[usize],
    n_classes: usize,
    hp: &Hyperparams,
) -> Result<LinearFit> {
    check_training_data(x, y, n_classes)?;
    hp.validate()?;
    let n = y.len();
    let mut params = ScaledWeights {
        raw: vec![vec![0.0; x.dim()]; n_classes],
        scale: 1.0,
        bias: vec![0.0; n_classes],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let lr = hp.learning_rate;
    let mut loss_history = Vec::with_capacity(hp.epochs);

    for epoch in 0..hp.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(hp.batch_size) {
            let step = lr / batch.len() as f64;
            let deltas: Vec<Vec<f64>> = batch
                .iter()
                .map(|&r| sample_loss(kind, &params.decision(&x.rows()[r]), y[r]).1)
                .collect();
            params.shrink(1.0 - lr * hp.l2_reg);
            let inv_scale = 1.0 / params.scale;
            for (&r, d) in batch.iter().zip(&deltas) {
                for (c, &dc) in d.iter().enumerate() {
                    if dc == 0.0 {
                        continue;
                    }
                    params.bias[c] -= step * dc;
                    let w = &mut params.raw[c];
                    for &(i, v) in x.rows()[r].entries() {
                        w[i] -= step * dc * v * inv_scale;
                    }
                }
            }
        }
        let snapshot = LinearModel {
            kind,
            weights: params
                .raw
                .iter()
                .map(|w| w.iter().map(|v| v * params.scale).collect())
                .collect(),
            bias: params.bias.clone(),
        };
        let (loss, _) = objective(&snapshot, x.rows(), y, hp.l2_reg);
        if !loss.is_finite() || !snapshot.is_finite() {
            return Err(Error::NonFiniteLoss { epoch: epoch + 1 });
        }
        loss_history.push(loss);
    }
    Ok(LinearFit {
        model: params.into_model(kind),
        loss_history,
    })
}

pub fn train_logreg(x: &FeatureMatrix, y: &[usize], n_classes: usize, hp: &Hyperparams) -> Result<LinearModel> {
    Ok(train_linear(LinearKind::LogReg, x, y, n_classes, hp)?.model)
}

pub fn train_svm(x: &FeatureMatrix, y: &[usize], n_classes: usize, hp: &Hyperparams) -> Result<LinearModel> {
    Ok(train_linear(LinearKind::Svm, x, y, n_classes, hp)?.model)
}

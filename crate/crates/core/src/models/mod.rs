//! The six baseline classifiers and their common wrapper.
//!
//! Every tie (argmax over scores, majority class, forest vote, split
//! candidates) resolves to the smallest index.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::LabelSchema;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

pub mod baseline;
pub mod forest;
pub mod linear;
pub mod tree;

pub use baseline::{train_majority, train_random, MajorityModel, RandomModel};
pub use forest::{train_forest, ForestModel};
pub use linear::{objective, train_linear, train_logreg, train_svm, LinearFit, LinearKind, LinearModel};
pub use tree::{gini, train_tree, TreeModel, TreeNode};

pub const MODEL_FORMAT: &str = "hatebench-model";
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Index of the largest value; the first one wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub fn argmax_counts(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate().skip(1) {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn check_training_data(x: &FeatureMatrix, y: &[usize], n_classes: usize) -> Result<()> {
    if x.n_rows() != y.len() {
        return Err(Error::Argument(format!(
            "{} feature rows but {} labels",
            x.n_rows(),
            y.len()
        )));
    }
    if y.is_empty() {
        return Err(Error::Train("no training rows".into()));
    }
    if n_classes == 0 {
        return Err(Error::Argument("at least one class is required".into()));
    }
    if let Some(&l) = y.iter().find(|&&l| l >= n_classes) {
        return Err(Error::Argument(format!("label {l} outside {n_classes} classes")));
    }
    Ok(())
}

/// Features examined per forest split.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum FeatureSubset {
    /// floor(sqrt(V)), at least 1
    Sqrt,
    /// floor(fraction · V), at least 1
    Fraction(f64),
}

impl fmt::Display for FeatureSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureSubset::Sqrt => f.write_str("sqrt"),
            FeatureSubset::Fraction(v) => write!(f, "{v:?}"),
        }
    }
}

impl FromStr for FeatureSubset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("sqrt") {
            return Ok(FeatureSubset::Sqrt);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| Error::Argument(format!("feature fraction {s:?} is neither sqrt nor a number")))?;
        if !(v > 0.0 && v <= 1.0) {
            return Err(Error::Argument(format!("feature fraction {v} not in (0, 1]")));
        }
        Ok(FeatureSubset::Fraction(v))
    }
}

impl From<FeatureSubset> for String {
    fn from(f: FeatureSubset) -> String {
        f.to_string()
    }
}

impl TryFrom<String> for FeatureSubset {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2_reg: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub tree_max_depth: Option<usize>,
    pub tree_min_samples_leaf: usize,
    pub forest_n_trees: usize,
    pub forest_feature_fraction: FeatureSubset,
    pub forest_bootstrap: bool,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            epochs: 30,
            l2_reg: 1e-4,
            batch_size: 64,
            seed: 0,
            tree_max_depth: Some(30),
            tree_min_samples_leaf: 1,
            forest_n_trees: 100,
            forest_feature_fraction: FeatureSubset::Sqrt,
            forest_bootstrap: true,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Argument(m));
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad(format!("learning rate {} must be positive", self.learning_rate));
        }
        if !(self.l2_reg.is_finite() && self.l2_reg >= 0.0) {
            return bad(format!("l2 regularization {} must be non-negative", self.l2_reg));
        }
        if self.batch_size == 0 {
            return bad("batch size must be positive".into());
        }
        if self.tree_max_depth == Some(0) {
            return bad("tree max depth must be positive".into());
        }
        if self.tree_min_samples_leaf == 0 {
            return bad("tree min samples per leaf must be positive".into());
        }
        if self.forest_n_trees == 0 {
            return bad("forest needs at least one tree".into());
        }
        if let FeatureSubset::Fraction(f) = self.forest_feature_fraction {
            if !(f > 0.0 && f <= 1.0) {
                return bad(format!("feature fraction {f} not in (0, 1]"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    Random,
    Majority,
    Svm,
    LogReg,
    Forest,
    Tree,
}

impl ModelKind {
    /// Table order used in reports.
    pub const ALL: [ModelKind; 6] = [
        ModelKind::Random,
        ModelKind::Majority,
        ModelKind::Svm,
        ModelKind::LogReg,
        ModelKind::Forest,
        ModelKind::Tree,
    ];

    /// Short row label used in comparison tables.
    pub fn label(&self) -> &'static str {
        match self {
            ModelKind::Random => "Random",
            ModelKind::Majority => "Majority",
            ModelKind::Svm => "SVM",
            ModelKind::LogReg => "LR",
            ModelKind::Forest => "RF",
            ModelKind::Tree => "DT",
        }
    }

    pub fn uses_features(&self) -> bool {
        !matches!(self, ModelKind::Random | ModelKind::Majority)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Random => "random",
            ModelKind::Majority => "majority",
            ModelKind::Svm => "svm",
            ModelKind::LogReg => "lr",
            ModelKind::Forest => "rf",
            ModelKind::Tree => "dt",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "random" => ModelKind::Random,
            "majority" => ModelKind::Majority,
            "svm" => ModelKind::Svm,
            "lr" | "logreg" | "logistic" => ModelKind::LogReg,
            "rf" | "forest" => ModelKind::Forest,
            "dt" | "tree" => ModelKind::Tree,
            other => return Err(Error::Argument(format!("unknown model kind {other:?}"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelBody {
    Majority(MajorityModel),
    Random(RandomModel),
    Linear(LinearModel),
    Tree(TreeModel),
    Forest(ForestModel),
}

/// Where a model came from: enough to refuse mismatched inputs later.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub schema: LabelSchema,
    /// Digest of the featurization settings and fitted vocabulary.
    pub feature_config_id: String,
    pub feature_dim: usize,
    pub hyperparams: Hyperparams,
    /// Digest of the training split.
    pub train_digest: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub body: ModelBody,
    pub provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    kind: ModelKind,
    #[serde(flatten)]
    model: TrainedModel,
}

impl TrainedModel {
    /// Trains `kind` on `x` / `y`. The feature matrix dimension must match
    /// `provenance.feature_dim`, and labels index `provenance.schema`.
    pub fn train(kind: ModelKind, x: &FeatureMatrix, y: &[usize], provenance: Provenance) -> Result<Self> {
        let k = provenance.schema.len();
        let hp = &provenance.hyperparams;
        if x.dim() != provenance.feature_dim {
            return Err(Error::Argument(format!(
                "feature dim {} does not match provenance dim {}",
                x.dim(),
                provenance.feature_dim
            )));
        }
        let body = match kind {
            ModelKind::Majority => ModelBody::Majority(train_majority(y, k)?),
            ModelKind::Random => ModelBody::Random(train_random(k, hp.seed)?),
            ModelKind::Svm => ModelBody::Linear(train_svm(x, y, k, hp)?),
            ModelKind::LogReg => ModelBody::Linear(train_logreg(x, y, k, hp)?),
            ModelKind::Tree => ModelBody::Tree(train_tree(x, y, k, hp)?),
            ModelKind::Forest => ModelBody::Forest(train_forest(x, y, k, hp)?),
        };
        Ok(Self { body, provenance })
    }

    pub fn kind(&self) -> ModelKind {
        match &self.body {
            ModelBody::Majority(_) => ModelKind::Majority,
            ModelBody::Random(_) => ModelKind::Random,
            ModelBody::Linear(m) => match m.kind {
                LinearKind::LogReg => ModelKind::LogReg,
                LinearKind::Svm => ModelKind::Svm,
            },
            ModelBody::Tree(_) => ModelKind::Tree,
            ModelBody::Forest(_) => ModelKind::Forest,
        }
    }

    pub fn schema(&self) -> &LabelSchema {
        &self.provenance.schema
    }

    /// One class index per row.
    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<usize>> {
        if x.dim() != self.provenance.feature_dim {
            return Err(Error::Argument(format!(
                "feature dim {} does not match model dim {}",
                x.dim(),
                self.provenance.feature_dim
            )));
        }
        let rows = x.rows();
        Ok(match &self.body {
            ModelBody::Majority(m) => vec![m.class; rows.len()],
            ModelBody::Random(m) => (0..rows.len()).map(|i| m.predict_index(i)).collect(),
            ModelBody::Linear(m) => rows.iter().map(|r| m.predict_row(r)).collect(),
            ModelBody::Tree(m) => rows.iter().map(|r| m.predict_row(r)).collect(),
            ModelBody::Forest(m) => rows.iter().map(|r| m.predict_row(r)).collect(),
        })
    }

    /// Structural checks run after loading.
    fn check(&self) -> Result<()> {
        let k = self.provenance.schema.len();
        let dim = self.provenance.feature_dim;
        let leaf_ok = |t: &TreeModel| {
            t.is_well_formed()
                && t.nodes.iter().all(|n| match n {
                    TreeNode::Leaf { class } => *class < k,
                    TreeNode::Split { feature, threshold, .. } => *feature < dim && threshold.is_finite(),
                })
        };
        let ok = match &self.body {
            ModelBody::Majority(m) => m.class < k,
            ModelBody::Random(m) => m.n_classes == k,
            ModelBody::Linear(m) => {
                m.n_classes() == k && m.weights.iter().all(|w| w.len() == dim) && m.is_finite()
            }
            ModelBody::Tree(t) => leaf_ok(t),
            ModelBody::Forest(f) => f.n_classes == k && !f.trees.is_empty() && f.trees.iter().all(leaf_ok),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Load("model structure is inconsistent with its provenance".into()))
        }
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_FORMAT_VERSION,
            kind: self.kind(),
            model: self.clone(),
        };
        let mut s = serde_json::to_string(&file).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Header {
            format: String,
            version: u32,
        }
        let header: Header =
            serde_json::from_str(text).map_err(|e| Error::Load(format!("corrupt model file: {e}")))?;
        if header.format != MODEL_FORMAT {
            return Err(Error::Load(format!("not a model file (format {:?})", header.format)));
        }
        if header.version != MODEL_FORMAT_VERSION {
            return Err(Error::Load(format!(
                "model format version {} is not supported (expected {MODEL_FORMAT_VERSION})",
                header.version
            )));
        }
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| Error::Load(format!("corrupt model file: {e}")))?;
        if file.kind != file.model.kind() {
            return Err(Error::Load("model kind does not match its body".into()));
        }
        file.model.check()?;
        Ok(file.model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

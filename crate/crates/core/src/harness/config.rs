//! Experiment configuration: a flat `section.key = value` text format.
//!
//! ```text
//! # comments start with '#'
//! task = 1A
//! data.train = 1a/train.tsv
//! data.test = 1a/test.tsv
//! model.kind = svm
//! downsample.fraction = 1/3
//! ```
//!
//! Keys left out take their defaults. Feature settings default by model
//! kind: SVM uses l2-normalized TF-IDF over (1, 2)-grams, every other model
//! raw unigram counts. Relative data paths resolve against the directory of
//! the config file.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::corpus::{Fraction, LabelSchema, SplitFormat};
use crate::error::{Error, Result};
use crate::features::{NgramRange, Norm};
use crate::models::{FeatureSubset, Hyperparams, ModelKind};
use crate::preprocess::{CleanConfig, StopwordSet, UnicodeNormalize};

pub const DEFAULT_MAX_FEATURES: usize = 50_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Vectorizer {
    Count,
    Tfidf,
}

impl FromStr for Vectorizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "count" => Ok(Vectorizer::Count),
            "tfidf" | "tf-idf" => Ok(Vectorizer::Tfidf),
            other => Err(Error::Config(format!("unknown vectorizer {other:?}"))),
        }
    }
}

impl fmt::Display for Vectorizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Vectorizer::Count => "count",
            Vectorizer::Tfidf => "tfidf",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureSpec {
    pub vectorizer: Vectorizer,
    pub ngram: NgramRange,
    pub min_df: usize,
    pub max_features: Option<usize>,
    pub norm: Norm,
}

impl FeatureSpec {
    pub fn default_for(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Svm => Self {
                vectorizer: Vectorizer::Tfidf,
                ngram: NgramRange { min_n: 1, max_n: 2 },
                min_df: 1,
                max_features: Some(DEFAULT_MAX_FEATURES),
                norm: Norm::L2,
            },
            _ => Self {
                vectorizer: Vectorizer::Count,
                ngram: NgramRange::unigrams(),
                min_df: 1,
                max_features: Some(DEFAULT_MAX_FEATURES),
                norm: Norm::None,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StopwordSource {
    Bundled,
    Disabled,
    File(String),
}

impl fmt::Display for StopwordSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StopwordSource::Bundled => f.write_str("bundled"),
            StopwordSource::Disabled => f.write_str("none"),
            StopwordSource::File(p) => f.write_str(p),
        }
    }
}

impl StopwordSource {
    fn parse(s: &str) -> Self {
        match s {
            "bundled" | "" => StopwordSource::Bundled,
            "none" => StopwordSource::Disabled,
            p => StopwordSource::File(p.to_string()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DataPaths {
    pub format: SplitFormat,
    pub train: String,
    pub dev: Option<String>,
    pub test: Option<String>,
    /// Schema file; the built-in schema for the task when absent.
    pub schema: Option<String>,
    pub stopwords: StopwordSource,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DownsampleSpec {
    pub fraction: Fraction,
    pub stratified: bool,
    pub seed: u64,
}

impl Default for DownsampleSpec {
    fn default() -> Self {
        Self {
            fraction: Fraction::one(),
            stratified: true,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub task_id: String,
    pub data: DataPaths,
    pub clean: CleanConfig,
    pub features: FeatureSpec,
    pub model: ModelKind,
    pub hyperparams: Hyperparams,
    pub downsample: DownsampleSpec,
    pub output_dir: Option<String>,
    /// Directory relative paths resolve against. Not part of the text form.
    pub base_dir: PathBuf,
}

const KNOWN_KEYS: &[&str] = &[
    "task",
    "data.format",
    "data.train",
    "data.dev",
    "data.test",
    "data.schema",
    "data.stopwords",
    "clean.strip_urls",
    "clean.strip_emoji",
    "clean.strip_punct",
    "clean.strip_special",
    "clean.lowercase_latin",
    "clean.unicode_normalize",
    "features.vectorizer",
    "features.ngram_min",
    "features.ngram_max",
    "features.min_df",
    "features.max_features",
    "features.norm",
    "model.kind",
    "model.learning_rate",
    "model.epochs",
    "model.l2_reg",
    "model.batch_size",
    "model.seed",
    "model.tree_max_depth",
    "model.tree_min_samples_leaf",
    "model.forest_n_trees",
    "model.forest_feature_fraction",
    "model.forest_bootstrap",
    "downsample.fraction",
    "downsample.stratified",
    "downsample.seed",
    "output.dir",
];

/// Parses `key = value` lines, rejecting unknown and repeated keys.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if !KNOWN_KEYS.contains(&k) {
            return Err(Error::Config(format!("line {}: unknown key {k:?}", i + 1)));
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(Error::Config(format!("line {}: key {k:?} repeated", i + 1)));
        }
    }
    Ok(out)
}

/// Applies a `key=value` override on top of parsed pairs.
pub fn apply_override(pairs: &mut BTreeMap<String, String>, assignment: &str) -> Result<()> {
    let (k, v) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override {assignment:?} is not key=value")))?;
    let k = k.trim();
    if !KNOWN_KEYS.contains(&k) {
        return Err(Error::Config(format!("unknown key {k:?}")));
    }
    pairs.insert(k.to_string(), v.trim().to_string());
    Ok(())
}

struct Reader<'a> {
    pairs: &'a BTreeMap<String, String>,
}

impl Reader<'_> {
    fn raw(&self, key: &str) -> Option<&str> {
        self.pairs.get(key).map(String::as_str)
    }

    fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Config(format!("invalid value {v:?} for {key}"))),
        }
    }

    fn bool(&self, key: &str, default: bool) -> Result<bool> {
        match self.raw(key) {
            None => Ok(default),
            Some("true") | Some("yes") | Some("1") => Ok(true),
            Some("false") | Some("no") | Some("0") => Ok(false),
            Some(v) => Err(Error::Config(format!("invalid boolean {v:?} for {key}"))),
        }
    }

    fn optional_usize(&self, key: &str, default: Option<usize>) -> Result<Option<usize>> {
        match self.raw(key) {
            None => Ok(default),
            Some("none") => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("invalid value {v:?} for {key}"))),
        }
    }

    fn path(&self, key: &str) -> Option<String> {
        self.raw(key).filter(|v| !v.is_empty() && *v != "none").map(str::to_string)
    }
}

impl ExperimentConfig {
    pub fn from_pairs(pairs: &BTreeMap<String, String>, base_dir: PathBuf) -> Result<Self> {
        let r = Reader { pairs };
        let task_id = r
            .raw("task")
            .ok_or_else(|| Error::Config("missing key task".into()))?
            .to_ascii_uppercase();
        let model: ModelKind = r
            .raw("model.kind")
            .ok_or_else(|| Error::Config("missing key model.kind".into()))?
            .parse()
            .map_err(|e: Error| Error::Config(e.to_string()))?;
        let train = r
            .path("data.train")
            .ok_or_else(|| Error::Config("missing key data.train".into()))?;

        let data = DataPaths {
            format: r.get("data.format", SplitFormat::Tsv)?,
            train,
            dev: r.path("data.dev"),
            test: r.path("data.test"),
            schema: r.path("data.schema"),
            stopwords: StopwordSource::parse(r.raw("data.stopwords").unwrap_or("bundled")),
        };

        let dc = CleanConfig::default();
        let clean = CleanConfig {
            strip_urls: r.bool("clean.strip_urls", dc.strip_urls)?,
            strip_emoji: r.bool("clean.strip_emoji", dc.strip_emoji)?,
            strip_punct: r.bool("clean.strip_punct", dc.strip_punct)?,
            strip_special: r.bool("clean.strip_special", dc.strip_special)?,
            lowercase_latin: r.bool("clean.lowercase_latin", dc.lowercase_latin)?,
            unicode_normalize: r.get::<UnicodeNormalize>("clean.unicode_normalize", dc.unicode_normalize)?,
        };

        let df = FeatureSpec::default_for(model);
        let ngram = NgramRange::new(
            r.get("features.ngram_min", df.ngram.min_n)?,
            r.get("features.ngram_max", df.ngram.max_n)?,
        )
        .map_err(|e| Error::Config(e.to_string()))?;
        let features = FeatureSpec {
            vectorizer: r.get("features.vectorizer", df.vectorizer)?,
            ngram,
            min_df: r.get("features.min_df", df.min_df)?,
            max_features: r.optional_usize("features.max_features", df.max_features)?,
            norm: r.get("features.norm", df.norm)?,
        };

        let dh = Hyperparams::default();
        let hyperparams = Hyperparams {
            learning_rate: r.get("model.learning_rate", dh.learning_rate)?,
            epochs: r.get("model.epochs", dh.epochs)?,
            l2_reg: r.get("model.l2_reg", dh.l2_reg)?,
            batch_size: r.get("model.batch_size", dh.batch_size)?,
            seed: r.get("model.seed", dh.seed)?,
            tree_max_depth: r.optional_usize("model.tree_max_depth", dh.tree_max_depth)?,
            tree_min_samples_leaf: r.get("model.tree_min_samples_leaf", dh.tree_min_samples_leaf)?,
            forest_n_trees: r.get("model.forest_n_trees", dh.forest_n_trees)?,
            forest_feature_fraction: r.get::<FeatureSubset>("model.forest_feature_fraction", dh.forest_feature_fraction)?,
            forest_bootstrap: r.bool("model.forest_bootstrap", dh.forest_bootstrap)?,
        };
        hyperparams
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;

        let dd = DownsampleSpec::default();
        let downsample = DownsampleSpec {
            fraction: r.get("downsample.fraction", dd.fraction)?,
            stratified: r.bool("downsample.stratified", dd.stratified)?,
            seed: r.get("downsample.seed", dd.seed)?,
        };

        let cfg = Self {
            task_id,
            data,
            clean,
            features,
            model,
            hyperparams,
            downsample,
            output_dir: r.path("output.dir"),
            base_dir,
        };
        if cfg.data.schema.is_none() {
            LabelSchema::builtin(&cfg.task_id).map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(cfg)
    }

    pub fn parse(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        Self::from_pairs(&parse_pairs(text)?, base_dir.into())
    }

    /// Reads a config file, applying `key=value` overrides on top.
    pub fn load(path: impl AsRef<Path>, overrides: &[String]) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut pairs = parse_pairs(&text)?;
        for o in overrides {
            apply_override(&mut pairs, o)?;
        }
        let base = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        Self::from_pairs(&pairs, base)
    }

    /// Canonical text of everything that affects results: every key, fixed
    /// order, defaults spelled out. `output.dir` is excluded.
    pub fn canonical_text(&self) -> String {
        let opt = |v: &Option<String>| v.clone().unwrap_or_else(|| "none".into());
        let opt_n = |v: Option<usize>| v.map_or_else(|| "none".to_string(), |n| n.to_string());
        let c = &self.clean;
        let f = &self.features;
        let h = &self.hyperparams;
        let d = &self.downsample;
        let lines = [
            ("task", self.task_id.clone()),
            ("data.format", self.data.format.to_string()),
            ("data.train", self.data.train.clone()),
            ("data.dev", opt(&self.data.dev)),
            ("data.test", opt(&self.data.test)),
            ("data.schema", opt(&self.data.schema)),
            ("data.stopwords", self.data.stopwords.to_string()),
            ("clean.strip_urls", c.strip_urls.to_string()),
            ("clean.strip_emoji", c.strip_emoji.to_string()),
            ("clean.strip_punct", c.strip_punct.to_string()),
            ("clean.strip_special", c.strip_special.to_string()),
            ("clean.lowercase_latin", c.lowercase_latin.to_string()),
            ("clean.unicode_normalize", c.unicode_normalize.to_string()),
            ("features.vectorizer", f.vectorizer.to_string()),
            ("features.ngram_min", f.ngram.min_n.to_string()),
            ("features.ngram_max", f.ngram.max_n.to_string()),
            ("features.min_df", f.min_df.to_string()),
            ("features.max_features", opt_n(f.max_features)),
            ("features.norm", f.norm.to_string()),
            ("model.kind", self.model.to_string()),
            ("model.learning_rate", format!("{:?}", h.learning_rate)),
            ("model.epochs", h.epochs.to_string()),
            ("model.l2_reg", format!("{:?}", h.l2_reg)),
            ("model.batch_size", h.batch_size.to_string()),
            ("model.seed", h.seed.to_string()),
            ("model.tree_max_depth", opt_n(h.tree_max_depth)),
            ("model.tree_min_samples_leaf", h.tree_min_samples_leaf.to_string()),
            ("model.forest_n_trees", h.forest_n_trees.to_string()),
            ("model.forest_feature_fraction", h.forest_feature_fraction.to_string()),
            ("model.forest_bootstrap", h.forest_bootstrap.to_string()),
            ("downsample.fraction", d.fraction.to_string()),
            ("downsample.stratified", d.stratified.to_string()),
            ("downsample.seed", d.seed.to_string()),
        ];
        let mut out = String::new();
        for (k, v) in lines {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        }
        out
    }

    /// Canonical text plus the output directory.
    pub fn to_text(&self) -> String {
        let mut out = self.canonical_text();
        if let Some(dir) = &self.output_dir {
            out.push_str(&format!("output.dir = {dir}\n"));
        }
        out
    }

    /// SHA-256 of [`ExperimentConfig::canonical_text`].
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_text().as_bytes()))
    }

    pub fn resolve(&self, p: &str) -> PathBuf {
        let path = Path::new(p);
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn schema(&self) -> Result<LabelSchema> {
        match &self.data.schema {
            Some(p) => LabelSchema::from_file(&self.task_id, self.resolve(p)),
            None => LabelSchema::builtin(&self.task_id),
        }
    }

    /// Stopwords normalized with the configured cleaning.
    pub fn stopwords(&self) -> Result<StopwordSet> {
        let raw = match &self.data.stopwords {
            StopwordSource::Bundled => StopwordSet::bangla_default(),
            StopwordSource::Disabled => StopwordSet::empty(),
            StopwordSource::File(p) => StopwordSet::from_file(self.resolve(p))?,
        };
        Ok(raw.normalized(&self.clean))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "task = 1a\nmodel.kind = svm\ndata.train = t.tsv\n";

    #[test]
    fn defaults_follow_model_kind() {
        let svm = ExperimentConfig::parse(MINIMAL, ".").unwrap();
        assert_eq!(svm.task_id, "1A");
        assert_eq!(svm.features.vectorizer, Vectorizer::Tfidf);
        assert_eq!(svm.features.ngram, NgramRange { min_n: 1, max_n: 2 });
        assert_eq!(svm.features.max_features, Some(50_000));
        let lr = ExperimentConfig::parse(&MINIMAL.replace("svm", "lr"), ".").unwrap();
        assert_eq!(lr.features.vectorizer, Vectorizer::Count);
        assert_eq!(lr.features.ngram, NgramRange::unigrams());
        assert_eq!(lr.hyperparams, Hyperparams::default());
    }

    #[test]
    fn text_round_trip_is_lossless() {
        let text = format!(
            "{MINIMAL}data.dev = d.tsv\nmodel.tree_max_depth = none\nmodel.forest_feature_fraction = 0.25\n\
             downsample.fraction = 1/3\nfeatures.max_features = none\noutput.dir = out\ndata.stopwords = none\n"
        );
        let cfg = ExperimentConfig::parse(&text, ".").unwrap();
        let back = ExperimentConfig::parse(&cfg.to_text(), ".").unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_text(), cfg.to_text());
        assert_eq!(back.hyperparams.tree_max_depth, None);
        assert_eq!(back.downsample.fraction, Fraction::new(1, 3).unwrap());
    }

    #[test]
    fn digest_ignores_output_dir_and_layout() {
        let a = ExperimentConfig::parse(&format!("{MINIMAL}output.dir = a\n"), ".").unwrap();
        let b = ExperimentConfig::parse("# c\n\ndata.train=t.tsv\nmodel.kind = svm\ntask = 1A\noutput.dir = b\n", ".").unwrap();
        assert_eq!(a.digest(), b.digest());
        let c = ExperimentConfig::parse(&format!("{MINIMAL}model.seed = 1\n"), ".").unwrap();
        assert_ne!(a.digest(), c.digest());
    }

    #[test]
    fn errors() {
        assert!(ExperimentConfig::parse("task = 1A\n", ".").is_err());
        assert!(ExperimentConfig::parse(&format!("{MINIMAL}bogus = 1\n"), ".").is_err());
        assert!(ExperimentConfig::parse(&format!("{MINIMAL}task = 1B\n"), ".").is_err());
        assert!(ExperimentConfig::parse(&format!("{MINIMAL}model.epochs = many\n"), ".").is_err());
        assert!(ExperimentConfig::parse(&MINIMAL.replace("1a", "9Z"), ".").is_err());
        assert!(ExperimentConfig::parse(&format!("{MINIMAL}model.learning_rate = -1\n"), ".").is_err());
        assert!(ExperimentConfig::parse("just words\n", ".").is_err());
    }

    #[test]
    fn overrides_apply() {
        let mut pairs = parse_pairs(MINIMAL).unwrap();
        apply_override(&mut pairs, "model.kind=dt").unwrap();
        let cfg = ExperimentConfig::from_pairs(&pairs, ".".into()).unwrap();
        assert_eq!(cfg.model, ModelKind::Tree);
        assert!(apply_override(&mut pairs, "nope=1").is_err());
        assert!(apply_override(&mut pairs, "model.kind").is_err());
    }
}

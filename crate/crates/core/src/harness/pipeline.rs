use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, FeatureSpec, Vectorizer};
use super::report::{emit_comparison, ComparisonEntry, ReportFormat};
use crate::corpus::{downsample, load_split, DatasetSplit, LabelSchema, SplitFormat, SplitKind};
use crate::error::{Error, Result, Stage, StageExt};
use crate::features::{FeatureMatrix, TfidfWeights, Vocabulary};
use crate::metrics::{evaluate, EvalReport};
use crate::models::{Provenance, TrainedModel};
use crate::preprocess::{preprocess_document, CleanConfig, StopwordSet, TokenList};

pub const CONFIG_FILE: &str = "config.cfg";
pub const MODEL_FILE: &str = "model.json";
pub const VOCAB_FILE: &str = "vocab.txt";
pub const IDF_FILE: &str = "idf.txt";
pub const STOPWORDS_FILE: &str = "stopwords.txt";
pub const RECORD_FILE: &str = "run_record.txt";

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Text to feature vectors: cleaning, stopwords, a vocabulary fitted on
/// training text, and optional TF-IDF weights.
#[derive(Clone, Debug, PartialEq)]
pub struct Featurizer {
    pub clean: CleanConfig,
    pub stopwords: StopwordSet,
    pub vocab: Vocabulary,
    pub tfidf: Option<TfidfWeights>,
}

impl Featurizer {
    /// Fits on training token lists only.
    pub fn fit(
        spec: &FeatureSpec,
        clean: CleanConfig,
        stopwords: StopwordSet,
        train_tokens: &[TokenList],
        train_ids: Vec<String>,
    ) -> Result<(Self, FeatureMatrix)> {
        let vocab = Vocabulary::fit(train_tokens, spec.ngram, spec.min_df, spec.max_features)?;
        let counts = vocab.count_matrix(train_tokens, train_ids)?;
        let (tfidf, x) = match spec.vectorizer {
            Vectorizer::Count => (None, counts),
            Vectorizer::Tfidf => {
                let w = TfidfWeights::fit(&counts, &vocab, spec.norm)?;
                let x = w.transform_matrix(&counts)?;
                (Some(w), x)
            }
        };
        Ok((
            Self {
                clean,
                stopwords,
                vocab,
                tfidf,
            },
            x,
        ))
    }

    pub fn dim(&self) -> usize {
        self.vocab.len()
    }

    pub fn tokens(&self, split: &DatasetSplit) -> Vec<TokenList> {
        split
            .documents
            .iter()
            .map(|d| preprocess_document(d, &self.clean, &self.stopwords))
            .collect()
    }

    pub fn transform_tokens(&self, tokens: &[TokenList], ids: Vec<String>) -> Result<FeatureMatrix> {
        let counts = self.vocab.count_matrix(tokens, ids)?;
        match &self.tfidf {
            None => Ok(counts),
            Some(w) => w.transform_matrix(&counts),
        }
    }

    pub fn transform(&self, split: &DatasetSplit) -> Result<FeatureMatrix> {
        let ids = split.documents.iter().map(|d| d.id.clone()).collect();
        self.transform_tokens(&self.tokens(split), ids)
    }

    fn stopwords_text(&self) -> String {
        let mut out = format!("# source_id: {}\n", self.stopwords.source_id());
        for w in self.stopwords.sorted_words() {
            out.push_str(w);
            out.push('\n');
        }
        out
    }

    fn clean_text(&self) -> String {
        let c = &self.clean;
        format!(
            "urls={} emoji={} punct={} special={} lower={} norm={}\n",
            c.strip_urls, c.strip_emoji, c.strip_punct, c.strip_special, c.lowercase_latin, c.unicode_normalize
        )
    }

    /// Digest over every setting and fitted table that affects vectors.
    pub fn config_id(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.clean_text());
        h.update(self.stopwords_text());
        h.update(self.vocab.to_text());
        match &self.tfidf {
            Some(w) => h.update(w.to_text()),
            None => h.update("count\n"),
        }
        hex::encode(h.finalize())
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        self.vocab.save(dir.join(VOCAB_FILE))?;
        write(&dir.join(STOPWORDS_FILE), &self.stopwords_text())?;
        if let Some(w) = &self.tfidf {
            write(&dir.join(IDF_FILE), &w.to_text())?;
        }
        Ok(())
    }

    pub fn load(dir: &Path, clean: CleanConfig) -> Result<Self> {
        let vocab = Vocabulary::load(dir.join(VOCAB_FILE))?;
        let stopwords = StopwordSet::from_file(dir.join(STOPWORDS_FILE))?;
        let idf_path = dir.join(IDF_FILE);
        let tfidf = if idf_path.exists() {
            let text = fs::read_to_string(&idf_path).map_err(|e| Error::io(&idf_path, e))?;
            let w = TfidfWeights::from_text(&text)?;
            if w.dim() != vocab.len() {
                return Err(Error::Load(format!(
                    "idf table has {} entries, vocabulary {}",
                    w.dim(),
                    vocab.len()
                )));
            }
            Some(w)
        } else {
            None
        };
        Ok(Self {
            clean,
            stopwords,
            vocab,
            tfidf,
        })
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Summary of a finished run. The digest covers everything except the
/// wall-clock time, so identical configs give identical digests.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunRecord {
    pub config_digest: String,
    pub task_id: String,
    pub model: String,
    pub seed: u64,
    pub downsample_seed: u64,
    pub train_digest: String,
    pub n_train: usize,
    pub vocab_digest: String,
    pub feature_config_id: String,
    pub feature_dim: usize,
    /// Artifact file name to SHA-256 of its bytes.
    pub artifacts: BTreeMap<String, String>,
    pub wall_clock_ms: u128,
}

const RECORD_HEADER: &str = "#hatebench-run v1";

impl RunRecord {
    fn body(&self) -> String {
        let mut out = format!(
            "config_digest = {}\ntask = {}\nmodel = {}\nseed = {}\ndownsample_seed = {}\ntrain_digest = {}\nn_train = {}\n\
             vocab_digest = {}\nfeature_config_id = {}\nfeature_dim = {}\n",
            self.config_digest,
            self.task_id,
            self.model,
            self.seed,
            self.downsample_seed,
            self.train_digest,
            self.n_train,
            self.vocab_digest,
            self.feature_config_id,
            self.feature_dim
        );
        for (name, digest) in &self.artifacts {
            out.push_str(&format!("artifact.{name} = {digest}\n"));
        }
        out
    }

    pub fn digest(&self) -> String {
        sha256_hex(self.body().as_bytes())
    }

    pub fn to_text(&self) -> String {
        format!(
            "{RECORD_HEADER}\n{}digest = {}\nwall_clock_ms = {}\n",
            self.body(),
            self.digest(),
            self.wall_clock_ms
        )
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some(RECORD_HEADER) {
            return Err(Error::Load("run record header missing".into()));
        }
        let mut fields = BTreeMap::new();
        let mut artifacts = BTreeMap::new();
        for line in lines {
            let (k, v) = line
                .split_once(" = ")
                .ok_or_else(|| Error::Load(format!("bad run record line {line:?}")))?;
            match k.strip_prefix("artifact.") {
                Some(name) => artifacts.insert(name.to_string(), v.to_string()),
                None => fields.insert(k.to_string(), v.to_string()),
            };
        }
        let get = |k: &str| {
            fields
                .get(k)
                .cloned()
                .ok_or_else(|| Error::Load(format!("run record missing {k}")))
        };
        let num = |k: &str| -> Result<u128> {
            get(k)?
                .parse()
                .map_err(|_| Error::Load(format!("run record field {k} is not a number")))
        };
        let record = Self {
            config_digest: get("config_digest")?,
            task_id: get("task")?,
            model: get("model")?,
            seed: num("seed")? as u64,
            downsample_seed: num("downsample_seed")? as u64,
            train_digest: get("train_digest")?,
            n_train: num("n_train")? as usize,
            vocab_digest: get("vocab_digest")?,
            feature_config_id: get("feature_config_id")?,
            feature_dim: num("feature_dim")? as usize,
            artifacts,
            wall_clock_ms: num("wall_clock_ms")?,
        };
        if record.digest() != get("digest")? {
            return Err(Error::Load("run record digest does not match its contents".into()));
        }
        Ok(record)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(RECORD_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Self::from_text(&text)
    }
}

/// Loaded and downsampled splits.
#[derive(Clone, Debug)]
pub struct PreparedData {
    pub schema: LabelSchema,
    pub train: DatasetSplit,
    pub dev: Option<DatasetSplit>,
    pub test: Option<DatasetSplit>,
}

/// Loads every configured split and applies the configured downsampling.
pub fn prepare_data(cfg: &ExperimentConfig) -> Result<PreparedData> {
    let schema = cfg.schema().stage(Stage::Load)?;
    let load = |p: &str, kind| load_split(cfg.resolve(p), cfg.data.format, kind, &schema, true);
    let train = load(&cfg.data.train, SplitKind::Train).stage(Stage::Load)?;
    let dev = cfg.data.dev.as_deref().map(|p| load(p, SplitKind::Dev)).transpose().stage(Stage::Load)?;
    let test = cfg.data.test.as_deref().map(|p| load(p, SplitKind::Test)).transpose().stage(Stage::Load)?;

    let ds = cfg.downsample;
    let shrink = |s: DatasetSplit| downsample(&s, ds.fraction, ds.seed, ds.stratified);
    let train = shrink(train).stage(Stage::Downsample)?;
    let dev = dev.map(shrink).transpose().stage(Stage::Downsample)?;
    let test = test.map(shrink).transpose().stage(Stage::Downsample)?;
    if train.is_empty() {
        return Err(Error::Validation("training split is empty after downsampling".into()).at(Stage::Downsample));
    }
    Ok(PreparedData {
        schema,
        train,
        dev,
        test,
    })
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub record: RunRecord,
    pub model: TrainedModel,
    pub featurizer: Featurizer,
    pub train_report: EvalReport,
    pub dev_report: Option<EvalReport>,
    pub test_report: Option<EvalReport>,
}

pub fn report_file(kind: SplitKind, ext: &str) -> String {
    format!("report_{kind}.{ext}")
}

/// Runs the full experiment and writes its artifacts to `out_dir`.
///
/// Work happens in a sibling staging directory that is renamed into place
/// on success and removed on failure, so `out_dir` never holds a partial
/// run. An existing `out_dir` is replaced only if it holds a previous run.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunOutcome> {
    execute(cfg, out_dir, true)
}

/// Like [`run_experiment`] but skips dev and test evaluation.
pub fn train_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunOutcome> {
    execute(cfg, out_dir, false)
}

fn staging_dir(out_dir: &Path) -> Result<PathBuf> {
    let name = out_dir
        .file_name()
        .ok_or_else(|| Error::Argument(format!("output path {} has no name", out_dir.display())))?;
    let parent = match out_dir.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent).map_err(|e| Error::io(&parent, e))?;
    Ok(parent.join(format!(".{}.partial-{}", name.to_string_lossy(), std::process::id())))
}

fn execute(cfg: &ExperimentConfig, out_dir: &Path, eval_splits: bool) -> Result<RunOutcome> {
    if out_dir.exists() {
        let is_run = out_dir.join(RECORD_FILE).exists();
        let is_empty = out_dir
            .read_dir()
            .map(|mut d| d.next().is_none())
            .unwrap_or(false);
        if !is_run && !is_empty {
            return Err(Error::Argument(format!(
                "refusing to overwrite {}: not a previous run directory",
                out_dir.display()
            )));
        }
    }
    let staging = staging_dir(out_dir).stage(Stage::Persist)?;
    if staging.exists() {
        fs::remove_dir_all(&staging).map_err(|e| Error::io(&staging, e)).stage(Stage::Persist)?;
    }
    fs::create_dir_all(&staging).map_err(|e| Error::io(&staging, e)).stage(Stage::Persist)?;

    match execute_in(cfg, &staging, eval_splits) {
        Ok(mut outcome) => {
            let finish = || -> Result<()> {
                if out_dir.exists() {
                    fs::remove_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
                }
                fs::rename(&staging, out_dir).map_err(|e| Error::io(out_dir, e))
            };
            if let Err(e) = finish() {
                let _ = fs::remove_dir_all(&staging);
                return Err(e.at(Stage::Persist));
            }
            outcome.dir = out_dir.to_path_buf();
            Ok(outcome)
        }
        Err(e) => {
            let _ = fs::remove_dir_all(&staging);
            Err(e)
        }
    }
}

fn execute_in(cfg: &ExperimentConfig, dir: &Path, eval_splits: bool) -> Result<RunOutcome> {
    let started = Instant::now();
    let data = prepare_data(cfg)?;

    let stopwords = cfg.stopwords().stage(Stage::Preprocess)?;
    let train_tokens: Vec<TokenList> = data
        .train
        .documents
        .iter()
        .map(|d| preprocess_document(d, &cfg.clean, &stopwords))
        .collect();
    let train_ids: Vec<String> = data.train.documents.iter().map(|d| d.id.clone()).collect();

    let (featurizer, x_train) =
        Featurizer::fit(&cfg.features, cfg.clean, stopwords, &train_tokens, train_ids).stage(Stage::Featurize)?;
    let vocab_digest = featurizer.vocab.digest();
    let y_train = data.train.labels().stage(Stage::Train)?;

    let provenance = Provenance {
        schema: data.schema.clone(),
        feature_config_id: featurizer.config_id(),
        feature_dim: featurizer.dim(),
        hyperparams: cfg.hyperparams,
        train_digest: data.train.digest(),
    };
    let model = TrainedModel::train(cfg.model, &x_train, &y_train, provenance).stage(Stage::Train)?;

    let eval = |split: &DatasetSplit, x: &FeatureMatrix| -> Result<EvalReport> {
        let pred = model.predict(x)?;
        evaluate(&split.labels()?, &pred, &data.schema)
    };
    let train_report = eval(&data.train, &x_train).stage(Stage::Evaluate)?;
    let mut split_reports = Vec::new();
    if eval_splits {
        for split in [&data.dev, &data.test].into_iter().flatten() {
            let x = featurizer.transform(split).stage(Stage::Featurize)?;
            split_reports.push((split.kind, eval(split, &x).stage(Stage::Evaluate)?));
        }
    }
    if featurizer.vocab.digest() != vocab_digest {
        return Err(Error::Validation("vocabulary changed during evaluation".into()).at(Stage::Evaluate));
    }

    let persist = || -> Result<RunRecord> {
        write(&dir.join(CONFIG_FILE), &cfg.canonical_text())?;
        featurizer.save(dir)?;
        model.save(dir.join(MODEL_FILE))?;
        let label = cfg.model.label().to_string();
        for (kind, report) in std::iter::once((SplitKind::Train, &train_report))
            .chain(split_reports.iter().map(|(k, r)| (*k, r)))
        {
            write(&dir.join(report_file(kind, "json")), &report.to_json())?;
            let md = emit_comparison(
                &[ComparisonEntry {
                    model: label.clone(),
                    report: report.clone(),
                }],
                ReportFormat::Markdown,
                true,
            )?;
            write(&dir.join(report_file(kind, "md")), &md)?;
        }
        let mut artifacts = BTreeMap::new();
        let mut names: Vec<String> = fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .filter_map(|e| e.ok())
            .map(|e| e.file_name().to_string_lossy().into_owned())
            .collect();
        names.sort();
        for name in names {
            let p = dir.join(&name);
            let bytes = fs::read(&p).map_err(|e| Error::io(&p, e))?;
            artifacts.insert(name, sha256_hex(&bytes));
        }
        let record = RunRecord {
            config_digest: cfg.digest(),
            task_id: data.schema.task_id().to_string(),
            model: cfg.model.to_string(),
            seed: cfg.hyperparams.seed,
            downsample_seed: cfg.downsample.seed,
            train_digest: data.train.digest(),
            n_train: data.train.len(),
            vocab_digest: vocab_digest.clone(),
            feature_config_id: featurizer.config_id(),
            feature_dim: featurizer.dim(),
            artifacts,
            wall_clock_ms: started.elapsed().as_millis(),
        };
        write(&dir.join(RECORD_FILE), &record.to_text())?;
        Ok(record)
    };
    let record = persist().stage(Stage::Persist)?;

    let mut dev_report = None;
    let mut test_report = None;
    for (kind, r) in split_reports {
        match kind {
            SplitKind::Dev => dev_report = Some(r),
            _ => test_report = Some(r),
        }
    }
    Ok(RunOutcome {
        dir: dir.to_path_buf(),
        record,
        model,
        featurizer,
        train_report,
        dev_report,
        test_report,
    })
}

/// A finished run read back from disk.
#[derive(Clone, Debug)]
pub struct LoadedRun {
    pub config: ExperimentConfig,
    pub record: RunRecord,
    pub featurizer: Featurizer,
    pub model: TrainedModel,
}

impl LoadedRun {
    pub fn load(dir: &Path) -> Result<Self> {
        let record = RunRecord::load(dir)?;
        let config = ExperimentConfig::load(dir.join(CONFIG_FILE), &[])?;
        if config.digest() != record.config_digest {
            return Err(Error::Load("stored config does not match the run record".into()));
        }
        let featurizer = Featurizer::load(dir, config.clean)?;
        let model = TrainedModel::load(dir.join(MODEL_FILE))?;
        if featurizer.config_id() != model.provenance.feature_config_id {
            return Err(Error::Load("model was trained with different features".into()));
        }
        Ok(Self {
            config,
            record,
            featurizer,
            model,
        })
    }

    pub fn schema(&self) -> &LabelSchema {
        self.model.schema()
    }

    /// Predicted class indices for an unlabeled or labeled split file.
    pub fn predict_file(&self, path: &Path, format: SplitFormat, labeled: bool) -> Result<(DatasetSplit, Vec<usize>)> {
        let split = load_split(path, format, SplitKind::Test, self.schema(), labeled).stage(Stage::Load)?;
        let x = self.featurizer.transform(&split).stage(Stage::Featurize)?;
        let pred = self.model.predict(&x).stage(Stage::Evaluate)?;
        Ok((split, pred))
    }

    /// Evaluates the run's model on a labeled split file.
    pub fn evaluate_file(&self, path: &Path, format: SplitFormat) -> Result<EvalReport> {
        let (split, pred) = self.predict_file(path, format, true)?;
        let gold = split.labels().stage(Stage::Evaluate)?;
        evaluate(&gold, &pred, self.schema()).stage(Stage::Evaluate)
    }
}

/// `id<TAB>label` lines for a prediction file.
pub fn format_predictions(split: &DatasetSplit, pred: &[usize]) -> Result<String> {
    let mut out = String::new();
    for (doc, &p) in split.documents.iter().zip(pred) {
        let name = split
            .schema
            .name(p)
            .ok_or_else(|| Error::Validation(format!("predicted class {p} outside schema")))?;
        out.push_str(&format!("{}\t{}\n", doc.id, name));
    }
    Ok(out)
}

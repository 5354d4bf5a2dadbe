//! Python bindings for the `hatebench` crate.
//!
//! Class indices follow the schema's class order. Feature rows are passed as
//! dense lists of floats.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use hatebench::corpus::{self, DatasetSplit, Document, Fraction, SplitFormat, SplitKind};
use hatebench::features::{self, FeatureMatrix, NgramRange, SparseVector};
use hatebench::harness::{self, ComparisonEntry, ExperimentConfig, ReportFormat};
use hatebench::metrics::{self, to_f64, Average};
use hatebench::models::{self, FeatureSubset, Hyperparams, ModelKind, Provenance};
use hatebench::preprocess::{self, CleanConfig, StopwordSet, TokenList};
use hatebench::Error;

fn py_err(e: Error) -> PyErr {
    let msg = e.to_string();
    match e.root() {
        Error::Io { .. } => PyOSError::new_err(msg),
        _ if e.is_data_error() => PyValueError::new_err(msg),
        _ => PyRuntimeError::new_err(msg),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for hatebench::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

#[pyclass(name = "LabelSchema", module = "hatebench_py", frozen)]
struct PySchema(corpus::LabelSchema);

#[pymethods]
impl PySchema {
    #[new]
    fn new(task_id: &str, classes: Vec<String>) -> PyResult<Self> {
        corpus::LabelSchema::new(task_id, classes).py().map(Self)
    }

    /// Built-in schema for "1A" or "1B".
    #[staticmethod]
    fn builtin(task_id: &str) -> PyResult<Self> {
        corpus::LabelSchema::builtin(task_id).py().map(Self)
    }

    #[getter]
    fn task_id(&self) -> &str {
        self.0.task_id()
    }

    #[getter]
    fn classes(&self) -> Vec<String> {
        self.0.classes().to_vec()
    }

    fn index_of(&self, name: &str) -> Option<usize> {
        self.0.index_of(name)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("LabelSchema({:?}, {:?})", self.0.task_id(), self.0.classes())
    }
}

#[pyfunction]
#[pyo3(signature = (text, strip_urls=true, strip_emoji=true, strip_punct=true, strip_special=true, lowercase_latin=true, nfc=true))]
fn clean(
    text: &str,
    strip_urls: bool,
    strip_emoji: bool,
    strip_punct: bool,
    strip_special: bool,
    lowercase_latin: bool,
    nfc: bool,
) -> String {
    let config = CleanConfig {
        strip_urls,
        strip_emoji,
        strip_punct,
        strip_special,
        lowercase_latin,
        unicode_normalize: if nfc {
            preprocess::UnicodeNormalize::CanonicalComposed
        } else {
            preprocess::UnicodeNormalize::None
        },
    };
    preprocess::clean(text, &config)
}

#[pyfunction]
fn tokenize(text: &str) -> Vec<String> {
    preprocess::tokenize(text).into_inner()
}

/// Default cleaning plus tokenization, dropping bundled Bangla stopwords
/// unless `stopwords` is false.
#[pyfunction]
#[pyo3(signature = (text, stopwords=true))]
fn preprocess_text(text: &str, stopwords: bool) -> Vec<String> {
    let config = CleanConfig::default();
    let stops = if stopwords {
        StopwordSet::bangla_default().normalized(&config)
    } else {
        StopwordSet::empty()
    };
    preprocess::preprocess_text(text, &config, &stops).into_inner()
}

/// Indices of the documents kept by downsampling, in original order.
#[pyfunction]
#[pyo3(signature = (labels, schema, fraction, seed=0, stratified=true))]
fn downsample_indices(labels: Vec<String>, schema: &PySchema, fraction: &str, seed: u64, stratified: bool) -> PyResult<Vec<usize>> {
    let fraction: Fraction = fraction.parse().py()?;
    let docs = labels
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let label = schema
                .0
                .index_of(l)
                .ok_or_else(|| PyValueError::new_err(format!("unknown label {l:?}")))?;
            Ok(Document {
                id: i.to_string(),
                text: String::new(),
                label: Some(label),
            })
        })
        .collect::<PyResult<Vec<_>>>()?;
    let split = DatasetSplit::new(SplitKind::Train, schema.0.clone(), docs).py()?;
    let kept = corpus::downsample(&split, fraction, seed, stratified).py()?;
    Ok(kept.documents.iter().map(|d| d.id.parse().expect("numeric id")).collect())
}

#[pyclass(name = "Vocabulary", module = "hatebench_py", frozen)]
struct PyVocabulary(features::Vocabulary);

#[pymethods]
impl PyVocabulary {
    #[staticmethod]
    #[pyo3(signature = (docs, ngram_min=1, ngram_max=1, min_df=1, max_features=None))]
    fn fit(docs: Vec<Vec<String>>, ngram_min: usize, ngram_max: usize, min_df: usize, max_features: Option<usize>) -> PyResult<Self> {
        let range = NgramRange::new(ngram_min, ngram_max).py()?;
        let lists: Vec<TokenList> = docs.into_iter().map(TokenList::new).collect();
        features::Vocabulary::fit(&lists, range, min_df, max_features).py().map(Self)
    }

    #[getter]
    fn terms(&self) -> Vec<String> {
        self.0.terms().to_vec()
    }

    fn index_of(&self, term: &str) -> Option<usize> {
        self.0.index_of(term)
    }

    /// Dense count vector for one token list.
    fn transform(&self, tokens: Vec<String>) -> Vec<f64> {
        self.0.count_vectorize(&TokenList::new(tokens)).to_dense()
    }

    fn digest(&self) -> String {
        self.0.digest()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

#[pyclass(name = "EvalReport", module = "hatebench_py", frozen)]
struct PyReport(metrics::EvalReport);

#[pymethods]
impl PyReport {
    #[getter]
    fn accuracy(&self) -> f64 {
        to_f64(&self.0.accuracy)
    }

    #[getter]
    fn n(&self) -> u64 {
        self.0.n()
    }

    #[getter]
    fn confusion(&self) -> Vec<Vec<u64>> {
        self.0.confusion.cells().to_vec()
    }

    /// `{"precision", "recall", "f1"}` for "micro", "macro" or "weighted".
    fn average(&self, mode: &str) -> PyResult<BTreeMap<&'static str, f64>> {
        let mode = match mode {
            "micro" => Average::Micro,
            "macro" => Average::Macro,
            "weighted" => Average::Weighted,
            other => return Err(PyValueError::new_err(format!("unknown average {other:?}"))),
        };
        let a = self.0.aggregate(mode);
        Ok(BTreeMap::from([
            ("precision", to_f64(&a.precision)),
            ("recall", to_f64(&a.recall)),
            ("f1", to_f64(&a.f1)),
        ]))
    }

    /// One `(class, precision, recall, f1, support)` tuple per class.
    fn per_class(&self) -> Vec<(String, f64, f64, f64, u64)> {
        self.0
            .per_class
            .iter()
            .map(|c| {
                (
                    self.0.schema.classes()[c.class].clone(),
                    to_f64(&c.precision),
                    to_f64(&c.recall),
                    to_f64(&c.f1),
                    c.support,
                )
            })
            .collect()
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }
}

#[pyfunction]
fn evaluate(gold: Vec<usize>, pred: Vec<usize>, schema: &PySchema) -> PyResult<PyReport> {
    metrics::evaluate(&gold, &pred, &schema.0).py().map(PyReport)
}

#[pyfunction]
#[pyo3(signature = (pred_path, gold_path, schema, format="tsv"))]
fn score_predictions(pred_path: PathBuf, gold_path: PathBuf, schema: &PySchema, format: &str) -> PyResult<PyReport> {
    let format: SplitFormat = format.parse().py()?;
    harness::score_predictions(&pred_path, &gold_path, format, &schema.0)
        .py()
        .map(PyReport)
}

/// Markdown or JSON comparison of `(model_name, report)` pairs.
#[pyfunction]
#[pyo3(signature = (entries, format="markdown", class_wise=false))]
fn emit_comparison(entries: Vec<(String, PyRef<'_, PyReport>)>, format: &str, class_wise: bool) -> PyResult<String> {
    let format: ReportFormat = format.parse().py()?;
    let entries: Vec<ComparisonEntry> = entries
        .iter()
        .map(|(model, r)| ComparisonEntry {
            model: model.clone(),
            report: r.0.clone(),
        })
        .collect();
    harness::emit_comparison(&entries, format, class_wise).py()
}

fn matrix(rows: &[Vec<f64>]) -> PyResult<FeatureMatrix> {
    let dim = rows.first().map_or(0, Vec::len);
    let sparse = rows.iter().map(|r| SparseVector::from_dense(r)).collect();
    FeatureMatrix::from_rows(dim, sparse).py()
}

#[pyclass(name = "Model", module = "hatebench_py", frozen)]
struct PyModel(models::TrainedModel);

#[pymethods]
impl PyModel {
    /// Trains `kind` ("random", "majority", "svm", "lr", "rf", "dt") on dense
    /// rows and class indices.
    #[staticmethod]
    #[pyo3(signature = (kind, rows, labels, schema, seed=0, learning_rate=0.1, epochs=30, l2_reg=1e-4, batch_size=64, max_depth=Some(30), n_trees=100))]
    #[allow(clippy::too_many_arguments)]
    fn train(
        kind: &str,
        rows: Vec<Vec<f64>>,
        labels: Vec<usize>,
        schema: &PySchema,
        seed: u64,
        learning_rate: f64,
        epochs: usize,
        l2_reg: f64,
        batch_size: usize,
        max_depth: Option<usize>,
        n_trees: usize,
    ) -> PyResult<Self> {
        let kind: ModelKind = kind.parse().py()?;
        let x = matrix(&rows)?;
        let hyperparams = Hyperparams {
            learning_rate,
            epochs,
            l2_reg,
            batch_size,
            seed,
            tree_max_depth: max_depth,
            forest_n_trees: n_trees,
            forest_feature_fraction: FeatureSubset::Sqrt,
            ..Hyperparams::default()
        };
        let provenance = Provenance {
            schema: schema.0.clone(),
            feature_config_id: "python".into(),
            feature_dim: x.dim(),
            hyperparams,
            train_digest: "python".into(),
        };
        models::TrainedModel::train(kind, &x, &labels, provenance).py().map(Self)
    }

    fn predict(&self, rows: Vec<Vec<f64>>) -> PyResult<Vec<usize>> {
        self.0.predict(&matrix(&rows)?).py()
    }

    #[getter]
    fn kind(&self) -> String {
        self.0.kind().to_string()
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        models::TrainedModel::from_json(text).py().map(Self)
    }
}

/// Runs a config file end to end. Returns the run record digest and the
/// dev/test reports that were produced.
#[pyfunction]
#[pyo3(signature = (config_path, out_dir, overrides=Vec::new()))]
fn run_experiment(config_path: PathBuf, out_dir: PathBuf, overrides: Vec<String>) -> PyResult<(String, Option<PyReport>, Option<PyReport>)> {
    let cfg = ExperimentConfig::load(&config_path, &overrides).py()?;
    let out = harness::run_experiment(&cfg, &out_dir).py()?;
    Ok((
        out.record.digest(),
        out.dev_report.map(PyReport),
        out.test_report.map(PyReport),
    ))
}

#[pymodule]
fn hatebench_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySchema>()?;
    m.add_class::<PyVocabulary>()?;
    m.add_class::<PyReport>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(clean, m)?)?;
    m.add_function(wrap_pyfunction!(tokenize, m)?)?;
    m.add_function(wrap_pyfunction!(preprocess_text, m)?)?;
    m.add_function(wrap_pyfunction!(downsample_indices, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(score_predictions, m)?)?;
    m.add_function(wrap_pyfunction!(emit_comparison, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}

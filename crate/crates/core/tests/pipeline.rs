use std::fs;
use std::path::{Path, PathBuf};

use hatebench::corpus::{load_split, SplitFormat, SplitKind};
use hatebench::error::{Error, Stage};
use hatebench::features::Vocabulary;
use hatebench::harness::pipeline::format_predictions;
use hatebench::harness::scoring::{parse_predictions, score_aligned};
use hatebench::harness::{run_experiment, train_experiment, ExperimentConfig, LoadedRun, RunRecord};
use hatebench::models::ModelKind;
use hatebench::preprocess::preprocess_document;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn config(task: &str, overrides: &[&str]) -> ExperimentConfig {
    let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    ExperimentConfig::load(fixtures().join(format!("{task}.cfg")), &o).unwrap()
}

fn leftovers(parent: &Path) -> Vec<String> {
    fs::read_dir(parent)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.contains(".partial-"))
        .collect()
}

#[test]
fn vocabulary_is_fit_on_train_only() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config("1a", &["model.kind=lr"]);
    let out = run_experiment(&cfg, &tmp.path().join("run")).unwrap();

    let schema = cfg.schema().unwrap();
    let train = load_split(fixtures().join("1a/train.tsv"), SplitFormat::Tsv, SplitKind::Train, &schema, true).unwrap();
    let stops = cfg.stopwords().unwrap();
    let tokens: Vec<_> = train.documents.iter().map(|d| preprocess_document(d, &cfg.clean, &stops)).collect();
    let expected = Vocabulary::fit(&tokens, cfg.features.ngram, cfg.features.min_df, cfg.features.max_features).unwrap();

    let saved = Vocabulary::load(out.dir.join("vocab.txt")).unwrap();
    assert_eq!(saved, expected);
    assert_eq!(saved.n_docs(), 60);
    assert_eq!(out.record.vocab_digest, expected.digest());
}

#[test]
fn record_round_trips_and_matches_stored_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config("1b", &["model.kind=svm", "downsample.fraction=1/3"]);
    let out = run_experiment(&cfg, &tmp.path().join("run")).unwrap();
    assert_eq!(out.record.n_train, 20);
    assert_eq!(out.record.seed, 7);

    let stored = ExperimentConfig::load(out.dir.join("config.cfg"), &[]).unwrap();
    assert_eq!(stored.digest(), out.record.config_digest);
    assert_eq!(stored.digest(), cfg.digest());

    let loaded = RunRecord::load(&out.dir).unwrap();
    assert_eq!(loaded, out.record);
    let tampered = fs::read_to_string(out.dir.join("run_record.txt"))
        .unwrap()
        .replace("n_train = 20", "n_train = 21");
    assert!(RunRecord::from_text(&tampered).is_err());
}

#[test]
fn saved_run_reproduces_reports() {
    let tmp = tempfile::tempdir().unwrap();
    for kind in [ModelKind::Svm, ModelKind::Forest, ModelKind::Random] {
        let cfg = config("1a", &[&format!("model.kind={kind}")]);
        let out = run_experiment(&cfg, &tmp.path().join(kind.to_string())).unwrap();
        let loaded = LoadedRun::load(&out.dir).unwrap();
        let again = loaded.evaluate_file(&fixtures().join("1a/test.tsv"), SplitFormat::Tsv).unwrap();
        assert_eq!(Some(again), out.test_report, "{kind}");
    }
}

#[test]
fn prediction_order_does_not_change_score() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_experiment(&config("1a", &["model.kind=dt"]), &tmp.path().join("run")).unwrap();
    let loaded = LoadedRun::load(&out.dir).unwrap();
    let test = fixtures().join("1a/test.tsv");
    let (split, pred) = loaded.predict_file(&test, SplitFormat::Tsv, true).unwrap();
    let text = format_predictions(&split, &pred).unwrap();
    let mut pairs = parse_predictions(&text, "p").unwrap();
    let forward = score_aligned(&pairs, &split).unwrap();
    pairs.reverse();
    pairs.rotate_left(7);
    assert_eq!(score_aligned(&pairs, &split).unwrap(), forward);
    assert_eq!(Some(forward), out.test_report);
}

#[test]
fn failed_run_leaves_nothing_behind() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.tsv");
    fs::write(&bad, "1\tটেক্সট\tSexist\n").unwrap();
    let mut cfg = config("1a", &[]);
    cfg.data.train = bad.display().to_string();
    let out_dir = tmp.path().join("run");
    let err = run_experiment(&cfg, &out_dir).unwrap_err();
    assert!(matches!(err, Error::Stage { stage: Stage::Load, .. }), "{err}");
    assert!(matches!(err.root(), Error::UnknownLabel { value, .. } if value == "Sexist"));
    assert!(err.to_string().starts_with("[load]"));
    assert!(!out_dir.exists());
    assert!(leftovers(tmp.path()).is_empty());
}

#[test]
fn training_divergence_is_stage_tagged() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config("1a", &["model.kind=lr", "model.learning_rate=1e308", "model.l2_reg=10"]);
    let out_dir = tmp.path().join("run");
    let err = run_experiment(&cfg, &out_dir).unwrap_err();
    assert!(matches!(err, Error::Stage { stage: Stage::Train, .. }), "{err}");
    assert!(matches!(err.root(), Error::NonFiniteLoss { .. }));
    assert!(!err.is_data_error());
    assert!(!out_dir.exists());
    assert!(leftovers(tmp.path()).is_empty());
}

#[test]
fn output_directory_rules() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config("1a", &[]);
    let foreign = tmp.path().join("foreign");
    fs::create_dir(&foreign).unwrap();
    fs::write(foreign.join("notes.txt"), "keep me").unwrap();
    assert!(run_experiment(&cfg, &foreign).is_err());
    assert_eq!(fs::read_to_string(foreign.join("notes.txt")).unwrap(), "keep me");

    let run = tmp.path().join("run");
    let first = train_experiment(&cfg, &run).unwrap();
    assert!(first.test_report.is_none());
    assert!(!run.join("report_test.json").exists());
    let second = run_experiment(&cfg, &run).unwrap();
    assert!(run.join("report_test.json").exists());
    assert_eq!(first.record.config_digest, second.record.config_digest);
}

//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any fails.
//!
//! Golden files for the fixture comparison tables live in `tests/golden/`.
//! Regenerate them with `HATEBENCH_BLESS=1 cargo test --test acceptance`.

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use hatebench::corpus::{
    class_distribution, downsample, format_split, DatasetSplit, Document, Fraction, LabelSchema, SplitFormat,
    SplitKind,
};
use hatebench::features::{FeatureMatrix, SparseVector};
use hatebench::harness::{
    emit_comparison, run_experiment, score_predictions, ComparisonEntry, ExperimentConfig, ReportFormat,
};
use hatebench::metrics::{evaluate, format_rounded, to_f64, Average, EvalReport, Ratio};
use hatebench::models::{
    objective, train_forest, train_linear, train_tree, FeatureSubset, Hyperparams, LinearKind, LinearModel,
    ModelKind, Provenance, TrainedModel,
};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn manifest() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn fixtures() -> PathBuf {
    manifest().join("fixtures")
}

fn ratio(n: i64, d: i64) -> Ratio {
    Ratio::new(BigInt::from(n), BigInt::from(d))
}

fn synthetic_split(n: usize, schema: &LabelSchema, seed: u64) -> DatasetSplit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = schema.len();
    let docs = (0..n)
        .map(|i| Document {
            id: format!("d{i}"),
            text: format!("doc {i}"),
            label: Some(rng.random_range(0..k)),
        })
        .collect();
    DatasetSplit::new(SplitKind::Train, schema.clone(), docs).unwrap()
}

fn provenance(schema: &LabelSchema, dim: usize, hp: Hyperparams) -> Provenance {
    Provenance {
        schema: schema.clone(),
        feature_config_id: "synthetic".into(),
        feature_dim: dim,
        hyperparams: hp,
        train_digest: "synthetic".into(),
    }
}

fn empty_rows(n: usize) -> FeatureMatrix {
    FeatureMatrix::from_rows(1, vec![SparseVector::zeros(1); n]).unwrap()
}

fn downsampling_arithmetic() {
    let third = Fraction::new(1, 3).unwrap();
    let schema = LabelSchema::task_1a();
    for (n, want) in [(35_522, 11_840), (2_512, 837), (10_200, 3_400)] {
        let split = synthetic_split(n, &schema, n as u64);
        for stratified in [true, false] {
            let out = downsample(&split, third, 1, stratified).unwrap();
            assert_eq!(out.len(), want, "n={n} stratified={stratified}");
        }
    }
}

fn random_baseline() {
    for (schema, expected) in [(LabelSchema::task_1a(), 1.0 / 6.0), (LabelSchema::task_1b(), 1.0 / 5.0)] {
        let k = schema.len();
        let n = 10_000;
        let gold: Vec<usize> = (0..n).map(|i| (i * 7 + i / 13) % k).collect();
        let hp = Hyperparams {
            seed: 2025,
            ..Hyperparams::default()
        };
        let model = TrainedModel::train(ModelKind::Random, &empty_rows(n), &gold, provenance(&schema, 1, hp)).unwrap();
        let pred = model.predict(&empty_rows(n)).unwrap();
        let acc = to_f64(&evaluate(&gold, &pred, &schema).unwrap().accuracy);
        assert!((acc - expected).abs() <= 0.02, "k={k} accuracy {acc}");
    }
}

fn majority_identities() {
    let schema = LabelSchema::task_1a();
    let none = schema.index_of("None").unwrap();
    // 57 None, the other 43 spread over the five hate classes.
    let gold: Vec<usize> = (0..100).map(|i| if i < 57 { none } else { i % 5 }).collect();
    let model = TrainedModel::train(
        ModelKind::Majority,
        &empty_rows(100),
        &gold,
        provenance(&schema, 1, Hyperparams::default()),
    )
    .unwrap();
    let pred = model.predict(&empty_rows(100)).unwrap();
    assert!(pred.iter().all(|&p| p == none));
    let r = evaluate(&gold, &pred, &schema).unwrap();
    let p = ratio(57, 100);
    assert_eq!(r.accuracy, p);
    assert_eq!(r.aggregate(Average::Micro).f1, p);
    assert_eq!(r.aggregate(Average::Weighted).precision, &p * &p);
    assert_eq!(r.aggregate(Average::Weighted).precision, ratio(3249, 10_000));
    // p² = 0.3249 rounds to 0.32. The reported (0.57, 0.33) pair is still
    // consistent with a majority baseline: it needs p in [0.5701, 0.575).
    assert_eq!(format_rounded(&(&p * &p), 2), "0.32");
    let q = ratio(572, 1000);
    assert_eq!(format_rounded(&q, 2), "0.57");
    assert_eq!(format_rounded(&(&q * &q), 2), "0.33");
    assert_eq!(format_rounded(&ratio(5700, 10_000).pow(2), 2), "0.32");
}

/// Counts TP/FP/FN by scanning the pairs once per class.
fn brute_force(gold: &[usize], pred: &[usize], k: usize) -> Vec<f64> {
    let div = |a: f64, b: f64| if b == 0.0 { 0.0 } else { a / b };
    let n = gold.len() as f64;
    let mut out = Vec::new();
    let (mut tp_all, mut fp_all, mut fn_all) = (0.0, 0.0, 0.0);
    let (mut mp, mut mr, mut mf, mut wp, mut wr, mut wf) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for c in 0..k {
        let (mut tp, mut fp, mut fne) = (0.0, 0.0, 0.0);
        for (&g, &p) in gold.iter().zip(pred) {
            if p == c && g == c {
                tp += 1.0;
            } else if p == c {
                fp += 1.0;
            } else if g == c {
                fne += 1.0;
            }
        }
        let prec = div(tp, tp + fp);
        let rec = div(tp, tp + fne);
        let f1 = div(2.0 * prec * rec, prec + rec);
        let support = tp + fne;
        out.extend([prec, rec, f1]);
        tp_all += tp;
        fp_all += fp;
        fn_all += fne;
        mp += prec / k as f64;
        mr += rec / k as f64;
        mf += f1 / k as f64;
        wp += prec * support / n;
        wr += rec * support / n;
        wf += f1 * support / n;
    }
    let acc = gold.iter().zip(pred).filter(|(g, p)| g == p).count() as f64 / n;
    let mip = div(tp_all, tp_all + fp_all);
    let mir = div(tp_all, tp_all + fn_all);
    let mif = div(2.0 * mip * mir, mip + mir);
    out.extend([acc, mip, mir, mif, mp, mr, mf, wp, wr, wf]);
    out
}

fn report_values(r: &EvalReport) -> Vec<f64> {
    let mut out = Vec::new();
    for c in &r.per_class {
        out.extend([to_f64(&c.precision), to_f64(&c.recall), to_f64(&c.f1)]);
    }
    out.push(to_f64(&r.accuracy));
    for mode in [Average::Micro, Average::Macro, Average::Weighted] {
        let a = r.aggregate(mode);
        out.extend([to_f64(&a.precision), to_f64(&a.recall), to_f64(&a.f1)]);
    }
    out
}

fn random_pair(rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<usize>, usize) {
    let k = rng.random_range(1..=6);
    let n = rng.random_range(1..=50);
    let gold = (0..n).map(|_| rng.random_range(0..k)).collect();
    let pred = (0..n).map(|_| rng.random_range(0..k)).collect();
    (gold, pred, k)
}

fn schema_of(k: usize) -> LabelSchema {
    LabelSchema::new("R", (0..k).map(|c| format!("c{c}")).collect()).unwrap()
}

fn metric_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for case in 0..1000 {
        let (gold, pred, k) = random_pair(&mut rng);
        let got = report_values(&evaluate(&gold, &pred, &schema_of(k)).unwrap());
        let want = brute_force(&gold, &pred, k);
        assert_eq!(got.len(), want.len());
        for (i, (a, b)) in got.iter().zip(&want).enumerate() {
            assert!((a - b).abs() <= 1e-12, "case {case} value {i}: {a} vs {b}");
        }
    }
}

fn micro_weighted_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let (gold, pred, k) = random_pair(&mut rng);
        let r = evaluate(&gold, &pred, &schema_of(k)).unwrap();
        let micro = r.aggregate(Average::Micro);
        assert_eq!(micro.precision, r.accuracy);
        assert_eq!(micro.recall, r.accuracy);
        assert_eq!(micro.f1, r.accuracy);
        assert_eq!(r.aggregate(Average::Weighted).recall, r.accuracy);
    }
}

fn random_instance(rng: &mut ChaCha8Rng, kind: LinearKind) -> (LinearModel, Vec<SparseVector>, Vec<usize>) {
    let k = rng.random_range(2..=4);
    let dim = rng.random_range(2..=5);
    let n = rng.random_range(1..=6);
    let mut model = LinearModel::zeros(kind, k, dim);
    for row in &mut model.weights {
        for w in row.iter_mut() {
            *w = rng.random_range(-1.0..1.0);
        }
    }
    for b in &mut model.bias {
        *b = rng.random_range(-1.0..1.0);
    }
    let rows = (0..n)
        .map(|_| {
            let dense: Vec<f64> = (0..dim)
                .map(|_| if rng.random_bool(0.6) { rng.random_range(-2.0..2.0) } else { 0.0 })
                .collect();
            SparseVector::from_dense(&dense)
        })
        .collect();
    let labels = (0..n).map(|_| rng.random_range(0..k)).collect();
    (model, rows, labels)
}

/// Hinge margins this close to 1 sit on a kink where finite differences
/// are not defined.
fn near_kink(model: &LinearModel, rows: &[SparseVector], labels: &[usize]) -> bool {
    rows.iter().zip(labels).any(|(x, &y)| {
        model
            .decision(x)
            .iter()
            .enumerate()
            .any(|(c, f)| ((if c == y { 1.0 } else { -1.0 }) * f - 1.0).abs() < 1e-3)
    })
}

fn gradient_check() {
    let h = 1e-5;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-6 * a.abs().max(b.abs()).max(1.0);
    for kind in [LinearKind::LogReg, LinearKind::Svm] {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut checked = 0;
        while checked < 100 {
            let (model, rows, labels) = random_instance(&mut rng, kind);
            if kind == LinearKind::Svm && near_kink(&model, &rows, &labels) {
                continue;
            }
            let l2 = rng.random_range(0.0..0.1);
            let (_, grad) = objective(&model, &rows, &labels, l2);
            let eval = |m: &LinearModel| objective(m, &rows, &labels, l2).0;
            for c in 0..model.n_classes() {
                for j in 0..model.dim() {
                    let (mut up, mut down) = (model.clone(), model.clone());
                    up.weights[c][j] += h;
                    down.weights[c][j] -= h;
                    let numeric = (eval(&up) - eval(&down)) / (2.0 * h);
                    assert!(close(grad.weights[c][j], numeric), "{kind:?} w[{c}][{j}]");
                }
                let (mut up, mut down) = (model.clone(), model.clone());
                up.bias[c] += h;
                down.bias[c] -= h;
                let numeric = (eval(&up) - eval(&down)) / (2.0 * h);
                assert!(close(grad.bias[c], numeric), "{kind:?} b[{c}]");
            }
            checked += 1;
        }
    }
}

/// Three classes; each document carries its class indicator plus shared noise.
fn toy_corpus() -> (FeatureMatrix, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (k, dim, n) = (3, 8, 45);
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for i in 0..n {
        let c = i % k;
        let mut dense = vec![0.0; dim];
        dense[c] = rng.random_range(1..=3) as f64;
        for v in dense.iter_mut().skip(k) {
            if rng.random_bool(0.3) {
                *v = 1.0;
            }
        }
        rows.push(SparseVector::from_dense(&dense));
        y.push(c);
    }
    (FeatureMatrix::from_rows(dim, rows).unwrap(), y)
}

fn train_accuracy(pred: &[usize], y: &[usize]) -> f64 {
    pred.iter().zip(y).filter(|(a, b)| a == b).count() as f64 / y.len() as f64
}

fn optimization() {
    gradient_check();

    let two = FeatureMatrix::from_rows(
        2,
        (0..10)
            .map(|i| SparseVector::from_dense(if i % 2 == 0 { &[1.0, 0.0] } else { &[0.0, 1.0] }))
            .collect(),
    )
    .unwrap();
    let two_y: Vec<usize> = (0..10).map(|i| i % 2).collect();
    let (toy, toy_y) = toy_corpus();
    let hp = Hyperparams::default();
    for kind in [LinearKind::LogReg, LinearKind::Svm] {
        for (x, y, k) in [(&two, &two_y, 2), (&toy, &toy_y, 3)] {
            let fit = train_linear(kind, x, y, k, &hp).unwrap();
            let pred: Vec<usize> = x.rows().iter().map(|r| fit.model.predict_row(r)).collect();
            let acc = train_accuracy(&pred, y);
            assert!(acc >= 0.95, "{kind:?} k={k} accuracy {acc}");
        }
    }

    let full_batch = Hyperparams {
        learning_rate: 0.01,
        batch_size: toy_y.len(),
        epochs: 50,
        ..Hyperparams::default()
    };
    let fit = train_linear(LinearKind::LogReg, &toy, &toy_y, 3, &full_batch).unwrap();
    for w in fit.loss_history.windows(2) {
        assert!(w[1] <= w[0], "loss rose from {} to {}", w[0], w[1]);
    }
}

fn xor() -> (FeatureMatrix, Vec<usize>) {
    let pts = [([0.0, 0.0], 0), ([0.0, 1.0], 1), ([1.0, 0.0], 1), ([1.0, 1.0], 0)];
    let rows = pts.iter().cycle().take(8).map(|(p, _)| SparseVector::from_dense(p)).collect();
    let y = pts.iter().cycle().take(8).map(|(_, c)| *c).collect();
    (FeatureMatrix::from_rows(2, rows).unwrap(), y)
}

/// Best training accuracy of any depth-1 tree: every feature, every
/// threshold between distinct values, every labeling of the two leaves.
fn best_stump_accuracy(x: &FeatureMatrix, y: &[usize], k: usize) -> f64 {
    let mut best = 0.0f64;
    for f in 0..x.dim() {
        let mut values: Vec<f64> = x.rows().iter().map(|r| r.get(f)).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for pair in values.windows(2) {
            let t = (pair[0] + pair[1]) / 2.0;
            for left in 0..k {
                for right in 0..k {
                    let pred: Vec<usize> = x
                        .rows()
                        .iter()
                        .map(|r| if r.get(f) <= t { left } else { right })
                        .collect();
                    best = best.max(train_accuracy(&pred, y));
                }
            }
        }
    }
    best
}

fn tree_and_forest() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let rows: Vec<SparseVector> = (0..60)
        .map(|i| {
            let mut dense: Vec<f64> = (0..6).map(|_| rng.random_range(0..3) as f64).collect();
            dense.push(i as f64);
            SparseVector::from_dense(&dense)
        })
        .collect();
    let y: Vec<usize> = (0..60).map(|_| rng.random_range(0..4)).collect();
    let x = FeatureMatrix::from_rows(7, rows).unwrap();
    let unlimited = Hyperparams {
        tree_max_depth: None,
        ..Hyperparams::default()
    };
    let tree = train_tree(&x, &y, 4, &unlimited).unwrap();
    let pred: Vec<usize> = x.rows().iter().map(|r| tree.predict_row(r)).collect();
    assert_eq!(train_accuracy(&pred, &y), 1.0);

    let (xx, xy) = xor();
    assert!(best_stump_accuracy(&xx, &xy, 2) < 1.0);
    let depth2 = Hyperparams {
        tree_max_depth: Some(2),
        ..Hyperparams::default()
    };
    let t2 = train_tree(&xx, &xy, 2, &depth2).unwrap();
    let pred: Vec<usize> = xx.rows().iter().map(|r| t2.predict_row(r)).collect();
    assert_eq!(train_accuracy(&pred, &xy), 1.0);
    assert!(t2.depth() <= 2);

    let single = Hyperparams {
        forest_n_trees: 1,
        forest_bootstrap: false,
        forest_feature_fraction: FeatureSubset::Fraction(1.0),
        ..Hyperparams::default()
    };
    let forest = train_forest(&x, &y, 4, &single).unwrap();
    let tree = train_tree(&x, &y, 4, &single).unwrap();
    let probes: Vec<SparseVector> = (0..200)
        .map(|_| SparseVector::from_dense(&(0..7).map(|_| rng.random_range(0.0..60.0)).collect::<Vec<f64>>()))
        .collect();
    for r in x.rows().iter().chain(&probes) {
        assert_eq!(forest.predict_row(r), tree.predict_row(r));
    }
}

fn fixture_config(task: &str, kind: ModelKind) -> ExperimentConfig {
    ExperimentConfig::load(fixtures().join(format!("{task}.cfg")), &[format!("model.kind={kind}")]).unwrap()
}

fn determinism() {
    let tmp = tempfile::tempdir().unwrap();
    for kind in [ModelKind::Svm, ModelKind::Forest] {
        let cfg = fixture_config("1a", kind);
        let a = run_experiment(&cfg, &tmp.path().join(format!("{kind}-a"))).unwrap();
        let b = run_experiment(&cfg, &tmp.path().join(format!("{kind}-b"))).unwrap();
        assert_eq!(a.record.digest(), b.record.digest());
        for name in ["report_dev.json", "report_test.json", "report_test.md", "model.json"] {
            let fa = fs::read(a.dir.join(name)).unwrap();
            let fb = fs::read(b.dir.join(name)).unwrap();
            assert!(fa == fb, "{kind} {name} differs");
        }
    }
    let split = synthetic_split(1000, &LabelSchema::task_1a(), 3);
    let third = Fraction::new(1, 3).unwrap();
    let a = format_split(&downsample(&split, third, 42, true).unwrap(), SplitFormat::Tsv).unwrap();
    let b = format_split(&downsample(&split, third, 42, true).unwrap(), SplitFormat::Tsv).unwrap();
    assert_eq!(a, b);
}

fn check_table_shape(md: &str, n_models: usize, n_classes: usize) {
    let lines: Vec<&str> = md.lines().collect();
    assert_eq!(
        lines[0],
        "| Model | Accuracy | Precision | Recall | Weighted-F1 | Micro-F1 | Macro-F1 |"
    );
    let rows = &lines[2..2 + n_models];
    for (row, kind) in rows.iter().zip(ModelKind::ALL) {
        assert!(row.starts_with(&format!("| {} |", kind.label())), "{row}");
    }
    for col in 1..=6 {
        assert!(
            rows.iter().any(|r| r.split('|').nth(col + 1).unwrap().contains("**")),
            "column {col} has no bold cell"
        );
    }
    assert_eq!(lines[2 + n_models], "");
    assert_eq!(lines[3 + n_models], "| Model | Class | Precision | Recall | F1-score |");
    assert_eq!(lines.len(), 5 + n_models + n_models * n_classes);
}

fn end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    let bless = std::env::var_os("HATEBENCH_BLESS").is_some();
    for task in ["1a", "1b"] {
        let mut entries = Vec::new();
        for kind in ModelKind::ALL {
            let cfg = fixture_config(task, kind);
            let out = run_experiment(&cfg, &tmp.path().join(format!("{task}-{kind}"))).unwrap();
            let test = out.test_report.clone().unwrap();
            match kind {
                ModelKind::Majority => {
                    let split = hatebench::corpus::load_split(
                        cfg.resolve(cfg.data.test.as_deref().unwrap()),
                        SplitFormat::Tsv,
                        SplitKind::Test,
                        &cfg.schema().unwrap(),
                        true,
                    )
                    .unwrap();
                    let dist = class_distribution(&split).unwrap();
                    let top = dist.values().map(|s| s.count).max().unwrap();
                    let prevalence = ratio(top as i64, split.len() as i64);
                    assert_eq!(test.accuracy, prevalence);
                    assert_eq!(test.aggregate(Average::Micro).f1, prevalence);
                }
                ModelKind::Tree => assert_eq!(out.train_report.accuracy, ratio(1, 1)),
                _ => {}
            }
            entries.push(ComparisonEntry {
                model: kind.label().to_string(),
                report: test,
            });
        }
        let md = emit_comparison(&entries, ReportFormat::Markdown, true).unwrap();
        check_table_shape(&md, 6, entries[0].report.schema.len());
        let golden = manifest().join("tests/golden").join(format!("comparison_{task}.md"));
        if bless {
            fs::create_dir_all(golden.parent().unwrap()).unwrap();
            fs::write(&golden, &md).unwrap();
        }
        let want = fs::read_to_string(&golden).unwrap();
        assert!(md == want, "task {task} table differs from {}\n{md}", golden.display());
    }
}

fn run_score(pred: &Path) -> (i32, String) {
    let dir = fixtures().join("scoring");
    let out = Command::new(env!("CARGO_BIN_EXE_hatebench"))
        .args(["score", "--task", "S", "--schema"])
        .arg(dir.join("schema.txt"))
        .arg("--gold")
        .arg(dir.join("gold.tsv"))
        .arg("--pred")
        .arg(pred)
        .output()
        .unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn external_scoring() {
    let dir = fixtures().join("scoring");
    let schema = LabelSchema::from_file("S", dir.join("schema.txt")).unwrap();
    let r = score_predictions(&dir.join("pred.tsv"), &dir.join("gold.tsv"), SplitFormat::Tsv, &schema).unwrap();
    assert_eq!(r.confusion.cells(), &[vec![2, 1], vec![1, 2]]);
    let two_thirds = ratio(2, 3);
    assert_eq!(r.accuracy, two_thirds);
    for c in &r.per_class {
        assert_eq!((&c.precision, &c.recall, &c.f1), (&two_thirds, &two_thirds, &two_thirds));
    }

    let (code, _) = run_score(&dir.join("pred.tsv"));
    assert_eq!(code, 0);
    let (code, err) = run_score(&dir.join("pred_missing.tsv"));
    assert_eq!(code, 2);
    assert!(err.contains("missing ids: s5"), "{err}");
    let (code, err) = run_score(&dir.join("pred_unknown.tsv"));
    assert_eq!(code, 2);
    assert!(err.contains("s3") && err.contains("maybe"), "{err}");
}

type Criterion = (&'static str, Duration, fn());

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("downsampling arithmetic", Duration::from_secs(1), downsampling_arithmetic),
        ("random-baseline identity", Duration::from_secs(1), random_baseline),
        ("majority-baseline identities", Duration::from_secs(1), majority_identities),
        ("metric oracle equivalence", Duration::from_secs(10), metric_oracle),
        ("micro/weighted identities", Duration::from_secs(5), micro_weighted_identities),
        ("optimization correctness", Duration::from_secs(30), optimization),
        ("tree/forest properties", Duration::from_secs(10), tree_and_forest),
        ("determinism", Duration::from_secs(30), determinism),
        ("end-to-end fixture pipeline", Duration::from_secs(60), end_to_end),
        ("external scoring boundary", Duration::from_secs(1), external_scoring),
    ];
    panic::set_hook(Box::new(|info| eprintln!("    {info}")));
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check));
        let elapsed = start.elapsed();
        let status = match outcome {
            Err(_) => "FAIL",
            Ok(()) if elapsed > *budget => "FAIL (over time budget)",
            Ok(()) => "PASS",
        };
        if status != "PASS" {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<30} {status}  {:.3}s / {}s",
            i + 1,
            name,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hatebench::corpus::{downsample, load_split, write_split, Fraction, LabelSchema, SplitFormat, SplitKind};
use hatebench::harness::pipeline::{format_predictions, report_file};
use hatebench::harness::{
    emit_comparison, run_experiment, score_predictions, train_experiment, ComparisonEntry, ExperimentConfig,
    LoadedRun, ReportFormat, RunOutcome, RunRecord,
};
use hatebench::metrics::EvalReport;
use hatebench::models::ModelKind;
use hatebench::preprocess::{preprocess_document, CleanConfig, StopwordSet};
use hatebench::Error;

const OUT_ENV: &str = "HATEBENCH_OUT";

#[derive(Parser)]
#[command(name = "hatebench", version, about = "Bangla hate-speech classification baselines")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Experiment config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for models and downsampling.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Task id (1A or 1B).
    #[arg(long, global = true)]
    task: Option<String>,
    /// Output path. Falls back to $HATEBENCH_OUT, then output.dir in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Config override, `key=value`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Train on the configured splits and evaluate on dev and test.
    Run,
    /// Train and save a model without evaluating.
    Train,
    /// Evaluate a saved run on a labeled split.
    Eval {
        /// Run directory written by `run` or `train`.
        #[arg(long)]
        run: PathBuf,
        /// Labeled split to evaluate on.
        #[arg(long)]
        input: PathBuf,
        /// Split file format; guessed from the extension when omitted.
        #[arg(long)]
        format: Option<SplitFormat>,
        /// Also write `id<TAB>label` predictions here.
        #[arg(long)]
        predictions: Option<PathBuf>,
    },
    /// Score an `id<TAB>label` prediction file against gold labels.
    Score {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        /// Gold file format; guessed from the extension when omitted.
        #[arg(long)]
        format: Option<SplitFormat>,
        /// Label schema file. The built-in schema for --task when omitted.
        #[arg(long)]
        schema: Option<PathBuf>,
    },
    /// Draw a reproducible subset of a labeled split.
    Downsample {
        #[arg(long)]
        input: PathBuf,
        /// Fraction to keep, e.g. `1/3` or `0.5`.
        #[arg(long)]
        fraction: Fraction,
        /// Sample uniformly instead of per class.
        #[arg(long)]
        no_stratify: bool,
        #[arg(long)]
        format: Option<SplitFormat>,
        #[arg(long)]
        schema: Option<PathBuf>,
    },
    /// Clean and tokenize a split, writing `id<TAB>tokens` lines.
    Prep {
        #[arg(long)]
        input: PathBuf,
        /// Input has only id and text columns.
        #[arg(long)]
        unlabeled: bool,
        #[arg(long)]
        format: Option<SplitFormat>,
    },
    /// Compare runs or saved reports in one table.
    Report {
        /// Run directories or report JSON files.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Which split's report to read from run directories.
        #[arg(long, default_value = "test")]
        split: String,
        #[arg(long, default_value = "markdown")]
        format: ReportFormat,
        /// Add the per-class table.
        #[arg(long)]
        class_wise: bool,
    },
}

enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_data_error() { 2 } else { 3 })
        }
    }
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Run => experiment(g, true),
        Command::Train => experiment(g, false),
        Command::Eval {
            run,
            input,
            format,
            predictions,
        } => eval(g, run, input, *format, predictions.as_deref()),
        Command::Score {
            pred,
            gold,
            format,
            schema,
        } => {
            let schema = schema_for(g, schema.as_deref())?;
            let format = format.unwrap_or_else(|| SplitFormat::from_path(gold));
            let report = score_predictions(pred, gold, format, &schema)?;
            emit_report(g, "predictions", &report)
        }
        Command::Downsample {
            input,
            fraction,
            no_stratify,
            format,
            schema,
        } => {
            let out = g.out.as_ref().ok_or_else(|| Failure::Usage("downsample needs --out".into()))?;
            let schema = schema_for(g, schema.as_deref())?;
            let format = format.unwrap_or_else(|| SplitFormat::from_path(input));
            let split = load_split(input, format, SplitKind::Train, &schema, true)?;
            let small = downsample(&split, *fraction, g.seed.unwrap_or(0), !no_stratify)?;
            write_split(&small, out, SplitFormat::from_path(out))?;
            eprintln!("kept {} of {} documents", small.len(), split.len());
            Ok(())
        }
        Command::Prep {
            input,
            unlabeled,
            format,
        } => prep(g, input, *unlabeled, *format),
        Command::Report {
            inputs,
            split,
            format,
            class_wise,
        } => {
            let entries = inputs
                .iter()
                .map(|p| comparison_entry(p, split))
                .collect::<Result<Vec<_>, _>>()?;
            let text = emit_comparison(&entries, *format, *class_wise)?;
            output(g.out.as_deref(), &text)
        }
    }
}

fn load_config(g: &Global) -> CliResult<ExperimentConfig> {
    let path = g
        .config
        .as_ref()
        .ok_or_else(|| Failure::Usage("this command needs --config".into()))?;
    let mut overrides = Vec::new();
    if let Some(task) = &g.task {
        overrides.push(format!("task={task}"));
    }
    if let Some(seed) = g.seed {
        overrides.push(format!("model.seed={seed}"));
        overrides.push(format!("downsample.seed={seed}"));
    }
    overrides.extend(g.overrides.iter().cloned());
    Ok(ExperimentConfig::load(path, &overrides)?)
}

fn schema_for(g: &Global, file: Option<&Path>) -> CliResult<LabelSchema> {
    let task = match (&g.task, &g.config) {
        (Some(t), _) => t.to_ascii_uppercase(),
        (None, Some(_)) => load_config(g)?.task_id,
        (None, None) => return Err(Failure::Usage("--task is required".into())),
    };
    Ok(match file {
        Some(p) => LabelSchema::from_file(&task, p)?,
        None => LabelSchema::builtin(&task)?,
    })
}

fn experiment(g: &Global, evaluate: bool) -> CliResult<()> {
    let cfg = load_config(g)?;
    let env_out = std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
    let out = match (&g.out, env_out, &cfg.output_dir) {
        (Some(o), _, _) => o.clone(),
        (None, Some(e), _) => e,
        (None, None, Some(d)) => cfg.resolve(d),
        (None, None, None) => {
            return Err(Failure::Usage("no output directory: pass --out or set output.dir".into()))
        }
    };
    let outcome: RunOutcome = if evaluate {
        run_experiment(&cfg, &out)?
    } else {
        train_experiment(&cfg, &out)?
    };
    let label = cfg.model.label();
    for (name, report) in [("dev", &outcome.dev_report), ("test", &outcome.test_report)] {
        if let Some(r) = report {
            println!("## {label} on {name} (n={})\n", r.n());
            print!("{}", single_table(label, r)?);
            println!();
        }
    }
    println!("run written to {}", out.display());
    println!("record digest {}", outcome.record.digest());
    Ok(())
}

fn single_table(label: &str, report: &EvalReport) -> CliResult<String> {
    Ok(emit_comparison(
        &[ComparisonEntry {
            model: label.to_string(),
            report: report.clone(),
        }],
        ReportFormat::Markdown,
        true,
    )?)
}

fn emit_report(g: &Global, label: &str, report: &EvalReport) -> CliResult<()> {
    print!("{}", single_table(label, report)?);
    if let Some(out) = &g.out {
        fs::write(out, report.to_json()).map_err(|e| Error::io(out, e))?;
    }
    Ok(())
}

fn eval(g: &Global, run: &Path, input: &Path, format: Option<SplitFormat>, predictions: Option<&Path>) -> CliResult<()> {
    let loaded = LoadedRun::load(run)?;
    if let Some(task) = &g.task {
        let model_task = loaded.schema().task_id();
        if !task.eq_ignore_ascii_case(model_task) {
            return Err(Failure::Run(Error::Validation(format!(
                "schema mismatch: model was trained for task {model_task}, not {task}"
            ))));
        }
    }
    let format = format.unwrap_or_else(|| SplitFormat::from_path(input));
    if let Some(p) = predictions {
        let (split, pred) = loaded.predict_file(input, format, true)?;
        fs::write(p, format_predictions(&split, &pred)?).map_err(|e| Error::io(p, e))?;
    }
    let report = loaded.evaluate_file(input, format)?;
    let label = loaded
        .record
        .model
        .parse::<ModelKind>()
        .map(|k| k.label().to_string())
        .unwrap_or_else(|_| loaded.record.model.clone());
    emit_report(g, &label, &report)
}

fn prep(g: &Global, input: &Path, unlabeled: bool, format: Option<SplitFormat>) -> CliResult<()> {
    let (clean, stops) = match &g.config {
        Some(_) => {
            let cfg = load_config(g)?;
            (cfg.clean, cfg.stopwords()?)
        }
        None => {
            let clean = CleanConfig::default();
            (clean, StopwordSet::bangla_default().normalized(&clean))
        }
    };
    let schema = if unlabeled {
        g.task
            .as_deref()
            .map(LabelSchema::builtin)
            .transpose()?
            .unwrap_or_else(LabelSchema::task_1a)
    } else {
        schema_for(g, None)?
    };
    let format = format.unwrap_or_else(|| SplitFormat::from_path(input));
    let split = load_split(input, format, SplitKind::Train, &schema, !unlabeled)?;
    let mut text = String::new();
    for doc in &split.documents {
        let tokens = preprocess_document(doc, &clean, &stops);
        text.push_str(&doc.id);
        text.push('\t');
        text.push_str(&tokens.tokens().join(" "));
        text.push('\n');
    }
    output(g.out.as_deref(), &text)
}

fn comparison_entry(path: &Path, split: &str) -> CliResult<ComparisonEntry> {
    if path.is_dir() {
        let record = RunRecord::load(path)?;
        let kind = match split {
            "train" => SplitKind::Train,
            "dev" => SplitKind::Dev,
            "test" => SplitKind::Test,
            other => return Err(Failure::Usage(format!("unknown split {other:?}"))),
        };
        let file = path.join(report_file(kind, "json"));
        let text = fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
        let model = record
            .model
            .parse::<ModelKind>()
            .map(|k| k.label().to_string())
            .unwrap_or(record.model);
        Ok(ComparisonEntry {
            model,
            report: EvalReport::from_json(&text)?,
        })
    } else {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Ok(ComparisonEntry {
            model,
            report: EvalReport::from_json(&text)?,
        })
    }
}

fn output(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Error::io(p, e).into()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

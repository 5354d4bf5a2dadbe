use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::{format_rounded, to_f64, Average, EvalReport, Ratio};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "json" | "structured" => Ok(ReportFormat::Json),
            other => Err(Error::Argument(format!("unknown report format {other:?}"))),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Markdown => "markdown",
            ReportFormat::Json => "json",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComparisonEntry {
    pub model: String,
    pub report: EvalReport,
}

pub const SUMMARY_COLUMNS: [&str; 6] = [
    "Accuracy",
    "Precision",
    "Recall",
    "Weighted-F1",
    "Micro-F1",
    "Macro-F1",
];

/// Summary columns in table order. Precision and recall are weighted.
pub fn summary_values(r: &EvalReport) -> [&Ratio; 6] {
    let w = r.aggregate(Average::Weighted);
    [
        &r.accuracy,
        &w.precision,
        &w.recall,
        &w.f1,
        &r.aggregate(Average::Micro).f1,
        &r.aggregate(Average::Macro).f1,
    ]
}

#[derive(Serialize)]
struct JsonClassRow<'a> {
    class: &'a str,
    precision: f64,
    recall: f64,
    f1: f64,
    support: u64,
}

#[derive(Serialize)]
struct JsonRow<'a> {
    model: &'a str,
    n: u64,
    accuracy: f64,
    precision: f64,
    recall: f64,
    weighted_f1: f64,
    micro_f1: f64,
    macro_f1: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    class_wise: Option<Vec<JsonClassRow<'a>>>,
}

#[derive(Serialize)]
struct JsonTable<'a> {
    task_id: &'a str,
    classes: &'a [String],
    models: Vec<JsonRow<'a>>,
}

/// Renders a comparison of several models evaluated on the same schema.
///
/// Markdown output rounds to two decimals and bolds the best value in each
/// summary column, every tied model included. Best is decided on exact
/// values, not rounded ones.
pub fn emit_comparison(entries: &[ComparisonEntry], format: ReportFormat, class_wise: bool) -> Result<String> {
    let first = entries
        .first()
        .ok_or_else(|| Error::Argument("nothing to compare".into()))?;
    let schema = &first.report.schema;
    if let Some(bad) = entries.iter().find(|e| &e.report.schema != schema) {
        return Err(Error::Argument(format!(
            "cannot compare {} (task {}) with {} (task {})",
            bad.model,
            bad.report.schema.task_id(),
            first.model,
            schema.task_id()
        )));
    }
    match format {
        ReportFormat::Markdown => Ok(markdown(entries, class_wise)),
        ReportFormat::Json => {
            let models = entries
                .iter()
                .map(|e| {
                    let [acc, p, r, wf, mif, maf] = summary_values(&e.report).map(to_f64);
                    JsonRow {
                        model: &e.model,
                        n: e.report.n(),
                        accuracy: acc,
                        precision: p,
                        recall: r,
                        weighted_f1: wf,
                        micro_f1: mif,
                        macro_f1: maf,
                        class_wise: class_wise.then(|| {
                            e.report
                                .per_class
                                .iter()
                                .map(|c| JsonClassRow {
                                    class: &schema.classes()[c.class],
                                    precision: to_f64(&c.precision),
                                    recall: to_f64(&c.recall),
                                    f1: to_f64(&c.f1),
                                    support: c.support,
                                })
                                .collect()
                        }),
                    }
                })
                .collect();
            let table = JsonTable {
                task_id: schema.task_id(),
                classes: schema.classes(),
                models,
            };
            let mut out = serde_json::to_string_pretty(&table).map_err(|e| Error::Validation(e.to_string()))?;
            out.push('\n');
            Ok(out)
        }
    }
}

fn markdown(entries: &[ComparisonEntry], class_wise: bool) -> String {
    let values: Vec<[&Ratio; 6]> = entries.iter().map(|e| summary_values(&e.report)).collect();
    let best: Vec<&Ratio> = (0..6)
        .map(|c| values.iter().map(|v| v[c]).max().expect("non-empty"))
        .collect();

    let mut out = format!("| Model | {} |\n", SUMMARY_COLUMNS.join(" | "));
    out.push_str("| --- |");
    out.push_str(&" ---: |".repeat(SUMMARY_COLUMNS.len()));
    out.push('\n');
    for (e, row) in entries.iter().zip(&values) {
        out.push_str(&format!("| {} |", e.model));
        for (c, v) in row.iter().enumerate() {
            let cell = format_rounded(v, 2);
            if *v == best[c] {
                out.push_str(&format!(" **{cell}** |"));
            } else {
                out.push_str(&format!(" {cell} |"));
            }
        }
        out.push('\n');
    }

    if class_wise {
        out.push_str("\n| Model | Class | Precision | Recall | F1-score |\n");
        out.push_str("| --- | --- | ---: | ---: | ---: |\n");
        for e in entries {
            for (i, c) in e.report.per_class.iter().enumerate() {
                let model = if i == 0 { e.model.as_str() } else { "" };
                out.push_str(&format!(
                    "| {} | {} | {} | {} | {} |\n",
                    model,
                    e.report.schema.classes()[c.class],
                    format_rounded(&c.precision, 2),
                    format_rounded(&c.recall, 2),
                    format_rounded(&c.f1, 2)
                ));
            }
        }
    }
    out
}

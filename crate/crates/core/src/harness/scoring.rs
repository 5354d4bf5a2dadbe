use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use crate::corpus::{load_split, DatasetSplit, LabelSchema, SplitFormat, SplitKind};
use crate::error::{Error, Result};
use crate::metrics::{evaluate, EvalReport};

/// How many offending ids an error message lists before summarizing.
const LIST_LIMIT: usize = 10;

/// Raw `(id, label)` pairs from a prediction file: one `id<TAB>label` per
/// line, blank lines skipped, an optional `id<TAB>label` header.
pub fn parse_predictions(text: &str, origin: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || (i == 0 && line == "id\tlabel") {
            continue;
        }
        let (id, label) = line.split_once('\t').ok_or_else(|| Error::Parse {
            path: origin.to_string(),
            line: i + 1,
            message: "expected id<TAB>label".into(),
        })?;
        if label.contains('\t') {
            return Err(Error::Parse {
                path: origin.to_string(),
                line: i + 1,
                message: "too many columns".into(),
            });
        }
        out.push((id.trim().to_string(), label.trim().to_string()));
    }
    Ok(out)
}

fn listing(kind: &str, items: &[String]) -> String {
    let shown: Vec<&str> = items.iter().take(LIST_LIMIT).map(String::as_str).collect();
    let more = items.len().saturating_sub(LIST_LIMIT);
    let tail = if more > 0 { format!(" and {more} more") } else { String::new() };
    format!("{} {kind}: {}{tail}", items.len(), shown.join(", "))
}

/// Aligns predictions with gold labels by id and evaluates.
///
/// Every gold id must be predicted exactly once with a label from the gold
/// schema. All problems are reported together.
pub fn score_aligned(predictions: &[(String, String)], gold: &DatasetSplit) -> Result<EvalReport> {
    let schema = &gold.schema;
    let gold_ids: BTreeSet<&str> = gold.documents.iter().map(|d| d.id.as_str()).collect();
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut by_id: BTreeMap<&str, usize> = BTreeMap::new();
    let mut duplicate = Vec::new();
    let mut unknown_label = Vec::new();
    let mut unexpected = Vec::new();
    for (id, label) in predictions {
        if !gold_ids.contains(id.as_str()) {
            unexpected.push(id.clone());
            continue;
        }
        if !seen.insert(id) {
            duplicate.push(id.clone());
        }
        match schema.index_of(label) {
            None => unknown_label.push(format!("{id} ({label:?})")),
            Some(c) => {
                by_id.insert(id, c);
            }
        }
    }
    let missing: Vec<String> = gold
        .documents
        .iter()
        .filter(|d| !seen.contains(d.id.as_str()))
        .map(|d| d.id.clone())
        .collect();

    let mut problems = Vec::new();
    if !missing.is_empty() {
        problems.push(listing("missing ids", &missing));
    }
    if !duplicate.is_empty() {
        problems.push(listing("duplicate ids", &duplicate));
    }
    if !unexpected.is_empty() {
        problems.push(listing("ids not in gold", &unexpected));
    }
    if !unknown_label.is_empty() {
        problems.push(listing(
            &format!("labels outside task {} schema", schema.task_id()),
            &unknown_label,
        ));
    }
    if !problems.is_empty() {
        return Err(Error::Scoring(problems.join("; ")));
    }

    let gold_labels = gold.labels()?;
    let pred: Vec<usize> = gold.documents.iter().map(|d| by_id[d.id.as_str()]).collect();
    evaluate(&gold_labels, &pred, schema)
}

/// Scores a prediction file against a labeled gold split file.
pub fn score_predictions(
    predictions: &Path,
    gold: &Path,
    gold_format: SplitFormat,
    schema: &LabelSchema,
) -> Result<EvalReport> {
    let gold = load_split(gold, gold_format, SplitKind::Test, schema, true)?;
    let text = fs::read_to_string(predictions).map_err(|e| Error::io(predictions, e))?;
    let pairs = parse_predictions(&text, &predictions.display().to_string())?;
    score_aligned(&pairs, &gold)
}

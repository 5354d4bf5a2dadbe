//! Labeled comment datasets: label schemas, split files, and seeded
//! downsampling.
//!
//! Split files come in two formats. TSV rows are `id<TAB>text<TAB>label`
//! (no header, label column absent for unlabeled splits); JSONL rows are
//! objects with `id`, `text` and an optional `label`.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const TASK_1A_CLASSES: [&str; 6] = [
    "Abusive",
    "Sexism",
    "Religious Hate",
    "Political Hate",
    "Profane",
    "None",
];

pub const TASK_1B_CLASSES: [&str; 5] = ["None", "Society", "Organization", "Community", "Individual"];

/// The four-target variant of task 1B, without a "None" class.
pub const TASK_1B_TARGETS_ONLY: [&str; 4] = ["Individual", "Organization", "Community", "Society"];

/// Ordered class list of a subtask. Position defines the class index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabelSchema {
    task_id: String,
    classes: Vec<String>,
}

impl LabelSchema {
    pub fn new(task_id: impl Into<String>, classes: Vec<String>) -> Result<Self> {
        let task_id = task_id.into();
        if task_id.is_empty() {
            return Err(Error::Argument("schema task id is empty".into()));
        }
        if classes.is_empty() {
            return Err(Error::Argument(format!("schema {task_id} has no classes")));
        }
        let mut seen = HashSet::new();
        for c in &classes {
            if c.is_empty() {
                return Err(Error::Argument(format!("schema {task_id} has an empty class name")));
            }
            if !seen.insert(c.as_str()) {
                return Err(Error::Argument(format!(
                    "schema {task_id} repeats class {c:?}"
                )));
            }
        }
        Ok(Self { task_id, classes })
    }

    /// Built-in schema for a task id ("1A" or "1B", case-insensitive).
    pub fn builtin(task_id: &str) -> Result<Self> {
        let classes: &[&str] = match task_id.to_ascii_uppercase().as_str() {
            "1A" => &TASK_1A_CLASSES,
            "1B" => &TASK_1B_CLASSES,
            other => return Err(Error::Argument(format!("unknown task id {other:?}"))),
        };
        Self::new(
            task_id.to_ascii_uppercase(),
            classes.iter().map(|s| s.to_string()).collect(),
        )
    }

    pub fn task_1a() -> Self {
        Self::builtin("1A").expect("builtin schema")
    }

    pub fn task_1b() -> Self {
        Self::builtin("1B").expect("builtin schema")
    }

    /// Reads a schema file: one class name per line, order significant.
    /// Blank lines are skipped.
    pub fn from_file(task_id: &str, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let classes = text
            .lines()
            .map(|l| l.trim_end_matches('\r'))
            .filter(|l| !l.trim().is_empty())
            .map(str::to_string)
            .collect();
        Self::new(task_id, classes)
    }

    pub fn to_file_text(&self) -> String {
        let mut out = String::new();
        for c in &self.classes {
            out.push_str(c);
            out.push('\n');
        }
        out
    }

    pub fn task_id(&self) -> &str {
        &self.task_id
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Exact-match lookup.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == name)
    }

    pub fn name(&self, index: usize) -> Option<&str> {
        self.classes.get(index).map(String::as_str)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub label: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SplitKind {
    Train,
    Dev,
    Test,
}

impl fmt::Display for SplitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitKind::Train => "train",
            SplitKind::Dev => "dev",
            SplitKind::Test => "test",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitFormat {
    Tsv,
    Jsonl,
}

impl FromStr for SplitFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tsv" => Ok(SplitFormat::Tsv),
            "jsonl" => Ok(SplitFormat::Jsonl),
            other => Err(Error::Argument(format!("unknown split format {other:?}"))),
        }
    }
}

impl fmt::Display for SplitFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitFormat::Tsv => "tsv",
            SplitFormat::Jsonl => "jsonl",
        })
    }
}

impl SplitFormat {
    /// Guesses the format from a file extension, defaulting to TSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("jsonl") => SplitFormat::Jsonl,
            _ => SplitFormat::Tsv,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetSplit {
    pub kind: SplitKind,
    pub schema: LabelSchema,
    pub documents: Vec<Document>,
}

impl DatasetSplit {
    /// Builds a split, checking id uniqueness and label ranges.
    pub fn new(kind: SplitKind, schema: LabelSchema, documents: Vec<Document>) -> Result<Self> {
        let mut ids = HashSet::with_capacity(documents.len());
        for doc in &documents {
            if doc.id.is_empty() {
                return Err(Error::Validation("document with empty id".into()));
            }
            if !ids.insert(doc.id.as_str()) {
                return Err(Error::Validation(format!("duplicate id {:?}", doc.id)));
            }
            if let Some(l) = doc.label {
                if l >= schema.len() {
                    return Err(Error::Validation(format!(
                        "document {:?} has label index {l} outside schema {}",
                        doc.id,
                        schema.task_id()
                    )));
                }
            }
        }
        Ok(Self {
            kind,
            schema,
            documents,
        })
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn is_labeled(&self) -> bool {
        self.documents.iter().all(|d| d.label.is_some())
    }

    /// Gold labels, or an argument error if any document is unlabeled.
    pub fn labels(&self) -> Result<Vec<usize>> {
        self.documents
            .iter()
            .map(|d| {
                d.label
                    .ok_or_else(|| Error::Argument(format!("document {:?} has no label", d.id)))
            })
            .collect()
    }

    /// SHA-256 over the (id, text, label) triples in order.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.schema.task_id().as_bytes());
        h.update([0]);
        for d in &self.documents {
            h.update(d.id.as_bytes());
            h.update([0x1f]);
            h.update(d.text.as_bytes());
            h.update([0x1f]);
            match d.label {
                Some(l) => h.update(self.schema.classes()[l].as_bytes()),
                None => h.update([0xff]),
            }
            h.update([0x1e]);
        }
        hex::encode(h.finalize())
    }
}

#[derive(Deserialize)]
struct JsonRow {
    id: serde_json::Value,
    text: String,
    #[serde(default)]
    label: Option<String>,
}

#[derive(Serialize)]
struct JsonRowOut<'a> {
    id: &'a str,
    text: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<&'a str>,
}

/// Parses split text already in memory. `origin` names the source in errors.
pub fn parse_split(
    text: &str,
    origin: &str,
    format: SplitFormat,
    kind: SplitKind,
    schema: &LabelSchema,
    labeled: bool,
) -> Result<DatasetSplit> {
    let mut documents = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: origin.to_string(),
            line: line_no,
            message,
        };
        let (id, text, label) = match format {
            SplitFormat::Tsv => {
                let cols: Vec<&str> = line.split('\t').collect();
                let want = if labeled { 3 } else { 2 };
                if cols.len() != want {
                    return Err(parse_err(format!(
                        "expected {want} tab-separated columns, found {}",
                        cols.len()
                    )));
                }
                (
                    cols[0].to_string(),
                    cols[1].to_string(),
                    cols.get(2).map(|s| s.to_string()),
                )
            }
            SplitFormat::Jsonl => {
                let row: JsonRow =
                    serde_json::from_str(line).map_err(|e| parse_err(e.to_string()))?;
                let id = match row.id {
                    serde_json::Value::String(s) => s,
                    serde_json::Value::Number(n) => n.to_string(),
                    other => return Err(parse_err(format!("id must be a string, got {other}"))),
                };
                if labeled && row.label.is_none() {
                    return Err(parse_err("missing label".into()));
                }
                (id, row.text, if labeled { row.label } else { None })
            }
        };
        if id.is_empty() {
            return Err(parse_err("empty id".into()));
        }
        let label = match label {
            Some(name) => Some(schema.index_of(&name).ok_or_else(|| Error::UnknownLabel {
                path: origin.to_string(),
                line: line_no,
                value: name.clone(),
                task: schema.task_id().to_string(),
            })?),
            None => None,
        };
        if !seen.insert(id.clone()) {
            return Err(Error::Validation(format!(
                "{origin}:{line_no}: duplicate id {id:?}"
            )));
        }
        documents.push(Document { id, text, label });
    }
    DatasetSplit::new(kind, schema.clone(), documents)
}

pub fn load_split(
    path: impl AsRef<Path>,
    format: SplitFormat,
    kind: SplitKind,
    schema: &LabelSchema,
    labeled: bool,
) -> Result<DatasetSplit> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_split(
        &text,
        &path.display().to_string(),
        format,
        kind,
        schema,
        labeled,
    )
}

/// Serializes a split. Labels are written when every document has one.
pub fn format_split(split: &DatasetSplit, format: SplitFormat) -> Result<String> {
    let labeled = split.is_labeled();
    let mut out = String::new();
    for d in &split.documents {
        let label = if labeled {
            d.label.map(|l| split.schema.classes()[l].as_str())
        } else {
            None
        };
        match format {
            SplitFormat::Tsv => {
                if d.text.contains(['\t', '\n', '\r']) || d.id.contains(['\t', '\n', '\r']) {
                    return Err(Error::Argument(format!(
                        "document {:?} contains a tab or line break; use JSONL",
                        d.id
                    )));
                }
                out.push_str(&d.id);
                out.push('\t');
                out.push_str(&d.text);
                if let Some(l) = label {
                    out.push('\t');
                    out.push_str(l);
                }
            }
            SplitFormat::Jsonl => {
                let row = JsonRowOut {
                    id: &d.id,
                    text: &d.text,
                    label,
                };
                out.push_str(&serde_json::to_string(&row).expect("string fields serialize"));
            }
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_split(split: &DatasetSplit, path: impl AsRef<Path>, format: SplitFormat) -> Result<()> {
    let path = path.as_ref();
    let text = format_split(split, format)?;
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

/// A rational sampling fraction in (0, 1].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fraction {
    num: u64,
    den: u64,
}

impl Fraction {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num == 0 || num > den {
            return Err(Error::Argument(format!(
                "fraction {num}/{den} is not in (0, 1]"
            )));
        }
        let g = num_integer::gcd(num, den);
        Ok(Self {
            num: num / g,
            den: den / g,
        })
    }

    pub fn one() -> Self {
        Self { num: 1, den: 1 }
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    /// floor(self × n), computed exactly.
    pub fn floor_of(&self, n: usize) -> usize {
        ((n as u128 * self.num as u128) / self.den as u128) as usize
    }

    /// Remainder of self × n, as a numerator over `den`.
    fn remainder_of(&self, n: usize) -> u128 {
        (n as u128 * self.num as u128) % self.den as u128
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Fraction {
    type Err = Error;

    /// Accepts `a/b`, an integer, or a plain decimal such as `0.25`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Argument(format!("cannot parse fraction {s:?}"));
        if let Some((a, b)) = s.split_once('/') {
            let a = a.trim().parse().map_err(|_| bad())?;
            let b = b.trim().parse().map_err(|_| bad())?;
            return Fraction::new(a, b);
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || frac.len() > 18 || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
            let den = 10u64.pow(frac.len() as u32);
            let frac: u64 = frac.parse().map_err(|_| bad())?;
            let num = int
                .checked_mul(den)
                .and_then(|v| v.checked_add(frac))
                .ok_or_else(bad)?;
            return Fraction::new(num, den);
        }
        Fraction::new(s.parse().map_err(|_| bad())?, 1)
    }
}

/// Draws a seeded subset of `floor(fraction × |split|)` documents, keeping
/// their original relative order.
///
/// With `stratified`, each class first receives `floor(fraction × count)`
/// documents; the shortfall against the global target is then filled one
/// document at a time from the classes with the largest remainders, ties going
/// to the smaller class index. Documents are drawn uniformly without
/// replacement within each class.
pub fn downsample(
    split: &DatasetSplit,
    fraction: Fraction,
    seed: u64,
    stratified: bool,
) -> Result<DatasetSplit> {
    let n = split.len();
    let target = fraction.floor_of(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut keep: Vec<usize> = if stratified {
        let labels = split.labels().map_err(|_| {
            Error::Argument("stratified downsampling needs a fully labeled split".into())
        })?;
        let k = split.schema.len();
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
        for (i, &l) in labels.iter().enumerate() {
            members[l].push(i);
        }
        let mut quota: Vec<usize> = members.iter().map(|m| fraction.floor_of(m.len())).collect();
        let mut shortfall = target - quota.iter().sum::<usize>();
        let mut by_remainder: Vec<usize> = (0..k).collect();
        // stable sort keeps class-index order among equal remainders
        by_remainder.sort_by_key(|&c| std::cmp::Reverse(fraction.remainder_of(members[c].len())));
        for c in by_remainder {
            if shortfall == 0 {
                break;
            }
            if quota[c] < members[c].len() {
                quota[c] += 1;
                shortfall -= 1;
            }
        }
        debug_assert_eq!(shortfall, 0);
        let mut keep = Vec::with_capacity(target);
        for (c, m) in members.iter().enumerate() {
            let picked = rand::seq::index::sample(&mut rng, m.len(), quota[c]);
            keep.extend(picked.into_iter().map(|j| m[j]));
        }
        keep
    } else {
        rand::seq::index::sample(&mut rng, n, target).into_vec()
    };
    keep.sort_unstable();

    let documents = keep.into_iter().map(|i| split.documents[i].clone()).collect();
    Ok(DatasetSplit {
        kind: split.kind,
        schema: split.schema.clone(),
        documents,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassShare {
    pub count: usize,
    pub proportion: f64,
}

/// Count and proportion per class that occurs in the split.
pub fn class_distribution(split: &DatasetSplit) -> Result<BTreeMap<usize, ClassShare>> {
    let labels = split
        .labels()
        .map_err(|_| Error::Argument("class distribution needs a labeled split".into()))?;
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for l in labels {
        *counts.entry(l).or_default() += 1;
    }
    let n = split.len() as f64;
    Ok(counts
        .into_iter()
        .map(|(c, count)| {
            (
                c,
                ClassShare {
                    count,
                    proportion: count as f64 / n,
                },
            )
        })
        .collect())
}

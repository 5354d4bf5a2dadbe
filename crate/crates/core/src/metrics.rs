//! Multiclass evaluation: confusion matrix, per-class precision / recall /
//! F1 and micro, macro and support-weighted aggregates.
//!
//! All values are computed as exact rationals and only converted to `f64`
//! (or rounded for display) at the edges.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::corpus::LabelSchema;
use crate::error::{Error, Result};

pub type Ratio = BigRational;

/// Value used for a precision or recall whose denominator is zero.
pub const ZERO_DIVISION: i64 = 0;

fn ratio(num: u64, den: u64) -> Ratio {
    if den == 0 {
        Ratio::from_integer(BigInt::from(ZERO_DIVISION))
    } else {
        Ratio::new(BigInt::from(num), BigInt::from(den))
    }
}

fn harmonic(p: &Ratio, r: &Ratio) -> Ratio {
    let sum = p + r;
    if sum.is_zero() {
        Ratio::zero()
    } else {
        Ratio::from_integer(BigInt::from(2)) * p * r / sum
    }
}

pub fn to_f64(r: &Ratio) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Rounds half away from zero to `decimals` places and formats with exactly
/// that many digits.
pub fn format_rounded(r: &Ratio, decimals: u32) -> String {
    let scale = BigInt::from(10u32).pow(decimals);
    let scaled = r * Ratio::from_integer(scale.clone());
    let rounded = scaled.round().to_integer();
    let neg = rounded < BigInt::zero();
    let abs = if neg { -rounded } else { rounded };
    let int = &abs / &scale;
    let frac = &abs % &scale;
    let sign = if neg { "-" } else { "" };
    if decimals == 0 {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac:0>width$}", width = decimals as usize)
    }
}

/// `cells[i][j]` counts gold class `i` predicted as class `j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    cells: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn from_cells(cells: Vec<Vec<u64>>) -> Result<Self> {
        let k = cells.len();
        if k == 0 || cells.iter().any(|r| r.len() != k) {
            return Err(Error::Argument("confusion matrix must be square and non-empty".into()));
        }
        Ok(Self { cells })
    }

    pub fn k(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[Vec<u64>] {
        &self.cells
    }

    pub fn total(&self) -> u64 {
        self.cells.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.k()).map(|i| self.cells[i][i]).sum()
    }

    pub fn true_positives(&self, c: usize) -> u64 {
        self.cells[c][c]
    }

    pub fn false_positives(&self, c: usize) -> u64 {
        (0..self.k()).filter(|&i| i != c).map(|i| self.cells[i][c]).sum()
    }

    pub fn false_negatives(&self, c: usize) -> u64 {
        (0..self.k()).filter(|&j| j != c).map(|j| self.cells[c][j]).sum()
    }

    pub fn support(&self, c: usize) -> u64 {
        self.cells[c].iter().sum()
    }
}

pub fn confusion(gold: &[usize], pred: &[usize], k: usize) -> Result<ConfusionMatrix> {
    if gold.len() != pred.len() {
        return Err(Error::Argument(format!(
            "{} gold labels but {} predictions",
            gold.len(),
            pred.len()
        )));
    }
    if gold.is_empty() {
        return Err(Error::Argument("nothing to score".into()));
    }
    if k == 0 {
        return Err(Error::Argument("at least one class is required".into()));
    }
    let mut cells = vec![vec![0u64; k]; k];
    for (i, (&g, &p)) in gold.iter().zip(pred).enumerate() {
        if g >= k || p >= k {
            return Err(Error::Argument(format!(
                "pair {i} ({g}, {p}) has a class index outside 0..{k}"
            )));
        }
        cells[g][p] += 1;
    }
    Ok(ConfusionMatrix { cells })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassMetrics {
    pub class: usize,
    pub precision: Ratio,
    pub recall: Ratio,
    pub f1: Ratio,
    pub support: u64,
}

pub fn per_class_metrics(cm: &ConfusionMatrix) -> Vec<ClassMetrics> {
    (0..cm.k())
        .map(|c| {
            let tp = cm.true_positives(c);
            let precision = ratio(tp, tp + cm.false_positives(c));
            let recall = ratio(tp, tp + cm.false_negatives(c));
            let f1 = harmonic(&precision, &recall);
            ClassMetrics {
                class: c,
                precision,
                recall,
                f1,
                support: cm.support(c),
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Average {
    Micro,
    Macro,
    Weighted,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Aggregate {
    pub precision: Ratio,
    pub recall: Ratio,
    pub f1: Ratio,
}

pub fn aggregate(per_class: &[ClassMetrics], cm: &ConfusionMatrix, mode: Average) -> Aggregate {
    match mode {
        Average::Micro => {
            let k = cm.k();
            let tp: u64 = (0..k).map(|c| cm.true_positives(c)).sum();
            let fp: u64 = (0..k).map(|c| cm.false_positives(c)).sum();
            let fn_: u64 = (0..k).map(|c| cm.false_negatives(c)).sum();
            let precision = ratio(tp, tp + fp);
            let recall = ratio(tp, tp + fn_);
            let f1 = harmonic(&precision, &recall);
            Aggregate {
                precision,
                recall,
                f1,
            }
        }
        Average::Macro => {
            let k = Ratio::from_integer(BigInt::from(per_class.len().max(1)));
            let mean = |f: fn(&ClassMetrics) -> &Ratio| {
                per_class.iter().map(f).fold(Ratio::zero(), |a, b| a + b) / &k
            };
            Aggregate {
                precision: mean(|m| &m.precision),
                recall: mean(|m| &m.recall),
                f1: mean(|m| &m.f1),
            }
        }
        Average::Weighted => {
            let total: u64 = per_class.iter().map(|m| m.support).sum();
            if total == 0 {
                return Aggregate {
                    precision: Ratio::zero(),
                    recall: Ratio::zero(),
                    f1: Ratio::zero(),
                };
            }
            let n = Ratio::from_integer(BigInt::from(total));
            let mean = |f: fn(&ClassMetrics) -> &Ratio| {
                per_class
                    .iter()
                    .map(|m| f(m) * Ratio::from_integer(BigInt::from(m.support)))
                    .fold(Ratio::zero(), |a, b| a + b)
                    / &n
            };
            Aggregate {
                precision: mean(|m| &m.precision),
                recall: mean(|m| &m.recall),
                f1: mean(|m| &m.f1),
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalReport {
    pub schema: LabelSchema,
    pub confusion: ConfusionMatrix,
    pub per_class: Vec<ClassMetrics>,
    pub accuracy: Ratio,
    pub micro: Aggregate,
    pub macro_avg: Aggregate,
    pub weighted: Aggregate,
}

impl EvalReport {
    pub fn from_confusion(schema: LabelSchema, confusion: ConfusionMatrix) -> Result<Self> {
        if confusion.k() != schema.len() {
            return Err(Error::Argument(format!(
                "confusion matrix has {} classes but schema {} has {}",
                confusion.k(),
                schema.task_id(),
                schema.len()
            )));
        }
        let per_class = per_class_metrics(&confusion);
        let accuracy = ratio(confusion.correct(), confusion.total());
        let micro = aggregate(&per_class, &confusion, Average::Micro);
        let macro_avg = aggregate(&per_class, &confusion, Average::Macro);
        let weighted = aggregate(&per_class, &confusion, Average::Weighted);
        Ok(Self {
            schema,
            confusion,
            per_class,
            accuracy,
            micro,
            macro_avg,
            weighted,
        })
    }

    pub fn n(&self) -> u64 {
        self.confusion.total()
    }

    pub fn aggregate(&self, mode: Average) -> &Aggregate {
        match mode {
            Average::Micro => &self.micro,
            Average::Macro => &self.macro_avg,
            Average::Weighted => &self.weighted,
        }
    }

    /// Stable-key JSON. Values are `f64`; the confusion matrix carries the
    /// exact information and is what [`EvalReport::from_json`] reads back.
    pub fn to_json(&self) -> String {
        let agg = |a: &Aggregate| JsonAggregate {
            precision: to_f64(&a.precision),
            recall: to_f64(&a.recall),
            f1: to_f64(&a.f1),
        };
        let doc = JsonReport {
            task_id: self.schema.task_id().to_string(),
            classes: self.schema.classes().to_vec(),
            n: self.n(),
            accuracy: to_f64(&self.accuracy),
            micro: agg(&self.micro),
            macro_avg: agg(&self.macro_avg),
            weighted: agg(&self.weighted),
            per_class: self
                .per_class
                .iter()
                .map(|m| JsonClass {
                    class: self.schema.classes()[m.class].clone(),
                    precision: to_f64(&m.precision),
                    recall: to_f64(&m.recall),
                    f1: to_f64(&m.f1),
                    support: m.support,
                })
                .collect(),
            confusion: self.confusion.cells().to_vec(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Minimal {
            task_id: String,
            classes: Vec<String>,
            confusion: Vec<Vec<u64>>,
        }
        let m: Minimal = serde_json::from_str(text)
            .map_err(|e| Error::Validation(format!("not a report: {e}")))?;
        let schema = LabelSchema::new(m.task_id, m.classes)?;
        Self::from_confusion(schema, ConfusionMatrix::from_cells(m.confusion)?)
    }
}

#[derive(Serialize)]
struct JsonAggregate {
    precision: f64,
    recall: f64,
    f1: f64,
}

#[derive(Serialize)]
struct JsonClass {
    class: String,
    precision: f64,
    recall: f64,
    f1: f64,
    support: u64,
}

#[derive(Serialize)]
struct JsonReport {
    task_id: String,
    classes: Vec<String>,
    n: u64,
    accuracy: f64,
    micro: JsonAggregate,
    #[serde(rename = "macro")]
    macro_avg: JsonAggregate,
    weighted: JsonAggregate,
    per_class: Vec<JsonClass>,
    confusion: Vec<Vec<u64>>,
}

/// Scores `pred` against `gold` under `schema`.
pub fn evaluate(gold: &[usize], pred: &[usize], schema: &LabelSchema) -> Result<EvalReport> {
    let cm = confusion(gold, pred, schema.len())?;
    EvalReport::from_confusion(schema.clone(), cm)
}

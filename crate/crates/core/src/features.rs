//! N-gram vocabularies and sparse count / TF-IDF vectors.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::preprocess::{TokenList, NGRAM_SEPARATOR};

const VOCAB_MAGIC: &str = "#hatebench-vocab v1";
const IDF_MAGIC: &str = "#hatebench-idf v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NgramRange {
    pub min_n: usize,
    pub max_n: usize,
}

impl NgramRange {
    pub fn new(min_n: usize, max_n: usize) -> Result<Self> {
        if min_n == 0 || max_n < min_n {
            return Err(Error::Argument(format!(
                "invalid n-gram range ({min_n}, {max_n})"
            )));
        }
        Ok(Self { min_n, max_n })
    }

    pub fn unigrams() -> Self {
        Self { min_n: 1, max_n: 1 }
    }
}

/// Contiguous n-grams of `tokens` for every n in `range`, joined with the
/// reserved separator.
pub fn ngrams(tokens: &[String], range: NgramRange) -> Vec<String> {
    let mut out = Vec::new();
    for n in range.min_n..=range.max_n {
        if n > tokens.len() {
            break;
        }
        for w in tokens.windows(n) {
            let mut term = String::new();
            for (i, t) in w.iter().enumerate() {
                if i > 0 {
                    term.push(NGRAM_SEPARATOR);
                }
                term.push_str(t);
            }
            out.push(term);
        }
    }
    out
}

/// Fitted term-to-column mapping. Columns follow lexicographic term order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    ngram_range: NgramRange,
    terms: Vec<String>,
    term_to_index: HashMap<String, usize>,
    doc_freq: Vec<usize>,
    n_docs: usize,
    min_df: usize,
    max_features: Option<usize>,
}

impl Vocabulary {
    pub fn fit(
        corpus: &[TokenList],
        ngram_range: NgramRange,
        min_df: usize,
        max_features: Option<usize>,
    ) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::Argument("cannot fit a vocabulary on an empty corpus".into()));
        }
        if min_df == 0 {
            return Err(Error::Argument("min_df must be at least 1".into()));
        }
        if max_features == Some(0) {
            return Err(Error::Argument("max_features must be positive".into()));
        }
        let mut df: HashMap<String, usize> = HashMap::new();
        for doc in corpus {
            let unique: HashSet<String> = ngrams(doc.tokens(), ngram_range).into_iter().collect();
            for term in unique {
                *df.entry(term).or_default() += 1;
            }
        }
        let mut kept: Vec<(String, usize)> = df.into_iter().filter(|&(_, d)| d >= min_df).collect();
        if let Some(cap) = max_features {
            if kept.len() > cap {
                kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
                kept.truncate(cap);
            }
        }
        kept.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(Self::from_sorted(
            kept,
            ngram_range,
            corpus.len(),
            min_df,
            max_features,
        ))
    }

    fn from_sorted(
        kept: Vec<(String, usize)>,
        ngram_range: NgramRange,
        n_docs: usize,
        min_df: usize,
        max_features: Option<usize>,
    ) -> Self {
        let (terms, doc_freq): (Vec<String>, Vec<usize>) = kept.into_iter().unzip();
        let term_to_index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Self {
            ngram_range,
            terms,
            term_to_index,
            doc_freq,
            n_docs,
            min_df,
            max_features,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn ngram_range(&self) -> NgramRange {
        self.ngram_range
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn min_df(&self) -> usize {
        self.min_df
    }

    pub fn max_features(&self) -> Option<usize> {
        self.max_features
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.term_to_index.get(term).copied()
    }

    pub fn term(&self, index: usize) -> Option<&str> {
        self.terms.get(index).map(String::as_str)
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn doc_freq(&self) -> &[usize] {
        &self.doc_freq
    }

    /// Raw n-gram counts of `tokens`; unknown n-grams are ignored.
    pub fn count_vectorize(&self, tokens: &TokenList) -> SparseVector {
        let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
        for term in ngrams(tokens.tokens(), self.ngram_range) {
            if let Some(i) = self.index_of(&term) {
                *counts.entry(i).or_default() += 1.0;
            }
        }
        SparseVector {
            dim: self.len(),
            entries: counts.into_iter().collect(),
        }
    }

    pub fn count_matrix(&self, docs: &[TokenList], row_ids: Vec<String>) -> Result<FeatureMatrix> {
        FeatureMatrix::new(
            self.len(),
            docs.iter().map(|d| self.count_vectorize(d)).collect(),
            row_ids,
        )
    }

    /// Text form: a header line, then `term<TAB>index<TAB>doc_freq` per term.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{VOCAB_MAGIC}\tngram={},{}\tn_docs={}\tmin_df={}\tmax_features={}\n",
            self.ngram_range.min_n,
            self.ngram_range.max_n,
            self.n_docs,
            self.min_df,
            self.max_features
                .map_or_else(|| "none".to_string(), |m| m.to_string()),
        );
        for (i, (t, df)) in self.terms.iter().zip(&self.doc_freq).enumerate() {
            out.push_str(&format!("{t}\t{i}\t{df}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::Parse {
            path: "vocabulary".into(),
            line,
            message: msg.to_string(),
        };
        let mut lines = text.split('\n');
        let header = lines.next().ok_or_else(|| bad(1, "missing header"))?;
        let fields: Vec<&str> = header.split('\t').collect();
        if fields.len() != 5 || fields[0] != VOCAB_MAGIC {
            return Err(bad(1, "not a vocabulary file"));
        }
        let value = |i: usize, key: &str| -> Result<&str> {
            fields[i]
                .strip_prefix(key)
                .and_then(|v| v.strip_prefix('='))
                .ok_or_else(|| bad(1, &format!("expected {key}=")))
        };
        let (lo, hi) = value(1, "ngram")?
            .split_once(',')
            .ok_or_else(|| bad(1, "bad ngram range"))?;
        let num = |s: &str| s.parse::<usize>().map_err(|_| bad(1, "bad number"));
        let ngram_range = NgramRange::new(num(lo)?, num(hi)?)?;
        let n_docs = num(value(2, "n_docs")?)?;
        let min_df = num(value(3, "min_df")?)?;
        let max_features = match value(4, "max_features")? {
            "none" => None,
            v => Some(num(v)?),
        };
        let mut kept = Vec::new();
        for (i, line) in lines.enumerate() {
            let line_no = i + 2;
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(bad(line_no, "expected term, index, doc_freq"));
            }
            let index: usize = cols[1].parse().map_err(|_| bad(line_no, "bad index"))?;
            if index != kept.len() {
                return Err(bad(line_no, "indices must be dense and in order"));
            }
            let df: usize = cols[2].parse().map_err(|_| bad(line_no, "bad doc_freq"))?;
            kept.push((cols[0].to_string(), df));
        }
        if kept.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(bad(0, "terms must be strictly increasing"));
        }
        Ok(Self::from_sorted(
            kept,
            ngram_range,
            n_docs,
            min_df,
            max_features,
        ))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }

    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }
}

/// Sparse row with strictly increasing indices and non-zero finite values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    dim: usize,
    entries: Vec<(usize, f64)>,
}

impl SparseVector {
    pub fn new(dim: usize, entries: Vec<(usize, f64)>) -> Result<Self> {
        for w in entries.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(Error::Argument("sparse indices must be strictly increasing".into()));
            }
        }
        for &(i, v) in &entries {
            if i >= dim {
                return Err(Error::Argument(format!("index {i} out of range for dim {dim}")));
            }
            if v == 0.0 || !v.is_finite() {
                return Err(Error::Argument(format!("entry {i} has value {v}")));
            }
        }
        Ok(Self { dim, entries })
    }

    /// Builds from a dense slice, dropping zeros.
    pub fn from_dense(values: &[f64]) -> Self {
        Self {
            dim: values.len(),
            entries: values
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(i, &v)| (i, v))
                .collect(),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, index: usize) -> f64 {
        match self.entries.binary_search_by_key(&index, |&(i, _)| i) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => 0.0,
        }
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, v)| v * dense[i]).sum()
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v).sum()
    }

    pub fn norm_l2(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.dim];
        for &(i, v) in &self.entries {
            d[i] = v;
        }
        d
    }

    /// Multiplies every value by `factor`; entries that become zero are dropped.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .map(|&(i, v)| (i, v * factor))
                .filter(|&(_, v)| v != 0.0)
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    dim: usize,
    rows: Vec<SparseVector>,
    row_ids: Vec<String>,
}

impl FeatureMatrix {
    pub fn new(dim: usize, rows: Vec<SparseVector>, row_ids: Vec<String>) -> Result<Self> {
        if rows.len() != row_ids.len() {
            return Err(Error::Argument(format!(
                "{} rows but {} row ids",
                rows.len(),
                row_ids.len()
            )));
        }
        if let Some(r) = rows.iter().find(|r| r.dim != dim) {
            return Err(Error::Argument(format!(
                "row of dim {} in matrix of dim {dim}",
                r.dim
            )));
        }
        Ok(Self { dim, rows, row_ids })
    }

    /// Rows with ids `0..n`.
    pub fn from_rows(dim: usize, rows: Vec<SparseVector>) -> Result<Self> {
        let ids = (0..rows.len()).map(|i| i.to_string()).collect();
        Self::new(dim, rows, ids)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[SparseVector] {
        &self.rows
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Norm {
    None,
    #[default]
    L2,
}

impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Norm::None),
            "l2" => Ok(Norm::L2),
            other => Err(Error::Argument(format!("unknown norm {other:?}"))),
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Norm::None => "none",
            Norm::L2 => "l2",
        })
    }
}

/// Smoothed inverse document frequencies, `ln((1 + N) / (1 + df)) + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TfidfWeights {
    idf: Vec<f64>,
    norm: Norm,
}

pub fn smoothed_idf(n_docs: usize, doc_freq: usize) -> f64 {
    ((1.0 + n_docs as f64) / (1.0 + doc_freq as f64)).ln() + 1.0
}

impl TfidfWeights {
    /// `counts` must have been produced under `vocab`; document frequencies
    /// and the corpus size come from the vocabulary fit.
    pub fn fit(counts: &FeatureMatrix, vocab: &Vocabulary, norm: Norm) -> Result<Self> {
        if counts.dim() != vocab.len() {
            return Err(Error::Argument(format!(
                "count matrix has dim {} but vocabulary has {} terms",
                counts.dim(),
                vocab.len()
            )));
        }
        let idf = vocab
            .doc_freq()
            .iter()
            .map(|&df| smoothed_idf(vocab.n_docs(), df))
            .collect();
        Ok(Self { idf, norm })
    }

    pub fn from_parts(idf: Vec<f64>, norm: Norm) -> Result<Self> {
        if let Some(v) = idf.iter().find(|v| !v.is_finite() || **v <= 0.0) {
            return Err(Error::Argument(format!("invalid idf value {v}")));
        }
        Ok(Self { idf, norm })
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    pub fn dim(&self) -> usize {
        self.idf.len()
    }

    pub fn transform(&self, counts_row: &SparseVector) -> Result<SparseVector> {
        if counts_row.dim() != self.idf.len() {
            return Err(Error::Argument(format!(
                "row dim {} does not match idf length {}",
                counts_row.dim(),
                self.idf.len()
            )));
        }
        let weighted = SparseVector {
            dim: counts_row.dim(),
            entries: counts_row
                .entries()
                .iter()
                .map(|&(i, v)| (i, v * self.idf[i]))
                .collect(),
        };
        Ok(match self.norm {
            Norm::L2 => {
                let n = weighted.norm_l2();
                if n > 0.0 {
                    weighted.scaled(1.0 / n)
                } else {
                    weighted
                }
            }
            Norm::None => weighted,
        })
    }

    pub fn transform_matrix(&self, counts: &FeatureMatrix) -> Result<FeatureMatrix> {
        let rows = counts
            .rows()
            .iter()
            .map(|r| self.transform(r))
            .collect::<Result<Vec<_>>>()?;
        FeatureMatrix::new(counts.dim(), rows, counts.row_ids().to_vec())
    }

    /// Header line then one idf per line, written with round-trip precision.
    pub fn to_text(&self) -> String {
        let mut out = format!("{IDF_MAGIC}\tnorm={}\tdim={}\n", self.norm, self.idf.len());
        for v in &self.idf {
            out.push_str(&format!("{v:?}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::Parse {
            path: "idf".into(),
            line,
            message: msg.to_string(),
        };
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().unwrap_or("").split('\t').collect();
        if header.len() != 3 || header[0] != IDF_MAGIC {
            return Err(bad(1, "not an idf file"));
        }
        let norm: Norm = header[1]
            .strip_prefix("norm=")
            .ok_or_else(|| bad(1, "expected norm="))?
            .parse()?;
        let dim: usize = header[2]
            .strip_prefix("dim=")
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| bad(1, "expected dim="))?;
        let idf = lines
            .enumerate()
            .map(|(i, l)| l.parse::<f64>().map_err(|_| bad(i + 2, "bad idf value")))
            .collect::<Result<Vec<_>>>()?;
        if idf.len() != dim {
            return Err(bad(0, "idf length does not match header"));
        }
        Self::from_parts(idf, norm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tl(v: &[&str]) -> TokenList {
        TokenList::new(v.iter().copied())
    }

    fn abc() -> Vocabulary {
        Vocabulary::fit(&[tl(&["a", "b"]), tl(&["b", "c"])], NgramRange::unigrams(), 1, None).unwrap()
    }

    #[test]
    fn fit_hand_enumeration() {
        let v = abc();
        assert_eq!(v.terms(), &["a", "b", "c"]);
        assert_eq!(v.index_of("c"), Some(2));
        assert_eq!(v.doc_freq(), &[1, 2, 1]);

        let v2 = Vocabulary::fit(&[tl(&["a", "b"]), tl(&["b", "c"])], NgramRange::unigrams(), 2, None).unwrap();
        assert_eq!(v2.terms(), &["b"]);
    }

    #[test]
    fn fit_edge_cases() {
        let v = Vocabulary::fit(&[TokenList::default()], NgramRange::unigrams(), 1, None).unwrap();
        assert!(v.is_empty());
        assert!(Vocabulary::fit(&[], NgramRange::unigrams(), 1, None).is_err());
        assert!(NgramRange::new(0, 1).is_err());
        assert!(NgramRange::new(2, 1).is_err());
    }

    #[test]
    fn bigrams_and_cap() {
        let corpus = [tl(&["x", "y", "x"]), tl(&["y", "x"])];
        let v = Vocabulary::fit(&corpus, NgramRange::new(1, 2).unwrap(), 1, None).unwrap();
        let sep = NGRAM_SEPARATOR;
        assert_eq!(
            v.terms(),
            &["x".to_string(), format!("x{sep}y"), "y".to_string(), format!("y{sep}x")]
        );
        assert_eq!(v.doc_freq(), &[2, 1, 2, 2]);
        // cap 3: drop the df-1 term
        let capped = Vocabulary::fit(&corpus, NgramRange::new(1, 2).unwrap(), 1, Some(3)).unwrap();
        assert_eq!(capped.terms(), &["x".to_string(), "y".to_string(), format!("y{sep}x")]);
        // cap 1 among df ties keeps the lexicographically smallest
        let one = Vocabulary::fit(&corpus, NgramRange::new(1, 2).unwrap(), 1, Some(1)).unwrap();
        assert_eq!(one.terms(), &["x"]);
    }

    #[test]
    fn count_vectorize_cases() {
        let v = abc();
        let row = v.count_vectorize(&tl(&["b", "a", "b"]));
        assert_eq!(row.entries(), &[(0, 1.0), (1, 2.0)]);
        assert_eq!(row.dim(), 3);
        assert_eq!(v.count_vectorize(&TokenList::default()).nnz(), 0);
        assert_eq!(v.count_vectorize(&tl(&["q", "z"])).nnz(), 0);
    }

    #[test]
    fn idf_values() {
        let v = abc();
        let m = v.count_matrix(&[tl(&["a", "b"]), tl(&["b", "c"])], vec!["0".into(), "1".into()]).unwrap();
        let w = TfidfWeights::fit(&m, &v, Norm::None).unwrap();
        assert_eq!(w.idf()[1], 1.0);
        let expected = (1.5f64).ln() + 1.0;
        assert!((w.idf()[0] - 1.405465).abs() < 1e-6);
        assert_eq!(w.idf()[0], expected);

        let empty = Vocabulary::fit(&[TokenList::default()], NgramRange::unigrams(), 1, None).unwrap();
        let em = empty.count_matrix(&[TokenList::default()], vec!["0".into()]).unwrap();
        assert!(TfidfWeights::fit(&em, &empty, Norm::L2).unwrap().idf().is_empty());

        let wrong = FeatureMatrix::from_rows(2, vec![]).unwrap();
        assert!(TfidfWeights::fit(&wrong, &v, Norm::L2).is_err());
    }

    #[test]
    fn transform_cases() {
        let idf = vec![1.0, smoothed_idf(2, 1)];
        let row = SparseVector::new(2, vec![(0, 1.0), (1, 2.0)]).unwrap();
        let raw = TfidfWeights::from_parts(idf.clone(), Norm::None).unwrap().transform(&row).unwrap();
        assert_eq!(raw.entries()[0], (0, 1.0));
        assert!((raw.entries()[1].1 - 2.810930).abs() < 1e-6);

        let l2 = TfidfWeights::from_parts(idf, Norm::L2).unwrap();
        assert!((l2.transform(&row).unwrap().norm_l2() - 1.0).abs() < 1e-12);
        assert_eq!(l2.transform(&SparseVector::zeros(2)).unwrap(), SparseVector::zeros(2));
        assert!(l2.transform(&SparseVector::zeros(3)).is_err());
    }

    #[test]
    fn sparse_vector_invariants() {
        assert!(SparseVector::new(3, vec![(1, 1.0), (1, 2.0)]).is_err());
        assert!(SparseVector::new(3, vec![(3, 1.0)]).is_err());
        assert!(SparseVector::new(3, vec![(0, 0.0)]).is_err());
        assert!(SparseVector::new(3, vec![(0, f64::NAN)]).is_err());
        let v = SparseVector::from_dense(&[0.0, 2.0, 0.0, -1.0]);
        assert_eq!(v.entries(), &[(1, 2.0), (3, -1.0)]);
        assert_eq!(v.get(3), -1.0);
        assert_eq!(v.get(0), 0.0);
    }

    #[test]
    fn idf_text_round_trip() {
        let w = TfidfWeights::from_parts(vec![1.0, smoothed_idf(7, 2), 3.25], Norm::L2).unwrap();
        assert_eq!(TfidfWeights::from_text(&w.to_text()).unwrap(), w);
        assert!(TfidfWeights::from_text("garbage").is_err());
    }

    #[test]
    fn vocabulary_rejects_corrupt_text() {
        assert!(Vocabulary::from_text("").is_err());
        let mut t = abc().to_text();
        t.push_str("zz\t7\t1\n");
        assert!(Vocabulary::from_text(&t).is_err());
    }

    fn corpus_strategy() -> impl Strategy<Value = Vec<TokenList>> {
        prop::collection::vec(
            prop::collection::vec("[a-e]{1,2}|[অআই]", 0..8).prop_map(TokenList::new),
            1..10,
        )
    }

    proptest! {
        #[test]
        fn vocabulary_properties(
            corpus in corpus_strategy(),
            min_n in 1usize..3, extra in 0usize..2,
            min_df in 1usize..3, cap in prop::option::of(1usize..10),
        ) {
            let range = NgramRange::new(min_n, min_n + extra).unwrap();
            let v = Vocabulary::fit(&corpus, range, min_df, cap).unwrap();
            if let Some(c) = cap { prop_assert!(v.len() <= c); }
            prop_assert!(v.doc_freq().iter().all(|&d| d >= min_df));

            let mut nonzero_rows = vec![0usize; v.len()];
            for doc in &corpus {
                let row = v.count_vectorize(doc);
                prop_assert!(row.entries().iter().all(|&(i, _)| i < v.len()));
                let in_vocab = ngrams(doc.tokens(), range).iter().filter(|t| v.index_of(t).is_some()).count();
                prop_assert_eq!(row.sum() as usize, in_vocab);
                for &(i, _) in row.entries() { nonzero_rows[i] += 1; }
            }
            prop_assert!(nonzero_rows.iter().all(|&c| c >= min_df));

            let mut reversed = corpus.clone();
            reversed.reverse();
            prop_assert_eq!(&Vocabulary::fit(&reversed, range, min_df, cap).unwrap(), &v);
            prop_assert_eq!(&Vocabulary::from_text(&v.to_text()).unwrap(), &v);
        }

        #[test]
        fn single_document_tfidf_rows_have_unit_norm(doc in prop::collection::vec("[a-d]", 1..10)) {
            let corpus = vec![TokenList::new(doc)];
            let v = Vocabulary::fit(&corpus, NgramRange::new(1, 2).unwrap(), 1, None).unwrap();
            let m = v.count_matrix(&corpus, vec!["0".into()]).unwrap();
            let w = TfidfWeights::fit(&m, &v, Norm::L2).unwrap();
            prop_assert!(w.idf().iter().all(|&x| x >= 1.0));
            let t = w.transform_matrix(&m).unwrap();
            prop_assert!((t.rows()[0].norm_l2() - 1.0).abs() < 1e-12);
        }
    }
}

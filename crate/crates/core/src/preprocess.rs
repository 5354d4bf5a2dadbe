//! Text cleaning, whitespace tokenization and stopword filtering.
//!
//! Removed characters are replaced by a space so that words on either side
//! stay apart, except for invisible format characters (category Cf, e.g. the
//! zero-width joiner) which are deleted outright.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use unicode_general_category::{get_general_category, GeneralCategory};
use unicode_normalization::UnicodeNormalization;

use crate::corpus::Document;
use crate::error::{Error, Result};

/// Separator used to join tokens into n-gram terms. Never part of a token.
pub const NGRAM_SEPARATOR: char = '\u{1f}';

const DANDA: char = '\u{0964}';
const DOUBLE_DANDA: char = '\u{0965}';

/// Emoji and pictograph blocks.
const EMOJI_RANGES: &[(u32, u32)] = &[
    (0x2600, 0x26FF),   // misc symbols
    (0x2700, 0x27BF),   // dingbats
    (0x1F1E6, 0x1F1FF), // regional indicators
    (0x1F300, 0x1F5FF), // misc symbols and pictographs
    (0x1F600, 0x1F64F), // emoticons
    (0x1F680, 0x1F6FF), // transport and map
    (0x1F900, 0x1F9FF), // supplemental symbols and pictographs
    (0x1FA70, 0x1FAFF), // symbols and pictographs extended-A
];

const ZWJ: char = '\u{200d}';

const DEFAULT_STOPWORDS: &str = include_str!("../assets/stopwords_bn.txt");

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnicodeNormalize {
    None,
    /// NFC
    #[default]
    CanonicalComposed,
}

impl FromStr for UnicodeNormalize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Self::None),
            "nfc" | "canonical-composed" => Ok(Self::CanonicalComposed),
            other => Err(Error::Argument(format!("unknown normalization {other:?}"))),
        }
    }
}

impl fmt::Display for UnicodeNormalize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::None => "none",
            Self::CanonicalComposed => "nfc",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CleanConfig {
    pub strip_urls: bool,
    pub strip_emoji: bool,
    pub strip_punct: bool,
    pub strip_special: bool,
    pub lowercase_latin: bool,
    pub unicode_normalize: UnicodeNormalize,
}

impl Default for CleanConfig {
    fn default() -> Self {
        Self {
            strip_urls: true,
            strip_emoji: true,
            strip_punct: true,
            strip_special: true,
            lowercase_latin: true,
            unicode_normalize: UnicodeNormalize::CanonicalComposed,
        }
    }
}

impl CleanConfig {
    /// Everything off; only whitespace collapsing and trimming remain.
    pub fn passthrough() -> Self {
        Self {
            strip_urls: false,
            strip_emoji: false,
            strip_punct: false,
            strip_special: false,
            lowercase_latin: false,
            unicode_normalize: UnicodeNormalize::None,
        }
    }
}

fn url_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)[a-z][a-z0-9+.\-]*://\S*|www\.\S*").expect("valid regex"))
}

pub fn is_emoji(c: char) -> bool {
    let cp = c as u32;
    EMOJI_RANGES.iter().any(|&(lo, hi)| (lo..=hi).contains(&cp))
}

fn is_emoji_joiner(c: char) -> bool {
    matches!(c, ZWJ | '\u{fe0e}' | '\u{fe0f}')
}

pub fn is_punctuation(c: char) -> bool {
    c == DANDA
        || c == DOUBLE_DANDA
        || matches!(
            get_general_category(c),
            GeneralCategory::ConnectorPunctuation
                | GeneralCategory::DashPunctuation
                | GeneralCategory::OpenPunctuation
                | GeneralCategory::ClosePunctuation
                | GeneralCategory::InitialPunctuation
                | GeneralCategory::FinalPunctuation
                | GeneralCategory::OtherPunctuation
        )
}

/// Unicode categories S (symbols) and C (control, format, surrogate,
/// private use, unassigned).
pub fn is_special(c: char) -> bool {
    matches!(
        get_general_category(c),
        GeneralCategory::MathSymbol
            | GeneralCategory::CurrencySymbol
            | GeneralCategory::ModifierSymbol
            | GeneralCategory::OtherSymbol
            | GeneralCategory::Control
            | GeneralCategory::Format
            | GeneralCategory::Surrogate
            | GeneralCategory::PrivateUse
            | GeneralCategory::Unassigned
    )
}

fn is_format(c: char) -> bool {
    get_general_category(c) == GeneralCategory::Format
}

fn is_latin_letter(c: char) -> bool {
    (c as u32) < 0x0250 && c.is_alphabetic()
}

/// Marks emoji plus any ZWJ or variation selector attached to one.
fn emoji_mask(chars: &[char]) -> Vec<bool> {
    let mut mask: Vec<bool> = chars.iter().map(|&c| is_emoji(c)).collect();
    // forward pass: joiners following an emoji (or a chain of joiners after one)
    for i in 1..chars.len() {
        if !mask[i] && is_emoji_joiner(chars[i]) && mask[i - 1] {
            mask[i] = true;
        }
    }
    // backward pass: joiners directly preceding an emoji
    for i in (0..chars.len().saturating_sub(1)).rev() {
        if !mask[i] && is_emoji_joiner(chars[i]) && mask[i + 1] {
            mask[i] = true;
        }
    }
    mask
}

/// Normalizes raw comment text according to `config`.
pub fn clean(text: &str, config: &CleanConfig) -> String {
    let nfc = config.unicode_normalize == UnicodeNormalize::CanonicalComposed;
    let mut s: String = if nfc { text.nfc().collect() } else { text.to_string() };

    let chars: Vec<char> = s.chars().collect();
    let emoji = if config.strip_emoji {
        emoji_mask(&chars)
    } else {
        vec![false; chars.len()]
    };

    // Format characters go first so that deleting them cannot splice a URL
    // together after URL removal has run.
    if config.strip_special {
        s = chars
            .iter()
            .zip(&emoji)
            .filter(|&(&c, &e)| e || !is_format(c))
            .map(|(&c, _)| c)
            .collect();
    }

    if config.strip_urls {
        s = url_regex().replace_all(&s, " ").into_owned();
    }

    let chars: Vec<char> = s.chars().collect();
    let emoji = if config.strip_emoji {
        emoji_mask(&chars)
    } else {
        vec![false; chars.len()]
    };

    let mut out = String::with_capacity(s.len());
    let mut pending_space = false;
    for (&c, &is_emo) in chars.iter().zip(&emoji) {
        let drop = c.is_whitespace()
            || is_emo
            || (config.strip_punct && is_punctuation(c))
            || (config.strip_special && is_special(c));
        if drop {
            pending_space = true;
            continue;
        }
        if pending_space && !out.is_empty() {
            out.push(' ');
        }
        pending_space = false;
        if config.lowercase_latin && is_latin_letter(c) {
            out.extend(c.to_lowercase());
        } else {
            out.push(c);
        }
    }

    if nfc {
        out.nfc().collect()
    } else {
        out
    }
}

/// Ordered, non-empty, whitespace-free tokens.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenList(Vec<String>);

impl TokenList {
    /// Splits each input on whitespace so the token invariants hold.
    pub fn new<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self(
            tokens
                .into_iter()
                .flat_map(|t| tokenize(t.as_ref()).0)
                .collect(),
        )
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }
}

fn is_token_break(c: char) -> bool {
    c.is_whitespace() || c == NGRAM_SEPARATOR
}

/// Splits on Unicode whitespace (and the n-gram separator), dropping empties.
pub fn tokenize(text: &str) -> TokenList {
    TokenList(
        text.split(is_token_break)
            .filter(|t| !t.is_empty())
            .map(str::to_string)
            .collect(),
    )
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StopwordSet {
    words: HashSet<String>,
    source_id: String,
}

impl StopwordSet {
    pub fn new<I, S>(words: I, source_id: impl Into<String>) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            words: words.into_iter().map(Into::into).collect(),
            source_id: source_id.into(),
        }
    }

    pub fn empty() -> Self {
        Self::new(Vec::<String>::new(), "empty")
    }

    /// Parses a stopword file: one token per line, `#` lines are comments.
    /// A `# source_id: NAME` comment sets the source id, otherwise
    /// `fallback_id` is used.
    pub fn parse(text: &str, fallback_id: &str) -> Self {
        let mut source_id = None;
        let mut words = HashSet::new();
        for line in text.lines() {
            let line = line.trim();
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(id) = comment.trim().strip_prefix("source_id:") {
                    source_id.get_or_insert_with(|| id.trim().to_string());
                }
                continue;
            }
            if !line.is_empty() {
                words.insert(line.to_string());
            }
        }
        Self {
            words,
            source_id: source_id.unwrap_or_else(|| fallback_id.to_string()),
        }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let fallback = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        Ok(Self::parse(&text, &fallback))
    }

    /// The bundled Bangla list.
    pub fn bangla_default() -> Self {
        Self::parse(DEFAULT_STOPWORDS, "bundled")
    }

    /// Runs every word through the same cleaning as document text, so that
    /// membership is decided on normalized forms. Words that clean to
    /// several tokens contribute each token.
    pub fn normalized(&self, config: &CleanConfig) -> Self {
        let words = self
            .words
            .iter()
            .flat_map(|w| tokenize(&clean(w, config)).into_inner())
            .collect();
        Self {
            words,
            source_id: self.source_id.clone(),
        }
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    /// Words in sorted order.
    pub fn sorted_words(&self) -> Vec<&str> {
        let mut w: Vec<&str> = self.words.iter().map(String::as_str).collect();
        w.sort_unstable();
        w
    }
}

pub fn remove_stopwords(tokens: &TokenList, stops: &StopwordSet) -> TokenList {
    TokenList(
        tokens
            .0
            .iter()
            .filter(|t| !stops.contains(t))
            .cloned()
            .collect(),
    )
}

pub fn preprocess_text(text: &str, config: &CleanConfig, stops: &StopwordSet) -> TokenList {
    remove_stopwords(&tokenize(&clean(text, config)), stops)
}

pub fn preprocess_document(doc: &Document, config: &CleanConfig, stops: &StopwordSet) -> TokenList {
    preprocess_text(&doc.text, config, stops)
}

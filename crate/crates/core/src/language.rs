//! Sentiment, emotionality and complexity of community language.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_segmentation::UnicodeSegmentation;

use crate::error::LanguageError;
use crate::ingest::{MonthWindow, PostRecord};
use crate::month::YearMonth;

/// Lowercased Unicode word tokens (UAX #29 word boundaries).
///
/// Hyphens split words (`re-test` → `re`, `test`); tokens made only of
/// numeric characters are dropped, mixed tokens such as `h1n1` are kept.
pub fn tokenize(text: &str) -> Vec<String> {
    text.unicode_words()
        .filter(|w| !w.chars().all(|c| c.is_numeric() || c == '.' || c == ','))
        .map(str::to_lowercase)
        .collect()
}

/// Maps a post's text to a sentiment score in `[0, 1]`, 0.5 being neutral.
pub trait SentimentScorer: Send + Sync {
    fn score(&self, text: &str) -> f64;
}

impl<F> SentimentScorer for F
where
    F: Fn(&str) -> f64 + Send + Sync,
{
    fn score(&self, text: &str) -> f64 {
        self(text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    positive: BTreeSet<String>,
    negative: BTreeSet<String>,
    source: String,
}

const DEFAULT_POSITIVE: &str = include_str!("../data/lexicon/positive.txt");
const DEFAULT_NEGATIVE: &str = include_str!("../data/lexicon/negative.txt");

impl Lexicon {
    pub fn new<P, N>(positive: P, negative: N, source: impl Into<String>) -> Result<Self, LanguageError>
    where
        P: IntoIterator,
        P::Item: AsRef<str>,
        N: IntoIterator,
        N::Item: AsRef<str>,
    {
        let norm = |t: &str| t.trim().to_lowercase();
        let positive: BTreeSet<String> = positive
            .into_iter()
            .map(|t| norm(t.as_ref()))
            .filter(|t| !t.is_empty())
            .collect();
        let negative: BTreeSet<String> = negative
            .into_iter()
            .map(|t| norm(t.as_ref()))
            .filter(|t| !t.is_empty())
            .collect();
        if let Some(t) = positive.intersection(&negative).next() {
            return Err(LanguageError::LexiconOverlap(t.clone()));
        }
        Ok(Self {
            positive,
            negative,
            source: source.into(),
        })
    }

    /// The small lexicon bundled with the crate.
    pub fn builtin() -> Self {
        Self::new(DEFAULT_POSITIVE.lines(), DEFAULT_NEGATIVE.lines(), "builtin")
            .expect("bundled lexicon lists are disjoint")
    }

    /// Loads one-token-per-line positive and negative word lists.
    pub fn from_files(positive: &Path, negative: &Path) -> Result<Self, LanguageError> {
        let read = |path: &Path| {
            std::fs::read_to_string(path).map_err(|source| LanguageError::LexiconIo {
                path: path.to_path_buf(),
                source,
            })
        };
        let pos = read(positive)?;
        let neg = read(negative)?;
        Self::new(
            pos.lines(),
            neg.lines(),
            format!("{} + {}", positive.display(), negative.display()),
        )
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn positive(&self) -> &BTreeSet<String> {
        &self.positive
    }

    pub fn negative(&self) -> &BTreeSet<String> {
        &self.negative
    }

    /// Same lexicon with the polarity of every word flipped.
    pub fn swapped(&self) -> Self {
        Self {
            positive: self.negative.clone(),
            negative: self.positive.clone(),
            source: format!("swapped({})", self.source),
        }
    }

    /// `0.5 + 0.5 (P − N) / (P + N)` over lexicon hits, 0.5 without hits.
    pub fn score_tokens<S: AsRef<str>>(&self, tokens: &[S]) -> f64 {
        let (mut pos, mut neg) = (0u64, 0u64);
        for t in tokens {
            if self.positive.contains(t.as_ref()) {
                pos += 1;
            } else if self.negative.contains(t.as_ref()) {
                neg += 1;
            }
        }
        if pos + neg == 0 {
            0.5
        } else {
            0.5 + 0.5 * (pos as f64 - neg as f64) / (pos + neg) as f64
        }
    }
}

impl SentimentScorer for Lexicon {
    fn score(&self, text: &str) -> f64 {
        self.score_tokens(&tokenize(text))
    }
}

pub fn sentiment_score(text: &str, lexicon: &Lexicon) -> f64 {
    lexicon.score(text)
}

/// Population standard deviation; `None` for an empty slice.
pub fn emotionality(scores: &[f64]) -> Option<f64> {
    if scores.is_empty() {
        return None;
    }
    let n = scores.len() as f64;
    let mean = scores.iter().sum::<f64>() / n;
    let var = scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
    Some(var.sqrt())
}

/// Add-one smoothed unigram probabilities with one reserved slot for unseen
/// tokens: `p(w) = (c_w + 1) / (N + V + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    counts: HashMap<String, u64>,
    total: u64,
}

impl Dictionary {
    pub fn from_counts(counts: HashMap<String, u64>) -> Result<Self, LanguageError> {
        let total: u64 = counts.values().sum();
        if total == 0 {
            return Err(LanguageError::EmptyCorpus);
        }
        Ok(Self { counts, total })
    }

    pub fn vocabulary_size(&self) -> usize {
        self.counts.len()
    }

    pub fn total_tokens(&self) -> u64 {
        self.total
    }

    fn denominator(&self) -> f64 {
        (self.total + self.counts.len() as u64 + 1) as f64
    }

    pub fn probability(&self, token: &str) -> f64 {
        let c = self.counts.get(token).copied().unwrap_or(0);
        (c + 1) as f64 / self.denominator()
    }

    /// Probability mass held back for tokens never seen in the corpus.
    pub fn unseen_probability(&self) -> f64 {
        1.0 / self.denominator()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> + '_ {
        self.counts.keys().map(|k| (k.as_str(), self.probability(k)))
    }

    /// Mean information content `−log2 p` of `tokens`; `None` if empty.
    pub fn mean_information<S: AsRef<str>>(&self, tokens: &[S]) -> Option<f64> {
        if tokens.is_empty() {
            return None;
        }
        let bits: f64 = tokens.iter().map(|t| -self.probability(t.as_ref()).log2()).sum();
        Some(bits / tokens.len() as f64)
    }
}

pub fn build_dictionary<'a, I>(texts: I) -> Result<Dictionary, LanguageError>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut counts: HashMap<String, u64> = HashMap::new();
    for text in texts {
        for token in tokenize(text) {
            *counts.entry(token).or_default() += 1;
        }
    }
    Dictionary::from_counts(counts)
}

/// Mean over token-bearing posts of each post's mean information content.
pub fn complexity<'a, I>(posts: I, dictionary: &Dictionary) -> Option<f64>
where
    I: IntoIterator<Item = &'a PostRecord>,
{
    let per_post: Vec<f64> = posts
        .into_iter()
        .filter_map(|p| dictionary.mean_information(&tokenize(&p.text)))
        .collect();
    mean(&per_post)
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageRow {
    pub community_id: String,
    pub month: YearMonth,
    pub sentiment: Option<f64>,
    pub emotionality: Option<f64>,
    pub complexity: Option<f64>,
    /// Posts with at least one token.
    pub scored_posts: u64,
}

/// Language metrics of one window. Posts without tokens are ignored; all
/// three metrics are `None` when no post carries a token.
pub fn language_row(
    window: &MonthWindow<'_>,
    scorer: &dyn SentimentScorer,
    dictionary: &Dictionary,
) -> LanguageRow {
    let mut scores = Vec::new();
    let mut info = Vec::new();
    for post in &window.posts {
        let tokens = tokenize(&post.text);
        if let Some(bits) = dictionary.mean_information(&tokens) {
            info.push(bits);
            scores.push(scorer.score(&post.text));
        }
    }
    LanguageRow {
        community_id: window.community_id.to_string(),
        month: window.month,
        sentiment: mean(&scores),
        emotionality: emotionality(&scores),
        complexity: mean(&info),
        scored_posts: scores.len() as u64,
    }
}

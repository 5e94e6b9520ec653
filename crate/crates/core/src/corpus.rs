//! Parsed sentences, vocabularies, sampling weights and training-tuple extraction.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// One token line of a dependency parse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    /// 1-based position in the sentence.
    pub index: u32,
    pub form: String,
    /// Index of the governor, 0 for the root.
    pub head: u32,
    pub deprel: String,
}

impl Token {
    pub fn new(index: u32, form: impl Into<String>, head: u32, deprel: impl Into<String>) -> Self {
        Token {
            index,
            form: form.into(),
            head,
            deprel: deprel.into(),
        }
    }
}

/// A directed, labeled edge `head → dependent` between token indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DependencyArc<'a> {
    pub head: u32,
    pub dependent: u32,
    pub label: &'a str,
}

/// Tokens of one sentence together with their dependency arcs.
///
/// Tokens are stored in index order and indices are contiguous from 1, so
/// token `i` lives at `tokens()[i - 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedSentence {
    tokens: Vec<Token>,
}

impl ParsedSentence {
    pub fn new(tokens: Vec<Token>) -> Result<Self> {
        let n = tokens.len();
        for (pos, token) in tokens.iter().enumerate() {
            let expected = pos as u32 + 1;
            if token.index != expected {
                return Err(Error::InvalidSentence(format!(
                    "token index {} at position {}, expected {}",
                    token.index, pos, expected
                )));
            }
            if token.form.is_empty() {
                return Err(Error::InvalidSentence(format!(
                    "token {} has an empty form",
                    token.index
                )));
            }
            if token.head == token.index {
                return Err(Error::InvalidSentence(format!(
                    "token {} is its own head",
                    token.index
                )));
            }
            if token.head as usize > n {
                return Err(Error::InvalidSentence(format!(
                    "token {} has head {} but the sentence has {} tokens",
                    token.index, token.head, n
                )));
            }
        }
        Ok(ParsedSentence { tokens })
    }

    /// Builds an unparsed sentence: every token attaches to the root.
    pub fn from_forms<S: AsRef<str>>(forms: &[S]) -> Result<Self> {
        let tokens = forms
            .iter()
            .enumerate()
            .map(|(i, f)| Token::new(i as u32 + 1, f.as_ref(), 0, "root"))
            .collect();
        Self::new(tokens)
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// The token with the given 1-based index.
    pub fn token(&self, index: u32) -> Option<&Token> {
        (index as usize).checked_sub(1).and_then(|i| self.tokens.get(i))
    }

    pub fn arcs(&self) -> impl Iterator<Item = DependencyArc<'_>> + '_ {
        self.tokens
            .iter()
            .filter(|t| t.head != 0)
            .map(|t| DependencyArc {
                head: t.head,
                dependent: t.index,
                label: &t.deprel,
            })
    }
}

/// A dependency label together with the direction it is traversed in.
///
/// The inverse of `nsubj` prints as `nsubj^-1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DirectedLabel {
    pub label: String,
    pub inverse: bool,
}

const INVERSE_SUFFIX: &str = "^-1";

impl DirectedLabel {
    pub fn forward(label: impl Into<String>) -> Self {
        DirectedLabel {
            label: label.into(),
            inverse: false,
        }
    }

    pub fn inverse(label: impl Into<String>) -> Self {
        DirectedLabel {
            label: label.into(),
            inverse: true,
        }
    }

    pub fn flipped(&self) -> Self {
        DirectedLabel {
            label: self.label.clone(),
            inverse: !self.inverse,
        }
    }
}

impl fmt::Display for DirectedLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inverse {
            write!(f, "{}{}", self.label, INVERSE_SUFFIX)
        } else {
            f.write_str(&self.label)
        }
    }
}

impl FromStr for DirectedLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (label, inverse) = match s.strip_suffix(INVERSE_SUFFIX) {
            Some(base) => (base, true),
            None => (s, false),
        };
        if label.is_empty() {
            return Err(Error::InvalidConfig(format!("empty dependency label in {s:?}")));
        }
        Ok(DirectedLabel {
            label: label.to_string(),
            inverse,
        })
    }
}

/// Word → id map with absolute counts.
///
/// Words are ordered by descending count, ties broken lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    total: u64,
    min_count: u64,
    lowercase: bool,
    index: BTreeMap<String, u32>,
}

impl Vocabulary {
    /// Counts token forms over `sentences`, keeping those seen at least `min_count` times.
    pub fn build<'a, I>(sentences: I, min_count: u64, lowercase: bool) -> Self
    where
        I: IntoIterator<Item = &'a ParsedSentence>,
    {
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        for sentence in sentences {
            for token in sentence.tokens() {
                *counts.entry(normalize(&token.form, lowercase)).or_default() += 1;
            }
        }
        Self::from_counts(counts, min_count, lowercase)
    }

    /// Builds a vocabulary from raw counts, applying the threshold and canonical order.
    pub fn from_counts<I>(counts: I, min_count: u64, lowercase: bool) -> Self
    where
        I: IntoIterator<Item = (String, u64)>,
    {
        let mut merged: BTreeMap<String, u64> = BTreeMap::new();
        for (word, count) in counts {
            *merged.entry(word).or_default() += count;
        }
        let mut entries: Vec<(String, u64)> =
            merged.into_iter().filter(|(_, c)| *c >= min_count).collect();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let (words, counts) = entries.into_iter().unzip();
        Self::assemble(words, counts, min_count, lowercase)
    }

    /// Rebuilds a vocabulary in the given order, as read back from a file.
    pub fn from_ordered(
        words: Vec<String>,
        counts: Vec<u64>,
        min_count: u64,
        lowercase: bool,
    ) -> Result<Self> {
        if words.len() != counts.len() {
            return Err(Error::ShapeMismatch {
                expected: words.len(),
                found: counts.len(),
            });
        }
        if let Some(c) = counts.iter().find(|&&c| c < min_count) {
            return Err(Error::InvalidConfig(format!(
                "count {c} is below the minimum count {min_count}"
            )));
        }
        let vocab = Self::assemble(words, counts, min_count, lowercase);
        if vocab.index.len() != vocab.words.len() {
            return Err(Error::InvalidConfig("duplicate word in vocabulary".to_string()));
        }
        Ok(vocab)
    }

    fn assemble(words: Vec<String>, counts: Vec<u64>, min_count: u64, lowercase: bool) -> Self {
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u32))
            .collect();
        let total = counts.iter().sum();
        Vocabulary {
            words,
            counts,
            total,
            min_count,
            lowercase,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Exact lookup of an already normalized word.
    pub fn id(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    /// Lookup of a surface form, normalized the way this vocabulary was built.
    pub fn lookup(&self, form: &str) -> Option<u32> {
        if self.lowercase && form.chars().any(char::is_uppercase) {
            self.id(&form.to_lowercase())
        } else {
            self.id(form)
        }
    }

    pub fn normalize(&self, form: &str) -> String {
        normalize(form, self.lowercase)
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn count(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn lowercase(&self) -> bool {
        self.lowercase
    }

    /// Relative frequency `count / total`.
    pub fn rel_freq(&self, id: u32) -> f64 {
        self.count(id) as f64 / self.total as f64
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> + '_ {
        self.words.iter().map(String::as_str).zip(self.counts.iter().copied())
    }
}

fn normalize(form: &str, lowercase: bool) -> String {
    if lowercase {
        form.to_lowercase()
    } else {
        form.to_string()
    }
}

/// Frequency down-weighting `min(1, sqrt(tau / rel_freq))`.
pub fn subsample_weight(rel_freq: f64, tau: f64) -> Result<f64> {
    if !(rel_freq > 0.0) {
        return Err(Error::Domain("relative frequency must be positive"));
    }
    if !(tau > 0.0) {
        return Err(Error::Domain("subsampling threshold must be positive"));
    }
    Ok(libm::sqrt(tau / rel_freq).min(1.0))
}

/// Linear window decay `max(0, (n - m + 1) / n)` for a word `m` tokens away.
pub fn window_weight(m: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    ((n as f64 - m as f64 + 1.0) / n as f64).max(0.0)
}

/// Unigram distribution raised to the 3/4 power.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseDistribution {
    probabilities: Vec<f64>,
}

impl NoiseDistribution {
    pub fn from_vocab(vocab: &Vocabulary) -> Result<Self> {
        Self::from_counts(vocab.counts())
    }

    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        let powered: Vec<f64> = counts.iter().map(|&c| libm::pow(c as f64, 0.75)).collect();
        let z: f64 = powered.iter().sum();
        if !(z > 0.0) {
            return Err(Error::Domain("noise distribution needs a positive count"));
        }
        Ok(NoiseDistribution {
            probabilities: powered.into_iter().map(|p| p / z).collect(),
        })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }
}

/// A (target, context, relation) training example. `relation` is `None`
/// exactly for window contexts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct TrainingTuple {
    pub target: u32,
    pub context: u32,
    pub relation: Option<u32>,
}

/// Vocabulary ids of a sentence's tokens, `None` where out of vocabulary.
pub fn encode(sentence: &ParsedSentence, vocab: &Vocabulary) -> Vec<Option<u32>> {
    sentence.tokens().iter().map(|t| vocab.lookup(&t.form)).collect()
}

/// Window contexts of every in-vocabulary token, up to `n` positions away.
pub fn extract_window_tuples(
    sentence: &ParsedSentence,
    n: usize,
    vocab: &Vocabulary,
) -> Vec<TrainingTuple> {
    let mut out = Vec::new();
    window_tuples_from_ids(&encode(sentence, vocab), n, &mut out);
    out
}

pub(crate) fn window_tuples_from_ids(ids: &[Option<u32>], n: usize, out: &mut Vec<TrainingTuple>) {
    for (i, target) in ids.iter().enumerate() {
        let Some(target) = *target else { continue };
        let lo = i.saturating_sub(n);
        let hi = (i + n).min(ids.len().saturating_sub(1));
        for (j, context) in ids.iter().enumerate().take(hi + 1).skip(lo) {
            if j == i {
                continue;
            }
            if let Some(context) = *context {
                out.push(TrainingTuple {
                    target,
                    context,
                    relation: None,
                });
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DependencyMode {
    /// Contexts are `word:label` strings in a separate context vocabulary.
    SkipGram,
    /// Contexts are plain words; the directed label selects a matrix.
    Matrix,
}

/// Directed-label table (and, for dependency Skip-Gram, the `word:label`
/// context vocabulary) gathered from a corpus.
#[derive(Debug, Clone)]
pub struct DependencyVocab {
    mode: DependencyMode,
    labels: Vec<DirectedLabel>,
    label_index: BTreeMap<DirectedLabel, u32>,
    contexts: Option<Vocabulary>,
}

/// An arc mapped onto ids: its two tuples and the token positions they need.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncodedArc {
    pub head_pos: u32,
    pub dependent_pos: u32,
    pub forward: TrainingTuple,
    pub backward: TrainingTuple,
}

impl DependencyVocab {
    pub fn build<'a, I>(sentences: I, vocab: &Vocabulary, mode: DependencyMode) -> Self
    where
        I: IntoIterator<Item = &'a ParsedSentence>,
    {
        let mut labels: BTreeMap<DirectedLabel, ()> = BTreeMap::new();
        let mut context_counts: BTreeMap<String, u64> = BTreeMap::new();
        for sentence in sentences {
            let ids = encode(sentence, vocab);
            for arc in sentence.arcs() {
                let (Some(h), Some(d)) = (
                    ids[arc.head as usize - 1],
                    ids[arc.dependent as usize - 1],
                ) else {
                    continue;
                };
                let fwd = DirectedLabel::forward(arc.label);
                let inv = DirectedLabel::inverse(arc.label);
                if mode == DependencyMode::SkipGram {
                    *context_counts
                        .entry(context_string(vocab.word(d), &fwd))
                        .or_default() += 1;
                    *context_counts
                        .entry(context_string(vocab.word(h), &inv))
                        .or_default() += 1;
                }
                labels.insert(fwd, ());
                labels.insert(inv, ());
            }
        }
        let labels: Vec<DirectedLabel> = labels.into_keys().collect();
        let contexts = match mode {
            DependencyMode::SkipGram => Some(Vocabulary::from_counts(context_counts, 1, false)),
            DependencyMode::Matrix => None,
        };
        Self::from_parts(mode, labels, contexts)
    }

    pub fn from_parts(
        mode: DependencyMode,
        labels: Vec<DirectedLabel>,
        contexts: Option<Vocabulary>,
    ) -> Self {
        let label_index = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i as u32))
            .collect();
        DependencyVocab {
            mode,
            labels,
            label_index,
            contexts,
        }
    }

    pub fn mode(&self) -> DependencyMode {
        self.mode
    }

    pub fn labels(&self) -> &[DirectedLabel] {
        &self.labels
    }

    pub fn label_id(&self, label: &DirectedLabel) -> Option<u32> {
        self.label_index.get(label).copied()
    }

    /// The `word:label` context vocabulary (dependency Skip-Gram only).
    pub fn contexts(&self) -> Option<&Vocabulary> {
        self.contexts.as_ref()
    }

    /// Maps every arc whose endpoints are both in vocabulary onto its two tuples.
    pub fn encode_arcs(&self, sentence: &ParsedSentence, vocab: &Vocabulary) -> Vec<EncodedArc> {
        let ids = encode(sentence, vocab);
        sentence
            .arcs()
            .filter_map(|arc| {
                let h = ids[arc.head as usize - 1]?;
                let d = ids[arc.dependent as usize - 1]?;
                let fwd = DirectedLabel::forward(arc.label);
                let inv = DirectedLabel::inverse(arc.label);
                let fwd_id = self.label_id(&fwd)?;
                let inv_id = self.label_id(&inv)?;
                let (fwd_ctx, inv_ctx) = match &self.contexts {
                    Some(ctx) => (
                        ctx.id(&context_string(vocab.word(d), &fwd))?,
                        ctx.id(&context_string(vocab.word(h), &inv))?,
                    ),
                    None => (d, h),
                };
                Some(EncodedArc {
                    head_pos: arc.head - 1,
                    dependent_pos: arc.dependent - 1,
                    forward: TrainingTuple {
                        target: h,
                        context: fwd_ctx,
                        relation: Some(fwd_id),
                    },
                    backward: TrainingTuple {
                        target: d,
                        context: inv_ctx,
                        relation: Some(inv_id),
                    },
                })
            })
            .collect()
    }
}

/// The dependency Skip-Gram context identity `word:label`.
pub fn context_string(word: &str, label: &DirectedLabel) -> String {
    format!("{word}:{label}")
}

/// Both directed tuples of every arc whose endpoints are in vocabulary.
pub fn extract_dependency_tuples(
    sentence: &ParsedSentence,
    vocab: &Vocabulary,
    deps: &DependencyVocab,
) -> Vec<TrainingTuple> {
    deps.encode_arcs(sentence, vocab)
        .into_iter()
        .flat_map(|a| [a.forward, a.backward])
        .collect()
}

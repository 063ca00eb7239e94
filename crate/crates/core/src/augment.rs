//! Synthetic-pair generation through a pluggable forward-translation
//! backend, merging into training splits and bilingual-dictionary
//! appending. Only training corpora can grow here: every operation checks
//! the split first.

use std::collections::HashSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::corpus::{read_lines, Corpus, CorpusError, LangCode, Provenance, SentencePair, Split};
use crate::normalize::{normalize_base, NormalizerConfig};

pub const DEFAULT_BATCH_SIZE: usize = 64;

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error("no pivot sentences to translate")]
    EmptyPivot,
    #[error("backend {backend} failed on batch {batch}: {message}")]
    Backend {
        backend: String,
        batch: usize,
        message: String,
    },
    #[error("backend {backend} returned {got} outputs for {expected} inputs in batch {batch}")]
    OutputLength {
        backend: String,
        batch: usize,
        expected: usize,
        got: usize,
    },
    #[error("{what} corpus has split {split}; only train corpora can be augmented")]
    NotTrain { what: &'static str, split: Split },
    #[error("language pair mismatch: {left} vs {right}")]
    LanguageMismatch { left: String, right: String },
    #[error("dictionary line {line}: {message}")]
    DictionaryFormat { line: usize, message: String },
    #[error("batch size must be at least 1")]
    InvalidBatchSize,
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// Error reported by a backend for one batch.
#[derive(Debug, Error)]
#[error("{0}")]
pub struct BackendError(pub String);

/// Forward-translation service. `translate` must return exactly one output
/// per input, in input order.
pub trait TranslationBackend: Send + Sync {
    fn name(&self) -> &str;

    fn translate(
        &self,
        texts: &[String],
        src: &LangCode,
        tgt: &LangCode,
    ) -> Result<Vec<String>, BackendError>;
}

/// Deterministic test double: rotates the ASCII letters of each token by an
/// amount keyed on a seed and the token length. Reversible via
/// [`MockBackend::invert`].
#[derive(Debug, Clone)]
pub struct MockBackend {
    seed: u64,
}

pub fn mock_backend() -> MockBackend {
    MockBackend::new(0x5eed)
}

impl MockBackend {
    pub fn new(seed: u64) -> Self {
        MockBackend { seed }
    }

    fn shift(&self, token: &str) -> u8 {
        ((self.seed.wrapping_add(token.chars().count() as u64 * 7)) % 25 + 1) as u8
    }

    fn rotate(token: &str, by: u8) -> String {
        token
            .chars()
            .map(|c| match c {
                'a'..='z' => (b'a' + (c as u8 - b'a' + by) % 26) as char,
                'A'..='Z' => (b'A' + (c as u8 - b'A' + by) % 26) as char,
                _ => c,
            })
            .collect()
    }

    fn map_tokens(&self, text: &str, forward: bool) -> String {
        text.split(' ')
            .map(|tok| {
                let k = self.shift(tok);
                Self::rotate(tok, if forward { k } else { 26 - k })
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn encode(&self, text: &str) -> String {
        self.map_tokens(text, true)
    }

    pub fn invert(&self, text: &str) -> String {
        self.map_tokens(text, false)
    }
}

impl TranslationBackend for MockBackend {
    fn name(&self) -> &str {
        "mock"
    }

    fn translate(
        &self,
        texts: &[String],
        _src: &LangCode,
        _tgt: &LangCode,
    ) -> Result<Vec<String>, BackendError> {
        Ok(texts.iter().map(|t| self.encode(t)).collect())
    }
}

pub fn generate_synthetic(
    pivot_texts: &[String],
    backend: &dyn TranslationBackend,
    src: &LangCode,
    tgt: &LangCode,
) -> Result<Corpus, AugmentError> {
    generate_synthetic_batched(pivot_texts, backend, src, tgt, DEFAULT_BATCH_SIZE)
}

/// Translates `pivot_texts` in batches and pairs each pivot sentence with
/// its translation as a synthetic training pair.
pub fn generate_synthetic_batched(
    pivot_texts: &[String],
    backend: &dyn TranslationBackend,
    src: &LangCode,
    tgt: &LangCode,
    batch_size: usize,
) -> Result<Corpus, AugmentError> {
    if pivot_texts.is_empty() {
        return Err(AugmentError::EmptyPivot);
    }
    if batch_size == 0 {
        return Err(AugmentError::InvalidBatchSize);
    }
    let mut outputs = Vec::with_capacity(pivot_texts.len());
    for (batch, chunk) in pivot_texts.chunks(batch_size).enumerate() {
        let out = backend
            .translate(chunk, src, tgt)
            .map_err(|e| AugmentError::Backend {
                backend: backend.name().to_string(),
                batch,
                message: e.0,
            })?;
        if out.len() != chunk.len() {
            return Err(AugmentError::OutputLength {
                backend: backend.name().to_string(),
                batch,
                expected: chunk.len(),
                got: out.len(),
            });
        }
        outputs.extend(out);
    }
    Ok(Corpus::from_texts(
        src.clone(),
        tgt.clone(),
        Split::Train,
        Provenance::Synthetic,
        pivot_texts.iter().cloned().zip(outputs),
    )?)
}

fn require_train(what: &'static str, corpus: &Corpus) -> Result<(), AugmentError> {
    if corpus.split() != Split::Train {
        return Err(AugmentError::NotTrain {
            what,
            split: corpus.split(),
        });
    }
    Ok(())
}

/// Curated pairs followed by synthetic pairs, optionally shuffled with a
/// seeded RNG. Ids are renumbered `0..n` in output order.
pub fn merge_augmented(
    curated: &Corpus,
    synthetic: &Corpus,
    shuffle_seed: Option<u64>,
) -> Result<Corpus, AugmentError> {
    require_train("curated", curated)?;
    require_train("synthetic", synthetic)?;
    if curated.src_lang() != synthetic.src_lang() || curated.tgt_lang() != synthetic.tgt_lang() {
        return Err(AugmentError::LanguageMismatch {
            left: format!("{}-{}", curated.src_lang(), curated.tgt_lang()),
            right: format!("{}-{}", synthetic.src_lang(), synthetic.tgt_lang()),
        });
    }
    let mut pairs: Vec<SentencePair> = curated
        .pairs()
        .iter()
        .chain(synthetic.pairs())
        .cloned()
        .collect();
    if let Some(seed) = shuffle_seed {
        pairs.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let pairs = pairs
        .into_iter()
        .enumerate()
        .map(|(i, p)| p.with_id(i as u64))
        .collect();
    Ok(curated.with_pairs(pairs)?)
}

/// A bilingual lexicon entry; both sides are non-empty after base
/// normalization.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DictionaryEntry {
    src_term: String,
    tgt_term: String,
}

impl DictionaryEntry {
    pub fn new(src_term: &str, tgt_term: &str) -> Option<Self> {
        let cfg = NormalizerConfig::base(LangCode::spanish());
        let src_term = normalize_base(src_term, &cfg);
        let tgt_term = normalize_base(tgt_term, &cfg);
        (!src_term.is_empty() && !tgt_term.is_empty()).then_some(DictionaryEntry { src_term, tgt_term })
    }

    pub fn src_term(&self) -> &str {
        &self.src_term
    }

    pub fn tgt_term(&self) -> &str {
        &self.tgt_term
    }
}

/// Parses a two-column TSV lexicon without header. Blank lines are skipped.
pub fn parse_dictionary(text: &str) -> Result<Vec<DictionaryEntry>, AugmentError> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 2 {
            return Err(AugmentError::DictionaryFormat {
                line: i + 1,
                message: format!("expected 2 tab-separated columns, found {}", cols.len()),
            });
        }
        let entry = DictionaryEntry::new(cols[0], cols[1]).ok_or_else(|| AugmentError::DictionaryFormat {
            line: i + 1,
            message: "empty term".into(),
        })?;
        entries.push(entry);
    }
    Ok(entries)
}

pub fn load_dictionary(path: &Path) -> Result<Vec<DictionaryEntry>, AugmentError> {
    let lines = read_lines(path)?;
    parse_dictionary(&lines.join("\n"))
}

/// Appends entries as dictionary-provenance pairs. Entries already present
/// as dictionary pairs (or repeated within `entries`) are skipped.
pub fn append_dictionary(corpus: &Corpus, entries: &[DictionaryEntry]) -> Result<Corpus, AugmentError> {
    require_train("target", corpus)?;
    let mut seen: HashSet<(String, String)> = corpus
        .pairs()
        .iter()
        .filter(|p| p.provenance() == Provenance::Dictionary)
        .map(|p| (p.src_text().to_string(), p.tgt_text().to_string()))
        .collect();
    let mut pairs = corpus.pairs().to_vec();
    let mut next = corpus.next_id();
    for e in entries {
        if seen.insert((e.src_term.clone(), e.tgt_term.clone())) {
            pairs.push(SentencePair::new(next, &e.src_term, &e.tgt_term, Provenance::Dictionary)?);
            next += 1;
        }
    }
    Ok(corpus.with_pairs(pairs)?)
}

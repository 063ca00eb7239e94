//! Sentence pairs, corpora and line-aligned parallel file I/O.

use std::fmt;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("invalid language code {0:?}: expected lowercase ASCII letters")]
    InvalidLang(String),
    #[error("unknown split {0:?}: expected train, dev or test")]
    InvalidSplit(String),
    #[error("unknown provenance {0:?}: expected curated, synthetic or dictionary")]
    InvalidProvenance(String),
    #[error("source and target language are both {0}")]
    SameLanguage(LangCode),
    #[error("pair ids must be strictly increasing: id {next} follows {prev}")]
    NonIncreasingIds { prev: u64, next: u64 },
    #[error("pair {id}: text contains a line break")]
    LineBreak { id: u64 },
    #[error("line count mismatch: {src_path} has {src_lines} lines, {tgt_path} has {tgt_lines}")]
    LineCountMismatch {
        src_path: PathBuf,
        src_lines: usize,
        tgt_path: PathBuf,
        tgt_lines: usize,
    },
    #[error("{path}: invalid UTF-8 at byte offset {offset} (line {line})")]
    InvalidUtf8 {
        path: PathBuf,
        offset: usize,
        line: usize,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl CorpusError {
    fn io(path: &Path, source: io::Error) -> Self {
        CorpusError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Short lowercase language identifier such as `es`, `aym`, `gn` or `quy`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct LangCode(String);

impl LangCode {
    pub fn new(code: impl Into<String>) -> Result<Self, CorpusError> {
        let code = code.into();
        if code.is_empty() || !code.bytes().all(|b| b.is_ascii_lowercase()) {
            return Err(CorpusError::InvalidLang(code));
        }
        Ok(LangCode(code))
    }

    pub fn spanish() -> Self {
        LangCode("es".into())
    }

    pub fn aymara() -> Self {
        LangCode("aym".into())
    }

    pub fn guarani() -> Self {
        LangCode("gn".into())
    }

    pub fn quechua() -> Self {
        LangCode("quy".into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for LangCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for LangCode {
    type Err = CorpusError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LangCode::new(s)
    }
}

impl TryFrom<String> for LangCode {
    type Error = CorpusError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        LangCode::new(s)
    }
}

impl From<LangCode> for String {
    fn from(l: LangCode) -> String {
        l.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = CorpusError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            _ => Err(CorpusError::InvalidSplit(s.to_string())),
        }
    }
}

/// Where a pair came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Curated,
    Synthetic,
    Dictionary,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Curated => "curated",
            Provenance::Synthetic => "synthetic",
            Provenance::Dictionary => "dictionary",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Provenance {
    type Err = CorpusError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "curated" => Ok(Provenance::Curated),
            "synthetic" => Ok(Provenance::Synthetic),
            "dictionary" => Ok(Provenance::Dictionary),
            _ => Err(CorpusError::InvalidProvenance(s.to_string())),
        }
    }
}

/// Number of maximal non-whitespace runs in `text`.
pub fn token_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// One aligned source/target sentence.
///
/// Token lengths are derived from the texts at construction and whenever the
/// texts are replaced, so they can never go stale.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentencePair {
    id: u64,
    src_text: String,
    tgt_text: String,
    provenance: Provenance,
    src_len: usize,
    tgt_len: usize,
}

impl SentencePair {
    pub fn new(
        id: u64,
        src_text: impl Into<String>,
        tgt_text: impl Into<String>,
        provenance: Provenance,
    ) -> Result<Self, CorpusError> {
        let src_text = src_text.into();
        let tgt_text = tgt_text.into();
        if has_line_break(&src_text) || has_line_break(&tgt_text) {
            return Err(CorpusError::LineBreak { id });
        }
        Ok(SentencePair {
            id,
            src_len: token_count(&src_text),
            tgt_len: token_count(&tgt_text),
            src_text,
            tgt_text,
            provenance,
        })
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn src_text(&self) -> &str {
        &self.src_text
    }

    pub fn tgt_text(&self) -> &str {
        &self.tgt_text
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn src_len(&self) -> usize {
        self.src_len
    }

    pub fn tgt_len(&self) -> usize {
        self.tgt_len
    }

    /// Same pair (id, provenance) with replaced texts.
    pub fn with_texts(
        &self,
        src_text: impl Into<String>,
        tgt_text: impl Into<String>,
    ) -> Result<Self, CorpusError> {
        SentencePair::new(self.id, src_text, tgt_text, self.provenance)
    }

    pub(crate) fn with_id(mut self, id: u64) -> Self {
        self.id = id;
        self
    }
}

fn has_line_break(s: &str) -> bool {
    s.contains(['\n', '\r'])
}

/// Ordered pairs for one language pair and split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    src_lang: LangCode,
    tgt_lang: LangCode,
    split: Split,
    pairs: Vec<SentencePair>,
}

impl Corpus {
    pub fn new(
        src_lang: LangCode,
        tgt_lang: LangCode,
        split: Split,
        pairs: Vec<SentencePair>,
    ) -> Result<Self, CorpusError> {
        if src_lang == tgt_lang {
            return Err(CorpusError::SameLanguage(src_lang));
        }
        for w in pairs.windows(2) {
            if w[1].id <= w[0].id {
                return Err(CorpusError::NonIncreasingIds {
                    prev: w[0].id,
                    next: w[1].id,
                });
            }
        }
        Ok(Corpus {
            src_lang,
            tgt_lang,
            split,
            pairs,
        })
    }

    /// Builds a corpus from parallel texts, assigning ids `0..n`.
    pub fn from_texts<S, T>(
        src_lang: LangCode,
        tgt_lang: LangCode,
        split: Split,
        provenance: Provenance,
        texts: impl IntoIterator<Item = (S, T)>,
    ) -> Result<Self, CorpusError>
    where
        S: Into<String>,
        T: Into<String>,
    {
        let pairs = texts
            .into_iter()
            .enumerate()
            .map(|(i, (s, t))| SentencePair::new(i as u64, s, t, provenance))
            .collect::<Result<Vec<_>, _>>()?;
        Corpus::new(src_lang, tgt_lang, split, pairs)
    }

    pub fn src_lang(&self) -> &LangCode {
        &self.src_lang
    }

    pub fn tgt_lang(&self) -> &LangCode {
        &self.tgt_lang
    }

    pub fn split(&self) -> Split {
        self.split
    }

    pub fn pairs(&self) -> &[SentencePair] {
        &self.pairs
    }

    pub fn into_pairs(self) -> Vec<SentencePair> {
        self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Next free id after the last pair.
    pub fn next_id(&self) -> u64 {
        self.pairs.last().map_or(0, |p| p.id + 1)
    }

    /// Same languages and split, different pairs.
    pub fn with_pairs(&self, pairs: Vec<SentencePair>) -> Result<Self, CorpusError> {
        Corpus::new(self.src_lang.clone(), self.tgt_lang.clone(), self.split, pairs)
    }

    /// Counts per provenance class, in `curated, synthetic, dictionary` order.
    pub fn provenance_counts(&self) -> [usize; 3] {
        let mut counts = [0; 3];
        for p in &self.pairs {
            let slot = match p.provenance {
                Provenance::Curated => 0,
                Provenance::Synthetic => 1,
                Provenance::Dictionary => 2,
            };
            counts[slot] += 1;
        }
        counts
    }
}

/// Reads a UTF-8 file as one sentence per line. Carriage returns are dropped;
/// a trailing newline does not open an extra line.
pub fn read_lines(path: &Path) -> Result<Vec<String>, CorpusError> {
    let bytes = fs::read(path).map_err(|e| CorpusError::io(path, e))?;
    let text = match std::str::from_utf8(&bytes) {
        Ok(t) => t,
        Err(e) => {
            let offset = e.valid_up_to();
            let line = bytes[..offset].iter().filter(|&&b| b == b'\n').count() + 1;
            return Err(CorpusError::InvalidUtf8 {
                path: path.to_path_buf(),
                offset,
                line,
            });
        }
    };
    if text.is_empty() {
        return Ok(Vec::new());
    }
    let body = text.strip_suffix('\n').unwrap_or(text);
    Ok(body.split('\n').map(|l| l.replace('\r', "")).collect())
}

/// Writes one line per item, each terminated by `\n`.
pub fn write_lines<'a>(
    path: &Path,
    lines: impl IntoIterator<Item = &'a str>,
) -> Result<(), CorpusError> {
    let file = fs::File::create(path).map_err(|e| CorpusError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for line in lines {
        w.write_all(line.as_bytes())
            .and_then(|_| w.write_all(b"\n"))
            .map_err(|e| CorpusError::io(path, e))?;
    }
    w.flush().map_err(|e| CorpusError::io(path, e))
}

/// Loads two line-aligned files into a curated corpus with ids `0..n`.
pub fn load_corpus(
    src_path: &Path,
    tgt_path: &Path,
    src_lang: LangCode,
    tgt_lang: LangCode,
    split: Split,
) -> Result<Corpus, CorpusError> {
    let src = read_lines(src_path)?;
    let tgt = read_lines(tgt_path)?;
    if src.len() != tgt.len() {
        return Err(CorpusError::LineCountMismatch {
            src_path: src_path.to_path_buf(),
            src_lines: src.len(),
            tgt_path: tgt_path.to_path_buf(),
            tgt_lines: tgt.len(),
        });
    }
    Corpus::from_texts(
        src_lang,
        tgt_lang,
        split,
        Provenance::Curated,
        src.into_iter().zip(tgt),
    )
}

pub fn write_corpus(corpus: &Corpus, src_path: &Path, tgt_path: &Path) -> Result<(), CorpusError> {
    write_lines(src_path, corpus.pairs.iter().map(|p| p.src_text()))?;
    write_lines(tgt_path, corpus.pairs.iter().map(|p| p.tgt_text()))
}

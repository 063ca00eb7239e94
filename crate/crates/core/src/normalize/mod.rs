//! Deterministic text normalization.
//!
//! Every language shares a base pass (apostrophe folding, Unicode
//! normalization, optional lowercasing, whitespace canonicalization). On top
//! of that each language enables its own orthographic rules:
//!
//! * Guarani: symbol stripping with a preserve set, then digraph merging.
//! * Quechua: four token-merge rules for intra-word spacing artifacts.
//! * Aymara: joining of split `letter ' letter` sequences.
//!
//! Token rules run in passes until nothing changes (at most
//! [`MAX_RULE_PASSES`] passes). Each change can be recorded as a
//! [`RuleApplication`] for auditing.

mod aymara;
mod guarani;
mod quechua;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::corpus::LangCode;

pub use guarani::GUARANI_PRESERVE;

/// Upper bound on token-rule passes per string.
pub const MAX_RULE_PASSES: usize = 10;

/// Characters folded onto U+0027 by the base pass.
pub const APOSTROPHE_VARIANTS: [char; 4] = ['\u{2019}', '\u{02BC}', '\u{00B4}', '\u{0060}'];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NormalizeError {
    #[error("no normalizer for language {0:?} (expected es, gn, quy or aym)")]
    UnknownLanguage(String),
    #[error("rule {0} is enabled more than once")]
    DuplicateRule(RuleId),
    #[error("symbol stripping is enabled but the preserve set is empty")]
    EmptyPreserveSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnicodeForm {
    Nfc,
    #[default]
    Nfkc,
}

impl UnicodeForm {
    fn apply(self, text: &str) -> String {
        match self {
            UnicodeForm::Nfc => text.nfc().collect(),
            UnicodeForm::Nfkc => text.nfkc().collect(),
        }
    }
}

/// Identifies a normalization step in traces and configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RuleId {
    #[serde(rename = "base.apostrophe")]
    Apostrophe,
    #[serde(rename = "base.unicode")]
    UnicodeForm,
    #[serde(rename = "base.lowercase")]
    Lowercase,
    #[serde(rename = "base.whitespace")]
    Whitespace,
    #[serde(rename = "gn.strip_symbols")]
    StripSymbols,
    #[serde(rename = "gn.digraph")]
    GuaraniDigraph,
    /// `A ch|ll B` -> `AchB`
    #[serde(rename = "quy.triple")]
    QuechuaTriple,
    /// `ch|ll Bxx` -> `chBxx`
    #[serde(rename = "quy.onset")]
    QuechuaOnset,
    /// `ch V` -> `chV`
    #[serde(rename = "quy.isolated")]
    QuechuaIsolated,
    /// single letter joins its left neighbour under the phonotactic gate
    #[serde(rename = "quy.fragment")]
    QuechuaFragment,
    #[serde(rename = "aym.apostrophe_join")]
    AymaraApostrophe,
}

impl RuleId {
    pub fn as_str(self) -> &'static str {
        match self {
            RuleId::Apostrophe => "base.apostrophe",
            RuleId::UnicodeForm => "base.unicode",
            RuleId::Lowercase => "base.lowercase",
            RuleId::Whitespace => "base.whitespace",
            RuleId::StripSymbols => "gn.strip_symbols",
            RuleId::GuaraniDigraph => "gn.digraph",
            RuleId::QuechuaTriple => "quy.triple",
            RuleId::QuechuaOnset => "quy.onset",
            RuleId::QuechuaIsolated => "quy.isolated",
            RuleId::QuechuaFragment => "quy.fragment",
            RuleId::AymaraApostrophe => "aym.apostrophe_join",
        }
    }

    fn is_token_rule(self) -> bool {
        matches!(
            self,
            RuleId::GuaraniDigraph
                | RuleId::QuechuaTriple
                | RuleId::QuechuaOnset
                | RuleId::QuechuaIsolated
                | RuleId::QuechuaFragment
                | RuleId::AymaraApostrophe
        )
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One recorded rewrite.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RuleApplication {
    pub rule_id: RuleId,
    #[serde(rename = "before")]
    pub span_before: String,
    #[serde(rename = "after")]
    pub span_after: String,
}

/// Collects rule applications; a disabled trace drops them.
#[derive(Debug, Default)]
pub struct Trace {
    enabled: bool,
    entries: Vec<RuleApplication>,
}

impl Trace {
    pub fn enabled() -> Self {
        Trace {
            enabled: true,
            entries: Vec::new(),
        }
    }

    pub fn disabled() -> Self {
        Trace::default()
    }

    pub fn entries(&self) -> &[RuleApplication] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<RuleApplication> {
        self.entries
    }

    pub(crate) fn record(&mut self, rule_id: RuleId, before: &str, after: &str) {
        if self.enabled && before != after {
            self.entries.push(RuleApplication {
                rule_id,
                span_before: before.to_string(),
                span_after: after.to_string(),
            });
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizerConfig {
    pub language: LangCode,
    pub unicode_form: UnicodeForm,
    pub lowercase: bool,
    /// Codepoints or sequences that survive symbol stripping.
    pub preserve_set: BTreeSet<String>,
    /// Language rules, applied in this order.
    pub enabled_rules: Vec<RuleId>,
}

impl NormalizerConfig {
    /// Base pass only; used for Spanish and as the common prefix elsewhere.
    pub fn base(language: LangCode) -> Self {
        NormalizerConfig {
            language,
            unicode_form: UnicodeForm::Nfkc,
            lowercase: false,
            preserve_set: BTreeSet::new(),
            enabled_rules: Vec::new(),
        }
    }

    pub fn guarani() -> Self {
        NormalizerConfig {
            lowercase: true,
            preserve_set: GUARANI_PRESERVE.iter().map(|s| s.to_string()).collect(),
            enabled_rules: vec![RuleId::StripSymbols, RuleId::GuaraniDigraph],
            ..NormalizerConfig::base(LangCode::guarani())
        }
    }

    pub fn quechua() -> Self {
        NormalizerConfig {
            enabled_rules: vec![
                RuleId::QuechuaTriple,
                RuleId::QuechuaOnset,
                RuleId::QuechuaIsolated,
                RuleId::QuechuaFragment,
            ],
            ..NormalizerConfig::base(LangCode::quechua())
        }
    }

    pub fn aymara() -> Self {
        NormalizerConfig {
            enabled_rules: vec![RuleId::AymaraApostrophe],
            ..NormalizerConfig::base(LangCode::aymara())
        }
    }

    /// Default configuration for `es`, `gn`, `quy` or `aym`.
    pub fn for_language(lang: &LangCode) -> Result<Self, NormalizeError> {
        match lang.as_str() {
            "es" => Ok(NormalizerConfig::base(lang.clone())),
            "gn" => Ok(NormalizerConfig::guarani()),
            "quy" => Ok(NormalizerConfig::quechua()),
            "aym" => Ok(NormalizerConfig::aymara()),
            other => Err(NormalizeError::UnknownLanguage(other.to_string())),
        }
    }

    pub fn validate(&self) -> Result<(), NormalizeError> {
        let mut seen = BTreeSet::new();
        for &r in &self.enabled_rules {
            if !seen.insert(r) {
                return Err(NormalizeError::DuplicateRule(r));
            }
        }
        if self.enabled_rules.contains(&RuleId::StripSymbols) && self.preserve_set.is_empty() {
            return Err(NormalizeError::EmptyPreserveSet);
        }
        Ok(())
    }
}

/// A validated normalizer. Cheap to share across threads.
#[derive(Debug, Clone)]
pub struct Normalizer {
    config: NormalizerConfig,
    preserve_chars: BTreeSet<char>,
    preserve_seqs: Vec<Vec<char>>,
}

impl Normalizer {
    pub fn new(config: NormalizerConfig) -> Result<Self, NormalizeError> {
        config.validate()?;
        let mut preserve_chars = BTreeSet::new();
        let mut preserve_seqs = Vec::new();
        for entry in &config.preserve_set {
            let chars: Vec<char> = entry.chars().collect();
            match chars.len() {
                0 => {}
                1 => {
                    preserve_chars.insert(chars[0]);
                }
                _ => preserve_seqs.push(chars),
            }
        }
        Ok(Normalizer {
            config,
            preserve_chars,
            preserve_seqs,
        })
    }

    pub fn for_language(lang: &LangCode) -> Result<Self, NormalizeError> {
        Normalizer::new(NormalizerConfig::for_language(lang)?)
    }

    pub fn config(&self) -> &NormalizerConfig {
        &self.config
    }

    pub fn normalize(&self, text: &str) -> String {
        self.normalize_traced(text, &mut Trace::disabled())
    }

    pub fn normalize_traced(&self, text: &str, trace: &mut Trace) -> String {
        let form = self.config.unicode_form;
        let mut s = fold_apostrophes(text, trace);
        s = step(trace, RuleId::UnicodeForm, s, |t| form.apply(t));
        s = fold_apostrophes(&s, trace);
        if self.config.lowercase {
            s = step(trace, RuleId::Lowercase, s, |t| t.to_lowercase());
        }
        if self.config.enabled_rules.contains(&RuleId::StripSymbols) {
            s = step(trace, RuleId::StripSymbols, s, |t| self.strip_symbols(t));
            s = step(trace, RuleId::UnicodeForm, s, |t| form.apply(t));
        }
        s = step(trace, RuleId::Whitespace, s, collapse_whitespace);

        let token_rules: Vec<RuleId> = self
            .config
            .enabled_rules
            .iter()
            .copied()
            .filter(|r| r.is_token_rule())
            .collect();
        if token_rules.is_empty() {
            return s;
        }
        for _ in 0..MAX_RULE_PASSES {
            let before = s.clone();
            for &rule in &token_rules {
                s = apply_token_rule(rule, &s, trace);
            }
            if s == before {
                break;
            }
        }
        s
    }

    fn strip_symbols(&self, text: &str) -> String {
        let chars: Vec<char> = text.chars().collect();
        let mut protected = vec![false; chars.len()];
        for seq in &self.preserve_seqs {
            let n = seq.len();
            if n > chars.len() {
                continue;
            }
            for i in 0..=chars.len() - n {
                if chars[i..i + n] == seq[..] {
                    protected[i..i + n].iter_mut().for_each(|p| *p = true);
                }
            }
        }
        chars
            .iter()
            .zip(&protected)
            .filter(|(&c, &prot)| prot || self.keeps_char(c))
            .map(|(&c, _)| c)
            .collect()
    }

    fn keeps_char(&self, c: char) -> bool {
        c.is_alphanumeric()
            || c.is_whitespace()
            || unicode_normalization::char::is_combining_mark(c)
            || self.preserve_chars.contains(&c)
    }
}

fn step(trace: &mut Trace, rule: RuleId, s: String, f: impl FnOnce(&str) -> String) -> String {
    let out = f(&s);
    trace.record(rule, &s, &out);
    out
}

fn fold_apostrophes(text: &str, trace: &mut Trace) -> String {
    let out: String = text
        .chars()
        .map(|c| if APOSTROPHE_VARIANTS.contains(&c) { '\'' } else { c })
        .collect();
    trace.record(RuleId::Apostrophe, text, &out);
    out
}

/// Collapses whitespace runs to one U+0020 and trims both ends.
pub fn collapse_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn apply_token_rule(rule: RuleId, text: &str, trace: &mut Trace) -> String {
    match rule {
        RuleId::GuaraniDigraph => guarani::merge_digraphs(text, trace),
        RuleId::QuechuaTriple => quechua::merge_triples(text, trace),
        RuleId::QuechuaOnset => quechua::merge_onsets(text, trace),
        RuleId::QuechuaIsolated => quechua::merge_isolated(text, trace),
        RuleId::QuechuaFragment => quechua::merge_fragments(text, trace),
        RuleId::AymaraApostrophe => aymara::join_apostrophes(text, trace),
        _ => text.to_string(),
    }
}

/// Base pass only: apostrophes, Unicode form, optional lowercasing, whitespace.
pub fn normalize_base(text: &str, config: &NormalizerConfig) -> String {
    let base = NormalizerConfig {
        enabled_rules: Vec::new(),
        preserve_set: BTreeSet::new(),
        ..config.clone()
    };
    Normalizer {
        config: base,
        preserve_chars: BTreeSet::new(),
        preserve_seqs: Vec::new(),
    }
    .normalize(text)
}

pub fn normalize_guarani(text: &str) -> String {
    guarani_normalizer().normalize(text)
}

pub fn normalize_quechua(text: &str) -> String {
    quechua_normalizer().normalize(text)
}

pub fn normalize_aymara(text: &str) -> String {
    aymara_normalizer().normalize(text)
}

fn guarani_normalizer() -> &'static Normalizer {
    static N: std::sync::OnceLock<Normalizer> = std::sync::OnceLock::new();
    N.get_or_init(|| Normalizer::new(NormalizerConfig::guarani()).expect("valid preset"))
}

fn quechua_normalizer() -> &'static Normalizer {
    static N: std::sync::OnceLock<Normalizer> = std::sync::OnceLock::new();
    N.get_or_init(|| Normalizer::new(NormalizerConfig::quechua()).expect("valid preset"))
}

fn aymara_normalizer() -> &'static Normalizer {
    static N: std::sync::OnceLock<Normalizer> = std::sync::OnceLock::new();
    N.get_or_init(|| Normalizer::new(NormalizerConfig::aymara()).expect("valid preset"))
}

/// Dispatches on `lang`; Spanish gets the base pass only.
pub fn normalize_for_language(text: &str, lang: &LangCode) -> Result<String, NormalizeError> {
    match lang.as_str() {
        "es" => Ok(normalize_base(text, &NormalizerConfig::base(lang.clone()))),
        "gn" => Ok(normalize_guarani(text)),
        "quy" => Ok(normalize_quechua(text)),
        "aym" => Ok(normalize_aymara(text)),
        other => Err(NormalizeError::UnknownLanguage(other.to_string())),
    }
}

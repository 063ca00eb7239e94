//! Sentence-pair noise filters with a per-pair decision log.
//!
//! [`apply_filters`] evaluates the per-pair rules in a fixed order (empty,
//! punctuation-only, boilerplate, too-long, numeric mismatch, length ratio)
//! and then removes exact duplicates among the survivors. Every input pair
//! gets exactly one [`FilterDecision`], and a dropped pair carries the first
//! rule it failed.

use std::collections::{HashMap, HashSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, CorpusError, Provenance, SentencePair};

#[derive(Debug, Error)]
pub enum FilterError {
    #[error("tau must be greater than 1, got {0}")]
    InvalidTau(f64),
    #[error("max_len_tokens must be at least 1")]
    InvalidMaxLen,
    #[error("numeric_jaccard_min must lie in [0, 1], got {0}")]
    InvalidJaccard(f64),
    #[error("rule {0} listed more than once")]
    DuplicateRule(DropReason),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    Empty,
    PunctuationOnly,
    Boilerplate,
    TooLong,
    NumericMismatch,
    LengthRatio,
    Duplicate,
}

impl DropReason {
    /// Pipeline order.
    pub const ALL: [DropReason; 7] = [
        DropReason::Empty,
        DropReason::PunctuationOnly,
        DropReason::Boilerplate,
        DropReason::TooLong,
        DropReason::NumericMismatch,
        DropReason::LengthRatio,
        DropReason::Duplicate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DropReason::Empty => "empty",
            DropReason::PunctuationOnly => "punctuation_only",
            DropReason::Boilerplate => "boilerplate",
            DropReason::TooLong => "too_long",
            DropReason::NumericMismatch => "numeric_mismatch",
            DropReason::LengthRatio => "length_ratio",
            DropReason::Duplicate => "duplicate",
        }
    }
}

impl fmt::Display for DropReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Keep,
    Drop,
}

/// Keep/drop verdict for one pair. Serializes as one JSON Lines record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterDecision {
    pub pair_id: u64,
    pub verdict: Verdict,
    pub reason: Option<DropReason>,
    pub detail: String,
}

impl FilterDecision {
    pub fn keep(pair_id: u64) -> Self {
        FilterDecision {
            pair_id,
            verdict: Verdict::Keep,
            reason: None,
            detail: String::new(),
        }
    }

    pub fn drop(pair_id: u64, reason: DropReason, detail: impl Into<String>) -> Self {
        FilterDecision {
            pair_id,
            verdict: Verdict::Drop,
            reason: Some(reason),
            detail: detail.into(),
        }
    }

    pub fn is_keep(&self) -> bool {
        self.verdict == Verdict::Keep
    }
}

pub const DEFAULT_URL_MARKERS: [&str; 3] = ["http://", "https://", "www."];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    pub tau: f64,
    pub max_len_tokens: usize,
    pub numeric_jaccard_min: f64,
    pub url_markers: Vec<String>,
    /// Rules to run; their order here does not change pipeline order.
    pub rules_enabled: Vec<DropReason>,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            tau: 2.5,
            max_len_tokens: 200,
            numeric_jaccard_min: 0.5,
            url_markers: DEFAULT_URL_MARKERS.iter().map(|s| s.to_string()).collect(),
            rules_enabled: DropReason::ALL.to_vec(),
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<(), FilterError> {
        if self.tau.is_nan() || self.tau <= 1.0 {
            return Err(FilterError::InvalidTau(self.tau));
        }
        if self.max_len_tokens < 1 {
            return Err(FilterError::InvalidMaxLen);
        }
        if !(0.0..=1.0).contains(&self.numeric_jaccard_min) {
            return Err(FilterError::InvalidJaccard(self.numeric_jaccard_min));
        }
        let mut seen = HashSet::new();
        for &r in &self.rules_enabled {
            if !seen.insert(r) {
                return Err(FilterError::DuplicateRule(r));
            }
        }
        Ok(())
    }

    fn enabled(&self, r: DropReason) -> bool {
        self.rules_enabled.contains(&r)
    }
}

/// `1/tau <= tgt/src <= tau`, evaluated by cross-multiplication so the
/// bounds are exact for integer lengths.
pub fn length_ratio_within(src_len: usize, tgt_len: usize, tau: f64) -> bool {
    let (s, t) = (src_len as f64, tgt_len as f64);
    t <= tau * s && s <= tau * t
}

pub fn length_ratio_filter(pair: &SentencePair, tau: f64) -> FilterDecision {
    let (s, t) = (pair.src_len(), pair.tgt_len());
    if s == 0 || t == 0 {
        return FilterDecision::drop(pair.id(), DropReason::Empty, format!("src_len={s} tgt_len={t}"));
    }
    if length_ratio_within(s, t, tau) {
        FilterDecision::keep(pair.id())
    } else {
        FilterDecision::drop(
            pair.id(),
            DropReason::LengthRatio,
            format!("ratio {:.4} outside [{:.4}, {tau}]", t as f64 / s as f64, 1.0 / tau),
        )
    }
}

/// Maximal runs of ASCII digits, with multiplicity.
fn digit_runs(text: &str) -> HashMap<&str, usize> {
    let mut runs = HashMap::new();
    for run in text.split(|c: char| !c.is_ascii_digit()).filter(|r| !r.is_empty()) {
        *runs.entry(run).or_insert(0) += 1;
    }
    runs
}

/// Multiset Jaccard index of the digit runs on both sides; `None` when
/// neither side has digits.
pub fn numeric_jaccard(src: &str, tgt: &str) -> Option<f64> {
    let s = digit_runs(src);
    let t = digit_runs(tgt);
    if s.is_empty() && t.is_empty() {
        return None;
    }
    let mut inter = 0usize;
    let mut union = 0usize;
    for (k, &a) in &s {
        let b = t.get(k).copied().unwrap_or(0);
        inter += a.min(b);
        union += a.max(b);
    }
    union += t
        .iter()
        .filter(|(k, _)| !s.contains_key(*k))
        .map(|(_, &b)| b)
        .sum::<usize>();
    Some(inter as f64 / union as f64)
}

pub fn numeric_mismatch_filter(pair: &SentencePair, min_jaccard: f64) -> FilterDecision {
    match numeric_jaccard(pair.src_text(), pair.tgt_text()) {
        Some(j) if j < min_jaccard => FilterDecision::drop(
            pair.id(),
            DropReason::NumericMismatch,
            format!("digit-run jaccard {j:.4} < {min_jaccard}"),
        ),
        _ => FilterDecision::keep(pair.id()),
    }
}

fn is_punctuation_only(text: &str) -> bool {
    !text.chars().any(char::is_alphanumeric)
}

fn find_marker<'a>(text: &str, markers: &'a [String]) -> Option<&'a str> {
    let lower = text.to_lowercase();
    markers
        .iter()
        .find(|m| lower.contains(&m.to_lowercase()))
        .map(String::as_str)
}

/// Empty sides, punctuation-only sides and URL-like content, checked in
/// that order.
pub fn boilerplate_filter(pair: &SentencePair, url_markers: &[String]) -> FilterDecision {
    if let Some(d) = check_empty(pair) {
        return d;
    }
    if let Some(d) = check_punctuation(pair) {
        return d;
    }
    check_boilerplate(pair, url_markers).unwrap_or_else(|| FilterDecision::keep(pair.id()))
}

fn side_names(pair: &SentencePair, pred: impl Fn(&str) -> bool) -> Option<&'static str> {
    match (pred(pair.src_text()), pred(pair.tgt_text())) {
        (true, true) => Some("src,tgt"),
        (true, false) => Some("src"),
        (false, true) => Some("tgt"),
        (false, false) => None,
    }
}

fn check_empty(pair: &SentencePair) -> Option<FilterDecision> {
    side_names(pair, |t| t.trim().is_empty())
        .map(|s| FilterDecision::drop(pair.id(), DropReason::Empty, format!("empty {s}")))
}

fn check_punctuation(pair: &SentencePair) -> Option<FilterDecision> {
    side_names(pair, is_punctuation_only).map(|s| {
        FilterDecision::drop(
            pair.id(),
            DropReason::PunctuationOnly,
            format!("no letters or digits in {s}"),
        )
    })
}

fn check_boilerplate(pair: &SentencePair, markers: &[String]) -> Option<FilterDecision> {
    find_marker(pair.src_text(), markers)
        .or_else(|| find_marker(pair.tgt_text(), markers))
        .map(|m| FilterDecision::drop(pair.id(), DropReason::Boilerplate, format!("marker {m:?}")))
}

pub fn max_length_filter(pair: &SentencePair, max_len: usize) -> FilterDecision {
    if pair.src_len() > max_len || pair.tgt_len() > max_len {
        FilterDecision::drop(
            pair.id(),
            DropReason::TooLong,
            format!("src_len={} tgt_len={} > {max_len}", pair.src_len(), pair.tgt_len()),
        )
    } else {
        FilterDecision::keep(pair.id())
    }
}

/// First occurrence of each exact `(src, tgt)` pair is kept.
pub fn dedup(corpus: &Corpus) -> Vec<FilterDecision> {
    dedup_pairs(corpus.pairs())
}

fn dedup_pairs(pairs: &[SentencePair]) -> Vec<FilterDecision> {
    let mut first_seen: HashMap<(&str, &str), u64> = HashMap::new();
    pairs
        .iter()
        .map(|p| match first_seen.get(&(p.src_text(), p.tgt_text())) {
            Some(&first) => {
                FilterDecision::drop(p.id(), DropReason::Duplicate, format!("duplicate of pair {first}"))
            }
            None => {
                first_seen.insert((p.src_text(), p.tgt_text()), p.id());
                FilterDecision::keep(p.id())
            }
        })
        .collect()
}

/// Per-pair rules in pipeline order; dedup is not included.
pub fn evaluate_pair(pair: &SentencePair, config: &FilterConfig) -> FilterDecision {
    let id = pair.id();
    let checks: [(DropReason, &dyn Fn() -> Option<FilterDecision>); 6] = [
        (DropReason::Empty, &|| check_empty(pair)),
        (DropReason::PunctuationOnly, &|| check_punctuation(pair)),
        (DropReason::Boilerplate, &|| check_boilerplate(pair, &config.url_markers)),
        (DropReason::TooLong, &|| {
            Some(max_length_filter(pair, config.max_len_tokens)).filter(|d| !d.is_keep())
        }),
        (DropReason::NumericMismatch, &|| {
            Some(numeric_mismatch_filter(pair, config.numeric_jaccard_min)).filter(|d| !d.is_keep())
        }),
        (DropReason::LengthRatio, &|| {
            // dictionary entries are short on purpose
            if pair.provenance() == Provenance::Dictionary {
                return None;
            }
            Some(length_ratio_filter(pair, config.tau)).filter(|d| !d.is_keep())
        }),
    ];
    for (reason, check) in checks {
        if config.enabled(reason) {
            if let Some(d) = check() {
                return d;
            }
        }
    }
    FilterDecision::keep(id)
}

/// Runs the whole filter pipeline. Returns the surviving pairs (original
/// order and ids) and one decision per input pair, in input order.
pub fn apply_filters(
    corpus: &Corpus,
    config: &FilterConfig,
) -> Result<(Corpus, Vec<FilterDecision>), FilterError> {
    config.validate()?;
    let mut decisions: Vec<FilterDecision> = corpus
        .pairs()
        .par_iter()
        .map(|p| evaluate_pair(p, config))
        .collect();

    if config.enabled(DropReason::Duplicate) {
        let survivors: Vec<(usize, &SentencePair)> = corpus
            .pairs()
            .iter()
            .enumerate()
            .filter(|(i, _)| decisions[*i].is_keep())
            .collect();
        let owned: Vec<SentencePair> = survivors.iter().map(|(_, p)| (*p).clone()).collect();
        for ((i, _), d) in survivors.iter().zip(dedup_pairs(&owned)) {
            decisions[*i] = d;
        }
    }

    let kept: Vec<SentencePair> = corpus
        .pairs()
        .iter()
        .zip(&decisions)
        .filter(|(_, d)| d.is_keep())
        .map(|(p, _)| p.clone())
        .collect();
    Ok((corpus.with_pairs(kept)?, decisions))
}

/// Tally of a decision log.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FilterSummary {
    pub kept: usize,
    pub dropped: usize,
}

impl FilterSummary {
    pub fn from_decisions(decisions: &[FilterDecision]) -> Self {
        let kept = decisions.iter().filter(|d| d.is_keep()).count();
        FilterSummary {
            kept,
            dropped: decisions.len() - kept,
        }
    }

    pub fn total(&self) -> usize {
        self.kept + self.dropped
    }

    /// Same rounding as the statistics report.
    pub fn drop_pct_rounded(&self) -> crate::stats::Hundredths {
        crate::stats::Hundredths::from_ratio(self.dropped as u64 * 100, self.total() as u64)
    }
}

//! chrF++ at sentence and corpus level.
//!
//! Character n-grams (orders `1..=char_order`) are taken over the segment
//! with all whitespace removed; word n-grams (orders `1..=word_order`) over
//! whitespace tokens after splitting one leading or trailing punctuation
//! mark off each token. Precision and recall are averaged over the orders
//! where both sides have n-grams, then combined into an F-beta score.
//!
//! Corpus scores pool the per-order counts of all segments before scoring.

use std::collections::HashMap;
use std::hash::Hash;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::LangCode;
use crate::normalize::{normalize_for_language, NormalizeError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricError {
    #[error("{hypotheses} hypotheses but {references} references")]
    LengthMismatch { hypotheses: usize, references: usize },
    #[error("nothing to score")]
    Empty,
    #[error("invalid chrF configuration: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChrfConfig {
    pub char_order: usize,
    pub word_order: usize,
    pub beta: f64,
    /// Stand-in precision/recall for orders with no n-grams.
    pub eps: f64,
    /// Average per-order F-scores (eps-smoothed) instead of using only the
    /// orders where both sides have n-grams.
    pub eps_smoothing: bool,
}

impl Default for ChrfConfig {
    fn default() -> Self {
        ChrfConfig {
            char_order: 6,
            word_order: 2,
            beta: 2.0,
            eps: 1e-16,
            eps_smoothing: false,
        }
    }
}

impl ChrfConfig {
    pub fn validate(&self) -> Result<(), MetricError> {
        if self.char_order < 1 {
            return Err(MetricError::InvalidConfig("char_order must be at least 1"));
        }
        if self.beta.is_nan() || self.beta <= 0.0 {
            return Err(MetricError::InvalidConfig("beta must be positive"));
        }
        if self.eps.is_nan() || self.eps <= 0.0 {
            return Err(MetricError::InvalidConfig("eps must be positive"));
        }
        Ok(())
    }

    fn orders(&self) -> usize {
        self.char_order + self.word_order
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NgramKind {
    Char,
    Word,
}

/// Match counts for one n-gram order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NgramStats {
    pub kind: NgramKind,
    pub order: usize,
    pub matched: u64,
    pub hyp_total: u64,
    pub ref_total: u64,
}

impl NgramStats {
    fn add(&mut self, other: &NgramStats) {
        self.matched += other.matched;
        self.hyp_total += other.hyp_total;
        self.ref_total += other.ref_total;
    }
}

fn is_split_space(c: char) -> bool {
    // the reference implementation splits on Python's notion of whitespace,
    // which also covers the ASCII information separators
    c.is_whitespace() || ('\u{1c}'..='\u{1f}').contains(&c)
}

fn split_ws(s: &str) -> impl Iterator<Item = &str> {
    s.split(is_split_space).filter(|t| !t.is_empty())
}

fn is_ascii_punct(c: char) -> bool {
    c.is_ascii_punctuation()
}

/// Whitespace tokens with one edge punctuation mark split off: a trailing
/// mark is preferred over a leading one, single characters stay whole.
fn word_tokens(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    for w in split_ws(s) {
        let mut chars = w.chars();
        let first = chars.next().expect("non-empty token");
        let Some(last) = chars.next_back() else {
            out.push(w);
            continue;
        };
        if is_ascii_punct(last) {
            out.push(&w[..w.len() - last.len_utf8()]);
            out.push(&w[w.len() - last.len_utf8()..]);
        } else if is_ascii_punct(first) {
            out.push(&w[..first.len_utf8()]);
            out.push(&w[first.len_utf8()..]);
        } else {
            out.push(w);
        }
    }
    out
}

fn count_ngrams<T: Hash + Eq + Copy>(items: &[T], n: usize) -> HashMap<&[T], u64> {
    let mut counts = HashMap::new();
    if items.len() >= n {
        for gram in items.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

fn match_stats<T: Hash + Eq + Copy>(
    hyp: &[T],
    reference: &[T],
    n: usize,
    kind: NgramKind,
) -> NgramStats {
    let h = count_ngrams(hyp, n);
    let r = count_ngrams(reference, n);
    let mut matched = 0;
    let mut hyp_total = 0;
    for (g, &c) in &h {
        hyp_total += c;
        if let Some(&rc) = r.get(g) {
            matched += c.min(rc);
        }
    }
    NgramStats {
        kind,
        order: n,
        matched,
        // hypothesis n-grams only count when the reference has any
        hyp_total: if r.is_empty() { 0 } else { hyp_total },
        ref_total: r.values().sum(),
    }
}

/// Per-order statistics for one segment: character orders first, then word
/// orders.
pub fn segment_stats(hypothesis: &str, reference: &str, config: &ChrfConfig) -> Vec<NgramStats> {
    let hyp_chars: Vec<char> = hypothesis.chars().filter(|&c| !is_split_space(c)).collect();
    let ref_chars: Vec<char> = reference.chars().filter(|&c| !is_split_space(c)).collect();
    let mut stats: Vec<NgramStats> = (1..=config.char_order)
        .map(|n| match_stats(&hyp_chars, &ref_chars, n, NgramKind::Char))
        .collect();
    if config.word_order > 0 {
        let hyp_words = word_tokens(hypothesis);
        let ref_words = word_tokens(reference);
        stats.extend(
            (1..=config.word_order).map(|n| match_stats(&hyp_words, &ref_words, n, NgramKind::Word)),
        );
    }
    stats
}

/// F-beta score in `[0, 100]` from per-order statistics.
pub fn chrf_from_stats(stats: &[NgramStats], config: &ChrfConfig) -> f64 {
    let eps = config.eps;
    let factor = config.beta * config.beta;
    let mut smoothed = 0.0;
    let mut effective = 0usize;
    let (mut avg_p, mut avg_r) = (0.0, 0.0);
    for s in stats {
        let p = if s.hyp_total > 0 { s.matched as f64 / s.hyp_total as f64 } else { eps };
        let r = if s.ref_total > 0 { s.matched as f64 / s.ref_total as f64 } else { eps };
        let denom = factor * p + r;
        smoothed += if denom > 0.0 { (1.0 + factor) * p * r / denom } else { eps };
        if s.hyp_total > 0 && s.ref_total > 0 {
            avg_p += p;
            avg_r += r;
            effective += 1;
        }
    }
    if config.eps_smoothing {
        return 100.0 * smoothed / config.orders() as f64;
    }
    if effective == 0 {
        return 0.0;
    }
    avg_p /= effective as f64;
    avg_r /= effective as f64;
    if avg_p + avg_r == 0.0 {
        return 0.0;
    }
    100.0 * (1.0 + factor) * avg_p * avg_r / (factor * avg_p + avg_r)
}

pub fn sentence_chrf_pp(hypothesis: &str, reference: &str, config: &ChrfConfig) -> f64 {
    chrf_from_stats(&segment_stats(hypothesis, reference, config), config)
}

/// Per-order statistics summed over all segments.
pub fn corpus_stats<H, R>(
    hypotheses: &[H],
    references: &[R],
    config: &ChrfConfig,
) -> Result<Vec<NgramStats>, MetricError>
where
    H: AsRef<str> + Sync,
    R: AsRef<str> + Sync,
{
    if hypotheses.len() != references.len() {
        return Err(MetricError::LengthMismatch {
            hypotheses: hypotheses.len(),
            references: references.len(),
        });
    }
    if hypotheses.is_empty() {
        return Err(MetricError::Empty);
    }
    config.validate()?;
    let per_segment: Vec<Vec<NgramStats>> = hypotheses
        .par_iter()
        .zip(references.par_iter())
        .map(|(h, r)| segment_stats(h.as_ref(), r.as_ref(), config))
        .collect();
    let mut pooled = per_segment[0].clone();
    for seg in &per_segment[1..] {
        for (acc, s) in pooled.iter_mut().zip(seg) {
            acc.add(s);
        }
    }
    Ok(pooled)
}

pub fn corpus_chrf_pp<H, R>(
    hypotheses: &[H],
    references: &[R],
    config: &ChrfConfig,
) -> Result<f64, MetricError>
where
    H: AsRef<str> + Sync,
    R: AsRef<str> + Sync,
{
    let pooled = corpus_stats(hypotheses, references, config)?;
    Ok(chrf_from_stats(&pooled, config))
}

/// Normalizes both sides for `lang`, then scores the corpus.
pub fn score_with_normalization<H, R>(
    hypotheses: &[H],
    references: &[R],
    lang: &LangCode,
    config: &ChrfConfig,
) -> Result<f64, MetricError>
where
    H: AsRef<str> + Sync,
    R: AsRef<str> + Sync,
{
    if hypotheses.len() != references.len() {
        return Err(MetricError::LengthMismatch {
            hypotheses: hypotheses.len(),
            references: references.len(),
        });
    }
    let norm = |xs: &[_]| -> Result<Vec<String>, MetricError> {
        xs.par_iter()
            .map(|x: &&str| normalize_for_language(x, lang).map_err(MetricError::from))
            .collect()
    };
    let h: Vec<&str> = hypotheses.iter().map(AsRef::as_ref).collect();
    let r: Vec<&str> = references.iter().map(AsRef::as_ref).collect();
    corpus_chrf_pp(&norm(&h)?, &norm(&r)?, config)
}

//! Corpus summary statistics: size before and after filtering, drop
//! percentage, average token lengths and the target/source length ratio.
//!
//! Counts and token sums are kept as integers; every reported real is a
//! ratio of two integers rounded half-up to two decimals without going
//! through floating point.

use std::fmt::{self, Write as _};

use indexmap::IndexMap;
use serde::Serialize;
use serde_json::value::RawValue;
use thiserror::Error;

use crate::corpus::{Corpus, LangCode, Split};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StatsError {
    #[error("filtered corpus is not a subsequence of the raw corpus (pair id {0} not found in order)")]
    NotSubsequence(u64),
}

/// A value in hundredths, produced by half-up rounding of `num / den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Hundredths(pub u64);

impl Hundredths {
    /// `round_half_up(100 * num / den)`; zero when `den == 0`.
    pub fn from_ratio(num: u64, den: u64) -> Self {
        if den == 0 {
            return Hundredths(0);
        }
        let num = num as u128 * 100;
        let den = den as u128;
        Hundredths(((2 * num + den) / (2 * den)) as u64)
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 100.0
    }
}

impl fmt::Display for Hundredths {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:02}", self.0 / 100, self.0 % 100)
    }
}

impl Serialize for Hundredths {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let raw = RawValue::from_string(self.to_string()).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CorpusStats {
    pub total: u64,
    pub valid: u64,
    /// Source-side whitespace tokens over valid pairs.
    pub src_tokens: u64,
    /// Target-side whitespace tokens over valid pairs.
    pub tgt_tokens: u64,
}

impl CorpusStats {
    pub fn dropped(&self) -> u64 {
        self.total - self.valid
    }

    /// `100 * (total - valid) / total`, zero for an empty corpus.
    pub fn drop_pct(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            100.0 * self.dropped() as f64 / self.total as f64
        }
    }

    pub fn avg_src_len(&self) -> f64 {
        ratio(self.src_tokens, self.valid)
    }

    pub fn avg_tgt_len(&self) -> f64 {
        ratio(self.tgt_tokens, self.valid)
    }

    /// `avg_tgt_len / avg_src_len`; both averages share a denominator.
    pub fn tgt_src_ratio(&self) -> f64 {
        ratio(self.tgt_tokens, self.src_tokens)
    }

    pub fn drop_pct_rounded(&self) -> Hundredths {
        Hundredths::from_ratio(self.dropped() * 100, self.total)
    }

    pub fn avg_src_rounded(&self) -> Hundredths {
        Hundredths::from_ratio(self.src_tokens, self.valid)
    }

    pub fn avg_tgt_rounded(&self) -> Hundredths {
        Hundredths::from_ratio(self.tgt_tokens, self.valid)
    }

    pub fn ratio_rounded(&self) -> Hundredths {
        Hundredths::from_ratio(self.tgt_tokens, self.src_tokens)
    }

    fn report_entry(&self) -> ReportEntry {
        ReportEntry {
            total: self.total,
            valid: self.valid,
            drop_pct: self.drop_pct_rounded(),
            avg_src_len: self.avg_src_rounded(),
            avg_tgt_len: self.avg_tgt_rounded(),
            tgt_src_ratio: self.ratio_rounded(),
        }
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Summary of `raw` (total) against `filtered` (valid, lengths).
/// `filtered` must be a subsequence of `raw` by pair id.
pub fn compute_stats(raw: &Corpus, filtered: &Corpus) -> Result<CorpusStats, StatsError> {
    let mut raw_ids = raw.pairs().iter().map(|p| p.id());
    for p in filtered.pairs() {
        if !raw_ids.any(|id| id == p.id()) {
            return Err(StatsError::NotSubsequence(p.id()));
        }
    }
    let (src_tokens, tgt_tokens) = filtered
        .pairs()
        .iter()
        .fold((0u64, 0u64), |(s, t), p| (s + p.src_len() as u64, t + p.tgt_len() as u64));
    Ok(CorpusStats {
        total: raw.len() as u64,
        valid: filtered.len() as u64,
        src_tokens,
        tgt_tokens,
    })
}

/// Identifies one row of the report.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StatsKey {
    pub language: LangCode,
    pub setting: String,
    pub split: Split,
}

impl StatsKey {
    pub fn new(language: LangCode, setting: impl Into<String>, split: Split) -> Self {
        StatsKey {
            language,
            setting: setting.into(),
            split,
        }
    }
}

#[derive(Debug, Serialize)]
struct ReportEntry {
    total: u64,
    valid: u64,
    drop_pct: Hundredths,
    avg_src_len: Hundredths,
    avg_tgt_len: Hundredths,
    tgt_src_ratio: Hundredths,
}

/// Rendered statistics: a nested JSON document
/// (`language -> setting -> split -> fields`) and an aligned text table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatsReport {
    pub json: String,
    pub table: String,
}

/// Renders entries in the given order.
pub fn stats_report(entries: &[(StatsKey, CorpusStats)]) -> StatsReport {
    let mut doc: IndexMap<&str, IndexMap<&str, IndexMap<&str, ReportEntry>>> = IndexMap::new();
    for (key, stats) in entries {
        doc.entry(key.language.as_str())
            .or_default()
            .entry(key.setting.as_str())
            .or_default()
            .insert(key.split.as_str(), stats.report_entry());
    }
    let json = serde_json::to_string_pretty(&doc).expect("report serializes");
    StatsReport {
        json,
        table: render_table(entries),
    }
}

const HEADER: [&str; 9] = [
    "Lang", "Setting", "Split", "Total", "Valid", "Drop %", "Avg Src", "Avg Tgt", "Tgt/Src",
];

fn render_table(entries: &[(StatsKey, CorpusStats)]) -> String {
    if entries.is_empty() {
        return String::new();
    }
    let mut rows: Vec<[String; 9]> = Vec::with_capacity(entries.len());
    let mut prev: Option<(&LangCode, &str)> = None;
    for (key, s) in entries {
        let lang_cell = match prev {
            Some((l, _)) if l == &key.language => String::new(),
            _ => key.language.to_string(),
        };
        let setting_cell = match prev {
            Some((l, st)) if l == &key.language && st == key.setting => String::new(),
            _ => key.setting.clone(),
        };
        prev = Some((&key.language, key.setting.as_str()));
        rows.push([
            lang_cell,
            setting_cell,
            capitalize(key.split.as_str()),
            group_thousands(s.total),
            group_thousands(s.valid),
            s.drop_pct_rounded().to_string(),
            s.avg_src_rounded().to_string(),
            s.avg_tgt_rounded().to_string(),
            s.ratio_rounded().to_string(),
        ]);
    }
    let mut widths = HEADER.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let header: Vec<String> = HEADER.iter().map(|h| h.to_string()).collect();
    push_row(&mut out, &header, &widths);
    let rule_len = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
    out.push_str(&"-".repeat(rule_len));
    out.push('\n');
    for row in &rows {
        push_row(&mut out, row, &widths);
    }
    out
}

fn push_row(out: &mut String, cells: &[String], widths: &[usize; 9]) {
    let mut line = String::new();
    for (i, (cell, &w)) in cells.iter().zip(widths).enumerate() {
        if i > 0 {
            line.push_str("  ");
        }
        let pad = w - cell.chars().count();
        if i < 3 {
            let _ = write!(line, "{cell}{}", " ".repeat(pad));
        } else {
            let _ = write!(line, "{}{cell}", " ".repeat(pad));
        }
    }
    out.push_str(line.trim_end());
    out.push('\n');
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn group_thousands(n: u64) -> String {
    let digits = n.to_string();
    let mut out = String::new();
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

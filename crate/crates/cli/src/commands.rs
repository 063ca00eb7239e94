use std::path::Path;

use mtprep_core::augment::{generate_synthetic_batched, load_dictionary, DEFAULT_BATCH_SIZE};
use mtprep_core::corpus::{read_lines, write_lines};
use mtprep_core::filter::FilterSummary;
use mtprep_core::metrics::{chrf_from_stats, corpus_stats, NgramStats};
use mtprep_core::normalize::Trace;
use mtprep_core::{
    append_dictionary, apply_filters, compute_stats, merge_augmented, mock_backend, stats_report,
    AugmentError, ChrfConfig, Corpus, CorpusError, FilterConfig, FilterDecision, LangCode,
    Normalizer, Provenance, RuleId, SentencePair, Split, StatsKey, TranslationBackend,
};
use serde::Serialize;

use crate::args::{AugmentArgs, BackendKind, FilterArgs, NormalizeArgs, ScoreArgs, StatsArgs};
use crate::error::{CliError, CliResult};
use crate::http::{self, HttpBackend};
use crate::io::{say, load, parse_lang, write_jsonl, write_provenance, write_text};

#[derive(Debug, Serialize)]
pub struct TraceRecord {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side: Option<&'static str>,
    /// 1-based line number in the input file.
    pub line: usize,
    pub rule_id: RuleId,
    pub before: String,
    pub after: String,
}

/// Normalizes each line; trace records are appended when `trace` is given.
pub fn normalize_lines(
    normalizer: &Normalizer,
    lines: &[String],
    side: Option<&'static str>,
    mut trace: Option<&mut Vec<TraceRecord>>,
) -> Vec<String> {
    lines
        .iter()
        .enumerate()
        .map(|(i, line)| match trace.as_deref_mut() {
            None => normalizer.normalize(line),
            Some(sink) => {
                let mut t = Trace::enabled();
                let out = normalizer.normalize_traced(line, &mut t);
                sink.extend(t.into_entries().into_iter().map(|a| TraceRecord {
                    side,
                    line: i + 1,
                    rule_id: a.rule_id,
                    before: a.span_before,
                    after: a.span_after,
                }));
                out
            }
        })
        .collect()
}

fn line_mismatch(src: &Path, src_lines: usize, tgt: &Path, tgt_lines: usize) -> CliError {
    CorpusError::LineCountMismatch {
        src_path: src.to_path_buf(),
        src_lines,
        tgt_path: tgt.to_path_buf(),
        tgt_lines,
    }
    .into()
}

pub fn normalize(args: &NormalizeArgs) -> CliResult<()> {
    let tgt_norm = Normalizer::for_language(&parse_lang(&args.lang)?)?;
    let mut records = Vec::new();
    let sink = args.trace.is_some().then_some(&mut records);
    match (&args.input, &args.output, &args.src, &args.tgt, &args.out_src, &args.out_tgt) {
        (Some(input), Some(output), None, None, _, _) => {
            let out = normalize_lines(&tgt_norm, &read_lines(input)?, None, sink);
            write_lines(output, out.iter().map(String::as_str))?;
        }
        (None, _, Some(src), Some(tgt), Some(out_src), Some(out_tgt)) => {
            let src_norm = Normalizer::for_language(&parse_lang(&args.src_lang)?)?;
            let (s, t) = (read_lines(src)?, read_lines(tgt)?);
            if s.len() != t.len() {
                return Err(line_mismatch(src, s.len(), tgt, t.len()));
            }
            let mut src_records = Vec::new();
            let s_out = normalize_lines(&src_norm, &s, Some("src"), sink.is_some().then_some(&mut src_records));
            let t_out = normalize_lines(&tgt_norm, &t, Some("tgt"), sink);
            src_records.append(&mut records);
            records = src_records;
            write_lines(out_src, s_out.iter().map(String::as_str))?;
            write_lines(out_tgt, t_out.iter().map(String::as_str))?;
        }
        _ => {
            return Err(CliError::user(
                "give either --input/--output or --src/--tgt/--out-src/--out-tgt",
            ))
        }
    }
    if let Some(path) = &args.trace {
        write_jsonl(path, &records)?;
    }
    Ok(())
}

/// "kept K / dropped D (d.dd%)"
pub fn filter_summary_line(summary: FilterSummary) -> String {
    let pct = summary.drop_pct_rounded();
    format!("kept {} / dropped {} ({pct}%)", summary.kept, summary.dropped)
}

pub fn filter_config(tau: Option<f64>, max_len: Option<usize>, numeric_min: Option<f64>, base: FilterConfig) -> FilterConfig {
    FilterConfig {
        tau: tau.unwrap_or(base.tau),
        max_len_tokens: max_len.unwrap_or(base.max_len_tokens),
        numeric_jaccard_min: numeric_min.unwrap_or(base.numeric_jaccard_min),
        ..base
    }
}

pub fn filter(args: &FilterArgs) -> CliResult<()> {
    let (src_lang, tgt_lang, split) = pair_args(&args.pair)?;
    let cfg = filter_config(args.tau, args.max_len, args.numeric_min, FilterConfig::default());
    cfg.validate()?;
    let corpus = load(&args.src, &args.tgt, &src_lang, &tgt_lang, split, args.provenance.as_deref())?;
    let (kept, decisions) = apply_filters(&corpus, &cfg)?;
    mtprep_core::write_corpus(&kept, &args.out_src, &args.out_tgt)?;
    if let Some(p) = &args.out_provenance {
        write_provenance(p, &kept)?;
    }
    write_jsonl(&args.log, &decisions)?;
    say(&format!("{}\n", filter_summary_line(FilterSummary::from_decisions(&decisions))));
    Ok(())
}

fn pair_args(p: &crate::args::PairArgs) -> CliResult<(LangCode, LangCode, Split)> {
    Ok((parse_lang(&p.src_lang)?, parse_lang(&p.tgt_lang)?, p.split.parse()?))
}

/// Rebuilds the filtered corpus with the ids of the raw pairs it came from:
/// from a decision log when available, otherwise by matching lines in order.
fn align_filtered(
    raw: &Corpus,
    filtered_src: Vec<String>,
    filtered_tgt: Vec<String>,
    decisions: Option<&Path>,
) -> CliResult<Corpus> {
    let n = filtered_src.len();
    let ids: Vec<u64> = match decisions {
        Some(path) => {
            let mut ids = Vec::new();
            for (i, line) in read_lines(path)?.iter().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let d: FilterDecision = serde_json::from_str(line)
                    .map_err(|e| CliError::User(format!("{}:{}: {e}", path.display(), i + 1)))?;
                if d.is_keep() {
                    ids.push(d.pair_id);
                }
            }
            if ids.len() != n {
                return Err(CliError::User(format!(
                    "decision log keeps {} pairs but the filtered corpus has {n}",
                    ids.len()
                )));
            }
            ids
        }
        None => {
            let mut raw_iter = raw.pairs().iter();
            let mut ids = Vec::with_capacity(n);
            for (i, (s, t)) in filtered_src.iter().zip(&filtered_tgt).enumerate() {
                let hit = raw_iter.find(|p| p.src_text() == s && p.tgt_text() == t).ok_or_else(|| {
                    CliError::User(format!(
                        "filtered corpus is not a subsequence of the raw corpus (filtered line {})",
                        i + 1
                    ))
                })?;
                ids.push(hit.id());
            }
            ids
        }
    };
    let pairs = ids
        .into_iter()
        .zip(filtered_src.into_iter().zip(filtered_tgt))
        .map(|(id, (s, t))| SentencePair::new(id, s, t, Provenance::Curated))
        .collect::<Result<Vec<_>, _>>()?;
    raw.with_pairs(pairs)
        .map_err(|e| CliError::User(format!("filtered corpus does not line up with the raw corpus: {e}")))
}

pub fn stats(args: &StatsArgs) -> CliResult<()> {
    let (src_lang, tgt_lang, split) = pair_args(&args.pair)?;
    let raw = load(&args.raw_src, &args.raw_tgt, &src_lang, &tgt_lang, split, None)?;
    let (fs, ft) = (read_lines(&args.src)?, read_lines(&args.tgt)?);
    if fs.len() != ft.len() {
        return Err(line_mismatch(&args.src, fs.len(), &args.tgt, ft.len()));
    }
    if fs.len() > raw.len() {
        return Err(CliError::User(format!(
            "filtered corpus has {} pairs, more than the {} raw pairs",
            fs.len(),
            raw.len()
        )));
    }
    let filtered = align_filtered(&raw, fs, ft, args.decisions.as_deref())?;
    let stats = compute_stats(&raw, &filtered)?;
    let report = stats_report(&[(StatsKey::new(tgt_lang, &args.setting, split), stats)]);
    say(&report.table);
    if let Some(p) = &args.json {
        write_text(p, &(report.json + "\n"))?;
    }
    Ok(())
}

fn backend(kind: BackendKind) -> CliResult<Box<dyn TranslationBackend>> {
    match kind {
        BackendKind::Mock => Ok(Box::new(mock_backend())),
        BackendKind::Http => HttpBackend::from_env()
            .map(|b| Box::new(b) as Box<dyn TranslationBackend>)
            .ok_or_else(|| CliError::User(format!("--backend http needs {} to be set", http::URL_ENV))),
    }
}

/// "curated=C synthetic=S [dictionary=D] total=T"
pub fn provenance_line(corpus: &Corpus, show_dictionary: bool) -> String {
    let [c, s, d] = corpus.provenance_counts();
    if show_dictionary || d > 0 {
        format!("curated={c} synthetic={s} dictionary={d} total={}", corpus.len())
    } else {
        format!("curated={c} synthetic={s} total={}", corpus.len())
    }
}

pub fn augment(args: &AugmentArgs) -> CliResult<()> {
    let (src_lang, tgt_lang, split) = pair_args(&args.pair)?;
    if split != Split::Train {
        return Err(AugmentError::NotTrain { what: "target", split }.into());
    }
    let curated = load(&args.src, &args.tgt, &src_lang, &tgt_lang, split, args.provenance.as_deref())?;
    let synthetic = match (&args.synthetic_src, &args.synthetic_tgt, &args.pivot) {
        (Some(s), Some(t), None) => {
            let c = load(s, t, &src_lang, &tgt_lang, Split::Train, None)?;
            let pairs = c
                .pairs()
                .iter()
                .map(|p| SentencePair::new(p.id(), p.src_text(), p.tgt_text(), Provenance::Synthetic))
                .collect::<Result<Vec<_>, _>>()?;
            c.with_pairs(pairs)?
        }
        (None, None, Some(pivot)) => {
            let batch = match args.batch_size {
                Some(b) => b,
                None => http::batch_from_env().map_err(CliError::User)?.unwrap_or(DEFAULT_BATCH_SIZE),
            };
            let b = backend(args.backend)?;
            generate_synthetic_batched(&read_lines(pivot)?, b.as_ref(), &src_lang, &tgt_lang, batch)?
        }
        _ => Corpus::new(src_lang.clone(), tgt_lang.clone(), Split::Train, Vec::new())?,
    };
    let mut merged = merge_augmented(&curated, &synthetic, args.seed)?;
    if let Some(dict) = &args.dict {
        merged = append_dictionary(&merged, &load_dictionary(dict)?)?;
    }
    mtprep_core::write_corpus(&merged, &args.out_src, &args.out_tgt)?;
    if let Some(p) = &args.out_provenance {
        write_provenance(p, &merged)?;
    }
    say(&format!("{}\n", provenance_line(&merged, args.dict.is_some())));
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct ScoreReport {
    pub metric: &'static str,
    pub score: f64,
    pub segments: usize,
    /// Language whose normalizer was applied to both sides, if any.
    pub normalization: Option<String>,
    pub config: ChrfConfig,
    pub ngram_stats: Vec<NgramStats>,
}

pub fn score_files(
    hyp: &Path,
    reference: &Path,
    normalize_lang: Option<&str>,
    config: &ChrfConfig,
) -> CliResult<ScoreReport> {
    let (mut h, mut r) = (read_lines(hyp)?, read_lines(reference)?);
    if h.len() != r.len() {
        return Err(CliError::User(format!(
            "{} has {} lines but {} has {}",
            hyp.display(),
            h.len(),
            reference.display(),
            r.len()
        )));
    }
    if let Some(code) = normalize_lang {
        let n = Normalizer::for_language(&parse_lang(code)?)?;
        h = h.iter().map(|x| n.normalize(x)).collect();
        r = r.iter().map(|x| n.normalize(x)).collect();
    }
    let stats = corpus_stats(&h, &r, config)?;
    Ok(ScoreReport {
        metric: "chrF++",
        score: chrf_from_stats(&stats, config),
        segments: h.len(),
        normalization: normalize_lang.map(str::to_string),
        config: *config,
        ngram_stats: stats,
    })
}

pub fn score(args: &ScoreArgs) -> CliResult<()> {
    let report = score_files(&args.hyp, &args.reference, args.normalize_lang.as_deref(), &ChrfConfig::default())?;
    if let Some(p) = &args.json {
        let body = serde_json::to_string_pretty(&report).map_err(CliError::internal)?;
        write_text(p, &(body + "\n"))?;
    }
    say(&format!("{:.4}\n", report.score));
    Ok(())
}

//! Declarative end-to-end run: normalize -> filter -> augment -> stats.
//!
//! Config keys (paths are relative to the config file):
//!
//! ```json
//! {
//!   "src_lang": "es", "tgt_lang": "quy", "split": "train", "setting": "base",
//!   "input": {"src": "train.es", "tgt": "train.quy"},
//!   "normalize": {"src": null, "tgt": null},
//!   "filter": {"tau": 2.5, "max_len_tokens": 200, "numeric_jaccard_min": 0.5},
//!   "augment": {"synthetic": {"src": "syn.es", "tgt": "syn.quy"},
//!               "dictionary": "dict.tsv", "seed": 7, "setting": "+synthetic"},
//!   "output_dir": "out",
//!   "report": "out/stats.json"
//! }
//! ```
//!
//! `normalize.src`/`normalize.tgt` take a full normalizer configuration and
//! default to the language preset; `filter` keys default individually;
//! `augment` and `report` are optional.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use mtprep_core::augment::load_dictionary;
use mtprep_core::filter::FilterSummary;
use mtprep_core::{
    append_dictionary, apply_filters, compute_stats, load_corpus, merge_augmented, stats_report,
    write_corpus, Corpus, FilterConfig, LangCode, Normalizer, NormalizerConfig, Provenance,
    SentencePair, Split, StatsKey,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::args::PipelineArgs;
use crate::commands::{filter_config, filter_summary_line, provenance_line};
use crate::error::{CliError, CliResult};
use crate::io::{say, write_jsonl, write_provenance, write_text};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParallelPaths {
    pub src: PathBuf,
    pub tgt: PathBuf,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalizeSection {
    #[serde(default)]
    pub src: Option<NormalizerConfig>,
    #[serde(default)]
    pub tgt: Option<NormalizerConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AugmentSection {
    #[serde(default)]
    pub synthetic: Option<ParallelPaths>,
    #[serde(default)]
    pub dictionary: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_augment_setting")]
    pub setting: String,
}

fn default_augment_setting() -> String {
    "+synthetic".into()
}

fn default_setting() -> String {
    "base".into()
}

fn default_split() -> Split {
    Split::Train
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub src_lang: LangCode,
    pub tgt_lang: LangCode,
    #[serde(default = "default_split")]
    pub split: Split,
    #[serde(default = "default_setting")]
    pub setting: String,
    pub input: ParallelPaths,
    #[serde(default)]
    pub normalize: NormalizeSection,
    #[serde(default)]
    pub filter: FilterConfig,
    #[serde(default)]
    pub augment: Option<AugmentSection>,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub report: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::User(format!("invalid pipeline config: {e}")))
    }

    /// Applies command-line overrides.
    pub fn with_overrides(mut self, args: &PipelineArgs) -> Self {
        if let Some(d) = &args.output_dir {
            self.output_dir = d.clone();
        }
        if let Some(r) = &args.report {
            self.report = Some(r.clone());
        }
        self.filter = filter_config(args.tau, args.max_len, args.numeric_min, self.filter);
        if let (Some(seed), Some(aug)) = (args.seed, self.augment.as_mut()) {
            aug.seed = Some(seed);
        }
        self
    }

    /// SHA-256 of the effective configuration's canonical JSON.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }

    fn normalizer(&self, cfg: &Option<NormalizerConfig>, lang: &LangCode) -> CliResult<Normalizer> {
        match cfg {
            Some(c) if &c.language != lang => Err(CliError::User(format!(
                "normalizer configured for {} but the side is {lang}",
                c.language
            ))),
            Some(c) => Ok(Normalizer::new(c.clone())?),
            None => Ok(Normalizer::for_language(lang)?),
        }
    }

    fn input_paths(&self) -> Vec<&Path> {
        let mut paths = vec![self.input.src.as_path(), self.input.tgt.as_path()];
        if let Some(aug) = &self.augment {
            if let Some(s) = &aug.synthetic {
                paths.extend([s.src.as_path(), s.tgt.as_path()]);
            }
            if let Some(d) = &aug.dictionary {
                paths.push(d);
            }
        }
        paths
    }

    /// Everything that can be checked without running a stage.
    fn validate(&self, base: &Path) -> CliResult<(Normalizer, Normalizer)> {
        if self.src_lang == self.tgt_lang {
            return Err(CliError::User(format!("source and target are both {}", self.src_lang)));
        }
        let missing: Vec<String> = self
            .input_paths()
            .into_iter()
            .map(|p| base.join(p))
            .filter(|p| !p.is_file())
            .map(|p| p.display().to_string())
            .collect();
        if !missing.is_empty() {
            return Err(CliError::User(format!("missing input file(s): {}", missing.join(", "))));
        }
        if self.augment.is_some() && self.split != Split::Train {
            return Err(CliError::User(format!(
                "augment is configured but split is {}; only train can be augmented",
                self.split
            )));
        }
        self.filter.validate()?;
        Ok((
            self.normalizer(&self.normalize.src, &self.src_lang)?,
            self.normalizer(&self.normalize.tgt, &self.tgt_lang)?,
        ))
    }
}

#[derive(Debug, Serialize)]
struct Manifest {
    tool: &'static str,
    version: &'static str,
    core_version: &'static str,
    config_sha256: String,
    stages: Vec<Value>,
    /// Seconds since the Unix epoch; the only field that varies between
    /// identical runs.
    created_unix: u64,
}

struct Run<'a> {
    cfg: &'a PipelineConfig,
    base: &'a Path,
    out: PathBuf,
    manifest: Manifest,
}

impl Run<'_> {
    fn path(&self, p: &Path) -> PathBuf {
        self.base.join(p)
    }

    fn out_file(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write_manifest(&self) -> CliResult<()> {
        let body = serde_json::to_string_pretty(&self.manifest).map_err(CliError::internal)?;
        write_text(&self.out_file("manifest.json"), &(body + "\n"))
    }

    fn record(&mut self, stage: Value) -> CliResult<()> {
        self.manifest.stages.push(stage);
        self.write_manifest()
    }
}

fn normalize_corpus(c: &Corpus, src: &Normalizer, tgt: &Normalizer) -> CliResult<(Corpus, usize, usize)> {
    let (mut ds, mut dt) = (0, 0);
    let pairs = c
        .pairs()
        .iter()
        .map(|p| {
            let (s, t) = (src.normalize(p.src_text()), tgt.normalize(p.tgt_text()));
            ds += usize::from(s != p.src_text());
            dt += usize::from(t != p.tgt_text());
            SentencePair::new(p.id(), s, t, p.provenance())
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((c.with_pairs(pairs)?, ds, dt))
}

fn reason_counts(decisions: &[mtprep_core::FilterDecision]) -> BTreeMap<&'static str, usize> {
    let mut counts = BTreeMap::new();
    for r in decisions.iter().filter_map(|d| d.reason) {
        *counts.entry(r.as_str()).or_default() += 1;
    }
    counts
}

/// Concatenates two corpora, shifting the ids of `b` past those of `a`.
fn concat(a: &Corpus, b: &Corpus, offset: u64) -> CliResult<Corpus> {
    let pairs = a
        .pairs()
        .iter()
        .cloned()
        .map(Ok)
        .chain(b.pairs().iter().map(|p| {
            SentencePair::new(p.id() + offset, p.src_text(), p.tgt_text(), p.provenance())
        }))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(a.with_pairs(pairs)?)
}

fn as_synthetic(c: &Corpus) -> CliResult<Corpus> {
    let pairs = c
        .pairs()
        .iter()
        .map(|p| SentencePair::new(p.id(), p.src_text(), p.tgt_text(), Provenance::Synthetic))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(c.with_pairs(pairs)?)
}

pub fn run(args: &PipelineArgs) -> CliResult<()> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| CliError::User(format!("{}: {e}", args.config.display())))?;
    let cfg = PipelineConfig::from_json(&text)?.with_overrides(args);
    let base = args.config.parent().unwrap_or(Path::new("")).to_path_buf();
    let (src_norm, tgt_norm) = cfg.validate(&base)?;

    let out = base.join(&cfg.output_dir);
    fs::create_dir_all(&out).map_err(|e| CliError::User(format!("{}: {e}", out.display())))?;
    let mut run = Run {
        cfg: &cfg,
        base: &base,
        out,
        manifest: Manifest {
            tool: "mtprep",
            version: env!("CARGO_PKG_VERSION"),
            core_version: mtprep_core::VERSION,
            config_sha256: cfg.hash(),
            stages: Vec::new(),
            created_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        },
    };
    let result = stages(&mut run, &src_norm, &tgt_norm);
    if let Err(e) = &result {
        let failed = json!({ "stage": "failed", "error": e.to_string() });
        run.manifest.stages.push(failed);
        run.write_manifest()?;
    }
    result?;
    say(&format!("manifest: {}\n", run.out_file("manifest.json").display()));
    Ok(())
}

fn stages(run: &mut Run, src_norm: &Normalizer, tgt_norm: &Normalizer) -> CliResult<()> {
    let cfg = run.cfg;
    let (sl, tl) = (cfg.src_lang.as_str(), cfg.tgt_lang.as_str());

    // normalize
    let raw = load_corpus(
        &run.path(&cfg.input.src),
        &run.path(&cfg.input.tgt),
        cfg.src_lang.clone(),
        cfg.tgt_lang.clone(),
        cfg.split,
    )?;
    let (normalized, ds, dt) = normalize_corpus(&raw, src_norm, tgt_norm)?;
    let (ns, nt) = (format!("normalized.{sl}"), format!("normalized.{tl}"));
    write_corpus(&normalized, &run.out_file(&ns), &run.out_file(&nt))?;
    say(&format!("normalize: {} pairs, {ds} src / {dt} tgt lines changed\n", normalized.len()));
    run.record(json!({
        "stage": "normalize",
        "pairs": normalized.len(),
        "src_lines_changed": ds,
        "tgt_lines_changed": dt,
        "outputs": [ns, nt],
    }))?;

    // filter
    let (filtered, decisions) = apply_filters(&normalized, &cfg.filter)?;
    let (fs_, ft) = (format!("filtered.{sl}"), format!("filtered.{tl}"));
    write_corpus(&filtered, &run.out_file(&fs_), &run.out_file(&ft))?;
    write_jsonl(&run.out_file("decisions.jsonl"), &decisions)?;
    let summary = FilterSummary::from_decisions(&decisions);
    say(&format!("filter: {}\n", filter_summary_line(summary)));
    run.record(json!({
        "stage": "filter",
        "input": summary.total(),
        "kept": summary.kept,
        "dropped": summary.dropped,
        "drop_pct": summary.drop_pct_rounded().to_string(),
        "dropped_by_reason": reason_counts(&decisions),
        "outputs": [fs_, ft, "decisions.jsonl"],
    }))?;

    let mut rows = vec![(
        StatsKey::new(cfg.tgt_lang.clone(), &cfg.setting, cfg.split),
        compute_stats(&normalized, &filtered)?,
    )];

    // augment
    if let Some(aug) = &cfg.augment {
        let (syn_norm, syn_kept) = match &aug.synthetic {
            Some(p) => {
                let c = load_corpus(&run.path(&p.src), &run.path(&p.tgt), cfg.src_lang.clone(), cfg.tgt_lang.clone(), Split::Train)?;
                let (n, _, _) = normalize_corpus(&as_synthetic(&c)?, src_norm, tgt_norm)?;
                let (kept, _) = apply_filters(&n, &cfg.filter)?;
                (n, kept)
            }
            None => {
                let empty = Corpus::new(cfg.src_lang.clone(), cfg.tgt_lang.clone(), Split::Train, Vec::new())?;
                (empty.clone(), empty)
            }
        };
        let mut merged = merge_augmented(&filtered, &syn_kept, aug.seed)?;
        if let Some(d) = &aug.dictionary {
            merged = append_dictionary(&merged, &load_dictionary(&run.path(d))?)?;
        }
        let (ts, tt) = (format!("train.{sl}"), format!("train.{tl}"));
        write_corpus(&merged, &run.out_file(&ts), &run.out_file(&tt))?;
        write_provenance(&run.out_file("train.provenance"), &merged)?;
        let [c, s, d] = merged.provenance_counts();
        say(&format!("augment: {}\n", provenance_line(&merged, aug.dictionary.is_some())));
        run.record(json!({
            "stage": "augment",
            "synthetic_input": syn_norm.len(),
            "synthetic_kept": syn_kept.len(),
            "curated": c,
            "synthetic": s,
            "dictionary": d,
            "total": merged.len(),
            "seed": aug.seed,
            "outputs": [ts, tt, "train.provenance"],
        }))?;

        let offset = normalized.next_id();
        rows.push((
            StatsKey::new(cfg.tgt_lang.clone(), &aug.setting, cfg.split),
            compute_stats(
                &concat(&normalized, &syn_norm, offset)?,
                &concat(&filtered, &syn_kept, offset)?,
            )?,
        ));
    }

    // stats
    let report = stats_report(&rows);
    let report_path = match &cfg.report {
        Some(p) => run.path(p),
        None => run.out_file("stats.json"),
    };
    write_text(&report_path, &(report.json + "\n"))?;
    write_text(&run.out_file("stats.txt"), &report.table)?;
    say(&report.table);
    let report_name = match &cfg.report {
        Some(p) => p.display().to_string(),
        None => "stats.json".into(),
    };
    run.record(json!({
        "stage": "stats",
        "rows": rows.len(),
        "outputs": [report_name, "stats.txt"],
    }))
}

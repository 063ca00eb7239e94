//! File plumbing shared by the subcommands.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use mtprep_core::corpus::{read_lines, write_lines};
use mtprep_core::{load_corpus, Corpus, LangCode, Provenance, SentencePair, Split};
use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Reads a provenance sidecar: one label (`curated`, `synthetic`,
/// `dictionary`) per corpus line.
pub fn read_provenance(path: &Path, expected: usize) -> CliResult<Vec<Provenance>> {
    let lines = read_lines(path)?;
    if lines.len() != expected {
        return Err(CliError::User(format!(
            "{}: {} provenance labels for {} pairs",
            path.display(),
            lines.len(),
            expected
        )));
    }
    lines
        .iter()
        .enumerate()
        .map(|(i, l)| {
            l.trim()
                .parse()
                .map_err(|e| CliError::User(format!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect()
}

pub fn write_provenance(path: &Path, corpus: &Corpus) -> CliResult<()> {
    write_lines(path, corpus.pairs().iter().map(|p| p.provenance().as_str()))?;
    Ok(())
}

/// Loads a parallel corpus, applying a provenance sidecar when given.
pub fn load(
    src: &Path,
    tgt: &Path,
    src_lang: &LangCode,
    tgt_lang: &LangCode,
    split: Split,
    provenance: Option<&Path>,
) -> CliResult<Corpus> {
    let corpus = load_corpus(src, tgt, src_lang.clone(), tgt_lang.clone(), split)?;
    let Some(path) = provenance else {
        return Ok(corpus);
    };
    let labels = read_provenance(path, corpus.len())?;
    let pairs = corpus
        .pairs()
        .iter()
        .zip(labels)
        .map(|(p, prov)| SentencePair::new(p.id(), p.src_text(), p.tgt_text(), prov))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(corpus.with_pairs(pairs)?)
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: impl IntoIterator<Item = T>) -> CliResult<()> {
    let file = fs::File::create(path).map_err(|e| CliError::User(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, &r).map_err(CliError::internal)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::User(format!("{}: {e}", path.display())))
}

pub fn parse_lang(code: &str) -> CliResult<LangCode> {
    LangCode::new(code).map_err(CliError::user)
}

/// Prints to stdout. A closed pipe (`mtprep ... | head`) is not an error:
/// every output that matters has already gone to a file.
pub fn say(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

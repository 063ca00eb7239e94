use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::thread;

use tempfile::TempDir;

fn mtprep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mtprep"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

struct Work(TempDir);

impl Work {
    fn new() -> Self {
        Work(tempfile::tempdir().unwrap())
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }

    fn p(&self, name: &str) -> String {
        self.path(name).to_str().unwrap().to_string()
    }

    fn write(&self, name: &str, lines: &[String]) -> String {
        let mut body = lines.join("\n");
        if !lines.is_empty() {
            body.push('\n');
        }
        fs::write(self.path(name), body).unwrap();
        self.p(name)
    }

    fn read(&self, name: &str) -> String {
        fs::read_to_string(self.path(name)).unwrap()
    }
}

/// Distinct digit-free word for each index.
fn word(mut i: usize) -> String {
    let mut w = String::from("k");
    loop {
        w.push((b'a' + (i % 26) as u8) as char);
        i /= 26;
        if i == 0 {
            return w;
        }
    }
}

fn lines(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// `n` clean pairs: three source tokens, two target tokens, all distinct.
fn clean_pairs(n: usize) -> (Vec<String>, Vec<String>) {
    (0..n)
        .map(|i| (format!("la casa {}", word(i)), format!("wasi {}", word(i))))
        .unzip()
}

// normalize

#[test]
fn normalize_quechua_file() {
    let w = Work::new();
    let input = w.write("in.quy", &lines(&["sin ch i", "¿Ch u?"]));
    let out = w.p("out.quy");
    let o = mtprep(&["normalize", "--lang", "quy", "--input", &input, "--output", &out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(w.read("out.quy"), "sinchi\n¿Chu?\n");
}

#[test]
fn normalize_unknown_language_is_user_error() {
    let w = Work::new();
    let input = w.write("in.txt", &lines(&["hola"]));
    let o = mtprep(&["normalize", "--lang", "xx", "--input", &input, "--output", &w.p("o")]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("xx"), "{}", stderr(&o));
    assert!(!w.path("o").exists());
}

#[test]
fn normalize_is_idempotent_on_disk() {
    let w = Work::new();
    let input = w.write(
        "in.gn",
        &lines(&["Che  Róga ©  m b o'e", "c h e ï\u{2019}a", "N g a\u{00A0}ña", ""]),
    );
    let (once, twice) = (w.p("once"), w.p("twice"));
    assert_eq!(code(&mtprep(&["normalize", "--lang", "gn", "--input", &input, "--output", &once])), 0);
    assert_eq!(code(&mtprep(&["normalize", "--lang", "gn", "--input", &once, "--output", &twice])), 0);
    assert_eq!(fs::read(&once).unwrap(), fs::read(&twice).unwrap());
    assert!(w.read("once").starts_with("che róga mbo'e\n"));
}

#[test]
fn normalize_trace_records_rules_with_line_numbers() {
    let w = Work::new();
    let input = w.write("in.aym", &lines(&["kamisaki", "jach 'a uta"]));
    let trace = w.p("trace.jsonl");
    let o = mtprep(&[
        "normalize", "--lang", "aym", "--input", &input, "--output", &w.p("out"), "--trace", &trace,
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let records: Vec<serde_json::Value> =
        w.read("trace.jsonl").lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len(), 1);
    assert_eq!(records[0]["line"], 2);
    assert_eq!(records[0]["rule_id"], "aym.apostrophe_join");
    assert_eq!(records[0]["before"], "jach 'a");
    assert_eq!(records[0]["after"], "jach'a");
}

#[test]
fn normalize_parallel_files() {
    let w = Work::new();
    let src = w.write("in.es", &lines(&["¿Es  fuerte?", "Allí"]));
    let tgt = w.write("in.quy", &lines(&["¿Sin ch i?", "Ch aypi"]));
    let trace = w.p("t.jsonl");
    let o = mtprep(&[
        "normalize", "--lang", "quy", "--src", &src, "--tgt", &tgt, "--out-src", &w.p("o.es"),
        "--out-tgt", &w.p("o.quy"), "--trace", &trace,
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(w.read("o.es"), "¿Es fuerte?\nAllí\n");
    assert_eq!(w.read("o.quy"), "¿Sinchi?\nChaypi\n");
    let t = w.read("t.jsonl");
    assert!(t.lines().next().unwrap().contains(r#""side":"src""#), "{t}");
    assert!(t.contains(r#""side":"tgt""#) && t.contains("quy."), "{t}");
}

#[test]
fn normalize_parallel_rejects_uneven_files() {
    let w = Work::new();
    let src = w.write("in.es", &lines(&["a", "b"]));
    let tgt = w.write("in.quy", &lines(&["a"]));
    let o = mtprep(&[
        "normalize", "--lang", "quy", "--src", &src, "--tgt", &tgt, "--out-src", &w.p("o1"),
        "--out-tgt", &w.p("o2"),
    ]);
    assert_eq!(code(&o), 1);
}

#[test]
fn normalize_reports_invalid_utf8_position() {
    let w = Work::new();
    fs::write(w.path("bad"), b"ok\nbro\xffken\n").unwrap();
    let o = mtprep(&["normalize", "--lang", "quy", "--input", &w.p("bad"), "--output", &w.p("o")]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

// filter

fn run_filter(w: &Work, src: &str, tgt: &str, extra: &[&str]) -> Output {
    let (os, ot, log) = (w.p("f.es"), w.p("f.quy"), w.p("log.jsonl"));
    let mut args = vec![
        "filter", "--lang", "quy", "--src", src, "--tgt", tgt, "--out-src", &os, "--out-tgt", &ot,
        "--log", &log,
    ];
    args.extend_from_slice(extra);
    mtprep(&args)
}

#[test]
fn filter_clean_fixture_keeps_everything() {
    let w = Work::new();
    let (s, t) = clean_pairs(100);
    let (src, tgt) = (w.write("c.es", &s), w.write("c.quy", &t));
    let o = run_filter(&w, &src, &tgt, &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o), "kept 100 / dropped 0 (0.00%)\n");
    assert_eq!(w.read("log.jsonl").lines().count(), 100);
    assert_eq!(w.read("f.quy").lines().count(), 100);
}

#[test]
fn filter_drops_planted_ratio_violation() {
    let w = Work::new();
    let (s, mut t) = clean_pairs(100);
    // 3 source tokens against 8 target tokens: 8/3 > 2.5
    t[41] = "wasi hatun sumaq puka yuraq yana chaki uma".into();
    let (src, tgt) = (w.write("c.es", &s), w.write("c.quy", &t));
    let o = run_filter(&w, &src, &tgt, &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o), "kept 99 / dropped 1 (1.00%)\n");
    let dropped: Vec<serde_json::Value> = w
        .read("log.jsonl")
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
        .filter(|d| d["verdict"] == "drop")
        .collect();
    assert_eq!(dropped.len(), 1);
    assert_eq!(dropped[0]["pair_id"], 41);
    assert_eq!(dropped[0]["reason"], "length_ratio");
    // a looser tau keeps it
    let o = run_filter(&w, &src, &tgt, &["--tau", "3"]);
    assert_eq!(stdout(&o), "kept 100 / dropped 0 (0.00%)\n");
}

#[test]
fn filter_rejects_mismatched_files() {
    let w = Work::new();
    let (s, t) = clean_pairs(10);
    let (src, tgt) = (w.write("c.es", &s), w.write("c.quy", &t[..9]));
    let o = run_filter(&w, &src, &tgt, &[]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("10") && stderr(&o).contains('9'), "{}", stderr(&o));
}

#[test]
fn filter_rejects_invalid_tau() {
    let w = Work::new();
    let (s, t) = clean_pairs(3);
    let (src, tgt) = (w.write("c.es", &s), w.write("c.quy", &t));
    assert_eq!(code(&run_filter(&w, &src, &tgt, &["--tau", "0.5"])), 1);
}

#[test]
fn filter_exempts_dictionary_pairs_given_provenance() {
    let w = Work::new();
    let src = w.write("c.es", &lines(&["el perro grande y negro", "el perro grande y muy negro"]));
    let tgt = w.write("c.quy", &lines(&["allqu", "yana allqu"]));
    let prov = w.write("c.prov", &lines(&["dictionary", "curated"]));
    let out_prov = w.p("f.prov");
    let o = run_filter(&w, &src, &tgt, &["--provenance", &prov, "--out-provenance", &out_prov]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o), "kept 1 / dropped 1 (50.00%)\n");
    assert_eq!(w.read("f.prov"), "dictionary\n");
}

// stats

fn numbered(n: usize, prefix: &str) -> Vec<String> {
    (0..n).map(|i| format!("{prefix} {} a b", word(i))).collect()
}

#[test]
fn stats_reports_drop_percentage() {
    let w = Work::new();
    let (rs, rt) = (numbered(100, "s"), numbered(100, "t"));
    let raw = (w.write("r.es", &rs), w.write("r.quy", &rt));
    let keep: Vec<usize> = (0..100).filter(|i| i % 20 != 7).collect();
    let pick = |v: &[String]| keep.iter().map(|&i| v[i].clone()).collect::<Vec<_>>();
    let filt = (w.write("f.es", &pick(&rs)), w.write("f.quy", &pick(&rt)));
    let json = w.p("stats.json");
    let o = mtprep(&[
        "stats", "--lang", "quy", "--raw-src", &raw.0, "--raw-tgt", &raw.1, "--src", &filt.0,
        "--tgt", &filt.1, "--json", &json,
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let table = stdout(&o);
    let row = table.lines().find(|l| l.starts_with("quy")).expect(&table);
    let cells: Vec<&str> = row.split_whitespace().collect();
    assert_eq!(cells[3..6], ["100", "95", "5.00"], "{table}");
    let report = w.read("stats.json");
    assert!(report.contains(r#""drop_pct": 5.00,"#), "{report}");
    assert!(report.contains(r#""avg_src_len": 4.00,"#), "{report}");
    let parsed: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(parsed["quy"]["base"]["train"]["valid"], 95);
}

#[test]
fn stats_of_unfiltered_corpus_drops_nothing() {
    let w = Work::new();
    let (rs, rt) = (numbered(7, "s"), numbered(7, "t"));
    let (s, t) = (w.write("r.es", &rs), w.write("r.quy", &rt));
    let o = mtprep(&["stats", "--lang", "quy", "--raw-src", &s, "--raw-tgt", &t, "--src", &s, "--tgt", &t]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains(" 0.00 "), "{}", stdout(&o));
}

#[test]
fn stats_rejects_filtered_larger_than_raw() {
    let w = Work::new();
    let (s, t) = (w.write("r.es", &numbered(3, "s")), w.write("r.quy", &numbered(3, "t")));
    let (fs_, ft) = (w.write("f.es", &numbered(4, "s")), w.write("f.quy", &numbered(4, "t")));
    let o = mtprep(&["stats", "--lang", "quy", "--raw-src", &s, "--raw-tgt", &t, "--src", &fs_, "--tgt", &ft]);
    assert_eq!(code(&o), 1);
}

#[test]
fn stats_rejects_reordered_filtered_corpus() {
    let w = Work::new();
    let (rs, rt) = (numbered(3, "s"), numbered(3, "t"));
    let (s, t) = (w.write("r.es", &rs), w.write("r.quy", &rt));
    let (fs_, ft) = (
        w.write("f.es", &[rs[2].clone(), rs[0].clone()]),
        w.write("f.quy", &[rt[2].clone(), rt[0].clone()]),
    );
    let o = mtprep(&["stats", "--lang", "quy", "--raw-src", &s, "--raw-tgt", &t, "--src", &fs_, "--tgt", &ft]);
    assert_eq!(code(&o), 1, "{}", stdout(&o));
}

#[test]
fn stats_uses_filter_decision_log() {
    let w = Work::new();
    let (s, mut t) = clean_pairs(20);
    t[3] = t[2].clone();
    let mut s = s;
    s[3] = s[2].clone();
    let (src, tgt) = (w.write("c.es", &s), w.write("c.quy", &t));
    assert_eq!(code(&run_filter(&w, &src, &tgt, &[])), 0);
    let (log, fs_, ft) = (w.p("log.jsonl"), w.p("f.es"), w.p("f.quy"));
    let o = mtprep(&[
        "stats", "--lang", "quy", "--raw-src", &src, "--raw-tgt", &tgt, "--src", &fs_, "--tgt", &ft,
        "--decisions", &log,
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("20     19    5.00"), "{}", stdout(&o));
}

// augment

fn augment(w: &Work, curated: usize, synthetic: usize, extra: &[&str]) -> Output {
    let (cs, ct) = clean_pairs(curated);
    let ss: Vec<String> = (0..synthetic).map(|i| format!("sintético {}", word(i))).collect();
    let st: Vec<String> = (0..synthetic).map(|i| format!("yanapaq {}", word(i))).collect();
    let (src, tgt) = (w.write("c.es", &cs), w.write("c.quy", &ct));
    let (sy_s, sy_t) = (w.write("s.es", &ss), w.write("s.quy", &st));
    let (os, ot) = (w.p("m.es"), w.p("m.quy"));
    let mut args = vec![
        "augment", "--lang", "quy", "--src", &src, "--tgt", &tgt, "--out-src", &os, "--out-tgt", &ot,
    ];
    if synthetic > 0 {
        args.extend_from_slice(&["--synthetic-src", &sy_s, "--synthetic-tgt", &sy_t]);
    }
    args.extend_from_slice(extra);
    mtprep(&args)
}

#[test]
fn augment_merges_synthetic() {
    let w = Work::new();
    let o = augment(&w, 100, 50, &["--out-provenance", &w.p("m.prov")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o), "curated=100 synthetic=50 total=150\n");
    assert_eq!(w.read("m.quy").lines().count(), 150);
    let prov = w.read("m.prov");
    assert_eq!(prov.lines().filter(|l| *l == "synthetic").count(), 50);
    // unshuffled: curated block first
    assert!(prov.lines().take(100).all(|l| l == "curated"));
}

#[test]
fn augment_appends_dictionary() {
    let w = Work::new();
    let dict = w.p("dict.tsv");
    fs::write(&dict, "perro\tallqu\ncasa\twasi\nagua\tyaku\nsol\tinti\nluna\tkilla\n").unwrap();
    let o = augment(&w, 100, 50, &["--dict", &dict]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o), "curated=100 synthetic=50 dictionary=5 total=155\n");
    assert!(w.read("m.quy").ends_with("inti\nkilla\n"));
}

#[test]
fn augment_refuses_dev_split() {
    let w = Work::new();
    let o = augment(&w, 10, 5, &["--split", "dev"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("train"), "{}", stderr(&o));
    assert!(!w.path("m.es").exists());
}

#[test]
fn augment_rejects_malformed_dictionary() {
    let w = Work::new();
    let dict = w.p("dict.tsv");
    fs::write(&dict, "perro\tallqu\ncasa\n").unwrap();
    let o = augment(&w, 3, 0, &["--dict", &dict]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn augment_shuffle_is_seeded() {
    let w = Work::new();
    let a = augment(&w, 30, 30, &["--seed", "11"]);
    assert_eq!(code(&a), 0);
    let first = w.read("m.es");
    augment(&w, 30, 30, &["--seed", "11"]);
    assert_eq!(first, w.read("m.es"));
    augment(&w, 30, 30, &["--seed", "12"]);
    assert_ne!(first, w.read("m.es"));
}

#[test]
fn augment_with_mock_backend() {
    let w = Work::new();
    let (cs, ct) = clean_pairs(4);
    let (src, tgt) = (w.write("c.es", &cs), w.write("c.quy", &ct));
    let pivot = w.write("pivot.es", &lines(&["el perro", "la casa", "el sol"]));
    let args = [
        "augment", "--lang", "quy", "--src", &src, "--tgt", &tgt, "--pivot", &pivot, "--backend",
        "mock", "--batch-size", "2", "--out-src", &w.p("m.es"), "--out-tgt", &w.p("m.quy"),
    ];
    let o = mtprep(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o), "curated=4 synthetic=3 total=7\n");
    let again = mtprep(&args);
    assert_eq!(stdout(&again), stdout(&o));
    let tgt_lines: Vec<String> = w.read("m.quy").lines().map(String::from).collect();
    assert_ne!(tgt_lines[4], "el perro");
}

/// Answers every request with the texts reversed character-wise.
fn fake_translation_service(requests: usize) -> (String, thread::JoinHandle<()>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1/translate", listener.local_addr().unwrap());
    let handle = thread::spawn(move || {
        for stream in listener.incoming().take(requests) {
            let mut stream = stream.unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut len = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line == "\r\n" {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
            }
            let mut body = vec![0; len];
            reader.read_exact(&mut body).unwrap();
            let req: serde_json::Value = serde_json::from_slice(&body).unwrap();
            let out: Vec<String> = req["texts"]
                .as_array()
                .unwrap()
                .iter()
                .map(|t| t.as_str().unwrap().chars().rev().collect())
                .collect();
            let resp = serde_json::json!({ "translations": out }).to_string();
            write!(
                stream,
                "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{resp}",
                resp.len()
            )
            .unwrap();
        }
    });
    (url, handle)
}

#[test]
fn augment_with_http_backend_from_environment() {
    let w = Work::new();
    let (cs, ct) = clean_pairs(2);
    let (src, tgt) = (w.write("c.es", &cs), w.write("c.quy", &ct));
    let pivot = w.write("pivot.es", &lines(&["uno", "dos", "tres"]));
    let (url, server) = fake_translation_service(2);
    let o = Command::new(env!("CARGO_BIN_EXE_mtprep"))
        .args([
            "augment", "--lang", "quy", "--src", &src, "--tgt", &tgt, "--pivot", &pivot,
            "--backend", "http", "--out-src", &w.p("m.es"), "--out-tgt", &w.p("m.quy"),
        ])
        .env("MTPREP_BACKEND_URL", &url)
        .env("MTPREP_BACKEND_BATCH", "2")
        .output()
        .unwrap();
    server.join().unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o), "curated=2 synthetic=3 total=5\n");
    assert!(w.read("m.quy").ends_with("onu\nsod\nsert\n"));
}

#[test]
fn augment_http_backend_requires_endpoint() {
    let w = Work::new();
    let (cs, ct) = clean_pairs(2);
    let (src, tgt) = (w.write("c.es", &cs), w.write("c.quy", &ct));
    let pivot = w.write("pivot.es", &lines(&["uno"]));
    let o = Command::new(env!("CARGO_BIN_EXE_mtprep"))
        .args([
            "augment", "--lang", "quy", "--src", &src, "--tgt", &tgt, "--pivot", &pivot,
            "--backend", "http", "--out-src", &w.p("m.es"), "--out-tgt", &w.p("m.quy"),
        ])
        .env_remove("MTPREP_BACKEND_URL")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("MTPREP_BACKEND_URL"));
}

// score

#[test]
fn score_identical_files() {
    let w = Work::new();
    let f = w.write("a.txt", &lines(&["Chaypiqa allqu karqan.", "Wasiqa hatunmi."]));
    let o = mtprep(&["score", "--hyp", &f, "--ref", &f]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o), "100.0000\n");
}

#[test]
fn score_rejects_mismatched_line_counts() {
    let w = Work::new();
    let h = w.write("h", &lines(&["a", "b"]));
    let r = w.write("r", &lines(&["a"]));
    assert_eq!(code(&mtprep(&["score", "--hyp", &h, "--ref", &r])), 1);
}

#[derive(serde::Deserialize)]
struct Oracle {
    sentences: Vec<OracleSentence>,
    corpora: Vec<OracleCorpus>,
}

#[derive(serde::Deserialize)]
struct OracleSentence {
    hyp: String,
    #[serde(rename = "ref")]
    reference: String,
    score: f64,
}

#[derive(serde::Deserialize)]
struct OracleCorpus {
    start: usize,
    end: usize,
    score: f64,
}

fn oracle() -> Oracle {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/chrf_oracle.json");
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn score_matches_pinned_oracle_corpora() {
    let fx = oracle();
    let w = Work::new();
    for c in &fx.corpora {
        let seg = &fx.sentences[c.start..c.end];
        // files are line-based: segments with embedded newlines cannot round-trip
        if seg.iter().any(|s| s.hyp.contains('\n') || s.reference.contains('\n')) {
            continue;
        }
        let h = w.write("h", &seg.iter().map(|s| s.hyp.clone()).collect::<Vec<_>>());
        let r = w.write("r", &seg.iter().map(|s| s.reference.clone()).collect::<Vec<_>>());
        let o = mtprep(&["score", "--hyp", &h, "--ref", &r]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let got: f64 = stdout(&o).trim().parse().unwrap();
        assert!((got - c.score).abs() <= 0.01, "[{}, {}): {got} vs {}", c.start, c.end, c.score);
    }
}

#[test]
fn score_matches_pinned_oracle_sentences() {
    let fx = oracle();
    let w = Work::new();
    let mut checked = 0;
    for s in fx.sentences.iter().filter(|s| !s.hyp.contains('\n') && !s.reference.contains('\n')) {
        // an empty single-line file reads as zero segments
        if s.hyp.is_empty() && s.reference.is_empty() {
            continue;
        }
        let h = w.write("h", std::slice::from_ref(&s.hyp));
        let r = w.write("r", std::slice::from_ref(&s.reference));
        let o = mtprep(&["score", "--hyp", &h, "--ref", &r]);
        assert_eq!(code(&o), 0, "{:?}: {}", s.hyp, stderr(&o));
        let got: f64 = stdout(&o).trim().parse().unwrap();
        assert!((got - s.score).abs() <= 0.01, "{:?} / {:?}: {got} vs {}", s.hyp, s.reference, s.score);
        checked += 1;
    }
    assert!(checked >= 50);
}

#[test]
fn score_json_breakdown_and_normalization() {
    let w = Work::new();
    let h = w.write("h", &lines(&["sin ch i kanki", "uma ll iqniy"]));
    let r = w.write("r", &lines(&["sinchi kanki", "umalliqniy"]));
    let plain = mtprep(&["score", "--hyp", &h, "--ref", &r]);
    let json = w.p("s.json");
    let norm = mtprep(&["score", "--hyp", &h, "--ref", &r, "--normalize-lang", "quy", "--json", &json]);
    assert_eq!(code(&norm), 0, "{}", stderr(&norm));
    let p: f64 = stdout(&plain).trim().parse().unwrap();
    assert_eq!(stdout(&norm), "100.0000\n");
    assert!(p < 100.0);
    let report: serde_json::Value = serde_json::from_str(&w.read("s.json")).unwrap();
    assert_eq!(report["normalization"], "quy");
    assert_eq!(report["segments"], 2);
    let stats = report["ngram_stats"].as_array().unwrap();
    assert_eq!(stats.len(), 8);
    assert_eq!(stats[0]["kind"], "char");
    assert_eq!(stats[7]["kind"], "word");
    assert_eq!(stats[7]["order"], 2);
}

// pipeline

fn toy_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/toy")
}

fn copy_toy(w: &Work) -> PathBuf {
    for name in ["train.es", "train.quy", "synthetic.es", "synthetic.quy", "dict.tsv", "pipeline.json"] {
        fs::copy(toy_dir().join(name), w.path(name)).unwrap();
    }
    w.path("pipeline.json")
}

fn manifest_without_timestamp(path: &Path) -> serde_json::Value {
    let mut m: serde_json::Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    m.as_object_mut().unwrap().remove("created_unix");
    m
}

#[test]
fn pipeline_runs_toy_dataset() {
    let w = Work::new();
    let cfg = copy_toy(&w);
    let inputs_before = fs::read(w.path("train.quy")).unwrap();
    let o = mtprep(&["pipeline", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m = manifest_without_timestamp(&w.path("out/manifest.json"));
    let stages: Vec<&str> = m["stages"].as_array().unwrap().iter().map(|s| s["stage"].as_str().unwrap()).collect();
    assert_eq!(stages, ["normalize", "filter", "augment", "stats"]);
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(m["stages"][1]["kept"], 24);
    assert_eq!(m["stages"][1]["drop_pct"], "20.00");
    assert_eq!(m["stages"][2]["total"], 39);
    for f in ["normalized.quy", "filtered.quy", "decisions.jsonl", "train.quy", "train.provenance", "stats.json", "stats.txt"] {
        assert!(w.path("out").join(f).is_file(), "{f}");
    }
    assert!(stdout(&o).contains("filter: kept 24 / dropped 6 (20.00%)"), "{}", stdout(&o));
    assert_eq!(fs::read(w.path("train.quy")).unwrap(), inputs_before);
    let normalized = w.read("out/normalized.quy");
    assert!(normalized.starts_with("Chaypiqa allqu karqan.\n¿Sinchi?\nUmalliqniy"), "{normalized}");
}

#[test]
fn pipeline_runs_are_deterministic() {
    let w = Work::new();
    let cfg = copy_toy(&w);
    let cfg = cfg.to_str().unwrap();
    assert_eq!(code(&mtprep(&["pipeline", cfg])), 0);
    let first = manifest_without_timestamp(&w.path("out/manifest.json"));
    let train = w.read("out/train.quy");
    assert_eq!(code(&mtprep(&["pipeline", cfg])), 0);
    assert_eq!(first, manifest_without_timestamp(&w.path("out/manifest.json")));
    assert_eq!(train, w.read("out/train.quy"));
}

#[test]
fn pipeline_validates_inputs_before_running() {
    let w = Work::new();
    let cfg = copy_toy(&w);
    fs::remove_file(w.path("dict.tsv")).unwrap();
    let o = mtprep(&["pipeline", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("dict.tsv"), "{}", stderr(&o));
    assert!(!w.path("out").exists());
}

#[test]
fn pipeline_flag_overrides_change_config_hash() {
    let w = Work::new();
    let cfg = copy_toy(&w);
    let cfg = cfg.to_str().unwrap();
    assert_eq!(code(&mtprep(&["pipeline", cfg])), 0);
    let base = manifest_without_timestamp(&w.path("out/manifest.json"));
    let o = mtprep(&["pipeline", cfg, "--tau", "20", "--output-dir", "loose"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let loose = manifest_without_timestamp(&w.path("loose/manifest.json"));
    assert_ne!(base["config_sha256"], loose["config_sha256"]);
    assert_eq!(loose["stages"][1]["kept"], 25);
}

#[test]
fn pipeline_keeps_completed_stages_on_failure() {
    let w = Work::new();
    let cfg = copy_toy(&w);
    fs::write(w.path("dict.tsv"), "perro\tallqu\nsin tabulador\n").unwrap();
    let o = mtprep(&["pipeline", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(w.path("out/filtered.quy").is_file());
    assert!(!w.path("out/train.quy").exists());
    let m = manifest_without_timestamp(&w.path("out/manifest.json"));
    let stages: Vec<&str> = m["stages"].as_array().unwrap().iter().map(|s| s["stage"].as_str().unwrap()).collect();
    assert_eq!(stages, ["normalize", "filter", "failed"]);
}

#[test]
fn pipeline_rejects_unknown_config_keys() {
    let w = Work::new();
    let cfg = copy_toy(&w);
    let text = w.read("pipeline.json").replace("\"split\"", "\"splitt\"");
    fs::write(&cfg, text).unwrap();
    let o = mtprep(&["pipeline", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("splitt"), "{}", stderr(&o));
}

#[test]
fn unknown_flag_is_user_error() {
    assert_eq!(code(&mtprep(&["score", "--nope"])), 1);
}

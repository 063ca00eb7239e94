//! Quechua intra-word spacing repair.
//!
//! Four token rules, applied as separate sweeps in this order inside each
//! pass: triple, onset, isolated, fragment. Each sweep re-examines a merged
//! token before moving on, so chains collapse within one sweep.

use super::{RuleId, Trace};

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'A' | 'E' | 'I' | 'O' | 'U')
}

fn is_consonant(c: char) -> bool {
    c.is_alphabetic() && !is_vowel(c)
}

/// Letters with optional apostrophes (ejectives), starting with a letter.
fn is_word(tok: &str) -> bool {
    let mut chars = tok.chars();
    chars.next().is_some_and(char::is_alphabetic)
        && chars.all(|c| c.is_alphabetic() || c == '\'')
}

fn is_edge_punct(c: char) -> bool {
    !c.is_alphanumeric() && c != '\''
}

/// Word body of a token that may close with punctuation (`aypiqa,`).
fn right_body(tok: &str) -> &str {
    tok.trim_end_matches(is_edge_punct)
}

/// Word body of a token that may open with punctuation (`¿sin`).
fn left_body(tok: &str) -> &str {
    tok.trim_start_matches(is_edge_punct)
}

fn is_vowel_initial_word(tok: &str) -> bool {
    is_word(tok) && tok.chars().next().is_some_and(is_vowel)
}

fn is_ch_or_ll(tok: &str) -> bool {
    tok.eq_ignore_ascii_case("ch") || tok.eq_ignore_ascii_case("ll")
}

fn single_char(tok: &str) -> Option<char> {
    let mut it = tok.chars();
    match (it.next(), it.next()) {
        (Some(c), None) => Some(c),
        _ => None,
    }
}

/// True if `word` has no run of three consonants and no doubled vowel.
fn passes_gate(word: &str) -> bool {
    let chars: Vec<char> = word.chars().collect();
    let triple_consonant = chars
        .windows(3)
        .any(|w| w.iter().all(|&c| is_consonant(c)));
    let doubled_vowel = chars.windows(2).any(|w| {
        is_vowel(w[0]) && is_vowel(w[1]) && w[0].eq_ignore_ascii_case(&w[1])
    });
    !triple_consonant && !doubled_vowel
}

/// Runs `matcher` at every position; on a match of `n` tokens they are
/// concatenated and the position is retried.
fn sweep(
    text: &str,
    rule: RuleId,
    trace: &mut Trace,
    matcher: impl Fn(&[String], usize) -> Option<usize>,
) -> String {
    let mut toks: Vec<String> = text.split(' ').map(str::to_string).collect();
    let mut i = 0;
    while i < toks.len() {
        match matcher(&toks, i) {
            Some(n) => {
                let before = toks[i..i + n].join(" ");
                let merged = toks[i..i + n].concat();
                trace.record(rule, &before, &merged);
                toks.splice(i..i + n, [merged]);
            }
            None => i += 1,
        }
    }
    toks.join(" ")
}

/// `sin ch i` -> `sinchi`, `uma ll iqniy` -> `umalliqniy`.
pub(super) fn merge_triples(text: &str, trace: &mut Trace) -> String {
    sweep(text, RuleId::QuechuaTriple, trace, |t, i| {
        (i + 2 < t.len()
            && is_word(left_body(&t[i]))
            && !is_ch_or_ll(left_body(&t[i]))
            && is_ch_or_ll(&t[i + 1])
            && is_vowel_initial_word(right_body(&t[i + 2])))
        .then_some(3)
    })
}

/// `ch aypiqa` -> `chaypiqa`. Single-vowel fragments are left to the
/// isolated and fragment rules.
pub(super) fn merge_onsets(text: &str, trace: &mut Trace) -> String {
    sweep(text, RuleId::QuechuaOnset, trace, |t, i| {
        (i + 1 < t.len()
            && is_ch_or_ll(left_body(&t[i]))
            && is_vowel_initial_word(right_body(&t[i + 1]))
            && right_body(&t[i + 1]).chars().count() >= 2)
            .then_some(2)
    })
}

/// `ch u` -> `chu`.
pub(super) fn merge_isolated(text: &str, trace: &mut Trace) -> String {
    sweep(text, RuleId::QuechuaIsolated, trace, |t, i| {
        (i + 1 < t.len()
            && left_body(&t[i]).eq_ignore_ascii_case("ch")
            && single_char(right_body(&t[i + 1])).is_some_and(is_vowel))
        .then_some(2)
    })
}

/// A lone letter joins the token on its left when the result passes the
/// phonotactic gate.
pub(super) fn merge_fragments(text: &str, trace: &mut Trace) -> String {
    sweep(text, RuleId::QuechuaFragment, trace, |t, i| {
        if i + 1 >= t.len() {
            return None;
        }
        let frag = single_char(&t[i + 1]).filter(|c| c.is_alphabetic())?;
        let left = &t[i];
        if !left.chars().last().is_some_and(char::is_alphabetic) {
            return None;
        }
        let mut merged = left.clone();
        merged.push(frag);
        passes_gate(&merged).then_some(2)
    })
}

#[cfg(test)]
mod tests {
    use super::super::{normalize_quechua, Normalizer, NormalizerConfig, Trace};
    use super::*;

    #[test]
    fn spacing_goldens() {
        assert_eq!(normalize_quechua("ch aypiqa"), "chaypiqa");
        assert_eq!(normalize_quechua("sin ch i"), "sinchi");
        assert_eq!(normalize_quechua("uma ll iqniy"), "umalliqniy");
        assert_eq!(normalize_quechua("ch u"), "chu");
    }

    #[test]
    fn goldens_fire_the_expected_rules() {
        let n = Normalizer::new(NormalizerConfig::quechua()).unwrap();
        for (input, rule) in [
            ("ch aypiqa", RuleId::QuechuaOnset),
            ("sin ch i", RuleId::QuechuaTriple),
            ("uma ll iqniy", RuleId::QuechuaTriple),
            ("ch u", RuleId::QuechuaIsolated),
        ] {
            let mut trace = Trace::enabled();
            n.normalize_traced(input, &mut trace);
            assert_eq!(trace.entries().len(), 1, "{input}");
            assert_eq!(trace.entries()[0].rule_id, rule, "{input}");
        }
    }

    #[test]
    fn case_is_preserved() {
        assert_eq!(normalize_quechua("Ch aypiqa"), "Chaypiqa");
        assert_eq!(normalize_quechua("Kunan PUNCHAW"), "Kunan PUNCHAW");
    }

    #[test]
    fn merges_inside_longer_sentences() {
        assert_eq!(
            normalize_quechua("ch aypiqa wasi sin ch i kan"),
            "chaypiqa wasi sinchi kan"
        );
        assert_eq!(normalize_quechua("ch aypiqa, ch u?"), "chaypiqa, chu?");
    }

    #[test]
    fn edge_punctuation_is_carried_along() {
        assert_eq!(normalize_quechua("ch aypiqa."), "chaypiqa.");
        assert_eq!(normalize_quechua("¿sin ch i?"), "¿sinchi?");
    }

    #[test]
    fn punctuation_blocks_merges() {
        assert_eq!(normalize_quechua("sin, ch i"), "sin, chi");
        assert_eq!(normalize_quechua("ch ."), "ch .");
    }

    #[test]
    fn fragment_gate() {
        // "wasi" + "y": no consonant cluster, no doubled vowel
        assert_eq!(normalize_quechua("wasi y"), "wasiy");
        // "rurachk" would carry three consonants in a row
        assert_eq!(normalize_quechua("rurach k"), "rurach k");
        // doubled vowel
        assert_eq!(normalize_quechua("wasi i"), "wasi i");
        // left neighbour must end in a letter
        assert_eq!(normalize_quechua("wasi, y"), "wasi, y");
        // digits are not letters
        assert_eq!(normalize_quechua("wasi 7"), "wasi 7");
    }

    #[test]
    fn gate_examples() {
        assert!(passes_gate("chaypi"));
        // "nch" is a three-consonant run; the triple rule builds "sinchi", not the gate
        assert!(!passes_gate("sinchi"));
        assert!(passes_gate("lla"));
        assert!(!passes_gate("chkan"));
        assert!(!passes_gate("paa"));
        assert!(passes_gate("pai"));
    }

    #[test]
    fn ch_plus_ll_is_not_a_triple() {
        assert_eq!(normalize_quechua("ch ch a"), "ch cha");
    }

    #[test]
    fn never_adds_tokens() {
        for s in ["a b c d e f", "ch ll ch ll a", "i i i i", "sin ch i ch a ll u"] {
            let before = s.split_whitespace().count();
            let after = normalize_quechua(s).split_whitespace().count();
            assert!(after <= before, "{s}");
        }
    }
}

use super::{RuleId, Trace};

/// Characters and sequences that survive Guarani symbol stripping: nasal
/// vowels (including ỹ and g̃), ñ, the combining tilde, the apostrophe
/// (puso) and sentence punctuation.
pub const GUARANI_PRESERVE: &[&str] = &[
    "ã", "ẽ", "ĩ", "õ", "ũ", "ỹ", "g\u{0303}", "ñ", "\u{0303}", "'", ".", ",", ";", ":", "?",
    "!", "¿", "¡", "\"", "-",
];

const DIGRAPHS: [(char, char); 3] = [('c', 'h'), ('m', 'b'), ('n', 'g')];

fn is_guarani_vowel(c: char) -> bool {
    c.to_lowercase()
        .all(|l| "aeiouyáéíóúýãẽĩõũỹ".contains(l))
}

fn single_char(tok: &str) -> Option<char> {
    let mut it = tok.chars();
    match (it.next(), it.next()) {
        (Some(c), None) => Some(c),
        _ => None,
    }
}

fn digraph_second(first: char) -> Option<char> {
    let first = first.to_ascii_lowercase();
    DIGRAPHS.iter().find(|(a, _)| *a == first).map(|&(_, b)| b)
}

/// Joins `c h`, `m b`, `n g` written as separate letters. A bare digraph
/// that results also absorbs a following vowel-initial token (`m b o'e` ->
/// `mbo'e`); a single letter also joins a word it opens (`m bo'e` ->
/// `mbo'e`). Punctuation never takes part in a join.
pub(super) fn merge_digraphs(text: &str, trace: &mut Trace) -> String {
    let mut toks: Vec<String> = text.split(' ').map(str::to_string).collect();
    let mut i = 0;
    while i + 1 < toks.len() {
        let Some(second) = single_char(&toks[i]).and_then(digraph_second) else {
            i += 1;
            continue;
        };
        let next_first = toks[i + 1].chars().next();
        if next_first.map(|c| c.to_ascii_lowercase()) != Some(second) {
            i += 1;
            continue;
        }
        let mut end = i + 2;
        if single_char(&toks[i + 1]).is_some()
            && toks
                .get(i + 2)
                .and_then(|t| t.chars().next())
                .is_some_and(is_guarani_vowel)
        {
            end = i + 3;
        }
        let before = toks[i..end].join(" ");
        let merged: String = toks[i..end].concat();
        trace.record(RuleId::GuaraniDigraph, &before, &merged);
        toks.splice(i..end, [merged]);
        i += 1;
    }
    toks.join(" ")
}

use super::{RuleId, Trace};

/// Removes the spaces around an apostrophe that sits between two letters:
/// `jach 'a` -> `jach'a`. Input is whitespace-canonical, so at most one
/// space can appear on each side.
pub(super) fn join_apostrophes(text: &str, trace: &mut Trace) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut drop = vec![false; chars.len()];
    for (p, &c) in chars.iter().enumerate() {
        if c != '\'' || p == 0 || p + 1 >= chars.len() {
            continue;
        }
        let l = if chars[p - 1] == ' ' { p.checked_sub(2) } else { Some(p - 1) };
        let r = if chars[p + 1] == ' ' { p + 2 } else { p + 1 };
        let Some(l) = l else { continue };
        if r >= chars.len() || r - l == 2 {
            continue;
        }
        if chars[l].is_alphabetic() && chars[r].is_alphabetic() {
            for d in &mut drop[l + 1..r] {
                *d = true;
            }
            drop[p] = false;
            if trace.enabled {
                let start = chars[..l].iter().rposition(|&c| c == ' ').map_or(0, |s| s + 1);
                let end = chars[r..]
                    .iter()
                    .position(|&c| c == ' ')
                    .map_or(chars.len(), |e| r + e);
                let before: String = chars[start..end].iter().collect();
                let after: String = chars[start..end].iter().filter(|&&c| c != ' ').collect();
                trace.record(RuleId::AymaraApostrophe, &before, &after);
            }
        }
    }
    chars
        .iter()
        .zip(&drop)
        .filter(|(_, &d)| !d)
        .map(|(&c, _)| c)
        .collect()
}

#!/usr/bin/env python3
"""Pin chrF++ reference values for the Rust test suite.

Scores are produced with sacrebleu's CHRF(word_order=2), i.e. chrF++.
Run once; the JSON output is committed under crates/core/tests/fixtures/.

    python3 scripts/pin_chrf_fixtures.py > crates/core/tests/fixtures/chrf_oracle.json
"""
import json
import random

import sacrebleu
from sacrebleu.metrics import CHRF

HAND_PAIRS = [
    # (hypothesis, reference)
    ("kunan punchaw", "kunan punchaw"),
    ("", "wasiyman risaq"),
    ("wasiyman risaq", ""),
    ("", ""),
    ("abcd", "wxyz"),
    ("!!", "..."),
    ("— … !!", "kaypi qhaway"),
    ("?", "?"),
    ("chaypiqa", "ch aypiqa"),
    ("ch aypiqa", "chaypiqa"),
    ("sin ch i", "sinchi"),
    ("uma ll iqniy", "umalliqniy"),
    ("jach 'a uru", "jach'a uru"),
    ("t'äw qilqt'am", "t 'äw qilqt 'am"),
    ("Mba'éichapa reiko?", "Mba'éichapa reiko?"),
    ("mba'éichapa reiko", "Mba'éichapa reiko?"),
    ("che róga ipyahu", "che róga ipyahúva"),
    ("Ñande ru", "ñande ru"),
    ("ãẽĩõũỹ", "ãẽĩõũ"),
    ("g̃uarani", "guarani"),
    ("El niño juega en el parque.", "El niño está jugando en el parque."),
    ("Un hombre con una camisa roja.", "Un hombre que lleva una camisa roja."),
    ("Dos perros corren por la nieve.", "Dos perros corriendo en la nieve."),
    ("Juk warmi t'ant'a manq'aski.", "Mä warmix t'ant'a manq'aski."),
    ("Jaqinakax uta manqhan utji.", "Jaqinakax utan utjapxi."),
    ("Allin p'unchaw, imaynallan kashanki?", "Allin p'unchaw, imaynalla kachkanki?"),
    ("Ñuqaqa wasiyta risaq paqarin.", "Paqarinmi wasiyta risaq."),
    ("Kay llaqtapiqa achka runakuna tiyanku.", "Kay llaqtapi achkha runakuna tiyanku."),
    ("Mitã oñembosarái okápe.", "Mitã oñembosarái hína okápe."),
    ("Kuñakarai ohecha peteĩ jagua.", "Kuñakarai ohecha jagua."),
    ("Oĩ mokõi jagua ñuhũme.", "Mokõi jagua oĩ ñuhũme."),
    ("en 1990 y 2005", "1990 2005 watapi"),
    ("capítulo 7", "7 ñiqin raki"),
    ("(hola)", "(hola)"),
    ("(hola) mundo.", "hola mundo"),
    ("a", "a"),
    ("a", "b"),
    ("aa aa aa", "aa aa"),
    ("the the the the", "the cat"),
    ("  espacios   multiples  ", "espacios multiples"),
    ("tab\tseparated\ttext", "tab separated text"),
    ("Yuyarinaykipaqmi kaykunata qillqarqani", "Yuyarinaykipaq kaykunata qillqarqani"),
    ("munanakuy", "munakuy"),
    ("ÁÉÍÓÚ áéíóú", "aeiou aeiou"),
    ("niño", "niño"),
    ("https://example.org", "kaypi qhaway: https://example.org"),
    ("wasi, wasi; wasi:", "wasi wasi wasi"),
    ("'quoted' word", "quoted word"),
    ("x", "xxxxxxxxxxxxxxxxxxxx"),
    ("ab ab ab ab ab ab ab", "ab"),
    ("Hatun mayu patapi huk sach'a kan.", "Hatun mayu patanpi huk sach'a kachkan."),
    ("Jach'a qutax wali suma.", "Jach'a quta wali sumawa."),
    ("Ko'ãga ára porã.", "Ko'ã ára porã."),
]

ALPHABET = list("aeiouchlnqkmtpsrwy'ñãẽĩ.,") + [" "] * 6


def random_pairs(n, seed):
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        def sent():
            return "".join(rng.choice(ALPHABET) for _ in range(rng.randint(0, 40)))
        h = sent()
        r = h if rng.random() < 0.2 else sent()
        out.append((h, r))
    return out


def main():
    chrf = CHRF(word_order=2)
    pairs = HAND_PAIRS + random_pairs(40, 20230601)
    sentences = []
    for hyp, ref in pairs:
        sentences.append({
            "hyp": hyp,
            "ref": ref,
            "score": chrf.sentence_score(hyp, [ref]).score,
        })

    hyps = [p[0] for p in pairs]
    refs = [p[1] for p in pairs]
    corpora = [
        {"name": "all", "start": 0, "end": len(pairs),
         "score": chrf.corpus_score(hyps, [refs]).score},
        {"name": "hand", "start": 0, "end": len(HAND_PAIRS),
         "score": chrf.corpus_score(hyps[:len(HAND_PAIRS)], [refs[:len(HAND_PAIRS)]]).score},
        {"name": "random", "start": len(HAND_PAIRS), "end": len(pairs),
         "score": chrf.corpus_score(hyps[len(HAND_PAIRS):], [refs[len(HAND_PAIRS):]]).score},
        {"name": "realistic", "start": 20, "end": 31,
         "score": chrf.corpus_score(hyps[20:31], [refs[20:31]]).score},
    ]
    doc = {
        "oracle": f"sacrebleu {sacrebleu.__version__} CHRF(char_order=6, word_order=2, beta=2)",
        "sentences": sentences,
        "corpora": corpora,
    }
    print(json.dumps(doc, ensure_ascii=False, indent=1))


if __name__ == "__main__":
    main()

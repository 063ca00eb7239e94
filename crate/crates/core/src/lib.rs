//! Corpus engineering for low-resource Spanish-Aymara, Spanish-Guarani and
//! Spanish-Quechua machine translation data: orthographic normalization,
//! noise filtering, corpus statistics, synthetic-data augmentation and
//! chrF++ scoring.

pub mod augment;
pub mod corpus;
pub mod filter;
pub mod metrics;
pub mod normalize;
pub mod stats;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use augment::{
    append_dictionary, generate_synthetic, merge_augmented, mock_backend, AugmentError,
    DictionaryEntry, MockBackend, TranslationBackend,
};
pub use corpus::{
    load_corpus, write_corpus, Corpus, CorpusError, LangCode, Provenance, SentencePair, Split,
};
pub use filter::{apply_filters, DropReason, FilterConfig, FilterDecision, FilterError, Verdict};
pub use metrics::{corpus_chrf_pp, sentence_chrf_pp, ChrfConfig, MetricError, NgramStats};
pub use normalize::{
    normalize_aymara, normalize_base, normalize_for_language, normalize_guarani,
    normalize_quechua, NormalizeError, Normalizer, NormalizerConfig, RuleApplication, RuleId,
};
pub use stats::{compute_stats, stats_report, CorpusStats, StatsKey, StatsReport};

//! Generation and auditing of synthetic novice-programmer bugs.
//!
//! The crate is organized as a pipeline:
//!
//! * [`code_model`] — lossless tokenization and lightweight structural
//!   indexing for a Java subset and a C subset.
//! * [`taxonomy`] — bug catalogs (an 18-code compiler-error taxonomy and a
//!   4-code off-by-one taxonomy), target frequency distributions, and
//!   seeded sampling.
//! * [`injector`] — rule-based, seed-deterministic injection of a single
//!   bug into a source unit, plus bulk corpus generation.
//! * [`classifier`] — labels an (original, mutated) pair with a bug code,
//!   including concrete-evaluation categorization of off-by-one loops.
//! * [`stats`] — chi-square goodness of fit, Bonferroni correction, and
//!   Cohen's kappa.
//! * [`llm_gateway`] — prompt construction, response parsing, and a
//!   deterministic mock backend (plus an optional HTTP backend).
//! * [`experiment`] — end-to-end study runs: generate, label, tabulate,
//!   compare, report.
//!
//! Everything that consumes randomness takes an explicit `u64` seed and
//! uses ChaCha8 (via `rand_chacha`), whose output stream is specified and
//! stable across versions, so runs are reproducible byte for byte.

pub mod builtins;
pub mod classifier;
pub mod code_model;
pub mod experiment;
pub mod injector;
pub mod llm_gateway;
pub mod stats;
pub mod taxonomy;

pub use classifier::{classify_pair, detect_standalone, ClassifiedLabel, FrequencyTable, Label};
pub use experiment::{
    compare_distributions, run_study, run_study_with, write_report, write_run, ComparePolicy,
    RunOutcome, StatsReport, StrategyStats, StudyConfig,
};
pub use code_model::{Language, SourceUnit, Span, StructureIndex, Token, TokenKind};
pub use injector::{generate_corpus, inject, realize_site, Corpus, CorpusItem, InjectError, InjectionRecord, MutatedUnit};
pub use llm_gateway::{Backend, GenerationRequest, GenerationResponse, MockBackend, PromptStrategy};
pub use stats::{bonferroni, chi_square_gof, cohen_kappa, Binning, GofResult, KappaResult};
pub use taxonomy::{
    builtin_distribution, builtin_taxonomy, make_distribution, sample_bug_codes, BugClass,
    BugCode, BugDistribution, BugSpec, Study, SubThresholdPolicy, Taxonomy,
};

/// Default master seed used by commands and examples when none is given.
///
/// The value is arbitrary but fixed; every entry point that falls back to
/// it also prints it, so a re-run can always reproduce the output.
pub const DEFAULT_SEED: u64 = 42;

/// Derives a per-item seed from a master seed and an item index.
///
/// The mixing function is SplitMix64 applied to `master ^ (index + 1) * phi`
/// (with `phi` the 64-bit golden-ratio constant). It is fixed by this crate
/// and will not change between versions: corpora regenerate identically.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    const PHI: u64 = 0x9E37_79B9_7F4A_7C15;
    let mut z = master ^ (index.wrapping_add(1)).wrapping_mul(PHI);
    z = z.wrapping_add(PHI);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derive_seed_is_stable() {
        // Frozen values: these pin the mixing function across releases.
        assert_eq!(derive_seed(0, 0), 7960286522194355700);
        assert_eq!(derive_seed(42, 7), 14737624668983934838);
        assert_eq!(derive_seed(u64::MAX, 1), 15999695513772384452);
    }

    #[test]
    fn derive_seed_separates_indices() {
        let a: Vec<u64> = (0..100).map(|i| derive_seed(1, i)).collect();
        let mut b = a.clone();
        b.sort_unstable();
        b.dedup();
        assert_eq!(a.len(), b.len());
    }
}

//! Bug catalogs, target frequency distributions, and seeded sampling.
//!
//! Two built-in catalogs are shipped: an 18-code taxonomy of common Java
//! compiler-time mistakes (lettered `A`–`R`, grouped into syntax / type /
//! semantic classes) and a 4-code taxonomy of off-by-one loop mistakes for
//! C (`HighBounds`, `LowBounds`, `LowMiss`, `HighMiss`). On top of the
//! catalog codes there are out-of-distribution theme codes (`Y`, `T`, `W`,
//! `S`, `U`), the unthemed out-of-distribution sentinel `X`, and the
//! outcome sentinels `Refusal` and `None`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Which replication study a catalog or run belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Study {
    Study1,
    Study2,
}

impl fmt::Display for Study {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Study::Study1 => write!(f, "study1"),
            Study::Study2 => write!(f, "study2"),
        }
    }
}

/// Every code a label can carry.
///
/// The declaration order is the catalog order (syntax letters, type
/// letters, semantic letters, then the off-by-one codes, then themes and
/// sentinels). Inverse-CDF sampling walks codes in this order, so the
/// order is part of the crate's stability contract.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum BugCode {
    // Syntax errors.
    A,
    C,
    D,
    E,
    F,
    G,
    H,
    J,
    K,
    L,
    P,
    // Type errors.
    I,
    Q,
    // Other semantic errors.
    B,
    M,
    N,
    O,
    R,
    // Off-by-one codes.
    HighBounds,
    LowBounds,
    LowMiss,
    HighMiss,
    // Out-of-distribution themes.
    Y,
    T,
    W,
    S,
    U,
    /// Out of distribution without a theme.
    X,
    /// The generator declined to produce a bug.
    Refusal,
    /// No change was made (byte-identical output).
    None,
}

impl BugCode {
    /// All codes, in catalog order.
    pub const ALL: [BugCode; 30] = [
        BugCode::A,
        BugCode::C,
        BugCode::D,
        BugCode::E,
        BugCode::F,
        BugCode::G,
        BugCode::H,
        BugCode::J,
        BugCode::K,
        BugCode::L,
        BugCode::P,
        BugCode::I,
        BugCode::Q,
        BugCode::B,
        BugCode::M,
        BugCode::N,
        BugCode::O,
        BugCode::R,
        BugCode::HighBounds,
        BugCode::LowBounds,
        BugCode::LowMiss,
        BugCode::HighMiss,
        BugCode::Y,
        BugCode::T,
        BugCode::W,
        BugCode::S,
        BugCode::U,
        BugCode::X,
        BugCode::Refusal,
        BugCode::None,
    ];

    /// The 18 lettered codes, in catalog order.
    pub const LETTERS: [BugCode; 18] = [
        BugCode::A,
        BugCode::C,
        BugCode::D,
        BugCode::E,
        BugCode::F,
        BugCode::G,
        BugCode::H,
        BugCode::J,
        BugCode::K,
        BugCode::L,
        BugCode::P,
        BugCode::I,
        BugCode::Q,
        BugCode::B,
        BugCode::M,
        BugCode::N,
        BugCode::O,
        BugCode::R,
    ];

    /// The four off-by-one base codes.
    pub const OFF_BY_ONE: [BugCode; 4] = [
        BugCode::HighBounds,
        BugCode::LowBounds,
        BugCode::LowMiss,
        BugCode::HighMiss,
    ];

    /// The out-of-distribution theme codes.
    pub const THEMES: [BugCode; 5] =
        [BugCode::Y, BugCode::T, BugCode::W, BugCode::S, BugCode::U];

    /// True for the 22 codes the injector can realize directly.
    pub fn is_injectable(self) -> bool {
        Self::LETTERS.contains(&self) || Self::OFF_BY_ONE.contains(&self)
    }

    /// True for theme codes and `X` (everything counted as
    /// out-of-distribution in the frequency tables).
    pub fn is_out_of_distribution(self) -> bool {
        self == BugCode::X || Self::THEMES.contains(&self)
    }

    /// The broad class a code belongs to; `None` for the outcome
    /// sentinels `Refusal`/`None`, which are not bugs.
    pub fn class(self) -> Option<BugClass> {
        use BugCode::*;
        Some(match self {
            A | C | D | E | F | G | H | J | K | L | P => BugClass::Syntax,
            I | Q => BugClass::Type,
            B | M | N | O | R => BugClass::Semantic,
            HighBounds | LowBounds | LowMiss | HighMiss => BugClass::Logic,
            Y | S => BugClass::Semantic,
            T => BugClass::Type,
            W => BugClass::Syntax,
            U | X => BugClass::Mixed,
            Refusal | None => return Option::None,
        })
    }

    /// Two-letter abbreviation used when printing pair labels
    /// ("LM and HB"); full name otherwise.
    pub fn abbreviation(self) -> &'static str {
        match self {
            BugCode::HighBounds => "HB",
            BugCode::LowBounds => "LB",
            BugCode::LowMiss => "LM",
            BugCode::HighMiss => "HM",
            other => other.name(),
        }
    }

    /// Stable display name (also the serialized form).
    pub fn name(self) -> &'static str {
        use BugCode::*;
        match self {
            A => "A",
            B => "B",
            C => "C",
            D => "D",
            E => "E",
            F => "F",
            G => "G",
            H => "H",
            I => "I",
            J => "J",
            K => "K",
            L => "L",
            M => "M",
            N => "N",
            O => "O",
            P => "P",
            Q => "Q",
            R => "R",
            HighBounds => "HighBounds",
            LowBounds => "LowBounds",
            LowMiss => "LowMiss",
            HighMiss => "HighMiss",
            S => "S",
            T => "T",
            U => "U",
            W => "W",
            X => "X",
            Y => "Y",
            Refusal => "Refusal",
            None => "None",
        }
    }
}

impl fmt::Display for BugCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BugCode {
    type Err = TaxonomyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim();
        // `-` marks refusal rows in frequency tables.
        if trimmed == "-" {
            return Ok(BugCode::Refusal);
        }
        BugCode::ALL
            .iter()
            .copied()
            .find(|c| c.name().eq_ignore_ascii_case(trimmed))
            .ok_or_else(|| TaxonomyError::UnknownCode { text: s.to_string() })
    }
}

/// Broad error class, as used in the frequency tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BugClass {
    Syntax,
    Type,
    Semantic,
    Logic,
    Mixed,
}

impl fmt::Display for BugClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BugClass::Syntax => write!(f, "Syntax"),
            BugClass::Type => write!(f, "Type"),
            BugClass::Semantic => write!(f, "Semantic"),
            BugClass::Logic => write!(f, "Logic"),
            BugClass::Mixed => write!(f, "Mixed"),
        }
    }
}

/// One catalog entry: the code, its class, its human description, and the
/// identifiers of the site predicate / injection rule / detector that
/// realize it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BugSpec {
    pub code: BugCode,
    pub class: BugClass,
    pub description: String,
    pub applicability: String,
    pub injector_rule: String,
    pub detector_rule: String,
}

/// A study's full bug catalog, in catalog order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Taxonomy {
    pub study: Study,
    pub specs: Vec<BugSpec>,
}

impl Taxonomy {
    pub fn spec(&self, code: BugCode) -> Option<&BugSpec> {
        self.specs.iter().find(|s| s.code == code)
    }

    pub fn codes(&self) -> Vec<BugCode> {
        self.specs.iter().map(|s| s.code).collect()
    }

    pub fn contains(&self, code: BugCode) -> bool {
        self.specs.iter().any(|s| s.code == code)
    }
}

fn spec(code: BugCode, description: &str, applicability: &str, rule: &str) -> BugSpec {
    BugSpec {
        code,
        class: code.class().expect("catalog codes always have a class"),
        description: description.to_string(),
        applicability: applicability.to_string(),
        injector_rule: rule.to_string(),
        detector_rule: rule.to_string(),
    }
}

/// The built-in catalog for a study: 18 lettered codes for study 1, the 4
/// off-by-one codes for study 2, with descriptions as published.
pub fn builtin_taxonomy(study: Study) -> Taxonomy {
    let specs = match study {
        Study::Study1 => vec![
            spec(BugCode::A, "Confusing = with ==", "condition-eq", "eq-to-assign"),
            spec(BugCode::C, "Mismatched parentheses", "paren-pair", "drop-close-paren"),
            spec(BugCode::D, "Confusing & with &&", "logical-and", "and-to-bitand"),
            spec(
                BugCode::E,
                "Spurious semi-colon after if, for, while",
                "control-header",
                "semi-after-header",
            ),
            spec(BugCode::F, "Wrong separator in for", "for-header", "for-semis-to-commas"),
            spec(BugCode::G, "Wrong brackets in if", "if-header", "parens-to-braces"),
            spec(
                BugCode::H,
                "Using reserved keywords",
                "named-local",
                "rename-to-keyword",
            ),
            spec(
                BugCode::J,
                "Forgetting parentheses when calling methods",
                "no-arg-call",
                "drop-call-parens",
            ),
            spec(
                BugCode::K,
                "Spurious semi-colon after method header",
                "method-header",
                "semi-after-signature",
            ),
            spec(
                BugCode::L,
                "Less-than / greater-than operators wrong",
                "relational-in-condition",
                "flip-relational",
            ),
            spec(
                BugCode::P,
                "Including types in actual method arguments",
                "typed-call-arg",
                "prefix-arg-type",
            ),
            spec(
                BugCode::I,
                "Calling method with wrong types",
                "identifier-call-arg",
                "arg-to-string-literal",
            ),
            spec(
                BugCode::Q,
                "Type mismatch when assigning method result",
                "call-initialized-decl",
                "change-decl-type",
            ),
            spec(
                BugCode::B,
                "Using == to compare strings",
                "string-equals-call",
                "equals-to-eq",
            ),
            spec(
                BugCode::M,
                "Invoking instance method as static",
                "instance-call",
                "receiver-to-type",
            ),
            spec(
                BugCode::N,
                "Discarding method return",
                "call-assignment",
                "drop-assignment-lhs",
            ),
            spec(
                BugCode::O,
                "Missing return statement",
                "return-in-nonvoid",
                "drop-return",
            ),
            spec(
                BugCode::R,
                "Missing methods when implementing interface",
                "implements-method",
                "drop-method",
            ),
        ],
        Study::Study2 => vec![
            spec(
                BugCode::HighBounds,
                "accessing an index just past the end (index length)",
                "canonical-loop",
                "lt-to-le",
            ),
            spec(
                BugCode::LowBounds,
                "accessing an invalid index before the start (index -1)",
                "canonical-loop",
                "init-to-minus-one",
            ),
            spec(
                BugCode::LowMiss,
                "missing the first element (index 0)",
                "canonical-loop",
                "init-to-one",
            ),
            spec(
                BugCode::HighMiss,
                "missing the last element (index length-1)",
                "canonical-loop",
                "bound-minus-one",
            ),
        ],
    };
    Taxonomy { study, specs }
}

/// Errors from catalog and distribution plumbing.
#[derive(Debug, Error)]
pub enum TaxonomyError {
    #[error("unknown bug code `{text}`")]
    UnknownCode { text: String },
    #[error("negative weight {percent} for code {code}")]
    NegativeWeight { code: BugCode, percent: f64 },
    #[error("all weights are zero")]
    AllZero,
    #[error("malformed percent `{text}`")]
    BadPercent { text: String },
    #[error("malformed distribution line `{line}`")]
    BadLine { line: String },
}

/// A target bug-frequency distribution.
///
/// `weights` are normalized probabilities; `raw` keeps the percentages as
/// given (so reports and prompts can echo the source column verbatim).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BugDistribution {
    weights: BTreeMap<BugCode, f64>,
    raw: BTreeMap<BugCode, f64>,
}

impl BugDistribution {
    /// Normalized probability of `code` (0 when absent).
    pub fn weight(&self, code: BugCode) -> f64 {
        self.weights.get(&code).copied().unwrap_or(0.0)
    }

    /// The percentage as originally supplied (0 when absent).
    pub fn raw_percent(&self, code: BugCode) -> f64 {
        self.raw.get(&code).copied().unwrap_or(0.0)
    }

    /// Codes with positive weight, in catalog order.
    pub fn support(&self) -> Vec<BugCode> {
        self.weights
            .iter()
            .filter(|(_, w)| **w > 0.0)
            .map(|(c, _)| *c)
            .collect()
    }

    /// All entries (including zero-weight ones), in catalog order.
    pub fn entries(&self) -> impl Iterator<Item = (BugCode, f64)> + '_ {
        self.weights.iter().map(|(c, w)| (*c, *w))
    }

    /// Draws one code by inverse CDF over the support in catalog order.
    pub fn draw(&self, rng: &mut impl Rng) -> BugCode {
        let u: f64 = rng.random();
        let mut cumulative = 0.0;
        let mut chosen = BugCode::None;
        for (code, weight) in self.entries().filter(|(_, w)| *w > 0.0) {
            chosen = code;
            cumulative += weight;
            if u < cumulative {
                break;
            }
        }
        chosen
    }
}

/// Builds a normalized distribution from `(code, percent)` pairs.
///
/// Percentages need not sum to 100; they are normalized. Repeated codes
/// accumulate.
pub fn make_distribution(
    pairs: &[(BugCode, f64)],
) -> Result<BugDistribution, TaxonomyError> {
    let mut raw: BTreeMap<BugCode, f64> = BTreeMap::new();
    for (code, percent) in pairs {
        if *percent < 0.0 {
            return Err(TaxonomyError::NegativeWeight { code: *code, percent: *percent });
        }
        *raw.entry(*code).or_insert(0.0) += *percent;
    }
    let total: f64 = raw.values().sum();
    if total <= 0.0 {
        return Err(TaxonomyError::AllZero);
    }
    let weights = raw.iter().map(|(c, p)| (*c, *p / total)).collect();
    Ok(BugDistribution { weights, raw })
}

/// How to read sub-threshold table entries like `<0.1`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubThresholdPolicy {
    /// Use half the bound (default: `<0.1` → 0.05).
    #[default]
    Half,
    /// Treat as zero.
    Zero,
    /// Use the bound itself (`<0.1` → 0.1).
    Bound,
}

/// Parses `code,percent` CSV text into a distribution.
///
/// Blank lines, `#` comments, and a `code,percent` header are skipped.
/// Percent entries of the form `<bound` are resolved by `policy`.
pub fn load_distribution(
    text: &str,
    policy: SubThresholdPolicy,
) -> Result<BugDistribution, TaxonomyError> {
    let mut pairs = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((code_text, percent_text)) = line.split_once(',') else {
            return Err(TaxonomyError::BadLine { line: line.to_string() });
        };
        let code_text = code_text.trim();
        let percent_text = percent_text.trim();
        if code_text.eq_ignore_ascii_case("code") {
            continue; // header
        }
        let code: BugCode = code_text.parse()?;
        let percent = if let Some(bound_text) = percent_text.strip_prefix('<') {
            let bound: f64 = bound_text.trim().parse().map_err(|_| {
                TaxonomyError::BadPercent { text: percent_text.to_string() }
            })?;
            match policy {
                SubThresholdPolicy::Half => bound / 2.0,
                SubThresholdPolicy::Zero => 0.0,
                SubThresholdPolicy::Bound => bound,
            }
        } else {
            percent_text.parse().map_err(|_| TaxonomyError::BadPercent {
                text: percent_text.to_string(),
            })?
        };
        pairs.push((code, percent));
    }
    make_distribution(&pairs)
}

/// The published reference ("Original") column for a study, resolved with
/// the given sub-threshold policy.
pub fn builtin_distribution(
    study: Study,
    policy: SubThresholdPolicy,
) -> BugDistribution {
    let text = builtin_distribution_csv(study);
    load_distribution(text, policy).expect("built-in distribution parses")
}

/// The raw CSV text behind [`builtin_distribution`].
pub fn builtin_distribution_csv(study: Study) -> &'static str {
    match study {
        Study::Study1 => include_str!("../data/distributions/study1_original.csv"),
        Study::Study2 => include_str!("../data/distributions/study2_original.csv"),
    }
}

/// Draws `n` codes i.i.d. from `dist`, deterministically for a fixed seed.
///
/// Sampling is inverse-CDF over catalog order using ChaCha8, both of which
/// are stable across versions.
pub fn sample_bug_codes(dist: &BugDistribution, n: usize, seed: u64) -> Vec<BugCode> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| dist.draw(&mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn study1_catalog_is_complete() {
        let tax = builtin_taxonomy(Study::Study1);
        assert_eq!(tax.specs.len(), 18);
        assert_eq!(tax.spec(BugCode::A).unwrap().description, "Confusing = with ==");
        let o = tax.spec(BugCode::O).unwrap();
        assert_eq!(o.class, BugClass::Semantic);
        assert_eq!(o.description, "Missing return statement");
        let by_class = |class: BugClass| tax.specs.iter().filter(|s| s.class == class).count();
        assert_eq!(by_class(BugClass::Syntax), 11);
        assert_eq!(by_class(BugClass::Type), 2);
        assert_eq!(by_class(BugClass::Semantic), 5);
    }

    #[test]
    fn study2_catalog_is_complete() {
        let tax = builtin_taxonomy(Study::Study2);
        assert_eq!(tax.specs.len(), 4);
        assert_eq!(
            tax.spec(BugCode::HighBounds).unwrap().description,
            "accessing an index just past the end (index length)"
        );
        assert!(tax.specs.iter().all(|s| s.class == BugClass::Logic));
    }

    #[test]
    fn code_names_round_trip() {
        for code in BugCode::ALL {
            assert_eq!(code.name().parse::<BugCode>().unwrap(), code);
        }
        assert_eq!("-".parse::<BugCode>().unwrap(), BugCode::Refusal);
        assert!("Z".parse::<BugCode>().is_err());
    }

    #[test]
    fn single_category_distribution_is_degenerate() {
        let dist = make_distribution(&[(BugCode::C, 100.0)]).unwrap();
        assert_eq!(dist.weight(BugCode::C), 1.0);
        assert_eq!(sample_bug_codes(&dist, 5, 7), vec![BugCode::C; 5]);
        assert!(sample_bug_codes(&dist, 0, 7).is_empty());
    }

    #[test]
    fn distributions_normalize() {
        for study in [Study::Study1, Study::Study2] {
            let dist = builtin_distribution(study, SubThresholdPolicy::Half);
            let total: f64 = dist.entries().map(|(_, w)| w).sum();
            assert!((total - 1.0).abs() < 1e-9, "{study}: sum {total}");
        }
    }

    #[test]
    fn reference_column_weights() {
        // The 18-code column sums to 100.2 once `<0.1` resolves to 0.05
        // twice, so the largest entry lands at 33.1 / 100.2.
        let dist = builtin_distribution(Study::Study1, SubThresholdPolicy::Half);
        assert!((dist.weight(BugCode::C) - 33.1 / 100.2).abs() < 1e-12);
        assert_eq!(dist.raw_percent(BugCode::C), 33.1);
        assert_eq!(dist.raw_percent(BugCode::H), 0.05);
        // The 4-code column sums to 99.9.
        let dist2 = builtin_distribution(Study::Study2, SubThresholdPolicy::Half);
        assert!((dist2.weight(BugCode::HighBounds) - 64.6 / 99.9).abs() < 1e-12);
        assert!((dist2.weight(BugCode::HighBounds) - 0.646).abs() < 0.001);
    }

    #[test]
    fn sub_threshold_policies() {
        let text = "code,percent\nA,1.9\nH,<0.1\n";
        let half = load_distribution(text, SubThresholdPolicy::Half).unwrap();
        assert!((half.weight(BugCode::H) - 0.05 / 1.95).abs() < 1e-12);
        let zero = load_distribution(text, SubThresholdPolicy::Zero).unwrap();
        assert_eq!(zero.weight(BugCode::H), 0.0);
        let bound = load_distribution(text, SubThresholdPolicy::Bound).unwrap();
        assert!((bound.weight(BugCode::H) - 0.1 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn bad_distributions_are_rejected() {
        assert!(matches!(
            make_distribution(&[(BugCode::A, -1.0)]),
            Err(TaxonomyError::NegativeWeight { .. })
        ));
        assert!(matches!(
            make_distribution(&[(BugCode::A, 0.0)]),
            Err(TaxonomyError::AllZero)
        ));
        assert!(load_distribution("A;1.0\n", SubThresholdPolicy::Half).is_err());
        assert!(load_distribution("A,roughly-one\n", SubThresholdPolicy::Half).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_seed_sensitive() {
        let dist = builtin_distribution(Study::Study1, SubThresholdPolicy::Half);
        let a = sample_bug_codes(&dist, 50, 9);
        let b = sample_bug_codes(&dist, 50, 9);
        let c = sample_bug_codes(&dist, 50, 10);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn sampling_tracks_weights() {
        // Binomial 3-sigma bound: p = 0.3303, n = 10000 → sigma ≈ 0.0047,
        // so the empirical share of C stays within ±1.5 points.
        let dist = builtin_distribution(Study::Study1, SubThresholdPolicy::Half);
        let draws = sample_bug_codes(&dist, 10_000, 1234);
        let c_share =
            draws.iter().filter(|&&c| c == BugCode::C).count() as f64 / 10_000.0;
        assert!((c_share - 0.331).abs() < 0.015, "share {c_share}");
    }
}

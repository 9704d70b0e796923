//! Chi-square goodness of fit, Bonferroni correction, Cohen's kappa.
//!
//! The p-value math (log-gamma and the regularized incomplete gamma
//! function) is implemented here directly so results are reproducible to
//! fixed tolerances: Lanczos approximation for `ln Γ`, series expansion of
//! `P(a, x)` for `x < a + 1`, continued fraction for `Q(a, x)` otherwise,
//! iteration cap 500, convergence 1e-12.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::taxonomy::{BugCode, BugDistribution};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("no observations after binning")]
    EmptyObserved,
    #[error("observed count in zero-expected category `{code}` under strict binning")]
    ZeroExpected { code: String },
    #[error("fewer than two categories with positive expectation")]
    TooFewCategories,
    #[error("ood-bucket floor {floor} outside (0, 1)")]
    InvalidFloor { floor: f64 },
    #[error("label lists differ in length: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("empty label lists")]
    Empty,
}

/// How observed categories that the expected distribution lacks are
/// handled.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "policy")]
pub enum Binning {
    /// Error out on observed mass in a zero-expected category.
    Strict,
    /// Merge `X`, the theme codes, and `Refusal` into one residual
    /// category with expected probability `floor` (other expectations are
    /// scaled by `1 - floor`). Zero-expected categories outside that set
    /// are dropped.
    OodBucket { floor: f64 },
    /// Drop zero-expected categories from both vectors.
    #[default]
    DropZero,
}

impl std::fmt::Display for Binning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Binning::Strict => write!(f, "strict"),
            Binning::OodBucket { floor } => write!(f, "ood-bucket(floor={floor})"),
            Binning::DropZero => write!(f, "drop-zero"),
        }
    }
}

/// A chi-square goodness-of-fit result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GofResult {
    pub chi2: f64,
    pub df: usize,
    pub p: f64,
    /// Category labels included after binning, in catalog order.
    pub included: Vec<String>,
    /// Observations actually compared (after any drops).
    pub n: u64,
    /// E.g. expected counts below 5.
    pub warnings: Vec<String>,
}

impl GofResult {
    pub fn significant(&self, alpha: f64) -> bool {
        self.p < alpha
    }
}

/// Chi-square goodness of fit of observed per-code counts against an
/// expected distribution.
///
/// `chi2 = Σ (Oᵢ − N·pᵢ)² / (N·pᵢ)` over the categories the binning
/// policy keeps; `p` is the upper tail of the chi-square distribution at
/// `df = k − 1`, accurate to 1e-8. No small-count correction is applied;
/// expected counts below 5 produce warnings instead.
pub fn chi_square_gof(
    observed: &BTreeMap<BugCode, u64>,
    expected: &BugDistribution,
    binning: Binning,
) -> Result<GofResult, StatsError> {
    if observed.values().all(|&c| c == 0) {
        return Err(StatsError::EmptyObserved);
    }
    // Category set: (label, expected probability, observed count).
    let mut categories: Vec<(String, f64, u64)> = Vec::new();
    match binning {
        Binning::Strict => {
            for (&code, &count) in observed {
                if count > 0 && expected.weight(code) == 0.0 {
                    return Err(StatsError::ZeroExpected { code: code.to_string() });
                }
            }
            for (code, weight) in expected.entries().filter(|(_, w)| *w > 0.0) {
                categories.push((
                    code.to_string(),
                    weight,
                    observed.get(&code).copied().unwrap_or(0),
                ));
            }
        }
        Binning::DropZero => {
            for (code, weight) in expected.entries().filter(|(_, w)| *w > 0.0) {
                categories.push((
                    code.to_string(),
                    weight,
                    observed.get(&code).copied().unwrap_or(0),
                ));
            }
        }
        Binning::OodBucket { floor } => {
            if !(floor > 0.0 && floor < 1.0) {
                return Err(StatsError::InvalidFloor { floor });
            }
            let is_residual = |c: BugCode| c.is_out_of_distribution() || c == BugCode::Refusal;
            for (code, weight) in expected.entries().filter(|(_, w)| *w > 0.0) {
                categories.push((
                    code.to_string(),
                    weight * (1.0 - floor),
                    observed.get(&code).copied().unwrap_or(0),
                ));
            }
            let residual: u64 = observed
                .iter()
                .filter(|(&c, _)| is_residual(c) && expected.weight(c) == 0.0)
                .map(|(_, &n)| n)
                .sum();
            categories.push(("OOD".to_string(), floor, residual));
        }
    }
    chi_square_categories(categories)
}

/// Chi-square goodness of fit over already-binned categories.
///
/// Each entry is `(label, expected weight, observed count)`. Weights are
/// renormalized over the categories given, so raw percentages work as well
/// as probabilities; zero-weight categories are dropped along with any
/// counts they carry.
pub fn chi_square_categories(
    categories: Vec<(String, f64, u64)>,
) -> Result<GofResult, StatsError> {
    let categories: Vec<_> = categories.into_iter().filter(|(_, w, _)| *w > 0.0).collect();
    if categories.len() < 2 {
        return Err(StatsError::TooFewCategories);
    }
    let n: u64 = categories.iter().map(|(_, _, c)| *c).sum();
    if n == 0 {
        return Err(StatsError::EmptyObserved);
    }
    let total_weight: f64 = categories.iter().map(|(_, w, _)| *w).sum();
    let nf = n as f64;
    let mut chi2 = 0.0;
    let mut warnings = Vec::new();
    for (label, weight, count) in &categories {
        let expected_count = nf * weight / total_weight;
        if expected_count < 5.0 {
            warnings.push(format!(
                "expected count {expected_count:.2} < 5 in category {label}"
            ));
        }
        let diff = *count as f64 - expected_count;
        chi2 += diff * diff / expected_count;
    }
    let df = categories.len() - 1;
    let p = chi_square_p(chi2, df);
    Ok(GofResult {
        chi2,
        df,
        p,
        included: categories.into_iter().map(|(l, _, _)| l).collect(),
        n,
        warnings,
    })
}

/// Upper-tail probability of the chi-square distribution.
pub fn chi_square_p(chi2: f64, df: usize) -> f64 {
    gamma_q(df as f64 / 2.0, chi2 / 2.0)
}

/// One multiple-comparison correction over a family of tests.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Correction {
    /// `min(1, m · pᵢ)` per test.
    pub adjusted: Vec<f64>,
    /// `adjustedᵢ < alpha` per test.
    pub reject: Vec<bool>,
    pub alpha: f64,
    pub tests: usize,
}

/// Bonferroni correction: adjusted pᵢ = min(1, m·pᵢ), reject when the
/// adjusted value is below `alpha`.
pub fn bonferroni(pvalues: &[f64], alpha: f64) -> Correction {
    let m = pvalues.len() as f64;
    let adjusted: Vec<f64> = pvalues.iter().map(|p| (m * p).min(1.0)).collect();
    let reject = adjusted.iter().map(|p| *p < alpha).collect();
    Correction { adjusted, reject, alpha, tests: pvalues.len() }
}

/// Cohen's kappa between two raters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KappaResult {
    pub kappa: f64,
    pub observed_agreement: f64,
    pub expected_agreement: f64,
}

/// Inter-rater agreement adjusted for chance, over any label type.
pub fn cohen_kappa<K: Ord>(a: &[K], b: &[K]) -> Result<KappaResult, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch { a: a.len(), b: b.len() });
    }
    if a.is_empty() {
        return Err(StatsError::Empty);
    }
    let n = a.len() as f64;
    let matches = a.iter().zip(b).filter(|(x, y)| *x == *y).count() as f64;
    let po = matches / n;
    let mut margin_a: BTreeMap<&K, f64> = BTreeMap::new();
    let mut margin_b: BTreeMap<&K, f64> = BTreeMap::new();
    for x in a {
        *margin_a.entry(x).or_insert(0.0) += 1.0;
    }
    for y in b {
        *margin_b.entry(y).or_insert(0.0) += 1.0;
    }
    let pe: f64 = margin_a
        .iter()
        .map(|(k, ca)| ca / n * margin_b.get(k).copied().unwrap_or(0.0) / n)
        .sum();
    let kappa = if pe >= 1.0 - 1e-12 {
        // Both raters constant on the same label: agreement is perfect by
        // construction.
        1.0
    } else {
        (po - pe) / (1.0 - pe)
    };
    Ok(KappaResult { kappa, observed_agreement: po, expected_agreement: pe })
}

// ---------------------------------------------------------------------------
// Incomplete gamma machinery.

const MAX_ITERATIONS: usize = 500;
const EPSILON: f64 = 1e-12;
const TINY: f64 = 1e-300;

/// Natural log of the gamma function (Lanczos approximation, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const COEFFICIENTS: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection formula.
        let pi = std::f64::consts::PI;
        return pi.ln() - (pi * x).sin().ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEFFICIENTS[0];
    for (i, c) in COEFFICIENTS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized upper incomplete gamma function `Q(a, x)`.
///
/// Series expansion of `P` for `x < a + 1`, continued fraction for `Q`
/// otherwise — the standard numerically stable split.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0, "gamma_q domain: a > 0, x >= 0");
    if x == 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_continued_fraction(a, x)
    }
}

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    for n in 1..=MAX_ITERATIONS {
        term *= x / (a + n as f64);
        sum += term;
        if term.abs() < sum.abs() * EPSILON {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_q_continued_fraction(a: f64, x: f64) -> f64 {
    // Modified Lentz's method.
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_ITERATIONS {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPSILON {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::make_distribution;

    fn counts(pairs: &[(BugCode, u64)]) -> BTreeMap<BugCode, u64> {
        pairs.iter().copied().collect()
    }

    #[test]
    fn perfect_fit_has_p_one() {
        let expected =
            make_distribution(&[(BugCode::A, 50.0), (BugCode::B, 50.0)]).unwrap();
        let r = chi_square_gof(
            &counts(&[(BugCode::A, 50), (BugCode::B, 50)]),
            &expected,
            Binning::Strict,
        )
        .unwrap();
        assert_eq!(r.chi2, 0.0);
        assert_eq!(r.df, 1);
        assert!((r.p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sixty_forty_against_uniform() {
        // Closed form: chi2 = 4, df = 1, p = erfc(sqrt(2)).
        let expected =
            make_distribution(&[(BugCode::A, 50.0), (BugCode::B, 50.0)]).unwrap();
        let r = chi_square_gof(
            &counts(&[(BugCode::A, 60), (BugCode::B, 40)]),
            &expected,
            Binning::Strict,
        )
        .unwrap();
        assert!((r.chi2 - 4.0).abs() < 1e-12);
        assert_eq!(r.df, 1);
        assert!((r.p - 0.045_500_263_896_358_42).abs() < 1e-8, "p = {}", r.p);
    }

    #[test]
    fn chi2_scales_with_counts() {
        let expected =
            make_distribution(&[(BugCode::A, 50.0), (BugCode::B, 50.0)]).unwrap();
        let small = chi_square_gof(
            &counts(&[(BugCode::A, 60), (BugCode::B, 40)]),
            &expected,
            Binning::Strict,
        )
        .unwrap();
        let big = chi_square_gof(
            &counts(&[(BugCode::A, 600), (BugCode::B, 400)]),
            &expected,
            Binning::Strict,
        )
        .unwrap();
        assert!((big.chi2 - 10.0 * small.chi2).abs() < 1e-9);
    }

    #[test]
    fn df_two_closed_form() {
        // For df = 2, the upper tail is exactly exp(-chi2 / 2).
        for chi2 in [0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 25.0] {
            let p = chi_square_p(chi2, 2);
            assert!(
                (p - (-chi2 / 2.0).exp()).abs() < 1e-10,
                "chi2 {chi2}: {p} vs {}",
                (-chi2 / 2.0).exp()
            );
        }
    }

    #[test]
    fn gamma_q_sanity() {
        assert_eq!(gamma_q(1.0, 0.0), 1.0);
        let mut last = 1.0;
        for i in 1..50 {
            let q = gamma_q(1.0, i as f64 * 0.2);
            assert!(q < last, "Q(1, x) must decrease");
            last = q;
        }
    }

    #[test]
    fn gamma_q_matches_reference_library() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        for df in 1..=12usize {
            let dist = ChiSquared::new(df as f64).unwrap();
            for &chi2 in &[0.05, 0.18, 0.5, 1.0, 3.84, 8.7, 17.7, 30.0, 69.9, 115.7] {
                let ours = chi_square_p(chi2, df);
                let reference = 1.0 - dist.cdf(chi2);
                assert!(
                    (ours - reference).abs() < 1e-8,
                    "df {df}, chi2 {chi2}: {ours} vs {reference}"
                );
            }
        }
    }

    #[test]
    fn strict_binning_rejects_unexpected_mass() {
        let expected =
            make_distribution(&[(BugCode::A, 50.0), (BugCode::B, 50.0)]).unwrap();
        let observed = counts(&[(BugCode::A, 50), (BugCode::B, 40), (BugCode::X, 10)]);
        assert!(matches!(
            chi_square_gof(&observed, &expected, Binning::Strict),
            Err(StatsError::ZeroExpected { .. })
        ));
    }

    #[test]
    fn drop_zero_discards_unexpected_mass() {
        let expected =
            make_distribution(&[(BugCode::A, 50.0), (BugCode::B, 50.0)]).unwrap();
        let observed = counts(&[(BugCode::A, 50), (BugCode::B, 50), (BugCode::X, 100)]);
        let r = chi_square_gof(&observed, &expected, Binning::DropZero).unwrap();
        assert_eq!(r.n, 100);
        assert_eq!(r.included, vec!["A", "B"]);
        assert_eq!(r.chi2, 0.0);
    }

    #[test]
    fn ood_bucket_merges_residual_categories() {
        let expected =
            make_distribution(&[(BugCode::A, 50.0), (BugCode::B, 50.0)]).unwrap();
        let observed = counts(&[
            (BugCode::A, 45),
            (BugCode::B, 45),
            (BugCode::X, 4),
            (BugCode::U, 3),
            (BugCode::Refusal, 3),
        ]);
        let r =
            chi_square_gof(&observed, &expected, Binning::OodBucket { floor: 0.1 }).unwrap();
        assert_eq!(r.n, 100);
        assert_eq!(r.included, vec!["A", "B", "OOD"]);
        // Expected: 45, 45, 10 — matches exactly.
        assert!(r.chi2.abs() < 1e-12);
        assert!(matches!(
            chi_square_gof(&observed, &expected, Binning::OodBucket { floor: 1.5 }),
            Err(StatsError::InvalidFloor { .. })
        ));
    }

    #[test]
    fn small_expected_counts_warn() {
        let expected =
            make_distribution(&[(BugCode::A, 99.0), (BugCode::B, 1.0)]).unwrap();
        let r = chi_square_gof(
            &counts(&[(BugCode::A, 99), (BugCode::B, 1)]),
            &expected,
            Binning::Strict,
        )
        .unwrap();
        assert_eq!(r.warnings.len(), 1);
        assert!(r.warnings[0].contains("category B"));
    }

    #[test]
    fn empty_observations_rejected() {
        let expected =
            make_distribution(&[(BugCode::A, 50.0), (BugCode::B, 50.0)]).unwrap();
        assert!(matches!(
            chi_square_gof(&BTreeMap::new(), &expected, Binning::Strict),
            Err(StatsError::EmptyObserved)
        ));
    }

    #[test]
    fn bonferroni_adjusts_and_clamps() {
        let c = bonferroni(&[0.01, 0.20, 0.03], 0.05);
        let rounded: Vec<f64> = c.adjusted.iter().map(|p| (p * 100.0).round() / 100.0).collect();
        assert_eq!(rounded, vec![0.03, 0.60, 0.09]);
        assert_eq!(c.reject, vec![true, false, false]);
        let single = bonferroni(&[0.04], 0.05);
        assert!((single.adjusted[0] - 0.04).abs() < 1e-12);
        assert_eq!(single.reject, vec![true]);
        let clamped = bonferroni(&[0.4, 0.4, 0.4], 0.05);
        assert_eq!(clamped.adjusted, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn kappa_perfect_agreement() {
        let labels = ["A", "B", "C", "A"];
        let r = cohen_kappa(&labels, &labels).unwrap();
        assert_eq!(r.kappa, 1.0);
        assert_eq!(r.observed_agreement, 1.0);
    }

    #[test]
    fn kappa_hand_case() {
        let a = ["A", "A", "B", "B"];
        let b = ["A", "B", "B", "B"];
        let r = cohen_kappa(&a, &b).unwrap();
        assert!((r.observed_agreement - 0.75).abs() < 1e-12);
        assert!((r.expected_agreement - 0.5).abs() < 1e-12);
        assert!((r.kappa - 0.5).abs() < 1e-12);
    }

    #[test]
    fn kappa_zero_for_constant_versus_balanced() {
        let a = ["A", "A", "A", "A"];
        let b = ["A", "B", "A", "B"];
        let r = cohen_kappa(&a, &b).unwrap();
        assert!(r.kappa.abs() < 1e-12);
    }

    #[test]
    fn kappa_input_validation() {
        assert!(matches!(
            cohen_kappa(&["A"], &["A", "B"]),
            Err(StatsError::LengthMismatch { .. })
        ));
        let empty: [&str; 0] = [];
        assert!(matches!(cohen_kappa(&empty, &empty), Err(StatsError::Empty)));
    }
}

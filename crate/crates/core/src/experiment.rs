//! End-to-end study runs: generate a corpus through a backend, label it,
//! tabulate per-strategy frequencies, test them against a reference
//! distribution, and write the run artifacts.
//!
//! A run directory holds `corpus.jsonl`, `frequencies.csv`, `report.md`,
//! and `config.json`; identical configurations on the mock backend
//! reproduce all four byte for byte.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::builtins::builtin_units;
use crate::classifier::{label_corpus, FrequencyTable, Label};
use crate::code_model::{Language, SourceUnit, Span};
use crate::injector::{Corpus, CorpusItem};
use crate::llm_gateway::{Backend, GenerationRequest, MockBackend, PromptStrategy};
use crate::stats::{
    bonferroni, chi_square_categories, chi_square_gof, Binning, GofResult, StatsError,
};
use crate::taxonomy::{
    builtin_distribution, builtin_taxonomy, BugClass, BugCode, BugDistribution, Study,
    SubThresholdPolicy,
};
use crate::{derive_seed, DEFAULT_SEED};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("unknown backend `{backend}`; `mock` is built in, anything else must be constructed and passed to run_study_with")]
    UnknownBackend { backend: String },
    #[error("unit `{unit}` does not use the {study} language subset")]
    LanguageMismatch { unit: String, study: Study },
    #[error("writing run artifacts: {0}")]
    Io(#[from] std::io::Error),
    #[error("writing csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("serializing config: {0}")]
    Json(#[from] serde_json::Error),
}

/// How observed labels are binned for the goodness-of-fit comparison.
///
/// The published comparison works at the level of broad error classes, so
/// that is the study-1 default; the off-by-one study compares the four
/// codes directly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum ComparePolicy {
    /// Fold observed codes and the reference into broad classes (syntax /
    /// type / semantic mass) and test the class counts. Theme codes fold
    /// into their classes; mixed-class codes and refusals carry no class
    /// and are dropped.
    ByClass,
    /// Test per-code counts directly under a [`Binning`] policy. Pair
    /// labels fold into `X` first.
    PerCode(Binning),
}

impl fmt::Display for ComparePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComparePolicy::ByClass => f.write_str("by-class"),
            ComparePolicy::PerCode(binning) => write!(f, "per-code({binning})"),
        }
    }
}

impl FromStr for ComparePolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "by-class" => Ok(ComparePolicy::ByClass),
            "strict" => Ok(ComparePolicy::PerCode(Binning::Strict)),
            "drop-zero" => Ok(ComparePolicy::PerCode(Binning::DropZero)),
            "ood-bucket" => Ok(ComparePolicy::PerCode(Binning::OodBucket { floor: 0.05 })),
            other => {
                if let Some(rest) = other.strip_prefix("ood-bucket=") {
                    let floor: f64 = rest
                        .parse()
                        .map_err(|_| format!("bad ood-bucket floor `{rest}`"))?;
                    return Ok(ComparePolicy::PerCode(Binning::OodBucket { floor }));
                }
                Err(format!(
                    "unknown binning policy `{other}` (expected by-class, strict, drop-zero, or ood-bucket[=floor])"
                ))
            }
        }
    }
}

/// Everything an end-to-end run needs.
///
/// [`StudyConfig::defaults`] mirrors the replication shapes: study 1 is
/// 3 strategies × 5 trials × 5 units × 5 bugs (375 items, 125 per
/// strategy); study 2 swaps in the 4 C units (300 items, 100 per
/// strategy) and tightens alpha to 0.01.
#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub study: Study,
    pub strategies: Vec<PromptStrategy>,
    pub trials: usize,
    pub units: Vec<SourceUnit>,
    /// Independent requests per (strategy, trial, unit).
    pub bugs_per_example: usize,
    /// Backend id; [`run_study`] resolves `"mock"` itself.
    pub backend: String,
    pub master_seed: u64,
    pub binning: ComparePolicy,
    /// Significance level applied to Bonferroni-adjusted p-values.
    pub alpha: f64,
    /// The distribution tested against, also echoed in
    /// frequency-informed prompts.
    pub reference: BugDistribution,
}

impl StudyConfig {
    pub fn defaults(study: Study) -> StudyConfig {
        StudyConfig {
            study,
            strategies: PromptStrategy::ALL.to_vec(),
            trials: 5,
            units: builtin_units(study),
            bugs_per_example: 5,
            backend: "mock".to_string(),
            master_seed: DEFAULT_SEED,
            binning: match study {
                Study::Study1 => ComparePolicy::ByClass,
                Study::Study2 => ComparePolicy::PerCode(Binning::DropZero),
            },
            alpha: match study {
                Study::Study1 => 0.05,
                Study::Study2 => 0.01,
            },
            reference: builtin_distribution(study, SubThresholdPolicy::Half),
        }
    }

    /// Items the run will request: strategies × trials × units × bugs.
    pub fn planned_items(&self) -> usize {
        self.strategies.len() * self.trials * self.units.len() * self.bugs_per_example
    }

    fn validate(&self) -> Result<(), ExperimentError> {
        let expected = match self.study {
            Study::Study1 => Language::JavaSubset,
            Study::Study2 => Language::CSubset,
        };
        for unit in &self.units {
            if unit.language != expected {
                return Err(ExperimentError::LanguageMismatch {
                    unit: unit.id.clone(),
                    study: self.study,
                });
            }
        }
        Ok(())
    }
}

/// Per-strategy outcome of a distribution comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrategyStats {
    pub strategy: String,
    /// Items labeled under this strategy.
    pub n: u64,
    pub gof: Option<GofResult>,
    /// Why no goodness-of-fit result exists (e.g. nothing observed).
    pub gof_error: Option<String>,
    /// Bonferroni-adjusted p-value.
    pub adjusted_p: Option<f64>,
    /// `adjusted_p < alpha`.
    pub significant: Option<bool>,
    /// Percent of items the generator declined or returned unchanged.
    pub refusal_rate: f64,
    /// Percent of items whose primary label is out of distribution (`X`
    /// or a theme code); refusals are not counted.
    pub ood_rate: f64,
}

/// The comparison outcome across strategies.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StatsReport {
    pub study: Study,
    pub binning: ComparePolicy,
    pub alpha: f64,
    /// Size of the Bonferroni family: the tests that produced a p-value.
    pub bonferroni_m: usize,
    pub strategies: Vec<StrategyStats>,
    pub reference: BugDistribution,
}

/// One goodness-of-fit test per strategy against `reference`, Bonferroni
/// corrected across strategies, plus refusal and out-of-distribution
/// rates (both in percent of the strategy's items).
pub fn compare_distributions(
    table: &FrequencyTable,
    reference: &BugDistribution,
    binning: ComparePolicy,
    alpha: f64,
) -> StatsReport {
    let mut strategies = Vec::new();
    for strategy in table.strategies() {
        let total = table.total(strategy);
        let mut refusals = 0u64;
        let mut ood = 0u64;
        if let Some(rows) = table.counts.get(strategy) {
            for (label, &count) in rows {
                if matches!(label.primary, BugCode::Refusal | BugCode::None) {
                    refusals += count;
                } else if label.primary.is_out_of_distribution() {
                    ood += count;
                }
            }
        }
        let pct =
            |c: u64| if total == 0 { 0.0 } else { c as f64 / total as f64 * 100.0 };
        let (gof, gof_error) = match run_gof(table, strategy, reference, binning) {
            Ok(result) => (Some(result), None),
            Err(e) => (None, Some(e.to_string())),
        };
        strategies.push(StrategyStats {
            strategy: strategy.to_string(),
            n: total,
            gof,
            gof_error,
            adjusted_p: None,
            significant: None,
            refusal_rate: pct(refusals),
            ood_rate: pct(ood),
        });
    }
    let pvalues: Vec<f64> =
        strategies.iter().filter_map(|s| s.gof.as_ref().map(|g| g.p)).collect();
    let correction = bonferroni(&pvalues, alpha);
    let mut next = 0;
    for stats in &mut strategies {
        if stats.gof.is_some() {
            stats.adjusted_p = Some(correction.adjusted[next]);
            stats.significant = Some(correction.reject[next]);
            next += 1;
        }
    }
    StatsReport {
        study: table.study,
        binning,
        alpha,
        bonferroni_m: correction.tests,
        strategies,
        reference: reference.clone(),
    }
}

fn run_gof(
    table: &FrequencyTable,
    strategy: &str,
    reference: &BugDistribution,
    binning: ComparePolicy,
) -> Result<GofResult, StatsError> {
    match binning {
        ComparePolicy::PerCode(b) => chi_square_gof(&table.gof_counts(strategy), reference, b),
        ComparePolicy::ByClass => {
            let mut expected: BTreeMap<BugClass, f64> = BTreeMap::new();
            for (code, weight) in reference.entries() {
                if weight <= 0.0 {
                    continue;
                }
                if let Some(class) = code.class() {
                    if class != BugClass::Mixed {
                        *expected.entry(class).or_insert(0.0) += weight;
                    }
                }
            }
            let mut observed: BTreeMap<BugClass, u64> = BTreeMap::new();
            if let Some(rows) = table.counts.get(strategy) {
                for (label, &count) in rows {
                    // Pair labels take their primary's class.
                    if let Some(class) = label.primary.class() {
                        if class != BugClass::Mixed {
                            *observed.entry(class).or_insert(0) += count;
                        }
                    }
                }
            }
            let categories: Vec<(String, f64, u64)> = expected
                .iter()
                .map(|(class, mass)| {
                    (class.to_string(), *mass, observed.get(class).copied().unwrap_or(0))
                })
                .collect();
            chi_square_categories(categories)
        }
    }
}

/// Outcome of one end-to-end run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub corpus: Corpus,
    pub table: FrequencyTable,
    pub report: StatsReport,
    /// Item-level backend failures (`id: error`); the run completes
    /// without the failed items.
    pub failures: Vec<String>,
}

/// Runs a study end to end on the named backend (`"mock"` is built in).
pub fn run_study(config: &StudyConfig) -> Result<RunOutcome, ExperimentError> {
    if config.backend == "mock" {
        run_study_with(config, &MockBackend::default())
    } else {
        Err(ExperimentError::UnknownBackend { backend: config.backend.clone() })
    }
}

/// Runs a study end to end on an explicit backend.
///
/// Items are generated in parallel, each from a seed derived from
/// `(master_seed, item index)`, so results do not depend on scheduling.
/// Refusals become corpus rows with the decline text attached; backend
/// errors are quarantined into `failures` without aborting the run.
pub fn run_study_with(
    config: &StudyConfig,
    backend: &dyn Backend,
) -> Result<RunOutcome, ExperimentError> {
    config.validate()?;
    let taxonomy = builtin_taxonomy(config.study);
    // (strategy, trial, unit) in plan order; the global index seeds each
    // item and names it.
    let mut plan = Vec::new();
    for &strategy in &config.strategies {
        for trial in 0..config.trials {
            for unit in &config.units {
                for _ in 0..config.bugs_per_example {
                    plan.push((strategy, trial, unit));
                }
            }
        }
    }
    let results: Vec<Result<CorpusItem, String>> = plan
        .par_iter()
        .enumerate()
        .map(|(index, &(strategy, trial, unit))| {
            let id = format!("item-{index:05}");
            let seed = derive_seed(config.master_seed, index as u64);
            let distribution = (strategy == PromptStrategy::FrequencyInformed)
                .then(|| config.reference.clone());
            let request =
                GenerationRequest::new(strategy, unit.clone(), taxonomy.clone(), distribution)
                    .map_err(|e| format!("{id}: {e}"))?
                    .with_trial(trial)
                    .with_bugs_per_request(config.bugs_per_example);
            let response =
                backend.generate(&request, seed).map_err(|e| format!("{id}: {e}"))?;
            let mut item = if response.refusal {
                CorpusItem {
                    id,
                    unit_id: unit.id.clone(),
                    bug: BugCode::Refusal,
                    span: Span::new(0, 0),
                    before: String::new(),
                    after: String::new(),
                    original_code: unit.text.clone(),
                    mutated_code: unit.text.clone(),
                    seed,
                    strategy: None,
                    trial: None,
                    refusal: Some(response.raw.clone()),
                }
            } else {
                match response.extracted.first() {
                    Some(m) => CorpusItem::from_mutated(id, unit, m),
                    None => return Err(format!("{id}: backend returned no candidates")),
                }
            };
            item.strategy = Some(strategy.to_string());
            item.trial = Some(trial);
            Ok(item)
        })
        .collect();
    let mut corpus = Corpus::default();
    let mut failures = Vec::new();
    for result in results {
        match result {
            Ok(item) => corpus.items.push(item),
            Err(failure) => failures.push(failure),
        }
    }
    let mut table = label_corpus(&corpus, config.study);
    // Surface configured strategies even when nothing was generated, so a
    // zero-trial run still reports one (empty) outcome per strategy.
    for &strategy in &config.strategies {
        let key = strategy.to_string();
        table.counts.entry(key.clone()).or_default();
        table.totals.entry(key).or_insert(0);
    }
    let report =
        compare_distributions(&table, &config.reference, config.binning, config.alpha);
    Ok(RunOutcome { corpus, table, report, failures })
}

/// Snapshot of the effective configuration, written as `config.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigSnapshot {
    pub study: Study,
    pub backend: String,
    pub strategies: Vec<PromptStrategy>,
    pub trials: usize,
    pub bugs_per_example: usize,
    pub unit_ids: Vec<String>,
    pub master_seed: u64,
    pub binning: ComparePolicy,
    pub alpha: f64,
    pub planned_items: usize,
    /// Reference distribution as raw percentages.
    pub reference: BTreeMap<String, f64>,
}

impl ConfigSnapshot {
    pub fn of(config: &StudyConfig) -> ConfigSnapshot {
        ConfigSnapshot {
            study: config.study,
            backend: config.backend.clone(),
            strategies: config.strategies.clone(),
            trials: config.trials,
            bugs_per_example: config.bugs_per_example,
            unit_ids: config.units.iter().map(|u| u.id.clone()).collect(),
            master_seed: config.master_seed,
            binning: config.binning,
            alpha: config.alpha,
            planned_items: config.planned_items(),
            reference: config
                .reference
                .entries()
                .map(|(code, _)| (code.to_string(), config.reference.raw_percent(code)))
                .collect(),
        }
    }
}

/// Writes the full run directory: `corpus.jsonl`, `frequencies.csv`,
/// `report.md`, `config.json`, and `failures.txt` when a backend
/// misbehaved.
pub fn write_run(
    dir: &Path,
    config: &StudyConfig,
    outcome: &RunOutcome,
) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("corpus.jsonl"), outcome.corpus.to_jsonl())?;
    write_report(&outcome.table, &outcome.report, dir)?;
    let snapshot = ConfigSnapshot::of(config);
    let mut json = serde_json::to_string_pretty(&snapshot)?;
    json.push('\n');
    fs::write(dir.join("config.json"), json)?;
    if !outcome.failures.is_empty() {
        fs::write(dir.join("failures.txt"), outcome.failures.join("\n") + "\n")?;
    }
    Ok(())
}

/// Writes `frequencies.csv` (machine) and `report.md` (human) into `dir`,
/// creating it if needed.
///
/// Rows are ordered by reference frequency descending (ties keep catalog
/// order), then pair labels, then a trailing out-of-distribution section:
/// the `-` refusal row, `X`, and any observed theme codes.
pub fn write_report(
    table: &FrequencyTable,
    report: &StatsReport,
    dir: &Path,
) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("frequencies.csv"), frequencies_csv(table, report)?)?;
    fs::write(dir.join("report.md"), report_markdown(table, report))?;
    Ok(())
}

/// One printed row of the frequency table.
struct FrequencyRow {
    display: String,
    reference_percent: Option<f64>,
    /// Count per strategy, in the table's strategy order.
    counts: Vec<u64>,
}

fn frequency_rows(table: &FrequencyTable, reference: &BugDistribution) -> Vec<FrequencyRow> {
    let strategies = table.strategies();
    // In-distribution codes, heaviest first; `support` starts in catalog
    // order and the sort is stable, so ties keep it.
    let mut base = reference.support();
    base.sort_by(|a, b| {
        reference
            .raw_percent(*b)
            .partial_cmp(&reference.raw_percent(*a))
            .expect("reference percents are finite")
    });
    let mut extras: BTreeSet<BugCode> = BTreeSet::new();
    let mut pairs: BTreeSet<Label> = BTreeSet::new();
    let mut themes: BTreeSet<BugCode> = BTreeSet::new();
    for rows in table.counts.values() {
        for label in rows.keys() {
            if label.is_pair() {
                pairs.insert(*label);
            } else if BugCode::THEMES.contains(&label.primary) {
                themes.insert(label.primary);
            } else if matches!(
                label.primary,
                BugCode::X | BugCode::Refusal | BugCode::None
            ) {
                // Covered by the fixed out-of-distribution section.
            } else if !base.contains(&label.primary) {
                extras.insert(label.primary);
            }
        }
    }
    let counts_of = |label: Label| -> Vec<u64> {
        strategies.iter().map(|s| table.count(s, label)).collect()
    };
    let mut out = Vec::new();
    for &code in &base {
        out.push(FrequencyRow {
            display: Label::single(code).to_string(),
            reference_percent: Some(reference.raw_percent(code)),
            counts: counts_of(Label::single(code)),
        });
    }
    for code in extras {
        out.push(FrequencyRow {
            display: Label::single(code).to_string(),
            reference_percent: None,
            counts: counts_of(Label::single(code)),
        });
    }
    for pair in pairs {
        out.push(FrequencyRow {
            display: pair.to_string(),
            reference_percent: None,
            counts: counts_of(pair),
        });
    }
    let refusal_counts: Vec<u64> = strategies
        .iter()
        .map(|s| {
            table.count(s, Label::single(BugCode::Refusal))
                + table.count(s, Label::single(BugCode::None))
        })
        .collect();
    out.push(FrequencyRow {
        display: "-".to_string(),
        reference_percent: None,
        counts: refusal_counts,
    });
    out.push(FrequencyRow {
        display: "X".to_string(),
        reference_percent: None,
        counts: counts_of(Label::single(BugCode::X)),
    });
    for code in BugCode::THEMES {
        if themes.contains(&code) {
            out.push(FrequencyRow {
                display: Label::single(code).to_string(),
                reference_percent: None,
                counts: counts_of(Label::single(code)),
            });
        }
    }
    out
}

fn frequencies_csv(
    table: &FrequencyTable,
    report: &StatsReport,
) -> Result<String, ExperimentError> {
    let strategies = table.strategies();
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["label".to_string(), "reference_percent".to_string()];
    for strategy in &strategies {
        header.push(format!("{strategy}_count"));
        header.push(format!("{strategy}_percent"));
    }
    writer.write_record(&header)?;
    if !strategies.is_empty() {
        let totals: Vec<u64> = strategies.iter().map(|s| table.total(s)).collect();
        for row in frequency_rows(table, &report.reference) {
            let mut record = vec![
                row.display,
                row.reference_percent.map(|p| p.to_string()).unwrap_or_default(),
            ];
            for (i, &count) in row.counts.iter().enumerate() {
                record.push(count.to_string());
                let percent =
                    if totals[i] == 0 { 0.0 } else { count as f64 / totals[i] as f64 * 100.0 };
                record.push(percent.to_string());
            }
            writer.write_record(&record)?;
        }
    }
    let bytes = writer.into_inner().expect("flushing csv to memory cannot fail");
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn format_p(p: f64) -> String {
    if p < 1e-3 {
        format!("{p:.2e}")
    } else {
        format!("{p:.3}")
    }
}

fn report_markdown(table: &FrequencyTable, report: &StatsReport) -> String {
    let strategies = table.strategies();
    let mut md = String::new();
    md.push_str(&format!("# {} run report\n\n", report.study));
    md.push_str(&format!(
        "Binning policy: {} — alpha {} — Bonferroni m = {}\n\n",
        report.binning, report.alpha, report.bonferroni_m
    ));

    md.push_str("## Label frequencies (% of items per strategy)\n\n");
    md.push_str(&format!("| Bug | Reference |{}\n", {
        let mut cols = String::new();
        for strategy in &strategies {
            cols.push_str(&format!(" {strategy} |"));
        }
        cols
    }));
    md.push_str(&format!("|---|---|{}\n", "---|".repeat(strategies.len())));
    if !strategies.is_empty() {
        let totals: Vec<u64> = strategies.iter().map(|s| table.total(s)).collect();
        for row in frequency_rows(table, &report.reference) {
            let reference = row
                .reference_percent
                .map(|p| format!("{p:.1}"))
                .unwrap_or_default();
            md.push_str(&format!("| {} | {} |", row.display, reference));
            for (i, &count) in row.counts.iter().enumerate() {
                let percent =
                    if totals[i] == 0 { 0.0 } else { count as f64 / totals[i] as f64 * 100.0 };
                md.push_str(&format!(" {percent:.1} |"));
            }
            md.push('\n');
        }
    }

    md.push_str("\n## Goodness of fit\n\n");
    md.push_str("| Strategy | n | chi2 | df | p | p (adjusted) | significant |\n");
    md.push_str("|---|---|---|---|---|---|---|\n");
    for stats in &report.strategies {
        match (&stats.gof, &stats.gof_error) {
            (Some(gof), _) => {
                md.push_str(&format!(
                    "| {} | {} | {:.2} | {} | {} | {} | {} |\n",
                    stats.strategy,
                    stats.n,
                    gof.chi2,
                    gof.df,
                    format_p(gof.p),
                    stats.adjusted_p.map(format_p).unwrap_or_default(),
                    match stats.significant {
                        Some(true) => "yes",
                        Some(false) => "no",
                        None => "-",
                    },
                ));
            }
            (None, Some(error)) => {
                md.push_str(&format!(
                    "| {} | {} | - | - | - | - | {error} |\n",
                    stats.strategy, stats.n
                ));
            }
            (None, None) => {}
        }
    }

    md.push_str("\n## Refusal and out-of-distribution rates (%)\n\n");
    md.push_str("| Strategy | Refusals | Out of distribution |\n");
    md.push_str("|---|---|---|\n");
    for stats in &report.strategies {
        md.push_str(&format!(
            "| {} | {:.1} | {:.1} |\n",
            stats.strategy, stats.refusal_rate, stats.ood_rate
        ));
    }
    md
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::make_distribution;

    fn record_n(table: &mut FrequencyTable, strategy: &str, label: Label, n: u64) {
        for _ in 0..n {
            table.record(strategy, label);
        }
    }

    /// The published study-1 frequency columns as counts out of 125
    /// (percent × 1.25): (code, frequency-informed, taxonomy-informed,
    /// baseline).
    fn study1_table() -> FrequencyTable {
        use BugCode::*;
        let singles: &[(BugCode, u64, u64, u64)] = &[
            (C, 22, 17, 6),
            (I, 24, 12, 0),
            (O, 22, 16, 6),
            (A, 17, 17, 11),
            (N, 7, 3, 1),
            (B, 1, 5, 1),
            (M, 5, 3, 2),
            (R, 0, 3, 0),
            (P, 0, 5, 0),
            (E, 10, 14, 1),
            (K, 1, 4, 1),
            (D, 2, 9, 0),
            (Q, 0, 0, 2),
            (L, 0, 1, 4),
            (F, 0, 1, 0),
            (X, 5, 1, 16),
            (T, 3, 0, 7),
            (S, 1, 0, 23),
            (U, 3, 6, 7),
            (Y, 0, 1, 24),
            (W, 0, 0, 9),
            (Refusal, 2, 7, 4),
        ];
        let mut table = FrequencyTable::new(Study::Study1);
        for &(code, frequency, taxonomy, baseline) in singles {
            record_n(&mut table, "frequency-informed", Label::single(code), frequency);
            record_n(&mut table, "taxonomy-informed", Label::single(code), taxonomy);
            record_n(&mut table, "baseline", Label::single(code), baseline);
        }
        for strategy in ["frequency-informed", "taxonomy-informed", "baseline"] {
            assert_eq!(table.total(strategy), 125, "{strategy} column sums to 125");
        }
        table
    }

    /// The published study-2 columns as counts out of 100: (label,
    /// frequency-informed, taxonomy-informed, baseline).
    fn study2_table() -> FrequencyTable {
        use BugCode::*;
        let rows: &[(Label, u64, u64, u64)] = &[
            (Label::single(HighBounds), 30, 21, 20),
            (Label::single(LowMiss), 21, 21, 13),
            (Label::single(HighMiss), 19, 21, 0),
            (Label::single(LowBounds), 21, 20, 19),
            (Label::pair(LowMiss, HighBounds), 2, 2, 1),
            (Label::pair(LowMiss, HighMiss), 0, 2, 0),
            (Label::single(X), 6, 8, 44),
            (Label::single(Refusal), 1, 5, 3),
        ];
        let mut table = FrequencyTable::new(Study::Study2);
        for &(label, frequency, taxonomy, baseline) in rows {
            record_n(&mut table, "frequency-informed", label, frequency);
            record_n(&mut table, "taxonomy-informed", label, taxonomy);
            record_n(&mut table, "baseline", label, baseline);
        }
        for strategy in ["frequency-informed", "taxonomy-informed", "baseline"] {
            assert_eq!(table.total(strategy), 100, "{strategy} column sums to 100");
        }
        table
    }

    fn stats_for<'r>(report: &'r StatsReport, strategy: &str) -> &'r StrategyStats {
        report
            .strategies
            .iter()
            .find(|s| s.strategy == strategy)
            .unwrap_or_else(|| panic!("strategy {strategy} missing from report"))
    }

    #[test]
    fn study1_defaults_run_375_accounted_items() {
        let config = StudyConfig::defaults(Study::Study1);
        assert_eq!(config.planned_items(), 375);
        let outcome = run_study(&config).unwrap();
        assert_eq!(outcome.corpus.len(), 375);
        assert!(outcome.failures.is_empty());
        for strategy in ["baseline", "frequency-informed", "taxonomy-informed"] {
            assert_eq!(outcome.table.total(strategy), 125);
            // Every item lands in some category: letters + X + themes +
            // refusals account for the whole column.
            let accounted: u64 = outcome.table.gof_counts(strategy).values().sum();
            assert_eq!(accounted, 125, "{strategy}");
        }
        assert_eq!(outcome.report.bonferroni_m, 3);
        assert_eq!(outcome.report.strategies.len(), 3);
        for item in &outcome.corpus.items {
            assert!(item.strategy.is_some());
            assert!(item.trial.is_some());
        }
    }

    #[test]
    fn study2_defaults_run_100_items_per_strategy() {
        let config = StudyConfig::defaults(Study::Study2);
        assert_eq!(config.binning, ComparePolicy::PerCode(Binning::DropZero));
        assert_eq!(config.alpha, 0.01);
        let outcome = run_study(&config).unwrap();
        assert_eq!(outcome.corpus.len(), 300);
        for strategy in ["baseline", "frequency-informed", "taxonomy-informed"] {
            assert_eq!(outcome.table.total(strategy), 100);
        }
    }

    #[test]
    fn zero_trials_surface_empty_observations_per_strategy() {
        let mut config = StudyConfig::defaults(Study::Study1);
        config.trials = 0;
        let outcome = run_study(&config).unwrap();
        assert!(outcome.corpus.is_empty());
        assert_eq!(outcome.report.strategies.len(), 3);
        assert_eq!(outcome.report.bonferroni_m, 0);
        for stats in &outcome.report.strategies {
            assert_eq!(stats.n, 0);
            assert!(stats.gof.is_none());
            assert!(stats.gof_error.as_deref().unwrap().contains("no observations"));
            assert_eq!(stats.refusal_rate, 0.0);
            assert_eq!(stats.ood_rate, 0.0);
        }
    }

    #[test]
    fn identical_configs_reproduce_the_run_byte_for_byte() {
        let mut config = StudyConfig::defaults(Study::Study1);
        config.trials = 2;
        let first = run_study(&config).unwrap();
        let second = run_study(&config).unwrap();
        assert_eq!(first.corpus.to_jsonl(), second.corpus.to_jsonl());
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        write_run(dir_a.path(), &config, &first).unwrap();
        write_run(dir_b.path(), &config, &second).unwrap();
        for file in ["corpus.jsonl", "frequencies.csv", "report.md", "config.json"] {
            let a = fs::read(dir_a.path().join(file)).unwrap();
            let b = fs::read(dir_b.path().join(file)).unwrap();
            assert_eq!(a, b, "{file} differs between identical runs");
        }
    }

    #[test]
    fn frequency_informed_mock_arm_fits_the_reference() {
        let config = StudyConfig::defaults(Study::Study1);
        let outcome = run_study(&config).unwrap();
        let freq = stats_for(&outcome.report, "frequency-informed");
        assert_eq!(
            freq.significant,
            Some(false),
            "adjusted p {:?} at seed {}",
            freq.adjusted_p,
            config.master_seed
        );
    }

    #[test]
    fn study1_columns_reproduce_the_published_verdicts() {
        let table = study1_table();
        let reference = builtin_distribution(Study::Study1, SubThresholdPolicy::Half);
        let report =
            compare_distributions(&table, &reference, ComparePolicy::ByClass, 0.05);
        assert_eq!(report.bonferroni_m, 3);
        let freq = stats_for(&report, "frequency-informed");
        let tax = stats_for(&report, "taxonomy-informed");
        let base = stats_for(&report, "baseline");
        // Only the frequency-informed arm stays consistent with the
        // reference; the other two diverge.
        assert_eq!(freq.significant, Some(false));
        assert_eq!(tax.significant, Some(true));
        assert_eq!(base.significant, Some(true));
        // Classes compared: syntax/type/semantic, df = 2.
        let gof = tax.gof.as_ref().unwrap();
        assert_eq!(gof.df, 2);
        assert_eq!(gof.included, vec!["Syntax", "Type", "Semantic"]);
        // The published chi-square for the taxonomy arm at this binning.
        assert!((gof.chi2 - 8.7).abs() < 0.2, "chi2 {}", gof.chi2);
        // Out-of-distribution shares net of refusals, and refusal rates.
        assert!((freq.ood_rate - 9.6).abs() < 1e-9);
        assert!((tax.ood_rate - 6.4).abs() < 1e-9);
        assert!((base.ood_rate - 68.8).abs() < 1e-9);
        assert!((freq.refusal_rate - 1.6).abs() < 1e-9);
        assert!((tax.refusal_rate - 5.6).abs() < 1e-9);
        assert!((base.refusal_rate - 3.2).abs() < 1e-9);
    }

    #[test]
    fn study2_columns_are_all_significant_under_drop_zero() {
        let table = study2_table();
        let reference = builtin_distribution(Study::Study2, SubThresholdPolicy::Half);
        let report = compare_distributions(
            &table,
            &reference,
            ComparePolicy::PerCode(Binning::DropZero),
            0.01,
        );
        assert_eq!(report.bonferroni_m, 3);
        for strategy in ["frequency-informed", "taxonomy-informed", "baseline"] {
            let stats = stats_for(&report, strategy);
            assert_eq!(stats.significant, Some(true), "{strategy}");
            let gof = stats.gof.as_ref().unwrap();
            assert_eq!(gof.df, 3, "{strategy}");
            assert_eq!(
                gof.included,
                vec!["HighBounds", "LowBounds", "LowMiss", "HighMiss"],
                "{strategy}"
            );
        }
        // Pair labels are combinations of in-distribution codes, not
        // out-of-distribution: the baseline X share stays at 44.
        let base = stats_for(&report, "baseline");
        assert!((base.ood_rate - 44.0).abs() < 1e-9);
        assert!((base.refusal_rate - 3.0).abs() < 1e-9);
        assert!((stats_for(&report, "frequency-informed").refusal_rate - 1.0).abs() < 1e-9);
        assert!((stats_for(&report, "taxonomy-informed").refusal_rate - 5.0).abs() < 1e-9);
    }

    #[test]
    fn observed_equal_to_expected_is_a_perfect_fit() {
        use BugCode::*;
        let reference =
            make_distribution(&[(A, 25.0), (C, 25.0), (I, 25.0), (O, 25.0)]).unwrap();
        let mut table = FrequencyTable::new(Study::Study1);
        for code in [A, C, I, O] {
            record_n(&mut table, "baseline", Label::single(code), 10);
        }
        let report = compare_distributions(
            &table,
            &reference,
            ComparePolicy::PerCode(Binning::Strict),
            0.05,
        );
        let gof = report.strategies[0].gof.as_ref().unwrap();
        assert_eq!(gof.chi2, 0.0);
        assert!((gof.p - 1.0).abs() < 1e-12);
        assert_eq!(report.strategies[0].significant, Some(false));
    }

    #[test]
    fn report_rows_follow_the_published_layout() {
        let table = study2_table();
        let reference = builtin_distribution(Study::Study2, SubThresholdPolicy::Half);
        let report = compare_distributions(
            &table,
            &reference,
            ComparePolicy::PerCode(Binning::DropZero),
            0.01,
        );
        let dir = tempfile::tempdir().unwrap();
        write_report(&table, &report, dir.path()).unwrap();
        let csv = fs::read_to_string(dir.path().join("frequencies.csv")).unwrap();
        let labels: Vec<&str> =
            csv.lines().skip(1).map(|line| line.split(',').next().unwrap()).collect();
        // Base codes heaviest-first, pairs, then the trailing
        // out-of-distribution section.
        assert_eq!(
            labels,
            vec!["HB", "LM", "HM", "LB", "LM and HB", "LM and HM", "-", "X"]
        );
        // Markdown percentages add up per strategy column.
        let md = fs::read_to_string(dir.path().join("report.md")).unwrap();
        let data_rows: Vec<&str> = md
            .lines()
            .skip_while(|l| !l.starts_with("| Bug |"))
            .skip(2)
            .take_while(|l| l.starts_with('|'))
            .collect();
        assert_eq!(data_rows.len(), 8);
        for column in 0..3 {
            let sum: f64 = data_rows
                .iter()
                .map(|row| {
                    let cells: Vec<&str> = row.split('|').collect();
                    cells[3 + column].trim().parse::<f64>().unwrap()
                })
                .sum();
            assert!((sum - 100.0).abs() < 0.5, "column {column} sums to {sum}");
        }
    }

    #[test]
    fn study1_markdown_columns_sum_to_100() {
        let mut config = StudyConfig::defaults(Study::Study1);
        config.trials = 1;
        let outcome = run_study(&config).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_run(dir.path(), &config, &outcome).unwrap();
        let md = fs::read_to_string(dir.path().join("report.md")).unwrap();
        let data_rows: Vec<&str> = md
            .lines()
            .skip_while(|l| !l.starts_with("| Bug |"))
            .skip(2)
            .take_while(|l| l.starts_with('|'))
            .collect();
        assert!(!data_rows.is_empty());
        for column in 0..3 {
            let sum: f64 = data_rows
                .iter()
                .map(|row| {
                    let cells: Vec<&str> = row.split('|').collect();
                    cells[3 + column].trim().parse::<f64>().unwrap()
                })
                .sum();
            assert!((sum - 100.0).abs() < 1.5, "column {column} sums to {sum}");
        }
    }

    #[test]
    fn empty_table_writes_header_only_files() {
        let table = FrequencyTable::new(Study::Study1);
        let reference = builtin_distribution(Study::Study1, SubThresholdPolicy::Half);
        let report =
            compare_distributions(&table, &reference, ComparePolicy::ByClass, 0.05);
        let dir = tempfile::tempdir().unwrap();
        write_report(&table, &report, dir.path()).unwrap();
        let csv = fs::read_to_string(dir.path().join("frequencies.csv")).unwrap();
        assert_eq!(csv.trim_end(), "label,reference_percent");
        let md = fs::read_to_string(dir.path().join("report.md")).unwrap();
        assert!(md.contains("## Label frequencies"));
        assert!(!md.contains("| C |"));
    }

    #[test]
    fn unit_language_must_match_the_study() {
        let mut config = StudyConfig::defaults(Study::Study1);
        config.units = builtin_units(Study::Study2);
        assert!(matches!(
            run_study(&config).unwrap_err(),
            ExperimentError::LanguageMismatch { .. }
        ));
    }

    #[test]
    fn only_the_mock_backend_is_built_in() {
        let mut config = StudyConfig::defaults(Study::Study1);
        config.backend = "gpt-4".to_string();
        assert!(matches!(
            run_study(&config).unwrap_err(),
            ExperimentError::UnknownBackend { .. }
        ));
    }

    #[test]
    fn binning_policies_parse_and_print() {
        assert_eq!("by-class".parse::<ComparePolicy>().unwrap(), ComparePolicy::ByClass);
        assert_eq!(
            "drop-zero".parse::<ComparePolicy>().unwrap(),
            ComparePolicy::PerCode(Binning::DropZero)
        );
        assert_eq!(
            "strict".parse::<ComparePolicy>().unwrap(),
            ComparePolicy::PerCode(Binning::Strict)
        );
        assert_eq!(
            "ood-bucket=0.1".parse::<ComparePolicy>().unwrap(),
            ComparePolicy::PerCode(Binning::OodBucket { floor: 0.1 })
        );
        assert!("nonsense".parse::<ComparePolicy>().is_err());
        assert_eq!(ComparePolicy::ByClass.to_string(), "by-class");
        assert_eq!(
            ComparePolicy::PerCode(Binning::DropZero).to_string(),
            "per-code(drop-zero)"
        );
        let json = serde_json::to_string(&ComparePolicy::PerCode(Binning::DropZero)).unwrap();
        let back: ComparePolicy = serde_json::from_str(&json).unwrap();
        assert_eq!(back, ComparePolicy::PerCode(Binning::DropZero));
    }

    #[test]
    fn run_directory_holds_all_artifacts() {
        let mut config = StudyConfig::defaults(Study::Study1);
        config.strategies = vec![PromptStrategy::Baseline];
        config.trials = 1;
        config.units.truncate(1);
        config.bugs_per_example = 2;
        let outcome = run_study(&config).unwrap();
        assert_eq!(outcome.corpus.len(), 2);
        let dir = tempfile::tempdir().unwrap();
        write_run(dir.path(), &config, &outcome).unwrap();
        for file in ["corpus.jsonl", "frequencies.csv", "report.md", "config.json"] {
            assert!(dir.path().join(file).exists(), "{file} missing");
        }
        assert!(!dir.path().join("failures.txt").exists());
        let json = fs::read_to_string(dir.path().join("config.json")).unwrap();
        let snapshot: ConfigSnapshot = serde_json::from_str(&json).unwrap();
        assert_eq!(snapshot.planned_items, 2);
        assert_eq!(snapshot.master_seed, config.master_seed);
        let jsonl = fs::read_to_string(dir.path().join("corpus.jsonl")).unwrap();
        let reread = Corpus::from_jsonl(&jsonl).unwrap();
        assert_eq!(reread.len(), 2);
        assert_eq!(outcome.report.bonferroni_m, 1);
    }
}

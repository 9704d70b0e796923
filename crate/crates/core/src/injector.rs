//! Rule-based bug injection and bulk corpus generation.
//!
//! `inject` realizes exactly one bug in one unit, deterministically for a
//! given seed; `generate_corpus` scales that to n items drawn from a
//! target distribution, with bounded retries when a sampled (unit, bug)
//! pair has no applicable site.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::code_model::{find_sites, CodeModelError, InjectionSite, SourceUnit, Span};
use crate::derive_seed;
use crate::taxonomy::{BugCode, BugDistribution};

#[derive(Debug, Error)]
pub enum InjectError {
    #[error("bug `{bug}` has no injection rule")]
    NotInjectable { bug: BugCode },
    #[error("bug `{bug}` is not applicable to unit `{unit}`")]
    NotApplicable { bug: BugCode, unit: String },
    #[error("no applicable (unit, bug) pair for `{bug}` after {unit_redraws} unit and {bug_redraws} bug redraws")]
    ExhaustedRetries { bug: BugCode, unit_redraws: usize, bug_redraws: usize },
    #[error("corpus line {line} is not valid JSON: {source}")]
    MalformedCorpus { line: usize, source: serde_json::Error },
    #[error(transparent)]
    CodeModel(#[from] CodeModelError),
}

/// Provenance of one injected bug.
///
/// `before`/`after` are the minimal changed slices: splicing `after` over
/// `span` in the original text reproduces the mutated text exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InjectionRecord {
    pub bug: BugCode,
    pub unit_id: String,
    /// Minimal changed region of the original text.
    pub span: Span,
    pub before: String,
    pub after: String,
    /// The rule-level edit spans (several for multi-edit rules like H).
    /// Not persisted; the canonical `span` is the durable provenance.
    #[serde(skip)]
    pub touched: Vec<Span>,
    pub seed: u64,
}

/// A mutated unit plus the record of how it was produced.
#[derive(Debug, Clone)]
pub struct MutatedUnit {
    /// The mutated source (tokenized leniently: some bugs unbalance
    /// brackets on purpose).
    pub unit: SourceUnit,
    pub record: InjectionRecord,
}

/// Applies a site's edits to `unit` and builds the provenance record.
///
/// The recorded span is canonical: the smallest byte region (extended to
/// character boundaries) outside of which original and mutated text agree.
pub fn realize_site(unit: &SourceUnit, site: &InjectionSite, seed: u64) -> MutatedUnit {
    let mut text = unit.text.clone();
    for edit in site.edits.iter().rev() {
        text.replace_range(edit.span.start..edit.span.end, &edit.replacement);
    }
    let (before_span, after_span) = changed_region(&unit.text, &text);
    let record = InjectionRecord {
        bug: site.bug,
        unit_id: unit.id.clone(),
        span: before_span,
        before: unit.text[before_span.start..before_span.end].to_string(),
        after: text[after_span.start..after_span.end].to_string(),
        touched: site.edits.iter().map(|e| e.span).collect(),
        seed,
    };
    let mutated = SourceUnit::parse_lenient(&unit.id, unit.language, &text);
    MutatedUnit { unit: mutated, record }
}

/// Minimal differing regions of two texts (common prefix/suffix trimmed,
/// aligned to char boundaries).
pub(crate) fn changed_region(original: &str, mutated: &str) -> (Span, Span) {
    let a = original.as_bytes();
    let b = mutated.as_bytes();
    let mut prefix = a.iter().zip(b).take_while(|(x, y)| x == y).count();
    while !(original.is_char_boundary(prefix) && mutated.is_char_boundary(prefix)) {
        prefix -= 1;
    }
    let limit = a.len().min(b.len()) - prefix;
    let mut suffix = a
        .iter()
        .rev()
        .zip(b.iter().rev())
        .take_while(|(x, y)| x == y)
        .count()
        .min(limit);
    while !(original.is_char_boundary(a.len() - suffix)
        && mutated.is_char_boundary(b.len() - suffix))
    {
        suffix -= 1;
    }
    (
        Span::new(prefix, a.len() - suffix),
        Span::new(prefix, b.len() - suffix),
    )
}

/// Injects `bug` into `unit`, choosing uniformly among the rule's sites.
///
/// Only the 18 lettered codes and the 4 off-by-one base codes are
/// injectable here; themes are generated by the mock backend through
/// [`realize_site`] directly.
pub fn inject(unit: &SourceUnit, bug: BugCode, seed: u64) -> Result<MutatedUnit, InjectError> {
    if !bug.is_injectable() {
        return Err(InjectError::NotInjectable { bug });
    }
    let sites = find_sites(unit, bug)?;
    if sites.is_empty() {
        return Err(InjectError::NotApplicable { bug, unit: unit.id.clone() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let site = &sites[rng.random_range(0..sites.len())];
    Ok(realize_site(unit, site, seed))
}

/// One persisted corpus row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusItem {
    pub id: String,
    pub unit_id: String,
    pub bug: BugCode,
    pub span: Span,
    pub before: String,
    pub after: String,
    pub original_code: String,
    pub mutated_code: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub strategy: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trial: Option<usize>,
    /// Verbatim decline text when the backend refused to inject.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub refusal: Option<String>,
}

impl CorpusItem {
    /// Builds a row from an injection outcome.
    pub fn from_mutated(id: impl Into<String>, original: &SourceUnit, m: &MutatedUnit) -> Self {
        CorpusItem {
            id: id.into(),
            unit_id: m.record.unit_id.clone(),
            bug: m.record.bug,
            span: m.record.span,
            before: m.record.before.clone(),
            after: m.record.after.clone(),
            original_code: original.text.clone(),
            mutated_code: m.unit.text.clone(),
            seed: m.record.seed,
            strategy: None,
            trial: None,
            refusal: None,
        }
    }
}

/// A set of (original, mutated) rows, persisted as JSONL.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Corpus {
    pub items: Vec<CorpusItem>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// One JSON object per line, trailing newline included.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for item in &self.items {
            out.push_str(&serde_json::to_string(item).expect("corpus items serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Corpus, InjectError> {
        let mut items = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let item = serde_json::from_str(line)
                .map_err(|source| InjectError::MalformedCorpus { line: i + 1, source })?;
            items.push(item);
        }
        Ok(Corpus { items })
    }
}

const UNIT_REDRAWS: usize = 32;
const BUG_REDRAWS: usize = 8;

/// Generates exactly `n` mutated items with bug codes drawn from `dist`
/// and units drawn uniformly.
///
/// When a sampled (unit, bug) pair is inapplicable, a new unit is drawn
/// (bug kept) up to 32 times, then the bug is redrawn, up to 8 times.
/// Items are independent: each uses a seed derived from (seed, index), so
/// generation parallelizes and any single item can be reproduced.
pub fn generate_corpus(
    units: &[SourceUnit],
    dist: &BugDistribution,
    n: usize,
    seed: u64,
) -> Result<Corpus, InjectError> {
    let items = (0..n)
        .into_par_iter()
        .map(|index| {
            let item_seed = derive_seed(seed, index as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(item_seed);
            let mut bug = dist.draw(&mut rng);
            let mut bug_redraws = 0;
            loop {
                let mut unit_redraws = 0;
                loop {
                    let unit = &units[rng.random_range(0..units.len())];
                    match inject(unit, bug, rng.random::<u64>()) {
                        Ok(mutated) => {
                            let mut item = CorpusItem::from_mutated(
                                format!("item-{index:05}"),
                                unit,
                                &mutated,
                            );
                            // The reproducible handle for the whole item is
                            // its derived seed, not the site draw.
                            item.seed = item_seed;
                            return Ok(item);
                        }
                        Err(InjectError::NotApplicable { .. }) => {
                            unit_redraws += 1;
                            if unit_redraws >= UNIT_REDRAWS {
                                break;
                            }
                        }
                        Err(other) => return Err(other),
                    }
                }
                bug_redraws += 1;
                if bug_redraws >= BUG_REDRAWS {
                    return Err(InjectError::ExhaustedRetries {
                        bug,
                        unit_redraws: UNIT_REDRAWS,
                        bug_redraws: BUG_REDRAWS,
                    });
                }
                bug = dist.draw(&mut rng);
            }
        })
        .collect::<Result<Vec<CorpusItem>, InjectError>>()?;
    Ok(Corpus { items })
}

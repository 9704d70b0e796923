//! Deductive classification of (original, mutated) pairs.
//!
//! `classify_pair` computes the code-token window diff between the two
//! units and runs a fixed sequence of detectors over it, ordered from the
//! most structurally specific shape to the most generic, ending with the
//! theme detectors and finally the out-of-distribution fallback `X`. The
//! order is part of the contract: a window satisfying two predicates is
//! always labeled by the earlier detector.

mod diff;
mod off_by_one;
mod standalone;

pub use diff::{same_token, token_window_diff, TokenDiff};
pub use off_by_one::off_by_one_category;
pub use standalone::{detect_standalone, Detection};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::code_model::{
    is_type_keyword, rhs_is_bare_call, Language, SourceUnit, Span, Token, TokenKind,
};
use crate::injector::{Corpus, CorpusItem};
use crate::taxonomy::{BugCode, Study, TaxonomyError};

/// Errors from the evaluating and file-handling corners of the module
/// (`classify_pair` itself is total).
#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("loop is not canonical enough to evaluate: `{detail}`")]
    NonCanonicalLoop { detail: String },
    #[error("label file: {0}")]
    LabelFile(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A finished per-item label: the primary code plus, for off-by-one
/// loops showing two categories at once, the second one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label {
    pub primary: BugCode,
    pub combination: Option<BugCode>,
}

impl Label {
    pub fn single(primary: BugCode) -> Self {
        Label { primary, combination: None }
    }

    /// Builds a pair label in display order (`LM and HB`, never the
    /// reverse).
    pub fn pair(a: BugCode, b: BugCode) -> Self {
        let (first, second) =
            if display_rank(a) <= display_rank(b) { (a, b) } else { (b, a) };
        Label { primary: first, combination: Some(second) }
    }

    pub fn is_pair(&self) -> bool {
        self.combination.is_some()
    }
}

/// Fixed row order for off-by-one categories in printed tables.
fn display_rank(code: BugCode) -> usize {
    match code {
        BugCode::LowMiss => 0,
        BugCode::HighMiss => 1,
        BugCode::LowBounds => 2,
        BugCode::HighBounds => 3,
        _ => 4,
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.combination {
            Some(second) => {
                write!(f, "{} and {}", self.primary.abbreviation(), second.abbreviation())
            }
            None => f.write_str(self.primary.abbreviation()),
        }
    }
}

fn code_from_token(s: &str) -> Option<BugCode> {
    BugCode::ALL
        .iter()
        .copied()
        .find(|c| c.name().eq_ignore_ascii_case(s) || c.abbreviation().eq_ignore_ascii_case(s))
}

impl FromStr for Label {
    type Err = TaxonomyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || TaxonomyError::UnknownCode { text: s.to_string() };
        match s.split_once(" and ") {
            Some((a, b)) => {
                let first = code_from_token(a.trim()).ok_or_else(unknown)?;
                let second = code_from_token(b.trim()).ok_or_else(unknown)?;
                Ok(Label::pair(first, second))
            }
            None => Ok(Label::single(code_from_token(s.trim()).ok_or_else(unknown)?)),
        }
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The classifier's full verdict for one pair: the label, the byte spans
/// backing it, and the detector that fired.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassifiedLabel {
    pub primary: BugCode,
    /// Second off-by-one category observed in the same loop, if any.
    pub combination: Option<BugCode>,
    /// Regions of the mutated text (original text for pure deletions).
    pub evidence: Vec<Span>,
    /// Identifier of the detector that produced the label.
    pub rule: &'static str,
}

impl ClassifiedLabel {
    fn new(primary: BugCode, evidence: Vec<Span>, rule: &'static str) -> Self {
        ClassifiedLabel { primary, combination: None, evidence, rule }
    }

    pub fn label(&self) -> Label {
        Label { primary: self.primary, combination: self.combination }
    }
}

type Detector = fn(&SourceUnit, &SourceUnit, &TokenDiff) -> Option<ClassifiedLabel>;

/// Detector precedence: structural syntax, operators, call shapes,
/// declarations, flow, then themes. Fixed — not configuration.
const DETECTORS: &[Detector] = &[
    detect_e,
    detect_k,
    detect_f,
    detect_g,
    detect_c,
    detect_a,
    detect_d,
    detect_l,
    detect_j,
    detect_p,
    detect_i,
    detect_m,
    detect_n,
    detect_h,
    detect_q,
    detect_w,
    detect_t,
    detect_o,
    detect_r,
    detect_b,
    detect_off_by_one,
    detect_u,
    detect_y,
];

/// Labels a mutated unit against its original. Total: anything the
/// detectors cannot place becomes `X`; byte-identical inputs are `None`.
pub fn classify_pair(original: &SourceUnit, mutated: &SourceUnit) -> ClassifiedLabel {
    if original.text == mutated.text {
        return ClassifiedLabel::new(BugCode::None, Vec::new(), "identical");
    }
    let Some(diff) = token_window_diff(original, mutated) else {
        // Only whitespace or comments moved; as far as the taxonomy is
        // concerned the code came back unchanged.
        return ClassifiedLabel::new(BugCode::None, Vec::new(), "formatting-only");
    };
    for detect in DETECTORS {
        if let Some(label) = detect(original, mutated, &diff) {
            return label;
        }
    }
    ClassifiedLabel::new(BugCode::X, window_evidence(&diff), "unmatched-diff")
}

fn window_evidence(diff: &TokenDiff) -> Vec<Span> {
    if diff.mutated_span.is_empty() && !diff.original_span.is_empty() {
        vec![diff.original_span]
    } else {
        vec![diff.mutated_span]
    }
}

/// Next code token strictly after token index `idx`.
fn next_code_after(unit: &SourceUnit, idx: usize) -> Option<&Token> {
    unit.tokens[idx + 1..].iter().find(|t| t.kind.is_code())
}

/// First original code token following the diff window.
fn first_after_window<'a>(original: &'a SourceUnit, diff: &TokenDiff) -> Option<&'a Token> {
    let idx = match diff.removed_indices.last() {
        Some(&last) => last,
        None => match diff.anchor_before {
            Some(anchor) => anchor,
            None => return original.tokens.iter().find(|t| t.kind.is_code()),
        },
    };
    next_code_after(original, idx)
}

fn in_any_condition(unit: &SourceUnit, span: Span) -> bool {
    unit.structure.condition_spans().iter().any(|c| span.within(*c))
}

fn type_like(t: &Token) -> bool {
    is_type_keyword(t)
        || (t.kind == TokenKind::Identifier
            && t.text.chars().next().is_some_and(|c| c.is_uppercase()))
        || t.text == "["
        || t.text == "]"
}

fn is_literal(kind: TokenKind) -> bool {
    matches!(kind, TokenKind::LiteralInt | TokenKind::LiteralString | TokenKind::LiteralChar)
}

/// E — `;` inserted directly after an if/for/while header.
fn detect_e(original: &SourceUnit, _m: &SourceUnit, diff: &TokenDiff) -> Option<ClassifiedLabel> {
    if !(diff.is_insertion() && diff.inserted.len() == 1 && diff.inserted[0].text == ";") {
        return None;
    }
    let anchor = diff.anchor_before?;
    original
        .structure
        .control_headers
        .iter()
        .any(|h| h.close == anchor)
        .then(|| {
            ClassifiedLabel::new(BugCode::E, vec![diff.mutated_span], "semicolon-after-header")
        })
}

/// K — `;` inserted between a method signature and its body.
fn detect_k(original: &SourceUnit, _m: &SourceUnit, diff: &TokenDiff) -> Option<ClassifiedLabel> {
    if !(diff.is_insertion() && diff.inserted.len() == 1 && diff.inserted[0].text == ";") {
        return None;
    }
    let anchor = diff.anchor_before?;
    original
        .structure
        .method_headers
        .iter()
        .any(|h| h.close == anchor)
        .then(|| {
            ClassifiedLabel::new(BugCode::K, vec![diff.mutated_span], "semicolon-before-body")
        })
}

/// F — the `;` separators of a `for` header turned into `,`.
fn detect_f(original: &SourceUnit, _m: &SourceUnit, diff: &TokenDiff) -> Option<ClassifiedLabel> {
    if diff.removed.len() != diff.inserted.len() || diff.removed.is_empty() {
        return None;
    }
    let positions = diff.differing_positions();
    if positions.is_empty()
        || !positions
            .iter()
            .all(|&k| diff.removed[k].text == ";" && diff.inserted[k].text == ",")
    {
        return None;
    }
    original
        .structure
        .for_descriptors
        .iter()
        .any(|d| {
            let header = original.structure.control_headers[d.header].header_span;
            diff.original_span.within(header)
        })
        .then(|| {
            ClassifiedLabel::new(BugCode::F, vec![diff.mutated_span], "commas-in-for-header")
        })
}

/// G — a condition's parentheses replaced with braces.
fn detect_g(_o: &SourceUnit, _m: &SourceUnit, diff: &TokenDiff) -> Option<ClassifiedLabel> {
    let (r, i) = (&diff.removed, &diff.inserted);
    if r.len() != i.len() || r.len() < 2 {
        return None;
    }
    let shape = r[0].text == "("
        && r[r.len() - 1].text == ")"
        && i[0].text == "{"
        && i[i.len() - 1].text == "}";
    if !shape {
        return None;
    }
    r[1..r.len() - 1]
        .iter()
        .zip(&i[1..i.len() - 1])
        .all(|(a, b)| same_token(a, b))
        .then(|| ClassifiedLabel::new(BugCode::G, vec![diff.mutated_span], "braced-condition"))
}

/// C — a closing parenthesis deleted.
fn detect_c(_o: &SourceUnit, _m: &SourceUnit, diff: &TokenDiff) -> Option<ClassifiedLabel> {
    (diff.is_deletion() && diff.removed.len() == 1 && diff.removed[0].text == ")")
        .then(|| ClassifiedLabel::new(BugCode::C, window_evidence(diff), "missing-parenthesis"))
}

/// A — `==` became `=` inside a condition.
fn detect_a(original: &SourceUnit, _m: &SourceUnit, diff: &TokenDiff) -> Option<ClassifiedLabel> {
    let (r, i) = diff.single_substitution()?;
    (r.text == "==" && i.text == "=" && in_any_condition(original, r.span))
        .then(|| ClassifiedLabel::new(BugCode::A, vec![diff.mutated_span], "assignment-in-condition"))
}

/// D — `&&` became `&`.
fn detect_d(_o: &SourceUnit, _m: &SourceUnit, diff: &TokenDiff) -> Option<ClassifiedLabel> {
    let (r, i) = diff.single_substitution()?;
    (r.text == "&&" && i.text == "&")
        .then(|| ClassifiedLabel::new(BugCode::D, vec![diff.mutated_span], "bitwise-and"))
}

/// L — a relational operator's direction flipped inside a condition.
fn detect_l(original: &SourceUnit, _m: &SourceUnit, diff: &TokenDiff) -> Option<ClassifiedLabel> {
    let (r, i) = diff.single_substitution()?;
    let flipped = matches!(
        (r.text.as_str(), i.text.as_str()),
        ("<", ">") | (">", "<") | ("<=", ">=") | (">=", "<=")
    );
    (flipped && in_any_condition(original, r.span))
        .then(|| ClassifiedLabel::new(BugCode::L, vec![diff.mutated_span], "flipped-relation"))
}

/// J — the `()` of a no-argument call deleted.
fn detect_j(original: &SourceUnit, _m: &SourceUnit, diff: &TokenDiff) -> Option<ClassifiedLabel> {
    if !(diff.is_deletion()
        && diff.removed.len() == 2
        && diff.removed[0].text == "("
        && diff.removed[1].text == ")")
    {
        return None;
    }
    let anchor = diff.anchor_before?;
    (original.tokens[anchor].kind == TokenKind::Identifier)
        .then(|| ClassifiedLabel::new(BugCode::J, window_evidence(diff), "missing-call-parens"))
}

/// P — a call argument prefixed with its declared type.
fn detect_p(original: &SourceUnit, _m: &SourceUnit, diff: &TokenDiff) -> Option<ClassifiedLabel> {
    if !diff.is_insertion() || !diff.inserted.iter().all(|t| type_like(t)) {
        return None;
    }
    if diff.inserted[0].text == "[" || diff.inserted[0].text == "]" {
        return None;
    }
    (first_after_window(original, diff)?.kind == TokenKind::Identifier)
        .then(|| ClassifiedLabel::new(BugCode::P, vec![diff.mutated_span], "type-prefixed-argument"))
}

/// I — an identifier argument replaced by a string literal.
fn detect_i(_o: &SourceUnit, _m: &SourceUnit, diff: &TokenDiff) -> Option<ClassifiedLabel> {
    let (r, i) = diff.single_substitution()?;
    (r.kind == TokenKind::Identifier && i.kind == TokenKind::LiteralString)
        .then(|| ClassifiedLabel::new(BugCode::I, vec![diff.mutated_span], "literal-for-argument"))
}

/// M — a call receiver replaced by its declared type name.
fn detect_m(original: &SourceUnit, _m: &SourceUnit, diff: &TokenDiff) -> Option<ClassifiedLabel> {
    if !diff.is_substitution() || diff.removed.len() != 1 || diff.inserted.is_empty() {
        return None;
    }
    let r = diff.removed[0];
    if r.kind != TokenKind::Identifier || first_after_window(original, diff)?.text != "." {
        return None;
    }
    let method = original.structure.method_containing(r.span.start);
    let decl = original.structure.decl_in_scope(&r.text, method)?;
    let inserted_text: String = diff.inserted.iter().map(|t| t.text.as_str()).collect();
    (decl.type_text == inserted_text)
        .then(|| ClassifiedLabel::new(BugCode::M, vec![diff.mutated_span], "receiver-as-type"))
}

/// N — the `lhs =` of a call-result assignment deleted.
///
/// Judged against the statement the window falls in rather than the raw
/// window, because the prefix trim can slide the window to the right when the
/// declared type equals the callee's receiver (`String text = String.valueOf(…)`).
fn detect_n(original: &SourceUnit, _m: &SourceUnit, diff: &TokenDiff) -> Option<ClassifiedLabel> {
    if !diff.is_deletion() || diff.removed.iter().filter(|t| t.text == "=").count() != 1 {
        return None;
    }
    let stmt = *original
        .structure
        .statements
        .iter()
        .find(|s| diff.original_span.within(**s))?;
    let toks = &original.tokens;
    let code: Vec<usize> = (0..toks.len())
        .filter(|&j| toks[j].kind.is_code() && toks[j].span.within(stmt))
        .collect();
    let eq = code
        .iter()
        .position(|&j| toks[j].is(TokenKind::Operator, "="))?;
    if eq == 0 || diff.removed.len() != eq + 1 {
        return None;
    }
    let lhs = &code[..eq];
    if toks[*lhs.last()?].kind != TokenKind::Identifier {
        return None;
    }
    let simple = lhs.iter().all(|&j| {
        matches!(toks[j].kind, TokenKind::Identifier | TokenKind::Keyword)
            || toks[j].text == "["
            || toks[j].text == "]"
    });
    (simple && rhs_is_bare_call(toks, &code[eq + 1..]))
        .then(|| ClassifiedLabel::new(BugCode::N, window_evidence(diff), "dropped-assignment-lhs"))
}

/// H — a local variable renamed to a reserved keyword at every use.
fn detect_h(_o: &SourceUnit, _m: &SourceUnit, diff: &TokenDiff) -> Option<ClassifiedLabel> {
    if diff.removed.len() != diff.inserted.len() || diff.removed.is_empty() {
        return None;
    }
    let positions = diff.differing_positions();
    if positions.is_empty() {
        return None;
    }
    let keyword = diff.inserted[positions[0]];
    if keyword.kind != TokenKind::Keyword || is_type_keyword(keyword) {
        return None;
    }
    let renamed = diff.removed[positions[0]];
    let uniform = positions.iter().all(|&k| {
        diff.removed[k].kind == TokenKind::Identifier
            && diff.removed[k].text == renamed.text
            && same_token(diff.inserted[k], keyword)
    });
    uniform.then(|| ClassifiedLabel {
        primary: BugCode::H,
        combination: None,
        evidence: positions.iter().map(|&k| diff.inserted[k].span).collect(),
        rule: "keyword-rename",
    })
}

/// Q — a declared type swapped for an incompatible one.
fn detect_q(original: &SourceUnit, _m: &SourceUnit, diff: &TokenDiff) -> Option<ClassifiedLabel> {
    let (r, i) = diff.single_substitution()?;
    let named_type = |t: &Token| {
        is_type_keyword(t)
            || (t.kind == TokenKind::Identifier
                && t.text.chars().next().is_some_and(|c| c.is_uppercase()))
    };
    if !(named_type(r) && named_type(i)) || !(is_type_keyword(r) || is_type_keyword(i)) {
        return None;
    }
    (first_after_window(original, diff)?.kind == TokenKind::Identifier)
        .then(|| ClassifiedLabel::new(BugCode::Q, vec![diff.mutated_span], "swapped-declared-type"))
}

/// W — an identifier replaced by a name declared nowhere in the unit.
fn detect_w(original: &SourceUnit, _m: &SourceUnit, diff: &TokenDiff) -> Option<ClassifiedLabel> {
    let (r, i) = diff.single_substitution()?;
    if r.kind != TokenKind::Identifier || i.kind != TokenKind::Identifier {
        return None;
    }
    let appears = original
        .tokens
        .iter()
        .any(|t| t.kind == TokenKind::Identifier && t.text == i.text);
    (!appears)
        .then(|| ClassifiedLabel::new(BugCode::W, vec![diff.mutated_span], "undeclared-identifier"))
}

/// T — a literal swapped for a literal of a different kind.
fn detect_t(_o: &SourceUnit, _m: &SourceUnit, diff: &TokenDiff) -> Option<ClassifiedLabel> {
    let (r, i) = diff.single_substitution()?;
    (is_literal(r.kind) && is_literal(i.kind) && r.kind != i.kind)
        .then(|| ClassifiedLabel::new(BugCode::T, vec![diff.mutated_span], "literal-type-mismatch"))
}

/// O — a whole `return ...;` statement deleted.
fn detect_o(_o: &SourceUnit, _m: &SourceUnit, diff: &TokenDiff) -> Option<ClassifiedLabel> {
    if !diff.is_deletion() || diff.removed.len() < 2 {
        return None;
    }
    (diff.removed[0].is(TokenKind::Keyword, "return") && diff.removed.last()?.text == ";")
        .then(|| ClassifiedLabel::new(BugCode::O, window_evidence(diff), "dropped-return"))
}

/// R — a whole method (signature and body) deleted.
fn detect_r(_o: &SourceUnit, _m: &SourceUnit, diff: &TokenDiff) -> Option<ClassifiedLabel> {
    if !diff.is_deletion() {
        return None;
    }
    let has = |text: &str| diff.removed.iter().any(|t| t.text == text);
    (has("{") && has("(") && has(")"))
        .then(|| ClassifiedLabel::new(BugCode::R, window_evidence(diff), "dropped-method"))
}

/// B — `x.equals(y)` rewritten as `x == y`.
fn detect_b(_o: &SourceUnit, _m: &SourceUnit, diff: &TokenDiff) -> Option<ClassifiedLabel> {
    let (r, i) = (&diff.removed, &diff.inserted);
    if r.len() < 4 || i.len() < 2 {
        return None;
    }
    let shape = r[0].text == "."
        && r[1].text == "equals"
        && r[2].text == "("
        && r[r.len() - 1].text == ")"
        && i[0].text == "==";
    if !shape || r.len() - 4 != i.len() - 1 {
        return None;
    }
    r[3..r.len() - 1]
        .iter()
        .zip(&i[1..])
        .all(|(a, b)| same_token(a, b))
        .then(|| ClassifiedLabel::new(BugCode::B, vec![diff.mutated_span], "equals-to-operator"))
}

/// Off-by-one — the window touches a `for` header; the loop is evaluated
/// concretely and categorized by its visited index set.
fn detect_off_by_one(
    original: &SourceUnit,
    mutated: &SourceUnit,
    diff: &TokenDiff,
) -> Option<ClassifiedLabel> {
    let orig_fors = &original.structure.for_descriptors;
    let mut_fors = &mutated.structure.for_descriptors;
    if orig_fors.is_empty() || orig_fors.len() != mut_fors.len() {
        return None;
    }
    let touches = |header: Span| {
        diff.original_span.overlaps(header)
            || (diff.original_span.is_empty()
                && header.start <= diff.original_span.start
                && diff.original_span.start <= header.end)
    };
    let k = orig_fors
        .iter()
        .position(|d| touches(original.structure.control_headers[d.header].header_span))?;
    let evidence =
        vec![mutated.structure.control_headers[mut_fors[k].header].header_span];
    let mut agreed: Option<BTreeSet<BugCode>> = None;
    for n in [3, 5, 8] {
        match off_by_one_category(original, &orig_fors[k], mutated, &mut_fors[k], n) {
            Ok(set) => match &agreed {
                Some(prev) if *prev != set => {
                    return Some(ClassifiedLabel::new(BugCode::X, evidence, "probe-variant-loop"));
                }
                _ => agreed = Some(set),
            },
            Err(_) => {
                return Some(ClassifiedLabel::new(BugCode::X, evidence, "non-canonical-loop"));
            }
        }
    }
    let codes: Vec<BugCode> = agreed.expect("three probes ran").into_iter().collect();
    Some(match codes.as_slice() {
        [] => ClassifiedLabel::new(BugCode::X, evidence, "equivalent-loop"),
        [one] => ClassifiedLabel { primary: *one, combination: None, evidence, rule: "off-by-one" },
        [a, b] => {
            let label = Label::pair(*a, *b);
            ClassifiedLabel {
                primary: label.primary,
                combination: label.combination,
                evidence,
                rule: "off-by-one-combination",
            }
        }
        _ => ClassifiedLabel::new(BugCode::X, evidence, "off-by-one-multiple"),
    })
}

/// U — substitution within the confusable-operator set.
fn detect_u(_o: &SourceUnit, _m: &SourceUnit, diff: &TokenDiff) -> Option<ClassifiedLabel> {
    const OPERATORS: [&str; 6] = ["%", "/", "=", "==", "&&", "||"];
    let (r, i) = diff.single_substitution()?;
    (OPERATORS.contains(&r.text.as_str()) && OPERATORS.contains(&i.text.as_str()))
        .then(|| ClassifiedLabel::new(BugCode::U, vec![diff.mutated_span], "wrong-operator"))
}

/// Y — return-statement conflation: an inverted boolean return, or a
/// returned value turned into an assignment.
fn detect_y(original: &SourceUnit, _m: &SourceUnit, diff: &TokenDiff) -> Option<ClassifiedLabel> {
    let boolish = |t: &Token| {
        t.kind == TokenKind::Keyword && (t.text == "true" || t.text == "false")
    };
    let anchor_is = |text: &str, within: usize| {
        diff.anchor_before.is_some_and(|anchor| {
            let mut back = original.tokens[..=anchor]
                .iter()
                .rev()
                .filter(|t| t.kind.is_code());
            back.by_ref().take(within).any(|t| t.is(TokenKind::Keyword, text))
        })
    };
    if let Some((r, i)) = diff.single_substitution() {
        if boolish(r) && boolish(i) && r.text != i.text && anchor_is("return", 1) {
            return Some(ClassifiedLabel::new(
                BugCode::Y,
                vec![diff.mutated_span],
                "inverted-return",
            ));
        }
    }
    if diff.is_insertion() && diff.inserted[0].text == "=" {
        let anchor = diff.anchor_before?;
        if original.tokens[anchor].kind == TokenKind::Identifier && anchor_is("return", 3) {
            return Some(ClassifiedLabel::new(
                BugCode::Y,
                vec![diff.mutated_span],
                "return-assignment",
            ));
        }
    }
    None
}

/// Projects a raw label into a study's reporting vocabulary: Study 1
/// reports every off-by-one finding under its catalog code `S`; Study 2
/// reports lettered and non-loop theme findings as out-of-distribution.
pub fn project_label(label: Label, study: Study) -> Label {
    match study {
        Study::Study1 => {
            if BugCode::OFF_BY_ONE.contains(&label.primary) {
                Label::single(BugCode::S)
            } else {
                label
            }
        }
        Study::Study2 => {
            let in_scope = BugCode::OFF_BY_ONE.contains(&label.primary)
                || matches!(label.primary, BugCode::X | BugCode::Refusal | BugCode::None);
            if in_scope {
                label
            } else {
                Label::single(BugCode::X)
            }
        }
    }
}

fn language_for_id(unit_id: &str) -> Language {
    if unit_id.ends_with(".c") {
        Language::CSubset
    } else {
        Language::JavaSubset
    }
}

/// Labels one stored corpus item under a study's vocabulary.
pub fn label_item(item: &CorpusItem, study: Study) -> Label {
    if item.refusal.is_some() {
        return Label::single(BugCode::Refusal);
    }
    let language = language_for_id(&item.unit_id);
    let original =
        SourceUnit::parse_lenient(item.unit_id.clone(), language, item.original_code.clone());
    let mutated =
        SourceUnit::parse_lenient(item.unit_id.clone(), language, item.mutated_code.clone());
    project_label(classify_pair(&original, &mutated).label(), study)
}

/// Per-strategy label counts for a labeled corpus. Percentages are always
/// derived from `counts` and `totals`, never stored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyTable {
    pub study: Study,
    /// strategy → label → count.
    pub counts: BTreeMap<String, BTreeMap<Label, u64>>,
    /// strategy → item count.
    pub totals: BTreeMap<String, u64>,
}

impl FrequencyTable {
    pub fn new(study: Study) -> Self {
        FrequencyTable { study, counts: BTreeMap::new(), totals: BTreeMap::new() }
    }

    pub fn record(&mut self, strategy: &str, label: Label) {
        *self
            .counts
            .entry(strategy.to_string())
            .or_default()
            .entry(label)
            .or_insert(0) += 1;
        *self.totals.entry(strategy.to_string()).or_insert(0) += 1;
    }

    pub fn strategies(&self) -> Vec<&str> {
        self.totals.keys().map(String::as_str).collect()
    }

    pub fn count(&self, strategy: &str, label: Label) -> u64 {
        self.counts.get(strategy).and_then(|m| m.get(&label)).copied().unwrap_or(0)
    }

    pub fn total(&self, strategy: &str) -> u64 {
        self.totals.get(strategy).copied().unwrap_or(0)
    }

    pub fn percentage(&self, strategy: &str, label: Label) -> f64 {
        let total = self.total(strategy);
        if total == 0 {
            return 0.0;
        }
        self.count(strategy, label) as f64 / total as f64 * 100.0
    }

    /// Collapses labels to per-code counts ready for a goodness-of-fit
    /// test: pair labels count as out-of-distribution (no reference
    /// distribution has pair categories) and `None` — the generator
    /// returned the code unchanged — counts with the refusals.
    pub fn gof_counts(&self, strategy: &str) -> BTreeMap<BugCode, u64> {
        let mut out = BTreeMap::new();
        if let Some(rows) = self.counts.get(strategy) {
            for (label, &count) in rows {
                let code = if label.combination.is_some() {
                    BugCode::X
                } else if label.primary == BugCode::None {
                    BugCode::Refusal
                } else {
                    label.primary
                };
                *out.entry(code).or_insert(0) += count;
            }
        }
        out
    }
}

fn strategy_key(item: &CorpusItem) -> &str {
    item.strategy.as_deref().unwrap_or("all")
}

/// Labels every item of a corpus (in parallel) and tabulates counts per
/// strategy tag.
pub fn label_corpus(corpus: &Corpus, study: Study) -> FrequencyTable {
    let labeled: Vec<(&str, Label)> = corpus
        .items
        .par_iter()
        .map(|item| (strategy_key(item), label_item(item, study)))
        .collect();
    let mut table = FrequencyTable::new(study);
    for (strategy, label) in labeled {
        table.record(strategy, label);
    }
    table
}

/// One row of a machine- or human-coded label file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRow {
    pub item_id: String,
    pub label: BugCode,
    pub combination: Option<BugCode>,
}

impl LabelRow {
    pub fn to_label(&self) -> Label {
        Label { primary: self.label, combination: self.combination }
    }
}

/// Labels every corpus item individually, for writing a label file.
pub fn label_rows(corpus: &Corpus, study: Study) -> Vec<LabelRow> {
    corpus
        .items
        .par_iter()
        .map(|item| {
            let label = label_item(item, study);
            LabelRow {
                item_id: item.id.clone(),
                label: label.primary,
                combination: label.combination,
            }
        })
        .collect()
}

/// Writes rows as CSV with the header `item_id,label,combination`.
pub fn write_label_file(path: &Path, rows: &[LabelRow]) -> Result<(), ClassifierError> {
    let mut writer = csv::Writer::from_path(path).map_err(ClassifierError::LabelFile)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads a `item_id,label,combination` CSV back into rows.
pub fn read_label_file(path: &Path) -> Result<Vec<LabelRow>, ClassifierError> {
    let mut reader = csv::Reader::from_path(path).map_err(ClassifierError::LabelFile)?;
    let mut rows = Vec::new();
    for record in reader.deserialize() {
        rows.push(record?);
    }
    Ok(rows)
}

/// Joins two coders' rows on `item_id`, yielding aligned label vectors
/// for agreement statistics. Items missing from either side are skipped.
pub fn align_label_rows(a: &[LabelRow], b: &[LabelRow]) -> (Vec<Label>, Vec<Label>) {
    let by_id: BTreeMap<&str, Label> =
        b.iter().map(|row| (row.item_id.as_str(), row.to_label())).collect();
    let mut left = Vec::new();
    let mut right = Vec::new();
    for row in a {
        if let Some(&other) = by_id.get(row.item_id.as_str()) {
            left.push(row.to_label());
            right.push(other);
        }
    }
    (left, right)
}

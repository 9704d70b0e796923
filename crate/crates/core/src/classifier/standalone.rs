//! Best-effort detection on a single unit, with no original to diff
//! against. Only structurally self-evident shapes are reported, so recall
//! is deliberately lower than `classify_pair`'s.

use std::collections::BTreeSet;

use crate::code_model::{ControlKind, SourceUnit, Span, TokenKind};
use crate::taxonomy::{BugCode, Taxonomy};

use super::off_by_one::standalone_categories;
use super::{next_code_after, type_like};

/// A single standalone finding: what, where, and which heuristic fired.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Detection {
    pub code: BugCode,
    pub span: Span,
    pub rule: &'static str,
}

/// Scans a unit for self-evident bug shapes, reporting codes from the
/// given taxonomy plus the flagging vocabulary (`W`, `S`, `X`).
pub fn detect_standalone(unit: &SourceUnit, taxonomy: &Taxonomy) -> Vec<Detection> {
    let mut out = Vec::new();
    let keep = |code: BugCode| taxonomy.contains(code);

    scan_control_headers(unit, &keep, &mut out);
    scan_method_shapes(unit, &keep, &mut out);
    scan_paren_pairs(unit, &keep, &mut out);
    scan_conditions(unit, &keep, &mut out);
    scan_statements(unit, &keep, &mut out);
    scan_identifiers(unit, &mut out);
    scan_loops(unit, taxonomy, &mut out);

    out.sort_by_key(|d| (d.span.start, d.span.end, d.code.name()));
    out
}

/// E — `;` directly after an if/for/while header; also flags empty
/// if/while conditions as out-of-distribution.
fn scan_control_headers(
    unit: &SourceUnit,
    keep: &dyn Fn(BugCode) -> bool,
    out: &mut Vec<Detection>,
) {
    for h in &unit.structure.control_headers {
        if keep(BugCode::E) {
            if let Some(t) = next_code_after(unit, h.close) {
                if t.text == ";" {
                    out.push(Detection {
                        code: BugCode::E,
                        span: Span::new(h.header_span.start, t.span.end),
                        rule: "semicolon-after-header",
                    });
                }
            }
        }
        let has_condition = unit
            .tokens
            .iter()
            .any(|t| t.kind.is_code() && t.span.within(h.condition_span));
        if !has_condition && h.kind != ControlKind::For {
            out.push(Detection {
                code: BugCode::X,
                span: h.header_span,
                rule: "empty-condition",
            });
        }
    }
}

/// K — `name(...) ; {`: a semicolon wedged between a signature and its
/// body. G — an `if` that opens straight into a brace.
fn scan_method_shapes(
    unit: &SourceUnit,
    keep: &dyn Fn(BugCode) -> bool,
    out: &mut Vec<Detection>,
) {
    let toks = &unit.tokens;
    if keep(BugCode::K) {
        for pair in paren_pairs(unit) {
            if is_header_paren(unit, pair.open) {
                continue;
            }
            let named = prev_code_before(unit, pair.open)
                .is_some_and(|t| t.kind == TokenKind::Identifier);
            let Some(semi) = next_code_after(unit, pair.close) else { continue };
            if !named || semi.text != ";" {
                continue;
            }
            let semi_idx = toks.iter().position(|t| t.span == semi.span).unwrap();
            if next_code_after(unit, semi_idx).is_some_and(|t| t.text == "{") {
                out.push(Detection {
                    code: BugCode::K,
                    span: Span::new(pair.open_span.start, semi.span.end),
                    rule: "semicolon-before-body",
                });
            }
        }
    }
    if keep(BugCode::G) {
        for (j, t) in toks.iter().enumerate() {
            if t.is(TokenKind::Keyword, "if")
                && next_code_after(unit, j).is_some_and(|n| n.text == "{")
            {
                out.push(Detection {
                    code: BugCode::G,
                    span: t.span,
                    rule: "braced-condition",
                });
            }
        }
    }
}

/// P — a call argument that carries a declared type in front of it.
fn scan_paren_pairs(unit: &SourceUnit, keep: &dyn Fn(BugCode) -> bool, out: &mut Vec<Detection>) {
    if !keep(BugCode::P) {
        return;
    }
    for pair in paren_pairs(unit) {
        if is_header_paren(unit, pair.open) {
            continue;
        }
        // Only call sites inside a method body count: parameter lists of
        // bodyless declarations (interface members, prototypes) legitimately
        // pair a type with a name.
        let open_span = unit.tokens[pair.open].span;
        if unit
            .structure
            .method_headers
            .iter()
            .all(|m| !open_span.within(m.body_span))
        {
            continue;
        }
        let inner: Vec<usize> = (pair.open + 1..pair.close)
            .filter(|&j| unit.tokens[j].kind.is_code())
            .collect();
        for window in inner.windows(2) {
            let (a, b) = (&unit.tokens[window[0]], &unit.tokens[window[1]]);
            if type_like(a) && a.text != "[" && a.text != "]" && b.kind == TokenKind::Identifier
            {
                out.push(Detection {
                    code: BugCode::P,
                    span: Span::new(a.span.start, b.span.end),
                    rule: "type-prefixed-argument",
                });
            }
        }
    }
}

/// D — a lone `&` inside a condition. A — a lone `=` inside a condition.
fn scan_conditions(unit: &SourceUnit, keep: &dyn Fn(BugCode) -> bool, out: &mut Vec<Detection>) {
    for span in unit.structure.condition_spans() {
        for t in unit.tokens.iter().filter(|t| t.span.within(span)) {
            if t.is(TokenKind::Operator, "&") && keep(BugCode::D) {
                out.push(Detection { code: BugCode::D, span: t.span, rule: "bitwise-and" });
            }
            if t.is(TokenKind::Operator, "=") && keep(BugCode::A) {
                out.push(Detection {
                    code: BugCode::A,
                    span: t.span,
                    rule: "assignment-in-condition",
                });
            }
        }
    }
}

/// J — a statement that is only a dotted name, missing its call parens.
fn scan_statements(unit: &SourceUnit, keep: &dyn Fn(BugCode) -> bool, out: &mut Vec<Detection>) {
    if !keep(BugCode::J) {
        return;
    }
    for stmt in &unit.structure.statements {
        let code: Vec<_> = unit
            .tokens
            .iter()
            .filter(|t| t.kind.is_code() && t.span.within(*stmt))
            .collect();
        let [front @ .., last] = code.as_slice() else { continue };
        if front.len() < 2 || last.text != ";" {
            continue;
        }
        let dotted_name = front
            .iter()
            .all(|t| t.kind == TokenKind::Identifier || t.text == ".");
        if dotted_name
            && front.iter().any(|t| t.text == ".")
            && front.last().is_some_and(|t| t.kind == TokenKind::Identifier)
        {
            out.push(Detection { code: BugCode::J, span: *stmt, rule: "missing-call-parens" });
        }
    }
}

/// W — identifier uses that no declaration in scope accounts for.
fn scan_identifiers(unit: &SourceUnit, out: &mut Vec<Detection>) {
    for (j, t) in unit.tokens.iter().enumerate() {
        if t.kind != TokenKind::Identifier
            || t.text.chars().next().is_some_and(|c| c.is_uppercase())
        {
            continue;
        }
        if prev_code_before(unit, j).is_some_and(|p| p.text == "." || type_like(p)) {
            continue; // field access, or a declaration site
        }
        if next_code_after(unit, j).is_some_and(|n| n.text == "(") {
            continue; // method name
        }
        let method = unit.structure.method_containing(t.span.start);
        if unit.structure.decl_in_scope(&t.text, method).is_none() {
            out.push(Detection {
                code: BugCode::W,
                span: t.span,
                rule: "undeclared-identifier",
            });
        }
    }
}

/// Off-by-one evaluation of each `for` loop against the ideal index set;
/// mangled headers are flagged `X`.
fn scan_loops(unit: &SourceUnit, taxonomy: &Taxonomy, out: &mut Vec<Detection>) {
    let base_codes = taxonomy.contains(BugCode::HighBounds);
    for lp in &unit.structure.for_descriptors {
        let header = unit.structure.control_headers[lp.header];
        if lp.malformed {
            let commas = top_level_commas(unit, header.open, header.close);
            if commas >= 2 && taxonomy.contains(BugCode::F) {
                out.push(Detection {
                    code: BugCode::F,
                    span: header.header_span,
                    rule: "commas-in-for-header",
                });
            } else {
                out.push(Detection {
                    code: BugCode::X,
                    span: header.header_span,
                    rule: "malformed-for",
                });
            }
            continue;
        }
        let mut agreed: Option<BTreeSet<BugCode>> = None;
        let mut evaluable = true;
        for n in [3, 5, 8] {
            match standalone_categories(unit, lp, n) {
                Ok(set) => match &agreed {
                    Some(prev) if *prev != set => {
                        evaluable = false;
                        break;
                    }
                    _ => agreed = Some(set),
                },
                Err(_) => {
                    evaluable = false;
                    // Only suspicious shapes get flagged: a mutation of the
                    // counter (`i < n--`) rather than an exotic-but-honest
                    // loop.
                    let suspicious = unit.tokens.iter().any(|t| {
                        t.span.within(lp.condition_span)
                            && (t.text == "--" || t.text == "++")
                    });
                    if suspicious {
                        out.push(Detection {
                            code: BugCode::X,
                            span: header.header_span,
                            rule: "non-canonical-loop",
                        });
                    }
                    break;
                }
            }
        }
        let Some(set) = agreed.filter(|_| evaluable) else { continue };
        if set.is_empty() {
            continue;
        }
        if base_codes {
            for code in set {
                out.push(Detection { code, span: header.header_span, rule: "off-by-one" });
            }
        } else {
            out.push(Detection {
                code: BugCode::S,
                span: header.header_span,
                rule: "off-by-one",
            });
        }
    }
}

fn paren_pairs(unit: &SourceUnit) -> impl Iterator<Item = &crate::code_model::BracketPair> {
    unit.structure
        .bracket_pairs
        .iter()
        .filter(|p| p.kind == crate::code_model::BracketKind::Paren)
}

/// True when `open` is the parenthesis of a control or method header.
fn is_header_paren(unit: &SourceUnit, open: usize) -> bool {
    unit.structure.control_headers.iter().any(|h| h.open == open)
        || unit.structure.method_headers.iter().any(|m| m.open == open)
}

fn prev_code_before(unit: &SourceUnit, idx: usize) -> Option<&crate::code_model::Token> {
    unit.tokens[..idx].iter().rev().find(|t| t.kind.is_code())
}

fn top_level_commas(unit: &SourceUnit, open: usize, close: usize) -> usize {
    let mut depth = 0usize;
    let mut count = 0;
    for t in &unit.tokens[open + 1..close] {
        if !t.kind.is_code() {
            continue;
        }
        match t.text.as_str() {
            "(" | "[" => depth += 1,
            ")" | "]" => depth = depth.saturating_sub(1),
            "," if depth == 0 => count += 1,
            _ => {}
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins::builtin_units;
    use crate::code_model::Language;
    use crate::taxonomy::{builtin_taxonomy, Study};

    fn java(src: &str) -> SourceUnit {
        SourceUnit::parse_lenient("t.java", Language::JavaSubset, src)
    }

    fn study1(unit: &SourceUnit) -> Vec<Detection> {
        detect_standalone(unit, &builtin_taxonomy(Study::Study1))
    }

    fn codes(detections: &[Detection]) -> Vec<BugCode> {
        detections.iter().map(|d| d.code).collect()
    }

    #[test]
    fn semicolon_after_header_is_e() {
        let unit = java("void f(boolean a) { while (a); { g(); } }");
        assert!(codes(&study1(&unit)).contains(&BugCode::E));
    }

    #[test]
    fn empty_condition_is_flagged_x() {
        let unit = java("boolean f() { if () { return true; } return false; }");
        let found = study1(&unit);
        assert!(found
            .iter()
            .any(|d| d.code == BugCode::X && d.rule == "empty-condition"));
    }

    #[test]
    fn decremented_bound_is_flagged_x() {
        let unit = java("void f(int n) { for (int i = 0; i < n--; i++) { g(i); } }");
        let found = study1(&unit);
        assert!(found
            .iter()
            .any(|d| d.code == BugCode::X && d.rule == "non-canonical-loop"));
    }

    #[test]
    fn off_by_one_loops_report_per_study_vocabulary() {
        let unit = java("void f(int n) { for (int i = 1; i <= n; i++) { g(i); } }");
        assert_eq!(codes(&study1(&unit)), vec![BugCode::S]);
        let s2 = detect_standalone(&unit, &builtin_taxonomy(Study::Study2));
        assert_eq!(codes(&s2), vec![BugCode::HighBounds, BugCode::LowMiss]);
    }

    #[test]
    fn structural_shapes_are_detected() {
        let cases: &[(&str, BugCode)] = &[
            ("int f(int a) { if (a = 5) { return a; } return 0; }", BugCode::A),
            ("int f(boolean a, boolean b) { if (a & b) { return 1; } return 0; }", BugCode::D),
            ("void f(String s) { s.trim; }", BugCode::J),
            ("void g(int y) { f(int y); }", BugCode::P),
            ("int f(); { return 1; }", BugCode::K),
            ("int f(boolean ok) { if {ok} { return 1; } return 0; }", BugCode::G),
            ("void f(int n) { for (int i = 0, i < n, i++) { g(i); } }", BugCode::F),
            ("int f(int a) { return ab; }", BugCode::W),
        ];
        for (src, expected) in cases {
            let unit = java(src);
            assert!(
                codes(&study1(&unit)).contains(expected),
                "{src} should yield {expected}, got {:?}",
                study1(&unit)
            );
        }
    }

    #[test]
    fn pristine_builtins_yield_no_detections() {
        for study in [Study::Study1, Study::Study2] {
            let taxonomy = builtin_taxonomy(study);
            for unit in builtin_units(study) {
                let found = detect_standalone(&unit, &taxonomy);
                assert!(found.is_empty(), "{} ({study}): {found:?}", unit.id);
            }
        }
    }
}

//! Injection-site discovery: where in a unit each bug rule can be applied.
//!
//! Every site carries the concrete edits (span + replacement text) that
//! realize the bug, so applying a site is purely mechanical. One canonical
//! transformation is defined per code; sites are returned in source order.

use serde::{Deserialize, Serialize};

use super::structure::{is_type_keyword, next_code, prev_code, split_top_level, DeclKind};
use super::tokenize::is_keyword;
use super::{BracketKind, CodeModelError, ControlKind, Language, SourceUnit, Span, Token, TokenKind};
use crate::taxonomy::BugCode;

/// One textual edit: replace `span` with `replacement` (empty replacement
/// deletes; empty span inserts).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edit {
    pub span: Span,
    pub replacement: String,
}

impl Edit {
    fn replace(span: Span, replacement: impl Into<String>) -> Self {
        Edit { span, replacement: replacement.into() }
    }

    fn insert(at: usize, replacement: impl Into<String>) -> Self {
        Edit { span: Span::new(at, at), replacement: replacement.into() }
    }

    fn delete(span: Span) -> Self {
        Edit { span, replacement: String::new() }
    }
}

/// What kind of location a site is (used for reporting, not dispatch).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SiteKind {
    Condition,
    IfCondition,
    ParenPair,
    Operator,
    ControlHeader,
    ForHeader,
    MethodHeader,
    MethodCall,
    CallArgument,
    Declaration,
    Assignment,
    ReturnStatement,
    Method,
    LoopInit,
    LoopCondition,
    IdentifierUse,
    Literal,
}

/// One concrete place a bug can be injected.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InjectionSite {
    /// The code this site realizes (always a base code, never `S`).
    pub bug: BugCode,
    /// Covering span of all edits.
    pub span: Span,
    pub context: SiteKind,
    /// Non-overlapping edits in source order.
    pub edits: Vec<Edit>,
}

impl InjectionSite {
    fn new(bug: BugCode, context: SiteKind, edits: Vec<Edit>) -> Self {
        let start = edits.iter().map(|e| e.span.start).min().unwrap_or(0);
        let end = edits.iter().map(|e| e.span.end).max().unwrap_or(0);
        InjectionSite { bug, span: Span::new(start, end), context, edits }
    }
}

/// All sites where `bug` can be injected into `unit`, in source order.
///
/// `S` expands to the four off-by-one base codes (each returned site keeps
/// its concrete base code). The sentinels `X`, `Refusal`, and `None` have
/// no injection rule.
pub fn find_sites(unit: &SourceUnit, bug: BugCode) -> Result<Vec<InjectionSite>, CodeModelError> {
    use BugCode::*;
    let mut sites = match bug {
        A => rule_a(unit),
        B => rule_b(unit),
        C => rule_c(unit),
        D => rule_d(unit),
        E => rule_e(unit),
        F => rule_f(unit),
        G => rule_g(unit),
        H => rule_h(unit),
        I => rule_i(unit),
        J => rule_j(unit),
        K => rule_k(unit),
        L => rule_l(unit),
        M => rule_m(unit),
        N => rule_n(unit),
        O => rule_o(unit),
        P => rule_p(unit),
        Q => rule_q(unit),
        R => rule_r(unit),
        HighBounds | LowBounds | LowMiss | HighMiss => off_by_one_sites(unit)
            .into_iter()
            .filter(|s| s.bug == bug)
            .collect(),
        S => off_by_one_sites(unit),
        U => theme_u(unit),
        W => theme_w(unit),
        T => theme_t(unit),
        Y => theme_y(unit),
        X | Refusal | None => {
            return Err(CodeModelError::UnknownBugCode { code: bug.to_string() })
        }
    };
    sites.sort_by_key(|s| (s.span.start, s.span.end));
    Ok(sites)
}

fn in_condition(unit: &SourceUnit, span: Span) -> bool {
    unit.structure.condition_spans().iter().any(|c| span.within(*c))
}

/// `==` → `=` inside a condition.
fn rule_a(unit: &SourceUnit) -> Vec<InjectionSite> {
    unit.tokens
        .iter()
        .filter(|t| t.is(TokenKind::Operator, "==") && in_condition(unit, t.span))
        .map(|t| {
            InjectionSite::new(BugCode::A, SiteKind::Condition, vec![Edit::replace(t.span, "=")])
        })
        .collect()
}

/// `x.equals(y)` → `x == y`, both operands string-typed by declaration.
fn rule_b(unit: &SourceUnit) -> Vec<InjectionSite> {
    if unit.language != Language::JavaSubset {
        return Vec::new();
    }
    let toks = &unit.tokens;
    let mut out = Vec::new();
    for (i, tok) in toks.iter().enumerate() {
        if tok.kind != TokenKind::Identifier {
            continue;
        }
        let Some(dot) = next_code(toks, i + 1) else { continue };
        if !toks[dot].is(TokenKind::Punctuation, ".") {
            continue;
        }
        let Some(name) = next_code(toks, dot + 1) else { continue };
        if !toks[name].is(TokenKind::Identifier, "equals") {
            continue;
        }
        let Some(open) = next_code(toks, name + 1) else { continue };
        if !toks[open].is(TokenKind::Punctuation, "(") {
            continue;
        }
        let Some(pair) = unit.structure.pair_opened_at(open).copied() else { continue };
        let arg: Vec<usize> = (pair.open + 1..pair.close)
            .filter(|&j| toks[j].kind.is_code())
            .collect();
        if arg.len() != 1 || toks[arg[0]].kind != TokenKind::Identifier {
            continue;
        }
        let method = unit.structure.method_containing(tok.span.start);
        let string_typed = |name: &str| {
            unit.structure
                .decl_in_scope(name, method)
                .is_some_and(|d| d.type_text == "String")
        };
        if !string_typed(&tok.text) || !string_typed(&toks[arg[0]].text) {
            continue;
        }
        let replacement = format!("{} == {}", tok.text, toks[arg[0]].text);
        out.push(InjectionSite::new(
            BugCode::B,
            SiteKind::MethodCall,
            vec![Edit::replace(Span::new(tok.span.start, pair.close_span.end), replacement)],
        ));
    }
    out
}

/// Delete the closing parenthesis of a paren pair.
fn rule_c(unit: &SourceUnit) -> Vec<InjectionSite> {
    unit.structure
        .bracket_pairs
        .iter()
        .filter(|p| p.kind == BracketKind::Paren)
        .map(|p| {
            InjectionSite::new(BugCode::C, SiteKind::ParenPair, vec![Edit::delete(p.close_span)])
        })
        .collect()
}

/// `&&` → `&`.
fn rule_d(unit: &SourceUnit) -> Vec<InjectionSite> {
    unit.tokens
        .iter()
        .filter(|t| t.is(TokenKind::Operator, "&&"))
        .map(|t| {
            InjectionSite::new(BugCode::D, SiteKind::Operator, vec![Edit::replace(t.span, "&")])
        })
        .collect()
}

/// Insert `;` right after an `if`/`for`/`while` header.
fn rule_e(unit: &SourceUnit) -> Vec<InjectionSite> {
    unit.structure
        .control_headers
        .iter()
        .map(|h| {
            InjectionSite::new(
                BugCode::E,
                SiteKind::ControlHeader,
                vec![Edit::insert(h.header_span.end, ";")],
            )
        })
        .collect()
}

/// Replace both `;` separators of a `for` header with `,`.
fn rule_f(unit: &SourceUnit) -> Vec<InjectionSite> {
    unit.structure
        .for_descriptors
        .iter()
        .filter(|d| !d.malformed)
        .map(|d| {
            let edits = d
                .semis
                .iter()
                .map(|&s| Edit::replace(unit.tokens[s].span, ","))
                .collect();
            InjectionSite::new(BugCode::F, SiteKind::ForHeader, edits)
        })
        .collect()
}

/// Replace an `if` condition's parentheses with braces.
fn rule_g(unit: &SourceUnit) -> Vec<InjectionSite> {
    unit.structure
        .control_headers
        .iter()
        .filter(|h| h.kind == ControlKind::If)
        .map(|h| {
            InjectionSite::new(
                BugCode::G,
                SiteKind::IfCondition,
                vec![
                    Edit::replace(unit.tokens[h.open].span, "{"),
                    Edit::replace(unit.tokens[h.close].span, "}"),
                ],
            )
        })
        .collect()
}

/// Rename one local variable to a reserved keyword at its declaration and
/// every use.
fn rule_h(unit: &SourceUnit) -> Vec<InjectionSite> {
    let keyword = match unit.language {
        Language::JavaSubset => "class",
        Language::CSubset => "switch",
    };
    let mut out = Vec::new();
    for decl in &unit.structure.declarations {
        if decl.kind != DeclKind::Local {
            continue;
        }
        let Some(m) = decl.method else { continue };
        let body = unit.structure.method_headers[m].body_span;
        let edits: Vec<Edit> = unit
            .tokens
            .iter()
            .filter(|t| {
                t.kind == TokenKind::Identifier && t.text == decl.name && t.span.within(body)
            })
            .map(|t| Edit::replace(t.span, keyword))
            .collect();
        if !edits.is_empty() {
            out.push(InjectionSite::new(BugCode::H, SiteKind::Declaration, edits));
        }
    }
    out
}

/// A discovered method call: `name(...)`, optionally `receiver.name(...)`.
struct Call {
    open: usize,
    close: usize,
    receiver: Option<usize>,
}

fn find_calls(unit: &SourceUnit) -> Vec<Call> {
    let toks = &unit.tokens;
    let header_opens: Vec<usize> =
        unit.structure.method_headers.iter().map(|m| m.open).collect();
    let mut out = Vec::new();
    for pair in &unit.structure.bracket_pairs {
        if pair.kind != BracketKind::Paren || header_opens.contains(&pair.open) {
            continue;
        }
        let Some(name) = prev_code(toks, pair.open) else { continue };
        if toks[name].kind != TokenKind::Identifier {
            continue;
        }
        let mut receiver = None;
        if let Some(before) = prev_code(toks, name) {
            if toks[before].is(TokenKind::Punctuation, ".") {
                if let Some(r) = prev_code(toks, before) {
                    // Single-level receivers only (`a.b()`, not `a.b.c()`).
                    let deeper = prev_code(toks, r)
                        .is_some_and(|d| toks[d].is(TokenKind::Punctuation, "."));
                    if toks[r].kind == TokenKind::Identifier && !deeper {
                        receiver = Some(r);
                    }
                }
            }
        }
        out.push(Call { open: pair.open, close: pair.close, receiver });
    }
    out
}

/// Single-identifier arguments of a call that are declared in scope.
fn declared_ident_args(unit: &SourceUnit, call: &Call) -> Vec<usize> {
    let toks = &unit.tokens;
    let pair = unit
        .structure
        .pair_opened_at(call.open)
        .copied()
        .expect("call pairs are indexed");
    let method = unit.structure.method_containing(toks[call.open].span.start);
    split_top_level(toks, &pair, ",")
        .iter()
        .filter_map(|piece| {
            let code: Vec<usize> = (pair.open + 1..pair.close)
                .filter(|&j| toks[j].kind.is_code() && toks[j].span.within(*piece))
                .collect();
            match code.as_slice() {
                [only]
                    if toks[*only].kind == TokenKind::Identifier
                        && unit.structure.decl_in_scope(&toks[*only].text, method).is_some() =>
                {
                    Some(*only)
                }
                _ => None,
            }
        })
        .collect()
}

/// Replace one call-argument identifier with a string literal.
fn rule_i(unit: &SourceUnit) -> Vec<InjectionSite> {
    let mut out = Vec::new();
    for call in find_calls(unit) {
        let method = unit.structure.method_containing(unit.tokens[call.open].span.start);
        for arg in declared_ident_args(unit, &call) {
            let name = &unit.tokens[arg].text;
            if unit.language == Language::JavaSubset {
                let is_string = unit
                    .structure
                    .decl_in_scope(name, method)
                    .is_some_and(|d| d.type_text == "String");
                if is_string {
                    continue; // a string literal would not be a wrong type
                }
            }
            out.push(InjectionSite::new(
                BugCode::I,
                SiteKind::CallArgument,
                vec![Edit::replace(unit.tokens[arg].span, format!("\"{name}\""))],
            ));
        }
    }
    out
}

/// Delete the `()` of a no-argument call.
fn rule_j(unit: &SourceUnit) -> Vec<InjectionSite> {
    let toks = &unit.tokens;
    find_calls(unit)
        .into_iter()
        .filter(|c| (c.open + 1..c.close).all(|j| !toks[j].kind.is_code()))
        .map(|c| {
            InjectionSite::new(
                BugCode::J,
                SiteKind::MethodCall,
                vec![Edit::delete(Span::new(toks[c.open].span.start, toks[c.close].span.end))],
            )
        })
        .collect()
}

/// Insert `;` between a method signature and its `{`.
fn rule_k(unit: &SourceUnit) -> Vec<InjectionSite> {
    unit.structure
        .method_headers
        .iter()
        .map(|m| {
            InjectionSite::new(
                BugCode::K,
                SiteKind::MethodHeader,
                vec![Edit::insert(m.signature_span.end, ";")],
            )
        })
        .collect()
}

/// Flip the direction of a relational operator inside a condition.
fn rule_l(unit: &SourceUnit) -> Vec<InjectionSite> {
    unit.tokens
        .iter()
        .filter(|t| t.kind == TokenKind::Operator && in_condition(unit, t.span))
        .filter_map(|t| {
            let flipped = match t.text.as_str() {
                "<" => ">",
                ">" => "<",
                "<=" => ">=",
                ">=" => "<=",
                _ => return None,
            };
            Some(InjectionSite::new(
                BugCode::L,
                SiteKind::Condition,
                vec![Edit::replace(t.span, flipped)],
            ))
        })
        .collect()
}

/// Replace the receiver of an instance call with its declared type name.
fn rule_m(unit: &SourceUnit) -> Vec<InjectionSite> {
    if unit.language != Language::JavaSubset {
        return Vec::new();
    }
    let mut out = Vec::new();
    for call in find_calls(unit) {
        let Some(recv) = call.receiver else { continue };
        let recv_tok = &unit.tokens[recv];
        let method = unit.structure.method_containing(recv_tok.span.start);
        let Some(decl) = unit.structure.decl_in_scope(&recv_tok.text, method) else {
            continue;
        };
        if !decl.type_text.chars().next().is_some_and(|c| c.is_uppercase()) {
            continue; // primitives and arrays have no static-call confusion
        }
        out.push(InjectionSite::new(
            BugCode::M,
            SiteKind::MethodCall,
            vec![Edit::replace(recv_tok.span, decl.type_text.clone())],
        ));
    }
    out
}

/// Delete the `lhs =` (with any declared type) of a call-result assignment.
fn rule_n(unit: &SourceUnit) -> Vec<InjectionSite> {
    let toks = &unit.tokens;
    let mut out = Vec::new();
    for stmt in &unit.structure.statements {
        let code: Vec<usize> = toks
            .iter()
            .enumerate()
            .filter(|(_, t)| t.kind.is_code() && t.span.within(*stmt))
            .map(|(j, _)| j)
            .collect();
        let Some(eq_pos) = code.iter().position(|&j| toks[j].is(TokenKind::Operator, "="))
        else {
            continue;
        };
        if eq_pos == 0 {
            continue;
        }
        // Left side: `[type] name` — plain tokens, no dots or indexing.
        let lhs = &code[..eq_pos];
        if toks[*lhs.last().unwrap()].kind != TokenKind::Identifier {
            continue;
        }
        let simple_lhs = lhs.iter().all(|&j| {
            matches!(toks[j].kind, TokenKind::Identifier | TokenKind::Keyword)
                || toks[j].is(TokenKind::Punctuation, "[")
                || toks[j].is(TokenKind::Punctuation, "]")
        });
        if !simple_lhs {
            continue;
        }
        // Right side: a call `f(...)` or `recv.f(...)` followed directly
        // by the statement's closing `;`.
        let rhs = &code[eq_pos + 1..];
        if !rhs_is_bare_call(toks, rhs) {
            continue;
        }
        let first_rhs = rhs[0];
        out.push(InjectionSite::new(
            BugCode::N,
            SiteKind::Assignment,
            vec![Edit::delete(Span::new(stmt.start, toks[first_rhs].span.start))],
        ));
    }
    out
}

/// `ident(.ident)* ( ... ) ;` — a call expression and nothing else.
pub(crate) fn rhs_is_bare_call(toks: &[Token], rhs: &[usize]) -> bool {
    let mut k = 0;
    // Callee path.
    loop {
        if k >= rhs.len() || toks[rhs[k]].kind != TokenKind::Identifier {
            return false;
        }
        k += 1;
        if k < rhs.len() && toks[rhs[k]].is(TokenKind::Punctuation, ".") {
            k += 1;
            continue;
        }
        break;
    }
    if k >= rhs.len() || !toks[rhs[k]].is(TokenKind::Punctuation, "(") {
        return false;
    }
    // Balanced argument parens, then the trailing `;`.
    let mut depth = 0usize;
    while k < rhs.len() {
        let t = &toks[rhs[k]];
        if t.is(TokenKind::Punctuation, "(") {
            depth += 1;
        } else if t.is(TokenKind::Punctuation, ")") {
            depth -= 1;
            if depth == 0 {
                return rhs.len() == k + 2 && toks[rhs[k + 1]].is(TokenKind::Punctuation, ";");
            }
        }
        k += 1;
    }
    false
}

/// Delete one `return ...;` statement from a non-void method.
fn rule_o(unit: &SourceUnit) -> Vec<InjectionSite> {
    let toks = &unit.tokens;
    let mut out = Vec::new();
    for m in &unit.structure.method_headers {
        let non_void = m
            .return_type_span
            .is_some_and(|s| s.slice(&unit.text).trim() != "void");
        if !non_void {
            continue;
        }
        for (j, tok) in toks.iter().enumerate() {
            if !tok.is(TokenKind::Keyword, "return") || !tok.span.within(m.body_span) {
                continue;
            }
            let Some(stmt) = unit
                .structure
                .statements
                .iter()
                .find(|s| tok.span.within(**s))
            else {
                continue;
            };
            let _ = j;
            out.push(InjectionSite::new(
                BugCode::O,
                SiteKind::ReturnStatement,
                vec![Edit::delete(*stmt)],
            ));
        }
    }
    out
}

/// Prefix one call-argument identifier with its declared type.
fn rule_p(unit: &SourceUnit) -> Vec<InjectionSite> {
    let mut out = Vec::new();
    for call in find_calls(unit) {
        let method = unit.structure.method_containing(unit.tokens[call.open].span.start);
        for arg in declared_ident_args(unit, &call) {
            let tok = &unit.tokens[arg];
            let decl = unit
                .structure
                .decl_in_scope(&tok.text, method)
                .expect("declared_ident_args checked scope");
            out.push(InjectionSite::new(
                BugCode::P,
                SiteKind::CallArgument,
                vec![Edit::insert(tok.span.start, format!("{} ", decl.type_text))],
            ));
        }
    }
    out
}

const NUMERIC_TYPES: &[&str] =
    &["int", "long", "short", "byte", "float", "double", "char", "boolean"];

/// Change the declared type of a call-initialized declaration.
fn rule_q(unit: &SourceUnit) -> Vec<InjectionSite> {
    if unit.language != Language::JavaSubset {
        return Vec::new();
    }
    let toks = &unit.tokens;
    let mut out = Vec::new();
    for decl in &unit.structure.declarations {
        if decl.kind == DeclKind::Param {
            continue;
        }
        let Some(name_idx) = toks.iter().position(|t| t.span == decl.name_span) else {
            continue;
        };
        let Some(eq) = next_code(toks, name_idx + 1) else { continue };
        if !toks[eq].is(TokenKind::Operator, "=") {
            continue;
        }
        // Initializer must be a bare call (possibly with a receiver).
        let Some(stmt) = unit
            .structure
            .statements
            .iter()
            .find(|s| decl.name_span.within(**s))
        else {
            continue;
        };
        let rhs: Vec<usize> = toks
            .iter()
            .enumerate()
            .filter(|(j, t)| *j > eq && t.kind.is_code() && t.span.within(*stmt))
            .map(|(j, _)| j)
            .collect();
        if !rhs_is_bare_call(toks, &rhs) {
            continue;
        }
        let new_type =
            if NUMERIC_TYPES.contains(&decl.type_text.as_str()) { "String" } else { "int" };
        if new_type == decl.type_text {
            continue;
        }
        out.push(InjectionSite::new(
            BugCode::Q,
            SiteKind::Declaration,
            vec![Edit::replace(decl.type_span, new_type)],
        ));
    }
    out
}

/// Delete one whole method from a type that implements an interface.
fn rule_r(unit: &SourceUnit) -> Vec<InjectionSite> {
    if unit.language != Language::JavaSubset {
        return Vec::new();
    }
    let mut out = Vec::new();
    for type_header in &unit.structure.type_headers {
        if !type_header.implements {
            continue;
        }
        for m in &unit.structure.method_headers {
            if !m.full_span.within(type_header.body_span)
                || m.is_constructor
                || m.name == "main"
            {
                continue;
            }
            out.push(InjectionSite::new(
                BugCode::R,
                SiteKind::Method,
                vec![Edit::delete(m.full_span)],
            ));
        }
    }
    out
}

/// A `for` loop in canonical array-iteration form:
/// `for ([type] i = 0; i < LENGTH; i++)` where LENGTH is a symbolic
/// length expression (identifier, field path, or call — never a literal).
pub(crate) struct CanonicalLoop {
    /// Token index of the `0` initializer literal.
    pub zero_tok: usize,
    /// Token index of the `<` operator.
    pub lt_tok: usize,
    /// Token index of the last token of the length expression.
    pub bound_end_tok: usize,
}

pub(crate) fn canonical_loops(unit: &SourceUnit) -> Vec<CanonicalLoop> {
    let toks = &unit.tokens;
    let mut out = Vec::new();
    for d in &unit.structure.for_descriptors {
        if d.malformed {
            continue;
        }
        let section = |span: Span| -> Vec<usize> {
            toks.iter()
                .enumerate()
                .filter(|(_, t)| t.kind.is_code() && t.span.within(span))
                .map(|(j, _)| j)
                .collect()
        };
        let init = section(d.init_span);
        let cond = section(d.condition_span);
        let update = section(d.update_span);

        // Init: `[type]* i = 0`.
        if init.len() < 3 {
            continue;
        }
        let (zero, eq, counter_tok) =
            (init[init.len() - 1], init[init.len() - 2], init[init.len() - 3]);
        if !(toks[zero].is(TokenKind::LiteralInt, "0")
            && toks[eq].is(TokenKind::Operator, "=")
            && toks[counter_tok].kind == TokenKind::Identifier)
        {
            continue;
        }
        if !init[..init.len() - 3].iter().all(|&j| is_type_keyword(&toks[j])) {
            continue;
        }
        let counter = toks[counter_tok].text.clone();

        // Condition: `i < LENGTH` with a symbolic length expression.
        if cond.len() < 3
            || !toks[cond[0]].is(TokenKind::Identifier, &counter)
            || !toks[cond[1]].is(TokenKind::Operator, "<")
        {
            continue;
        }
        let atom = &cond[2..];
        if toks[atom[0]].kind != TokenKind::Identifier {
            continue;
        }
        let symbolic = atom.iter().all(|&j| {
            toks[j].kind == TokenKind::Identifier
                || toks[j].is(TokenKind::Punctuation, ".")
                || toks[j].is(TokenKind::Punctuation, "(")
                || toks[j].is(TokenKind::Punctuation, ")")
        });
        if !symbolic {
            continue;
        }

        // Update: `i++`, `++i`, `i += 1`, or `i = i + 1`.
        let texts: Vec<&str> = update.iter().map(|&j| toks[j].text.as_str()).collect();
        let c = counter.as_str();
        let step_one = matches!(
            texts.as_slice(),
            [a, "++"] | ["++", a] if *a == c
        ) || matches!(texts.as_slice(), [a, "+=", "1"] if *a == c)
            || matches!(texts.as_slice(), [a, "=", b, "+", "1"] if *a == c && *b == c);
        if !step_one {
            continue;
        }

        out.push(CanonicalLoop {
            zero_tok: zero,
            lt_tok: cond[1],
            bound_end_tok: *atom.last().unwrap(),
        });
    }
    out
}

/// The four off-by-one rules over canonical loops.
fn off_by_one_sites(unit: &SourceUnit) -> Vec<InjectionSite> {
    let toks = &unit.tokens;
    let mut out = Vec::new();
    for lp in canonical_loops(unit) {
        out.push(InjectionSite::new(
            BugCode::HighBounds,
            SiteKind::LoopCondition,
            vec![Edit::replace(toks[lp.lt_tok].span, "<=")],
        ));
        out.push(InjectionSite::new(
            BugCode::LowBounds,
            SiteKind::LoopInit,
            vec![Edit::replace(toks[lp.zero_tok].span, "-1")],
        ));
        out.push(InjectionSite::new(
            BugCode::LowMiss,
            SiteKind::LoopInit,
            vec![Edit::replace(toks[lp.zero_tok].span, "1")],
        ));
        out.push(InjectionSite::new(
            BugCode::HighMiss,
            SiteKind::LoopCondition,
            vec![Edit::insert(toks[lp.bound_end_tok].span.end, " - 1")],
        ));
    }
    out
}

/// Operator confusion: swaps among `%`, `/`, `==`, `&&`, `||` that no
/// lettered rule claims.
fn theme_u(unit: &SourceUnit) -> Vec<InjectionSite> {
    unit.tokens
        .iter()
        .filter(|t| t.kind == TokenKind::Operator)
        .filter_map(|t| {
            let swapped = match t.text.as_str() {
                "%" => "/",
                "/" => "%",
                "&&" => "||",
                "||" => "&&",
                "==" => "&&",
                _ => return None,
            };
            Some(InjectionSite::new(
                BugCode::U,
                SiteKind::Operator,
                vec![Edit::replace(t.span, swapped)],
            ))
        })
        .collect()
}

/// Picks a name that appears nowhere in the unit and is not a keyword.
fn undeclared_name(unit: &SourceUnit, base: &str) -> String {
    let taken = |name: &str| {
        is_keyword(name, unit.language)
            || unit
                .tokens
                .iter()
                .any(|t| t.kind == TokenKind::Identifier && t.text == name)
    };
    for candidate in [format!("{base}s"), format!("{base}Val"), format!("{base}Tmp")] {
        if !taken(&candidate) {
            return candidate;
        }
    }
    let mut n = 2;
    loop {
        let candidate = format!("{base}{n}");
        if !taken(&candidate) {
            return candidate;
        }
        n += 1;
    }
}

/// Undeclared variable: replace one use of a declared name with a name
/// that is declared nowhere.
fn theme_w(unit: &SourceUnit) -> Vec<InjectionSite> {
    let mut out = Vec::new();
    for decl in &unit.structure.declarations {
        let fresh = undeclared_name(unit, &decl.name);
        let scope = decl
            .method
            .map(|m| unit.structure.method_headers[m].body_span)
            .unwrap_or(Span::new(0, unit.text.len()));
        for tok in &unit.tokens {
            if tok.kind == TokenKind::Identifier
                && tok.text == decl.name
                && tok.span != decl.name_span
                && tok.span.within(scope)
            {
                out.push(InjectionSite::new(
                    BugCode::W,
                    SiteKind::IdentifierUse,
                    vec![Edit::replace(tok.span, fresh.clone())],
                ));
            }
        }
    }
    out
}

/// Wrong literal type: a declaration initializer or return value gets a
/// literal of a kind that contradicts the declared/returned type.
fn theme_t(unit: &SourceUnit) -> Vec<InjectionSite> {
    let toks = &unit.tokens;
    let mut out = Vec::new();
    // Declaration initializers: `[type] x = LITERAL ;`.
    for decl in &unit.structure.declarations {
        let Some(name_idx) = toks.iter().position(|t| t.span == decl.name_span) else {
            continue;
        };
        let Some(eq) = next_code(toks, name_idx + 1) else { continue };
        if !toks[eq].is(TokenKind::Operator, "=") {
            continue;
        }
        let Some(lit) = next_code(toks, eq + 1) else { continue };
        let Some(after) = next_code(toks, lit + 1) else { continue };
        let terminated = toks[after].is(TokenKind::Punctuation, ";")
            || toks[after].is(TokenKind::Punctuation, ",")
            || toks[after].is(TokenKind::Punctuation, ")");
        if !terminated {
            continue;
        }
        let replacement = match toks[lit].kind {
            TokenKind::LiteralInt if NUMERIC_TYPES.contains(&decl.type_text.as_str()) => {
                format!("\"{}\"", toks[lit].text)
            }
            TokenKind::LiteralString if decl.type_text == "String" => "0".to_string(),
            _ => continue,
        };
        out.push(InjectionSite::new(
            BugCode::T,
            SiteKind::Literal,
            vec![Edit::replace(toks[lit].span, replacement)],
        ));
    }
    // Return values: `return LITERAL ;` in a numeric-returning method.
    for m in &unit.structure.method_headers {
        let numeric_return = m
            .return_type_span
            .is_some_and(|s| NUMERIC_TYPES.contains(&s.slice(&unit.text).trim()));
        if !numeric_return {
            continue;
        }
        for (j, tok) in toks.iter().enumerate() {
            if !tok.is(TokenKind::Keyword, "return") || !tok.span.within(m.body_span) {
                continue;
            }
            let Some(lit) = next_code(toks, j + 1) else { continue };
            let Some(semi) = next_code(toks, lit + 1) else { continue };
            if toks[lit].kind == TokenKind::LiteralInt
                && toks[semi].is(TokenKind::Punctuation, ";")
            {
                out.push(InjectionSite::new(
                    BugCode::T,
                    SiteKind::Literal,
                    vec![Edit::replace(toks[lit].span, format!("\"{}\"", toks[lit].text))],
                ));
            }
        }
    }
    out
}

fn default_literal_for(type_text: &str) -> Option<&'static str> {
    Some(match type_text {
        "String" => "\"\"",
        "int" | "long" | "short" | "byte" => "0",
        "double" | "float" => "0.0",
        "boolean" => "false",
        _ => return None,
    })
}

/// Return-statement conflation: `return x;` becomes `return x = <default>;`
/// or a returned boolean literal is inverted.
fn theme_y(unit: &SourceUnit) -> Vec<InjectionSite> {
    let toks = &unit.tokens;
    let mut out = Vec::new();
    for (j, tok) in toks.iter().enumerate() {
        if !tok.is(TokenKind::Keyword, "return") {
            continue;
        }
        let Some(value) = next_code(toks, j + 1) else { continue };
        let Some(semi) = next_code(toks, value + 1) else { continue };
        if !toks[semi].is(TokenKind::Punctuation, ";") {
            continue;
        }
        let value_tok = &toks[value];
        if value_tok.is(TokenKind::Keyword, "true") || value_tok.is(TokenKind::Keyword, "false") {
            let flipped = if value_tok.text == "true" { "false" } else { "true" };
            out.push(InjectionSite::new(
                BugCode::Y,
                SiteKind::ReturnStatement,
                vec![Edit::replace(value_tok.span, flipped)],
            ));
        } else if value_tok.kind == TokenKind::Identifier {
            let method = unit.structure.method_containing(value_tok.span.start);
            let Some(decl) = unit.structure.decl_in_scope(&value_tok.text, method) else {
                continue;
            };
            let Some(default) = default_literal_for(&decl.type_text) else { continue };
            out.push(InjectionSite::new(
                BugCode::Y,
                SiteKind::ReturnStatement,
                vec![Edit::insert(value_tok.span.end, format!(" = {default}"))],
            ));
        }
    }
    out
}

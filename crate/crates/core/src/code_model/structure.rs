//! Shallow structural indexing over token streams.
//!
//! The index records just enough shape to drive site discovery and
//! classification: bracket pairs, `if`/`for`/`while` headers, `for`
//! descriptors, method headers, type headers, statement spans, and a flat
//! declaration table (fields/globals, parameters, locals). It is built by
//! pattern scanning, not parsing, so it also works on code that is broken
//! in the ways the bug rules break it (lenient mode).

// Scans compare token positions against bracket-pair endpoints, so index
// loops are the clearer form here.
#![allow(clippy::needless_range_loop)]

use super::{CodeModelError, Language, Span, Token, TokenKind};

/// Bracket classes tracked by the matcher.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BracketKind {
    Paren,
    Brace,
    Square,
}

/// A matched open/close bracket pair (token indices plus byte spans).
#[derive(Debug, Clone, Copy)]
pub struct BracketPair {
    pub kind: BracketKind,
    pub open: usize,
    pub close: usize,
    pub open_span: Span,
    pub close_span: Span,
}

impl BracketPair {
    /// The byte span strictly between the brackets.
    pub fn interior(&self) -> Span {
        Span::new(self.open_span.end, self.close_span.start)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlKind {
    If,
    For,
    While,
}

/// An `if (...)`, `for (...)`, or `while (...)` header.
#[derive(Debug, Clone, Copy)]
pub struct ControlHeader {
    pub kind: ControlKind,
    /// Token index of the keyword.
    pub keyword: usize,
    /// Token indices of the header parentheses.
    pub open: usize,
    pub close: usize,
    /// Keyword start through closing parenthesis end.
    pub header_span: Span,
    /// The condition text: the parenthesized interior for `if`/`while`,
    /// the middle section for a well-formed `for`, empty otherwise.
    pub condition_span: Span,
}

/// The three sections of a `for` header.
#[derive(Debug, Clone)]
pub struct ForDescriptor {
    /// Index into [`StructureIndex::control_headers`].
    pub header: usize,
    pub init_span: Span,
    pub condition_span: Span,
    pub update_span: Span,
    /// Token indices of the top-level `;` separators found in the header.
    pub semis: Vec<usize>,
    /// True when the header does not have exactly two separators.
    pub malformed: bool,
}

/// A method (or function) header with its body.
#[derive(Debug, Clone)]
pub struct MethodHeader {
    pub name: String,
    pub name_token: usize,
    /// Leading modifiers/return type through the closing parameter paren.
    pub signature_span: Span,
    /// Span of the return type, absent for constructors.
    pub return_type_span: Option<Span>,
    /// Token indices of the parameter parentheses.
    pub open: usize,
    pub close: usize,
    /// Token indices of the body braces.
    pub body_open: usize,
    pub body_close: usize,
    pub body_span: Span,
    /// Signature start through body close.
    pub full_span: Span,
    pub param_spans: Vec<Span>,
    pub is_constructor: bool,
}

/// A `class`/`interface`/`struct` declaration with its body extent.
#[derive(Debug, Clone)]
pub struct TypeHeader {
    pub name: String,
    /// True when the declaration carries an `implements` clause.
    pub implements: bool,
    pub body_span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeclKind {
    Field,
    Param,
    Local,
}

/// One declared name with its (textual) type.
#[derive(Debug, Clone)]
pub struct Declaration {
    pub name: String,
    /// Exact source text of the type, e.g. `int[]` or `String`.
    pub type_text: String,
    pub name_span: Span,
    /// Span of the type text in the source.
    pub type_span: Span,
    pub kind: DeclKind,
    /// Owning method (index into `method_headers`), `None` for
    /// fields/globals visible everywhere.
    pub method: Option<usize>,
}

/// The full shallow index of a unit.
#[derive(Debug, Clone, Default)]
pub struct StructureIndex {
    pub bracket_pairs: Vec<BracketPair>,
    pub control_headers: Vec<ControlHeader>,
    pub for_descriptors: Vec<ForDescriptor>,
    pub method_headers: Vec<MethodHeader>,
    pub type_headers: Vec<TypeHeader>,
    /// Statement spans: runs of code ending in a top-level `;`.
    pub statements: Vec<Span>,
    pub declarations: Vec<Declaration>,
}

impl StructureIndex {
    /// The bracket pair opened by the token at `open`.
    pub fn pair_opened_at(&self, open: usize) -> Option<&BracketPair> {
        self.bracket_pairs.iter().find(|p| p.open == open)
    }

    /// All condition spans (if/while interiors, for condition sections).
    pub fn condition_spans(&self) -> Vec<Span> {
        self.control_headers
            .iter()
            .map(|h| h.condition_span)
            .filter(|s| !s.is_empty())
            .collect()
    }

    /// True when `offset` lies inside some condition span.
    pub fn in_condition(&self, offset: usize) -> bool {
        self.condition_spans().iter().any(|s| offset >= s.start && offset < s.end)
    }

    /// Index of the method whose extent contains `offset`.
    pub fn method_containing(&self, offset: usize) -> Option<usize> {
        self.method_headers
            .iter()
            .position(|m| offset >= m.full_span.start && offset < m.full_span.end)
    }

    /// Looks up a declaration visible inside method `method` (locals and
    /// parameters first, then fields/globals).
    pub fn decl_in_scope(&self, name: &str, method: Option<usize>) -> Option<&Declaration> {
        if let Some(m) = method {
            if let Some(d) = self
                .declarations
                .iter()
                .find(|d| d.method == Some(m) && d.name == name)
            {
                return Some(d);
            }
        }
        self.declarations.iter().find(|d| d.method.is_none() && d.name == name)
    }

    /// True when `name` names a method or a declared type in this unit.
    pub fn is_callable_or_type(&self, name: &str) -> bool {
        self.method_headers.iter().any(|m| m.name == name)
            || self.type_headers.iter().any(|t| t.name == name)
    }
}

/// Index of the next code (non-whitespace, non-comment) token at or after `i`.
pub(crate) fn next_code(tokens: &[Token], i: usize) -> Option<usize> {
    (i..tokens.len()).find(|&j| tokens[j].kind.is_code())
}

/// Index of the closest code token strictly before `i`.
pub(crate) fn prev_code(tokens: &[Token], i: usize) -> Option<usize> {
    (0..i).rev().find(|&j| tokens[j].kind.is_code())
}

const MODIFIER_KEYWORDS: &[&str] = &[
    "public", "private", "protected", "static", "final", "abstract", "synchronized", "native",
    "strictfp", "const", "extern", "inline", "register", "volatile", "transient",
];

const TYPE_KEYWORDS: &[&str] = &[
    "void", "boolean", "byte", "char", "short", "int", "long", "float", "double", "signed",
    "unsigned", "struct",
];

pub(crate) fn is_type_keyword(token: &Token) -> bool {
    token.kind == TokenKind::Keyword && TYPE_KEYWORDS.contains(&token.text.as_str())
}

fn is_modifier(token: &Token) -> bool {
    token.kind == TokenKind::Keyword && MODIFIER_KEYWORDS.contains(&token.text.as_str())
}

/// Builds the structural index for a token stream.
///
/// In strict mode unmatched brackets produce
/// [`CodeModelError::UnbalancedBrackets`]; in lenient mode they are
/// dropped and indexing continues (needed for deliberately broken code).
pub fn index_structure(
    tokens: &[Token],
    language: Language,
    strict: bool,
) -> Result<StructureIndex, CodeModelError> {
    let mut index = StructureIndex::default();
    match_brackets(tokens, strict, &mut index)?;
    find_control_headers(tokens, &mut index);
    describe_for_headers(tokens, &mut index);
    find_method_headers(tokens, &mut index);
    find_type_headers(tokens, language, &mut index);
    find_statements(tokens, &mut index);
    collect_declarations(tokens, &mut index);
    Ok(index)
}

fn bracket_kind(text: &str) -> Option<(BracketKind, bool)> {
    match text {
        "(" => Some((BracketKind::Paren, true)),
        ")" => Some((BracketKind::Paren, false)),
        "{" => Some((BracketKind::Brace, true)),
        "}" => Some((BracketKind::Brace, false)),
        "[" => Some((BracketKind::Square, true)),
        "]" => Some((BracketKind::Square, false)),
        _ => None,
    }
}

fn match_brackets(
    tokens: &[Token],
    strict: bool,
    index: &mut StructureIndex,
) -> Result<(), CodeModelError> {
    let mut stack: Vec<(BracketKind, usize)> = Vec::new();
    for (i, tok) in tokens.iter().enumerate() {
        if tok.kind != TokenKind::Punctuation {
            continue;
        }
        let Some((kind, is_open)) = bracket_kind(&tok.text) else { continue };
        if is_open {
            stack.push((kind, i));
            continue;
        }
        match stack.last().copied() {
            Some((top_kind, open)) if top_kind == kind => {
                stack.pop();
                index.bracket_pairs.push(BracketPair {
                    kind,
                    open,
                    close: i,
                    open_span: tokens[open].span,
                    close_span: tok.span,
                });
            }
            _ if strict => {
                return Err(CodeModelError::UnbalancedBrackets {
                    detail: format!("unmatched `{}`", tok.text),
                    offset: tok.span.start,
                });
            }
            _ => {}
        }
    }
    if strict {
        if let Some((_, open)) = stack.first() {
            return Err(CodeModelError::UnbalancedBrackets {
                detail: format!("`{}` is never closed", tokens[*open].text),
                offset: tokens[*open].span.start,
            });
        }
    }
    index.bracket_pairs.sort_by_key(|p| p.open);
    Ok(())
}

fn find_control_headers(tokens: &[Token], index: &mut StructureIndex) {
    for (i, tok) in tokens.iter().enumerate() {
        if tok.kind != TokenKind::Keyword {
            continue;
        }
        let kind = match tok.text.as_str() {
            "if" => ControlKind::If,
            "for" => ControlKind::For,
            "while" => ControlKind::While,
            _ => continue,
        };
        let Some(open) = next_code(tokens, i + 1) else { continue };
        if !tokens[open].is(TokenKind::Punctuation, "(") {
            continue;
        }
        let Some(pair) = index.pair_opened_at(open).copied() else { continue };
        let condition_span = match kind {
            // The for condition section is filled in by the descriptor pass.
            ControlKind::For => Span::new(pair.close_span.start, pair.close_span.start),
            _ => pair.interior(),
        };
        index.control_headers.push(ControlHeader {
            kind,
            keyword: i,
            open,
            close: pair.close,
            header_span: Span::new(tok.span.start, pair.close_span.end),
            condition_span,
        });
    }
}

fn describe_for_headers(tokens: &[Token], index: &mut StructureIndex) {
    let headers: Vec<(usize, ControlHeader)> = index
        .control_headers
        .iter()
        .enumerate()
        .filter(|(_, h)| h.kind == ControlKind::For)
        .map(|(i, h)| (i, *h))
        .collect();
    for (header_idx, header) in headers {
        let mut depth = 0usize;
        let mut semis = Vec::new();
        for j in header.open + 1..header.close {
            let tok = &tokens[j];
            if tok.kind != TokenKind::Punctuation {
                continue;
            }
            match tok.text.as_str() {
                "(" | "[" | "{" => depth += 1,
                ")" | "]" | "}" => depth = depth.saturating_sub(1),
                ";" if depth == 0 => semis.push(j),
                _ => {}
            }
        }
        let interior = Span::new(tokens[header.open].span.end, tokens[header.close].span.start);
        let descriptor = if semis.len() == 2 {
            let d = ForDescriptor {
                header: header_idx,
                init_span: Span::new(interior.start, tokens[semis[0]].span.start),
                condition_span: Span::new(tokens[semis[0]].span.end, tokens[semis[1]].span.start),
                update_span: Span::new(tokens[semis[1]].span.end, interior.end),
                semis,
                malformed: false,
            };
            index.control_headers[header_idx].condition_span = d.condition_span;
            d
        } else {
            ForDescriptor {
                header: header_idx,
                init_span: interior,
                condition_span: Span::new(interior.end, interior.end),
                update_span: Span::new(interior.end, interior.end),
                semis,
                malformed: true,
            }
        };
        index.for_descriptors.push(descriptor);
    }
}

fn find_method_headers(tokens: &[Token], index: &mut StructureIndex) {
    let pairs: Vec<BracketPair> = index
        .bracket_pairs
        .iter()
        .copied()
        .filter(|p| p.kind == BracketKind::Paren)
        .collect();
    for pair in pairs {
        let Some(name_tok) = prev_code(tokens, pair.open) else { continue };
        if tokens[name_tok].kind != TokenKind::Identifier {
            continue;
        }
        if let Some(before) = prev_code(tokens, name_tok) {
            if tokens[before].is(TokenKind::Punctuation, ".")
                || tokens[before].is(TokenKind::Keyword, "new")
            {
                continue;
            }
        }
        let Some(body_open) = next_code(tokens, pair.close + 1) else { continue };
        if !tokens[body_open].is(TokenKind::Punctuation, "{") {
            continue;
        }
        let Some(body) = index.pair_opened_at(body_open).copied() else { continue };

        let (sig_start_tok, return_type_span) = signature_prefix(tokens, name_tok);
        let name = tokens[name_tok].text.clone();
        let param_spans = split_top_level(tokens, &pair, ",");
        index.method_headers.push(MethodHeader {
            name,
            name_token: name_tok,
            signature_span: Span::new(tokens[sig_start_tok].span.start, pair.close_span.end),
            return_type_span,
            open: pair.open,
            close: pair.close,
            body_open,
            body_close: body.close,
            body_span: Span::new(body.open_span.start, body.close_span.end),
            full_span: Span::new(tokens[sig_start_tok].span.start, body.close_span.end),
            param_spans,
            is_constructor: return_type_span.is_none(),
        });
    }
    index.method_headers.sort_by_key(|m| m.full_span.start);
}

/// Walks backwards from a method name over modifiers and the return type.
/// Returns the first token of the signature and the return-type span.
fn signature_prefix(tokens: &[Token], name_tok: usize) -> (usize, Option<Span>) {
    let mut included: Vec<usize> = Vec::new();
    let mut cursor = name_tok;
    let mut angle_depth = 0usize;
    while let Some(prev) = prev_code(tokens, cursor) {
        let tok = &tokens[prev];
        let take = if angle_depth > 0 {
            // Inside generic angle brackets: take everything until `<`.
            if tok.is(TokenKind::Operator, "<") {
                angle_depth -= 1;
            } else if tok.is(TokenKind::Operator, ">") {
                angle_depth += 1;
            }
            true
        } else if tok.is(TokenKind::Operator, ">") {
            angle_depth += 1;
            true
        } else {
            matches!(tok.kind, TokenKind::Identifier | TokenKind::Keyword)
                && (tok.kind == TokenKind::Identifier || is_modifier(tok) || is_type_keyword(tok))
                || tok.is(TokenKind::Punctuation, "[")
                || tok.is(TokenKind::Punctuation, "]")
        };
        if !take {
            break;
        }
        included.push(prev);
        cursor = prev;
    }
    if included.is_empty() {
        return (name_tok, None);
    }
    // `included` runs backwards from the name; find the type chunk: the
    // contiguous non-modifier tail right before the name.
    let mut type_tokens: Vec<usize> = Vec::new();
    for &idx in &included {
        let tok = &tokens[idx];
        if is_modifier(tok) {
            break;
        }
        type_tokens.push(idx);
    }
    let sig_start = *included.last().expect("non-empty");
    let return_type_span = if type_tokens.is_empty() {
        None
    } else {
        let first = *type_tokens.last().unwrap();
        let last = type_tokens[0];
        Some(Span::new(tokens[first].span.start, tokens[last].span.end))
    };
    (sig_start, return_type_span)
}

/// Splits a bracket pair's interior at top-level occurrences of `sep`,
/// returning the trimmed-by-token piece spans (empty pieces skipped).
pub(crate) fn split_top_level(tokens: &[Token], pair: &BracketPair, sep: &str) -> Vec<Span> {
    let mut pieces = Vec::new();
    let mut depth = 0usize;
    let mut piece_start = tokens[pair.open].span.end;
    for j in pair.open + 1..pair.close {
        let tok = &tokens[j];
        if tok.kind == TokenKind::Punctuation {
            match tok.text.as_str() {
                "(" | "[" | "{" => depth += 1,
                ")" | "]" | "}" => depth = depth.saturating_sub(1),
                t if t == sep && depth == 0 => {
                    pieces.push(Span::new(piece_start, tok.span.start));
                    piece_start = tok.span.end;
                    continue;
                }
                _ => {}
            }
        }
    }
    pieces.push(Span::new(piece_start, tokens[pair.close].span.start));
    pieces.retain(|s| !s.is_empty());
    pieces
}

fn find_type_headers(tokens: &[Token], language: Language, index: &mut StructureIndex) {
    let type_kw = match language {
        Language::JavaSubset => &["class", "interface"][..],
        Language::CSubset => &["struct", "union"][..],
    };
    for (i, tok) in tokens.iter().enumerate() {
        if tok.kind != TokenKind::Keyword || !type_kw.contains(&tok.text.as_str()) {
            continue;
        }
        let Some(name_idx) = next_code(tokens, i + 1) else { continue };
        if tokens[name_idx].kind != TokenKind::Identifier {
            continue;
        }
        // Scan ahead to the body brace, noting an implements clause.
        let mut implements = false;
        let mut body = None;
        for j in name_idx + 1..tokens.len() {
            let t = &tokens[j];
            if t.is(TokenKind::Keyword, "implements") {
                implements = true;
            }
            if t.is(TokenKind::Punctuation, "{") {
                body = index.pair_opened_at(j).copied();
                break;
            }
            if t.is(TokenKind::Punctuation, ";") {
                break;
            }
        }
        let Some(body) = body else { continue };
        index.type_headers.push(TypeHeader {
            name: tokens[name_idx].text.clone(),
            implements,
            body_span: Span::new(body.open_span.start, body.close_span.end),
        });
    }
}

fn find_statements(tokens: &[Token], index: &mut StructureIndex) {
    let mut depth = 0usize;
    let mut start: Option<usize> = None;
    for tok in tokens.iter() {
        if !tok.kind.is_code() {
            continue;
        }
        if tok.kind == TokenKind::Punctuation {
            match tok.text.as_str() {
                "(" | "[" => {
                    depth += 1;
                    start.get_or_insert(tok.span.start);
                    continue;
                }
                ")" | "]" => {
                    depth = depth.saturating_sub(1);
                    continue;
                }
                "{" | "}" => {
                    start = None;
                    continue;
                }
                ";" if depth == 0 => {
                    if let Some(s) = start.take() {
                        index.statements.push(Span::new(s, tok.span.end));
                    }
                    continue;
                }
                _ => {}
            }
        }
        start.get_or_insert(tok.span.start);
    }
}

fn collect_declarations(tokens: &[Token], index: &mut StructureIndex) {
    // Parameters first.
    let methods = index.method_headers.clone();
    for (m_idx, method) in methods.iter().enumerate() {
        for param in &method.param_spans {
            if let Some(decl) = parse_param(tokens, *param) {
                index.declarations.push(Declaration {
                    method: Some(m_idx),
                    kind: DeclKind::Param,
                    ..decl
                });
            }
        }
    }
    // Fields/globals and locals by position.
    let mut i = 0;
    while i < tokens.len() {
        if let Some((decl, consumed_until)) = parse_decl_at(tokens, i) {
            let method = methods
                .iter()
                .position(|m| decl.name_span.start >= m.body_span.start
                    && decl.name_span.end <= m.body_span.end);
            let kind = if method.is_some() { DeclKind::Local } else { DeclKind::Field };
            // Skip anything inside a signature (params already collected).
            let in_signature = methods.iter().any(|m| {
                decl.name_span.start >= m.signature_span.start
                    && decl.name_span.end <= m.signature_span.end
            });
            if !in_signature {
                index.declarations.push(Declaration { method, kind, ..decl });
            }
            i = consumed_until;
        } else {
            i += 1;
        }
    }
}

fn parse_param(tokens: &[Token], span: Span) -> Option<Declaration> {
    let mut code: Vec<usize> = tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| t.kind.is_code() && t.span.within(span))
        .map(|(i, _)| i)
        .collect();
    // Leading modifiers (e.g. `final`) are not part of the type.
    while code.first().is_some_and(|&i| is_modifier(&tokens[i])) {
        code.remove(0);
    }
    // The parameter name is the last identifier; everything before is type.
    let name_pos = code.iter().rposition(|&i| tokens[i].kind == TokenKind::Identifier)?;
    let name_idx = code[name_pos];
    if name_pos == 0 {
        return None; // bare `void` or a lone name; nothing declared
    }
    let type_span = Span::new(
        tokens[code[0]].span.start,
        tokens[code[name_pos - 1]].span.end,
    );
    Some(Declaration {
        name: tokens[name_idx].text.clone(),
        type_text: render_range(tokens, type_span.start, type_span.end),
        name_span: tokens[name_idx].span,
        type_span,
        kind: DeclKind::Param,
        method: None,
    })
}

/// Tries to read `TYPE ([])* NAME` at code position `i` (skipping leading
/// modifiers), where the declarator is followed by `=`, `;`, `,` or `)`.
/// Returns the declaration and the token index right after NAME.
fn parse_decl_at(tokens: &[Token], i: usize) -> Option<(Declaration, usize)> {
    let tok = &tokens[i];
    if !tok.kind.is_code() {
        return None;
    }
    let mut cursor = i;
    // Leading modifiers (public, static, const, ...).
    let mut saw_modifier = false;
    while is_modifier(&tokens[cursor]) {
        saw_modifier = true;
        cursor = next_code(tokens, cursor + 1)?;
    }
    // The type: a type keyword, or an uppercase-initial identifier.
    let type_start = cursor;
    let type_tok = &tokens[cursor];
    let looks_like_type = is_type_keyword(type_tok)
        || (type_tok.kind == TokenKind::Identifier
            && type_tok.text.chars().next().is_some_and(|c| c.is_uppercase()));
    if !looks_like_type {
        return None;
    }
    // `struct Foo x` style: a type keyword followed by a tag identifier.
    let mut type_end_tok = cursor;
    let mut after = next_code(tokens, cursor + 1)?;
    if type_tok.is(TokenKind::Keyword, "struct") && tokens[after].kind == TokenKind::Identifier {
        type_end_tok = after;
        after = next_code(tokens, after + 1)?;
    }
    // Optional generic arguments `<...>` after a class type.
    if tokens[after].is(TokenKind::Operator, "<") {
        let mut depth = 1usize;
        let mut j = after + 1;
        while j < tokens.len() && depth > 0 {
            if tokens[j].is(TokenKind::Operator, "<") {
                depth += 1;
            } else if tokens[j].is(TokenKind::Operator, ">") {
                depth -= 1;
            }
            j += 1;
        }
        if depth != 0 {
            return None;
        }
        type_end_tok = j - 1;
        after = next_code(tokens, j)?;
    }
    // Optional empty array suffix on the type (`int[] a`).
    while tokens[after].is(TokenKind::Punctuation, "[") {
        let close = next_code(tokens, after + 1)?;
        if !tokens[close].is(TokenKind::Punctuation, "]") {
            return None;
        }
        type_end_tok = close;
        after = next_code(tokens, close + 1)?;
    }
    // The declared name.
    if tokens[after].kind != TokenKind::Identifier {
        return None;
    }
    let name_tok = after;
    let mut terminator = next_code(tokens, name_tok + 1)?;
    // C-style array suffix with a size (`int values[5]`).
    while tokens[terminator].is(TokenKind::Punctuation, "[") {
        let mut depth = 1usize;
        let mut j = terminator + 1;
        while j < tokens.len() && depth > 0 {
            if tokens[j].is(TokenKind::Punctuation, "[") {
                depth += 1;
            } else if tokens[j].is(TokenKind::Punctuation, "]") {
                depth -= 1;
            }
            j += 1;
        }
        if depth != 0 {
            return None;
        }
        terminator = next_code(tokens, j)?;
    }
    let term = &tokens[terminator];
    let is_decl = term.is(TokenKind::Operator, "=")
        || term.is(TokenKind::Punctuation, ";")
        || term.is(TokenKind::Punctuation, ",")
        || term.is(TokenKind::Punctuation, ")");
    if !is_decl {
        return None;
    }
    let _ = saw_modifier;
    let type_span = Span::new(
        tokens[type_start].span.start,
        tokens[type_end_tok].span.end,
    );
    Some((
        Declaration {
            name: tokens[name_tok].text.clone(),
            type_text: render_range(tokens, type_span.start, type_span.end),
            name_span: tokens[name_tok].span,
            type_span,
            kind: DeclKind::Local,
            method: None,
        },
        name_tok + 1,
    ))
}

/// Exact source text between two offsets, reconstructed from tokens
/// (whitespace included) and trimmed.
fn render_range(tokens: &[Token], start: usize, end: usize) -> String {
    let mut out = String::new();
    for t in tokens {
        if t.span.start >= start && t.span.end <= end {
            out.push_str(&t.text);
        }
    }
    out.trim().to_string()
}

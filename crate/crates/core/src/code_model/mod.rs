//! Source text, tokens, and structural indexing.
//!
//! The tokenizer is *lossless*: every byte of the input, including
//! whitespace and comments, lands in exactly one token, so
//! [`render`]`(`[`tokenize`]`(text)) == text` for any input. That property
//! is what lets the injector splice mutations by span and lets the
//! classifier diff token streams without ever re-formatting code.
//!
//! Structural indexing is deliberately shallow: bracket pairs, control
//! headers, `for` descriptors, method headers, statement spans, and a flat
//! per-method symbol table. There is no real parser and no name
//! resolution; mutated (intentionally broken) code must still be
//! indexable, so everything here is pattern-driven and total in lenient
//! mode.

mod sites;
mod structure;
mod tokenize;

pub use sites::{find_sites, Edit, InjectionSite, SiteKind};
pub(crate) use sites::rhs_is_bare_call;
pub(crate) use structure::is_type_keyword;
pub use structure::{
    index_structure, BracketKind, BracketPair, ControlHeader, ControlKind, Declaration, DeclKind,
    ForDescriptor, MethodHeader, StructureIndex, TypeHeader,
};
pub use tokenize::{render, tokenize};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while building a [`SourceUnit`] in strict mode or
/// looking up injection sites.
#[derive(Debug, Error)]
pub enum CodeModelError {
    /// A bracket was closed without a matching opener, or left open.
    #[error("unbalanced brackets: {detail} at byte {offset}")]
    UnbalancedBrackets { detail: String, offset: usize },
    /// The bug code has no injection rule (`X`, `Refusal`, `None`).
    #[error("no injection rule for bug code `{code}`")]
    UnknownBugCode { code: String },
}

/// The two input languages the toolkit understands.
///
/// Each is a pragmatic subset: enough of Java/C to tokenize and index the
/// kinds of short teaching programs the pipeline operates on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Language {
    JavaSubset,
    CSubset,
}

impl Language {
    /// Guesses a language from a file name; defaults to the Java subset.
    pub fn from_path(path: &str) -> Language {
        if path.ends_with(".c") || path.ends_with(".h") {
            Language::CSubset
        } else {
            Language::JavaSubset
        }
    }
}

/// A half-open byte range `[start, end)` into a unit's text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Span {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    /// True when `self` lies entirely inside `other`.
    pub fn within(&self, other: Span) -> bool {
        self.start >= other.start && self.end <= other.end
    }

    /// True when the two spans share at least one byte.
    pub fn overlaps(&self, other: Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn slice<'t>(&self, text: &'t str) -> &'t str {
        &text[self.start..self.end]
    }
}

/// Token categories. Every byte of input belongs to exactly one token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TokenKind {
    Keyword,
    Identifier,
    Operator,
    Punctuation,
    LiteralInt,
    LiteralString,
    LiteralChar,
    Comment,
    Whitespace,
}

impl TokenKind {
    /// Tokens that carry code meaning (everything but whitespace/comments).
    pub fn is_code(self) -> bool {
        !matches!(self, TokenKind::Whitespace | TokenKind::Comment)
    }
}

/// One lexed token: kind, exact text, and location.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: Span,
}

impl Token {
    pub fn is(&self, kind: TokenKind, text: &str) -> bool {
        self.kind == kind && self.text == text
    }
}

/// A tokenized, structurally indexed piece of source code.
#[derive(Debug, Clone)]
pub struct SourceUnit {
    /// Stable identifier (usually the file name); recorded in corpora.
    pub id: String,
    pub language: Language,
    pub text: String,
    pub tokens: Vec<Token>,
    pub structure: StructureIndex,
}

impl SourceUnit {
    /// Tokenizes and indexes `text`, rejecting unbalanced brackets.
    ///
    /// Use this for trusted, well-formed originals. Mutated or
    /// model-produced code should go through [`SourceUnit::parse_lenient`],
    /// since several bug rules break bracket balance on purpose.
    pub fn parse(
        id: impl Into<String>,
        language: Language,
        text: impl Into<String>,
    ) -> Result<SourceUnit, CodeModelError> {
        let id = id.into();
        let text = text.into();
        let tokens = tokenize(&text, language);
        let structure = index_structure(&tokens, language, true)?;
        Ok(SourceUnit { id, language, text, tokens, structure })
    }

    /// Tokenizes and indexes `text`, tolerating structural damage.
    ///
    /// Never fails: unmatched brackets are skipped, malformed `for`
    /// headers are flagged rather than rejected.
    pub fn parse_lenient(
        id: impl Into<String>,
        language: Language,
        text: impl Into<String>,
    ) -> SourceUnit {
        let id = id.into();
        let text = text.into();
        let tokens = tokenize(&text, language);
        let structure = index_structure(&tokens, language, false)
            .expect("lenient indexing is total");
        SourceUnit { id, language, text, tokens, structure }
    }

    /// The code tokens (no whitespace, no comments), as `(index, &Token)`.
    pub fn code_tokens(&self) -> impl Iterator<Item = (usize, &Token)> {
        self.tokens.iter().enumerate().filter(|(_, t)| t.kind.is_code())
    }

    /// Concatenates the token texts; always byte-identical to `text`.
    pub fn render(&self) -> String {
        tokenize::render(&self.tokens)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn span_relations() {
        let a = Span::new(2, 6);
        assert!(Span::new(3, 5).within(a));
        assert!(!Span::new(1, 5).within(a));
        assert!(a.overlaps(Span::new(5, 9)));
        assert!(!a.overlaps(Span::new(6, 9)));
        assert_eq!(a.slice("abcdefgh"), "cdef");
    }

    #[test]
    fn language_from_path() {
        assert_eq!(Language::from_path("sum_array.c"), Language::CSubset);
        assert_eq!(Language::from_path("GradeBook.java"), Language::JavaSubset);
        assert_eq!(Language::from_path("snippet"), Language::JavaSubset);
    }
}

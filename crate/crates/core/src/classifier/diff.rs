//! Code-token window diff between an original and a mutated unit.

use crate::code_model::{SourceUnit, Span, Token};

/// The minimal differing window between two code-token streams
/// (whitespace and comments ignored), found by trimming the longest
/// common prefix and suffix.
#[derive(Debug)]
pub struct TokenDiff<'a> {
    /// Original-side tokens in the window.
    pub removed: Vec<&'a Token>,
    /// Mutated-side tokens in the window.
    pub inserted: Vec<&'a Token>,
    /// Original token indices of the window (token-stream indices, not
    /// code-only indices); `removed` are the code tokens among them.
    pub removed_indices: Vec<usize>,
    /// Byte region of the window in the original (empty at the insertion
    /// point for pure insertions).
    pub original_span: Span,
    /// Byte region of the window in the mutated text.
    pub mutated_span: Span,
    /// Original token index of the last common code token before the
    /// window, if any.
    pub anchor_before: Option<usize>,
}

impl TokenDiff<'_> {
    pub fn is_substitution(&self) -> bool {
        !self.removed.is_empty() && !self.inserted.is_empty()
    }

    pub fn is_insertion(&self) -> bool {
        self.removed.is_empty() && !self.inserted.is_empty()
    }

    pub fn is_deletion(&self) -> bool {
        !self.removed.is_empty() && self.inserted.is_empty()
    }

    /// Single-token substitution, as `(removed, inserted)`.
    pub fn single_substitution(&self) -> Option<(&Token, &Token)> {
        match (self.removed.as_slice(), self.inserted.as_slice()) {
            ([r], [i]) => Some((r, i)),
            _ => None,
        }
    }

    /// Positions where same-length windows disagree.
    pub fn differing_positions(&self) -> Vec<usize> {
        self.removed
            .iter()
            .zip(&self.inserted)
            .enumerate()
            .filter(|(_, (r, i))| !same_token(r, i))
            .map(|(k, _)| k)
            .collect()
    }
}

pub fn same_token(a: &Token, b: &Token) -> bool {
    a.kind == b.kind && a.text == b.text
}

/// Computes the token window diff between two units.
///
/// Returns `None` when the code-token streams are identical (formatting-
/// or comment-only difference).
pub fn token_window_diff<'a>(
    original: &'a SourceUnit,
    mutated: &'a SourceUnit,
) -> Option<TokenDiff<'a>> {
    let orig: Vec<(usize, &Token)> = original.code_tokens().collect();
    let mutd: Vec<(usize, &Token)> = mutated.code_tokens().collect();

    let mut prefix = 0;
    while prefix < orig.len()
        && prefix < mutd.len()
        && same_token(orig[prefix].1, mutd[prefix].1)
    {
        prefix += 1;
    }
    let limit = orig.len().min(mutd.len()) - prefix;
    let mut suffix = 0;
    while suffix < limit
        && same_token(
            orig[orig.len() - 1 - suffix].1,
            mutd[mutd.len() - 1 - suffix].1,
        )
    {
        suffix += 1;
    }
    if prefix == orig.len() && prefix == mutd.len() {
        return None;
    }

    let removed: Vec<&Token> = orig[prefix..orig.len() - suffix].iter().map(|(_, t)| *t).collect();
    let inserted: Vec<&Token> =
        mutd[prefix..mutd.len() - suffix].iter().map(|(_, t)| *t).collect();
    let removed_indices: Vec<usize> =
        orig[prefix..orig.len() - suffix].iter().map(|(i, _)| *i).collect();

    let original_span = if removed.is_empty() {
        let at = if prefix > 0 {
            orig[prefix - 1].1.span.end
        } else {
            0
        };
        Span::new(at, at)
    } else {
        Span::new(removed[0].span.start, removed.last().unwrap().span.end)
    };
    let mutated_span = if inserted.is_empty() {
        let at = if prefix > 0 {
            mutd[prefix - 1].1.span.end
        } else {
            0
        };
        Span::new(at, at)
    } else {
        Span::new(inserted[0].span.start, inserted.last().unwrap().span.end)
    };

    Some(TokenDiff {
        removed,
        inserted,
        removed_indices,
        original_span,
        mutated_span,
        anchor_before: if prefix > 0 { Some(orig[prefix - 1].0) } else { Option::None },
    })
}

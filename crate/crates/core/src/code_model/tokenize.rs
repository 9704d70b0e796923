//! Lossless tokenization for the Java and C subsets.

use super::{Language, Span, Token, TokenKind};

const JAVA_KEYWORDS: &[&str] = &[
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class", "const",
    "continue", "default", "do", "double", "else", "enum", "extends", "false", "final", "finally",
    "float", "for", "goto", "if", "implements", "import", "instanceof", "int", "interface",
    "long", "native", "new", "null", "package", "private", "protected", "public", "return",
    "short", "static", "strictfp", "super", "switch", "synchronized", "this", "throw", "throws",
    "transient", "true", "try", "void", "volatile", "while",
];

const C_KEYWORDS: &[&str] = &[
    "auto", "break", "case", "char", "const", "continue", "default", "do", "double", "else",
    "enum", "extern", "float", "for", "goto", "if", "inline", "int", "long", "register",
    "restrict", "return", "short", "signed", "sizeof", "static", "struct", "switch", "typedef",
    "union", "unsigned", "void", "volatile", "while",
];

/// Multi-character operators, longest first so maximal munch works.
const OPERATORS: &[&str] = &[
    ">>>=", ">>>", "<<=", ">>=", "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=", "-=",
    "*=", "/=", "%=", "&=", "|=", "^=", "->", "<<", ">>",
];

const SINGLE_OPERATORS: &[char] = &['+', '-', '*', '/', '%', '=', '<', '>', '!', '&', '|', '^', '~', '?', ':'];

const PUNCTUATION: &[char] = &['(', ')', '{', '}', '[', ']', ';', ',', '.'];

pub(crate) fn is_keyword(word: &str, language: Language) -> bool {
    match language {
        Language::JavaSubset => JAVA_KEYWORDS.contains(&word),
        Language::CSubset => C_KEYWORDS.contains(&word),
    }
}

fn is_ident_start(c: char) -> bool {
    c == '_' || c == '$' || c.is_alphabetic()
}

fn is_ident_continue(c: char) -> bool {
    c == '_' || c == '$' || c.is_alphanumeric()
}

/// Splits `text` into tokens covering every byte, in order.
///
/// Total: any input produces a token stream, with characters outside the
/// subset grammar emitted as single-character punctuation.
pub fn tokenize(text: &str, language: Language) -> Vec<Token> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0usize;

    let push = |tokens: &mut Vec<Token>, kind: TokenKind, start: usize, end: usize| {
        tokens.push(Token { kind, text: text[start..end].to_string(), span: Span::new(start, end) });
    };

    while pos < bytes.len() {
        let start = pos;
        let c = text[pos..].chars().next().expect("pos is on a char boundary");

        // Whitespace runs collapse into one token.
        if c.is_whitespace() {
            while pos < bytes.len() {
                let ch = text[pos..].chars().next().unwrap();
                if !ch.is_whitespace() {
                    break;
                }
                pos += ch.len_utf8();
            }
            push(&mut tokens, TokenKind::Whitespace, start, pos);
            continue;
        }

        // Comments: // to end of line, /* to the matching */ (or EOF).
        if bytes[pos] == b'/' && pos + 1 < bytes.len() && bytes[pos + 1] == b'/' {
            pos += 2;
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += utf8_len(bytes[pos]);
            }
            push(&mut tokens, TokenKind::Comment, start, pos);
            continue;
        }
        if bytes[pos] == b'/' && pos + 1 < bytes.len() && bytes[pos + 1] == b'*' {
            pos += 2;
            while pos < bytes.len() {
                if bytes[pos] == b'*' && pos + 1 < bytes.len() && bytes[pos + 1] == b'/' {
                    pos += 2;
                    break;
                }
                pos += utf8_len(bytes[pos]);
            }
            push(&mut tokens, TokenKind::Comment, start, pos);
            continue;
        }

        // String literal: to the closing quote on the same line, honoring
        // backslash escapes. An unterminated literal ends at the newline
        // (or EOF) so damage stays local.
        if bytes[pos] == b'"' {
            pos += 1;
            while pos < bytes.len() && bytes[pos] != b'\n' {
                if bytes[pos] == b'\\' && pos + 1 < bytes.len() {
                    pos += 1 + utf8_len(bytes[pos + 1]);
                    continue;
                }
                if bytes[pos] == b'"' {
                    pos += 1;
                    break;
                }
                pos += utf8_len(bytes[pos]);
            }
            push(&mut tokens, TokenKind::LiteralString, start, pos);
            continue;
        }

        // Character literal, same line-local policy. A quote that does not
        // close within a few characters is emitted as bare punctuation.
        if bytes[pos] == b'\'' {
            let mut probe = pos + 1;
            if probe < bytes.len() && bytes[probe] == b'\\' && probe + 1 < bytes.len() {
                probe += 1 + utf8_len(bytes[probe + 1]);
            } else if probe < bytes.len() && bytes[probe] != b'\'' && bytes[probe] != b'\n' {
                probe += utf8_len(bytes[probe]);
            }
            if probe < bytes.len() && bytes[probe] == b'\'' {
                pos = probe + 1;
                push(&mut tokens, TokenKind::LiteralChar, start, pos);
                continue;
            }
            pos += 1;
            push(&mut tokens, TokenKind::Punctuation, start, pos);
            continue;
        }

        // Integer literal: decimal or hex digits plus an optional single
        // suffix letter (5L, 3f). `4.99` lexes as int, dot, int.
        if bytes[pos].is_ascii_digit() {
            if bytes[pos] == b'0'
                && pos + 1 < bytes.len()
                && (bytes[pos + 1] == b'x' || bytes[pos + 1] == b'X')
            {
                pos += 2;
                while pos < bytes.len() && bytes[pos].is_ascii_hexdigit() {
                    pos += 1;
                }
            } else {
                while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                    pos += 1;
                }
                if pos < bytes.len() && matches!(bytes[pos], b'l' | b'L' | b'f' | b'F' | b'd' | b'D') {
                    // Only a suffix when not the start of a longer word.
                    let after = pos + 1;
                    let next_is_word = after < bytes.len()
                        && text[after..].chars().next().map(is_ident_continue).unwrap_or(false);
                    if !next_is_word {
                        pos += 1;
                    }
                }
            }
            push(&mut tokens, TokenKind::LiteralInt, start, pos);
            continue;
        }

        // Identifier or keyword.
        if is_ident_start(c) {
            while pos < bytes.len() {
                let ch = text[pos..].chars().next().unwrap();
                if !is_ident_continue(ch) {
                    break;
                }
                pos += ch.len_utf8();
            }
            let kind = if is_keyword(&text[start..pos], language) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            };
            push(&mut tokens, kind, start, pos);
            continue;
        }

        // Multi-character operators, longest first.
        if let Some(op) = OPERATORS.iter().find(|op| text[pos..].starts_with(**op)) {
            pos += op.len();
            push(&mut tokens, TokenKind::Operator, start, pos);
            continue;
        }

        if SINGLE_OPERATORS.contains(&c) {
            pos += c.len_utf8();
            push(&mut tokens, TokenKind::Operator, start, pos);
            continue;
        }

        // Everything else (declared punctuation and any unknown character)
        // becomes single-character punctuation; the lexer never fails.
        let _ = PUNCTUATION;
        pos += c.len_utf8();
        push(&mut tokens, TokenKind::Punctuation, start, pos);
    }

    tokens
}

fn utf8_len(lead: u8) -> usize {
    match lead {
        b if b < 0x80 => 1,
        b if b >= 0xF0 => 4,
        b if b >= 0xE0 => 3,
        _ => 2,
    }
}

/// Concatenates token texts back into source. Inverse of [`tokenize`].
pub fn render(tokens: &[Token]) -> String {
    let total: usize = tokens.iter().map(|t| t.text.len()).sum();
    let mut out = String::with_capacity(total);
    for token in tokens {
        out.push_str(&token.text);
    }
    out
}

//! Concrete-evaluation categorization of off-by-one loop bugs.
//!
//! A mutated loop is categorized by what it *does*, not how it looks: the
//! loop is evaluated at a small symbolic array length `n`, and the visited
//! index set is compared against the correct `{0 .. n-1}`.

use std::collections::BTreeSet;

use crate::code_model::{ForDescriptor, SourceUnit, Span, TokenKind};
use crate::taxonomy::BugCode;

use super::ClassifierError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Rel {
    Lt,
    Le,
}

/// A loop reduced to evaluable form: `for (i = init; i REL n+offset; i++)`.
#[derive(Debug, Clone, Copy)]
struct LoopSpec {
    init: i64,
    rel: Rel,
    /// Additive adjustment to the symbolic bound (`n - 1` → −1).
    offset: i64,
}

fn code_in(
    unit: &SourceUnit,
    span: Span,
) -> impl Iterator<Item = &crate::code_model::Token> {
    unit.tokens
        .iter()
        .filter(move |t| t.kind.is_code() && t.span.within(span))
}

/// Reduces a `for` descriptor to a [`LoopSpec`].
///
/// Requirements: integer counter initialized to an integer constant,
/// condition `counter < bound` or `counter <= bound` where the bound is
/// one symbolic length expression plus integer offsets, and a step-one
/// increment. Anything else is [`ClassifierError::NonCanonicalLoop`].
fn parse_loop(unit: &SourceUnit, lp: &ForDescriptor) -> Result<LoopSpec, ClassifierError> {
    let err = || ClassifierError::NonCanonicalLoop {
        detail: lp.header_text(unit),
    };
    if lp.malformed {
        return Err(err());
    }
    let init: Vec<_> = code_in(unit, lp.init_span).collect();
    let cond: Vec<_> = code_in(unit, lp.condition_span).collect();
    let update: Vec<_> = code_in(unit, lp.update_span).collect();

    // Init: `[type]* NAME = [-] INT`.
    let mut k = init.len();
    let (value, negated) = match init.as_slice() {
        [.., lit] if lit.kind == TokenKind::LiteralInt => {
            let negated = init.len() >= 2 && init[init.len() - 2].text == "-";
            k -= if negated { 2 } else { 1 };
            (lit.text.parse::<i64>().map_err(|_| err())?, negated)
        }
        _ => return Err(err()),
    };
    if k == 0 || init[k - 1].text != "=" {
        return Err(err());
    }
    k -= 1;
    if k == 0 || init[k - 1].kind != TokenKind::Identifier {
        return Err(err());
    }
    let counter = init[k - 1].text.as_str();
    let init_value = if negated { -value } else { value };

    // Condition: `counter REL ATOM [± INT]*`.
    if cond.len() < 3 || !(cond[0].kind == TokenKind::Identifier && cond[0].text == counter) {
        return Err(err());
    }
    let rel = match cond[1].text.as_str() {
        "<" => Rel::Lt,
        "<=" => Rel::Le,
        _ => return Err(err()),
    };
    if cond[2].kind != TokenKind::Identifier {
        return Err(err());
    }
    let mut j = 3;
    // Symbolic length expression: identifiers, field dots, call parens.
    while j < cond.len()
        && (cond[j].kind == TokenKind::Identifier
            || cond[j].text == "."
            || cond[j].text == "("
            || cond[j].text == ")")
    {
        j += 1;
    }
    let mut offset = 0i64;
    while j < cond.len() {
        let sign = match cond[j].text.as_str() {
            "+" => 1,
            "-" => -1,
            _ => return Err(err()),
        };
        let lit = cond.get(j + 1).ok_or_else(err)?;
        if lit.kind != TokenKind::LiteralInt {
            return Err(err());
        }
        offset += sign * lit.text.parse::<i64>().map_err(|_| err())?;
        j += 2;
    }

    // Update: `i++`, `++i`, `i += 1`, `i = i + 1`.
    let texts: Vec<&str> = update.iter().map(|t| t.text.as_str()).collect();
    let step_one = matches!(texts.as_slice(), [a, "++"] | ["++", a] if *a == counter)
        || matches!(texts.as_slice(), [a, "+=", "1"] if *a == counter)
        || matches!(texts.as_slice(), [a, "=", b, "+", "1"] if *a == counter && *b == counter);
    if !step_one {
        return Err(err());
    }

    Ok(LoopSpec { init: init_value, rel, offset })
}

fn visited(spec: LoopSpec, n: i64) -> BTreeSet<i64> {
    let bound = n + spec.offset;
    let cap = (4 * n + 16) as usize;
    let mut set = BTreeSet::new();
    let mut i = spec.init;
    while match spec.rel {
        Rel::Lt => i < bound,
        Rel::Le => i <= bound,
    } {
        set.insert(i);
        if set.len() >= cap {
            break;
        }
        i += 1;
    }
    set
}

fn categories(v: &BTreeSet<i64>, n: i64) -> BTreeSet<BugCode> {
    let mut out = BTreeSet::new();
    if v.contains(&n) {
        out.insert(BugCode::HighBounds);
    }
    if v.contains(&-1) {
        out.insert(BugCode::LowBounds);
    }
    if !v.contains(&0) {
        out.insert(BugCode::LowMiss);
    }
    if !v.contains(&(n - 1)) {
        out.insert(BugCode::HighMiss);
    }
    out
}

/// Categorizes a loop directly against the ideal visited set `{0..n-1}`
/// — the standalone variant, for units with no original to compare to.
///
/// Without an original as baseline, only deviations of exactly one step at
/// either end are reported: an extra `-1` or `n`, a missing `0` or `n-1`.
/// Anything further off (say a loop starting at 2) is more likely an honest
/// loop over a different range than an off-by-one slip, and comes back empty.
pub(super) fn standalone_categories(
    unit: &SourceUnit,
    lp: &ForDescriptor,
    n: i64,
) -> Result<BTreeSet<BugCode>, ClassifierError> {
    let spec = parse_loop(unit, lp)?;
    let v = visited(spec, n);
    let correct: BTreeSet<i64> = (0..n).collect();
    let one_step = v.difference(&correct).all(|&x| x == -1 || x == n)
        && correct.difference(&v).all(|&x| x == 0 || x == n - 1);
    if !one_step {
        return Ok(BTreeSet::new());
    }
    Ok(categories(&v, n))
}

/// Categorizes a mutated loop against its original at array length `n`.
///
/// The original must itself iterate exactly `{0 .. n-1}` (otherwise there
/// is no baseline to compare against). The mutated loop's visited set `V`
/// then yields: `n ∈ V` → HighBounds, `-1 ∈ V` → LowBounds, `0 ∉ V` →
/// LowMiss, `n-1 ∉ V` → HighMiss — possibly several at once.
pub fn off_by_one_category(
    original: &SourceUnit,
    original_loop: &ForDescriptor,
    mutated: &SourceUnit,
    mutated_loop: &ForDescriptor,
    n: i64,
) -> Result<BTreeSet<BugCode>, ClassifierError> {
    debug_assert!((2..=8).contains(&n), "probe bound outside specified range");
    let orig = parse_loop(original, original_loop)?;
    let correct: BTreeSet<i64> = (0..n).collect();
    if visited(orig, n) != correct {
        return Err(ClassifierError::NonCanonicalLoop {
            detail: original_loop.header_text(original),
        });
    }
    let mutated_spec = parse_loop(mutated, mutated_loop)?;
    Ok(categories(&visited(mutated_spec, n), n))
}

impl ForDescriptor {
    /// The header text, for error messages.
    pub fn header_text(&self, unit: &SourceUnit) -> String {
        unit.structure.control_headers[self.header]
            .header_span
            .slice(&unit.text)
            .to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code_model::Language;

    fn c_loop(header_interior: &str) -> SourceUnit {
        let src = format!("void f(int n, int a[]) {{ for ({header_interior}) {{ a[0] = 1; }} }}");
        SourceUnit::parse_lenient("t.c", Language::CSubset, src)
    }

    fn category(mutated: &str, n: i64) -> Result<BTreeSet<BugCode>, ClassifierError> {
        let orig = c_loop("int i = 0; i < n; i++");
        let mutd = c_loop(mutated);
        off_by_one_category(
            &orig,
            &orig.structure.for_descriptors[0],
            &mutd,
            &mutd.structure.for_descriptors[0],
            n,
        )
    }

    fn codes(set: &BTreeSet<BugCode>) -> Vec<BugCode> {
        set.iter().copied().collect()
    }

    #[test]
    fn past_the_end_is_high_bounds() {
        let set = category("int i = 0; i <= n; i++", 3).unwrap();
        assert_eq!(codes(&set), vec![BugCode::HighBounds]);
    }

    #[test]
    fn missing_the_first_element_is_low_miss() {
        let set = category("int i = 1; i < n; i++", 3).unwrap();
        assert_eq!(codes(&set), vec![BugCode::LowMiss]);
    }

    #[test]
    fn shifted_window_is_a_combination() {
        let set = category("int i = 1; i <= n; i++", 3).unwrap();
        assert_eq!(codes(&set), vec![BugCode::HighBounds, BugCode::LowMiss]);
    }

    #[test]
    fn negative_start_is_low_bounds() {
        let set = category("int i = -1; i < n; i++", 5).unwrap();
        assert_eq!(codes(&set), vec![BugCode::LowBounds]);
    }

    #[test]
    fn short_bound_is_high_miss() {
        let set = category("int i = 0; i < n - 1; i++", 5).unwrap();
        assert_eq!(codes(&set), vec![BugCode::HighMiss]);
    }

    #[test]
    fn correct_loop_yields_no_category() {
        // `i <= n - 1` visits exactly the right set.
        let set = category("int i = 0; i <= n - 1; i++", 5).unwrap();
        assert!(set.is_empty());
    }

    #[test]
    fn category_is_probe_invariant() {
        for mutated in [
            "int i = 0; i <= n; i++",
            "int i = 1; i < n; i++",
            "int i = -1; i < n; i++",
            "int i = 0; i < n - 1; i++",
            "int i = 1; i <= n; i++",
        ] {
            let mut seen = Vec::new();
            for n in [3, 5, 8] {
                seen.push(category(mutated, n).unwrap());
            }
            assert_eq!(seen[0], seen[1], "{mutated}");
            assert_eq!(seen[1], seen[2], "{mutated}");
        }
    }

    #[test]
    fn non_canonical_loops_are_rejected() {
        for bad in [
            "int i = 0; i < n--; i++",
            "int i = 0; n > i; i++",
            "int i = 0; i < n; i += 2",
            "int i = 0; i < 10; i++",
        ] {
            assert!(category(bad, 3).is_err(), "{bad} should be non-canonical");
        }
        // A buggy *original* has no baseline either.
        let orig = c_loop("int i = 1; i < n; i++");
        let mutd = c_loop("int i = 0; i < n; i++");
        assert!(off_by_one_category(
            &orig,
            &orig.structure.for_descriptors[0],
            &mutd,
            &mutd.structure.for_descriptors[0],
            3,
        )
        .is_err());
    }
}

//! Built-in source programs used by the replication experiments.
//!
//! Five small Java classes (each implementing an interface) back the
//! compiler-error-taxonomy study; four C programs with canonical
//! array-iteration loops back the off-by-one study. Every Java program
//! supports every lettered injection rule, so uniform and
//! frequency-weighted sampling never starve.

use crate::code_model::{Language, SourceUnit};
use crate::taxonomy::Study;

/// Identifier, language, and source text of one built-in program.
#[derive(Debug, Clone, Copy)]
pub struct BuiltinProgram {
    pub id: &'static str,
    pub language: Language,
    pub text: &'static str,
}

const JAVA_PROGRAMS: &[BuiltinProgram] = &[
    BuiltinProgram {
        id: "GradeBook.java",
        language: Language::JavaSubset,
        text: include_str!("../data/corpus/GradeBook.java"),
    },
    BuiltinProgram {
        id: "WordFilter.java",
        language: Language::JavaSubset,
        text: include_str!("../data/corpus/WordFilter.java"),
    },
    BuiltinProgram {
        id: "BankAccount.java",
        language: Language::JavaSubset,
        text: include_str!("../data/corpus/BankAccount.java"),
    },
    BuiltinProgram {
        id: "PrimeChecker.java",
        language: Language::JavaSubset,
        text: include_str!("../data/corpus/PrimeChecker.java"),
    },
    BuiltinProgram {
        id: "ShoppingCart.java",
        language: Language::JavaSubset,
        text: include_str!("../data/corpus/ShoppingCart.java"),
    },
];

const C_PROGRAMS: &[BuiltinProgram] = &[
    BuiltinProgram {
        id: "sum_array.c",
        language: Language::CSubset,
        text: include_str!("../data/corpus/sum_array.c"),
    },
    BuiltinProgram {
        id: "count_matches.c",
        language: Language::CSubset,
        text: include_str!("../data/corpus/count_matches.c"),
    },
    BuiltinProgram {
        id: "find_max.c",
        language: Language::CSubset,
        text: include_str!("../data/corpus/find_max.c"),
    },
    BuiltinProgram {
        id: "copy_array.c",
        language: Language::CSubset,
        text: include_str!("../data/corpus/copy_array.c"),
    },
];

/// The raw built-in programs for a study.
pub fn builtin_programs(study: Study) -> &'static [BuiltinProgram] {
    match study {
        Study::Study1 => JAVA_PROGRAMS,
        Study::Study2 => C_PROGRAMS,
    }
}

/// Parses the built-in programs for a study.
pub fn builtin_units(study: Study) -> Vec<SourceUnit> {
    builtin_programs(study)
        .iter()
        .map(|p| {
            SourceUnit::parse(p.id, p.language, p.text).expect("built-in programs are well formed")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code_model::find_sites;
    use crate::taxonomy::BugCode;

    #[test]
    fn builtin_programs_parse_strictly() {
        assert_eq!(builtin_units(Study::Study1).len(), 5);
        assert_eq!(builtin_units(Study::Study2).len(), 4);
    }

    #[test]
    fn every_java_program_supports_every_lettered_rule() {
        for unit in builtin_units(Study::Study1) {
            for code in BugCode::LETTERS {
                let sites = find_sites(&unit, code).unwrap();
                assert!(!sites.is_empty(), "{}: no sites for {code}", unit.id);
            }
        }
    }

    #[test]
    fn every_java_program_supports_the_theme_rules() {
        for unit in builtin_units(Study::Study1) {
            for code in [BugCode::S, BugCode::U, BugCode::W, BugCode::T, BugCode::Y] {
                let sites = find_sites(&unit, code).unwrap();
                assert!(!sites.is_empty(), "{}: no sites for {code}", unit.id);
            }
        }
    }

    #[test]
    fn c_programs_have_the_expected_canonical_loops() {
        let units = builtin_units(Study::Study2);
        let loops: Vec<usize> = units
            .iter()
            .map(|u| find_sites(u, BugCode::HighBounds).unwrap().len())
            .collect();
        assert_eq!(loops, vec![1, 1, 1, 2], "canonical loops per program");
        for unit in &units {
            for code in BugCode::OFF_BY_ONE {
                let sites = find_sites(unit, code).unwrap();
                assert!(!sites.is_empty(), "{}: no sites for {code}", unit.id);
            }
            // The wild-profile themes must be drawable on every program.
            for code in [BugCode::U, BugCode::W, BugCode::T] {
                let sites = find_sites(unit, code).unwrap();
                assert!(!sites.is_empty(), "{}: no sites for {code}", unit.id);
            }
        }
    }
}

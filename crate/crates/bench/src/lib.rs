//! Fixture builders shared by the criterion benches.

use bugforge_core::{Language, SourceUnit};

/// A synthetic Java class with `methods` near-identical methods, each
/// carrying a loop, a comparison, and string concatenation so every
/// mutation family finds sites. Scales linearly for throughput benches.
pub fn java_program(methods: usize) -> SourceUnit {
    let mut text = String::from("public class Synthetic {\n");
    for index in 0..methods {
        text.push_str(&format!(
            "    public int method{index}(int[] values, int limit) {{\n\
             \x20       int total = 0;\n\
             \x20       for (int i = 0; i < values.length; i++) {{\n\
             \x20           if (values[i] == limit) {{\n\
             \x20               total = total + values[i];\n\
             \x20           }}\n\
             \x20       }}\n\
             \x20       String note = \"method{index}: \" + total;\n\
             \x20       System.out.println(note);\n\
             \x20       return total;\n\
             \x20   }}\n"
        ));
    }
    text.push_str("}\n");
    SourceUnit::parse("synthetic", Language::JavaSubset, text).expect("fixture parses")
}

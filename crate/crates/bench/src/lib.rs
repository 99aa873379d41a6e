//! Shared inputs for the benches in benches/.

use spcheck::{parse_automaton, Dfa};

/// A fixture from the workspace fixtures directory.
pub fn fixture(name: &str) -> Dfa {
    let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    parse_automaton(&text).unwrap()
}

/// The query pairs timed by the pipeline bench, with their modes.
pub const PAIRS: &[(&str, &str, &str)] = &[
    ("g.aut", "h.aut", "general"),
    ("pring.aut", "vring.aut", "prefix"),
    ("pbar.aut", "vbar.aut", "prefix"),
    ("ptilde.aut", "ltilde.aut", "prefix"),
    ("s.aut", "s.aut", "prefix"),
];

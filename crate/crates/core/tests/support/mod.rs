//! Fixtures and seeded random automata shared by the integration tests.

#![allow(dead_code)]

use rand::Rng;
use spcheck::{parse_automaton, Dfa, Letter};

pub fn fixture(name: &str) -> Dfa {
    let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    parse_automaton(&std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))).unwrap()
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

/// A dfa with at most `max_states` states over `letters`, each transition
/// present with probability `density`. Retries until the language is nonempty.
pub fn random_dfa(rng: &mut impl Rng, max_states: usize, letters: &[&str], density: f64) -> Dfa {
    loop {
        let n = rng.gen_range(1..=max_states);
        let alphabet: Vec<Letter> = letters.iter().map(|s| Letter::new(*s)).collect();
        let mut d = Dfa::new(alphabet.clone(), "1", false);
        for i in 2..=n {
            d.add_state(&i.to_string());
        }
        for s in 0..n {
            d.set_final(s, rng.gen_bool(0.5));
            for a in &alphabet {
                if rng.gen_bool(density) {
                    let t = rng.gen_range(0..n);
                    d.add_transition(s, a, t).unwrap();
                }
            }
        }
        if !d.is_empty_language() {
            return d.normalize().unwrap();
        }
    }
}

/// Same, read with every state final: a prefix-closed language.
pub fn random_prefix_closed(rng: &mut impl Rng, max_states: usize, letters: &[&str], density: f64) -> Dfa {
    random_dfa(rng, max_states, letters, density).all_final()
}

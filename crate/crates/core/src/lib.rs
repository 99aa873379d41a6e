//! Closure of regular languages under shuffle projection.

pub mod budget;
pub mod decision;
pub mod dfa;
pub mod error;
pub mod family;
pub mod letter;
pub mod oracle;
pub mod petri;
pub mod representation;
pub mod segments;
pub mod shuffle;
pub mod text;
pub mod vector;

pub use budget::Budget;
pub use decision::{decide_sp, replay_certificate, Mode, Route, SpQuery, Verdict};
pub use dfa::{Dfa, Inclusion, Symbol};
pub use error::{Error, Result};
pub use letter::{parse_word, render_word, word, Letter, Word};
pub use oracle::Witness;
pub use shuffle::{Computation, Kind, ShuffleAutomaton, ShuffleTransition, Step};
pub use text::{parse_automaton, serialize};
pub use vector::CounterVector;

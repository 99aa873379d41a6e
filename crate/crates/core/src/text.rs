//! The line-based automaton interchange format.
//!
//! ```text
//! kind: dfa
//! alphabet: a b c
//! states: 1 2 3
//! initial: 1
//! finals: 1 2 3
//! trans: 1 a 2
//! ```

use std::collections::HashMap;

use crate::dfa::{Dfa, Symbol};
use crate::error::{Error, Result};
use crate::letter::Letter;

fn syntax(line: usize, msg: impl Into<String>) -> Error {
    Error::Syntax { line, msg: msg.into() }
}

pub fn parse_automaton(text: &str) -> Result<Dfa> {
    let mut kind: Option<bool> = None;
    let mut alphabet: Option<Vec<Letter>> = None;
    let mut states: Option<Vec<String>> = None;
    let mut initial: Option<(usize, String)> = None;
    let mut finals: Option<(usize, Vec<String>)> = None;
    let mut trans: Vec<(usize, String, Letter, String)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (key, rest) = line.split_once(':').ok_or_else(|| syntax(ln, "expected `key: value`"))?;
        let toks: Vec<&str> = rest.split_whitespace().collect();
        match key.trim() {
            "kind" => {
                kind = Some(match toks.as_slice() {
                    ["dfa"] => false,
                    ["semiautomaton"] => true,
                    _ => return Err(syntax(ln, "kind must be dfa or semiautomaton")),
                })
            }
            "alphabet" => {
                let mut letters = Vec::new();
                for t in toks {
                    let l = Letter::parse(t).ok_or_else(|| syntax(ln, format!("bad letter {t}")))?;
                    if letters.contains(&l) {
                        return Err(syntax(ln, format!("duplicate letter {t}")));
                    }
                    letters.push(l);
                }
                alphabet = Some(letters);
            }
            "states" => {
                if toks.is_empty() {
                    return Err(syntax(ln, "no states"));
                }
                let mut seen = Vec::new();
                for t in &toks {
                    if seen.contains(t) {
                        return Err(syntax(ln, format!("duplicate state {t}")));
                    }
                    seen.push(*t);
                }
                states = Some(toks.iter().map(|s| s.to_string()).collect());
            }
            "initial" => match toks.as_slice() {
                [s] => initial = Some((ln, s.to_string())),
                _ => return Err(syntax(ln, "exactly one initial state")),
            },
            "finals" => finals = Some((ln, toks.iter().map(|s| s.to_string()).collect())),
            "trans" => match toks.as_slice() {
                [s, a, t] => {
                    let l = Letter::parse(a).ok_or_else(|| syntax(ln, format!("bad letter {a}")))?;
                    trans.push((ln, s.to_string(), l, t.to_string()));
                }
                _ => return Err(syntax(ln, "trans needs `state letter state`")),
            },
            other => return Err(syntax(ln, format!("unknown key {other}"))),
        }
    }

    let semi = kind.ok_or_else(|| syntax(0, "missing kind"))?;
    let alphabet = alphabet.ok_or_else(|| syntax(0, "missing alphabet"))?;
    let states = states.ok_or_else(|| syntax(0, "missing states"))?;
    let (iln, init) = initial.ok_or_else(|| syntax(0, "missing initial"))?;
    let ids: HashMap<&str, usize> = states.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let state = |ln: usize, s: &str| ids.get(s).copied().ok_or_else(|| syntax(ln, format!("unknown state {s}")));

    let mut dfa = Dfa::new(alphabet.clone(), &states[0], semi);
    for s in &states[1..] {
        dfa.add_state(s);
    }
    dfa.set_initial(state(iln, &init)?);
    if let Some((fln, fs)) = finals {
        if semi {
            return Err(syntax(fln, "a semiautomaton has no finals line"));
        }
        for f in fs {
            dfa.set_final(state(fln, &f)?, true);
        }
    }
    for (ln, s, l, t) in trans {
        if !alphabet.contains(&l) {
            return Err(syntax(ln, format!("letter {l} not in alphabet")));
        }
        let (s, t) = (state(ln, &s)?, state(ln, &t)?);
        dfa.add_transition(s, &l, t)?;
    }
    Ok(dfa)
}

fn token(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join("_")
}

/// Writes any automaton in the interchange format. Letters are written with
/// their `Display` form, which must be a single token.
pub fn serialize<L: Symbol>(a: &Dfa<L>) -> String {
    let mut out = String::new();
    out.push_str(if a.is_semi() { "kind: semiautomaton\n" } else { "kind: dfa\n" });
    let alpha: Vec<String> = a.alphabet().iter().map(|l| token(&l.to_string())).collect();
    out.push_str(&format!("alphabet: {}\n", alpha.join(" ")).replace(": \n", ":\n"));
    let names: Vec<String> = a.names().iter().map(|n| token(n)).collect();
    out.push_str(&format!("states: {}\n", names.join(" ")));
    out.push_str(&format!("initial: {}\n", names[a.initial()]));
    if !a.is_semi() {
        let fs: Vec<&str> = (0..a.state_count()).filter(|&s| a.is_final(s)).map(|s| names[s].as_str()).collect();
        out.push_str(&format!("finals: {}\n", fs.join(" ")).replace(": \n", ":\n"));
    }
    for (s, l, t) in a.transitions() {
        out.push_str(&format!("trans: {} {} {}\n", names[s], token(&l.to_string()), names[t]));
    }
    out
}

//! Deterministic automata and semiautomata over an arbitrary finite alphabet.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::hash::Hash;

use crate::error::{Error, Result};
use crate::letter::Letter;

/// Anything usable as a letter.
pub trait Symbol: Clone + Ord + Hash + fmt::Display + fmt::Debug {}
impl<T: Clone + Ord + Hash + fmt::Display + fmt::Debug> Symbol for T {}

/// A deterministic automaton. With `semi` set every state accepts and the
/// automaton is read as a semiautomaton.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfa<L: Symbol = Letter> {
    alphabet: Vec<L>,
    index: BTreeMap<L, usize>,
    names: Vec<String>,
    delta: Vec<Vec<Option<usize>>>,
    initial: usize,
    finals: Vec<bool>,
    semi: bool,
}

/// Result of an inclusion check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Inclusion<L> {
    Yes,
    Counterexample(Vec<L>),
}

impl<L> Inclusion<L> {
    pub fn holds(&self) -> bool {
        matches!(self, Inclusion::Yes)
    }
}

impl<L: Symbol> Dfa<L> {
    /// An automaton with a single initial state named `init` and no transitions.
    pub fn new(alphabet: Vec<L>, init: &str, semi: bool) -> Self {
        let mut alpha = Vec::new();
        let mut index = BTreeMap::new();
        for l in alphabet {
            if !index.contains_key(&l) {
                index.insert(l.clone(), alpha.len());
                alpha.push(l);
            }
        }
        Dfa {
            alphabet: alpha,
            index,
            names: vec![init.to_string()],
            delta: vec![Vec::new()],
            initial: 0,
            finals: vec![false],
            semi,
        }
        .padded()
    }

    fn padded(mut self) -> Self {
        let n = self.alphabet.len();
        for row in &mut self.delta {
            row.resize(n, None);
        }
        self
    }

    pub fn add_state(&mut self, name: &str) -> usize {
        self.names.push(name.to_string());
        self.delta.push(vec![None; self.alphabet.len()]);
        self.finals.push(false);
        self.names.len() - 1
    }

    pub fn set_final(&mut self, s: usize, fin: bool) {
        self.finals[s] = fin;
    }

    pub fn set_initial(&mut self, s: usize) {
        self.initial = s;
    }

    pub fn set_semi(&mut self, semi: bool) {
        self.semi = semi;
    }

    /// Adds `s --l--> t`; a second transition on the same (state, letter) is an error.
    pub fn add_transition(&mut self, s: usize, l: &L, t: usize) -> Result<()> {
        let li = *self.index.get(l).ok_or_else(|| Error::UnknownLetter(l.to_string()))?;
        if self.delta[s][li].is_some() {
            return Err(Error::Nondeterministic { state: self.names[s].clone(), letter: l.to_string() });
        }
        self.delta[s][li] = Some(t);
        Ok(())
    }

    pub fn alphabet(&self) -> &[L] {
        &self.alphabet
    }

    pub fn letter_index(&self, l: &L) -> Option<usize> {
        self.index.get(l).copied()
    }

    pub fn state_count(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, s: usize) -> &str {
        &self.names[s]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn state_by_name(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_semi(&self) -> bool {
        self.semi
    }

    pub fn is_final(&self, s: usize) -> bool {
        self.finals[s]
    }

    /// Final in the dfa reading, any state in the semiautomaton reading.
    pub fn is_accepting(&self, s: usize) -> bool {
        self.semi || self.finals[s]
    }

    pub fn accepting_states(&self) -> Vec<usize> {
        (0..self.state_count()).filter(|&s| self.is_accepting(s)).collect()
    }

    pub fn step(&self, s: usize, l: &L) -> Option<usize> {
        self.index.get(l).and_then(|&li| self.delta[s][li])
    }

    pub fn step_ix(&self, s: usize, li: usize) -> Option<usize> {
        self.delta[s][li]
    }

    /// All transitions in (state, letter declaration) order.
    pub fn transitions(&self) -> impl Iterator<Item = (usize, &L, usize)> + '_ {
        self.delta.iter().enumerate().flat_map(move |(s, row)| {
            row.iter().enumerate().filter_map(move |(li, t)| t.map(|t| (s, &self.alphabet[li], t)))
        })
    }

    pub fn transition_count(&self) -> usize {
        self.delta.iter().map(|r| r.iter().filter(|t| t.is_some()).count()).sum()
    }

    pub fn has_outgoing(&self, s: usize) -> bool {
        self.delta[s].iter().any(|t| t.is_some())
    }

    pub fn run(&self, w: &[L]) -> Result<Option<usize>> {
        let mut s = self.initial;
        for l in w {
            let li = self.letter_index(l).ok_or_else(|| Error::UnknownLetter(l.to_string()))?;
            match self.delta[s][li] {
                Some(t) => s = t,
                None => return Ok(None),
            }
        }
        Ok(Some(s))
    }

    pub fn accepts(&self, w: &[L]) -> Result<bool> {
        Ok(self.run(w)?.is_some_and(|s| self.is_accepting(s)))
    }

    pub fn is_total(&self) -> bool {
        self.delta.iter().all(|r| r.iter().all(|t| t.is_some()))
    }

    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.state_count()];
        let mut stack = vec![self.initial];
        seen[self.initial] = true;
        while let Some(s) = stack.pop() {
            for t in self.delta[s].iter().flatten() {
                if !seen[*t] {
                    seen[*t] = true;
                    stack.push(*t);
                }
            }
        }
        seen
    }

    /// States from which some accepting state is reachable.
    pub fn coreachable(&self) -> Vec<bool> {
        let n = self.state_count();
        let mut pred = vec![Vec::new(); n];
        for (s, _, t) in self.transitions() {
            pred[t].push(s);
        }
        let mut seen = vec![false; n];
        let mut stack: Vec<usize> = (0..n).filter(|&s| self.is_accepting(s)).collect();
        for &s in &stack {
            seen[s] = true;
        }
        while let Some(t) = stack.pop() {
            for &s in &pred[t] {
                if !seen[s] {
                    seen[s] = true;
                    stack.push(s);
                }
            }
        }
        seen
    }

    /// Keeps the states in `keep` (which must contain the initial state), in order.
    fn restrict(&self, keep: &[bool]) -> Self {
        let mut map = vec![None; self.state_count()];
        let mut out = Dfa {
            alphabet: self.alphabet.clone(),
            index: self.index.clone(),
            names: Vec::new(),
            delta: Vec::new(),
            initial: 0,
            finals: Vec::new(),
            semi: self.semi,
        };
        for s in 0..self.state_count() {
            if keep[s] {
                map[s] = Some(out.names.len());
                out.names.push(self.names[s].clone());
                out.finals.push(self.finals[s]);
                out.delta.push(vec![None; self.alphabet.len()]);
            }
        }
        for (s, row) in self.delta.iter().enumerate() {
            if let Some(ns) = map[s] {
                for (li, t) in row.iter().enumerate() {
                    if let Some(t) = t {
                        out.delta[ns][li] = map[*t];
                    }
                }
            }
        }
        out.initial = map[self.initial].expect("initial kept");
        out
    }

    /// Trims to reachable states; a dfa is also trimmed to co-reachable states.
    pub fn normalize(&self) -> Result<Self> {
        let reach = self.reachable();
        let keep: Vec<bool> = if self.semi {
            reach
        } else {
            let co = self.coreachable();
            reach.iter().zip(&co).map(|(a, b)| *a && *b).collect()
        };
        if !keep[self.initial] {
            return Err(Error::EmptyLanguage);
        }
        Ok(self.restrict(&keep))
    }

    /// Trims to reachable states only, never failing.
    pub fn reachable_part(&self) -> Self {
        self.restrict(&self.reachable())
    }

    fn fresh_name(&self, base: &str) -> String {
        let mut name = base.to_string();
        while self.names.contains(&name) {
            name.push('\'');
        }
        name
    }

    /// Total transition function; a fresh non-final sink is added iff one was missing.
    /// The result is read as a dfa whose finals are the previously accepting states.
    pub fn complete(&self) -> Self {
        if self.is_total() {
            return if self.semi { self.all_final() } else { self.clone() };
        }
        let mut out = self.clone();
        if out.semi {
            out.semi = false;
            out.finals = vec![true; out.state_count()];
        }
        let sink = out.add_state(&self.fresh_name("sink"));
        for row in &mut out.delta {
            for t in row.iter_mut() {
                if t.is_none() {
                    *t = Some(sink);
                }
            }
        }
        out
    }

    /// Reads the automaton as a dfa with every state final.
    pub fn all_final(&self) -> Self {
        let mut out = self.clone();
        out.semi = false;
        out.finals = vec![true; out.state_count()];
        out
    }

    /// Same transition structure read as a semiautomaton.
    pub fn as_semi(&self) -> Self {
        let mut out = self.clone();
        out.semi = true;
        out
    }

    /// Same transition structure as a dfa with the given finals.
    pub fn with_finals(&self, finals: &[usize]) -> Self {
        let mut out = self.clone();
        out.semi = false;
        out.finals = vec![false; out.state_count()];
        for &f in finals {
            out.finals[f] = true;
        }
        out
    }

    fn same_alphabet(&self, other: &Self) -> bool {
        self.index.len() == other.index.len() && self.index.keys().all(|l| other.index.contains_key(l))
    }

    /// Intersection over reachable pairs; pair states are named `(x,y)`.
    pub fn product(&self, other: &Self) -> Result<Self> {
        if !self.same_alphabet(other) {
            return Err(Error::AlphabetMismatch);
        }
        let mut out = Dfa::new(self.alphabet.clone(), "", self.semi && other.semi);
        out.names.clear();
        out.delta.clear();
        out.finals.clear();
        let mut ids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut queue = VecDeque::new();
        let start = (self.initial, other.initial);
        let pair_state = |out: &mut Dfa<L>, p: (usize, usize)| -> usize {
            let id = out.add_state(&format!("({},{})", self.names[p.0], other.names[p.1]));
            out.finals[id] = self.is_accepting(p.0) && other.is_accepting(p.1);
            id
        };
        ids.insert(start, pair_state(&mut out, start));
        queue.push_back(start);
        while let Some(p) = queue.pop_front() {
            let id = ids[&p];
            for (li, l) in self.alphabet.iter().enumerate() {
                let (Some(a), Some(b)) = (self.delta[p.0][li], other.step(p.1, l)) else { continue };
                let t = match ids.get(&(a, b)) {
                    Some(&t) => t,
                    None => {
                        let t = pair_state(&mut out, (a, b));
                        ids.insert((a, b), t);
                        queue.push_back((a, b));
                        t
                    }
                };
                out.delta[id][li] = Some(t);
            }
        }
        Ok(out)
    }

    /// Whether L(sub) ⊆ L(sup), with a shortest witness otherwise. Ties between
    /// witnesses of equal length go to the first in `sub`'s letter order.
    pub fn includes(sup: &Self, sub: &Self) -> Result<Inclusion<L>> {
        if !sup.same_alphabet(sub) {
            return Err(Error::AlphabetMismatch);
        }
        type Node = (usize, Option<usize>);
        let start: Node = (sub.initial, Some(sup.initial));
        let mut parent: HashMap<Node, Option<(Node, usize)>> = HashMap::new();
        parent.insert(start, None);
        let mut queue = VecDeque::from([start]);
        while let Some(n) = queue.pop_front() {
            let inside = n.1.is_some_and(|s| sup.is_accepting(s));
            if sub.is_accepting(n.0) && !inside {
                let mut w = Vec::new();
                let mut cur = n;
                while let Some(Some((p, li))) = parent.get(&cur) {
                    w.push(sub.alphabet[*li].clone());
                    cur = *p;
                }
                w.reverse();
                return Ok(Inclusion::Counterexample(w));
            }
            for (li, l) in sub.alphabet.iter().enumerate() {
                let Some(a) = sub.delta[n.0][li] else { continue };
                let next = (a, n.1.and_then(|s| sup.step(s, l)));
                if !parent.contains_key(&next) {
                    parent.insert(next, Some((n, li)));
                    queue.push_back(next);
                }
            }
        }
        Ok(Inclusion::Yes)
    }

    pub fn equivalent(&self, other: &Self) -> Result<bool> {
        Ok(Dfa::includes(self, other)?.holds() && Dfa::includes(other, self)?.holds())
    }

    /// True iff every prefix of an accepted word is accepted.
    pub fn is_prefix_closed(&self) -> bool {
        match self.normalize() {
            Ok(t) => (0..t.state_count()).all(|s| t.is_accepting(s)),
            Err(_) => true,
        }
    }

    pub fn is_empty_language(&self) -> bool {
        let reach = self.reachable();
        !(0..self.state_count()).any(|s| reach[s] && self.is_accepting(s))
    }

    /// Accepted words of length ≤ n, shortest first, then in letter order.
    pub fn words_upto(&self, n: usize) -> Vec<Vec<L>> {
        let mut out = Vec::new();
        let mut layer: Vec<(Vec<L>, usize)> = vec![(Vec::new(), self.initial)];
        for len in 0..=n {
            for (w, s) in &layer {
                if self.is_accepting(*s) {
                    out.push(w.clone());
                }
            }
            if len == n {
                break;
            }
            let mut next = Vec::new();
            for (w, s) in &layer {
                for (li, l) in self.alphabet.iter().enumerate() {
                    if let Some(t) = self.delta[*s][li] {
                        let mut w2 = w.clone();
                        w2.push(l.clone());
                        next.push((w2, t));
                    }
                }
            }
            layer = next;
        }
        out
    }

    /// Image under a letter-to-letter-or-ε map, determinized by subset
    /// construction. States are named by their sorted member sets.
    pub fn image<M: Symbol>(&self, alphabet: Vec<M>, phi: impl Fn(&L) -> Option<M>) -> Dfa<M> {
        let mut eps: Vec<Vec<usize>> = vec![Vec::new(); self.state_count()];
        let mut moves: Vec<Vec<(M, usize)>> = vec![Vec::new(); self.state_count()];
        for (s, l, t) in self.transitions() {
            match phi(l) {
                None => eps[s].push(t),
                Some(m) => moves[s].push((m, t)),
            }
        }
        let closure = |set: BTreeSet<usize>| -> BTreeSet<usize> {
            let mut out = set.clone();
            let mut stack: Vec<usize> = set.into_iter().collect();
            while let Some(s) = stack.pop() {
                for &t in &eps[s] {
                    if out.insert(t) {
                        stack.push(t);
                    }
                }
            }
            out
        };
        let name = |set: &BTreeSet<usize>| {
            let parts: Vec<&str> = set.iter().map(|&s| self.names[s].as_str()).collect();
            format!("{{{}}}", parts.join(","))
        };
        let start = closure(BTreeSet::from([self.initial]));
        let mut out = Dfa::new(alphabet, &name(&start), false);
        let mut ids: HashMap<BTreeSet<usize>, usize> = HashMap::new();
        out.finals[0] = start.iter().any(|&s| self.is_accepting(s));
        ids.insert(start.clone(), 0);
        let mut queue = VecDeque::from([start]);
        while let Some(set) = queue.pop_front() {
            let id = ids[&set];
            let mut succ: BTreeMap<M, BTreeSet<usize>> = BTreeMap::new();
            for &s in &set {
                for (m, t) in &moves[s] {
                    succ.entry(m.clone()).or_default().insert(*t);
                }
            }
            for (m, targets) in succ {
                let tset = closure(targets);
                let tid = match ids.get(&tset) {
                    Some(&x) => x,
                    None => {
                        let x = out.add_state(&name(&tset));
                        out.finals[x] = tset.iter().any(|&s| self.is_accepting(s));
                        ids.insert(tset.clone(), x);
                        queue.push_back(tset);
                        x
                    }
                };
                out.add_transition(id, &m, tid).expect("fresh subset edge");
            }
        }
        if self.semi {
            // subset states of a semiautomaton all accept
            out.semi = true;
        }
        out
    }

    /// Structural isomorphism of the reachable parts, ignoring state names.
    pub fn isomorphic(&self, other: &Self) -> bool {
        if !self.same_alphabet(other) {
            return false;
        }
        let a = self.reachable_part();
        let b = other.reachable_part();
        if a.state_count() != b.state_count() || a.transition_count() != b.transition_count() {
            return false;
        }
        let mut map: Vec<Option<usize>> = vec![None; a.state_count()];
        let mut back: Vec<Option<usize>> = vec![None; b.state_count()];
        map[a.initial] = Some(b.initial);
        back[b.initial] = Some(a.initial);
        let mut stack = vec![a.initial];
        while let Some(s) = stack.pop() {
            let t = map[s].unwrap();
            if a.is_accepting(s) != b.is_accepting(t) {
                return false;
            }
            for (li, l) in a.alphabet.iter().enumerate() {
                match (a.delta[s][li], b.step(t, l)) {
                    (None, None) => {}
                    (Some(x), Some(y)) => match (map[x], back[y]) {
                        (None, None) => {
                            map[x] = Some(y);
                            back[y] = Some(x);
                            stack.push(x);
                        }
                        (Some(m), Some(_)) if m == y => {}
                        _ => return false,
                    },
                    _ => return false,
                }
            }
        }
        true
    }

    /// Relabels letters injectively.
    pub fn map_letters<M: Symbol>(&self, f: impl Fn(&L) -> M) -> Dfa<M> {
        let alphabet: Vec<M> = self.alphabet.iter().map(&f).collect();
        let index = alphabet.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        Dfa {
            alphabet,
            index,
            names: self.names.clone(),
            delta: self.delta.clone(),
            initial: self.initial,
            finals: self.finals.clone(),
            semi: self.semi,
        }
    }

    /// The same automaton over a larger alphabet; new letters have no transitions.
    pub fn extend_alphabet(&self, extra: &[L]) -> Self {
        let mut out = self.clone();
        for l in extra {
            if !out.index.contains_key(l) {
                out.index.insert(l.clone(), out.alphabet.len());
                out.alphabet.push(l.clone());
            }
        }
        out.padded()
    }

    /// Graphviz rendering.
    pub fn to_dot(&self, name: &str) -> String {
        let mut s = format!("digraph \"{}\" {{\n  rankdir=LR;\n  __start [shape=point];\n", esc(name));
        for (i, n) in self.names.iter().enumerate() {
            let shape = if !self.semi && self.finals[i] { "doublecircle" } else { "circle" };
            s.push_str(&format!("  s{i} [label=\"{}\", shape={shape}];\n", esc(n)));
        }
        s.push_str(&format!("  __start -> s{};\n", self.initial));
        for (a, l, b) in self.transitions() {
            s.push_str(&format!("  s{a} -> s{b} [label=\"{}\"];\n", esc(&l.to_string())));
        }
        s.push_str("}\n");
        s
    }
}

fn esc(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

//! The S-automaton of a dfa P: states are counter vectors counting the open
//! components per P-state, transitions start, advance or close components.

use std::collections::BTreeSet;
use std::fmt;

use crate::dfa::Dfa;
use crate::error::{Error, Result};
use crate::letter::Letter;
use crate::vector::CounterVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    Start,
    Inner,
    End,
    StartEnd,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Start => "start",
            Kind::Inner => "inner",
            Kind::End => "end",
            Kind::StartEnd => "start_end",
        }
    }
}

/// A transition (f, a, g) without its kind. Computations and transition
/// alphabets are sequences and sets of these.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Step {
    pub source: CounterVector,
    pub letter: Letter,
    pub target: CounterVector,
}

pub type Computation = Vec<Step>;

impl Step {
    pub fn new(source: CounterVector, letter: Letter, target: CounterVector) -> Self {
        Step { source, letter, target }
    }

    /// `(II:1) b (0)`
    pub fn render(&self, names: &[String]) -> String {
        format!("({}) {} ({})", self.source.render(names), self.letter, self.target.render(names))
    }

    /// Single-token form `II:1>b>0`.
    pub fn render_compact(&self, names: &[String]) -> String {
        format!("{}>{}>{}", self.source.render_compact(names), self.letter, self.target.render_compact(names))
    }

    pub fn parse(s: &str, names: &[String]) -> Option<Step> {
        let s = s.trim();
        let rest = s.strip_prefix('(')?;
        let close = rest.find(')')?;
        let src = CounterVector::parse(&rest[..close], names)?;
        let rest = rest[close + 1..].trim_start();
        let open = rest.find('(')?;
        let letter = Letter::parse(rest[..open].trim())?;
        let tgt_txt = rest[open + 1..].strip_suffix(')')?;
        let tgt = CounterVector::parse(tgt_txt, names)?;
        Some(Step::new(src, letter, tgt))
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) {} ({})", self.source, self.letter, self.target)
    }
}

/// A step tagged with how it arises.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ShuffleTransition {
    pub source: CounterVector,
    pub letter: Letter,
    pub target: CounterVector,
    pub kind: Kind,
}

impl ShuffleTransition {
    pub fn step(&self) -> Step {
        Step::new(self.source.clone(), self.letter.clone(), self.target.clone())
    }

    pub fn render(&self, names: &[String]) -> String {
        self.step().render(names)
    }
}

/// The S-automaton of a normalized dfa.
#[derive(Clone, Debug)]
pub struct ShuffleAutomaton {
    p: Dfa,
    live: Vec<bool>,
    /// states reachable by a nonempty word that have an outgoing edge
    elementary: Vec<bool>,
    core: Vec<ShuffleTransition>,
}

impl ShuffleAutomaton {
    pub fn new(p: &Dfa) -> Result<Self> {
        let p = if p.is_semi() { p.all_final() } else { p.clone() }.normalize()?;
        let n = p.state_count();
        let live: Vec<bool> = (0..n).map(|q| p.has_outgoing(q)).collect();
        let mut elementary = vec![false; n];
        for (_, _, t) in p.transitions() {
            elementary[t] = live[t];
        }
        let mut sa = ShuffleAutomaton { p, live, elementary, core: Vec::new() };
        sa.core = sa.compute_core();
        Ok(sa)
    }

    pub fn dfa(&self) -> &Dfa {
        &self.p
    }

    pub fn names(&self) -> &[String] {
        self.p.names()
    }

    pub fn alphabet(&self) -> &[Letter] {
        self.p.alphabet()
    }

    pub fn is_live(&self, q: usize) -> bool {
        self.live[q]
    }

    /// The same construction for P with every state final, which recognizes pre(P).
    pub fn grave(&self) -> ShuffleAutomaton {
        ShuffleAutomaton::new(&self.p.all_final()).expect("a normalized dfa stays nonempty")
    }

    /// Letters that occur in some word of P.
    pub fn used_letters(&self) -> BTreeSet<Letter> {
        self.p.transitions().map(|(_, l, _)| l.clone()).collect()
    }

    fn compute_core(&self) -> Vec<ShuffleTransition> {
        let mut out = BTreeSet::new();
        let q0 = self.p.initial();
        for li in 0..self.p.alphabet().len() {
            let a = self.p.alphabet()[li].clone();
            if let Some(p) = self.p.step_ix(q0, li) {
                if self.live[p] {
                    out.insert(tr(CounterVector::zero(), &a, CounterVector::unit(p), Kind::Start));
                }
                if self.p.is_final(p) {
                    out.insert(tr(CounterVector::zero(), &a, CounterVector::zero(), Kind::StartEnd));
                }
            }
            for q in 0..self.p.state_count() {
                if !self.elementary[q] {
                    continue;
                }
                if let Some(p) = self.p.step_ix(q, li) {
                    if self.live[p] {
                        out.insert(tr(CounterVector::unit(q), &a, CounterVector::unit(p), Kind::Inner));
                    }
                    if self.p.is_final(p) {
                        out.insert(tr(CounterVector::unit(q), &a, CounterVector::zero(), Kind::End));
                    }
                }
            }
        }
        out.into_iter().collect()
    }

    /// The finite set every transition is a shift of.
    pub fn sigma_core(&self) -> &[ShuffleTransition] {
        &self.core
    }

    pub fn successors(&self, f: &CounterVector, a: &Letter) -> Result<Vec<ShuffleTransition>> {
        let li = self.p.letter_index(a).ok_or_else(|| Error::UnknownLetter(a.to_string()))?;
        Ok(self.successors_ix(f, li))
    }

    pub fn successors_ix(&self, f: &CounterVector, li: usize) -> Vec<ShuffleTransition> {
        let a = &self.p.alphabet()[li];
        let mut out = Vec::new();
        if let Some(p) = self.p.step_ix(self.p.initial(), li) {
            if self.live[p] {
                out.push(tr(f.clone(), a, f.plus_unit(p), Kind::Start));
            }
            if self.p.is_final(p) {
                out.push(tr(f.clone(), a, f.clone(), Kind::StartEnd));
            }
        }
        for q in f.support() {
            if let Some(p) = self.p.step_ix(q, li) {
                let rest = f.minus_unit(q).expect("q in support");
                if self.live[p] {
                    out.push(tr(f.clone(), a, rest.plus_unit(p), Kind::Inner));
                }
                if self.p.is_final(p) {
                    out.push(tr(f.clone(), a, rest, Kind::End));
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Distinct targets reachable from `f` on letter index `li`.
    pub fn targets_ix(&self, f: &CounterVector, li: usize) -> Vec<CounterVector> {
        let mut t: Vec<CounterVector> = self.successors_ix(f, li).into_iter().map(|s| s.target).collect();
        t.sort();
        t.dedup();
        t
    }

    pub fn is_step(&self, s: &Step) -> bool {
        self.successors(&s.source, &s.letter)
            .map(|v| v.iter().any(|t| t.target == s.target))
            .unwrap_or(false)
    }

    /// Path condition from 0 plus every step being a transition.
    pub fn is_computation(&self, c: &[Step]) -> bool {
        let mut cur = CounterVector::zero();
        for s in c {
            if s.source != cur || !self.is_step(s) {
                return false;
            }
            cur = s.target.clone();
        }
        true
    }

    fn frontier(&self, w: &[Letter]) -> BTreeSet<CounterVector> {
        let mut front = BTreeSet::from([CounterVector::zero()]);
        for a in w {
            let Some(li) = self.p.letter_index(a) else { return BTreeSet::new() };
            let mut next = BTreeSet::new();
            for f in &front {
                next.extend(self.targets_ix(f, li));
            }
            front = next;
            if front.is_empty() {
                break;
            }
        }
        front
    }

    /// w ∈ (pre P)⧢
    pub fn pre_member(&self, w: &[Letter]) -> bool {
        !self.frontier(w).is_empty()
    }

    /// w ∈ P⧢
    pub fn member(&self, w: &[Letter]) -> bool {
        self.frontier(w).contains(&CounterVector::zero())
    }

    /// Counter vectors of elementary computations: 0 and 1_q.
    pub fn elementary_vectors(&self) -> Vec<CounterVector> {
        let mut v = vec![CounterVector::zero()];
        v.extend((0..self.p.state_count()).filter(|&q| self.elementary[q]).map(CounterVector::unit));
        v
    }

    /// Membership in Z(A_P): every counted state must be enterable by a component.
    pub fn is_reachable_vector(&self, f: &CounterVector) -> bool {
        f.support().all(|q| q < self.elementary.len() && self.elementary[q])
    }

    /// A semiautomaton recognizing the elementary computations. A closed
    /// component cannot continue, so closing leads to a separate `done` state.
    pub fn elementary_automaton(&self) -> Dfa<Step> {
        let alphabet: Vec<Step> = self.core.iter().map(|t| t.step()).collect();
        let names = self.p.names();
        let mut a = Dfa::new(alphabet, "0", true);
        let done = a.add_state("done");
        let mut ids = vec![None; self.p.state_count()];
        for q in 0..self.p.state_count() {
            if self.elementary[q] {
                ids[q] = Some(a.add_state(&CounterVector::unit(q).render_compact(names)));
            }
        }
        let state_of = |v: &CounterVector| -> usize {
            match v.support().next() {
                None => 0,
                Some(q) => ids[q].expect("elementary state"),
            }
        };
        for t in &self.core {
            let from = state_of(&t.source);
            let to = match t.kind {
                Kind::End | Kind::StartEnd => done,
                _ => state_of(&t.target),
            };
            a.add_transition(from, &t.step(), to).expect("core steps are distinct");
        }
        a.reachable_part()
    }

    pub fn render_vec(&self, f: &CounterVector) -> String {
        f.render(self.p.names())
    }

    pub fn render_step(&self, s: &Step) -> String {
        s.render(self.p.names())
    }

    pub fn parse_step(&self, s: &str) -> Option<Step> {
        Step::parse(s, self.p.names())
    }

    pub fn parse_vec(&self, s: &str) -> Option<CounterVector> {
        CounterVector::parse(s, self.p.names())
    }

    /// α: the label of a computation.
    pub fn label(c: &[Step]) -> Vec<Letter> {
        c.iter().map(|s| s.letter.clone()).collect()
    }
}

fn tr(source: CounterVector, a: &Letter, target: CounterVector, kind: Kind) -> ShuffleTransition {
    ShuffleTransition { source, letter: a.clone(), target, kind }
}

pub fn successors(p: &Dfa, f: &CounterVector, a: &Letter) -> Result<Vec<ShuffleTransition>> {
    ShuffleAutomaton::new(p)?.successors(f, a)
}

pub fn sigma_core(p: &Dfa) -> Result<Vec<ShuffleTransition>> {
    Ok(ShuffleAutomaton::new(p)?.sigma_core().to_vec())
}

pub fn pre_shuffle_member(p: &Dfa, w: &[Letter]) -> Result<bool> {
    Ok(ShuffleAutomaton::new(p)?.pre_member(w))
}

pub fn shuffle_member(p: &Dfa, w: &[Letter]) -> Result<bool> {
    Ok(ShuffleAutomaton::new(p)?.member(w))
}

pub fn elementary_automaton(p: &Dfa) -> Result<Dfa<Step>> {
    Ok(ShuffleAutomaton::new(p)?.elementary_automaton())
}

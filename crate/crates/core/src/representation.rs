//! Finite-Δ constructions: the three-track alphabet, the local language W_Δ
//! as a semiautomaton, and the closure checks built on it.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::dfa::Dfa;
use crate::error::{Error, Result};
use crate::letter::{Letter, Word};
use crate::shuffle::{Computation, Kind, ShuffleAutomaton, Step};
use crate::vector::CounterVector;

/// Track 2 of a column: a step of the factor, or the idle offset.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Track2 {
    Active(Step),
    Idle(CounterVector),
}

/// Track 3: a checked step of the removed component, the idle offset, or
/// the sentinel 0̌ after the component has closed.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Track3 {
    Active(Step),
    Idle(CounterVector),
    Done,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TrackLetter {
    pub x1: Step,
    pub x2: Track2,
    pub x3: Track3,
}

impl Track2 {
    pub fn source(&self) -> &CounterVector {
        match self {
            Track2::Active(s) => &s.source,
            Track2::Idle(h) => h,
        }
    }

    pub fn target(&self) -> &CounterVector {
        match self {
            Track2::Active(s) => &s.target,
            Track2::Idle(h) => h,
        }
    }
}

impl Track3 {
    pub fn source(&self) -> CounterVector {
        match self {
            Track3::Active(s) => s.source.clone(),
            Track3::Idle(h) => h.clone(),
            Track3::Done => CounterVector::zero(),
        }
    }

    pub fn target(&self) -> CounterVector {
        match self {
            Track3::Active(s) => s.target.clone(),
            Track3::Idle(h) => h.clone(),
            Track3::Done => CounterVector::zero(),
        }
    }
}

impl TrackLetter {
    /// Sources and targets add up across tracks.
    pub fn is_additive(&self) -> bool {
        self.x1.source == self.x2.source().add(&self.x3.source()) && self.x1.target == self.x2.target().add(&self.x3.target())
    }

    pub fn render(&self, names: &[String]) -> String {
        let t2 = match &self.x2 {
            Track2::Active(s) => s.render(names),
            Track2::Idle(h) => h.render(names),
        };
        let t3 = match &self.x3 {
            Track3::Active(s) => s.render(names),
            Track3::Idle(h) => h.render(names),
            Track3::Done => "^0".to_string(),
        };
        format!("[{} | {} | {}]", self.x1.render(names), t2, t3)
    }

    /// One token without spaces, for automaton files and DOT labels.
    pub fn render_token(&self, names: &[String]) -> String {
        let t2 = match &self.x2 {
            Track2::Active(s) => s.render_compact(names),
            Track2::Idle(h) => h.render_compact(names),
        };
        let t3 = match &self.x3 {
            Track3::Active(s) => s.render_compact(names),
            Track3::Idle(h) => h.render_compact(names),
            Track3::Done => "^0".to_string(),
        };
        format!("{}/{}/{}", self.x1.render_compact(names), t2, t3)
    }
}

impl fmt::Display for TrackLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t2 = match &self.x2 {
            Track2::Active(s) => s.to_string(),
            Track2::Idle(h) => h.to_string(),
        };
        let t3 = match &self.x3 {
            Track3::Active(s) => s.to_string(),
            Track3::Idle(h) => h.to_string(),
            Track3::Done => "^0".to_string(),
        };
        write!(f, "[{} | {} | {}]", self.x1, t2, t3)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SSets {
    pub s1: BTreeSet<CounterVector>,
    pub s2: BTreeSet<CounterVector>,
    pub s3: BTreeSet<CounterVector>,
}

/// Rejects transitions that are not steps of the S-automaton.
pub fn validate_delta(sa: &ShuffleAutomaton, delta: &BTreeSet<Step>) -> Result<()> {
    for s in delta {
        if !sa.is_step(s) {
            return Err(Error::NotSubsetOfShuffle(sa.render_step(s)));
        }
    }
    Ok(())
}

/// Vectors reachable from 0 along Δ.
pub fn delta_reachable(delta: &BTreeSet<Step>) -> BTreeSet<CounterVector> {
    let mut by_src: BTreeMap<&CounterVector, Vec<&CounterVector>> = BTreeMap::new();
    for s in delta {
        by_src.entry(&s.source).or_default().push(&s.target);
    }
    let mut seen = BTreeSet::from([CounterVector::zero()]);
    let mut queue = VecDeque::from([CounterVector::zero()]);
    while let Some(f) = queue.pop_front() {
        for &g in by_src.get(&f).map(Vec::as_slice).unwrap_or(&[]) {
            if seen.insert(g.clone()) {
                queue.push_back(g.clone());
            }
        }
    }
    seen
}

pub fn compute_s_sets(p: &Dfa, delta: &BTreeSet<Step>) -> Result<SSets> {
    let sa = ShuffleAutomaton::new(p)?;
    validate_delta(&sa, delta)?;
    Ok(s_sets(&sa, delta))
}

fn s_sets(sa: &ShuffleAutomaton, delta: &BTreeSet<Step>) -> SSets {
    let s1 = delta_reachable(delta);
    let s3: BTreeSet<CounterVector> =
        sa.elementary_vectors().into_iter().filter(|f| s1.iter().any(|g| g.dominates(f))).collect();
    let mut s2 = BTreeSet::new();
    for g in &s1 {
        for h in &s3 {
            if let Some(f) = g.sub(h) {
                if sa.is_reachable_vector(&f) {
                    s2.insert(f);
                }
            }
        }
    }
    SSets { s1, s2, s3 }
}

fn delta_letters(delta: &BTreeSet<Step>) -> BTreeSet<Letter> {
    delta.iter().map(|s| s.letter.clone()).collect()
}

/// Δ^(): all columns over x1 ∈ Δ satisfying letter agreement and additivity.
pub fn build_delta_paren(p: &Dfa, delta: &BTreeSet<Step>) -> Result<Vec<TrackLetter>> {
    let sa = ShuffleAutomaton::new(p)?;
    validate_delta(&sa, delta)?;
    Ok(columns(&sa, delta, &s_sets(&sa, delta)))
}

fn columns(sa: &ShuffleAutomaton, delta: &BTreeSet<Step>, s: &SSets) -> Vec<TrackLetter> {
    let letters = delta_letters(delta);
    let mut d2 = Vec::new();
    for f in &s.s2 {
        for a in &letters {
            for t in sa.successors(f, a).unwrap_or_default() {
                if s.s2.contains(&t.target) {
                    d2.push(t.step());
                }
            }
        }
    }
    d2.sort();
    d2.dedup();
    let d3: Vec<Step> = sa
        .sigma_core()
        .iter()
        .filter(|t| letters.contains(&t.letter) && s.s3.contains(&t.source) && s.s3.contains(&t.target))
        .map(|t| Step::new(t.source.clone(), t.letter.check(), t.target.clone()))
        .collect();
    let mut out = BTreeSet::new();
    for x1 in delta {
        for y in d2.iter().filter(|y| y.letter == x1.letter) {
            let (Some(h), Some(h2)) = (x1.source.sub(&y.source), x1.target.sub(&y.target)) else { continue };
            if h != h2 || !s.s3.contains(&h) {
                continue;
            }
            if h.is_zero() {
                out.insert(TrackLetter { x1: x1.clone(), x2: Track2::Active(y.clone()), x3: Track3::Done });
            }
            out.insert(TrackLetter { x1: x1.clone(), x2: Track2::Active(y.clone()), x3: Track3::Idle(h) });
        }
        for z in d3.iter().filter(|z| z.letter.uncheck() == x1.letter) {
            let (Some(h), Some(h2)) = (x1.source.sub(&z.source), x1.target.sub(&z.target)) else { continue };
            if h != h2 || !s.s2.contains(&h) {
                continue;
            }
            out.insert(TrackLetter { x1: x1.clone(), x2: Track2::Idle(h), x3: Track3::Active(z.clone()) });
        }
    }
    out.into_iter().collect()
}

/// Track-3 part of a W_Δ state.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum T3 {
    At(CounterVector),
    Done,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WState {
    pub q1: CounterVector,
    pub q2: CounterVector,
    pub q3: T3,
}

impl WState {
    pub fn render(&self, names: &[String]) -> String {
        let q3 = match &self.q3 {
            T3::At(f) => f.render_compact(names),
            T3::Done => "^0".into(),
        };
        format!("({},{},{})", self.q1.render_compact(names), self.q2.render_compact(names), q3)
    }
}

/// The state after reading `x` in `s`, if the local constraints allow it.
pub fn w_step(s: &WState, x: &TrackLetter) -> Option<WState> {
    if x.x1.source != s.q1 || x.x2.source() != &s.q2 {
        return None;
    }
    let q3 = match (&x.x3, &s.q3) {
        (Track3::Active(z), T3::At(f)) if &z.source == f => {
            if z.target.is_zero() {
                T3::Done
            } else {
                T3::At(z.target.clone())
            }
        }
        (Track3::Idle(h), T3::At(f)) if h == f => T3::At(h.clone()),
        (Track3::Done, T3::Done) => T3::Done,
        _ => return None,
    };
    Some(WState { q1: x.x1.target.clone(), q2: x.x2.target().clone(), q3 })
}

/// W_Δ as a deterministic semiautomaton over its columns, reachable part only.
#[derive(Clone, Debug)]
pub struct LocalLanguageAutomaton {
    pub automaton: Dfa<TrackLetter>,
    pub states: Vec<WState>,
    pub sets: SSets,
    names: Vec<String>,
}

impl LocalLanguageAutomaton {
    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// ν(μ⁻¹({c}) ∩ W_Δ)
    pub fn factors_of(&self, c: &[Step]) -> BTreeSet<Computation> {
        let a = &self.automaton;
        let mut layer: BTreeSet<(usize, Computation)> = BTreeSet::from([(a.initial(), Vec::new())]);
        for step in c {
            let mut next = BTreeSet::new();
            for (s, nu) in &layer {
                for (li, x) in a.alphabet().iter().enumerate() {
                    if &x.x1 != step {
                        continue;
                    }
                    if let Some(t) = a.step_ix(*s, li) {
                        let mut nu2 = nu.clone();
                        if let Track2::Active(y) = &x.x2 {
                            nu2.push(y.clone());
                        }
                        next.insert((t, nu2));
                    }
                }
            }
            layer = next;
        }
        layer.into_iter().map(|(_, nu)| nu).collect()
    }

    /// Same automaton with each column rendered as a plain letter.
    pub fn to_letter_dfa(&self) -> Dfa {
        let names = self.names.clone();
        self.automaton.map_letters(|x| Letter::new(x.render_token(&names)))
    }
}

pub fn build_w_delta(p: &Dfa, delta: &BTreeSet<Step>) -> Result<LocalLanguageAutomaton> {
    let sa = ShuffleAutomaton::new(p)?;
    validate_delta(&sa, delta)?;
    Ok(w_delta(&sa, delta))
}

fn w_delta(sa: &ShuffleAutomaton, delta: &BTreeSet<Step>) -> LocalLanguageAutomaton {
    let sets = s_sets(sa, delta);
    let cols = columns(sa, delta, &sets);
    let names = sa.names().to_vec();
    let start = WState { q1: CounterVector::zero(), q2: CounterVector::zero(), q3: T3::At(CounterVector::zero()) };
    let mut auto = Dfa::new(cols.clone(), &start.render(&names), true);
    let mut ids: HashMap<WState, usize> = HashMap::from([(start.clone(), 0)]);
    let mut states = vec![start];
    let mut queue = VecDeque::from([0usize]);
    let mut by_q1: BTreeMap<&CounterVector, Vec<&TrackLetter>> = BTreeMap::new();
    for x in &cols {
        by_q1.entry(&x.x1.source).or_default().push(x);
    }
    while let Some(i) = queue.pop_front() {
        let s = states[i].clone();
        for &x in by_q1.get(&s.q1).map(Vec::as_slice).unwrap_or(&[]) {
            let Some(t) = w_step(&s, x) else { continue };
            let j = *ids.entry(t.clone()).or_insert_with(|| {
                states.push(t.clone());
                queue.push_back(states.len() - 1);
                auto.add_state(&t.render(&names))
            });
            auto.add_transition(i, x, j).expect("deterministic by construction");
        }
    }
    LocalLanguageAutomaton { automaton: auto, states, sets, names }
}

/// (μ(x), ν(x)): track 1, and track 2 with idle letters erased.
pub fn mu_nu_project(x: &[TrackLetter]) -> (Computation, Computation) {
    let mu = x.iter().map(|t| t.x1.clone()).collect();
    let nu = x
        .iter()
        .filter_map(|t| match &t.x2 {
            Track2::Active(y) => Some(y.clone()),
            Track2::Idle(_) => None,
        })
        .collect();
    (mu, nu)
}

/// A falsifying W_Δ word with its decoded words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrackWitness {
    pub track: Vec<TrackLetter>,
    pub w: Word,
    pub u: Word,
    pub e: Word,
    pub positions: Vec<usize>,
}

impl TrackWitness {
    pub fn decode(track: Vec<TrackLetter>) -> Self {
        let (mu, nu) = mu_nu_project(&track);
        let mut e = Vec::new();
        let mut positions = Vec::new();
        for (i, x) in track.iter().enumerate() {
            if let Track3::Active(z) = &x.x3 {
                e.push(z.letter.uncheck());
                positions.push(i + 1);
            }
        }
        TrackWitness { w: ShuffleAutomaton::label(&mu), u: ShuffleAutomaton::label(&nu), e, positions, track }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClosureOutcome {
    Holds { product_states: usize },
    Fails(TrackWitness),
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Target {
    Prefix,
    Zero,
}

fn closure_search(sa: &ShuffleAutomaton, v: &Dfa, delta: &BTreeSet<Step>, target: Target) -> Result<ClosureOutcome> {
    let vc = v.normalize()?.complete();
    let pa = sa.alphabet();
    if vc.alphabet().len() != pa.len() || !vc.alphabet().iter().all(|a| pa.contains(a)) {
        return Err(Error::AlphabetMismatch);
    }
    let co = vc.coreachable();
    let w = w_delta(sa, delta);
    let wa = &w.automaton;
    type Node = (usize, usize, usize);
    let start: Node = (wa.initial(), vc.initial(), vc.initial());
    let mut parent: HashMap<Node, Option<(Node, usize)>> = HashMap::from([(start, None)]);
    let mut queue = VecDeque::from([start]);
    let is_target = |n: &Node| -> bool {
        let (s, v1, v2) = *n;
        let base = vc.is_final(v1) && !vc.is_final(v2);
        match target {
            Target::Prefix => base,
            Target::Zero => base && w.states[s].q1.is_zero() && w.states[s].q3 == T3::Done,
        }
    };
    while let Some(n) = queue.pop_front() {
        if is_target(&n) {
            let mut track = Vec::new();
            let mut cur = n;
            while let Some(Some((prev, li))) = parent.get(&cur) {
                track.push(wa.alphabet()[*li].clone());
                cur = *prev;
            }
            track.reverse();
            return Ok(ClosureOutcome::Fails(TrackWitness::decode(track)));
        }
        let (s, v1, v2) = n;
        for (li, x) in wa.alphabet().iter().enumerate() {
            let Some(t) = wa.step_ix(s, li) else { continue };
            let Some(n1) = vc.step(v1, &x.x1.letter) else { continue };
            let keep = match target {
                Target::Prefix => vc.is_final(n1),
                Target::Zero => co[n1],
            };
            if !keep {
                continue;
            }
            let n2 = match &x.x2 {
                Track2::Active(y) => match vc.step(v2, &y.letter) {
                    Some(q) => q,
                    None => continue,
                },
                Track2::Idle(_) => v2,
            };
            let next = (t, n1, n2);
            if !parent.contains_key(&next) {
                parent.insert(next, Some((n, li)));
                queue.push_back(next);
            }
        }
    }
    Ok(ClosureOutcome::Holds { product_states: parent.len() })
}

/// Closure of α⁻¹(V) under one-component removal, for V prefix closed and
/// α⁻¹(V) ⊆ Δ*. `covered` must assert the latter.
pub fn check_closure_prefix(p: &Dfa, v: &Dfa, delta: &BTreeSet<Step>, covered: bool) -> Result<ClosureOutcome> {
    if !covered {
        return Err(Error::PreconditionUnverified);
    }
    if !v.is_prefix_closed() {
        return Err(Error::NotPrefixClosed);
    }
    let sa = ShuffleAutomaton::new(p)?;
    validate_delta(&sa, delta)?;
    closure_search(&sa, v, delta, Target::Prefix)
}

/// The same for computations ending in 0 with label in V; `covered` must
/// assert that every such computation lies in Δ*.
pub fn check_closure_zero(p: &Dfa, v: &Dfa, delta: &BTreeSet<Step>, covered: bool) -> Result<ClosureOutcome> {
    if !covered {
        return Err(Error::PreconditionUnverified);
    }
    let sa = ShuffleAutomaton::new(p)?;
    validate_delta(&sa, delta)?;
    closure_search(&sa, v, delta, Target::Zero)
}

/// Checks α⁻¹(V) ⊆ Δ* exactly: every S-step readable in V from a state
/// reached along Δ must itself be in Δ. V is read as a prefix-closed language.
pub fn verify_prefix_coverage(p: &Dfa, v: &Dfa, delta: &BTreeSet<Step>) -> Result<bool> {
    let sa = ShuffleAutomaton::new(p)?;
    let vd = v.normalize()?;
    let start = (CounterVector::zero(), vd.initial());
    let mut seen = BTreeSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some((f, q)) = queue.pop_front() {
        for (li, a) in sa.alphabet().iter().enumerate() {
            let Some(q2) = vd.step(q, a) else { continue };
            for t in sa.successors_ix(&f, li) {
                if !delta.contains(&t.step()) {
                    return Ok(false);
                }
                let n = (t.target, q2);
                if seen.insert(n.clone()) {
                    queue.push_back(n);
                }
            }
        }
    }
    Ok(true)
}

/// Δ̀ for the grave automaton: steps of P̀ between vectors below the Δ-reachable
/// ones, on letters of Δ.
pub fn grave_transfer(p: &Dfa, delta: &BTreeSet<Step>) -> Result<BTreeSet<Step>> {
    let sa = ShuffleAutomaton::new(p)?;
    let grave = sa.grave();
    let mut below = BTreeSet::new();
    for g in delta_reachable(delta) {
        below.extend(downward_closure(&g));
    }
    let letters = delta_letters(delta);
    let mut out = BTreeSet::new();
    for f in &below {
        for a in &letters {
            for t in grave.successors(f, a)? {
                if below.contains(&t.target) {
                    out.insert(t.step());
                }
            }
        }
    }
    Ok(out)
}

pub fn downward_closure(g: &CounterVector) -> BTreeSet<CounterVector> {
    let mut out = BTreeSet::from([g.clone()]);
    let mut queue = vec![g.clone()];
    while let Some(f) = queue.pop() {
        for q in f.support().collect::<Vec<_>>() {
            let h = f.minus_unit(q).expect("in support");
            if out.insert(h.clone()) {
                queue.push(h);
            }
        }
    }
    out
}

/// Parses a Δ file: one step per line, `(src) a (tgt)`.
pub fn parse_delta(text: &str, names: &[String]) -> Result<BTreeSet<Step>> {
    let mut out = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        let l = line.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        let s = Step::parse(l, names).ok_or_else(|| Error::Syntax { line: i + 1, msg: format!("bad step `{l}`") })?;
        out.insert(s);
    }
    Ok(out)
}

/// Kinds of the steps in Δ, for display.
pub fn step_kind(sa: &ShuffleAutomaton, s: &Step) -> Option<Kind> {
    sa.successors(&s.source, &s.letter).ok()?.into_iter().find(|t| t.target == s.target).map(|t| t.kind)
}

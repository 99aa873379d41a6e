//! Deciding SP for a regular pair: cheap falsification first, then the
//! finite-alphabet representation routes, then the net and its abstraction.
//! Every conclusive verdict carries a certificate that [`replay_certificate`]
//! rechecks without trusting the route that produced it.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::budget::Budget;
use crate::dfa::Dfa;
use crate::error::{Error, Result};
use crate::letter::{parse_word, render_word, Letter};
use crate::oracle::{sp_falsify, Witness};
use crate::petri::{self, AbstractionOutcome, AlfPre, AlfZero, NetOutcome, NetTarget};
use crate::representation::{self, ClosureOutcome};
use crate::shuffle::{ShuffleAutomaton, Step};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// SP(pre(P), V) for prefix-closed V
    Prefix,
    /// SP(P ∪ {ε}, V)
    General,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Prefix => "prefix",
            Mode::General => "general",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "prefix" => Some(Mode::Prefix),
            "general" => Some(Mode::General),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SpQuery {
    pub p: Dfa,
    pub v: Dfa,
    pub mode: Mode,
    pub budget: Budget,
}

impl SpQuery {
    pub fn new(p: Dfa, v: Dfa, mode: Mode) -> Self {
        SpQuery { p, v, mode, budget: Budget::default() }
    }

    pub fn with_budget(mut self, budget: Budget) -> Self {
        self.budget = budget;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    Trivial,
    Falsifier,
    /// finite Δ for α⁻¹(pre V) and the prefix closure check
    PrefixDelta,
    /// finite Δ̀ for the zero computations of the grave automaton
    GraveDelta,
    /// finite Δ̀ for the zero computations of P
    ZeroDelta,
    NetExhaustive,
    NetSearch,
    CounterAbstraction,
}

const ROUTES: [(Route, &str); 8] = [
    (Route::Trivial, "trivial"),
    (Route::Falsifier, "falsifier"),
    (Route::PrefixDelta, "prefix-delta"),
    (Route::GraveDelta, "grave-delta"),
    (Route::ZeroDelta, "zero-delta"),
    (Route::NetExhaustive, "net-exhaustive"),
    (Route::NetSearch, "net-search"),
    (Route::CounterAbstraction, "counter-abstraction"),
];

impl Route {
    pub fn name(self) -> &'static str {
        ROUTES.iter().find(|(r, _)| *r == self).map(|(_, n)| *n).expect("every route named")
    }

    pub fn parse(s: &str) -> Option<Route> {
        ROUTES.iter().find(|(_, n)| *n == s).map(|(r, _)| *r)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HoldsCertificate {
    pub route: Route,
    /// Δ or Δ̀ for the representation routes, empty otherwise
    pub delta: BTreeSet<Step>,
    /// cap of the counter abstraction
    pub k: Option<u32>,
    /// states or markings the closing search visited
    pub explored: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FailsCertificate {
    pub route: Route,
    pub witness: Witness,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds(HoldsCertificate),
    Fails(FailsCertificate),
    /// what each route found before giving up
    Unknown(Vec<String>),
}

impl Verdict {
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Holds(_) => 0,
            Verdict::Fails(_) => 1,
            Verdict::Unknown(_) => 2,
        }
    }

    pub fn outcome(&self) -> &'static str {
        match self {
            Verdict::Holds(_) => "holds",
            Verdict::Fails(_) => "fails",
            Verdict::Unknown(_) => "unknown",
        }
    }

    pub fn route(&self) -> Option<Route> {
        match self {
            Verdict::Holds(c) => Some(c.route),
            Verdict::Fails(c) => Some(c.route),
            Verdict::Unknown(_) => None,
        }
    }
}

fn same_alphabet(p: &Dfa, v: &Dfa) -> bool {
    let a: BTreeSet<&Letter> = p.alphabet().iter().collect();
    let b: BTreeSet<&Letter> = v.alphabet().iter().collect();
    a == b
}

/// V accepts every word over its alphabet.
fn is_universal(v: &Dfa) -> bool {
    let Ok(n) = v.normalize() else { return false };
    let c = n.complete();
    let reach = c.reachable();
    (0..c.state_count()).all(|s| !reach[s] || c.is_final(s))
}

/// The automaton whose components are deleted: P itself, or the grave
/// automaton recognizing pre(P).
fn component_automaton(p: &Dfa, mode: Mode) -> Result<Dfa> {
    let n = if p.is_semi() { p.all_final() } else { p.clone() }.normalize()?;
    Ok(match mode {
        Mode::General => n,
        Mode::Prefix => n.all_final(),
    })
}

fn trivial(explored: usize) -> Verdict {
    Verdict::Holds(HoldsCertificate { route: Route::Trivial, delta: BTreeSet::new(), k: None, explored })
}

fn holds(route: Route, delta: BTreeSet<Step>, explored: usize) -> Verdict {
    Verdict::Holds(HoldsCertificate { route, delta, k: None, explored })
}

fn fails(route: Route, witness: Witness) -> Verdict {
    Verdict::Fails(FailsCertificate { route, witness })
}

fn track_fails(route: Route, t: representation::TrackWitness) -> Verdict {
    fails(route, Witness { w: t.w, u: t.u, e: t.e, positions: t.positions })
}

pub fn decide_sp(q: &SpQuery) -> Result<Verdict> {
    if !same_alphabet(&q.p, &q.v) {
        return Err(Error::InvalidQuery("P and V have different alphabets".into()));
    }
    if q.mode == Mode::Prefix && !q.v.is_prefix_closed() {
        return Err(Error::InvalidQuery("prefix mode needs a prefix-closed V".into()));
    }
    if q.p.is_empty_language() || q.v.is_empty_language() || is_universal(&q.v) {
        return Ok(trivial(0));
    }
    let b = &q.budget;
    let comp = component_automaton(&q.p, q.mode)?;
    let mut notes = Vec::new();

    match sp_falsify(&comp, &q.v, b.falsify_len, &b.oracle_caps()) {
        Ok(Some(w)) => return Ok(fails(Route::Falsifier, w)),
        Ok(None) => notes.push(format!("falsifier: no witness up to length {}", b.falsify_len)),
        Err(e) => notes.push(format!("falsifier: {e}")),
    }

    if q.mode == Mode::Prefix {
        match petri::decide_alf_pre_finite(&q.p, &q.v, b)? {
            AlfPre::Finite { delta, .. } => {
                let covered = representation::verify_prefix_coverage(&q.p, &q.v, &delta)?;
                return Ok(match representation::check_closure_prefix(&q.p, &q.v, &delta, covered)? {
                    ClosureOutcome::Holds { product_states } => holds(Route::PrefixDelta, delta, product_states),
                    ClosureOutcome::Fails(t) => track_fails(Route::PrefixDelta, t),
                });
            }
            AlfPre::Infinite { computation, .. } => {
                notes.push(format!("prefix alphabet: infinite, pump of length {}", computation.len()))
            }
            AlfPre::Unknown(why) => notes.push(format!("prefix alphabet: {why}")),
        }
    }

    let (zero_route, zero_p) = match q.mode {
        Mode::Prefix => (Route::GraveDelta, comp.clone()),
        Mode::General => (Route::ZeroDelta, q.p.clone()),
    };
    match petri::decide_alf_zero_finite(&zero_p, &q.v, b)? {
        AlfZero::Finite { delta, .. } => {
            return Ok(match representation::check_closure_zero(&zero_p, &q.v, &delta, true)? {
                ClosureOutcome::Holds { product_states } => holds(zero_route, delta, product_states),
                ClosureOutcome::Fails(t) => track_fails(zero_route, t),
            });
        }
        AlfZero::Infinite(pump) => notes.push(format!(
            "zero alphabet: infinite, pump {}+{}+{} steps",
            pump.prefix.len(),
            pump.up.len(),
            pump.down.len()
        )),
        AlfZero::Unknown(why) => notes.push(format!("zero alphabet: {why}")),
    }

    let target = match q.mode {
        Mode::Prefix => NetTarget::Prefix,
        Mode::General => NetTarget::Zero,
    };
    for k in 1..=b.abstraction_k {
        match petri::counter_abstraction(&q.p, &q.v, target, k, b.markings)? {
            AbstractionOutcome::Proved { states } => {
                return Ok(Verdict::Holds(HoldsCertificate {
                    route: Route::CounterAbstraction,
                    delta: BTreeSet::new(),
                    k: Some(k),
                    explored: states,
                }))
            }
            AbstractionOutcome::Inconclusive => notes.push(format!("abstraction k={k}: target reachable")),
            AbstractionOutcome::Budget => {
                notes.push(format!("abstraction k={k}: more than {} states", b.markings));
                break;
            }
        }
    }

    match petri::decide_sp_via_net(&q.p, &q.v, target, b)? {
        NetOutcome::Holds { markings, .. } => return Ok(holds(Route::NetExhaustive, BTreeSet::new(), markings)),
        NetOutcome::Fails { witness, .. } => return Ok(fails(Route::NetSearch, witness)),
        NetOutcome::Unknown(why) => notes.push(format!("net: {why}")),
    }
    Ok(Verdict::Unknown(notes))
}

/// Rechecks a verdict against its query. Fails certificates are checked by
/// direct membership tests; Holds certificates by rerunning the inclusion
/// checks of their route on the stored artifacts.
pub fn replay_certificate(q: &SpQuery, v: &Verdict) -> Result<bool> {
    match v {
        Verdict::Unknown(_) => Err(Error::MalformedCertificate("an unknown verdict has no certificate".into())),
        Verdict::Fails(c) => replay_fails(q, &c.witness),
        Verdict::Holds(c) => replay_holds(q, c),
    }
}

fn replay_fails(q: &SpQuery, wit: &Witness) -> Result<bool> {
    let comp = component_automaton(&q.p, q.mode)?;
    let sa = ShuffleAutomaton::new(&comp)?;
    let pos = &wit.positions;
    if wit.e.is_empty() || pos.len() != wit.e.len() || pos.windows(2).any(|x| x[0] >= x[1]) {
        return Ok(false);
    }
    if pos.first() == Some(&0) || pos.last().is_some_and(|&l| l > wit.w.len()) {
        return Ok(false);
    }
    let mut u = Vec::new();
    let mut e = Vec::new();
    for (i, a) in wit.w.iter().enumerate() {
        if pos.contains(&(i + 1)) {
            e.push(a.clone());
        } else {
            u.push(a.clone());
        }
    }
    if u != wit.u || e != wit.e {
        return Ok(false);
    }
    let in_v = |x: &[Letter]| q.v.accepts(x).unwrap_or(false);
    Ok(comp.accepts(&e).unwrap_or(false) && sa.member(&u) && in_v(&wit.w) && !in_v(&wit.u))
}

fn replay_holds(q: &SpQuery, c: &HoldsCertificate) -> Result<bool> {
    let b = &q.budget;
    let comp = component_automaton(&q.p, q.mode)?;
    Ok(match c.route {
        Route::Trivial => q.p.is_empty_language() || q.v.is_empty_language() || is_universal(&q.v),
        Route::Falsifier => false,
        Route::PrefixDelta => {
            q.mode == Mode::Prefix
                && representation::verify_prefix_coverage(&q.p, &q.v, &c.delta)?
                && matches!(
                    representation::check_closure_prefix(&q.p, &q.v, &c.delta, true),
                    Ok(ClosureOutcome::Holds { .. })
                )
        }
        Route::GraveDelta | Route::ZeroDelta => {
            let zp = if c.route == Route::GraveDelta { comp } else { q.p.clone() };
            let again = matches!(
                petri::decide_alf_zero_finite(&zp, &q.v, b)?,
                AlfZero::Finite { ref delta, .. } if *delta == c.delta
            );
            again
                && matches!(representation::check_closure_zero(&zp, &q.v, &c.delta, true), Ok(ClosureOutcome::Holds { .. }))
        }
        Route::CounterAbstraction => {
            let target = if q.mode == Mode::Prefix { NetTarget::Prefix } else { NetTarget::Zero };
            let Some(k) = c.k else { return Err(Error::MalformedCertificate("abstraction without k".into())) };
            matches!(
                petri::counter_abstraction(&q.p, &q.v, target, k, b.markings)?,
                AbstractionOutcome::Proved { states } if states == c.explored
            )
        }
        Route::NetExhaustive | Route::NetSearch => {
            let target = if q.mode == Mode::Prefix { NetTarget::Prefix } else { NetTarget::Zero };
            matches!(petri::decide_sp_via_net(&q.p, &q.v, target, b)?, NetOutcome::Holds { markings, .. } if markings == c.explored)
        }
    })
}

/// Names used to render counter vectors of the query's P.
fn state_names(q: &SpQuery) -> Vec<String> {
    component_automaton(&q.p, q.mode).map(|d| d.names().to_vec()).unwrap_or_default()
}

/// The text report: sections VERDICT, ROUTE, CERTIFICATE and BUDGETS.
pub fn render_report(q: &SpQuery, v: &Verdict) -> String {
    let names = state_names(q);
    let mut s = String::new();
    let _ = writeln!(s, "VERDICT\n  {}\n  mode: {}", v.outcome(), q.mode.name());
    let _ = writeln!(s, "ROUTE\n  {}", v.route().map_or("none", Route::name));
    s.push_str("CERTIFICATE\n");
    match v {
        Verdict::Holds(c) => {
            for d in &c.delta {
                let _ = writeln!(s, "  delta: {}", d.render(&names));
            }
            if let Some(k) = c.k {
                let _ = writeln!(s, "  k: {k}");
            }
            let _ = writeln!(s, "  explored: {}", c.explored);
        }
        Verdict::Fails(c) => {
            let w = &c.witness;
            let _ = writeln!(s, "  word: {}", render_word(&w.w));
            let _ = writeln!(s, "  factor: {}", render_word(&w.u));
            let _ = writeln!(s, "  component: {}", render_word(&w.e));
            let pos: Vec<String> = w.positions.iter().map(|p| p.to_string()).collect();
            let _ = writeln!(s, "  positions: {}", pos.join(" "));
        }
        Verdict::Unknown(notes) => {
            for n in notes {
                let _ = writeln!(s, "  note: {n}");
            }
        }
    }
    s.push_str("BUDGETS\n");
    for (k, val) in q.budget.entries() {
        let _ = writeln!(s, "  {k}: {val}");
    }
    s
}

/// The key-value twin of [`render_report`], one `key=value` per line.
pub fn render_keyvalue(q: &SpQuery, v: &Verdict) -> String {
    let names = state_names(q);
    let mut s = String::new();
    let _ = writeln!(s, "verdict={}\nmode={}\nroute={}", v.outcome(), q.mode.name(), v.route().map_or("none", Route::name));
    match v {
        Verdict::Holds(c) => {
            let d: Vec<String> = c.delta.iter().map(|d| d.render(&names)).collect();
            let _ = writeln!(s, "delta={}", d.join(";"));
            if let Some(k) = c.k {
                let _ = writeln!(s, "k={k}");
            }
            let _ = writeln!(s, "explored={}", c.explored);
        }
        Verdict::Fails(c) => {
            let w = &c.witness;
            let pos: Vec<String> = w.positions.iter().map(|p| p.to_string()).collect();
            let _ = writeln!(
                s,
                "word={}\nfactor={}\ncomponent={}\npositions={}",
                render_word(&w.w),
                render_word(&w.u),
                render_word(&w.e),
                pos.join(",")
            );
        }
        Verdict::Unknown(notes) => {
            for n in notes {
                let _ = writeln!(s, "note={n}");
            }
        }
    }
    for (k, val) in q.budget.entries() {
        let _ = writeln!(s, "budget.{k}={val}");
    }
    s
}

/// Reads back a text report produced for the same P.
pub fn parse_report(q: &SpQuery, text: &str) -> Result<Verdict> {
    let bad = |m: &str| Error::MalformedCertificate(m.to_string());
    let names = state_names(q);
    let mut section = "";
    let mut outcome = None;
    let mut route = None;
    let mut delta = BTreeSet::new();
    let mut k = None;
    let mut explored = 0;
    let mut fields: [Option<String>; 4] = Default::default();
    let mut notes = Vec::new();
    for line in text.lines() {
        if !line.starts_with(' ') && !line.trim().is_empty() {
            section = line.trim();
            continue;
        }
        let l = line.trim();
        if l.is_empty() {
            continue;
        }
        match section {
            "VERDICT" if outcome.is_none() => outcome = Some(l.to_string()),
            "ROUTE" => route = Route::parse(l),
            "CERTIFICATE" => {
                let (key, val) = l.split_once(':').ok_or_else(|| bad(l))?;
                let val = val.trim();
                match key {
                    "delta" => {
                        delta.insert(Step::parse(val, &names).ok_or_else(|| bad(val))?);
                    }
                    "k" => k = Some(val.parse().map_err(|_| bad(val))?),
                    "explored" => explored = val.parse().map_err(|_| bad(val))?,
                    "word" => fields[0] = Some(val.to_string()),
                    "factor" => fields[1] = Some(val.to_string()),
                    "component" => fields[2] = Some(val.to_string()),
                    "positions" => fields[3] = Some(val.to_string()),
                    "note" => notes.push(val.to_string()),
                    _ => return Err(bad(key)),
                }
            }
            _ => {}
        }
    }
    match outcome.as_deref() {
        Some("holds") => {
            let route = route.ok_or_else(|| bad("missing route"))?;
            Ok(Verdict::Holds(HoldsCertificate { route, delta, k, explored }))
        }
        Some("fails") => {
            let route = route.ok_or_else(|| bad("missing route"))?;
            let word = |i: usize| -> Result<Vec<Letter>> {
                let s = fields[i].as_deref().ok_or_else(|| bad("missing word"))?;
                parse_word(s).ok_or_else(|| bad(s))
            };
            let positions = fields[3]
                .as_deref()
                .ok_or_else(|| bad("missing positions"))?
                .split_whitespace()
                .map(|p| p.parse().map_err(|_| bad(p)))
                .collect::<Result<Vec<usize>>>()?;
            let witness = Witness { w: word(0)?, u: word(1)?, e: word(2)?, positions };
            Ok(Verdict::Fails(FailsCertificate { route, witness }))
        }
        Some("unknown") => Ok(Verdict::Unknown(notes)),
        _ => Err(bad("missing verdict")),
    }
}

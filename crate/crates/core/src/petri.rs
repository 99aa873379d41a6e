//! Petri nets simulating the S-automaton products: the net N_PV for the
//! finiteness questions, the net N_P^V for the closure question, Karp-Miller
//! boundedness, and the searches layered on top.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use crate::budget::Budget;
use crate::dfa::Dfa;
use crate::error::{Error, Result};
use crate::oracle::Witness;
use crate::representation::T3;
use crate::shuffle::{Computation, Kind, ShuffleAutomaton, Step};
use crate::vector::CounterVector;

/// Token count standing for "arbitrarily many".
pub const OMEGA: u32 = u32::MAX;

pub type Marking = Vec<u32>;

/// A plain place/transition net: every arc has weight one.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PetriNet {
    pub places: Vec<String>,
    pub transitions: Vec<String>,
    pub inputs: Vec<Vec<usize>>,
    pub outputs: Vec<Vec<usize>>,
    pub initial: Marking,
}

impl PetriNet {
    pub fn new() -> Self {
        PetriNet::default()
    }

    pub fn add_place(&mut self, name: &str, tokens: u32) -> usize {
        self.places.push(name.to_string());
        self.initial.push(tokens);
        self.places.len() - 1
    }

    pub fn add_transition(&mut self, name: &str, mut inputs: Vec<usize>, mut outputs: Vec<usize>) -> usize {
        inputs.sort_unstable();
        inputs.dedup();
        outputs.sort_unstable();
        outputs.dedup();
        self.transitions.push(name.to_string());
        self.inputs.push(inputs);
        self.outputs.push(outputs);
        self.transitions.len() - 1
    }

    pub fn place_index(&self, name: &str) -> Option<usize> {
        self.places.iter().position(|p| p == name)
    }

    pub fn is_enabled(&self, m: &[u32], t: usize) -> bool {
        self.inputs[t].iter().all(|&p| m[p] > 0)
    }

    /// The marking after firing `t`, ω entries staying ω.
    pub fn fire(&self, m: &[u32], t: usize) -> Option<Marking> {
        if !self.is_enabled(m, t) {
            return None;
        }
        let mut out = m.to_vec();
        for &p in &self.inputs[t] {
            if out[p] != OMEGA {
                out[p] -= 1;
            }
        }
        for &p in &self.outputs[t] {
            if out[p] != OMEGA {
                out[p] += 1;
            }
        }
        Some(out)
    }

    pub fn fire_sequence(&self, m: &[u32], seq: &[usize]) -> Option<Marking> {
        let mut cur = m.to_vec();
        for &t in seq {
            cur = self.fire(&cur, t)?;
        }
        Some(cur)
    }

    /// `place:count` pairs for the marked places.
    pub fn render_marking(&self, m: &[u32]) -> String {
        let parts: Vec<String> = m
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(p, &c)| if c == OMEGA { format!("{}:w", self.places[p]) } else { format!("{}:{c}", self.places[p]) })
            .collect();
        parts.join(" ")
    }

    pub fn parse_marking(&self, s: &str) -> Option<Marking> {
        let mut m = vec![0; self.places.len()];
        for tok in s.split_whitespace() {
            let (name, count) = tok.rsplit_once(':')?;
            let c = if count == "w" { OMEGA } else { count.parse().ok()? };
            m[self.place_index(name)?] = c;
        }
        Some(m)
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph net {\n  rankdir=LR;\n");
        for (i, p) in self.places.iter().enumerate() {
            let _ = writeln!(s, "  p{i} [shape=circle,label=\"{}\\n{}\"];", dot_escape(p), self.initial[i]);
        }
        for (i, t) in self.transitions.iter().enumerate() {
            let _ = writeln!(s, "  t{i} [shape=box,label=\"{}\"];", dot_escape(t));
            for p in &self.inputs[i] {
                let _ = writeln!(s, "  p{p} -> t{i};");
            }
            for p in &self.outputs[i] {
                let _ = writeln!(s, "  t{i} -> p{p};");
            }
        }
        s.push_str("}\n");
        s
    }

    /// The standard place/transition subset of PNML.
    pub fn to_pnml(&self) -> String {
        let mut s = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        s.push_str("<pnml xmlns=\"http://www.pnml.org/version-2009/grammar/pnml\">\n");
        s.push_str("  <net id=\"net\" type=\"http://www.pnml.org/version-2009/grammar/ptnet\">\n    <page id=\"page\">\n");
        for (i, p) in self.places.iter().enumerate() {
            let _ = write!(s, "      <place id=\"p{i}\"><name><text>{}</text></name>", xml_escape(p));
            if self.initial[i] > 0 {
                let _ = write!(s, "<initialMarking><text>{}</text></initialMarking>", self.initial[i]);
            }
            s.push_str("</place>\n");
        }
        for (i, t) in self.transitions.iter().enumerate() {
            let _ = writeln!(s, "      <transition id=\"t{i}\"><name><text>{}</text></name></transition>", xml_escape(t));
        }
        let mut arc = 0;
        for i in 0..self.transitions.len() {
            for p in &self.inputs[i] {
                let _ = writeln!(s, "      <arc id=\"a{arc}\" source=\"p{p}\" target=\"t{i}\"/>");
                arc += 1;
            }
            for p in &self.outputs[i] {
                let _ = writeln!(s, "      <arc id=\"a{arc}\" source=\"t{i}\" target=\"p{p}\"/>");
                arc += 1;
            }
        }
        s.push_str("    </page>\n  </net>\n</pnml>\n");
        s
    }

    pub fn from_pnml(text: &str) -> Result<PetriNet> {
        let bad = |msg: String| Error::Syntax { line: 0, msg };
        let doc = roxmltree::Document::parse(text).map_err(|e| bad(e.to_string()))?;
        let label = |n: roxmltree::Node, tag: &str| -> Option<String> {
            let el = n.children().find(|c| c.has_tag_name(tag))?;
            let t = el.children().find(|c| c.has_tag_name("text"))?;
            Some(t.text().unwrap_or("").to_string())
        };
        let mut net = PetriNet::new();
        let mut place_ids = HashMap::new();
        let mut trans_ids = HashMap::new();
        for n in doc.descendants() {
            if n.has_tag_name("place") {
                let id = n.attribute("id").ok_or_else(|| bad("place without id".into()))?;
                let name = label(n, "name").unwrap_or_else(|| id.to_string());
                let tokens = match label(n, "initialMarking") {
                    Some(t) => t.trim().parse().map_err(|_| bad(format!("bad marking for {id}")))?,
                    None => 0,
                };
                place_ids.insert(id.to_string(), net.add_place(&name, tokens));
            } else if n.has_tag_name("transition") {
                let id = n.attribute("id").ok_or_else(|| bad("transition without id".into()))?;
                let name = label(n, "name").unwrap_or_else(|| id.to_string());
                trans_ids.insert(id.to_string(), net.add_transition(&name, Vec::new(), Vec::new()));
            }
        }
        for n in doc.descendants().filter(|n| n.has_tag_name("arc")) {
            let src = n.attribute("source").unwrap_or("");
            let tgt = n.attribute("target").unwrap_or("");
            match (place_ids.get(src), trans_ids.get(tgt), trans_ids.get(src), place_ids.get(tgt)) {
                (Some(&p), Some(&t), _, _) => net.inputs[t].push(p),
                (_, _, Some(&t), Some(&p)) => net.outputs[t].push(p),
                _ => return Err(bad(format!("dangling arc {src} -> {tgt}"))),
            }
        }
        for t in 0..net.transitions.len() {
            net.inputs[t].sort_unstable();
            net.inputs[t].dedup();
            net.outputs[t].sort_unstable();
            net.outputs[t].dedup();
        }
        Ok(net)
    }
}

/// Transitions grouped by their first input place, so that only transitions
/// with a chance of being enabled are tried.
struct Enabler {
    by_first: Vec<Vec<usize>>,
    sourceless: Vec<usize>,
}

impl Enabler {
    fn new(net: &PetriNet) -> Self {
        let mut by_first = vec![Vec::new(); net.places.len()];
        let mut sourceless = Vec::new();
        for (t, ins) in net.inputs.iter().enumerate() {
            match ins.first() {
                Some(&p) => by_first[p].push(t),
                None => sourceless.push(t),
            }
        }
        Enabler { by_first, sourceless }
    }

    /// Enabled transitions in id order.
    fn enabled(&self, net: &PetriNet, m: &[u32]) -> Vec<usize> {
        let mut out: Vec<usize> = self.sourceless.clone();
        for (p, &c) in m.iter().enumerate() {
            if c > 0 {
                out.extend(self.by_first[p].iter().copied().filter(|&t| net.is_enabled(m, t)));
            }
        }
        out.sort_unstable();
        out
    }
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn enabled_step(net: &PetriNet, m: &[u32], t: usize) -> Option<Marking> {
    net.fire(m, t)
}

/// Firing `prefix` from the initial marking reaches M, firing `cycle` from M
/// reaches a marking strictly above M.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pump {
    pub prefix: Vec<usize>,
    pub cycle: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Boundedness {
    Bounded,
    Unbounded(Pump),
    Unknown,
}

#[derive(Clone, Debug)]
pub struct KmNode {
    pub marking: Marking,
    pub parent: Option<usize>,
    pub via: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct CoverabilityTree {
    pub nodes: Vec<KmNode>,
    pub verdict: Boundedness,
}

impl CoverabilityTree {
    pub fn is_bounded(&self) -> Option<bool> {
        match self.verdict {
            Boundedness::Bounded => Some(true),
            Boundedness::Unbounded(_) => Some(false),
            Boundedness::Unknown => None,
        }
    }

    /// All markings of a closed tree of a bounded net: the reachability set.
    pub fn markings(&self) -> BTreeSet<Marking> {
        self.nodes.iter().map(|n| n.marking.clone()).collect()
    }

    fn path(&self, mut i: usize) -> Vec<usize> {
        let mut out = Vec::new();
        while let Some(t) = self.nodes[i].via {
            out.push(t);
            i = self.nodes[i].parent.expect("non-root");
        }
        out.reverse();
        out
    }
}

/// Coverability tree, breadth first with children in transition order.
/// Nodes equal to an earlier node are not expanded. Exploration stops at the
/// first strictly dominating ancestor: before any acceleration every marking
/// is concrete, so that ancestor yields a replayable pump and settles
/// unboundedness.
pub fn karp_miller(net: &PetriNet, m0: &[u32], node_cap: usize) -> CoverabilityTree {
    let mut tree = CoverabilityTree {
        nodes: vec![KmNode { marking: m0.to_vec(), parent: None, via: None }],
        verdict: Boundedness::Bounded,
    };
    let mut seen: HashSet<Marking> = HashSet::from([m0.to_vec()]);
    let mut queue = VecDeque::from([0usize]);
    let en = Enabler::new(net);
    while let Some(i) = queue.pop_front() {
        for t in en.enabled(net, &tree.nodes[i].marking) {
            let Some(m) = net.fire(&tree.nodes[i].marking, t) else { continue };
            if seen.contains(&m) {
                continue;
            }
            let total: u64 = m.iter().map(|&c| c as u64).sum();
            let mut anc = Some(i);
            while let Some(j) = anc {
                let a = &tree.nodes[j].marking;
                if a.iter().map(|&c| c as u64).sum::<u64>() < total && a.iter().zip(&m).all(|(x, y)| x <= y) {
                    let mut cycle = tree.path(i)[tree.path(j).len()..].to_vec();
                    cycle.push(t);
                    tree.verdict = Boundedness::Unbounded(Pump { prefix: tree.path(j), cycle });
                    return tree;
                }
                anc = tree.nodes[j].parent;
            }
            if tree.nodes.len() >= node_cap {
                tree.verdict = Boundedness::Unknown;
                return tree;
            }
            seen.insert(m.clone());
            tree.nodes.push(KmNode { marking: m, parent: Some(i), via: Some(t) });
            queue.push_back(tree.nodes.len() - 1);
        }
    }
    tree
}

/// Replays a pump from `m0`; true iff the cycle ends strictly above its start.
pub fn replay_pump(net: &PetriNet, m0: &[u32], pump: &Pump) -> bool {
    let Some(a) = net.fire_sequence(m0, &pump.prefix) else { return false };
    let Some(b) = net.fire_sequence(&a, &pump.cycle) else { return false };
    a != b && a.iter().zip(&b).all(|(x, y)| x <= y)
}

/// N_PV: places for the P-states and the V-states, one transition per
/// σ-core transition and V-state where V can read its letter.
#[derive(Clone, Debug)]
pub struct Npv {
    pub net: PetriNet,
    pub sa: ShuffleAutomaton,
    pub v: Dfa,
    pub q_place: Vec<usize>,
    pub v_place: Vec<usize>,
    /// transition → (σ-core index, V-state)
    pub chi: Vec<(usize, usize)>,
}

/// `v` is read as a semiautomaton for pre(V).
pub fn build_npv(p: &Dfa, v: &Dfa) -> Result<Npv> {
    let sa = ShuffleAutomaton::new(p)?;
    let v = v.normalize()?.as_semi();
    let mut net = PetriNet::new();
    let q_place: Vec<usize> = sa.names().iter().map(|n| net.add_place(&format!("p:{n}"), 0)).collect();
    let v_place: Vec<usize> = (0..v.state_count())
        .map(|r| net.add_place(&format!("v:{}", v.name(r)), u32::from(r == v.initial())))
        .collect();
    let mut chi = Vec::new();
    for (ci, t) in sa.sigma_core().iter().enumerate() {
        for r in 0..v.state_count() {
            let Some(s) = v.step(r, &t.letter) else { continue };
            let mut ins: Vec<usize> = t.source.support().map(|q| q_place[q]).collect();
            let mut outs: Vec<usize> = t.target.support().map(|q| q_place[q]).collect();
            ins.push(v_place[r]);
            outs.push(v_place[s]);
            let name = format!("{} {} @{}", t.kind.name(), t.step().render_compact(sa.names()), v.name(r));
            net.add_transition(&name, ins, outs);
            chi.push((ci, r));
        }
    }
    Ok(Npv { net, sa, v, q_place, v_place, chi })
}

impl Npv {
    pub fn iota(&self, f: &CounterVector, r: usize) -> Marking {
        let mut m = vec![0; self.net.places.len()];
        for (q, c) in f.entries() {
            m[self.q_place[q]] = c;
        }
        m[self.v_place[r]] = 1;
        m
    }

    pub fn initial_marking(&self) -> Marking {
        self.net.initial.clone()
    }

    /// Inverse of ι on markings with one V token.
    pub fn decode(&self, m: &[u32]) -> Option<(CounterVector, usize)> {
        let vs: Vec<usize> = (0..self.v_place.len()).filter(|&r| m[self.v_place[r]] > 0).collect();
        if vs.len() != 1 || m[self.v_place[vs[0]]] != 1 {
            return None;
        }
        let f = CounterVector::from_counts(self.q_place.iter().enumerate().map(|(q, &pl)| (q, m[pl])));
        Some((f, vs[0]))
    }

    /// The S-automaton computation of a firing sequence from the initial marking.
    pub fn computation_of(&self, seq: &[usize]) -> Option<Computation> {
        let mut f = CounterVector::zero();
        let mut out = Vec::new();
        for &t in seq {
            let core = &self.sa.sigma_core()[self.chi[t].0];
            let rest = f.sub(&core.source)?;
            let g = rest.add(&core.target);
            out.push(Step::new(f, core.letter.clone(), g.clone()));
            f = g;
        }
        Some(out)
    }
}

/// Breadth-first product of the S-automaton with a semiautomaton for pre(V).
#[derive(Clone, Debug)]
pub struct Product {
    pub states: Vec<(CounterVector, usize)>,
    pub edges: Vec<(usize, Step, usize)>,
    pub complete: bool,
}

pub fn explore_product(sa: &ShuffleAutomaton, v: &Dfa, limit: usize) -> Product {
    let start = (CounterVector::zero(), v.initial());
    let mut index = HashMap::from([(start.clone(), 0usize)]);
    let mut prod = Product { states: vec![start], edges: Vec::new(), complete: true };
    let mut i = 0;
    while i < prod.states.len() {
        let (f, r) = prod.states[i].clone();
        for (li, a) in sa.alphabet().iter().enumerate() {
            let Some(r2) = v.step(r, a) else { continue };
            for t in sa.successors_ix(&f, li) {
                let key = (t.target.clone(), r2);
                let j = match index.get(&key) {
                    Some(&j) => j,
                    None => {
                        if prod.states.len() >= limit {
                            prod.complete = false;
                            return prod;
                        }
                        index.insert(key.clone(), prod.states.len());
                        prod.states.push(key);
                        prod.states.len() - 1
                    }
                };
                prod.edges.push((i, t.step(), j));
            }
        }
        i += 1;
    }
    prod
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AlfPre {
    Finite { delta: BTreeSet<Step>, states: usize },
    /// an unbounded pump of N_PV with its decoded computation
    Infinite { pump: Pump, computation: Computation },
    Unknown(String),
}

/// Whether the transition alphabet of α⁻¹(pre V) is finite, and if so that set.
pub fn decide_alf_pre_finite(p: &Dfa, v: &Dfa, budget: &Budget) -> Result<AlfPre> {
    if v.is_empty_language() {
        return Ok(AlfPre::Finite { delta: BTreeSet::new(), states: 0 });
    }
    let npv = build_npv(p, v)?;
    let tree = karp_miller(&npv.net, &npv.net.initial, budget.km_nodes);
    match tree.verdict {
        Boundedness::Unbounded(pump) => {
            let mut seq = pump.prefix.clone();
            seq.extend(&pump.cycle);
            let computation = npv.computation_of(&seq).expect("pump fires");
            Ok(AlfPre::Infinite { pump, computation })
        }
        Boundedness::Unknown => Ok(AlfPre::Unknown(format!("coverability tree exceeded {} nodes", budget.km_nodes))),
        Boundedness::Bounded => {
            let prod = explore_product(&npv.sa, &npv.v, budget.markings);
            if !prod.complete {
                return Ok(AlfPre::Unknown(format!("product exceeded {} states", budget.markings)));
            }
            let delta = prod.edges.into_iter().map(|(_, s, _)| s).collect();
            Ok(AlfPre::Finite { delta, states: prod.states.len() })
        }
    }
}

/// Necessary conditions for closing all open components inside V: each
/// component at q still reads at least `min_p[q][a]` letters a, and V can
/// read at most `max_v[r][a]` (None: unboundedly many) before accepting.
#[derive(Clone, Debug)]
struct Parikh {
    min_p: Vec<Vec<u64>>,
    max_v: Vec<Vec<Option<u64>>>,
    /// V-states that can reach acceptance
    live_v: Vec<bool>,
}

const FAR: u64 = u64::MAX / 4;

impl Parikh {
    fn new(sa: &ShuffleAutomaton, v: &Dfa) -> Self {
        let p = sa.dfa();
        let letters = sa.alphabet();
        let n = p.state_count();
        let mut min_p = vec![vec![FAR; letters.len()]; n];
        for (li, a) in letters.iter().enumerate() {
            // distance to a final state counting only a-edges, zero at finals
            let mut d: Vec<u64> = (0..n).map(|q| if p.is_final(q) { 0 } else { FAR }).collect();
            loop {
                let mut changed = false;
                for (s, b, t) in p.transitions() {
                    let w = u64::from(b == a) + d[t];
                    if w < d[s] {
                        d[s] = w;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
            for (s, b, t) in p.transitions() {
                let w = u64::from(b == a) + d[t];
                min_p[s][li] = min_p[s][li].min(w);
            }
        }
        let m = v.state_count();
        let co = v.coreachable();
        // reach[x][y]: y reachable from x by a path inside the co-reachable part
        let mut reach = vec![vec![false; m]; m];
        for x in 0..m {
            if !co[x] {
                continue;
            }
            let mut stack = vec![x];
            reach[x][x] = true;
            while let Some(s) = stack.pop() {
                for (li, _) in v.alphabet().iter().enumerate() {
                    if let Some(t) = v.step_ix(s, li) {
                        if co[t] && !reach[x][t] {
                            reach[x][t] = true;
                            stack.push(t);
                        }
                    }
                }
            }
        }
        let mut max_v = vec![vec![Some(0); letters.len()]; m];
        for (li, a) in letters.iter().enumerate() {
            let Some(vl) = v.letter_index(a) else { continue };
            let cyc: Vec<usize> = (0..m)
                .filter(|&s| co[s] && v.step_ix(s, vl).is_some_and(|t| co[t] && reach[t][s]))
                .collect();
            let mut best: Vec<Option<u64>> = (0..m).map(|s| if v.is_accepting(s) { Some(0) } else { None }).collect();
            for _ in 0..=m {
                for s in 0..m {
                    if !co[s] {
                        continue;
                    }
                    for (bl, _) in v.alphabet().iter().enumerate() {
                        let Some(t) = v.step_ix(s, bl) else { continue };
                        if let Some(bt) = best[t] {
                            let w = bt + u64::from(bl == vl);
                            if best[s].is_none_or(|b| w > b) {
                                best[s] = Some(w);
                            }
                        }
                    }
                }
            }
            for r in 0..m {
                max_v[r][li] = if cyc.iter().any(|&s| reach[r][s]) { None } else { best[r].or(Some(0)) };
            }
        }
        Parikh { min_p, max_v, live_v: co }
    }

    fn admits(&self, f: &CounterVector, r: usize) -> bool {
        if !self.live_v[r] {
            return false;
        }
        for (li, cap) in self.max_v[r].iter().enumerate() {
            let Some(cap) = cap else { continue };
            let mut need = 0u64;
            for (q, c) in f.entries() {
                need = need.saturating_add(u64::from(c).saturating_mul(self.min_p[q][li]));
            }
            if need > *cap {
                return false;
            }
        }
        true
    }
}

type PState = (CounterVector, usize);

enum Search {
    Found(Vec<(Step, PState)>),
    Exhausted(Vec<PState>),
    Budget,
}

/// Best-first search by counter norm from `start` to a state satisfying `goal`.
fn search_product(
    sa: &ShuffleAutomaton,
    v: &Dfa,
    parikh: &Parikh,
    start: &PState,
    goal: impl Fn(&PState) -> bool,
    limit: usize,
) -> Search {
    let mut parent: HashMap<PState, Option<(PState, Step)>> = HashMap::from([(start.clone(), None)]);
    let mut heap = BinaryHeap::from([Reverse((start.0.norm(), 0usize, start.clone()))]);
    let mut seq = 0usize;
    let mut expanded = 0usize;
    while let Some(Reverse((_, _, s))) = heap.pop() {
        if goal(&s) {
            let mut path = Vec::new();
            let mut cur = s;
            while let Some(Some((prev, step))) = parent.get(&cur) {
                path.push((step.clone(), cur.clone()));
                cur = prev.clone();
            }
            path.reverse();
            return Search::Found(path);
        }
        expanded += 1;
        if expanded > limit {
            return Search::Budget;
        }
        let (f, r) = &s;
        for (li, a) in sa.alphabet().iter().enumerate() {
            let Some(r2) = v.step(*r, a) else { continue };
            for t in sa.successors_ix(f, li) {
                let n = (t.target.clone(), r2);
                if parent.contains_key(&n) || !parikh.admits(&n.0, r2) {
                    continue;
                }
                seq += 1;
                parent.insert(n.clone(), Some((s.clone(), t.step())));
                heap.push(Reverse((n.0.norm(), seq, n)));
            }
        }
    }
    Search::Exhausted(parent.into_keys().collect())
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Tri {
    Yes,
    No,
    Unknown,
}

struct CoReach<'a> {
    sa: &'a ShuffleAutomaton,
    v: &'a Dfa,
    parikh: Parikh,
    memo: HashMap<PState, Tri>,
    limit: usize,
}

impl<'a> CoReach<'a> {
    fn is_target(&self, s: &PState) -> bool {
        s.0.is_zero() && self.v.is_accepting(s.1)
    }

    fn query(&mut self, s: &PState) -> Tri {
        if let Some(&t) = self.memo.get(s) {
            return t;
        }
        let verdict = if !self.parikh.admits(&s.0, s.1) {
            Tri::No
        } else if self.is_target(s) {
            Tri::Yes
        } else {
            let v = self.v;
            match search_product(self.sa, self.v, &self.parikh, s, |x| x.0.is_zero() && v.is_accepting(x.1), self.limit) {
                Search::Found(path) => {
                    for (_, x) in path {
                        self.memo.insert(x, Tri::Yes);
                    }
                    Tri::Yes
                }
                Search::Exhausted(all) => {
                    for x in all {
                        self.memo.insert(x, Tri::No);
                    }
                    Tri::No
                }
                Search::Budget => Tri::Unknown,
            }
        };
        self.memo.insert(s.clone(), verdict);
        verdict
    }

    fn path_to_target(&self, s: &PState) -> Option<Computation> {
        let v = self.v;
        match search_product(self.sa, self.v, &self.parikh, s, |x| x.0.is_zero() && v.is_accepting(x.1), self.limit) {
            Search::Found(path) => Some(path.into_iter().map(|(st, _)| st).collect()),
            _ => None,
        }
    }
}

/// Witness that infinitely many co-reachable states exist: `prefix` reaches
/// (f, r), `up` leads from there to (f + h, r) with h nonzero, `down` returns
/// to (f, r) and `close` ends in 0 at an accepting V-state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZeroPump {
    pub prefix: Computation,
    pub up: Computation,
    pub down: Computation,
    pub close: Computation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AlfZero {
    /// `exhaustive` when the net was proved bounded and the whole product enumerated
    Finite { delta: BTreeSet<Step>, states: usize, exhaustive: bool },
    Infinite(ZeroPump),
    Unknown(String),
}

/// Whether the transition alphabet of the computations ending in 0 with
/// label in V is finite, and if so that set.
pub fn decide_alf_zero_finite(p: &Dfa, v: &Dfa, budget: &Budget) -> Result<AlfZero> {
    let empty = AlfZero::Finite { delta: BTreeSet::new(), states: 0, exhaustive: true };
    if v.is_empty_language() {
        return Ok(empty);
    }
    let vt = v.normalize()?;
    let npv = build_npv(p, &vt)?;
    let sa = &npv.sa;
    let tree = karp_miller(&npv.net, &npv.net.initial, budget.km_nodes);
    if tree.verdict == Boundedness::Bounded {
        let prod = explore_product(sa, &vt, budget.markings);
        if prod.complete {
            let mut co = vec![false; prod.states.len()];
            for (i, (f, r)) in prod.states.iter().enumerate() {
                co[i] = f.is_zero() && vt.is_accepting(*r);
            }
            loop {
                let mut changed = false;
                for (s, _, t) in &prod.edges {
                    if co[*t] && !co[*s] {
                        co[*s] = true;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
            let delta = prod.edges.iter().filter(|(_, _, t)| co[*t]).map(|(_, s, _)| s.clone()).collect();
            let states = co.iter().filter(|&&c| c).count();
            return Ok(AlfZero::Finite { delta, states, exhaustive: true });
        }
    }
    let mut co = CoReach { sa, v: &vt, parikh: Parikh::new(sa, &vt), memo: HashMap::new(), limit: budget.frontier };
    let start: PState = (CounterVector::zero(), vt.initial());
    match co.query(&start) {
        Tri::No => return Ok(empty),
        Tri::Unknown => return Ok(AlfZero::Unknown("initial state co-reachability undecided".into())),
        Tri::Yes => {}
    }
    let mut states = vec![start.clone()];
    let mut parent: Vec<Option<(usize, Step)>> = vec![None];
    let mut index = HashMap::from([(start, 0usize)]);
    let mut delta = BTreeSet::new();
    let mut undecided = 0usize;
    let mut pump_tries = 0usize;
    let mut i = 0;
    while i < states.len() {
        let (f, r) = states[i].clone();
        for (li, a) in sa.alphabet().iter().enumerate() {
            let Some(r2) = vt.step(r, a) else { continue };
            for t in sa.successors_ix(&f, li) {
                let n: PState = (t.target.clone(), r2);
                match co.query(&n) {
                    Tri::No => continue,
                    Tri::Unknown => {
                        undecided += 1;
                        continue;
                    }
                    Tri::Yes => {}
                }
                delta.insert(t.step());
                if index.contains_key(&n) {
                    continue;
                }
                let j = states.len();
                index.insert(n.clone(), j);
                states.push(n.clone());
                parent.push(Some((i, t.step())));
                if pump_tries < 64 {
                    if let Some(pump) = try_zero_pump(&co, &states, &parent, j, budget.frontier / 10 + 1) {
                        return Ok(AlfZero::Infinite(pump));
                    }
                    pump_tries += 1;
                }
                if states.len() > budget.markings {
                    return Ok(AlfZero::Unknown(format!("more than {} co-reachable states", budget.markings)));
                }
            }
        }
        i += 1;
    }
    if undecided > 0 {
        return Ok(AlfZero::Unknown(format!("{undecided} successors with undecided co-reachability")));
    }
    Ok(AlfZero::Finite { delta, states: states.len(), exhaustive: false })
}

fn tree_path(parent: &[Option<(usize, Step)>], mut i: usize) -> Computation {
    let mut out = Vec::new();
    while let Some((p, s)) = &parent[i] {
        out.push(s.clone());
        i = *p;
    }
    out.reverse();
    out
}

fn try_zero_pump(co: &CoReach, states: &[PState], parent: &[Option<(usize, Step)>], j: usize, limit: usize) -> Option<ZeroPump> {
    let (g, r) = &states[j];
    let mut anc = parent[j].as_ref().map(|(p, _)| *p);
    while let Some(a) = anc {
        let (f, ra) = &states[a];
        if ra == r && f != g && g.dominates(f) {
            let target = states[a].clone();
            if let Search::Found(path) = search_product(co.sa, co.v, &co.parikh, &states[j], |x| *x == target, limit) {
                let full = tree_path(parent, j);
                let split = tree_path(parent, a).len();
                return Some(ZeroPump {
                    prefix: full[..split].to_vec(),
                    up: full[split..].to_vec(),
                    down: path.into_iter().map(|(s, _)| s).collect(),
                    close: co.path_to_target(&target)?,
                });
            }
            return None;
        }
        anc = parent[a].as_ref().map(|(p, _)| *p);
    }
    None
}

fn run_product(sa: &ShuffleAutomaton, v: &Dfa, from: &PState, steps: &[Step]) -> Option<PState> {
    let (mut f, mut r) = from.clone();
    for s in steps {
        if s.source != f || !sa.is_step(s) {
            return None;
        }
        r = v.step(r, &s.letter)?;
        f = s.target.clone();
    }
    Some((f, r))
}

/// Independent recheck of a [`ZeroPump`].
pub fn replay_zero_pump(p: &Dfa, v: &Dfa, pump: &ZeroPump) -> bool {
    let (Ok(sa), Ok(vt)) = (ShuffleAutomaton::new(p), v.normalize()) else { return false };
    let Some(s0) = run_product(&sa, &vt, &(CounterVector::zero(), vt.initial()), &pump.prefix) else { return false };
    let Some(s1) = run_product(&sa, &vt, &s0, &pump.up) else { return false };
    let Some(back) = run_product(&sa, &vt, &s1, &pump.down) else { return false };
    let Some(end) = run_product(&sa, &vt, &s0, &pump.close) else { return false };
    s1.1 == s0.1 && s1.0 != s0.0 && s1.0.dominates(&s0.0) && back == s0 && end.0.is_zero() && vt.is_accepting(end.1)
}

/// Which group a transition of N_P^V belongs to: S moves the residual track
/// along with the composite one, E moves the removed component.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Group {
    S { q1: usize, q2: usize },
    E { q1: usize },
}

/// N_P^V over a completed V.
#[derive(Clone, Debug)]
pub struct NpvFull {
    pub net: PetriNet,
    pub sa: ShuffleAutomaton,
    pub v: Dfa,
    pub v1: Vec<usize>,
    pub v2: Vec<usize>,
    pub c1: Vec<usize>,
    pub c2: Vec<usize>,
    pub e_zero: usize,
    pub e_unit: Vec<Option<usize>>,
    pub e_done: usize,
    /// transition → (group, σ-core index)
    pub chi: Vec<(Group, usize)>,
}

/// A decoded marking of N_P^V.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FullState {
    pub v1: usize,
    pub v2: usize,
    pub c1: CounterVector,
    pub c2: CounterVector,
    pub e: T3,
}

pub fn build_np_v_full(p: &Dfa, v: &Dfa) -> Result<NpvFull> {
    let sa = ShuffleAutomaton::new(p)?;
    let v = v.normalize()?.complete();
    let pa = sa.alphabet();
    if v.alphabet().len() != pa.len() || !v.alphabet().iter().all(|a| pa.contains(a)) {
        return Err(Error::AlphabetMismatch);
    }
    let mut net = PetriNet::new();
    let init = v.initial();
    let v1: Vec<usize> = (0..v.state_count()).map(|r| net.add_place(&format!("v1:{}", v.name(r)), u32::from(r == init))).collect();
    let v2: Vec<usize> = (0..v.state_count()).map(|r| net.add_place(&format!("v2:{}", v.name(r)), u32::from(r == init))).collect();
    let c1: Vec<usize> = sa.names().iter().map(|n| net.add_place(&format!("c1:{n}"), 0)).collect();
    let c2: Vec<usize> = sa.names().iter().map(|n| net.add_place(&format!("c2:{n}"), 0)).collect();
    let e_zero = net.add_place("e:0", 1);
    let mut e_unit = vec![None; sa.names().len()];
    for f in sa.elementary_vectors().iter().skip(1) {
        let q = f.support().next().expect("unit vector");
        e_unit[q] = Some(net.add_place(&format!("e:{}", sa.names()[q]), 0));
    }
    let e_done = net.add_place("e:done", 0);
    let mut chi = Vec::new();
    let core = sa.sigma_core().to_vec();
    let names = sa.names().to_vec();
    let e_of = |f: &CounterVector| match f.support().next() {
        None => e_zero,
        Some(q) => e_unit[q].expect("σ-core sources are elementary"),
    };
    for q1 in 0..v.state_count() {
        for q2 in 0..v.state_count() {
            for (ci, t) in core.iter().enumerate() {
                let n1 = v.step(q1, &t.letter).expect("complete");
                let n2 = v.step(q2, &t.letter).expect("complete");
                let mut ins = vec![v1[q1], v2[q2]];
                let mut outs = vec![v1[n1], v2[n2]];
                ins.extend(t.source.support().flat_map(|q| [c1[q], c2[q]]));
                outs.extend(t.target.support().flat_map(|q| [c1[q], c2[q]]));
                let name = format!("S {} @{},{}", t.step().render_compact(&names), v.name(q1), v.name(q2));
                net.add_transition(&name, ins, outs);
                chi.push((Group::S { q1, q2 }, ci));
            }
        }
        for (ci, t) in core.iter().enumerate() {
            let n1 = v.step(q1, &t.letter).expect("complete");
            let mut ins = vec![v1[q1], e_of(&t.source)];
            let mut outs = vec![v1[n1]];
            ins.extend(t.source.support().map(|q| c1[q]));
            outs.extend(t.target.support().map(|q| c1[q]));
            outs.push(match t.kind {
                Kind::End | Kind::StartEnd => e_done,
                _ => e_of(&t.target),
            });
            let name = format!("E {} @{}", t.step().render_compact(&names), v.name(q1));
            net.add_transition(&name, ins, outs);
            chi.push((Group::E { q1 }, ci));
        }
    }
    Ok(NpvFull { net, sa, v, v1, v2, c1, c2, e_zero, e_unit, e_done, chi })
}

impl NpvFull {
    pub fn initial_marking(&self) -> Marking {
        self.net.initial.clone()
    }

    fn e_places(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(self.e_zero).chain(self.e_unit.iter().flatten().copied()).chain(std::iter::once(self.e_done))
    }

    /// Exactly one token in each of the V1, V2 and component groups.
    pub fn token_invariants_hold(&self, m: &[u32]) -> bool {
        let sum = |it: &mut dyn Iterator<Item = usize>| it.map(|p| m[p] as u64).sum::<u64>();
        sum(&mut self.v1.iter().copied()) == 1 && sum(&mut self.v2.iter().copied()) == 1 && sum(&mut self.e_places()) == 1
    }

    pub fn decode(&self, m: &[u32]) -> Option<FullState> {
        if !self.token_invariants_hold(m) {
            return None;
        }
        let v1 = self.v1.iter().position(|&p| m[p] == 1)?;
        let v2 = self.v2.iter().position(|&p| m[p] == 1)?;
        let c1 = CounterVector::from_counts(self.c1.iter().enumerate().map(|(q, &p)| (q, m[p])));
        let c2 = CounterVector::from_counts(self.c2.iter().enumerate().map(|(q, &p)| (q, m[p])));
        let e = if m[self.e_zero] == 1 {
            T3::At(CounterVector::zero())
        } else if m[self.e_done] == 1 {
            T3::Done
        } else {
            let q = self.e_unit.iter().position(|p| p.is_some_and(|p| m[p] == 1))?;
            T3::At(CounterVector::unit(q))
        };
        Some(FullState { v1, v2, c1, c2, e })
    }

    pub fn iota(&self, s: &FullState) -> Marking {
        let mut m = vec![0; self.net.places.len()];
        m[self.v1[s.v1]] = 1;
        m[self.v2[s.v2]] = 1;
        for (q, c) in s.c1.entries() {
            m[self.c1[q]] = c;
        }
        for (q, c) in s.c2.entries() {
            m[self.c2[q]] = c;
        }
        let e = match &s.e {
            T3::Done => self.e_done,
            T3::At(f) => match f.support().next() {
                None => self.e_zero,
                Some(q) => self.e_unit[q].expect("elementary"),
            },
        };
        m[e] = 1;
        m
    }

    fn v1_state(&self, m: &[u32]) -> usize {
        self.v1.iter().position(|&p| m[p] > 0).expect("one V1 token")
    }

    fn v2_state(&self, m: &[u32]) -> usize {
        self.v2.iter().position(|&p| m[p] > 0).expect("one V2 token")
    }

    pub fn is_target(&self, m: &[u32], target: NetTarget) -> bool {
        let base = self.v.is_final(self.v1_state(m)) && !self.v.is_final(self.v2_state(m));
        match target {
            NetTarget::Prefix => base,
            NetTarget::Zero => base && m[self.e_done] == 1 && self.c1.iter().all(|&p| m[p] == 0),
        }
    }

    /// The counterexample words of a firing sequence: S letters form u, E
    /// letters form the removed component.
    pub fn witness_of(&self, seq: &[usize]) -> Witness {
        let mut wit = Witness { w: Vec::new(), u: Vec::new(), e: Vec::new(), positions: Vec::new() };
        for &t in seq {
            let (g, ci) = self.chi[t];
            let a = self.sa.sigma_core()[ci].letter.clone();
            wit.w.push(a.clone());
            match g {
                Group::S { .. } => wit.u.push(a),
                Group::E { .. } => {
                    wit.e.push(a);
                    wit.positions.push(wit.w.len());
                }
            }
        }
        wit
    }
}

/// Which markings of N_P^V witness a failure of closure. `Zero` requires the
/// composite computation and the removed component to be complete; `Prefix`
/// drops that requirement and is used with prefix-closed V.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NetTarget {
    Zero,
    Prefix,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NetOutcome {
    Holds { markings: usize, bounded: Option<bool> },
    Fails { firing: Vec<usize>, witness: Witness },
    Unknown(String),
}

/// Searches N_P^V for a target marking. Markings whose V1 token cannot still
/// reach acceptance, or whose open components cannot be closed inside V,
/// are pruned; both conditions are necessary for reaching a target.
pub fn decide_sp_via_net(p: &Dfa, v: &Dfa, target: NetTarget, budget: &Budget) -> Result<NetOutcome> {
    if v.is_empty_language() {
        return Ok(NetOutcome::Holds { markings: 0, bounded: None });
    }
    let full = build_np_v_full(p, v)?;
    let reach = full.v.reachable();
    if (0..full.v.state_count()).all(|r| !reach[r] || full.v.is_final(r)) {
        // V is everything: u can never leave it
        return Ok(NetOutcome::Holds { markings: 0, bounded: None });
    }
    let tree = karp_miller(&full.net, &full.net.initial, budget.km_nodes);
    let bounded = tree.is_bounded();
    let parikh = Parikh::new(&full.sa, &full.v);
    let keep = |m: &[u32]| -> bool {
        let r = full.v1_state(m);
        match target {
            NetTarget::Prefix => full.v.is_final(r),
            NetTarget::Zero => {
                let c1 = CounterVector::from_counts(full.c1.iter().enumerate().map(|(q, &p)| (q, m[p])));
                parikh.admits(&c1, r)
            }
        }
    };
    let m0 = full.initial_marking();
    let mut parent: HashMap<Marking, Option<(Marking, usize)>> = HashMap::from([(m0.clone(), None)]);
    let mut queue = VecDeque::from([m0]);
    let en = Enabler::new(&full.net);
    while let Some(m) = queue.pop_front() {
        for t in en.enabled(&full.net, &m) {
            let Some(n) = full.net.fire(&m, t) else { continue };
            debug_assert!(full.token_invariants_hold(&n));
            if parent.contains_key(&n) || !keep(&n) {
                continue;
            }
            parent.insert(n.clone(), Some((m.clone(), t)));
            if full.is_target(&n, target) {
                let mut firing = Vec::new();
                let mut cur = n;
                while let Some(Some((prev, t))) = parent.get(&cur) {
                    firing.push(*t);
                    cur = prev.clone();
                }
                firing.reverse();
                let witness = full.witness_of(&firing);
                return Ok(NetOutcome::Fails { firing, witness });
            }
            if parent.len() > budget.markings {
                return Ok(NetOutcome::Unknown(format!("forward search exceeded {} markings", budget.markings)));
            }
            queue.push_back(n);
        }
    }
    Ok(NetOutcome::Holds { markings: parent.len(), bounded })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AbstractionOutcome {
    /// no abstract target is reachable
    Proved { states: usize },
    /// an abstract target is reachable, possibly spuriously
    Inconclusive,
    Budget,
}

/// N_P^V with the residual counters capped: values 0..=k are exact and k+1
/// means "more than k". The composite counters equal the residual ones plus
/// the removed component's vector, so they need no place of their own. Every
/// concrete run has an abstract image, so an unreachable abstract target
/// proves closure.
pub fn counter_abstraction(p: &Dfa, v: &Dfa, target: NetTarget, k: u32, limit: usize) -> Result<AbstractionOutcome> {
    if v.is_empty_language() {
        return Ok(AbstractionOutcome::Proved { states: 0 });
    }
    let sa = ShuffleAutomaton::new(p)?;
    let vc = v.normalize()?.complete();
    let pa = sa.alphabet();
    if vc.alphabet().len() != pa.len() || !vc.alphabet().iter().all(|a| pa.contains(a)) {
        return Err(Error::AlphabetMismatch);
    }
    let co = vc.coreachable();
    let top = (k + 1) as u8;
    let n = sa.names().len();
    // component code: 0 = not started, q + 1 = open at q, DONE = closed
    const DONE: usize = usize::MAX;
    let code = |f: &CounterVector| f.support().next().map_or(0, |q| q + 1);
    type AState = (usize, usize, Vec<u8>, usize);
    let start: AState = (vc.initial(), vc.initial(), vec![0; n], 0);
    let is_target = |s: &AState| {
        let base = vc.is_final(s.0) && !vc.is_final(s.1);
        match target {
            NetTarget::Prefix => base,
            NetTarget::Zero => base && s.3 == DONE && s.2.iter().all(|&c| c == 0),
        }
    };
    let keep = |r: usize| match target {
        NetTarget::Prefix => vc.is_final(r),
        NetTarget::Zero => co[r],
    };
    let mut seen = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some(s) = queue.pop_front() {
        let (r1, r2, c, e) = &s;
        let mut next = Vec::new();
        for t in sa.sigma_core() {
            let n1 = vc.step(*r1, &t.letter).expect("complete");
            if !keep(n1) {
                continue;
            }
            // S group
            let mut after: Vec<Vec<u8>> = vec![c.clone()];
            if let Some(q) = t.source.support().next() {
                after = match c[q] {
                    0 => Vec::new(),
                    x if x == top => {
                        let mut lo = c.clone();
                        lo[q] = top - 1;
                        vec![c.clone(), lo]
                    }
                    x => {
                        let mut d = c.clone();
                        d[q] = x - 1;
                        vec![d]
                    }
                };
            }
            if let Some(q) = t.target.support().next() {
                for d in &mut after {
                    d[q] = (d[q] + 1).min(top);
                }
            }
            let n2 = vc.step(*r2, &t.letter).expect("complete");
            for d in after {
                next.push((n1, n2, d, *e));
            }
            // E group
            if *e == code(&t.source) {
                let e2 = match t.kind {
                    Kind::End | Kind::StartEnd => DONE,
                    _ => code(&t.target),
                };
                next.push((n1, *r2, c.clone(), e2));
            }
        }
        for x in next {
            if seen.contains(&x) {
                continue;
            }
            if is_target(&x) {
                return Ok(AbstractionOutcome::Inconclusive);
            }
            if seen.len() >= limit {
                return Ok(AbstractionOutcome::Budget);
            }
            seen.insert(x.clone());
            queue.push_back(x);
        }
    }
    Ok(AbstractionOutcome::Proved { states: seen.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse_automaton;

    fn fixture(name: &str) -> Dfa {
        let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
        parse_automaton(&std::fs::read_to_string(path).unwrap()).unwrap()
    }

    #[test]
    fn firing_moves_tokens() {
        let mut net = PetriNet::new();
        let p = net.add_place("p", 1);
        let q = net.add_place("q", 0);
        let t = net.add_transition("t", vec![p], vec![q]);
        assert_eq!(enabled_step(&net, &[1, 0], t), Some(vec![0, 1]));
        assert_eq!(enabled_step(&net, &[0, 0], t), None);
    }

    #[test]
    fn karp_miller_basics() {
        let mut net = PetriNet::new();
        let p = net.add_place("p", 0);
        net.add_transition("add", vec![], vec![p]);
        let tree = karp_miller(&net, &net.initial, 1000);
        let Boundedness::Unbounded(pump) = &tree.verdict else { panic!("expected unbounded") };
        assert!(replay_pump(&net, &net.initial, pump));

        let mut idle = PetriNet::new();
        idle.add_place("p", 1);
        let tree = karp_miller(&idle, &idle.initial, 1000);
        assert_eq!(tree.verdict, Boundedness::Bounded);
        assert_eq!(tree.nodes.len(), 1);
    }

    #[test]
    fn ring_net_matches_product() {
        let npv = build_npv(&fixture("pring.aut"), &fixture("vring.aut")).unwrap();
        let tree = karp_miller(&npv.net, &npv.net.initial, 10_000);
        assert_eq!(tree.verdict, Boundedness::Bounded);
        let prod = explore_product(&npv.sa, &npv.v, 1000);
        assert_eq!(prod.states.len(), 4);
        let images: BTreeSet<Marking> = prod.states.iter().map(|(f, r)| npv.iota(f, *r)).collect();
        assert_eq!(images, tree.markings());
        let rendered: BTreeSet<String> = prod.states.iter().map(|(f, _)| npv.sa.render_vec(f)).collect();
        assert_eq!(rendered, BTreeSet::from(["0".into(), "II:1".into(), "II:2".into()]));
    }

    #[test]
    fn ring_alphabet_is_finite() {
        let p = fixture("pring.aut");
        let sa = ShuffleAutomaton::new(&p).unwrap();
        let AlfPre::Finite { delta, .. } = decide_alf_pre_finite(&p, &fixture("vring.aut"), &Budget::default()).unwrap() else {
            panic!("expected finite")
        };
        let expected: BTreeSet<Step> = ["(0) a (II:1)", "(0) b (II:1)", "(II:1) c (0)", "(II:1) b (II:2)", "(II:2) c (II:1)"]
            .iter()
            .map(|s| sa.parse_step(s).unwrap())
            .collect();
        assert_eq!(delta, expected);
    }

    #[test]
    fn bar_pair_is_infinite_with_replayable_pump() {
        let p = fixture("pbar.aut");
        let v = fixture("vbar.aut");
        let AlfPre::Infinite { pump, computation } = decide_alf_pre_finite(&p, &v, &Budget::default()).unwrap() else {
            panic!("expected infinite")
        };
        let npv = build_npv(&p, &v).unwrap();
        assert!(replay_pump(&npv.net, &npv.net.initial, &pump));
        assert!(npv.sa.is_computation(&computation));
    }

    #[test]
    fn empty_word_gives_empty_alphabet() {
        let r = decide_alf_pre_finite(&fixture("pbar.aut"), &fixture("eps.aut").extend_alphabet(&[crate::Letter::new("b")]), &Budget::default())
            .unwrap();
        assert_eq!(r, AlfPre::Finite { delta: BTreeSet::new(), states: 1 });
    }

    #[test]
    fn grave_zero_alphabet() {
        let sa = ShuffleAutomaton::new(&fixture("pbar.aut")).unwrap();
        let grave = sa.grave();
        let AlfZero::Finite { delta, .. } = decide_alf_zero_finite(grave.dfa(), &fixture("vbar.aut"), &Budget::default()).unwrap() else {
            panic!("expected finite")
        };
        let allowed: BTreeSet<Step> = ["(0) a (0)", "(0) a (II:1)", "(II:1) a (II:1)", "(II:1) b (0)"]
            .iter()
            .map(|s| grave.parse_step(s).unwrap())
            .collect();
        assert!(!delta.is_empty() && delta.is_subset(&allowed), "{delta:?}");
    }

    #[test]
    fn full_net_invariants_and_component_token() {
        let full = build_np_v_full(&fixture("pbar.aut"), &fixture("vbar.aut")).unwrap();
        let m0 = full.initial_marking();
        let start = (0..full.net.transitions.len())
            .find(|&t| matches!(full.chi[t].0, Group::E { .. }) && full.net.is_enabled(&m0, t))
            .unwrap();
        let m1 = full.net.fire(&m0, start).unwrap();
        let ii = full.sa.dfa().state_by_name("II").unwrap();
        assert_eq!(m1[full.e_unit[ii].unwrap()], 1);
        let end = (0..full.net.transitions.len())
            .find(|&t| matches!(full.chi[t].0, Group::E { .. }) && full.net.is_enabled(&m1, t))
            .unwrap();
        let m2 = full.net.fire(&m1, end).unwrap();
        assert_eq!(m2[full.e_done], 1);
        for m in [m0, m1, m2] {
            assert!(full.token_invariants_hold(&m));
            assert_eq!(full.iota(&full.decode(&m).unwrap()), m);
        }
    }

    #[test]
    fn net_route_verdicts() {
        let g = fixture("g.aut");
        let h = fixture("h.aut");
        let NetOutcome::Fails { witness, .. } = decide_sp_via_net(&g, &h.all_final(), NetTarget::Zero, &Budget::default()).unwrap() else {
            panic!("expected a counterexample")
        };
        assert!(!witness.e.is_empty());
        let r = decide_sp_via_net(&fixture("pbar.aut"), &fixture("sigmastar.aut"), NetTarget::Zero, &Budget::default()).unwrap();
        assert!(matches!(r, NetOutcome::Holds { .. } | NetOutcome::Unknown(_)));
        let s = fixture("s.aut");
        let r = counter_abstraction(&s, &s, NetTarget::Prefix, 1, 100_000).unwrap();
        assert!(matches!(r, AbstractionOutcome::Proved { .. }), "{r:?}");
    }

    #[test]
    fn pnml_round_trip() {
        let npv = build_npv(&fixture("pring.aut"), &fixture("vring.aut")).unwrap();
        let back = PetriNet::from_pnml(&npv.net.to_pnml()).unwrap();
        assert_eq!(back, npv.net);
        let empty = PetriNet::new();
        assert!(empty.to_dot().starts_with("digraph"));
        assert_eq!(PetriNet::from_pnml(&empty.to_pnml()).unwrap(), empty);
    }
}

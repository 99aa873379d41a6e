//! Definition-level reference implementations. Everything here enumerates
//! words or computations explicitly and is meant for small bounds only.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::dfa::Dfa;
use crate::error::{Error, Result};
use crate::letter::{Letter, Word};
use crate::shuffle::{Computation, Kind, ShuffleAutomaton, Step};
use crate::vector::CounterVector;

/// Caps for every enumeration in this module.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleCaps {
    pub max_len: usize,
    pub max_card: usize,
}

impl Default for OracleCaps {
    fn default() -> Self {
        OracleCaps { max_len: 8, max_card: 200_000 }
    }
}

/// A finite set of words, complete up to `bound`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordSet {
    pub words: BTreeSet<Word>,
    pub bound: usize,
}

impl WordSet {
    pub fn new(words: impl IntoIterator<Item = Word>, bound: usize) -> Self {
        WordSet { words: words.into_iter().collect(), bound }
    }

    pub fn contains(&self, w: &[Letter]) -> bool {
        self.words.contains(w)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Members sorted by length, then by the position of letters in `alphabet`.
    pub fn shortlex(&self, alphabet: &[Letter]) -> Vec<Word> {
        let mut v: Vec<Word> = self.words.iter().cloned().collect();
        let pos = |l: &Letter| alphabet.iter().position(|a| a == l).unwrap_or(usize::MAX);
        v.sort_by(|x, y| x.len().cmp(&y.len()).then_with(|| x.iter().map(pos).cmp(y.iter().map(pos))));
        v
    }
}

/// A counterexample to closure: `w` is in the shuffle and in V, deleting the
/// component `e` at `positions` (1-based) leaves `u`, which is not in V.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub w: Word,
    pub u: Word,
    pub e: Word,
    pub positions: Vec<usize>,
}

type Ix = Vec<u8>;

/// Letter indices relative to one alphabet.
struct Coder {
    alphabet: Vec<Letter>,
}

impl Coder {
    fn new(alphabet: &[Letter]) -> Self {
        Coder { alphabet: alphabet.to_vec() }
    }

    fn encode(&self, w: &[Letter]) -> Option<Ix> {
        w.iter().map(|l| self.alphabet.iter().position(|a| a == l).map(|i| i as u8)).collect()
    }

    fn decode(&self, w: &[u8]) -> Word {
        w.iter().map(|&i| self.alphabet[i as usize].clone()).collect()
    }
}

fn interleave(u: &[u8], v: &[u8], acc: &mut Ix, out: &mut HashSet<Ix>) {
    match (u.split_first(), v.split_first()) {
        (None, None) => {
            out.insert(acc.clone());
        }
        (Some((a, ur)), None) => {
            acc.push(*a);
            interleave(ur, v, acc, out);
            acc.pop();
        }
        (None, Some((b, vr))) => {
            acc.push(*b);
            interleave(u, vr, acc, out);
            acc.pop();
        }
        (Some((a, ur)), Some((b, vr))) => {
            acc.push(*a);
            interleave(ur, v, acc, out);
            acc.pop();
            acc.push(*b);
            interleave(u, vr, acc, out);
            acc.pop();
        }
    }
}

fn shuffle_ix(u: &[u8], v: &[u8]) -> HashSet<Ix> {
    let mut out = HashSet::new();
    interleave(u, v, &mut Vec::with_capacity(u.len() + v.len()), &mut out);
    out
}

/// {u} ⧢ {v}
pub fn shuffle_pair(u: &[Letter], v: &[Letter]) -> BTreeSet<Word> {
    let mut alphabet: Vec<Letter> = u.iter().chain(v).cloned().collect();
    alphabet.sort();
    alphabet.dedup();
    let c = Coder::new(&alphabet);
    let (ui, vi) = (c.encode(u).expect("own alphabet"), c.encode(v).expect("own alphabet"));
    shuffle_ix(&ui, &vi).iter().map(|w| c.decode(w)).collect()
}

/// Nonempty words of P up to length n, as index words.
fn p_words(p: &Dfa, n: usize, c: &Coder) -> Vec<Ix> {
    p.words_upto(n).iter().filter(|w| !w.is_empty()).map(|w| c.encode(w).expect("P letters")).collect()
}

fn iterated_ix(p: &Dfa, n: usize, caps: &OracleCaps, c: &Coder) -> Result<HashSet<Ix>> {
    if n > caps.max_len {
        return Err(Error::BudgetExceeded(format!("oracle length {n} > {}", caps.max_len)));
    }
    let pw = p_words(p, n, c);
    let mut all: HashSet<Ix> = HashSet::from([Vec::new()]);
    let mut fresh: Vec<Ix> = vec![Vec::new()];
    while !fresh.is_empty() {
        let mut next = Vec::new();
        for x in &fresh {
            for e in &pw {
                if x.len() + e.len() > n {
                    continue;
                }
                for y in shuffle_ix(x, e) {
                    if !all.contains(&y) {
                        all.insert(y.clone());
                        next.push(y);
                        if all.len() > caps.max_card {
                            return Err(Error::BudgetExceeded(format!("oracle cardinality > {}", caps.max_card)));
                        }
                    }
                }
            }
        }
        fresh = next;
    }
    Ok(all)
}

/// All words of P⧢ of length ≤ n, by iterating X ↦ X ⧢ (P ∪ {ε}) to a fixpoint.
pub fn iterated_shuffle_upto(p: &Dfa, n: usize, caps: &OracleCaps) -> Result<WordSet> {
    let c = Coder::new(p.alphabet());
    let set = iterated_ix(p, n, caps, &c)?;
    Ok(WordSet::new(set.iter().map(|w| c.decode(w)), n))
}

/// Splits `w` by a position mask into (kept, removed).
fn split_mask(w: &[u8], mask: u32) -> (Ix, Ix) {
    let mut kept = Vec::new();
    let mut removed = Vec::new();
    for (i, &a) in w.iter().enumerate() {
        if mask & (1 << i) != 0 {
            removed.push(a);
        } else {
            kept.push(a);
        }
    }
    (kept, removed)
}

fn accepts_ix(a: &Dfa, w: &[u8]) -> bool {
    let mut s = a.initial();
    for &l in w {
        match a.step_ix(s, l as usize) {
            Some(t) => s = t,
            None => return false,
        }
    }
    a.is_accepting(s)
}

fn check_bound(m: &WordSet, caps: &OracleCaps) -> Result<()> {
    let longest = m.words.iter().map(Vec::len).max().unwrap_or(0);
    if longest > caps.max_len || longest > 31 {
        return Err(Error::BudgetExceeded(format!("oracle length {longest} > {}", caps.max_len)));
    }
    Ok(())
}

/// One-step shuffle factors of M restricted to P⧢: delete a component e ∈ P
/// chosen as a set of positions, or nothing. The P⧢ restriction uses the
/// oracle's own enumeration.
pub fn swf1(p: &Dfa, m: &WordSet, caps: &OracleCaps) -> Result<WordSet> {
    check_bound(m, caps)?;
    let c = Coder::new(p.alphabet());
    let longest = m.words.iter().map(Vec::len).max().unwrap_or(0);
    let star = iterated_ix(p, longest, caps, &c)?;
    let mut out = BTreeSet::new();
    for w in &m.words {
        let Some(wi) = c.encode(w) else { continue };
        if star.contains(&wi) {
            out.insert(w.clone());
        }
        for mask in 1u32..(1 << wi.len()) {
            let (u, e) = split_mask(&wi, mask);
            if accepts_ix(p, &e) && star.contains(&u) {
                out.insert(c.decode(&u));
            }
        }
    }
    Ok(WordSet { words: out, bound: m.bound })
}

/// The same set computed by shuffling candidate factors back in.
pub fn swf1_by_shuffle(p: &Dfa, m: &WordSet, caps: &OracleCaps) -> Result<WordSet> {
    check_bound(m, caps)?;
    let c = Coder::new(p.alphabet());
    let longest = m.words.iter().map(Vec::len).max().unwrap_or(0);
    let star = iterated_ix(p, longest, caps, &c)?;
    let mut pw = p_words(p, longest, &c);
    pw.push(Vec::new());
    let mut out = BTreeSet::new();
    for w in &m.words {
        let Some(wi) = c.encode(w) else { continue };
        for u in &star {
            for e in &pw {
                if u.len() + e.len() == wi.len() && shuffle_ix(u, e).contains(&wi) {
                    out.insert(c.decode(u));
                }
            }
        }
    }
    Ok(WordSet { words: out, bound: m.bound })
}

/// Searches P⧢ ∩ V up to `maxlen` for a word with a one-component deletion
/// outside V. The shortlex-least w is returned, with its shortlex-least u and
/// then the least position set.
pub fn sp_falsify(p: &Dfa, v: &Dfa, maxlen: usize, caps: &OracleCaps) -> Result<Option<Witness>> {
    if maxlen > 31 {
        return Err(Error::BudgetExceeded(format!("oracle length {maxlen} > 31")));
    }
    let c = Coder::new(p.alphabet());
    let star = iterated_ix(p, maxlen, caps, &c)?;
    let mut ws: Vec<&Ix> = star.iter().collect();
    ws.sort_by(|x, y| x.len().cmp(&y.len()).then_with(|| x.cmp(y)));
    let in_v = |x: &[u8]| v.accepts(&c.decode(x)).unwrap_or(false);
    for w in ws {
        if w.is_empty() || !in_v(w) {
            continue;
        }
        let mut best: Option<(Ix, Vec<usize>, Ix)> = None;
        for mask in 1u32..(1 << w.len()) {
            let (u, e) = split_mask(w, mask);
            if !accepts_ix(p, &e) || !star.contains(&u) || in_v(&u) {
                continue;
            }
            let pos: Vec<usize> = (0..w.len()).filter(|i| mask & (1 << i) != 0).map(|i| i + 1).collect();
            let better = match &best {
                None => true,
                Some((bu, bp, _)) => (u.len(), &u, &pos) < (bu.len(), bu, bp),
            };
            if better {
                best = Some((u, pos, e));
            }
        }
        if let Some((u, positions, e)) = best {
            return Ok(Some(Witness { w: c.decode(w), u: c.decode(&u), e: c.decode(&e), positions }));
        }
    }
    Ok(None)
}

/// A letter of a structured word: an indexed letter with its bracket mark.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Marked {
    pub letter: Letter,
    pub mark: Kind,
}

pub type StructuredWord = Vec<Marked>;

/// ⟨u⟩ on index `i`: the first letter opens, the last closes.
pub fn encode_bracketed(u: &[Letter], i: u32) -> StructuredWord {
    let n = u.len();
    u.iter()
        .enumerate()
        .map(|(k, a)| {
            let mark = match (k == 0, k + 1 == n) {
                (true, true) => Kind::StartEnd,
                (true, false) => Kind::Start,
                (false, true) => Kind::End,
                (false, false) => Kind::Inner,
            };
            Marked { letter: a.with_index(Some(i)), mark }
        })
        .collect()
}

/// Erases marks and indices.
pub fn erase(x: &[Marked]) -> Word {
    x.iter().map(|m| m.letter.with_index(None)).collect()
}

/// The computation c(x): each step counts the open components per state.
pub fn computation_of_structured(p: &Dfa, x: &[Marked]) -> Result<Computation> {
    let sa = ShuffleAutomaton::new(p)?;
    let d = sa.dfa();
    // per index: None before opening, Some(Some(q)) while open, Some(None) when closed
    let mut comp: HashMap<Option<u32>, Option<usize>> = HashMap::new();
    let mut f = CounterVector::zero();
    let mut out = Vec::with_capacity(x.len());
    for m in x {
        let a = m.letter.with_index(None);
        let li = d.letter_index(&a).ok_or_else(|| Error::InvalidStructuredWord(format!("unknown letter {a}")))?;
        let key = m.letter.index;
        let state = comp.get(&key).copied();
        let from = match (m.mark, state) {
            (Kind::Start | Kind::StartEnd, None) => d.initial(),
            (Kind::Inner | Kind::End, Some(Some(q))) => q,
            _ => return Err(Error::InvalidStructuredWord(format!("bad bracketing at {}", m.letter))),
        };
        let p_to = d.step_ix(from, li).ok_or_else(|| Error::InvalidStructuredWord(format!("{} leaves pre(P)", m.letter)))?;
        let opens = matches!(m.mark, Kind::Start | Kind::Inner);
        let ok = if opens { sa.is_live(p_to) } else { d.is_final(p_to) };
        if !ok {
            return Err(Error::InvalidStructuredWord(format!("{} leaves pre(P)", m.letter)));
        }
        let mut g = match m.mark {
            Kind::Inner | Kind::End => f.minus_unit(from).expect("open component counted"),
            _ => f.clone(),
        };
        if opens {
            g = g.plus_unit(p_to);
            comp.insert(key, Some(p_to));
        } else {
            comp.insert(key, None);
        }
        out.push(Step::new(f, a, g.clone()));
        f = g;
    }
    Ok(out)
}

fn z_trace(c: &[Step]) -> Vec<CounterVector> {
    let mut z = vec![CounterVector::zero()];
    z.extend(c.iter().map(|s| s.target.clone()));
    z
}

fn runs_rec(
    x: &[Step],
    e: &[Step],
    zx: &[CounterVector],
    ze: &[CounterVector],
    i: usize,
    j: usize,
    acc: &mut Computation,
    out: &mut BTreeSet<Computation>,
) {
    if i == x.len() && j == e.len() {
        out.insert(acc.clone());
        return;
    }
    if i < x.len() {
        acc.push(Step::new(zx[i].add(&ze[j]), x[i].letter.clone(), zx[i + 1].add(&ze[j])));
        runs_rec(x, e, zx, ze, i + 1, j, acc, out);
        acc.pop();
    }
    if j < e.len() {
        acc.push(Step::new(zx[i].add(&ze[j]), e[j].letter.clone(), zx[i].add(&ze[j + 1])));
        runs_rec(x, e, zx, ze, i, j + 1, acc, out);
        acc.pop();
    }
}

/// {x} ⧢ {e} on computations: interleave and re-sum the counter vectors.
pub fn shuffled_runs(p: &Dfa, x: &[Step], e: &[Step]) -> Result<BTreeSet<Computation>> {
    let sa = ShuffleAutomaton::new(p)?;
    if !sa.is_computation(x) || !sa.is_computation(e) {
        return Err(Error::NotAComputation("path condition fails".into()));
    }
    let mut out = BTreeSet::new();
    runs_rec(x, e, &z_trace(x), &z_trace(e), 0, 0, &mut Vec::new(), &mut out);
    Ok(out)
}

/// Elementary computations with the given labels.
fn elementary_runs(sa: &ShuffleAutomaton, labels: &[Letter]) -> Vec<Computation> {
    let mut runs: Vec<Computation> = vec![Vec::new()];
    for (k, a) in labels.iter().enumerate() {
        let mut next = Vec::new();
        for r in &runs {
            let from = r.last().map(|s| s.target.clone()).unwrap_or_else(CounterVector::zero);
            if !r.is_empty() && from.is_zero() {
                // the component already closed
                continue;
            }
            for t in sa.sigma_core() {
                if t.source == from && &t.letter == a {
                    let closes = matches!(t.kind, Kind::End | Kind::StartEnd);
                    if closes && k + 1 != labels.len() {
                        continue;
                    }
                    let mut r2 = r.clone();
                    r2.push(t.step());
                    next.push(r2);
                }
            }
        }
        runs = next;
    }
    runs.sort();
    runs.dedup();
    runs
}

/// All u with c ∈ {u} ⧢ {e} for an elementary computation e (possibly ε).
pub fn srf1(p: &Dfa, c: &[Step]) -> Result<BTreeSet<Computation>> {
    let sa = ShuffleAutomaton::new(p)?;
    if !sa.is_computation(c) {
        return Err(Error::NotAComputation("path condition fails".into()));
    }
    if c.len() > 20 {
        return Err(Error::BudgetExceeded(format!("computation length {} > 20", c.len())));
    }
    let zc = z_trace(c);
    let mut out = BTreeSet::new();
    out.insert(c.to_vec());
    for mask in 1u32..(1 << c.len()) {
        let picked: Vec<usize> = (0..c.len()).filter(|i| mask & (1 << i) != 0).collect();
        let labels: Vec<Letter> = picked.iter().map(|&i| c[i].letter.clone()).collect();
        'cand: for e in elementary_runs(&sa, &labels) {
            let ze = z_trace(&e);
            let mut u = Vec::new();
            let mut j = 0;
            for k in 0..c.len() {
                let Some(before) = zc[k].sub(&ze[j]) else { continue 'cand };
                if mask & (1 << k) != 0 {
                    let Some(after) = zc[k + 1].sub(&ze[j + 1]) else { continue 'cand };
                    if after != before {
                        continue 'cand;
                    }
                    j += 1;
                } else {
                    let Some(after) = zc[k + 1].sub(&ze[j]) else { continue 'cand };
                    let s = Step::new(before, c[k].letter.clone(), after);
                    if !sa.is_step(&s) {
                        continue 'cand;
                    }
                    u.push(s);
                }
            }
            if sa.is_computation(&u) && shuffled_runs(p, &u, &e)?.contains(c) {
                out.insert(u);
            }
        }
    }
    Ok(out)
}

/// Letterwise image; `None` erases.
pub fn apply_hom(phi: impl Fn(&Letter) -> Option<Letter>, w: &[Letter]) -> Word {
    w.iter().filter_map(phi).collect()
}

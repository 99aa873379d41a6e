//! Initial segments of counter space and the partial powerset construction
//! that decides whether a segment is compatible with P.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::dfa::Dfa;
use crate::error::{Error, Result};
use crate::letter::Letter;
use crate::shuffle::ShuffleAutomaton;
use crate::vector::CounterVector;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InitialSegment {
    Explicit(BTreeSet<CounterVector>),
    /// All vectors of norm at most n.
    Kn(u32),
}

impl InitialSegment {
    pub fn explicit(set: impl IntoIterator<Item = CounterVector>) -> Result<Self> {
        let set: BTreeSet<CounterVector> = set.into_iter().collect();
        if !is_initial_segment(&set) {
            return Err(Error::InvalidSegment("not downward closed".into()));
        }
        Ok(InitialSegment::Explicit(set))
    }

    pub fn contains(&self, f: &CounterVector) -> bool {
        match self {
            InitialSegment::Explicit(s) => s.contains(f),
            InitialSegment::Kn(n) => f.norm() <= *n,
        }
    }

    /// Either `K n` on one line, or one vector per line over `names`.
    pub fn parse(text: &str, names: &[String]) -> Result<Self> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        if let Some((line, first)) = lines.first() {
            if let Some(n) = first.strip_prefix('K') {
                let n = n.trim().parse().map_err(|_| Error::Syntax { line: *line, msg: "expected `K n`".into() })?;
                return Ok(InitialSegment::Kn(n));
            }
        }
        let mut set = BTreeSet::new();
        for (line, l) in lines {
            let v = CounterVector::parse(l, names).ok_or_else(|| Error::Syntax { line, msg: format!("bad vector `{l}`") })?;
            set.insert(v);
        }
        InitialSegment::explicit(set)
    }
}

/// Nonempty and closed under removing single units.
pub fn is_initial_segment(s: &BTreeSet<CounterVector>) -> bool {
    !s.is_empty() && s.iter().all(|f| f.support().all(|q| s.contains(&f.minus_unit(q).expect("in support"))))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SegmentStatus {
    Compatible,
    /// A reachable subset whose successor set straddles the segment boundary.
    Incompatible { state: BTreeSet<CounterVector>, letter: Letter },
    CapExceeded(usize),
}

#[derive(Clone, Debug)]
pub struct Powerset {
    /// The partial powerset semiautomaton; state i is `subsets[i]`.
    pub automaton: Dfa,
    pub subsets: Vec<BTreeSet<CounterVector>>,
    pub status: SegmentStatus,
}

impl Powerset {
    pub fn compatible(&self) -> bool {
        self.status == SegmentStatus::Compatible
    }
}

fn subset_name(m: &BTreeSet<CounterVector>, names: &[String]) -> String {
    let parts: Vec<String> = m.iter().map(|f| f.render_compact(names)).collect();
    format!("{{{}}}", parts.join(","))
}

pub fn partial_powerset(p: &Dfa, seg: &InitialSegment, frontier_cap: usize) -> Result<Powerset> {
    let sa = ShuffleAutomaton::new(p)?;
    let names = sa.names().to_vec();
    let alphabet = sa.alphabet().to_vec();
    let start = BTreeSet::from([CounterVector::zero()]);
    let mut auto = Dfa::new(alphabet.clone(), &subset_name(&start, &names), true);
    let mut ids: BTreeMap<BTreeSet<CounterVector>, usize> = BTreeMap::from([(start.clone(), 0)]);
    let mut subsets = vec![start];
    let mut queue = VecDeque::from([0usize]);
    let mut status = SegmentStatus::Compatible;
    'bfs: while let Some(s) = queue.pop_front() {
        for (li, a) in alphabet.iter().enumerate() {
            let succ: BTreeSet<CounterVector> = subsets[s].iter().flat_map(|g| sa.targets_ix(g, li)).collect();
            let inside = succ.iter().filter(|f| seg.contains(f)).count();
            if inside == 0 {
                continue;
            }
            if inside < succ.len() {
                status = SegmentStatus::Incompatible { state: subsets[s].clone(), letter: a.clone() };
                break 'bfs;
            }
            let t = match ids.get(&succ) {
                Some(&t) => t,
                None => {
                    if subsets.len() >= frontier_cap {
                        status = SegmentStatus::CapExceeded(frontier_cap);
                        break 'bfs;
                    }
                    let t = auto.add_state(&subset_name(&succ, &names));
                    ids.insert(succ.clone(), t);
                    subsets.push(succ);
                    queue.push_back(t);
                    t
                }
            };
            auto.add_transition(s, a, t)?;
        }
    }
    Ok(Powerset { automaton: auto, subsets, status })
}

/// The language of a compatible segment, as a semiautomaton.
pub fn l_of_segment(p: &Dfa, seg: &InitialSegment, frontier_cap: usize) -> Result<Dfa> {
    let ps = partial_powerset(p, seg, frontier_cap)?;
    match ps.status {
        SegmentStatus::Compatible => Ok(ps.automaton),
        SegmentStatus::Incompatible { .. } => Err(Error::NotCompatible),
        SegmentStatus::CapExceeded(n) => Err(Error::FrontierCapExceeded(n)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LetterPartition {
    pub phi: BTreeSet<Letter>,
    pub gamma: BTreeSet<Letter>,
    pub omega: BTreeSet<Letter>,
}

/// Classifies letters by where they occur in words of P: first letters of
/// longer words go to Φ, last letters to Ω, the rest and one-letter words to Γ.
/// A partition with P ⊆ Γ ∪ ΦΓ*Ω exists exactly when these classes are disjoint.
/// Letters that occur nowhere are put in Γ.
pub fn check_phi_gamma_omega(p: &Dfa) -> Result<Option<LetterPartition>> {
    let sa = ShuffleAutomaton::new(p)?;
    let d = sa.dfa();
    let q0 = d.initial();
    let mut entered = vec![false; d.state_count()];
    for (_, _, t) in d.transitions() {
        entered[t] = true;
    }
    let (mut phi, mut gamma, mut omega) = (BTreeSet::new(), BTreeSet::new(), BTreeSet::new());
    for (q, a, t) in d.transitions() {
        if q == q0 {
            if sa.is_live(t) {
                phi.insert(a.clone());
            }
            if d.is_final(t) {
                gamma.insert(a.clone());
            }
        }
        if entered[q] {
            if sa.is_live(t) {
                gamma.insert(a.clone());
            }
            if d.is_final(t) {
                omega.insert(a.clone());
            }
        }
    }
    if !phi.is_disjoint(&gamma) || !phi.is_disjoint(&omega) || !gamma.is_disjoint(&omega) {
        return Ok(None);
    }
    for a in d.alphabet() {
        if !phi.contains(a) && !omega.contains(a) {
            gamma.insert(a.clone());
        }
    }
    Ok(Some(LetterPartition { phi, gamma, omega }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::letter::word;
    use crate::text::parse_automaton;

    fn fixture(name: &str) -> String {
        std::fs::read_to_string(format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
    }

    fn aut(name: &str) -> Dfa {
        parse_automaton(&fixture(name)).unwrap()
    }

    fn letters(s: &str) -> BTreeSet<Letter> {
        word(s).into_iter().collect()
    }

    #[test]
    fn segments() {
        let p = aut("ptilde.aut");
        let seg = InitialSegment::parse(&fixture("ptilde.seg"), p.names()).unwrap();
        assert!(matches!(seg, InitialSegment::Explicit(ref s) if s.len() == 4));
        let ii = p.state_by_name("II").unwrap();
        assert!(!is_initial_segment(&BTreeSet::from([CounterVector::unit(ii)])));
        assert!(!is_initial_segment(&BTreeSet::new()));
        assert_eq!(InitialSegment::parse("K 3", p.names()).unwrap(), InitialSegment::Kn(3));
        assert!(InitialSegment::parse("II:1\n", p.names()).is_err());
    }

    #[test]
    fn tilde_powerset() {
        let p = aut("ptilde.aut");
        let seg = InitialSegment::parse(&fixture("ptilde.seg"), p.names()).unwrap();
        let ps = partial_powerset(&p, &seg, 100).unwrap();
        assert!(ps.compatible());
        assert_eq!(ps.automaton.state_count(), 4);
        assert_eq!(ps.automaton.transition_count(), 5);
        assert!(ps.automaton.isomorphic(&aut("ltilde.aut")));
    }

    #[test]
    fn kn_chain() {
        let p = aut("pbar.aut");
        let l = l_of_segment(&p, &InitialSegment::Kn(2), 100).unwrap();
        assert_eq!(l.state_count(), 3);
        let names: Vec<&str> = l.names().iter().map(String::as_str).collect();
        assert_eq!(names, vec!["{0}", "{II:1}", "{II:2}"]);
        assert!(l.accepts(&word("aabab")).unwrap());
        assert!(!l.accepts(&word("aaa")).unwrap());
    }

    #[test]
    fn ring_cannot_separate() {
        let p = aut("pring.aut");
        let ii = p.state_by_name("II").unwrap();
        let seg = InitialSegment::explicit([CounterVector::zero(), CounterVector::unit(ii)]).unwrap();
        let l = l_of_segment(&p, &seg, 100).unwrap();
        for n in 1..4 {
            let l = l_of_segment(&p, &InitialSegment::Kn(n), 100).unwrap();
            assert_eq!(l.accepts(&word("ab")).unwrap(), l.accepts(&word("ba")).unwrap());
        }
        assert!(l.accepts(&word("acbc")).unwrap());
    }

    #[test]
    fn single_letter_kn0() {
        let p = aut("eps.aut");
        let alpha = p.alphabet().to_vec();
        let mut a = Dfa::new(alpha.clone(), "1", false);
        let two = a.add_state("2");
        a.add_transition(0, &alpha[0], two).unwrap();
        a.set_final(two, true);
        let l = l_of_segment(&a, &InitialSegment::Kn(0), 10).unwrap();
        assert!(l.accepts(&word("aaaa")).unwrap());
        assert_eq!(l.state_count(), 1);
    }

    #[test]
    fn incompatible() {
        // P = {a, ab}: after `a` the next `a` reaches 0, II:1 and II:2 at once
        let src = "kind: dfa\nalphabet: a b\nstates: I II III\ninitial: I\nfinals: II III\ntrans: I a II\ntrans: II b III\n";
        let p = parse_automaton(src).unwrap();
        let ii = p.state_by_name("II").unwrap();
        let ps = partial_powerset(&p, &InitialSegment::Kn(1), 100).unwrap();
        let expected = BTreeSet::from([CounterVector::zero(), CounterVector::unit(ii)]);
        assert_eq!(ps.status, SegmentStatus::Incompatible { state: expected, letter: Letter::new("a") });
        assert_eq!(l_of_segment(&p, &InitialSegment::Kn(1), 100).unwrap_err(), Error::NotCompatible);
        assert_eq!(l_of_segment(&p, &InitialSegment::Kn(5), 2).unwrap_err(), Error::FrontierCapExceeded(2));
    }

    #[test]
    fn partitions() {
        let part = check_phi_gamma_omega(&aut("pbar.aut")).unwrap().unwrap();
        assert_eq!((part.phi, part.gamma, part.omega), (letters("a"), BTreeSet::new(), letters("b")));
        let part = check_phi_gamma_omega(&aut("ptilde.aut")).unwrap().unwrap();
        assert_eq!((part.phi, part.gamma, part.omega), (letters("a"), letters("b"), letters("c")));
        let src = "kind: dfa\nalphabet: a b\nstates: 1 2 3 4\ninitial: 1\nfinals: 4\ntrans: 1 a 2\ntrans: 2 b 4\ntrans: 1 b 3\ntrans: 3 a 4\n";
        assert_eq!(check_phi_gamma_omega(&parse_automaton(src).unwrap()).unwrap(), None);
    }
}

//! Parameterized families over indexed alphabets Σ_I and the definitional
//! self-similarity check, used to cross-validate the decision procedure.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::dfa::Dfa;
use crate::error::{Error, Result};
use crate::letter::{Letter, Word};

/// Σ_I, symbol-major: a@1 a@2 … b@1 b@2 …
pub fn indexed_alphabet(base: &[Letter], index_set: &[u32]) -> Vec<Letter> {
    let mut out = Vec::new();
    for a in base {
        for &i in index_set {
            out.push(a.with_index(Some(i)));
        }
    }
    out
}

/// τ_n: the letters of index n, index dropped.
pub fn tau(n: u32, w: &[Letter]) -> Word {
    w.iter().filter(|a| a.index == Some(n)).map(|a| a.with_index(None)).collect()
}

/// Θ: erases every index.
pub fn theta(w: &[Letter]) -> Word {
    w.iter().map(|a| a.with_index(None)).collect()
}

/// Π: keeps the letters whose index lies in `sub`.
pub fn pi(index_set: &[u32], sub: &[u32], w: &[Letter]) -> Result<Word> {
    if !sub.iter().all(|i| index_set.contains(i)) {
        return Err(Error::NotASubset);
    }
    Ok(w.iter().filter(|a| a.index.is_some_and(|i| sub.contains(&i))).cloned().collect())
}

/// The family member over Σ_I: words whose every index projection lies in L
/// and whose erasure lies in V, as a trimmed dfa.
pub fn build_family_member(l: &Dfa, v: &Dfa, index_set: &[u32]) -> Result<Dfa> {
    if !l.is_prefix_closed() || !v.is_prefix_closed() {
        return Err(Error::NotPrefixClosed);
    }
    let l = l.normalize()?.complete();
    let v = v.normalize()?.complete();
    let alphabet = indexed_alphabet(l.alphabet(), index_set);
    let k = index_set.len();
    type S = (Vec<usize>, usize);
    let name = |s: &S| {
        let parts: Vec<&str> = s.0.iter().map(|&q| l.name(q)).collect();
        format!("{}|{}", parts.join(","), v.name(s.1))
    };
    let start: S = (vec![l.initial(); k], v.initial());
    let mut out = Dfa::new(alphabet.clone(), &name(&start), false);
    let accepting = |s: &S| s.0.iter().all(|&q| l.is_final(q)) && v.is_final(s.1);
    out.set_final(0, accepting(&start));
    let mut ids = HashMap::from([(start.clone(), 0usize)]);
    let mut queue = VecDeque::from([start]);
    while let Some(s) = queue.pop_front() {
        if !accepting(&s) {
            // prefix closed: nothing continues from a rejecting state
            continue;
        }
        let from = ids[&s];
        for x in &alphabet {
            let i = index_set.iter().position(|&n| Some(n) == x.index).expect("indexed letter");
            let base = x.with_index(None);
            let (Some(lq), Some(vq)) = (l.step(s.0[i], &base), v.step(s.1, &base)) else { continue };
            let mut next = s.clone();
            next.0[i] = lq;
            next.1 = vq;
            let to = match ids.get(&next) {
                Some(&t) => t,
                None => {
                    let t = out.add_state(&name(&next));
                    out.set_final(t, accepting(&next));
                    ids.insert(next.clone(), t);
                    queue.push_back(next);
                    t
                }
            };
            out.add_transition(from, x, to)?;
        }
    }
    out.normalize()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SelfSimilarity {
    Consistent { pairs_checked: usize },
    /// `word` ∈ 𝓛_I with Π(word) ∉ 𝓛_{I'}, or (when `missing`) `word` ∈
    /// 𝓛_{I'} outside Π(𝓛_I)
    Violation { index_set: Vec<u32>, sub: Vec<u32>, word: Word, missing: bool },
}

/// Checks Π_{I'}(𝓛_I) = 𝓛_{I'} for I = {1..k}, k ≤ `max_size`, and every
/// proper I' ⊂ I, up to word length `maxlen`. Removed index sets are tried by
/// size and then lexicographically, so dropping {1} comes first.
pub fn check_self_similarity(l: &Dfa, v: &Dfa, max_size: u32, maxlen: usize) -> Result<SelfSimilarity> {
    let mut pairs = 0;
    for k in 1..=max_size {
        let index_set: Vec<u32> = (1..=k).collect();
        let big = build_family_member(l, v, &index_set)?;
        let mut removed: Vec<Vec<u32>> = (1u32..(1 << k)).map(|m| index_set.iter().copied().filter(|i| m & (1 << (i - 1)) != 0).collect()).collect();
        removed.sort_by(|a: &Vec<u32>, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        for r in removed {
            let sub: Vec<u32> = index_set.iter().copied().filter(|i| !r.contains(i)).collect();
            pairs += 1;
            let small = build_family_member(l, v, &sub)?.complete();
            if let Some(word) = escaping_word(&big, &small, &sub, maxlen) {
                return Ok(SelfSimilarity::Violation { index_set, sub, word, missing: false });
            }
            let image = big.image(small.alphabet().to_vec(), |a| a.index.filter(|i| sub.contains(i)).map(|_| a.clone()));
            if let crate::dfa::Inclusion::Counterexample(x) = Dfa::includes(&image, &small)? {
                if x.len() <= maxlen {
                    return Ok(SelfSimilarity::Violation { index_set, sub, word: x, missing: true });
                }
            }
        }
    }
    Ok(SelfSimilarity::Consistent { pairs_checked: pairs })
}

/// Shortlex-least w ∈ L(big), |w| ≤ maxlen, whose projection to `sub` is rejected by `small`.
fn escaping_word(big: &Dfa, small: &Dfa, sub: &[u32], maxlen: usize) -> Option<Word> {
    let start = (big.initial(), small.initial());
    let mut parent: HashMap<(usize, usize), Option<((usize, usize), usize)>> = HashMap::from([(start, None)]);
    let mut queue = VecDeque::from([(start, 0usize)]);
    let mut seen = BTreeSet::from([start]);
    while let Some((s, d)) = queue.pop_front() {
        if big.is_accepting(s.0) && !small.is_accepting(s.1) {
            let mut w = Vec::new();
            let mut cur = s;
            while let Some(Some((prev, li))) = parent.get(&cur) {
                w.push(big.alphabet()[*li].clone());
                cur = *prev;
            }
            w.reverse();
            return Some(w);
        }
        if d == maxlen {
            continue;
        }
        for (li, a) in big.alphabet().iter().enumerate() {
            let Some(b) = big.step_ix(s.0, li) else { continue };
            let t = if a.index.is_some_and(|i| sub.contains(&i)) {
                match small.step(s.1, a) {
                    Some(t) => t,
                    None => continue,
                }
            } else {
                s.1
            };
            let n = (b, t);
            if seen.insert(n) {
                parent.insert(n, Some((s, li)));
                queue.push_back((n, d + 1));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::letter::{parse_word, word};
    use crate::text::parse_automaton;

    fn fixture(name: &str) -> Dfa {
        let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
        parse_automaton(&std::fs::read_to_string(path).unwrap()).unwrap()
    }

    #[test]
    fn projections() {
        let w = parse_word("a@1 b@1 a@2 a@3").unwrap();
        assert_eq!(tau(1, &w), word("ab"));
        assert!(tau(5, &w).is_empty());
        assert_eq!(theta(&w), word("abaa"));
        assert_eq!(pi(&[1, 2, 3], &[2, 3], &w).unwrap(), parse_word("a@2 a@3").unwrap());
        assert_eq!(pi(&[1, 2, 3], &[1, 2, 3], &w).unwrap(), w);
        assert!(pi(&[1, 2, 3], &[], &w).unwrap().is_empty());
        assert_eq!(pi(&[1], &[2], &w), Err(Error::NotASubset));
    }

    #[test]
    fn server_members() {
        let s = fixture("s.aut");
        assert!(build_family_member(&s, &s, &[1, 2]).unwrap().isomorphic(&fixture("sbar12.aut")));
        let all = build_family_member(&s, &fixture("sigmastar.aut"), &[1, 2]).unwrap();
        assert!(all.isomorphic(&fixture("s12.aut")));
        let one = build_family_member(&s, &s, &[4]).unwrap();
        let back = one.map_letters(|a| a.with_index(None));
        assert!(back.equivalent(&s.normalize().unwrap()).unwrap());
    }

    #[test]
    fn counterexample_family() {
        let r = check_self_similarity(&fixture("g.aut"), &fixture("h.aut"), 3, 8).unwrap();
        let SelfSimilarity::Violation { index_set, sub, word: w, missing } = r else { panic!("{r:?}") };
        assert_eq!((index_set, sub, missing), (vec![1, 2, 3], vec![2, 3], false));
        assert_eq!(w, parse_word("a@1 b@1 a@2 a@3").unwrap());
    }

    #[test]
    fn consistent_families() {
        let s = fixture("s.aut");
        assert!(matches!(check_self_similarity(&s, &s, 3, 8).unwrap(), SelfSimilarity::Consistent { .. }));
        let e = fixture("eps.aut");
        assert!(matches!(check_self_similarity(&e, &e, 3, 8).unwrap(), SelfSimilarity::Consistent { .. }));
    }
}

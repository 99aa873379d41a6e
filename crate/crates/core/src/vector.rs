use std::fmt;

/// A finite-support map from automaton states (by index) to counts, kept
/// sorted by state with no zero entries.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CounterVector(Vec<(u32, u32)>);

impl CounterVector {
    pub fn zero() -> Self {
        CounterVector(Vec::new())
    }

    pub fn unit(q: usize) -> Self {
        CounterVector(vec![(q as u32, 1)])
    }

    pub fn from_counts(counts: impl IntoIterator<Item = (usize, u32)>) -> Self {
        let mut v = CounterVector::zero();
        for (q, n) in counts {
            for _ in 0..n {
                v = v.plus_unit(q);
            }
        }
        v
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, q: usize) -> u32 {
        match self.0.binary_search_by_key(&(q as u32), |e| e.0) {
            Ok(i) => self.0[i].1,
            Err(_) => 0,
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.0.iter().map(|&(q, n)| (q as usize, n))
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|e| e.0 as usize)
    }

    /// ‖f‖, the sum of all counts.
    pub fn norm(&self) -> u32 {
        self.0.iter().map(|e| e.1).sum()
    }

    pub fn plus_unit(&self, q: usize) -> Self {
        let mut v = self.0.clone();
        match v.binary_search_by_key(&(q as u32), |e| e.0) {
            Ok(i) => v[i].1 += 1,
            Err(i) => v.insert(i, (q as u32, 1)),
        }
        CounterVector(v)
    }

    pub fn minus_unit(&self, q: usize) -> Option<Self> {
        let i = self.0.binary_search_by_key(&(q as u32), |e| e.0).ok()?;
        let mut v = self.0.clone();
        if v[i].1 == 1 {
            v.remove(i);
        } else {
            v[i].1 -= 1;
        }
        Some(CounterVector(v))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (q, n) in other.entries() {
            for _ in 0..n {
                out = out.plus_unit(q);
            }
        }
        out
    }

    /// `self - other`, if `self ≥ other`.
    pub fn sub(&self, other: &Self) -> Option<Self> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut j = 0;
        for &(q, n) in &self.0 {
            let mut m = n;
            if j < other.0.len() && other.0[j].0 < q {
                return None;
            }
            if j < other.0.len() && other.0[j].0 == q {
                if other.0[j].1 > n {
                    return None;
                }
                m -= other.0[j].1;
                j += 1;
            }
            if m > 0 {
                out.push((q, m));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(CounterVector(out))
    }

    /// Componentwise `self ≥ other`.
    pub fn dominates(&self, other: &Self) -> bool {
        other.entries().all(|(q, n)| self.get(q) >= n)
    }

    /// Each entry capped at `cap`.
    pub fn capped(&self, cap: u32) -> Self {
        CounterVector(self.0.iter().map(|&(q, n)| (q, n.min(cap))).collect())
    }

    /// Renders as `II:1 III:2`, or `0` for the zero vector.
    pub fn render(&self, names: &[String]) -> String {
        self.render_with(names, " ")
    }

    /// Space-free rendering `II:1+III:2`, used inside state names and tokens.
    pub fn render_compact(&self, names: &[String]) -> String {
        self.render_with(names, "+")
    }

    fn render_with(&self, names: &[String], sep: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        self.entries().map(|(q, n)| format!("{}:{}", names[q], n)).collect::<Vec<_>>().join(sep)
    }

    /// Parses `0`, `II:1 III:2`, `II:1+III:2` or `II:1,III:2` against state names.
    pub fn parse(s: &str, names: &[String]) -> Option<Self> {
        let s = s.trim();
        if s == "0" || s.is_empty() {
            return Some(CounterVector::zero());
        }
        let mut v = CounterVector::zero();
        for part in s.split(|c: char| c.is_whitespace() || c == '+' || c == ',').filter(|p| !p.is_empty()) {
            let (q, n) = part.rsplit_once(':')?;
            let q = names.iter().position(|x| x == q)?;
            let n: u32 = n.parse().ok()?;
            v = v.add(&CounterVector::from_counts([(q, n)]));
        }
        Some(v)
    }
}

impl fmt::Display for CounterVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.entries().map(|(q, n)| format!("q{q}:{n}")).collect();
        f.write_str(&parts.join("+"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vec_strategy() -> impl Strategy<Value = CounterVector> {
        proptest::collection::vec((0usize..4, 0u32..3), 0..4).prop_map(CounterVector::from_counts)
    }

    #[test]
    fn arithmetic() {
        let a = CounterVector::from_counts([(1, 2), (3, 1)]);
        let b = CounterVector::unit(1);
        assert_eq!(a.sub(&b).unwrap(), CounterVector::from_counts([(1, 1), (3, 1)]));
        assert!(b.sub(&a).is_none());
        assert_eq!(a.norm(), 3);
        assert!(a.dominates(&b));
        assert_eq!(CounterVector::unit(2).minus_unit(2).unwrap(), CounterVector::zero());
        let names: Vec<String> = ["I", "II", "III", "IV"].iter().map(|s| s.to_string()).collect();
        assert_eq!(a.render(&names), "II:2 IV:1");
        assert_eq!(CounterVector::parse("II:2 IV:1", &names).unwrap(), a);
        assert_eq!(CounterVector::parse("II:2+IV:1", &names).unwrap(), a);
        assert_eq!(CounterVector::parse("0", &names).unwrap(), CounterVector::zero());
    }

    proptest! {
        #[test]
        fn add_sub_inverse(a in vec_strategy(), b in vec_strategy()) {
            let s = a.add(&b);
            prop_assert_eq!(s.sub(&b), Some(a.clone()));
            prop_assert!(s.dominates(&a));
            prop_assert_eq!(s.norm(), a.norm() + b.norm());
            prop_assert!(s.entries().all(|(_, n)| n > 0));
        }
    }
}

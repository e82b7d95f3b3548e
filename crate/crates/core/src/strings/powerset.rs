use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;

use crate::numeric::Interval;

pub const DEFAULT_MAX_SIZE: usize = 5;

/// A finite set of strings, or any string.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Powerset {
    Finite(BTreeSet<Vec<u8>>),
    Top,
}

impl Powerset {
    pub fn singleton(s: &[u8]) -> Self {
        Powerset::Finite(std::iter::once(s.to_vec()).collect())
    }

    pub fn empty() -> Self {
        Powerset::Finite(BTreeSet::new())
    }

    pub fn from_set(set: BTreeSet<Vec<u8>>, k: usize) -> Self {
        if set.len() > k {
            Powerset::Top
        } else {
            Powerset::Finite(set)
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Powerset::Finite(s) if s.is_empty())
    }

    pub fn is_top(&self) -> bool {
        matches!(self, Powerset::Top)
    }

    pub fn contains(&self, s: &[u8]) -> bool {
        match self {
            Powerset::Top => true,
            Powerset::Finite(set) => set.contains(s),
        }
    }

    pub fn leq(&self, o: &Powerset) -> bool {
        match (self, o) {
            (_, Powerset::Top) => true,
            (Powerset::Top, _) => false,
            (Powerset::Finite(a), Powerset::Finite(b)) => a.is_subset(b),
        }
    }

    pub fn join(&self, o: &Powerset, k: usize) -> Powerset {
        match (self, o) {
            (Powerset::Finite(a), Powerset::Finite(b)) => Powerset::from_set(a.union(b).cloned().collect(), k),
            _ => Powerset::Top,
        }
    }

    pub fn meet(&self, o: &Powerset) -> Powerset {
        match (self, o) {
            (Powerset::Top, x) | (x, Powerset::Top) => x.clone(),
            (Powerset::Finite(a), Powerset::Finite(b)) => Powerset::Finite(a.intersection(b).cloned().collect()),
        }
    }

    /// Same as the bounded join: chains are at most `k + 1` long.
    pub fn widen(&self, o: &Powerset, k: usize) -> Powerset {
        self.join(o, k)
    }

    pub fn concat(&self, o: &Powerset, k: usize) -> Powerset {
        match (self, o) {
            (Powerset::Finite(a), Powerset::Finite(b)) => {
                if a.len() * b.len() > k {
                    return Powerset::Top;
                }
                let mut out = BTreeSet::new();
                for x in a {
                    for y in b {
                        let mut s = x.clone();
                        s.extend_from_slice(y);
                        out.insert(s);
                    }
                }
                Powerset::Finite(out)
            }
            _ => Powerset::Top,
        }
    }

    /// Hull of member lengths; `None` for top.
    pub fn lengths(&self) -> Option<Interval> {
        match self {
            Powerset::Top => None,
            Powerset::Finite(set) => Some(
                set.iter()
                    .map(|s| Interval::constant(BigInt::from(s.len())))
                    .fold(Interval::bottom(), |a, b| a.join(&b)),
            ),
        }
    }

    /// Hull of the character codes of all members; `None` for top.
    pub fn codes(&self) -> Option<Interval> {
        match self {
            Powerset::Top => None,
            Powerset::Finite(set) => Some(
                set.iter()
                    .flatten()
                    .map(|&c| Interval::constant(BigInt::from(c)))
                    .fold(Interval::bottom(), |a, b| a.join(&b)),
            ),
        }
    }

    /// Codes found at positions in `idx` of some member; `None` for top.
    pub fn codes_at(&self, idx: &Interval) -> Option<BTreeSet<u8>> {
        match self {
            Powerset::Top => None,
            Powerset::Finite(set) => {
                let mut out = BTreeSet::new();
                for s in set {
                    for (i, &c) in s.iter().enumerate() {
                        if idx.contains(&BigInt::from(i)) {
                            out.insert(c);
                        }
                    }
                }
                Some(out)
            }
        }
    }

    /// Keeps the members whose length lies in `len`.
    pub fn filter_len(&self, len: &Interval) -> Powerset {
        match self {
            Powerset::Top => Powerset::Top,
            Powerset::Finite(set) => Powerset::Finite(
                set.iter()
                    .filter(|s| len.contains(&BigInt::from(s.len())))
                    .cloned()
                    .collect(),
            ),
        }
    }

    /// Keeps the members whose codes all lie in `codes`.
    pub fn filter_codes(&self, codes: &Interval) -> Powerset {
        match self {
            Powerset::Top => Powerset::Top,
            Powerset::Finite(set) => Powerset::Finite(
                set.iter()
                    .filter(|s| s.iter().all(|&c| codes.contains(&BigInt::from(c))))
                    .cloned()
                    .collect(),
            ),
        }
    }
}

pub fn quote(s: &[u8]) -> String {
    let mut out = String::from("\"");
    for &c in s {
        match c {
            b'"' => out.push_str("\\\""),
            b'\\' => out.push_str("\\\\"),
            b'\n' => out.push_str("\\n"),
            b'\t' => out.push_str("\\t"),
            0x20..=0x7e => out.push(c as char),
            _ => out.push_str(&format!("\\x{c:02x}")),
        }
    }
    out.push('"');
    out
}

impl fmt::Display for Powerset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Powerset::Top => f.write_str("⊤"),
            Powerset::Finite(set) if set.is_empty() => f.write_str("⊥"),
            Powerset::Finite(set) => {
                let items: Vec<String> = set.iter().map(|s| quote(s)).collect();
                write!(f, "{{{}}}", items.join(", "))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[&str]) -> Powerset {
        Powerset::Finite(xs.iter().map(|s| s.as_bytes().to_vec()).collect())
    }

    #[test]
    fn join_examples() {
        assert_eq!(set(&["a"]).join(&set(&["ab"]), 5), set(&["a", "ab"]));
        let six = set(&["a", "b", "c", "d", "e", "f"]);
        assert_eq!(set(&["a", "b", "c"]).join(&set(&["d", "e", "f"]), 5), Powerset::Top);
        assert!(six.leq(&Powerset::Top));
        assert_eq!(Powerset::Top.join(&set(&["x"]), 5), Powerset::Top);
    }

    #[test]
    fn bounds_and_codes() {
        let p = set(&["ab", "abc"]);
        assert_eq!(p.lengths(), Some(Interval::of(2, 3)));
        assert_eq!(p.codes(), Some(Interval::of(97, 99)));
        let ab = set(&["ab"]);
        assert_eq!(ab.codes_at(&Interval::of(0, 1)), Some([97u8, 98].into_iter().collect()));
        assert!(ab.filter_len(&Interval::of(1, 1)).is_empty());
    }

    #[test]
    fn rendering() {
        assert_eq!(set(&["a", "ab"]).to_string(), "{\"a\", \"ab\"}");
        assert_eq!(Powerset::Top.to_string(), "⊤");
    }
}

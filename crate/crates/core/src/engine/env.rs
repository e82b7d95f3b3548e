use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;

use super::backend::Backend;
use super::dims::{Dim, Owner};
use crate::config::StringLayer;
use crate::frontend::Ty;
use crate::numeric::{Interval, NumExpr};
use crate::strings::Powerset;

/// Analysis state: numeric backend (program variables and string ghosts)
/// plus the string powersets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbstractEnv {
    pub num: Backend,
    pub sets: BTreeMap<Owner, Powerset>,
    /// Cardinality bound of the powersets.
    pub k: usize,
}

/// A concrete value, as produced by the concrete interpreter.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CValue {
    Int(BigInt),
    Str(Vec<u8>),
}

/// A variable visible at some program point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Visible {
    pub name: String,
    pub owner: Owner,
    pub ty: Ty,
}

impl AbstractEnv {
    pub fn new(num: Backend, k: usize) -> Self {
        AbstractEnv {
            num,
            sets: BTreeMap::new(),
            k,
        }
    }

    pub fn is_bottom(&self) -> bool {
        self.num.is_bottom()
    }

    pub fn to_bottom(&self) -> Self {
        AbstractEnv {
            num: self.num.to_bottom(),
            sets: self.sets.clone(),
            k: self.k,
        }
    }

    pub fn set_bottom(&mut self) {
        self.num = self.num.to_bottom();
    }

    pub fn join(&self, o: &Self) -> Self {
        if self.is_bottom() {
            return o.clone();
        }
        if o.is_bottom() {
            return self.clone();
        }
        AbstractEnv {
            num: self.num.join(&o.num),
            sets: merge(&self.sets, &o.sets, |a, b| a.join(b, self.k)),
            k: self.k,
        }
    }

    pub fn widen(&self, o: &Self, thresholds: &[BigInt]) -> Self {
        if self.is_bottom() {
            return o.clone();
        }
        if o.is_bottom() {
            return self.clone();
        }
        AbstractEnv {
            num: self.num.widen(&o.num, thresholds),
            sets: merge(&self.sets, &o.sets, |a, b| a.widen(b, self.k)),
            k: self.k,
        }
    }

    pub fn meet(&self, o: &Self) -> Self {
        let mut r = AbstractEnv {
            num: self.num.meet(&o.num),
            sets: merge(&self.sets, &o.sets, |a, b| a.meet(b)),
            k: self.k,
        };
        if r.sets.values().any(|s| s.is_empty()) {
            r.set_bottom();
        }
        r
    }

    pub fn leq(&self, o: &Self) -> bool {
        if self.is_bottom() {
            return true;
        }
        if o.is_bottom() {
            return false;
        }
        self.num.leq(&o.num) && self.sets.iter().all(|(k, a)| o.sets.get(k).is_none_or(|b| a.leq(b)))
    }

    /// Loses all information but keeps the shape.
    pub fn forget_all(&mut self) {
        self.num.forget_all();
        for s in self.sets.values_mut() {
            *s = Powerset::Top;
        }
    }

    pub fn bounds(&self, d: Dim) -> Interval {
        self.num.bounds(&NumExpr::Var(d))
    }

    /// Whether a concrete valuation of `vars` is described by the state.
    /// Every combination of characters is tried against the summaries.
    pub fn contains(&self, layer: &StringLayer, vals: &[(Owner, CValue)]) -> bool {
        if self.is_bottom() {
            return false;
        }
        let mut point: BTreeMap<Dim, BigInt> = BTreeMap::new();
        let mut summaries: Vec<(Dim, BTreeSet<u8>)> = Vec::new();
        for (o, v) in vals {
            match v {
                CValue::Int(n) => {
                    point.insert(Dim::Var(*o), n.clone());
                }
                CValue::Str(s) => {
                    if let Some(p) = self.sets.get(o) {
                        if !p.contains(s) {
                            return false;
                        }
                    }
                    if layer.length {
                        point.insert(Dim::Len(*o), BigInt::from(s.len()));
                    }
                    if layer.summary && !s.is_empty() {
                        summaries.push((Dim::Ord(*o), s.iter().copied().collect()));
                    }
                }
            }
        }
        combos(&self.num, &mut point, &summaries)
    }
}

fn combos(num: &Backend, point: &mut BTreeMap<Dim, BigInt>, rest: &[(Dim, BTreeSet<u8>)]) -> bool {
    match rest.split_first() {
        None => num.contains(point),
        Some(((d, codes), tail)) => codes.iter().all(|&c| {
            point.insert(*d, BigInt::from(c));
            let ok = combos(num, point, tail);
            point.remove(d);
            ok
        }),
    }
}

fn merge(
    a: &BTreeMap<Owner, Powerset>,
    b: &BTreeMap<Owner, Powerset>,
    f: impl Fn(&Powerset, &Powerset) -> Powerset,
) -> BTreeMap<Owner, Powerset> {
    let mut out = a.clone();
    for (k, y) in b {
        match out.get_mut(k) {
            Some(x) => *x = f(x, y),
            None => {
                out.insert(*k, y.clone());
            }
        }
    }
    out
}

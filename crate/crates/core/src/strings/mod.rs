//! String abstractions: a length ghost `len(s)`, a character summary ghost
//! `ord(s)` bounding every character code, and a bounded powerset. Ghosts
//! live in the numeric backend, so relational facts such as `len(s) = i`
//! come for free with a relational backend.

mod powerset;

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::Zero;

pub use powerset::{quote, Powerset, DEFAULT_MAX_SIZE};

use crate::config::StringLayer;
use crate::engine::{AbstractEnv, Dim, Owner};
use crate::numeric::{CmpOp, Interval, NumCond, NumExpr};

fn le(a: NumExpr<Dim>, b: NumExpr<Dim>) -> NumCond<Dim> {
    NumCond::cmp(CmpOp::Le, a, b)
}

fn var(d: Dim) -> NumExpr<Dim> {
    NumExpr::Var(d)
}

fn cst(n: impl Into<BigInt>) -> NumExpr<Dim> {
    NumExpr::Const(n.into())
}

fn within(d: Dim, itv: &Interval) -> NumCond<Dim> {
    let mut c = NumCond::Const(true);
    if let Some(lo) = itv.lo() {
        c = NumCond::and(c, le(cst(lo.clone()), var(d)));
    }
    if let Some(hi) = itv.hi() {
        c = NumCond::and(c, le(var(d), cst(hi.clone())));
    }
    c
}

/// The string layer of a domain stack.
#[derive(Debug, Clone, Copy)]
pub struct Strings {
    pub layer: StringLayer,
}

impl Strings {
    pub fn new(layer: StringLayer) -> Self {
        Strings { layer }
    }

    /// Ghost dimensions of `o`.
    pub fn ghosts(&self, o: Owner) -> Vec<Dim> {
        let mut v = Vec::new();
        if self.layer.length {
            v.push(Dim::Len(o));
        }
        if self.layer.summary {
            v.push(Dim::Ord(o));
        }
        v
    }

    /// Registers `o` with no information.
    pub fn declare(&self, env: &mut AbstractEnv, o: Owner) {
        for d in self.ghosts(o) {
            env.num.add_dim(d);
        }
        if self.layer.powerset {
            env.sets.insert(o, Powerset::Top);
        }
    }

    pub fn remove(&self, env: &mut AbstractEnv, o: Owner) {
        env.num.remove_dims(&self.ghosts(o));
        env.sets.remove(&o);
    }

    pub fn rename(&self, env: &mut AbstractEnv, from: Owner, to: Owner) {
        for (a, b) in self.ghosts(from).into_iter().zip(self.ghosts(to)) {
            env.num.rename(&a, b);
        }
        if let Some(p) = env.sets.remove(&from) {
            env.sets.insert(to, p);
        }
    }

    /// `o = "bytes"`; `o` must be declared.
    pub fn literal(&self, env: &mut AbstractEnv, o: Owner, bytes: &[u8]) {
        if self.layer.length {
            env.num.assign(&Dim::Len(o), &cst(bytes.len()));
        }
        if self.layer.summary {
            let d = Dim::Ord(o);
            env.num.forget(&d);
            if let (Some(lo), Some(hi)) = (bytes.iter().min(), bytes.iter().max()) {
                env.num.filter(&NumCond::and(le(cst(*lo), var(d)), le(var(d), cst(*hi))));
            }
        }
        if self.layer.powerset {
            env.sets.insert(o, Powerset::singleton(bytes));
        }
    }

    /// `dst = src`, where `dst` is declared and distinct from `src`.
    pub fn copy(&self, env: &mut AbstractEnv, dst: Owner, src: Owner) {
        if self.layer.length {
            env.num.assign(&Dim::Len(dst), &var(Dim::Len(src)));
        }
        if self.layer.summary {
            // a summary is never related to another one by equality
            env.num.remove_dims(&[Dim::Ord(dst)]);
            env.num.expand(&Dim::Ord(src), Dim::Ord(dst));
        }
        if self.layer.powerset {
            let p = env.sets.get(&src).cloned().unwrap_or(Powerset::Top);
            env.sets.insert(dst, p);
        }
    }

    fn proven_empty(&self, env: &AbstractEnv, o: Owner) -> bool {
        let by_len = self.layer.length && env.bounds(Dim::Len(o)).singleton().is_some_and(|n| n.is_zero());
        let by_set = matches!(env.sets.get(&o), Some(Powerset::Finite(s)) if s.len() == 1 && s.contains(&Vec::new()));
        by_len || by_set
    }

    /// `dst = a @ b`; `dst` must be declared and fresh.
    pub fn concat(&self, env: &mut AbstractEnv, dst: Owner, a: Owner, b: Owner, aux: [Owner; 2]) {
        if self.layer.length {
            env.num
                .assign(&Dim::Len(dst), &NumExpr::add(var(Dim::Len(a)), var(Dim::Len(b))));
        }
        if self.layer.summary {
            let mut parts = vec![a, b];
            if self.layer.length_summary {
                let keep: Vec<Owner> = parts.iter().copied().filter(|o| !self.proven_empty(env, *o)).collect();
                if !keep.is_empty() {
                    parts = keep;
                }
            }
            env.num.remove_dims(&[Dim::Ord(dst)]);
            let copies: Vec<Dim> = parts.iter().zip(aux).map(|(p, x)| (Dim::Ord(*p), Dim::Ord(x))).map(|(p, x)| {
                env.num.expand(&p, x);
                x
            }).collect();
            env.num.fold(&copies, Dim::Ord(dst));
        }
        if self.layer.powerset {
            let pa = env.sets.get(&a).cloned().unwrap_or(Powerset::Top);
            let pb = env.sets.get(&b).cloned().unwrap_or(Powerset::Top);
            env.sets.insert(dst, pa.concat(&pb, env.k));
        }
        self.reduce(env, dst);
    }

    /// `dst = char_to_str(code)` for a code already known to be valid.
    pub fn from_char(&self, env: &mut AbstractEnv, dst: Owner, code: &NumExpr<Dim>) {
        if self.layer.length {
            env.num.assign(&Dim::Len(dst), &cst(1));
        }
        if self.layer.summary {
            env.num.assign(&Dim::Ord(dst), code);
        }
        if self.layer.powerset {
            let itv = env.num.bounds(code);
            let p = match (itv.lo(), itv.hi()) {
                (Some(lo), Some(hi)) if hi - lo < BigInt::from(env.k) => {
                    let lo: i64 = lo.try_into().unwrap_or(0);
                    let hi: i64 = hi.try_into().unwrap_or(-1);
                    let set: BTreeSet<Vec<u8>> = (lo.max(0)..=hi.min(127)).map(|c| vec![c as u8]).collect();
                    Powerset::Finite(set)
                }
                _ => Powerset::Top,
            };
            env.sets.insert(dst, p);
        }
        self.reduce(env, dst);
    }

    /// Condition under which `s[j]` is out of bounds, given the length.
    pub fn out_of_bounds(j: &NumExpr<Dim>, len: &NumExpr<Dim>) -> NumCond<Dim> {
        NumCond::or(
            NumCond::cmp(CmpOp::Lt, j.clone(), cst(0)),
            NumCond::cmp(CmpOp::Ge, j.clone(), len.clone()),
        )
    }

    /// Binds the fresh dimension `dst` to the code of `s[j]`, with `j` in
    /// bounds.
    pub fn index_value(&self, env: &mut AbstractEnv, s: Owner, j: &NumExpr<Dim>, dst: Dim) {
        if self.layer.summary {
            env.num.expand(&Dim::Ord(s), dst);
        } else {
            env.num.add_dim(dst);
        }
        let mut codes = Interval::of(0, 127);
        if let Some(p) = env.sets.get(&s) {
            if let Some(cs) = p.codes_at(&env.num.bounds(j)) {
                codes = match (cs.first(), cs.last()) {
                    (Some(lo), Some(hi)) => codes.meet(&Interval::of(*lo as i64, *hi as i64)),
                    _ => Interval::Bottom,
                };
            }
        }
        if codes.is_bottom() {
            env.set_bottom();
        } else {
            env.num.filter(&within(dst, &codes));
        }
    }

    /// Length of `s` as an expression over ghosts, when tracked.
    pub fn length(&self, s: Owner) -> Option<NumExpr<Dim>> {
        self.layer.length.then(|| var(Dim::Len(s)))
    }

    /// Bounds on the length known without the length ghost.
    pub fn length_hint(&self, env: &AbstractEnv, s: Owner) -> Interval {
        let base = Interval::at_least(0);
        match env.sets.get(&s).and_then(|p| p.lengths()) {
            Some(l) => base.meet(&l),
            None => base,
        }
    }

    /// Exchanges information between the powerset and the ghosts of `o`.
    pub fn reduce(&self, env: &mut AbstractEnv, o: Owner) {
        if env.is_bottom() {
            return;
        }
        let Some(p) = env.sets.get(&o).cloned() else {
            return;
        };
        let mut p = p;
        if self.layer.length {
            let d = Dim::Len(o);
            if let Some(l) = p.lengths() {
                if !l.is_bottom() {
                    env.num.filter(&within(d, &l));
                }
            }
            p = p.filter_len(&env.bounds(d));
        }
        if self.layer.summary {
            let d = Dim::Ord(o);
            let nonempty: Powerset = match &p {
                Powerset::Finite(s) => Powerset::Finite(s.iter().filter(|x| !x.is_empty()).cloned().collect()),
                Powerset::Top => Powerset::Top,
            };
            if let Some(c) = nonempty.codes() {
                if !c.is_bottom() {
                    env.num.filter(&within(d, &c));
                }
            }
            let codes = env.bounds(d);
            if let Powerset::Finite(set) = &p {
                p = Powerset::Finite(
                    set.iter()
                        .filter(|x| x.is_empty() || x.iter().all(|&c| codes.contains(&BigInt::from(c))))
                        .cloned()
                        .collect(),
                );
            }
        }
        if p.is_empty() {
            env.set_bottom();
        }
        env.sets.insert(o, p);
    }

    /// Exact outcome of `a == b`, when it can be decided.
    pub fn equal(&self, env: &AbstractEnv, a: Owner, b: Owner) -> Option<bool> {
        if a == b {
            return Some(true);
        }
        if let (Some(Powerset::Finite(x)), Some(Powerset::Finite(y))) = (env.sets.get(&a), env.sets.get(&b)) {
            if x.len() == 1 && x == y {
                return Some(true);
            }
            if x.is_disjoint(y) {
                return Some(false);
            }
        }
        if self.layer.length {
            let la = env.bounds(Dim::Len(a));
            let lb = env.bounds(Dim::Len(b));
            if la.meet(&lb).is_bottom() {
                return Some(false);
            }
        }
        None
    }

    /// Report lines for one string variable.
    pub fn render(&self, env: &AbstractEnv, o: Owner, name: &str) -> Vec<String> {
        let mut out = Vec::new();
        if self.layer.length {
            out.push(format!("len({name}) ∈ {}", env.bounds(Dim::Len(o))));
        }
        if self.layer.summary {
            out.push(format!("ord({name}) ∈ {}", env.bounds(Dim::Ord(o))));
        }
        if let Some(p) = env.sets.get(&o) {
            out.push(format!("{name} ∈ {p}"));
        }
        out
    }
}

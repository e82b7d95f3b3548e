use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;

use super::congruence::{reduce_itv_congr, Congruence};
use super::expr::{ArithOp, CmpOp, NumCond, NumExpr};
use super::interval::Interval;

/// Which components of the interval × congruence product are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NonRelConfig {
    pub intervals: bool,
    pub congruences: bool,
    /// Apply [`reduce_itv_congr`] after every update.
    pub reduce: bool,
}

impl NonRelConfig {
    pub fn intervals() -> Self {
        NonRelConfig {
            intervals: true,
            congruences: false,
            reduce: false,
        }
    }

    pub fn product() -> Self {
        NonRelConfig {
            intervals: true,
            congruences: true,
            reduce: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Value {
    pub itv: Interval,
    pub congr: Congruence,
}

impl Value {
    pub fn top() -> Self {
        Value {
            itv: Interval::top(),
            congr: Congruence::top(),
        }
    }

    pub fn is_bottom(&self) -> bool {
        self.itv.is_bottom() || self.congr.is_bottom()
    }

    pub fn contains(&self, n: &BigInt) -> bool {
        self.itv.contains(n) && self.congr.contains(n)
    }
}

/// Map from variables to interval × congruence values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonRelEnv<V: Ord> {
    cfg: NonRelConfig,
    vars: BTreeMap<V, Value>,
    reachable: bool,
}

impl<V: Ord + Clone> NonRelEnv<V> {
    pub fn top(cfg: NonRelConfig) -> Self {
        NonRelEnv {
            cfg,
            vars: BTreeMap::new(),
            reachable: true,
        }
    }

    pub fn config(&self) -> NonRelConfig {
        self.cfg
    }

    pub fn is_bottom(&self) -> bool {
        !self.reachable
    }

    /// The same dimensions, unreachable.
    pub fn to_bottom(&self) -> Self {
        NonRelEnv {
            cfg: self.cfg,
            vars: self.vars.keys().map(|k| (k.clone(), Value::top())).collect(),
            reachable: false,
        }
    }

    pub fn dims(&self) -> impl Iterator<Item = &V> {
        self.vars.keys()
    }

    pub fn has_dim(&self, v: &V) -> bool {
        self.vars.contains_key(v)
    }

    pub fn add_dim(&mut self, v: V) {
        self.vars.insert(v, Value::top());
    }

    pub fn remove_dim(&mut self, v: &V) {
        self.vars.remove(v);
    }

    pub fn get(&self, v: &V) -> Value {
        self.vars.get(v).cloned().unwrap_or_else(Value::top)
    }

    fn normalize(&self, mut val: Value) -> Value {
        if !self.cfg.intervals && !val.itv.is_bottom() {
            val.itv = Interval::top();
        }
        if !self.cfg.congruences && !val.congr.is_bottom() {
            val.congr = Congruence::top();
        }
        if self.cfg.reduce || val.is_bottom() {
            let (itv, congr) = reduce_itv_congr(&val.itv, &val.congr);
            val = Value { itv, congr };
        }
        val
    }

    /// Binds `v`, turning the whole environment unreachable on ⊥.
    pub fn set(&mut self, v: V, val: Value) {
        if !self.reachable {
            return;
        }
        let val = self.normalize(val);
        if val.is_bottom() {
            *self = self.to_bottom();
            self.vars.entry(v).or_insert_with(Value::top);
        } else {
            self.vars.insert(v, val);
        }
    }

    pub fn itv_eval(&self, e: &NumExpr<V>) -> Interval {
        if !self.reachable {
            return Interval::Bottom;
        }
        match e {
            NumExpr::Const(c) => Interval::constant(c.clone()),
            NumExpr::Var(v) => self.get(v).itv,
            NumExpr::Neg(a) => self.itv_eval(a).neg(),
            NumExpr::Bin(op, a, b) => {
                let (x, y) = (self.itv_eval(a), self.itv_eval(b));
                match op {
                    ArithOp::Add => x.add(&y),
                    ArithOp::Sub => x.sub(&y),
                    ArithOp::Mul => x.mul(&y),
                    ArithOp::Div => x.div(&y),
                    ArithOp::Mod => x.rem(&y),
                }
            }
            NumExpr::Rand(lo, hi) => {
                let (l, h) = (self.itv_eval(lo), self.itv_eval(hi));
                if l.is_bottom() || h.is_bottom() {
                    return Interval::Bottom;
                }
                Interval::new(l.lo().cloned(), h.hi().cloned())
            }
        }
    }

    pub fn congr_eval(&self, e: &NumExpr<V>) -> Congruence {
        if !self.reachable {
            return Congruence::Bottom;
        }
        match e {
            NumExpr::Const(c) => Congruence::constant(c.clone()),
            NumExpr::Var(v) => self.get(v).congr,
            NumExpr::Neg(a) => self.congr_eval(a).neg(),
            NumExpr::Bin(op, a, b) => {
                let (x, y) = (self.congr_eval(a), self.congr_eval(b));
                match op {
                    ArithOp::Add => x.add(&y),
                    ArithOp::Sub => x.sub(&y),
                    ArithOp::Mul => x.mul(&y),
                    ArithOp::Div => x.div(&y),
                    ArithOp::Mod => x.rem_op(&y),
                }
            }
            NumExpr::Rand(lo, hi) => {
                let (l, h) = (self.congr_eval(lo), self.congr_eval(hi));
                match (l.singleton(), h.singleton()) {
                    _ if l.is_bottom() || h.is_bottom() => Congruence::Bottom,
                    (Some(a), Some(b)) if a == b => l.clone(),
                    _ => Congruence::top(),
                }
            }
        }
    }

    /// Interval and congruence of `e`, reduced.
    pub fn eval(&self, e: &NumExpr<V>) -> Value {
        let val = Value {
            itv: self.itv_eval(e),
            congr: self.congr_eval(e),
        };
        self.normalize(val)
    }

    pub fn assign(&self, v: &V, e: &NumExpr<V>) -> Self {
        let mut r = self.clone();
        if self.reachable {
            let val = self.eval(e);
            r.set(v.clone(), val);
        }
        r
    }

    pub fn forget(&mut self, v: &V) {
        if self.reachable {
            self.vars.insert(v.clone(), Value::top());
        }
    }

    /// Restricts the environment to states satisfying `c`.
    pub fn filter(&self, c: &NumCond<V>) -> Self {
        if !self.reachable {
            return self.clone();
        }
        match c {
            NumCond::Const(true) => self.clone(),
            NumCond::Const(false) => self.to_bottom(),
            NumCond::And(a, b) => self.filter(a).filter(b),
            NumCond::Or(a, b) => self.filter(a).join(&self.filter(b)),
            NumCond::Not(a) => self.filter(&a.negate()),
            NumCond::Cmp(op, l, r) => self.filter_cmp(*op, l, r),
        }
    }

    fn filter_cmp(&self, op: CmpOp, l: &NumExpr<V>, r: &NumExpr<V>) -> Self {
        match op {
            CmpOp::Ne => self
                .filter_cmp(CmpOp::Lt, l, r)
                .join(&self.filter_cmp(CmpOp::Gt, l, r)),
            CmpOp::Gt => self.filter_le(r, l, 1),
            CmpOp::Ge => self.filter_le(r, l, 0),
            CmpOp::Lt => self.filter_le(l, r, 1),
            CmpOp::Le => self.filter_le(l, r, 0),
            CmpOp::Eq => {
                let (vl, vr) = (self.eval(l), self.eval(r));
                let m = Value {
                    itv: vl.itv.meet(&vr.itv),
                    congr: vl.congr.meet(&vr.congr),
                };
                if m.is_bottom() {
                    return self.to_bottom();
                }
                self.refine(l, &m).refine(r, &m)
            }
        }
    }

    /// `l + k ≤ r`.
    fn filter_le(&self, l: &NumExpr<V>, r: &NumExpr<V>, k: i64) -> Self {
        let (il, ir) = (self.itv_eval(l), self.itv_eval(r));
        if il.is_bottom() || ir.is_bottom() {
            return self.to_bottom();
        }
        let k = BigInt::from(k);
        if let (Some(a), Some(b)) = (il.lo(), ir.hi()) {
            if a + &k > *b {
                return self.to_bottom();
            }
        }
        let lt = Value {
            itv: Interval::new(None, ir.hi().map(|h| h - &k)),
            congr: Congruence::top(),
        };
        let rt = Value {
            itv: Interval::new(il.lo().map(|lo| lo + &k), None),
            congr: Congruence::top(),
        };
        self.refine(l, &lt).refine(r, &rt)
    }

    /// One backward pass constraining `e` to lie in `target`.
    fn refine(&self, e: &NumExpr<V>, target: &Value) -> Self {
        if !self.reachable {
            return self.clone();
        }
        match e {
            NumExpr::Const(c) => {
                if target.contains(c) {
                    self.clone()
                } else {
                    self.to_bottom()
                }
            }
            NumExpr::Var(v) => {
                let cur = self.get(v);
                let mut r = self.clone();
                r.set(
                    v.clone(),
                    Value {
                        itv: cur.itv.meet(&target.itv),
                        congr: cur.congr.meet(&target.congr),
                    },
                );
                r
            }
            NumExpr::Neg(a) => self.refine(
                a,
                &Value {
                    itv: target.itv.neg(),
                    congr: target.congr.neg(),
                },
            ),
            NumExpr::Bin(ArithOp::Add, a, b) => {
                let (va, vb) = (self.eval(a), self.eval(b));
                let ta = Value {
                    itv: target.itv.sub(&vb.itv),
                    congr: target.congr.sub(&vb.congr),
                };
                let tb = Value {
                    itv: target.itv.sub(&va.itv),
                    congr: target.congr.sub(&va.congr),
                };
                self.refine(a, &ta).refine(b, &tb)
            }
            NumExpr::Bin(ArithOp::Sub, a, b) => {
                let (va, vb) = (self.eval(a), self.eval(b));
                let ta = Value {
                    itv: target.itv.add(&vb.itv),
                    congr: target.congr.add(&vb.congr),
                };
                let tb = Value {
                    itv: va.itv.sub(&target.itv),
                    congr: va.congr.sub(&target.congr),
                };
                self.refine(a, &ta).refine(b, &tb)
            }
            NumExpr::Bin(ArithOp::Mul, a, b) => {
                let (va, vb) = (self.eval(a), self.eval(b));
                let scaled = |x: &NumExpr<V>, c: &BigInt| {
                    self.refine(
                        x,
                        &Value {
                            itv: target.itv.div_exact_preimage(c),
                            congr: target.congr.div_exact_preimage(c),
                        },
                    )
                };
                match (va.itv.singleton(), vb.itv.singleton()) {
                    (_, Some(c)) if !c.is_zero() => scaled(a, c),
                    (Some(c), _) if !c.is_zero() => scaled(b, c),
                    _ => self.check_feasible(e, target),
                }
            }
            _ => self.check_feasible(e, target),
        }
    }

    fn check_feasible(&self, e: &NumExpr<V>, target: &Value) -> Self {
        let v = self.eval(e);
        if v.itv.meet(&target.itv).is_bottom() || v.congr.meet(&target.congr).is_bottom() {
            self.to_bottom()
        } else {
            self.clone()
        }
    }

    fn combine(&self, other: &Self, f: impl Fn(&Value, &Value) -> Value) -> Self {
        let mut vars = BTreeMap::new();
        let mut reachable = true;
        for k in self.vars.keys().chain(other.vars.keys()) {
            if vars.contains_key(k) {
                continue;
            }
            let v = self.normalize(f(&self.get(k), &other.get(k)));
            reachable &= !v.is_bottom();
            vars.insert(k.clone(), v);
        }
        let r = NonRelEnv {
            cfg: self.cfg,
            vars,
            reachable,
        };
        if reachable {
            r
        } else {
            r.to_bottom()
        }
    }

    pub fn join(&self, other: &Self) -> Self {
        if !self.reachable {
            return other.clone();
        }
        if !other.reachable {
            return self.clone();
        }
        self.combine(other, |a, b| Value {
            itv: a.itv.join(&b.itv),
            congr: a.congr.join(&b.congr),
        })
    }

    pub fn meet(&self, other: &Self) -> Self {
        if !self.reachable {
            return self.clone();
        }
        if !other.reachable {
            return other.clone();
        }
        self.combine(other, |a, b| Value {
            itv: a.itv.meet(&b.itv),
            congr: a.congr.meet(&b.congr),
        })
    }

    pub fn widen(&self, other: &Self, thresholds: &[BigInt]) -> Self {
        if !self.reachable {
            return other.clone();
        }
        if !other.reachable {
            return self.clone();
        }
        self.combine(other, |a, b| Value {
            itv: a.itv.widen(&b.itv, thresholds),
            congr: a.congr.widen(&b.congr),
        })
    }

    pub fn leq(&self, other: &Self) -> bool {
        if !self.reachable {
            return true;
        }
        if !other.reachable {
            return false;
        }
        other.vars.iter().all(|(k, b)| {
            let a = self.get(k);
            a.itv.leq(&b.itv) && a.congr.leq(&b.congr)
        })
    }

    /// Adds `fresh` as an independent copy of `v`.
    pub fn expand(&self, v: &V, fresh: V) -> Self {
        let mut r = self.clone();
        let val = self.get(v);
        r.vars.insert(fresh, val);
        r
    }

    /// Replaces `group` by `into`, bound to the join of the group's values.
    pub fn fold(&self, group: &[V], into: V) -> Self {
        let mut r = self.clone();
        let mut acc: Option<Value> = None;
        for g in group {
            let val = self.get(g);
            acc = Some(match acc {
                None => val,
                Some(a) => Value {
                    itv: a.itv.join(&val.itv),
                    congr: a.congr.join(&val.congr),
                },
            });
            r.vars.remove(g);
        }
        r.vars.insert(into, acc.unwrap_or_else(Value::top));
        r
    }

    /// Whether the concrete valuation is described by this environment.
    /// Variables missing from `point` are unconstrained.
    pub fn contains(&self, point: &BTreeMap<V, BigInt>) -> bool {
        self.reachable
            && point
                .iter()
                .all(|(k, n)| !self.vars.contains_key(k) || self.get(k).contains(n))
    }
}

//! The numeric backend selected by the configuration, behind one interface.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::dims::{Dim, Owner};
use crate::config::Backend as BackendKind;
use crate::numeric::{ArithOp, CmpOp, Interval, NonRelEnv, NumCond, NumExpr};
use crate::poly::{LinCons, LinExpr, Polyhedron};

const BUG: &str = "numeric dimensions out of sync";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Backend {
    NonRel(NonRelEnv<Dim>),
    Poly(Polyhedron<Dim>),
}

type E = NumExpr<Dim>;

/// Scratch dimensions introduced while linearizing one expression.
struct Lin {
    aux: Vec<Dim>,
    next: u32,
}

impl Lin {
    fn fresh(&mut self, p: &mut Polyhedron<Dim>) -> Dim {
        let d = Dim::Var(Owner::Aux(self.next));
        self.next += 1;
        p.add_dim(d).expect(BUG);
        self.aux.push(d);
        d
    }

    fn cleanup(self, p: Polyhedron<Dim>) -> Polyhedron<Dim> {
        if self.aux.is_empty() {
            return p;
        }
        p.remove_dims(&self.aux.into_iter().collect())
    }
}

fn lin_new(p: &Polyhedron<Dim>) -> Lin {
    // aux dims never survive an operation
    let next = p
        .dims()
        .iter()
        .filter_map(|d| match d.owner() {
            Owner::Aux(n) => Some(n + 1),
            _ => None,
        })
        .max()
        .unwrap_or(0);
    Lin { aux: Vec::new(), next }
}

fn bounded(p: &Polyhedron<Dim>, d: Dim, itv: &Interval) -> Polyhedron<Dim> {
    if itv.is_bottom() {
        return p.to_bottom();
    }
    let mut cs = Vec::new();
    if let Some(lo) = itv.lo() {
        cs.push(LinCons::le(&LinExpr::constant(lo.clone()), &LinExpr::var(d)));
    }
    if let Some(hi) = itv.hi() {
        cs.push(LinCons::le(&LinExpr::var(d), &LinExpr::constant(hi.clone())));
    }
    p.assume_all(cs).expect(BUG)
}

/// Rewrites `e` into a linear expression, adding constrained scratch
/// dimensions for the non-linear parts.
fn linearize(p: &mut Polyhedron<Dim>, lin: &mut Lin, e: &E) -> LinExpr<Dim> {
    match e {
        NumExpr::Const(c) => LinExpr::constant(c.clone()),
        NumExpr::Var(v) => LinExpr::var(*v),
        NumExpr::Neg(a) => linearize(p, lin, a).neg(),
        NumExpr::Bin(op, a, b) => {
            let la = linearize(p, lin, a);
            let lb = linearize(p, lin, b);
            match op {
                ArithOp::Add => la.add(&lb),
                ArithOp::Sub => la.sub(&lb),
                ArithOp::Mul => {
                    if lb.is_constant() {
                        la.scale(&lb.constant)
                    } else if la.is_constant() {
                        lb.scale(&la.constant)
                    } else {
                        let itv = p.bounds(&la).mul(&p.bounds(&lb));
                        let t = lin.fresh(p);
                        *p = bounded(p, t, &itv);
                        LinExpr::var(t)
                    }
                }
                ArithOp::Div | ArithOp::Mod => {
                    let ia = p.bounds(&la);
                    let ib = p.bounds(&lb);
                    let t = lin.fresh(p);
                    let exact = lb.is_constant() && !lb.constant.is_zero() && {
                        let nonneg = ia.lo().is_some_and(|l| !l.is_negative());
                        let nonpos = ia.hi().is_some_and(|h| !h.is_positive());
                        nonneg || nonpos
                    };
                    if exact {
                        // a = c·q + r with |r| < |c| and r of the sign of a
                        let c = lb.constant.abs();
                        let q = lin.fresh(p);
                        let r = la.sub(&LinExpr::term(c.clone(), q));
                        let nonneg = ia.lo().is_some_and(|l| !l.is_negative());
                        let cm1 = LinExpr::constant(&c - BigInt::one());
                        let zero = LinExpr::constant(0);
                        let cs = if nonneg {
                            vec![LinCons::le(&zero, &r), LinCons::le(&r, &cm1)]
                        } else {
                            vec![LinCons::le(&cm1.neg(), &r), LinCons::le(&r, &zero)]
                        };
                        *p = p.assume_all(cs).expect(BUG);
                        let neg_div = lb.constant.is_negative();
                        let val = match op {
                            ArithOp::Div if neg_div => LinExpr::var(q).neg(),
                            ArithOp::Div => LinExpr::var(q),
                            _ => r,
                        };
                        *p = p.assume(&LinCons::eq(&LinExpr::var(t), &val)).expect(BUG);
                    } else {
                        let itv = if *op == ArithOp::Div { ia.div(&ib) } else { ia.rem(&ib) };
                        *p = bounded(p, t, &itv);
                    }
                    LinExpr::var(t)
                }
            }
        }
        NumExpr::Rand(lo, hi) => {
            let l = linearize(p, lin, lo);
            let h = linearize(p, lin, hi);
            let t = lin.fresh(p);
            let tv = LinExpr::var(t);
            *p = p.assume_all([LinCons::le(&l, &tv), LinCons::le(&tv, &h)]).expect(BUG);
            tv
        }
    }
}

fn poly_cmp(p: &Polyhedron<Dim>, op: CmpOp, a: &LinExpr<Dim>, b: &LinExpr<Dim>) -> Polyhedron<Dim> {
    let one = LinExpr::constant(1);
    match op {
        CmpOp::Le => p.assume(&LinCons::le(a, b)),
        CmpOp::Lt => p.assume(&LinCons::le(&a.add(&one), b)),
        CmpOp::Ge => p.assume(&LinCons::le(b, a)),
        CmpOp::Gt => p.assume(&LinCons::le(&b.add(&one), a)),
        CmpOp::Eq => p.assume(&LinCons::eq(a, b)),
        CmpOp::Ne => {
            let l = poly_cmp(p, CmpOp::Lt, a, b);
            let g = poly_cmp(p, CmpOp::Gt, a, b);
            return l.join(&g).expect(BUG);
        }
    }
    .expect(BUG)
}

fn poly_filter(p: &Polyhedron<Dim>, c: &NumCond<Dim>) -> Polyhedron<Dim> {
    if p.is_bottom() {
        return p.clone();
    }
    match c {
        NumCond::Const(true) => p.clone(),
        NumCond::Const(false) => p.to_bottom(),
        NumCond::Cmp(op, a, b) => {
            let mut q = p.clone();
            let mut lin = lin_new(&q);
            let la = linearize(&mut q, &mut lin, a);
            let lb = linearize(&mut q, &mut lin, b);
            let r = poly_cmp(&q, *op, &la, &lb);
            lin.cleanup(r)
        }
        NumCond::And(a, b) => poly_filter(&poly_filter(p, a), b),
        NumCond::Or(a, b) => poly_filter(p, a).join(&poly_filter(p, b)).expect(BUG),
        NumCond::Not(a) => poly_filter(p, &a.negate()),
    }
}

impl Backend {
    pub fn top(kind: BackendKind) -> Self {
        match kind {
            BackendKind::Polyhedra => Backend::Poly(Polyhedron::top([])),
            BackendKind::NonRel(cfg) => Backend::NonRel(NonRelEnv::top(cfg)),
        }
    }

    pub fn is_bottom(&self) -> bool {
        match self {
            Backend::NonRel(e) => e.is_bottom(),
            Backend::Poly(p) => p.is_bottom(),
        }
    }

    pub fn to_bottom(&self) -> Self {
        match self {
            Backend::NonRel(e) => Backend::NonRel(e.to_bottom()),
            Backend::Poly(p) => Backend::Poly(p.to_bottom()),
        }
    }

    pub fn dims(&self) -> BTreeSet<Dim> {
        match self {
            Backend::NonRel(e) => e.dims().copied().collect(),
            Backend::Poly(p) => p.dims().clone(),
        }
    }

    pub fn has_dim(&self, d: &Dim) -> bool {
        match self {
            Backend::NonRel(e) => e.has_dim(d),
            Backend::Poly(p) => p.has_dim(d),
        }
    }

    /// Adds an unconstrained dimension.
    pub fn add_dim(&mut self, d: Dim) {
        match self {
            Backend::NonRel(e) => e.add_dim(d),
            Backend::Poly(p) => p.add_dim(d).expect(BUG),
        }
    }

    pub fn remove_dims(&mut self, ds: &[Dim]) {
        if ds.is_empty() {
            return;
        }
        match self {
            Backend::NonRel(e) => ds.iter().for_each(|d| e.remove_dim(d)),
            Backend::Poly(p) => *p = p.remove_dims(&ds.iter().copied().collect()),
        }
    }

    pub fn forget(&mut self, d: &Dim) {
        match self {
            Backend::NonRel(e) => e.forget(d),
            Backend::Poly(p) => *p = p.forget(d),
        }
    }

    /// Loses all information, keeping dimensions and reachability.
    pub fn forget_all(&mut self) {
        if self.is_bottom() {
            return;
        }
        let dims: Vec<Dim> = self.dims().into_iter().collect();
        match self {
            Backend::NonRel(e) => dims.iter().for_each(|d| e.forget(d)),
            Backend::Poly(p) => *p = Polyhedron::top(dims),
        }
    }

    pub fn rename(&mut self, from: &Dim, to: Dim) {
        match self {
            Backend::NonRel(e) => {
                let v = e.get(from);
                let bottom = e.is_bottom();
                e.remove_dim(from);
                e.add_dim(to);
                if !bottom {
                    e.set(to, v);
                }
            }
            Backend::Poly(p) => *p = p.rename(from, to).expect(BUG),
        }
    }

    pub fn assign(&mut self, d: &Dim, e: &E) {
        match self {
            Backend::NonRel(env) => *env = env.assign(d, e),
            Backend::Poly(p) => {
                if p.is_bottom() {
                    return;
                }
                let mut q = p.clone();
                let mut lin = lin_new(&q);
                let l = linearize(&mut q, &mut lin, e);
                let r = q.assign(d, &l).expect(BUG);
                *p = lin.cleanup(r);
            }
        }
    }

    pub fn filter(&mut self, c: &NumCond<Dim>) {
        match self {
            Backend::NonRel(env) => *env = env.filter(c),
            Backend::Poly(p) => *p = poly_filter(p, c),
        }
    }

    pub fn filtered(&self, c: &NumCond<Dim>) -> Self {
        let mut r = self.clone();
        r.filter(c);
        r
    }

    /// Integer bounds of `e`.
    pub fn bounds(&self, e: &E) -> Interval {
        match self {
            Backend::NonRel(env) => {
                if env.is_bottom() {
                    return Interval::Bottom;
                }
                let v = env.eval(e);
                match v.congr.singleton() {
                    Some(c) => v.itv.meet(&Interval::constant(c.clone())),
                    None => v.itv,
                }
            }
            Backend::Poly(p) => {
                let mut q = p.clone();
                let mut lin = lin_new(&q);
                let l = linearize(&mut q, &mut lin, e);
                q.bounds(&l)
            }
        }
    }

    pub fn join(&self, o: &Self) -> Self {
        match (self, o) {
            (Backend::NonRel(a), Backend::NonRel(b)) => Backend::NonRel(a.join(b)),
            (Backend::Poly(a), Backend::Poly(b)) => Backend::Poly(a.join(b).expect(BUG)),
            _ => unreachable!("{BUG}"),
        }
    }

    pub fn meet(&self, o: &Self) -> Self {
        match (self, o) {
            (Backend::NonRel(a), Backend::NonRel(b)) => Backend::NonRel(a.meet(b)),
            (Backend::Poly(a), Backend::Poly(b)) => Backend::Poly(a.meet(b).expect(BUG)),
            _ => unreachable!("{BUG}"),
        }
    }

    pub fn widen(&self, o: &Self, thresholds: &[BigInt]) -> Self {
        match (self, o) {
            (Backend::NonRel(a), Backend::NonRel(b)) => Backend::NonRel(a.widen(b, thresholds)),
            (Backend::Poly(a), Backend::Poly(b)) => Backend::Poly(a.widen(b, thresholds).expect(BUG)),
            _ => unreachable!("{BUG}"),
        }
    }

    pub fn leq(&self, o: &Self) -> bool {
        match (self, o) {
            (Backend::NonRel(a), Backend::NonRel(b)) => a.leq(b),
            (Backend::Poly(a), Backend::Poly(b)) => a.leq(b).expect(BUG),
            _ => unreachable!("{BUG}"),
        }
    }

    pub fn expand(&mut self, d: &Dim, fresh: Dim) {
        match self {
            Backend::NonRel(e) => *e = e.expand(d, fresh),
            Backend::Poly(p) => *p = p.expand(d, fresh).expect(BUG),
        }
    }

    pub fn fold(&mut self, group: &[Dim], into: Dim) {
        match self {
            Backend::NonRel(e) => *e = e.fold(group, into),
            Backend::Poly(p) => *p = p.fold(group, into).expect(BUG),
        }
    }

    /// Whether an integer valuation lies in the concretization. Dimensions
    /// absent from `point` are existentially quantified.
    pub fn contains(&self, point: &BTreeMap<Dim, BigInt>) -> bool {
        match self {
            Backend::NonRel(e) => e.contains(point),
            Backend::Poly(p) => {
                let pt: BTreeMap<Dim, BigInt> =
                    point.iter().filter(|(d, _)| p.has_dim(d)).map(|(d, v)| (*d, v.clone())).collect();
                p.contains(&pt)
            }
        }
    }

    /// Restriction to `keep`, for display.
    pub fn project(&self, keep: &BTreeSet<Dim>) -> Self {
        match self {
            Backend::NonRel(e) => {
                let mut r = e.clone();
                for d in e.dims() {
                    if !keep.contains(d) {
                        r.remove_dim(d);
                    }
                }
                Backend::NonRel(r)
            }
            Backend::Poly(p) => Backend::Poly(p.project(keep)),
        }
    }

    /// Constant value of `d`, if known.
    pub fn constant_of(&self, d: &Dim) -> Option<BigInt> {
        self.bounds(&NumExpr::Var(*d)).singleton().cloned()
    }
}

pub fn is_zero_cond(e: E) -> NumCond<Dim> {
    NumCond::cmp(CmpOp::Eq, e, NumExpr::Const(BigInt::zero()))
}

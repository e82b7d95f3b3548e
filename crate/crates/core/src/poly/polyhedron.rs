use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::linear::{render_cons, ConsOp, LinCons, LinExpr};
use super::lp::LpResult;
use super::system::{canonicalize, project_out, project_out_within, System, TooLarge};
use crate::numeric::Interval;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolyError {
    #[error("unknown dimension {0}")]
    UnknownDim(String),
    #[error("dimension {0} already present")]
    DimExists(String),
    #[error("dimension mismatch")]
    DimMismatch,
    #[error("empty fold group")]
    EmptyGroup,
}

/// Convex polyhedron over integer-valued dimensions, in canonical constraint
/// form. `sys` is `None` for the empty polyhedron.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polyhedron<V: Ord> {
    dims: BTreeSet<V>,
    sys: Option<System<V>>,
}

/// Keys of the lifted system used by the convex hull.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum HullKey<V> {
    X(V),
    Y(V),
    Lambda,
}

impl<V: Ord + Clone + fmt::Display> Polyhedron<V> {
    pub fn top(dims: impl IntoIterator<Item = V>) -> Self {
        Polyhedron {
            dims: dims.into_iter().collect(),
            sys: Some(System::default()),
        }
    }

    pub fn bottom(dims: impl IntoIterator<Item = V>) -> Self {
        Polyhedron {
            dims: dims.into_iter().collect(),
            sys: None,
        }
    }

    /// Builds a polyhedron from arbitrary constraints over `dims`.
    pub fn from_constraints(
        dims: impl IntoIterator<Item = V>,
        cons: impl IntoIterator<Item = LinCons<V>>,
    ) -> Result<Self, PolyError> {
        Polyhedron::top(dims).assume_all(cons)
    }

    pub fn is_bottom(&self) -> bool {
        self.sys.is_none()
    }

    pub fn is_top(&self) -> bool {
        self.sys.as_ref().is_some_and(|s| s.is_empty_system())
    }

    pub fn dims(&self) -> &BTreeSet<V> {
        &self.dims
    }

    pub fn has_dim(&self, v: &V) -> bool {
        self.dims.contains(v)
    }

    pub fn to_bottom(&self) -> Self {
        Polyhedron::bottom(self.dims.iter().cloned())
    }

    /// Equalities followed by inequalities, in canonical form.
    pub fn constraints(&self) -> Vec<&LinCons<V>> {
        match &self.sys {
            None => Vec::new(),
            Some(s) => s.all().collect(),
        }
    }

    fn check_vars<'a>(&self, vars: impl IntoIterator<Item = &'a V>) -> Result<(), PolyError>
    where
        V: 'a,
    {
        for v in vars {
            if !self.dims.contains(v) {
                return Err(PolyError::UnknownDim(v.to_string()));
            }
        }
        Ok(())
    }

    fn with_rows(&self, rows: Vec<LinCons<V>>) -> Self {
        Polyhedron {
            dims: self.dims.clone(),
            sys: canonicalize(rows, true),
        }
    }

    pub fn add_dim(&mut self, v: V) -> Result<(), PolyError> {
        if self.dims.contains(&v) {
            return Err(PolyError::DimExists(v.to_string()));
        }
        self.dims.insert(v);
        Ok(())
    }

    /// Projects `vars` away and removes them from the dimensions.
    pub fn remove_dims(&self, vars: &BTreeSet<V>) -> Self {
        let mut dims = self.dims.clone();
        for v in vars {
            dims.remove(v);
        }
        let sys = match &self.sys {
            None => None,
            Some(s) => {
                let touched: BTreeSet<V> = s.vars().intersection(vars).cloned().collect();
                if touched.is_empty() {
                    Some(s.clone())
                } else {
                    project_out(s, &touched, true)
                }
            }
        };
        Polyhedron { dims, sys }
    }

    /// Shadow of the polyhedron on `keep`.
    pub fn project(&self, keep: &BTreeSet<V>) -> Self {
        let drop: BTreeSet<V> = self.dims.difference(keep).cloned().collect();
        self.remove_dims(&drop)
    }

    /// Loses all information on `v`, keeping the dimension.
    pub fn forget(&self, v: &V) -> Self {
        let mut r = self.remove_dims(&[v.clone()].into_iter().collect());
        r.dims.insert(v.clone());
        r
    }

    pub fn assume(&self, c: &LinCons<V>) -> Result<Self, PolyError> {
        self.check_vars(c.coeffs.keys())?;
        Ok(match &self.sys {
            None => self.clone(),
            Some(s) => {
                if s.entails(c, true) {
                    return Ok(self.clone());
                }
                let rows = s.all().cloned().chain(std::iter::once(c.clone())).collect();
                self.with_rows(rows)
            }
        })
    }

    pub fn assume_all(&self, cs: impl IntoIterator<Item = LinCons<V>>) -> Result<Self, PolyError> {
        let cs: Vec<LinCons<V>> = cs.into_iter().collect();
        for c in &cs {
            self.check_vars(c.coeffs.keys())?;
        }
        Ok(match &self.sys {
            None => self.clone(),
            Some(s) => self.with_rows(s.all().cloned().chain(cs).collect()),
        })
    }

    /// `v := e`.
    pub fn assign(&self, v: &V, e: &LinExpr<V>) -> Result<Self, PolyError> {
        self.check_vars(std::iter::once(v).chain(e.coeffs.keys()))?;
        let Some(s) = &self.sys else {
            return Ok(self.clone());
        };
        let a = e.coeff(v);
        if a.is_zero() {
            let f = self.forget(v);
            let c = LinCons::eq(&LinExpr::var(v.clone()), e);
            return f.assume(&c);
        }
        // invertible: v_old = (v_new − rest) / a
        let mut rest = e.clone();
        rest.coeffs.remove(v);
        let sign = if a.is_negative() { -BigInt::one() } else { BigInt::one() };
        let abs_a = a.abs();
        let rows = s
            .all()
            .map(|c| {
                let cv = c.coeff(v);
                if cv.is_zero() {
                    return c.clone();
                }
                let mut coeffs: BTreeMap<V, BigInt> = BTreeMap::new();
                for (k, x) in &c.coeffs {
                    if k != v {
                        coeffs.insert(k.clone(), x * &abs_a);
                    }
                }
                let m = &cv * &sign;
                *coeffs.entry(v.clone()).or_insert_with(BigInt::zero) += &m;
                for (k, x) in &rest.coeffs {
                    *coeffs.entry(k.clone()).or_insert_with(BigInt::zero) -= x * &m;
                }
                coeffs.retain(|_, x| !x.is_zero());
                LinCons {
                    coeffs,
                    op: c.op,
                    rhs: &c.rhs * &abs_a + &rest.constant * &m,
                }
            })
            .collect();
        Ok(self.with_rows(rows))
    }

    fn same_dims(&self, o: &Self) -> Result<(), PolyError> {
        if self.dims == o.dims {
            Ok(())
        } else {
            Err(PolyError::DimMismatch)
        }
    }

    pub fn entails(&self, c: &LinCons<V>) -> bool {
        match &self.sys {
            None => true,
            Some(s) => s.entails(c, true),
        }
    }

    pub fn leq(&self, o: &Self) -> Result<bool, PolyError> {
        self.same_dims(o)?;
        Ok(match (&self.sys, &o.sys) {
            (None, _) => true,
            (_, None) => false,
            (Some(s), Some(t)) => t.all().all(|c| s.entails(c, true)),
        })
    }

    pub fn meet(&self, o: &Self) -> Result<Self, PolyError> {
        self.same_dims(o)?;
        Ok(match (&self.sys, &o.sys) {
            (None, _) | (_, None) => self.to_bottom(),
            (Some(s), Some(t)) => self.with_rows(s.all().chain(t.all()).cloned().collect()),
        })
    }

    /// Convex hull.
    pub fn join(&self, o: &Self) -> Result<Self, PolyError> {
        self.same_dims(o)?;
        let (s, t) = match (&self.sys, &o.sys) {
            (None, _) => return Ok(o.clone()),
            (_, None) => return Ok(self.clone()),
            (Some(s), Some(t)) => (s, t),
        };
        if s.is_empty_system() || t.is_empty_system() {
            return Ok(Polyhedron::top(self.dims.iter().cloned()));
        }
        if t.all().all(|c| s.entails(c, true)) {
            return Ok(o.clone());
        }
        if s.all().all(|c| t.entails(c, true)) {
            return Ok(self.clone());
        }
        let sys = match hull(s, t) {
            Ok(sys) => sys,
            Err(TooLarge) => return Ok(self.weak_join(o)),
        };
        Ok(Polyhedron {
            dims: self.dims.clone(),
            sys,
        })
    }

    /// Constraints of either operand entailed by the other, plus the
    /// bounds of every dimension. Coarser than the hull, and cheap.
    fn weak_join(&self, o: &Self) -> Self {
        let (Some(s), Some(t)) = (&self.sys, &o.sys) else {
            unreachable!("weak join of non-empty operands");
        };
        let mut kept = Vec::new();
        for (a, b) in [(s, t), (t, s)] {
            for c in &a.eqs {
                kept.extend(c.halves().into_iter().filter(|h| b.entails(h, true)));
            }
            kept.extend(a.ineqs.iter().filter(|c| b.entails(c, true)).cloned());
        }
        for v in &self.dims {
            let x = LinExpr::var(v.clone());
            let b = self.bounds(&x).join(&o.bounds(&x));
            if let Some(lo) = b.lo() {
                kept.push(LinCons::le(&LinExpr::constant(lo.clone()), &x));
            }
            if let Some(hi) = b.hi() {
                kept.push(LinCons::le(&x, &LinExpr::constant(hi.clone())));
            }
        }
        self.with_rows(kept)
    }

    /// Standard widening: keeps the constraints of `self` entailed by `o`
    /// (equalities split into halves), plus threshold bounds `±v ≤ t` that
    /// both operands satisfy.
    pub fn widen(&self, o: &Self, thresholds: &[BigInt]) -> Result<Self, PolyError> {
        self.same_dims(o)?;
        let (s, t) = match (&self.sys, &o.sys) {
            (None, _) => return Ok(o.clone()),
            (_, None) => return Ok(self.clone()),
            (Some(s), Some(t)) => (s, t),
        };
        let mut kept = Vec::new();
        for c in &s.eqs {
            if t.entails(c, true) {
                kept.push(c.clone());
            } else {
                for h in c.halves() {
                    if t.entails(&h, true) {
                        kept.push(h);
                    }
                }
            }
        }
        for c in &s.ineqs {
            if t.entails(c, true) {
                kept.push(c.clone());
            }
        }
        if !thresholds.is_empty() {
            for v in &self.dims {
                let upper = thresholds.iter().find(|th| {
                    let c = LinCons::le(&LinExpr::var(v.clone()), &LinExpr::constant((*th).clone()));
                    s.entails(&c, true) && t.entails(&c, true)
                });
                if let Some(th) = upper {
                    kept.push(LinCons::le(
                        &LinExpr::var(v.clone()),
                        &LinExpr::constant(th.clone()),
                    ));
                }
                let lower = thresholds.iter().rev().find(|th| {
                    let c = LinCons::le(&LinExpr::constant((*th).clone()), &LinExpr::var(v.clone()));
                    s.entails(&c, true) && t.entails(&c, true)
                });
                if let Some(th) = lower {
                    kept.push(LinCons::le(
                        &LinExpr::constant(th.clone()),
                        &LinExpr::var(v.clone()),
                    ));
                }
            }
        }
        Ok(self.with_rows(kept))
    }

    /// Integer bounds of `e`.
    pub fn bounds(&self, e: &LinExpr<V>) -> Interval {
        let Some(s) = &self.sys else {
            return Interval::Bottom;
        };
        if e.is_constant() {
            return Interval::constant(e.constant.clone());
        }
        let hi = match s.maximize(&e.coeffs) {
            LpResult::Optimal(v) => Some(v.floor().to_integer() + &e.constant),
            LpResult::Unbounded => None,
            LpResult::Infeasible => return Interval::Bottom,
        };
        let neg: BTreeMap<V, BigInt> = e.coeffs.iter().map(|(k, c)| (k.clone(), -c)).collect();
        let lo = match s.maximize(&neg) {
            LpResult::Optimal(v) => Some(-v.floor().to_integer() + &e.constant),
            LpResult::Unbounded => None,
            LpResult::Infeasible => return Interval::Bottom,
        };
        Interval::new(lo, hi)
    }

    /// Adds `fresh`, constrained like `v` but independently of it.
    pub fn expand(&self, v: &V, fresh: V) -> Result<Self, PolyError> {
        self.check_vars(std::iter::once(v))?;
        if self.dims.contains(&fresh) {
            return Err(PolyError::DimExists(fresh.to_string()));
        }
        let mut dims = self.dims.clone();
        dims.insert(fresh.clone());
        let Some(s) = &self.sys else {
            return Ok(Polyhedron { dims, sys: None });
        };
        let mut rows: Vec<LinCons<V>> = s.all().cloned().collect();
        for c in s.all() {
            if c.mentions(v) {
                rows.push(c.map_vars(&|k| if k == v { fresh.clone() } else { k.clone() }));
            }
        }
        Ok(Polyhedron {
            dims,
            sys: canonicalize(rows, true),
        })
    }

    /// Merges `group` into `into` by joining the projections on each member.
    pub fn fold(&self, group: &[V], into: V) -> Result<Self, PolyError> {
        if group.is_empty() {
            return Err(PolyError::EmptyGroup);
        }
        self.check_vars(group.iter())?;
        let all: BTreeSet<V> = group.iter().cloned().collect();
        let mut acc: Option<Self> = None;
        for g in group {
            let others: BTreeSet<V> = all.iter().filter(|x| *x != g).cloned().collect();
            let p = self.remove_dims(&others).rename(g, into.clone())?;
            acc = Some(match acc {
                None => p,
                Some(a) => a.join(&p)?,
            });
        }
        Ok(acc.expect("non-empty group"))
    }

    /// Renames dimension `v` to `w` (which must be absent or equal to `v`).
    pub fn rename(&self, v: &V, w: V) -> Result<Self, PolyError> {
        self.check_vars(std::iter::once(v))?;
        if *v == w {
            return Ok(self.clone());
        }
        if self.dims.contains(&w) {
            return Err(PolyError::DimExists(w.to_string()));
        }
        let mut dims = self.dims.clone();
        dims.remove(v);
        dims.insert(w.clone());
        let f = |k: &V| if k == v { w.clone() } else { k.clone() };
        let sys = match &self.sys {
            None => None,
            Some(s) => canonicalize(s.all().map(|c| c.map_vars(&f)).collect(), true),
        };
        Ok(Polyhedron { dims, sys })
    }

    /// Whether an integer point lies in the polyhedron. Dimensions absent from
    /// `point` are existentially quantified.
    pub fn contains(&self, point: &BTreeMap<V, BigInt>) -> bool {
        let Some(s) = &self.sys else {
            return false;
        };
        let missing: BTreeSet<V> = s.vars().into_iter().filter(|v| !point.contains_key(v)).collect();
        let sys = if missing.is_empty() {
            s.clone()
        } else {
            match project_out(s, &missing, true) {
                Some(p) => p,
                None => return false,
            }
        };
        let ok = sys.all().all(|c| c.holds(&|v| point[v].clone()));
        ok
    }

    /// Report lines, one constraint each, sorted.
    pub fn render_lines(&self, name: impl Fn(&V) -> String) -> Vec<String> {
        let mut lines: Vec<String> = self
            .constraints()
            .into_iter()
            .map(|c| render_cons(c, &name))
            .collect();
        lines.sort();
        lines
    }
}

/// Largest intermediate system of the hull projection.
const HULL_LIMIT: usize = 64;

/// Convex hull by projecting the lifted system, or `TooLarge` when the
/// projection exceeds its budget.
fn hull<V: Ord + Clone>(p: &System<V>, q: &System<V>) -> Result<Option<System<V>>, TooLarge> {
    use HullKey::*;
    let mut eqs = Vec::new();
    let mut ineqs = Vec::new();
    let mut aux: BTreeSet<HullKey<V>> = BTreeSet::new();
    aux.insert(Lambda);
    let mut push = |c: LinCons<HullKey<V>>| match c.op {
        ConsOp::Eq => eqs.push(c),
        ConsOp::Le => ineqs.push(c),
    };
    // y ∈ λ·P
    for c in p.all() {
        let mut coeffs: BTreeMap<HullKey<V>, BigInt> =
            c.coeffs.iter().map(|(k, a)| (Y(k.clone()), a.clone())).collect();
        if !c.rhs.is_zero() {
            coeffs.insert(Lambda, -&c.rhs);
        }
        push(LinCons {
            coeffs,
            op: c.op,
            rhs: BigInt::zero(),
        });
    }
    // x − y ∈ (1 − λ)·Q
    for c in q.all() {
        let mut coeffs: BTreeMap<HullKey<V>, BigInt> = BTreeMap::new();
        for (k, a) in &c.coeffs {
            coeffs.insert(X(k.clone()), a.clone());
            coeffs.insert(Y(k.clone()), -a);
        }
        if !c.rhs.is_zero() {
            coeffs.insert(Lambda, c.rhs.clone());
        }
        push(LinCons {
            coeffs,
            op: c.op,
            rhs: c.rhs.clone(),
        });
    }
    let lam = LinExpr::var(Lambda);
    push(LinCons::le(&LinExpr::constant(0), &lam));
    push(LinCons::le(&lam, &LinExpr::constant(1)));
    for k in p.vars().into_iter().chain(q.vars()) {
        aux.insert(Y(k));
    }
    let lifted = System { eqs, ineqs };
    let Some(projected) = project_out_within(&lifted, &aux, false, HULL_LIMIT)? else {
        return Ok(None);
    };
    let rows = projected
        .all()
        .map(|c| {
            c.map_vars(&|k| match k {
                X(v) => v.clone(),
                _ => unreachable!("auxiliary variable survived projection"),
            })
        })
        .collect();
    Ok(canonicalize(rows, true))
}

impl<V: Ord + Clone + fmt::Display> fmt::Display for Polyhedron<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_bottom() {
            return f.write_str("⊥");
        }
        let lines = self.render_lines(|v| v.to_string());
        if lines.is_empty() {
            return f.write_str("⊤");
        }
        write!(f, "{{{}}}", lines.join(", "))
    }
}

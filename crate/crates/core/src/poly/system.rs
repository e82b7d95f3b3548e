//! Constraint systems: canonical form, entailment, Fourier–Motzkin projection.

use std::cell::Cell;
use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::linear::{ConsOp, LinCons, Norm};
use super::lp::{self, LpResult, Row, RowOp, Q};

pub const DEFAULT_FM_CAP: usize = 2000;

/// Systems above this size are canonicalized between eliminations.
const COMPACT_THRESHOLD: usize = 24;

thread_local! {
    static FM_CAP: Cell<usize> = const { Cell::new(DEFAULT_FM_CAP) };
    static FM_TRUNCATIONS: Cell<u64> = const { Cell::new(0) };
}

/// Sets the projection blow-up cap for the current thread.
pub fn set_fm_cap(cap: usize) {
    FM_CAP.with(|c| c.set(cap.max(1)));
}

pub fn fm_cap() -> usize {
    FM_CAP.with(|c| c.get())
}

/// Number of projections on this thread that dropped constraints to stay
/// under the cap.
pub fn fm_truncations() -> u64 {
    FM_TRUNCATIONS.with(|c| c.get())
}

/// Equalities in reduced row-echelon form (pivot = first variable) and
/// irredundant inequalities not mentioning any pivot.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct System<K: Ord> {
    pub eqs: Vec<LinCons<K>>,
    pub ineqs: Vec<LinCons<K>>,
}

impl<K: Ord + Clone> Default for System<K> {
    fn default() -> Self {
        System {
            eqs: Vec::new(),
            ineqs: Vec::new(),
        }
    }
}

fn pivot<K: Ord>(c: &LinCons<K>) -> &K {
    c.coeffs.keys().next().expect("non-trivial constraint")
}

impl<K: Ord + Clone> System<K> {
    pub fn all(&self) -> impl Iterator<Item = &LinCons<K>> {
        self.eqs.iter().chain(self.ineqs.iter())
    }

    pub fn vars(&self) -> BTreeSet<K> {
        self.all().flat_map(|c| c.coeffs.keys().cloned()).collect()
    }

    pub fn is_empty_system(&self) -> bool {
        self.eqs.is_empty() && self.ineqs.is_empty()
    }

    /// Maximum of `obj` over the system.
    pub fn maximize(&self, obj: &BTreeMap<K, BigInt>) -> LpResult {
        let rows: Vec<&LinCons<K>> = self.all().collect();
        maximize_over(obj, &rows, None)
    }

    /// Whether every point of the system satisfies `c` (over rationals, or
    /// integers when `tighten`).
    pub fn entails(&self, c: &LinCons<K>, tighten: bool) -> bool {
        let lp = |h: &LinCons<K>| match self.maximize(&h.coeffs) {
            LpResult::Infeasible => true,
            LpResult::Unbounded => false,
            LpResult::Optimal(v) => at_most(&v, &h.rhs, tighten),
        };
        let below = |h: LinCons<K>| {
            if lp(&h) {
                return true;
            }
            if !tighten {
                return false;
            }
            let mut r = h;
            for e in &self.eqs {
                let p = pivot(e);
                if r.mentions(p) {
                    r = r.substitute(p, e);
                }
            }
            match r.normalize(true) {
                Norm::True => true,
                Norm::False => matches!(self.maximize(&BTreeMap::new()), LpResult::Infeasible),
                Norm::Cons(r) => lp(&r),
            }
        };
        match c.op {
            ConsOp::Le => below(c.clone()),
            ConsOp::Eq => c.halves().into_iter().all(below),
        }
    }
}

fn at_most(v: &Q, rhs: &BigInt, tighten: bool) -> bool {
    if tighten {
        v.floor().to_integer() <= *rhs
    } else {
        *v <= lp::q(rhs.clone())
    }
}

/// LP over sparse constraints. With `slack_var`, maximizes an extra variable
/// `t` added to every inequality (`a·x + t ≤ b`, `t ≤ 1`) instead of `obj`.
fn maximize_over<K: Ord + Clone>(
    obj: &BTreeMap<K, BigInt>,
    rows: &[&LinCons<K>],
    slack_var: Option<()>,
) -> LpResult {
    let mut index: BTreeMap<&K, usize> = BTreeMap::new();
    for k in rows.iter().flat_map(|c| c.coeffs.keys()).chain(obj.keys()) {
        let n = index.len();
        index.entry(k).or_insert(n);
    }
    let nvars = index.len() + usize::from(slack_var.is_some());
    let t = index.len();
    let mut dense: Vec<Row> = rows
        .iter()
        .map(|c| {
            let mut coeffs = vec![Q::zero(); nvars];
            for (k, v) in &c.coeffs {
                coeffs[index[k]] = lp::q(v.clone());
            }
            if slack_var.is_some() && c.op == ConsOp::Le {
                coeffs[t] = lp::q(1);
            }
            Row {
                coeffs,
                op: match c.op {
                    ConsOp::Le => RowOp::Le,
                    ConsOp::Eq => RowOp::Eq,
                },
                rhs: lp::q(c.rhs.clone()),
            }
        })
        .collect();
    let mut objective = vec![Q::zero(); nvars];
    if slack_var.is_some() {
        objective[t] = lp::q(1);
        let mut coeffs = vec![Q::zero(); nvars];
        coeffs[t] = lp::q(1);
        dense.push(Row {
            coeffs,
            op: RowOp::Le,
            rhs: lp::q(1),
        });
    } else {
        for (k, v) in obj {
            objective[index[k]] = lp::q(v.clone());
        }
    }
    lp::maximize(nvars, &objective, &dense)
}

fn negated<K: Ord + Clone>(coeffs: &BTreeMap<K, BigInt>) -> BTreeMap<K, BigInt> {
    coeffs.iter().map(|(k, c)| (k.clone(), -c)).collect()
}

/// Merges syntactic duplicates and opposite pairs. Returns `None` when an
/// opposite pair is contradictory; new equalities are pushed to `eqs`.
fn merge_ineqs<K: Ord + Clone>(
    ineqs: Vec<LinCons<K>>,
    eqs: &mut Vec<LinCons<K>>,
) -> Option<Vec<LinCons<K>>> {
    let mut best: BTreeMap<BTreeMap<K, BigInt>, BigInt> = BTreeMap::new();
    for c in ineqs {
        match best.get_mut(&c.coeffs) {
            Some(r) => {
                if c.rhs < *r {
                    *r = c.rhs;
                }
            }
            None => {
                best.insert(c.coeffs, c.rhs);
            }
        }
    }
    let mut out = Vec::new();
    let mut used: BTreeSet<BTreeMap<K, BigInt>> = BTreeSet::new();
    for (coeffs, rhs) in &best {
        if used.contains(coeffs) {
            continue;
        }
        let neg = negated(coeffs);
        if let Some(nrhs) = best.get(&neg) {
            // coeffs·x ≤ rhs and coeffs·x ≥ −nrhs
            let lo = -nrhs;
            if lo > *rhs {
                return None;
            }
            if lo == *rhs {
                used.insert(neg.clone());
                used.insert(coeffs.clone());
                eqs.push(LinCons {
                    coeffs: coeffs.clone(),
                    op: ConsOp::Eq,
                    rhs: rhs.clone(),
                });
                continue;
            }
        }
        out.push(LinCons {
            coeffs: coeffs.clone(),
            op: ConsOp::Le,
            rhs: rhs.clone(),
        });
    }
    Some(out)
}

/// Gaussian elimination to reduced row-echelon form. Returns `None` when
/// inconsistent.
fn echelon<K: Ord + Clone>(rows: Vec<LinCons<K>>, tighten: bool) -> Option<Vec<LinCons<K>>> {
    let mut done: Vec<LinCons<K>> = Vec::new();
    let mut rest = rows;
    loop {
        let mut next = Vec::with_capacity(rest.len());
        for r in rest {
            match r.normalize(tighten) {
                Norm::True => {}
                Norm::False => return None,
                Norm::Cons(c) => next.push(c),
            }
        }
        rest = next;
        let Some(idx) = (0..rest.len()).min_by(|&a, &b| pivot(&rest[a]).cmp(pivot(&rest[b]))) else {
            break;
        };
        let e = rest.swap_remove(idx);
        let p = pivot(&e).clone();
        for r in rest.iter_mut() {
            if r.mentions(&p) {
                *r = r.substitute(&p, &e);
            }
        }
        for d in done.iter_mut() {
            if d.mentions(&p) {
                match d.substitute(&p, &e).normalize(tighten) {
                    Norm::Cons(c) => *d = c,
                    Norm::True => unreachable!("independent equalities"),
                    Norm::False => return None,
                }
            }
        }
        done.push(e);
    }
    done.sort();
    Some(done)
}

/// Canonical form of a conjunction of constraints, or `None` if empty.
pub fn canonicalize<K: Ord + Clone>(rows: Vec<LinCons<K>>, tighten: bool) -> Option<System<K>> {
    let (mut eq_rows, mut ineq_rows): (Vec<_>, Vec<_>) =
        rows.into_iter().partition(|c| c.op == ConsOp::Eq);
    loop {
        let eqs = echelon(eq_rows, tighten)?;
        let mut ineqs = Vec::with_capacity(ineq_rows.len());
        for c in ineq_rows {
            let mut c = c;
            for e in &eqs {
                let p = pivot(e);
                if c.mentions(p) {
                    c = c.substitute(p, e);
                }
            }
            match c.normalize(tighten) {
                Norm::True => {}
                Norm::False => return None,
                Norm::Cons(c) => ineqs.push(c),
            }
        }
        let mut new_eqs = Vec::new();
        let ineqs = merge_ineqs(ineqs, &mut new_eqs)?;
        if !new_eqs.is_empty() {
            eq_rows = eqs.into_iter().chain(new_eqs).collect();
            ineq_rows = ineqs;
            continue;
        }
        if ineqs.is_empty() {
            return Some(System { eqs, ineqs });
        }

        // feasibility and implicit equalities
        let rows: Vec<&LinCons<K>> = eqs.iter().chain(ineqs.iter()).collect();
        let interior = match maximize_over(&BTreeMap::new(), &rows, Some(())) {
            LpResult::Infeasible => return None,
            LpResult::Unbounded => true,
            LpResult::Optimal(t) if t.is_negative() => return None,
            LpResult::Optimal(t) => t.is_positive(),
        };
        if !interior {
            let mut implicit = Vec::new();
            let mut kept = Vec::new();
            for c in &ineqs {
                let min_is_rhs = match maximize_over(&negated(&c.coeffs), &rows, None) {
                    LpResult::Optimal(v) => -v == lp::q(c.rhs.clone()),
                    _ => false,
                };
                if min_is_rhs {
                    implicit.push(LinCons {
                        coeffs: c.coeffs.clone(),
                        op: ConsOp::Eq,
                        rhs: c.rhs.clone(),
                    });
                } else {
                    kept.push(c.clone());
                }
            }
            if !implicit.is_empty() {
                eq_rows = eqs.into_iter().chain(implicit).collect();
                ineq_rows = kept;
                continue;
            }
        }

        let ineqs = remove_redundant(&eqs, ineqs, tighten);
        let mut ineqs = ineqs;
        ineqs.sort();
        return Some(System { eqs, ineqs });
    }
}

fn remove_redundant<K: Ord + Clone>(
    eqs: &[LinCons<K>],
    ineqs: Vec<LinCons<K>>,
    tighten: bool,
) -> Vec<LinCons<K>> {
    let eq_vars: BTreeSet<&K> = eqs.iter().flat_map(|e| e.coeffs.keys()).collect();
    let mut alive = vec![true; ineqs.len()];
    for i in 0..ineqs.len() {
        let c = &ineqs[i];
        // a direction that no other constraint blocks leaves c unbounded
        let blocked = c.coeffs.iter().all(|(k, a)| {
            eq_vars.contains(k)
                || ineqs.iter().enumerate().any(|(j, d)| {
                    j != i && alive[j] && d.coeff(k).signum() == a.signum()
                })
        });
        if !blocked {
            continue;
        }
        let rows: Vec<&LinCons<K>> = eqs
            .iter()
            .chain(
                ineqs
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i && alive[j])
                    .map(|(_, d)| d),
            )
            .collect();
        if let LpResult::Optimal(v) = maximize_over(&c.coeffs, &rows, None) {
            if at_most(&v, &c.rhs, tighten) {
                alive[i] = false;
            }
        }
    }
    ineqs
        .into_iter()
        .zip(alive)
        .filter_map(|(c, a)| a.then_some(c))
        .collect()
}

fn fm_combine<K: Ord + Clone>(p: &LinCons<K>, n: &LinCons<K>, v: &K) -> LinCons<K> {
    let a = p.coeff(v);
    let b = -n.coeff(v);
    let g = a.gcd(&b);
    let (ma, mb) = (&b / &g, &a / &g);
    let mut coeffs: BTreeMap<K, BigInt> = BTreeMap::new();
    for (k, c) in &p.coeffs {
        *coeffs.entry(k.clone()).or_insert_with(BigInt::zero) += c * &ma;
    }
    for (k, c) in &n.coeffs {
        *coeffs.entry(k.clone()).or_insert_with(BigInt::zero) += c * &mb;
    }
    coeffs.retain(|_, c| !c.is_zero());
    LinCons {
        coeffs,
        op: ConsOp::Le,
        rhs: &p.rhs * &ma + &n.rhs * &mb,
    }
}

/// Existentially quantifies `vars` away. Returns `None` if the system is empty.
pub fn project_out<K: Ord + Clone>(
    sys: &System<K>,
    vars: &BTreeSet<K>,
    tighten: bool,
) -> Option<System<K>> {
    project_impl(sys, vars, tighten, None).unwrap_or_else(|_| unreachable!("unbounded projection"))
}

/// A projection abandoned for exceeding its size limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TooLarge;

/// Like [`project_out`], but gives up once an intermediate system has more
/// than `limit` inequalities or a constraint heavier than [`MAX_WEIGHT`].
pub fn project_out_within<K: Ord + Clone>(
    sys: &System<K>,
    vars: &BTreeSet<K>,
    tighten: bool,
    limit: usize,
) -> Result<Option<System<K>>, TooLarge> {
    project_impl(sys, vars, tighten, Some(limit))
}

/// Bits of coefficients (see [`LinCons::weight`]) beyond which a bounded
/// projection gives up.
pub const MAX_WEIGHT: u64 = 160;

fn project_impl<K: Ord + Clone>(
    sys: &System<K>,
    vars: &BTreeSet<K>,
    tighten: bool,
    limit: Option<usize>,
) -> Result<Option<System<K>>, TooLarge> {
    let mut eqs = sys.eqs.clone();
    let mut ineqs = sys.ineqs.clone();
    let mut todo: BTreeSet<K> = vars.clone();
    let cap = fm_cap();
    while !todo.is_empty() {
        // prefer variables fixed by an equality, then the cheapest FM step
        let via_eq = todo
            .iter()
            .find(|v| eqs.iter().any(|e| e.mentions(v)))
            .cloned();
        let v = match via_eq {
            Some(v) => v,
            None => {
                let cost = |v: &K| {
                    let pos = ineqs.iter().filter(|c| c.coeff(v).is_positive()).count();
                    let neg = ineqs.iter().filter(|c| c.coeff(v).is_negative()).count();
                    pos * neg
                };
                todo.iter().min_by_key(|v| cost(v)).cloned().expect("non-empty")
            }
        };
        todo.remove(&v);
        if let Some(idx) = eqs.iter().position(|e| e.mentions(&v)) {
            let e = eqs.swap_remove(idx);
            for r in eqs.iter_mut().chain(ineqs.iter_mut()) {
                if r.mentions(&v) {
                    *r = r.substitute(&v, &e);
                }
            }
        } else {
            let (with, without): (Vec<_>, Vec<_>) = ineqs.into_iter().partition(|c| c.mentions(&v));
            let (pos, neg): (Vec<_>, Vec<_>) =
                with.into_iter().partition(|c| c.coeff(&v).is_positive());
            let mut next = without;
            for p in &pos {
                for n in &neg {
                    next.push(fm_combine(p, n, &v));
                }
            }
            ineqs = next;
        }
        let mut normalized = Vec::with_capacity(ineqs.len());
        for c in ineqs {
            match c.normalize(tighten) {
                Norm::True => {}
                Norm::False => return Ok(None),
                Norm::Cons(c) => normalized.push(c),
            }
        }
        let mut new_eqs = Vec::new();
        ineqs = match merge_ineqs(normalized, &mut new_eqs) {
            Some(x) => x,
            None => return Ok(None),
        };
        eqs.extend(new_eqs);
        if let Some(l) = limit {
            if ineqs.len() > l || eqs.iter().chain(&ineqs).any(|c| c.weight() > MAX_WEIGHT) {
                return Err(TooLarge);
            }
        }
        if ineqs.len() > cap {
            ineqs.sort_by_key(|c| c.weight());
            ineqs.truncate(cap);
            FM_TRUNCATIONS.with(|c| c.set(c.get() + 1));
        }
        if limit.is_none() && ineqs.len() > COMPACT_THRESHOLD && !todo.is_empty() {
            let Some(s) = canonicalize(eqs.into_iter().chain(ineqs).collect(), tighten) else {
                return Ok(None);
            };
            eqs = s.eqs;
            ineqs = s.ineqs;
        }
    }
    Ok(canonicalize(eqs.into_iter().chain(ineqs).collect(), tighten))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::linear::LinExpr;

    fn le(terms: &[(i64, &'static str)], k: i64) -> LinCons<&'static str> {
        let mut e = LinExpr::constant(-k);
        for &(c, v) in terms {
            e.add_term(c.into(), v);
        }
        LinCons::le_zero(&e)
    }

    #[test]
    fn detects_implicit_equalities() {
        // x ≤ y, y ≤ z, z ≤ x
        let s = canonicalize(
            vec![
                le(&[(1, "x"), (-1, "y")], 0),
                le(&[(1, "y"), (-1, "z")], 0),
                le(&[(1, "z"), (-1, "x")], 0),
            ],
            true,
        )
        .unwrap();
        assert_eq!(s.eqs.len(), 2);
        assert!(s.ineqs.is_empty());
    }

    #[test]
    fn removes_redundant() {
        let s = canonicalize(vec![le(&[(1, "x")], 3), le(&[(1, "x")], 5), le(&[(1, "x"), (1, "y")], 10), le(&[(1, "y")], 1)], true).unwrap();
        assert_eq!(s.ineqs.len(), 2);
    }

    #[test]
    fn infeasible() {
        assert!(canonicalize(vec![le(&[(1, "x")], 0), le(&[(-1, "x")], -1)], true).is_none());
    }

    #[test]
    fn transitivity_by_projection() {
        let s = canonicalize(vec![le(&[(1, "x"), (-1, "y")], 0), le(&[(1, "y"), (-1, "z")], 0)], true).unwrap();
        let p = project_out(&s, &["y"].into_iter().collect(), true).unwrap();
        assert_eq!(p.ineqs, vec![le(&[(1, "x"), (-1, "z")], 0)]);
    }
}

//! Randomized lattice and transfer-function laws, 1000 cases each. Shared
//! by the law suites and the acceptance target.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use unilab::numeric::{reduce_itv_congr, Congruence, Interval};
use unilab::poly::{ConsOp, LinCons, LinExpr, Polyhedron};
use unilab::strings::Powerset;

pub const CASES: u32 = 1000;

pub struct Law {
    pub name: &'static str,
    pub run: fn() -> Result<(), String>,
}

fn check<S: Strategy>(s: S, f: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    let mut r = TestRunner::new(Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    });
    r.run(&s, f).map_err(|e| e.to_string())
}

fn n(x: i64) -> BigInt {
    BigInt::from(x)
}

// ---------------------------------------------------------------------------
// intervals

pub fn arb_itv() -> impl Strategy<Value = Interval> {
    prop_oneof![
        1 => Just(Interval::Bottom),
        19 => (prop::option::weighted(0.85, -15i64..=15), prop::option::weighted(0.85, -15i64..=15)).prop_map(|(a, b)| {
            match (a, b) {
                (Some(a), Some(b)) => Interval::of(a.min(b), a.max(b)),
                (Some(a), None) => Interval::at_least(a),
                (None, Some(b)) => Interval::at_most(b),
                (None, None) => Interval::top(),
            }
        }),
    ]
}

const GRID: std::ops::RangeInclusive<i64> = -12..=12;

fn itv_join_meet() -> Result<(), String> {
    check((arb_itv(), arb_itv()), |(a, b)| {
        let j = a.join(&b);
        let m = a.meet(&b);
        prop_assert!(a.leq(&j) && b.leq(&j));
        prop_assert!(m.leq(&a) && m.leq(&b));
        for x in -20..=20 {
            let x = n(x);
            prop_assert_eq!(m.contains(&x), a.contains(&x) && b.contains(&x));
            if a.contains(&x) || b.contains(&x) {
                prop_assert!(j.contains(&x));
            }
        }
        Ok(())
    })
}

fn itv_order() -> Result<(), String> {
    check((arb_itv(), arb_itv()), |(a, b)| {
        prop_assert!(a.leq(&a));
        let le = a.leq(&b);
        let by_points = (-20..=20).all(|x| !a.contains(&n(x)) || b.contains(&n(x)));
        // unbounded sides are not visible in a finite window
        if le {
            prop_assert!(by_points);
        }
        prop_assert_eq!(a.join(&b) == b, le);
        Ok(())
    })
}

fn itv_arith() -> Result<(), String> {
    check((arb_itv(), arb_itv()), |(a, b)| {
        let (s, d, p, q, r) = (a.add(&b), a.sub(&b), a.mul(&b), a.div(&b), a.rem(&b));
        for x in GRID.filter(|x| a.contains(&n(*x))) {
            prop_assert!(a.neg().contains(&n(-x)));
            for y in GRID.filter(|y| b.contains(&n(*y))) {
                prop_assert!(s.contains(&n(x + y)), "{} + {}", x, y);
                prop_assert!(d.contains(&n(x - y)), "{} - {}", x, y);
                prop_assert!(p.contains(&n(x * y)), "{} * {}", x, y);
                if y != 0 {
                    prop_assert!(q.contains(&n(x / y)), "{} / {} in {}", x, y, q);
                    prop_assert!(r.contains(&n(x % y)), "{} % {} in {}", x, y, r);
                }
            }
        }
        Ok(())
    })
}

fn itv_widening() -> Result<(), String> {
    let seq = prop::collection::vec(arb_itv(), 1..12);
    let th = prop::collection::vec(-10i64..=10, 0..3);
    check((arb_itv(), seq, th), |(start, seq, th)| {
        let ths: Vec<BigInt> = th.iter().map(|t| n(*t)).collect();
        let mut x = start;
        let mut changes = 0;
        for y in seq.iter().cycle().take(60) {
            let next = x.widen(&x.join(y), &ths);
            prop_assert!(x.leq(&next) && y.leq(&next));
            if next != x {
                changes += 1;
            }
            x = next;
        }
        // each bound moves past each threshold at most once, plus the
        // first step out of bottom
        prop_assert!(changes <= 3 + 2 * (ths.len() + 1), "{} changes", changes);
        Ok(())
    })
}

// ---------------------------------------------------------------------------
// congruences

pub fn arb_congr() -> impl Strategy<Value = Congruence> {
    prop_oneof![
        1 => Just(Congruence::bottom()),
        19 => (0i64..=8, -10i64..=10).prop_map(|(a, b)| Congruence::new(a, b)),
    ]
}

fn congr_join_meet() -> Result<(), String> {
    check((arb_congr(), arb_congr()), |(a, b)| {
        let j = a.join(&b);
        let m = a.meet(&b);
        prop_assert!(a.leq(&j) && b.leq(&j));
        prop_assert!(m.leq(&a) && m.leq(&b));
        for x in -40..=40 {
            let x = n(x);
            prop_assert_eq!(m.contains(&x), a.contains(&x) && b.contains(&x), "{} in {} meet {}", x, a, b);
            if a.contains(&x) || b.contains(&x) {
                prop_assert!(j.contains(&x));
            }
        }
        Ok(())
    })
}

fn congr_arith() -> Result<(), String> {
    check((arb_congr(), arb_congr()), |(a, b)| {
        let (s, d, p, q, r) = (a.add(&b), a.sub(&b), a.mul(&b), a.div(&b), a.rem_op(&b));
        for x in GRID.filter(|x| a.contains(&n(*x))) {
            prop_assert!(a.neg().contains(&n(-x)));
            for y in GRID.filter(|y| b.contains(&n(*y))) {
                prop_assert!(s.contains(&n(x + y)));
                prop_assert!(d.contains(&n(x - y)));
                prop_assert!(p.contains(&n(x * y)));
                if y != 0 {
                    prop_assert!(q.contains(&n(x / y)), "{} / {} in {}", x, y, q);
                    prop_assert!(r.contains(&n(x % y)), "{} % {} in {}", x, y, r);
                }
            }
        }
        Ok(())
    })
}

fn congr_chains() -> Result<(), String> {
    check((arb_congr(), prop::collection::vec(arb_congr(), 1..10)), |(start, seq)| {
        let mut x = start;
        let mut changes = 0;
        for y in seq.iter().cycle().take(60) {
            let next = x.widen(&x.join(y));
            if next != x {
                changes += 1;
            }
            x = next;
        }
        // the modulus only shrinks to a proper divisor, at most log2(8) + 3 times
        prop_assert!(changes <= 6, "{} changes", changes);
        Ok(())
    })
}

fn reduction_is_sound() -> Result<(), String> {
    check((arb_itv(), arb_congr()), |(i, c)| {
        let (i2, c2) = reduce_itv_congr(&i, &c);
        prop_assert!(i2.leq(&i) && c2.leq(&c));
        for x in -20..=20 {
            let x = n(x);
            let before = i.contains(&x) && c.contains(&x);
            let after = i2.contains(&x) && c2.contains(&x);
            prop_assert_eq!(before, after, "{} in {} and {}", x, i, c);
        }
        Ok(())
    })
}

// ---------------------------------------------------------------------------
// string powersets

const K: usize = 5;

fn arb_word() -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(prop::sample::select(b"abc".to_vec()), 0..3)
}

pub fn arb_pset() -> impl Strategy<Value = Powerset> {
    prop_oneof![
        1 => Just(Powerset::Top),
        6 => prop::collection::btree_set(arb_word(), 0..4).prop_map(|s| Powerset::from_set(s, K)),
    ]
}

fn all_words() -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..4 {
        let mut next = Vec::new();
        for w in &layer {
            for c in b"abc" {
                let mut v = w.clone();
                v.push(*c);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

fn pset_join_meet() -> Result<(), String> {
    let words = all_words();
    check((arb_pset(), arb_pset()), move |(a, b)| {
        let j = a.join(&b, K);
        let m = a.meet(&b);
        prop_assert!(a.leq(&j) && b.leq(&j));
        prop_assert!(m.leq(&a) && m.leq(&b));
        if let Powerset::Finite(s) = &j {
            prop_assert!(s.len() <= K);
        }
        for w in &words {
            prop_assert_eq!(m.contains(w), a.contains(w) && b.contains(w));
            if a.contains(w) || b.contains(w) {
                prop_assert!(j.contains(w));
            }
        }
        Ok(())
    })
}

fn pset_concat_and_filters() -> Result<(), String> {
    let words = all_words();
    check((arb_pset(), arb_pset(), 0i64..=3, 0i64..=3), move |(a, b, l1, l2)| {
        let c = a.concat(&b, K);
        let len = Interval::of(l1.min(l2), l1.max(l2));
        let fl = a.filter_len(&len);
        let fc = a.filter_codes(&Interval::of(97, 98));
        for x in words.iter().filter(|w| a.contains(w)) {
            for y in words.iter().filter(|w| b.contains(w) && w.len() <= 2) {
                let mut xy = x.clone();
                xy.extend(y);
                prop_assert!(c.contains(&xy));
            }
            if len.contains(&n(x.len() as i64)) {
                prop_assert!(fl.contains(x));
            }
            if x.iter().all(|ch| *ch <= b'b') {
                prop_assert!(fc.contains(x));
            }
        }
        if let Some(l) = a.lengths() {
            for x in words.iter().filter(|w| a.contains(w)) {
                prop_assert!(l.contains(&n(x.len() as i64)));
            }
        }
        Ok(())
    })
}

fn pset_chains() -> Result<(), String> {
    check((arb_pset(), prop::collection::vec(arb_pset(), 1..10)), |(start, seq)| {
        let mut x = start;
        let mut changes = 0;
        for y in seq.iter().cycle().take(60) {
            let next = x.widen(&x.join(y, K), K);
            if next != x {
                changes += 1;
            }
            x = next;
        }
        prop_assert!(changes <= K + 1, "{} changes", changes);
        Ok(())
    })
}

// ---------------------------------------------------------------------------
// polyhedra

pub type P = Polyhedron<&'static str>;

pub const DIMS: [&str; 3] = ["x", "y", "z"];

/// Side of the enumeration box `[-BOX, BOX]ⁿ`.
pub const BOX: i64 = 8;

pub fn lin(terms: &[(i64, &'static str)], k: i64) -> LinExpr<&'static str> {
    let mut e = LinExpr::constant(k);
    for &(c, v) in terms {
        e.add_term(c.into(), v);
    }
    e
}

/// `Σ terms ≤ k`
pub fn le(terms: &[(i64, &'static str)], k: i64) -> LinCons<&'static str> {
    LinCons::le_zero(&lin(terms, -k))
}

/// `Σ terms = k`
pub fn eq(terms: &[(i64, &'static str)], k: i64) -> LinCons<&'static str> {
    LinCons::eq_zero(&lin(terms, -k))
}

pub fn poly(dims: &[&'static str], cons: Vec<LinCons<&'static str>>) -> P {
    Polyhedron::from_constraints(dims.iter().copied(), cons).unwrap()
}

pub fn points(dims: &[&'static str]) -> Vec<BTreeMap<&'static str, BigInt>> {
    let mut out = vec![BTreeMap::new()];
    for d in dims {
        let mut next = Vec::new();
        for p in &out {
            for v in -BOX..=BOX {
                let mut q = p.clone();
                q.insert(*d, BigInt::from(v));
                next.push(q);
            }
        }
        out = next;
    }
    out
}

/// Integer points of the box inside `p`.
pub fn gamma(p: &P, dims: &[&'static str]) -> BTreeSet<Vec<i64>> {
    points(dims)
        .into_iter()
        .filter(|pt| p.contains(pt))
        .map(|pt| dims.iter().map(|d| i64::try_from(&pt[d]).unwrap()).collect())
        .collect()
}

pub fn same(p: &P, q: &P) -> bool {
    p.leq(q).unwrap() && q.leq(p).unwrap()
}

fn arb_cons() -> impl Strategy<Value = LinCons<&'static str>> {
    (prop::collection::vec(-2i64..=2, 3), -6i64..=6, prop::bool::weighted(0.15)).prop_map(|(cs, k, is_eq)| {
        let terms: Vec<(i64, &'static str)> = cs.iter().zip(DIMS).map(|(&c, d)| (c, d)).collect();
        if is_eq {
            eq(&terms, k)
        } else {
            le(&terms, k)
        }
    })
}

pub fn arb_poly() -> impl Strategy<Value = P> {
    prop::collection::vec(arb_cons(), 0..4).prop_map(|cs| poly(&DIMS, cs))
}

fn arb_point() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-4i64..=4, 3)
}

fn point(v: &[i64]) -> BTreeMap<&'static str, BigInt> {
    DIMS.iter().zip(v).map(|(d, x)| (*d, BigInt::from(*x))).collect()
}

type Rat = num_rational::BigRational;

/// Solves `Σ λᵢ·pᵢ = q, Σ λᵢ = 1` for affinely independent `pts` by exact
/// Gaussian elimination; `Some(λ)` when consistent.
fn barycentric(pts: &[Vec<i64>], q: &[i64]) -> Option<Vec<Rat>> {
    let k = pts.len();
    let r = |x: i64| Rat::from_integer(BigInt::from(x));
    // rows: one per coordinate plus the affine row
    let mut m: Vec<Vec<Rat>> = (0..q.len())
        .map(|d| (0..k).map(|i| r(pts[i][d])).chain([r(q[d])]).collect())
        .collect();
    m.push((0..k).map(|_| r(1)).chain([r(1)]).collect());
    let mut row = 0;
    for col in 0..k {
        let piv = (row..m.len()).find(|&i| m[i][col] != r(0))?;
        m.swap(row, piv);
        let p = m[row][col].clone();
        for x in m[row].iter_mut() {
            *x = &*x / &p;
        }
        for i in 0..m.len() {
            if i != row && m[i][col] != r(0) {
                let f = m[i][col].clone();
                for j in 0..=k {
                    let v = &m[row][j] * &f;
                    m[i][j] = &m[i][j] - v;
                }
            }
        }
        row += 1;
    }
    if m[row..].iter().any(|rw| rw[k] != r(0)) {
        return None;
    }
    Some((0..k).map(|i| m[i][k].clone()).collect())
}

fn affinely_independent(pts: &[Vec<i64>]) -> bool {
    // rank of the difference vectors equals their count
    let q = &pts[0];
    let mut m: Vec<Vec<Rat>> = pts[1..]
        .iter()
        .map(|p| p.iter().zip(q).map(|(a, b)| Rat::from_integer(BigInt::from(a - b))).collect())
        .collect();
    let mut rank = 0;
    for col in 0..3 {
        let Some(piv) = (rank..m.len()).find(|&i| m[i][col] != Rat::from_integer(0.into())) else {
            continue;
        };
        m.swap(rank, piv);
        for i in rank + 1..m.len() {
            let f = &m[i][col] / &m[rank][col];
            for j in 0..3 {
                let v = &m[rank][j] * &f;
                m[i][j] = &m[i][j] - v;
            }
        }
        rank += 1;
    }
    rank == pts.len() - 1
}

/// Point-in-hull by Carathéodory: `q` is in the hull iff it is a convex
/// combination of some affinely independent subset of the points.
fn vertex_oracle_contains(pts: &[Vec<i64>], q: &[i64]) -> bool {
    let n = pts.len();
    (1u32..(1 << n)).any(|mask| {
        let sub: Vec<Vec<i64>> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| pts[i].clone()).collect();
        affinely_independent(&sub)
            && barycentric(&sub, q).is_some_and(|l| l.iter().all(|x| *x >= Rat::from_integer(0.into())))
    })
}

fn small(p: &BTreeMap<&'static str, BigInt>, r: i64) -> bool {
    p.values().all(|v| *v >= BigInt::from(-r) && *v <= BigInt::from(r))
}

/// Whether some rational z makes (x, y, z) satisfy `a`, decided by an LP
/// over z alone.
fn rational_preimage(a: &P, pt: &BTreeMap<&'static str, BigInt>) -> bool {
    use unilab::poly::lp::{feasible, q, Row, RowOp};
    let rows: Vec<Row> = a
        .constraints()
        .into_iter()
        .map(|c| {
            let mut rhs = c.rhs.clone();
            for (d, v) in pt {
                rhs -= c.coeff(d) * v;
            }
            Row {
                coeffs: vec![q(c.coeff(&"z"))],
                op: if c.op == ConsOp::Eq { RowOp::Eq } else { RowOp::Le },
                rhs: q(rhs),
            }
        })
        .collect();
    !a.is_bottom() && feasible(1, &rows)
}

fn poly_join_meet() -> Result<(), String> {
    check((arb_poly(), arb_poly()), |(a, b)| {
        let j = a.join(&b).unwrap();
        prop_assert!(a.leq(&j).unwrap() && b.leq(&j).unwrap());
        let m = a.meet(&b).unwrap();
        prop_assert!(m.leq(&a).unwrap() && m.leq(&b).unwrap());
        Ok(())
    })
}

fn poly_point_images() -> Result<(), String> {
    check((arb_poly(), arb_poly(), arb_point(), -2i64..=2), |(a, b, pt, c)| {
        let p = point(&pt);
        let j = a.join(&b).unwrap();
        if a.contains(&p) || b.contains(&p) {
            prop_assert!(j.contains(&p));
        }
        let w = a.widen(&j, &[]).unwrap();
        if j.contains(&p) {
            prop_assert!(w.contains(&p));
        }
        // x := x + c·y + 1
        let r = a.assign(&"x", &lin(&[(1, "x"), (c, "y")], 1)).unwrap();
        if a.contains(&p) {
            let mut img = p.clone();
            img.insert("x", &p["x"] + c * &p["y"] + 1);
            prop_assert!(r.contains(&img));
        }
        // x := c·y + z, not invertible
        let r = a.assign(&"x", &lin(&[(c, "y"), (1, "z")], 0)).unwrap();
        if a.contains(&p) {
            let mut img = p.clone();
            img.insert("x", c * &p["y"] + &p["z"]);
            prop_assert!(r.contains(&img));
        }
        Ok(())
    })
}

fn poly_projection() -> Result<(), String> {
    let cube = points(&DIMS);
    let plane: Vec<_> = points(&["x", "y"]).into_iter().filter(|p| small(p, 4)).collect();
    check(arb_poly(), move |a| {
        let r = a.project(&["x", "y"].into_iter().collect());
        for pt in &cube {
            if a.contains(pt) {
                let mut s = pt.clone();
                s.remove("z");
                prop_assert!(r.contains(&s));
            }
        }
        for pt in &plane {
            if r.contains(pt) {
                prop_assert!(rational_preimage(&a, pt), "{:?} has no preimage", pt);
            }
        }
        Ok(())
    })
}

fn poly_hull() -> Result<(), String> {
    let pts_s = prop::collection::vec(prop::collection::vec(-2i64..=2, 3), 1..=4);
    let grid: Vec<_> = points(&DIMS).into_iter().filter(|q| small(q, 2)).collect();
    check(pts_s, move |pts| {
        let mut h = P::bottom(DIMS);
        for p in &pts {
            let single = poly(&DIMS, DIMS.iter().zip(p).map(|(d, v)| eq(&[(1, d)], *v)).collect());
            h = h.join(&single).unwrap();
        }
        for q in &grid {
            let qv: Vec<i64> = DIMS.iter().map(|d| i64::try_from(&q[d]).unwrap()).collect();
            prop_assert_eq!(h.contains(q), vertex_oracle_contains(&pts, &qv), "point {:?}", qv);
        }
        Ok(())
    })
}

fn poly_fold_expand() -> Result<(), String> {
    check(arb_poly(), |a| {
        let e = a.project(&["x", "y"].into_iter().collect());
        let e2 = e.expand(&"x", "z").unwrap();
        let f = e2.fold(&["x", "z"], "x").unwrap();
        prop_assert_eq!(gamma(&f, &["x", "y"]), gamma(&e, &["x", "y"]));
        Ok(())
    })
}

fn poly_widening() -> Result<(), String> {
    check((arb_poly(), 1i64..=3), |(a, shift)| {
        // P ← P ∇ (P ⊔ step(P)) with x := x + shift, y := y + 1; an
        // equality counts as its two halves
        let n: usize = a.constraints().iter().map(|c| if c.op == ConsOp::Eq { 2 } else { 1 }).sum();
        let mut p = a.clone();
        let mut steps = 0;
        loop {
            let s = p.assign(&"x", &lin(&[(1, "x")], shift)).unwrap();
            let s = s.assign(&"y", &lin(&[(1, "y")], 1)).unwrap();
            let next = p.widen(&p.join(&s).unwrap(), &[]).unwrap();
            steps += 1;
            if next.leq(&p).unwrap() {
                break;
            }
            p = next;
            prop_assert!(steps <= n + 2, "no fixpoint after {} steps", steps);
        }
        Ok(())
    })
}

fn poly_canonical() -> Result<(), String> {
    check((arb_poly(), arb_poly()), |(a, b)| {
        for r in [a.join(&b).unwrap(), a.meet(&b).unwrap(), a.widen(&b, &[]).unwrap()] {
            if r.is_bottom() {
                continue;
            }
            let again = poly(&DIMS, r.constraints().into_iter().cloned().collect());
            prop_assert_eq!(again, r);
        }
        Ok(())
    })
}

pub const LAWS: &[Law] = &[
    Law { name: "interval join and meet", run: itv_join_meet },
    Law { name: "interval order", run: itv_order },
    Law { name: "interval arithmetic soundness", run: itv_arith },
    Law { name: "interval widening termination", run: itv_widening },
    Law { name: "congruence join and meet", run: congr_join_meet },
    Law { name: "congruence arithmetic soundness", run: congr_arith },
    Law { name: "congruence chain length", run: congr_chains },
    Law { name: "interval congruence reduction", run: reduction_is_sound },
    Law { name: "powerset join and meet", run: pset_join_meet },
    Law { name: "powerset concat and filters", run: pset_concat_and_filters },
    Law { name: "powerset widening termination", run: pset_chains },
    Law { name: "polyhedra join and meet bounds", run: poly_join_meet },
    Law { name: "polyhedra point images", run: poly_point_images },
    Law { name: "polyhedra projection vs enumeration", run: poly_projection },
    Law { name: "polyhedra hull vs vertex oracle", run: poly_hull },
    Law { name: "polyhedra fold expand identity", run: poly_fold_expand },
    Law { name: "polyhedra widening termination", run: poly_widening },
    Law { name: "polyhedra canonical results", run: poly_canonical },
];

pub fn law(name: &str) -> Result<(), String> {
    let l = LAWS.iter().find(|l| l.name == name).expect("known law");
    (l.run)()
}

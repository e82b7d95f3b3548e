//! Linear expressions and constraints with integer coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// `Σ cᵢ·xᵢ + constant`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinExpr<V: Ord> {
    pub coeffs: BTreeMap<V, BigInt>,
    pub constant: BigInt,
}

impl<V: Ord + Clone> LinExpr<V> {
    pub fn constant(c: impl Into<BigInt>) -> Self {
        LinExpr {
            coeffs: BTreeMap::new(),
            constant: c.into(),
        }
    }

    pub fn var(v: V) -> Self {
        LinExpr::term(1, v)
    }

    pub fn term(c: impl Into<BigInt>, v: V) -> Self {
        let mut e = LinExpr::constant(0);
        e.add_term(c.into(), v);
        e
    }

    pub fn add_term(&mut self, c: BigInt, v: V) {
        if c.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(v.clone()).or_insert_with(BigInt::zero);
        *slot += c;
        if slot.is_zero() {
            self.coeffs.remove(&v);
        }
    }

    pub fn coeff(&self, v: &V) -> BigInt {
        self.coeffs.get(v).cloned().unwrap_or_default()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, o: &LinExpr<V>) -> LinExpr<V> {
        let mut r = self.clone();
        for (v, c) in &o.coeffs {
            r.add_term(c.clone(), v.clone());
        }
        r.constant += &o.constant;
        r
    }

    pub fn scale(&self, k: &BigInt) -> LinExpr<V> {
        if k.is_zero() {
            return LinExpr::constant(0);
        }
        LinExpr {
            coeffs: self.coeffs.iter().map(|(v, c)| (v.clone(), c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    pub fn neg(&self) -> LinExpr<V> {
        self.scale(&BigInt::from(-1))
    }

    pub fn sub(&self, o: &LinExpr<V>) -> LinExpr<V> {
        self.add(&o.neg())
    }

    pub fn eval(&self, val: &impl Fn(&V) -> BigInt) -> BigInt {
        let mut s = self.constant.clone();
        for (v, c) in &self.coeffs {
            s += c * val(v);
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConsOp {
    Eq,
    Le,
}

/// `Σ cᵢ·xᵢ op rhs`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinCons<V: Ord> {
    pub coeffs: BTreeMap<V, BigInt>,
    pub op: ConsOp,
    pub rhs: BigInt,
}

/// Outcome of normalizing a constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Norm<V: Ord> {
    True,
    False,
    Cons(LinCons<V>),
}

impl<V: Ord + Clone> LinCons<V> {
    /// `e ≤ 0`.
    pub fn le_zero(e: &LinExpr<V>) -> Self {
        LinCons {
            coeffs: e.coeffs.clone(),
            op: ConsOp::Le,
            rhs: -&e.constant,
        }
    }

    /// `e = 0`.
    pub fn eq_zero(e: &LinExpr<V>) -> Self {
        LinCons {
            coeffs: e.coeffs.clone(),
            op: ConsOp::Eq,
            rhs: -&e.constant,
        }
    }

    /// `a ≤ b`.
    pub fn le(a: &LinExpr<V>, b: &LinExpr<V>) -> Self {
        LinCons::le_zero(&a.sub(b))
    }

    /// `a = b`.
    pub fn eq(a: &LinExpr<V>, b: &LinExpr<V>) -> Self {
        LinCons::eq_zero(&a.sub(b))
    }

    pub fn coeff(&self, v: &V) -> BigInt {
        self.coeffs.get(v).cloned().unwrap_or_default()
    }

    pub fn mentions(&self, v: &V) -> bool {
        self.coeffs.contains_key(v)
    }

    /// Left-hand side as an expression (without the right-hand side).
    pub fn lhs(&self) -> LinExpr<V> {
        LinExpr {
            coeffs: self.coeffs.clone(),
            constant: BigInt::zero(),
        }
    }

    pub fn holds(&self, val: &impl Fn(&V) -> BigInt) -> bool {
        let s = self.lhs().eval(val);
        match self.op {
            ConsOp::Eq => s == self.rhs,
            ConsOp::Le => s <= self.rhs,
        }
    }

    /// Canonical form: coprime integer coefficients, the first coefficient of
    /// an equality positive. With `tighten`, integer solutions are assumed and
    /// inequality right-hand sides are rounded down.
    pub fn normalize(mut self, tighten: bool) -> Norm<V> {
        self.coeffs.retain(|_, c| !c.is_zero());
        if self.coeffs.is_empty() {
            let ok = match self.op {
                ConsOp::Eq => self.rhs.is_zero(),
                ConsOp::Le => !self.rhs.is_negative(),
            };
            return if ok { Norm::True } else { Norm::False };
        }
        let mut g = BigInt::zero();
        for c in self.coeffs.values() {
            g = g.gcd(c);
        }
        match (self.op, tighten) {
            (ConsOp::Le, true) => {
                self.rhs = self.rhs.div_floor(&g);
            }
            (ConsOp::Eq, true) => {
                if !self.rhs.mod_floor(&g).is_zero() {
                    return Norm::False;
                }
                self.rhs /= &g;
            }
            (_, false) => {
                g = g.gcd(&self.rhs);
                self.rhs /= &g;
            }
        }
        if !g.is_one() {
            for c in self.coeffs.values_mut() {
                *c /= &g;
            }
        }
        if self.op == ConsOp::Eq {
            let first_neg = self
                .coeffs
                .values()
                .next()
                .is_some_and(|c| c.is_negative());
            if first_neg {
                for c in self.coeffs.values_mut() {
                    *c = -&*c;
                }
                self.rhs = -&self.rhs;
            }
        }
        Norm::Cons(self)
    }

    /// Eliminates `v` from `self` using the equality `eq` (which must mention `v`).
    pub fn substitute(&self, v: &V, eq: &LinCons<V>) -> LinCons<V> {
        let a = self.coeff(v);
        if a.is_zero() {
            return self.clone();
        }
        let p = eq.coeff(v);
        // |p|·self − sign(p)·a·eq keeps the direction of an inequality
        let (m_self, m_eq) = if p.is_positive() {
            (p.clone(), -a)
        } else {
            (-p.clone(), a)
        };
        let mut coeffs = BTreeMap::new();
        for (k, c) in &self.coeffs {
            coeffs.insert(k.clone(), c * &m_self);
        }
        for (k, c) in &eq.coeffs {
            let e = coeffs.entry(k.clone()).or_insert_with(BigInt::zero);
            *e += c * &m_eq;
        }
        coeffs.retain(|_, c: &mut BigInt| !c.is_zero());
        LinCons {
            coeffs,
            op: self.op,
            rhs: &self.rhs * &m_self + &eq.rhs * &m_eq,
        }
    }

    /// The two halves `lhs ≤ rhs` and `−lhs ≤ −rhs` of an equality.
    pub fn halves(&self) -> [LinCons<V>; 2] {
        let le = LinCons {
            coeffs: self.coeffs.clone(),
            op: ConsOp::Le,
            rhs: self.rhs.clone(),
        };
        let ge = LinCons {
            coeffs: self.coeffs.iter().map(|(k, c)| (k.clone(), -c)).collect(),
            op: ConsOp::Le,
            rhs: -&self.rhs,
        };
        [le, ge]
    }

    pub fn map_vars<W: Ord + Clone>(&self, f: &impl Fn(&V) -> W) -> LinCons<W> {
        let mut coeffs = BTreeMap::new();
        for (k, c) in &self.coeffs {
            let e = coeffs.entry(f(k)).or_insert_with(BigInt::zero);
            *e += c;
        }
        coeffs.retain(|_, c: &mut BigInt| !c.is_zero());
        LinCons {
            coeffs,
            op: self.op,
            rhs: self.rhs.clone(),
        }
    }

    /// Size used to decide which constraints to drop under the projection cap.
    pub fn weight(&self) -> u64 {
        self.coeffs.values().map(|c| c.bits()).sum::<u64>() + self.coeffs.len() as u64
    }
}

fn write_terms(f: &mut fmt::Formatter<'_>, terms: &[(String, BigInt)]) -> fmt::Result {
    for (i, (name, c)) in terms.iter().enumerate() {
        let abs = c.abs();
        if i == 0 {
            if c.is_negative() {
                f.write_str("-")?;
            }
        } else if c.is_negative() {
            f.write_str(" - ")?;
        } else {
            f.write_str(" + ")?;
        }
        if abs.is_one() {
            write!(f, "{name}")?;
        } else {
            write!(f, "{abs}·{name}")?;
        }
    }
    Ok(())
}

/// Report rendering: positive terms first, then negative ones, each sorted by
/// name; all-negative inequalities are flipped to `≥`; equalities are oriented
/// so the last variable name has a positive coefficient.
pub fn render_cons<V: Ord + Clone>(c: &LinCons<V>, name: impl Fn(&V) -> String) -> String {
    let mut terms: Vec<(String, BigInt)> =
        c.coeffs.iter().map(|(k, v)| (name(k), v.clone())).collect();
    terms.sort_by(|a, b| a.0.cmp(&b.0));
    let mut rhs = c.rhs.clone();
    let mut sym = match c.op {
        ConsOp::Eq => "=",
        ConsOp::Le => "≤",
    };
    let flip = match c.op {
        ConsOp::Eq => terms.last().is_some_and(|t| t.1.is_negative()),
        ConsOp::Le => terms.iter().all(|t| t.1.is_negative()),
    };
    if flip {
        for t in &mut terms {
            t.1 = -&t.1;
        }
        rhs = -rhs;
        if c.op == ConsOp::Le {
            sym = "≥";
        }
    }
    let (pos, neg): (Vec<_>, Vec<_>) = terms.into_iter().partition(|t| t.1.is_positive());
    let ordered: Vec<_> = pos.into_iter().chain(neg).collect();
    struct Terms<'a>(&'a [(String, BigInt)]);
    impl fmt::Display for Terms<'_> {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write_terms(f, self.0)
        }
    }
    format!("{} {sym} {rhs}", Terms(&ordered))
}

impl<V: Ord + Clone + fmt::Display> fmt::Display for LinCons<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_cons(self, |v| v.to_string()))
    }
}

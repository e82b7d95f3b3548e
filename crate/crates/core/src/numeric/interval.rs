use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// An interval bound: `None` on the low side is −∞, on the high side +∞.
pub type Bound = Option<BigInt>;

/// Integer interval over unbounded integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Interval {
    Bottom,
    Range { lo: Bound, hi: Bound },
}

/// Extended integer used for endpoint arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Ext {
    NegInf,
    Fin(BigInt),
    PosInf,
}

impl Ext {
    fn lo(b: &Bound) -> Ext {
        b.clone().map_or(Ext::NegInf, Ext::Fin)
    }
    fn hi(b: &Bound) -> Ext {
        b.clone().map_or(Ext::PosInf, Ext::Fin)
    }
    fn signum(&self) -> i8 {
        match self {
            Ext::NegInf => -1,
            Ext::PosInf => 1,
            Ext::Fin(n) => {
                if n.is_zero() {
                    0
                } else if n.is_positive() {
                    1
                } else {
                    -1
                }
            }
        }
    }
    fn inf(sign: i8) -> Ext {
        if sign < 0 {
            Ext::NegInf
        } else {
            Ext::PosInf
        }
    }
    fn mul(&self, o: &Ext) -> Ext {
        match (self, o) {
            (Ext::Fin(a), Ext::Fin(b)) => Ext::Fin(a * b),
            _ => {
                let s = self.signum() * o.signum();
                if s == 0 {
                    Ext::Fin(BigInt::zero())
                } else {
                    Ext::inf(s)
                }
            }
        }
    }
    /// Truncating division by a strictly positive divisor.
    fn div_pos(&self, d: &Ext) -> Ext {
        match (self, d) {
            (Ext::Fin(a), Ext::Fin(b)) => Ext::Fin(a / b),
            (Ext::Fin(_), _) => Ext::Fin(BigInt::zero()),
            (x, Ext::Fin(_)) => x.clone(),
            // ±∞ / +∞: any value of the right sign is reachable; 0 is a safe representative
            _ => Ext::Fin(BigInt::zero()),
        }
    }
    fn into_lo(self) -> Bound {
        match self {
            Ext::Fin(n) => Some(n),
            _ => None,
        }
    }
    fn into_hi(self) -> Bound {
        match self {
            Ext::Fin(n) => Some(n),
            _ => None,
        }
    }
}

fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}

impl Interval {
    pub fn top() -> Self {
        Interval::Range { lo: None, hi: None }
    }

    pub fn bottom() -> Self {
        Interval::Bottom
    }

    pub fn constant(n: impl Into<BigInt>) -> Self {
        let n = n.into();
        Interval::Range {
            lo: Some(n.clone()),
            hi: Some(n),
        }
    }

    /// Builds `[lo, hi]`, returning ⊥ when empty.
    pub fn new(lo: Bound, hi: Bound) -> Self {
        if let (Some(l), Some(h)) = (&lo, &hi) {
            if l > h {
                return Interval::Bottom;
            }
        }
        Interval::Range { lo, hi }
    }

    pub fn of(lo: i64, hi: i64) -> Self {
        Interval::new(Some(lo.into()), Some(hi.into()))
    }

    pub fn at_least(lo: impl Into<BigInt>) -> Self {
        Interval::new(Some(lo.into()), None)
    }

    pub fn at_most(hi: impl Into<BigInt>) -> Self {
        Interval::new(None, Some(hi.into()))
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, Interval::Bottom)
    }

    pub fn is_top(&self) -> bool {
        matches!(self, Interval::Range { lo: None, hi: None })
    }

    pub fn lo(&self) -> Option<&BigInt> {
        match self {
            Interval::Range { lo, .. } => lo.as_ref(),
            Interval::Bottom => None,
        }
    }

    pub fn hi(&self) -> Option<&BigInt> {
        match self {
            Interval::Range { hi, .. } => hi.as_ref(),
            Interval::Bottom => None,
        }
    }

    /// The single value of a singleton interval.
    pub fn singleton(&self) -> Option<&BigInt> {
        match self {
            Interval::Range {
                lo: Some(l),
                hi: Some(h),
            } if l == h => Some(l),
            _ => None,
        }
    }

    pub fn contains(&self, n: &BigInt) -> bool {
        match self {
            Interval::Bottom => false,
            Interval::Range { lo, hi } => {
                lo.as_ref().is_none_or(|l| l <= n) && hi.as_ref().is_none_or(|h| n <= h)
            }
        }
    }

    /// Number of elements, when finite.
    pub fn cardinality(&self) -> Option<BigInt> {
        match self {
            Interval::Bottom => Some(BigInt::zero()),
            Interval::Range {
                lo: Some(l),
                hi: Some(h),
            } => Some(h - l + 1),
            _ => None,
        }
    }

    pub fn leq(&self, other: &Interval) -> bool {
        match (self, other) {
            (Interval::Bottom, _) => true,
            (_, Interval::Bottom) => false,
            (Interval::Range { lo: l1, hi: h1 }, Interval::Range { lo: l2, hi: h2 }) => {
                Ext::lo(l2) <= Ext::lo(l1) && Ext::hi(h1) <= Ext::hi(h2)
            }
        }
    }

    pub fn join(&self, other: &Interval) -> Interval {
        match (self, other) {
            (Interval::Bottom, x) | (x, Interval::Bottom) => x.clone(),
            (Interval::Range { lo: l1, hi: h1 }, Interval::Range { lo: l2, hi: h2 }) => {
                Interval::Range {
                    lo: Ext::lo(l1).min(Ext::lo(l2)).into_lo(),
                    hi: Ext::hi(h1).max(Ext::hi(h2)).into_hi(),
                }
            }
        }
    }

    pub fn meet(&self, other: &Interval) -> Interval {
        match (self, other) {
            (Interval::Bottom, _) | (_, Interval::Bottom) => Interval::Bottom,
            (Interval::Range { lo: l1, hi: h1 }, Interval::Range { lo: l2, hi: h2 }) => {
                Interval::new(
                    Ext::lo(l1).max(Ext::lo(l2)).into_lo(),
                    Ext::hi(h1).min(Ext::hi(h2)).into_hi(),
                )
            }
        }
    }

    /// Widening: unstable bounds jump to the nearest threshold (sorted
    /// ascending), or to infinity when none applies.
    pub fn widen(&self, next: &Interval, thresholds: &[BigInt]) -> Interval {
        match (self, next) {
            (Interval::Bottom, x) => x.clone(),
            (x, Interval::Bottom) => x.clone(),
            (Interval::Range { lo: l1, hi: h1 }, Interval::Range { lo: l2, hi: h2 }) => {
                let lo = if Ext::lo(l2) < Ext::lo(l1) {
                    match l2 {
                        Some(v) => thresholds.iter().rev().find(|t| *t <= v).cloned(),
                        None => None,
                    }
                } else {
                    l1.clone()
                };
                let hi = if Ext::hi(h2) > Ext::hi(h1) {
                    match h2 {
                        Some(v) => thresholds.iter().find(|t| *t >= v).cloned(),
                        None => None,
                    }
                } else {
                    h1.clone()
                };
                Interval::Range { lo, hi }
            }
        }
    }

    /// Standard narrowing: only infinite bounds are refined.
    pub fn narrow(&self, next: &Interval) -> Interval {
        match (self, next) {
            (Interval::Bottom, _) | (_, Interval::Bottom) => Interval::Bottom,
            (Interval::Range { lo: l1, hi: h1 }, Interval::Range { lo: l2, hi: h2 }) => {
                Interval::new(
                    if l1.is_none() { l2.clone() } else { l1.clone() },
                    if h1.is_none() { h2.clone() } else { h1.clone() },
                )
            }
        }
    }

    fn map2(&self, o: &Interval, f: impl Fn(&Bound, &Bound, &Bound, &Bound) -> Interval) -> Interval {
        match (self, o) {
            (Interval::Range { lo: a, hi: b }, Interval::Range { lo: c, hi: d }) => f(a, b, c, d),
            _ => Interval::Bottom,
        }
    }

    pub fn add(&self, o: &Interval) -> Interval {
        self.map2(o, |a, b, c, d| Interval::Range {
            lo: match (a, c) {
                (Some(x), Some(y)) => Some(x + y),
                _ => None,
            },
            hi: match (b, d) {
                (Some(x), Some(y)) => Some(x + y),
                _ => None,
            },
        })
    }

    pub fn neg(&self) -> Interval {
        match self {
            Interval::Bottom => Interval::Bottom,
            Interval::Range { lo, hi } => Interval::Range {
                lo: hi.as_ref().map(|h| -h),
                hi: lo.as_ref().map(|l| -l),
            },
        }
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        self.map2(o, |a, b, c, d| {
            let (a, b, c, d) = (Ext::lo(a), Ext::hi(b), Ext::lo(c), Ext::hi(d));
            let prods = [a.mul(&c), a.mul(&d), b.mul(&c), b.mul(&d)];
            let lo = prods.iter().min().cloned().unwrap_or(Ext::NegInf);
            let hi = prods.iter().max().cloned().unwrap_or(Ext::PosInf);
            Interval::Range {
                lo: lo.into_lo(),
                hi: hi.into_hi(),
            }
        })
    }

    /// Part of the interval that is ≥ 1 and part that is ≤ −1.
    fn split_nonzero(&self) -> (Interval, Interval) {
        (
            self.meet(&Interval::at_least(1)),
            self.meet(&Interval::at_most(-1)),
        )
    }

    /// Interval without the value 0 where it lies at a bound; the exact
    /// non-zero part is `split_nonzero`.
    pub fn exclude_zero(&self) -> Interval {
        let (p, n) = self.split_nonzero();
        p.join(&n)
    }

    fn div_by_positive(&self, d: &Interval) -> Interval {
        self.map2(d, |a, b, c, dd| {
            let (a, b, c, dd) = (Ext::lo(a), Ext::hi(b), Ext::lo(c), Ext::hi(dd));
            let qs = [a.div_pos(&c), a.div_pos(&dd), b.div_pos(&c), b.div_pos(&dd)];
            let lo = qs.iter().min().cloned().unwrap_or(Ext::NegInf);
            let hi = qs.iter().max().cloned().unwrap_or(Ext::PosInf);
            Interval::Range {
                lo: lo.into_lo(),
                hi: hi.into_hi(),
            }
        })
    }

    /// Truncating division. Divisor values equal to 0 are ignored; a divisor
    /// of exactly {0} yields ⊥.
    pub fn div(&self, d: &Interval) -> Interval {
        let (pos, neg) = d.split_nonzero();
        let mut r = Interval::Bottom;
        if !pos.is_bottom() {
            r = r.join(&self.div_by_positive(&pos));
        }
        if !neg.is_bottom() {
            r = r.join(&self.div_by_positive(&neg.neg()).neg());
        }
        r
    }

    /// Truncating remainder (sign of the dividend). Divisor 0 is ignored.
    pub fn rem(&self, d: &Interval) -> Interval {
        let dnz = d.exclude_zero();
        if self.is_bottom() || dnz.is_bottom() {
            return Interval::Bottom;
        }
        if let (Some(x), Some(y)) = (self.singleton(), dnz.singleton()) {
            return Interval::constant(x % y);
        }
        // |r| ≤ max|d| − 1 and |r| ≤ |x|
        let (pos, neg) = dnz.split_nonzero();
        let max_abs = match (pos.hi(), neg.lo()) {
            (Some(p), Some(n)) => Some(p.clone().max(-n)),
            (Some(p), None) if neg.is_bottom() => Some(p.clone()),
            (None, Some(n)) if pos.is_bottom() => Some(-n),
            _ => None,
        };
        let min_abs = match (pos.lo(), neg.hi()) {
            (Some(p), Some(n)) => p.clone().min(-n),
            (Some(p), None) => p.clone(),
            (None, Some(n)) => -n,
            (None, None) => BigInt::one(),
        };
        // dividend already smaller than every divisor: x % d = x
        let small = |x: &BigInt| x.abs() < min_abs;
        if let (Some(l), Some(h)) = (self.lo(), self.hi()) {
            if small(l) && small(h) {
                return self.clone();
            }
        }
        let m: Option<BigInt> = max_abs.map(|m: BigInt| m - 1);
        let nonneg = self.lo().is_some_and(|l| !l.is_negative());
        let nonpos = self.hi().is_some_and(|h| !h.is_positive());
        let hi = if nonpos {
            Some(BigInt::zero())
        } else {
            match (&m, self.hi()) {
                (Some(m), Some(h)) => Some(m.clone().min(h.clone())),
                (Some(m), None) => Some(m.clone()),
                (None, h) => h.cloned(),
            }
        };
        let lo = if nonneg {
            Some(BigInt::zero())
        } else {
            match (&m, self.lo()) {
                (Some(m), Some(l)) => Some((-m).max(l.clone())),
                (Some(m), None) => Some(-m),
                (None, l) => l.cloned(),
            }
        };
        Interval::new(lo, hi)
    }

    /// Values `x` such that `x * c` lies in `self` (`c` ≠ 0).
    pub fn div_exact_preimage(&self, c: &BigInt) -> Interval {
        match self {
            Interval::Bottom => Interval::Bottom,
            Interval::Range { lo, hi } => {
                let (lo, hi) = if c.is_negative() {
                    (hi.as_ref().map(|h| -h), lo.as_ref().map(|l| -l))
                } else {
                    (lo.clone(), hi.clone())
                };
                let c = c.abs();
                Interval::new(
                    lo.map(|l| ceil_div(&l, &c)),
                    hi.map(|h| floor_div(&h, &c)),
                )
            }
        }
    }

    /// Compares by lower bound then upper bound; used for deterministic output only.
    pub fn cmp_bounds(&self, other: &Interval) -> Ordering {
        match (self, other) {
            (Interval::Bottom, Interval::Bottom) => Ordering::Equal,
            (Interval::Bottom, _) => Ordering::Less,
            (_, Interval::Bottom) => Ordering::Greater,
            (Interval::Range { lo: a, hi: b }, Interval::Range { lo: c, hi: d }) => Ext::lo(a)
                .cmp(&Ext::lo(c))
                .then(Ext::hi(b).cmp(&Ext::hi(d))),
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Interval::Bottom => f.write_str("⊥"),
            Interval::Range { lo, hi } => {
                match lo {
                    Some(l) => write!(f, "[{l}, ")?,
                    None => f.write_str("[-∞, ")?,
                }
                match hi {
                    Some(h) => write!(f, "{h}]"),
                    None => f.write_str("+∞]"),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn i(lo: i64, hi: i64) -> Interval {
        Interval::of(lo, hi)
    }

    #[test]
    fn join_examples() {
        assert_eq!(i(0, 1).join(&i(3, 5)), i(0, 5));
        assert_eq!(Interval::Bottom.join(&i(2, 3)), i(2, 3));
        assert_eq!(Interval::at_most(0).join(&Interval::at_least(5)), Interval::top());
    }

    #[test]
    fn widen_examples() {
        assert_eq!(i(0, 1).widen(&i(0, 2), &[]), Interval::at_least(0));
        assert_eq!(i(0, 5).widen(&i(0, 5), &[]), i(0, 5));
        assert_eq!(i(0, 1).widen(&i(0, 2), &[BigInt::from(10)]), i(0, 10));
    }

    #[test]
    fn threshold_widening_stabilizes_loop_to_ten() {
        // abstract iteration of `i = 0; while (i < 10) i = i + 1;` at the head
        let th = [BigInt::from(10)];
        let init = i(0, 0);
        let mut head = init.clone();
        for _ in 0..10 {
            let body = head.meet(&Interval::at_most(9)).add(&i(1, 1));
            let next = init.join(&body);
            if next.leq(&head) {
                break;
            }
            head = head.widen(&next, &th);
        }
        assert_eq!(head, i(0, 10));
    }

    #[test]
    fn arithmetic() {
        assert_eq!(i(1, 2).add(&i(3, 4)), i(4, 6));
        assert_eq!(i(-2, 3).mul(&i(-1, 4)), i(-8, 12));
        assert_eq!(i(7, 7).div(&i(-2, -2)), i(-3, -3));
        assert_eq!(i(-7, -7).rem(&i(2, 2)), i(-1, -1));
        assert_eq!(i(1, 1).div(&i(0, 0)), Interval::Bottom);
        assert_eq!(i(1, 1).div(&i(0, 1)), i(1, 1));
    }

    #[test]
    fn display() {
        assert_eq!(i(1, 26).to_string(), "[1, 26]");
        assert_eq!(Interval::at_least(10).to_string(), "[10, +∞]");
        assert_eq!(Interval::Bottom.to_string(), "⊥");
    }
}

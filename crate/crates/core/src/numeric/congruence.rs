use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::interval::Interval;

/// Congruence `aℤ + b`. `a = 0` is the constant `b`, `a = 1` is every integer.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Congruence {
    Bottom,
    Cong { modulus: BigInt, rem: BigInt },
}

impl Congruence {
    /// Canonical `aℤ + b` with `0 ≤ b < a` when `a > 0`.
    pub fn new(modulus: impl Into<BigInt>, rem: impl Into<BigInt>) -> Self {
        let modulus: BigInt = modulus.into().abs();
        let rem: BigInt = rem.into();
        let rem = if modulus.is_zero() {
            rem
        } else {
            rem.mod_floor(&modulus)
        };
        Congruence::Cong { modulus, rem }
    }

    pub fn top() -> Self {
        Congruence::new(1, 0)
    }

    pub fn bottom() -> Self {
        Congruence::Bottom
    }

    pub fn constant(n: impl Into<BigInt>) -> Self {
        Congruence::new(0, n)
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, Congruence::Bottom)
    }

    pub fn is_top(&self) -> bool {
        matches!(self, Congruence::Cong { modulus, .. } if modulus.is_one())
    }

    pub fn modulus(&self) -> Option<&BigInt> {
        match self {
            Congruence::Cong { modulus, .. } => Some(modulus),
            Congruence::Bottom => None,
        }
    }

    pub fn rem(&self) -> Option<&BigInt> {
        match self {
            Congruence::Cong { rem, .. } => Some(rem),
            Congruence::Bottom => None,
        }
    }

    pub fn singleton(&self) -> Option<&BigInt> {
        match self {
            Congruence::Cong { modulus, rem } if modulus.is_zero() => Some(rem),
            _ => None,
        }
    }

    pub fn contains(&self, n: &BigInt) -> bool {
        match self {
            Congruence::Bottom => false,
            Congruence::Cong { modulus, rem } => {
                if modulus.is_zero() {
                    n == rem
                } else {
                    (n - rem).mod_floor(modulus).is_zero()
                }
            }
        }
    }

    pub fn leq(&self, other: &Congruence) -> bool {
        match (self, other) {
            (Congruence::Bottom, _) => true,
            (_, Congruence::Bottom) => false,
            (Congruence::Cong { modulus: m1, rem: r1 }, Congruence::Cong { modulus: m2, .. }) => {
                let divides = if m2.is_zero() {
                    m1.is_zero()
                } else {
                    m1.mod_floor(m2).is_zero()
                };
                divides && other.contains(r1)
            }
        }
    }

    pub fn join(&self, other: &Congruence) -> Congruence {
        match (self, other) {
            (Congruence::Bottom, x) | (x, Congruence::Bottom) => x.clone(),
            (Congruence::Cong { modulus: m1, rem: r1 }, Congruence::Cong { modulus: m2, rem: r2 }) => {
                let m = m1.gcd(m2).gcd(&(r1 - r2).abs());
                Congruence::new(m, r1.clone())
            }
        }
    }

    /// Intersection by the Chinese remainder theorem.
    pub fn meet(&self, other: &Congruence) -> Congruence {
        match (self, other) {
            (Congruence::Bottom, _) | (_, Congruence::Bottom) => Congruence::Bottom,
            (Congruence::Cong { modulus: m1, rem: r1 }, Congruence::Cong { modulus: m2, rem: r2 }) => {
                if m1.is_zero() {
                    return if other.contains(r1) {
                        self.clone()
                    } else {
                        Congruence::Bottom
                    };
                }
                if m2.is_zero() {
                    return if self.contains(r2) {
                        other.clone()
                    } else {
                        Congruence::Bottom
                    };
                }
                let eg = m1.extended_gcd(m2);
                let g = eg.gcd;
                let diff = r2 - r1;
                if !diff.mod_floor(&g).is_zero() {
                    return Congruence::Bottom;
                }
                let lcm = m1 / &g * m2;
                // x = r1 + m1 * k with k ≡ (diff/g) * inv(m1/g) mod (m2/g)
                let k = (&diff / &g) * eg.x;
                let x = r1 + m1 * k;
                Congruence::new(lcm, x)
            }
        }
    }

    /// Congruences have no infinite increasing chains; join is a widening.
    pub fn widen(&self, other: &Congruence) -> Congruence {
        self.join(other)
    }

    pub fn neg(&self) -> Congruence {
        match self {
            Congruence::Bottom => Congruence::Bottom,
            Congruence::Cong { modulus, rem } => Congruence::new(modulus.clone(), -rem),
        }
    }

    pub fn add(&self, other: &Congruence) -> Congruence {
        match (self, other) {
            (Congruence::Cong { modulus: m1, rem: r1 }, Congruence::Cong { modulus: m2, rem: r2 }) => {
                Congruence::new(m1.gcd(m2), r1 + r2)
            }
            _ => Congruence::Bottom,
        }
    }

    pub fn sub(&self, other: &Congruence) -> Congruence {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Congruence) -> Congruence {
        match (self, other) {
            (Congruence::Cong { modulus: m1, rem: r1 }, Congruence::Cong { modulus: m2, rem: r2 }) => {
                let m = (m1 * m2).gcd(&(m1 * r2)).gcd(&(m2 * r1));
                Congruence::new(m, r1 * r2)
            }
            _ => Congruence::Bottom,
        }
    }

    /// Truncating division; exact only for constants or an exact constant divisor.
    pub fn div(&self, other: &Congruence) -> Congruence {
        match (self, other) {
            (Congruence::Bottom, _) | (_, Congruence::Bottom) => Congruence::Bottom,
            (Congruence::Cong { modulus: m1, rem: r1 }, _) => match other.singleton() {
                Some(c) if c.is_zero() => Congruence::Bottom,
                Some(c) => {
                    if m1.is_zero() {
                        Congruence::constant(r1 / c)
                    } else if m1.mod_floor(c).is_zero() && r1.mod_floor(c).is_zero() {
                        // every member is a multiple of c, so division is exact
                        Congruence::new(m1 / c.abs(), r1 / c)
                    } else {
                        Congruence::top()
                    }
                }
                None => Congruence::top(),
            },
        }
    }

    /// Truncating remainder.
    pub fn rem_op(&self, other: &Congruence) -> Congruence {
        match (self, other) {
            (Congruence::Bottom, _) | (_, Congruence::Bottom) => Congruence::Bottom,
            (Congruence::Cong { modulus: m1, rem: r1 }, _) => match other.singleton() {
                Some(c) if c.is_zero() => Congruence::Bottom,
                Some(c) => {
                    if m1.is_zero() {
                        Congruence::constant(r1 % c)
                    } else if m1.mod_floor(c).is_zero() && r1.mod_floor(c).is_zero() {
                        Congruence::constant(0)
                    } else {
                        Congruence::top()
                    }
                }
                None => Congruence::top(),
            },
        }
    }

    /// Values `x` such that `x * c` is in `self` (`c` ≠ 0).
    pub fn div_exact_preimage(&self, c: &BigInt) -> Congruence {
        if c.is_negative() {
            return self.neg().div_exact_preimage(&-c);
        }
        match self {
            Congruence::Bottom => Congruence::Bottom,
            Congruence::Cong { modulus, rem } => {
                // c·x ≡ rem [modulus]
                if modulus.is_zero() {
                    return if rem.mod_floor(c).is_zero() {
                        Congruence::constant(rem / c)
                    } else {
                        Congruence::Bottom
                    };
                }
                let eg = c.extended_gcd(modulus);
                let g = eg.gcd;
                if !rem.mod_floor(&g).is_zero() {
                    return Congruence::Bottom;
                }
                let m = modulus / &g;
                Congruence::new(m, (rem / &g) * eg.x)
            }
        }
    }
}

fn first_at_or_above(lo: &BigInt, m: &BigInt, r: &BigInt) -> BigInt {
    lo + (r - lo).mod_floor(m)
}

fn last_at_or_below(hi: &BigInt, m: &BigInt, r: &BigInt) -> BigInt {
    hi - (hi - r).mod_floor(m)
}

/// Reduced product of an interval and a congruence.
pub fn reduce_itv_congr(i: &Interval, c: &Congruence) -> (Interval, Congruence) {
    if i.is_bottom() || c.is_bottom() {
        return (Interval::Bottom, Congruence::Bottom);
    }
    if let Some(k) = c.singleton() {
        return if i.contains(k) {
            (Interval::constant(k.clone()), c.clone())
        } else {
            (Interval::Bottom, Congruence::Bottom)
        };
    }
    let (m, r) = match c {
        Congruence::Cong { modulus, rem } => (modulus, rem),
        Congruence::Bottom => unreachable!(),
    };
    let (lo, hi) = if m.is_one() {
        (i.lo().cloned(), i.hi().cloned())
    } else {
        (
            i.lo().map(|l| first_at_or_above(l, m, r)),
            i.hi().map(|h| last_at_or_below(h, m, r)),
        )
    };
    let ni = Interval::new(lo, hi);
    if ni.is_bottom() {
        return (Interval::Bottom, Congruence::Bottom);
    }
    match ni.singleton() {
        Some(k) => (ni.clone(), Congruence::constant(k.clone())),
        None => (ni, c.clone()),
    }
}

impl fmt::Display for Congruence {
    /// Renders `≡ b [a]`; the caller prefixes the variable name.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Congruence::Bottom => f.write_str("⊥"),
            Congruence::Cong { modulus, rem } => write!(f, "≡ {rem} [{modulus}]"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(a: i64, b: i64) -> Congruence {
        Congruence::new(a, b)
    }

    #[test]
    fn canonical() {
        assert_eq!(c(4, 9), c(4, 1));
        assert_eq!(c(-4, -1), c(4, 3));
    }

    #[test]
    fn join_examples() {
        assert_eq!(c(4, 1).join(&c(4, 3)), c(2, 1));
        assert_eq!(c(2, 0).join(&c(2, 1)), Congruence::top());
        assert_eq!(Congruence::Bottom.join(&c(3, 2)), c(3, 2));
    }

    #[test]
    fn meet_by_crt() {
        assert_eq!(c(3, 1).meet(&c(4, 2)), c(12, 10));
        assert_eq!(c(2, 0).meet(&c(4, 1)), Congruence::Bottom);
    }

    #[test]
    fn arithmetic() {
        let y = c(3, 1);
        assert_eq!(c(0, 2).mul(&y).add(&c(0, 1)), c(6, 3));
        assert_eq!(c(0, 5).add(&c(0, 5)), Congruence::constant(10));
    }

    #[test]
    fn reduction() {
        assert_eq!(
            reduce_itv_congr(&Interval::of(2, 4), &c(4, 0)),
            (Interval::of(4, 4), Congruence::constant(4))
        );
        assert_eq!(
            reduce_itv_congr(&Interval::of(3, 5), &c(7, 0)),
            (Interval::Bottom, Congruence::Bottom)
        );
        assert_eq!(
            reduce_itv_congr(&Interval::of(0, 100), &Congruence::top()),
            (Interval::of(0, 100), Congruence::top())
        );
    }
}

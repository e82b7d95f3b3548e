//! Numeric expressions and conditions shared by the numeric backends.

use std::fmt;

use num_bigint::BigInt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NumExpr<V> {
    Const(BigInt),
    Var(V),
    Neg(Box<NumExpr<V>>),
    Bin(ArithOp, Box<NumExpr<V>>, Box<NumExpr<V>>),
    /// Any integer between the two bounds, inclusive.
    Rand(Box<NumExpr<V>>, Box<NumExpr<V>>),
}

impl<V> NumExpr<V> {
    pub fn cst(n: impl Into<BigInt>) -> Self {
        NumExpr::Const(n.into())
    }

    pub fn var(v: V) -> Self {
        NumExpr::Var(v)
    }

    pub fn bin(op: ArithOp, a: NumExpr<V>, b: NumExpr<V>) -> Self {
        NumExpr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn add(a: NumExpr<V>, b: NumExpr<V>) -> Self {
        NumExpr::bin(ArithOp::Add, a, b)
    }

    pub fn sub(a: NumExpr<V>, b: NumExpr<V>) -> Self {
        NumExpr::bin(ArithOp::Sub, a, b)
    }

    pub fn mul(a: NumExpr<V>, b: NumExpr<V>) -> Self {
        NumExpr::bin(ArithOp::Mul, a, b)
    }

    pub fn rand(lo: NumExpr<V>, hi: NumExpr<V>) -> Self {
        NumExpr::Rand(Box::new(lo), Box::new(hi))
    }

    /// Calls `f` on every variable occurrence.
    pub fn for_each_var(&self, f: &mut impl FnMut(&V)) {
        match self {
            NumExpr::Const(_) => {}
            NumExpr::Var(v) => f(v),
            NumExpr::Neg(a) => a.for_each_var(f),
            NumExpr::Bin(_, a, b) | NumExpr::Rand(a, b) => {
                a.for_each_var(f);
                b.for_each_var(f);
            }
        }
    }

    pub fn map_vars<W>(&self, f: &impl Fn(&V) -> W) -> NumExpr<W> {
        match self {
            NumExpr::Const(c) => NumExpr::Const(c.clone()),
            NumExpr::Var(v) => NumExpr::Var(f(v)),
            NumExpr::Neg(a) => NumExpr::Neg(Box::new(a.map_vars(f))),
            NumExpr::Bin(op, a, b) => NumExpr::bin(*op, a.map_vars(f), b.map_vars(f)),
            NumExpr::Rand(a, b) => NumExpr::rand(a.map_vars(f), b.map_vars(f)),
        }
    }

    /// Concrete evaluation with truncating division. `None` on division by
    /// zero; `rand` is not allowed here.
    pub fn eval_concrete(&self, val: &impl Fn(&V) -> BigInt) -> Option<BigInt> {
        Some(match self {
            NumExpr::Const(c) => c.clone(),
            NumExpr::Var(v) => val(v),
            NumExpr::Neg(a) => -a.eval_concrete(val)?,
            NumExpr::Bin(op, a, b) => {
                let (x, y) = (a.eval_concrete(val)?, b.eval_concrete(val)?);
                match op {
                    ArithOp::Add => x + y,
                    ArithOp::Sub => x - y,
                    ArithOp::Mul => x * y,
                    ArithOp::Div if y == BigInt::from(0) => return None,
                    ArithOp::Mod if y == BigInt::from(0) => return None,
                    ArithOp::Div => x / y,
                    ArithOp::Mod => x % y,
                }
            }
            NumExpr::Rand(..) => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
        }
    }

    pub fn holds(self, a: &BigInt, b: &BigInt) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NumCond<V> {
    Const(bool),
    Cmp(CmpOp, NumExpr<V>, NumExpr<V>),
    And(Box<NumCond<V>>, Box<NumCond<V>>),
    Or(Box<NumCond<V>>, Box<NumCond<V>>),
    Not(Box<NumCond<V>>),
}

impl<V: Clone> NumCond<V> {
    pub fn cmp(op: CmpOp, a: NumExpr<V>, b: NumExpr<V>) -> Self {
        NumCond::Cmp(op, a, b)
    }

    pub fn and(a: NumCond<V>, b: NumCond<V>) -> Self {
        NumCond::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: NumCond<V>, b: NumCond<V>) -> Self {
        NumCond::Or(Box::new(a), Box::new(b))
    }

    /// Negation pushed down to the comparisons.
    pub fn negate(&self) -> NumCond<V> {
        match self {
            NumCond::Const(b) => NumCond::Const(!b),
            NumCond::Cmp(op, a, b) => NumCond::Cmp(op.negate(), a.clone(), b.clone()),
            NumCond::And(a, b) => NumCond::or(a.negate(), b.negate()),
            NumCond::Or(a, b) => NumCond::and(a.negate(), b.negate()),
            NumCond::Not(a) => (**a).clone(),
        }
    }

    pub fn eval_concrete(&self, val: &impl Fn(&V) -> BigInt) -> Option<bool> {
        Some(match self {
            NumCond::Const(b) => *b,
            NumCond::Cmp(op, a, b) => op.holds(&a.eval_concrete(val)?, &b.eval_concrete(val)?),
            NumCond::And(a, b) => a.eval_concrete(val)? && b.eval_concrete(val)?,
            NumCond::Or(a, b) => a.eval_concrete(val)? || b.eval_concrete(val)?,
            NumCond::Not(a) => !a.eval_concrete(val)?,
        })
    }
}

impl<V: fmt::Display> fmt::Display for NumExpr<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumExpr::Const(c) => write!(f, "{c}"),
            NumExpr::Var(v) => write!(f, "{v}"),
            NumExpr::Neg(a) => write!(f, "-({a})"),
            NumExpr::Bin(op, a, b) => {
                let s = match op {
                    ArithOp::Add => "+",
                    ArithOp::Sub => "-",
                    ArithOp::Mul => "*",
                    ArithOp::Div => "/",
                    ArithOp::Mod => "%",
                };
                write!(f, "({a} {s} {b})")
            }
            NumExpr::Rand(a, b) => write!(f, "rand({a}, {b})"),
        }
    }
}

//! Non-relational numeric abstractions over unbounded integers.

mod congruence;
pub mod expr;
mod interval;
mod nonrel;

pub use congruence::{reduce_itv_congr, Congruence};
pub use expr::{ArithOp, CmpOp, NumCond, NumExpr};
pub use interval::{Bound, Interval};
pub use nonrel::{NonRelConfig, NonRelEnv, Value};

//! Convex polyhedra in constraint form over exact rationals.
//!
//! Constraints use integer coefficients and all dimensions are assumed to
//! range over the integers, so inequalities are tightened to integral
//! right-hand sides. Convex hull uses the lifting encoding
//! `x = y₁ + y₂, y₁ ∈ λP, y₂ ∈ (1−λ)Q` followed by Fourier–Motzkin
//! elimination; entailment and redundancy use an exact simplex.

mod linear;
pub mod lp;
mod polyhedron;
mod system;

pub use linear::{render_cons, ConsOp, LinCons, LinExpr, Norm};
pub use polyhedron::{PolyError, Polyhedron};
pub use system::{fm_cap, fm_truncations, set_fm_cap, DEFAULT_FM_CAP};

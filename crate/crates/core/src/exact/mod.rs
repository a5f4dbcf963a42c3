//! Exact rational arithmetic, dense linear algebra and a certificate-producing
//! simplex solver.

mod linalg;
mod lp;
mod rational;

pub use linalg::{in_span, rank, span_basis, RationalMatrix, RationalVector};
pub use lp::{solve_lp, Constraint, LinearProgram, LpError, LpOutcome, RowKind, VarBound};
pub use rational::{ParseRationalError, Rational};

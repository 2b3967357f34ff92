//! Construction, bounding, and classification of positive radial solutions
//! for coupled quasilinear φ-Laplacian systems
//!
//! ```text
//! div(φ1(|∇u|)∇u) + σ1(|x|) φ1(|∇u|)|∇u| = p1(|x|) f1(u, v)
//! div(φ2(|∇v|)∇v) + σ2(|x|) φ2(|∇v|)|∇v| = p2(|x|) f2(u, v)
//! ```
//!
//! on ℝ^N with central values u(0) = a1, v(0) = a2. Radial solutions are
//! built by monotone successive approximation of the equivalent integral
//! equations; scalar criteria functionals decide from the data alone
//! whether the solution pair stays bounded or blows up at infinity, and a
//! classifier maps their limit behaviour onto a solution-type prediction
//! with verifiable per-node envelope bounds.

// negated comparisons like `!(t > 0.0)` are NaN-rejecting domain guards
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod cli;
pub mod config;
pub mod expr;
pub mod functionals;
pub mod models;
pub mod output;
pub mod problem;
pub mod quadrature;
pub mod solver;

pub use classify::{classify, Behavior, ClassificationReport, Rule, VerdictSet};
pub use expr::Expr;
pub use functionals::{
    ArgTable, FunctionalEngine, FunctionalId, FunctionalTable, LimitOutcome, LimitVerdict,
};
pub use models::{PhiFamily, PhiModel, ThetaMode};
pub use problem::{validate, Equation, Nonlinearity, Numerics, ProblemSpec, PunderVariant};
pub use quadrature::{cumulative_integral, CumulativeTable, RadialGrid, XiTable};
pub use solver::{
    iterate_once, residual, solve, verify_bounds, BoundReport, SolutionPair, SolveOutcome,
    SolveStatus,
};

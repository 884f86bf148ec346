//! Upwind finite differences with a boundary-fitted Shishkin strip for
//! `-eps lap u + a u_x + b u = f` on smooth planar domains, `u = 0` on the
//! boundary.
//!
//! Phase one solves on a uniform grid over an enclosing rectangle. Phase two
//! re-solves in a strip of width `R` along each outflow arc, in `(r, t)`
//! coordinates with a layer-adapted mesh in `r`, taking interface data from
//! the phase-one solution. [`harness`] estimates parameter-uniform orders by
//! the double-mesh principle.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod geometry;
pub mod grids;
pub mod harness;
pub mod linsolve;
pub mod operators;
pub mod par;
pub mod pipeline;
pub mod problems;

pub use config::SolverConfig;
pub use error::{Error, Result};
pub use geometry::{CurvilinearPoint, Orientation, ParamInterval, ParametricBoundary};
pub use harness::{order_table, ConvergenceTable};
pub use par::Exec;
pub use pipeline::{solve_case, solve_problem, GlobalApproximation, Layout};
pub use problems::{test_problem, TestCase};

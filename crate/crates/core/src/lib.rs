//! Global conservative solutions of the variational wave equation
//! `u_tt - c(u) (c(u) u_x)_x = 0`, computed in characteristic coordinates.

// `!(a > b)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod charsolver;
pub mod data;
pub mod diagnostics;
pub mod error;
pub mod exec;
pub mod oracle;
mod quad;
pub mod reconstruct;
pub mod scenario;
pub mod solution;
pub mod wavespeed;

pub use boundary::{build_boundary, check_f_identity, BoundaryCurve, GammaPoint};
pub use charsolver::{
    advance_node, compatibility_residual, conservation_residual, rhs, solve_domain, CharGrid, Rect, SolverConfig, State,
};
pub use data::{initial_rs, total_energy, InitialData};
pub use error::{Error, Result};
pub use exec::Execution;
pub use scenario::{parse_config, Scenario};
pub use solution::{solve, Solution};
pub use wavespeed::{compute_bounds, SpeedEval, SpeedModel, WaveSpeed};

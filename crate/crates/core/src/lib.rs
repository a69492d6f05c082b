//! Finite-volume solvers for the rotating Stokes equations in a periodic
//! channel with small viscosity, with and without boundary-layer enrichment.

// `!(x > 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cfvm;
pub mod cli;
pub mod correctors;
pub mod error;
pub mod grid;
pub mod linsolve;
pub mod mms;
pub mod nfvm;
pub mod operators;
pub mod quadrature;
pub mod report;

pub use cfvm::{RunResult, RunStatus, Scheme, SchemeState, SimConfig};
pub use error::{LayerError, Result};
pub use grid::{build_grid, CellField, FaceFluxes, GridSpec, VectorField};
pub use mms::ExactSolution;

//! Optimal periodic dividends with fixed transaction costs for spectrally
//! negative Lévy processes with mixed-exponential jumps.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod expsum;
pub mod levy_model;
pub mod mc;
pub mod quad;
pub mod roots;
pub mod scale;
pub mod solver;
pub mod value;

pub use error::{Error, Result};
pub use expsum::{ExpSum, Term};
pub use levy_model::{JumpPhase, LevyModel, ModelMoments};
pub use scale::{build_scale_set, ScaleSet, ScaleSets};
pub use solver::{solve_optimal, verify_hjb, BarrierSolution, HjbReport};
pub use value::{value_barrier_no_cost, value_bubl, BarrierPair, PiecewiseValue};
pub use mc::{simulate_exit, simulate_value, Monitor, SimConfig, SimEstimate, Strategy};

//! Inertial Landau-Lifshitz-Gilbert macrospin dynamics, multiple-time-scale
//! approximations and a planner for field-driven magnetization switching.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod csv;
pub mod error;
pub mod experiments;
pub mod frames;
pub mod integrator;
pub mod model;
pub mod mts;
pub mod planner;
pub mod validation;

pub use error::{Error, Result};

//! Topology optimization of two-material porous layouts for Darcy-type flow.
//!
//! The crate covers the drag laws (Darcy, Barus, linearized Barus,
//! Darcy-Forchheimer), closed-form reference solutions, a finite-volume primal
//! solver, the mechanical power functional, an adjoint-based design loop and a
//! verification harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod benchmarks;
pub mod config;
pub mod domain;
pub mod error;
pub mod io;
pub mod linalg;
pub mod models;
pub mod power;
pub mod primal;
pub mod topopt;
pub mod verify;

pub use domain::*;
pub use error::{Error, Result};

//! Finsler metrizability of symmetric affine connections with vectorial
//! nonmetricity.
//!
//! The crate builds the connection Γ = Γ̊ + D from a metric a, a one-form b and
//! three constants (c1, c2, c3), decides whether Γ is the canonical connection
//! of an (α,β) or generalized (α,β) Berwald metric, constructs that metric, and
//! checks the result with horizontal-derivative residuals and trajectories.

// Index loops mirror the tensor notation; `!(x < tol)` keeps NaN on the failing side.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod app;
pub mod autodiff;
pub mod catalog;
pub mod config;
pub mod connection;
pub mod error;
pub mod finsler;
pub mod geometry;
pub mod linalg;
pub mod metrizability;
pub mod profile;
pub mod report;
pub mod sampling;
pub mod verification;

pub use error::{Error, Result};

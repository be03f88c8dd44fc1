//! Quantum Fisher information and geometric Rényi divergences for states and channels.
//!
//! The crate computes SLD and RLD Fisher information of parameterized quantum
//! states and channels, the geometric (maximal) Rényi divergences and their
//! channel versions, and the estimation and discrimination bounds built on top
//! of them. Semidefinite programs are solved by an embedded primal-dual
//! interior-point method, so no external solver is needed.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod channels;
pub mod cli;
pub mod divergences;
pub mod error;
pub mod ext;
pub mod fisher;
pub mod linalg;
pub mod optim;
pub mod random;
pub mod sdp;
pub mod selftest;
pub mod tolerance;

pub use error::{Error, Result};
pub use ext::ExtReal;
pub use linalg::{HermOp, C64};

//! Exact solutions of time-fractional reaction-diffusion equations with
//! constant time delay, built with the invariant subspace method, together
//! with the numerical machinery used to check them.
//!
//! The crate is organised bottom-up:
//!
//! - [`special`]: Gamma, Pochhammer and the three-parameter Mittag-Leffler
//!   (Prabhakar) function.
//! - [`caputo`]: L1 discretisation of the Caputo derivative.
//! - [`history`]: initial-history functions on `[-tau*, 0]`.
//! - [`delay_series`]: the floor-truncated delayed Mittag-Leffler series that
//!   give each solution coefficient `A(t)` in closed form.
//! - [`subspace`]: basis functions, the reaction-diffusion operators, the
//!   numerical invariance check and the catalog of invariant subspaces.
//! - [`oracle`]: fractional Adams-Bashforth-Moulton and method-of-steps
//!   solvers for delay ODE systems, used as independent references.
//! - [`pde_verify`]: assembled solutions `u(x,t)` and Caputo-residual checks.
//! - [`cli`]: configuration-driven command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod caputo;
pub mod cli;
mod compensated;
pub mod delay_series;
pub mod error;
pub mod history;
pub mod oracle;
pub mod pde_verify;
mod quadrature;
pub mod special;
pub mod subspace;

pub use error::{Error, Result};

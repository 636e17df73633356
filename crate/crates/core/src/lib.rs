//! Numerical laboratory for radial solutions of `-Δu = λ f(u)` on the unit
//! ball with nonlinearities that blow up at `u = 1`, such as the MEMS model
//! `f(u) = (1 - u)^(-2)`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod cli;
pub mod closed_forms;
pub mod error;
pub mod gelfand;
pub mod integrator;
pub mod io;
pub mod nonlinearity;
pub mod quadrature;
pub mod radial;
pub mod stability;
pub mod theorems;

pub use error::{Error, Result};
pub use nonlinearity::{Nonlinearity, NonlinearitySpec};

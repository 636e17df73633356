//! Independent reference solvers shared by the integration tests.

#![allow(dead_code)]

pub mod rk4;

//! Validated continuation of Kuramoto–Sivashinsky periodic orbits through a
//! Hopf bifurcation, using interval arithmetic and radii polynomials.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod coef;
pub mod config;
pub mod continuation;
pub mod interval;
pub mod operators;
pub mod par;
pub mod sequence;
pub mod system;
pub mod tail;
pub mod validator;

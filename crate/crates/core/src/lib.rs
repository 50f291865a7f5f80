//! Driven oscillator with a purely imaginary linear potential: exact
//! solutions via a coordinate transformation, a Crank–Nicolson reference
//! solver and energy/reality diagnostics.

// NaN must fail these checks, so `!(x > 0.0)` is kept over `x <= 0.0`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod auxiliary;
pub mod error;
pub mod io;
pub mod numeric;
pub mod observables;
pub mod ode;
pub mod parameters;
pub mod quadrature;
pub mod spline;

pub use error::{Error, Result};

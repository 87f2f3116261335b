//! Loewner-Kufarev subordination chains on truncated power series.
//!
//! The crate evolves univalent maps `f(ζ, t) = e^t ζ + a_2(t) ζ^2 + ...`
//! under the Loewner-Kufarev equation, evaluates the Dirichlet energy and
//! the logarithmic action of the chain, checks the time-derivative formula
//! for the action against finite differences, and implements the Virasoro
//! side: Kirillov variations, Neretin polynomials, the Gelfand-Fuks cocycle
//! and the Ψ-form pairing.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod action;
pub mod cli;
pub mod config;
pub mod driving;
pub mod error;
pub mod evolution;
pub mod io;
pub mod quadrature;
pub mod series;
pub mod svg;
pub mod virasoro;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use series::{TruncatedSeries, UnivalentCoefficients};

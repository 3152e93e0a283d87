//! Categorical macroeconometric modeling for a two-currency (peso/dollar) economy.
//!
//! Economic variables live in a date-indexed [`panel::Panel`]. Transformations
//! between them are data-level morphisms ([`category`]) that compose, evaluate
//! against a panel, and can be checked for commutativity. On top of that sit the
//! closed-form structural equations ([`structural`]), a from-scratch
//! multivariate time-series toolkit ([`econometrics`]), functor-framed
//! sensitivity scenarios ([`scenarios`]), the penalty-minimizing equilibrium
//! exchange rate ([`equilibrium`]) and the aggregate devaluation-expectation
//! index ([`colimit`]).

pub mod category;
pub mod colimit;
pub mod econometrics;
pub mod equilibrium;
mod error;
pub mod linalg;
pub mod panel;
pub mod scenarios;
pub mod structural;
pub mod synth;

pub use error::{Error, Result};
pub use panel::{Panel, Series, VariableId};

/// Version of this library, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

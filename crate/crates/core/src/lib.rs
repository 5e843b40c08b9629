//! Rigorous verification tools for MAX BISECTION rounding blueprints.

pub mod asymptotic;
pub mod blueprint;
pub mod certifier;
pub mod cli;
pub mod error;
pub mod mixture;
pub mod point;
pub mod rigor;

pub use error::{Error, Result};

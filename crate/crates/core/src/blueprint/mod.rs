//! Configurations, blueprints, threshold functions and the completeness and
//! soundness functionals.

pub mod dstar;
pub mod expr;
pub mod format;
pub mod model;
pub mod perturb;

pub use dstar::{builtin_dstar, dstar_spec, DSTAR_TEXT};
pub use expr::{Affine, Expr};
pub use model::{pair_value, threshold_mass, Blueprint, BlueprintSpec, ConfigEntry, ConfigSpec, Configuration, Slack, ThresholdFunction};
pub use perturb::{perturb_mu, perturb_pairwise};

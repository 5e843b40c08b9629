//! The five-bias blueprint 𝒟* whose soundness is certified by
//! [`crate::certifier`].

use super::format;
use super::model::{Blueprint, BlueprintSpec};
use crate::rigor::{Constants, RigorConfig};

/// μ is written as the exact two-point balance on {b₁, b₄}; its decimal
/// expansion is 0.325898600648… / 0.674101399351….
pub const DSTAR_TEXT: &str = "\
blueprint dstar
[biases]
b1 = -2*b - nu2
b2 = -b - nu1
b3 = nu1
b4 = b - nu1
b5 = 2*b + nu1
[mu]
b1 = b4/(b4 - b1)
b4 = -b1/(b4 - b1)
[configs]
b2 b4 | bgw | 0.351359472465
b3 b4 | bgw | 0.273707303709
b2 b3 | bgw | 0.271584315668
b2 b5 | bgw | 0.064406822738
b1 b5 | bgw | 0.03894208542
";

pub fn dstar_spec() -> BlueprintSpec {
    format::parse(DSTAR_TEXT).expect("built-in blueprint parses")
}

pub fn builtin_dstar(cfg: &RigorConfig) -> Blueprint {
    Blueprint::from_spec(dstar_spec(), cfg).expect("built-in blueprint is valid")
}

pub fn builtin_dstar_with(cfg: &RigorConfig, constants: Constants) -> Blueprint {
    Blueprint::with_constants(dstar_spec(), cfg, constants).expect("built-in blueprint is valid")
}

//! Certified upper bound on the balanced soundness of 𝒟*.

pub mod certify;
pub mod contour;
pub mod reduction;

pub use certify::{certify, certify_with, replay, replay_sampled, below, Certificate, CertifyOptions, EpsRule, Progress, Region, Replay, Status, Witness};
pub use contour::{contour, Contour};
pub use reduction::{
    dpartial_t3, dpartial_t5, reduced_soundness, root_find, t4_from_balance, PointReduction, Reduction,
};

//! Gaussian mixture graphs and their ε-net discretization at desk scale.

pub mod instance;
pub mod sample;
pub mod sphere;

pub use instance::{
    audit, best_balanced_cut_small, build_instance, uncorrelatedness, Audit, Edge, InstanceHeader, MixtureInstance, Vertex,
    EXHAUSTIVE_LIMIT,
};
pub use sample::{eps_bad_fraction, estimate_mixture_completeness, estimate_mixture_soundness, sample_pair, CorrelatedSampler, Estimate};
pub use sphere::{partition_sphere, Cell, Shape, SpherePartition};

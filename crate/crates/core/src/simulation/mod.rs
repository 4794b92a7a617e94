//! Heavy-tailed samplers with closed-form ground truth, and strong-contamination
//! adversaries. Everything is reproducible from explicit seeds.

mod adversary;
mod distribution;
pub mod seed;

pub use adversary::{
    contaminate, corrupted_count, AdversarySpec, Contaminated, ContaminationContext, ShiftSource, Strategy,
};
pub use distribution::{true_cf_gaussian, DistributionSpec, Family, GroundTruth, Scale};
pub use seed::child_seed;

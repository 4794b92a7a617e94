//! Robust mean estimation from the empirical characteristic function.
//!
//! The crate is organized around one estimator and the tooling needed to study it:
//!
//! - [`ecf`]: the estimator itself, its inner supremum and radius formulas;
//! - [`refinement`]: recursive re-centering and the ε-free sublevel search;
//! - [`baselines`]: empirical mean, Catoni, median-of-means, geometric median(-of-means), trimmed mean;
//! - [`simulation`]: heavy-tailed samplers with known ground truth and contamination adversaries;
//! - [`theory`]: numerical encodings of the inequalities and bounds the estimator relies on.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the common double-precision case.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod ecf;
pub mod error;
pub mod norm;
pub mod refinement;
pub mod samples;
pub mod scalar;
pub mod simulation;
pub mod theory;

pub use ecf::{
    choose_radius, choose_radius_contaminated, ecf, estimate_mean, inner_sup, objective, Complex,
    DualVector, EstimateOutcome, InnerSolverConfig, InnerSup, OuterInit, OuterSolverConfig,
};
pub use error::{Error, Result};
pub use norm::{Norm, NormPair};
pub use samples::SampleSet;
pub use refinement::{RefinementSchedule, SublevelProbe};
pub use scalar::Scalar;
pub use simulation::{AdversarySpec, DistributionSpec, GroundTruth};
pub use theory::BoundInputs;

pub type SampleSet64 = SampleSet<f64>;
pub type SampleSet32 = SampleSet<f32>;
pub type EstimateOutcome64 = EstimateOutcome<f64>;
pub type InnerSolverConfig64 = InnerSolverConfig<f64>;
pub type OuterSolverConfig64 = OuterSolverConfig<f64>;
pub type RefinementSchedule64 = RefinementSchedule<f64>;
pub type SublevelProbe64 = SublevelProbe<f64>;
pub type BoundInputs64 = BoundInputs<f64>;

//! Experiments. Each one returns an [`ExperimentReport`](crate::ExperimentReport)
//! carrying its verdict, the numbers behind it and the inputs needed to replay it.

mod correlation;
mod lemma;
mod sequence;
mod slice;

pub use correlation::{
    bobkov_nazarov_experiment, bobkov_nazarov_experiment_with_source, increasing_covariance_test,
    negative_correlation_test, taylor_coefficient_check, MonotoneFn,
};
pub use lemma::{affine_profile_closed_form, lemma1_gap, ConcaveProfile, GapEstimate, ProfileKind};
pub use sequence::{
    geometric_sequence_check, log_concavity_report, projection_volume_sequence, ratio_limit_scan,
    ProjectionVolumeSequence,
};
pub use slice::slice_profile_properties;

use crate::sampler::BatchPlan;

/// Default significance multiplier for statistical verdicts.
pub const DEFAULT_Z: f64 = 3.0;

/// Fewest joint hits for which a correlation verdict is not `Inconclusive`.
pub const MIN_JOINT_HITS: u64 = 25;

/// Knobs shared by the statistical experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabOptions {
    pub z: f64,
    pub bootstrap_resamples: usize,
    pub plan: BatchPlan,
}

impl Default for LabOptions {
    fn default() -> Self {
        LabOptions {
            z: DEFAULT_Z,
            bootstrap_resamples: 1000,
            plan: BatchPlan::default(),
        }
    }
}

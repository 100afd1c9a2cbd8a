//! Evaluation metrics against a ground-truth instance.

use crate::float::Real;
use crate::geom::{rotation_distance, RigidTransform};

use super::Instance;

/// One row of the evaluation report.
#[derive(Debug, Clone)]
pub struct MetricsReport<S> {
    pub consensus_size: usize,
    /// RMS distance between transformed consensus points and their true
    /// locations; absent when the consensus is empty.
    pub rmse: Option<S>,
    /// Geodesic rotation error versus the ground truth, in degrees.
    pub angular_error_deg: S,
    /// ‖t̃ − t₀‖ in scene units.
    pub translation_error: S,
    /// |surviving ∩ planted| / |surviving|; 1 when nothing survives.
    pub precision: S,
    /// |surviving ∩ planted| / |planted|; 1 when nothing was planted.
    pub recall: S,
    pub runtime_seconds: f64,
    pub surviving_size: usize,
}

/// Score an estimate against the instance's ground truth.
///
/// `consensus` is the index set the method claims for its transform;
/// `surviving` is the reduced set H′ (the full index set for methods that
/// do not remove anything).
pub fn evaluate<S: Real>(
    estimate: &RigidTransform<S>,
    consensus: &[usize],
    surviving: &[usize],
    instance: &Instance<S>,
    runtime_seconds: f64,
) -> MetricsReport<S> {
    let truth = &instance.ground_truth;

    let rmse = if consensus.is_empty() {
        None
    } else {
        let mut sum = S::zero();
        for &i in consensus {
            let c = &instance.correspondences[i];
            let err = (estimate.apply(&c.x) - truth.apply(&c.x)).norm();
            sum += err * err;
        }
        Some((sum / S::from_usize(consensus.len()).unwrap()).sqrt())
    };

    let angular_error_deg =
        rotation_distance(&estimate.rotation, &truth.rotation) * S::c(180.0) / S::PI();
    let translation_error = (estimate.translation - truth.translation).norm();

    let planted = &instance.planted_inliers;
    let hits = surviving.iter().filter(|i| planted.contains(i)).count();
    let precision = if surviving.is_empty() {
        S::one()
    } else {
        S::from_usize(hits).unwrap() / S::from_usize(surviving.len()).unwrap()
    };
    let recall = if planted.is_empty() {
        S::one()
    } else {
        S::from_usize(hits).unwrap() / S::from_usize(planted.len()).unwrap()
    };

    MetricsReport {
        consensus_size: consensus.len(),
        rmse,
        angular_error_deg,
        translation_error,
        precision,
        recall,
        runtime_seconds,
        surviving_size: surviving.len(),
    }
}

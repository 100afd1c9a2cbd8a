//! Guaranteed outlier removal for 6-DoF rigid registration.
//!
//! Forcing correspondence k to align and shifting both clouds so the pair
//! (x_k, y_k) sits at the origin turns the rigid subproblem into a
//! rotation-only one at doubled threshold; its optimum q_k upper-bounds the
//! rigid subproblem value p_k. The bound is evaluated in two steps: first
//! the rotational GORE pass (cheap, gives |H′_k| + 1 ≥ q_k), then —
//! optionally — an exact branch-and-bound on the survivors.

use std::collections::BTreeSet;
use std::time::Duration;

use rayon::prelude::*;

use crate::bnb::bnb_rotation_consensus;
use crate::float::Real;
use crate::geom::{RigidTransform, Rotation, Vec3};
use crate::rot_gore::{
    angular_threshold, consensus_angular, gore_rotation, AngularCorrespondence,
};

/// A point correspondence (x_i, y_i) in scene units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correspondence<S> {
    pub x: Vec3<S>,
    pub y: Vec3<S>,
    pub index: usize,
}

pub type CorrespondenceSet<S> = Vec<Correspondence<S>>;

#[derive(Debug, Clone)]
pub struct RigidGoreConfig<S> {
    /// Inlier threshold ξ (scene units, > 0).
    pub xi: S,
    /// Run the exact BnB tightening step on each surviving subproblem.
    pub use_bnb: bool,
    /// Per-subproblem BnB budget in seconds; `None` means unlimited. On
    /// exhaustion the step-1 bound is used instead (valid but looser).
    pub bnb_time_budget: Option<f64>,
    /// Evaluate the per-k bounds concurrently. The result is still sound
    /// but may keep more correspondences than the serial pass.
    pub parallel: bool,
    /// Ablation replay hook: visit exactly these (k, l) pairs and use the
    /// frozen l for the rejection tests instead of the evolving bound.
    pub frozen_l_schedule: Option<Vec<(usize, usize)>>,
}

impl<S: Real> RigidGoreConfig<S> {
    pub fn new(xi: S) -> Self {
        Self {
            xi,
            use_bnb: true,
            bnb_time_budget: None,
            parallel: false,
            frozen_l_schedule: None,
        }
    }
}

/// Per-visit diagnostics of the Algorithm-2 loop.
#[derive(Debug, Clone, Copy)]
pub struct RigidPerK {
    pub k: usize,
    pub p_hat: usize,
    /// Step-1 bound |H′_k| + unconditional + 1 (p̂ before any BnB tightening).
    pub step1_bound: usize,
    /// The lower bound the rejection test compared against.
    pub l_at_visit: usize,
    pub used_bnb: bool,
    /// BnB budget ran out and the step-1 bound was used instead.
    pub bnb_fell_back: bool,
    pub removed: bool,
}

#[derive(Debug, Clone)]
pub struct RigidGoreOutcome<S> {
    /// Surviving original indices H′, ascending; contains every member of
    /// the optimal consensus set.
    pub surviving: Vec<usize>,
    /// Best candidate transform T̃ found while bounding.
    pub best_transform: RigidTransform<S>,
    /// Consensus of `best_transform` on the full input under ξ.
    pub lower_bound: usize,
    pub removed_count: usize,
    pub per_k: Vec<RigidPerK>,
    /// The (k, l-at-visit) sequence of this run, replayable as a frozen
    /// schedule.
    pub visit_schedule: Vec<(usize, usize)>,
}

/// Translate both point sets so correspondence k sits at the origin:
/// (x_i − x_k, y_i − y_k) for every i ≠ k, indices preserved.
pub fn shift_about<S: Real>(corrs: &[Correspondence<S>], k: usize) -> CorrespondenceSet<S> {
    let ck = corrs
        .iter()
        .find(|c| c.index == k)
        .expect("k must be present");
    corrs
        .iter()
        .filter(|c| c.index != k)
        .map(|c| Correspondence {
            x: c.x - ck.x,
            y: c.y - ck.y,
            index: c.index,
        })
        .collect()
}

/// Realize a rigid candidate from a subproblem rotation: the translation
/// maps x_k exactly onto y_k.
pub fn lift_candidate<S: Real>(
    r_tilde_k: &Rotation<S>,
    corr_k: &Correspondence<S>,
) -> RigidTransform<S> {
    RigidTransform::new(*r_tilde_k, corr_k.y - r_tilde_k.apply(&corr_k.x))
}

/// Indices satisfying ‖Rx_i + t − y_i‖ ≤ ξ (non-strict).
pub fn consensus_rigid<S: Real>(
    transform: &RigidTransform<S>,
    corrs: &[Correspondence<S>],
    xi: S,
) -> Vec<usize> {
    corrs
        .iter()
        .filter(|c| (transform.apply(&c.x) - c.y).norm() <= xi)
        .map(|c| c.index)
        .collect()
}

/// Outcome of the two-step upper bound for one subproblem.
#[derive(Debug, Clone)]
pub struct SubproblemBound<S> {
    /// Upper bound p̂_k on the rigid subproblem value.
    pub p_hat: usize,
    /// Rotation realizing the candidate (suboptimal from step 1, or exact
    /// from step 2).
    pub rotation: Rotation<S>,
    pub step1_bound: usize,
    pub used_bnb: bool,
    pub bnb_fell_back: bool,
}

/// Shifted-subproblem classification at threshold 2ξ.
fn classify_shifted<S: Real>(
    shifted: &[Correspondence<S>],
    two_xi: S,
) -> (Vec<AngularCorrespondence<S>>, usize) {
    let mut angular = Vec::with_capacity(shifted.len());
    let mut unconditional = 0usize;
    for c in shifted {
        let nx = c.x.norm();
        let ny = c.y.norm();
        if (nx - ny).abs() > two_xi {
            continue; // impossible under any rotation
        }
        if nx + ny <= two_xi {
            unconditional += 1; // within 2ξ of alignment for every rotation
            continue;
        }
        let epsilon =
            angular_threshold(&c.x, &c.y, two_xi).expect("classified pair has an angular form");
        angular.push(AngularCorrespondence {
            x: c.x.scale(S::one() / nx),
            y: c.y.scale(S::one() / ny),
            epsilon,
            original_index: c.index,
        });
    }
    (angular, unconditional)
}

/// Two-step upper bound p̂_k ≥ p_k for the subproblem forcing k to align.
///
/// Step 1 runs rotational GORE on the shifted problem at threshold 2ξ; if
/// the survivor count already rejects k the (valid) count is returned
/// directly. Otherwise, when enabled, step 2 solves the relaxation exactly
/// with BnB on the survivors.
pub fn rigid_subproblem_bound<S: Real>(
    k: usize,
    corrs: &[Correspondence<S>],
    cfg: &RigidGoreConfig<S>,
    l: usize,
) -> SubproblemBound<S> {
    let two_xi = cfg.xi * S::c(2.0);
    let shifted = shift_about(corrs, k);
    let (angular, unconditional) = classify_shifted(&shifted, two_xi);

    let sub = gore_rotation(&angular);
    let step1_bound = sub.surviving.len() + unconditional + 1;
    let mut result = SubproblemBound {
        p_hat: step1_bound,
        rotation: sub.best_rotation,
        step1_bound,
        used_bnb: false,
        bnb_fell_back: false,
    };
    if step1_bound < l || !cfg.use_bnb {
        return result;
    }

    let survivors: BTreeSet<usize> = sub.surviving.iter().copied().collect();
    let remaining: Vec<AngularCorrespondence<S>> = angular
        .iter()
        .filter(|c| survivors.contains(&c.original_index))
        .copied()
        .collect();
    let budget = cfg.bnb_time_budget.map(Duration::from_secs_f64);
    let bnb = bnb_rotation_consensus(&remaining, sub.lower_bound, budget);
    result.used_bnb = true;
    if bnb.optimal {
        if bnb.best_consensus >= sub.lower_bound {
            result.rotation = bnb.best_rotation;
        }
        result.p_hat = bnb.best_consensus.max(sub.lower_bound) + unconditional + 1;
    } else {
        // Budget ran out; keep the looser step-1 bound, but adopt the
        // search's rotation if it found a better candidate.
        result.bnb_fell_back = true;
        if bnb.best_consensus > consensus_angular(&result.rotation, &angular).len() {
            result.rotation = bnb.best_rotation;
        }
    }
    result
}

/// GORE for 6-DoF rigid registration.
///
/// Deterministic serial pass (ascending index with a pending queue) unless
/// `cfg.parallel` is set. The output satisfies I* ⊆ surviving for the
/// optimal consensus set of the rigid maximum-consensus problem at ξ.
pub fn gore_rigid<S: Real>(
    corrs: &[Correspondence<S>],
    cfg: &RigidGoreConfig<S>,
) -> RigidGoreOutcome<S> {
    if let Some(schedule) = cfg.frozen_l_schedule.clone() {
        return gore_rigid_frozen(corrs, cfg, &schedule);
    }
    if cfg.parallel {
        return gore_rigid_parallel(corrs, cfg);
    }

    let n = corrs.len();
    let mut surviving: BTreeSet<usize> = corrs.iter().map(|c| c.index).collect();
    let mut pending = surviving.clone();
    let mut visited: BTreeSet<usize> = BTreeSet::new();
    let mut best_transform = RigidTransform::identity();
    let mut lower = 0usize;
    let mut per_k = Vec::new();
    let mut visit_schedule = Vec::new();

    let mut current: Vec<Correspondence<S>> = Vec::with_capacity(n);
    while let Some(k) = pending.pop_first() {
        visited.insert(k);
        current.clear();
        current.extend(corrs.iter().filter(|c| surviving.contains(&c.index)).copied());
        let bound = rigid_subproblem_bound(k, &current, cfg, lower);
        let corr_k = current.iter().find(|c| c.index == k).expect("k survives");
        let candidate = lift_candidate(&bound.rotation, corr_k);
        let consensus = consensus_rigid(&candidate, &current, cfg.xi);
        if consensus.len() > lower {
            lower = consensus.len();
            best_transform = candidate;
            let covered: BTreeSet<usize> = consensus.into_iter().collect();
            pending = surviving
                .iter()
                .copied()
                .filter(|i| !covered.contains(i) && !visited.contains(i))
                .collect();
        }
        let removed = bound.p_hat < lower;
        if removed {
            surviving.remove(&k);
        }
        visit_schedule.push((k, lower));
        per_k.push(RigidPerK {
            k,
            p_hat: bound.p_hat,
            step1_bound: bound.step1_bound,
            l_at_visit: lower,
            used_bnb: bound.used_bnb,
            bnb_fell_back: bound.bnb_fell_back,
            removed,
        });
    }

    let final_lower = consensus_rigid(&best_transform, corrs, cfg.xi).len();
    RigidGoreOutcome {
        removed_count: n - surviving.len(),
        surviving: surviving.into_iter().collect(),
        best_transform,
        lower_bound: final_lower,
        per_k,
        visit_schedule,
    }
}

/// Replay a frozen (k, l) schedule: rejection tests use the recorded l
/// values. Used for the with/without-BnB ablation accounting.
fn gore_rigid_frozen<S: Real>(
    corrs: &[Correspondence<S>],
    cfg: &RigidGoreConfig<S>,
    schedule: &[(usize, usize)],
) -> RigidGoreOutcome<S> {
    let n = corrs.len();
    let mut surviving: BTreeSet<usize> = corrs.iter().map(|c| c.index).collect();
    let mut best_transform = RigidTransform::identity();
    let mut best_consensus = 0usize;
    let mut per_k = Vec::new();
    let mut current: Vec<Correspondence<S>> = Vec::with_capacity(n);

    for &(k, l_frozen) in schedule {
        if !surviving.contains(&k) {
            continue;
        }
        current.clear();
        current.extend(corrs.iter().filter(|c| surviving.contains(&c.index)).copied());
        let bound = rigid_subproblem_bound(k, &current, cfg, l_frozen);
        let corr_k = current.iter().find(|c| c.index == k).expect("k survives");
        let candidate = lift_candidate(&bound.rotation, corr_k);
        let consensus = consensus_rigid(&candidate, &current, cfg.xi).len();
        if consensus > best_consensus {
            best_consensus = consensus;
            best_transform = candidate;
        }
        let removed = bound.p_hat < l_frozen;
        if removed {
            surviving.remove(&k);
        }
        per_k.push(RigidPerK {
            k,
            p_hat: bound.p_hat,
            step1_bound: bound.step1_bound,
            l_at_visit: l_frozen,
            used_bnb: bound.used_bnb,
            bnb_fell_back: bound.bnb_fell_back,
            removed,
        });
    }

    let final_lower = consensus_rigid(&best_transform, corrs, cfg.xi).len();
    RigidGoreOutcome {
        removed_count: n - surviving.len(),
        surviving: surviving.into_iter().collect(),
        best_transform,
        lower_bound: final_lower,
        per_k,
        visit_schedule: schedule.to_vec(),
    }
}

/// Parallel variant: a first sweep computes every candidate transform to
/// establish the lower bound, a second sweep computes the per-k bounds
/// against it concurrently. Rejections only use an l that was valid when
/// read, so I* ⊆ surviving still holds.
fn gore_rigid_parallel<S: Real>(
    corrs: &[Correspondence<S>],
    cfg: &RigidGoreConfig<S>,
) -> RigidGoreOutcome<S> {
    let n = corrs.len();
    let serial_cfg = RigidGoreConfig {
        parallel: false,
        frozen_l_schedule: None,
        ..cfg.clone()
    };

    // Sweep 1: candidates only (no BnB), to find a strong lower bound.
    let candidate_cfg = RigidGoreConfig {
        use_bnb: false,
        ..serial_cfg.clone()
    };
    let candidates: Vec<(usize, RigidTransform<S>, usize)> = corrs
        .par_iter()
        .map(|c| {
            let bound = rigid_subproblem_bound(c.index, corrs, &candidate_cfg, 0);
            let t = lift_candidate(&bound.rotation, c);
            let consensus = consensus_rigid(&t, corrs, cfg.xi).len();
            (c.index, t, consensus)
        })
        .collect();
    let mut best_transform = RigidTransform::identity();
    let mut lower = 0usize;
    for (_, t, cons) in &candidates {
        if *cons > lower {
            lower = *cons;
            best_transform = *t;
        }
    }

    // Sweep 2: bounds with the established l; reject below it.
    let bounds: Vec<(usize, SubproblemBound<S>)> = corrs
        .par_iter()
        .map(|c| (c.index, rigid_subproblem_bound(c.index, corrs, &serial_cfg, lower)))
        .collect();
    let mut surviving: BTreeSet<usize> = corrs.iter().map(|c| c.index).collect();
    let mut per_k = Vec::new();
    for (k, bound) in &bounds {
        let removed = bound.p_hat < lower;
        if removed {
            surviving.remove(k);
        }
        per_k.push(RigidPerK {
            k: *k,
            p_hat: bound.p_hat,
            step1_bound: bound.step1_bound,
            l_at_visit: lower,
            used_bnb: bound.used_bnb,
            bnb_fell_back: bound.bnb_fell_back,
            removed,
        });
    }

    let final_lower = consensus_rigid(&best_transform, corrs, cfg.xi).len();
    RigidGoreOutcome {
        removed_count: n - surviving.len(),
        surviving: surviving.into_iter().collect(),
        best_transform,
        lower_bound: final_lower,
        per_k,
        visit_schedule: Vec::new(),
    }
}

//! Exact maximum-consensus rotation search over SO(3).
//!
//! Best-first branch-and-bound on axis-angle boxes. A box of half-width w
//! around center c contains only rotations within √3·w geodesic distance of
//! R_c, so counting points that pass the angular test with thresholds
//! fattened by √3·w is a valid upper bound for the whole box. Boxes whose
//! bound cannot beat the incumbent are pruned; the rest are split into
//! octants until a terminal half-width of 1e-5 rad, below which the
//! center value stands for the box.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use crate::float::Real;
use crate::geom::{angle_between, Rotation, Vec3};
use crate::rot_gore::AngularCorrespondence;

/// Half-width below which a box is treated as resolved.
const TERMINAL_HALF_WIDTH: f64 = 1e-5;

/// A search cell: an axis-angle cube.
#[derive(Debug, Clone, Copy)]
pub struct RotationBox<S> {
    pub center: [S; 3],
    pub half_width: S,
    pub upper: usize,
    seq: u64,
}

impl<S: Real> RotationBox<S> {
    /// Uncertainty radius of the cell: d∠(R_v, R_center) ≤ √3 · half_width
    /// for every axis-angle vector v inside it.
    pub fn uncertainty(&self) -> S {
        S::c(3.0).sqrt() * self.half_width
    }

    pub fn rotation(&self) -> Rotation<S> {
        Rotation::from_scaled_axis(&Vec3::new(self.center[0], self.center[1], self.center[2]))
    }
}

impl<S: Real> PartialEq for RotationBox<S> {
    fn eq(&self, other: &Self) -> bool {
        self.upper == other.upper && self.seq == other.seq
    }
}
impl<S: Real> Eq for RotationBox<S> {}

impl<S: Real> Ord for RotationBox<S> {
    fn cmp(&self, other: &Self) -> Ordering {
        // Max-heap: larger upper bound first; earlier insertion breaks ties.
        self.upper
            .cmp(&other.upper)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}
impl<S: Real> PartialOrd for RotationBox<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone)]
pub struct BnbResult<S> {
    pub best_rotation: Rotation<S>,
    /// Consensus of `best_rotation`; with the default zero seed and
    /// `optimal = true` this is the global maximum of the angular
    /// maximum-consensus objective.
    pub best_consensus: usize,
    /// True when the search space was exhausted; false only on budget
    /// exhaustion (the best-so-far is still returned).
    pub optimal: bool,
    pub nodes_expanded: usize,
    pub elapsed: f64,
}

fn consensus_count<S: Real>(rot: &Rotation<S>, corrs: &[AngularCorrespondence<S>]) -> usize {
    corrs
        .iter()
        .filter(|c| {
            angle_between(&rot.apply(&c.x), &c.y)
                .map(|a| a <= c.epsilon)
                .unwrap_or(false)
        })
        .count()
}

fn upper_count<S: Real>(
    rot: &Rotation<S>,
    corrs: &[AngularCorrespondence<S>],
    slack: S,
) -> usize {
    corrs
        .iter()
        .filter(|c| {
            let thr = (c.epsilon + slack).min(S::PI());
            angle_between(&rot.apply(&c.x), &c.y)
                .map(|a| a <= thr)
                .unwrap_or(false)
        })
        .count()
}

/// Globally solve the angular maximum-consensus rotation problem.
///
/// `init_lower` seeds pruning: boxes that cannot beat it are dropped without
/// expansion. The returned consensus is the best the search itself found;
/// when a caller seeds with a consensus it already knows how to achieve, the
/// global optimum is `max(init_lower, best_consensus)`.
pub fn bnb_rotation_consensus<S: Real>(
    corrs: &[AngularCorrespondence<S>],
    init_lower: usize,
    time_budget: Option<Duration>,
) -> BnbResult<S> {
    bnb_rotation_consensus_impl(corrs, init_lower, time_budget, false)
}

/// Search variant with reversed tie-breaking between equal upper bounds;
/// exposed so tests can check that the optimum does not depend on the
/// expansion order.
#[doc(hidden)]
pub fn bnb_rotation_consensus_alt_tiebreak<S: Real>(
    corrs: &[AngularCorrespondence<S>],
    init_lower: usize,
    time_budget: Option<Duration>,
) -> BnbResult<S> {
    bnb_rotation_consensus_impl(corrs, init_lower, time_budget, true)
}

fn bnb_rotation_consensus_impl<S: Real>(
    corrs: &[AngularCorrespondence<S>],
    init_lower: usize,
    time_budget: Option<Duration>,
    reverse_ties: bool,
) -> BnbResult<S> {
    let start = Instant::now();
    let terminal = S::c(TERMINAL_HALF_WIDTH);
    let mut best_rotation = Rotation::identity();
    // The identity is a genuinely evaluated first candidate, so the
    // returned consensus always belongs to the returned rotation.
    let mut best = consensus_count(&best_rotation, corrs);
    // Pruning level: the best found so far or the caller's seed.
    let mut prune = best.max(init_lower);
    let mut nodes_expanded = 0usize;
    let mut seq = 0u64;

    let mut heap: BinaryHeap<RotationBox<S>> = BinaryHeap::new();
    let root_rot = Rotation::<S>::identity();
    let root = RotationBox {
        center: [S::zero(); 3],
        half_width: S::PI(),
        upper: upper_count(&root_rot, corrs, S::c(3.0).sqrt() * S::PI()),
        seq: if reverse_ties { u64::MAX } else { 0 },
    };
    heap.push(root);

    let mut optimal = true;
    while let Some(node) = heap.pop() {
        if node.upper <= prune {
            // Best-first order: nothing left can improve.
            break;
        }
        if let Some(budget) = time_budget {
            if start.elapsed() > budget {
                optimal = false;
                break;
            }
        }
        if node.half_width <= terminal {
            continue;
        }
        nodes_expanded += 1;
        let child_hw = node.half_width * S::c(0.5);
        let slack = S::c(3.0).sqrt() * child_hw;
        for dx in [-child_hw, child_hw] {
            for dy in [-child_hw, child_hw] {
                for dz in [-child_hw, child_hw] {
                    let center = [
                        node.center[0] + dx,
                        node.center[1] + dy,
                        node.center[2] + dz,
                    ];
                    let rot = Rotation::from_scaled_axis(&Vec3::new(
                        center[0], center[1], center[2],
                    ));
                    let lower = consensus_count(&rot, corrs);
                    if lower > best {
                        best = lower;
                        best_rotation = rot;
                        prune = prune.max(best);
                    }
                    let upper = upper_count(&rot, corrs, slack);
                    if upper > prune {
                        seq += 1;
                        heap.push(RotationBox {
                            center,
                            half_width: child_hw,
                            upper,
                            seq: if reverse_ties { u64::MAX - seq } else { seq },
                        });
                    }
                }
            }
        }
    }

    BnbResult {
        best_rotation,
        best_consensus: best,
        optimal,
        nodes_expanded,
        elapsed: start.elapsed().as_secs_f64(),
    }
}

//! Guaranteed outlier removal for 3-DoF rotational registration.
//!
//! The rejection test needs, for every correspondence k, an upper bound
//! p̂_k on the best consensus any rotation aligning k can reach. That bound
//! comes from decomposing a candidate rotation into R = A·B̂ (B̂ the minimal
//! geodesic motion taking x_k onto y_k, A a rotation about B̂x_k), bounding
//! the uncertainty of every other point under the feasible (A, B) pairs by
//! an angular interval Θ_i of A's rotation angle, and stabbing the
//! intervals. Any k whose p̂_k drops below a known achievable consensus l
//! is provably absent from the optimal consensus set and is removed.

pub mod interval;

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use thiserror::Error;

use crate::float::Real;
use crate::geom::{
    angle_between, minimal_geodesic_rotation, spherical_coords, wrap_angle, Rotation, Vec3,
};
use crate::rigid_gore::Correspondence;
use interval::{interval_stab_region, AngleInterval, IntervalSet};

#[derive(Debug, Error, PartialEq)]
pub enum RotGoreError {
    #[error("norm gap exceeds threshold (lambda = {lambda}); caller must prefilter")]
    NormGapExceedsThreshold { lambda: f64 },
    #[error("zero-norm point has no angular form")]
    ZeroNorm,
    #[error("degenerate boundary configuration: input directions are parallel")]
    DegenerateBoundary,
}

/// A correspondence in angular form: unit directions plus a per-pair angular
/// inlier threshold ε_i, tagged with the index it had in the original set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularCorrespondence<S> {
    pub x: Vec3<S>,
    pub y: Vec3<S>,
    pub epsilon: S,
    pub original_index: usize,
}

/// Result of the rotational GORE pass.
#[derive(Debug, Clone)]
pub struct RotGoreOutcome<S> {
    /// Surviving original indices H′, ascending. Contains every member of
    /// the optimal consensus set.
    pub surviving: Vec<usize>,
    /// Best suboptimal rotation R̃ found while bounding.
    pub best_rotation: Rotation<S>,
    /// Consensus size of `best_rotation` on the full input (the lower bound l).
    pub lower_bound: usize,
    /// Upper bound p̂_k recorded per visited k (diagnostics).
    pub per_k_upper_bounds: BTreeMap<usize, usize>,
}

/// Euclidean-to-angular threshold conversion for a single pair.
///
/// ε = arccos λ with λ = (‖x‖² + ‖y‖² − ξ²) / (2‖x‖‖y‖) when λ > −1, and
/// ε = π otherwise (the whole sphere is within reach). λ > 1 means the pair
/// cannot be rotationally aligned at all; callers must remove such pairs
/// with [`norm_prefilter`] first, so that case is a contract violation.
pub fn angular_threshold<S: Real>(x: &Vec3<S>, y: &Vec3<S>, xi: S) -> Result<S, RotGoreError> {
    let nx = x.norm();
    let ny = y.norm();
    if nx <= S::zero() || ny <= S::zero() {
        return Err(RotGoreError::ZeroNorm);
    }
    let lambda = (nx * nx + ny * ny - xi * xi) / (S::c(2.0) * nx * ny);
    if lambda > S::one() + S::geom_tol() {
        return Err(RotGoreError::NormGapExceedsThreshold {
            lambda: lambda.to_f64().unwrap_or(f64::NAN),
        });
    }
    if lambda <= -S::one() {
        return Ok(S::PI());
    }
    Ok(lambda.min(S::one()).acos())
}

/// Split a correspondence set by the norm test |‖x‖ − ‖y‖| > ξ (strict).
/// Every removed pair is a true outlier of the rotational problem.
pub fn norm_prefilter<S: Real>(
    corrs: &[Correspondence<S>],
    xi: S,
) -> (Vec<usize>, Vec<usize>) {
    let mut kept = Vec::new();
    let mut removed = Vec::new();
    for c in corrs {
        if (c.x.norm() - c.y.norm()).abs() > xi {
            removed.push(c.index);
        } else {
            kept.push(c.index);
        }
    }
    (kept, removed)
}

/// Prefilter and convert a Euclidean correspondence set into angular form.
///
/// Pairs removed by the norm test come back in the second return value.
/// Pairs whose norms are too small to define a direction are kept as
/// always-satisfiable (ε = π) entries, which is what the Euclidean
/// constraint degenerates to.
pub fn angular_form<S: Real>(
    corrs: &[Correspondence<S>],
    xi: S,
) -> (Vec<AngularCorrespondence<S>>, Vec<usize>) {
    let mut out = Vec::new();
    let mut removed = Vec::new();
    let placeholder = Vec3::new(S::zero(), S::zero(), S::one());
    for c in corrs {
        let nx = c.x.norm();
        let ny = c.y.norm();
        if (nx - ny).abs() > xi {
            removed.push(c.index);
            continue;
        }
        if nx <= S::geom_tol() || ny <= S::geom_tol() {
            // ‖Rx − y‖ ≤ ξ holds for every rotation once the norm test passes.
            out.push(AngularCorrespondence {
                x: placeholder,
                y: placeholder,
                epsilon: S::PI(),
                original_index: c.index,
            });
            continue;
        }
        let epsilon = angular_threshold(&c.x, &c.y, xi).expect("prefiltered pair");
        out.push(AngularCorrespondence {
            x: c.x.scale(S::one() / nx),
            y: c.y.scale(S::one() / ny),
            epsilon,
            original_index: c.index,
        });
    }
    (out, removed)
}

/// Radius bound δ(θ) = 2|θ| sin(ε_k/2) + ε_k on how far a point of the
/// ε_k-cap around B̂x_i can travel from A_{θ,y_k} B̂x_i when the rotation
/// axis is anywhere in the ε_k-cap around y_k.
pub fn delta_bound<S: Real>(theta: S, eps_k: S) -> S {
    S::c(2.0) * theta.abs() * (eps_k * S::c(0.5)).sin() + eps_k
}

/// The two closest / two farthest boundary points of the uncertainty caps:
/// rotations of B̂x_i and y_k by ε_k about ±(B̂x_i × y_k)/‖·‖.
pub fn boundary_vectors<S: Real>(
    bx_i: &Vec3<S>,
    y_k: &Vec3<S>,
    eps_k: S,
) -> Result<(Vec3<S>, Vec3<S>, Vec3<S>, Vec3<S>), RotGoreError> {
    let c = bx_i.cross(y_k);
    let n = c.norm();
    if n < S::c(1e-12) {
        return Err(RotGoreError::DegenerateBoundary);
    }
    let toward = c.scale(S::one() / n); // rotates bx_i toward y_k
    let away = -toward;
    let rot_toward = Rotation::from_unit_axis_angle(&toward, eps_k);
    let rot_away = Rotation::from_unit_axis_angle(&away, eps_k);
    let p_n = rot_toward.apply(bx_i);
    let a_n = rot_away.apply(y_k);
    let p_f = rot_away.apply(bx_i);
    let a_f = rot_toward.apply(y_k);
    Ok((p_n, a_n, p_f, a_f))
}

/// Result 1 pruning: can (x_i, y_i) be discarded from the subproblem that
/// forces k to align?
///
/// Conservative inclination-band form: every reachable position of x_i under
/// a feasible rotation stays within 2ε_k of inclination ∠(B̂x_i, y_k), so if
/// the ε_i-cap around y_i stays clear of that band no feasible rotation can
/// align i. Never prunes a feasible correspondence; may keep infeasible ones.
pub fn region_prune_test<S: Real>(
    corr_i: &AngularCorrespondence<S>,
    bx_i: &Vec3<S>,
    y_k: &Vec3<S>,
    eps_k: S,
) -> bool {
    let psi_x = match angle_between(bx_i, y_k) {
        Ok(a) => a,
        Err(_) => return false,
    };
    let psi_y = match angle_between(&corr_i.y, y_k) {
        Ok(a) => a,
        Err(_) => return false,
    };
    let two = S::c(2.0);
    let lo = (psi_x - two * eps_k).max(S::zero());
    let hi = (psi_x + two * eps_k).min(S::PI());
    psi_y + corr_i.epsilon < lo || psi_y - corr_i.epsilon > hi
}

/// Largest admissible ε_k for the Jordan-inequality linearization:
/// π / (2π + 2), about 21.7°.
pub fn eps_k_validity_limit<S: Real>() -> S {
    S::PI() / (S::c(2.0) * S::PI() + S::c(2.0))
}

/// Solve chord(β) = s·β + c on [0, π/2], where chord is the two-piece
/// linear lower bound of sin with breakpoint π/4. The line upper-bounds the
/// exact right-hand side of the meridian-touching equation, so the returned
/// crossing over-estimates the exact solution. `None` means no sound
/// crossing exists (the caller falls back to the full circle).
fn solve_chord_line<S: Real>(s: S, c: S) -> Option<S> {
    let q = S::FRAC_PI_4();
    let sq = q.sin();
    let m1 = sq / q;
    let m2 = (S::one() - sq) / q;
    // The line must end strictly below the chord at π/2; this both
    // guarantees a crossing and rules out the touching condition coming
    // back anywhere in the domain past it.
    if s * S::FRAC_PI_2() + c >= S::one() {
        return None;
    }
    if c <= S::zero() {
        return Some(S::zero());
    }
    if m1 > s {
        let b = c / (m1 - s);
        if b <= q {
            return Some(b);
        }
    }
    if m2 <= s {
        return None;
    }
    let b = (c - sq + m2 * q) / (m2 - s);
    Some(b.min(S::FRAC_PI_2()))
}

/// Sound over-estimate Θ_i of the rotation angles θ (about axes in the
/// ε_k-cap of y_k, applied to points in the ε_k-cap of B̂x_i) that can bring
/// x_i within ε_i of y_i.
///
/// Non-degenerate construction: the ε_i-cap of y_i spans the meridian band
/// azimuth(y_i) ± γ_i with sin γ_i = sin ε_i / sin ψ(y_i); the moving
/// δ(θ)-cap spans a band whose half-width solves sin α = sin δ(θ) / sin
/// ψ(x_i). Linearizing (Jordan's inequality above, a sine chord below)
/// widens both solutions, keeping the interval an over-estimate. Every
/// degenerate case collapses to the full circle [−π, π].
pub fn theta_interval<S: Real>(
    corr_i: &AngularCorrespondence<S>,
    bx_i: &Vec3<S>,
    y_k: &Vec3<S>,
    eps_k: S,
) -> IntervalSet<S> {
    let pi = S::PI();
    let two = S::c(2.0);
    let eps_i = corr_i.epsilon;

    if eps_k > eps_k_validity_limit() || eps_i >= S::FRAC_PI_2() {
        return IntervalSet::full();
    }
    let psi_x = match angle_between(bx_i, y_k) {
        Ok(a) => a,
        Err(_) => return IntervalSet::full(),
    };
    let psi_y = match angle_between(&corr_i.y, y_k) {
        Ok(a) => a,
        Err(_) => return IntervalSet::full(),
    };
    let psi_x_pole_gap = psi_x.min(pi - psi_x);
    // Pole inside L_k(x_i), or close enough that the band geometry breaks.
    if psi_x_pole_gap <= two * eps_k + eps_i {
        return IntervalSet::full();
    }
    let sin_psi_y = psi_y.sin();
    let sin_eps_i = eps_i.sin();
    // γ_i undefined: the ε_i-cap of y_i wraps a pole.
    if sin_eps_i > sin_psi_y || sin_psi_y <= S::geom_tol() {
        return IntervalSet::full();
    }
    // The moving cap must stay pole-free for every θ, or azimuth bands say
    // nothing about far-away angles. δ(π) ≤ π/2 holds under the validity
    // limit, so the sine comparison reduces to a direct one.
    let sigma = (eps_k * S::c(0.5)).sin();
    let delta_at_pi = two * pi * sigma + eps_k;
    if delta_at_pi >= psi_x_pole_gap {
        return IntervalSet::full();
    }

    let gamma = (sin_eps_i / sin_psi_y).asin();
    let (phi_x, _) = spherical_coords(bx_i, y_k);
    let (phi_y, _) = spherical_coords(&corr_i.y, y_k);
    let theta_i = wrap_angle(phi_y - phi_x);
    let m = theta_i.abs();

    let sin_psi_x = psi_x.sin();
    let slope = two * sigma / sin_psi_x;
    // δ at the interval ends, linear in the unknown via |m ± γ + β| ≤ |m ± γ| + β.
    let c_beta = (two * (m + gamma) * sigma + eps_k) / sin_psi_x;
    let c_alpha = (two * (m - gamma).abs() * sigma + eps_k) / sin_psi_x;
    let (alpha, beta) = match (solve_chord_line(slope, c_alpha), solve_chord_line(slope, c_beta)) {
        (Some(a), Some(b)) => (a, b),
        _ => return IntervalSet::full(),
    };

    // Case 2 (θ_i < 0) mirrors Case 1, swapping which side α and β widen.
    let (lo, hi) = if theta_i >= S::zero() {
        (theta_i - gamma - alpha, theta_i + gamma + beta)
    } else {
        (theta_i - gamma - beta, theta_i + gamma + alpha)
    };
    IntervalSet::from_wrapped(lo, hi)
}

/// Consensus of a rotation under the per-pair angular test.
pub fn consensus_angular<S: Real>(
    rot: &Rotation<S>,
    corrs: &[AngularCorrespondence<S>],
) -> Vec<usize> {
    corrs
        .iter()
        .filter(|c| {
            angle_between(&rot.apply(&c.x), &c.y)
                .map(|a| a <= c.epsilon)
                .unwrap_or(false)
        })
        .map(|c| c.original_index)
        .collect()
}

/// Upper bound p̂_k for the subproblem that forces correspondence k to
/// align, plus the stabbing-derived candidate rotation r̃_k.
///
/// `corrs` is the current survivor set and must contain original index k.
pub fn rot_upper_bound<S: Real>(
    k: usize,
    corrs: &[AngularCorrespondence<S>],
) -> (usize, Rotation<S>) {
    let ck = corrs
        .iter()
        .find(|c| c.original_index == k)
        .expect("k must be present in the correspondence set");
    let b_hat = minimal_geodesic_rotation(&ck.x, &ck.y);
    let axis = b_hat
        .apply(&ck.x)
        .normalized()
        .expect("unit input stays unit");
    let eps_k = ck.epsilon;

    let mut pieces: Vec<AngleInterval<S>> = Vec::with_capacity(corrs.len());
    for c in corrs {
        if c.original_index == k {
            continue;
        }
        if c.epsilon >= S::PI() {
            // Satisfiable by every rotation; stabs everywhere.
            pieces.push(AngleInterval::new(-S::PI(), S::PI()));
            continue;
        }
        let bx = b_hat.apply(&c.x);
        if region_prune_test(c, &bx, &ck.y, eps_k) {
            continue;
        }
        pieces.extend_from_slice(theta_interval(c, &bx, &ck.y, eps_k).pieces());
    }
    let (count, lo, hi) = interval_stab_region(&pieces);
    // Any angle in the maximal region solves the stabbing problem; the
    // midpoint realizes the best-centered candidate rotation.
    let theta = (lo + hi) * S::c(0.5);
    let candidate = Rotation::from_unit_axis_angle(&axis, theta).compose(&b_hat);
    (count + 1, candidate)
}

/// GORE for rotational registration.
///
/// Deterministic serial pass over the correspondences (ascending original
/// index, with a pending queue that skips indices already covered by the
/// best consensus). The output satisfies I* ⊆ surviving for the optimal
/// consensus set I* of the angular maximum consensus problem.
pub fn gore_rotation<S: Real>(corrs: &[AngularCorrespondence<S>]) -> RotGoreOutcome<S> {
    gore_rotation_seeded(corrs, None)
}

/// [`gore_rotation`] with an externally supplied starting lower bound:
/// a rotation and the consensus size it achieves on `corrs`. Used by the
/// RANSAC-seeded pipeline variant.
pub fn gore_rotation_seeded<S: Real>(
    corrs: &[AngularCorrespondence<S>],
    seed: Option<(Rotation<S>, usize)>,
) -> RotGoreOutcome<S> {
    let mut surviving: BTreeSet<usize> = corrs.iter().map(|c| c.original_index).collect();
    let (mut best_rotation, mut lower) = match seed {
        Some((r, l)) => (r, l),
        None => (Rotation::identity(), 0),
    };
    let mut pending = surviving.clone();
    let mut visited: BTreeSet<usize> = BTreeSet::new();
    let mut per_k_upper_bounds = BTreeMap::new();

    let mut current: Vec<AngularCorrespondence<S>> = Vec::with_capacity(corrs.len());
    while let Some(k) = pending.pop_first() {
        visited.insert(k);
        current.clear();
        current.extend(
            corrs
                .iter()
                .filter(|c| surviving.contains(&c.original_index))
                .copied(),
        );
        let (p_hat, r_k) = rot_upper_bound(k, &current);
        per_k_upper_bounds.insert(k, p_hat);

        let consensus = consensus_angular(&r_k, &current);
        if consensus.len() > lower {
            lower = consensus.len();
            best_rotation = r_k;
            let covered: BTreeSet<usize> = consensus.into_iter().collect();
            pending = surviving
                .iter()
                .copied()
                .filter(|i| !covered.contains(i) && !visited.contains(i))
                .collect();
        }
        if p_hat < lower {
            surviving.remove(&k);
        }
    }

    let final_lower = consensus_angular(&best_rotation, corrs).len();
    RotGoreOutcome {
        surviving: surviving.into_iter().collect(),
        best_rotation,
        lower_bound: final_lower,
        per_k_upper_bounds,
    }
}

/// Parallel variant: bounds for all k are computed concurrently against the
/// full input, then rejections are applied in one deterministic reduction.
/// Still guarantees I* ⊆ surviving; the surviving set may differ from the
/// serial pass (bounds are looser, so it removes at most as much).
pub fn gore_rotation_parallel<S: Real>(corrs: &[AngularCorrespondence<S>]) -> RotGoreOutcome<S> {
    let results: Vec<(usize, usize, Rotation<S>, usize)> = corrs
        .par_iter()
        .map(|c| {
            let k = c.original_index;
            let (p_hat, r_k) = rot_upper_bound(k, corrs);
            let consensus = consensus_angular(&r_k, corrs).len();
            (k, p_hat, r_k, consensus)
        })
        .collect();

    let mut surviving: BTreeSet<usize> = corrs.iter().map(|c| c.original_index).collect();
    let mut best_rotation = Rotation::identity();
    let mut lower = 0usize;
    let mut per_k_upper_bounds = BTreeMap::new();
    for (k, p_hat, r_k, consensus) in &results {
        per_k_upper_bounds.insert(*k, *p_hat);
        if *consensus > lower {
            lower = *consensus;
            best_rotation = *r_k;
        }
    }
    for (k, p_hat, _, _) in &results {
        if *p_hat < lower {
            surviving.remove(k);
        }
    }
    let final_lower = consensus_angular(&best_rotation, corrs).len();
    RotGoreOutcome {
        surviving: surviving.into_iter().collect(),
        best_rotation,
        lower_bound: final_lower,
        per_k_upper_bounds,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{spherical_point, tangent_frame};
    use std::f64::consts::{FRAC_PI_2, PI};

    type V = Vec3<f64>;

    fn v(x: f64, y: f64, z: f64) -> V {
        Vec3::new(x, y, z)
    }

    fn seeded_rng(seed: u64) -> impl FnMut() -> f64 {
        let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15) | 1;
        move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        }
    }

    fn random_unit(rng: &mut impl FnMut() -> f64) -> V {
        loop {
            let p = v(rng() * 2.0 - 1.0, rng() * 2.0 - 1.0, rng() * 2.0 - 1.0);
            let n = p.norm();
            if n > 1e-3 && n <= 1.0 {
                return p.scale(1.0 / n);
            }
        }
    }

    /// Uniform sample from the spherical cap of the given radius.
    fn sample_cap(rng: &mut impl FnMut() -> f64, center: &V, radius: f64) -> V {
        // Uniform in cos(inclination), uniform azimuth.
        let cmin = radius.cos();
        let c = cmin + rng() * (1.0 - cmin);
        let inc = c.clamp(-1.0, 1.0).acos();
        let az = rng() * 2.0 * PI - PI;
        spherical_point(az, inc, center)
    }

    #[test]
    fn angular_threshold_chord_recovers_xi() {
        let eps = angular_threshold(&v(1.0, 0.0, 0.0), &v(0.0, 1.0, 0.0), 0.5).unwrap();
        assert!((eps - 0.875f64.acos()).abs() < 1e-12);
        assert!((eps - 0.50536).abs() < 1e-5);
        // Fig. 2 geometry: the chord of the angular radius is ξ again.
        assert!((2.0 * (eps / 2.0).sin() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn angular_threshold_else_branch_gives_pi() {
        let eps = angular_threshold(&v(0.1, 0.0, 0.0), &v(0.0, 0.2, 0.0), 0.5).unwrap();
        assert_eq!(eps, PI); // λ = −5
    }

    #[test]
    fn angular_threshold_shrinks_with_xi() {
        let mut last = f64::INFINITY;
        for xi in [0.5, 0.1, 0.01, 1e-4, 1e-8] {
            let eps = angular_threshold(&v(1.0, 0.0, 0.0), &v(0.0, 1.0, 0.0), xi).unwrap();
            assert!(eps < last);
            last = eps;
        }
        assert!(last < 1e-7);
    }

    #[test]
    fn angular_threshold_rejects_unalignable_pair() {
        assert!(matches!(
            angular_threshold(&v(1.0, 0.0, 0.0), &v(0.0, 2.0, 0.0), 0.5),
            Err(RotGoreError::NormGapExceedsThreshold { .. })
        ));
    }

    #[test]
    fn prefilter_norm_gap() {
        let corrs = vec![
            Correspondence { x: v(1.0, 0.0, 0.0), y: v(0.0, 2.0, 0.0), index: 0 },
            Correspondence { x: v(0.0, 1.0, 0.0), y: v(1.0, 0.0, 0.0), index: 1 },
            Correspondence { x: v(1.0, 0.0, 0.0), y: v(0.0, 1.5, 0.0), index: 2 },
        ];
        let (kept, removed) = norm_prefilter(&corrs, 0.5);
        assert_eq!(removed, vec![0]);
        // Index 2 sits exactly on the boundary; the test is strict.
        assert_eq!(kept, vec![1, 2]);
    }

    #[test]
    fn delta_bound_values() {
        assert_eq!(delta_bound(0.0, 0.3), 0.3);
        assert_eq!(delta_bound(1.234, 0.0), 0.0);
        let d = delta_bound(FRAC_PI_2, 0.1);
        assert!((d - (PI * 0.05f64.sin() + 0.1)).abs() < 1e-15);
        assert!((d - 0.25702).abs() < 1e-5);
    }

    #[test]
    fn boundary_vectors_zero_radius() {
        let bx = v(1.0, 0.0, 0.0);
        let yk = v(0.0, 0.0, 1.0);
        let (p_n, a_n, p_f, a_f) = boundary_vectors(&bx, &yk, 0.0).unwrap();
        assert!((p_n - bx).norm() < 1e-12 && (p_f - bx).norm() < 1e-12);
        assert!((a_n - yk).norm() < 1e-12 && (a_f - yk).norm() < 1e-12);
    }

    #[test]
    fn boundary_vectors_angles() {
        let bx = v(1.0, 0.0, 0.0);
        let yk = v(0.0, 0.0, 1.0);
        let eps = 0.2;
        let (p_n, a_n, p_f, a_f) = boundary_vectors(&bx, &yk, eps).unwrap();
        let base = angle_between(&bx, &yk).unwrap();
        assert!((angle_between(&p_n, &bx).unwrap() - eps).abs() < 1e-12);
        assert!((angle_between(&a_n, &yk).unwrap() - eps).abs() < 1e-12);
        assert!((angle_between(&p_n, &a_n).unwrap() - (base - 2.0 * eps)).abs() < 1e-9);
        assert!((angle_between(&p_f, &a_f).unwrap() - (base + 2.0 * eps)).abs() < 1e-9);
    }

    #[test]
    fn boundary_vectors_parallel_is_degenerate() {
        assert!(matches!(
            boundary_vectors(&v(0.0, 0.0, 1.0), &v(0.0, 0.0, 1.0), 0.1),
            Err(RotGoreError::DegenerateBoundary)
        ));
    }

    fn ang(x: V, y: V, eps: f64, idx: usize) -> AngularCorrespondence<f64> {
        AngularCorrespondence { x, y, epsilon: eps, original_index: idx }
    }

    #[test]
    fn prune_never_fires_when_y_matches_bx() {
        let mut rng = seeded_rng(3);
        for _ in 0..100 {
            let bx = random_unit(&mut rng);
            let yk = random_unit(&mut rng);
            let c = ang(bx, bx, rng() * 0.5, 0);
            assert!(!region_prune_test(&c, &bx, &yk, rng() * 0.3));
        }
    }

    #[test]
    fn prune_fires_on_inclination_gap_at_zero_radii() {
        let yk = v(0.0, 0.0, 1.0);
        let bx = spherical_point(0.0, 1.0, &yk);
        let yi = spherical_point(0.3, 1.4, &yk); // different inclination
        let c = ang(bx, yi, 0.0, 0);
        assert!(region_prune_test(&c, &bx, &yk, 0.0));
    }

    /// Soundness: whenever the prune test fires, no feasible rotation of the
    /// decomposition family can align i. Samples axes u in the ε_k-cap of
    /// y_k with coupled p = C_u B̂x_i, plus the angle grid.
    #[test]
    fn prune_me_soundness_small() {
        let mut rng = seeded_rng(11);
        let mut tested = 0;
        while tested < 15 {
            let yk = random_unit(&mut rng);
            let bx = random_unit(&mut rng);
            let eps_k = rng() * 0.25;
            let eps_i = rng() * 0.25;
            let yi = random_unit(&mut rng);
            let c = ang(bx, yi, eps_i, 0);
            if !region_prune_test(&c, &bx, &yk, eps_k) {
                continue;
            }
            tested += 1;
            for _ in 0..2000 {
                let u = sample_cap(&mut rng, &yk, eps_k);
                let cu = minimal_geodesic_rotation(&yk, &u);
                let p = cu.apply(&bx);
                for step in 0..50 {
                    let theta = -PI + 2.0 * PI * (step as f64 + rng()) / 50.0;
                    let rotated = Rotation::from_unit_axis_angle(&u.normalized().unwrap(), theta)
                        .apply(&p);
                    assert!(
                        angle_between(&rotated, &yi).unwrap() > eps_i,
                        "pruned correspondence is feasible"
                    );
                }
            }
        }
    }

    #[test]
    fn theta_interval_exact_data_is_a_point() {
        let yk = v(0.0, 0.0, 1.0);
        let (e1, e2) = tangent_frame(&yk);
        let _ = (e1, e2);
        let bx = spherical_point(0.4, 1.1, &yk);
        let yi = spherical_point(1.3, 1.1, &yk); // same circle of latitude
        let c = ang(bx, yi, 0.0, 0);
        let set = theta_interval(&c, &bx, &yk, 0.0);
        assert_eq!(set.pieces().len(), 1);
        let piece = set.pieces()[0];
        assert!((piece.lo() - piece.hi()).abs() < 1e-12);
        assert!((piece.lo() - 0.9).abs() < 1e-9);
    }

    #[test]
    fn theta_interval_eps_k_beyond_validity_is_full() {
        let yk = v(0.0, 0.0, 1.0);
        let bx = spherical_point(0.4, 1.1, &yk);
        let yi = spherical_point(1.3, 1.2, &yk);
        let c = ang(bx, yi, 0.05, 0);
        // π / (2π + 2) ≈ 0.37927 rad ≈ 21.7°
        assert!((eps_k_validity_limit::<f64>() - std::f64::consts::PI / (2.0 * std::f64::consts::PI + 2.0)).abs() < 1e-15);
        assert!((eps_k_validity_limit::<f64>() - 0.37927).abs() < 1e-4);
        assert!(theta_interval(&c, &bx, &yk, 0.4).is_full());
        assert!(!theta_interval(&c, &bx, &yk, 0.05).is_full());
    }

    /// Monte-Carlo containment: every θ achieved by feasible samples of
    /// (u, p) lies inside Θ_i. Smaller-scale twin of the acceptance run.
    #[test]
    fn theta_interval_contains_feasible_angles_mc() {
        let mut rng = seeded_rng(17);
        let mut configs = 0;
        while configs < 40 {
            let yk = random_unit(&mut rng);
            let bx = random_unit(&mut rng);
            let eps_k = rng() * 0.3;
            let eps_i = rng() * 0.3;
            let yi = random_unit(&mut rng);
            let c = ang(bx, yi, eps_i, 0);
            if region_prune_test(&c, &bx, &yk, eps_k) {
                continue;
            }
            let set = theta_interval(&c, &bx, &yk, eps_k);
            if set.is_full() {
                continue;
            }
            configs += 1;
            for _ in 0..2000 {
                let u = sample_cap(&mut rng, &yk, eps_k);
                let p = sample_cap(&mut rng, &bx, eps_k);
                let axis = u.normalized().unwrap();
                for step in 0..40 {
                    let theta = -PI + 2.0 * PI * (step as f64 + rng()) / 40.0;
                    let moved = Rotation::from_unit_axis_angle(&axis, theta).apply(&p);
                    if angle_between(&moved, &yi).unwrap() <= eps_i {
                        assert!(
                            set.contains(theta),
                            "feasible θ {} outside Θ_i {:?}",
                            theta,
                            set
                        );
                    }
                }
            }
        }
    }

    /// δ(θ) really bounds the motion of the uncertain point (Eq. 23 shape).
    #[test]
    fn delta_bound_dominates_sampled_motion() {
        let mut rng = seeded_rng(23);
        for _ in 0..200 {
            let yk = random_unit(&mut rng);
            let bx = random_unit(&mut rng);
            let eps_k = rng() * 0.3;
            let theta = rng() * 2.0 * PI - PI;
            let reference = Rotation::from_unit_axis_angle(&yk, theta).apply(&bx);
            for _ in 0..50 {
                let u = sample_cap(&mut rng, &yk, eps_k);
                let p = sample_cap(&mut rng, &bx, eps_k);
                let moved =
                    Rotation::from_unit_axis_angle(&u.normalized().unwrap(), theta).apply(&p);
                let d = angle_between(&moved, &reference).unwrap();
                assert!(d <= delta_bound(theta, eps_k) + 1e-9);
            }
        }
    }

    /// Linearized α/β never undershoot the exact root of the meridian
    /// touching equation (smaller-scale twin of the acceptance run).
    #[test]
    fn linearization_dominates_bisection() {
        let mut rng = seeded_rng(29);
        let limit: f64 = eps_k_validity_limit();
        for _ in 0..2000 {
            let eps_k = rng() * limit;
            let theta_i = rng() * PI;
            let gamma = rng() * FRAC_PI_2 * 0.5;
            let psi = 0.2 + rng() * (PI - 0.4);
            let sigma = (eps_k / 2.0).sin();
            let sin_psi = psi.sin();
            let c = (2.0 * (theta_i + gamma) * sigma + eps_k) / sin_psi;
            let s = 2.0 * sigma / sin_psi;
            let Some(approx) = solve_chord_line(s, c) else {
                continue; // degenerate: implementation falls back to [−π, π]
            };
            // Exact: first root of sin β = sin(δ(θ_i + γ + β))/sin ψ.
            let g = |beta: f64| beta.sin() - (2.0 * (theta_i + gamma + beta) * sigma + eps_k).sin() / sin_psi;
            let mut bracket = None;
            let mut prev = g(0.0);
            let steps = 4000;
            for i in 1..=steps {
                let b = FRAC_PI_2 * i as f64 / steps as f64;
                let val = g(b);
                if prev < 0.0 && val >= 0.0 {
                    bracket = Some((FRAC_PI_2 * (i - 1) as f64 / steps as f64, b));
                    break;
                }
                prev = val;
            }
            let Some((mut lo, mut hi)) = bracket else { continue };
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if g(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let exact = 0.5 * (lo + hi);
            assert!(
                approx >= exact - 1e-9,
                "linearized {} < exact {} (eps_k {}, theta_i {}, gamma {}, psi {})",
                approx,
                exact,
                eps_k,
                theta_i,
                gamma,
                psi
            );
        }
    }

    fn exact_instance(n: usize, seed: u64) -> (Vec<AngularCorrespondence<f64>>, Rotation<f64>) {
        let mut rng = seeded_rng(seed);
        let truth = {
            let axis = random_unit(&mut rng);
            Rotation::from_axis_angle(&axis, rng() * PI).unwrap()
        };
        let corrs = (0..n)
            .map(|i| {
                let x = random_unit(&mut rng);
                ang(x, truth.apply(&x), 0.05, i)
            })
            .collect();
        (corrs, truth)
    }

    #[test]
    fn upper_bound_single_correspondence() {
        let (corrs, _) = exact_instance(1, 5);
        let (p_hat, r) = rot_upper_bound(0, &corrs);
        assert_eq!(p_hat, 1);
        assert!((r.apply(&corrs[0].x) - corrs[0].y).norm() < 1e-9);
    }

    #[test]
    fn upper_bound_exact_instance_reaches_n() {
        let (corrs, _) = exact_instance(20, 7);
        for k in [0usize, 7, 19] {
            let (p_hat, r) = rot_upper_bound(k, &corrs);
            assert_eq!(p_hat, 20);
            assert_eq!(consensus_angular(&r, &corrs).len(), 20);
        }
    }

    /// Constrained sampling oracle: p̂_k dominates the consensus of every
    /// feasible rotation of the A·B̂ family found by sampling.
    #[test]
    fn upper_bound_dominates_sampled_subproblem() {
        let mut rng = seeded_rng(31);
        for trial in 0..30 {
            let n = 4 + (rng() * 9.0) as usize;
            let mut corrs: Vec<AngularCorrespondence<f64>> = Vec::new();
            for i in 0..n {
                let x = random_unit(&mut rng);
                let y = random_unit(&mut rng);
                corrs.push(ang(x, y, 0.05 + rng() * 0.2, i));
            }
            let k = trial % n;
            let (p_hat, _) = rot_upper_bound(k, &corrs);
            let ck = corrs[k];
            let b_hat = minimal_geodesic_rotation(&ck.x, &ck.y);
            let mut best = 0usize;
            for _ in 0..300 {
                let u = sample_cap(&mut rng, &ck.y, ck.epsilon);
                let cu = minimal_geodesic_rotation(&ck.y, &u);
                let b = cu.compose(&b_hat);
                let axis = b.apply(&ck.x).normalized().unwrap();
                for step in 0..60 {
                    let theta = -PI + 2.0 * PI * step as f64 / 60.0;
                    let r = Rotation::from_unit_axis_angle(&axis, theta).compose(&b);
                    let cons = consensus_angular(&r, &corrs).len();
                    best = best.max(cons);
                }
            }
            assert!(
                p_hat >= best,
                "p̂_k {} beaten by sampled feasible consensus {}",
                p_hat,
                best
            );
        }
    }

    #[test]
    fn gore_rotation_keeps_everything_without_outliers() {
        let (corrs, _) = exact_instance(30, 11);
        let out = gore_rotation(&corrs);
        assert_eq!(out.surviving.len(), 30);
        assert_eq!(out.lower_bound, 30);
    }

    #[test]
    fn gore_rotation_empty_input() {
        let out = gore_rotation::<f64>(&[]);
        assert!(out.surviving.is_empty());
        assert_eq!(out.lower_bound, 0);
    }

    #[test]
    fn gore_rotation_removes_gross_outliers_and_keeps_inliers() {
        let mut rng = seeded_rng(13);
        let (mut corrs, truth) = exact_instance(40, 13);
        // Swap 25 pairs to random directions: gross outliers.
        for c in corrs.iter_mut().skip(15) {
            c.y = random_unit(&mut rng);
        }
        let out = gore_rotation(&corrs);
        for i in 0..15 {
            assert!(out.surviving.contains(&i), "true inlier {} was removed", i);
        }
        assert!(out.surviving.len() < 40, "no outlier was removed");
        assert!(out.lower_bound >= 15);
        // The reported lower bound is the consensus of the reported rotation.
        assert_eq!(out.lower_bound, consensus_angular(&out.best_rotation, &corrs).len());
        let _ = truth;
    }

    #[test]
    fn gore_rotation_is_deterministic() {
        let mut rng = seeded_rng(41);
        let (mut corrs, _) = exact_instance(25, 41);
        for c in corrs.iter_mut().skip(10) {
            c.y = random_unit(&mut rng);
        }
        let a = gore_rotation(&corrs);
        let b = gore_rotation(&corrs);
        assert_eq!(a.surviving, b.surviving);
        assert_eq!(a.lower_bound, b.lower_bound);
        assert_eq!(a.per_k_upper_bounds, b.per_k_upper_bounds);
        assert_eq!(a.best_rotation, b.best_rotation);
    }

    #[test]
    fn gore_rotation_parallel_is_sound_on_inliers() {
        let mut rng = seeded_rng(43);
        let (mut corrs, _) = exact_instance(30, 43);
        for c in corrs.iter_mut().skip(12) {
            c.y = random_unit(&mut rng);
        }
        let out = gore_rotation_parallel(&corrs);
        for i in 0..12 {
            assert!(out.surviving.contains(&i));
        }
    }

    #[test]
    fn angular_form_handles_degenerate_norms() {
        let corrs = vec![
            Correspondence { x: v(0.0, 0.0, 0.0), y: v(0.1, 0.0, 0.0), index: 0 },
            Correspondence { x: v(0.0, 0.0, 0.0), y: v(3.0, 0.0, 0.0), index: 1 },
            Correspondence { x: v(2.0, 0.0, 0.0), y: v(0.0, 2.0, 0.0), index: 2 },
        ];
        let (ang, removed) = angular_form(&corrs, 0.5);
        assert_eq!(removed, vec![1]);
        assert_eq!(ang.len(), 2);
        assert_eq!(ang[0].epsilon, PI);
        assert!(ang[1].x.is_unit() && ang[1].y.is_unit());
    }
}

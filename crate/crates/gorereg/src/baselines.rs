//! Comparison methods: RANSAC with the adaptive stopping criterion and the
//! analytic least-squares model fits it samples with.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::float::Real;
use crate::geom::{RigidTransform, Rotation, Vec3};
use crate::rigid_gore::Correspondence;

#[derive(Debug, Error, PartialEq)]
pub enum BaselineError {
    #[error("degenerate sample: no well-defined model")]
    DegenerateSample,
    #[error("need at least {needed} correspondences, got {got}")]
    TooFewCorrespondences { needed: usize, got: usize },
}

/// Which model RANSAC estimates from minimal subsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Pure rotation; minimal subset size m = 2.
    Rotation,
    /// Rigid transform; minimal subset size m = 3.
    Rigid,
}

impl ModelKind {
    pub fn minimal_size(&self) -> usize {
        match self {
            ModelKind::Rotation => 2,
            ModelKind::Rigid => 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RansacConfig<S> {
    /// Confidence ρ of hitting one all-inlier minimal subset.
    pub rho: S,
    pub model: ModelKind,
    pub max_trials: usize,
    pub seed: u64,
}

impl<S: Real> RansacConfig<S> {
    pub fn new(model: ModelKind, seed: u64) -> Self {
        Self {
            rho: S::c(0.99),
            model,
            max_trials: 1_000_000,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum FitModel<S> {
    Rotation(Rotation<S>),
    Rigid(RigidTransform<S>),
}

impl<S: Real> FitModel<S> {
    /// Residual ‖f(x) − y‖ of the model on one pair.
    pub fn residual(&self, c: &Correspondence<S>) -> S {
        match self {
            FitModel::Rotation(r) => (r.apply(&c.x) - c.y).norm(),
            FitModel::Rigid(t) => (t.apply(&c.x) - c.y).norm(),
        }
    }

    pub fn as_rigid(&self) -> RigidTransform<S> {
        match self {
            FitModel::Rotation(r) => RigidTransform::new(*r, Vec3::zero()),
            FitModel::Rigid(t) => *t,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RansacResult<S> {
    pub model: FitModel<S>,
    pub consensus: Vec<usize>,
    pub trials_used: usize,
}

/// Number of minimal-subset draws needed to hit one all-inlier subset with
/// probability ρ at outlier rate η: ⌈log(1−ρ) / log(1−(1−η)^m)⌉, clamped to
/// [1, cap]. η so close to 1 that no draw can succeed returns the cap.
pub fn required_trials<S: Real>(eta: S, m: u32, rho: S, cap: usize) -> usize {
    let inlier_rate = (S::one() - eta).max(S::zero());
    let p_good = inlier_rate.powi(m as i32);
    if p_good >= S::one() {
        return 1;
    }
    if p_good <= S::zero() {
        return cap;
    }
    let denom = (S::one() - p_good).ln();
    if denom >= S::zero() {
        return cap;
    }
    let trials = ((S::one() - rho).ln() / denom).ceil();
    let trials = trials.to_f64().unwrap_or(f64::INFINITY);
    if !trials.is_finite() || trials >= cap as f64 {
        cap
    } else {
        (trials as usize).max(1)
    }
}

/// Jacobi eigensolver for a symmetric 4x4 matrix; returns the eigenvector
/// of the largest eigenvalue.
fn max_eigenvector_sym4<S: Real>(mut a: [[S; 4]; 4]) -> [S; 4] {
    let mut v = [[S::zero(); 4]; 4];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = S::one();
    }
    for _sweep in 0..50 {
        let mut off = S::zero();
        for p in 0..4 {
            for q in (p + 1)..4 {
                off += a[p][q] * a[p][q];
            }
        }
        if off <= S::c(1e-30) {
            break;
        }
        for p in 0..3 {
            for q in (p + 1)..4 {
                if a[p][q].abs() <= S::c(1e-300) {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (S::c(2.0) * a[p][q]);
                let t = {
                    let sign = if theta >= S::zero() { S::one() } else { -S::one() };
                    sign / (theta.abs() + (theta * theta + S::one()).sqrt())
                };
                let c = S::one() / (t * t + S::one()).sqrt();
                let s = t * c;
                for i in 0..4 {
                    let aip = a[i][p];
                    let aiq = a[i][q];
                    a[i][p] = c * aip - s * aiq;
                    a[i][q] = s * aip + c * aiq;
                }
                for j in 0..4 {
                    let apj = a[p][j];
                    let aqj = a[q][j];
                    a[p][j] = c * apj - s * aqj;
                    a[q][j] = s * apj + c * aqj;
                }
                for i in 0..4 {
                    let vip = v[i][p];
                    let viq = v[i][q];
                    v[i][p] = c * vip - s * viq;
                    v[i][q] = s * vip + c * viq;
                }
            }
        }
    }
    let mut best = 0;
    for i in 1..4 {
        if a[i][i] > a[best][best] {
            best = i;
        }
    }
    [v[0][best], v[1][best], v[2][best], v[3][best]]
}

/// Orthogonal-Procrustes optimum: the rotation maximizing Σ ⟨R x_i, y_i⟩,
/// solved through the unit quaternion that is the principal eigenvector of
/// the Horn matrix. Equivalent to the SVD solution with determinant
/// correction, and always a proper rotation.
pub fn fit_rotation_least_squares<S: Real>(
    corrs: &[Correspondence<S>],
) -> Result<Rotation<S>, BaselineError> {
    if corrs.is_empty() {
        return Err(BaselineError::TooFewCorrespondences { needed: 1, got: 0 });
    }
    // Cross-covariance M = Σ x yᵀ.
    let mut m = [[S::zero(); 3]; 3];
    let mut scale = S::zero();
    for c in corrs {
        let x = [c.x.x, c.x.y, c.x.z];
        let y = [c.y.x, c.y.y, c.y.z];
        for (i, xi) in x.iter().enumerate() {
            for (j, yj) in y.iter().enumerate() {
                m[i][j] += *xi * *yj;
            }
        }
        scale += c.x.norm() * c.y.norm();
    }
    let mut frob = S::zero();
    for row in &m {
        for e in row {
            frob += *e * *e;
        }
    }
    if frob.sqrt() <= scale * S::c(1e-12) + S::c(1e-300) {
        // No directional information at all: every rotation ties.
        return Err(BaselineError::DegenerateSample);
    }

    let (sxx, sxy, sxz) = (m[0][0], m[0][1], m[0][2]);
    let (syx, syy, syz) = (m[1][0], m[1][1], m[1][2]);
    let (szx, szy, szz) = (m[2][0], m[2][1], m[2][2]);
    let n = [
        [sxx + syy + szz, syz - szy, szx - sxz, sxy - syx],
        [syz - szy, sxx - syy - szz, sxy + syx, szx + sxz],
        [szx - sxz, sxy + syx, -sxx + syy - szz, syz + szy],
        [sxy - syx, szx + sxz, syz + szy, -sxx - syy + szz],
    ];
    let q = max_eigenvector_sym4(n);
    Rotation::from_quaternion(q[0], q[1], q[2], q[3])
        .map_err(|_| BaselineError::DegenerateSample)
}

/// Analytic rigid fit: centroid subtraction, rotation fit on the centered
/// pairs, then t = ȳ − R x̄. Collinear source points are rejected.
pub fn fit_rigid_least_squares<S: Real>(
    corrs: &[Correspondence<S>],
) -> Result<RigidTransform<S>, BaselineError> {
    if corrs.len() < 3 {
        return Err(BaselineError::TooFewCorrespondences { needed: 3, got: corrs.len() });
    }
    let inv_n = S::one() / S::from_usize(corrs.len()).unwrap();
    let mut cx = Vec3::zero();
    let mut cy = Vec3::zero();
    for c in corrs {
        cx = cx + c.x;
        cy = cy + c.y;
    }
    let cx = cx.scale(inv_n);
    let cy = cy.scale(inv_n);
    let centered: Vec<Correspondence<S>> = corrs
        .iter()
        .map(|c| Correspondence { x: c.x - cx, y: c.y - cy, index: c.index })
        .collect();
    if collinear(&centered) {
        return Err(BaselineError::DegenerateSample);
    }
    let rotation = fit_rotation_least_squares(&centered)?;
    let translation = cy - rotation.apply(&cx);
    Ok(RigidTransform::new(rotation, translation))
}

/// True when the centered source points span at most a line.
fn collinear<S: Real>(centered: &[Correspondence<S>]) -> bool {
    let mut anchor: Option<Vec3<S>> = None;
    let mut max_norm = S::zero();
    for c in centered {
        let n = c.x.norm();
        if n > max_norm {
            max_norm = n;
            anchor = Some(c.x);
        }
    }
    let Some(anchor) = anchor else { return true };
    if max_norm <= S::c(1e-12) {
        return true;
    }
    centered
        .iter()
        .all(|c| c.x.cross(&anchor).norm() <= S::c(1e-9) * c.x.norm() * max_norm + S::c(1e-300))
}

fn minimal_sample_degenerate<S: Real>(sample: &[Correspondence<S>], model: ModelKind) -> bool {
    match model {
        ModelKind::Rotation => {
            let tol = S::c(1e-12);
            let (a, b) = (&sample[0], &sample[1]);
            a.x.norm() <= tol
                || b.x.norm() <= tol
                || a.y.norm() <= tol
                || b.y.norm() <= tol
                || a.x.cross(&b.x).norm() <= tol * a.x.norm() * b.x.norm()
                || a.y.cross(&b.y).norm() <= tol * a.y.norm() * b.y.norm()
        }
        ModelKind::Rigid => {
            let e1 = sample[1].x - sample[0].x;
            let e2 = sample[2].x - sample[0].x;
            e1.cross(&e2).norm() <= S::c(1e-12) * e1.norm() * e2.norm() + S::c(1e-300)
        }
    }
}

/// RANSAC over minimal subsets with the adaptive stopping rule.
///
/// Consensus uses the Euclidean test at ξ for both model kinds (the
/// rotation model tests ‖Rx_i − y_i‖ ≤ ξ on the raw, un-normalized
/// vectors). Deterministic for a fixed seed. Degenerate samples are
/// redrawn without consuming the trial budget.
pub fn ransac<S: Real>(
    corrs: &[Correspondence<S>],
    xi: S,
    cfg: &RansacConfig<S>,
) -> Result<RansacResult<S>, BaselineError> {
    let m = cfg.model.minimal_size();
    if corrs.len() < m {
        return Err(BaselineError::TooFewCorrespondences { needed: m, got: corrs.len() });
    }
    let n = corrs.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best_model: Option<FitModel<S>> = None;
    let mut best_consensus: Vec<usize> = Vec::new();
    // Near-worst-case initialization until the first consensus lands.
    let mut required = required_trials(S::c(0.999), m as u32, cfg.rho, cfg.max_trials);

    let mut trials = 0usize;
    let mut degenerate_streak = 0usize;
    let degenerate_cap = 10_000 + 10 * n;
    let mut scratch: Vec<usize> = (0..n).collect();
    let mut sample: Vec<Correspondence<S>> = Vec::with_capacity(m);

    while trials < required.min(cfg.max_trials) {
        // Partial Fisher-Yates: m distinct indices.
        sample.clear();
        for j in 0..m {
            let pick = j + rng.random_range(0..(n - j));
            scratch.swap(j, pick);
            sample.push(corrs[scratch[j]]);
        }
        if minimal_sample_degenerate(&sample, cfg.model) {
            degenerate_streak += 1;
            if degenerate_streak > degenerate_cap {
                break; // all-degenerate input; return best so far
            }
            continue;
        }
        degenerate_streak = 0;
        let model = match cfg.model {
            ModelKind::Rotation => fit_rotation_least_squares(&sample).map(FitModel::Rotation),
            ModelKind::Rigid => fit_rigid_least_squares(&sample).map(FitModel::Rigid),
        };
        let Ok(model) = model else {
            continue;
        };
        trials += 1;
        let consensus: Vec<usize> = corrs
            .iter()
            .filter(|c| model.residual(c) <= xi)
            .map(|c| c.index)
            .collect();
        if consensus.len() > best_consensus.len() {
            let eta_hat = S::one()
                - S::from_usize(consensus.len()).unwrap() / S::from_usize(n).unwrap();
            required = required_trials(eta_hat, m as u32, cfg.rho, cfg.max_trials);
            best_consensus = consensus;
            best_model = Some(model);
        }
    }

    let model = match best_model {
        Some(m) => m,
        None => match cfg.model {
            // Nothing non-degenerate was ever fit; fall back to identity.
            ModelKind::Rotation => FitModel::Rotation(Rotation::identity()),
            ModelKind::Rigid => FitModel::Rigid(RigidTransform::identity()),
        },
    };
    if best_consensus.is_empty() {
        best_consensus = corrs
            .iter()
            .filter(|c| model.residual(c) <= xi)
            .map(|c| c.index)
            .collect();
    }
    Ok(RansacResult { model, consensus: best_consensus, trials_used: trials })
}

//! Synthetic instance generation, correspondence file I/O and evaluation
//! metrics.

pub mod io;
pub mod metrics;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::float::Real;
use crate::geom::{spherical_point, RigidTransform, Rotation, Vec3};
use crate::rigid_gore::{Correspondence, CorrespondenceSet};

pub use metrics::{evaluate, MetricsReport};

/// Which registration problem an instance is generated for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Rotation,
    Rigid,
}

/// How inlier noise is drawn: on the sphere of radius ξ (the default), or
/// uniformly inside the ball of radius ξ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseMode {
    Sphere,
    Ball,
}

#[derive(Debug, Clone)]
pub struct SyntheticSpec<S> {
    pub n: usize,
    pub eta: S,
    pub xi: S,
    pub ball_radius: S,
    pub mode: ProblemKind,
    pub seed: u64,
    pub noise: NoiseMode,
}

impl<S: Real> SyntheticSpec<S> {
    pub fn new(mode: ProblemKind, n: usize, eta: S, seed: u64) -> Self {
        Self {
            n,
            eta,
            xi: S::c(0.5),
            ball_radius: S::c(100.0),
            mode,
            seed,
            noise: NoiseMode::Sphere,
        }
    }
}

/// A generated problem instance with its ground truth.
#[derive(Debug, Clone)]
pub struct Instance<S> {
    pub correspondences: CorrespondenceSet<S>,
    pub ground_truth: RigidTransform<S>,
    pub planted_inliers: Vec<usize>,
    pub xi: S,
}

/// Uniform unit vector.
pub fn sample_unit_vector<S: Real>(rng: &mut impl Rng) -> Vec3<S> {
    let z = S::c(rng.random_range(-1.0..=1.0f64));
    let az = S::c(rng.random_range(-std::f64::consts::PI..std::f64::consts::PI));
    let r = (S::one() - z * z).max(S::zero()).sqrt();
    let (s, c) = az.sin_cos();
    Vec3::new(r * c, r * s, z)
}

/// Uniform point in the solid ball of the given radius.
pub fn sample_in_ball<S: Real>(rng: &mut impl Rng, radius: S) -> Vec3<S> {
    let dir = sample_unit_vector::<S>(rng);
    let u = S::c(rng.random::<f64>());
    dir.scale(radius * u.powf(S::c(1.0 / 3.0)))
}

/// Uniform rotation (Shoemake's subgroup method).
pub fn sample_rotation<S: Real>(rng: &mut impl Rng) -> Rotation<S> {
    let u1 = rng.random::<f64>();
    let u2 = rng.random::<f64>() * std::f64::consts::TAU;
    let u3 = rng.random::<f64>() * std::f64::consts::TAU;
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    Rotation::from_quaternion(
        S::c(a * u2.sin()),
        S::c(a * u2.cos()),
        S::c(b * u3.sin()),
        S::c(b * u3.cos()),
    )
    .expect("unit quaternion")
}

/// Uniform point in the spherical cap of the given angular radius.
pub fn sample_in_cap<S: Real>(rng: &mut impl Rng, center: &Vec3<S>, radius: S) -> Vec3<S> {
    let cos_min = radius.min(S::PI()).cos();
    let c = cos_min + S::c(rng.random::<f64>()) * (S::one() - cos_min);
    let inc = c.min(S::one()).max(-S::one()).acos();
    let az = S::c(rng.random_range(-std::f64::consts::PI..std::f64::consts::PI));
    spherical_point(az, inc, center)
}

/// Generate a synthetic instance: points uniform in a solid ball, rotated
/// (and translated, in rigid mode) by a random ground truth, inliers
/// perturbed by noise of magnitude ξ, and ⌊ηN⌋ pairs turned into outliers
/// by randomly re-rotating x_i. Deterministic per seed.
pub fn generate<S: Real>(spec: &SyntheticSpec<S>) -> Instance<S> {
    assert!(spec.n >= 1, "n must be at least 1");
    assert!(
        spec.eta >= S::zero() && spec.eta < S::one(),
        "eta must be in [0, 1)"
    );
    assert!(spec.xi > S::zero(), "xi must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let rotation = sample_rotation::<S>(&mut rng);
    let translation = match spec.mode {
        ProblemKind::Rotation => Vec3::zero(),
        ProblemKind::Rigid => {
            let half = spec.ball_radius * S::c(0.5);
            Vec3::new(
                S::c(rng.random_range(-1.0..=1.0f64)) * half,
                S::c(rng.random_range(-1.0..=1.0f64)) * half,
                S::c(rng.random_range(-1.0..=1.0f64)) * half,
            )
        }
    };
    let truth = RigidTransform::new(rotation, translation);

    let sample_pair = |rng: &mut ChaCha8Rng| -> (Vec3<S>, Vec3<S>) {
        let x = sample_in_ball::<S>(rng, spec.ball_radius);
        let mut magnitude = match spec.noise {
            NoiseMode::Sphere => spec.xi,
            NoiseMode::Ball => spec.xi * S::c(rng.random::<f64>()).powf(S::c(1.0 / 3.0)),
        };
        let dir = sample_unit_vector::<S>(rng);
        let target = truth.apply(&x);
        let mut y = target + dir.scale(magnitude);
        // The boundary must be inclusive under the same floating point test
        // the consensus uses; shave the magnitude until it is.
        let shrink = S::one() - S::epsilon() * S::c(8.0);
        while (y - target).norm() > spec.xi {
            magnitude = magnitude * shrink;
            y = target + dir.scale(magnitude);
        }
        (x, y)
    };

    let mut xs: Vec<Vec3<S>> = Vec::with_capacity(spec.n);
    let mut ys: Vec<Vec3<S>> = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let (x, y) = sample_pair(&mut rng);
        xs.push(x);
        ys.push(y);
    }

    // Pick ⌊ηN⌋ outlier positions without replacement.
    let n_out = (spec.eta * S::from_usize(spec.n).unwrap())
        .floor()
        .to_usize()
        .unwrap_or(0)
        .min(spec.n);
    let mut order: Vec<usize> = (0..spec.n).collect();
    for j in 0..n_out {
        let pick = j + rng.random_range(0..(spec.n - j));
        order.swap(j, pick);
    }
    let mut outliers: Vec<usize> = order[..n_out].to_vec();
    outliers.sort_unstable();

    for &i in &outliers {
        let mut accepted = false;
        for _attempt in 0..1000 {
            let candidate = sample_rotation::<S>(&mut rng).apply(&xs[i]);
            let norm_ok = match spec.mode {
                ProblemKind::Rotation => (candidate.norm() - ys[i].norm()).abs() <= spec.xi,
                ProblemKind::Rigid => true,
            };
            if norm_ok {
                xs[i] = candidate;
                accepted = true;
                break;
            }
        }
        if !accepted {
            // Start the point over from scratch.
            let (x, y) = sample_pair(&mut rng);
            xs[i] = sample_rotation::<S>(&mut rng).apply(&x);
            ys[i] = y;
        }
    }

    let correspondences = xs
        .into_iter()
        .zip(ys)
        .enumerate()
        .map(|(index, (x, y))| Correspondence { x, y, index })
        .collect();
    let planted_inliers = (0..spec.n).filter(|i| !outliers.contains(i)).collect();

    Instance {
        correspondences,
        ground_truth: truth,
        planted_inliers,
        xi: spec.xi,
    }
}

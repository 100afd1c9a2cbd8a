//! Guaranteed outlier removal (GORE) for correspondence-based point cloud
//! registration, together with the solvers needed around it: an exact
//! branch-and-bound rotation search, RANSAC with adaptive stopping,
//! least-squares fitting, a synthetic instance generator and evaluation
//! metrics.
//!
//! The preprocessing entry points are [`rot_gore::gore_rotation`] (3-DoF
//! rotational alignment) and [`rigid_gore::gore_rigid`] (6-DoF rigid
//! alignment). Both reduce a correspondence set to a subset that provably
//! still contains every member of the globally optimal consensus set, and
//! return a deterministic suboptimal transform along the way.
//!
//! All numeric kernels are generic over the scalar type via [`float::Real`]
//! (f32 or f64); the aliases at the crate root fix f64, which is what the
//! CLI and the test-suite use.

pub mod baselines;
pub mod bnb;
pub mod data;
pub mod float;
pub mod geom;
pub mod rigid_gore;
pub mod rot_gore;

pub use float::Real;

/// Double-precision aliases for the core types.
pub type Vec3 = geom::Vec3<f64>;
pub type Rotation = geom::Rotation<f64>;
pub type RigidTransform = geom::RigidTransform<f64>;
pub type SphericalCap = geom::SphericalCap<f64>;
pub type Correspondence = rigid_gore::Correspondence<f64>;
pub type CorrespondenceSet = Vec<Correspondence>;
pub type AngularCorrespondence = rot_gore::AngularCorrespondence<f64>;
pub type AngleInterval = rot_gore::interval::AngleInterval<f64>;
pub type IntervalSet = rot_gore::interval::IntervalSet<f64>;

//! Rotation algebra and spherical geometry primitives.
//!
//! Everything here operates on plain 3-vectors and 3x3 rotation matrices;
//! the angular metric `∠(u, v)` and the geodesic rotation distance are the
//! two workhorses of the consensus machinery built on top.

use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

use crate::float::Real;

#[derive(Debug, Error, PartialEq)]
pub enum GeomError {
    #[error("expected a unit vector, got norm {norm}")]
    NotUnit { norm: f64 },
    #[error("zero-length vector where a direction is required")]
    ZeroVector,
    #[error("degenerate configuration: {0}")]
    Degenerate(&'static str),
}

/// A 3-vector. Scene units are whatever the input data uses; the rotational
/// pipeline normalizes to unit norm before doing spherical geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec3<S> {
    pub x: S,
    pub y: S,
    pub z: S,
}

impl<S: Real> Vec3<S> {
    pub fn new(x: S, y: S, z: S) -> Self {
        Self { x, y, z }
    }

    pub fn zero() -> Self {
        Self::new(S::zero(), S::zero(), S::zero())
    }

    pub fn dot(&self, other: &Self) -> S {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(&self, other: &Self) -> Self {
        Self::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm_squared(&self) -> S {
        self.dot(self)
    }

    pub fn norm(&self) -> S {
        self.norm_squared().sqrt()
    }

    pub fn scale(&self, s: S) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    /// Unit vector in the same direction, or an error for (near-)zero input.
    pub fn normalized(&self) -> Result<Self, GeomError> {
        let n = self.norm();
        if n <= S::zero() || !n.is_finite() {
            return Err(GeomError::ZeroVector);
        }
        Ok(self.scale(S::one() / n))
    }

    pub fn is_unit(&self) -> bool {
        (self.norm() - S::one()).abs() <= S::geom_tol()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl<S: Real> Add for Vec3<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl<S: Real> Sub for Vec3<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl<S: Real> Neg for Vec3<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<S: Real> Mul<S> for Vec3<S> {
    type Output = Self;
    fn mul(self, rhs: S) -> Self {
        self.scale(rhs)
    }
}

/// Angle between two nonzero vectors, in [0, π].
///
/// Computed as atan2(‖u×v‖, u·v); unlike arccos of the normalized dot
/// product this stays accurate for nearly parallel and nearly antipodal
/// inputs.
pub fn angle_between<S: Real>(u: &Vec3<S>, v: &Vec3<S>) -> Result<S, GeomError> {
    if u.norm_squared() <= S::zero() || v.norm_squared() <= S::zero() {
        return Err(GeomError::ZeroVector);
    }
    Ok(u.cross(v).norm().atan2(u.dot(v)))
}

/// An element of SO(3), stored as a row-major 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation<S> {
    m: [[S; 3]; 3],
}

impl<S: Real> Rotation<S> {
    pub fn identity() -> Self {
        let o = S::one();
        let z = S::zero();
        Self {
            m: [[o, z, z], [z, o, z], [z, z, o]],
        }
    }

    pub fn from_matrix_unchecked(m: [[S; 3]; 3]) -> Self {
        Self { m }
    }

    pub fn matrix(&self) -> &[[S; 3]; 3] {
        &self.m
    }

    /// Rodrigues formula. The axis must be unit length (within tolerance).
    pub fn from_axis_angle(axis: &Vec3<S>, angle: S) -> Result<Self, GeomError> {
        if !axis.is_unit() {
            return Err(GeomError::NotUnit {
                norm: axis.norm().to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self::from_unit_axis_angle(axis, angle))
    }

    /// Rodrigues formula without the unit check; caller guarantees ‖axis‖=1.
    pub(crate) fn from_unit_axis_angle(axis: &Vec3<S>, angle: S) -> Self {
        let (s, c) = angle.sin_cos();
        let t = S::one() - c;
        let (ax, ay, az) = (axis.x, axis.y, axis.z);
        Self {
            m: [
                [t * ax * ax + c, t * ax * ay - s * az, t * ax * az + s * ay],
                [t * ax * ay + s * az, t * ay * ay + c, t * ay * az - s * ax],
                [t * ax * az - s * ay, t * ay * az + s * ax, t * az * az + c],
            ],
        }
    }

    /// Exponential map of a scaled-axis vector (angle = ‖v‖).
    pub fn from_scaled_axis(v: &Vec3<S>) -> Self {
        let angle = v.norm();
        if angle <= S::zero() {
            return Self::identity();
        }
        Self::from_unit_axis_angle(&v.scale(S::one() / angle), angle)
    }

    /// Rotation from a (not necessarily normalized) quaternion (w, x, y, z).
    pub fn from_quaternion(w: S, x: S, y: S, z: S) -> Result<Self, GeomError> {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if n <= S::zero() || !n.is_finite() {
            return Err(GeomError::ZeroVector);
        }
        let (w, x, y, z) = (w / n, x / n, y / n, z / n);
        let two = S::c(2.0);
        Ok(Self {
            m: [
                [
                    S::one() - two * (y * y + z * z),
                    two * (x * y - w * z),
                    two * (x * z + w * y),
                ],
                [
                    two * (x * y + w * z),
                    S::one() - two * (x * x + z * z),
                    two * (y * z - w * x),
                ],
                [
                    two * (x * z - w * y),
                    two * (y * z + w * x),
                    S::one() - two * (x * x + y * y),
                ],
            ],
        })
    }

    pub fn apply(&self, v: &Vec3<S>) -> Vec3<S> {
        Vec3::new(
            self.m[0][0] * v.x + self.m[0][1] * v.y + self.m[0][2] * v.z,
            self.m[1][0] * v.x + self.m[1][1] * v.y + self.m[1][2] * v.z,
            self.m[2][0] * v.x + self.m[2][1] * v.y + self.m[2][2] * v.z,
        )
    }

    /// Composition: (self ∘ other) v = self (other v).
    pub fn compose(&self, other: &Self) -> Self {
        let mut m = [[S::zero(); 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = self.m[i][0] * other.m[0][j]
                    + self.m[i][1] * other.m[1][j]
                    + self.m[i][2] * other.m[2][j];
            }
        }
        Self { m }
    }

    pub fn transpose(&self) -> Self {
        let m = &self.m;
        Self {
            m: [
                [m[0][0], m[1][0], m[2][0]],
                [m[0][1], m[1][1], m[2][1]],
                [m[0][2], m[1][2], m[2][2]],
            ],
        }
    }

    pub fn inverse(&self) -> Self {
        self.transpose()
    }

    pub fn trace(&self) -> S {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    pub fn determinant(&self) -> S {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Rotation angle d∠(R, I) in [0, π].
    pub fn rotation_angle(&self) -> S {
        // sin from the skew part, cos from the trace: atan2 keeps this
        // accurate at both ends of [0, π].
        let vx = (self.m[2][1] - self.m[1][2]) * S::c(0.5);
        let vy = (self.m[0][2] - self.m[2][0]) * S::c(0.5);
        let vz = (self.m[1][0] - self.m[0][1]) * S::c(0.5);
        let s = (vx * vx + vy * vy + vz * vz).sqrt();
        let c = (self.trace() - S::one()) * S::c(0.5);
        s.atan2(c)
    }

    /// Logarithm to (unit axis, angle in [0, π]). The axis of the identity
    /// rotation is (0,0,1) by convention.
    pub fn log(&self) -> (Vec3<S>, S) {
        let angle = self.rotation_angle();
        let half = S::c(0.5);
        let v = Vec3::new(
            (self.m[2][1] - self.m[1][2]) * half,
            (self.m[0][2] - self.m[2][0]) * half,
            (self.m[1][0] - self.m[0][1]) * half,
        );
        let sn = v.norm();
        if angle < S::c(1e-7) {
            return (Vec3::new(S::zero(), S::zero(), S::one()), angle);
        }
        if S::PI() - angle < S::c(1e-5) {
            // Near π the skew part vanishes; recover the axis from the
            // symmetric part R = I + 2 sin²(θ/2) (aaᵀ - I).
            let t = |i: usize| {
                let d = (self.m[i][i] + S::one()) * half;
                d.max(S::zero()).sqrt()
            };
            let mut a = Vec3::new(t(0), t(1), t(2));
            // Fix signs using the largest component.
            if a.x >= a.y && a.x >= a.z {
                if self.m[0][1] + self.m[1][0] < S::zero() {
                    a.y = -a.y;
                }
                if self.m[0][2] + self.m[2][0] < S::zero() {
                    a.z = -a.z;
                }
            } else if a.y >= a.z {
                if self.m[0][1] + self.m[1][0] < S::zero() {
                    a.x = -a.x;
                }
                if self.m[1][2] + self.m[2][1] < S::zero() {
                    a.z = -a.z;
                }
            } else {
                if self.m[0][2] + self.m[2][0] < S::zero() {
                    a.x = -a.x;
                }
                if self.m[1][2] + self.m[2][1] < S::zero() {
                    a.y = -a.y;
                }
            }
            let a = a.normalized().unwrap_or(Vec3::new(S::zero(), S::zero(), S::one()));
            // Keep the skew part's orientation when it is still meaningful.
            let a = if sn > S::zero() && v.dot(&a) < S::zero() { -a } else { a };
            return (a, angle);
        }
        (v.scale(S::one() / sn), angle)
    }

    /// True within tolerance of an orthonormal, determinant +1 matrix.
    pub fn is_valid(&self) -> bool {
        let rt = self.transpose();
        let p = self.compose(&rt);
        let id = Self::identity();
        let mut max_dev = S::zero();
        for i in 0..3 {
            for j in 0..3 {
                let d = (p.m[i][j] - id.m[i][j]).abs();
                if d > max_dev {
                    max_dev = d;
                }
            }
        }
        max_dev <= S::geom_tol() && (self.determinant() - S::one()).abs() <= S::geom_tol()
    }
}

/// Geodesic distance d∠(R1, R2) = rotation angle of R1 R2ᵀ, in [0, π].
pub fn rotation_distance<S: Real>(r1: &Rotation<S>, r2: &Rotation<S>) -> S {
    r1.compose(&r2.transpose()).rotation_angle()
}

/// The rotation mapping unit x onto unit y with the minimum geodesic motion
/// (axis orthogonal to both, angle = ∠(x, y)).
///
/// For antipodal inputs the axis is the normalized projection of (0,0,1)
/// onto the plane orthogonal to x, falling back to (0,1,0) when x is nearly
/// parallel to (0,0,1).
pub fn minimal_geodesic_rotation<S: Real>(x: &Vec3<S>, y: &Vec3<S>) -> Rotation<S> {
    let angle = angle_between(x, y).unwrap_or(S::zero());
    if angle <= S::zero() {
        return Rotation::identity();
    }
    let c = x.cross(y);
    let cn = c.norm();
    if cn > S::c(1e-9) {
        return Rotation::from_unit_axis_angle(&c.scale(S::one() / cn), angle);
    }
    // Antipodal (or numerically so): pick a deterministic orthogonal axis.
    let axis = orthogonal_direction(x);
    Rotation::from_unit_axis_angle(&axis, S::PI())
}

/// Deterministic unit vector orthogonal to v: project (0,0,1) onto v's
/// orthogonal plane, falling back to (0,1,0) when nearly parallel.
pub(crate) fn orthogonal_direction<S: Real>(v: &Vec3<S>) -> Vec3<S> {
    let vu = v.normalized().expect("nonzero direction");
    for cand in [
        Vec3::new(S::zero(), S::zero(), S::one()),
        Vec3::new(S::zero(), S::one(), S::zero()),
    ] {
        let proj = cand - vu.scale(vu.dot(&cand));
        let n = proj.norm();
        if n > S::c(1e-6) {
            return proj.scale(S::one() / n);
        }
    }
    unreachable!("no vector is nearly parallel to both fallback directions")
}

/// Right-handed tangent frame (e1, e2) at a unit pole; e1 × e2 = pole.
/// Built from the same fallback rule as [`minimal_geodesic_rotation`] so
/// azimuths are comparable everywhere in the crate.
pub fn tangent_frame<S: Real>(pole: &Vec3<S>) -> (Vec3<S>, Vec3<S>) {
    let e1 = orthogonal_direction(pole);
    let e2 = pole.cross(&e1);
    (e1, e2)
}

/// Spherical coordinates of unit p with respect to a unit pole:
/// (azimuth in (−π, π], inclination in [0, π]). The azimuth of the pole
/// itself is 0 by convention. A positive rotation about the pole
/// (right-hand rule) increases the azimuth.
pub fn spherical_coords<S: Real>(p: &Vec3<S>, pole: &Vec3<S>) -> (S, S) {
    let inclination = angle_between(p, pole).expect("unit inputs");
    let (e1, e2) = tangent_frame(pole);
    let a = p.dot(&e1);
    let b = p.dot(&e2);
    if a == S::zero() && b == S::zero() {
        return (S::zero(), inclination);
    }
    (b.atan2(a), inclination)
}

/// Inverse of [`spherical_coords`]: the unit vector at the given azimuth and
/// inclination in the pole's tangent frame.
pub fn spherical_point<S: Real>(azimuth: S, inclination: S, pole: &Vec3<S>) -> Vec3<S> {
    let (e1, e2) = tangent_frame(pole);
    let (si, ci) = inclination.sin_cos();
    let (sa, ca) = azimuth.sin_cos();
    e1.scale(si * ca) + e2.scale(si * sa) + pole.scale(ci)
}

/// Wrap an angle into (−π, π].
pub fn wrap_angle<S: Real>(a: S) -> S {
    let two_pi = S::PI() * S::c(2.0);
    let mut a = a % two_pi;
    if a <= -S::PI() {
        a += two_pi;
    } else if a > S::PI() {
        a -= two_pi;
    }
    a
}

/// A rigid transform x ↦ Rx + t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform<S> {
    pub rotation: Rotation<S>,
    pub translation: Vec3<S>,
}

impl<S: Real> RigidTransform<S> {
    pub fn new(rotation: Rotation<S>, translation: Vec3<S>) -> Self {
        Self { rotation, translation }
    }

    pub fn identity() -> Self {
        Self::new(Rotation::identity(), Vec3::zero())
    }

    pub fn apply(&self, v: &Vec3<S>) -> Vec3<S> {
        self.rotation.apply(v) + self.translation
    }

    /// Composition: (self ∘ other) x = self(other(x)).
    pub fn compose(&self, other: &Self) -> Self {
        Self::new(
            self.rotation.compose(&other.rotation),
            self.rotation.apply(&other.translation) + self.translation,
        )
    }
}

/// Spherical cap S_r(c): unit vectors within angular distance r of c.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalCap<S> {
    pub center: Vec3<S>,
    pub radius: S,
}

impl<S: Real> SphericalCap<S> {
    pub fn new(center: Vec3<S>, radius: S) -> Self {
        Self { center, radius }
    }

    /// Membership for a unit vector p: ∠(p, center) ≤ radius (non-strict).
    pub fn contains(&self, p: &Vec3<S>) -> bool {
        match angle_between(p, &self.center) {
            Ok(a) => a <= self.radius,
            Err(_) => false,
        }
    }
}

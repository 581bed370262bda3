//! SO(3) / so(3) primitives: rotations as 3×3 matrices, tangents as
//! axis-angle 3-vectors, and singularity-safe Exp/Log maps between them.
//!
//! Conventions:
//!
//! - Rotations are stored as matrices because every downstream update is a
//!   matrix product; quaternions appear only inside uniform sampling and in
//!   the serialization helpers.
//! - Tangent vectors are rotation vectors (axis × angle, radians). Canonical
//!   logarithms satisfy `‖ω‖ ≤ π`; at exactly π, where `ω` and `−ω` describe
//!   the same rotation, the representative whose first nonzero component is
//!   positive is returned so results are deterministic.
//! - Perturbations compose on the right: `X · Exp(v)` moves `X` by the
//!   tangent `v`. All gradients elsewhere in the crate live in this right
//!   tangent space.
//!
//! Numerical branches: `Exp` switches to a second-order Taylor expansion of
//! the Rodrigues coefficients below 1e-4 rad, and `Log` does the same for its
//! axis factor; above π − 1e-4 the `Log` axis is recovered from the diagonal
//! of `(R + Rᵀ)/2`, which stays well conditioned while the antisymmetric part
//! vanishes. Long composition chains are guarded by a polar
//! re-orthonormalization that triggers once the orthonormality residual of a
//! product exceeds 1e-9.

use nalgebra::{Matrix3, Quaternion, UnitQuaternion, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

/// Orthonormality drift above which a composed product is re-orthonormalized.
pub const ORTHONORMALITY_DRIFT: f64 = 1e-9;
/// Orthonormality residual beyond which a matrix is rejected as input.
pub const ORTHONORMALITY_REJECT: f64 = 1e-6;
/// Angle below which Taylor expansions replace the closed-form coefficients.
const SMALL_ANGLE: f64 = 1e-4;
/// Distance from π above which the Log axis is taken from the symmetric part.
const NEAR_PI: f64 = 1e-4;

/// An element of SO(3): a 3×3 orthonormal matrix with determinant +1.
///
/// Values constructed through this crate satisfy `‖RᵀR − I‖_F ≤ 1e-9` and
/// `|det R − 1| ≤ 1e-9`. [`Rotation::from_matrix`] accepts input with up to
/// 1e-6 residual and cleans it up; anything worse is rejected.
#[derive(Clone, Debug, PartialEq)]
pub struct Rotation {
    mat: Matrix3<f64>,
}

/// An element of so(3) as a rotation vector (axis × angle, radians).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tangent {
    vec: Vector3<f64>,
}

impl Rotation {
    pub fn identity() -> Self {
        Rotation {
            mat: Matrix3::identity(),
        }
    }

    /// Validates and wraps a matrix.
    ///
    /// Accepts orthonormality residuals up to 1e-6 (re-orthonormalizing when
    /// the stored invariant of 1e-9 would otherwise be violated); rejects
    /// anything worse, as well as reflections and non-finite entries.
    pub fn from_matrix(mat: &Matrix3<f64>) -> Result<Self> {
        if mat.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "rotation matrix entries must be finite".into(),
            ));
        }
        let residual = orthonormality_residual(mat);
        if residual > ORTHONORMALITY_REJECT {
            return Err(Error::NotARotation {
                reason: "orthonormality residual exceeds 1e-6".into(),
                residual,
            });
        }
        if mat.determinant() < 0.0 {
            return Err(Error::NotARotation {
                reason: "determinant is negative (reflection)".into(),
                residual: (mat.determinant() - 1.0).abs(),
            });
        }
        let mat = if residual > ORTHONORMALITY_DRIFT {
            orthonormalize(mat)
        } else {
            *mat
        };
        Ok(Rotation { mat })
    }

    /// Wraps a matrix that is known to satisfy the invariants already.
    pub(crate) fn wrap(mat: Matrix3<f64>) -> Self {
        debug_assert!(orthonormality_residual(&mat) <= 1e-7);
        Rotation { mat }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.mat
    }

    /// Frobenius norm of `RᵀR − I`.
    pub fn orthonormality_residual(&self) -> f64 {
        orthonormality_residual(&self.mat)
    }

    /// Row-major 9-tuple serialization of the matrix.
    pub fn to_row_major(&self) -> [f64; 9] {
        let m = &self.mat;
        [
            m[(0, 0)],
            m[(0, 1)],
            m[(0, 2)],
            m[(1, 0)],
            m[(1, 1)],
            m[(1, 2)],
            m[(2, 0)],
            m[(2, 1)],
            m[(2, 2)],
        ]
    }

    pub fn from_row_major(v: &[f64; 9]) -> Result<Self> {
        Rotation::from_matrix(&Matrix3::new(
            v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8],
        ))
    }

    /// Unit quaternion `(w, x, y, z)` with `w ≥ 0`.
    pub fn to_quaternion(&self) -> [f64; 4] {
        let q = UnitQuaternion::from_matrix(&self.mat);
        let q = q.quaternion();
        if q.w < 0.0 {
            [-q.w, -q.i, -q.j, -q.k]
        } else {
            [q.w, q.i, q.j, q.k]
        }
    }

    /// Builds a rotation from a quaternion `(w, x, y, z)`, normalizing first.
    pub fn from_quaternion(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (w * w + x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || norm < 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "quaternion norm {norm} is not usable"
            )));
        }
        let q = UnitQuaternion::from_quaternion(Quaternion::new(w, x, y, z));
        Ok(Rotation {
            mat: q.to_rotation_matrix().into_inner(),
        })
    }
}

impl Tangent {
    /// Builds a tangent vector, rejecting non-finite components.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::InvalidArgument(
                "tangent components must be finite".into(),
            ));
        }
        Ok(Tangent {
            vec: Vector3::new(x, y, z),
        })
    }

    pub fn zero() -> Self {
        Tangent {
            vec: Vector3::zeros(),
        }
    }

    pub(crate) fn wrap(vec: Vector3<f64>) -> Self {
        Tangent { vec }
    }

    pub fn vector(&self) -> Vector3<f64> {
        self.vec
    }

    /// Rotation angle `‖ω‖` in radians.
    pub fn norm(&self) -> f64 {
        self.vec.norm()
    }
}

impl std::ops::Mul<f64> for Tangent {
    type Output = Tangent;
    fn mul(self, s: f64) -> Tangent {
        Tangent { vec: self.vec * s }
    }
}

impl std::ops::Add for Tangent {
    type Output = Tangent;
    fn add(self, other: Tangent) -> Tangent {
        Tangent {
            vec: self.vec + other.vec,
        }
    }
}

impl std::ops::Neg for Tangent {
    type Output = Tangent;
    fn neg(self) -> Tangent {
        Tangent { vec: -self.vec }
    }
}

fn orthonormality_residual(m: &Matrix3<f64>) -> f64 {
    (m.transpose() * m - Matrix3::identity()).norm()
}

/// Nearest rotation in Frobenius norm, via the polar factor of the SVD.
fn orthonormalize(m: &Matrix3<f64>) -> Matrix3<f64> {
    let svd = m.svd(true, true);
    let u = svd.u.expect("svd with u requested");
    let vt = svd.v_t.expect("svd with v_t requested");
    let mut r = u * vt;
    if r.determinant() < 0.0 {
        // Flip the weakest singular direction to land on SO(3), not O(3).
        let mut u = u;
        u.column_mut(2).neg_mut();
        r = u * vt;
    }
    r
}

fn hat(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

fn vee_antisymmetric(m: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(
        (m[(2, 1)] - m[(1, 2)]) * 0.5,
        (m[(0, 2)] - m[(2, 0)]) * 0.5,
        (m[(1, 0)] - m[(0, 1)]) * 0.5,
    )
}

/// Exponential map so(3) → SO(3) (Rodrigues' formula).
///
/// Below 1e-4 rad the `sin θ/θ` and `(1 − cos θ)/θ²` coefficients are
/// replaced by their second-order Taylor expansions, which keeps the relative
/// error below 1e-12 where the closed forms lose precision.
pub fn exp_map(omega: &Tangent) -> Rotation {
    let v = omega.vec;
    let theta_sq = v.norm_squared();
    let theta = theta_sq.sqrt();
    let (a, b) = if theta < SMALL_ANGLE {
        (1.0 - theta_sq / 6.0, 0.5 - theta_sq / 24.0)
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / theta_sq)
    };
    let k = hat(&v);
    let mat = Matrix3::identity() + k * a + k * k * b;
    Rotation::wrap(mat)
}

/// Logarithmic map SO(3) → so(3), returning the canonical `‖ω‖ ∈ [0, π]`.
///
/// Three branches keep the result accurate everywhere: a Taylor expansion of
/// `θ / (2 sin θ)` near the identity, the closed form in the bulk, and an
/// axis extraction from the diagonal of `(R + Rᵀ)/2` near π where the
/// antisymmetric part degenerates. At exactly π the sign ambiguity is broken
/// by making the first nonzero component positive.
pub fn log_map(rotation: &Rotation) -> Tangent {
    let m = &rotation.mat;
    // sin θ · axis from the antisymmetric part, cos θ from the trace.
    let s = vee_antisymmetric(m);
    let sin_norm = s.norm();
    let cos = ((m.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let theta = sin_norm.atan2(cos);

    if theta < SMALL_ANGLE {
        // θ/(2 sin θ) · vee(R − Rᵀ) = θ/sin θ · s, expanded around 0.
        let factor = 1.0 + theta * theta / 6.0;
        return Tangent::wrap(s * factor);
    }
    if theta < std::f64::consts::PI - NEAR_PI {
        return Tangent::wrap(s * (theta / sin_norm));
    }

    // Near π: (R + Rᵀ)/2 = cos θ·I + (1 − cos θ)·uuᵀ, so the diagonal gives
    // the axis magnitudes and the pivot row gives the relative signs.
    let sym = (m + m.transpose()) * 0.5;
    let one_minus_cos = 1.0 - cos;
    let diag = Vector3::new(sym[(0, 0)], sym[(1, 1)], sym[(2, 2)]);
    let pivot = if diag.x >= diag.y && diag.x >= diag.z {
        0
    } else if diag.y >= diag.z {
        1
    } else {
        2
    };
    let mut u = Vector3::zeros();
    u[pivot] = ((diag[pivot] - cos) / one_minus_cos).max(0.0).sqrt();
    for i in 0..3 {
        if i != pivot {
            u[i] = sym[(pivot, i)] / (one_minus_cos * u[pivot]);
        }
    }
    u.normalize_mut();

    if sin_norm > 1e-9 {
        // The antisymmetric part still carries the sign of the axis.
        if u.dot(&s) < 0.0 {
            u = -u;
        }
    } else {
        // Genuine half-turn: pick the representative with the first nonzero
        // component positive.
        for i in 0..3 {
            if u[i].abs() > 1e-9 {
                if u[i] < 0.0 {
                    u = -u;
                }
                break;
            }
        }
    }
    Tangent::wrap(u * theta)
}

/// Group product `AB`, re-orthonormalized when accumulated drift exceeds 1e-9.
pub fn compose(a: &Rotation, b: &Rotation) -> Rotation {
    let mat = a.mat * b.mat;
    if orthonormality_residual(&mat) > ORTHONORMALITY_DRIFT {
        Rotation { mat: orthonormalize(&mat) }
    } else {
        Rotation { mat }
    }
}

/// Group inverse `R⁻¹ = Rᵀ`.
pub fn inverse(r: &Rotation) -> Rotation {
    Rotation {
        mat: r.mat.transpose(),
    }
}

/// Geodesic distance `‖Log(A⁻¹B)‖ ∈ [0, π]` (the relative rotation angle).
pub fn geodesic_distance(a: &Rotation, b: &Rotation) -> f64 {
    log_map(&compose(&inverse(a), b)).norm()
}

/// Haar-uniform random rotation, drawn via a uniform unit quaternion.
pub fn random_uniform<R: Rng + ?Sized>(rng: &mut R) -> Rotation {
    // Four iid standard normals, normalized, are uniform on S³.
    let q = loop {
        let w: f64 = rng.sample(StandardNormal);
        let x: f64 = rng.sample(StandardNormal);
        let y: f64 = rng.sample(StandardNormal);
        let z: f64 = rng.sample(StandardNormal);
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if n > 1e-6 {
            break Quaternion::new(w / n, x / n, y / n, z / n);
        }
    };
    let q = UnitQuaternion::from_quaternion(q);
    Rotation::wrap(q.to_rotation_matrix().into_inner())
}

/// Isotropic Gaussian tangent draw `σ·ε`, `ε ~ N(0, I₃)`.
pub fn random_tangent_gaussian<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> Result<Tangent> {
    if sigma.is_nan() || sigma < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "sigma must be nonnegative, got {sigma}"
        )));
    }
    Ok(draw_tangent_gaussian(sigma, rng))
}

/// Unvalidated variant for internal callers whose σ comes from a schedule.
pub(crate) fn draw_tangent_gaussian<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> Tangent {
    let x: f64 = rng.sample(StandardNormal);
    let y: f64 = rng.sample(StandardNormal);
    let z: f64 = rng.sample(StandardNormal);
    Tangent::wrap(Vector3::new(x, y, z) * sigma)
}

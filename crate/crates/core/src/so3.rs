//! Rotation-group primitives on SO(3).
//!
//! Rotations are plain `nalgebra` 3x3 matrices wrapped in [`Rot3`], which
//! checks orthonormality on construction. Tangent vectors are axis-angle
//! vectors in R³.

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Below this rotation angle, exp/log switch to two-term Taylor series.
pub const SMALL_ANGLE: f64 = 1e-6;
/// Within this distance of π the logarithm reports a cut-locus condition.
pub const CUT_LOCUS_BAND: f64 = 1e-6;
/// Orthonormality and determinant tolerance for [`Rot3`].
pub const ROT_TOL: f64 = 1e-9;

const SKEW_TOL: f64 = 1e-8;
const UNIT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum So3Error {
    #[error("matrix is not skew-symmetric (||S + S^T||_F = {0:e})")]
    NotSkew(f64),
    #[error("matrix is not a rotation (||R^T R - I||_F = {orth:e}, det = {det})")]
    NotRotation { orth: f64, det: f64 },
    #[error("rotation angle is within {CUT_LOCUS_BAND:e} of pi; axis sign is ambiguous")]
    NearCutLocus {
        /// One of the two principal logarithms; its negation is equally valid.
        candidate: Vec3,
    },
    #[error("matrix has non-positive determinant {0}")]
    NonPositiveDeterminant(f64),
    #[error("vector is not unit length (norm = {0})")]
    NotUnit(f64),
}

/// A rotation matrix satisfying `||R^T R - I||_F <= 1e-9` and `|det R - 1| <= 1e-9`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rot3(Mat3);

impl Rot3 {
    pub fn identity() -> Self {
        Rot3(Mat3::identity())
    }

    pub fn new(m: Mat3) -> Result<Self, So3Error> {
        let orth = orthonormality_error(&m);
        let det = m.determinant();
        if !(orth <= ROT_TOL && (det - 1.0).abs() <= ROT_TOL) {
            return Err(So3Error::NotRotation { orth, det });
        }
        Ok(Rot3(m))
    }

    /// Wraps a matrix the caller has already established to be a rotation.
    pub(crate) fn from_matrix_unchecked(m: Mat3) -> Self {
        Rot3(m)
    }

    /// Builds from nine numbers in row-major order.
    pub fn from_row_major(v: &[f64; 9]) -> Result<Self, So3Error> {
        Self::new(Mat3::from_row_slice(v))
    }

    /// Z-Y-X (yaw, pitch, roll) Euler angles in radians: `R = Rz(yaw) Ry(pitch) Rx(roll)`.
    pub fn from_euler_zyx(roll: f64, pitch: f64, yaw: f64) -> Self {
        let (sr, cr) = roll.sin_cos();
        let (sp, cp) = pitch.sin_cos();
        let (sy, cy) = yaw.sin_cos();
        let rz = Mat3::new(cy, -sy, 0.0, sy, cy, 0.0, 0.0, 0.0, 1.0);
        let ry = Mat3::new(cp, 0.0, sp, 0.0, 1.0, 0.0, -sp, 0.0, cp);
        let rx = Mat3::new(1.0, 0.0, 0.0, 0.0, cr, -sr, 0.0, sr, cr);
        Rot3(rz * ry * rx)
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn transpose(&self) -> Rot3 {
        Rot3(self.0.transpose())
    }

    pub fn row_major(&self) -> [f64; 9] {
        let m = &self.0;
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

    /// Body x-axis expressed in the world frame.
    pub fn x_axis(&self) -> Vec3 {
        self.0.column(0).into_owned()
    }

    pub fn rotate(&self, v: &Vec3) -> Vec3 {
        self.0 * v
    }

    pub fn compose(&self, other: &Rot3) -> Rot3 {
        Rot3(self.0 * other.0)
    }
}

/// `||M^T M - I||_F`.
pub fn orthonormality_error(m: &Mat3) -> f64 {
    (m.transpose() * m - Mat3::identity()).norm()
}

/// A skew-symmetric matrix, stored by its three independent entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Skew3(Vec3);

impl Skew3 {
    pub fn matrix(&self) -> Mat3 {
        let a = &self.0;
        Mat3::new(0.0, -a.z, a.y, a.z, 0.0, -a.x, -a.y, a.x, 0.0)
    }

    pub fn vector(&self) -> Vec3 {
        self.0
    }

    pub fn apply(&self, b: &Vec3) -> Vec3 {
        self.matrix() * b
    }
}

pub fn hat(a: &Vec3) -> Skew3 {
    Skew3(*a)
}

/// Inverse of [`hat`]. Rejects matrices whose symmetric part exceeds `1e-8` in Frobenius norm.
pub fn vee(s: &Mat3) -> Result<Vec3, So3Error> {
    let asym = (s + s.transpose()).norm();
    if !(asym <= SKEW_TOL) {
        return Err(So3Error::NotSkew(asym));
    }
    Ok(vee_skew_part(s))
}

/// `vee` of the skew-symmetric part `(S - S^T) / 2`; never fails.
pub fn vee_skew_part(s: &Mat3) -> Vec3 {
    Vec3::new(
        0.5 * (s[(2, 1)] - s[(1, 2)]),
        0.5 * (s[(0, 2)] - s[(2, 0)]),
        0.5 * (s[(1, 0)] - s[(0, 1)]),
    )
}

/// Rodrigues' formula.
pub fn exp_so3(w: &Vec3) -> Rot3 {
    let theta2 = w.norm_squared();
    let theta = theta2.sqrt();
    let k = hat(w).matrix();
    let (a, b) = if theta < SMALL_ANGLE {
        (1.0 - theta2 / 6.0, 0.5 - theta2 / 24.0)
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / theta2)
    };
    Rot3(Mat3::identity() + k * a + k * k * b)
}

/// Principal logarithm, `||result|| in [0, pi]`.
///
/// Returns [`So3Error::NearCutLocus`] when the angle is within `1e-6` of π;
/// the error carries one of the two equally valid candidates.
pub fn log_so3(r: &Rot3) -> Result<Vec3, So3Error> {
    let (w, theta) = log_with_angle(r);
    if std::f64::consts::PI - theta < CUT_LOCUS_BAND {
        return Err(So3Error::NearCutLocus { candidate: w });
    }
    Ok(w)
}

/// Like [`log_so3`] but returns the candidate at the cut locus instead of failing.
pub fn log_so3_any(r: &Rot3) -> Vec3 {
    log_with_angle(r).0
}

fn log_with_angle(r: &Rot3) -> (Vec3, f64) {
    let m = &r.0;
    let axis2 = Vec3::new(m[(2, 1)] - m[(1, 2)], m[(0, 2)] - m[(2, 0)], m[(1, 0)] - m[(0, 1)]);
    let cos = 0.5 * (m.trace() - 1.0);
    let sin = 0.5 * axis2.norm();
    let theta = sin.atan2(cos);
    if theta < SMALL_ANGLE {
        return (axis2 * (0.5 * (1.0 + theta * theta / 6.0)), theta);
    }
    if theta < 3.0 {
        return (axis2 * (0.5 * theta / theta.sin()), theta);
    }
    // Near pi: recover the axis from the dominant diagonal of the symmetric part.
    let sym = (m + m.transpose()) * 0.5;
    let kk = (sym - Mat3::identity() * cos) / (1.0 - cos);
    let i = (0..3)
        .max_by(|&a, &b| kk[(a, a)].total_cmp(&kk[(b, b)]))
        .unwrap_or(0);
    let mut k: Vec3 = kk.column(i).into_owned() / kk[(i, i)].max(0.0).sqrt();
    k /= k.norm();
    if k.dot(&axis2) < 0.0 {
        k = -k;
    }
    (k * theta, theta)
}

/// Minimal rotation taking unit vector `from` onto unit vector `to`.
///
/// Antiparallel inputs rotate by π about a fixed axis orthogonal to `from`
/// built by swapping its largest component (for `from = e_x` the axis is `e_z`).
pub fn rotation_between(from: &Vec3, to: &Vec3) -> Result<Rot3, So3Error> {
    for v in [from, to] {
        let n = v.norm();
        if !((n - 1.0).abs() <= UNIT_TOL) {
            return Err(So3Error::NotUnit(n));
        }
    }
    let c = from.dot(to);
    if 1.0 + c < 1e-12 {
        let u = antiparallel_axis(from);
        return Ok(Rot3(u * u.transpose() * 2.0 - Mat3::identity()));
    }
    let k = hat(&from.cross(to)).matrix();
    let r = Mat3::identity() + k + k * k * (1.0 / (1.0 + c));
    Ok(Rot3(r))
}

fn antiparallel_axis(from: &Vec3) -> Vec3 {
    let i = (0..3)
        .max_by(|&a, &b| from[a].abs().total_cmp(&from[b].abs()))
        .unwrap_or(0);
    let j = (i + 2) % 3;
    let mut u = Vec3::zeros();
    u[j] = from[i];
    u[i] = -from[j];
    u / u.norm()
}

/// Nearest rotation in Frobenius norm (polar decomposition via SVD).
pub fn project_to_so3(m: &Mat3) -> Result<Rot3, So3Error> {
    let det = m.determinant();
    if !(det > 0.0) {
        return Err(So3Error::NonPositiveDeterminant(det));
    }
    let svd = m.svd(true, true);
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(So3Error::NonPositiveDeterminant(det)),
    };
    Ok(Rot3(u * vt))
}

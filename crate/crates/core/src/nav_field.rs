//! Navigation field `F`, its orthogonal companions `G` and `H`, the goal
//! transform, and the auxiliary attitude built from the field triad.
//!
//! In goal-frame coordinates `q = R_d^T (p - p_d)` the fields are the
//! polynomials
//!
//! ```text
//! F = (x² - y² - z², 2xy, 2xz)
//! G = (2x(y² + z²), y(y² + z² - x²), z(y² + z² - x²))
//! H = G × F = (0, -z|q|², y|q|²)
//! ```
//!
//! Every integral curve of `F` lies in a plane through the x-axis, is a
//! circle through the origin, and arrives tangent to `+x`. The world-frame
//! field is `R_d F(q)`, so arrival is along `e_d = R_d e_x`.

use thiserror::Error;

use crate::jet::Jet3;
use crate::so3::{self, Mat3, Rot3, So3Error, Vec3};

/// Relative norm below which a triad vector counts as vanished.
pub const EPS_SING: f64 = 1e-9;
/// Relative orthogonality tolerance accepted by [`build_frame`].
pub const EPS_ORTHO: f64 = 1e-6;
/// Relative distance to the goal x-axis below which `G` and `H` are replaced.
pub const EPS_AXIS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameError {
    #[error("frame vector {index} vanished (norm {norm:e})")]
    Degenerate { index: usize, norm: f64 },
    #[error("frame vectors {i} and {j} are not orthogonal (cosine {cos:e})")]
    NotOrthogonal { i: usize, j: usize, cos: f64 },
    #[error("frame vectors are left-handed")]
    LeftHanded,
}

/// Target position and terminal heading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Goal {
    pub p_d: Vec3,
    pub e_d: Vec3,
    pub r_d: Rot3,
}

impl Goal {
    /// `R_d` is the minimal rotation taking `e_x` onto `e_d`.
    pub fn new(p_d: Vec3, e_d: Vec3) -> Result<Self, So3Error> {
        let r_d = so3::rotation_between(&Vec3::x(), &e_d)?;
        Ok(Goal { p_d, e_d, r_d })
    }

    pub fn with_rotation(p_d: Vec3, r_d: Rot3) -> Self {
        Goal {
            p_d,
            e_d: r_d.x_axis(),
            r_d,
        }
    }

    pub fn origin() -> Self {
        Goal::with_rotation(Vec3::zeros(), Rot3::identity())
    }

    /// Goal-frame coordinates `R_d^T (p - p_d)`.
    pub fn local(&self, p: &Vec3) -> Vec3 {
        self.r_d.matrix().transpose() * (p - self.p_d)
    }

    pub fn to_world(&self, v: &Vec3) -> Vec3 {
        self.r_d.matrix() * v
    }
}

pub fn eval_f(p: &Vec3) -> Vec3 {
    let (x, y, z) = (p.x, p.y, p.z);
    Vec3::new(x * x - y * y - z * z, 2.0 * x * y, 2.0 * x * z)
}

pub fn eval_g(p: &Vec3) -> Vec3 {
    let (x, y, z) = (p.x, p.y, p.z);
    let r2 = y * y + z * z;
    Vec3::new(2.0 * x * r2, y * (r2 - x * x), z * (r2 - x * x))
}

/// `H = G × F = |p|⁴ (0, -z, y)`.
pub fn eval_h(p: &Vec3) -> Vec3 {
    let s2 = p.norm_squared().powi(2);
    Vec3::new(0.0, -p.z * s2, p.y * s2)
}

/// Goal field `R_d F(R_d^T (p - p_d))`.
pub fn eval_goal_field(p: &Vec3, goal: &Goal) -> Vec3 {
    goal.to_world(&eval_f(&goal.local(p)))
}

/// `(F, G, H)` of the goal field in world coordinates.
pub fn eval_goal_fields(p: &Vec3, goal: &Goal) -> [Vec3; 3] {
    let q = goal.local(p);
    [
        goal.to_world(&eval_f(&q)),
        goal.to_world(&eval_g(&q)),
        goal.to_world(&eval_h(&q)),
    ]
}

/// Analytic Jacobians of the three polynomial fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NavJacobians {
    pub f: Mat3,
    pub g: Mat3,
    pub h: Mat3,
}

pub fn nav_jacobians(p: &Vec3) -> NavJacobians {
    let (x, y, z) = (p.x, p.y, p.z);
    let r2 = y * y + z * z;
    let s = x * x + r2;
    #[rustfmt::skip]
    let f = Mat3::new(
        2.0 * x, -2.0 * y, -2.0 * z,
        2.0 * y,  2.0 * x,  0.0,
        2.0 * z,  0.0,      2.0 * x,
    );
    #[rustfmt::skip]
    let g = Mat3::new(
        2.0 * r2,     4.0 * x * y,                  4.0 * x * z,
        -2.0 * x * y, 3.0 * y * y + z * z - x * x,  2.0 * y * z,
        -2.0 * x * z, 2.0 * y * z,                  y * y + 3.0 * z * z - x * x,
    );
    #[rustfmt::skip]
    let h = Mat3::new(
        0.0,              0.0,                    0.0,
        -4.0 * s * x * z, -4.0 * s * y * z,       -s * s - 4.0 * s * z * z,
        4.0 * s * x * y,  s * s + 4.0 * s * y * y, 4.0 * s * y * z,
    );
    NavJacobians { f, g, h }
}

/// `(F, G, H)` of the goal field with their time derivatives along `p_dot`.
pub fn goal_field_jets(p: &Vec3, p_dot: &Vec3, goal: &Goal) -> [Jet3; 3] {
    let rd = goal.r_d.matrix();
    let q = goal.local(p);
    let q_dot = rd.transpose() * p_dot;
    let jac = nav_jacobians(&q);
    [
        Jet3::from_jacobian(eval_f(&q), &jac.f, &q_dot).rotated(rd),
        Jet3::from_jacobian(eval_g(&q), &jac.g, &q_dot).rotated(rd),
        Jet3::from_jacobian(eval_h(&q), &jac.h, &q_dot).rotated(rd),
    ]
}

/// Whether `p` is close enough to the goal's x-axis that `G` and `H` vanish numerically.
pub fn near_goal_axis(p: &Vec3, goal: &Goal) -> bool {
    let q = goal.local(p);
    let eps = EPS_AXIS * (1.0 + q.norm());
    q.y * q.y + q.z * q.z < eps * eps
}

/// The three field vectors `ζ_X, ζ_Y, ζ_Z` and the auxiliary attitude whose
/// columns are their normalizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameTriad {
    pub zeta_x: Vec3,
    pub zeta_y: Vec3,
    pub zeta_z: Vec3,
    pub r_a: Rot3,
}

/// Time derivative of the auxiliary attitude and its body rate
/// `hat(Ω_a) = R_a^T Ṙ_a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameRate {
    pub r_a_dot: Mat3,
    pub omega_a: Vec3,
}

pub fn build_frame(zeta_x: Vec3, zeta_y: Vec3, zeta_z: Vec3) -> Result<FrameTriad, FrameError> {
    let zetas = [zeta_x, zeta_y, zeta_z];
    let norms = zetas.map(|z| z.norm());
    let largest = norms.iter().cloned().fold(0.0, f64::max);
    for (index, &norm) in norms.iter().enumerate() {
        if !(norm > EPS_SING * largest) || !norm.is_finite() {
            return Err(FrameError::Degenerate { index, norm });
        }
    }
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let cos = zetas[i].dot(&zetas[j]) / (norms[i] * norms[j]);
        if cos.abs() > EPS_ORTHO {
            return Err(FrameError::NotOrthogonal { i, j, cos });
        }
    }
    let m = Mat3::from_columns(&[zeta_x / norms[0], zeta_y / norms[1], zeta_z / norms[2]]);
    if m.determinant() < 0.0 {
        return Err(FrameError::LeftHanded);
    }
    Ok(FrameTriad {
        zeta_x,
        zeta_y,
        zeta_z,
        r_a: Rot3::from_matrix_unchecked(m),
    })
}

/// Differentiates each normalized column, `d/dt(ζ/|ζ|) = ζ̇/|ζ| - (ζ·ζ̇) ζ/|ζ|³`.
pub fn frame_rate(triad: &FrameTriad, zeta_dots: [Vec3; 3]) -> Result<FrameRate, FrameError> {
    let zetas = [triad.zeta_x, triad.zeta_y, triad.zeta_z];
    let mut cols = [Vec3::zeros(); 3];
    for (k, (z, zd)) in zetas.iter().zip(zeta_dots.iter()).enumerate() {
        let n = z.norm();
        if !(n > 0.0) {
            return Err(FrameError::Degenerate { index: k, norm: n });
        }
        cols[k] = zd / n - z * (z.dot(zd) / (n * n * n));
    }
    let r_a_dot = Mat3::from_columns(&cols);
    let omega_a = so3::vee_skew_part(&(triad.r_a.matrix().transpose() * r_a_dot));
    Ok(FrameRate { r_a_dot, omega_a })
}

/// Builds the frame from three field jets and differentiates it.
pub fn frame_from_jets(zetas: &[Jet3; 3]) -> Result<(FrameTriad, FrameRate), FrameError> {
    let triad = build_frame(zetas[0].v, zetas[1].v, zetas[2].v)?;
    let rate = frame_rate(&triad, [zetas[0].d, zetas[1].d, zetas[2].d])?;
    Ok((triad, rate))
}

/// Fixed completion direction: world `e_z`, or `e_y` when `e_z` is within
/// about 8° of `x`.
pub fn fixed_hint(x: &Vec3) -> Vec3 {
    if x.z.abs() > 0.99 * x.norm() {
        Vec3::y()
    } else {
        Vec3::z()
    }
}

/// Completes a heading vector to a right-handed triad `(x, z × x, z)` with
/// `z` the component of `hint` orthogonal to `x`. Falls back to
/// [`fixed_hint`] when `hint` is (nearly) parallel to `x` or vanishes.
pub fn complete_frame(x: &Jet3, hint: &Jet3) -> [Jet3; 3] {
    let xn = x.v.norm();
    let project = |h: &Jet3| {
        let u = x.normalized();
        *h - u.scale(u.dot(h))
    };
    let hn = hint.v.norm();
    let mut z = project(hint);
    if !(hn > 0.0) || !(z.v.norm() > 1e-6 * hn) || !(xn > 0.0) {
        z = project(&Jet3::constant(fixed_hint(&x.v)));
    }
    let y = z.cross(x);
    [*x, y, z]
}

/// Navigation triad `(F, H, G)` with derivatives, applying the fixed-hint
/// completion on the goal's x-axis where `G` and `H` vanish.
///
/// `H` is divided by `|p - p_d|²` so that all three columns vanish at the
/// same order near the goal; positive rescaling leaves `R_a` and `Ṙ_a`
/// unchanged.
pub fn nav_triad_jets(p: &Vec3, p_dot: &Vec3, goal: &Goal) -> [Jet3; 3] {
    let [f, g, h] = goal_field_jets(p, p_dot, goal);
    if near_goal_axis(p, goal) {
        complete_frame(&f, &Jet3::constant(fixed_hint(&f.v)))
    } else {
        let q = Jet3::new(p - goal.p_d, *p_dot);
        [f, h.scale(q.dot(&q).recip()), g]
    }
}

//! Superquadric obstacles and the obstacle-avoidance field.
//!
//! Inside the reactive shell `1 <= Υ <= c̄` the goal field `F` is blended
//! with a field tangent to the level surfaces of `Υ`:
//!
//! ```text
//! F_OA = χ F + (1 - χ) τ_b,    τ_a = n × F,    τ_b = τ_a × n
//! ```
//!
//! where `n` is the unit surface normal and `χ` rises from 0 on the surface
//! to 1 on the outer level set. When `n ∥ F` the tangents are replaced by
//! the navigation companions, `τ_a = H`, `τ_b = G`.

use thiserror::Error;

use crate::nav_field::{self, build_frame, FrameError, FrameTriad};
use crate::jet::Jet3;
use crate::so3::{hat, Mat3, Vec3};

/// Relative band on `|n × F|` inside which `n` and `F` count as parallel.
pub const EPS_PAR: f64 = 1e-6;
/// Gradient norm below which the surface normal is undefined.
pub const EPS_NORMAL: f64 = 1e-12;
/// Relative size of the denominator of `μ` below which it is treated as singular.
pub const EPS_MU: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AvoidanceError {
    #[error("surface normal vanishes (|grad| = {0:e})")]
    DegenerateNormal(f64),
    #[error("blending coefficient mu is singular (denominator {0:e})")]
    DegenerateMu(f64),
}

/// Superquadric `((x-x_o)/a)^{2p} + ((y-y_o)/b)^{2q} + ((z-z_o)/c)^{2r}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Obstacle {
    pub center: Vec3,
    pub velocity: Vec3,
    pub semi_axes: [f64; 3],
    pub exponents: [u32; 3],
    /// Level of the outer boundary of the reactive shell; must exceed 1.
    pub c_bar: f64,
}

impl Obstacle {
    pub fn sphere(center: Vec3, radius: f64, c_bar: f64) -> Self {
        Obstacle {
            center,
            velocity: Vec3::zeros(),
            semi_axes: [radius; 3],
            exponents: [1; 3],
            c_bar,
        }
    }

    /// Grows each semi-axis by `r`, turning a point-robot check into a
    /// clearance check for a robot of radius `r`.
    pub fn inflated(&self, r: f64) -> Self {
        Obstacle {
            semi_axes: self.semi_axes.map(|a| a + r),
            ..*self
        }
    }

    pub fn is_valid(&self) -> bool {
        self.semi_axes.iter().all(|&a| a > 0.0 && a.is_finite())
            && self.exponents.iter().all(|&e| e >= 1)
            && self.c_bar > 1.0
            && self.c_bar.is_finite()
    }

    /// Half-extents of the box enclosing the level set `Υ <= level`.
    pub fn level_extent(&self, level: f64) -> Vec3 {
        Vec3::from_fn(|k, _| {
            self.semi_axes[k] * level.powf(1.0 / (2.0 * self.exponents[k] as f64))
        })
    }

    /// Advances the center by one step of its constant velocity.
    pub fn advance(&mut self, dt: f64) {
        self.center += self.velocity * dt;
    }
}

pub fn eval_upsilon(p: &Vec3, ob: &Obstacle) -> f64 {
    (0..3)
        .map(|k| {
            let u = (p[k] - ob.center[k]) / ob.semi_axes[k];
            u.powi(2 * ob.exponents[k] as i32)
        })
        .sum()
}

/// `∇Υ` without validation.
pub fn upsilon_gradient(p: &Vec3, ob: &Obstacle) -> Vec3 {
    Vec3::from_fn(|k, _| {
        let a = ob.semi_axes[k];
        let e = ob.exponents[k] as i32;
        let u = (p[k] - ob.center[k]) / a;
        2.0 * e as f64 / a * u.powi(2 * e - 1)
    })
}

/// `∂²Υ/∂p²`, diagonal for this separable family.
pub fn upsilon_hessian(p: &Vec3, ob: &Obstacle) -> Mat3 {
    Mat3::from_diagonal(&Vec3::from_fn(|k, _| {
        let a = ob.semi_axes[k];
        let e = ob.exponents[k] as i32;
        let u = (p[k] - ob.center[k]) / a;
        (2 * e * (2 * e - 1)) as f64 / (a * a) * u.powi(2 * e - 2)
    }))
}

/// Outward normal `n = ∇Υ` (not normalized).
pub fn eval_normal(p: &Vec3, ob: &Obstacle) -> Result<Vec3, AvoidanceError> {
    let n = upsilon_gradient(p, ob);
    let norm = n.norm();
    if !(norm >= EPS_NORMAL) {
        return Err(AvoidanceError::DegenerateNormal(norm));
    }
    Ok(n)
}

/// Unit normal and the two tangent fields at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceFrame {
    /// Unit outward normal.
    pub n: Vec3,
    pub tau_a: Vec3,
    pub tau_b: Vec3,
    /// Set when `n ∥ F` and the tangents were taken from `(H, G)`.
    pub collinear: bool,
}

pub fn eval_tangents(
    p: &Vec3,
    f_here: &Vec3,
    ob: &Obstacle,
    g_here: &Vec3,
    h_here: &Vec3,
) -> Result<SurfaceFrame, AvoidanceError> {
    let n = eval_normal(p, ob)?;
    Ok(tangents_from_normal(&(n / n.norm()), f_here, g_here, h_here))
}

/// Tangent construction for an already-normalized normal.
pub fn tangents_from_normal(n: &Vec3, f: &Vec3, g: &Vec3, h: &Vec3) -> SurfaceFrame {
    let tau_a = n.cross(f);
    if is_collinear(n, f) {
        SurfaceFrame {
            n: *n,
            tau_a: *h,
            tau_b: *g,
            collinear: true,
        }
    } else {
        SurfaceFrame {
            n: *n,
            tau_a,
            tau_b: tau_a.cross(n),
            collinear: false,
        }
    }
}

pub(crate) fn is_collinear(n_unit: &Vec3, f: &Vec3) -> bool {
    !(n_unit.cross(f).norm() > EPS_PAR * f.norm())
}

/// Cubic smoothstep `3s² - 2s³` clamped to `[0, 1]`, with its derivative in `s`.
pub fn smoothstep(s: f64) -> (f64, f64) {
    if s <= 0.0 {
        (0.0, 0.0)
    } else if s >= 1.0 {
        (1.0, 0.0)
    } else {
        (s * s * (3.0 - 2.0 * s), 6.0 * s * (1.0 - s))
    }
}

/// Transition function: 0 on and inside the surface, 1 beyond `c̄`.
pub fn bump_chi(upsilon: f64, c_bar: f64) -> f64 {
    smoothstep((upsilon - 1.0) / (c_bar - 1.0)).0
}

/// `F_OA = (∏ χ_i) F + Σ (1 - χ_i) τ_b,i` over all obstacles.
///
/// `aux` holds `(G, H)` at `p`, used only on the collinear branch.
pub fn eval_f_oa(
    p: &Vec3,
    goal_f: &Vec3,
    obstacles: &[Obstacle],
    aux: (&Vec3, &Vec3),
) -> Result<Vec3, AvoidanceError> {
    let mut product = 1.0;
    let mut tangential = Vec3::zeros();
    for ob in obstacles {
        let chi = bump_chi(eval_upsilon(p, ob), ob.c_bar);
        if chi >= 1.0 {
            continue;
        }
        let s = eval_tangents(p, goal_f, ob, aux.0, aux.1)?;
        product *= chi;
        tangential += s.tau_b * (1.0 - chi);
    }
    Ok(goal_f * product + tangential)
}

/// `μ = χ(F·n) / (χ(F·n) + (χ-1)(τ_b·G))`.
pub fn eval_mu(chi: f64, f: &Vec3, n: &Vec3, tau_b: &Vec3, g: &Vec3) -> Result<f64, AvoidanceError> {
    let a = chi * f.dot(n);
    let b = (chi - 1.0) * tau_b.dot(g);
    let den = a + b;
    if !(den.abs() >= EPS_MU * (a.abs() + b.abs() + 1e-30)) {
        return Err(AvoidanceError::DegenerateMu(den));
    }
    Ok(a / den)
}

/// How the companion vectors of a blended frame were obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CompanionKind {
    /// `G_OA = μG + (1-μ)n`, `H_OA = G_OA × F_OA`.
    Blended { mu: f64 },
    /// `μ` was singular: `G` projected off `F_OA`, then `H_OA = G_OA × F_OA`.
    GramSchmidt,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OaFrame {
    pub triad: FrameTriad,
    pub f_oa: Vec3,
    pub kind: CompanionKind,
}

/// Single-obstacle frame `(F_OA, H_OA, G_OA)`.
pub fn build_oa_frame(
    chi: f64,
    f: &Vec3,
    g: &Vec3,
    h: &Vec3,
    s: &SurfaceFrame,
) -> Result<OaFrame, FrameError> {
    let _ = h;
    let f_oa = f * chi + s.tau_b * (1.0 - chi);
    if let Ok(mu) = eval_mu(chi, f, &s.n, &s.tau_b, g) {
        let g_oa = g * mu + s.n * (1.0 - mu);
        let h_oa = g_oa.cross(&f_oa);
        if let Ok(triad) = build_frame(f_oa, h_oa, g_oa) {
            return Ok(OaFrame {
                triad,
                f_oa,
                kind: CompanionKind::Blended { mu },
            });
        }
    }
    let [x, y, z] = nav_field::complete_frame(&Jet3::constant(f_oa), &Jet3::constant(*g));
    let triad = build_frame(x.v, y.v, z.v)?;
    Ok(OaFrame {
        triad,
        f_oa,
        kind: CompanionKind::GramSchmidt,
    })
}

/// The four-term expansion of `H_OA`. Equals `G_OA × F_OA` on the
/// non-collinear branch (with a unit normal); the library uses the cross
/// product directly.
pub fn h_oa_expanded(chi: f64, mu: f64, f: &Vec3, g: &Vec3, h: &Vec3, s: &SurfaceFrame) -> Vec3 {
    h * (chi * mu)
        + s.tau_a * ((1.0 - chi) * (1.0 - mu))
        + g.cross(&s.tau_b) * (mu * (1.0 - chi))
        + s.n.cross(f) * (chi * (1.0 - mu))
}

/// `Ξ_OA = χI + (χ-1) hat(n)²`, so that `F_OA = Ξ_OA F` off the collinear branch.
pub fn xi_oa(chi: f64, n: &Vec3) -> Mat3 {
    let nh = hat(n).matrix();
    Mat3::identity() * chi + nh * nh * (chi - 1.0)
}

/// Closed form `det Ξ_OA = χ (χ + (1-χ)|n|²)²`.
pub fn xi_oa_det(chi: f64, n_norm: f64) -> f64 {
    let t = chi + (1.0 - chi) * n_norm * n_norm;
    chi * t * t
}

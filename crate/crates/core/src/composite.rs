//! Composition of the goal field with every active avoider, and the
//! resulting auxiliary frame with its exact time derivative.
//!
//! Obstacles and higher-priority robots enter the same way: each contributes
//! a transition value `χ` and a unit normal `n`, both carried as jets so the
//! frame rate accounts for the robot's own motion and the avoider's motion.

use thiserror::Error;

use crate::avoidance::{
    eval_normal, eval_upsilon, is_collinear, smoothstep, upsilon_hessian, AvoidanceError, Obstacle,
    EPS_MU, EPS_NORMAL,
};
use crate::jet::{Jet, Jet3};
use crate::multi_robot::Neighbor;
use crate::nav_field::{
    complete_frame, frame_from_jets, goal_field_jets, nav_triad_jets, near_goal_axis, FrameError,
    FrameRate, FrameTriad, Goal,
};
use crate::so3::Vec3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error(transparent)]
    Avoidance(#[from] AvoidanceError),
    #[error(transparent)]
    Frame(#[from] FrameError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AvoiderSource {
    /// Index into the scenario's obstacle list.
    Obstacle(usize),
    /// Robot id.
    Robot(usize),
}

/// An avoider whose reactive region currently contains the robot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Avoider {
    pub source: AvoiderSource,
    pub chi: Jet,
    /// Unit outward normal.
    pub n: Jet3,
}

/// Returns `None` when `p` is outside the reactive shell (`χ = 1`).
pub fn obstacle_avoider(
    p: &Vec3,
    p_dot: &Vec3,
    ob: &Obstacle,
    index: usize,
) -> Result<Option<Avoider>, AvoidanceError> {
    let width = ob.c_bar - 1.0;
    let s = (eval_upsilon(p, ob) - 1.0) / width;
    if s >= 1.0 {
        return Ok(None);
    }
    let grad = eval_normal(p, ob)?;
    let rel_dot = p_dot - ob.velocity;
    let (chi, dchi) = smoothstep(s);
    let ups_dot = grad.dot(&rel_dot);
    Ok(Some(Avoider {
        source: AvoiderSource::Obstacle(index),
        chi: Jet::new(chi, dchi * ups_dot / width),
        n: Jet3::new(grad, upsilon_hessian(p, ob) * rel_dot).normalized(),
    }))
}

/// Sphere avoider around a neighbor; `None` beyond its detection radius.
pub fn robot_avoider(p: &Vec3, p_dot: &Vec3, nb: &Neighbor) -> Result<Option<Avoider>, AvoidanceError> {
    let rel = Jet3::new(p - nb.p, p_dot - nb.p_dot);
    let psi = rel.norm();
    if psi.v >= nb.r_d {
        return Ok(None);
    }
    if !(psi.v >= EPS_NORMAL) {
        return Err(AvoidanceError::DegenerateNormal(psi.v));
    }
    let width = nb.r_d - nb.r_c;
    let (chi, dchi) = smoothstep((psi.v - nb.r_c) / width);
    Ok(Some(Avoider {
        source: AvoiderSource::Robot(nb.id),
        chi: Jet::new(chi, dchi * psi.d / width),
        n: rel.normalized(),
    }))
}

/// `(τ_a, τ_b, collinear)` as jets.
pub fn tangent_jets(n: &Jet3, f: &Jet3, g: &Jet3, h: &Jet3) -> (Jet3, Jet3, bool) {
    if is_collinear(&n.v, &f.v) {
        (*h, *g, true)
    } else {
        let tau_a = n.cross(f);
        let tau_b = tau_a.cross(n);
        (tau_a, tau_b, false)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrameKind {
    /// `(F, H, G)` of the goal field.
    Free,
    /// On the goal axis: `F` completed with a fixed world direction.
    AxisFallback,
    /// Single active avoider with `G_c = μG + (1-μ)n`.
    Blended { mu: f64 },
    /// `G` projected orthogonally to the composite field.
    GramSchmidt,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannedFrame {
    /// The composite field `F_c` at the robot.
    pub field: Vec3,
    pub triad: FrameTriad,
    pub rate: FrameRate,
    pub kind: FrameKind,
    /// Smallest `χ` among active avoiders, 1 when none.
    pub chi_min: f64,
}

/// Auxiliary frame for a robot at `p` moving with `p_dot`.
pub fn plan_frame(
    p: &Vec3,
    p_dot: &Vec3,
    goal: &Goal,
    avoiders: &[Avoider],
) -> Result<PlannedFrame, FrameError> {
    if avoiders.is_empty() {
        let jets = nav_triad_jets(p, p_dot, goal);
        let (triad, rate) = frame_from_jets(&jets)?;
        let kind = if near_goal_axis(p, goal) {
            FrameKind::AxisFallback
        } else {
            FrameKind::Free
        };
        return Ok(PlannedFrame {
            field: jets[0].v,
            triad,
            rate,
            kind,
            chi_min: 1.0,
        });
    }
    compose_frame(&goal_field_jets(p, p_dot, goal), avoiders)
}

/// Composite field and frame from `[F, G, H]` jets and a non-empty set of
/// avoiders; with no avoiders this is the plain `(F, H, G)` frame.
pub fn compose_frame(fgh: &[Jet3; 3], avoiders: &[Avoider]) -> Result<PlannedFrame, FrameError> {
    let [f, g, h] = fgh;
    let one = Jet::constant(1.0);
    let mut product = one;
    let mut tangential = Jet3::constant(Vec3::zeros());
    let mut chi_min = 1.0f64;
    let mut single_tau_b = None;
    for a in avoiders {
        let (_, tau_b, _) = tangent_jets(&a.n, f, g, h);
        product = product * a.chi;
        tangential = tangential + tau_b.scale(one - a.chi);
        chi_min = chi_min.min(a.chi.v);
        single_tau_b = Some(tau_b);
    }
    let fc = f.scale(product) + tangential;

    if avoiders.is_empty() {
        let (triad, rate) = frame_from_jets(&[*f, *h, *g])?;
        return Ok(PlannedFrame { field: f.v, triad, rate, kind: FrameKind::Free, chi_min });
    }

    if let ([a], Some(tau_b)) = (avoiders, single_tau_b) {
        let num = a.chi * f.dot(&a.n);
        let other = (a.chi - one) * tau_b.dot(g);
        let den = num + other;
        if den.v.abs() >= EPS_MU * (num.v.abs() + other.v.abs() + 1e-30) {
            let mu = num / den;
            let gc = g.scale(mu) + a.n.scale(one - mu);
            let hc = gc.cross(&fc);
            if let Ok((triad, rate)) = frame_from_jets(&[fc, hc, gc]) {
                return Ok(PlannedFrame {
                    field: fc.v,
                    triad,
                    rate,
                    kind: FrameKind::Blended { mu: mu.v },
                    chi_min,
                });
            }
        }
    }

    let (triad, rate) = frame_from_jets(&complete_frame(&fc, g))?;
    Ok(PlannedFrame {
        field: fc.v,
        triad,
        rate,
        kind: FrameKind::GramSchmidt,
        chi_min,
    })
}

//! Priority-based collision avoidance among robots.
//!
//! Robot `i` treats every higher-priority robot `j < i` whose reactive sphere
//! `r_c <= ψ <= r_d` it has entered as a moving spherical obstacle. Lower
//! priority robots are ignored, so robot 1 never reacts to anyone.

use std::collections::BTreeSet;

use crate::avoidance::{smoothstep, tangents_from_normal, AvoidanceError, EPS_NORMAL};
use crate::composite::{compose_frame, robot_avoider, PlannedFrame};
use crate::jet::Jet3;
use crate::nav_field::{FrameError, Goal};
use crate::so3::{Rot3, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotSpec {
    /// Priority label, starting at 1; smaller is higher priority.
    pub id: usize,
    pub p0: Vec3,
    pub r0: Rot3,
    pub goal: Goal,
    /// Dangerous radius.
    pub r_c: f64,
    /// Detection radius.
    pub r_d: f64,
    pub k_w: f64,
    pub k_v: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NeighborSets {
    pub n: BTreeSet<usize>,
    pub n_plus: BTreeSet<usize>,
}

/// State of another robot as seen by the one being planned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub id: usize,
    pub p: Vec3,
    pub p_dot: Vec3,
    pub r_c: f64,
    pub r_d: f64,
}

pub fn psi(p: &Vec3, p_j: &Vec3) -> f64 {
    (p - p_j).norm()
}

/// `N_i` holds every `j` whose reactive shell contains robot `i`; `N_i⁺`
/// keeps those with higher priority. `positions[k]` belongs to `specs[k]`.
pub fn neighbor_sets(i: usize, positions: &[Vec3], specs: &[RobotSpec]) -> NeighborSets {
    let mut out = NeighborSets::default();
    let Some(me) = specs.iter().position(|s| s.id == i) else {
        return out;
    };
    for (k, s) in specs.iter().enumerate() {
        if s.id == i {
            continue;
        }
        let d = psi(&positions[me], &positions[k]);
        if s.r_c <= d && d <= s.r_d {
            out.n.insert(s.id);
            if s.id < i {
                out.n_plus.insert(s.id);
            }
        }
    }
    out
}

/// Higher-priority neighbors close enough to influence robot `i`. A
/// neighbor already inside `r_c` is kept, with `χ = 0`.
fn influencing<'a>(i: usize, p: &'a Vec3, neighbors: &'a [Neighbor]) -> impl Iterator<Item = &'a Neighbor> {
    neighbors.iter().filter(move |nb| nb.id < i && psi(p, &nb.p) < nb.r_d)
}

/// `F_CA = (∏ χ_j) F + Σ (1 - χ_j) τ_b,j` over higher-priority neighbors.
pub fn eval_f_ca(
    i: usize,
    p: &Vec3,
    neighbors: &[Neighbor],
    f: &Vec3,
    g: &Vec3,
    h: &Vec3,
) -> Result<Vec3, AvoidanceError> {
    let mut product = 1.0;
    let mut tangential = Vec3::zeros();
    for nb in influencing(i, p, neighbors) {
        let rel = p - nb.p;
        let d = rel.norm();
        if !(d >= EPS_NORMAL) {
            return Err(AvoidanceError::DegenerateNormal(d));
        }
        let chi = smoothstep((d - nb.r_c) / (nb.r_d - nb.r_c)).0;
        let s = tangents_from_normal(&(rel / d), f, g, h);
        product *= chi;
        tangential += s.tau_b * (1.0 - chi);
    }
    Ok(f * product + tangential)
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum CaError {
    #[error(transparent)]
    Avoidance(#[from] AvoidanceError),
    #[error(transparent)]
    Frame(#[from] FrameError),
}

/// Frame `(F_CA, H_CA, G_CA)` at a fixed instant (no rate information).
pub fn ca_frame(
    i: usize,
    p: &Vec3,
    neighbors: &[Neighbor],
    f: &Vec3,
    g: &Vec3,
    h: &Vec3,
) -> Result<PlannedFrame, CaError> {
    let mut avoiders = Vec::new();
    for nb in influencing(i, p, neighbors) {
        let still = Neighbor { p_dot: Vec3::zeros(), ..*nb };
        if let Some(a) = robot_avoider(p, &Vec3::zeros(), &still)? {
            avoiders.push(a);
        }
    }
    let fgh = [Jet3::constant(*f), Jet3::constant(*g), Jet3::constant(*h)];
    Ok(compose_frame(&fgh, &avoiders)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composite::FrameKind;
    use crate::nav_field::{build_frame, eval_f, eval_g, eval_h};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec(id: usize, p0: Vec3) -> RobotSpec {
        RobotSpec {
            id,
            p0,
            r0: Rot3::identity(),
            goal: Goal::origin(),
            r_c: 1.0,
            r_d: 5.0,
            k_w: 2.0,
            k_v: 0.1,
        }
    }

    fn nb(id: usize, p: Vec3) -> Neighbor {
        Neighbor { id, p, p_dot: Vec3::zeros(), r_c: 1.0, r_d: 5.0 }
    }

    #[test]
    fn psi_values() {
        assert_eq!(psi(&Vec3::new(1.0, 2.0, 3.0), &Vec3::new(1.0, 2.0, 3.0)), 0.0);
        assert_eq!(psi(&Vec3::new(3.0, 4.0, 0.0), &Vec3::zeros()), 5.0);
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        for _ in 0..100 {
            let a = Vec3::from_fn(|_, _| rng.gen_range(-9.0..9.0));
            let b = Vec3::from_fn(|_, _| rng.gen_range(-9.0..9.0));
            assert_eq!(psi(&a, &b), psi(&b, &a));
        }
    }

    #[test]
    fn four_robot_example() {
        let pos = [
            Vec3::zeros(),
            Vec3::new(3.0, 0.0, 0.0),
            Vec3::new(0.0, 3.0, 0.0),
            Vec3::new(-3.0, 0.0, 0.0),
        ];
        let specs: Vec<_> = pos.iter().enumerate().map(|(k, p)| spec(k + 1, *p)).collect();
        let set = |v: &[usize]| v.iter().cloned().collect::<BTreeSet<_>>();
        let expect = [
            (set(&[2, 3, 4]), set(&[])),
            (set(&[1, 3]), set(&[1])),
            (set(&[1, 2, 4]), set(&[1, 2])),
            (set(&[1, 3]), set(&[1, 3])),
        ];
        for (k, (n, n_plus)) in expect.into_iter().enumerate() {
            let got = neighbor_sets(k + 1, &pos, &specs);
            assert_eq!(got, NeighborSets { n, n_plus });
        }
    }

    #[test]
    fn neighbor_sets_match_pairwise_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..200 {
            let n = rng.gen_range(1..8);
            let pos: Vec<Vec3> = (0..n).map(|_| Vec3::from_fn(|_, _| rng.gen_range(-6.0..6.0))).collect();
            let specs: Vec<_> = pos.iter().enumerate().map(|(k, p)| spec(k + 1, *p)).collect();
            for i in 1..=n {
                let got = neighbor_sets(i, &pos, &specs);
                for j in 1..=n {
                    let d = (pos[i - 1] - pos[j - 1]).norm();
                    let inside = j != i && (1.0..=5.0).contains(&d);
                    assert_eq!(got.n.contains(&j), inside);
                    assert_eq!(got.n_plus.contains(&j), inside && j < i);
                }
                assert!(got.n_plus.is_subset(&got.n));
            }
        }
        let far = [Vec3::zeros(), Vec3::new(10.0, 0.0, 0.0)];
        let specs = [spec(1, far[0]), spec(2, far[1])];
        assert_eq!(neighbor_sets(2, &far, &specs), NeighborSets::default());
    }

    #[test]
    fn f_ca_boundaries() {
        let p = Vec3::new(-3.0, 2.0, 1.0);
        let (f, g, h) = (eval_f(&p), eval_g(&p), eval_h(&p));
        assert_eq!(eval_f_ca(3, &p, &[], &f, &g, &h).unwrap(), f);
        // Lower priority neighbors are ignored.
        let low = nb(4, p + Vec3::new(0.0, 1.5, 0.0));
        assert_eq!(eval_f_ca(3, &p, &[low], &f, &g, &h).unwrap(), f);
        let at_rd = nb(1, p + Vec3::new(0.0, 0.0, 5.0));
        assert_eq!(eval_f_ca(3, &p, &[at_rd], &f, &g, &h).unwrap(), f);
        let at_rc = nb(1, p + Vec3::new(0.0, 0.0, 1.0));
        let got = eval_f_ca(3, &p, &[at_rc], &f, &g, &h).unwrap();
        let n = -Vec3::z();
        let tb = n.cross(&f).cross(&n);
        assert!((got - tb).norm() < 1e-12 * tb.norm());
        assert!(got.dot(&n).abs() < 1e-12 * got.norm());
    }

    #[test]
    fn ca_frame_reductions() {
        let p = Vec3::new(-3.0, 2.0, 1.0);
        let (f, g, h) = (eval_f(&p), eval_g(&p), eval_h(&p));
        let free = ca_frame(2, &p, &[], &f, &g, &h).unwrap();
        assert_eq!(free.kind, FrameKind::Free);
        let want = build_frame(f, h, g).unwrap();
        assert!((free.triad.r_a.matrix() - want.r_a.matrix()).norm() < 1e-12);
        let at_rc = nb(1, p - Vec3::new(0.0, 0.6, 0.8));
        let surf = ca_frame(2, &p, &[at_rc], &f, &g, &h).unwrap();
        let n = Vec3::new(0.0, 0.6, 0.8);
        let ta = n.cross(&f);
        let want = build_frame(ta.cross(&n), ta, n).unwrap();
        assert!((surf.triad.r_a.matrix() - want.r_a.matrix()).norm() < 1e-9);
    }

    #[test]
    fn ca_frame_orthogonal_at_random_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..2000 {
            let p = Vec3::from_fn(|_, _| rng.gen_range(-20.0..20.0));
            let off = Vec3::from_fn(|_, _| rng.gen_range(-1.0..1.0)).normalize() * rng.gen_range(1.0..5.0);
            let (f, g, h) = (eval_f(&p), eval_g(&p), eval_h(&p));
            let fr = ca_frame(2, &p, &[nb(1, p + off)], &f, &g, &h).unwrap();
            let t = fr.triad;
            for (a, b) in [(t.zeta_x, t.zeta_y), (t.zeta_x, t.zeta_z), (t.zeta_y, t.zeta_z)] {
                assert!(a.dot(&b).abs() <= 1e-9 * a.norm() * b.norm());
            }
        }
    }
}

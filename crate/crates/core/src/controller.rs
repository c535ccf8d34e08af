//! Attitude tracking of the auxiliary frame and the surge-speed law.

use crate::so3::{hat, log_so3, log_so3_any, vee_skew_part, Mat3, Rot3, So3Error, Vec3};

/// Body-frame commands: angular rate and forward speed along body `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlInput {
    pub omega: Vec3,
    pub v_x: f64,
}

impl ControlInput {
    pub fn zero() -> Self {
        ControlInput { omega: Vec3::zeros(), v_x: 0.0 }
    }

    /// Body velocity; lateral and vertical components are always zero.
    pub fn body_velocity(&self) -> Vec3 {
        Vec3::new(self.v_x, 0.0, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttitudeError {
    /// `R_a^T R`.
    pub r_e: Rot3,
    pub log_r_e: Vec3,
}

/// `R_e = R_a^T R` and its principal logarithm; fails within the cut-locus band.
pub fn attitude_error(r: &Rot3, r_a: &Rot3) -> Result<AttitudeError, So3Error> {
    let r_e = r_a.transpose().compose(r);
    Ok(AttitudeError { r_e, log_r_e: log_so3(&r_e)? })
}

/// As [`attitude_error`], resolving a rotation by π to a deterministic axis.
pub fn attitude_error_any(r: &Rot3, r_a: &Rot3) -> AttitudeError {
    let r_e = r_a.transpose().compose(r);
    AttitudeError { r_e, log_r_e: log_so3_any(&r_e) }
}

/// `hat(Ω) = -k_w log(R_e) + R^T Ṙ_a R_a^T R`, skew-symmetrized before `vee`.
pub fn control_omega(err: &AttitudeError, r: &Rot3, r_a_dot: &Mat3, r_a: &Rot3, k_w: f64) -> Vec3 {
    let rm = r.matrix();
    let feedforward = rm.transpose() * r_a_dot * r_a.matrix().transpose() * rm;
    let m = hat(&err.log_r_e).matrix() * (-k_w) + feedforward;
    vee_skew_part(&m)
}

/// `v_x = k_v |p - p_d|`.
pub fn control_speed(p: &Vec3, p_d: &Vec3, k_v: f64) -> f64 {
    k_v * (p - p_d).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::so3::exp_so3;
    use proptest::prelude::*;

    fn rot(w: [f64; 3]) -> Rot3 {
        exp_so3(&Vec3::from(w))
    }

    #[test]
    fn error_at_equilibrium() {
        let ra = rot([0.3, -1.1, 0.4]);
        let e = attitude_error(&ra, &ra).unwrap();
        assert!((e.r_e.matrix() - Mat3::identity()).norm() < 1e-15);
        assert!(e.log_r_e.norm() < 1e-15);
        assert_eq!(control_omega(&e, &ra, &Mat3::zeros(), &ra, 2.0), Vec3::zeros());
    }

    #[test]
    fn error_round_trip() {
        let ra = rot([0.3, -1.1, 0.4]);
        let r = ra.compose(&rot([0.2, 0.0, 0.0]));
        let e = attitude_error(&r, &ra).unwrap();
        assert!((e.log_r_e - Vec3::new(0.2, 0.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn cut_locus_propagates() {
        let ra = Rot3::identity();
        let r = rot([std::f64::consts::PI, 0.0, 0.0]);
        assert!(attitude_error(&r, &ra).is_err());
        assert!((attitude_error_any(&r, &ra).log_r_e.norm() - std::f64::consts::PI).abs() < 1e-9);
    }

    #[test]
    fn pure_feedforward() {
        let ra = rot([-0.7, 0.2, 1.3]);
        let w = Vec3::new(0.4, -0.25, 0.9);
        let ra_dot = ra.matrix() * hat(&w).matrix();
        let e = attitude_error(&ra, &ra).unwrap();
        let om = control_omega(&e, &ra, &ra_dot, &ra, 2.0);
        assert!((om - w).norm() < 1e-12);
    }

    #[test]
    fn exponential_decay_with_static_reference() {
        let k_w: f64 = 2.0;
        let ra = rot([0.5, 0.1, -0.3]);
        let mut r = ra.compose(&rot([1.2, -0.8, 0.9]));
        let e0 = attitude_error(&r, &ra).unwrap().log_r_e.norm();
        let dt = 1e-3;
        let steps = (3.0 / k_w / dt).round() as usize;
        for k in 1..=steps {
            let e = attitude_error(&r, &ra).unwrap();
            let om = control_omega(&e, &r, &Mat3::zeros(), &ra, k_w);
            r = r.compose(&exp_so3(&(om * dt)));
            let got = attitude_error(&r, &ra).unwrap().log_r_e.norm();
            let want = e0 * (-k_w * k as f64 * dt).exp();
            assert!((got - want).abs() <= 0.05 * want, "t={} {got} {want}", k as f64 * dt);
        }
    }

    #[test]
    fn speed_law() {
        assert_eq!(control_speed(&Vec3::new(1.0, 2.0, 3.0), &Vec3::new(1.0, 2.0, 3.0), 0.1), 0.0);
        assert!((control_speed(&Vec3::new(-10.0, 0.0, 0.0), &Vec3::zeros(), 0.1) - 1.0).abs() < 1e-15);
        let p = Vec3::new(3.0, -4.0, 1.0);
        assert_eq!(control_speed(&(p * 2.0), &Vec3::zeros(), 0.3), 2.0 * control_speed(&p, &Vec3::zeros(), 0.3));
    }

    proptest! {
        #[test]
        fn error_norm_is_left_invariant(
            a in proptest::array::uniform3(-2.0f64..2.0),
            b in proptest::array::uniform3(-2.0f64..2.0),
            c in proptest::array::uniform3(-2.0f64..2.0),
        ) {
            let (r, ra, q) = (rot(a), rot(b), rot(c));
            let Ok(e1) = attitude_error(&r, &ra) else { return Ok(()) };
            let Ok(e2) = attitude_error(&q.compose(&r), &q.compose(&ra)) else { return Ok(()) };
            prop_assert!((e1.log_r_e.norm() - e2.log_r_e.norm()).abs() < 1e-9);
        }
    }
}

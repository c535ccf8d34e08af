mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use vfnav::avoidance::{bump_chi, eval_f_oa, eval_normal, eval_upsilon, xi_oa, xi_oa_det};
use vfnav::corpus::Suite;
use vfnav::nav_field::{eval_f, eval_goal_fields, Goal};
use vfnav::simulator::run_scenario;
use vfnav::so3::{exp_so3, Vec3};

fn vec3(r: f64) -> impl Strategy<Value = Vec3> {
    proptest::array::uniform3(-r..r).prop_map(Vec3::from)
}

fn unit() -> impl Strategy<Value = Vec3> {
    vec3(1.0).prop_filter("non-degenerate", |v| v.norm() > 0.1).prop_map(|v| v / v.norm())
}

proptest! {
    #[test]
    fn integral_curves_stay_on_their_circle(p0 in vec3(10.0)) {
        prop_assume!(rho(&p0) > 0.5);
        let c = circle_radius(&p0);
        let angle0 = p0.z.atan2(p0.y);
        for p in follow_integral_curve(&p0, 1e-2 * c, 50_000) {
            prop_assert!((p.z.atan2(p.y) - angle0).abs() < 1e-9);
            prop_assert!((p.x * p.x + rho(&p).powi(2) - 2.0 * c * rho(&p)).abs() < 1e-6 * c * c);
        }
    }

    #[test]
    fn composite_field_is_tangent_on_the_surface(
        shape in 0usize..3,
        dir in unit(),
        goal_p in vec3(15.0),
        heading in unit(),
    ) {
        let (_, ob) = shapes().swap_remove(shape);
        let goal = Goal::new(goal_p, heading).unwrap();
        prop_assume!(eval_upsilon(&goal.p_d, &ob) > ob.c_bar);
        let p = point_on_level(&ob, &dir, 1.0);
        let [f, g, h] = eval_goal_fields(&p, &goal);
        let f_oa = eval_f_oa(&p, &f, std::slice::from_ref(&ob), (&g, &h)).unwrap();
        let n = eval_normal(&p, &ob).unwrap();
        prop_assert!(f_oa.dot(&n).abs() <= 1e-9 * f_oa.norm() * n.norm());
    }

    #[test]
    fn composite_field_never_vanishes_in_the_shell(
        shape in 0usize..3,
        dir in unit(),
        level in 0.0f64..1.0,
        goal_p in vec3(15.0),
        heading in unit(),
    ) {
        let (_, ob) = shapes().swap_remove(shape);
        let goal = Goal::new(goal_p, heading).unwrap();
        prop_assume!(eval_upsilon(&goal.p_d, &ob) > ob.c_bar);
        let p = point_on_level(&ob, &dir, 1.0 + level * (ob.c_bar - 1.0));
        let [f, g, h] = eval_goal_fields(&p, &goal);
        let f_oa = eval_f_oa(&p, &f, std::slice::from_ref(&ob), (&g, &h)).unwrap();
        prop_assert!(f_oa.norm() > 0.0);
        let chi = bump_chi(eval_upsilon(&p, &ob), ob.c_bar);
        if chi > 0.0 {
            let n = eval_normal(&p, &ob).unwrap();
            let det = xi_oa(chi, &(n / n.norm())).determinant();
            prop_assert!(det > 0.0);
            prop_assert!((det - xi_oa_det(chi, 1.0)).abs() < 1e-12);
        }
    }
}

#[test]
fn goal_field_vanishes_only_at_the_goal() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10_000 {
        let p = rand_vec(&mut rng, 10.0);
        assert!(eval_f(&p).norm() > 0.0);
    }
    assert_eq!(eval_f(&Vec3::zeros()), Vec3::zeros());
}

#[test]
fn random_starts_among_obstacles_never_penetrate() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let base = corpus_scenarios(Suite::Example2).remove(0).1;
    let mut runs = 0;
    while runs < 8 {
        let mut sc = base.clone();
        sc.robots[0].p0 = Vec3::new(rng.gen_range(-10.0..10.0), rng.gen_range(-5.0..50.0), rng.gen_range(-5.0..45.0));
        sc.robots[0].r0 = exp_so3(&rand_vec(&mut rng, 3.0));
        if sc.obstacles.iter().any(|ob| eval_upsilon(&sc.robots[0].p0, &ob.inflated(1.0)) < ob.c_bar) {
            continue;
        }
        let out = run_scenario(&sc).unwrap();
        assert!(out.report.obstacle_free, "start {:?}: min Υ {}", sc.robots[0].p0, out.report.min_ups);
        assert!(out.report.min_ups >= 1.0 - 1e-9);
        runs += 1;
    }
}

mod common;

use common::rk4;
use vfnav::multi_robot::RobotSpec;
use vfnav::nav_field::{eval_f, frame_from_jets, nav_triad_jets, Goal};
use vfnav::simulator::{run_scenario, Scenario, SimConfig};
use vfnav::so3::{Rot3, Vec3};

fn single(p0: Vec3, r0: Rot3, dt: f64, t_max: f64) -> Scenario {
    Scenario {
        sim: SimConfig { dt, t_max, eps_goal: 1e-9, output_stride: 1, seed: 0 },
        robots: vec![RobotSpec {
            id: 1,
            p0,
            r0,
            goal: Goal::origin(),
            r_c: 1.0,
            r_d: 5.0,
            k_w: 2.0,
            k_v: 0.1,
        }],
        obstacles: vec![],
    }
}

fn final_position(p0: Vec3, r0: Rot3, dt: f64, t_max: f64) -> Vec3 {
    let out = run_scenario(&single(p0, r0, dt, t_max)).unwrap();
    let last = out.samples.last().unwrap();
    assert!((last.t - t_max).abs() < 1e-9 * t_max, "run stopped at {}", last.t);
    last.robots[0].p
}

#[test]
fn halving_dt_halves_the_error() {
    let starts = [
        (Vec3::new(-10.0, 5.0, 5.0), Rot3::identity()),
        (Vec3::new(-12.0, -4.0, 7.0), Rot3::from_euler_zyx(0.3, -0.2, 0.8)),
        (Vec3::new(3.0, 8.0, -6.0), Rot3::from_euler_zyx(-0.5, 0.4, 2.0)),
    ];
    for (p0, r0) in starts {
        let p: Vec<Vec3> = [0.02, 0.01, 0.005].iter().map(|&dt| final_position(p0, r0, dt, 20.0)).collect();
        let ratio = (p[0] - p[1]).norm() / (p[1] - p[2]).norm();
        assert!((1.7..=2.3).contains(&ratio), "start {p0:?}: ratio {ratio}");
    }
}

/// Reference path of `ṗ = k_v |p| F / |F|`, sampled every `dt`.
fn perfect_attitude_path(p0: Vec3, k_v: f64, dt: f64, steps: usize) -> Vec<Vec3> {
    let rhs = |p: &Vec3| {
        let f = eval_f(p);
        f * (k_v * p.norm() / f.norm())
    };
    let sub = 10;
    let mut p = p0;
    let mut out = vec![p];
    for _ in 0..steps {
        for _ in 0..sub {
            p = rk4(&p, dt / sub as f64, rhs);
        }
        out.push(p);
    }
    out
}

#[test]
fn free_space_matches_perfect_attitude_flow() {
    for p0 in [Vec3::new(-10.0, 5.0, 5.0), Vec3::new(-6.0, -9.0, 2.0), Vec3::new(4.0, 6.0, 8.0)] {
        let jets = nav_triad_jets(&p0, &Vec3::zeros(), &Goal::origin());
        let r0 = frame_from_jets(&jets).unwrap().0.r_a;
        let dt = 0.01;
        let t_max = 60.0;
        let out = run_scenario(&single(p0, r0, dt, t_max)).unwrap();
        let reference = perfect_attitude_path(p0, 0.1, dt, (t_max / dt) as usize);
        let transient = 5.0 / 2.0;
        let mut checked = 0;
        for s in &out.samples {
            if s.t < transient {
                continue;
            }
            let k = (s.t / dt).round() as usize;
            let want = reference[k];
            let err = (s.robots[0].p - want).norm() / want.norm();
            assert!(err < 0.02, "start {p0:?}, t = {}: relative deviation {err}", s.t);
            checked += 1;
        }
        assert!(checked > 5000);
    }
}

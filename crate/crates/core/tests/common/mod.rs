#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use vfnav::avoidance::{eval_upsilon, Obstacle};
use vfnav::composite::{obstacle_avoider, plan_frame, PlannedFrame};
use vfnav::corpus::{suite, Suite};
use vfnav::nav_field::eval_f;
use vfnav::output::write_trajectory_to;
use vfnav::simulator::{Scenario, SimOutput};
use vfnav::so3::Vec3;

pub fn rand_vec(rng: &mut ChaCha8Rng, s: f64) -> Vec3 {
    Vec3::new(rng.gen_range(-s..s), rng.gen_range(-s..s), rng.gen_range(-s..s))
}

pub fn rand_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = rand_vec(rng, 1.0);
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

/// One classical RK4 step of `ṗ = f(p)`.
pub fn rk4(p: &Vec3, h: f64, f: impl Fn(&Vec3) -> Vec3) -> Vec3 {
    let k1 = f(p);
    let k2 = f(&(p + k1 * (h / 2.0)));
    let k3 = f(&(p + k2 * (h / 2.0)));
    let k4 = f(&(p + k3 * h));
    p + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// Distance from the x-axis.
pub fn rho(p: &Vec3) -> f64 {
    p.y.hypot(p.z)
}

/// Radius of the integral circle of `F` through `p`: the circle in the
/// plane of `p` and the x-axis, tangent to the x-axis at the origin.
pub fn circle_radius(p: &Vec3) -> f64 {
    (p.x * p.x + rho(p).powi(2)) / (2.0 * rho(p))
}

/// Follows `ṗ = F(p)` with steps moving about 1% of `|p|`, until `|p|`
/// falls below `stop` or `max_steps` elapse. Returns the visited points.
pub fn follow_integral_curve(p0: &Vec3, stop: f64, max_steps: usize) -> Vec<Vec3> {
    let mut p = *p0;
    let mut out = vec![p];
    for _ in 0..max_steps {
        let n = p.norm();
        if n < stop {
            break;
        }
        p = rk4(&p, 0.01 / n, eval_f);
        out.push(p);
    }
    out
}

/// Three reactive-region shapes used by the property checks.
pub fn shapes() -> Vec<(&'static str, Obstacle)> {
    let base = |semi_axes, exponents, c_bar| Obstacle {
        center: Vec3::new(4.0, -3.0, 2.0),
        velocity: Vec3::zeros(),
        semi_axes,
        exponents,
        c_bar,
    };
    vec![
        ("sphere", base([2.0, 2.0, 2.0], [1, 1, 1], 2.0)),
        ("ellipsoid", base([3.0, 1.5, 2.0], [1, 1, 1], 1.8)),
        ("high-exponent", base([2.0, 2.5, 1.5], [3, 2, 4], 1.6)),
    ]
}

/// Point on the level set `Υ = level` along `dir` from the center, by bisection.
pub fn point_on_level(ob: &Obstacle, dir: &Vec3, level: f64) -> Vec3 {
    let (mut lo, mut hi) = (0.0, 1.0);
    while eval_upsilon(&(ob.center + dir * hi), ob) < level {
        hi *= 2.0;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if eval_upsilon(&(ob.center + dir * mid), ob) < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    ob.center + dir * hi
}

/// Planned frame for robot `k` as the simulator would build it from
/// obstacles alone (each inflated by the robot's `r_c`).
pub fn obstacle_frame(sc: &Scenario, k: usize, p: &Vec3, p_dot: &Vec3, obstacles: &[Obstacle]) -> PlannedFrame {
    let spec = &sc.robots[k];
    let avoiders: Vec<_> = obstacles
        .iter()
        .enumerate()
        .filter_map(|(j, ob)| obstacle_avoider(p, p_dot, &ob.inflated(spec.r_c), j).unwrap())
        .collect();
    plan_frame(p, p_dot, &spec.goal, &avoiders).unwrap()
}

pub fn corpus_scenarios(s: Suite) -> Vec<(&'static str, Scenario)> {
    suite(s).iter().map(|e| (e.name, e.scenario().unwrap())).collect()
}

pub fn csv_bytes(out: &SimOutput) -> Vec<u8> {
    let mut buf = Vec::new();
    write_trajectory_to(&out.samples, &mut buf).unwrap();
    buf
}


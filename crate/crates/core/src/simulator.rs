//! Fixed-step simulation of several robots among moving obstacles.
//!
//! Each tick computes controls for every robot in ascending priority order
//! from the state at the start of the tick, then advances all robots with
//! the controls held constant over the step:
//!
//! * position: classical RK4 on `ṗ = v_x R(s) e_x` with `R(s) = R exp(sΩ)`,
//! * attitude: `R ← project(R exp(dt Ω))`,
//! * obstacles: `p_o ← p_o + dt ṗ_o`.

use thiserror::Error;

use crate::avoidance::{eval_upsilon, Obstacle};
use crate::composite::{obstacle_avoider, plan_frame, robot_avoider, FrameKind};
use crate::controller::{attitude_error_any, control_omega, control_speed, ControlInput};
use crate::multi_robot::{psi, Neighbor, RobotSpec};
use crate::so3::{exp_so3, project_to_so3, Mat3, Rot3, Vec3};

/// Heading error below which a robot that reached its goal counts as aligned.
pub const HEADING_TOL: f64 = 1e-2;
/// Slack on the obstacle margin `Υ >= 1`.
pub const SURFACE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub t_max: f64,
    pub eps_goal: f64,
    /// A sample is recorded every this many steps.
    pub output_stride: usize,
    /// Carried with the scenario; the dynamics are deterministic and do not draw from it.
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 0.01,
            t_max: 200.0,
            eps_goal: 1e-3,
            output_stride: 10,
            seed: 0,
        }
    }
}

/// Obstacles are stored as given; each robot sees them inflated by its own `r_c`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub sim: SimConfig,
    pub robots: Vec<RobotSpec>,
    pub obstacles: Vec<Obstacle>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotState {
    pub p: Vec3,
    pub r: Rot3,
    /// Set once the robot is within `eps_goal` of its goal; it then stays put.
    pub frozen: bool,
    /// Last auxiliary attitude that could be built, held when the frame degenerates.
    pub last_r_a: Option<Rot3>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub step: u64,
    pub t: f64,
    pub robots: Vec<RobotState>,
    pub obstacles: Vec<Obstacle>,
}

impl SimState {
    pub fn initial(sc: &Scenario) -> Self {
        SimState {
            step: 0,
            t: 0.0,
            robots: sc
                .robots
                .iter()
                .map(|s| RobotState { p: s.p0, r: s.r0, frozen: false, last_r_a: None })
                .collect(),
            obstacles: sc.obstacles.clone(),
        }
    }
}

/// Per-robot record of one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotSample {
    pub id: usize,
    pub p: Vec3,
    pub r: Rot3,
    pub v_x: f64,
    pub omega: Vec3,
    /// Smallest active transition value, 1 outside every reactive region.
    pub chi_min: f64,
    /// Distance to the nearest other robot, `+inf` when alone.
    pub psi_min: f64,
    /// Smallest `Υ` over the inflated obstacles, `+inf` without obstacles.
    pub ups_min: f64,
    pub goal_err: f64,
    pub heading_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub robots: Vec<RobotSample>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("non-finite state for robot {id} at t = {t}")]
    NonFinite { id: usize, t: f64, sample: Box<TrajectorySample> },
    #[error("scenario robots must be listed in ascending id order")]
    Unordered,
}

/// Output of the control step for one robot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotCommand {
    pub control: ControlInput,
    /// World-frame velocity `v_x R e_x`.
    pub velocity: Vec3,
    pub chi_min: f64,
    pub frame_kind: Option<FrameKind>,
}

/// Advances one robot over `dt` with constant controls.
pub fn integrate_robot(p: &Vec3, r: &Rot3, u: &ControlInput, dt: f64) -> (Vec3, Rot3) {
    if u.v_x == 0.0 && u.omega == Vec3::zeros() {
        return (*p, *r);
    }
    let heading = |s: f64| r.compose(&exp_so3(&(u.omega * s))).x_axis() * u.v_x;
    let k1 = r.x_axis() * u.v_x;
    let k2 = heading(0.5 * dt);
    let k4 = heading(dt);
    let p_next = p + (k1 + k2 * 4.0 + k4) * (dt / 6.0);
    let m: Mat3 = r.matrix() * exp_so3(&(u.omega * dt)).matrix();
    let r_next = project_to_so3(&m).unwrap_or(*r);
    (p_next, r_next)
}

/// Controls for every robot, in priority order, from the current state.
pub fn compute_commands(state: &mut SimState, sc: &Scenario) -> Vec<RobotCommand> {
    let mut cmds: Vec<RobotCommand> = Vec::with_capacity(sc.robots.len());
    for (k, spec) in sc.robots.iter().enumerate() {
        let (ahead, rest) = state.robots.split_at_mut(k);
        let rs = &mut rest[0];
        if !rs.frozen && (rs.p - spec.goal.p_d).norm() < sc.sim.eps_goal {
            rs.frozen = true;
        }
        if rs.frozen {
            cmds.push(RobotCommand {
                control: ControlInput::zero(),
                velocity: Vec3::zeros(),
                chi_min: 1.0,
                frame_kind: None,
            });
            continue;
        }
        let p = rs.p;
        let v_x = control_speed(&p, &spec.goal.p_d, spec.k_v);
        let p_dot = rs.r.x_axis() * v_x;

        let mut avoiders = Vec::new();
        let mut blocked = false;
        for (j, ob) in state.obstacles.iter().enumerate() {
            match obstacle_avoider(&p, &p_dot, &ob.inflated(spec.r_c), j) {
                Ok(Some(a)) => avoiders.push(a),
                Ok(None) => {}
                Err(_) => blocked = true,
            }
        }
        for (j, other) in sc.robots[..k].iter().enumerate() {
            let nb = Neighbor {
                id: other.id,
                p: ahead[j].p,
                p_dot: cmds[j].velocity,
                r_c: other.r_c,
                r_d: other.r_d,
            };
            match robot_avoider(&p, &p_dot, &nb) {
                Ok(Some(a)) => avoiders.push(a),
                Ok(None) => {}
                Err(_) => blocked = true,
            }
        }
        let chi_min = avoiders.iter().map(|a| a.chi.v).fold(1.0, f64::min);

        let planned = if blocked { None } else { plan_frame(&p, &p_dot, &spec.goal, &avoiders).ok() };
        let (r_a, r_a_dot, kind) = match planned {
            Some(fr) => {
                rs.last_r_a = Some(fr.triad.r_a);
                (fr.triad.r_a, fr.rate.r_a_dot, Some(fr.kind))
            }
            None => (rs.last_r_a.unwrap_or(rs.r), Mat3::zeros(), None),
        };
        let err = attitude_error_any(&rs.r, &r_a);
        let omega = control_omega(&err, &rs.r, &r_a_dot, &r_a, spec.k_w);
        cmds.push(RobotCommand {
            control: ControlInput { omega, v_x },
            velocity: p_dot,
            chi_min,
            frame_kind: kind,
        });
    }
    cmds
}

/// One tick: controls in priority order, then integration of all robots
/// and obstacles. Returns the commands that were applied.
pub fn step(state: &mut SimState, sc: &Scenario) -> Result<Vec<RobotCommand>, SimError> {
    let cmds = compute_commands(state, sc);
    advance(state, sc, &cmds)?;
    Ok(cmds)
}

/// Integrates all robots under `cmds` and moves the obstacles.
pub fn advance(state: &mut SimState, sc: &Scenario, cmds: &[RobotCommand]) -> Result<(), SimError> {
    let dt = sc.sim.dt;
    for (rs, cmd) in state.robots.iter_mut().zip(cmds) {
        let (p, r) = integrate_robot(&rs.p, &rs.r, &cmd.control, dt);
        rs.p = p;
        rs.r = r;
    }
    for ob in &mut state.obstacles {
        ob.advance(dt);
    }
    state.step += 1;
    state.t = state.step as f64 * dt;
    for (k, rs) in state.robots.iter().enumerate() {
        let finite = rs.p.iter().all(|x| x.is_finite()) && rs.r.matrix().iter().all(|x| x.is_finite());
        if !finite {
            return Err(SimError::NonFinite {
                id: sc.robots[k].id,
                t: state.t,
                sample: Box::new(sample(state, sc, cmds)),
            });
        }
    }
    Ok(())
}

/// Safety margins at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Margins {
    /// Per robot, smallest `Υ` over obstacles inflated by that robot's `r_c`.
    pub ups: Vec<f64>,
    /// Per robot, distance to the nearest other robot.
    pub psi: Vec<f64>,
    pub min_ups: f64,
    pub min_psi: f64,
    pub obstacle_breach: bool,
    /// Some pair is closer than the larger of their dangerous radii.
    pub robot_breach: bool,
}

pub fn safety_monitor(state: &SimState, sc: &Scenario) -> Margins {
    let n = sc.robots.len();
    let mut ups = vec![f64::INFINITY; n];
    let mut psis = vec![f64::INFINITY; n];
    let mut robot_breach = false;
    for i in 0..n {
        let p = state.robots[i].p;
        for ob in &state.obstacles {
            ups[i] = ups[i].min(eval_upsilon(&p, &ob.inflated(sc.robots[i].r_c)));
        }
        for j in (i + 1)..n {
            let d = psi(&p, &state.robots[j].p);
            psis[i] = psis[i].min(d);
            psis[j] = psis[j].min(d);
            if d < sc.robots[i].r_c.max(sc.robots[j].r_c) {
                robot_breach = true;
            }
        }
    }
    let min_ups = ups.iter().cloned().fold(f64::INFINITY, f64::min);
    let min_psi = psis.iter().cloned().fold(f64::INFINITY, f64::min);
    Margins {
        obstacle_breach: min_ups < 1.0 - SURFACE_TOL,
        ups,
        psi: psis,
        min_ups,
        min_psi,
        robot_breach,
    }
}

fn sample(state: &SimState, sc: &Scenario, cmds: &[RobotCommand]) -> TrajectorySample {
    let m = safety_monitor(state, sc);
    let robots = sc
        .robots
        .iter()
        .enumerate()
        .map(|(k, spec)| {
            let rs = &state.robots[k];
            let (u, chi_min) = cmds
                .get(k)
                .map(|c| (c.control, c.chi_min))
                .unwrap_or((ControlInput::zero(), 1.0));
            RobotSample {
                id: spec.id,
                p: rs.p,
                r: rs.r,
                v_x: u.v_x,
                omega: u.omega,
                chi_min,
                psi_min: m.psi[k],
                ups_min: m.ups[k],
                goal_err: (rs.p - spec.goal.p_d).norm(),
                heading_err: (rs.r.x_axis() - spec.goal.e_d).norm(),
            }
        })
        .collect();
    TrajectorySample { t: state.t, robots }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobotReport {
    pub id: usize,
    pub reached: bool,
    pub final_goal_err: f64,
    pub final_heading_err: f64,
    /// Smallest `Υ` seen over the whole run.
    pub min_ups: f64,
    /// Smallest distance to another robot over the whole run.
    pub min_psi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub t_end: f64,
    pub steps: u64,
    pub robots: Vec<RobotReport>,
    pub min_ups: f64,
    pub min_psi: f64,
    /// Every robot within `eps_goal` of its goal with heading error below [`HEADING_TOL`].
    pub goal_reached: bool,
    /// No robot ever inside an inflated obstacle.
    pub obstacle_free: bool,
    /// No pair ever inside a dangerous radius.
    pub collision_free: bool,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.goal_reached && self.obstacle_free && self.collision_free
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub samples: Vec<TrajectorySample>,
    pub report: Report,
}

/// Runs until every robot has reached its goal or `t_max` elapses.
///
/// Samples are taken at step 0, every `output_stride` steps, and at the
/// final step. Safety margins are monitored at every step.
pub fn run_scenario(sc: &Scenario) -> Result<SimOutput, SimError> {
    if sc.robots.windows(2).any(|w| w[0].id >= w[1].id) {
        return Err(SimError::Unordered);
    }
    let n = sc.robots.len();
    let stride = sc.sim.output_stride.max(1) as u64;
    let mut state = SimState::initial(sc);
    let mut min_ups = vec![f64::INFINITY; n];
    let mut min_psi = vec![f64::INFINITY; n];
    let mut breach = (false, false);
    let mut track = |state: &SimState, min_ups: &mut [f64], min_psi: &mut [f64]| {
        let m = safety_monitor(state, sc);
        for k in 0..n {
            min_ups[k] = min_ups[k].min(m.ups[k]);
            min_psi[k] = min_psi[k].min(m.psi[k]);
        }
        breach.0 |= m.obstacle_breach;
        breach.1 |= m.robot_breach;
    };
    track(&state, &mut min_ups, &mut min_psi);

    let mut samples = Vec::new();
    let max_steps = (sc.sim.t_max / sc.sim.dt).round() as u64;
    loop {
        let cmds = compute_commands(&mut state, sc);
        if state.step >= max_steps || state.robots.iter().all(|r| r.frozen) {
            samples.push(sample(&state, sc, &cmds));
            break;
        }
        if state.step.is_multiple_of(stride) {
            samples.push(sample(&state, sc, &cmds));
        }
        advance(&mut state, sc, &cmds)?;
        track(&state, &mut min_ups, &mut min_psi);
    }

    let last = samples.last().expect("at least one sample");
    let robots: Vec<RobotReport> = last
        .robots
        .iter()
        .enumerate()
        .map(|(k, s)| RobotReport {
            id: s.id,
            reached: state.robots[k].frozen && s.heading_err < HEADING_TOL,
            final_goal_err: s.goal_err,
            final_heading_err: s.heading_err,
            min_ups: min_ups[k],
            min_psi: min_psi[k],
        })
        .collect();
    let report = Report {
        t_end: state.t,
        steps: state.step,
        goal_reached: robots.iter().all(|r| r.reached),
        min_ups: min_ups.iter().cloned().fold(f64::INFINITY, f64::min),
        min_psi: min_psi.iter().cloned().fold(f64::INFINITY, f64::min),
        obstacle_free: !breach.0,
        collision_free: !breach.1,
        robots,
    };
    Ok(SimOutput { samples, report })
}

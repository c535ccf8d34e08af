//! Scenario files: JSON schema, defaults, validation and canonical output.
//!
//! Diagnostic codes:
//!
//! | code | meaning |
//! |------|---------|
//! | E001 | malformed JSON or schema violation |
//! | E002 | invalid value (range, finiteness, non-unit heading, non-rotation) |
//! | E101 | a goal lies inside an obstacle's reactive region |
//! | E102 | two obstacle reactive regions overlap |
//! | E103 | a robot starts inside an obstacle |
//! | E104 | two robots start inside each other's dangerous radius |
//! | E105 | robot ids are not unique and contiguous from 1 |
//! | E106 | a goal lies inside the reactive sphere of a higher-priority robot's goal |

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::avoidance::{eval_upsilon, Obstacle};
use crate::multi_robot::RobotSpec;
use crate::nav_field::Goal;
use crate::simulator::{Scenario, SimConfig};
use crate::so3::{Rot3, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub sim: SimSection,
    pub robots: Vec<RobotEntry>,
    #[serde(default)]
    pub obstacles: Vec<ObstacleEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSection {
    pub dt: f64,
    pub t_max: f64,
    pub eps_goal: f64,
    pub output_stride: usize,
    pub seed: u64,
}

impl Default for SimSection {
    fn default() -> Self {
        let d = SimConfig::default();
        SimSection {
            dt: d.dt,
            t_max: d.t_max,
            eps_goal: d.eps_goal,
            output_stride: d.output_stride,
            seed: d.seed,
        }
    }
}

fn zero3() -> [f64; 3] {
    [0.0; 3]
}
fn unit_x() -> [f64; 3] {
    [1.0, 0.0, 0.0]
}
fn one() -> f64 {
    1.0
}
fn five() -> f64 {
    5.0
}
fn two() -> f64 {
    2.0
}
fn tenth() -> f64 {
    0.1
}
fn ones_u() -> [u32; 3] {
    [1; 3]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotEntry {
    pub id: usize,
    pub p0: [f64; 3],
    /// Roll, pitch, yaw in degrees, applied as `Rz(yaw) Ry(pitch) Rx(roll)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rpy0: Option<[f64; 3]>,
    /// Initial attitude as nine row-major numbers.
    #[serde(rename = "R0", default, skip_serializing_if = "Option::is_none")]
    pub r0: Option<[f64; 9]>,
    #[serde(default = "zero3")]
    pub p_d: [f64; 3],
    #[serde(default = "unit_x")]
    pub e_d: [f64; 3],
    #[serde(default = "one")]
    pub r_c: f64,
    #[serde(default = "five")]
    pub r_d: f64,
    #[serde(default = "two")]
    pub k_w: f64,
    #[serde(default = "tenth")]
    pub k_v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleEntry {
    pub center: [f64; 3],
    #[serde(default = "zero3")]
    pub velocity: [f64; 3],
    pub semi_axes: [f64; 3],
    #[serde(default = "ones_u")]
    pub exponents: [u32; 3],
    pub c_bar: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub code: &'static str,
    /// Location in the document, e.g. `robots[2].r_d`.
    pub path: String,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.code, self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("scenario rejected:\n{}", .0.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Issue>),
}

impl ScenarioError {
    pub fn issues(&self) -> &[Issue] {
        match self {
            ScenarioError::Invalid(v) => v,
            ScenarioError::Io { .. } => &[],
        }
    }
}

fn issue(code: &'static str, path: impl Into<String>, message: impl Into<String>) -> Issue {
    Issue { code, path: path.into(), message: message.into() }
}

pub fn parse_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_scenario_str(&text)
}

pub fn parse_scenario_str(text: &str) -> Result<Scenario, ScenarioError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ScenarioFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        ScenarioError::Invalid(vec![issue(
            "E001",
            path,
            inner.to_string(),
        )])
    })?;
    scenario_from_file(&file)
}

fn v3(a: &[f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Converts and validates a parsed document.
pub fn scenario_from_file(file: &ScenarioFile) -> Result<Scenario, ScenarioError> {
    let mut issues = Vec::new();
    let s = &file.sim;
    if !(s.dt > 0.0 && s.dt.is_finite()) {
        issues.push(issue("E002", "sim.dt", format!("must be positive, got {}", s.dt)));
    }
    if !(s.t_max > s.dt && s.t_max.is_finite()) {
        issues.push(issue("E002", "sim.t_max", format!("must exceed dt, got {}", s.t_max)));
    }
    if !(s.eps_goal > 0.0 && s.eps_goal.is_finite()) {
        issues.push(issue("E002", "sim.eps_goal", format!("must be positive, got {}", s.eps_goal)));
    }
    if s.output_stride == 0 {
        issues.push(issue("E002", "sim.output_stride", "must be at least 1"));
    }
    if file.robots.is_empty() {
        issues.push(issue("E002", "robots", "at least one robot is required"));
    }

    let mut robots = Vec::new();
    for (k, r) in file.robots.iter().enumerate() {
        let at = |f: &str| format!("robots[{k}].{f}");
        let before = issues.len();
        for (name, v) in [("p0", &r.p0[..]), ("p_d", &r.p_d[..]), ("e_d", &r.e_d[..])] {
            if !all_finite(v) {
                issues.push(issue("E002", at(name), "values must be finite"));
            }
        }
        for (name, v) in [("r_c", r.r_c), ("k_w", r.k_w), ("k_v", r.k_v)] {
            if !(v > 0.0 && v.is_finite()) {
                issues.push(issue("E002", at(name), format!("must be positive, got {v}")));
            }
        }
        if !(r.r_d > r.r_c && r.r_d.is_finite()) {
            issues.push(issue("E002", at("r_d"), format!("must exceed r_c, got {}", r.r_d)));
        }
        let r0 = match (&r.rpy0, &r.r0) {
            (Some(_), Some(_)) => {
                issues.push(issue("E002", at("R0"), "give either rpy0 or R0, not both"));
                None
            }
            (Some(a), None) if !all_finite(a) => {
                issues.push(issue("E002", at("rpy0"), "values must be finite"));
                None
            }
            (Some(a), None) => {
                Some(Rot3::from_euler_zyx(a[0].to_radians(), a[1].to_radians(), a[2].to_radians()))
            }
            (None, Some(m)) => match Rot3::from_row_major(m) {
                Ok(rot) => Some(rot),
                Err(e) => {
                    issues.push(issue("E002", at("R0"), e.to_string()));
                    None
                }
            },
            (None, None) => Some(Rot3::identity()),
        };
        let goal = match Goal::new(v3(&r.p_d), v3(&r.e_d)) {
            Ok(g) => Some(g),
            Err(e) => {
                issues.push(issue("E002", at("e_d"), e.to_string()));
                None
            }
        };
        if let (Some(r0), Some(goal), true) = (r0, goal, issues.len() == before) {
            robots.push(RobotSpec {
                id: r.id,
                p0: v3(&r.p0),
                r0,
                goal,
                r_c: r.r_c,
                r_d: r.r_d,
                k_w: r.k_w,
                k_v: r.k_v,
            });
        }
    }

    let mut ids: Vec<usize> = file.robots.iter().map(|r| r.id).collect();
    ids.sort_unstable();
    if ids.iter().enumerate().any(|(k, &id)| id != k + 1) {
        issues.push(issue("E105", "robots", format!("ids must be 1..={} without gaps or repeats", ids.len())));
    }

    let obstacles = convert_obstacles(&file.obstacles, &mut issues);

    if issues.is_empty() {
        robots.sort_by_key(|r| r.id);
        let sc = Scenario {
            sim: SimConfig {
                dt: s.dt,
                t_max: s.t_max,
                eps_goal: s.eps_goal,
                output_stride: s.output_stride,
                seed: s.seed,
            },
            robots,
            obstacles,
        };
        issues.extend(check_geometry(&sc));
        if issues.is_empty() {
            return Ok(sc);
        }
    }
    Err(ScenarioError::Invalid(issues))
}

fn convert_obstacles(entries: &[ObstacleEntry], issues: &mut Vec<Issue>) -> Vec<Obstacle> {
    let mut obstacles = Vec::new();
    for (k, o) in entries.iter().enumerate() {
        let at = |f: &str| format!("obstacles[{k}].{f}");
        let before = issues.len();
        for (name, v) in [("center", &o.center), ("velocity", &o.velocity)] {
            if !all_finite(v) {
                issues.push(issue("E002", at(name), "values must be finite"));
            }
        }
        if !o.semi_axes.iter().all(|&a| a > 0.0 && a.is_finite()) {
            issues.push(issue("E002", at("semi_axes"), "must be positive"));
        }
        if o.exponents.iter().any(|&e| e == 0 || e > 32) {
            issues.push(issue("E002", at("exponents"), "must lie in 1..=32"));
        }
        if !(o.c_bar > 1.0 && o.c_bar.is_finite()) {
            issues.push(issue("E002", at("c_bar"), format!("must exceed 1, got {}", o.c_bar)));
        }
        if issues.len() == before {
            obstacles.push(Obstacle {
                center: v3(&o.center),
                velocity: v3(&o.velocity),
                semi_axes: o.semi_axes,
                exponents: o.exponents,
                c_bar: o.c_bar,
            });
        }
    }
    obstacles
}

/// Obstacle list from a JSON array, or from any object with an `obstacles` key.
pub fn parse_obstacles_str(text: &str) -> Result<Vec<Obstacle>, ScenarioError> {
    let schema = |path: String, message: String| ScenarioError::Invalid(vec![issue("E001", path, message)]);
    let doc: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| schema(String::new(), e.to_string()))?;
    let (prefix, list) = match doc {
        serde_json::Value::Object(mut m) => match m.remove("obstacles") {
            Some(v) => ("obstacles", v),
            None => return Err(schema(String::new(), "expected an array or an object with `obstacles`".into())),
        },
        v => ("", v),
    };
    let entries: Vec<ObstacleEntry> = serde_path_to_error::deserialize(list).map_err(|e| {
        let path = e.path().to_string();
        schema(format!("{prefix}{path}"), e.into_inner().to_string())
    })?;
    let mut issues = Vec::new();
    let obstacles = convert_obstacles(&entries, &mut issues);
    if issues.is_empty() {
        Ok(obstacles)
    } else {
        Err(ScenarioError::Invalid(issues))
    }
}

pub fn parse_obstacles(path: &Path) -> Result<Vec<Obstacle>, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_obstacles_str(&text)
}

/// Checks the geometric assumptions on a structurally valid scenario.
pub fn check_geometry(sc: &Scenario) -> Vec<Issue> {
    let mut issues = Vec::new();
    for (k, r) in sc.robots.iter().enumerate() {
        for (j, ob) in sc.obstacles.iter().enumerate() {
            let inf = ob.inflated(r.r_c);
            if eval_upsilon(&r.goal.p_d, &inf) <= inf.c_bar {
                issues.push(issue(
                    "E101",
                    format!("robots[{k}].p_d"),
                    format!("goal lies inside the reactive region of obstacles[{j}]"),
                ));
            }
            if eval_upsilon(&r.p0, &inf) < 1.0 {
                issues.push(issue(
                    "E103",
                    format!("robots[{k}].p0"),
                    format!("start lies inside obstacles[{j}] (inflated by r_c)"),
                ));
            }
        }
    }
    if let Some(r_c) = sc.robots.iter().map(|r| r.r_c).reduce(f64::max) {
        for a in 0..sc.obstacles.len() {
            for b in (a + 1)..sc.obstacles.len() {
                let (oa, ob) = (sc.obstacles[a].inflated(r_c), sc.obstacles[b].inflated(r_c));
                if reactive_regions_overlap(&oa, &ob) {
                    issues.push(issue(
                        "E102",
                        format!("obstacles[{b}]"),
                        format!("reactive region overlaps that of obstacles[{a}]"),
                    ));
                }
            }
        }
    }
    for (a, ra) in sc.robots.iter().enumerate() {
        for (b, rb) in sc.robots.iter().enumerate().skip(a + 1) {
            if (ra.p0 - rb.p0).norm() < ra.r_c.max(rb.r_c) {
                issues.push(issue(
                    "E104",
                    format!("robots[{b}].p0"),
                    format!("start is within the dangerous radius of robot {}", ra.id),
                ));
            }
            let (hi, lo, lo_idx) = if ra.id < rb.id { (ra, rb, b) } else { (rb, ra, a) };
            if (hi.goal.p_d - lo.goal.p_d).norm() <= hi.r_d {
                issues.push(issue(
                    "E106",
                    format!("robots[{lo_idx}].p_d"),
                    format!("goal lies within r_d of the goal of higher-priority robot {}", hi.id),
                ));
            }
        }
    }
    issues
}

/// Whether `{Υ_a <= c̄_a}` and `{Υ_b <= c̄_b}` intersect.
///
/// Both sets are convex. Disjoint bounding boxes settle the question;
/// otherwise each boundary is sampled along rays from its center (located
/// by bisection, since `Υ` grows monotonically along rays) and tested
/// against the other set, together with both centers.
pub fn reactive_regions_overlap(a: &Obstacle, b: &Obstacle) -> bool {
    let (ea, eb) = (a.level_extent(a.c_bar), b.level_extent(b.c_bar));
    let d = b.center - a.center;
    if (0..3).any(|k| d[k].abs() > ea[k] + eb[k]) {
        return false;
    }
    let inside = |p: &Vec3, o: &Obstacle| eval_upsilon(p, o) <= o.c_bar;
    if inside(&a.center, b) || inside(&b.center, a) {
        return true;
    }
    let boundary_hits = |o: &Obstacle, other: &Obstacle| {
        let reach = o.level_extent(o.c_bar).norm() * 1.01;
        let n = 48;
        for i in 0..n {
            let theta = std::f64::consts::PI * (i as f64 + 0.5) / n as f64;
            for j in 0..(2 * n) {
                let phi = std::f64::consts::PI * j as f64 / n as f64;
                let dir = Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
                let (mut lo, mut hi) = (0.0, reach);
                for _ in 0..50 {
                    let mid = 0.5 * (lo + hi);
                    if eval_upsilon(&(o.center + dir * mid), o) <= o.c_bar {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                if inside(&(o.center + dir * lo), other) {
                    return true;
                }
            }
        }
        false
    };
    boundary_hits(a, b) || boundary_hits(b, a)
}

/// Canonical document: every field explicit, attitude as `R0`.
pub fn to_file(sc: &Scenario) -> ScenarioFile {
    let a3 = |v: &Vec3| [v.x, v.y, v.z];
    ScenarioFile {
        sim: SimSection {
            dt: sc.sim.dt,
            t_max: sc.sim.t_max,
            eps_goal: sc.sim.eps_goal,
            output_stride: sc.sim.output_stride,
            seed: sc.sim.seed,
        },
        robots: sc
            .robots
            .iter()
            .map(|r| RobotEntry {
                id: r.id,
                p0: a3(&r.p0),
                rpy0: None,
                r0: Some(r.r0.row_major()),
                p_d: a3(&r.goal.p_d),
                e_d: a3(&r.goal.e_d),
                r_c: r.r_c,
                r_d: r.r_d,
                k_w: r.k_w,
                k_v: r.k_v,
            })
            .collect(),
        obstacles: sc
            .obstacles
            .iter()
            .map(|o| ObstacleEntry {
                center: a3(&o.center),
                velocity: a3(&o.velocity),
                semi_axes: o.semi_axes,
                exponents: o.exponents,
                c_bar: o.c_bar,
            })
            .collect(),
    }
}

pub fn emit_scenario(sc: &Scenario) -> String {
    serde_json::to_string_pretty(&to_file(sc)).expect("scenario documents always serialize")
}

//! Trajectory CSV, run reports and field-grid export.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::avoidance::{eval_f_oa, Obstacle};
use crate::nav_field::{eval_goal_fields, Goal};
use crate::simulator::{Report, TrajectorySample};
use crate::so3::Vec3;

pub const TRAJECTORY_HEADER: [&str; 23] = [
    "t", "id", "x", "y", "z", "r11", "r12", "r13", "r21", "r22", "r23", "r31", "r32", "r33", "vx",
    "wx", "wy", "wz", "chi_min", "psi_min", "ups_min", "goal_err", "heading_err",
];

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("{0}")]
    Grid(String),
    #[error("{path}: row {row}: {message}")]
    Parse { path: String, row: usize, message: String },
}

/// Formats like C's `%.17g`: 17 significant digits, trailing zeros removed,
/// exponent notation outside `1e-4 <= |x| < 1e17`.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.16e}", x);
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: String| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if (-4..17).contains(&exp) {
        trim(format!("{:.*}", (16 - exp) as usize, x))
    } else {
        let m = trim(mant.to_string());
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn sample_rows(samples: &[TrajectorySample]) -> impl Iterator<Item = Vec<String>> + '_ {
    samples.iter().flat_map(|s| {
        s.robots.iter().map(move |r| {
            let mut row = vec![fmt_g17(s.t), r.id.to_string()];
            row.extend(r.p.iter().map(|&v| fmt_g17(v)));
            row.extend(r.r.row_major().iter().map(|&v| fmt_g17(v)));
            row.push(fmt_g17(r.v_x));
            row.extend(r.omega.iter().map(|&v| fmt_g17(v)));
            for v in [r.chi_min, r.psi_min, r.ups_min, r.goal_err, r.heading_err] {
                row.push(fmt_g17(v));
            }
            row
        })
    })
}

/// Writes the CSV to any sink; one row per sample per robot.
pub fn write_trajectory_to<W: Write>(samples: &[TrajectorySample], sink: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(TRAJECTORY_HEADER)?;
    for row in sample_rows(samples) {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trajectory(samples: &[TrajectorySample], path: &Path) -> Result<(), OutputError> {
    let file = std::fs::File::create(path).map_err(|source| OutputError::Io {
        path: path.display().to_string(),
        source,
    })?;
    write_trajectory_to(samples, std::io::BufWriter::new(file)).map_err(|source| OutputError::Csv {
        path: path.display().to_string(),
        source,
    })
}

/// Reads a trajectory file back as raw numeric rows (the id column included).
pub fn read_trajectory(path: &Path) -> Result<Vec<[f64; 23]>, OutputError> {
    let p = path.display().to_string();
    let mut rd = csv::Reader::from_path(path).map_err(|source| OutputError::Csv { path: p.clone(), source })?;
    let header = rd.headers().map_err(|source| OutputError::Csv { path: p.clone(), source })?.clone();
    if header.iter().ne(TRAJECTORY_HEADER.iter().cloned()) {
        return Err(OutputError::Parse { path: p, row: 0, message: "unexpected header".into() });
    }
    let mut rows = Vec::new();
    for (k, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|source| OutputError::Csv { path: p.clone(), source })?;
        let mut row = [0.0; 23];
        for (slot, field) in row.iter_mut().zip(rec.iter()) {
            *slot = field.parse().map_err(|e| OutputError::Parse {
                path: p.clone(),
                row: k + 1,
                message: format!("{field:?}: {e}"),
            })?;
        }
        rows.push(row);
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
struct RobotReportJson {
    id: usize,
    reached: bool,
    final_goal_err: f64,
    final_heading_err: f64,
    min_upsilon: Option<f64>,
    min_psi: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
struct ReportJson {
    passed: bool,
    goal_reached: bool,
    obstacle_free: bool,
    collision_free: bool,
    t_end: f64,
    steps: u64,
    min_upsilon: Option<f64>,
    min_psi: Option<f64>,
    robots: Vec<RobotReportJson>,
}

/// Infinite margins (nothing to measure against) become `null`.
fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

pub fn report_json(report: &Report) -> String {
    let doc = ReportJson {
        passed: report.passed(),
        goal_reached: report.goal_reached,
        obstacle_free: report.obstacle_free,
        collision_free: report.collision_free,
        t_end: report.t_end,
        steps: report.steps,
        min_upsilon: finite(report.min_ups),
        min_psi: finite(report.min_psi),
        robots: report
            .robots
            .iter()
            .map(|r| RobotReportJson {
                id: r.id,
                reached: r.reached,
                final_goal_err: r.final_goal_err,
                final_heading_err: r.final_heading_err,
                min_upsilon: finite(r.min_ups),
                min_psi: finite(r.min_psi),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("report serializes")
}

/// Axis-aligned box sampled on a `resolution[0] x resolution[1] x resolution[2]` lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub lo: Vec3,
    pub hi: Vec3,
}

/// Rows `(x, y, z, Fx, Fy, Fz)` in x-major order. With obstacles the
/// field is the avoidance composite; points where it is undefined get NaN.
pub fn field_grid(
    goal: &Goal,
    obstacles: &[Obstacle],
    region: &Region,
    resolution: [usize; 3],
) -> Result<Vec<[f64; 6]>, OutputError> {
    if resolution.iter().any(|&n| n < 2) {
        return Err(OutputError::Grid("resolution must be at least 2 along every axis".into()));
    }
    if (0..3).any(|k| !(region.hi[k] > region.lo[k]) || !region.lo[k].is_finite() || !region.hi[k].is_finite()) {
        return Err(OutputError::Grid("region must have hi > lo along every axis".into()));
    }
    let coord = |k: usize, i: usize| {
        let t = i as f64 / (resolution[k] - 1) as f64;
        region.lo[k] + (region.hi[k] - region.lo[k]) * t
    };
    let mut rows = Vec::with_capacity(resolution.iter().product());
    for i in 0..resolution[0] {
        for j in 0..resolution[1] {
            for l in 0..resolution[2] {
                let p = Vec3::new(coord(0, i), coord(1, j), coord(2, l));
                let [f, g, h] = eval_goal_fields(&p, goal);
                let v = if obstacles.is_empty() {
                    f
                } else {
                    eval_f_oa(&p, &f, obstacles, (&g, &h)).unwrap_or(Vec3::repeat(f64::NAN))
                };
                rows.push([p.x, p.y, p.z, v.x, v.y, v.z]);
            }
        }
    }
    Ok(rows)
}

pub fn export_field_grid(
    goal: &Goal,
    obstacles: &[Obstacle],
    region: &Region,
    resolution: [usize; 3],
    path: &Path,
) -> Result<(), OutputError> {
    let rows = field_grid(goal, obstacles, region, resolution)?;
    let p = path.display().to_string();
    let mut w = csv::Writer::from_path(path).map_err(|source| OutputError::Csv { path: p.clone(), source })?;
    let mut put = |rec: Vec<String>| w.write_record(&rec).map_err(|source| OutputError::Csv { path: p.clone(), source });
    put(["x", "y", "z", "Fx", "Fy", "Fz"].iter().map(|s| s.to_string()).collect())?;
    for r in rows {
        put(r.iter().map(|&v| fmt_g17(v)).collect())?;
    }
    w.flush().map_err(|source| OutputError::Io { path: p, source })
}

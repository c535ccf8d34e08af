use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use vfnav::corpus::{self, Suite};
use vfnav::nav_field::Goal;
use vfnav::output::{export_field_grid, report_json, write_trajectory, Region};
use vfnav::scenario::{parse_obstacles, parse_scenario};
use vfnav::simulator::{run_scenario, Report};
use vfnav::so3::Vec3;

#[derive(Parser)]
#[command(name = "vfnav", version, about = "Vector-field motion planning for 3D nonholonomic robots")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario and write trajectory.csv and report.json.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a scenario file and list every problem found.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Sample the navigation (or avoidance) field on a lattice.
    Field {
        /// Goal position `x,y,z`.
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
        goal: Vec3,
        /// Desired arrival heading `x,y,z` (unit length).
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true, default_value = "1,0,0")]
        heading: Vec3,
        /// JSON file holding an obstacle list, or a scenario with an `obstacles` key.
        #[arg(long)]
        obstacles: Option<PathBuf>,
        /// Box `x0,y0,z0,x1,y1,z1`.
        #[arg(long, value_parser = parse_region, allow_hyphen_values = true)]
        region: Region,
        /// Lattice size `nx,ny,nz`, or one number for all axes.
        #[arg(long, value_parser = parse_resolution, default_value = "11")]
        resolution: [usize; 3],
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the bundled example suites and check the negative corpus.
    Corpus {
        /// Run every suite.
        #[arg(long, conflicts_with = "suite")]
        all: bool,
        /// Run one suite: example1, example2, example3 or negative.
        #[arg(long)]
        suite: Option<String>,
        /// Write each run's outputs under this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect()
}

fn parse_vec3(s: &str) -> Result<Vec3, String> {
    match parse_list(s)?.as_slice() {
        [x, y, z] => Ok(Vec3::new(*x, *y, *z)),
        v => Err(format!("expected 3 numbers, got {}", v.len())),
    }
}

fn parse_region(s: &str) -> Result<Region, String> {
    match parse_list(s)?.as_slice() {
        [a, b, c, d, e, f] => Ok(Region { lo: Vec3::new(*a, *b, *c), hi: Vec3::new(*d, *e, *f) }),
        v => Err(format!("expected 6 numbers, got {}", v.len())),
    }
}

fn parse_resolution(s: &str) -> Result<[usize; 3], String> {
    let v: Vec<usize> = s
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match v.as_slice() {
        [n] => Ok([*n; 3]),
        [a, b, c] => Ok([*a, *b, *c]),
        _ => Err("expected 1 or 3 integers".into()),
    }
}

fn summarize(name: &str, r: &Report) {
    println!(
        "{} {name}: t_end={:.2} goal={} obstacles={} collisions={} min_upsilon={} min_psi={}",
        if r.passed() { "PASS" } else { "FAIL" },
        r.t_end,
        r.goal_reached,
        r.obstacle_free,
        r.collision_free,
        r.min_ups,
        r.min_psi,
    );
    for rr in &r.robots {
        println!(
            "    robot {}: goal_err={:.3e} heading_err={:.3e} min_upsilon={} min_psi={}",
            rr.id, rr.final_goal_err, rr.final_heading_err, rr.min_ups, rr.min_psi
        );
    }
}

fn write_outputs(dir: &Path, out: &vfnav::simulator::SimOutput) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_trajectory(&out.samples, &dir.join("trajectory.csv"))?;
    std::fs::write(dir.join("report.json"), report_json(&out.report))
        .with_context(|| format!("writing {}", dir.join("report.json").display()))?;
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Simulate { scenario, out } => {
            let sc = parse_scenario(&scenario)?;
            let res = run_scenario(&sc)?;
            write_outputs(&out, &res)?;
            summarize(&scenario.display().to_string(), &res.report);
            Ok(res.report.passed())
        }
        Cmd::Validate { scenario } => match parse_scenario(&scenario) {
            Ok(sc) => {
                println!(
                    "OK {}: {} robot(s), {} obstacle(s)",
                    scenario.display(),
                    sc.robots.len(),
                    sc.obstacles.len()
                );
                Ok(true)
            }
            Err(e) => {
                println!("INVALID {}", scenario.display());
                if e.issues().is_empty() {
                    println!("  {e}");
                }
                for i in e.issues() {
                    println!("  {i}");
                }
                Ok(false)
            }
        },
        Cmd::Field { goal, heading, obstacles, region, resolution, out } => {
            let goal = Goal::new(goal, heading).context("heading must be a unit vector")?;
            let obs = match obstacles {
                Some(p) => parse_obstacles(&p)?,
                None => Vec::new(),
            };
            export_field_grid(&goal, &obs, &region, resolution, &out)?;
            println!("wrote {} rows to {}", resolution.iter().product::<usize>(), out.display());
            Ok(true)
        }
        Cmd::Corpus { all, suite, out } => {
            let suites: Vec<Suite> = match (all, suite.as_deref()) {
                (true, _) | (false, None) => Suite::ALL.to_vec(),
                (false, Some(name)) => match Suite::from_name(name) {
                    Some(s) => vec![s],
                    None => bail!("unknown suite {name:?}"),
                },
            };
            let mut ok = true;
            for s in suites {
                println!("== {}", s.name());
                if s == Suite::Negative {
                    for e in corpus::negative() {
                        let got = e.check();
                        println!(
                            "{} {}: expected {}, got {}",
                            if got.is_ok() { "PASS" } else { "FAIL" },
                            e.name,
                            e.expected_code,
                            match &got {
                                Ok(c) | Err(c) => c,
                            }
                        );
                        ok &= got.is_ok();
                    }
                    continue;
                }
                for e in corpus::suite(s) {
                    let sc = e.scenario()?;
                    let res = run_scenario(&sc)?;
                    if let Some(dir) = &out {
                        write_outputs(&dir.join(s.name()).join(e.name), &res)?;
                    }
                    summarize(e.name, &res.report);
                    ok &= res.report.passed();
                }
            }
            println!("{}", if ok { "ALL OBJECTIVES HOLD" } else { "SOME OBJECTIVES FAILED" });
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

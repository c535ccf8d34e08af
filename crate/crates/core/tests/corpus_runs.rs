mod common;

use common::*;
use vfnav::corpus::{negative, Suite};
use vfnav::output::{read_trajectory, write_trajectory};
use vfnav::simulator::{run_scenario, Scenario};

#[test]
fn every_example_meets_its_objectives() {
    for s in [Suite::Example1, Suite::Example2, Suite::Example3] {
        for (name, sc) in corpus_scenarios(s) {
            let out = run_scenario(&sc).unwrap();
            assert!(out.report.passed(), "{}/{name}: {:?}", s.name(), out.report);
        }
    }
}

#[test]
fn highest_priority_robot_ignores_the_others() {
    let (_, sc) = corpus_scenarios(Suite::Example3).remove(0);
    let multi = run_scenario(&sc).unwrap();
    let solo = run_scenario(&Scenario { robots: vec![sc.robots[0]], ..sc.clone() }).unwrap();
    let stride = sc.sim.output_stride as u64;
    let aligned: Vec<_> = solo
        .samples
        .iter()
        .filter(|s| ((s.t / sc.sim.dt).round() as u64).is_multiple_of(stride))
        .collect();
    assert!(aligned.len() > 100);
    for (a, b) in aligned.iter().zip(&multi.samples) {
        assert_eq!(a.t, b.t);
        let (ra, rb) = (&a.robots[0], &b.robots[0]);
        assert_eq!((ra.p, ra.r, ra.v_x, ra.omega), (rb.p, rb.r, rb.v_x, rb.omega), "t = {}", a.t);
    }
    // Once frozen at its goal, robot 1 stays exactly where the solo run left it.
    let end = solo.samples.last().unwrap().robots[0];
    for s in multi.samples.iter().filter(|s| s.t >= solo.report.t_end) {
        assert_eq!((s.robots[0].p, s.robots[0].r), (end.p, end.r));
    }
}

#[test]
fn lowest_priority_robot_actually_avoids() {
    let (_, sc) = corpus_scenarios(Suite::Example3).remove(0);
    let out = run_scenario(&sc).unwrap();
    let last = sc.robots.len() - 1;
    assert_eq!(sc.robots[last].p0, vfnav::so3::Vec3::zeros());
    let report = &out.report.robots[last];
    assert!(report.min_psi < sc.robots[0].r_d, "robot {} never entered a reactive sphere", report.id);
    assert!(out.samples.iter().any(|s| s.robots[last].chi_min < 1.0));
}

#[test]
fn repeated_runs_are_byte_identical() {
    for s in [Suite::Example1, Suite::Example2, Suite::Example3] {
        for (name, sc) in corpus_scenarios(s) {
            let a = csv_bytes(&run_scenario(&sc).unwrap());
            let b = csv_bytes(&run_scenario(&sc).unwrap());
            assert!(a == b, "{}/{name}", s.name());
        }
    }
}

#[test]
fn written_trajectory_reloads_exactly() {
    let (_, sc) = corpus_scenarios(Suite::Example3).remove(0);
    let out = run_scenario(&sc).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trajectory.csv");
    write_trajectory(&out.samples, &path).unwrap();
    let rows = read_trajectory(&path).unwrap();
    assert_eq!(rows.len(), out.samples.len() * sc.robots.len());
    let mut it = rows.iter();
    for s in &out.samples {
        for r in &s.robots {
            let row = it.next().unwrap();
            assert_eq!(row[0], s.t);
            assert_eq!(row[1], r.id as f64);
            assert_eq!(&row[2..5], r.p.as_slice());
            assert_eq!(&row[5..14], &r.r.row_major()[..]);
            assert_eq!(row[22], r.heading_err);
        }
    }
}

#[test]
fn negative_corpus_is_rejected_with_documented_codes() {
    assert_eq!(negative().len(), 8);
    for e in negative() {
        assert_eq!(e.check(), Ok(e.expected_code.to_string()), "{}", e.name);
    }
}

//! Bundled example scenarios and the negative validation corpus.

use crate::scenario::{parse_scenario_str, ScenarioError};
use crate::simulator::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// Single robot, free space, six starts.
    Example1,
    /// Single robot among superquadric obstacles, three starts.
    Example2,
    /// Seven robots with crossing paths.
    Example3,
    /// Files `validate` must reject.
    Negative,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Example1, Suite::Example2, Suite::Example3, Suite::Negative];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Example1 => "example1",
            Suite::Example2 => "example2",
            Suite::Example3 => "example3",
            Suite::Negative => "negative",
        }
    }

    pub fn from_name(s: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|x| x.name() == s)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub text: &'static str,
}

impl CorpusEntry {
    pub fn scenario(&self) -> Result<Scenario, ScenarioError> {
        parse_scenario_str(self.text)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NegativeEntry {
    pub name: &'static str,
    pub text: &'static str,
    pub expected_code: &'static str,
}

impl NegativeEntry {
    /// `Ok(codes)` when validation fails with the expected code among the
    /// reported ones, `Err(description)` otherwise.
    pub fn check(&self) -> Result<String, String> {
        match parse_scenario_str(self.text) {
            Ok(_) => Err("accepted".into()),
            Err(e) => {
                let codes: Vec<&str> = e.issues().iter().map(|i| i.code).collect();
                let joined = if codes.is_empty() { e.to_string() } else { codes.join(",") };
                if codes.contains(&self.expected_code) {
                    Ok(joined)
                } else {
                    Err(joined)
                }
            }
        }
    }
}

macro_rules! entry {
    ($dir:literal, $name:literal) => {
        CorpusEntry { name: $name, text: include_str!(concat!("../corpus/", $dir, "/", $name, ".json")) }
    };
}

macro_rules! negative {
    ($name:literal, $code:literal) => {
        NegativeEntry {
            name: $name,
            text: include_str!(concat!("../corpus/negative/", $name, ".json")),
            expected_code: $code,
        }
    };
}

const EXAMPLE1: &[CorpusEntry] = &[
    entry!("example1", "start1"),
    entry!("example1", "start2"),
    entry!("example1", "start3"),
    entry!("example1", "start4"),
    entry!("example1", "start5"),
    entry!("example1", "start6"),
];

const EXAMPLE2: &[CorpusEntry] = &[
    entry!("example2", "start1"),
    entry!("example2", "start2"),
    entry!("example2", "start3"),
];

const EXAMPLE3: &[CorpusEntry] = &[entry!("example3", "seven_robots")];

const NEGATIVE: &[NegativeEntry] = &[
    negative!("e001_unknown_key", "E001"),
    negative!("e002_non_unit_heading", "E002"),
    negative!("e101_goal_in_reactive_region", "E101"),
    negative!("e102_overlapping_obstacles", "E102"),
    negative!("e103_start_inside_obstacle", "E103"),
    negative!("e104_starts_too_close", "E104"),
    negative!("e105_id_gap", "E105"),
    negative!("e106_goal_near_priority_goal", "E106"),
];

/// Positive scenarios of a suite; empty for [`Suite::Negative`].
pub fn suite(s: Suite) -> &'static [CorpusEntry] {
    match s {
        Suite::Example1 => EXAMPLE1,
        Suite::Example2 => EXAMPLE2,
        Suite::Example3 => EXAMPLE3,
        Suite::Negative => &[],
    }
}

pub fn negative() -> &'static [NegativeEntry] {
    NEGATIVE
}

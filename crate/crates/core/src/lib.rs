//! Vector-field navigation for rigid bodies on SE(3).

// Negated comparisons are used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod avoidance;
pub mod composite;
pub mod controller;
pub mod corpus;
pub mod jet;
pub mod multi_robot;
pub mod nav_field;
pub mod output;
pub mod scenario;
pub mod simulator;
pub mod so3;

//! Scheduling a mobile charger so that a wireless sensor network stays
//! k-covered while low-battery sensors are recharged before they die.
//!
//! The crate holds the instance model, coverage analysis, the charging-time
//! recurrence, an exact dynamic program over a time-expanded graph, a deep
//! Q-learning solver, baseline heuristics and a brute-force oracle.

pub mod baselines;
pub mod coverage;
pub mod dp;
pub mod error;
pub mod graph;
pub mod instance;
pub mod kinematics;
pub mod oracle;
pub mod problem;
pub mod rl;
pub mod solution;
pub mod tour;

pub use error::{Error, Result};
pub use instance::{
    generate_instance, load_instance, save_instance, ChargingRequest, GenerationParams, NetworkInstance, Point,
    SensorNode, SimParams,
};
pub use problem::{ColorSet, Scenario};
pub use solution::{verify, Solution, Verdict};

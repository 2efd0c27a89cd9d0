use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::kinematics::{self, PathEvaluation};
use crate::problem::Scenario;

/// A charging tour as written to solution files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub order: Vec<u32>,
    pub charge_times_s: Vec<f64>,
    pub distance_m: f64,
    pub energy_kj: f64,
    pub feasible: bool,
}

impl Solution {
    pub fn empty() -> Self {
        Solution {
            order: Vec::new(),
            charge_times_s: Vec::new(),
            distance_m: 0.0,
            energy_kj: 0.0,
            feasible: true,
        }
    }

    /// Evaluates `order` on the scenario's instance (deadlines only).
    pub fn from_order(order: Vec<u32>, scenario: &Scenario) -> Result<Self> {
        let eval = kinematics::evaluate_path(&order, &scenario.instance)?;
        Ok(Self::from_evaluation(order, eval))
    }

    pub fn from_evaluation(order: Vec<u32>, eval: PathEvaluation) -> Self {
        Solution {
            order,
            charge_times_s: eval.charge_times,
            distance_m: eval.travel_distance,
            energy_kj: eval.travel_energy / 1000.0,
            feasible: eval.feasible,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub deadlines_ok: bool,
    pub coverage_ok: bool,
    pub evaluation: PathEvaluation,
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        self.deadlines_ok && self.coverage_ok
    }
}

/// Re-validates a tour from scratch: deadline recurrence along the order and
/// a direct grid check of k-coverage with the charged set alive.
pub fn verify(order: &[u32], scenario: &Scenario) -> Result<Verdict> {
    let evaluation = kinematics::evaluate_path(order, &scenario.instance)?;
    let coverage_ok = scenario.verify_coverage(order);
    Ok(Verdict {
        deadlines_ok: evaluation.feasible,
        coverage_ok,
        evaluation,
    })
}

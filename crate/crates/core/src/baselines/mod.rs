//! Comparison heuristics: ant colony system, greedy and random.
//!
//! All three build tours forward on the reachability graph without revisits.
//! A move from the current stop to requester `j` is allowed when the edge
//! exists, the arrival meets `D_j`, and charging `j` still lowers some table
//! entry. Construction stops once coverage is restored or no move is left.

mod acs;
mod greedy;
mod random;

pub use acs::{solve_acs, solve_acs_traced, AcsOutcome, AcsParams, PheromoneMatrix};
pub use greedy::solve_greedy;
pub use random::solve_random;

use crate::error::{Error, Result};
use crate::graph::{self, ReachabilityGraph};
use crate::problem::{ColorSet, Scenario};
use crate::solution::{self, Solution};
use crate::tour::TourContext;

/// Forward construction state shared by the heuristics.
#[derive(Clone, Debug)]
pub(crate) struct Walk {
    pub order: Vec<usize>,
    pub charged: ColorSet,
    /// Last stop and its charging start; `None` at the depot.
    pub at: Option<(usize, f64)>,
}

impl Walk {
    pub fn start() -> Self {
        Walk {
            order: Vec::new(),
            charged: ColorSet::EMPTY,
            at: None,
        }
    }

    /// Reachability node of the current stop.
    pub fn node(&self) -> usize {
        self.at
            .map_or(ReachabilityGraph::DEPOT, |(c, _)| ReachabilityGraph::node_of_color(c))
    }

    pub fn push(&mut self, color: usize, t: f64) {
        self.order.push(color);
        self.charged = self.charged.with(color);
        self.at = Some((color, t));
    }
}

pub(crate) struct Board<'a> {
    pub scenario: &'a Scenario,
    pub tour: TourContext<'a>,
    pub reach: ReachabilityGraph,
}

impl<'a> Board<'a> {
    pub fn new(scenario: &'a Scenario) -> Self {
        Board {
            scenario,
            tour: TourContext::new(scenario),
            reach: graph::build_reachability(scenario),
        }
    }

    pub fn done(&self, w: &Walk) -> bool {
        self.scenario.demand.satisfied(w.charged)
    }

    /// Allowed next moves with their charging start times, by color.
    pub fn moves(&self, w: &Walk) -> Vec<(usize, f64)> {
        let from = w.node();
        let demand = &self.scenario.demand;
        (0..self.tour.len())
            .filter(|&c| !w.charged.contains(c))
            .filter(|&c| self.reach.has_edge(from, ReachabilityGraph::node_of_color(c)))
            .filter(|&c| demand.decrements(w.charged, c))
            .filter_map(|c| self.tour.step(w.at, c).map(|t| (c, t)))
            .collect()
    }

    /// Distance from the current stop to `color`.
    pub fn leg(&self, w: &Walk, color: usize) -> f64 {
        let from = w.at.map_or(&self.scenario.instance.params.depot, |(c, _)| self.tour.point(c));
        from.distance(self.tour.point(color))
    }

    /// Re-validates a finished walk from scratch before it is returned.
    pub fn finish(&self, w: &Walk) -> Result<Solution> {
        let ids = self.tour.ids(&w.order);
        let verdict = solution::verify(&ids, self.scenario)?;
        if !verdict.is_valid() {
            return Err(Error::Invariant(format!(
                "constructed tour {ids:?} failed validation"
            )));
        }
        Ok(Solution::from_evaluation(ids, verdict.evaluation))
    }
}

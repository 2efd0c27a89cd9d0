//! States, actions and features of the charging environment.
//!
//! A state is a partial tour; an action picks an unvisited requester and
//! inserts it at its cheapest deadline-valid position.

use crate::graph::{self, ReachabilityGraph};
use crate::kinematics::Insertion;
use crate::problem::{ColorSet, Scenario};
use crate::tour::TourContext;

/// Length of a feature vector.
///
/// Layout, every entry clamped to `[-1, 1]`:
///
/// | index | feature |
/// |-------|---------|
/// | 0 | insertion delta / field diagonal |
/// | 1 | (deadline - charging start at the best slot) / max deadline |
/// | 2 | entries the candidate lowers / entries still open |
/// | 3 | candidate residual energy / capacity |
/// | 4 | candidate x / field width |
/// | 5 | candidate y / field height |
/// | 6 | 1 if some slot is deadline-valid, else 0 |
/// | 7 | visited requesters / chargeable requesters |
/// | 8 | satisfied entries / initially open entries |
/// | 9 | `1 - exp(-tour distance / diagonal)` |
/// | 10 | last charging start / max deadline |
pub const FEATURES: usize = 11;

/// Visited requesters in tour order (the depot is implicit at the front),
/// with cached charging times and closed-tour distance.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialSolution {
    pub colors: Vec<usize>,
    pub charge_times: Vec<f64>,
    pub distance: f64,
    pub charged: ColorSet,
}

impl PartialSolution {
    pub fn start() -> Self {
        PartialSolution {
            colors: Vec::new(),
            charge_times: Vec::new(),
            distance: 0.0,
            charged: ColorSet::EMPTY,
        }
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Action {
    pub color: usize,
    pub insertion: Insertion,
}

pub struct Env<'a> {
    pub scenario: &'a Scenario,
    pub tour: TourContext<'a>,
    pub reach: ReachabilityGraph,
    diagonal: f64,
    max_deadline: f64,
    open_at_start: usize,
}

#[inline]
fn clamp(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(-1.0, 1.0)
    }
}

impl<'a> Env<'a> {
    pub fn new(scenario: &'a Scenario) -> Self {
        let tour = TourContext::new(scenario);
        let max_deadline = tour
            .deadlines
            .iter()
            .fold(0.0_f64, |a, &b| a.max(b))
            .max(f64::MIN_POSITIVE);
        Env {
            scenario,
            reach: graph::build_reachability(scenario),
            diagonal: scenario.instance.params.diagonal(),
            max_deadline,
            open_at_start: scenario.demand.open_entries(ColorSet::EMPTY),
            tour,
        }
    }

    pub fn diagonal(&self) -> f64 {
        self.diagonal
    }

    pub fn num_colors(&self) -> usize {
        self.tour.len()
    }

    pub fn is_done(&self, s: &PartialSolution) -> bool {
        self.scenario.demand.satisfied(s.charged)
    }

    fn reachable_from(&self, s: &PartialSolution, color: usize) -> bool {
        let to = ReachabilityGraph::node_of_color(color);
        self.reach.has_edge(ReachabilityGraph::DEPOT, to)
            || s
                .colors
                .iter()
                .any(|&c| self.reach.has_edge(ReachabilityGraph::node_of_color(c), to))
    }

    /// Unvisited requesters with a reachability edge from the tour, a
    /// deadline-valid insertion slot, and at least one table entry left to
    /// lower. Ordered by color.
    pub fn actions(&self, s: &PartialSolution) -> Vec<Action> {
        let demand = &self.scenario.demand;
        (0..self.num_colors())
            .filter(|&c| !s.charged.contains(c))
            .filter(|&c| demand.decrements(s.charged, c))
            .filter(|&c| self.reachable_from(s, c))
            .filter_map(|c| {
                self.tour
                    .best_insertion(&s.colors, &s.charge_times, c)
                    .map(|insertion| Action { color: c, insertion })
            })
            .collect()
    }

    /// Feature vector of inserting `color` into `s`.
    pub fn encode(&self, s: &PartialSolution, color: usize) -> [f64; FEATURES] {
        let ins = self.tour.best_insertion(&s.colors, &s.charge_times, color);
        self.encode_with(s, color, ins)
    }

    pub fn encode_with(&self, s: &PartialSolution, color: usize, ins: Option<Insertion>) -> [f64; FEATURES] {
        let params = &self.scenario.instance.params;
        let demand = &self.scenario.demand;
        let node = self.tour.nodes[color];
        let open = demand.open_entries(s.charged);
        let mut f = [0.0; FEATURES];
        match ins {
            Some(ins) => {
                f[0] = clamp(ins.delta_distance / self.diagonal);
                f[1] = clamp((self.tour.deadlines[color] - ins.charge_time) / self.max_deadline);
                f[6] = 1.0;
            }
            None => {
                f[0] = 1.0;
                f[1] = 0.0;
            }
        }
        f[2] = if open == 0 {
            0.0
        } else {
            clamp(demand.decrement_count(s.charged, color) as f64 / open as f64)
        };
        f[3] = clamp(node.residual_at_t0 / params.battery_capacity);
        f[4] = clamp(node.position.x / params.area_width);
        f[5] = clamp(node.position.y / params.area_height);
        f[7] = if self.num_colors() == 0 {
            0.0
        } else {
            clamp(s.len() as f64 / self.num_colors() as f64)
        };
        f[8] = if self.open_at_start == 0 {
            1.0
        } else {
            clamp((self.open_at_start - open) as f64 / self.open_at_start as f64)
        };
        f[9] = clamp(1.0 - (-s.distance / self.diagonal).exp());
        f[10] = clamp(s.charge_times.last().copied().unwrap_or(0.0) / self.max_deadline);
        f
    }

    /// Applies an action produced by [`Env::actions`] for this state.
    pub fn apply(&self, s: &PartialSolution, action: &Action) -> PartialSolution {
        let mut colors = s.colors.clone();
        colors.insert(action.insertion.position, action.color);
        let charge_times = self
            .tour
            .times(&colors)
            .expect("actions only hold deadline-valid insertions");
        PartialSolution {
            distance: self.tour.distance(&colors),
            charged: s.charged.with(action.color),
            colors,
            charge_times,
        }
    }

    pub fn ids(&self, s: &PartialSolution) -> Vec<u32> {
        self.tour.ids(&s.colors)
    }
}

//! Tour evaluation over requester colors for the constructive solvers.
//!
//! Uses the same recurrence and the same left-to-right distance summation
//! as [`kinematics::evaluate_path`], so results agree bit for bit.

use crate::instance::{Point, SensorNode, SimParams};
use crate::kinematics::{self, Insertion};
use crate::problem::Scenario;

#[derive(Clone, Debug)]
pub struct TourContext<'a> {
    pub params: &'a SimParams,
    pub nodes: Vec<&'a SensorNode>,
    pub deadlines: Vec<f64>,
}

impl<'a> TourContext<'a> {
    pub fn new(scenario: &'a Scenario) -> Self {
        let m = scenario.demand.num_colors();
        TourContext {
            params: &scenario.instance.params,
            nodes: (0..m).map(|c| scenario.sensor_of_color(c)).collect(),
            deadlines: (0..m).map(|c| scenario.deadline_of_color(c)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn point(&self, color: usize) -> &Point {
        &self.nodes[color].position
    }

    /// Charging start at `next` after charging `prev` from `t` (`None` = depot).
    #[inline]
    pub fn step(&self, prev: Option<(usize, f64)>, next: usize) -> Option<f64> {
        match prev {
            None => kinematics::depart(self.nodes[next], self.deadlines[next], self.params),
            Some((p, t)) => kinematics::advance(t, self.nodes[p], self.nodes[next], self.deadlines[next], self.params),
        }
    }

    /// Charging start times along `order`, or `None` at the first miss.
    pub fn times(&self, order: &[usize]) -> Option<Vec<f64>> {
        let mut out = Vec::with_capacity(order.len());
        let mut prev = None;
        for &c in order {
            let t = self.step(prev, c)?;
            out.push(t);
            prev = Some((c, t));
        }
        Some(out)
    }

    /// Distance from the depot through `order`, plus the return leg if
    /// configured.
    pub fn distance(&self, order: &[usize]) -> f64 {
        let stops: Vec<&Point> = order.iter().map(|&c| self.point(c)).collect();
        kinematics::tour_distance(&self.params.depot, &stops, self.params.include_return)
    }

    /// Cheapest deadline-valid slot for `candidate`, earliest on ties.
    /// `times` must be the charging times of `order`.
    pub fn best_insertion(&self, order: &[usize], times: &[f64], candidate: usize) -> Option<Insertion> {
        let depot = &self.params.depot;
        // prefix[p]: sum of the first p legs, accumulated as tour_distance does
        let mut prefix = Vec::with_capacity(order.len() + 1);
        let mut acc = 0.0;
        let mut here = depot;
        prefix.push(acc);
        for &c in order {
            acc += here.distance(self.point(c));
            here = self.point(c);
            prefix.push(acc);
        }
        let base = if self.params.include_return && !order.is_empty() {
            acc + here.distance(depot)
        } else {
            acc
        };

        let mut best: Option<Insertion> = None;
        'slots: for position in 0..=order.len() {
            let prev = position.checked_sub(1).map(|i| (order[i], times[i]));
            let Some(t_c) = self.step(prev, candidate) else {
                continue;
            };
            let mut last = (candidate, t_c);
            for &c in &order[position..] {
                match self.step(Some(last), c) {
                    Some(t) => last = (c, t),
                    None => continue 'slots,
                }
            }
            let mut dist = prefix[position];
            let mut here = prev.map_or(depot, |(c, _)| self.point(c));
            for &c in std::iter::once(&candidate).chain(&order[position..]) {
                dist += here.distance(self.point(c));
                here = self.point(c);
            }
            if self.params.include_return {
                dist += here.distance(depot);
            }
            let delta = dist - base;
            if best.map_or(true, |b| delta < b.delta_distance) {
                best = Some(Insertion {
                    position,
                    delta_distance: delta,
                    charge_time: t_c,
                });
            }
        }
        best
    }

    pub fn ids(&self, order: &[usize]) -> Vec<u32> {
        order.iter().map(|&c| self.nodes[c].id).collect()
    }
}

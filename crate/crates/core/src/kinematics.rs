//! Battery decay, the charging-time recurrence and whole-tour evaluation.
//!
//! An infeasible arrival is a domain value (`None`), not an error: the
//! recurrence itself yields an infinite time whenever a deadline is missed.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{NetworkInstance, Point, SensorNode, SimParams};

/// `max(0, B_i(t0) - beta_i * (t - t0))`.
pub fn residual_energy(node: &SensorNode, t: f64, params: &SimParams) -> f64 {
    (node.residual_at_t0 - node.consumption_rate * (t - params.departure_time)).max(0.0)
}

/// Time to refill `node` to capacity when charging starts at `t`.
pub fn charge_duration(node: &SensorNode, t: f64, params: &SimParams) -> f64 {
    (params.battery_capacity - residual_energy(node, t, params)) / params.transfer_rate
}

/// Charging start time at `node_j` when charging at `node_i` started at
/// `t_i`, or `None` if that start would be later than `deadline_j`.
pub fn advance(
    t_i: f64,
    node_i: &SensorNode,
    node_j: &SensorNode,
    deadline_j: f64,
    params: &SimParams,
) -> Option<f64> {
    let t_j = t_i
        + charge_duration(node_i, t_i, params)
        + node_i.position.distance(&node_j.position) / params.charger_speed;
    (t_j <= deadline_j).then_some(t_j)
}

/// Arrival at the first stop of a tour; no charging happens at the depot.
pub fn depart(node_j: &SensorNode, deadline_j: f64, params: &SimParams) -> Option<f64> {
    let t_j = params.departure_time + params.depot.distance(&node_j.position) / params.charger_speed;
    (t_j <= deadline_j).then_some(t_j)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathEvaluation {
    pub feasible: bool,
    /// Charging start per visited sensor; `f64::INFINITY` from the first
    /// missed deadline onwards.
    pub charge_times: Vec<f64>,
    pub travel_distance: f64,
    pub travel_energy: f64,
    pub violated_at: Option<u32>,
}

/// Effective deadline used for charging: the request deadline, or `None` for
/// sensors that never asked to be charged or are already dead at departure.
pub fn chargeable_deadline(inst: &NetworkInstance, id: u32) -> Option<f64> {
    inst.deadline_of(id)
        .filter(|&d| d > inst.params.departure_time)
}

/// Length of the tour depot -> order... (-> depot if `include_return`).
/// Accumulates legs left to right.
pub fn tour_distance(depot: &Point, stops: &[&Point], include_return: bool) -> f64 {
    let mut dist = 0.0;
    let mut prev = depot;
    for p in stops {
        dist += prev.distance(p);
        prev = p;
    }
    if include_return && !stops.is_empty() {
        dist += prev.distance(depot);
    }
    dist
}

/// Evaluates a charging order (sensor ids, depot implicit at the start).
pub fn evaluate_path(order: &[u32], inst: &NetworkInstance) -> Result<PathEvaluation> {
    let params = &inst.params;
    let mut seen = HashSet::with_capacity(order.len());
    let mut nodes = Vec::with_capacity(order.len());
    for &id in order {
        if !seen.insert(id) {
            return Err(Error::RepeatedSensor(id));
        }
        nodes.push(inst.sensor(id).ok_or(Error::UnknownSensor(id))?);
    }

    let mut charge_times = Vec::with_capacity(order.len());
    let mut violated_at = None;
    let mut prev: Option<(&SensorNode, f64)> = None;
    for node in &nodes {
        let next = chargeable_deadline(inst, node.id).and_then(|deadline| match prev {
            None => depart(node, deadline, params),
            Some((p, t)) => advance(t, p, node, deadline, params),
        });
        match next {
            Some(t) if violated_at.is_none() => {
                charge_times.push(t);
                prev = Some((node, t));
            }
            _ => {
                violated_at.get_or_insert(node.id);
                charge_times.push(f64::INFINITY);
            }
        }
    }

    let points: Vec<&Point> = nodes.iter().map(|n| &n.position).collect();
    let travel_distance = tour_distance(&params.depot, &points, params.include_return);
    Ok(PathEvaluation {
        feasible: violated_at.is_none(),
        charge_times,
        travel_distance,
        travel_energy: travel_distance * params.move_cost,
        violated_at,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Insertion {
    /// Index in the order at which the candidate is placed; `order.len()`
    /// is the closing slot before the return leg.
    pub position: usize,
    pub delta_distance: f64,
    /// Charging start of the candidate in the new order.
    pub charge_time: f64,
}

/// Cheapest deadline-valid slot for `candidate` in `order`. Ties go to the
/// earliest slot.
pub fn best_insertion(order: &[u32], candidate: u32, inst: &NetworkInstance) -> Option<Insertion> {
    let base = evaluate_path(order, inst).ok()?;
    let mut best: Option<Insertion> = None;
    let mut trial = Vec::with_capacity(order.len() + 1);
    for position in 0..=order.len() {
        trial.clear();
        trial.extend_from_slice(&order[..position]);
        trial.push(candidate);
        trial.extend_from_slice(&order[position..]);
        let Ok(eval) = evaluate_path(&trial, inst) else {
            return None;
        };
        if !eval.feasible {
            continue;
        }
        let delta = eval.travel_distance - base.travel_distance;
        if best.map_or(true, |b| delta < b.delta_distance) {
            best = Some(Insertion {
                position,
                delta_distance: delta,
                charge_time: eval.charge_times[position],
            });
        }
    }
    best
}

pub fn insert_at(order: &[u32], candidate: u32, position: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(order.len() + 1);
    out.extend_from_slice(&order[..position]);
    out.push(candidate);
    out.extend_from_slice(&order[position..]);
    out
}

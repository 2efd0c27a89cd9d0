//! Exact solver: color-coded dynamic programming over the time-expanded DAG.
//!
//! Every requester is its own color, so a colorful path visits each sensor
//! at most once. Labels are keyed by `(vertex, color set)`; the requirement
//! table of a label is a function of its color set, so only the shortest
//! label per key is kept.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::graph::{self, TimeExpandedGraph};
use crate::problem::{ColorSet, Scenario};
use crate::solution::Solution;

#[derive(Clone, Debug, PartialEq)]
pub struct DpConfig {
    /// Abort with [`Error::BudgetExceeded`] once this many labels exist.
    pub label_cap: usize,
    /// Only extend a path to sensors whose charge lowers some table entry.
    pub filter: bool,
    /// Drop a new label when the same vertex already holds a label with a
    /// superset of its colors at no greater distance.
    pub dominance: bool,
    /// Drop a label when an earlier bucket of the same sensor holds the
    /// same color set at no greater distance. Charging later never arrives
    /// anywhere earlier, so the earlier label can extend wherever the later
    /// one can.
    pub time_dominance: bool,
    /// Abort with [`Error::BudgetExceeded`] after this much wall time.
    pub time_limit: Option<Duration>,
}

impl Default for DpConfig {
    fn default() -> Self {
        DpConfig {
            label_cap: 5_000_000,
            filter: true,
            dominance: false,
            time_dominance: true,
            time_limit: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DpLabel {
    pub vertex: u32,
    pub colors: ColorSet,
    /// Shortest distance from the depot realizing this key (no return leg).
    pub distance: f64,
    pub pred: Option<u32>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DpStats {
    pub vertices: usize,
    pub edges: usize,
    pub labels: usize,
    pub feasible_labels: usize,
}

#[derive(Clone, Debug)]
pub struct DpOutcome {
    pub solution: Option<Solution>,
    pub labels: Vec<DpLabel>,
    pub best_label: Option<usize>,
    pub stats: DpStats,
}

/// Builds the time-expanded graph and solves it.
pub fn solve(scenario: &Scenario, cfg: &DpConfig) -> Result<DpOutcome> {
    let g = graph::build_time_expanded(scenario)?;
    solve_dp(&g, scenario, cfg)
}

pub fn solve_dp(g: &TimeExpandedGraph, scenario: &Scenario, cfg: &DpConfig) -> Result<DpOutcome> {
    let demand = &scenario.demand;
    let params = &scenario.instance.params;
    let mut stats = DpStats {
        vertices: g.num_vertices(),
        edges: g.num_edges(),
        ..DpStats::default()
    };

    let depot = DpLabel {
        vertex: TimeExpandedGraph::DEPOT as u32,
        colors: ColorSet::EMPTY,
        distance: 0.0,
        pred: None,
    };
    if demand.satisfied(ColorSet::EMPTY) {
        stats.labels = 1;
        stats.feasible_labels = 1;
        return Ok(DpOutcome {
            solution: Some(Solution::empty()),
            labels: vec![depot],
            best_label: Some(0),
            stats,
        });
    }

    let started = Instant::now();
    let order = graph::topological_order(g)?;
    let mut labels = vec![depot];
    let mut at_vertex: Vec<Vec<u32>> = vec![Vec::new(); g.num_vertices()];
    at_vertex[TimeExpandedGraph::DEPOT].push(0);
    let mut index: HashMap<(u32, ColorSet), u32> = HashMap::new();
    // labels per (color, color set) across buckets, for time dominance
    let mut front: HashMap<(usize, ColorSet), Vec<u32>> = HashMap::new();
    let mut dead: Vec<bool> = vec![false];
    // best closed length among feasible labels so far; any extension of a
    // label costs at least its distance plus the straight return
    let mut incumbent = f64::INFINITY;
    let ret = |w: usize| {
        if params.include_return {
            g.weight(w, TimeExpandedGraph::DEPOT)
        } else {
            0.0
        }
    };

    for &v in &order {
        let here = std::mem::take(&mut at_vertex[v]);
        for &lid in &here {
            if dead[lid as usize] {
                continue;
            }
            let label = labels[lid as usize];
            // a satisfied table has no entry left to lower
            if cfg.filter && demand.satisfied(label.colors) {
                continue;
            }
            for &w in g.successors(v) {
                let Some(color) = g.vertices[w as usize].color else {
                    continue;
                };
                if label.colors.contains(color) {
                    continue;
                }
                if cfg.filter && !demand.decrements(label.colors, color) {
                    continue;
                }
                let colors = label.colors.with(color);
                let distance = label.distance + g.weight(v, w as usize);
                let bound = distance + ret(w as usize);
                if bound > incumbent {
                    continue;
                }
                if demand.satisfied(colors) {
                    incumbent = bound;
                }
                let bucket = g.vertices[w as usize].k;
                match index.get(&(w, colors)) {
                    Some(&existing) => {
                        let slot = &mut labels[existing as usize];
                        if distance < slot.distance {
                            slot.distance = distance;
                            slot.pred = Some(lid);
                            if cfg.time_dominance {
                                let list = front.entry((color, colors)).or_default();
                                settle(list, existing, g, &labels, &mut dead);
                            }
                        }
                    }
                    None => {
                        if cfg.time_dominance
                            && front.get(&(color, colors)).is_some_and(|list| {
                                list.iter().any(|&o| {
                                    let other = &labels[o as usize];
                                    g.vertices[other.vertex as usize].k <= bucket && other.distance <= distance
                                })
                            })
                        {
                            continue;
                        }
                        if cfg.dominance
                            && at_vertex[w as usize].iter().any(|&o| {
                                let other = &labels[o as usize];
                                colors.is_subset_of(other.colors) && other.distance <= distance
                            })
                        {
                            continue;
                        }
                        if labels.len() >= cfg.label_cap {
                            return Err(Error::BudgetExceeded(format!(
                                "dynamic program exceeded {} labels",
                                cfg.label_cap
                            )));
                        }
                        if labels.len() % 4096 == 0 && cfg.time_limit.is_some_and(|lim| started.elapsed() > lim) {
                            return Err(Error::BudgetExceeded(format!(
                                "dynamic program exceeded {:?} of wall time",
                                cfg.time_limit.unwrap_or_default()
                            )));
                        }
                        let id = labels.len() as u32;
                        labels.push(DpLabel {
                            vertex: w,
                            colors,
                            distance,
                            pred: Some(lid),
                        });
                        dead.push(false);
                        index.insert((w, colors), id);
                        at_vertex[w as usize].push(id);
                        if cfg.time_dominance {
                            let list = front.entry((color, colors)).or_default();
                            settle(list, id, g, &labels, &mut dead);
                        }
                    }
                }
            }
        }
        at_vertex[v] = here;
    }
    drop(index);
    drop(front);

    // harvest: every label whose color set zeroes the table is a feasible
    // path, wherever it sits in the graph
    let mut best: Option<(f64, usize)> = None;
    for (i, label) in labels.iter().enumerate() {
        if dead[i] || !demand.satisfied(label.colors) {
            continue;
        }
        stats.feasible_labels += 1;
        let mut total = label.distance;
        if params.include_return {
            total += g.weight(label.vertex as usize, TimeExpandedGraph::DEPOT);
        }
        if best.map_or(true, |(d, _)| total < d) {
            best = Some((total, i));
        }
    }
    stats.labels = labels.len();

    let solution = match best {
        Some((_, i)) => {
            let order = recover_path(&labels, i, g)?;
            Some(Solution::from_order(order, scenario)?)
        }
        None => None,
    };
    Ok(DpOutcome {
        solution,
        labels,
        best_label: best.map(|(_, i)| i),
        stats,
    })
}

/// Re-checks `id` against the other live labels of its (color, color set)
/// list after it was added or shortened: it dies if an earlier-or-equal
/// bucket is no longer, otherwise it kills every later-or-equal bucket that
/// is no shorter. Dead entries leave the list.
fn settle(list: &mut Vec<u32>, id: u32, g: &TimeExpandedGraph, labels: &[DpLabel], dead: &mut [bool]) {
    if !list.contains(&id) {
        list.push(id);
    }
    let me = &labels[id as usize];
    let k = g.vertices[me.vertex as usize].k;
    let dominated = list.iter().any(|&o| {
        let other = &labels[o as usize];
        o != id && g.vertices[other.vertex as usize].k <= k && other.distance <= me.distance
    });
    if dominated {
        dead[id as usize] = true;
    } else {
        dead[id as usize] = false;
        for &o in list.iter() {
            let other = &labels[o as usize];
            if o != id && g.vertices[other.vertex as usize].k >= k && other.distance >= me.distance {
                dead[o as usize] = true;
            }
        }
    }
    list.retain(|&o| !dead[o as usize]);
}

/// Sensor order of a label, walking predecessors back to the depot and
/// removing one color per step.
pub fn recover_path(labels: &[DpLabel], final_label: usize, g: &TimeExpandedGraph) -> Result<Vec<u32>> {
    let mut order = Vec::new();
    let mut current = final_label;
    loop {
        let label = labels.get(current).ok_or(Error::BrokenChain(current))?;
        let vertex = &g.vertices[label.vertex as usize];
        match (vertex.color, label.pred) {
            (None, None) if label.colors.is_empty() => break,
            (Some(color), Some(pred)) => {
                let prev = labels.get(pred as usize).ok_or(Error::BrokenChain(current))?;
                if !label.colors.contains(color) || prev.colors != label.colors.without(color) {
                    return Err(Error::BrokenChain(current));
                }
                if !g.successors(prev.vertex as usize).contains(&label.vertex) {
                    return Err(Error::BrokenChain(current));
                }
                order.push(vertex.sensor_id);
                current = pred as usize;
            }
            _ => return Err(Error::BrokenChain(current)),
        }
    }
    order.reverse();
    Ok(order)
}

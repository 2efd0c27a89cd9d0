//! Brute-force reference solver for small instances.
//!
//! Works directly on the requirement table through `apply_charge` and on the
//! charging recurrence, sharing no search code with the other solvers:
//! enumerate every inclusion-minimal set of requesters that zeroes the table,
//! then every deadline-feasible visiting order of each set.

use std::time::{Duration, Instant};

use crate::coverage::{apply_charge, CoverageSignatureMap, RequirementTable};
use crate::error::{Error, Result};
use crate::graph::Window;
use crate::instance::{ChargingRequest, SensorNode};
use crate::kinematics;
use crate::problem::Scenario;
use crate::solution::Solution;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleBudget {
    pub max_requesters: usize,
    pub max_subsets: usize,
    pub max_permutations: usize,
    pub time_limit: Duration,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_requesters: 10,
            max_subsets: 1 << 16,
            max_permutations: 50_000_000,
            time_limit: Duration::from_secs(120),
        }
    }
}

/// How charging start times are measured during the search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeMode {
    /// Exact recurrence in continuous time.
    Continuous,
    /// Start times rounded up to the time-expanded graph's buckets, as the
    /// dynamic program sees them.
    Grid,
}

fn is_zero(t: &RequirementTable) -> bool {
    t.t.iter().all(|&v| v == 0)
}

fn charge_all(table: &RequirementTable, ids: &[u32], sig: &CoverageSignatureMap) -> RequirementTable {
    ids.iter()
        .fold(table.clone(), |t, &id| apply_charge(&t, id, sig))
}

/// All inclusion-minimal sets of live requesters whose charging zeroes the
/// table, ordered by size then ids. `[[]]` if the table is already zero.
pub fn enumerate_charge_sets(
    table: &RequirementTable,
    requests: &[ChargingRequest],
    sig: &CoverageSignatureMap,
    departure_time: f64,
    budget: &OracleBudget,
) -> Result<Vec<Vec<u32>>> {
    if is_zero(table) {
        return Ok(vec![vec![]]);
    }
    // a requester that lowers nothing on its own never belongs to a minimal set
    let candidates: Vec<u32> = requests
        .iter()
        .filter(|r| r.deadline > departure_time)
        .map(|r| r.sensor_id)
        .filter(|&id| apply_charge(table, id, sig) != *table)
        .collect();
    if candidates.len() >= usize::BITS as usize || (1usize << candidates.len()) > budget.max_subsets {
        return Err(Error::BudgetExceeded(format!(
            "{} candidate requesters exceed the subset budget",
            candidates.len()
        )));
    }

    let subset = |mask: usize| -> Vec<u32> {
        candidates
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &id)| id)
            .collect()
    };
    let mut zeroing = vec![false; 1 << candidates.len()];
    for (mask, z) in zeroing.iter_mut().enumerate() {
        *z = is_zero(&charge_all(table, &subset(mask), sig));
    }
    let mut sets: Vec<Vec<u32>> = (0..zeroing.len())
        .filter(|&mask| zeroing[mask])
        .filter(|&mask| (0..candidates.len()).all(|i| mask >> i & 1 == 0 || !zeroing[mask & !(1 << i)]))
        .map(subset)
        .collect();
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(sets)
}

struct Search<'a> {
    scenario: &'a Scenario,
    mode: TimeMode,
    nodes: Vec<&'a SensorNode>,
    windows: Vec<Window>,
    best: Option<(f64, Vec<u32>)>,
    permutations: usize,
    budget: &'a OracleBudget,
    started: Instant,
}

impl Search<'_> {
    fn settle(&self, i: usize, arrival: f64, after: Option<f64>) -> Option<f64> {
        match self.mode {
            TimeMode::Continuous => Some(arrival),
            TimeMode::Grid => {
                let w = &self.windows[i];
                let t = w.time(w.bucket_of(arrival)?);
                // the graph only links to strictly later buckets
                match after {
                    Some(prev) if t <= prev => None,
                    _ => Some(t),
                }
            }
        }
    }

    fn dfs(&mut self, set: &[usize], used: &mut Vec<bool>, order: &mut Vec<usize>, time: f64, dist: f64) -> Result<()> {
        let params = &self.scenario.instance.params;
        let here = order.last().map(|&i| self.nodes[i].position).unwrap_or(params.depot);
        let ret = if params.include_return { here.distance(&params.depot) } else { 0.0 };
        if let Some((best, _)) = &self.best {
            // admissible: the remaining legs are at least the straight return
            if dist + ret > best + 1e-9 {
                return Ok(());
            }
        }
        if order.len() == set.len() {
            self.permutations += 1;
            if self.permutations > self.budget.max_permutations {
                return Err(Error::BudgetExceeded("oracle permutation budget exhausted".into()));
            }
            if self.permutations % 4096 == 0 && self.started.elapsed() > self.budget.time_limit {
                return Err(Error::BudgetExceeded("oracle time limit reached".into()));
            }
            let total = dist + ret;
            if self.best.as_ref().map_or(true, |(b, _)| total < *b) {
                let ids = order.iter().map(|&i| self.nodes[i].id).collect();
                self.best = Some((total, ids));
            }
            return Ok(());
        }
        for pos in 0..set.len() {
            if used[pos] {
                continue;
            }
            let j = set[pos];
            let deadline = self.windows[j].deadline;
            let arrival = match order.last() {
                None => kinematics::depart(self.nodes[j], deadline, params),
                Some(&i) => kinematics::advance(time, self.nodes[i], self.nodes[j], deadline, params),
            };
            let prev = if order.is_empty() { None } else { Some(time) };
            let Some(t) = arrival.and_then(|a| self.settle(j, a, prev)) else {
                continue;
            };
            let leg = here.distance(&self.nodes[j].position);
            used[pos] = true;
            order.push(j);
            self.dfs(set, used, order, t, dist + leg)?;
            order.pop();
            used[pos] = false;
        }
        Ok(())
    }
}

/// Globally shortest feasible tour, or `None` if no minimal charge set can
/// be visited within its deadlines.
pub fn solve_exact(scenario: &Scenario, budget: &OracleBudget, mode: TimeMode) -> Result<Option<Solution>> {
    let inst = &scenario.instance;
    let params = &inst.params;
    let live: Vec<&ChargingRequest> = inst
        .requests
        .iter()
        .filter(|r| r.deadline > params.departure_time)
        .collect();
    if live.len() > budget.max_requesters {
        return Err(Error::BudgetExceeded(format!(
            "{} requesters exceed the oracle limit of {}",
            live.len(),
            budget.max_requesters
        )));
    }
    let sets = enumerate_charge_sets(
        &scenario.table,
        &inst.requests,
        &scenario.signatures,
        params.departure_time,
        budget,
    )?;

    let nodes: Vec<&SensorNode> = live
        .iter()
        .map(|r| inst.sensor(r.sensor_id).ok_or(Error::UnknownSensor(r.sensor_id)))
        .collect::<Result<_>>()?;
    let windows = live
        .iter()
        .map(|r| Window::new(params.departure_time, params.time_step, r.deadline))
        .collect();
    let mut search = Search {
        scenario,
        mode,
        nodes,
        windows,
        best: None,
        permutations: 0,
        budget,
        started: Instant::now(),
    };
    for set in &sets {
        let idx: Vec<usize> = set
            .iter()
            .map(|id| live.iter().position(|r| r.sensor_id == *id).expect("sets hold live requesters"))
            .collect();
        let mut used = vec![false; idx.len()];
        search.dfs(&idx, &mut used, &mut Vec::new(), params.departure_time, 0.0)?;
    }
    match search.best {
        Some((_, order)) => Ok(Some(Solution::from_order(order, scenario)?)),
        None => Ok(None),
    }
}

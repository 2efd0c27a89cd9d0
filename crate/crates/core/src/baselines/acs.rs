//! Ant colony system with deadline-masked construction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Board, Walk};
use crate::error::{Error, Result};
use crate::graph::ReachabilityGraph;
use crate::problem::Scenario;
use crate::solution::Solution;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcsParams {
    pub agents: usize,
    pub iterations: usize,
    /// Global decay θ.
    pub global_decay: f64,
    /// Local decay ρ.
    pub local_decay: f64,
    /// Exponent on the inverse-distance heuristic.
    pub beta: f64,
    /// Probability of taking the best-valued move outright.
    pub q0: f64,
    /// Initial pheromone; `None` means `1 / (nodes * mean edge length)`.
    pub tau0: Option<f64>,
    pub seed: u64,
}

impl Default for AcsParams {
    fn default() -> Self {
        AcsParams {
            agents: 20,
            iterations: 200,
            global_decay: 0.1,
            local_decay: 0.1,
            beta: 2.0,
            q0: 0.9,
            tau0: None,
            seed: 0,
        }
    }
}

impl AcsParams {
    pub fn validate(&self) -> Result<()> {
        let decay = |v: f64| v > 0.0 && v < 1.0;
        if self.agents == 0 || self.iterations == 0 {
            return Err(Error::InvalidParams("agent and iteration counts must be positive".into()));
        }
        if !decay(self.global_decay) || !decay(self.local_decay) {
            return Err(Error::InvalidParams("decays must lie in (0, 1)".into()));
        }
        if !(0.0..=1.0).contains(&self.q0) || !(self.beta >= 0.0) {
            return Err(Error::InvalidParams("need q0 in [0, 1] and beta >= 0".into()));
        }
        if let Some(t) = self.tau0 {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidParams("tau0 must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Pheromone on every ordered pair of reachability nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct PheromoneMatrix {
    n: usize,
    tau: Vec<f64>,
}

impl PheromoneMatrix {
    pub fn new(n: usize, tau0: f64) -> Self {
        PheromoneMatrix {
            n,
            tau: vec![tau0; n * n],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.tau[i * self.n + j]
    }

    /// `τ_ij <- (1 - ρ) τ_ij + ρ τ0` after an agent crosses `i -> j`.
    pub fn local_update(&mut self, i: usize, j: usize, rho: f64, tau0: f64) {
        let t = &mut self.tau[i * self.n + j];
        *t = (1.0 - rho) * *t + rho * tau0;
    }

    /// `τ_ij <- (1 - θ) τ_ij + θ Δτ_ij` on every edge, with `Δτ = 1/L*` on
    /// the edges of the best tour (node sequence `best`) and 0 elsewhere.
    pub fn global_update(&mut self, best: Option<(&[usize], f64)>, theta: f64) {
        for t in &mut self.tau {
            *t *= 1.0 - theta;
        }
        if let Some((nodes, length)) = best {
            let deposit = theta / length.max(f64::MIN_POSITIVE);
            for pair in nodes.windows(2) {
                self.tau[pair[0] * self.n + pair[1]] += deposit;
            }
        }
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.tau
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &t| (lo.min(t), hi.max(t)))
    }
}

#[derive(Clone, Debug)]
pub struct AcsOutcome {
    pub solution: Option<Solution>,
    /// Best-so-far tour length after each iteration (`inf` until one exists).
    pub trace: Vec<(usize, f64)>,
    pub pheromone: PheromoneMatrix,
}

pub fn solve_acs(scenario: &Scenario, p: &AcsParams) -> Result<Option<Solution>> {
    solve_acs_traced(scenario, p).map(|o| o.solution)
}

/// Node sequence of a walk on the reachability graph, closed at the depot
/// when the tour returns.
fn node_path(order: &[usize], include_return: bool) -> Vec<usize> {
    let mut nodes = vec![ReachabilityGraph::DEPOT];
    nodes.extend(order.iter().map(|&c| ReachabilityGraph::node_of_color(c)));
    if include_return && !order.is_empty() {
        nodes.push(ReachabilityGraph::DEPOT);
    }
    nodes
}

pub fn solve_acs_traced(scenario: &Scenario, p: &AcsParams) -> Result<AcsOutcome> {
    p.validate()?;
    let board = Board::new(scenario);
    let include_return = scenario.instance.params.include_return;
    let n = board.reach.num_nodes();
    let tau0 = p.tau0.unwrap_or_else(|| {
        let edges = board.reach.num_edges();
        let total: f64 = (0..n)
            .flat_map(|i| board.reach.successors(i).map(move |j| (i, j)))
            .map(|(i, j)| board.reach.weight(i, j))
            .sum();
        let mean = if edges > 0 { total / edges as f64 } else { 0.0 };
        if mean > 0.0 {
            1.0 / (n as f64 * mean)
        } else {
            1.0
        }
    });
    let mut pher = PheromoneMatrix::new(n, tau0);
    if board.done(&Walk::start()) {
        return Ok(AcsOutcome {
            solution: Some(Solution::empty()),
            trace: Vec::new(),
            pheromone: pher,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut trace = Vec::with_capacity(p.iterations);
    for iteration in 0..p.iterations {
        for _ in 0..p.agents {
            let mut walk = Walk::start();
            let mut stuck = false;
            while !board.done(&walk) {
                let moves = board.moves(&walk);
                if moves.is_empty() {
                    stuck = true;
                    break;
                }
                let from = walk.node();
                let score: Vec<f64> = moves
                    .iter()
                    .map(|&(c, _)| {
                        let eta = 1.0 / board.leg(&walk, c).max(1e-9);
                        pher.get(from, ReachabilityGraph::node_of_color(c)) * eta.powf(p.beta)
                    })
                    .collect();
                let pick = if rng.gen::<f64>() < p.q0 {
                    // first maximum keeps ties deterministic
                    (0..moves.len()).fold(0, |b, i| if score[i] > score[b] { i } else { b })
                } else {
                    roulette(&score, &mut rng)
                };
                let (c, t) = moves[pick];
                pher.local_update(from, ReachabilityGraph::node_of_color(c), p.local_decay, tau0);
                walk.push(c, t);
            }
            if stuck {
                continue;
            }
            if include_return {
                pher.local_update(walk.node(), ReachabilityGraph::DEPOT, p.local_decay, tau0);
            }
            let length = board.tour.distance(&walk.order);
            if best.as_ref().map_or(true, |(b, _)| length < *b) {
                best = Some((length, walk.order));
            }
        }
        let best_nodes = best.as_ref().map(|(l, order)| (node_path(order, include_return), *l));
        pher.global_update(best_nodes.as_ref().map(|(nodes, l)| (nodes.as_slice(), *l)), p.global_decay);
        trace.push((iteration, best.as_ref().map_or(f64::INFINITY, |(l, _)| *l)));
    }

    let solution = match best {
        Some((_, order)) => {
            let walk = Walk {
                order,
                ..Walk::start()
            };
            Some(board.finish(&walk)?)
        }
        None => None,
    };
    Ok(AcsOutcome {
        solution,
        trace,
        pheromone: pher,
    })
}

fn roulette(weights: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return rng.gen_range(0..weights.len());
    }
    let mut x = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if x < *w {
            return i;
        }
        x -= w;
    }
    weights.len() - 1
}

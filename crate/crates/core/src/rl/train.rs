use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::env::{Action, Env, PartialSolution, FEATURES};
use super::network::QPolicy;
use super::replay::{ReplayBuffer, Transition};
use crate::error::{Error, Result};
use crate::problem::Scenario;
use crate::solution::Solution;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RlHyperparams {
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Fraction of the episodes over which epsilon decays linearly.
    pub epsilon_decay: f64,
    pub episodes: usize,
    /// Steps per episode; `None` means one per chargeable requester.
    pub max_steps: Option<usize>,
    pub batch_size: usize,
    pub step_size: f64,
    pub replay_capacity: usize,
    pub hidden: [usize; 2],
    /// Extra cost, in diagonals, of a step after which no action is left
    /// while coverage is still short.
    pub dead_end_penalty: f64,
    /// `solve_dqn` returns the shortest complete training episode when it
    /// beats the greedy rollout.
    pub keep_best_episode: bool,
    pub seed: u64,
}

impl Default for RlHyperparams {
    fn default() -> Self {
        RlHyperparams {
            gamma: 0.9,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay: 0.8,
            episodes: 500,
            max_steps: None,
            batch_size: 32,
            step_size: 1e-3,
            replay_capacity: 10_000,
            hidden: [64, 64],
            dead_end_penalty: 4.0,
            keep_best_episode: true,
            seed: 0,
        }
    }
}

impl RlHyperparams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.to_string()));
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.epsilon_start) || !(0.0..=1.0).contains(&self.epsilon_end) {
            return bad("epsilon must lie in [0, 1]");
        }
        if !(self.epsilon_decay > 0.0 && self.epsilon_decay <= 1.0) {
            return bad("epsilon decay fraction must lie in (0, 1]");
        }
        if self.episodes == 0 || self.batch_size == 0 || self.replay_capacity == 0 {
            return bad("episodes, batch size and replay capacity must be positive");
        }
        if self.max_steps == Some(0) || self.hidden.contains(&0) {
            return bad("steps and hidden widths must be positive");
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return bad("step size must be positive");
        }
        if !(self.dead_end_penalty >= 0.0 && self.dead_end_penalty.is_finite()) {
            return bad("dead-end penalty must be finite and non-negative");
        }
        Ok(())
    }

    pub fn epsilon(&self, episode: usize) -> f64 {
        let horizon = (self.episodes as f64 * self.epsilon_decay).max(1.0);
        let frac = (episode as f64 / horizon).min(1.0);
        self.epsilon_start + (self.epsilon_end - self.epsilon_start) * frac
    }
}

#[derive(Clone, Debug)]
pub struct TrainReport {
    pub policy: QPolicy,
    /// Mean batch loss per episode (0 for episodes without an update).
    pub episode_losses: Vec<f64>,
    /// Sum of rewards per episode, penalties included.
    pub episode_returns: Vec<f64>,
    /// The depot had no action while coverage was short; nothing was trained.
    pub isolated: bool,
    /// Shortest episode that restored coverage.
    pub best_episode: Option<PartialSolution>,
}

fn best_action(policy: &QPolicy, feats: &[[f64; FEATURES]]) -> usize {
    let mut best = 0;
    let mut best_q = f64::NEG_INFINITY;
    for (i, f) in feats.iter().enumerate() {
        let q = policy.q(f);
        if q > best_q {
            best_q = q;
            best = i;
        }
    }
    best
}

fn update(policy: &mut QPolicy, buffer: &ReplayBuffer, hp: &RlHyperparams, rng: &mut ChaCha8Rng) -> f64 {
    let batch = buffer.sample(rng, hp.batch_size);
    let targets: Vec<f64> = batch
        .iter()
        .map(|t| {
            if t.terminal || t.next_actions.is_empty() {
                t.reward
            } else {
                let best = t
                    .next_actions
                    .iter()
                    .map(|f| policy.q(f))
                    .fold(f64::NEG_INFINITY, f64::max);
                t.reward + hp.gamma * best
            }
        })
        .collect();
    let pairs: Vec<(&[f64], f64)> = batch
        .iter()
        .zip(&targets)
        .map(|(t, &y)| (t.features.as_slice(), y))
        .collect();
    let (loss, grads) = policy.loss_and_gradient(&pairs);
    policy.sgd_step(&grads, hp.step_size);
    loss
}

/// Trains a Q-function on one instance by epsilon-greedy episodes with
/// experience replay and one-step targets.
pub fn train(scenario: &Scenario, hp: &RlHyperparams) -> Result<TrainReport> {
    hp.validate()?;
    let env = Env::new(scenario);
    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    let mut policy = QPolicy::random(FEATURES, hp.hidden, &mut rng);
    let mut report = TrainReport {
        policy: policy.clone(),
        episode_losses: Vec::new(),
        episode_returns: Vec::new(),
        isolated: false,
        best_episode: None,
    };

    let start = PartialSolution::start();
    if env.is_done(&start) {
        return Ok(report);
    }
    let first_actions = env.actions(&start);
    if first_actions.is_empty() {
        report.isolated = true;
        return Ok(report);
    }
    let first_feats: Vec<[f64; FEATURES]> = first_actions
        .iter()
        .map(|a| env.encode_with(&start, a.color, Some(a.insertion)))
        .collect();

    let max_steps = hp.max_steps.unwrap_or(env.num_colors()).max(1);
    let mut buffer = ReplayBuffer::new(hp.replay_capacity);
    for episode in 0..hp.episodes {
        let eps = hp.epsilon(episode);
        let mut state = start.clone();
        let mut actions: Vec<Action> = first_actions.clone();
        let mut feats = first_feats.clone();
        let mut loss_sum = 0.0;
        let mut updates = 0usize;
        let mut ret = 0.0;
        for _ in 0..max_steps {
            let pick = if rng.gen::<f64>() < eps {
                rng.gen_range(0..actions.len())
            } else {
                best_action(&policy, &feats)
            };
            let action = actions[pick];
            let next = env.apply(&state, &action);
            let mut reward = -(next.distance - state.distance) / env.diagonal();
            let done = env.is_done(&next);
            let next_actions = if done { Vec::new() } else { env.actions(&next) };
            let dead_end = !done && next_actions.is_empty();
            if dead_end {
                reward -= hp.dead_end_penalty;
            }
            let next_feats: Vec<[f64; FEATURES]> = next_actions
                .iter()
                .map(|a| env.encode_with(&next, a.color, Some(a.insertion)))
                .collect();
            ret += reward;
            buffer.push(Transition {
                features: feats[pick].to_vec(),
                reward,
                next_actions: next_feats.iter().map(|f| f.to_vec()).collect(),
                terminal: done || dead_end,
            });
            loss_sum += update(&mut policy, &buffer, hp, &mut rng);
            updates += 1;
            if done && report.best_episode.as_ref().map_or(true, |b| next.distance < b.distance) {
                report.best_episode = Some(next.clone());
            }
            if done || dead_end {
                break;
            }
            state = next;
            actions = next_actions;
            feats = next_feats;
        }
        report
            .episode_losses
            .push(if updates > 0 { loss_sum / updates as f64 } else { 0.0 });
        report.episode_returns.push(ret);
    }
    if !policy.is_finite() {
        return Err(Error::Invariant("Q-network parameters diverged".into()));
    }
    report.policy = policy;
    Ok(report)
}

/// Greedy tour under `policy`: repeatedly take the highest-valued action
/// until coverage is restored. `None` on a dead end.
pub fn rollout(policy: &QPolicy, scenario: &Scenario) -> Result<Option<Solution>> {
    if policy.input_dim() != FEATURES {
        return Err(Error::DimensionMismatch {
            expected: FEATURES,
            got: policy.input_dim(),
        });
    }
    let env = Env::new(scenario);
    let mut state = PartialSolution::start();
    while !env.is_done(&state) {
        let actions = env.actions(&state);
        if actions.is_empty() {
            return Ok(None);
        }
        let feats: Vec<[f64; FEATURES]> = actions
            .iter()
            .map(|a| env.encode_with(&state, a.color, Some(a.insertion)))
            .collect();
        let pick = best_action(policy, &feats);
        state = env.apply(&state, &actions[pick]);
    }
    Ok(Some(Solution::from_order(env.ids(&state), scenario)?))
}

/// The tour a trained run reports: the greedy rollout, or the shortest
/// training episode when `keep_best_episode` is set and it is shorter.
pub fn final_tour(report: &TrainReport, scenario: &Scenario, hp: &RlHyperparams) -> Result<Option<Solution>> {
    if report.isolated {
        return Ok(None);
    }
    let greedy = rollout(&report.policy, scenario)?;
    let explored = match (&report.best_episode, hp.keep_best_episode) {
        (Some(state), true) => Some(Solution::from_order(Env::new(scenario).ids(state), scenario)?),
        _ => None,
    };
    Ok(match (greedy, explored) {
        (Some(g), Some(e)) if e.distance_m < g.distance_m => Some(e),
        (Some(g), _) => Some(g),
        (None, e) => e,
    })
}

/// Train, then pick the final tour.
pub fn solve_dqn(scenario: &Scenario, hp: &RlHyperparams) -> Result<Option<Solution>> {
    let report = train(scenario, hp)?;
    final_tour(&report, scenario, hp)
}

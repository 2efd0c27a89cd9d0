//! Deep Q-learning solver.

mod env;
mod network;
mod replay;
mod train;

pub use env::{Action, Env, PartialSolution, FEATURES};
pub use network::{Gradients, QPolicy};
pub use replay::{ReplayBuffer, Transition};
pub use train::{final_tour, rollout, solve_dqn, train, RlHyperparams, TrainReport};

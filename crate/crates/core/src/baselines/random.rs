use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Board, Walk};
use crate::error::{Error, Result};
use crate::problem::Scenario;
use crate::solution::Solution;

/// Random walks over allowed moves; the shortest completed walk over all
/// restarts wins (earliest on ties).
pub fn solve_random(scenario: &Scenario, seed: u64, restarts: usize) -> Result<Option<Solution>> {
    if restarts == 0 {
        return Err(Error::InvalidParams("restarts must be at least 1".into()));
    }
    let board = Board::new(scenario);
    if board.done(&Walk::start()) {
        return Ok(Some(Solution::empty()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Walk)> = None;
    for _ in 0..restarts {
        let mut walk = Walk::start();
        let mut stuck = false;
        while !board.done(&walk) {
            let moves = board.moves(&walk);
            if moves.is_empty() {
                stuck = true;
                break;
            }
            let (c, t) = moves[rng.gen_range(0..moves.len())];
            walk.push(c, t);
        }
        if stuck {
            continue;
        }
        let length = board.tour.distance(&walk.order);
        if best.as_ref().map_or(true, |(b, _)| length < *b) {
            best = Some((length, walk));
        }
    }
    match best {
        Some((_, walk)) => board.finish(&walk).map(Some),
        None => Ok(None),
    }
}

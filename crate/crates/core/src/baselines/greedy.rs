use super::{Board, Walk};
use crate::error::Result;
use crate::problem::Scenario;
use crate::solution::Solution;

/// Always moves to the nearest allowed requester (lowest color on ties).
/// `None` if the walk gets stuck before coverage is restored.
pub fn solve_greedy(scenario: &Scenario) -> Result<Option<Solution>> {
    let board = Board::new(scenario);
    let mut walk = Walk::start();
    while !board.done(&walk) {
        let next = board
            .moves(&walk)
            .into_iter()
            .map(|(c, t)| (board.leg(&walk, c), c, t))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        match next {
            Some((_, c, t)) => walk.push(c, t),
            None => return Ok(None),
        }
    }
    board.finish(&walk).map(Some)
}

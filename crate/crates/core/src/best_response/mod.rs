//! Exact best responses to uniform mixtures over pure-strategy histories.
//!
//! Each best response is an indicator-constraint integer program: a binary
//! per opponent entry and slot says "beat this amount here". Because the
//! payoff on a slot only changes at those thresholds, the program is solved
//! exactly by enumerating thresholds per slot ([`candidates`]) and choosing one
//! amount per slot under the budget ([`mckp`]).
//!
//! Indicators set to zero never need an explicit "lose" constraint: a
//! selection that meets a threshold always counts it, since counting it only
//! raises the objective.

pub mod candidates;
pub mod mckp;

use std::borrow::Borrow;

use rayon::prelude::*;
use thiserror::Error;

pub use candidates::{candidate_set1, candidate_set2, Candidate, SlotCandidateList};
pub use mckp::{brute_force, solve_mckp, MckpSolution};

use crate::game::{Allocation, ConditionalAllocation, Game};
use crate::payoff::{row_utility2, utility1_unchecked};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BrError {
    #[error("opponent history is empty")]
    EmptyHistory,
    #[error("outcome index {0} out of range")]
    BadOutcome(usize),
    #[error("slot index {0} out of range")]
    BadSlot(usize),
    #[error("invalid candidate lists: {0}")]
    InvalidCandidates(String),
    #[error("no feasible selection")]
    Infeasible,
    #[error("brute force product of {0} selections exceeds the limit")]
    ProductTooLarge(u128),
}

/// What a best response optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Mode {
    /// Weighted count of opponent thresholds beaten, ignoring the difference
    /// between losing a slot and landing in the delta gap.
    #[default]
    Wins,
    /// The responder's true expected utility.
    Utility,
}

impl Mode {
    pub fn objective(self) -> Objective {
        match self {
            Mode::Wins => Objective::WinWeight,
            Mode::Utility => Objective::TrueValue,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    WinWeight,
    TrueValue,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestResponse<S> {
    pub strategy: S,
    /// Optimal value of the knapsack objective.
    pub objective: f64,
    /// The responder's average utility against the mixture, evaluated
    /// directly from the returned strategy.
    pub true_avg_utility: f64,
}

/// Where a best response puts the budget its knapsack solution left unused.
///
/// Payoffs are nondecreasing in every amount, so either rule keeps every
/// threshold the knapsack solution meets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Leftover {
    /// Scale every chosen amount by `budget / total` (an even split when
    /// nothing was chosen). Treats all slots alike.
    #[default]
    Proportional,
    /// Add the whole remainder to slot 0.
    Slot0,
}

fn pad_to_budget(mut amounts: Vec<f64>, budget: f64, leftover: Leftover) -> Vec<f64> {
    match leftover {
        Leftover::Slot0 => {
            let rest: f64 = amounts[1..].iter().sum();
            amounts[0] = amounts[0].max(budget - rest);
        }
        Leftover::Proportional => {
            let total: f64 = amounts.iter().sum();
            if total > 0.0 {
                // scale >= 1, so no amount decreases
                let scale = (budget / total).max(1.0);
                amounts.iter_mut().for_each(|a| *a *= scale);
            } else {
                let even = budget / amounts.len() as f64;
                amounts.iter_mut().for_each(|a| *a = even);
            }
        }
    }
    amounts
}

/// Player 1's best response to the uniform mixture over `history_p2`.
pub fn best_response1<S>(
    game: &Game,
    history_p2: &[S],
    mode: Mode,
    leftover: Leftover,
) -> Result<BestResponse<Allocation>, BrError>
where
    S: Borrow<ConditionalAllocation> + Sync,
{
    if history_p2.is_empty() {
        return Err(BrError::EmptyHistory);
    }
    let lists = (0..game.num_slots())
        .map(|q| candidate_set1(game, history_p2, q, mode))
        .collect::<Result<Vec<_>, _>>()?;
    let solution = solve_mckp(&lists, game.budget1(), mode.objective())?;
    let amounts = pad_to_budget(solution.amounts, game.budget1(), leftover);

    let n = history_p2.len() as f64;
    let true_avg_utility = history_p2
        .iter()
        .map(|s2| utility1_unchecked(game, &amounts, s2.borrow()))
        .sum::<f64>()
        / n;
    Ok(BestResponse {
        strategy: Allocation::from_raw(amounts),
        objective: solution.objective,
        true_avg_utility,
    })
}

/// Player 2's best response row for a single `outcome`. The utility is the
/// per-outcome value, not weighted by the outcome's probability.
pub fn best_response2<S>(
    game: &Game,
    history_p1: &[S],
    outcome: usize,
    mode: Mode,
    leftover: Leftover,
) -> Result<BestResponse<Vec<f64>>, BrError>
where
    S: Borrow<Allocation>,
{
    if history_p1.is_empty() {
        return Err(BrError::EmptyHistory);
    }
    if outcome >= game.num_outcomes() {
        return Err(BrError::BadOutcome(outcome));
    }
    let lists = (0..game.num_slots())
        .map(|q| candidate_set2(game, history_p1, outcome, q, mode))
        .collect::<Result<Vec<_>, _>>()?;
    let solution = solve_mckp(&lists, game.budget2(), mode.objective())?;
    let row = pad_to_budget(solution.amounts, game.budget2(), leftover);

    let n = history_p1.len() as f64;
    let true_avg_utility = history_p1
        .iter()
        .map(|s1| row_utility2(game, outcome, s1.borrow().amounts(), &row))
        .sum::<f64>()
        / n;
    Ok(BestResponse {
        strategy: row,
        objective: solution.objective,
        true_avg_utility,
    })
}

/// Player 2's full best response: one independent problem per outcome,
/// solved in parallel and assembled in outcome order. Objective and utility
/// are weighted by the outcome probabilities.
pub fn best_response2_full<S>(
    game: &Game,
    history_p1: &[S],
    mode: Mode,
    leftover: Leftover,
) -> Result<BestResponse<ConditionalAllocation>, BrError>
where
    S: Borrow<Allocation> + Sync,
{
    let rows = (0..game.num_outcomes())
        .into_par_iter()
        .map(|o| best_response2(game, history_p1, o, mode, leftover))
        .collect::<Result<Vec<_>, _>>()?;
    let mut objective = 0.0;
    let mut true_avg_utility = 0.0;
    for (o, r) in rows.iter().enumerate() {
        objective += game.prob(o) * r.objective;
        true_avg_utility += game.prob(o) * r.true_avg_utility;
    }
    let strategy = ConditionalAllocation::from_rows_raw(
        game.num_slots(),
        rows.into_iter().map(|r| r.strategy).collect(),
    );
    Ok(BestResponse {
        strategy,
        objective,
        true_avg_utility,
    })
}

//! Game model for continuous imperfect-information Blotto.
//!
//! Battlefields are placed into slots by an outcome permutation drawn from a
//! known distribution. Player 1 commits a single allocation over slots without
//! seeing the outcome; player 2 observes the outcome and allocates per outcome.

use thiserror::Error;

/// Tolerance on the sum of outcome probabilities.
pub const PROB_SUM_TOLERANCE: f64 = 1e-12;

/// Tolerance on the budget equality of pure strategies.
pub const BUDGET_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("battlefield {index} has non-positive value {value}")]
    NonPositiveValue { index: usize, value: f64 },
    #[error("outcome {index} is not a permutation of 0..{len}: {perm:?}")]
    BadPermutation {
        index: usize,
        len: usize,
        perm: Vec<usize>,
    },
    #[error("outcome probabilities must be non-negative and sum to 1 (sum = {sum})")]
    ProbsNotNormalized { sum: f64 },
    #[error("budget of player {player} must be positive, got {value}")]
    NonPositiveBudget { player: u8, value: f64 },
    #[error("delta must be positive, got {0}")]
    NonPositiveDelta(f64),
    #[error("{0}")]
    DimensionMismatch(String),
}

/// Unvalidated game description, as read from a config file or built in code.
#[derive(Debug, Clone, PartialEq)]
pub struct GameSpec {
    pub battlefield_values: Vec<f64>,
    pub outcomes: Vec<Vec<usize>>,
    pub outcome_probs: Vec<f64>,
    pub budget1: f64,
    pub budget2: f64,
    pub delta: f64,
}

/// A validated, immutable continuous Blotto instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Game {
    values: Vec<f64>,
    outcomes: Vec<Vec<usize>>,
    probs: Vec<f64>,
    budget1: f64,
    budget2: f64,
    delta: f64,
    // slot_values[o][q] = v_{o(q)}
    slot_values: Vec<Vec<f64>>,
}

impl Game {
    /// Validates a raw description. This is the only way to build a `Game`.
    pub fn new(spec: GameSpec) -> Result<Self, GameError> {
        let GameSpec {
            battlefield_values: values,
            outcomes,
            outcome_probs: probs,
            budget1,
            budget2,
            delta,
        } = spec;

        if values.is_empty() {
            return Err(GameError::DimensionMismatch(
                "game needs at least one battlefield".into(),
            ));
        }
        for (index, &value) in values.iter().enumerate() {
            // also rejects NaN
            if value <= 0.0 || !value.is_finite() {
                return Err(GameError::NonPositiveValue { index, value });
            }
        }
        if outcomes.is_empty() {
            return Err(GameError::DimensionMismatch(
                "game needs at least one outcome".into(),
            ));
        }
        let n = values.len();
        for (index, perm) in outcomes.iter().enumerate() {
            if !is_permutation(perm, n) {
                return Err(GameError::BadPermutation {
                    index,
                    len: n,
                    perm: perm.clone(),
                });
            }
        }
        if probs.len() != outcomes.len() {
            return Err(GameError::DimensionMismatch(format!(
                "{} outcomes but {} probabilities",
                outcomes.len(),
                probs.len()
            )));
        }
        let sum: f64 = probs.iter().sum();
        if probs.iter().any(|p| *p < 0.0 || !p.is_finite())
            || !sum.is_finite()
            || (sum - 1.0).abs() > PROB_SUM_TOLERANCE
        {
            return Err(GameError::ProbsNotNormalized { sum });
        }
        if budget1 <= 0.0 || !budget1.is_finite() {
            return Err(GameError::NonPositiveBudget {
                player: 1,
                value: budget1,
            });
        }
        if budget2 <= 0.0 || !budget2.is_finite() {
            return Err(GameError::NonPositiveBudget {
                player: 2,
                value: budget2,
            });
        }
        if delta <= 0.0 || !delta.is_finite() {
            return Err(GameError::NonPositiveDelta(delta));
        }

        let slot_values = outcomes
            .iter()
            .map(|perm| perm.iter().map(|&f| values[f]).collect())
            .collect();
        Ok(Self {
            values,
            outcomes,
            probs,
            budget1,
            budget2,
            delta,
            slot_values,
        })
    }

    /// The three-battlefield instance with values 0.7/0.2/0.1, three cyclic
    /// outcomes of equal probability, budgets 10 and 7, and delta 1e-4.
    pub fn blotto3() -> Self {
        Self::new(GameSpec {
            battlefield_values: vec![0.7, 0.2, 0.1],
            outcomes: vec![vec![0, 1, 2], vec![2, 0, 1], vec![1, 2, 0]],
            outcome_probs: vec![1.0 / 3.0; 3],
            budget1: 10.0,
            budget2: 7.0,
            delta: 1e-4,
        })
        .expect("built-in game is valid")
    }

    pub fn spec(&self) -> GameSpec {
        GameSpec {
            battlefield_values: self.values.clone(),
            outcomes: self.outcomes.clone(),
            outcome_probs: self.probs.clone(),
            budget1: self.budget1,
            budget2: self.budget2,
            delta: self.delta,
        }
    }

    /// Number of battlefields, which is also the number of slots.
    pub fn num_slots(&self) -> usize {
        self.values.len()
    }

    pub fn num_outcomes(&self) -> usize {
        self.outcomes.len()
    }

    pub fn battlefield_values(&self) -> &[f64] {
        &self.values
    }

    pub fn outcomes(&self) -> &[Vec<usize>] {
        &self.outcomes
    }

    pub fn outcome_probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, outcome: usize) -> f64 {
        self.probs[outcome]
    }

    pub fn budget1(&self) -> f64 {
        self.budget1
    }

    pub fn budget2(&self) -> f64 {
        self.budget2
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Value of the battlefield sitting in `slot` under `outcome`.
    #[inline]
    pub fn slot_value(&self, outcome: usize, slot: usize) -> f64 {
        self.slot_values[outcome][slot]
    }

    /// Sum of all battlefield values; bounds |u1|.
    pub fn total_value(&self) -> f64 {
        self.values.iter().sum()
    }
}

fn is_permutation(perm: &[usize], n: usize) -> bool {
    if perm.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &f in perm {
        if f >= n || seen[f] {
            return false;
        }
        seen[f] = true;
    }
    true
}

/// A pure strategy of player 1: one amount per slot, summing to `B1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation(Vec<f64>);

impl Allocation {
    /// Checks non-negativity and the budget equality for player 1.
    pub fn new(game: &Game, amounts: Vec<f64>) -> Result<Self, GameError> {
        check_row(
            &amounts,
            game.num_slots(),
            game.budget1(),
            "player 1 allocation",
        )?;
        Ok(Self(amounts))
    }

    /// Wraps amounts without validation. Callers own the invariants.
    pub fn from_raw(amounts: Vec<f64>) -> Self {
        Self(amounts)
    }

    pub fn uniform(game: &Game) -> Self {
        let n = game.num_slots();
        Self(vec![game.budget1() / n as f64; n])
    }

    pub fn amounts(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// A pure strategy of player 2: an allocation row per outcome, each summing
/// to `B2`. Stored row-major as `outcomes x slots`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalAllocation {
    slots: usize,
    amounts: Vec<f64>,
}

impl ConditionalAllocation {
    pub fn new(game: &Game, rows: Vec<Vec<f64>>) -> Result<Self, GameError> {
        if rows.len() != game.num_outcomes() {
            return Err(GameError::DimensionMismatch(format!(
                "player 2 strategy has {} rows, game has {} outcomes",
                rows.len(),
                game.num_outcomes()
            )));
        }
        for row in &rows {
            check_row(row, game.num_slots(), game.budget2(), "player 2 row")?;
        }
        Ok(Self::from_rows_raw(game.num_slots(), rows))
    }

    /// Assembles rows without validation. Callers own the invariants.
    pub fn from_rows_raw(slots: usize, rows: Vec<Vec<f64>>) -> Self {
        let amounts = rows.into_iter().flatten().collect();
        Self { slots, amounts }
    }

    pub fn uniform(game: &Game) -> Self {
        let n = game.num_slots();
        Self {
            slots: n,
            amounts: vec![game.budget2() / n as f64; n * game.num_outcomes()],
        }
    }

    /// The same row under every outcome.
    pub fn repeated(game: &Game, row: &[f64]) -> Result<Self, GameError> {
        Self::new(game, vec![row.to_vec(); game.num_outcomes()])
    }

    pub fn num_outcomes(&self) -> usize {
        self.amounts.len().checked_div(self.slots).unwrap_or(0)
    }

    pub fn num_slots(&self) -> usize {
        self.slots
    }

    #[inline]
    pub fn row(&self, outcome: usize) -> &[f64] {
        &self.amounts[outcome * self.slots..(outcome + 1) * self.slots]
    }

    #[inline]
    pub fn get(&self, outcome: usize, slot: usize) -> f64 {
        self.amounts[outcome * self.slots + slot]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.amounts.chunks(self.slots)
    }
}

fn check_row(row: &[f64], slots: usize, budget: f64, what: &str) -> Result<(), GameError> {
    if row.len() != slots {
        return Err(GameError::DimensionMismatch(format!(
            "{what} has {} entries, game has {slots} slots",
            row.len()
        )));
    }
    if row.iter().any(|x| *x < 0.0 || !x.is_finite()) {
        return Err(GameError::DimensionMismatch(format!(
            "{what} has a negative or non-finite entry: {row:?}"
        )));
    }
    let sum: f64 = row.iter().sum();
    if (sum - budget).abs() > BUDGET_TOLERANCE {
        return Err(GameError::DimensionMismatch(format!(
            "{what} sums to {sum}, budget is {budget}"
        )));
    }
    Ok(())
}

/// Every pure strategy played so far, one entry per iteration and player.
/// Each side is read as the uniform mixture over its entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct History {
    pub player1: Vec<Allocation>,
    pub player2: Vec<ConditionalAllocation>,
}

impl History {
    pub fn new(first1: Allocation, first2: ConditionalAllocation) -> Self {
        Self {
            player1: vec![first1],
            player2: vec![first2],
        }
    }

    pub fn push(&mut self, s1: Allocation, s2: ConditionalAllocation) {
        self.player1.push(s1);
        self.player2.push(s2);
    }

    /// Number of stored iterations (t + 1 after iteration t).
    pub fn len(&self) -> usize {
        debug_assert_eq!(self.player1.len(), self.player2.len());
        self.player1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.player1.is_empty()
    }
}

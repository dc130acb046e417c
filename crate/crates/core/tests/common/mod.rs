#![allow(dead_code)]

use blotto::sampling::simplex_point;
use blotto::{Allocation, ConditionalAllocation, Game, GameSpec};
use rand::seq::SliceRandom;
use rand::Rng;

pub struct GameShape {
    pub max_slots: usize,
    pub max_outcomes: usize,
}

pub fn random_permutation<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

pub fn random_game<R: Rng>(rng: &mut R, shape: &GameShape) -> Game {
    let n = rng.random_range(1..=shape.max_slots);
    let m = rng.random_range(1..=shape.max_outcomes);
    let values = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let outcomes = (0..m).map(|_| random_permutation(rng, n)).collect();
    let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let probs = raw.iter().map(|p| p / total).collect();
    Game::new(GameSpec {
        battlefield_values: values,
        outcomes,
        outcome_probs: probs,
        budget1: rng.random_range(1.0..10.0),
        budget2: rng.random_range(1.0..10.0),
        delta: rng.random_range(1e-4..0.5),
    })
    .expect("generated game is valid")
}

pub fn random_allocation<R: Rng>(rng: &mut R, game: &Game) -> Allocation {
    Allocation::from_raw(simplex_point(rng, game.num_slots(), game.budget1()))
}

pub fn random_conditional<R: Rng>(rng: &mut R, game: &Game) -> ConditionalAllocation {
    let rows = (0..game.num_outcomes())
        .map(|_| simplex_point(rng, game.num_slots(), game.budget2()))
        .collect();
    ConditionalAllocation::from_rows_raw(game.num_slots(), rows)
}

/// Amounts that spend at most `budget` (not necessarily all of it).
pub fn random_underspend<R: Rng>(rng: &mut R, slots: usize, budget: f64) -> Vec<f64> {
    let fraction = rng.random_range(0.0..=1.0);
    simplex_point(rng, slots, budget * fraction)
}

pub fn sum(xs: &[f64]) -> f64 {
    xs.iter().sum()
}

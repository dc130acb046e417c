//! Redundant fictitious play.
//!
//! Every iteration's pure best response is stored individually and each
//! player's average strategy is the uniform mixture over its stored entries.
//! Both players respond to the opponent's mixture over entries `0..t` before
//! either response is appended.
//!
//! The value of the mixture pair is maintained incrementally: `pair_sum1`
//! holds the sum of `u1` over every stored (player 1, player 2) pair, so each
//! iteration only scores the new row and column of that table.

use std::borrow::Borrow;
use std::io;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::best_response::{best_response1, best_response2_full, BrError, Leftover, Mode};
use crate::game::{Allocation, ConditionalAllocation, Game, History};
use crate::payoff::utility1_unchecked;
use crate::sampling::{sample_subset, simplex_point, SampleSizeError};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid run options: {0}")]
    InvalidOptions(String),
    #[error(transparent)]
    BestResponse(#[from] BrError),
    #[error(transparent)]
    Sample(#[from] SampleSizeError),
    #[error("trace sink failed: {0}")]
    Sink(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitMode {
    /// Budgets split evenly over the slots.
    #[default]
    Uniform,
    /// Uniform draws from each budget simplex, seeded.
    SeededRandom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub iterations: usize,
    pub report_every: usize,
    pub init: InitMode,
    pub seed: u64,
    /// Respond to a fresh uniform sample of this many opponent entries
    /// instead of the whole history.
    pub sample_k: Option<usize>,
    pub mode: Mode,
    pub leftover: Leftover,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            iterations: 5000,
            report_every: 10,
            init: InitMode::Uniform,
            seed: 0,
            sample_k: None,
            mode: Mode::Wins,
            leftover: Leftover::Proportional,
        }
    }
}

impl RunOptions {
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.iterations == 0 {
            return Err(EngineError::InvalidOptions(
                "iterations must be >= 1".into(),
            ));
        }
        if self.report_every == 0 {
            return Err(EngineError::InvalidOptions(
                "report_every must be >= 1".into(),
            ));
        }
        if self.sample_k == Some(0) {
            return Err(EngineError::InvalidOptions("sample_k must be >= 1".into()));
        }
        Ok(())
    }
}

/// One row of the convergence trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub elapsed_seconds: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub eps: f64,
    pub v_star1: f64,
}

/// Consumer of trace records emitted during [`run`].
pub trait TraceSink {
    fn record(&mut self, record: &TraceRecord) -> io::Result<()>;
}

impl TraceSink for Vec<TraceRecord> {
    fn record(&mut self, record: &TraceRecord) -> io::Result<()> {
        self.push(*record);
        Ok(())
    }
}

/// Discards every record.
#[derive(Debug, Default, Clone, Copy)]
pub struct NullSink;

impl TraceSink for NullSink {
    fn record(&mut self, _: &TraceRecord) -> io::Result<()> {
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct EngineState {
    pub history: History,
    pub pair_sum1: f64,
    pub v_star1: f64,
    pub v_star2: f64,
    /// Exploitabilities of the last step; NaN before the first step.
    pub eps1: f64,
    pub eps2: f64,
    pub eps: f64,
    pub t: usize,
    rng: ChaCha8Rng,
}

impl EngineState {
    fn set_values(&mut self) {
        let n = (self.t + 1) as f64;
        self.v_star1 = self.pair_sum1 / (n * n);
        self.v_star2 = -self.v_star1;
    }
}

/// Builds the iteration-0 state from the initial pure strategies.
pub fn initialize(game: &Game, options: &RunOptions) -> EngineState {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let (s1, s2) = match options.init {
        InitMode::Uniform => (
            Allocation::uniform(game),
            ConditionalAllocation::uniform(game),
        ),
        InitMode::SeededRandom => {
            let s1 =
                Allocation::from_raw(simplex_point(&mut rng, game.num_slots(), game.budget1()));
            let rows = (0..game.num_outcomes())
                .map(|_| simplex_point(&mut rng, game.num_slots(), game.budget2()))
                .collect();
            (
                s1,
                ConditionalAllocation::from_rows_raw(game.num_slots(), rows),
            )
        }
    };
    let pair_sum1 = utility1_unchecked(game, s1.amounts(), &s2);
    let mut state = EngineState {
        history: History::new(s1, s2),
        pair_sum1,
        v_star1: 0.0,
        v_star2: 0.0,
        eps1: f64::NAN,
        eps2: f64::NAN,
        eps: f64::NAN,
        t: 0,
        rng,
    };
    state.set_values();
    state
}

fn respond<S1, S2>(
    game: &Game,
    p1_entries: &[S1],
    p2_entries: &[S2],
    options: &RunOptions,
) -> Result<(Allocation, ConditionalAllocation), BrError>
where
    S1: Borrow<Allocation> + Sync,
    S2: Borrow<ConditionalAllocation> + Sync,
{
    let (br1, br2) = rayon::join(
        || best_response1(game, p2_entries, options.mode, options.leftover),
        || best_response2_full(game, p1_entries, options.mode, options.leftover),
    );
    Ok((br1?.strategy, br2?.strategy))
}

/// Advances the state by one fictitious-play iteration.
pub fn step(game: &Game, state: &mut EngineState, options: &RunOptions) -> Result<(), EngineError> {
    let t = state.t + 1;
    let history = &state.history;

    let (br1, br2) = match options.sample_k {
        // histories shorter than K are used whole
        Some(k) if k < history.len() => {
            let sub2 = sample_subset(&history.player2, k, &mut state.rng)?;
            let sub1 = sample_subset(&history.player1, k, &mut state.rng)?;
            respond(game, &sub1, &sub2, options)?
        }
        _ => respond(game, &history.player1, &history.player2, options)?,
    };

    // new row and column of the pair table, each against entries 0..t
    let row: f64 = history
        .player2
        .iter()
        .map(|s2| utility1_unchecked(game, br1.amounts(), s2))
        .sum();
    let col: f64 = history
        .player1
        .iter()
        .map(|s1| utility1_unchecked(game, s1.amounts(), &br2))
        .sum();
    let corner = utility1_unchecked(game, br1.amounts(), &br2);

    let tf = t as f64;
    state.eps1 = row / tf - state.v_star1;
    state.eps2 = -col / tf - state.v_star2;
    state.eps = state.eps1.max(state.eps2);

    state.pair_sum1 += row + col + corner;
    state.history.push(br1, br2);
    state.t = t;
    state.set_values();
    Ok(())
}

/// Runs `options.iterations` steps, emitting a record every
/// `report_every` iterations and after the last one.
pub fn run<T: TraceSink + ?Sized>(
    game: &Game,
    options: &RunOptions,
    sink: &mut T,
) -> Result<EngineState, EngineError> {
    options.validate()?;
    let start = Instant::now();
    let mut state = initialize(game, options);
    for t in 1..=options.iterations {
        step(game, &mut state, options)?;
        if t % options.report_every == 0 || t == options.iterations {
            sink.record(&TraceRecord {
                iteration: t,
                elapsed_seconds: start.elapsed().as_secs_f64(),
                eps1: state.eps1,
                eps2: state.eps2,
                eps: state.eps,
                v_star1: state.v_star1,
            })?;
        }
    }
    Ok(state)
}

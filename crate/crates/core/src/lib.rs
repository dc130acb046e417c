//! Approximate Nash equilibria of the continuous imperfect-information Blotto
//! game by redundant fictitious play.
//!
//! Player 1 splits a budget over slots without knowing which battlefield
//! occupies which slot; player 2 sees the outcome permutation and allocates
//! per outcome. Each fictitious-play iteration computes both players' exact
//! pure best responses to the opponent's uniform mixture over all previously
//! played pure strategies, and tracks the value of the mixture pair and each
//! player's exploitability.
//!
//! ```
//! use blotto::{engine, Game};
//!
//! let game = Game::blotto3();
//! let options = engine::RunOptions { iterations: 20, ..Default::default() };
//! let mut trace = Vec::new();
//! let state = engine::run(&game, &options, &mut trace).unwrap();
//! assert_eq!(state.history.len(), 21);
//! assert_eq!(trace.len(), 2);
//! ```

pub mod best_response;
pub mod engine;
pub mod game;
pub mod io;
pub mod payoff;
pub mod sampling;

pub use best_response::{BestResponse, BrError, Leftover, Mode};
pub use engine::{EngineState, RunOptions, TraceRecord, TraceSink};
pub use game::{Allocation, ConditionalAllocation, Game, GameError, GameSpec, History};

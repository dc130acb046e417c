//! File formats: JSON game configs, CSV convergence traces and JSON strategy
//! dumps.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{TraceRecord, TraceSink};
use crate::game::{Allocation, ConditionalAllocation, Game, GameError, GameSpec, History};

/// The three-battlefield experiment instance shipped with the crate.
pub const BLOTTO3_JSON: &str = include_str!("../configs/blotto3.json");

/// Column order of trace files.
pub const TRACE_HEADER: [&str; 6] = ["iteration", "elapsed_seconds", "eps1", "eps2", "eps", "v1"];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] io::Error),
    #[error("config is not valid JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("config field `{0}` is missing")]
    MissingField(&'static str),
    #[error("config field `{field}` is invalid: {source}")]
    Invalid {
        field: &'static str,
        #[source]
        source: GameError,
    },
}

impl ConfigError {
    /// Name of the offending field, for validation failures.
    pub fn field(&self) -> Option<&'static str> {
        match self {
            ConfigError::MissingField(f) | ConfigError::Invalid { field: f, .. } => Some(f),
            _ => None,
        }
    }
}

/// On-disk game description. Indices are 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameConfigFile {
    pub battlefield_values: Option<Vec<f64>>,
    pub outcomes: Option<Vec<Vec<usize>>>,
    pub outcome_probs: Option<Vec<f64>>,
    pub budget_p1: Option<f64>,
    pub budget_p2: Option<f64>,
    pub delta: Option<f64>,
}

impl From<&Game> for GameConfigFile {
    fn from(game: &Game) -> Self {
        let s = game.spec();
        Self {
            battlefield_values: Some(s.battlefield_values),
            outcomes: Some(s.outcomes),
            outcome_probs: Some(s.outcome_probs),
            budget_p1: Some(s.budget1),
            budget_p2: Some(s.budget2),
            delta: Some(s.delta),
        }
    }
}

impl GameConfigFile {
    pub fn into_game(self) -> Result<Game, ConfigError> {
        let spec = GameSpec {
            battlefield_values: self
                .battlefield_values
                .ok_or(ConfigError::MissingField("battlefield_values"))?,
            outcomes: self.outcomes.ok_or(ConfigError::MissingField("outcomes"))?,
            outcome_probs: self
                .outcome_probs
                .ok_or(ConfigError::MissingField("outcome_probs"))?,
            budget1: self
                .budget_p1
                .ok_or(ConfigError::MissingField("budget_p1"))?,
            budget2: self
                .budget_p2
                .ok_or(ConfigError::MissingField("budget_p2"))?,
            delta: self.delta.ok_or(ConfigError::MissingField("delta"))?,
        };
        Game::new(spec).map_err(|source| ConfigError::Invalid {
            field: field_of(&source),
            source,
        })
    }
}

fn field_of(err: &GameError) -> &'static str {
    match err {
        GameError::NonPositiveValue { .. } => "battlefield_values",
        GameError::BadPermutation { .. } => "outcomes",
        GameError::ProbsNotNormalized { .. } | GameError::DimensionMismatch(_) => "outcome_probs",
        GameError::NonPositiveBudget { player: 1, .. } => "budget_p1",
        GameError::NonPositiveBudget { .. } => "budget_p2",
        GameError::NonPositiveDelta(_) => "delta",
    }
}

pub fn parse_config(text: &str) -> Result<Game, ConfigError> {
    serde_json::from_str::<GameConfigFile>(text)?.into_game()
}

pub fn load_config(path: impl AsRef<Path>) -> Result<Game, ConfigError> {
    let file = File::open(path)?;
    serde_json::from_reader::<_, GameConfigFile>(BufReader::new(file))?.into_game()
}

pub fn bundled_blotto3() -> Game {
    parse_config(BLOTTO3_JSON).expect("bundled config is valid")
}

/// Formats a float with 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes trace records as CSV, flushing after every row so partial runs
/// keep their data.
pub struct CsvTraceWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl CsvTraceWriter<BufWriter<File>> {
    pub fn create(path: impl AsRef<Path>) -> io::Result<Self> {
        Self::new(BufWriter::new(File::create(path)?))
    }
}

impl<W: Write> CsvTraceWriter<W> {
    pub fn new(writer: W) -> io::Result<Self> {
        let mut inner = csv::Writer::from_writer(writer);
        inner.write_record(TRACE_HEADER)?;
        inner.flush()?;
        Ok(Self { inner })
    }

    pub fn into_inner(self) -> io::Result<W> {
        self.inner
            .into_inner()
            .map_err(|e| io::Error::other(e.to_string()))
    }
}

impl<W: Write> TraceSink for CsvTraceWriter<W> {
    fn record(&mut self, r: &TraceRecord) -> io::Result<()> {
        self.inner.write_record([
            r.iteration.to_string(),
            format_float(r.elapsed_seconds),
            format_float(r.eps1),
            format_float(r.eps2),
            format_float(r.eps),
            format_float(r.v_star1),
        ])?;
        self.inner.flush()
    }
}

/// Reads a trace file written by [`CsvTraceWriter`].
pub fn read_trace(path: impl AsRef<Path>) -> Result<Vec<TraceRecord>, csv::Error> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.iter().ne(TRACE_HEADER) {
        return Err(csv::Error::from(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("unexpected trace header {headers:?}"),
        )));
    }
    let bad =
        |what: &str| csv::Error::from(io::Error::new(io::ErrorKind::InvalidData, what.to_string()));
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row?;
        let f = |i: usize| -> Result<f64, csv::Error> {
            row[i]
                .parse()
                .map_err(|_| bad(&format!("bad float {:?}", &row[i])))
        };
        out.push(TraceRecord {
            iteration: row[0].parse().map_err(|_| bad("bad iteration"))?,
            elapsed_seconds: f(1)?,
            eps1: f(2)?,
            eps2: f(3)?,
            eps: f(4)?,
            v_star1: f(5)?,
        });
    }
    Ok(out)
}

/// Serialized strategy arrays of a run together with the game they belong
/// to. `player1` is `T x |F|`, `player2` is `T x M x |F|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyDump {
    pub game: GameConfigFile,
    pub player1: Vec<Vec<f64>>,
    pub player2: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Error)]
pub enum DumpError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("strategy entry {index}: {source}")]
    Strategy {
        index: usize,
        #[source]
        source: GameError,
    },
    #[error("player histories differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

impl StrategyDump {
    pub fn new(game: &Game, history: &History) -> Self {
        Self {
            game: GameConfigFile::from(game),
            player1: history
                .player1
                .iter()
                .map(|s| s.amounts().to_vec())
                .collect(),
            player2: history
                .player2
                .iter()
                .map(|s| s.rows().map(<[f64]>::to_vec).collect())
                .collect(),
        }
    }

    /// Rebuilds and validates the game and every stored strategy.
    pub fn into_parts(self) -> Result<(Game, History), DumpError> {
        let game = self.game.into_game()?;
        if self.player1.len() != self.player2.len() {
            return Err(DumpError::LengthMismatch(
                self.player1.len(),
                self.player2.len(),
            ));
        }
        let mut history = History::default();
        for (index, (a, b)) in self.player1.into_iter().zip(self.player2).enumerate() {
            let s1 = Allocation::new(&game, a)
                .map_err(|source| DumpError::Strategy { index, source })?;
            let s2 = ConditionalAllocation::new(&game, b)
                .map_err(|source| DumpError::Strategy { index, source })?;
            history.push(s1, s2);
        }
        Ok((game, history))
    }
}

pub fn dump_strategies(
    game: &Game,
    history: &History,
    path: impl AsRef<Path>,
) -> Result<(), DumpError> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, &StrategyDump::new(game, history))?;
    w.flush()?;
    Ok(())
}

pub fn load_strategies(path: impl AsRef<Path>) -> Result<(Game, History), DumpError> {
    let file = File::open(path)?;
    let dump: StrategyDump = serde_json::from_reader(BufReader::new(file))?;
    dump.into_parts()
}

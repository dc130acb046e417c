use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use blotto::engine::{self, InitMode, RunOptions};
use blotto::io::{dump_strategies, load_config, CsvTraceWriter};
use blotto::{Leftover, Mode};

const EXIT_USAGE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(
    name = "blotto",
    version,
    about = "Redundant fictitious play for continuous Blotto"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run fictitious play on a game and write the convergence trace
    Solve(SolveArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Wins,
    Utility,
}

#[derive(Clone, Copy, ValueEnum)]
enum LeftoverArg {
    Proportional,
    Slot0,
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Uniform,
    Random,
}

#[derive(Args)]
struct SolveArgs {
    /// Game description (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Number of iterations
    #[arg(long, default_value_t = 5000, value_parser = clap::value_parser!(u64).range(1..))]
    iters: u64,
    /// Emit a trace row every N iterations (and after the last one)
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    report_every: u64,
    /// Trace CSV output path
    #[arg(long)]
    out: PathBuf,
    /// Optional JSON dump of every stored strategy
    #[arg(long)]
    strategies_out: Option<PathBuf>,
    /// Best-response objective
    #[arg(long, value_enum, default_value_t = ModeArg::Wins)]
    mode: ModeArg,
    /// Respond to K sampled opponent entries per iteration
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    sample_k: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = InitArg::Uniform)]
    init: InitArg,
    /// Where best responses put budget not needed to meet any threshold
    #[arg(long, value_enum, default_value_t = LeftoverArg::Proportional)]
    leftover: LeftoverArg,
}

fn solve(args: SolveArgs) -> Result<(), (u8, String)> {
    let game = load_config(&args.config)
        .map_err(|e| (EXIT_CONFIG, format!("{}: {e}", args.config.display())))?;
    let options = RunOptions {
        iterations: args.iters as usize,
        report_every: args.report_every as usize,
        init: match args.init {
            InitArg::Uniform => InitMode::Uniform,
            InitArg::Random => InitMode::SeededRandom,
        },
        seed: args.seed,
        sample_k: args.sample_k.map(|k| k as usize),
        mode: match args.mode {
            ModeArg::Wins => Mode::Wins,
            ModeArg::Utility => Mode::Utility,
        },
        leftover: match args.leftover {
            LeftoverArg::Proportional => Leftover::Proportional,
            LeftoverArg::Slot0 => Leftover::Slot0,
        },
    };

    let mut sink = CsvTraceWriter::create(&args.out)
        .map_err(|e| (EXIT_RUNTIME, format!("{}: {e}", args.out.display())))?;
    let start = Instant::now();
    let state =
        engine::run(&game, &options, &mut sink).map_err(|e| (EXIT_RUNTIME, e.to_string()))?;
    let elapsed = start.elapsed().as_secs_f64();

    if let Some(path) = &args.strategies_out {
        dump_strategies(&game, &state.history, path)
            .map_err(|e| (EXIT_RUNTIME, format!("{}: {e}", path.display())))?;
    }

    println!("iterations  {}", state.t);
    println!("eps         {:.6}", state.eps);
    println!("eps1        {:.6}", state.eps1);
    println!("eps2        {:.6}", state.eps2);
    println!("v1          {:.6}", state.v_star1);
    println!("elapsed_s   {elapsed:.3}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Solve(args) => match solve(args) {
            Ok(()) => ExitCode::SUCCESS,
            Err((code, msg)) => {
                eprintln!("error: {msg}");
                ExitCode::from(code)
            }
        },
    }
}

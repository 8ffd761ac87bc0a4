//! `bnctl`: structural controllability, minimum control, pinning design and
//! stabilization of (probabilistic) Boolean networks from `.bn` files.

mod commands;
mod report;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "bnctl", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the JSON report here.
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    /// Write a DOT rendering of the relevant graph here.
    #[arg(long, global = true)]
    dot: Option<PathBuf>,
    /// Master seed for randomized steps.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Size cap: cycles enumerated (graph commands) or states held
    /// (chain and oracle commands).
    #[arg(long, global = true)]
    cap: Option<u64>,
    /// Inject a bundled set of reference choices.
    #[arg(long, global = true)]
    fixture: Option<Fixture>,
    /// Include wall-clock timing in the report (makes it non-reproducible).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Fixture {
    TcellPaper,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum OracleMode {
    /// Every state reaches every state (concrete network).
    Assr,
    /// Every network with the same wiring is controllable.
    Class,
    /// Brute-force minimum control set, compared with the solver.
    Mincontrol,
    /// Exact-η reachability of all state pairs.
    Eta,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SolveMode {
    Search,
    Xor,
}

#[derive(Subcommand)]
enum Command {
    /// Structural controllability of a network's wiring graph.
    Check { file: PathBuf },
    /// Minimum set of state nodes to control.
    Mincontrol { file: PathBuf },
    /// Pinning control making the network structurally controllable.
    Pin {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = SolveMode::Search)]
        mode: SolveMode,
        /// Write the pinned network in `.bn` form here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stability in probability of a PBN at a target state.
    PbnCheck {
        file: PathBuf,
        #[arg(long)]
        target: String,
        /// Restrict the chain to the states reachable from this state.
        #[arg(long)]
        from: Option<String>,
        /// Constant value held by every generator.
        #[arg(long, default_value_t = 1)]
        inputs: u8,
        /// Write `P{x(t) = target | x(0)}` for every initial state and t.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        csv_horizon: Option<usize>,
    },
    /// Two-step pinning stabilization of a PBN at a target state.
    PbnStabilize {
        file: PathBuf,
        #[arg(long)]
        target: String,
        #[arg(long)]
        step1_mode: Option<usize>,
        #[arg(long)]
        step2_mode: Option<usize>,
        /// Monte Carlo runs (0 skips the simulation).
        #[arg(long, default_value_t = 10_000)]
        runs: usize,
        #[arg(long, default_value_t = 300)]
        horizon: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        csv_horizon: Option<usize>,
    },
    /// Exhaustive reference checks over the state space.
    Oracle {
        file: PathBuf,
        #[arg(long, value_enum)]
        mode: OracleMode,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let cap = e.chain().any(|c| c.downcast_ref::<bnctl::Error>().is_some_and(bnctl::Error::is_cap));
            ExitCode::from(if cap { 3 } else { 2 })
        }
    }
}

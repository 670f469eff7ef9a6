//! Command-line surface of the solver. Every invocation is reproducible:
//! randomized commands require an explicit seed, and each run emits a
//! manifest sufficient to replay it.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use svrp_core::expect::StrategyKind;
use svrp_core::model::{DirectGate, Strategy};

/// A command failure carrying its process exit code. Code 0 is success;
/// 1 internal errors, 2 bad arguments, 3 unreadable or malformed input
/// files, 4 infeasible solutions, 5 refused enumeration budgets.
#[derive(Debug)]
pub enum Failure {
    Internal(String),
    Usage(String),
    Parse(String),
    Infeasible(String),
    Budget(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Internal(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Parse(_) => 3,
            Failure::Infeasible(_) => 4,
            Failure::Budget(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Internal(m)
            | Failure::Usage(m)
            | Failure::Parse(m)
            | Failure::Infeasible(m)
            | Failure::Budget(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "svrp",
    version,
    about = "Anticipatory vehicle routing under stochastic, time-windowed requests",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a benchmark instance from an address pool.
    Generate(GenerateArgs),
    /// Evaluate a stored solution's expected cost.
    Evaluate(EvaluateArgs),
    /// Optimize a first-stage solution by simulated annealing.
    Solve(SolveArgs),
    /// Enumerate every solution on a waiting-time grid for the exact optimum.
    Exact(ExactArgs),
    /// Estimate a policy's cost on sampled scenarios.
    Simulate(SimulateArgs),
    /// Turn a cost table into performance profiles.
    Profile(ProfileArgs),
}

/// Waiting-location placement of generated instances.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    /// Dedicated waiting locations placed by clustering the address pool.
    Separated,
    /// Every customer location doubles as a waiting location.
    Colocated,
}

/// Recourse strategy for evaluation and exact search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
pub enum StrategyArg {
    #[value(name = "rinf")]
    #[serde(rename = "rinf")]
    RInf,
    #[value(name = "rq")]
    #[serde(rename = "rq")]
    Rq,
    #[value(name = "rq+")]
    #[serde(rename = "rq+")]
    RqPlus,
}

impl StrategyArg {
    pub fn to_core(self) -> Strategy {
        match self {
            StrategyArg::RInf => Strategy::RInf,
            StrategyArg::Rq => Strategy::RQ,
            StrategyArg::RqPlus => Strategy::RQPlus,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            StrategyArg::RInf => "rinf",
            StrategyArg::Rq => "rq",
            StrategyArg::RqPlus => "rq+",
        }
    }
}

/// Strategy driving the annealing search; `hybrid` optimizes under the
/// capacity-aware cost and reports under the direct-service cost.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
pub enum SearchStrategyArg {
    #[value(name = "rinf")]
    #[serde(rename = "rinf")]
    RInf,
    #[value(name = "rq")]
    #[serde(rename = "rq")]
    Rq,
    #[value(name = "rq+")]
    #[serde(rename = "rq+")]
    RqPlus,
    #[serde(rename = "hybrid")]
    Hybrid,
}

impl SearchStrategyArg {
    pub fn to_core(self) -> StrategyKind {
        match self {
            SearchStrategyArg::RInf => StrategyKind::RInf,
            SearchStrategyArg::Rq => StrategyKind::RQ,
            SearchStrategyArg::RqPlus => StrategyKind::RQPlus,
            SearchStrategyArg::Hybrid => StrategyKind::RQHybrid,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SearchStrategyArg::RInf => "rinf",
            SearchStrategyArg::Rq => "rq",
            SearchStrategyArg::RqPlus => "rq+",
            SearchStrategyArg::Hybrid => "hybrid",
        }
    }
}

/// Policy simulated by `simulate`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
pub enum PolicyArg {
    /// Non-anticipative baseline: idle at the depot, dispatch on reveal.
    Ws,
    #[value(name = "rinf")]
    #[serde(rename = "rinf")]
    RInf,
    #[value(name = "rq")]
    #[serde(rename = "rq")]
    Rq,
    #[value(name = "rq+")]
    #[serde(rename = "rq+")]
    RqPlus,
}

impl PolicyArg {
    pub fn recourse(self) -> Option<Strategy> {
        match self {
            PolicyArg::Ws => None,
            PolicyArg::RInf => Some(Strategy::RInf),
            PolicyArg::Rq => Some(Strategy::RQ),
            PolicyArg::RqPlus => Some(Strategy::RQPlus),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PolicyArg::Ws => "ws",
            PolicyArg::RInf => "rinf",
            PolicyArg::Rq => "rq",
            PolicyArg::RqPlus => "rq+",
        }
    }
}

/// When a direct trip to a revealed request may start.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GateArg {
    /// Leave for the request once its successor's reveal has passed.
    Successor,
    /// Leave as soon as the request itself is revealed.
    Own,
}

impl GateArg {
    pub fn to_core(self) -> DirectGate {
        match self {
            GateArg::Successor => DirectGate::SuccessorReveal,
            GateArg::Own => DirectGate::OwnReveal,
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct GenerateArgs {
    /// Number of customer locations.
    #[arg(long)]
    pub customers: usize,
    /// Waiting-location placement.
    #[arg(long, value_enum, default_value_t = ModeArg::Separated)]
    pub mode: ModeArg,
    /// Number of waiting locations (separated mode only).
    #[arg(long)]
    pub waiting: Option<usize>,
    /// Generation seed; instances with equal customer count and seed share
    /// their depot, customers, and requests across modes.
    #[arg(long)]
    pub seed: u64,
    /// Address pool file to draw locations from.
    #[arg(long)]
    pub pool: Option<PathBuf>,
    /// Generate a synthetic address pool instead of reading one.
    #[arg(long)]
    pub synthetic: bool,
    /// Synthetic pool size.
    #[arg(long, default_value_t = svrp_core::bench::DEFAULT_POOL_SIZE)]
    pub pool_size: usize,
    /// Synthetic pool seed.
    #[arg(long, default_value_t = 0)]
    pub pool_seed: u64,
    /// Write the address pool for reuse.
    #[arg(long)]
    pub save_pool: Option<PathBuf>,
    /// Number of vehicles.
    #[arg(long, default_value_t = 2)]
    pub vehicles: usize,
    /// Vehicle capacity: an integer or `unbounded`.
    #[arg(long, default_value = "unbounded")]
    pub capacity: String,
    /// Planning horizon in time units.
    #[arg(long, default_value_t = 480)]
    pub horizon: i64,
    /// Length of one reveal slot; must divide the horizon.
    #[arg(long, default_value_t = 5)]
    pub slot_length: i64,
    /// Service duration per request.
    #[arg(long, default_value_t = 5)]
    pub service: i64,
    /// Spread, in slots, of the two request-time peaks.
    #[arg(long, default_value_t = 8.0)]
    pub sigma: f64,
    /// Override the derived instance name.
    #[arg(long)]
    pub name: Option<String>,
    /// Output instance file.
    #[arg(long)]
    pub out: PathBuf,
    /// Manifest path (default `<out>.manifest.json`).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct EvaluateArgs {
    /// Instance file.
    #[arg(long)]
    pub instance: PathBuf,
    /// Solution file.
    #[arg(long)]
    pub solution: PathBuf,
    /// Strategy to evaluate under.
    #[arg(long, value_enum, default_value_t = StrategyArg::RqPlus)]
    pub strategy: StrategyArg,
    /// Scale the stored waits are expressed at (default: the file's).
    #[arg(long)]
    pub scale: Option<i64>,
    /// Undo the scale and report the original-units direct-service cost.
    #[arg(long)]
    pub true_cost: bool,
    /// Direct-trip departure gate.
    #[arg(long, value_enum, default_value_t = GateArg::Successor)]
    pub gate: GateArg,
    /// Baseline average; adds the gain column.
    #[arg(long)]
    pub baseline: Option<f64>,
    /// Manifest path (default: printed to stderr).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct SolveArgs {
    /// Instance file.
    #[arg(long)]
    pub instance: PathBuf,
    /// Strategy guiding the search.
    #[arg(long, value_enum, default_value_t = SearchStrategyArg::Hybrid)]
    pub strategy: SearchStrategyArg,
    /// Single-phase waiting-time multiple, in original time units.
    #[arg(long)]
    pub multiple: Option<i64>,
    /// Search phase `scale:multiple:fraction`; repeat coarse to fine.
    #[arg(long)]
    pub phase: Vec<String>,
    /// Wall-clock budget in seconds (0 emits the initial solution).
    #[arg(long)]
    pub time_limit: Option<f64>,
    /// Deterministic iteration budget.
    #[arg(long)]
    pub iters: Option<u64>,
    /// Search seed; restart `i` uses seed + i.
    #[arg(long)]
    pub seed: u64,
    /// Starting temperature.
    #[arg(long, default_value_t = svrp_core::search::DEFAULT_T_INIT)]
    pub t_init: f64,
    /// Temperature floor triggering a reheat.
    #[arg(long, default_value_t = svrp_core::search::DEFAULT_T_MIN)]
    pub t_min: f64,
    /// Cooling factor per iteration.
    #[arg(long, default_value_t = svrp_core::search::DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Direct-trip departure gate.
    #[arg(long, value_enum, default_value_t = GateArg::Successor)]
    pub gate: GateArg,
    /// Independent restarts run in parallel; the best result wins.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Baseline average; adds the gain column.
    #[arg(long)]
    pub baseline: Option<f64>,
    /// Output solution file.
    #[arg(long)]
    pub out: PathBuf,
    /// Run-log file (one line per iteration).
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// Manifest path (default `<out>.manifest.json`).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ExactArgs {
    /// Instance file.
    #[arg(long)]
    pub instance: PathBuf,
    /// Strategy to optimize.
    #[arg(long, value_enum, default_value_t = StrategyArg::RqPlus)]
    pub strategy: StrategyArg,
    /// Coarsening factor applied during enumeration.
    #[arg(long, default_value_t = 1)]
    pub scale: i64,
    /// Waiting-time multiple, in original time units.
    #[arg(long)]
    pub multiple: i64,
    /// Refuse to enumerate more candidates than this.
    #[arg(long, default_value_t = svrp_core::search::DEFAULT_EXACT_BUDGET)]
    pub budget: u64,
    /// Direct-trip departure gate.
    #[arg(long, value_enum, default_value_t = GateArg::Successor)]
    pub gate: GateArg,
    /// Baseline average; adds the gain column.
    #[arg(long)]
    pub baseline: Option<f64>,
    /// Optional output solution file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Manifest path (default `<out>.manifest.json`, stderr without --out).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct SimulateArgs {
    /// Instance file.
    #[arg(long)]
    pub instance: PathBuf,
    /// Policy to simulate.
    #[arg(long, value_enum)]
    pub policy: PolicyArg,
    /// Solution file (recourse policies only).
    #[arg(long)]
    pub solution: Option<PathBuf>,
    /// Number of sampled scenarios.
    #[arg(long)]
    pub samples: u64,
    /// Sampling seed.
    #[arg(long)]
    pub seed: u64,
    /// Worker threads; the estimate is identical for any thread count.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Cross-check the estimate against the closed form (four sigma).
    #[arg(long)]
    pub check: bool,
    /// Direct-trip departure gate.
    #[arg(long, value_enum, default_value_t = GateArg::Successor)]
    pub gate: GateArg,
    /// Manifest path (default: printed to stderr).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ProfileArgs {
    /// Cost table with header `approach,instance,cost`; `inf` marks a
    /// failed run.
    #[arg(long)]
    pub costs: PathBuf,
    /// Manifest path (default: printed to stderr).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate(args) => commands::generate(args),
        Command::Evaluate(args) => commands::evaluate(args),
        Command::Solve(args) => commands::solve(args),
        Command::Exact(args) => commands::exact(args),
        Command::Simulate(args) => commands::simulate(args),
        Command::Profile(args) => commands::profile(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.exit_code())
        }
    }
}

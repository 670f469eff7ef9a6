//! First-stage optimization: simulated annealing over the nine neighborhood
//! operators, optional phase schedules over coarser time grids, and an
//! exhaustive solver for tiny instances.
//!
//! The annealing loop cycles operators deterministically: an accepted move
//! resets to the first operator, a rejected one advances to the next. The
//! temperature cools by a fixed factor every iteration and resets when it
//! falls below the floor. Infeasible candidates are rejected outright; no
//! repair is attempted during the walk. Whatever grid the walk ran on, the
//! final result is re-expressed in original time units and re-evaluated
//! under the direct-service policy, which is the cost every caller reports.

mod exact;
mod ops;

pub use exact::{solve_exact, ExactError, ExactOutcome, DEFAULT_EXACT_BUDGET};
pub use ops::{initial_solution, neighbor, OPERATOR_COUNT};

use std::time::{Duration, Instant};

use crate::assign::EvalContext;
use crate::expect::{expected_cost, EvalError, StrategyKind};
use crate::model::{
    regrid_solution, rescale_solution, scale_instance, DirectGate, FirstStageSolution, Instance,
    Strategy, Time, ValidationError,
};
use crate::rng::SplitMix64;

/// Default starting temperature.
pub const DEFAULT_T_INIT: f64 = 2.0;
/// Default temperature floor triggering a reheat.
pub const DEFAULT_T_MIN: f64 = 1e-6;
/// Default cooling factor per iteration.
pub const DEFAULT_ALPHA: f64 = 0.95;

/// One segment of a search schedule: the time grid to optimize on and the
/// share of the total budget to spend there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase {
    /// Coarsening factor applied to the instance.
    pub scale: Time,
    /// Waiting-time grid step, in original time units; must be divisible by
    /// `scale`.
    pub multiple: Time,
    /// Share of the total budget (time and iterations) spent in this phase.
    pub fraction: f64,
}

/// Parameters of an annealing run.
#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub t_init: f64,
    pub t_min: f64,
    /// Cooling factor, strictly between 0 and 1.
    pub alpha: f64,
    /// Wall-clock budget in seconds. `f64::INFINITY` disables the clock;
    /// zero stops before the first iteration.
    pub time_limit: f64,
    /// Optional deterministic iteration budget shared across phases.
    /// Searches meant to be reproducible should set it and leave the clock
    /// unlimited.
    pub max_iters: Option<u64>,
    pub strategy: StrategyKind,
    /// Reveal-time gate used by the direct-service policy.
    pub gate: DirectGate,
    /// Phases in coarse-to-fine order; fractions must sum to one.
    pub phases: Vec<Phase>,
    pub seed: u64,
}

impl SearchConfig {
    /// A single-grid configuration with the default annealing constants.
    pub fn single_phase(
        strategy: StrategyKind,
        multiple: Time,
        time_limit: f64,
        max_iters: Option<u64>,
        seed: u64,
    ) -> SearchConfig {
        SearchConfig {
            t_init: DEFAULT_T_INIT,
            t_min: DEFAULT_T_MIN,
            alpha: DEFAULT_ALPHA,
            time_limit,
            max_iters,
            strategy,
            gate: DirectGate::default(),
            phases: vec![Phase { scale: 1, multiple, fraction: 1.0 }],
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        if !(self.t_init > 0.0) || !self.t_init.is_finite() {
            return Err(ValidationError::new(format!("starting temperature must be positive, got {}", self.t_init)));
        }
        if !(self.t_min > 0.0) {
            return Err(ValidationError::new(format!("temperature floor must be positive, got {}", self.t_min)));
        }
        if self.t_min >= self.t_init {
            return Err(ValidationError::new(format!(
                "temperature floor {} must be below the starting temperature {}",
                self.t_min, self.t_init
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(ValidationError::new(format!("cooling factor must lie in (0, 1), got {}", self.alpha)));
        }
        if self.time_limit.is_nan() || self.time_limit < 0.0 {
            return Err(ValidationError::new(format!("time limit must be nonnegative, got {}", self.time_limit)));
        }
        if self.phases.is_empty() {
            return Err(ValidationError::new("a search needs at least one phase"));
        }
        let mut total = 0.0;
        for (i, phase) in self.phases.iter().enumerate() {
            if phase.scale < 1 {
                return Err(ValidationError::new(format!("phase {i}: scale must be at least 1, got {}", phase.scale)));
            }
            if phase.multiple < 1 {
                return Err(ValidationError::new(format!(
                    "phase {i}: waiting multiple must be at least 1, got {}",
                    phase.multiple
                )));
            }
            if phase.multiple % phase.scale != 0 {
                return Err(ValidationError::new(format!(
                    "phase {i}: waiting multiple {} is not divisible by scale {}",
                    phase.multiple, phase.scale
                )));
            }
            if !(phase.fraction > 0.0) || !phase.fraction.is_finite() {
                return Err(ValidationError::new(format!(
                    "phase {i}: budget fraction must be positive, got {}",
                    phase.fraction
                )));
            }
            total += phase.fraction;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(ValidationError::new(format!("phase fractions must sum to 1, got {total}")));
        }
        Ok(())
    }
}

/// One line of the run log, written every iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct LogLine {
    pub iteration: u64,
    /// Operator tried this iteration (1-based).
    pub op: u8,
    pub accepted: bool,
    /// Cost of the walk's current solution after this iteration.
    pub current_cost: f64,
    pub best_cost: f64,
    /// Temperature used for this iteration's acceptance decision.
    pub temperature: f64,
}

/// Header naming the comma-separated fields of [`LogLine`]'s display form.
pub const LOG_HEADER: &str = "iteration,op,accepted,current,best,temperature";

impl std::fmt::Display for LogLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{},{},{},{},{},{}",
            self.iteration, self.op, self.accepted, self.current_cost, self.best_cost, self.temperature
        )
    }
}

/// Receiver for run-log lines and free-form progress notes.
pub trait SearchLog {
    fn record(&mut self, line: &LogLine);
    fn note(&mut self, message: &str);
}

/// Discards everything.
pub struct NoLog;

impl SearchLog for NoLog {
    fn record(&mut self, _: &LogLine) {}
    fn note(&mut self, _: &str) {}
}

/// Keeps everything in memory, for tests and audits.
#[derive(Debug, Default)]
pub struct MemoryLog {
    pub lines: Vec<LogLine>,
    pub notes: Vec<String>,
}

impl SearchLog for MemoryLog {
    fn record(&mut self, line: &LogLine) {
        self.lines.push(line.clone());
    }

    fn note(&mut self, message: &str) {
        self.notes.push(message.to_string());
    }
}

/// Outcome of a search run.
#[derive(Debug, Clone)]
pub struct SearchResult {
    /// Best solution found, expressed in original time units.
    pub solution: FirstStageSolution,
    /// Expected cost of `solution` on the original instance under the
    /// direct-service policy: the number every run reports.
    pub report_cost: f64,
    /// Best expected cost under the evaluation strategy on the last grid
    /// searched (scale [`SearchResult::search_scale`]).
    pub search_cost: f64,
    pub search_scale: Time,
    pub iterations: u64,
}

/// Probability of accepting a candidate with cost `candidate` from a current
/// cost `current` at the given temperature. Improving or equal candidates
/// (including zero-cost ones) are accepted with probability one; otherwise
/// the relative worsening `1 - current/candidate` is damped by the
/// temperature.
pub fn acceptance_probability(current: f64, candidate: f64, temperature: f64) -> f64 {
    if candidate <= current {
        return 1.0;
    }
    (-(1.0 - current / candidate) / temperature).exp()
}

/// Simulated annealing on a single grid: the first (typically only) phase of
/// `config` fixes scale and waiting multiple, and the entire budget is spent
/// there. See [`scheduled_search`] for multi-phase runs.
pub fn local_search(
    instance: &Instance,
    config: &SearchConfig,
    rng: &mut SplitMix64,
    log: &mut dyn SearchLog,
) -> Result<SearchResult, EvalError> {
    config.validate().map_err(|e| EvalError::new(e.to_string()))?;
    let phase = Phase { fraction: 1.0, ..config.phases[0] };
    run_phases(instance, config, &[phase], rng, log)
}

/// Runs the phases of `config` in order, carrying the best solution from one
/// grid to the next. The incumbent is re-expressed on each new grid; if that
/// snap breaks feasibility the phase restarts from a fresh random solution
/// (noted in the run log). The final result is always reported at scale 1
/// under the direct-service policy.
pub fn scheduled_search(
    instance: &Instance,
    config: &SearchConfig,
    rng: &mut SplitMix64,
    log: &mut dyn SearchLog,
) -> Result<SearchResult, EvalError> {
    config.validate().map_err(|e| EvalError::new(e.to_string()))?;
    run_phases(instance, config, &config.phases, rng, log)
}

fn run_phases(
    instance: &Instance,
    config: &SearchConfig,
    phases: &[Phase],
    rng: &mut SplitMix64,
    log: &mut dyn SearchLog,
) -> Result<SearchResult, EvalError> {
    let start = Instant::now();
    let mut carried: Option<(FirstStageSolution, Time, Time)> = None;
    let mut iterations = 0u64;
    let mut last = None;
    let mut cum_fraction = 0.0;
    for (idx, phase) in phases.iter().enumerate() {
        cum_fraction += phase.fraction;
        let deadline = cumulative_deadline(start, config.time_limit, cum_fraction);
        let iter_cap = config.max_iters.map(|m| {
            if idx + 1 == phases.len() { m } else { (m as f64 * cum_fraction).round() as u64 }
        });
        let scaled_storage;
        let grid_instance = if phase.scale == 1 {
            instance
        } else {
            scaled_storage = scale_instance(instance, phase.scale);
            &scaled_storage
        };
        let step = phase.multiple / phase.scale;
        log.note(&format!("phase {idx}: scale {}, waiting multiple {}", phase.scale, phase.multiple));
        let start_sol = match &carried {
            None => initial_solution(grid_instance, rng, step),
            Some((best, from_scale, _)) => {
                let regridded = regrid_solution(best, *from_scale, phase.scale, phase.multiple);
                if regridded.validate(grid_instance).is_ok() {
                    regridded
                } else {
                    log.note(&format!(
                        "phase {idx}: regridded incumbent is infeasible, starting from a fresh initial solution"
                    ));
                    initial_solution(grid_instance, rng, step)
                }
            }
        };
        let (best, best_cost) =
            anneal(grid_instance, step, start_sol, config, rng, log, deadline, iter_cap, &mut iterations)?;
        carried = Some((best, phase.scale, phase.multiple));
        last = Some(best_cost);
    }
    let (best, last_scale, last_multiple) = carried.expect("a validated config has at least one phase");
    let mut reported = rescale_solution(&best, last_scale);
    if reported.validate(instance).is_err() {
        log.note("rescaled best exceeds the horizon; trimming waiting times to fit");
        reported = trim_to_horizon(instance, reported, last_multiple);
    }
    let report_cost = strategy_cost(instance, &reported, Strategy::RQPlus, config.gate)?;
    Ok(SearchResult {
        solution: reported,
        report_cost,
        search_cost: last.unwrap(),
        search_scale: last_scale,
        iterations,
    })
}

fn cumulative_deadline(start: Instant, time_limit: f64, cum_fraction: f64) -> Option<Instant> {
    let seconds = time_limit * cum_fraction.min(1.0);
    // Anything beyond ~30 years is as good as unlimited and would overflow
    // the duration conversion.
    if seconds.is_finite() && seconds < 1e9 {
        Some(start + Duration::from_secs_f64(seconds))
    } else {
        None
    }
}

/// The annealing walk itself, on one grid, against cumulative budgets.
#[allow(clippy::too_many_arguments)]
fn anneal(
    instance: &Instance,
    step: Time,
    start_sol: FirstStageSolution,
    config: &SearchConfig,
    rng: &mut SplitMix64,
    log: &mut dyn SearchLog,
    deadline: Option<Instant>,
    iter_cap: Option<u64>,
    iterations: &mut u64,
) -> Result<(FirstStageSolution, f64), EvalError> {
    let strategy = config.strategy.evaluation();
    let mut current = start_sol;
    let mut current_cost = strategy_cost(instance, &current, strategy, config.gate)?;
    let mut best = current.clone();
    let mut best_cost = current_cost;
    let mut temperature = config.t_init;
    let mut op: u8 = 1;
    loop {
        if iter_cap.is_some_and(|cap| *iterations >= cap) {
            break;
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            break;
        }
        *iterations += 1;
        let mut accepted = false;
        if let Some(candidate) = neighbor(op, &current, step, rng) {
            // Candidates that break feasibility, or fall outside the
            // evaluation strategy's domain, are rejected outright.
            if let Ok(candidate_cost) = strategy_cost(instance, &candidate, strategy, config.gate) {
                let probability = acceptance_probability(current_cost, candidate_cost, temperature);
                if probability >= 1.0 || rng.next_f64() < probability {
                    accepted = true;
                    current = candidate;
                    current_cost = candidate_cost;
                    if current_cost < best_cost {
                        best = current.clone();
                        best_cost = current_cost;
                    }
                }
            }
        }
        log.record(&LogLine {
            iteration: *iterations,
            op,
            accepted,
            current_cost,
            best_cost,
            temperature,
        });
        op = if accepted { 1 } else { op % OPERATOR_COUNT + 1 };
        temperature *= config.alpha;
        if temperature < config.t_min {
            temperature = config.t_init;
        }
    }
    Ok((best, best_cost))
}

/// Expected cost of `solution` under `strategy`, or an error when the
/// solution is invalid or outside the strategy's domain.
fn strategy_cost(
    instance: &Instance,
    solution: &FirstStageSolution,
    strategy: Strategy,
    gate: DirectGate,
) -> Result<f64, EvalError> {
    let ctx = EvalContext::new(instance, solution).map_err(|e| EvalError::new(e.to_string()))?;
    Ok(expected_cost(&ctx, strategy, gate)?.expected_rejected)
}

/// Shrinks waiting times (whole multiples at a time, dropping vertices that
/// reach zero) from the tail of each over-long route until every route fits
/// the horizon. Only needed when a coarse grid does not divide the horizon
/// evenly, so the scaled-up solution can overshoot by a few time units.
/// Deterministic repair after undoing a coarsening that does not divide the
/// instance's travel times: shortens waits (and drops tail vertices) until
/// every route fits the horizon again.
pub fn trim_to_horizon(
    instance: &Instance,
    mut sol: FirstStageSolution,
    multiple: Time,
) -> FirstStageSolution {
    for k in 0..sol.routes.len() {
        while !sol.routes[k].is_empty() && sol.route_duration(instance, k) > instance.horizon {
            let w = *sol.routes[k].last().unwrap();
            if sol.waits[w] > multiple {
                sol.waits[w] -= multiple;
            } else {
                sol.routes[k].pop();
                sol.waits[w] = 0;
            }
        }
    }
    sol
}

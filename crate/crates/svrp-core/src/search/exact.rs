//! Exhaustive enumeration of first-stage solutions on a waiting-time grid.
//!
//! Depth-first search over which waiting vertices to visit, in which route
//! and order, and how long to wait at each (whole multiples of the grid
//! step). Route labels are interchangeable, so the enumeration only builds
//! canonical solutions: nonempty routes come first, ordered by their
//! smallest vertex id. Every feasible canonical solution is evaluated once;
//! the first one reaching the minimum expected cost wins.

use crate::model::{DirectGate, FirstStageSolution, Instance, Strategy, Time, VertexId, DEPOT};

/// Candidate-evaluation budget matching a five-vertex instance on a
/// one-hour waiting grid.
pub const DEFAULT_EXACT_BUDGET: u64 = 50_000_000;

/// Output of [`solve_exact`].
#[derive(Debug, Clone)]
pub struct ExactOutcome {
    pub solution: FirstStageSolution,
    pub cost: f64,
    /// Candidate solutions actually evaluated (after pruning).
    pub explored: u64,
}

/// The search space is too large to enumerate within the budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactError {
    /// Upper bound on the number of candidate solutions.
    pub size: u128,
    pub budget: u64,
}

impl std::fmt::Display for ExactError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "exhaustive search would evaluate up to {} candidate solutions, over the budget of {}",
            self.size, self.budget
        )
    }
}

impl std::error::Error for ExactError {}

/// Number of placements: for each subset of the `m` waiting vertices, every
/// ordering into `routes` labeled sequences, every waiting time from a grid
/// of `grid` points per vertex. Saturates instead of overflowing.
fn search_space_size(m: usize, routes: usize, grid: u128) -> u128 {
    let mut total: u128 = 0;
    for j in 0..=m {
        let mut term: u128 = 1;
        for i in 0..j {
            term = term.saturating_mul((m - i) as u128);
        }
        term = term.saturating_mul(binomial(j + routes - 1, routes - 1));
        for _ in 0..j {
            term = term.saturating_mul(grid);
        }
        total = total.saturating_add(term);
    }
    total
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut result: u128 = 1;
    for i in 1..=k {
        // Exact at every step: i consecutive integers divide by i!.
        result = result.saturating_mul((n - k + i) as u128) / i as u128;
    }
    result
}

/// Finds a minimum-expected-cost first-stage solution by exhaustive
/// enumeration, with waiting times restricted to whole multiples of
/// `multiple`. Refuses to start when the placement count exceeds `budget`.
/// Candidates outside the strategy's domain (the load-blind policy on a
/// route that could overfill the vehicle) are skipped; the all-empty
/// solution is always in the space, so a minimizer always exists.
pub fn solve_exact(
    instance: &Instance,
    strategy: Strategy,
    gate: DirectGate,
    multiple: Time,
    budget: u64,
) -> Result<ExactOutcome, ExactError> {
    assert!(multiple >= 1, "waiting-time step must be positive");
    let grid = instance.horizon / multiple;
    let size = search_space_size(instance.waiting, instance.vehicles, grid as u128);
    if size > budget as u128 {
        return Err(ExactError { size, budget });
    }
    let mut enumerator = Enumerator {
        instance,
        strategy,
        gate,
        multiple,
        grid,
        sol: FirstStageSolution::empty(instance),
        best: None,
        explored: 0,
    };
    enumerator.explore(0, 0);
    let (cost, solution) = enumerator.best.expect("the empty solution always evaluates");
    Ok(ExactOutcome { solution, cost, explored: enumerator.explored })
}

struct Enumerator<'a> {
    instance: &'a Instance,
    strategy: Strategy,
    gate: DirectGate,
    multiple: Time,
    grid: Time,
    sol: FirstStageSolution,
    best: Option<(f64, FirstStageSolution)>,
    explored: u64,
}

impl Enumerator<'_> {
    fn evaluate(&mut self) {
        self.explored += 1;
        if let Ok(cost) = super::strategy_cost(self.instance, &self.sol, self.strategy, self.gate) {
            if self.best.as_ref().map_or(true, |(b, _)| cost < *b) {
                self.best = Some((cost, self.sol.clone()));
            }
        }
    }

    /// Routes below `k` are complete and canonical; routes from `k` on are
    /// empty. Evaluates that state, then tries every way to fill route `k`
    /// with vertices above `floor` (the previous route's minimum, which
    /// canonical ordering forces every later vertex to exceed).
    fn explore(&mut self, k: usize, floor: VertexId) {
        self.evaluate();
        if k == self.sol.routes.len() {
            return;
        }
        self.extend(k, floor, DEPOT, 0, VertexId::MAX);
    }

    /// Appends one more (vertex, waiting time) to the partial route `k` in
    /// all feasible ways. `used_time` is the route's travel so far plus its
    /// waiting times, excluding the return leg.
    fn extend(&mut self, k: usize, floor: VertexId, last: VertexId, used_time: Time, route_min: VertexId) {
        for w in (floor + 1)..=self.instance.waiting {
            if self.sol.waits[w] != 0 {
                continue;
            }
            let leg_in = self.instance.travel.at(last, w);
            let leg_back = self.instance.travel.at(w, DEPOT);
            for i in 1..=self.grid {
                let tau = i * self.multiple;
                if used_time + leg_in + tau + leg_back > self.instance.horizon {
                    break;
                }
                self.sol.routes[k].push(w);
                self.sol.waits[w] = tau;
                let new_min = route_min.min(w);
                self.explore(k + 1, new_min);
                self.extend(k, floor, w, used_time + leg_in + tau, new_min);
                self.sol.routes[k].pop();
                self.sol.waits[w] = 0;
            }
        }
    }
}

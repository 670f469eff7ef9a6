//! Closed-form evaluation of the expected number of rejected requests.
//!
//! For a fixed first-stage solution, whether a request ends up accepted is a
//! random event driven by which requests reveal. Rather than enumerating the
//! exponentially many scenarios, each policy admits a dynamic program over
//! per-request probability tables of "when does the vehicle get free again,
//! and carrying which load". Filling those tables in request order yields
//! every request's exact acceptance probability, hence the exact expected
//! cost, in polynomial time. The recursions mirror the online executor in
//! `simulate` decision for decision, so the exhaustive oracle adjudicates
//! both.

mod rinf;
mod rq;
mod rqplus;

pub use rq::bertsimas_marginals;

use crate::assign::EvalContext;
use crate::model::{Capacity, Demand, DirectGate, Strategy, Time};

/// What a search run optimizes and reports.
///
/// The first three pick one recourse policy for both roles. `RQHybrid`
/// optimizes under the cheaper load-aware evaluation and reports the final
/// solution under the direct-service one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyKind {
    RInf,
    RQ,
    RQPlus,
    RQHybrid,
}

impl StrategyKind {
    /// Strategy used to score candidates during optimization.
    pub fn evaluation(self) -> Strategy {
        match self {
            StrategyKind::RInf => Strategy::RInf,
            StrategyKind::RQ | StrategyKind::RQHybrid => Strategy::RQ,
            StrategyKind::RQPlus => Strategy::RQPlus,
        }
    }
}

impl std::fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StrategyKind::RInf => write!(f, "rinf"),
            StrategyKind::RQ => write!(f, "rq"),
            StrategyKind::RQPlus => write!(f, "rq+"),
            StrategyKind::RQHybrid => write!(f, "hybrid"),
        }
    }
}

impl std::str::FromStr for StrategyKind {
    type Err = crate::model::ValidationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rinf" | "r-inf" => Ok(StrategyKind::RInf),
            "rq" => Ok(StrategyKind::RQ),
            "rq+" | "rqplus" | "rq-plus" => Ok(StrategyKind::RQPlus),
            "hybrid" | "rq-hybrid" => Ok(StrategyKind::RQHybrid),
            _ => Err(crate::model::ValidationError::new(format!(
                "unknown strategy kind '{s}' (expected rinf, rq, rq+ or hybrid)"
            ))),
        }
    }
}

/// Result of a closed-form evaluation.
#[derive(Debug, Clone)]
pub struct CostReport {
    /// Expected number of rejected requests.
    pub expected_rejected: f64,
    /// Per-request acceptance probability, indexed like `instance.requests()`.
    pub accept_prob: Vec<f64>,
    /// Table cells written during the evaluation; a machine-independent
    /// measure of the work done.
    pub cells: u64,
}

/// An evaluation was requested with an inconsistent configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalError {
    message: String,
}

impl EvalError {
    pub fn new(message: impl Into<String>) -> Self {
        EvalError { message: message.into() }
    }
}

impl std::fmt::Display for EvalError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for EvalError {}

/// Exact expected number of rejected requests under the given strategy.
///
/// Unassigned requests can never be accepted and contribute their full
/// probability. The load-blind strategy is only meaningful when capacity
/// cannot bind, so requesting it while some route's assigned demand exceeds
/// the vehicle capacity is rejected as a configuration error.
pub fn expected_cost(
    ctx: &EvalContext,
    strategy: Strategy,
    gate: DirectGate,
) -> Result<CostReport, EvalError> {
    if strategy == Strategy::RInf {
        if let Capacity::Finite(limit) = ctx.instance.capacity {
            for k in 0..ctx.instance.vehicles {
                let demand: Demand =
                    ctx.assignment.route_chain(k).iter().map(|&r| ctx.request(r).demand).sum();
                if demand > limit {
                    return Err(EvalError::new(format!(
                        "load-blind evaluation is invalid: route {k} may accumulate demand \
                         {demand} > capacity {limit}"
                    )));
                }
            }
        }
    }
    let mut tally = Tally::default();
    let accept_prob = match strategy {
        Strategy::RInf => rinf::accept_probs(ctx, &mut tally),
        Strategy::RQ => rq::accept_probs(ctx, None, &mut tally),
        Strategy::RQPlus => rqplus::accept_probs(ctx, gate, &mut tally),
    };
    let expected_rejected = ctx
        .instance
        .requests()
        .iter()
        .zip(&accept_prob)
        .map(|(req, &a)| req.prob - a)
        .sum();
    Ok(CostReport { expected_rejected, accept_prob, cells: tally.cells })
}

/// Work counter shared by the strategy fills.
#[derive(Debug, Default)]
pub(crate) struct Tally {
    pub cells: u64,
}

/// Dense probability table over (time, load), all mass initially zero.
/// Reads outside the time range return zero so shifted lookups need no
/// bounds arithmetic at the call site; writes must be in range.
#[derive(Debug, Clone)]
pub(crate) struct Grid {
    qdim: usize,
    data: Vec<f64>,
}

impl Grid {
    pub(crate) fn new(t_cap: usize, qdim: usize) -> Grid {
        assert!(qdim >= 1);
        Grid { qdim, data: vec![0.0; t_cap * qdim] }
    }

    pub(crate) fn t_cap(&self) -> usize {
        self.data.len() / self.qdim
    }

    pub(crate) fn at(&self, t: Time, q: usize) -> f64 {
        if t < 0 || t as usize >= self.t_cap() {
            0.0
        } else {
            self.data[t as usize * self.qdim + q]
        }
    }

    pub(crate) fn set(&mut self, t: Time, q: usize, value: f64) {
        debug_assert!((-1e-9..=1.0 + 1e-9).contains(&value), "probability out of range: {value}");
        self.data[t as usize * self.qdim + q] = value;
    }

    pub(crate) fn clear(&mut self) {
        self.data.fill(0.0);
    }

    pub(crate) fn total(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Marginal mass per load, summed over all times.
    pub(crate) fn per_load(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.qdim];
        for (i, &v) in self.data.iter().enumerate() {
            out[i % self.qdim] += v;
        }
        out
    }
}

/// True when a vehicle already carrying `load` units can take on `demand`
/// more.
pub(crate) fn fits(capacity: Capacity, load: usize, demand: Demand) -> bool {
    capacity.admits(load as Demand + demand)
}

/// Per-load cut-point pooling: availability mass at or before `cut` waits
/// there until `cut` (the window opening or the reveal time), later mass
/// passes through as-is; everything is scaled by `weight`.
pub(crate) fn pool_below(f: &Grid, out: &mut Grid, weight: f64, cut: Time, qdim: usize) {
    assert!((cut as usize) < out.t_cap(), "cut point past the table end would drop mass");
    let mut pooled = vec![0.0; qdim];
    for t in 0..out.t_cap() as Time {
        for q in 0..qdim {
            if t < cut {
                pooled[q] += f.at(t, q);
                out.set(t, q, 0.0);
            } else if t == cut {
                out.set(t, q, weight * (pooled[q] + f.at(t, q)));
            } else {
                out.set(t, q, weight * f.at(t, q));
            }
        }
    }
}

/// Number of distinct load values a vehicle on route `k` can ever carry.
pub(crate) fn route_qdim(ctx: &EvalContext, k: usize) -> usize {
    let sum: Demand = ctx.assignment.route_chain(k).iter().map(|&r| ctx.request(r).demand).sum();
    let reachable = match ctx.instance.capacity {
        Capacity::Finite(q) => sum.min(q),
        Capacity::Unbounded => sum,
    };
    reachable as usize + 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        Capacity, FirstStageSolution, Instance, PotentialRequest, Strategy, TravelMatrix,
    };

    fn request(
        customer: usize,
        reveal: Time,
        latest: Time,
        service: Time,
        demand: Demand,
        prob: f64,
    ) -> PotentialRequest {
        PotentialRequest {
            customer,
            reveal,
            demand,
            service,
            earliest: reveal,
            latest,
            prob,
        }
    }

    fn two_request_instance(capacity: Capacity) -> Instance {
        let travel = TravelMatrix::new(
            4,
            vec![
                0, 2, 5, 5, //
                2, 0, 3, 4, //
                5, 3, 0, 1, //
                5, 4, 6, 0,
            ],
        )
        .unwrap();
        Instance::new(
            "pair",
            1,
            2,
            30,
            1,
            capacity,
            travel,
            vec![request(2, 2, 20, 1, 2, 0.5), request(3, 5, 20, 2, 2, 0.8)],
        )
        .unwrap()
    }

    #[test]
    fn no_probability_means_no_cost() {
        let mut inst = two_request_instance(Capacity::Unbounded);
        inst = Instance::new(
            "zero",
            inst.waiting,
            inst.customers,
            inst.horizon,
            inst.vehicles,
            inst.capacity,
            inst.travel.clone(),
            inst.requests().iter().map(|r| PotentialRequest { prob: 0.0, ..*r }).collect(),
        )
        .unwrap();
        let sol = FirstStageSolution { routes: vec![vec![1]], waits: vec![0, 20] };
        let ctx = EvalContext::new(&inst, &sol).unwrap();
        for strategy in [Strategy::RInf, Strategy::RQ, Strategy::RQPlus] {
            let report = expected_cost(&ctx, strategy, DirectGate::default()).unwrap();
            assert_eq!(report.expected_rejected, 0.0);
        }
    }

    #[test]
    fn unassigned_requests_cost_their_probability() {
        let inst = two_request_instance(Capacity::Unbounded);
        let sol = FirstStageSolution::empty(&inst);
        let ctx = EvalContext::new(&inst, &sol).unwrap();
        for strategy in [Strategy::RInf, Strategy::RQ, Strategy::RQPlus] {
            let report = expected_cost(&ctx, strategy, DirectGate::default()).unwrap();
            assert!((report.expected_rejected - 1.3).abs() < 1e-12);
            assert_eq!(report.accept_prob, vec![0.0, 0.0]);
        }
    }

    #[test]
    fn load_blind_evaluation_needs_nonbinding_capacity() {
        let inst = two_request_instance(Capacity::Finite(3));
        let sol = FirstStageSolution { routes: vec![vec![1]], waits: vec![0, 20] };
        let ctx = EvalContext::new(&inst, &sol).unwrap();
        // Total assigned demand 4 exceeds capacity 3: configuration error.
        assert!(expected_cost(&ctx, Strategy::RInf, DirectGate::default()).is_err());
        // The capacity-aware strategies accept the same configuration.
        assert!(expected_cost(&ctx, Strategy::RQ, DirectGate::default()).is_ok());
        let loose = two_request_instance(Capacity::Finite(4));
        let ctx = EvalContext::new(&loose, &sol).unwrap();
        assert!(expected_cost(&ctx, Strategy::RInf, DirectGate::default()).is_ok());
    }

    #[test]
    fn acceptance_never_exceeds_request_probability() {
        let inst = two_request_instance(Capacity::Finite(2));
        let sol = FirstStageSolution { routes: vec![vec![1]], waits: vec![0, 20] };
        let ctx = EvalContext::new(&inst, &sol).unwrap();
        for strategy in [Strategy::RQ, Strategy::RQPlus] {
            let report = expected_cost(&ctx, strategy, DirectGate::default()).unwrap();
            for (req, &a) in inst.requests().iter().zip(&report.accept_prob) {
                assert!(a >= -1e-12 && a <= req.prob + 1e-12);
            }
            let ceiling: f64 = inst.requests().iter().map(|r| r.prob).sum();
            assert!(report.expected_rejected >= -1e-12);
            assert!(report.expected_rejected <= ceiling + 1e-12);
        }
    }

    #[test]
    fn relabeling_vehicles_does_not_change_the_cost() {
        let travel = TravelMatrix::from_fn(5, |i, j| ((2 * i + 3 * j) % 5 + 1) as Time).unwrap();
        let inst = Instance::new(
            "two-routes",
            2,
            2,
            30,
            2,
            Capacity::Finite(2),
            travel,
            vec![request(3, 2, 20, 1, 1, 0.5), request(4, 5, 20, 2, 1, 0.8)],
        )
        .unwrap();
        let a = FirstStageSolution { routes: vec![vec![1], vec![2]], waits: vec![0, 12, 15] };
        let b = FirstStageSolution { routes: vec![vec![2], vec![1]], waits: vec![0, 12, 15] };
        for strategy in [Strategy::RInf, Strategy::RQ, Strategy::RQPlus] {
            let ca = EvalContext::new(&inst, &a).unwrap();
            let cb = EvalContext::new(&inst, &b).unwrap();
            let ra = expected_cost(&ca, strategy, DirectGate::default()).unwrap();
            let rb = expected_cost(&cb, strategy, DirectGate::default()).unwrap();
            assert!((ra.expected_rejected - rb.expected_rejected).abs() <= 1e-12);
        }
    }
}

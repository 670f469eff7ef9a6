//! Exact online execution of the recourse policies on one scenario.
//!
//! Given a first-stage solution and one realization of the requests, this
//! module plays out the day decision by decision. Decisions happen at reveal
//! times; since the canonical request order never contradicts reveal order
//! and each decision only depends on the outcomes of earlier requests of the
//! same route, processing each route's requests in order reproduces the
//! chronological process exactly.
//!
//! # Common rules
//!
//! * A request bound to no waiting location is rejected the moment it
//!   appears.
//! * Vehicles follow the first-stage schedule between waiting locations:
//!   availability at each location starts at its scheduled arrival time.
//! * The policy tracks, per vehicle, the time `free` at which it can next act:
//!   - request absent: `free = max(free, reveal)` (the vehicle holds until the
//!     request's no-show is known);
//!   - request rejected: `free = max(free, t_min)` (the vehicle holds until
//!     the departure it was considering);
//!   - request served: `free` advances by the service excursion.
//!
//! # Per-strategy rules
//!
//! * `RInf` and `RQ` serve from the waiting location and return immediately;
//!   a present request is accepted iff `max(free, t_min) <= t_max`, and under
//!   `RQ` additionally iff the accumulated route load plus the demand fits the
//!   capacity. `RInf` ignores capacity by definition.
//! * `RQPlus` may keep the vehicle at the customer it just served. Bounds are
//!   re-derived from the vehicle's actual location `v`: departure at least
//!   `tmin_direct(r, v)` and at most `tmax_direct(r, v)` (which guarantees the
//!   next scheduled location, or the depot at the horizon, is reached in
//!   time traveling straight from the customer). After dealing with a request
//!   while away from the waiting location, the vehicle travels back exactly
//!   when the chosen gate reveal time is still in the future (nothing to stay
//!   out for); otherwise it stays put. Transitions between waiting locations
//!   are schedule-anchored: the vehicle reaches the next location at its
//!   scheduled arrival time, waiting en route if early.
//!
//! These bookkeeping rules are mirrored one-for-one by the closed forms in
//! `expect`; the exhaustive-oracle test certifies the match. Note two
//! deliberate consequences: a rejected request can advance `free` beyond the
//! physically necessary time (the hold models the vehicle committing to the
//! considered departure), and under `RQPlus` an extremely asymmetric travel
//! matrix can make a gated return trip arrive after the scheduled departure,
//! in which case the schedule anchor still governs the next transition.

use crate::assign::EvalContext;
use crate::model::{Demand, DirectGate, RequestIdx, Strategy, Time, VertexId, DEPOT};

/// Why a present request was turned down.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    /// Not bound to any waiting location.
    Unbound,
    /// The vehicle could not depart within the feasible window.
    Window,
    /// The demand would overflow the vehicle.
    Capacity,
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RejectReason::Unbound => write!(f, "unbound"),
            RejectReason::Window => write!(f, "window"),
            RejectReason::Capacity => write!(f, "capacity"),
        }
    }
}

/// What happened, for the event trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// Vehicle reaches a waiting location (scheduled).
    Arrive,
    /// Present request accepted (decision instant).
    Accept(RequestIdx),
    /// Present request rejected (decision instant).
    Reject(RequestIdx, RejectReason),
    /// Potential request turned out not to appear.
    Absent(RequestIdx),
    /// Service begins at the customer.
    ServeStart(RequestIdx),
    /// Service completes at the customer.
    ServeEnd(RequestIdx),
    /// Vehicle gets back to its waiting location.
    Return,
    /// Vehicle reaches the depot after its route.
    DepotReturn,
}

impl std::fmt::Display for EventKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EventKind::Arrive => write!(f, "arrive"),
            EventKind::Accept(r) => write!(f, "accept r{r}"),
            EventKind::Reject(r, why) => write!(f, "reject r{r} ({why})"),
            EventKind::Absent(r) => write!(f, "absent r{r}"),
            EventKind::ServeStart(r) => write!(f, "serve-start r{r}"),
            EventKind::ServeEnd(r) => write!(f, "serve-end r{r}"),
            EventKind::Return => write!(f, "return"),
            EventKind::DepotReturn => write!(f, "depot"),
        }
    }
}

/// One audit record: when, which vehicle, what, where, carrying how much.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceEvent {
    pub time: Time,
    pub vehicle: Option<usize>,
    pub kind: EventKind,
    pub vertex: Option<VertexId>,
    pub load: Demand,
}

impl std::fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "t={:<4} ", self.time)?;
        match self.vehicle {
            Some(k) => write!(f, "veh={k} ")?,
            None => write!(f, "veh=- ")?,
        }
        write!(f, "{:<18} ", self.kind.to_string())?;
        match self.vertex {
            Some(v) => write!(f, "at={v} ")?,
            None => write!(f, "at=- ")?,
        }
        write!(f, "load={}", self.load)
    }
}

/// Receives trace events during a run.
pub trait EventSink {
    fn record(&mut self, event: TraceEvent);
}

/// Discards all events (fast path).
pub struct NoTrace;

impl EventSink for NoTrace {
    #[inline]
    fn record(&mut self, _: TraceEvent) {}
}

impl EventSink for Vec<TraceEvent> {
    fn record(&mut self, event: TraceEvent) {
        self.push(event);
    }
}

/// Orders events chronologically, keeping the recording order on ties.
pub fn sort_trace(events: &mut [TraceEvent]) {
    events.sort_by_key(|e| e.time);
}

/// Result of one policy run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimOutcome {
    pub rejected: u64,
    pub accepted: u64,
    /// Per request: `None` if absent, otherwise whether it was accepted.
    pub decisions: Vec<Option<bool>>,
}

/// Runs `strategy` on one scenario, returning the outcome and feeding the
/// event trace to `sink`.
pub fn run_recourse(
    ctx: &EvalContext,
    strategy: Strategy,
    gate: DirectGate,
    scenario: &[bool],
    sink: &mut impl EventSink,
) -> SimOutcome {
    let mut decisions = vec![None; ctx.instance.requests().len()];
    let (accepted, rejected) = execute(ctx, strategy, gate, scenario, sink, Some(&mut decisions));
    SimOutcome { rejected, accepted, decisions }
}

/// Number of rejected requests on one scenario (no trace, no allocation).
pub fn rejected_count(ctx: &EvalContext, strategy: Strategy, gate: DirectGate, scenario: &[bool]) -> u64 {
    execute(ctx, strategy, gate, scenario, &mut NoTrace, None).1
}

fn execute(
    ctx: &EvalContext,
    strategy: Strategy,
    gate: DirectGate,
    scenario: &[bool],
    sink: &mut impl EventSink,
    mut decisions: Option<&mut Vec<Option<bool>>>,
) -> (u64, u64) {
    assert_eq!(
        scenario.len(),
        ctx.instance.requests().len(),
        "scenario length does not match the request count"
    );
    let travel = &ctx.instance.travel;
    let mut accepted = 0u64;
    let mut rejected = 0u64;
    let decide = |r: RequestIdx, ok: bool, decisions: &mut Option<&mut Vec<Option<bool>>>| {
        if let Some(d) = decisions {
            d[r] = Some(ok);
        }
    };

    for (r, req) in ctx.instance.requests().iter().enumerate() {
        if scenario[r] && ctx.assignment.get(r).is_none() {
            decide(r, false, &mut decisions);
            rejected += 1;
            sink.record(TraceEvent {
                time: req.reveal,
                vehicle: None,
                kind: EventKind::Reject(r, RejectReason::Unbound),
                vertex: Some(req.customer),
                load: 0,
            });
        }
    }

    for (k, route) in ctx.solution.routes.iter().enumerate() {
        let mut load: Demand = 0;
        let mut last_vertex = DEPOT;
        let mut last_free: Time = 1;
        let mut last_loc = DEPOT;
        for &w in route {
            let visit = ctx.schedule.visit(w).unwrap();
            sink.record(TraceEvent {
                time: visit.arrive,
                vehicle: Some(k),
                kind: EventKind::Arrive,
                vertex: Some(w),
                load,
            });
            // Availability is schedule-anchored at every waiting location.
            let mut free: Time = visit.arrive;
            let mut loc: VertexId = w;
            for &r in ctx.assignment.vertex_chain(w) {
                let req = ctx.request(r);
                let a = ctx.assignment.get(r).unwrap();
                debug_assert_eq!(a.route, k);
                // Reveal time gating the stay-out/return choice after r.
                let next_reveal = match gate {
                    DirectGate::SuccessorReveal => ctx
                        .assignment
                        .next_in_vertex(r)
                        .map(|n| ctx.request(n).reveal)
                        .unwrap_or(0),
                    DirectGate::OwnReveal => {
                        if ctx.assignment.next_in_vertex(r).is_some() {
                            req.reveal
                        } else {
                            0
                        }
                    }
                };
                if !scenario[r] {
                    sink.record(TraceEvent {
                        time: req.reveal,
                        vehicle: Some(k),
                        kind: EventKind::Absent(r),
                        vertex: Some(loc),
                        load,
                    });
                    let held = free.max(req.reveal);
                    (free, loc) = settle_in_place(ctx, sink, k, w, loc, held, next_reveal, load);
                    continue;
                }
                match strategy {
                    Strategy::RInf | Strategy::RQ => {
                        let dep = free.max(a.t_min);
                        let fits = strategy == Strategy::RInf
                            || ctx.instance.capacity.admits(load + req.demand);
                        if dep <= a.t_max && fits {
                            decide(r, true, &mut decisions);
                            accepted += 1;
                            load += req.demand;
                            let start = dep + travel.at(w, req.customer);
                            assert!(
                                start >= req.earliest && start <= req.latest,
                                "vehicle {k} would serve request {r} at {start}, outside [{}, {}]",
                                req.earliest,
                                req.latest
                            );
                            record_service(sink, k, r, req, start, load);
                            free = dep + a.round_trip;
                            sink.record(TraceEvent {
                                time: free,
                                vehicle: Some(k),
                                kind: EventKind::Return,
                                vertex: Some(w),
                                load,
                            });
                        } else {
                            decide(r, false, &mut decisions);
                            rejected += 1;
                            let why =
                                if dep > a.t_max { RejectReason::Window } else { RejectReason::Capacity };
                            sink.record(TraceEvent {
                                time: req.reveal,
                                vehicle: Some(k),
                                kind: EventKind::Reject(r, why),
                                vertex: Some(loc),
                                load,
                            });
                            free = dep;
                        }
                    }
                    Strategy::RQPlus => {
                        let t_min = ctx.tmin_direct(r, loc);
                        let t_max = ctx.tmax_direct(r, loc);
                        let dep = free.max(t_min);
                        if dep <= t_max && ctx.instance.capacity.admits(load + req.demand) {
                            decide(r, true, &mut decisions);
                            accepted += 1;
                            load += req.demand;
                            let start = dep + travel.at(loc, req.customer);
                            assert!(
                                start >= req.earliest && start <= req.latest,
                                "vehicle {k} would serve request {r} at {start}, outside [{}, {}]",
                                req.earliest,
                                req.latest
                            );
                            record_service(sink, k, r, req, start, load);
                            let completion = start + req.service;
                            if completion < next_reveal {
                                // Nothing revealed to stay out for: go back.
                                free = completion + travel.at(req.customer, w);
                                loc = w;
                                sink.record(TraceEvent {
                                    time: free,
                                    vehicle: Some(k),
                                    kind: EventKind::Return,
                                    vertex: Some(w),
                                    load,
                                });
                            } else {
                                free = completion;
                                loc = req.customer;
                            }
                        } else {
                            decide(r, false, &mut decisions);
                            rejected += 1;
                            let why =
                                if dep > t_max { RejectReason::Window } else { RejectReason::Capacity };
                            sink.record(TraceEvent {
                                time: req.reveal,
                                vehicle: Some(k),
                                kind: EventKind::Reject(r, why),
                                vertex: Some(loc),
                                load,
                            });
                            (free, loc) = settle_in_place(ctx, sink, k, w, loc, dep, next_reveal, load);
                        }
                    }
                }
            }
            last_vertex = w;
            last_free = free;
            last_loc = loc;
        }
        if !route.is_empty() {
            // Trace decoration: the final leg home. From the waiting location
            // the vehicle sits out its planned stay; from a customer it heads
            // off as soon as it is done.
            let scheduled = ctx.schedule.visit(last_vertex).unwrap().depart;
            let depart = if last_loc == last_vertex { last_free.max(scheduled) } else { last_free };
            let back = depart + travel.at(last_loc, DEPOT);
            sink.record(TraceEvent {
                time: back,
                vehicle: Some(k),
                kind: EventKind::DepotReturn,
                vertex: Some(DEPOT),
                load,
            });
        }
    }
    (accepted, rejected)
}

/// After a rejection or a no-show at `held`, the vehicle either stays where
/// it is, or (when away from the waiting location and the gate reveal is
/// still in the future) travels back to the waiting location.
fn settle_in_place(
    ctx: &EvalContext,
    sink: &mut impl EventSink,
    k: usize,
    w: VertexId,
    loc: VertexId,
    held: Time,
    next_reveal: Time,
    load: Demand,
) -> (Time, VertexId) {
    if loc != w && held < next_reveal {
        let back = held + ctx.instance.travel.at(loc, w);
        sink.record(TraceEvent {
            time: back,
            vehicle: Some(k),
            kind: EventKind::Return,
            vertex: Some(w),
            load,
        });
        (back, w)
    } else {
        (held, loc)
    }
}

fn record_service(
    sink: &mut impl EventSink,
    k: usize,
    r: RequestIdx,
    req: &crate::model::PotentialRequest,
    start: Time,
    load: Demand,
) {
    sink.record(TraceEvent {
        time: req.reveal,
        vehicle: Some(k),
        kind: EventKind::Accept(r),
        vertex: Some(req.customer),
        load,
    });
    sink.record(TraceEvent {
        time: start,
        vehicle: Some(k),
        kind: EventKind::ServeStart(r),
        vertex: Some(req.customer),
        load,
    });
    sink.record(TraceEvent {
        time: start + req.service,
        vehicle: Some(k),
        kind: EventKind::ServeEnd(r),
        vertex: Some(req.customer),
        load,
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Capacity, FirstStageSolution, Instance, PotentialRequest, TravelMatrix};

    /// Depot 0, waiting vertex 1, customers 2 and 3.
    /// d(0,1)=2, d(1,2)=d(2,1)=3, d(1,3)=d(3,1)=4, d(2,3)=1, d(3,2)=6, legs
    /// to/from depot for customers: 5.
    fn base_travel() -> TravelMatrix {
        let d = [
            [0, 2, 5, 5],
            [2, 0, 3, 4],
            [5, 3, 0, 1],
            [5, 4, 6, 0],
        ];
        TravelMatrix::new(4, d.iter().flatten().copied().collect()).unwrap()
    }

    fn request(customer: usize, reveal: i64, latest: i64, service: i64, demand: i64) -> PotentialRequest {
        PotentialRequest { customer, reveal, demand, service, earliest: reveal, latest, prob: 0.5 }
    }

    fn instance(capacity: Capacity, requests: Vec<PotentialRequest>) -> Instance {
        Instance::new("t", 1, 2, 30, 1, capacity, base_travel(), requests).unwrap()
    }

    fn solution() -> FirstStageSolution {
        // Arrive at vertex 1 at t=3, depart at t=23; duration 2+20+2=24 <= 30.
        FirstStageSolution { routes: vec![vec![1]], waits: vec![0, 20] }
    }

    fn long_instance(requests: Vec<PotentialRequest>) -> Instance {
        Instance::new("t", 1, 2, 40, 1, Capacity::Finite(3), base_travel(), requests).unwrap()
    }

    #[test]
    fn empty_scenario_rejects_nothing() {
        let inst = instance(Capacity::Unbounded, vec![request(2, 3, 12, 1, 1)]);
        let sol = solution();
        let ctx = EvalContext::new(&inst, &sol).unwrap();
        let mut trace = Vec::new();
        let out = run_recourse(&ctx, Strategy::RQ, DirectGate::default(), &[false], &mut trace);
        assert_eq!((out.rejected, out.accepted), (0, 0));
        assert_eq!(out.decisions, vec![None]);
        // Arrive, absent note, depot return.
        assert!(trace.iter().any(|e| matches!(e.kind, EventKind::Arrive)));
        assert!(trace.iter().any(|e| matches!(e.kind, EventKind::DepotReturn) && e.time == 25));
    }

    /// Hand-executed chain: three requests on one vertex, all present.
    ///
    /// r0 = (c2, reveal 3, latest 12, s 1, q 1): window [3, 9], trip 7.
    /// r1 = (c3, reveal 5, latest 20, s 2, q 1): window [5, 13], trip 10.
    /// r2 = (c2, reveal 12, latest 16, s 1, q 0): window [12, 13], trip 7.
    ///
    /// Uncapacitated: r0 departs 3, back 10; r1 departs 10, back 20;
    /// r2 would depart 20 > 13: rejected.
    ///
    /// Q=1: r0 departs 3, back 10; r1 load-rejected (hold to 10); r2 departs
    /// max(10, 12) = 12 <= 13 with zero demand: accepted.
    #[test]
    fn classic_chain_decisions() {
        let requests =
            vec![request(2, 3, 12, 1, 1), request(3, 5, 20, 2, 1), request(2, 12, 16, 1, 0)];
        let sol = solution();

        let free = instance(Capacity::Unbounded, requests.clone());
        let ctx = EvalContext::new(&free, &sol).unwrap();
        let a = |r: usize| {
            let a = ctx.assignment.get(r).unwrap();
            (a.t_min, a.t_max, a.round_trip)
        };
        assert_eq!(a(0), (3, 9, 7));
        assert_eq!(a(1), (5, 13, 10));
        assert_eq!(a(2), (12, 13, 7));
        let out =
            run_recourse(&ctx, Strategy::RInf, DirectGate::default(), &[true; 3], &mut NoTrace);
        assert_eq!(out.decisions, vec![Some(true), Some(true), Some(false)]);

        let tight = instance(Capacity::Finite(1), requests);
        let ctx = EvalContext::new(&tight, &sol).unwrap();
        let out = run_recourse(&ctx, Strategy::RQ, DirectGate::default(), &[true; 3], &mut NoTrace);
        assert_eq!(out.decisions, vec![Some(true), Some(false), Some(true)]);
        assert_eq!(out.rejected, 1);
    }

    /// Staying at the customer saves r1 when the return trip would not.
    ///
    /// r0 = (c2, reveal 3, latest 12, s 1): serve start 6, done 7 >= reveal(r1)
    /// so the vehicle stays at c2. r1 = (c3, reveal 5, latest 12): from c2 the
    /// departure window is [5, 11] and the vehicle leaves at 7; from the
    /// waiting vertex it could only leave at 10 > 12 - 4 = 8.
    #[test]
    fn direct_travel_beats_return_trip() {
        let requests = vec![request(2, 3, 12, 1, 1), request(3, 5, 12, 2, 1)];
        let inst = instance(Capacity::Finite(3), requests);
        let sol = solution();
        let ctx = EvalContext::new(&inst, &sol).unwrap();
        let rq = run_recourse(&ctx, Strategy::RQ, DirectGate::default(), &[true, true], &mut NoTrace);
        assert_eq!(rq.decisions, vec![Some(true), Some(false)]);
        let mut trace = Vec::new();
        let plus =
            run_recourse(&ctx, Strategy::RQPlus, DirectGate::default(), &[true, true], &mut trace);
        assert_eq!(plus.decisions, vec![Some(true), Some(true)]);
        // Serve r1 from c2: depart 7, start 7 + d(2,3) = 8, done 10.
        assert!(trace
            .iter()
            .any(|e| matches!(e.kind, EventKind::ServeStart(1)) && e.time == 8));
        // After r1 (last of the vertex) the vehicle stays out and goes home
        // from c3: 10 + d(3,0) = 15.
        assert!(trace
            .iter()
            .any(|e| matches!(e.kind, EventKind::DepotReturn) && e.time == 15));
    }

    /// Under the own-reveal gate the vehicle never travels back early, so r1
    /// is served from c2 as well; but when r0 is absent the vehicle stays at
    /// the waiting location and both gates agree.
    #[test]
    fn gate_variants_agree_when_no_service_happened() {
        let requests = vec![request(2, 3, 12, 1, 1), request(3, 5, 12, 2, 1)];
        let inst = instance(Capacity::Finite(3), requests);
        let sol = solution();
        let ctx = EvalContext::new(&inst, &sol).unwrap();
        for gate in [DirectGate::SuccessorReveal, DirectGate::OwnReveal] {
            let out = run_recourse(&ctx, Strategy::RQPlus, gate, &[false, true], &mut NoTrace);
            assert_eq!(out.decisions, vec![None, Some(true)], "gate {gate:?}");
        }
    }

    /// A return to the waiting location happens exactly when the next request
    /// is revealed later than the service completion.
    #[test]
    fn returns_are_gated_by_the_next_reveal() {
        // r1 reveals at 20: r0 completes at 7 < 20, so the vehicle goes
        // back to vertex 1 (arrives 7 + 3 = 10) and serves r1 from there.
        // Longer stay (depart 33) keeps r1's round trip bindable.
        let requests = vec![request(2, 3, 12, 1, 1), request(3, 20, 27, 2, 1)];
        let inst = long_instance(requests);
        let sol = FirstStageSolution { routes: vec![vec![1]], waits: vec![0, 30] };
        let ctx = EvalContext::new(&inst, &sol).unwrap();
        let mut trace = Vec::new();
        let out =
            run_recourse(&ctx, Strategy::RQPlus, DirectGate::default(), &[true, true], &mut trace);
        assert_eq!(out.decisions, vec![Some(true), Some(true)]);
        assert!(trace.iter().any(|e| matches!(e.kind, EventKind::Return) && e.time == 10));
        // r1 served from vertex 1: depart max(10, 20) = 20, start 24.
        assert!(trace
            .iter()
            .any(|e| matches!(e.kind, EventKind::ServeStart(1)) && e.time == 24));
    }

    #[test]
    fn unbound_requests_are_rejected_at_reveal() {
        // Window closed before the vehicle arrives: no binding exists.
        let inst = instance(Capacity::Unbounded, vec![request(2, 1, 2, 0, 0)]);
        let sol = solution();
        let ctx = EvalContext::new(&inst, &sol).unwrap();
        assert!(ctx.assignment.get(0).is_none());
        let mut trace = Vec::new();
        let out = run_recourse(&ctx, Strategy::RInf, DirectGate::default(), &[true], &mut trace);
        assert_eq!(out.rejected, 1);
        assert!(trace
            .iter()
            .any(|e| matches!(e.kind, EventKind::Reject(0, RejectReason::Unbound)) && e.time == 1));
    }
}

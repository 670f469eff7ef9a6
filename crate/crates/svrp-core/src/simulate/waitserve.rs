//! The myopic "wait and serve" baseline.
//!
//! No anticipation at all: every vehicle starts idle at the depot and reacts
//! to requests as they appear. An appearing request is accepted iff some
//! currently idle vehicle can start service inside the request's window and
//! still make it back to the depot by the end of the horizon with the demand
//! on board. Among capable vehicles the closest one is chosen, then the
//! least loaded, then the lowest index. After serving, the vehicle idles at
//! the customer location (it becomes idle the time unit after service
//! completes) and never repositions in advance.
//!
//! Requests revealed at the same time are handled in canonical order.
//! Commitments are firm: a vehicle mid-service or mid-travel is not diverted.

use crate::model::{Demand, Instance, Time, VertexId, DEPOT};
use crate::simulate::recourse::{EventKind, EventSink, NoTrace, RejectReason, SimOutcome, TraceEvent};

struct Vehicle {
    loc: VertexId,
    idle_from: Time,
    load: Demand,
}

/// Runs the baseline on one scenario, tracing events to `sink`.
pub fn run_wait_and_serve(instance: &Instance, scenario: &[bool], sink: &mut impl EventSink) -> SimOutcome {
    assert_eq!(scenario.len(), instance.requests().len());
    let mut vehicles: Vec<Vehicle> =
        (0..instance.vehicles).map(|_| Vehicle { loc: DEPOT, idle_from: 1, load: 0 }).collect();
    let mut decisions = vec![None; scenario.len()];
    let mut accepted = 0u64;
    let mut rejected = 0u64;
    for (r, req) in instance.requests().iter().enumerate() {
        if !scenario[r] {
            continue;
        }
        let mut best: Option<(Time, Demand, usize, Time)> = None;
        for (k, v) in vehicles.iter().enumerate() {
            if v.idle_from > req.reveal {
                continue;
            }
            let out = instance.travel.at(v.loc, req.customer);
            let start = (req.reveal + out).max(req.earliest);
            if start > req.latest {
                continue;
            }
            if start + req.service + instance.travel.at(req.customer, DEPOT) > instance.horizon {
                continue;
            }
            if !instance.capacity.admits(v.load + req.demand) {
                continue;
            }
            let key = (out, v.load, k, start);
            if best.map_or(true, |b| (key.0, key.1, key.2) < (b.0, b.1, b.2)) {
                best = Some(key);
            }
        }
        match best {
            Some((_, _, k, start)) => {
                decisions[r] = Some(true);
                accepted += 1;
                let v = &mut vehicles[k];
                v.load += req.demand;
                v.loc = req.customer;
                v.idle_from = start + req.service + 1;
                sink.record(TraceEvent {
                    time: req.reveal,
                    vehicle: Some(k),
                    kind: EventKind::Accept(r),
                    vertex: Some(req.customer),
                    load: v.load,
                });
                sink.record(TraceEvent {
                    time: start,
                    vehicle: Some(k),
                    kind: EventKind::ServeStart(r),
                    vertex: Some(req.customer),
                    load: v.load,
                });
                sink.record(TraceEvent {
                    time: start + req.service,
                    vehicle: Some(k),
                    kind: EventKind::ServeEnd(r),
                    vertex: Some(req.customer),
                    load: v.load,
                });
            }
            None => {
                decisions[r] = Some(false);
                rejected += 1;
                sink.record(TraceEvent {
                    time: req.reveal,
                    vehicle: None,
                    kind: EventKind::Reject(r, RejectReason::Window),
                    vertex: Some(req.customer),
                    load: 0,
                });
            }
        }
    }
    SimOutcome { rejected, accepted, decisions }
}

/// Rejection count of the baseline on one scenario (no trace).
pub fn wait_and_serve_rejected(instance: &Instance, scenario: &[bool]) -> u64 {
    run_wait_and_serve(instance, scenario, &mut NoTrace).rejected
}

//! Assignment of potential requests to scheduled waiting locations.
//!
//! Before anything stochastic happens, every potential request is bound to at
//! most one visited waiting location, the one it would be served from if it
//! appears. The binding only uses first-stage data, so both the closed-form
//! evaluation and the simulated recourse agree on it.
//!
//! # Service windows
//!
//! A vehicle parked at `w` from `arrive(w)` to `depart(w)` can handle request
//! `r` by leaving `w` at some time `t`, serving at `t + d(w, c_r)`, and being
//! back at `w` by `depart(w)`. That gives a feasible departure window
//! `[t_min, t_max]`:
//!
//! * `t_min = max(arrive(w), reveal_r, earliest_r - d(w, c_r))`
//! * `t_max = min(latest_r - d(w, c_r), depart(w) - d(w, c_r) - service_r - d(c_r, w))`
//!
//! The request is *compatible* with `w` when `t_min <= t_max`.
//!
//! # Choice rule
//!
//! Requests are processed in canonical order. Each is bound to the compatible
//! visited location currently holding the fewest requests, ties broken by the
//! smallest vertex id; requests compatible with nothing stay unbound and are
//! rejected outright whenever they appear.

use crate::model::{
    compute_schedule, FirstStageSolution, Instance, PotentialRequest, RequestIdx, RouteSchedule, Time,
    ValidationError, VertexId,
};

/// A request bound to a waiting location, with its precomputed geometry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignedRequest {
    /// Waiting location the request is served from.
    pub vertex: VertexId,
    /// Route (vehicle) visiting that location.
    pub route: usize,
    /// Earliest feasible departure from `vertex` toward the customer.
    pub t_min: Time,
    /// Latest feasible departure from `vertex` toward the customer.
    pub t_max: Time,
    /// Out-serve-return duration: `d(w, c) + service + d(c, w)`.
    pub round_trip: Time,
    /// Position among the requests bound to the same vertex (canonical order).
    pub pos_in_vertex: usize,
    /// Position among the requests bound to the same route, vertices in route
    /// order and canonical order within a vertex.
    pub pos_in_route: usize,
}

/// The full request-to-location binding for one first-stage solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    of: Vec<Option<AssignedRequest>>,
    by_vertex: Vec<Vec<RequestIdx>>,
    by_route: Vec<Vec<RequestIdx>>,
}

impl Assignment {
    pub fn get(&self, r: RequestIdx) -> Option<&AssignedRequest> {
        self.of[r].as_ref()
    }

    /// Requests bound to waiting vertex `w`, in canonical order.
    pub fn vertex_chain(&self, w: VertexId) -> &[RequestIdx] {
        &self.by_vertex[w]
    }

    /// Requests bound to route `k`: vertex chains concatenated in route order.
    pub fn route_chain(&self, k: usize) -> &[RequestIdx] {
        &self.by_route[k]
    }

    /// Request preceding `r` in its vertex chain.
    pub fn prev_in_vertex(&self, r: RequestIdx) -> Option<RequestIdx> {
        let a = self.of[r].as_ref()?;
        a.pos_in_vertex.checked_sub(1).map(|p| self.by_vertex[a.vertex][p])
    }

    /// Request following `r` in its vertex chain.
    pub fn next_in_vertex(&self, r: RequestIdx) -> Option<RequestIdx> {
        let a = self.of[r].as_ref()?;
        self.by_vertex[a.vertex].get(a.pos_in_vertex + 1).copied()
    }

    /// Request preceding `r` in its route chain (possibly at an earlier vertex).
    pub fn prev_in_route(&self, r: RequestIdx) -> Option<RequestIdx> {
        let a = self.of[r].as_ref()?;
        a.pos_in_route.checked_sub(1).map(|p| self.by_route[a.route][p])
    }

    pub fn assigned_count(&self) -> usize {
        self.of.iter().filter(|a| a.is_some()).count()
    }
}

/// Feasible departure window for serving `r` from waiting vertex `w`
/// (empty when `t_min > t_max`). `w` must be visited by the schedule.
pub fn service_window(
    instance: &Instance,
    schedule: &RouteSchedule,
    r: &PotentialRequest,
    w: VertexId,
) -> (Time, Time) {
    let visit = schedule.visit(w).expect("service_window needs a visited vertex");
    let out = instance.travel.at(w, r.customer);
    let back = instance.travel.at(r.customer, w);
    let t_min = visit.arrive.max(r.reveal).max(r.earliest - out);
    let t_max = (r.latest - out).min(visit.depart - out - r.service - back);
    (t_min, t_max)
}

/// Binds every request to its serving location (or none) as described in the
/// module docs.
pub fn assign_requests(
    instance: &Instance,
    solution: &FirstStageSolution,
    schedule: &RouteSchedule,
) -> Assignment {
    let request_count = instance.requests().len();
    let mut of: Vec<Option<AssignedRequest>> = vec![None; request_count];
    let mut by_vertex: Vec<Vec<RequestIdx>> = vec![Vec::new(); instance.waiting + 1];
    let visited: Vec<VertexId> = {
        let mut v: Vec<VertexId> = solution.visited().collect();
        v.sort_unstable();
        v
    };
    for (idx, r) in instance.requests().iter().enumerate() {
        let mut best: Option<(usize, VertexId, Time, Time)> = None;
        for &w in &visited {
            let (t_min, t_max) = service_window(instance, schedule, r, w);
            if t_min > t_max {
                continue;
            }
            let load = by_vertex[w].len();
            // Strict less-than keeps the smallest compatible id on ties.
            if best.map_or(true, |(best_load, _, _, _)| load < best_load) {
                best = Some((load, w, t_min, t_max));
            }
        }
        if let Some((_, w, t_min, t_max)) = best {
            let visit = schedule.visit(w).unwrap();
            let round_trip =
                instance.travel.at(w, r.customer) + r.service + instance.travel.at(r.customer, w);
            of[idx] = Some(AssignedRequest {
                vertex: w,
                route: visit.route,
                t_min,
                t_max,
                round_trip,
                pos_in_vertex: by_vertex[w].len(),
                pos_in_route: 0, // fixed below
            });
            by_vertex[w].push(idx);
        }
    }
    let mut by_route: Vec<Vec<RequestIdx>> = vec![Vec::new(); solution.routes.len()];
    for (k, route) in solution.routes.iter().enumerate() {
        for &w in route {
            by_route[k].extend_from_slice(&by_vertex[w]);
        }
        for (pos, &r) in by_route[k].iter().enumerate() {
            of[r].as_mut().unwrap().pos_in_route = pos;
        }
    }
    Assignment { of, by_vertex, by_route }
}

/// Everything needed to evaluate or simulate one first-stage solution:
/// the instance, the solution, its schedule, and the request binding.
pub struct EvalContext<'a> {
    pub instance: &'a Instance,
    pub solution: &'a FirstStageSolution,
    pub schedule: RouteSchedule,
    pub assignment: Assignment,
}

impl<'a> EvalContext<'a> {
    /// Validates the solution and precomputes schedule and binding.
    pub fn new(instance: &'a Instance, solution: &'a FirstStageSolution) -> Result<Self, ValidationError> {
        solution.validate(instance)?;
        let schedule = compute_schedule(instance, solution);
        let assignment = assign_requests(instance, solution, &schedule);
        Ok(EvalContext { instance, solution, schedule, assignment })
    }

    #[inline]
    pub fn request(&self, r: RequestIdx) -> &PotentialRequest {
        &self.instance.requests()[r]
    }

    /// Earliest departure from location `loc` (the bound vertex of `r`, or a
    /// customer the vehicle stayed at) toward `r`'s customer, under the
    /// direct-service strategy. The vehicle can never deal with `r` before
    /// its scheduled arrival at `r`'s waiting vertex.
    pub fn tmin_direct(&self, r: RequestIdx, loc: VertexId) -> Time {
        let a = self.assignment.get(r).expect("tmin_direct needs a bound request");
        let req = self.request(r);
        let visit = self.schedule.visit(a.vertex).unwrap();
        visit.arrive.max(req.reveal).max(req.earliest - self.instance.travel.at(loc, req.customer))
    }

    /// Latest departure from `loc` toward `r`'s customer such that service
    /// starts within the window and the vehicle still makes the next waiting
    /// location by its scheduled arrival (or the depot by the horizon when
    /// `r`'s vertex is the last of its route), traveling straight from the
    /// customer.
    pub fn tmax_direct(&self, r: RequestIdx, loc: VertexId) -> Time {
        let a = self.assignment.get(r).expect("tmax_direct needs a bound request");
        let req = self.request(r);
        let visit = self.schedule.visit(a.vertex).unwrap();
        let out = self.instance.travel.at(loc, req.customer);
        let next_stop = visit.successor.unwrap_or(crate::model::DEPOT);
        let onward = self.instance.travel.at(req.customer, next_stop);
        (req.latest - out).min(visit.anchor - out - req.service - onward)
    }

    /// Upper bound (exclusive) on any time index produced by evaluation or
    /// simulation: completions can overshoot the horizon by one leg of travel
    /// plus one service.
    pub fn time_cap(&self) -> Time {
        self.instance.horizon + 1 + self.instance.travel.max_entry() + self.instance.max_service() + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Capacity, TravelMatrix, DEPOT};

    /// Two waiting vertices (1, 2), two customers (3, 4), one vehicle.
    fn instance(requests: Vec<PotentialRequest>) -> Instance {
        // Asymmetric: d(i,j) = i + 2j off-diagonal, except depot legs kept small.
        let travel = TravelMatrix::from_fn(5, |i, j| {
            if i == j {
                0
            } else if i == DEPOT {
                2
            } else if j == DEPOT {
                1
            } else {
                (i + 2 * j) as Time % 5 + 1
            }
        })
        .unwrap();
        Instance::new("t", 2, 2, 60, 1, Capacity::Unbounded, travel, requests).unwrap()
    }

    fn req(customer: VertexId, reveal: Time, latest: Time) -> PotentialRequest {
        PotentialRequest { customer, reveal, demand: 0, service: 2, earliest: reveal, latest, prob: 0.5 }
    }

    #[test]
    fn window_formula() {
        let inst = instance(vec![req(3, 4, 30)]);
        let sol = FirstStageSolution { routes: vec![vec![1]], waits: vec![0, 20, 0] };
        let ctx = EvalContext::new(&inst, &sol).unwrap();
        // arrive(1) = 3, depart(1) = 23; d(1,3) = (1+6)%5+1 = 3, d(3,1) = (3+2)%5+1 = 1.
        let r = &inst.requests()[0];
        let (t_min, t_max) = service_window(&inst, &ctx.schedule, r, 1);
        assert_eq!(t_min, 4, "max(arrive 3, reveal 4, earliest 4 - 3)");
        assert_eq!(t_max, 17, "min(latest 30 - 3, depart 23 - 3 - service 2 - 1)");
        let a = ctx.assignment.get(0).unwrap();
        assert_eq!((a.vertex, a.t_min, a.t_max, a.round_trip), (1, 4, 17, 6));
    }

    #[test]
    fn incompatible_request_stays_unbound() {
        // Window closes before the vehicle ever arrives.
        let inst = instance(vec![req(3, 1, 2)]);
        let sol = FirstStageSolution { routes: vec![vec![1]], waits: vec![0, 20, 0] };
        let ctx = EvalContext::new(&inst, &sol).unwrap();
        assert!(ctx.assignment.get(0).is_none());
        assert_eq!(ctx.assignment.assigned_count(), 0);
    }

    #[test]
    fn balancing_prefers_emptier_vertex_then_smaller_id() {
        // Both vertices are compatible with every request (long stays, loose windows).
        let inst = Instance::new(
            "t",
            2,
            1,
            100,
            2,
            Capacity::Unbounded,
            TravelMatrix::from_fn(4, |_, _| 1).unwrap(),
            vec![req(3, 10, 90), req(3, 11, 90), req(3, 12, 90)],
        )
        .unwrap();
        let sol = FirstStageSolution { routes: vec![vec![1], vec![2]], waits: vec![0, 95, 95] };
        let ctx = EvalContext::new(&inst, &sol).unwrap();
        // First request: tie at 0 requests each, smaller id wins (vertex 1).
        // Second: vertex 2 now emptier. Third: tie again, vertex 1.
        assert_eq!(ctx.assignment.get(0).unwrap().vertex, 1);
        assert_eq!(ctx.assignment.get(1).unwrap().vertex, 2);
        assert_eq!(ctx.assignment.get(2).unwrap().vertex, 1);
        assert_eq!(ctx.assignment.vertex_chain(1), &[0, 2]);
        assert_eq!(ctx.assignment.vertex_chain(2), &[1]);
    }

    #[test]
    fn route_chain_follows_route_order() {
        let inst = Instance::new(
            "t",
            2,
            1,
            100,
            1,
            Capacity::Unbounded,
            TravelMatrix::from_fn(4, |_, _| 1).unwrap(),
            vec![
                // Only compatible with vertex 2 (revealed after vertex 1's stay).
                req(3, 60, 90),
                // Only compatible with vertex 1.
                PotentialRequest { customer: 3, reveal: 2, demand: 0, service: 0, earliest: 2, latest: 6, prob: 0.5 },
            ],
        )
        .unwrap();
        let sol = FirstStageSolution { routes: vec![vec![1, 2]], waits: vec![0, 30, 60] };
        let ctx = EvalContext::new(&inst, &sol).unwrap();
        // Canonical order puts the reveal-2 request first (index 0 in storage).
        let first = &inst.requests()[0];
        assert_eq!(first.reveal, 2);
        assert_eq!(ctx.assignment.get(0).unwrap().vertex, 1);
        assert_eq!(ctx.assignment.get(1).unwrap().vertex, 2);
        // Route chain: vertex 1's requests, then vertex 2's.
        assert_eq!(ctx.assignment.route_chain(0), &[0, 1]);
        assert_eq!(ctx.assignment.get(1).unwrap().pos_in_route, 1);
        assert_eq!(ctx.assignment.prev_in_route(1), Some(0));
        assert_eq!(ctx.assignment.prev_in_vertex(1), None);
    }

    #[test]
    fn direct_service_bounds_use_next_stop() {
        let inst = Instance::new(
            "t",
            2,
            1,
            100,
            1,
            Capacity::Unbounded,
            TravelMatrix::from_fn(4, |i, j| (2 * i + j) as Time % 4 + 1).unwrap(),
            vec![req(3, 5, 90)],
        )
        .unwrap();
        let sol = FirstStageSolution { routes: vec![vec![1, 2]], waits: vec![0, 30, 20] };
        let ctx = EvalContext::new(&inst, &sol).unwrap();
        let a = ctx.assignment.get(0).unwrap();
        assert_eq!(a.vertex, 1);
        let visit = ctx.schedule.visit(1).unwrap();
        let next_arrive = ctx.schedule.visit(2).unwrap().arrive;
        // From the bound vertex itself.
        let d_wc = inst.travel.at(1, 3);
        let d_cnext = inst.travel.at(3, 2);
        assert_eq!(ctx.tmin_direct(0, 1), visit.arrive.max(5).max(5 - d_wc));
        assert_eq!(ctx.tmax_direct(0, 1), (90 - d_wc).min(next_arrive - d_wc - 2 - d_cnext));
        // From the customer location itself (travel 0 out).
        assert_eq!(ctx.tmin_direct(0, 3), visit.arrive.max(5));
        assert_eq!(ctx.tmax_direct(0, 3), (next_arrive - 2 - d_cnext).min(90));
    }
}

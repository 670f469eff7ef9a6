//! Acceptance probabilities when the vehicle may travel directly between
//! customers instead of always round-tripping through its waiting vertex.
//!
//! A request can now be reached from several places: its waiting vertex, or
//! the customer of any earlier request at the same vertex where the vehicle
//! may still be parked. The tables therefore gain a location dimension. Per
//! request `r` and candidate location `v` we fill `g1[v]`/`g2[v]` (revealed /
//! absent, vehicle ready at `v`), then fold them into hand-off distributions
//! `h[v']`: where, when and with which load the vehicle finishes dealing
//! with `r`. A finished vehicle returns to the waiting vertex only when the
//! next request of the vertex has not revealed yet; otherwise it stays
//! parked at the customer it is at. Vertex transitions follow the first
//! stage schedule, so at a vertex boundary all hand-off mass collapses onto
//! the arrival point, keeping only the load marginal.

use crate::assign::EvalContext;
use crate::expect::{fits, pool_below, route_qdim, Grid, Tally};
use crate::model::{DirectGate, Time, VertexId};

pub(crate) fn accept_probs(ctx: &EvalContext, gate: DirectGate, tally: &mut Tally) -> Vec<f64> {
    let t_cap = ctx.time_cap() as usize;
    let mut accept = vec![0.0; ctx.instance.requests().len()];
    for k in 0..ctx.instance.vehicles {
        let chain = ctx.assignment.route_chain(k).to_vec();
        if chain.is_empty() {
            continue;
        }
        let qdim = route_qdim(ctx, k);
        let capacity = ctx.instance.capacity;
        // Customers of earlier requests at the current vertex. Location
        // index 0 is the waiting vertex itself, 1 + j is prior[j]'s customer.
        let mut prior: Vec<usize> = Vec::new();
        let mut h_prev: Vec<Grid> = Vec::new();
        for (i, &r) in chain.iter().enumerate() {
            let req = ctx.request(r);
            let bound = ctx.assignment.get(r).unwrap();
            let w = bound.vertex;
            let arrive = ctx.schedule.visit(w).unwrap().arrive;
            let p = req.prob;
            if bound.pos_in_vertex == 0 {
                prior.clear();
            }
            let locs: Vec<VertexId> = std::iter::once(w)
                .chain(prior.iter().map(|&r2| ctx.request(r2).customer))
                .collect();
            let nloc = locs.len();
            let t_mins: Vec<Time> = locs.iter().map(|&v| ctx.tmin_direct(r, v)).collect();
            let t_maxs: Vec<Time> = locs.iter().map(|&v| ctx.tmax_direct(r, v)).collect();
            let mut g1: Vec<Grid> = (0..nloc).map(|_| Grid::new(t_cap, qdim)).collect();
            let mut g2: Vec<Grid> = (0..nloc).map(|_| Grid::new(t_cap, qdim)).collect();
            if i == 0 {
                // Route opener: surely empty, surely at the waiting vertex.
                g1[0].set(t_mins[0], 0, p);
                g2[0].set(arrive.max(req.reveal), 0, 1.0 - p);
                tally.cells += 2;
            } else if bound.pos_in_vertex == 0 {
                // Vertex boundary: only the load marginal survives, pooled
                // over every location the vehicle may have ended up at.
                let mut mass = vec![0.0; qdim];
                for grid in &h_prev {
                    for (q, m) in grid.per_load().into_iter().enumerate() {
                        mass[q] += m;
                    }
                }
                let discard = arrive.max(req.reveal);
                for (q, &m) in mass.iter().enumerate() {
                    g1[0].set(t_mins[0], q, p * m);
                    g2[0].set(discard, q, (1.0 - p) * m);
                }
                tally.cells += 2 * qdim as u64;
            } else {
                for v in 0..nloc {
                    pool_below(&h_prev[v], &mut g1[v], p, t_mins[v], qdim);
                    pool_below(&h_prev[v], &mut g2[v], 1.0 - p, arrive.max(req.reveal), qdim);
                }
                tally.cells += 2 * (nloc * t_cap * qdim) as u64;
            }
            debug_assert!(
                (g1.iter().map(Grid::total).sum::<f64>() - p).abs() < 1e-9,
                "revealed mass must equal p"
            );
            debug_assert!(
                (g2.iter().map(Grid::total).sum::<f64>() - (1.0 - p)).abs() < 1e-9,
                "absent mass must equal 1-p"
            );
            for v in 0..nloc {
                if t_maxs[v] < t_mins[v] {
                    continue;
                }
                for t in t_mins[v]..=t_maxs[v].min(t_cap as Time - 1) {
                    for q in 0..qdim {
                        if fits(capacity, q, req.demand) {
                            accept[r] += g1[v].at(t, q);
                        }
                    }
                }
            }
            if i + 1 < chain.len() {
                // Hand-off distributions feeding the next request. The gate
                // decides returns: a vehicle done before `gamma_next` heads
                // back to the waiting vertex, otherwise it stays put.
                let next_in_vertex = ctx.assignment.next_in_vertex(r);
                let gamma_next = match gate {
                    DirectGate::SuccessorReveal => {
                        next_in_vertex.map(|n| ctx.request(n).reveal).unwrap_or(0)
                    }
                    DirectGate::OwnReveal => {
                        if next_in_vertex.is_some() {
                            req.reveal
                        } else {
                            0
                        }
                    }
                };
                let customer = req.customer;
                let service = req.service;
                let dq = req.demand as usize;
                let out_leg: Vec<Time> =
                    locs.iter().map(|&v| ctx.instance.travel.at(v, customer)).collect();
                let back_leg = ctx.instance.travel.at(customer, w);
                let home_leg: Vec<Time> =
                    locs.iter().map(|&v| ctx.instance.travel.at(v, w)).collect();
                let mut h = vec![Grid::new(t_cap, qdim); nloc + 1];
                let served = |t: Time, qp: usize, with_back: Time| -> f64 {
                    let mut m = 0.0;
                    for v in 0..nloc {
                        let td = t - out_leg[v] - service - with_back;
                        if td <= t_maxs[v] && fits(capacity, qp, req.demand) {
                            m += g1[v].at(td, qp);
                        }
                    }
                    m
                };
                let refused = |v: usize, t: Time, q: usize| -> f64 {
                    let mut m = g2[v].at(t, q);
                    if !(t <= t_maxs[v] && fits(capacity, q, req.demand)) {
                        m += g1[v].at(t, q);
                    }
                    m
                };
                for t in 0..t_cap as Time {
                    for q in 0..qdim {
                        // Ends at the waiting vertex: never left it, or
                        // served and came back early, or gave up at an
                        // earlier customer and came back early.
                        let mut at_w = refused(0, t, q);
                        if t - back_leg < gamma_next {
                            if let Some(qp) = q.checked_sub(dq) {
                                at_w += served(t, qp, back_leg);
                            }
                        }
                        for v in 1..nloc {
                            let tr = t - home_leg[v];
                            if tr < gamma_next {
                                at_w += refused(v, tr, q);
                            }
                        }
                        h[0].set(t, q, at_w);
                        // Still parked at an earlier customer.
                        for v in 1..nloc {
                            let m = if t >= gamma_next { refused(v, t, q) } else { 0.0 };
                            h[v].set(t, q, m);
                        }
                        // Parked at r's own customer after serving it late.
                        let at_r = if t >= gamma_next {
                            match q.checked_sub(dq) {
                                Some(qp) => served(t, qp, 0),
                                None => 0.0,
                            }
                        } else {
                            0.0
                        };
                        h[nloc].set(t, q, at_r);
                    }
                }
                tally.cells += ((nloc + 1) * t_cap * qdim) as u64;
                debug_assert!(
                    (h.iter().map(Grid::total).sum::<f64>() - 1.0).abs() < 1e-9,
                    "hand-off must conserve all mass"
                );
                h_prev = h;
            }
            prior.push(r);
        }
    }
    accept
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expect::expected_cost;
    use crate::model::{
        Capacity, Demand, FirstStageSolution, Instance, PotentialRequest, Strategy, TravelMatrix,
    };
    use crate::simulate::exhaustive_expected_cost;

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

    fn one_vertex(requests: Vec<PotentialRequest>, capacity: Capacity) -> (Instance, FirstStageSolution) {
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
        let inst = Instance::new("direct", 1, 2, 30, 1, capacity, travel, requests).unwrap();
        let sol = FirstStageSolution { routes: vec![vec![1]], waits: vec![0, 20] };
        (inst, sol)
    }

    #[test]
    fn lone_request_gains_nothing_from_direct_travel() {
        let (inst, sol) = one_vertex(vec![request(2, 2, 20, 1, 1, 0.7)], Capacity::Finite(2));
        let ctx = EvalContext::new(&inst, &sol).unwrap();
        let plus = expected_cost(&ctx, Strategy::RQPlus, DirectGate::default()).unwrap();
        let rq = expected_cost(&ctx, Strategy::RQ, DirectGate::default()).unwrap();
        assert_eq!(plus.expected_rejected, rq.expected_rejected);
        assert_eq!(plus.accept_prob, rq.accept_prob);
    }

    #[test]
    fn direct_travel_salvages_a_blocked_successor() {
        // Serving the first request from the vertex returns at 10, past the
        // second's classic deadline of 8; but the vehicle parks at customer
        // 2 (done at 7, reveal 5 already passed) and departs directly.
        let reqs = vec![request(2, 2, 20, 1, 1, 0.5), request(3, 5, 12, 2, 1, 0.8)];
        let (inst, sol) = one_vertex(reqs, Capacity::Finite(3));
        let ctx = EvalContext::new(&inst, &sol).unwrap();
        let plus = expected_cost(&ctx, Strategy::RQPlus, DirectGate::default()).unwrap();
        let rq = expected_cost(&ctx, Strategy::RQ, DirectGate::default()).unwrap();
        assert!((rq.accept_prob[1] - 0.4).abs() < 1e-12, "got {}", rq.accept_prob[1]);
        assert!((plus.accept_prob[1] - 0.8).abs() < 1e-12, "got {}", plus.accept_prob[1]);
        assert!(plus.expected_rejected < rq.expected_rejected - 0.1);
    }

    #[test]
    fn matches_the_exhaustive_oracle_at_one_vertex() {
        for (p0, p1, p2) in [(0.5, 0.8, 0.3), (1.0, 0.6, 0.9), (0.2, 0.4, 1.0)] {
            let reqs = vec![
                request(2, 2, 20, 1, 1, p0),
                request(3, 5, 12, 2, 1, p1),
                request(2, 9, 18, 1, 1, p2),
            ];
            for capacity in [Capacity::Finite(2), Capacity::Unbounded] {
                let (inst, sol) = one_vertex(reqs.clone(), capacity);
                let ctx = EvalContext::new(&inst, &sol).unwrap();
                for gate in [DirectGate::SuccessorReveal, DirectGate::OwnReveal] {
                    let closed = expected_cost(&ctx, Strategy::RQPlus, gate).unwrap();
                    let oracle = exhaustive_expected_cost(&ctx, Strategy::RQPlus, gate).unwrap();
                    assert!(
                        (closed.expected_rejected - oracle.expected_rejected).abs() < 1e-12,
                        "p=({p0},{p1},{p2}) {capacity} {gate:?}: closed {} oracle {}",
                        closed.expected_rejected,
                        oracle.expected_rejected
                    );
                    for (c, o) in closed.accept_prob.iter().zip(&oracle.accept_prob) {
                        assert!((c - o).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn matches_the_exhaustive_oracle_across_vertices() {
        // Two waiting vertices on one route exercise the boundary collapse.
        let travel = TravelMatrix::from_fn(6, |i, j| {
            if i == j {
                0
            } else {
                ((3 * i + 5 * j) % 4 + 1) as Time
            }
        })
        .unwrap();
        let inst = Instance::new(
            "hopscotch",
            2,
            3,
            26,
            1,
            Capacity::Finite(2),
            travel,
            vec![
                request(3, 2, 10, 1, 1, 0.5),
                request(4, 4, 12, 1, 1, 0.8),
                request(5, 13, 24, 2, 1, 0.4),
                request(3, 15, 25, 1, 1, 0.9),
            ],
        )
        .unwrap();
        let sol = FirstStageSolution { routes: vec![vec![1, 2]], waits: vec![0, 9, 10] };
        let ctx = EvalContext::new(&inst, &sol).unwrap();
        for gate in [DirectGate::SuccessorReveal, DirectGate::OwnReveal] {
            let closed = expected_cost(&ctx, Strategy::RQPlus, gate).unwrap();
            let oracle = exhaustive_expected_cost(&ctx, Strategy::RQPlus, gate).unwrap();
            assert!(
                (closed.expected_rejected - oracle.expected_rejected).abs() < 1e-12,
                "{gate:?}: closed {} oracle {}",
                closed.expected_rejected,
                oracle.expected_rejected
            );
            for (c, o) in closed.accept_prob.iter().zip(&oracle.accept_prob) {
                assert!((c - o).abs() < 1e-12);
            }
        }
    }
}

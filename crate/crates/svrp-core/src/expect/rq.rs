//! Acceptance probabilities under finite capacity with round-trip service.
//!
//! Load couples the waiting vertices of a route: the tables gain a load
//! dimension and run over the whole route chain instead of per vertex. Time
//! still resets at each vertex boundary (arrivals are fixed by the first
//! stage schedule), so when a chain crosses into a new vertex all accumulated
//! mass collapses onto the arrival point, keeping only the load marginal.

use crate::assign::EvalContext;
use crate::expect::{fits, pool_below, route_qdim, EvalError, Grid, Tally};
use crate::model::{Capacity, Time};

pub(crate) fn accept_probs(
    ctx: &EvalContext,
    mut marginals: Option<&mut Vec<Vec<f64>>>,
    tally: &mut Tally,
) -> Vec<f64> {
    let t_cap = ctx.time_cap() as usize;
    let mut accept = vec![0.0; ctx.instance.requests().len()];
    for k in 0..ctx.instance.vehicles {
        let chain = ctx.assignment.route_chain(k).to_vec();
        if chain.is_empty() {
            continue;
        }
        let qdim = route_qdim(ctx, k);
        let mut g1_prev = Grid::new(t_cap, qdim);
        let mut g2_prev = Grid::new(t_cap, qdim);
        let mut g1 = Grid::new(t_cap, qdim);
        let mut g2 = Grid::new(t_cap, qdim);
        let mut f = Grid::new(t_cap, qdim);
        for (i, &r) in chain.iter().enumerate() {
            let req = ctx.request(r);
            let bound = ctx.assignment.get(r).unwrap();
            let on_lo = ctx.schedule.visit(bound.vertex).unwrap().arrive;
            let p = req.prob;
            g1.clear();
            g2.clear();
            if i == 0 {
                // Route opener: the vehicle is surely empty and on time.
                g1.set(on_lo.max(bound.t_min), 0, p);
                g2.set(on_lo.max(req.reveal), 0, 1.0 - p);
                tally.cells += 2;
            } else {
                fill_availability(ctx, &g1_prev, &g2_prev, &mut f, chain[i - 1]);
                tally.cells += (t_cap * qdim) as u64;
                if let Some(out) = marginals.as_deref_mut() {
                    out.push(f.per_load());
                }
                if bound.pos_in_vertex == 0 {
                    // New vertex: the schedule pins the arrival, so only the
                    // load marginal survives the transition.
                    let mass = f.per_load();
                    let ready = on_lo.max(bound.t_min);
                    let discard = on_lo.max(req.reveal);
                    for (q, &m) in mass.iter().enumerate() {
                        g1.set(ready, q, p * m);
                        g2.set(discard, q, (1.0 - p) * m);
                    }
                    tally.cells += 2 * qdim as u64;
                } else {
                    pool_below(&f, &mut g1, p, bound.t_min, qdim);
                    pool_below(&f, &mut g2, 1.0 - p, on_lo.max(req.reveal), qdim);
                    tally.cells += 2 * (t_cap * qdim) as u64;
                }
            }
            if marginals.is_some() && i == 0 {
                let mut unit = vec![0.0; qdim];
                unit[0] = 1.0;
                marginals.as_deref_mut().unwrap().push(unit);
            }
            debug_assert!((g1.total() - p).abs() < 1e-9, "revealed mass must equal p");
            debug_assert!((g2.total() - (1.0 - p)).abs() < 1e-9, "absent mass must equal 1-p");
            for t in bound.t_min..=bound.t_max.min(t_cap as Time - 1) {
                for q in 0..qdim {
                    if fits(ctx.instance.capacity, q, req.demand) {
                        accept[r] += g1.at(t, q);
                    }
                }
            }
            std::mem::swap(&mut g1_prev, &mut g1);
            std::mem::swap(&mut g2_prev, &mut g2);
        }
    }
    accept
}

/// Availability distribution for the successor of `prev`: the predecessor
/// was absent, or revealed but rejected (too late or too heavy, consuming no
/// time and no load), or served (shifting time by its round trip and load by
/// its demand).
fn fill_availability(ctx: &EvalContext, g1p: &Grid, g2p: &Grid, f: &mut Grid, prev: usize) {
    let bound = ctx.assignment.get(prev).unwrap();
    let req = ctx.request(prev);
    let qdim = f.qdim;
    for t in 0..f.t_cap() as Time {
        for q in 0..qdim {
            let mut mass = g2p.at(t, q);
            if !(t <= bound.t_max && fits(ctx.instance.capacity, q, req.demand)) {
                mass += g1p.at(t, q);
            }
            if let Some(qp) = q.checked_sub(req.demand as usize) {
                let td = t - bound.round_trip;
                if td <= bound.t_max && fits(ctx.instance.capacity, qp, req.demand) {
                    mass += g1p.at(td, qp);
                }
            }
            f.set(t, q, mass);
        }
    }
}

/// Per-request load marginals `f'(r, q)` on a chain emulating the classic
/// unit-demand, no-time-window setting: all requests share one waiting
/// vertex, service is instantaneous and colocated, and every departure
/// window spans the whole stay. Under those preconditions `f'(r, q)` is the
/// probability that exactly `q` of the requests before `r` appeared (while
/// capacity admits them), and the returned table satisfies
/// `f'(r, q) = p_prev * f'(prev, q-1) + (1 - p_prev) * f'(prev, q)`.
///
/// Returns one row per request in chain order; the first row is the unit
/// mass at load zero.
pub fn bertsimas_marginals(ctx: &EvalContext) -> Result<Vec<Vec<f64>>, EvalError> {
    if ctx.instance.capacity == Capacity::Unbounded {
        return Err(EvalError::new("load marginals need a finite capacity"));
    }
    let visited: Vec<_> = ctx.solution.visited().collect();
    if visited.len() != 1 {
        return Err(EvalError::new(format!(
            "load marginals need exactly one visited waiting vertex, got {}",
            visited.len()
        )));
    }
    let visit = ctx.schedule.visit(visited[0]).unwrap();
    for (r, req) in ctx.instance.requests().iter().enumerate() {
        let bound = ctx.assignment.get(r).ok_or_else(|| {
            EvalError::new(format!("load marginals need every request assigned, {r} is not"))
        })?;
        if req.demand != 1 {
            return Err(EvalError::new(format!("request {r} demand must be 1")));
        }
        if bound.round_trip != 0 {
            return Err(EvalError::new(format!(
                "request {r} must be instantaneous and colocated with its vertex"
            )));
        }
        if bound.t_min != visit.arrive || bound.t_max != visit.depart {
            return Err(EvalError::new(format!(
                "request {r} window [{}, {}] must span the whole stay [{}, {}]",
                bound.t_min, bound.t_max, visit.arrive, visit.depart
            )));
        }
    }
    let mut rows = Vec::with_capacity(ctx.instance.requests().len());
    let mut tally = Tally::default();
    accept_probs(ctx, Some(&mut rows), &mut tally);
    Ok(rows)
}

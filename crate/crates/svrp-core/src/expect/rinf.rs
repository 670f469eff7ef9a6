//! Acceptance probabilities when vehicle capacity never binds.
//!
//! Without a load to track, what happens at one waiting vertex never affects
//! another: the vehicle arrives and leaves each vertex exactly on schedule,
//! so each vertex's request chain is evaluated independently. Per request we
//! maintain three distributions over time:
//!
//! - `g1(r, t)`: `r` revealed and the vehicle is ready to leave for it at
//!   `t` (it actually goes only if `t` is within `r`'s departure window);
//! - `g2(r, t)`: `r` did not reveal and the vehicle discards it at `t`;
//! - `f(r, t)`: the vehicle becomes available for `r` at `t`, derived from
//!   the predecessor's `g1`/`g2` by shifting served mass by the round trip.

use crate::assign::EvalContext;
use crate::expect::{Grid, Tally};
use crate::model::Time;

pub(crate) fn accept_probs(ctx: &EvalContext, tally: &mut Tally) -> Vec<f64> {
    let t_cap = ctx.time_cap() as usize;
    let mut accept = vec![0.0; ctx.instance.requests().len()];
    let mut g1_prev = Grid::new(t_cap, 1);
    let mut g2_prev = Grid::new(t_cap, 1);
    let mut g1 = Grid::new(t_cap, 1);
    let mut g2 = Grid::new(t_cap, 1);
    let mut f = Grid::new(t_cap, 1);
    for w in ctx.solution.visited() {
        let chain = ctx.assignment.vertex_chain(w);
        if chain.is_empty() {
            continue;
        }
        let on_lo = ctx.schedule.visit(w).unwrap().arrive;
        for (i, &r) in chain.iter().enumerate() {
            let req = ctx.request(r);
            let bound = ctx.assignment.get(r).unwrap();
            let p = req.prob;
            g1.clear();
            g2.clear();
            if i == 0 {
                // The chain opener meets a deterministic vehicle: ready at
                // the arrival time or the window start, whichever is later.
                g1.set(on_lo.max(bound.t_min), 0, p);
                g2.set(on_lo.max(req.reveal), 0, 1.0 - p);
                tally.cells += 2;
            } else {
                let prev = ctx.assignment.get(chain[i - 1]).unwrap();
                let trip = prev.round_trip;
                for t in 0..t_cap as Time {
                    // Predecessor absent, or revealed but outside its window
                    // (then it consumed no time), or served with a round trip.
                    let mut mass = g2_prev.at(t, 0);
                    if t > prev.t_max {
                        mass += g1_prev.at(t, 0);
                    }
                    if t - trip <= prev.t_max {
                        mass += g1_prev.at(t - trip, 0);
                    }
                    f.set(t, 0, mass);
                }
                fill_from(&f, &mut g1, p, bound.t_min);
                fill_from(&f, &mut g2, 1.0 - p, on_lo.max(req.reveal));
                tally.cells += 3 * t_cap as u64;
            }
            debug_assert!((g1.total() - p).abs() < 1e-9, "revealed mass must equal p");
            debug_assert!((g2.total() - (1.0 - p)).abs() < 1e-9, "absent mass must equal 1-p");
            for t in bound.t_min..=bound.t_max.min(t_cap as Time - 1) {
                accept[r] += g1.at(t, 0);
            }
            std::mem::swap(&mut g1_prev, &mut g1);
            std::mem::swap(&mut g2_prev, &mut g2);
        }
    }
    accept
}

/// Scales the availability distribution by `weight` and pools everything at
/// or before `cut` onto the cut point: the vehicle sat ready and the event
/// (window opening, or reveal-time passing) happens only at `cut`.
fn fill_from(f: &Grid, out: &mut Grid, weight: f64, cut: Time) {
    assert!((cut as usize) < out.t_cap(), "cut point past the table end would drop mass");
    let mut pooled = 0.0;
    for t in 0..out.t_cap() as Time {
        if t < cut {
            pooled += f.at(t, 0);
            out.set(t, 0, 0.0);
        } else if t == cut {
            out.set(t, 0, weight * (pooled + f.at(t, 0)));
        } else {
            out.set(t, 0, weight * f.at(t, 0));
        }
    }
}

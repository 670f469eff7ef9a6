//! Construction and neighborhood moves over first-stage solutions.
//!
//! All waiting times live on a grid of whole multiples of the active step, so
//! every move that touches a waiting time adds or removes whole steps.
//! Operators never repair: a move that breaks feasibility (duration past the
//! horizon, waiting time down to zero) is still returned and left for the
//! caller's validation to reject.

use crate::model::{FirstStageSolution, Instance, Time, VertexId, DEPOT};
use crate::rng::SplitMix64;

/// Number of neighborhood operators.
pub const OPERATOR_COUNT: u8 = 9;

/// Builds a random starting solution: every waiting vertex goes to a
/// uniformly random route at a uniformly random position. Each route's
/// residual time (horizon minus travel) is then split evenly across its
/// vertices, rounded down to the step, at least one step each; trailing
/// vertices are dropped from routes that cannot afford one step per vertex.
pub fn initial_solution(instance: &Instance, rng: &mut SplitMix64, step: Time) -> FirstStageSolution {
    assert!(step >= 1, "waiting-time step must be positive");
    let mut routes: Vec<Vec<VertexId>> = vec![Vec::new(); instance.vehicles];
    for w in 1..=instance.waiting {
        let k = rng.index(instance.vehicles);
        let pos = rng.index(routes[k].len() + 1);
        routes[k].insert(pos, w);
    }
    let mut waits = vec![0; instance.waiting + 1];
    for route in &mut routes {
        while !route.is_empty() {
            let len = route.len() as Time;
            if route_travel(instance, route) + len * step <= instance.horizon {
                break;
            }
            route.pop();
        }
        if route.is_empty() {
            continue;
        }
        let residual = instance.horizon - route_travel(instance, route);
        let share = residual / route.len() as Time / step * step;
        for &w in route.iter() {
            waits[w] = share;
        }
    }
    FirstStageSolution { routes, waits }
}

fn route_travel(instance: &Instance, route: &[VertexId]) -> Time {
    let mut total = 0;
    let mut prev = DEPOT;
    for &w in route {
        total += instance.travel.at(prev, w);
        prev = w;
    }
    total + instance.travel.at(prev, DEPOT)
}

/// One uniformly random move of the operator class `op` (1-based):
///
/// 1. relocate a visited vertex to a random route position
/// 2. swap two visited vertices
/// 3. reverse a segment of one route
/// 4. exchange segments between two routes
/// 5. insert an unvisited vertex with one step of waiting time
/// 6. remove a visited vertex
/// 7. lengthen a waiting time by one step
/// 8. shorten a waiting time by one step
/// 9. transfer a random number of steps between two waiting times
///
/// Returns `None` when the class has no move for `sol` (for instance, remove
/// with nothing visited). The candidate is not validated here.
pub fn neighbor(
    op: u8,
    sol: &FirstStageSolution,
    step: Time,
    rng: &mut SplitMix64,
) -> Option<FirstStageSolution> {
    assert!((1..=OPERATOR_COUNT).contains(&op), "operator id {op} out of range");
    match op {
        1 => relocate(sol, rng),
        2 => swap_vertices(sol, rng),
        3 => reverse_segment(sol, rng),
        4 => cross_exchange(sol, rng),
        5 => insert_vertex(sol, step, rng),
        6 => remove_vertex(sol, rng),
        7 => change_wait(sol, step, rng),
        8 => change_wait(sol, -step, rng),
        _ => transfer_wait(sol, step, rng),
    }
}

/// Visited slots in route-major order.
fn slots(sol: &FirstStageSolution) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (k, route) in sol.routes.iter().enumerate() {
        for pos in 0..route.len() {
            out.push((k, pos));
        }
    }
    out
}

/// Two distinct uniform indices below `len` (`len >= 2`).
fn distinct_pair(rng: &mut SplitMix64, len: usize) -> (usize, usize) {
    let a = rng.index(len);
    let mut b = rng.index(len - 1);
    if b >= a {
        b += 1;
    }
    (a, b)
}

fn relocate(sol: &FirstStageSolution, rng: &mut SplitMix64) -> Option<FirstStageSolution> {
    let slots = slots(sol);
    if slots.is_empty() {
        return None;
    }
    let mut out = sol.clone();
    let (k, pos) = slots[rng.index(slots.len())];
    let w = out.routes[k].remove(pos);
    // Putting the vertex back where it came from would propose the current
    // solution again (a sure, pointless acceptance), so that one insertion
    // point is excluded.
    let mut spots: Vec<(usize, usize)> = Vec::new();
    for (r, route) in out.routes.iter().enumerate() {
        for at in 0..=route.len() {
            if (r, at) != (k, pos) {
                spots.push((r, at));
            }
        }
    }
    if spots.is_empty() {
        return None;
    }
    let (to, at) = spots[rng.index(spots.len())];
    out.routes[to].insert(at, w);
    Some(out)
}

fn swap_vertices(sol: &FirstStageSolution, rng: &mut SplitMix64) -> Option<FirstStageSolution> {
    let slots = slots(sol);
    if slots.len() < 2 {
        return None;
    }
    let (a, b) = distinct_pair(rng, slots.len());
    let (k1, p1) = slots[a];
    let (k2, p2) = slots[b];
    let mut out = sol.clone();
    let w1 = out.routes[k1][p1];
    out.routes[k1][p1] = out.routes[k2][p2];
    out.routes[k2][p2] = w1;
    Some(out)
}

fn reverse_segment(sol: &FirstStageSolution, rng: &mut SplitMix64) -> Option<FirstStageSolution> {
    let eligible: Vec<usize> =
        (0..sol.routes.len()).filter(|&k| sol.routes[k].len() >= 2).collect();
    if eligible.is_empty() {
        return None;
    }
    let k = eligible[rng.index(eligible.len())];
    let (a, b) = distinct_pair(rng, sol.routes[k].len());
    let (lo, hi) = (a.min(b), a.max(b));
    let mut out = sol.clone();
    out.routes[k][lo..=hi].reverse();
    Some(out)
}

fn cross_exchange(sol: &FirstStageSolution, rng: &mut SplitMix64) -> Option<FirstStageSolution> {
    if sol.routes.len() < 2 || sol.visited().next().is_none() {
        return None;
    }
    let (k1, k2) = distinct_pair(rng, sol.routes.len());
    let span = |rng: &mut SplitMix64, len: usize| {
        let a = rng.index(len + 1);
        let b = rng.index(len + 1);
        (a.min(b), a.max(b))
    };
    let (i1, j1) = span(rng, sol.routes[k1].len());
    let (i2, j2) = span(rng, sol.routes[k2].len());
    if i1 == j1 && i2 == j2 {
        // Trading two empty segments is not a move.
        return None;
    }
    let mut out = sol.clone();
    let seg1: Vec<VertexId> = out.routes[k1][i1..j1].to_vec();
    let seg2: Vec<VertexId> = out.routes[k2][i2..j2].to_vec();
    out.routes[k1].splice(i1..j1, seg2);
    out.routes[k2].splice(i2..j2, seg1);
    Some(out)
}

fn insert_vertex(sol: &FirstStageSolution, step: Time, rng: &mut SplitMix64) -> Option<FirstStageSolution> {
    let mut visited = vec![false; sol.waits.len()];
    for w in sol.visited() {
        visited[w] = true;
    }
    let free: Vec<VertexId> = (1..sol.waits.len()).filter(|&w| !visited[w]).collect();
    if free.is_empty() {
        return None;
    }
    let w = free[rng.index(free.len())];
    let mut out = sol.clone();
    let k = rng.index(out.routes.len());
    let at = rng.index(out.routes[k].len() + 1);
    out.routes[k].insert(at, w);
    out.waits[w] = step;
    Some(out)
}

fn remove_vertex(sol: &FirstStageSolution, rng: &mut SplitMix64) -> Option<FirstStageSolution> {
    let slots = slots(sol);
    if slots.is_empty() {
        return None;
    }
    let (k, pos) = slots[rng.index(slots.len())];
    let mut out = sol.clone();
    let w = out.routes[k].remove(pos);
    out.waits[w] = 0;
    Some(out)
}

fn change_wait(sol: &FirstStageSolution, delta: Time, rng: &mut SplitMix64) -> Option<FirstStageSolution> {
    let slots = slots(sol);
    if slots.is_empty() {
        return None;
    }
    let (k, pos) = slots[rng.index(slots.len())];
    let mut out = sol.clone();
    let w = out.routes[k][pos];
    out.waits[w] += delta;
    Some(out)
}

fn transfer_wait(sol: &FirstStageSolution, step: Time, rng: &mut SplitMix64) -> Option<FirstStageSolution> {
    let slots = slots(sol);
    if slots.len() < 2 {
        return None;
    }
    let (a, b) = distinct_pair(rng, slots.len());
    let (k1, p1) = slots[a];
    let (k2, p2) = slots[b];
    let mut out = sol.clone();
    let from = out.routes[k1][p1];
    let to = out.routes[k2][p2];
    let steps_available = (out.waits[from] / step).max(1);
    let amount = (rng.below(steps_available as u64) as Time + 1) * step;
    out.waits[from] -= amount;
    out.waits[to] += amount;
    Some(out)
}

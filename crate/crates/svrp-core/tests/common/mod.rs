//! Shared generators for the integration test suites: small random instances
//! whose exact expected cost is still enumerable, plus random feasible
//! first-stage solutions for them.

use svrp_core::model::{
    Capacity, FirstStageSolution, Instance, PotentialRequest, Time, TravelMatrix,
};
use svrp_core::rng::SplitMix64;
use svrp_core::search::initial_solution;

/// A small random instance: one to three waiting and customer locations, a
/// horizon of 8 to 20 units, one or two vehicles, capacity 1 to 3 or
/// unbounded, and one to ten potential requests on distinct
/// (customer, reveal) slots. Everything is drawn from `seed` alone.
pub fn tiny_instance(seed: u64) -> Instance {
    let mut rng = SplitMix64::new(seed);
    let waiting = rng.range_i64(1, 3) as usize;
    let customers = rng.range_i64(1, 3) as usize;
    let horizon: Time = rng.range_i64(8, 20);
    let vehicles = rng.range_i64(1, 2) as usize;
    let capacity = if rng.next_f64() < 0.5 {
        Capacity::Finite(rng.range_i64(1, 3))
    } else {
        Capacity::Unbounded
    };
    let size = 1 + waiting + customers;
    let mut entries = Vec::with_capacity(size * size);
    for i in 0..size {
        for j in 0..size {
            entries.push(if i == j { 0 } else { rng.range_i64(1, 4) });
        }
    }
    let travel = TravelMatrix::new(size, entries).unwrap();

    let mut slots: Vec<(usize, Time)> = Vec::new();
    for c in 1..=customers {
        for t in 1..=horizon {
            slots.push((waiting + c, t));
        }
    }
    rng.shuffle(&mut slots);
    let count = 1 + rng.index(10.min(slots.len()));
    let max_demand = match capacity {
        Capacity::Finite(q) => q,
        Capacity::Unbounded => 3,
    };
    let requests = slots[..count]
        .iter()
        .map(|&(customer, reveal)| {
            let latest = rng.range_i64(reveal, horizon);
            let earliest = rng.range_i64(reveal, latest);
            PotentialRequest {
                customer,
                reveal,
                demand: rng.range_i64(0, max_demand),
                service: rng.range_i64(0, 3),
                earliest,
                latest,
                prob: (rng.range_i64(1, 100) as f64) / 100.0,
            }
        })
        .collect();
    Instance::new("tiny", waiting, customers, horizon, vehicles, capacity, travel, requests)
        .unwrap()
}

/// The same instance with a different vehicle capacity.
pub fn with_capacity(instance: &Instance, capacity: Capacity) -> Instance {
    Instance::new(
        instance.name.clone(),
        instance.waiting,
        instance.customers,
        instance.horizon,
        instance.vehicles,
        capacity,
        instance.travel.clone(),
        instance.requests().to_vec(),
    )
    .unwrap()
}

/// Sum of all request demands.
pub fn total_demand(instance: &Instance) -> i64 {
    instance.requests().iter().map(|r| r.demand).sum()
}

/// A random feasible solution on the unit grid. Starts from a solution that
/// visits every waiting vertex, then drops vertices at random, keeping each
/// drop only if the shortened route still fits the horizon (travel times are
/// not metric, so removal can lengthen a route).
pub fn random_solution(instance: &Instance, rng: &mut SplitMix64) -> FirstStageSolution {
    let mut sol = initial_solution(instance, rng, 1);
    for w in 1..=instance.waiting {
        if rng.next_f64() >= 0.3 {
            continue;
        }
        let mut dropped = sol.clone();
        for route in &mut dropped.routes {
            route.retain(|&v| v != w);
        }
        dropped.waits[w] = 0;
        if dropped.validate(instance).is_ok() {
            sol = dropped;
        }
    }
    sol
}

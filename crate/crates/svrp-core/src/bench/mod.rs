//! Benchmark instance generation, result metrics, and file formats.
//!
//! Instances model an eight-hour operational day at one-minute resolution
//! (horizon 480) with requests revealing at five-minute slot boundaries.
//! Locations come from an address pool (synthetic or imported): the depot
//! and customers are drawn uniformly, and waiting locations are either the
//! medians of a clustering of the remaining addresses ("separated", named
//! `10c-5w-1`) or copies of the customer locations ("colocated", named
//! `10c+w-1`). Instances sharing a customer count and seed share their
//! depot, customer locations, and request set, whatever the mode or number
//! of waiting locations.

mod cluster;
mod format;
mod pool;

pub use cluster::kmeans_waiting_vertices;
pub use format::{
    read_instance, read_pool, read_solution, write_instance, write_pool, write_solution,
    ParseError, SolutionFile,
};
pub use pool::{synthetic_pool, AddressPool, DEFAULT_POOL_SIZE};

use crate::model::{Capacity, Demand, Instance, PotentialRequest, Time, TravelMatrix, ValidationError};
use crate::rng::{NormalSampler, SplitMix64};

/// Where vehicles may wait.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaitingMode {
    /// `m` dedicated waiting locations, placed by clustering.
    Separated { waiting: usize },
    /// Every customer location doubles as a waiting location.
    Colocated,
}

/// Knobs of the instance generator. The defaults encode the benchmark
/// procedure: an eight-hour day in minutes, five-minute reveal slots,
/// five-minute services, demands up to 2, and service windows of 5 to 20
/// minutes starting at the reveal time.
#[derive(Debug, Clone)]
pub struct GeneratorParams {
    pub customers: usize,
    pub mode: WaitingMode,
    pub seed: u64,
    pub vehicles: usize,
    pub capacity: Capacity,
    pub horizon: Time,
    pub slot_length: Time,
    pub service: Time,
    pub max_demand: Demand,
    pub window_lengths: Vec<Time>,
    /// Standard deviation, in slots, of the two normal request-time modes.
    pub sigma: f64,
    /// Instance name; derived from the shape when empty.
    pub name: Option<String>,
}

impl GeneratorParams {
    pub fn standard(customers: usize, mode: WaitingMode, seed: u64) -> GeneratorParams {
        GeneratorParams {
            customers,
            mode,
            seed,
            vehicles: 2,
            capacity: Capacity::Unbounded,
            horizon: 480,
            slot_length: 5,
            service: 5,
            max_demand: 2,
            window_lengths: vec![5, 10, 15, 20],
            sigma: 8.0,
            name: None,
        }
    }

    /// Number of reveal slots.
    pub fn slots(&self) -> usize {
        (self.horizon / self.slot_length) as usize
    }

    fn derived_name(&self) -> String {
        match self.mode {
            WaitingMode::Separated { waiting } => {
                format!("{}c-{}w-{}", self.customers, waiting, self.seed)
            }
            WaitingMode::Colocated => format!("{}c+w-{}", self.customers, self.seed),
        }
    }

    fn validate(&self, pool: &AddressPool) -> Result<(), ValidationError> {
        if self.customers < 1 {
            return Err(ValidationError::new("an instance needs at least one customer"));
        }
        if self.vehicles < 1 {
            return Err(ValidationError::new("an instance needs at least one vehicle"));
        }
        if self.horizon < 1 || self.slot_length < 1 || self.horizon % self.slot_length != 0 {
            return Err(ValidationError::new(format!(
                "horizon {} must be a positive multiple of the slot length {}",
                self.horizon, self.slot_length
            )));
        }
        if let Capacity::Finite(q) = self.capacity {
            if q < self.max_demand {
                return Err(ValidationError::new(format!(
                    "capacity {q} cannot fit generated demands up to {}",
                    self.max_demand
                )));
            }
        }
        if self.max_demand < 0 {
            return Err(ValidationError::new("the demand bound cannot be negative"));
        }
        if self.window_lengths.is_empty() || self.window_lengths.iter().any(|&d| d < 1) {
            return Err(ValidationError::new("window lengths must be positive and nonempty"));
        }
        if !(self.sigma >= 0.0) {
            return Err(ValidationError::new(format!("sigma must be nonnegative, got {}", self.sigma)));
        }
        let needed = match self.mode {
            WaitingMode::Separated { waiting } => {
                if waiting < 1 {
                    return Err(ValidationError::new("separated mode needs at least one waiting location"));
                }
                self.customers + waiting + 1
            }
            WaitingMode::Colocated => self.customers + 1,
        };
        if needed > pool.size() {
            return Err(ValidationError::new(format!(
                "the pool has {} addresses but the instance needs {needed}",
                pool.size()
            )));
        }
        Ok(())
    }
}

/// Per-slot request probabilities for one customer: two uniformly chosen
/// peak slots, one hundred integer-rounded normal draws around each, and
/// `min(1, count/100)` per slot. Index `s` holds the probability of the
/// request revealing at slot `s + 1`. The probabilities sum to at most 2.
pub fn gen_request_probabilities(rng: &mut SplitMix64, slots: usize, sigma: f64) -> Vec<f64> {
    let mut counts = vec![0u32; slots];
    let mut sampler = NormalSampler::new();
    for _ in 0..2 {
        let mu = rng.range_i64(1, slots as i64) as f64;
        for _ in 0..100 {
            let value = sampler.sample(rng, mu, sigma).round() as i64;
            if (1..=slots as i64).contains(&value) {
                counts[(value - 1) as usize] += 1;
            }
        }
    }
    counts.iter().map(|&nb| (nb as f64 / 100.0).min(1.0)).collect()
}

/// Generates one benchmark instance from the pool. Deterministic in
/// `params` (the location draw depends only on the pool, the customer
/// count, and the seed, so any mode and any number of waiting locations
/// share the same depot, customers, and request set).
pub fn gen_instance(pool: &AddressPool, params: &GeneratorParams) -> Result<Instance, ValidationError> {
    params.validate(pool)?;
    let n = params.customers;

    // Location draw: a full shuffle of the pool, so the prefix taken does
    // not depend on how many waiting locations a sibling instance uses.
    let mut location_rng = SplitMix64::stream(params.seed, 0);
    let mut order: Vec<usize> = (0..pool.size()).collect();
    location_rng.shuffle(&mut order);
    let depot = order[0];
    let customers: Vec<usize> = order[1..=n].to_vec();

    let waiting: Vec<usize> = match params.mode {
        WaitingMode::Separated { waiting } => {
            let remaining: Vec<usize> = order[n + 1..].to_vec();
            let cluster_seed = SplitMix64::stream(params.seed, 1).next_u64();
            kmeans_waiting_vertices(pool, &remaining, waiting, cluster_seed)
        }
        WaitingMode::Colocated => customers.clone(),
    };
    let m = waiting.len();

    // Requests, drawn independently of the mode: per customer in draw
    // order, the slot probabilities, then demand and window length per
    // potential request in slot order.
    let mut request_rng = SplitMix64::stream(params.seed, 2);
    let mut requests = Vec::new();
    for (c_pos, _) in customers.iter().enumerate() {
        let probs = gen_request_probabilities(&mut request_rng, params.slots(), params.sigma);
        for (s, &p) in probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let reveal = (s as Time + 1) * params.slot_length;
            let demand = request_rng.range_i64(0, params.max_demand);
            let width = *request_rng.pick(&params.window_lengths);
            requests.push(PotentialRequest {
                customer: 1 + m + c_pos,
                reveal,
                demand,
                service: params.service,
                earliest: reveal,
                latest: (reveal + width - 1).min(params.horizon),
                prob: p,
            });
        }
    }

    // Vertex map: depot, waiting locations, customers.
    let mut vertex_pool = Vec::with_capacity(1 + m + n);
    vertex_pool.push(depot);
    vertex_pool.extend_from_slice(&waiting);
    vertex_pool.extend_from_slice(&customers);
    let travel = TravelMatrix::from_fn(vertex_pool.len(), |i, j| {
        pool.travel().at(vertex_pool[i], vertex_pool[j])
    })?;

    Instance::new(
        params.name.clone().unwrap_or_else(|| params.derived_name()),
        m,
        n,
        params.horizon,
        params.vehicles,
        params.capacity,
        travel,
        requests,
    )
}

/// Relative improvement of a model's expected cost over the wait-and-serve
/// average; `None` when the baseline is zero.
pub fn gain(ws_avg: f64, expected: f64) -> Option<f64> {
    if ws_avg > 0.0 {
        Some((ws_avg - expected) / ws_avg)
    } else {
        None
    }
}

/// Cumulative performance curve of one approach: its per-instance cost
/// ratios to the best approach on that instance, sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCurve {
    ratios: Vec<f64>,
}

impl ProfileCurve {
    /// Fraction of instances on which this approach was within factor `x`
    /// of the best.
    pub fn value_at(&self, x: f64) -> f64 {
        let within = self.ratios.iter().take_while(|&&r| r <= x).count();
        within as f64 / self.ratios.len() as f64
    }

    /// The curve's step points as (ratio, cumulative fraction), one per
    /// distinct ratio.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let n = self.ratios.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (i, &r) in self.ratios.iter().enumerate() {
            let y = (i + 1) as f64 / n;
            match out.last_mut() {
                Some(last) if last.0 == r => last.1 = y,
                _ => out.push((r, y)),
            }
        }
        out
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }
}

/// Performance profiles for a cost matrix `costs[approach][instance]`.
/// Costs must be nonnegative; a failed run may be `f64::INFINITY`, but each
/// instance needs at least one finite cost. When the best cost on an
/// instance is zero, that instance's ratios are computed as
/// `(cost + 1) / (best + 1)` to stay finite.
pub fn performance_profile(costs: &[Vec<f64>]) -> Result<Vec<ProfileCurve>, ValidationError> {
    if costs.is_empty() || costs[0].is_empty() {
        return Err(ValidationError::new("a profile needs at least one approach and one instance"));
    }
    let instances = costs[0].len();
    for (a, row) in costs.iter().enumerate() {
        if row.len() != instances {
            return Err(ValidationError::new(format!(
                "approach {a} has {} costs, expected {instances}",
                row.len()
            )));
        }
        if let Some(c) = row.iter().find(|c| c.is_nan() || **c < 0.0) {
            return Err(ValidationError::new(format!("approach {a} has an invalid cost {c}")));
        }
    }
    let mut curves = Vec::with_capacity(costs.len());
    for row in costs {
        let mut ratios = Vec::with_capacity(instances);
        for i in 0..instances {
            let best = costs.iter().map(|r| r[i]).fold(f64::INFINITY, f64::min);
            if !best.is_finite() {
                return Err(ValidationError::new(format!("no approach solved instance {i}")));
            }
            let ratio = if best == 0.0 { (row[i] + 1.0) / (best + 1.0) } else { row[i] / best };
            ratios.push(ratio);
        }
        ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
        curves.push(ProfileCurve { ratios });
    }
    Ok(curves)
}

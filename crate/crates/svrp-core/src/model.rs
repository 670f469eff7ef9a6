//! Problem data: vertices, potential requests, instances, first-stage
//! solutions, and their schedules.
//!
//! # Geometry and time
//!
//! A problem lives on `1 + m + n` vertices: vertex `0` is the depot, vertices
//! `1..=m` are *waiting locations* a vehicle may be parked at, and vertices
//! `m+1..=m+n` are customer locations. Travel times are integer, asymmetric,
//! zero on the diagonal, and need not satisfy the triangle inequality.
//!
//! Time is discrete: `1..=horizon`. Vehicles leave the depot at time 1.
//!
//! # Requests
//!
//! A *potential request* is a customer location plus the time at which it
//! would become known (`reveal`), a demand, a service duration, a service
//! time window `[earliest, latest]`, and the probability that it actually
//! appears. At most one potential request may exist per (customer, reveal)
//! pair on constructed instances, which makes the canonical order below a
//! strict total order.
//!
//! Requests are stored sorted by `(reveal, latest, customer)`. All later
//! stages (assignment, closed-form evaluation, simulation) identify a request
//! by its index in that order and rely on the property that earlier-ordered
//! requests are never revealed later.
//!
//! # First-stage solutions
//!
//! A first-stage solution fixes, per vehicle, an ordered sequence of waiting
//! locations and a waiting time for each visited location. Its schedule is
//! fully determined: a vehicle arrives at its first location at
//! `1 + d(depot, w1)`, stays exactly the waiting time, and moves on. The
//! depot-to-depot travel plus total waiting of a route must not exceed the
//! horizon.

use std::fmt;

/// Vertex number; 0 is the depot.
pub type VertexId = usize;
/// Discrete time unit.
pub type Time = i64;
/// Demand / capacity unit.
pub type Demand = i64;
/// Index of a request in the instance's canonical order.
pub type RequestIdx = usize;

/// The depot vertex.
pub const DEPOT: VertexId = 0;

/// A data-validity error. The message always names the offending entity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationError {
    message: String,
}

impl ValidationError {
    pub fn new(message: impl Into<String>) -> Self {
        ValidationError { message: message.into() }
    }
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for ValidationError {}

/// Vehicle capacity; `Unbounded` turns every load check off.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Capacity {
    Unbounded,
    Finite(Demand),
}

impl Capacity {
    /// Whether a vehicle may carry `load`.
    #[inline]
    pub fn admits(self, load: Demand) -> bool {
        match self {
            Capacity::Unbounded => true,
            Capacity::Finite(q) => load <= q,
        }
    }

    pub fn as_finite(self) -> Option<Demand> {
        match self {
            Capacity::Unbounded => None,
            Capacity::Finite(q) => Some(q),
        }
    }
}

impl fmt::Display for Capacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Capacity::Unbounded => write!(f, "inf"),
            Capacity::Finite(q) => write!(f, "{q}"),
        }
    }
}

impl std::str::FromStr for Capacity {
    type Err = ValidationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("inf") {
            return Ok(Capacity::Unbounded);
        }
        let q: Demand = s
            .parse()
            .map_err(|_| ValidationError::new(format!("invalid capacity '{s}' (expected an integer or 'inf')")))?;
        if q < 0 {
            return Err(ValidationError::new(format!("capacity must be nonnegative, got {q}")));
        }
        Ok(Capacity::Finite(q))
    }
}

/// Square matrix of integer travel times.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TravelMatrix {
    size: usize,
    entries: Vec<Time>,
}

impl TravelMatrix {
    /// Validates shape, a zero diagonal, and nonnegative entries.
    pub fn new(size: usize, entries: Vec<Time>) -> Result<Self, ValidationError> {
        if entries.len() != size * size {
            return Err(ValidationError::new(format!(
                "travel matrix has {} entries, expected {}x{}",
                entries.len(),
                size,
                size
            )));
        }
        for i in 0..size {
            for j in 0..size {
                let v = entries[i * size + j];
                if v < 0 {
                    return Err(ValidationError::new(format!("travel time ({i},{j}) is negative: {v}")));
                }
                if i == j && v != 0 {
                    return Err(ValidationError::new(format!("travel time ({i},{i}) must be 0, got {v}")));
                }
            }
        }
        Ok(TravelMatrix { size, entries })
    }

    /// Builds the matrix from a function of (from, to). Diagonal entries are
    /// forced to zero.
    pub fn from_fn(size: usize, mut f: impl FnMut(usize, usize) -> Time) -> Result<Self, ValidationError> {
        let mut entries = Vec::with_capacity(size * size);
        for i in 0..size {
            for j in 0..size {
                entries.push(if i == j { 0 } else { f(i, j) });
            }
        }
        TravelMatrix::new(size, entries)
    }

    #[inline]
    pub fn at(&self, from: VertexId, to: VertexId) -> Time {
        self.entries[from * self.size + to]
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn entries(&self) -> &[Time] {
        &self.entries
    }

    pub fn max_entry(&self) -> Time {
        self.entries.iter().copied().max().unwrap_or(0)
    }
}

/// A customer request that may or may not materialize.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialRequest {
    /// Customer vertex the request would appear at.
    pub customer: VertexId,
    /// Time the request becomes known (if it appears at all).
    pub reveal: Time,
    /// Demand loaded onto the vehicle when served.
    pub demand: Demand,
    /// On-site service duration.
    pub service: Time,
    /// Earliest allowed service start.
    pub earliest: Time,
    /// Latest allowed service start.
    pub latest: Time,
    /// Probability that the request appears.
    pub prob: f64,
}

/// Canonical comparison: by reveal time, then latest service start, then
/// customer vertex. On instances with unique (customer, reveal) pairs this is
/// a strict total order consistent with reveal times.
pub fn request_order(a: &PotentialRequest, b: &PotentialRequest) -> std::cmp::Ordering {
    (a.reveal, a.latest, a.customer).cmp(&(b.reveal, b.latest, b.customer))
}

/// Online recourse strategy executed against the fixed first-stage solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Serve from the waiting location, return after each service, ignore
    /// capacity. Only valid when capacity can never bind.
    RInf,
    /// Serve from the waiting location, return after each service, track
    /// vehicle load against capacity.
    RQ,
    /// As `RQ`, but a vehicle may stay at the customer it just served and
    /// serve the next request directly from there, skipping the return trip.
    RQPlus,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::RInf => write!(f, "rinf"),
            Strategy::RQ => write!(f, "rq"),
            Strategy::RQPlus => write!(f, "rq+"),
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = ValidationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rinf" | "r-inf" => Ok(Strategy::RInf),
            "rq" => Ok(Strategy::RQ),
            "rq+" | "rqplus" | "rq-plus" => Ok(Strategy::RQPlus),
            _ => Err(ValidationError::new(format!("unknown strategy '{s}' (expected rinf, rq or rq+)"))),
        }
    }
}

/// Which reveal time gates the "stay at the customer vs. return to the
/// waiting location" decision after a vehicle finishes dealing with a request
/// under the direct-service strategy.
///
/// `SuccessorReveal` (the default) keeps the vehicle at the customer exactly
/// when the *next* request of the same waiting location is already revealed
/// at that instant. `OwnReveal` gates on the request's own reveal time, which
/// is always in the past by then, so the vehicle never travels back early;
/// kept selectable because the two readings produce different (both
/// self-consistent) policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DirectGate {
    #[default]
    SuccessorReveal,
    OwnReveal,
}

/// A full problem instance. Requests are stored in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
    /// Number of waiting locations (vertices `1..=waiting`).
    pub waiting: usize,
    /// Number of customer locations (vertices `waiting+1..=waiting+customers`).
    pub customers: usize,
    /// Last time unit of the planning horizon.
    pub horizon: Time,
    /// Number of vehicles.
    pub vehicles: usize,
    pub capacity: Capacity,
    pub travel: TravelMatrix,
    requests: Vec<PotentialRequest>,
}

impl Instance {
    /// Validates all fields and stores requests in canonical order.
    /// Fails on the first violation, naming the offending entity.
    pub fn new(
        name: impl Into<String>,
        waiting: usize,
        customers: usize,
        horizon: Time,
        vehicles: usize,
        capacity: Capacity,
        travel: TravelMatrix,
        requests: Vec<PotentialRequest>,
    ) -> Result<Self, ValidationError> {
        Self::assemble(name, waiting, customers, horizon, vehicles, capacity, travel, requests, true)
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        name: impl Into<String>,
        waiting: usize,
        customers: usize,
        horizon: Time,
        vehicles: usize,
        capacity: Capacity,
        travel: TravelMatrix,
        mut requests: Vec<PotentialRequest>,
        unique_slots: bool,
    ) -> Result<Self, ValidationError> {
        let vertex_count = 1 + waiting + customers;
        if travel.size() != vertex_count {
            return Err(ValidationError::new(format!(
                "travel matrix is {}x{} but the instance has {} vertices",
                travel.size(),
                travel.size(),
                vertex_count
            )));
        }
        if horizon < 1 {
            return Err(ValidationError::new(format!("horizon must be at least 1, got {horizon}")));
        }
        if vehicles < 1 {
            return Err(ValidationError::new(format!("vehicle count must be at least 1, got {vehicles}")));
        }
        if let Capacity::Finite(q) = capacity {
            if q < 0 {
                return Err(ValidationError::new(format!("capacity must be nonnegative, got {q}")));
            }
        }
        for (i, r) in requests.iter().enumerate() {
            if r.customer <= waiting || r.customer >= vertex_count {
                return Err(ValidationError::new(format!(
                    "request {i}: customer vertex {} out of range {}..={}",
                    r.customer,
                    waiting + 1,
                    vertex_count - 1
                )));
            }
            if r.reveal < 1 || r.reveal > horizon {
                return Err(ValidationError::new(format!(
                    "request {i}: reveal time {} outside 1..={horizon}",
                    r.reveal
                )));
            }
            if !(r.reveal <= r.earliest && r.earliest <= r.latest && r.latest <= horizon) {
                return Err(ValidationError::new(format!(
                    "request {i}: need reveal <= earliest <= latest <= horizon, got {} <= {} <= {} <= {horizon}",
                    r.reveal, r.earliest, r.latest
                )));
            }
            if r.service < 0 {
                return Err(ValidationError::new(format!("request {i}: negative service time {}", r.service)));
            }
            if r.demand < 0 {
                return Err(ValidationError::new(format!("request {i}: negative demand {}", r.demand)));
            }
            if let Capacity::Finite(q) = capacity {
                if r.demand > q {
                    return Err(ValidationError::new(format!(
                        "request {i}: demand {} exceeds vehicle capacity {q}",
                        r.demand
                    )));
                }
            }
            if !(r.prob >= 0.0 && r.prob <= 1.0) {
                return Err(ValidationError::new(format!("request {i}: probability {} outside [0, 1]", r.prob)));
            }
        }
        requests.sort_by(request_order);
        if unique_slots {
            for pair in requests.windows(2) {
                if pair[0].customer == pair[1].customer && pair[0].reveal == pair[1].reveal {
                    return Err(ValidationError::new(format!(
                        "duplicate request slot: customer {} at reveal time {}",
                        pair[0].customer, pair[0].reveal
                    )));
                }
            }
        }
        Ok(Instance {
            name: name.into(),
            waiting,
            customers,
            horizon,
            vehicles,
            capacity,
            travel,
            requests,
        })
    }

    pub fn vertex_count(&self) -> usize {
        1 + self.waiting + self.customers
    }

    pub fn is_waiting_vertex(&self, v: VertexId) -> bool {
        (1..=self.waiting).contains(&v)
    }

    pub fn is_customer_vertex(&self, v: VertexId) -> bool {
        v > self.waiting && v < self.vertex_count()
    }

    /// Requests in canonical order.
    pub fn requests(&self) -> &[PotentialRequest] {
        &self.requests
    }

    /// Total demand over all potential requests.
    pub fn total_demand(&self) -> Demand {
        self.requests.iter().map(|r| r.demand).sum()
    }

    /// Largest service duration over all requests.
    pub fn max_service(&self) -> Time {
        self.requests.iter().map(|r| r.service).max().unwrap_or(0)
    }

    /// Probability of one joint outcome: the product over requests of
    /// `prob` (appears in `scenario`) or `1 - prob` (does not).
    pub fn scenario_probability(&self, scenario: &[bool]) -> f64 {
        debug_assert_eq!(scenario.len(), self.requests.len());
        let mut p = 1.0;
        for (r, &present) in self.requests.iter().zip(scenario) {
            p *= if present { r.prob } else { 1.0 - r.prob };
        }
        p
    }
}

/// `ceil(value / scale)` for nonnegative values.
pub fn ceil_div(value: Time, scale: Time) -> Time {
    debug_assert!(value >= 0 && scale >= 1);
    (value + scale - 1) / scale
}

/// Coarsens every time quantity of `instance` by `scale`, rounding up:
/// horizon, travel times, service durations, reveal times and windows.
/// Probabilities and demands are untouched. Window ordering is preserved by
/// monotonicity of the rounding; two requests of one customer may collapse
/// onto the same scaled reveal slot, in which case their relative order
/// follows the unscaled order.
pub fn scale_instance(instance: &Instance, scale: Time) -> Instance {
    assert!(scale >= 1, "scale must be positive");
    let size = instance.travel.size();
    let entries = instance.travel.entries().iter().map(|&v| ceil_div(v, scale)).collect();
    let travel = TravelMatrix::new(size, entries).expect("scaling preserves matrix validity");
    let requests = instance
        .requests
        .iter()
        .map(|r| PotentialRequest {
            customer: r.customer,
            reveal: ceil_div(r.reveal, scale),
            demand: r.demand,
            service: ceil_div(r.service, scale),
            earliest: ceil_div(r.earliest, scale),
            latest: ceil_div(r.latest, scale),
            prob: r.prob,
        })
        .collect();
    Instance::assemble(
        instance.name.clone(),
        instance.waiting,
        instance.customers,
        ceil_div(instance.horizon, scale),
        instance.vehicles,
        instance.capacity,
        travel,
        requests,
        false,
    )
    .expect("scaling preserves instance validity")
}

/// Routes over waiting locations plus per-location waiting times.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FirstStageSolution {
    /// One sequence of waiting vertices per vehicle (may be empty).
    pub routes: Vec<Vec<VertexId>>,
    /// Waiting time per vertex id (`0..=waiting`); zero for unvisited
    /// vertices and for index 0 (the depot).
    pub waits: Vec<Time>,
}

impl FirstStageSolution {
    /// The all-vehicles-idle solution (every route empty).
    pub fn empty(instance: &Instance) -> Self {
        FirstStageSolution {
            routes: vec![Vec::new(); instance.vehicles],
            waits: vec![0; instance.waiting + 1],
        }
    }

    pub fn wait_at(&self, w: VertexId) -> Time {
        self.waits[w]
    }

    /// Vertices visited by any route, in route order.
    pub fn visited(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.routes.iter().flatten().copied()
    }

    /// Depot-to-depot travel plus total waiting of route `k`.
    pub fn route_duration(&self, instance: &Instance, k: usize) -> Time {
        let route = &self.routes[k];
        if route.is_empty() {
            return 0;
        }
        let mut total = instance.travel.at(DEPOT, route[0]);
        for pair in route.windows(2) {
            total += instance.travel.at(pair[0], pair[1]);
        }
        total += instance.travel.at(*route.last().unwrap(), DEPOT);
        total += route.iter().map(|&w| self.waits[w]).sum::<Time>();
        total
    }

    /// Structural validity against `instance`: exactly one route per vehicle,
    /// only waiting vertices, each visited at most once, waiting times at
    /// least 1 on visited vertices and 0 elsewhere, and per-route duration
    /// within the horizon.
    pub fn validate(&self, instance: &Instance) -> Result<(), ValidationError> {
        if self.routes.len() != instance.vehicles {
            return Err(ValidationError::new(format!(
                "solution has {} routes but the instance has {} vehicles",
                self.routes.len(),
                instance.vehicles
            )));
        }
        if self.waits.len() != instance.waiting + 1 {
            return Err(ValidationError::new(format!(
                "waits vector has length {}, expected {}",
                self.waits.len(),
                instance.waiting + 1
            )));
        }
        let mut seen = vec![false; instance.waiting + 1];
        for (k, route) in self.routes.iter().enumerate() {
            for &w in route {
                if !instance.is_waiting_vertex(w) {
                    return Err(ValidationError::new(format!("route {k}: vertex {w} is not a waiting location")));
                }
                if seen[w] {
                    return Err(ValidationError::new(format!("vertex {w} is visited more than once")));
                }
                seen[w] = true;
                let tau = self.waits[w];
                if tau < 1 || tau > instance.horizon {
                    return Err(ValidationError::new(format!(
                        "vertex {w}: waiting time {tau} outside 1..={}",
                        instance.horizon
                    )));
                }
            }
        }
        for (w, &tau) in self.waits.iter().enumerate() {
            if !seen[w] && tau != 0 {
                return Err(ValidationError::new(format!("vertex {w} is not visited but has waiting time {tau}")));
            }
        }
        for k in 0..self.routes.len() {
            let duration = self.route_duration(instance, k);
            if duration > instance.horizon {
                return Err(ValidationError::new(format!(
                    "route {k}: duration {duration} exceeds horizon {}",
                    instance.horizon
                )));
            }
        }
        Ok(())
    }
}

/// Multiplies every waiting time by `scale`, mapping a solution found on a
/// scaled instance back to original time units. Routes are unchanged.
pub fn rescale_solution(solution: &FirstStageSolution, scale: Time) -> FirstStageSolution {
    FirstStageSolution {
        routes: solution.routes.clone(),
        waits: solution.waits.iter().map(|&t| t * scale).collect(),
    }
}

/// Re-expresses a solution found at `from_scale` on the grid of another
/// search phase: waiting times are mapped to original units, snapped to the
/// nearest positive multiple of `multiple` (half-up, at least one multiple),
/// and divided by `to_scale`. Requires `to_scale` to divide `multiple`.
/// The caller re-validates the result against the target-scale instance.
pub fn regrid_solution(
    solution: &FirstStageSolution,
    from_scale: Time,
    to_scale: Time,
    multiple: Time,
) -> FirstStageSolution {
    assert!(multiple % to_scale == 0, "waiting multiple must be divisible by the target scale");
    let waits = solution
        .waits
        .iter()
        .map(|&t| {
            if t == 0 {
                0
            } else {
                let original = t * from_scale;
                let snapped = ((original + multiple / 2) / multiple).max(1) * multiple;
                snapped / to_scale
            }
        })
        .collect();
    FirstStageSolution { routes: solution.routes.clone(), waits }
}

/// Scheduled visit of one waiting vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexVisit {
    /// Vehicle (route index) performing the visit.
    pub route: usize,
    /// Position within the route, 0-based.
    pub position: usize,
    /// Scheduled arrival time.
    pub arrive: Time,
    /// Scheduled departure time (`arrive` + waiting time).
    pub depart: Time,
    /// Next waiting vertex of the route, if any.
    pub successor: Option<VertexId>,
    /// Latest-arrival anchor at the successor location for direct service:
    /// the successor's scheduled arrival, or the horizon for the last vertex
    /// (the vehicle must make the depot by then when skipping returns).
    pub anchor: Time,
}

/// Full schedule of a first-stage solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RouteSchedule {
    visits: Vec<Option<VertexVisit>>,
    /// Scheduled depot-return time per route.
    pub depot_return: Vec<Time>,
}

impl RouteSchedule {
    pub fn visit(&self, w: VertexId) -> Option<&VertexVisit> {
        self.visits.get(w).and_then(|v| v.as_ref())
    }
}

/// Computes arrival/departure times for every visited waiting vertex.
/// Vehicles leave the depot at time 1.
pub fn compute_schedule(instance: &Instance, solution: &FirstStageSolution) -> RouteSchedule {
    let mut visits: Vec<Option<VertexVisit>> = vec![None; instance.waiting + 1];
    let mut depot_return = Vec::with_capacity(solution.routes.len());
    for (k, route) in solution.routes.iter().enumerate() {
        let mut clock: Time = 1;
        let mut prev = DEPOT;
        let mut arrivals = Vec::with_capacity(route.len());
        for &w in route {
            let arrive = clock + instance.travel.at(prev, w);
            let depart = arrive + solution.waits[w];
            arrivals.push(arrive);
            visits[w] = Some(VertexVisit {
                route: k,
                position: 0, // fixed below
                arrive,
                depart,
                successor: None,
                anchor: instance.horizon,
            });
            clock = depart;
            prev = w;
        }
        depot_return.push(clock + instance.travel.at(prev, DEPOT));
        for (pos, &w) in route.iter().enumerate() {
            let successor = route.get(pos + 1).copied();
            let anchor = match successor {
                Some(_) => arrivals[pos + 1],
                None => instance.horizon,
            };
            let visit = visits[w].as_mut().unwrap();
            visit.position = pos;
            visit.successor = successor;
            visit.anchor = anchor;
        }
    }
    RouteSchedule { visits, depot_return }
}

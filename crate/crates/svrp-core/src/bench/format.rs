//! Versioned plain-text files for instances, solutions, and address pools.
//!
//! Each document starts with a version line (`svrp-instance v1`,
//! `svrp-solution v1`, `svrp-pool v1`) followed by `key value` lines and
//! counted blocks. Blank lines and `#` comments are ignored. Floats are
//! written with their shortest round-tripping representation, so
//! write-then-read reproduces every value exactly.

use std::fmt::Write as _;

use crate::model::{Capacity, FirstStageSolution, Instance, PotentialRequest, Time, TravelMatrix};

use super::pool::AddressPool;

/// A parse failure annotated with the 1-based line it occurred on
/// (line 0 when the document ended too early).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError { line, message: message.into() }
    }
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ParseError {}

/// A stored solution together with the context needed to interpret it.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionFile {
    pub instance_name: String,
    pub strategy: String,
    /// Time scale the solution's units refer to (1 = original units).
    pub scale: Time,
    pub cost: f64,
    pub seed: u64,
    pub solution: FirstStageSolution,
}

/// Significant-line cursor: skips blanks and `#` comments, tracks the
/// current position for error messages.
struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines { iter: text.lines().enumerate(), pos: 0 }
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        for (idx, raw) in self.iter.by_ref() {
            self.pos = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            return Some((self.pos, line));
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str), ParseError> {
        self.next()
            .ok_or_else(|| ParseError::new(self.pos, format!("document ended while expecting {what}")))
    }

    /// Next line split as `key rest`; the key must match.
    fn keyed(&mut self, key: &str) -> Result<(usize, &'a str), ParseError> {
        let (no, line) = self.expect(&format!("`{key}`"))?;
        match split_key(line) {
            (k, rest) if k == key => Ok((no, rest)),
            _ => Err(ParseError::new(no, format!("expected `{key} ...`, got `{line}`"))),
        }
    }

    fn done(&mut self) -> Result<(), ParseError> {
        match self.next() {
            None => Ok(()),
            Some((no, line)) => {
                Err(ParseError::new(no, format!("unexpected content after the document: `{line}`")))
            }
        }
    }
}

fn split_key(line: &str) -> (&str, &str) {
    match line.split_once(char::is_whitespace) {
        Some((k, rest)) => (k, rest.trim()),
        None => (line, ""),
    }
}

fn parse<T: std::str::FromStr>(no: usize, field: &str, token: &str) -> Result<T, ParseError> {
    token
        .parse()
        .map_err(|_| ParseError::new(no, format!("invalid {field} `{token}`")))
}

fn version_line(lines: &mut Lines<'_>, tag: &str) -> Result<(), ParseError> {
    let want = format!("{tag} v1");
    let (no, line) = lines.expect(&format!("`{want}`"))?;
    if line != want {
        return Err(ParseError::new(no, format!("expected `{want}`, got `{line}`")));
    }
    Ok(())
}

fn parse_count(lines: &mut Lines<'_>, key: &str) -> Result<usize, ParseError> {
    let (no, rest) = lines.keyed(key)?;
    parse(no, &format!("{key} count"), rest)
}

fn parse_matrix(lines: &mut Lines<'_>, size: usize) -> Result<TravelMatrix, ParseError> {
    let mut entries: Vec<Time> = Vec::with_capacity(size * size);
    for _ in 0..size {
        let (no, line) = lines.expect("a matrix row")?;
        let row: Vec<&str> = line.split_whitespace().collect();
        if row.len() != size {
            return Err(ParseError::new(no, format!("matrix row has {} entries, expected {size}", row.len())));
        }
        for token in row {
            entries.push(parse(no, "travel time", token)?);
        }
    }
    TravelMatrix::new(size, entries).map_err(|e| ParseError::new(lines.pos, e.to_string()))
}

fn write_matrix(out: &mut String, matrix: &TravelMatrix) {
    let _ = writeln!(out, "matrix {}", matrix.size());
    for i in 0..matrix.size() {
        let row: Vec<String> = (0..matrix.size()).map(|j| matrix.at(i, j).to_string()).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
}

/// Serializes an instance.
pub fn write_instance(instance: &Instance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "svrp-instance v1");
    let _ = writeln!(out, "name {}", instance.name);
    let _ = writeln!(out, "waiting {}", instance.waiting);
    let _ = writeln!(out, "customers {}", instance.customers);
    let _ = writeln!(out, "horizon {}", instance.horizon);
    let _ = writeln!(out, "vehicles {}", instance.vehicles);
    match instance.capacity {
        Capacity::Unbounded => {
            let _ = writeln!(out, "capacity unbounded");
        }
        Capacity::Finite(q) => {
            let _ = writeln!(out, "capacity {q}");
        }
    }
    let _ = writeln!(out, "requests {}", instance.requests().len());
    for r in instance.requests() {
        let _ = writeln!(
            out,
            "request {} {} {} {} {} {} {}",
            r.customer, r.reveal, r.earliest, r.latest, r.service, r.demand, r.prob
        );
    }
    write_matrix(&mut out, &instance.travel);
    out
}

/// Parses an instance, running full model validation.
pub fn read_instance(text: &str) -> Result<Instance, ParseError> {
    let mut lines = Lines::new(text);
    version_line(&mut lines, "svrp-instance")?;
    let (_, name) = lines.keyed("name")?;
    let name = name.to_string();
    let waiting = parse_count(&mut lines, "waiting")?;
    let customers = parse_count(&mut lines, "customers")?;
    let (no, rest) = lines.keyed("horizon")?;
    let horizon: Time = parse(no, "horizon", rest)?;
    let vehicles = parse_count(&mut lines, "vehicles")?;
    let (no, rest) = lines.keyed("capacity")?;
    let capacity = if rest == "unbounded" {
        Capacity::Unbounded
    } else {
        Capacity::Finite(parse(no, "capacity", rest)?)
    };
    let request_count = parse_count(&mut lines, "requests")?;
    let mut requests = Vec::with_capacity(request_count);
    for _ in 0..request_count {
        let (no, rest) = lines.keyed("request")?;
        let fields: Vec<&str> = rest.split_whitespace().collect();
        if fields.len() != 7 {
            return Err(ParseError::new(no, format!("request has {} fields, expected 7", fields.len())));
        }
        requests.push(PotentialRequest {
            customer: parse(no, "customer vertex", fields[0])?,
            reveal: parse(no, "reveal time", fields[1])?,
            earliest: parse(no, "earliest time", fields[2])?,
            latest: parse(no, "latest time", fields[3])?,
            service: parse(no, "service time", fields[4])?,
            demand: parse(no, "demand", fields[5])?,
            prob: parse(no, "probability", fields[6])?,
        });
    }
    let size = parse_count(&mut lines, "matrix")?;
    let travel = parse_matrix(&mut lines, size)?;
    let end = lines.pos;
    lines.done()?;
    Instance::new(name, waiting, customers, horizon, vehicles, capacity, travel, requests)
        .map_err(|e| ParseError::new(end, e.to_string()))
}

/// Serializes a solution with its context header.
pub fn write_solution(file: &SolutionFile) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "svrp-solution v1");
    let _ = writeln!(out, "instance {}", file.instance_name);
    let _ = writeln!(out, "strategy {}", file.strategy);
    let _ = writeln!(out, "scale {}", file.scale);
    let _ = writeln!(out, "cost {}", file.cost);
    let _ = writeln!(out, "seed {}", file.seed);
    let _ = writeln!(out, "waiting {}", file.solution.waits.len().saturating_sub(1));
    let _ = writeln!(out, "routes {}", file.solution.routes.len());
    for route in &file.solution.routes {
        let mut line = String::from("route");
        for &w in route {
            let _ = write!(line, " {}:{}", w, file.solution.waits[w]);
        }
        let _ = writeln!(out, "{line}");
    }
    out
}

/// Parses a solution file.
pub fn read_solution(text: &str) -> Result<SolutionFile, ParseError> {
    let mut lines = Lines::new(text);
    version_line(&mut lines, "svrp-solution")?;
    let (_, name) = lines.keyed("instance")?;
    let instance_name = name.to_string();
    let (_, strategy) = lines.keyed("strategy")?;
    let strategy = strategy.to_string();
    let (no, rest) = lines.keyed("scale")?;
    let scale: Time = parse(no, "scale", rest)?;
    let (no, rest) = lines.keyed("cost")?;
    let cost: f64 = parse(no, "cost", rest)?;
    let (no, rest) = lines.keyed("seed")?;
    let seed: u64 = parse(no, "seed", rest)?;
    let waiting = parse_count(&mut lines, "waiting")?;
    let route_count = parse_count(&mut lines, "routes")?;
    let mut waits: Vec<Time> = vec![0; waiting + 1];
    let mut routes = Vec::with_capacity(route_count);
    for _ in 0..route_count {
        let (no, line) = lines.expect("a route line")?;
        let (key, rest) = split_key(line);
        if key != "route" {
            return Err(ParseError::new(no, format!("expected `route ...`, got `{line}`")));
        }
        let mut route = Vec::new();
        for token in rest.split_whitespace() {
            let (v, t) = token
                .split_once(':')
                .ok_or_else(|| ParseError::new(no, format!("expected `vertex:wait`, got `{token}`")))?;
            let vertex: usize = parse(no, "waiting vertex", v)?;
            let wait: Time = parse(no, "waiting time", t)?;
            if vertex < 1 || vertex > waiting {
                return Err(ParseError::new(no, format!("waiting vertex {vertex} outside 1..={waiting}")));
            }
            if wait < 1 {
                return Err(ParseError::new(no, format!("waiting time at vertex {vertex} must be positive, got {wait}")));
            }
            if waits[vertex] != 0 {
                return Err(ParseError::new(no, format!("waiting vertex {vertex} appears twice")));
            }
            waits[vertex] = wait;
            route.push(vertex);
        }
        routes.push(route);
    }
    lines.done()?;
    Ok(SolutionFile {
        instance_name,
        strategy,
        scale,
        cost,
        seed,
        solution: FirstStageSolution { routes, waits },
    })
}

/// Serializes an address pool.
pub fn write_pool(pool: &AddressPool) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "svrp-pool v1");
    let _ = writeln!(out, "addresses {}", pool.size());
    if !pool.coords().is_empty() {
        let _ = writeln!(out, "coords {}", pool.coords().len());
        for &(x, y) in pool.coords() {
            let _ = writeln!(out, "{x} {y}");
        }
    }
    write_matrix(&mut out, pool.travel());
    out
}

/// Parses an address pool; the coordinate block is optional.
pub fn read_pool(text: &str) -> Result<AddressPool, ParseError> {
    let mut lines = Lines::new(text);
    version_line(&mut lines, "svrp-pool")?;
    let size = parse_count(&mut lines, "addresses")?;
    let (no, line) = lines.expect("`coords` or `matrix`")?;
    let (key, rest) = split_key(line);
    let mut coords = Vec::new();
    let matrix_size: usize = match key {
        "coords" => {
            let count: usize = parse(no, "coords count", rest)?;
            for _ in 0..count {
                let (no, line) = lines.expect("a coordinate pair")?;
                let fields: Vec<&str> = line.split_whitespace().collect();
                if fields.len() != 2 {
                    return Err(ParseError::new(no, format!("expected `x y`, got `{line}`")));
                }
                coords.push((parse(no, "x coordinate", fields[0])?, parse(no, "y coordinate", fields[1])?));
            }
            parse_count(&mut lines, "matrix")?
        }
        "matrix" => parse(no, "matrix size", rest)?,
        _ => return Err(ParseError::new(no, format!("expected `coords` or `matrix`, got `{line}`"))),
    };
    if matrix_size != size {
        return Err(ParseError::new(no, format!("matrix size {matrix_size} does not match addresses {size}")));
    }
    let travel = parse_matrix(&mut lines, size)?;
    let end = lines.pos;
    lines.done()?;
    AddressPool::new(travel, coords).map_err(|e| ParseError::new(end, e.to_string()))
}

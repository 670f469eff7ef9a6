//! Anticipatory vehicle routing under stochastic, time-windowed requests.
//!
//! Vehicles are routed through *waiting locations* before any request is
//! known; customer requests then appear at random over the day and an online
//! policy serves or rejects them without re-routing. This crate evaluates the
//! expected number of rejected requests of such a first-stage solution in
//! closed form, simulates the policies, optimizes solutions by simulated
//! annealing or exhaustive search, and generates benchmark instances.

pub mod assign;
pub mod bench;
pub mod expect;
pub mod model;
pub mod rng;
pub mod search;
pub mod simulate;

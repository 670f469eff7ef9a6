//! Scenario sampling, online policy execution, the myopic baseline,
//! Monte Carlo estimation, and the exhaustive expectation oracle.
//!
//! Everything here operates on concrete realizations (which requests
//! appeared), in contrast to `expect`, which computes the same expectations
//! analytically. The two agree scenario-for-scenario by construction; the
//! test suite enforces the aggregate equality to tight tolerances.

mod montecarlo;
mod oracle;
mod recourse;
mod scenario;
mod waitserve;

pub use montecarlo::{estimate_policy, monte_carlo_recourse, monte_carlo_wait_and_serve, McEstimate};
pub use oracle::{exhaustive_expected_cost, OracleReport, ORACLE_FREE_LIMIT};
pub use recourse::{
    rejected_count, run_recourse, sort_trace, EventKind, EventSink, NoTrace, RejectReason, SimOutcome,
    TraceEvent,
};
pub use scenario::sample_scenario;
pub use waitserve::{run_wait_and_serve, wait_and_serve_rejected};

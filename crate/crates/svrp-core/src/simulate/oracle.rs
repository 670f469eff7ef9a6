//! Exhaustive expectation by scenario enumeration.
//!
//! Enumerates every joint outcome of the uncertain requests, runs the online
//! policy on each, and weighs the results by the independence product. This
//! is the ground truth the closed-form evaluation is tested against: slow but
//! definitionally exact.

use crate::assign::EvalContext;
use crate::model::{DirectGate, Strategy, ValidationError};
use crate::simulate::recourse::{run_recourse, NoTrace};

/// Maximum number of uncertain requests (probability strictly between 0
/// and 1) the enumeration accepts; beyond this, 2^n scenarios are refused.
pub const ORACLE_FREE_LIMIT: usize = 20;

/// Exhaustive expectation result.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    /// Expected number of rejected requests.
    pub expected_rejected: f64,
    /// Per request, the probability that it appears and is accepted.
    pub accept_prob: Vec<f64>,
    /// Number of scenarios enumerated.
    pub scenarios: u64,
}

/// Computes the exact expected rejection count of `strategy` by enumerating
/// all scenarios. Requests with probability 0 or 1 are fixed rather than
/// enumerated. Fails when more than [`ORACLE_FREE_LIMIT`] requests are
/// uncertain.
pub fn exhaustive_expected_cost(
    ctx: &EvalContext,
    strategy: Strategy,
    gate: DirectGate,
) -> Result<OracleReport, ValidationError> {
    let requests = ctx.instance.requests();
    let free: Vec<usize> = requests
        .iter()
        .enumerate()
        .filter(|(_, r)| r.prob > 0.0 && r.prob < 1.0)
        .map(|(i, _)| i)
        .collect();
    if free.len() > ORACLE_FREE_LIMIT {
        return Err(ValidationError::new(format!(
            "exhaustive expectation refused: {} uncertain requests would need 2^{} scenarios (limit {})",
            free.len(),
            free.len(),
            ORACLE_FREE_LIMIT
        )));
    }
    let mut scenario: Vec<bool> = requests.iter().map(|r| r.prob >= 1.0).collect();
    let mut expected = 0.0;
    let mut accept_prob = vec![0.0; requests.len()];
    let count = 1u64 << free.len();
    for mask in 0..count {
        for (bit, &r) in free.iter().enumerate() {
            scenario[r] = mask & (1u64 << bit) != 0;
        }
        let weight = ctx.instance.scenario_probability(&scenario);
        if weight == 0.0 {
            continue;
        }
        let out = run_recourse(ctx, strategy, gate, &scenario, &mut NoTrace);
        expected += weight * out.rejected as f64;
        for (r, decision) in out.decisions.iter().enumerate() {
            if *decision == Some(true) {
                accept_prob[r] += weight;
            }
        }
    }
    Ok(OracleReport { expected_rejected: expected, accept_prob, scenarios: count })
}

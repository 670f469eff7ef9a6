//! Drawing request realizations.

use crate::model::Instance;
use crate::rng::SplitMix64;

/// Samples one scenario: request `r` appears independently with probability
/// `prob_r`. The result is written into `out` (one flag per request, in
/// canonical order), reusing its allocation.
pub fn sample_scenario(instance: &Instance, rng: &mut SplitMix64, out: &mut Vec<bool>) {
    out.clear();
    out.extend(instance.requests().iter().map(|r| rng.next_f64() < r.prob));
}

//! Monte Carlo estimation of expected rejection counts.
//!
//! Every sample index owns its private generator stream, so the estimate is
//! bit-identical for a given seed regardless of how samples are partitioned
//! across threads: threads accumulate integer sums, and integer addition is
//! associative.

use crate::assign::EvalContext;
use crate::model::{DirectGate, Instance, Strategy};
use crate::rng::SplitMix64;
use crate::simulate::recourse::rejected_count;
use crate::simulate::scenario::sample_scenario;
use crate::simulate::waitserve::wait_and_serve_rejected;

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: u64,
}

/// Estimates the expected per-scenario cost of an arbitrary policy.
/// `policy` maps a scenario to its rejection count; it is called once per
/// sample with a scenario drawn from stream `sample_index` of `seed`.
pub fn estimate_policy<F>(
    instance: &Instance,
    samples: u64,
    seed: u64,
    threads: usize,
    policy: F,
) -> McEstimate
where
    F: Fn(&[bool]) -> u64 + Sync,
{
    assert!(samples >= 1, "need at least one sample");
    let threads = threads.clamp(1, samples.min(1 << 16) as usize);
    let chunk = samples / threads as u64;
    let extra = samples % threads as u64;
    let mut totals: Vec<(u128, u128)> = Vec::with_capacity(threads);
    std::thread::scope(|scope| {
        let mut handles = Vec::with_capacity(threads);
        let mut start = 0u64;
        for t in 0..threads {
            let len = chunk + if (t as u64) < extra { 1 } else { 0 };
            let range = start..start + len;
            start += len;
            let policy = &policy;
            handles.push(scope.spawn(move || {
                let mut scenario = Vec::with_capacity(instance.requests().len());
                let mut sum = 0u128;
                let mut sum_sq = 0u128;
                for i in range {
                    let mut rng = SplitMix64::stream(seed, i);
                    sample_scenario(instance, &mut rng, &mut scenario);
                    let cost = policy(&scenario) as u128;
                    sum += cost;
                    sum_sq += cost * cost;
                }
                (sum, sum_sq)
            }));
        }
        for h in handles {
            totals.push(h.join().expect("sampling thread panicked"));
        }
    });
    let sum: u128 = totals.iter().map(|t| t.0).sum();
    let sum_sq: u128 = totals.iter().map(|t| t.1).sum();
    let n = samples as f64;
    let mean = sum as f64 / n;
    let std_err = if samples > 1 {
        let var = ((sum_sq as f64) - (sum as f64) * (sum as f64) / n) / (n - 1.0);
        (var.max(0.0) / n).sqrt()
    } else {
        0.0
    };
    McEstimate { mean, std_err, samples }
}

/// Monte Carlo estimate of the recourse strategy's expected rejection count.
pub fn monte_carlo_recourse(
    ctx: &EvalContext,
    strategy: Strategy,
    gate: DirectGate,
    samples: u64,
    seed: u64,
    threads: usize,
) -> McEstimate {
    estimate_policy(ctx.instance, samples, seed, threads, |scenario| {
        rejected_count(ctx, strategy, gate, scenario)
    })
}

/// Monte Carlo estimate of the wait-and-serve baseline.
pub fn monte_carlo_wait_and_serve(
    instance: &Instance,
    samples: u64,
    seed: u64,
    threads: usize,
) -> McEstimate {
    estimate_policy(instance, samples, seed, threads, |scenario| {
        wait_and_serve_rejected(instance, scenario)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Capacity, FirstStageSolution, Instance, PotentialRequest, TravelMatrix};

    fn instance(probs: &[f64]) -> Instance {
        let requests = probs
            .iter()
            .enumerate()
            .map(|(i, &p)| PotentialRequest {
                customer: 2,
                reveal: (i + 1) as i64,
                demand: 0,
                service: 0,
                earliest: (i + 1) as i64,
                latest: 1 + i as i64, // window of one slot: mostly unservable
                prob: p,
            })
            .collect();
        Instance::new(
            "t",
            1,
            1,
            40,
            1,
            Capacity::Unbounded,
            TravelMatrix::from_fn(3, |_, _| 2).unwrap(),
            requests,
        )
        .unwrap()
    }

    #[test]
    fn zero_probability_means_zero_cost() {
        let inst = instance(&[0.0, 0.0]);
        let sol = FirstStageSolution { routes: vec![vec![1]], waits: vec![0, 10] };
        let ctx = EvalContext::new(&inst, &sol).unwrap();
        let est = monte_carlo_recourse(&ctx, Strategy::RInf, DirectGate::default(), 1000, 1, 2);
        assert_eq!(est.mean, 0.0);
        assert_eq!(est.std_err, 0.0);
    }

    #[test]
    fn thread_count_does_not_change_the_estimate() {
        let inst = instance(&[0.5, 0.7, 0.2]);
        let sol = FirstStageSolution { routes: vec![vec![1]], waits: vec![0, 10] };
        let ctx = EvalContext::new(&inst, &sol).unwrap();
        let one = monte_carlo_recourse(&ctx, Strategy::RQ, DirectGate::default(), 5000, 99, 1);
        let four = monte_carlo_recourse(&ctx, Strategy::RQ, DirectGate::default(), 5000, 99, 4);
        assert_eq!(one, four);
        assert!(one.mean > 0.0);
    }

    #[test]
    fn estimate_tracks_the_analytic_mean() {
        // All requests unservable: cost is the count of appearing requests,
        // expectation 0.5 + 0.7 + 0.2 = 1.4.
        let inst = instance(&[0.5, 0.7, 0.2]);
        let sol = FirstStageSolution { routes: vec![vec![1]], waits: vec![0, 10] };
        let ctx = EvalContext::new(&inst, &sol).unwrap();
        let est = monte_carlo_recourse(&ctx, Strategy::RQ, DirectGate::default(), 100_000, 3, 4);
        assert!(
            (est.mean - 1.4).abs() <= 4.0 * est.std_err,
            "mean {} stderr {}",
            est.mean,
            est.std_err
        );
        let ws = monte_carlo_wait_and_serve(&inst, 10_000, 5, 3);
        assert!(ws.mean <= 1.4 + 4.0 * 0.02, "baseline can only help: {}", ws.mean);
    }
}

//! Waiting-vertex placement by clustering the address pool.
//!
//! Lloyd-style iterations with medoid centers on the symmetrized travel
//! time: assign every candidate to its nearest medoid, then recenter each
//! cluster on the member whose summed distance to the other members is
//! minimal (the "median" address). All comparisons are on integer sums, so
//! the procedure is exactly deterministic. A cluster left empty by an
//! assignment round is reseeded with the candidate farthest from its own
//! medoid. Iterations are capped; the medoid set is sorted before returning.

use crate::bench::pool::AddressPool;
use crate::rng::SplitMix64;

const MAX_ROUNDS: usize = 100;

/// Picks `m` waiting addresses among `candidates` (pool indices) by k-means
/// with medoid centers. Deterministic in `seed`.
pub fn kmeans_waiting_vertices(
    pool: &AddressPool,
    candidates: &[usize],
    m: usize,
    seed: u64,
) -> Vec<usize> {
    assert!(m >= 1, "need at least one cluster");
    assert!(m <= candidates.len(), "cannot place {m} medoids among {} candidates", candidates.len());
    let mut rng = SplitMix64::new(seed);
    let mut shuffled = candidates.to_vec();
    rng.shuffle(&mut shuffled);
    let mut medoids: Vec<usize> = shuffled[..m].to_vec();
    let mut assignment = vec![0usize; candidates.len()];
    for _ in 0..MAX_ROUNDS {
        // Assignment: nearest medoid, ties to the lowest cluster index.
        for (slot, &p) in candidates.iter().enumerate() {
            let mut best = 0;
            let mut best_d = pool.symmetric(p, medoids[0]);
            for (c, &med) in medoids.iter().enumerate().skip(1) {
                let d = pool.symmetric(p, med);
                if d < best_d {
                    best = c;
                    best_d = d;
                }
            }
            assignment[slot] = best;
        }
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (slot, &c) in assignment.iter().enumerate() {
            members[c].push(candidates[slot]);
        }
        // Reseed empty clusters from the candidate farthest from its medoid.
        let empty: Vec<usize> = (0..m).filter(|&c| members[c].is_empty()).collect();
        if !empty.is_empty() {
            for c in empty {
                let mut farthest: Option<(i64, usize)> = None;
                for (slot, &p) in candidates.iter().enumerate() {
                    if medoids.contains(&p) {
                        continue;
                    }
                    let d = pool.symmetric(p, medoids[assignment[slot]]);
                    if farthest.map_or(true, |(fd, _)| d > fd) {
                        farthest = Some((d, p));
                    }
                }
                match farthest {
                    Some((_, p)) => medoids[c] = p,
                    // Fewer non-medoid candidates than empty clusters can
                    // only happen with duplicate medoids; keep the old one.
                    None => {}
                }
            }
            continue;
        }
        // Recenter: per cluster, the member with minimal summed distance.
        let mut next = Vec::with_capacity(m);
        for cluster in &members {
            let mut best = cluster[0];
            let mut best_sum = i64::MAX;
            for &p in cluster {
                let sum: i64 = cluster.iter().map(|&q| pool.symmetric(p, q)).sum();
                if sum < best_sum {
                    best = p;
                    best_sum = sum;
                }
            }
            next.push(best);
        }
        if next == medoids {
            break;
        }
        medoids = next;
    }
    medoids.sort_unstable();
    medoids
}

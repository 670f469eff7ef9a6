//! Address pools: the location universe benchmark instances draw from.
//!
//! A pool is a set of addresses with a full asymmetric integer travel-time
//! matrix, optionally carrying planar coordinates (synthetic pools do;
//! imported matrices need not). The synthetic generator scatters addresses
//! uniformly in a square and derives travel times from straight-line
//! distance inflated by a road detour factor and an independent ±20%
//! directional noise, which makes the matrix asymmetric like measured road
//! networks.

use crate::model::{Time, TravelMatrix, ValidationError};
use crate::rng::SplitMix64;

/// Default pool size.
pub const DEFAULT_POOL_SIZE: usize = 255;

/// Side of the square addresses are scattered in, in travel minutes.
const SQUARE_SIDE: f64 = 30.0;
/// Road-network detour factor over the straight line.
const DETOUR_FACTOR: f64 = 1.3;
/// Directional noise amplitude (each ordered pair gets its own factor in
/// `1 ± this`).
const NOISE: f64 = 0.2;

/// A set of candidate addresses with pairwise travel times.
#[derive(Debug, Clone, PartialEq)]
pub struct AddressPool {
    travel: TravelMatrix,
    /// One (x, y) per address for synthetic pools; empty for imported ones.
    coords: Vec<(f64, f64)>,
}

impl AddressPool {
    /// Wraps an externally supplied travel matrix, with optional
    /// coordinates (either one per address or none at all).
    pub fn new(travel: TravelMatrix, coords: Vec<(f64, f64)>) -> Result<AddressPool, ValidationError> {
        if !coords.is_empty() && coords.len() != travel.size() {
            return Err(ValidationError::new(format!(
                "pool has {} addresses but {} coordinate pairs",
                travel.size(),
                coords.len()
            )));
        }
        Ok(AddressPool { travel, coords })
    }

    pub fn size(&self) -> usize {
        self.travel.size()
    }

    pub fn travel(&self) -> &TravelMatrix {
        &self.travel
    }

    pub fn coords(&self) -> &[(f64, f64)] {
        &self.coords
    }

    /// Travel time between two addresses symmetrized by taking the cheaper
    /// direction; the clustering distance.
    pub fn symmetric(&self, i: usize, j: usize) -> Time {
        self.travel.at(i, j).min(self.travel.at(j, i))
    }
}

/// Generates a synthetic pool of `size` addresses. Deterministic in `seed`.
pub fn synthetic_pool(size: usize, seed: u64) -> AddressPool {
    assert!(size >= 1, "a pool needs at least one address");
    let mut rng = SplitMix64::new(seed);
    let coords: Vec<(f64, f64)> = (0..size)
        .map(|_| (rng.next_f64() * SQUARE_SIDE, rng.next_f64() * SQUARE_SIDE))
        .collect();
    let mut entries = vec![0; size * size];
    for i in 0..size {
        for j in 0..size {
            if i == j {
                continue;
            }
            let (xi, yi) = coords[i];
            let (xj, yj) = coords[j];
            let line = ((xi - xj).powi(2) + (yi - yj).powi(2)).sqrt();
            let noise = 1.0 + NOISE * (2.0 * rng.next_f64() - 1.0);
            entries[i * size + j] = ((line * DETOUR_FACTOR * noise).round() as Time).max(1);
        }
    }
    let travel = TravelMatrix::new(size, entries).expect("synthetic times are nonnegative");
    AddressPool { travel, coords }
}

//! Deterministic sampling of base points and admissible directions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::finsler::FinslerLagrangian;
use crate::geometry::{Point, TangentVector};

/// Axis-aligned coordinate box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Domain {
    pub min: [f64; 4],
    pub max: [f64; 4],
}

impl Domain {
    pub fn contains(&self, x: &Point) -> bool {
        (0..4).all(|i| x.coords[i] >= self.min[i] && x.coords[i] <= self.max[i])
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Point {
        Point::new(std::array::from_fn(|i| {
            if self.max[i] > self.min[i] {
                rng.random_range(self.min[i]..self.max[i])
            } else {
                self.min[i]
            }
        }))
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn points<R: Rng>(domain: &Domain, n: usize, rng: &mut R) -> Vec<Point> {
    (0..n).map(|_| domain.sample(rng)).collect()
}

pub fn gaussian_vector<R: Rng>(rng: &mut R) -> TangentVector {
    TangentVector::new(std::array::from_fn(|_| rng.sample(StandardNormal)))
}

/// `n` admissible (x, v) pairs, drawing at most `50 n` candidates.
pub fn admissible_pairs<L: FinslerLagrangian, R: Rng>(
    l: &L,
    domain: &Domain,
    n: usize,
    rng: &mut R,
) -> Vec<(Point, TangentVector)> {
    let mut out = Vec::with_capacity(n);
    let mut tries = 0;
    while out.len() < n && tries < 50 * n.max(1) {
        tries += 1;
        let x = domain.sample(rng);
        let v = gaussian_vector(rng);
        if l.admissible(&x, &v) {
            out.push((x, v));
        }
    }
    out
}

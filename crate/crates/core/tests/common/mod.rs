#![allow(dead_code)]

pub mod invariants;

use finsler_metrize::catalog::{MetricSpec, OneFormSpec, Profile};
use finsler_metrize::connection::{NonmetricityCoefficients, VectorialConnection};
use finsler_metrize::geometry::Point;
use finsler_metrize::sampling::{points, rng, Domain};

pub type Conn = VectorialConnection<MetricSpec, OneFormSpec>;

pub fn conn(metric: MetricSpec, oneform: OneFormSpec, c: (f64, f64, f64)) -> Conn {
    VectorialConnection::new(metric, oneform, NonmetricityCoefficients::new(c.0, c.1, c.2).unwrap())
}

pub fn weyl_null() -> Conn {
    conn(MetricSpec::Minkowski, OneFormSpec::Constant { components: [1.0, 1.0, 0.0, 0.0] }, (2.0, 0.0, 0.0))
}

/// u = dx⁰, |b| = e^{x⁰}
pub fn translational() -> Conn {
    conn(
        MetricSpec::Euclidean,
        OneFormSpec::ExactExponential { profile: Profile::Exp { scale: 1.0, rate: 1.0 } },
        (0.0, 0.0, 1.0),
    )
}

/// u = dr, |b| = 1/r
pub fn schrodinger_radial() -> Conn {
    conn(
        MetricSpec::Euclidean,
        OneFormSpec::Radial { profile: Profile::Power { scale: 1.0, exponent: -1.0 } },
        (-2.0, 1.0, 0.0),
    )
}

pub fn negative_control() -> Conn {
    conn(MetricSpec::Euclidean, OneFormSpec::Constant { components: [1.0, 0.0, 0.0, 0.0] }, (2.0, 0.0, 0.0))
}

pub fn unit_box() -> Domain {
    Domain { min: [-1.0; 4], max: [1.0; 4] }
}

pub fn translational_box() -> Domain {
    Domain { min: [-1.0, -1.0, -1.0, -1.0], max: [0.5, 1.0, 1.0, 1.0] }
}

pub fn radial_box() -> Domain {
    Domain { min: [0.5; 4], max: [1.5; 4] }
}

pub fn sample(domain: &Domain, n: usize, seed: u64) -> Vec<Point> {
    points(domain, n, &mut rng(seed))
}

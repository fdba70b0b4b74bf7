//! Built-in metric and one-form families used by configs and fixtures.

use serde::{Deserialize, Serialize};

use crate::autodiff::Real;
use crate::geometry::{MetricField, OneFormField};
use crate::linalg::{Mat4, Vec4};

/// A scalar function of one variable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Profile {
    /// scale · e^{rate·t}
    Exp { scale: f64, rate: f64 },
    /// Σ c_k t^k
    Poly { coefficients: Vec<f64> },
    /// scale · t^exponent
    Power { scale: f64, exponent: f64 },
}

impl Profile {
    pub fn eval<S: Real>(&self, t: S) -> S {
        match self {
            Profile::Exp { scale, rate } => (t * *rate).exp() * *scale,
            Profile::Poly { coefficients } => {
                let mut acc = S::zero();
                for c in coefficients.iter().rev() {
                    acc = acc * t + *c;
                }
                acc
            }
            Profile::Power { scale, exponent } => power(t, *exponent) * *scale,
        }
    }
}

fn power<S: Real>(t: S, e: f64) -> S {
    if e.fract() == 0.0 && e.abs() < 64.0 {
        t.powi(e as i32)
    } else {
        t.powf(e)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagEntry {
    pub coefficient: f64,
    pub axis: usize,
    pub power: f64,
}

impl DiagEntry {
    pub fn constant(c: f64) -> Self {
        Self { coefficient: c, axis: 0, power: 0.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlatBase {
    Minkowski,
    Euclidean,
}

impl FlatBase {
    fn sign(&self, i: usize) -> f64 {
        match self {
            FlatBase::Minkowski if i == 0 => -1.0,
            _ => 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MetricSpec {
    Euclidean,
    /// diag(−1, 1, 1, 1)
    Minkowski,
    /// a_kk = coefficient · (x^axis)^power
    DiagPower {
        entries: [DiagEntry; 4],
    },
    /// e^{2 f(x⁰)} · η
    ConformalFlat {
        base: FlatBase,
        f: Profile,
    },
}

impl MetricSpec {
    pub const FAMILIES: [&'static str; 4] = ["euclidean", "minkowski", "diag-power", "conformal-flat"];

    pub fn describe(&self) -> String {
        match self {
            MetricSpec::Euclidean => "euclidean".into(),
            MetricSpec::Minkowski => "minkowski".into(),
            MetricSpec::DiagPower { .. } => "diag-power".into(),
            MetricSpec::ConformalFlat { .. } => "conformal-flat".into(),
        }
    }
}

impl MetricField for MetricSpec {
    fn components<S: Real>(&self, x: &Vec4<S>) -> Mat4<S> {
        let mut m = [[S::zero(); 4]; 4];
        match self {
            MetricSpec::Euclidean => (0..4).for_each(|i| m[i][i] = S::one()),
            MetricSpec::Minkowski => (0..4).for_each(|i| m[i][i] = S::from_f64(FlatBase::Minkowski.sign(i))),
            MetricSpec::DiagPower { entries } => {
                for (i, e) in entries.iter().enumerate() {
                    m[i][i] = if e.power == 0.0 {
                        S::from_f64(e.coefficient)
                    } else {
                        power(x[e.axis], e.power) * e.coefficient
                    };
                }
            }
            MetricSpec::ConformalFlat { base, f } => {
                let w = (f.eval(x[0]) * 2.0).exp();
                (0..4).for_each(|i| m[i][i] = w * base.sign(i));
            }
        }
        m
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OneFormSpec {
    Constant {
        components: [f64; 4],
    },
    /// h(x⁰) dx⁰
    ExactExponential {
        profile: Profile,
    },
    /// h(r) dr with r the Euclidean radius in all four coordinates
    Radial {
        profile: Profile,
    },
}

impl OneFormSpec {
    pub const FAMILIES: [&'static str; 3] = ["constant", "exact-exponential", "radial"];
}

impl OneFormField for OneFormSpec {
    fn components<S: Real>(&self, x: &Vec4<S>) -> Vec4<S> {
        match self {
            OneFormSpec::Constant { components } => components.map(S::from_f64),
            OneFormSpec::ExactExponential { profile } => {
                let mut b = [S::zero(); 4];
                b[0] = profile.eval(x[0]);
                b
            }
            OneFormSpec::Radial { profile } => {
                let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3]).sqrt();
                let h = profile.eval(r) / r;
                std::array::from_fn(|i| h * x[i])
            }
        }
    }
}

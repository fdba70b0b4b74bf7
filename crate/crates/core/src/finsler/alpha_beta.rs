use serde::{Deserialize, Serialize};

use super::{Cone, FinslerLagrangian, Margins};
use crate::autodiff::Real;
use crate::geometry::{MetricField, OneFormField, Point, TangentVector};
use crate::linalg::{dot, norm, quad, Vec4};

/// L = a_{μν}(x) v^μ v^ν
#[derive(Clone, Debug)]
pub struct QuadraticLagrangian<M> {
    pub metric: M,
    pub cone: Cone,
}

impl<M: MetricField> QuadraticLagrangian<M> {
    pub fn new(metric: M, cone: Cone) -> Self {
        Self { metric, cone }
    }
}

impl<M: MetricField> FinslerLagrangian for QuadraticLagrangian<M> {
    fn eval<S: Real>(&self, x: &Vec4<S>, v: &Vec4<S>) -> S {
        quad(&self.metric.components(x), v, v)
    }

    fn admissible(&self, x: &Point, v: &TangentVector) -> bool {
        let a = quad(&self.metric.components(&x.coords), &v.components, &v.components);
        match self.cone {
            Cone::Any => norm(&v.components) > 0.0,
            c => c.allows(a),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "kebab-case")]
pub enum AlphaBetaCase {
    /// Φ = s^λ
    PowerLaw { lambda: f64 },
    /// Φ = s^m (s + τ)^{1−m}, m = c1/(τ c3)
    MKropina { c1: f64, c3: f64, tau: f64 },
    /// Φ = τ + s
    Riemannian { tau: f64 },
    /// Φ = s e^{−c1/(c3 s)}
    Exponential { c1: f64, c3: f64 },
}

/// L = κ A Φ(s), s = B²/A.
#[derive(Clone, Debug)]
pub struct AlphaBetaMetric<M, B> {
    pub metric: M,
    pub oneform: B,
    pub kappa: f64,
    pub case: AlphaBetaCase,
    pub cone: Cone,
    pub margins: Margins,
}

fn is_int(e: f64) -> bool {
    e.fract() == 0.0 && e.abs() < 64.0
}

fn pow<S: Real>(t: S, e: f64) -> S {
    if is_int(e) {
        t.powi(e as i32)
    } else {
        t.powf(e)
    }
}

impl<M: MetricField, B: OneFormField> AlphaBetaMetric<M, B> {
    /// κ Φ(s)
    pub fn phi<S: Real>(&self, s: S) -> S {
        let p = match self.case {
            AlphaBetaCase::PowerLaw { lambda } => pow(s, lambda),
            AlphaBetaCase::MKropina { c1, c3, tau } => {
                let m = c1 / (tau * c3);
                pow(s, m) * pow(s + tau, 1.0 - m)
            }
            AlphaBetaCase::Riemannian { tau } => s + tau,
            AlphaBetaCase::Exponential { c1, c3 } => s * (s.recip() * (-c1 / c3)).exp(),
        };
        p * self.kappa
    }

    pub fn formula(&self) -> String {
        let k = self.kappa;
        match self.case {
            AlphaBetaCase::PowerLaw { lambda } => format!("L = {k} A s^({lambda}), s = B^2/A"),
            AlphaBetaCase::MKropina { c1, c3, tau } => {
                let m = c1 / (tau * c3);
                format!("L = {k} A s^({m}) (s + {tau})^({}), s = B^2/A", 1.0 - m)
            }
            AlphaBetaCase::Riemannian { tau } => format!("L = {k} ({tau} A + B^2)"),
            AlphaBetaCase::Exponential { c1, c3 } => {
                format!("L = {k} B^2 exp(-({}) A/B^2)", c1 / c3)
            }
        }
    }

    /// (A, B, s) at a point, without derivatives.
    pub fn invariants(&self, x: &Point, v: &TangentVector) -> (f64, f64, f64) {
        let a = quad(&self.metric.components(&x.coords), &v.components, &v.components);
        let b = dot(&self.oneform.components(&x.coords), &v.components);
        (a, b, b * b / a)
    }

    fn needs_nonzero_b(&self) -> bool {
        match self.case {
            AlphaBetaCase::PowerLaw { lambda } => lambda < 0.0 || !is_int(lambda),
            AlphaBetaCase::Riemannian { .. } => false,
            _ => true,
        }
    }
}

impl<M: MetricField, B: OneFormField> FinslerLagrangian for AlphaBetaMetric<M, B> {
    fn eval<S: Real>(&self, x: &Vec4<S>, v: &Vec4<S>) -> S {
        let a = quad(&self.metric.components(x), v, v);
        let b = dot(&self.oneform.components(x), v);
        let s = b * b / a;
        a * self.phi(s)
    }

    fn admissible(&self, x: &Point, v: &TangentVector) -> bool {
        let nv = norm(&v.components);
        let bx = self.oneform.components(&x.coords);
        let (a, b, s) = self.invariants(x, v);
        if !self.cone.allows(a) || a.abs() <= self.margins.delta_a * nv * nv {
            return false;
        }
        if self.needs_nonzero_b() && b.abs() <= self.margins.delta_b * nv * norm(&bx) {
            return false;
        }
        let ok = match self.case {
            AlphaBetaCase::PowerLaw { lambda } => is_int(lambda) || s > 0.0,
            AlphaBetaCase::MKropina { c1, c3, tau } => {
                let m = c1 / (tau * c3);
                let t = s + tau;
                (is_int(m) || s > 0.0)
                    && t.abs() > self.margins.delta_a * (1.0 + tau.abs())
                    && (is_int(1.0 - m) || t > 0.0)
            }
            _ => true,
        };
        ok && self.phi(s).is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{MetricSpec, OneFormSpec};

    #[test]
    fn power_law_minus_one_is_a_squared_over_b_squared() {
        let l = AlphaBetaMetric {
            metric: MetricSpec::Minkowski,
            oneform: OneFormSpec::Constant { components: [1.0, 1.0, 0.0, 0.0] },
            kappa: 1.0,
            case: AlphaBetaCase::PowerLaw { lambda: -1.0 },
            cone: Cone::Any,
            margins: Margins::default(),
        };
        let v = [0.3, 1.1, -0.4, 0.2];
        let a: f64 = -0.09 + 1.21 + 0.16 + 0.04;
        let b: f64 = 1.4;
        let val = l.eval(&[0.0; 4], &v);
        assert!((val - a * a / (b * b)).abs() < 1e-14);
    }

    #[test]
    fn exponential_case_closed_form() {
        let l = AlphaBetaMetric {
            metric: MetricSpec::Euclidean,
            oneform: OneFormSpec::Constant { components: [1.0, 0.0, 0.0, 0.0] },
            kappa: 1.0,
            case: AlphaBetaCase::Exponential { c1: 1.0, c3: 2.0 },
            cone: Cone::Any,
            margins: Margins::default(),
        };
        let v = [0.5, 1.0, 0.0, 0.0];
        let expect = 0.25 * (-(1.25f64) / (2.0 * 0.25)).exp();
        assert!((l.eval(&[0.0; 4], &v) - expect).abs() < 1e-15);
    }

    #[test]
    fn kropina_admissibility_excludes_b_zero() {
        let l = AlphaBetaMetric {
            metric: MetricSpec::Euclidean,
            oneform: OneFormSpec::Constant { components: [1.0, 0.0, 0.0, 0.0] },
            kappa: 1.0,
            case: AlphaBetaCase::PowerLaw { lambda: -1.0 },
            cone: Cone::Any,
            margins: Margins::default(),
        };
        let x = Point::new([0.0; 4]);
        assert!(!l.admissible(&x, &TangentVector::new([0.0, 1.0, 0.0, 0.0])));
        assert!(l.admissible(&x, &TangentVector::new([0.1, 1.0, 0.0, 0.0])));
    }
}

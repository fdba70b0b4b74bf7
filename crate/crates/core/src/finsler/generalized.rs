use serde::{Deserialize, Serialize};

use super::{Cone, FinslerLagrangian, Margins};
use crate::autodiff::Real;
use crate::geometry::{inverse_metric_generic, MetricField, OneFormField, Point, TangentVector};
use crate::linalg::{dot, norm, quad, Vec4};
use crate::profile::ProfileIntegral;

/// The free function F of case (i).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FreeFunction {
    /// F(z) = f0 + f1 z
    Affine { f0: f64, f1: f64 },
    /// F(z) = scale e^{rate z}
    Exp { scale: f64, rate: f64 },
}

impl FreeFunction {
    pub fn describe(&self) -> String {
        match self {
            FreeFunction::Affine { f0, f1 } => format!("F(z) = {f0} + {f1} z"),
            FreeFunction::Exp { scale, rate } => format!("F(z) = {scale} exp({rate} z)"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case")]
pub enum GeneralizedCase {
    #[serde(rename = "i")]
    CaseI { c3: f64, f: FreeFunction },
    #[serde(rename = "ii-a")]
    CaseIIa {
        c1: f64,
        #[serde(rename = "C1")]
        big_c1: f64,
        #[serde(rename = "C2")]
        big_c2: f64,
    },
    #[serde(rename = "ii-b")]
    CaseIIb {
        c1: f64,
        c2: f64,
        #[serde(rename = "C3")]
        big_c3: f64,
    },
    #[serde(rename = "ii-c")]
    CaseIIc {
        c2: f64,
        #[serde(rename = "C1")]
        big_c1: f64,
        #[serde(rename = "C4")]
        big_c4: f64,
    },
}

impl GeneralizedCase {
    pub fn tag(&self) -> &'static str {
        match self {
            GeneralizedCase::CaseI { .. } => "i",
            GeneralizedCase::CaseIIa { .. } => "ii-a",
            GeneralizedCase::CaseIIb { .. } => "ii-b",
            GeneralizedCase::CaseIIc { .. } => "ii-c",
        }
    }
}

/// L = κ A Φ(|b|, p), p = U²/A, U = u·v, b = |b| u.
#[derive(Clone, Debug)]
pub struct GeneralizedAlphaBetaMetric<M, B> {
    pub metric: M,
    pub oneform: B,
    /// sign ⟨u, u⟩
    pub epsilon: f64,
    pub kappa: f64,
    pub case: GeneralizedCase,
    /// ρ(|b|) = ∫ |b|/λ d|b|
    pub rho: ProfileIntegral,
    /// ∫ |b|³/λ d|b|, used by case (i)
    pub cubic: ProfileIntegral,
    pub cone: Cone,
    pub margins: Margins,
    /// Points with |b| below this are inadmissible.
    pub min_norm: f64,
}

/// Scalars entering a generalized (α,β) metric at one (x, v).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneralizedScalars<S> {
    pub a: S,
    pub u_dot_v: S,
    pub norm_b: S,
    pub p: S,
    /// ⟨b, b⟩
    pub bb: S,
    pub u: Vec4<S>,
}

impl<M: MetricField, B: OneFormField> GeneralizedAlphaBetaMetric<M, B> {
    pub fn scalars<S: Real>(&self, x: &Vec4<S>, v: &Vec4<S>) -> Option<GeneralizedScalars<S>> {
        let g = self.metric.components(x);
        let ginv = inverse_metric_generic(&g)?;
        let b = self.oneform.components(x);
        let bb = quad(&ginv, &b, &b);
        let norm_b = bb.abs().sqrt();
        let inv = norm_b.recip();
        let u: Vec4<S> = std::array::from_fn(|i| b[i] * inv);
        let a = quad(&g, v, v);
        let uv = dot(&u, v);
        Some(GeneralizedScalars { a, u_dot_v: uv, norm_b, p: uv * uv / a, bb, u })
    }

    /// κ Φ(|b|, p)
    pub fn phi<S: Real>(&self, nb: S, p: S) -> S {
        let eps = self.epsilon;
        let phi = match self.case {
            GeneralizedCase::CaseI { c3, f } => {
                let g = self.cubic.eval(nb) * (c3 * eps);
                match f {
                    FreeFunction::Affine { f0, f1 } => p * g.exp() * (f0 / eps) + (-p + eps) * f1,
                    FreeFunction::Exp { scale, rate } => {
                        let z = (-g).exp() * (-p + eps) / (p * eps);
                        p * g.exp() * (z * rate).exp() * (scale / eps)
                    }
                }
            }
            GeneralizedCase::CaseIIa { c1, big_c1, big_c2 } => {
                let r = self.rho.eval(nb);
                let e = (r * c1).exp();
                let pre = -(e * (0.5 * big_c1)) + eps / c1;
                let inner = p * (c1 * eps) + (r * (-2.0 * c1) + big_c2) / (e * big_c1 - 2.0 * eps / c1);
                (pre * inner).exp()
            }
            GeneralizedCase::CaseIIb { c1, c2, big_c3 } => {
                let r = self.rho.eval(nb);
                let brace = p * p * c2 + p * (eps * (c1 - 2.0 * c2)) + r * (eps * c1 * c1) + big_c3;
                (brace * (eps / c1)).exp()
            }
            GeneralizedCase::CaseIIc { c2, big_c1, big_c4 } => {
                let r = self.rho.eval(nb);
                let k = -((r * (4.0 * c2)).exp() * (0.5 * big_c1 * c2)) + 0.5 * eps;
                (k * p * p + r * (2.0 * c2) - 0.5 * big_c4).exp()
            }
        };
        phi * self.kappa
    }

    pub fn formula(&self) -> String {
        let k = self.kappa;
        let eps = self.epsilon;
        let head = format!("L = {k} A Phi(|b|, p), p = U^2/A, eps = {eps}");
        let body = match self.case {
            GeneralizedCase::CaseI { c3, f } => match f {
                FreeFunction::Affine { f0, f1 } => format!(
                    "Phi = {} p e^G + {f1} (eps - p), G = {} * int |b|^3/lambda d|b| (anchor {})",
                    f0 / eps,
                    c3 * eps,
                    self.cubic.anchor
                ),
                other => format!(
                    "Phi = (p/eps) e^G F(e^-G (eps - p)/(p eps)), {}, G = {} * int |b|^3/lambda d|b|",
                    other.describe(),
                    c3 * eps
                ),
            },
            GeneralizedCase::CaseIIa { c1, big_c1, big_c2 } => format!(
                "Phi = exp((eps/{c1} - {big_c1}/2 e^({c1} rho)) ({c1} eps p + ({big_c2} - 2*{c1} rho)/({big_c1} e^({c1} rho) - 2 eps/{c1})))"
            ),
            GeneralizedCase::CaseIIb { c1, c2, big_c3 } => format!(
                "Phi = exp((eps/{c1}) ({c2} p^2 + eps ({}) p + {big_c3} + eps {} rho))",
                c1 - 2.0 * c2,
                c1 * c1
            ),
            GeneralizedCase::CaseIIc { c2, big_c1, big_c4 } => format!(
                "Phi = exp((eps/2 - {big_c1} {c2}/2 e^({} rho)) p^2 + {} rho - {big_c4}/2)",
                4.0 * c2,
                2.0 * c2
            ),
        };
        format!("{head}; {body}; rho = int |b|/lambda d|b| (anchor {})", self.rho.anchor)
    }
}

impl<M: MetricField, B: OneFormField> FinslerLagrangian for GeneralizedAlphaBetaMetric<M, B> {
    fn eval<S: Real>(&self, x: &Vec4<S>, v: &Vec4<S>) -> S {
        match self.scalars(x, v) {
            Some(s) => s.a * self.phi(s.norm_b, s.p),
            None => S::from_f64(f64::NAN),
        }
    }

    fn admissible(&self, x: &Point, v: &TangentVector) -> bool {
        let Some(s) = self.scalars(&x.coords, &v.components) else { return false };
        let nv = norm(&v.components);
        if !self.cone.allows(s.a) || s.a.abs() <= self.margins.delta_a * nv * nv {
            return false;
        }
        if s.norm_b < self.min_norm || s.bb.signum() != self.epsilon {
            return false;
        }
        if let GeneralizedCase::CaseI { f: FreeFunction::Exp { .. }, .. } = self.case {
            if s.u_dot_v.abs() <= self.margins.delta_b * nv {
                return false;
            }
        }
        self.phi(s.norm_b, s.p).is_finite()
    }
}

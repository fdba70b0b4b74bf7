//! Lagrangians built from satisfied fits.

use serde::{Deserialize, Serialize};

use super::fit::{ConstraintFit, FitBranch};
use super::MetrizabilityOptions;
use crate::autodiff::Real;
use crate::connection::VectorialConnection;
use crate::error::{Error, Result};
use crate::finsler::{
    nondegeneracy_scan, AlphaBetaCase, AlphaBetaMetric, Cone, FinslerLagrangian, GeneralizedAlphaBetaMetric,
    GeneralizedCase, QuadraticLagrangian,
};
use crate::geometry::{MetricField, OneFormField, Point, TangentVector};
use crate::linalg::Vec4;
use crate::profile::ProfileIntegral;
use crate::sampling::{admissible_pairs, rng};

/// Integration constants of the generalized cases; C1 itself is fitted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConstants {
    #[serde(rename = "C2", default)]
    pub big_c2: f64,
    #[serde(rename = "C3", default)]
    pub big_c3: f64,
    #[serde(rename = "C4", default)]
    pub big_c4: f64,
}

fn require_satisfied(fit: &ConstraintFit) -> Result<()> {
    if fit.is_satisfied() {
        Ok(())
    } else {
        Err(Error::FitNotSatisfied(fit.reason.clone().unwrap_or_else(|| "violated".into())))
    }
}

pub fn construct_theorem1<M: MetricField + Clone, B: OneFormField + Clone>(
    conn: &VectorialConnection<M, B>,
    fit: &ConstraintFit,
    kappa: f64,
    opts: &MetrizabilityOptions,
) -> Result<AlphaBetaMetric<M, B>> {
    require_satisfied(fit)?;
    if kappa == 0.0 || !kappa.is_finite() {
        return Err(Error::Config(vec!["kappa: must be finite and nonzero".into()]));
    }
    let c = conn.coeffs;
    let case = match fit.branch {
        FitBranch::Theorem1Case1 => {
            AlphaBetaCase::PowerLaw { lambda: fit.lambda.ok_or_else(|| Error::NoSubcase("λ undefined".into()))? }
        }
        FitBranch::Theorem1Case2 => {
            let tau = fit.tau.unwrap_or(0.0);
            match fit.subcase.as_deref() {
                Some("i") => AlphaBetaCase::MKropina { c1: c.c1, c3: c.c3, tau },
                Some("ii") => AlphaBetaCase::Riemannian { tau },
                Some("iii") => AlphaBetaCase::Exponential { c1: c.c1, c3: c.c3 },
                _ => return Err(Error::NoSubcase("c1 = 0 and τ = 0".into())),
            }
        }
        FitBranch::Theorem2 => return Err(Error::FitNotSatisfied("not an (α,β) fit".into())),
    };
    Ok(AlphaBetaMetric {
        metric: conn.metric.clone(),
        oneform: conn.oneform.clone(),
        kappa,
        case,
        cone: opts.cone,
        margins: opts.margins,
    })
}

pub fn construct_theorem2<M: MetricField + Clone, B: OneFormField + Clone>(
    conn: &VectorialConnection<M, B>,
    fit: &ConstraintFit,
    kappa: f64,
    opts: &MetrizabilityOptions,
) -> Result<GeneralizedAlphaBetaMetric<M, B>> {
    require_satisfied(fit)?;
    if fit.branch != FitBranch::Theorem2 {
        return Err(Error::FitNotSatisfied("not a generalized fit".into()));
    }
    if kappa == 0.0 || !kappa.is_finite() {
        return Err(Error::Config(vec!["kappa: must be finite and nonzero".into()]));
    }
    let c = conn.coeffs;
    let k = &opts.constants;
    let big_c1 = fit.big_c1.unwrap_or(0.0);
    let case = match fit.subcase.as_deref() {
        Some("i") => GeneralizedCase::CaseI { c3: c.c3, f: opts.free_function.ok_or(Error::MissingFreeFunction)? },
        Some("ii-a") => GeneralizedCase::CaseIIa { c1: c.c1, big_c1, big_c2: k.big_c2 },
        Some("ii-b") => GeneralizedCase::CaseIIb { c1: c.c1, c2: c.c2, big_c3: k.big_c3 },
        Some("ii-c") => GeneralizedCase::CaseIIc { c2: c.c2, big_c1, big_c4: k.big_c4 },
        other => return Err(Error::NoSubcase(format!("unknown subcase {other:?}"))),
    };
    let table = fit.lambda_profile.clone().ok_or_else(|| Error::FitNotSatisfied("no λ profile".into()))?;
    let anchor = fit.integral_anchor.unwrap_or(table.range().0);
    let l = GeneralizedAlphaBetaMetric {
        metric: conn.metric.clone(),
        oneform: conn.oneform.clone(),
        epsilon: fit.epsilon.unwrap_or(1.0),
        kappa,
        case,
        rho: ProfileIntegral::new(table.clone(), 1, anchor),
        cubic: ProfileIntegral::new(table, 3, anchor),
        cone: opts.cone,
        margins: opts.margins,
        min_norm: opts.tolerances.min_norm,
    };
    let mut r = rng(opts.seed ^ 0x6465_6765_6e65_7261);
    let pairs = admissible_pairs(&l, &opts.domain, 200, &mut r);
    let scan = nondegeneracy_scan(&l, &pairs);
    if !scan.is_nondegenerate() {
        return Err(Error::DegenerateResult(format!(
            "{} of {} samples have a degenerate Hessian (min Hadamard ratio {:e})",
            scan.degenerate, scan.samples, scan.min_hadamard_ratio
        )));
    }
    Ok(l)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LagrangianFamily {
    Quadratic,
    AlphaBeta,
    Generalized,
}

/// What a report records about a Lagrangian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LagrangianDescriptor {
    pub family: LagrangianFamily,
    pub case_tag: String,
    pub alpha_beta_case: Option<AlphaBetaCase>,
    pub generalized_case: Option<GeneralizedCase>,
    pub kappa: f64,
    pub epsilon: Option<f64>,
    pub integral_anchor: Option<f64>,
    pub cone: Cone,
    pub formula: String,
}

/// Either family behind one type.
#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug)]
pub enum ConstructedLagrangian<M, B> {
    Quadratic(QuadraticLagrangian<M>),
    AlphaBeta(AlphaBetaMetric<M, B>),
    Generalized(GeneralizedAlphaBetaMetric<M, B>),
}

impl<M: MetricField, B: OneFormField> ConstructedLagrangian<M, B> {
    pub fn descriptor(&self) -> LagrangianDescriptor {
        match self {
            ConstructedLagrangian::Quadratic(l) => LagrangianDescriptor {
                family: LagrangianFamily::Quadratic,
                case_tag: "quadratic".into(),
                alpha_beta_case: None,
                generalized_case: None,
                kappa: 1.0,
                epsilon: None,
                integral_anchor: None,
                cone: l.cone,
                formula: "L = A".into(),
            },
            ConstructedLagrangian::AlphaBeta(l) => LagrangianDescriptor {
                family: LagrangianFamily::AlphaBeta,
                case_tag: match l.case {
                    AlphaBetaCase::PowerLaw { .. } => "power-law",
                    AlphaBetaCase::MKropina { .. } => "m-kropina",
                    AlphaBetaCase::Riemannian { .. } => "riemannian",
                    AlphaBetaCase::Exponential { .. } => "exponential",
                }
                .into(),
                alpha_beta_case: Some(l.case),
                generalized_case: None,
                kappa: l.kappa,
                epsilon: None,
                integral_anchor: None,
                cone: l.cone,
                formula: l.formula(),
            },
            ConstructedLagrangian::Generalized(l) => LagrangianDescriptor {
                family: LagrangianFamily::Generalized,
                case_tag: l.case.tag().into(),
                alpha_beta_case: None,
                generalized_case: Some(l.case),
                kappa: l.kappa,
                epsilon: Some(l.epsilon),
                integral_anchor: Some(l.rho.anchor),
                cone: l.cone,
                formula: l.formula(),
            },
        }
    }
}

impl<M: MetricField, B: OneFormField> FinslerLagrangian for ConstructedLagrangian<M, B> {
    fn eval<S: Real>(&self, x: &Vec4<S>, v: &Vec4<S>) -> S {
        match self {
            ConstructedLagrangian::Quadratic(l) => l.eval(x, v),
            ConstructedLagrangian::AlphaBeta(l) => l.eval(x, v),
            ConstructedLagrangian::Generalized(l) => l.eval(x, v),
        }
    }

    fn admissible(&self, x: &Point, v: &TangentVector) -> bool {
        match self {
            ConstructedLagrangian::Quadratic(l) => l.admissible(x, v),
            ConstructedLagrangian::AlphaBeta(l) => l.admissible(x, v),
            ConstructedLagrangian::Generalized(l) => l.admissible(x, v),
        }
    }
}

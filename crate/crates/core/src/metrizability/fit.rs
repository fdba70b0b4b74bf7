//! Numerical fits of the one-form constraints.

use serde::{Deserialize, Serialize};

use crate::autodiff::{Dual, Real};
use crate::connection::{NonmetricityCoefficients, VectorialConnection};
use crate::error::{Error, Result};
use crate::geometry::{christoffel_from, covariant_from, inverse_metric_generic, MetricField, OneFormField, Point};
use crate::linalg::{mat_vec, Mat4, Vec4};
use crate::profile::{PiecewiseQuadratic, ProfileIntegral};

use super::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitVerdict {
    Satisfied,
    Violated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitBranch {
    Theorem1Case1,
    Theorem1Case2,
    Theorem2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintFit {
    pub branch: FitBranch,
    pub verdict: FitVerdict,
    pub reason: Option<String>,
    pub coefficients: NonmetricityCoefficients,
    /// Theorem 1 case 1 constant, or the mean of λ(|b|) for Theorem 2.
    pub lambda: Option<f64>,
    /// Theorem 1 case 2 constant.
    pub tau: Option<f64>,
    /// "i" / "ii" / "iii" for Theorem 1 case 2; "i" / "ii-a" / "ii-b" / "ii-c" for Theorem 2.
    pub subcase: Option<String>,
    pub epsilon: Option<f64>,
    pub big_c1: Option<f64>,
    pub lambda_profile: Option<PiecewiseQuadratic>,
    pub tau_profile: Option<PiecewiseQuadratic>,
    pub integral_anchor: Option<f64>,
    /// Max and mean of the per-sample residual, each divided by (1 + local scale).
    pub residual_max: Option<f64>,
    pub residual_mean: Option<f64>,
    /// Spread of the fitted constant, (max − min)/(1 + |mean|), or the
    /// worst profile-fit spread for Theorem 2.
    pub constancy: Option<f64>,
    pub tau_formula_residual: Option<f64>,
    /// Max antisymmetric part of ∇̊b, relative.
    pub closedness: Option<f64>,
    pub norm_range: Option<(f64, f64)>,
    pub samples_used: usize,
    pub samples_rejected: usize,
    pub warnings: Vec<String>,
}

impl ConstraintFit {
    pub(crate) fn violated(branch: FitBranch, c: NonmetricityCoefficients, reason: &str) -> Self {
        Self {
            branch,
            verdict: FitVerdict::Violated,
            reason: Some(reason.to_string()),
            coefficients: c,
            lambda: None,
            tau: None,
            subcase: None,
            epsilon: None,
            big_c1: None,
            lambda_profile: None,
            tau_profile: None,
            integral_anchor: None,
            residual_max: None,
            residual_mean: None,
            constancy: None,
            tau_formula_residual: None,
            closedness: None,
            norm_range: None,
            samples_used: 0,
            samples_rejected: 0,
            warnings: Vec::new(),
        }
    }

    pub fn is_satisfied(&self) -> bool {
        self.verdict == FitVerdict::Satisfied
    }
}

pub(crate) fn is_zero(x: f64) -> bool {
    x.abs() <= 1e-12
}

fn max_abs(m: &Mat4) -> f64 {
    crate::linalg::max_abs(m)
}

/// One scalar k with R ≈ k M in the least-squares sense.
struct ScalarFit {
    k: f64,
    residual: f64,
}

fn fit_scalar(r: &Mat4, m: &Mat4) -> Option<ScalarFit> {
    let mm: f64 = m.iter().flatten().map(|x| x * x).sum();
    if mm <= 1e-300 {
        return None;
    }
    let rm: f64 = r.iter().flatten().zip(m.iter().flatten()).map(|(a, b)| a * b).sum();
    let k = rm / mm;
    let residual = r.iter().flatten().zip(m.iter().flatten()).fold(0.0f64, |acc, (a, b)| acc.max((a - k * b).abs()));
    Some(ScalarFit { k, residual })
}

struct SampleFits {
    ks: Vec<f64>,
    residuals: Vec<f64>,
    closed: f64,
    rejected: usize,
}

/// Per-sample fit of ∇̊b − shift(b, a) = k · shape(b).
fn per_sample<M: MetricField, B: OneFormField>(
    conn: &VectorialConnection<M, B>,
    points: &[Point],
    tol: &Tolerances,
    model: impl Fn(&Mat4, &Vec4, f64) -> (Mat4, Mat4, f64),
) -> Result<SampleFits> {
    let mut out = SampleFits { ks: Vec::new(), residuals: Vec::new(), closed: 0.0, rejected: 0 };
    for x in points {
        let f = conn.local(x)?;
        let gamma = christoffel_from(&f.ginv, &f.dg);
        let nb = covariant_from(&gamma, &f.b, &f.db);
        if crate::linalg::norm(&f.b) < tol.min_norm {
            out.rejected += 1;
            continue;
        }
        let (shift, shape, model_scale) = model(&f.g, &f.b, f.bb);
        let r: Mat4 = std::array::from_fn(|i| std::array::from_fn(|j| nb[i][j] - shift[i][j]));
        let Some(sf) = fit_scalar(&r, &shape) else {
            out.rejected += 1;
            continue;
        };
        let scale = 1.0 + max_abs(&nb) + model_scale;
        out.ks.push(sf.k);
        out.residuals.push(sf.residual / scale);
        for i in 0..4 {
            for j in 0..4 {
                out.closed = out.closed.max((nb[i][j] - nb[j][i]).abs() / scale);
            }
        }
    }
    if out.ks.is_empty() {
        return Err(Error::NoUsableSamples("one-form vanishes at every sample".into()));
    }
    Ok(out)
}

fn stats(v: &[f64]) -> (f64, f64) {
    let max = v.iter().fold(0.0f64, |m, x| m.max(*x));
    (max, v.iter().sum::<f64>() / v.len() as f64)
}

fn spread(v: &[f64]) -> (f64, f64) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let lo = v.iter().fold(f64::INFINITY, |m, x| m.min(*x));
    let hi = v.iter().fold(f64::NEG_INFINITY, |m, x| m.max(*x));
    (mean, (hi - lo) / (1.0 + mean.abs()))
}

/// ∇̊_μ b_ν = (c1/2)(−⟨b,b⟩ a_{μν} + (1/λ + 1) b_μ b_ν) with constant λ ≠ 0.
pub fn fit_theorem1_case1<M: MetricField, B: OneFormField>(
    conn: &VectorialConnection<M, B>,
    points: &[Point],
    tol: &Tolerances,
) -> Result<ConstraintFit> {
    let c = conn.coeffs;
    let branch = FitBranch::Theorem1Case1;
    if !is_zero(c.c2) {
        return Ok(ConstraintFit::violated(branch, c, "c2 ≠ 0"));
    }
    if !is_zero(c.c3) {
        return Ok(ConstraintFit::violated(branch, c, "c3 ≠ 0"));
    }
    let h = 0.5 * c.c1;
    let s = per_sample(conn, points, tol, |g, b, bb| {
        let shift = std::array::from_fn(|i| std::array::from_fn(|j| -h * bb * g[i][j]));
        let shape = std::array::from_fn(|i| std::array::from_fn(|j| h * b[i] * b[j]));
        let nb2 = b.iter().map(|x| x * x).sum::<f64>();
        (shift, shape, h.abs() * (bb.abs() * max_abs(g) + nb2))
    })?;
    let (rmax, rmean) = stats(&s.residuals);
    let (k, sp) = spread(&s.ks);
    let mut fit = ConstraintFit::violated(branch, c, "");
    fit.residual_max = Some(rmax);
    fit.residual_mean = Some(rmean);
    fit.constancy = Some(sp);
    fit.closedness = Some(s.closed);
    fit.samples_used = s.ks.len();
    fit.samples_rejected = s.rejected;
    // k = 1/λ + 1
    let inv_lambda = k - 1.0;
    fit.reason = if rmax > tol.fit_residual {
        Some(format!("constraint residual {rmax:e} exceeds {:e}", tol.fit_residual))
    } else if sp > tol.constancy {
        Some(format!("fitted 1/λ + 1 varies across samples (spread {sp:e})"))
    } else if inv_lambda.abs() <= tol.constancy {
        Some("1/λ = 0 has no finite solution".into())
    } else {
        None
    };
    if inv_lambda.abs() > tol.constancy {
        fit.lambda = Some(1.0 / inv_lambda);
    }
    if fit.reason.is_none() {
        fit.verdict = FitVerdict::Satisfied;
    }
    Ok(fit)
}

/// ∇̊_μ b_ν = (c3/2)(−(c1/c3)⟨b,b⟩ a_{μν} + (c1/c3 + τ + ⟨b,b⟩) b_μ b_ν) with constant τ.
pub fn fit_theorem1_case2<M: MetricField, B: OneFormField>(
    conn: &VectorialConnection<M, B>,
    points: &[Point],
    tol: &Tolerances,
) -> Result<ConstraintFit> {
    let c = conn.coeffs;
    let branch = FitBranch::Theorem1Case2;
    if !is_zero(c.c2) {
        return Ok(ConstraintFit::violated(branch, c, "c2 ≠ 0"));
    }
    if is_zero(c.c3) {
        return Ok(ConstraintFit::violated(branch, c, "c3 = 0"));
    }
    let h = 0.5 * c.c3;
    let ratio = c.c1 / c.c3;
    let s = per_sample(conn, points, tol, |g, b, bb| {
        let shift =
            std::array::from_fn(|i| std::array::from_fn(|j| h * (-ratio * bb * g[i][j] + (ratio + bb) * b[i] * b[j])));
        let shape = std::array::from_fn(|i| std::array::from_fn(|j| h * b[i] * b[j]));
        let nb2 = b.iter().map(|x| x * x).sum::<f64>();
        (shift, shape, h.abs() * ((ratio * bb).abs() * max_abs(g) + (ratio.abs() + bb.abs()) * nb2))
    })?;
    let (rmax, rmean) = stats(&s.residuals);
    let (tau, sp) = spread(&s.ks);
    let mut fit = ConstraintFit::violated(branch, c, "");
    fit.residual_max = Some(rmax);
    fit.residual_mean = Some(rmean);
    fit.constancy = Some(sp);
    fit.closedness = Some(s.closed);
    fit.samples_used = s.ks.len();
    fit.samples_rejected = s.rejected;
    let tau_zero = tau.abs() <= tol.constancy;
    let tau = if tau_zero { 0.0 } else { tau };
    fit.tau = Some(tau);
    fit.subcase = match (is_zero(c.c1), tau_zero) {
        (false, false) => Some("i".into()),
        (true, false) => Some("ii".into()),
        (false, true) => Some("iii".into()),
        (true, true) => None,
    };
    if fit.subcase.is_none() {
        fit.warnings.push("c1 = 0 and τ = 0: no subcase applies".into());
    }
    fit.reason = if rmax > tol.fit_residual {
        Some(format!("constraint residual {rmax:e} exceeds {:e}", tol.fit_residual))
    } else if sp > tol.constancy {
        Some(format!("fitted τ varies across samples (spread {sp:e})"))
    } else {
        None
    };
    if fit.reason.is_none() {
        fit.verdict = FitVerdict::Satisfied;
    }
    Ok(fit)
}

/// |b|, u, ∂_μ|b| and ∇̊_μ u_ν at one point.
#[derive(Clone, Copy, Debug)]
pub struct NormalizedOneForm {
    pub norm: f64,
    /// ⟨b, b⟩
    pub bb: f64,
    pub u: Vec4,
    pub u_up: Vec4,
    pub d_norm: Vec4,
    pub nabla_u: Mat4,
    pub g: Mat4,
}

pub fn normalized_oneform<M: MetricField, B: OneFormField>(
    conn: &VectorialConnection<M, B>,
    x: &Point,
    min_norm: f64,
) -> Result<NormalizedOneForm> {
    type D4 = Dual<f64, 4>;
    let xs: Vec4<D4> = std::array::from_fn(|i| D4::variable(x.coords[i], i));
    let g = conn.metric.components(&xs);
    let ginv = inverse_metric_generic(&g)
        .ok_or(Error::SingularMetric { det: crate::linalg::det(&g.map(|r| r.map(|e| e.v))).abs(), at: x.coords })?;
    let b = conn.oneform.components(&xs);
    let bb = crate::linalg::quad(&ginv, &b, &b);
    if bb.v.abs().sqrt() < min_norm {
        return Err(Error::NullOneForm { at: x.coords, norm: bb.v.abs() });
    }
    let nb = bb.abs().sqrt();
    let u: Vec4<D4> = std::array::from_fn(|i| b[i] / nb);
    let gv: Mat4 = g.map(|r| r.map(|e| e.v));
    let giv: Mat4 = ginv.map(|r| r.map(|e| e.v));
    let dg = std::array::from_fn(|l| std::array::from_fn(|i| std::array::from_fn(|j| g[i][j].d[l])));
    let gamma = christoffel_from(&giv, &dg);
    let uv: Vec4 = u.map(|e| e.v);
    let du: Mat4 = std::array::from_fn(|m| std::array::from_fn(|n| u[n].d[m]));
    Ok(NormalizedOneForm {
        norm: nb.v,
        bb: bb.v,
        u: uv,
        u_up: mat_vec(&giv, &uv),
        d_norm: nb.d,
        nabla_u: covariant_from(&gamma, &uv, &du),
        g: gv,
    })
}

/// Exponent of the τ formula, c1 + 2 c2.
pub fn tau_formula_exponent(c: &NonmetricityCoefficients) -> f64 {
    c.c1 + 2.0 * c.c2
}

/// d|b| = λ(|b|) u, ∇̊u = τ(|b|)(a − ε u⊗u), and the τ formula with constant C1.
pub fn fit_theorem2<M: MetricField, B: OneFormField>(
    conn: &VectorialConnection<M, B>,
    points: &[Point],
    tol: &Tolerances,
    bins: usize,
    integral_anchor: Option<f64>,
) -> Result<ConstraintFit> {
    let c = conn.coeffs;
    let branch = FitBranch::Theorem2;
    if !(is_zero(c.c3) || (is_zero(c.c1) && is_zero(c.c2))) {
        return Ok(ConstraintFit::violated(branch, c, "condition 1 fails: need c3 = 0, or c1 = c2 = 0"));
    }
    let mut rows = Vec::with_capacity(points.len());
    for x in points {
        rows.push(normalized_oneform(conn, x, tol.min_norm)?);
    }
    if rows.is_empty() {
        return Err(Error::NoUsableSamples("no sample points".into()));
    }
    let eps = rows[0].bb.signum();
    let mut fit = ConstraintFit::violated(branch, c, "");
    fit.epsilon = Some(eps);
    fit.samples_used = rows.len();
    if rows.iter().any(|r| r.bb.signum() != eps) {
        fit.reason = Some("⟨b,b⟩ changes sign across samples".into());
        return Ok(fit);
    }

    let mut lam = Vec::with_capacity(rows.len());
    let mut tau = Vec::with_capacity(rows.len());
    let mut residuals = Vec::with_capacity(rows.len());
    for r in &rows {
        let l = eps * crate::linalg::dot(&r.u_up, &r.d_norm);
        let ra = (0..4).fold(0.0f64, |m, i| m.max((r.d_norm[i] - l * r.u[i]).abs()))
            / (1.0 + crate::linalg::norm(&r.d_norm));
        let p: Mat4 = std::array::from_fn(|i| std::array::from_fn(|j| r.g[i][j] - eps * r.u[i] * r.u[j]));
        let sf = fit_scalar(&r.nabla_u, &p).expect("a − ε u⊗u has rank 3");
        let rb = sf.residual / (1.0 + max_abs(&r.nabla_u));
        lam.push((r.norm, l));
        tau.push((r.norm, sf.k));
        residuals.push(ra.max(rb));
    }
    let lam_fit = PiecewiseQuadratic::fit(&lam, bins);
    let tau_fit = PiecewiseQuadratic::fit(&tau, bins);
    if !lam_fit.has_spread {
        fit.warnings.push("insufficient |b| spread: all samples share one |b| bin".into());
    }
    let lo = rows.iter().fold(f64::INFINITY, |m, r| m.min(r.norm));
    let hi = rows.iter().fold(0.0f64, |m, r| m.max(r.norm));
    fit.norm_range = Some((lo, hi));
    let lam_max = lam.iter().fold(0.0f64, |m, p| m.max(p.1.abs()));
    let lam_min = lam.iter().fold(f64::INFINITY, |m, p| m.min(p.1.abs()));
    let lambda_vanishes = lam_min <= tol.constancy * (1.0 + lam_max);
    fit.lambda = Some(lam.iter().map(|p| p.1).sum::<f64>() / lam.len() as f64);
    fit.constancy = Some(lam_fit.spread.max(tau_fit.spread));
    fit.lambda_profile = Some(lam_fit.table.clone());
    fit.tau_profile = Some(tau_fit.table.clone());

    // τ (c1 C1 e^{kρ} − 2ε) = c1 |b|, with C1 = 0 unless c1 = 2 c2.
    let k = tau_formula_exponent(&c);
    let c1_free = is_zero(c.c1 - 2.0 * c.c2) && !is_zero(c.c1);
    let anchor = integral_anchor.unwrap_or(lo);
    let rho = if lambda_vanishes {
        None
    } else {
        fit.integral_anchor = Some(anchor);
        Some(ProfileIntegral::new(lam_fit.table.clone(), 1, anchor))
    };
    let big_c1 = if !c1_free {
        Some(0.0)
    } else if let Some(rho) = &rho {
        let (mut num, mut den) = (0.0, 0.0);
        for &(nb, t) in &tau {
            let a = t * c.c1 * (k * rho.value(nb)).exp();
            num += a * (c.c1 * nb + 2.0 * eps * t);
            den += a * a;
        }
        Some(if den > 0.0 { num / den } else { 0.0 })
    } else {
        None
    };
    fit.big_c1 = big_c1;
    let tau_formula = big_c1.map(|cc| {
        tau.iter().fold(0.0f64, |m, &(nb, t)| {
            let e = if cc == 0.0 { 0.0 } else { c.c1 * cc * (k * rho.as_ref().unwrap().value(nb)).exp() };
            let res = (t * (e - 2.0 * eps) - c.c1 * nb).abs();
            m.max(res / (1.0 + (c.c1 * nb).abs() + t.abs() * (2.0 + e.abs())))
        })
    });
    fit.tau_formula_residual = tau_formula;
    let (rmax, rmean) = stats(&residuals);
    fit.residual_max = Some(rmax.max(tau_formula.unwrap_or(0.0)));
    fit.residual_mean = Some(rmean);

    fit.subcase = if !is_zero(c.c3) {
        Some("i".into())
    } else if is_zero(c.c2) {
        Some("ii-a".into())
    } else if !is_zero(c.c1 - 2.0 * c.c2) {
        Some("ii-b".into())
    } else {
        Some("ii-c".into())
    };

    fit.reason = if lambda_vanishes {
        Some("λ(|b|) vanishes: d|b| is not a nowhere-zero multiple of u".into())
    } else if rmax > tol.fit_residual {
        Some(format!("torse-forming residual {rmax:e} exceeds {:e}", tol.fit_residual))
    } else if lam_fit.spread > tol.profile_spread {
        Some(format!("λ is not a function of |b| alone (spread {:e})", lam_fit.spread))
    } else if tau_fit.spread > tol.profile_spread {
        Some(format!("τ is not a function of |b| alone (spread {:e})", tau_fit.spread))
    } else if tau_formula.is_some_and(|t| t > tol.tau_formula) {
        Some(format!("τ formula residual {:e} exceeds {:e}", tau_formula.unwrap(), tol.tau_formula))
    } else {
        None
    };
    if fit.reason.is_none() {
        fit.verdict = FitVerdict::Satisfied;
    }
    Ok(fit)
}

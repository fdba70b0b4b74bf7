//! Residuals of the (α,β) and generalized (α,β) PDE systems.

use serde::{Deserialize, Serialize};

use super::fit::{normalized_oneform, ConstraintFit};
use crate::autodiff::Dual;
use crate::connection::{contracted_distortion, VectorialConnection};
use crate::error::{Error, Result};
use crate::finsler::{AlphaBetaMetric, FinslerLagrangian, GeneralizedAlphaBetaMetric};
use crate::geometry::{MetricField, OneFormField, Point, TangentVector};
use crate::linalg::{dot, norm, quad, Vec4};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdeResidual {
    pub components: Vec4,
    /// Sum of the magnitudes of the individual terms, max over components.
    pub scale: f64,
}

impl PdeResidual {
    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    pub fn relative(&self) -> f64 {
        self.max_abs() / self.scale.max(f64::MIN_POSITIVE)
    }
}

fn inadmissible(x: &Point, v: &TangentVector) -> Error {
    Error::Inadmissible { x: x.coords, v: v.components }
}

/// Φ′B(A δ̊_μB − A D^ν_μ b_ν + B D^ν_μ v_ν) − Φ A D^ν_μ v_ν
pub fn alpha_beta_pde_residual<M: MetricField, B: OneFormField>(
    l: &AlphaBetaMetric<M, B>,
    conn: &VectorialConnection<M, B>,
    x: &Point,
    v: &TangentVector,
) -> Result<PdeResidual> {
    if !l.admissible(x, v) {
        return Err(inadmissible(x, v));
    }
    let f = conn.local(x)?;
    let nabla_b = conn.levi_civita_derivative(x)?;
    let cd = contracted_distortion(conn, x, v)?;
    let vv = v.components;
    let a = quad(&f.g, &vv, &vv);
    let b = dot(&f.b, &vv);
    let s = Dual::<f64, 1>::variable(b * b / a, 0);
    let phi = l.phi(s);
    let (p0, p1) = (phi.v, phi.d[0]);
    let mut out = [0.0; 4];
    let mut scale = 0.0f64;
    for m in 0..4 {
        let delta_b: f64 = (0..4).map(|r| nabla_b[m][r] * vv[r]).sum();
        let t1 = p1 * b * a * delta_b;
        let t2 = p1 * b * a * cd.db[m];
        let t3 = p1 * b * b * cd.dv[m];
        let t4 = p0 * a * cd.dv[m];
        out[m] = t1 - t2 + t3 - t4;
        scale = scale.max(t1.abs() + t2.abs() + t3.abs() + t4.abs());
    }
    Ok(PdeResidual { components: out, scale: scale + p0.abs() * a * a * norm(&f.b) })
}

/// ½A²Φ_{|b|} ∂_μ|b| + Φ_p U(A δ̊_μU − A D^ν_μ u_ν + U D^ν_μ v_ν) − A D^ν_μ v_ν Φ
pub fn generalized_pde_residual<M: MetricField, B: OneFormField>(
    l: &GeneralizedAlphaBetaMetric<M, B>,
    conn: &VectorialConnection<M, B>,
    x: &Point,
    v: &TangentVector,
) -> Result<PdeResidual> {
    if !l.admissible(x, v) {
        return Err(inadmissible(x, v));
    }
    let n = normalized_oneform(conn, x, l.min_norm)?;
    let cd = contracted_distortion(conn, x, v)?;
    let vv = v.components;
    let a = quad(&n.g, &vv, &vv);
    let u = dot(&n.u, &vv);
    let p = u * u / a;
    type D2 = Dual<f64, 2>;
    let phi = l.phi(D2::variable(n.norm, 0), D2::variable(p, 1));
    let (p0, pb, pp) = (phi.v, phi.d[0], phi.d[1]);
    let mut out = [0.0; 4];
    let mut scale = 0.0f64;
    for m in 0..4 {
        let delta_u: f64 = (0..4).map(|r| n.nabla_u[m][r] * vv[r]).sum();
        let du = cd.db[m] / n.norm;
        let t0 = 0.5 * a * a * pb * n.d_norm[m];
        let t1 = pp * u * a * delta_u;
        let t2 = pp * u * a * du;
        let t3 = pp * u * u * cd.dv[m];
        let t4 = a * cd.dv[m] * p0;
        out[m] = t0 + t1 - t2 + t3 - t4;
        scale = scale.max(t0.abs() + t1.abs() + t2.abs() + t3.abs() + t4.abs());
    }
    Ok(PdeResidual { components: out, scale: scale + p0.abs() * a * a * n.norm })
}

/// Both scalar equations of the reduced system on the (|b|, p) plane:
///
/// λΨ_{|b|} + p|b|(−c1 + c3|b|²(p − ε))Ψ_p − |b|(c1 + c3|b|²p) − 2τεpΨ_p
///
/// Ψ_p(τ + |b|ε(c1/2 − c2) + |b|c2 p) − |b|c2
///
/// with Ψ = ln Φ, and λ, τ from the fitted profiles.
pub fn reduced_system_residual<M: MetricField, B: OneFormField>(
    l: &GeneralizedAlphaBetaMetric<M, B>,
    fit: &ConstraintFit,
    nb: f64,
    p: f64,
) -> Result<[f64; 2]> {
    if !fit.is_satisfied() {
        return Err(Error::FitNotSatisfied(fit.reason.clone().unwrap_or_default()));
    }
    let (Some(lp), Some(tp)) = (&fit.lambda_profile, &fit.tau_profile) else {
        return Err(Error::FitNotSatisfied("fit has no λ/τ profiles".into()));
    };
    let c = fit.coefficients;
    let eps = fit.epsilon.unwrap_or(l.epsilon);
    type D2 = Dual<f64, 2>;
    let phi = l.phi(D2::variable(nb, 0), D2::variable(p, 1));
    if !phi.v.is_finite() || phi.v == 0.0 {
        return Err(Error::UndefinedResidual(format!("Φ({nb}, {p}) = {}", phi.v)));
    }
    if phi.d[1].abs() <= 1e-14 * phi.v.abs() {
        return Err(Error::UndefinedResidual(format!("Φ_p vanishes at (|b|, p) = ({nb}, {p})")));
    }
    let psi_b = phi.d[0] / phi.v;
    let psi_p = phi.d[1] / phi.v;
    let lam = lp.eval(nb);
    let tau = tp.eval(nb);
    let first = lam * psi_b + p * nb * (-c.c1 + c.c3 * nb * nb * (p - eps)) * psi_p
        - nb * (c.c1 + c.c3 * nb * nb * p)
        - 2.0 * tau * eps * p * psi_p;
    let second = psi_p * (tau + nb * eps * (0.5 * c.c1 - c.c2) + nb * c.c2 * p) - nb * c.c2;
    Ok([first, second])
}

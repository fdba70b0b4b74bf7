//! Chart-level tensor calculus in four dimensions.

use serde::{Deserialize, Serialize};

use crate::autodiff::{lift, Dual, Real};
use crate::error::{Error, Result};
use crate::linalg::{det_inverse, mat_vec, Mat4, Tensor3, Vec4};

pub const DIM: usize = 4;

/// |det a| below this is treated as singular.
pub const SINGULAR_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub coords: [f64; 4],
}

impl Point {
    pub fn new(coords: [f64; 4]) -> Self {
        debug_assert!(coords.iter().all(|c| c.is_finite()));
        Self { coords }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentVector {
    pub components: [f64; 4],
}

impl TangentVector {
    pub fn new(components: [f64; 4]) -> Self {
        debug_assert!(components.iter().all(|c| c.is_finite()));
        Self { components }
    }
}

/// A symmetric (0,2) field a_{μν}(x). Evaluation is generic so that
/// derivatives come from the scalar type.
pub trait MetricField: Send + Sync {
    fn components<S: Real>(&self, x: &Vec4<S>) -> Mat4<S>;
}

/// A one-form field b_μ(x).
pub trait OneFormField: Send + Sync {
    fn components<S: Real>(&self, x: &Vec4<S>) -> Vec4<S>;
}

impl<T: MetricField> MetricField for &T {
    fn components<S: Real>(&self, x: &Vec4<S>) -> Mat4<S> {
        (**self).components(x)
    }
}

impl<T: OneFormField> OneFormField for &T {
    fn components<S: Real>(&self, x: &Vec4<S>) -> Vec4<S> {
        (**self).components(x)
    }
}

type D4 = Dual<f64, 4>;

fn seeded(x: &Vec4) -> Vec4<D4> {
    std::array::from_fn(|i| D4::variable(x[i], i))
}

/// a_{μν}(x) and ∂_λ a_{μν}(x), the latter indexed `[λ][μ][ν]`.
pub fn metric_with_derivatives<M: MetricField>(a: &M, x: &Point) -> (Mat4, Tensor3) {
    let m = a.components(&seeded(&x.coords));
    let val = std::array::from_fn(|i| std::array::from_fn(|j| m[i][j].v));
    let der = std::array::from_fn(|l| std::array::from_fn(|i| std::array::from_fn(|j| m[i][j].d[l])));
    (val, der)
}

/// b_μ(x) and ∂_μ b_ν(x) indexed `[μ][ν]`.
pub fn oneform_with_derivatives<B: OneFormField>(b: &B, x: &Point) -> (Vec4, Mat4) {
    let c = b.components(&seeded(&x.coords));
    (std::array::from_fn(|i| c[i].v), std::array::from_fn(|m| std::array::from_fn(|n| c[n].d[m])))
}

pub fn metric_at<M: MetricField>(a: &M, x: &Point) -> Mat4 {
    a.components(&x.coords)
}

/// Inverse metric, or a singular-metric error when |det a| < 1e-12.
pub fn inverse_metric(a: &Mat4, at: &Point) -> Result<Mat4> {
    let (d, inv) = det_inverse(a);
    match inv {
        Some(inv) if d.abs() >= SINGULAR_TOL => Ok(inv),
        _ => Err(Error::SingularMetric { det: d.abs(), at: at.coords }),
    }
}

/// Inverse of a metric whose entries carry derivatives.
pub fn inverse_metric_generic<S: Real>(a: &Mat4<S>) -> Option<Mat4<S>> {
    let (d, inv) = det_inverse(a);
    if d.value().abs() < SINGULAR_TOL {
        return None;
    }
    inv
}

/// Γ̊^μ_{νρ}, indexed `[μ][ν][ρ]`.
pub fn christoffel<M: MetricField>(a: &M, x: &Point) -> Result<Tensor3> {
    let (g, dg) = metric_with_derivatives(a, x);
    let ginv = inverse_metric(&g, x)?;
    Ok(christoffel_from(&ginv, &dg))
}

pub(crate) fn christoffel_from(ginv: &Mat4, dg: &Tensor3) -> Tensor3 {
    let mut lower = [[[0.0; 4]; 4]; 4];
    for l in 0..4 {
        for n in 0..4 {
            for r in n..4 {
                let v = 0.5 * (dg[n][l][r] + dg[r][l][n] - dg[l][n][r]);
                lower[l][n][r] = v;
                lower[l][r][n] = v;
            }
        }
    }
    let mut out = [[[0.0; 4]; 4]; 4];
    for m in 0..4 {
        for n in 0..4 {
            for r in n..4 {
                let v: f64 = (0..4).map(|l| ginv[m][l] * lower[l][n][r]).sum();
                out[m][n][r] = v;
                out[m][r][n] = v;
            }
        }
    }
    out
}

/// ∇̊_μ b_ν, indexed `[μ][ν]`.
pub fn levi_civita_covariant_derivative_oneform<M: MetricField, B: OneFormField>(
    a: &M,
    b: &B,
    x: &Point,
) -> Result<Mat4> {
    let gamma = christoffel(a, x)?;
    let (bv, db) = oneform_with_derivatives(b, x);
    Ok(covariant_from(&gamma, &bv, &db))
}

pub(crate) fn covariant_from(gamma: &Tensor3, b: &Vec4, db: &Mat4) -> Mat4 {
    std::array::from_fn(|m| std::array::from_fn(|n| db[m][n] - (0..4).map(|s| gamma[s][m][n] * b[s]).sum::<f64>()))
}

pub fn raise_index<M: MetricField>(a: &M, x: &Point, covector: &Vec4) -> Result<Vec4> {
    let ginv = inverse_metric(&metric_at(a, x), x)?;
    Ok(mat_vec(&ginv, covector))
}

pub fn lower_index<M: MetricField>(a: &M, x: &Point, vector: &Vec4) -> Result<Vec4> {
    let g = metric_at(a, x);
    inverse_metric(&g, x)?;
    Ok(mat_vec(&g, vector))
}

/// ∂_μ a_{νρ} − Γ^σ_{μν} a_{σρ} − Γ^σ_{μρ} a_{νσ}, indexed `[μ][ν][ρ]`.
pub fn metric_covariant_derivative(g: &Mat4, dg: &Tensor3, gamma: &Tensor3) -> Tensor3 {
    std::array::from_fn(|m| {
        std::array::from_fn(|n| {
            std::array::from_fn(|r| {
                dg[m][n][r] - (0..4).map(|s| gamma[s][m][n] * g[s][r] + gamma[s][m][r] * g[n][s]).sum::<f64>()
            })
        })
    })
}

/// Generic raising helper used inside Lagrangian evaluators.
pub fn inner_inverse<S: Real>(ginv: &Mat4<S>, b: &Vec4<S>) -> S {
    crate::linalg::quad(ginv, b, b)
}

/// Constant point lifted into a derivative-carrying scalar type.
pub fn lift_point<S: Real>(x: &Point) -> Vec4<S> {
    lift(&x.coords)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{DiagEntry, MetricSpec};

    #[test]
    fn diag_power_christoffel() {
        let a = MetricSpec::DiagPower {
            entries: [
                DiagEntry::constant(1.0),
                DiagEntry { coefficient: 1.0, axis: 0, power: 2.0 },
                DiagEntry::constant(1.0),
                DiagEntry::constant(1.0),
            ],
        };
        let g = christoffel(&a, &Point::new([2.0, 0.3, -0.1, 0.4])).unwrap();
        assert!((g[1][0][1] - 0.5).abs() < 1e-14);
        assert!((g[1][1][0] - 0.5).abs() < 1e-14);
        assert!((g[0][1][1] + 2.0).abs() < 1e-14);
    }

    #[test]
    fn singular_metric_rejected() {
        let a = MetricSpec::DiagPower {
            entries: [
                DiagEntry::constant(1.0),
                DiagEntry { coefficient: 1.0, axis: 0, power: 2.0 },
                DiagEntry::constant(1.0),
                DiagEntry::constant(1.0),
            ],
        };
        assert!(matches!(christoffel(&a, &Point::new([0.0; 4])), Err(Error::SingularMetric { .. })));
    }
}

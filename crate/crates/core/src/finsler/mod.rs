//! Finsler Lagrangians and their metric tensor, spray and horizontal derivative.

mod alpha_beta;
mod generalized;

pub use alpha_beta::{AlphaBetaCase, AlphaBetaMetric, QuadraticLagrangian};
pub use generalized::{FreeFunction, GeneralizedAlphaBetaMetric, GeneralizedCase};

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, Matrix4, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Dual, Jet, Real};
use crate::connection::AffineConnection;
use crate::error::{Error, Result};
use crate::geometry::{Point, TangentVector};
use crate::linalg::{det, det_inverse, hadamard_ratio, values, Mat4, Tensor3, Vec4};

/// Hessians with a Hadamard ratio below this are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// A positively 2-homogeneous function on a cone of admissible directions.
pub trait FinslerLagrangian: Send + Sync {
    fn eval<S: Real>(&self, x: &Vec4<S>, v: &Vec4<S>) -> S;

    /// Cone-stable admissibility predicate.
    fn admissible(&self, x: &Point, v: &TangentVector) -> bool;
}

impl<T: FinslerLagrangian> FinslerLagrangian for &T {
    fn eval<S: Real>(&self, x: &Vec4<S>, v: &Vec4<S>) -> S {
        (**self).eval(x, v)
    }
    fn admissible(&self, x: &Point, v: &TangentVector) -> bool {
        (**self).admissible(x, v)
    }
}

/// Which sign of A = a(v, v) the Lagrangian is defined on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Cone {
    Positive,
    Negative,
    #[default]
    Any,
}

impl Cone {
    pub fn allows(&self, a: f64) -> bool {
        match self {
            Cone::Positive => a > 0.0,
            Cone::Negative => a < 0.0,
            Cone::Any => a != 0.0,
        }
    }
}

/// Relative distances kept from the singular sets A = 0 and B = 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Margins {
    pub delta_a: f64,
    pub delta_b: f64,
}

impl Default for Margins {
    fn default() -> Self {
        Self { delta_a: 1e-6, delta_b: 1e-6 }
    }
}

fn jet_of<S: Real, L: FinslerLagrangian>(l: &L, x: &Vec4<S>, v: &Vec4<S>) -> Jet<S, 8> {
    let xs: Vec4<Jet<S, 8>> = std::array::from_fn(|i| Jet::variable(x[i], i));
    let vs: Vec4<Jet<S, 8>> = std::array::from_fn(|i| Jet::variable(v[i], 4 + i));
    l.eval(&xs, &vs)
}

/// Value, first and second derivatives of L in (x, v); seeds 0..4 are x, 4..8 are v.
pub fn lagrangian_jet<L: FinslerLagrangian>(l: &L, x: &Point, v: &TangentVector) -> Jet<f64, 8> {
    jet_of(l, &x.coords, &v.components)
}

fn check_admissible<L: FinslerLagrangian>(l: &L, x: &Point, v: &TangentVector) -> Result<()> {
    if l.admissible(x, v) {
        Ok(())
    } else {
        Err(Error::Inadmissible { x: x.coords, v: v.components })
    }
}

/// g_{μν} = ½ ∂̇_μ ∂̇_ν L
pub fn finsler_metric_tensor<L: FinslerLagrangian>(l: &L, x: &Point, v: &TangentVector) -> Result<Mat4> {
    check_admissible(l, x, v)?;
    let j = lagrangian_jet(l, x, v);
    Ok(std::array::from_fn(|i| std::array::from_fn(|k| 0.5 * j.h[4 + i][4 + k])))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SprayResult {
    /// G^μ
    pub g: Vec4,
    /// N^ν_μ = ∂̇_μ G^ν, indexed `[ν][μ]`.
    pub n: Mat4,
}

fn spray_generic<S: Real, L: FinslerLagrangian>(l: &L, x: &Vec4<S>, v: &Vec4<S>) -> Result<Vec4<S>> {
    let j = jet_of(l, x, v);
    let g: Mat4<S> = std::array::from_fn(|i| std::array::from_fn(|k| j.h[4 + i][4 + k] * 0.5));
    let gv = g.map(|r| values(&r));
    let ratio = hadamard_ratio(&gv);
    if !(ratio >= DEGENERACY_TOL) {
        return Err(Error::DegenerateHessian { x: values(x), v: values(v), ratio });
    }
    let ginv = det_inverse(&g).1.ok_or(Error::DegenerateHessian { x: values(x), v: values(v), ratio })?;
    let rhs: Vec4<S> = std::array::from_fn(|n| {
        let mut acc = -j.g[n];
        for s in 0..4 {
            acc = acc + v[s] * j.h[s][4 + n];
        }
        acc
    });
    Ok(std::array::from_fn(|m| {
        let mut acc = S::zero();
        for n in 0..4 {
            acc = acc + ginv[m][n] * rhs[n];
        }
        acc * 0.25
    }))
}

/// G^μ only.
pub fn spray_coefficients<L: FinslerLagrangian>(l: &L, x: &Point, v: &TangentVector) -> Result<Vec4> {
    check_admissible(l, x, v)?;
    spray_generic(l, &x.coords, &v.components)
}

/// G^μ = ¼ g^{μν}(v^σ ∂_σ ∂̇_ν L − ∂_ν L) and N^ν_μ = ∂̇_μ G^ν.
pub fn spray<L: FinslerLagrangian>(l: &L, x: &Point, v: &TangentVector) -> Result<SprayResult> {
    check_admissible(l, x, v)?;
    type D4 = Dual<f64, 4>;
    let xs: Vec4<D4> = x.coords.map(D4::constant);
    let vs: Vec4<D4> = std::array::from_fn(|i| D4::variable(v.components[i], i));
    let g = spray_generic(l, &xs, &vs)?;
    Ok(SprayResult { g: g.map(|c| c.v), n: std::array::from_fn(|n| g[n].d) })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorizontalDerivative {
    /// δ_μ L
    pub delta: Vec4,
    /// |L| + max_μ (|∂_μ L| + Σ_ν |Γ^ν_{μρ} v^ρ ∂̇_ν L|)
    pub scale: f64,
}

impl HorizontalDerivative {
    pub fn max_abs(&self) -> f64 {
        self.delta.iter().fold(0.0f64, |m, d| m.max(d.abs()))
    }

    pub fn relative(&self) -> f64 {
        self.max_abs() / self.scale.max(f64::MIN_POSITIVE)
    }
}

/// δ_μ L = ∂_μ L − Γ^ν_{μρ}(x) v^ρ ∂̇_ν L
pub fn horizontal_derivative<L: FinslerLagrangian, C: AffineConnection>(
    l: &L,
    conn: &C,
    x: &Point,
    v: &TangentVector,
) -> Result<HorizontalDerivative> {
    check_admissible(l, x, v)?;
    type D8 = Dual<f64, 8>;
    let xs: Vec4<D8> = std::array::from_fn(|i| D8::variable(x.coords[i], i));
    let vs: Vec4<D8> = std::array::from_fn(|i| D8::variable(v.components[i], 4 + i));
    let lv = l.eval(&xs, &vs);
    let gamma = conn.coefficients(x)?;
    let vv = v.components;
    let mut delta = [0.0; 4];
    let mut scale = 0.0f64;
    for m in 0..4 {
        let mut transport = 0.0;
        let mut mag = lv.d[m].abs();
        for n in 0..4 {
            let gv: f64 = (0..4).map(|r| gamma[n][m][r] * vv[r]).sum();
            transport += gv * lv.d[4 + n];
            mag += (gv * lv.d[4 + n]).abs();
        }
        delta[m] = lv.d[m] - transport;
        scale = scale.max(mag);
    }
    Ok(HorizontalDerivative { delta, scale: scale + lv.v.abs() })
}

/// Fitted quadratic spray at one base point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BerwaldPoint {
    pub x: Point,
    /// Γ^μ_{νρ} with 2G^μ ≈ Γ^μ_{νρ} v^ν v^ρ
    pub gamma: Tensor3,
    pub residual: f64,
    pub directions: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BerwaldFit {
    pub max_residual: f64,
    pub points: Vec<BerwaldPoint>,
}

pub const BERWALD_DIRECTIONS: usize = 20;
const MIN_DIRECTIONS: usize = 10;

const PAIRS: [(usize, usize); 10] = [(0, 0), (0, 1), (0, 2), (0, 3), (1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3)];

/// Least-squares fit of 2G^μ(x, ·) to a quadratic form over random unit
/// directions at each point; the residual is normalized by max ‖2G‖.
pub fn berwald_quadraticity<L: FinslerLagrangian, R: Rng>(
    l: &L,
    points: &[Point],
    directions: usize,
    rng: &mut R,
) -> Result<BerwaldFit> {
    let mut out = Vec::with_capacity(points.len());
    let mut worst = 0.0f64;
    for x in points {
        let mut dirs: Vec<(Vec4, Vec4)> = Vec::with_capacity(directions);
        let mut tries = 0;
        while dirs.len() < directions && tries < 50 * directions {
            tries += 1;
            let mut v: Vec4 = std::array::from_fn(|_| rng.sample(StandardNormal));
            let n = crate::linalg::norm(&v);
            v.iter_mut().for_each(|c| *c /= n);
            let tv = TangentVector::new(v);
            if !l.admissible(x, &tv) {
                continue;
            }
            if let Ok(g) = spray_coefficients(l, x, &tv) {
                dirs.push((v, g.map(|c| 2.0 * c)));
            }
        }
        if dirs.len() < MIN_DIRECTIONS {
            return Err(Error::InsufficientDirections { usable: dirs.len() });
        }
        let rows = DMatrix::from_fn(dirs.len(), 10, |i, k| {
            let (a, b) = PAIRS[k];
            let f = if a == b { 1.0 } else { 2.0 };
            f * dirs[i].0[a] * dirs[i].0[b]
        });
        let svd = rows.clone().svd(true, true);
        let mut gamma = [[[0.0; 4]; 4]; 4];
        let mut num = 0.0f64;
        let den = dirs.iter().fold(0.0f64, |m, d| m.max(crate::linalg::norm(&d.1))).max(1e-9);
        let mut fitted = vec![[0.0; 4]; dirs.len()];
        for m in 0..4 {
            let y = DVector::from_fn(dirs.len(), |i, _| dirs[i].1[m]);
            let sol = svd.solve(&y, 1e-14).map_err(|e| Error::UndefinedResidual(e.to_string()))?;
            for (k, &(a, b)) in PAIRS.iter().enumerate() {
                gamma[m][a][b] = sol[k];
                gamma[m][b][a] = sol[k];
            }
            let pred = &rows * &sol;
            for i in 0..dirs.len() {
                fitted[i][m] = pred[i];
            }
        }
        for i in 0..dirs.len() {
            let d: Vec4 = std::array::from_fn(|m| dirs[i].1[m] - fitted[i][m]);
            num = num.max(crate::linalg::norm(&d));
        }
        let residual = num / den;
        worst = worst.max(residual);
        out.push(BerwaldPoint { x: *x, gamma, residual, directions: dirs.len() });
    }
    Ok(BerwaldFit { max_residual: worst, points: out })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NondegeneracyScan {
    pub min_abs_det: f64,
    pub min_hadamard_ratio: f64,
    /// Eigenvalue sign patterns, e.g. "-+++", with "0" for numerically zero eigenvalues.
    pub signatures: BTreeMap<String, usize>,
    pub degenerate: usize,
    pub samples: usize,
}

impl NondegeneracyScan {
    pub fn is_nondegenerate(&self) -> bool {
        self.degenerate == 0 && self.samples > 0
    }
}

pub fn nondegeneracy_scan<L: FinslerLagrangian>(l: &L, samples: &[(Point, TangentVector)]) -> NondegeneracyScan {
    let mut scan = NondegeneracyScan {
        min_abs_det: f64::INFINITY,
        min_hadamard_ratio: f64::INFINITY,
        signatures: BTreeMap::new(),
        degenerate: 0,
        samples: 0,
    };
    for (x, v) in samples {
        let Ok(g) = finsler_metric_tensor(l, x, v) else { continue };
        scan.samples += 1;
        let d = det(&g).abs();
        let ratio = hadamard_ratio(&g);
        scan.min_abs_det = scan.min_abs_det.min(d);
        scan.min_hadamard_ratio = scan.min_hadamard_ratio.min(ratio);
        if !(ratio >= DEGENERACY_TOL) {
            scan.degenerate += 1;
        }
        *scan.signatures.entry(signature(&g)).or_insert(0) += 1;
    }
    scan
}

/// Sign pattern of the eigenvalues in ascending order.
pub fn signature(g: &Mat4) -> String {
    let m = Matrix4::from_fn(|i, j| g[i][j]);
    let eig = SymmetricEigen::new(m);
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    let top = ev.iter().fold(0.0f64, |a, e| a.max(e.abs()));
    ev.iter()
        .map(|e| {
            if e.abs() <= 1e-12 * top {
                '0'
            } else if *e < 0.0 {
                '-'
            } else {
                '+'
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::MetricSpec;

    #[test]
    fn flat_quadratic_has_identity_metric_and_zero_spray() {
        let l = QuadraticLagrangian::new(MetricSpec::Euclidean, Cone::Any);
        let x = Point::new([0.1, 0.2, 0.3, 0.4]);
        let v = TangentVector::new([1.0, -2.0, 0.5, 0.0]);
        let g = finsler_metric_tensor(&l, &x, &v).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(g[i][j], if i == j { 1.0 } else { 0.0 });
            }
        }
        let s = spray(&l, &x, &v).unwrap();
        assert!(s.g.iter().all(|c| c.abs() < 1e-15));
    }

    #[test]
    fn minkowski_signature() {
        let l = QuadraticLagrangian::new(MetricSpec::Minkowski, Cone::Any);
        let scan = nondegeneracy_scan(&l, &[(Point::new([0.0; 4]), TangentVector::new([0.1, 1.0, 0.0, 0.0]))]);
        assert_eq!(scan.signatures.get("-+++"), Some(&1));
        assert!((scan.min_abs_det - 1.0).abs() < 1e-15);
    }
}

//! Symmetric affine connections with vectorial nonmetricity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    christoffel_from, inverse_metric, metric_covariant_derivative, metric_with_derivatives, oneform_with_derivatives,
    MetricField, OneFormField, Point, TangentVector,
};
use crate::linalg::{dot, mat_vec, quad, Mat4, Tensor3, Vec4};

/// Anything that supplies Γ^μ_{νρ}(x), indexed `[μ][ν][ρ]`.
pub trait AffineConnection: Send + Sync {
    fn coefficients(&self, x: &Point) -> Result<Tensor3>;
}

impl<T: AffineConnection> AffineConnection for &T {
    fn coefficients(&self, x: &Point) -> Result<Tensor3> {
        (**self).coefficients(x)
    }
}

/// The Levi-Civita connection of a metric (zero distortion).
#[derive(Clone, Debug)]
pub struct LeviCivita<M>(pub M);

impl<M: MetricField> AffineConnection for LeviCivita<M> {
    fn coefficients(&self, x: &Point) -> Result<Tensor3> {
        crate::geometry::christoffel(&self.0, x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonmetricityCoefficients {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl NonmetricityCoefficients {
    pub fn new(c1: f64, c2: f64, c3: f64) -> Result<Self> {
        if c1 == 0.0 && c2 == 0.0 && c3 == 0.0 {
            return Err(Error::ZeroCoefficients);
        }
        Ok(Self { c1, c2, c3 })
    }
}

#[derive(Clone, Debug)]
pub struct VectorialConnection<M, B> {
    pub metric: M,
    pub oneform: B,
    pub coeffs: NonmetricityCoefficients,
}

/// Field values at one point, shared by the tensor builders.
#[derive(Clone, Copy, Debug)]
pub struct LocalFields {
    pub g: Mat4,
    pub ginv: Mat4,
    pub dg: Tensor3,
    pub b: Vec4,
    pub db: Mat4,
    pub b_up: Vec4,
    /// ⟨b, b⟩
    pub bb: f64,
}

impl<M: MetricField, B: OneFormField> VectorialConnection<M, B> {
    pub fn new(metric: M, oneform: B, coeffs: NonmetricityCoefficients) -> Self {
        Self { metric, oneform, coeffs }
    }

    pub fn local(&self, x: &Point) -> Result<LocalFields> {
        let (g, dg) = metric_with_derivatives(&self.metric, x);
        let ginv = inverse_metric(&g, x)?;
        let (b, db) = oneform_with_derivatives(&self.oneform, x);
        let b_up = mat_vec(&ginv, &b);
        Ok(LocalFields { g, ginv, dg, b, db, b_up, bb: dot(&b, &b_up) })
    }

    pub fn christoffel(&self, x: &Point) -> Result<Tensor3> {
        let f = self.local(x)?;
        Ok(christoffel_from(&f.ginv, &f.dg))
    }

    /// ∇̊_μ b_ν
    pub fn levi_civita_derivative(&self, x: &Point) -> Result<Mat4> {
        let f = self.local(x)?;
        let gamma = christoffel_from(&f.ginv, &f.dg);
        Ok(crate::geometry::covariant_from(&gamma, &f.b, &f.db))
    }
}

impl<M: MetricField, B: OneFormField> AffineConnection for VectorialConnection<M, B> {
    fn coefficients(&self, x: &Point) -> Result<Tensor3> {
        connection_coefficients(self, x)
    }
}

fn kron(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

/// Q_{μνρ} = c1 b_μ a_{νρ} + c2 (b_ρ a_{μν} + b_ν a_{ρμ}) + c3 b_μ b_ν b_ρ
pub fn nonmetricity_tensor<M: MetricField, B: OneFormField>(
    conn: &VectorialConnection<M, B>,
    x: &Point,
) -> Result<Tensor3> {
    let f = conn.local(x)?;
    let c = conn.coeffs;
    let (a, b) = (f.g, f.b);
    Ok(std::array::from_fn(|m| {
        std::array::from_fn(|n| {
            std::array::from_fn(|r| {
                c.c1 * b[m] * a[n][r] + c.c2 * (b[r] * a[m][n] + b[n] * a[r][m]) + c.c3 * b[m] * b[n] * b[r]
            })
        })
    }))
}

pub(crate) fn distortion_from(c: &NonmetricityCoefficients, f: &LocalFields) -> Tensor3 {
    let (a, b, bu) = (f.g, f.b, f.b_up);
    let k = 0.5 * (2.0 * c.c2 - c.c1);
    std::array::from_fn(|m| {
        std::array::from_fn(|n| {
            std::array::from_fn(|r| {
                k * bu[m] * a[n][r]
                    + 0.5 * c.c1 * (b[n] * kron(m, r) + b[r] * kron(m, n))
                    + 0.5 * c.c3 * bu[m] * b[n] * b[r]
            })
        })
    })
}

/// D^μ_{νρ}, indexed `[μ][ν][ρ]`.
pub fn distortion_tensor<M: MetricField, B: OneFormField>(
    conn: &VectorialConnection<M, B>,
    x: &Point,
) -> Result<Tensor3> {
    let f = conn.local(x)?;
    Ok(distortion_from(&conn.coeffs, &f))
}

/// D^μ_{νρ} = ½ (Q_{νρ}{}^μ + Q_ρ{}^μ{}_ν − Q^μ{}_{νρ}) for any nonmetricity Q.
pub fn distortion_from_nonmetricity(ginv: &Mat4, q: &Tensor3) -> Tensor3 {
    std::array::from_fn(|m| {
        std::array::from_fn(|n| {
            std::array::from_fn(|r| {
                0.5 * (0..4).map(|s| ginv[m][s] * (q[n][r][s] + q[r][s][n] - q[s][n][r])).sum::<f64>()
            })
        })
    })
}

/// Γ = Γ̊ + D
pub fn connection_coefficients<M: MetricField, B: OneFormField>(
    conn: &VectorialConnection<M, B>,
    x: &Point,
) -> Result<Tensor3> {
    let f = conn.local(x)?;
    let lc = christoffel_from(&f.ginv, &f.dg);
    let d = distortion_from(&conn.coeffs, &f);
    let mut out = [[[0.0; 4]; 4]; 4];
    for m in 0..4 {
        for n in 0..4 {
            for r in n..4 {
                let v = lc[m][n][r] + d[m][n][r];
                out[m][n][r] = v;
                out[m][r][n] = v;
            }
        }
    }
    Ok(out)
}

/// −(∂_μ a_{νρ} − Γ^σ_{μν} a_{σρ} − Γ^σ_{μρ} a_{νσ}) for an arbitrary Γ.
pub fn nonmetricity_from_connection<M: MetricField>(a: &M, gamma: &Tensor3, x: &Point) -> Tensor3 {
    let (g, dg) = metric_with_derivatives(a, x);
    metric_covariant_derivative(&g, &dg, gamma).map(|m| m.map(|n| n.map(|v| -v)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContractedDistortion {
    /// D^ν_μ = D^ν_{μρ} v^ρ, indexed `[ν][μ]`.
    pub matrix: Mat4,
    /// D^ν_μ v_ν
    pub dv: Vec4,
    /// D^ν_μ b_ν
    pub db: Vec4,
}

/// Contractions by explicit index sums over D^ν_{μρ}.
pub fn contracted_distortion<M: MetricField, B: OneFormField>(
    conn: &VectorialConnection<M, B>,
    x: &Point,
    v: &TangentVector,
) -> Result<ContractedDistortion> {
    let f = conn.local(x)?;
    let d = distortion_from(&conn.coeffs, &f);
    let vv = v.components;
    let v_low = mat_vec(&f.g, &vv);
    let matrix: Mat4 = std::array::from_fn(|n| std::array::from_fn(|m| dot(&d[n][m], &vv)));
    let dv = std::array::from_fn(|m| (0..4).map(|n| matrix[n][m] * v_low[n]).sum());
    let db = std::array::from_fn(|m| (0..4).map(|n| matrix[n][m] * f.b[n]).sum());
    Ok(ContractedDistortion { matrix, dv, db })
}

/// Closed forms c2 B v_μ + ½(c3 B² + c1 A) b_μ and
/// (c2 − c1/2)⟨b,b⟩ v_μ + (c1 + c3⟨b,b⟩/2) B b_μ.
pub fn contracted_distortion_closed_form(c: &NonmetricityCoefficients, f: &LocalFields, v: &Vec4) -> (Vec4, Vec4) {
    let v_low = mat_vec(&f.g, v);
    let a = quad(&f.g, v, v);
    let bb = dot(&f.b, v);
    let dv = std::array::from_fn(|m| c.c2 * bb * v_low[m] + 0.5 * (c.c3 * bb * bb + c.c1 * a) * f.b[m]);
    let db = std::array::from_fn(|m| (c.c2 - 0.5 * c.c1) * f.bb * v_low[m] + (c.c1 + 0.5 * c.c3 * f.bb) * bb * f.b[m]);
    (dv, db)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SubfamilyTag {
    Weyl,
    Schroedinger,
    CompletelySymmetric,
    Generic,
}

impl SubfamilyTag {
    pub fn constraint(&self) -> &'static str {
        match self {
            SubfamilyTag::Weyl => "c2 = c3 = 0",
            SubfamilyTag::Schroedinger => "c1 + 2 c2 = 0, c3 = 0",
            SubfamilyTag::CompletelySymmetric => "c1 = c2",
            SubfamilyTag::Generic => "none",
        }
    }
}

/// All matching subfamilies; `Generic` only when nothing else matches.
pub fn classify_subfamily(c: &NonmetricityCoefficients) -> Vec<SubfamilyTag> {
    let scale = 1.0 + c.c1.abs().max(c.c2.abs()).max(c.c3.abs());
    let zero = |x: f64| x.abs() <= 1e-12 * scale;
    let mut tags = Vec::new();
    if zero(c.c2) && zero(c.c3) {
        tags.push(SubfamilyTag::Weyl);
    }
    if zero(c.c1 + 2.0 * c.c2) && zero(c.c3) {
        tags.push(SubfamilyTag::Schroedinger);
    }
    if zero(c.c1 - c.c2) {
        tags.push(SubfamilyTag::CompletelySymmetric);
    }
    if tags.is_empty() {
        tags.push(SubfamilyTag::Generic);
    }
    tags
}

/// −Γ^μ_{νρ} v^ν v^ρ
pub fn autoparallel_rhs<C: AffineConnection>(conn: &C, x: &Point, v: &TangentVector) -> Result<TangentVector> {
    let gamma = conn.coefficients(x)?;
    Ok(TangentVector::new(gamma_vv(&gamma, &v.components).map(|g| -g)))
}

/// Γ^μ_{νρ} v^ν v^ρ
pub fn gamma_vv(gamma: &Tensor3, v: &Vec4) -> Vec4 {
    std::array::from_fn(|m| quad(&gamma[m], v, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{MetricSpec, OneFormSpec};

    fn weyl_flat() -> VectorialConnection<MetricSpec, OneFormSpec> {
        VectorialConnection::new(
            MetricSpec::Euclidean,
            OneFormSpec::Constant { components: [1.0, 0.0, 0.0, 0.0] },
            NonmetricityCoefficients::new(2.0, 0.0, 0.0).unwrap(),
        )
    }

    #[test]
    fn weyl_distortion_entries() {
        let d = distortion_tensor(&weyl_flat(), &Point::new([0.0; 4])).unwrap();
        assert_eq!(d[0][0][0], 1.0);
        assert_eq!(d[1][0][1], 1.0);
        assert_eq!(d[0][1][1], -1.0);
    }

    #[test]
    fn weyl_nonmetricity_entries() {
        let q = nonmetricity_tensor(&weyl_flat(), &Point::new([0.0; 4])).unwrap();
        assert_eq!(q[0][0][0], 2.0);
        assert_eq!(q[0][1][1], 2.0);
        assert_eq!(q[1][0][1], 0.0);
    }

    #[test]
    fn zero_coefficients_rejected() {
        assert_eq!(NonmetricityCoefficients::new(0.0, 0.0, 0.0), Err(Error::ZeroCoefficients));
    }

    #[test]
    fn overlapping_tags() {
        let c = NonmetricityCoefficients::new(0.0, 0.0, 1.0).unwrap();
        // c1 = c2 = 0 matches the completely symmetric predicate only.
        assert_eq!(classify_subfamily(&c), vec![SubfamilyTag::CompletelySymmetric]);
        let c = NonmetricityCoefficients::new(1.0, 0.0, 0.0).unwrap();
        assert_eq!(classify_subfamily(&c), vec![SubfamilyTag::Weyl]);
    }
}

//! Pointwise invariants of a connection and a Lagrangian, measured as worst
//! cases over random samples.

use finsler_metrize::autodiff::Dual;
use finsler_metrize::connection::{
    connection_coefficients, distortion_from_nonmetricity, distortion_tensor, nonmetricity_from_connection,
    nonmetricity_tensor, VectorialConnection,
};
use finsler_metrize::finsler::{finsler_metric_tensor, spray_coefficients, FinslerLagrangian};
use finsler_metrize::geometry::{
    christoffel, inverse_metric, metric_covariant_derivative, metric_with_derivatives, MetricField, OneFormField,
    Point, TangentVector,
};
use finsler_metrize::linalg::{Mat4, Tensor3};
use finsler_metrize::Error;

pub const HOMOGENEITY_TOL: f64 = 1e-8;
pub const EULER_TOL: f64 = 1e-8;
pub const SPRAY_HOMOGENEITY_TOL: f64 = 1e-8;
pub const HESSIAN_ROUTES_TOL: f64 = 1e-10;
pub const COMPATIBILITY_TOL: f64 = 1e-8;
pub const Q_RECOVERY_TOL: f64 = 1e-12;

pub const HOMOGENEITY_FACTORS: [f64; 3] = [0.5, 2.0, 7.3];
pub const SPRAY_FACTORS: [f64; 2] = [0.5, 2.0];

#[derive(Debug, Default)]
pub struct ConnectionInvariants {
    pub points: usize,
    /// max |∇̊a|
    pub compatibility: f64,
    /// max |Γ^μ_{νρ} − Γ^μ_{ρν}|, must be exactly 0
    pub torsion: f64,
    /// max |Γ − (Γ̊ + D)| with D from the unsymmetrized distortion builder
    pub decomposition: f64,
    /// max |Q(Γ) − Q| / (1 + max|Q|)
    pub q_recovery: f64,
    /// max |D(Q) − D| / (1 + max|D|)
    pub distortion_from_q: f64,
}

impl ConnectionInvariants {
    pub fn passed(&self) -> bool {
        self.compatibility < COMPATIBILITY_TOL
            && self.torsion == 0.0
            && self.decomposition < Q_RECOVERY_TOL
            && self.q_recovery < Q_RECOVERY_TOL
            && self.distortion_from_q < Q_RECOVERY_TOL
    }
}

fn max3(t: &Tensor3) -> f64 {
    t.iter().flatten().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn diff3(a: &Tensor3, b: &Tensor3) -> f64 {
    let mut m = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                m = m.max((a[i][j][k] - b[i][j][k]).abs());
            }
        }
    }
    m
}

pub fn connection_invariants<M: MetricField, B: OneFormField>(
    conn: &VectorialConnection<M, B>,
    points: &[Point],
) -> ConnectionInvariants {
    let mut out = ConnectionInvariants { points: points.len(), ..Default::default() };
    for x in points {
        let (g, dg) = metric_with_derivatives(&conn.metric, x);
        let lc = christoffel(&conn.metric, x).unwrap();
        out.compatibility = out.compatibility.max(max3(&metric_covariant_derivative(&g, &dg, &lc)));

        let gamma = connection_coefficients(conn, x).unwrap();
        let d = distortion_tensor(conn, x).unwrap();
        for m in 0..4 {
            for n in 0..4 {
                for r in 0..4 {
                    out.torsion = out.torsion.max((gamma[m][n][r] - gamma[m][r][n]).abs());
                    let sum = lc[m][n][r] + d[m][n][r];
                    out.decomposition = out.decomposition.max((gamma[m][n][r] - sum).abs() / (1.0 + sum.abs()));
                }
            }
        }

        let q = nonmetricity_tensor(conn, x).unwrap();
        let q_back = nonmetricity_from_connection(&conn.metric, &gamma, x);
        out.q_recovery = out.q_recovery.max(diff3(&q, &q_back) / (1.0 + max3(&q)));
        let ginv = inverse_metric(&g, x).unwrap();
        let d_back = distortion_from_nonmetricity(&ginv, &q);
        out.distortion_from_q = out.distortion_from_q.max(diff3(&d, &d_back) / (1.0 + max3(&d)));
    }
    out
}

#[derive(Debug, Default)]
pub struct LagrangianInvariants {
    pub samples: usize,
    /// max |L(x, λv) − λ²L(x, v)| / |λ²L|
    pub homogeneity: f64,
    /// max |g(v, v) − L| / |L|
    pub euler: f64,
    /// max |g_{μν} − g_{νμ}|, must be exactly 0
    pub hessian_asymmetry: f64,
    /// max |g − g'| / (1 + max|g|), g' from nested first-order duals
    pub hessian_routes: f64,
    /// max ‖G(x, λv) − λ²G(x, v)‖ / (1 + ‖λ²G‖); None when L has no spray
    pub spray_homogeneity: Option<f64>,
    pub spray_error: Option<String>,
}

impl LagrangianInvariants {
    /// Spray homogeneity is only required where the spray exists.
    pub fn passed(&self) -> bool {
        self.homogeneity < HOMOGENEITY_TOL
            && self.euler < EULER_TOL
            && self.hessian_asymmetry == 0.0
            && self.hessian_routes < HESSIAN_ROUTES_TOL
            && self.spray_homogeneity.is_none_or(|s| s < SPRAY_HOMOGENEITY_TOL)
    }
}

type Inner = Dual<f64, 4>;
type Nested = Dual<Inner, 4>;

/// ½ ∂̇∂̇L by differentiating the gradient, an independent route to the
/// second-order jet used by `finsler_metric_tensor`.
fn hessian_nested<L: FinslerLagrangian>(l: &L, x: &Point, v: &TangentVector) -> Mat4 {
    let xs: [Nested; 4] = std::array::from_fn(|i| Nested::constant(Inner::constant(x.coords[i])));
    let vs: [Nested; 4] = std::array::from_fn(|i| {
        let mut d = Nested::constant(Inner::variable(v.components[i], i));
        d.d[i] = Inner::constant(1.0);
        d
    });
    let out = l.eval(&xs, &vs);
    std::array::from_fn(|i| std::array::from_fn(|k| 0.5 * out.d[i].d[k]))
}

pub fn lagrangian_invariants<L: FinslerLagrangian>(l: &L, pairs: &[(Point, TangentVector)]) -> LagrangianInvariants {
    let mut out = LagrangianInvariants { samples: pairs.len(), spray_homogeneity: Some(0.0), ..Default::default() };
    for (x, v) in pairs {
        let lv = l.eval(&x.coords, &v.components);
        for t in HOMOGENEITY_FACTORS {
            let scaled = v.components.map(|c| t * c);
            let lt = l.eval(&x.coords, &scaled);
            out.homogeneity = out.homogeneity.max((lt - t * t * lv).abs() / (t * t * lv).abs());
        }

        let g = finsler_metric_tensor(l, x, v).unwrap();
        let vv = v.components;
        let gvv: f64 = (0..4).flat_map(|i| (0..4).map(move |k| (i, k))).map(|(i, k)| g[i][k] * vv[i] * vv[k]).sum();
        out.euler = out.euler.max((gvv - lv).abs() / lv.abs());

        let h = hessian_nested(l, x, v);
        let gmax = g.iter().flatten().fold(0.0f64, |m, e| m.max(e.abs()));
        for i in 0..4 {
            for k in 0..4 {
                out.hessian_asymmetry = out.hessian_asymmetry.max((g[i][k] - g[k][i]).abs());
                out.hessian_routes = out.hessian_routes.max((g[i][k] - h[i][k]).abs() / (1.0 + gmax));
            }
        }

        if out.spray_error.is_some() {
            continue;
        }
        match spray_coefficients(l, x, v) {
            Ok(g1) => {
                for t in SPRAY_FACTORS {
                    let gt = spray_coefficients(l, x, &TangentVector::new(vv.map(|c| t * c))).unwrap();
                    let expect = g1.map(|c| t * t * c);
                    let scale = 1.0 + expect.iter().map(|c| c * c).sum::<f64>().sqrt();
                    let d = (0..4).map(|m| (gt[m] - expect[m]).powi(2)).sum::<f64>().sqrt();
                    let s = out.spray_homogeneity.get_or_insert(0.0);
                    *s = s.max(d / scale);
                }
            }
            Err(e @ Error::DegenerateHessian { .. }) => {
                out.spray_homogeneity = None;
                out.spray_error = Some(e.to_string());
            }
            Err(e) => panic!("spray at {x:?}, {v:?}: {e}"),
        }
    }
    out
}

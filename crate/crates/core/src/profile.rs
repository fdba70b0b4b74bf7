//! Tabulated functions of |b| and their integrals.
//!
//! A fitted profile λ(|b|) is stored as one quadratic per |b| bin. Integrals
//! ∫ tⁿ/λ(t) dt are evaluated by adaptive Simpson, and their derivatives come
//! from the local Taylor expansion of the integrand, so the integrals compose
//! with the AD types to any order.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::autodiff::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseQuadratic {
    /// Segment boundaries, ascending; segment j is [edges[j], edges[j+1]].
    pub edges: Vec<f64>,
    pub centers: Vec<f64>,
    /// q0 + q1 (t − c) + q2 (t − c)²
    pub coeffs: Vec<[f64; 3]>,
}

/// Result of fitting a profile to scattered (t, y) data.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileFit {
    pub table: PiecewiseQuadratic,
    /// Max |y − q(t)| over the samples, divided by (1 + max |y|).
    pub spread: f64,
    /// False when every sample has (nearly) the same t.
    pub has_spread: bool,
}

impl PiecewiseQuadratic {
    pub fn single(center: f64, coeffs: [f64; 3], lo: f64, hi: f64) -> Self {
        Self { edges: vec![lo, hi], centers: vec![center], coeffs: vec![coeffs] }
    }

    /// Least-squares quadratic per bin of roughly equal sample count.
    pub fn fit(samples: &[(f64, f64)], bins: usize) -> ProfileFit {
        assert!(!samples.is_empty(), "profile fit needs samples");
        let mut s = samples.to_vec();
        s.sort_by(|a, b| a.0.total_cmp(&b.0));
        let lo = s[0].0;
        let hi = s[s.len() - 1].0;
        let has_spread = hi - lo > 1e-9 * (1.0 + lo.abs().max(hi.abs()));
        let nbins = if has_spread { bins.max(1).min(s.len() / 4).max(1) } else { 1 };
        let per = s.len() / nbins;
        let mut groups: Vec<&[(f64, f64)]> = Vec::with_capacity(nbins);
        for j in 0..nbins {
            let end = if j + 1 == nbins { s.len() } else { (j + 1) * per };
            groups.push(&s[j * per..end]);
        }
        let mut edges = vec![lo];
        let mut centers = Vec::new();
        let mut coeffs = Vec::new();
        for (j, g) in groups.iter().enumerate() {
            let c = g.iter().map(|p| p.0).sum::<f64>() / g.len() as f64;
            centers.push(c);
            coeffs.push(fit_quadratic(g, c));
            if j + 1 < groups.len() {
                edges.push(0.5 * (g[g.len() - 1].0 + groups[j + 1][0].0));
            }
        }
        edges.push(hi);
        let table = Self { edges, centers, coeffs };
        let ymax = s.iter().fold(0.0f64, |m, p| m.max(p.1.abs()));
        let spread = s.iter().fold(0.0f64, |m, p| m.max((p.1 - table.eval(p.0)).abs())) / (1.0 + ymax);
        ProfileFit { table, spread, has_spread }
    }

    pub fn segment(&self, t: f64) -> usize {
        let inner = &self.edges[1..self.edges.len() - 1];
        inner.partition_point(|&e| e <= t)
    }

    pub fn eval<S: Real>(&self, t: S) -> S {
        let j = self.segment(t.value());
        let [q0, q1, q2] = self.coeffs[j];
        let d = t - self.centers[j];
        d * (d * q2 + q1) + q0
    }

    /// Taylor coefficients (order 0, 1, 2) of the segment polynomial at t.
    fn taylor(&self, t: f64) -> [f64; 3] {
        let j = self.segment(t);
        let [q0, q1, q2] = self.coeffs[j];
        let d = t - self.centers[j];
        [q0 + q1 * d + q2 * d * d, q1 + 2.0 * q2 * d, q2]
    }

    pub fn range(&self) -> (f64, f64) {
        (self.edges[0], self.edges[self.edges.len() - 1])
    }
}

fn fit_quadratic(g: &[(f64, f64)], c: f64) -> [f64; 3] {
    let n = g.len();
    let a = DMatrix::from_fn(n, 3, |i, k| (g[i].0 - c).powi(k as i32));
    let y = DVector::from_fn(n, |i, _| g[i].1);
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    match svd.solve(&y, 1e-12 * smax.max(f64::MIN_POSITIVE)) {
        Ok(sol) => [sol[0], sol[1], sol[2]],
        Err(_) => [y.mean(), 0.0, 0.0],
    }
}

/// t ↦ ∫_anchor^t sⁿ / λ(s) ds, differentiable to any order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileIntegral {
    pub table: PiecewiseQuadratic,
    pub power: u32,
    pub anchor: f64,
    /// ∫ from edges[0] to edges[k] of the integrand.
    cumulative: Vec<f64>,
    anchor_offset: f64,
}

const SIMPSON_TOL: f64 = 1e-9;

impl ProfileIntegral {
    pub fn new(table: PiecewiseQuadratic, power: u32, anchor: f64) -> Self {
        let mut me = Self { table, power, anchor, cumulative: Vec::new(), anchor_offset: 0.0 };
        let mut acc = 0.0;
        me.cumulative.push(0.0);
        for k in 0..me.table.coeffs.len() {
            let (a, b) = (me.table.edges[k], me.table.edges[k + 1]);
            acc += me.segment_integral(k, a, b);
            me.cumulative.push(acc);
        }
        me.anchor_offset = me.integral_from_base(anchor);
        me
    }

    fn integrand_in(&self, k: usize, t: f64) -> f64 {
        let [q0, q1, q2] = self.table.coeffs[k];
        let d = t - self.table.centers[k];
        t.powi(self.power as i32) / (q0 + q1 * d + q2 * d * d)
    }

    fn segment_integral(&self, k: usize, a: f64, b: f64) -> f64 {
        adaptive_simpson(&|t| self.integrand_in(k, t), a, b, SIMPSON_TOL)
    }

    /// Integral from edges[0].
    fn integral_from_base(&self, t: f64) -> f64 {
        let k = self.table.segment(t);
        let e = self.table.edges[k];
        self.cumulative[k] + self.segment_integral(k, e, t)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.integral_from_base(t) - self.anchor_offset
    }

    /// k-th derivative at t.
    pub fn derivative(&self, t: f64, k: usize) -> f64 {
        if k == 0 {
            return self.value(t);
        }
        let order = k - 1;
        let coeffs = self.integrand_taylor(t, order);
        coeffs[order] * (1..=order).map(|i| i as f64).product::<f64>()
    }

    /// Taylor coefficients of tⁿ/λ(t) about t up to `order`.
    fn integrand_taylor(&self, t: f64, order: usize) -> Vec<f64> {
        let l = self.table.taylor(t);
        let n = self.power as usize;
        let num = |j: usize| -> f64 {
            if j > n {
                0.0
            } else {
                binomial(n, j) * t.powi((n - j) as i32)
            }
        };
        let mut c = Vec::with_capacity(order + 1);
        for j in 0..=order {
            let mut acc = num(j);
            for i in 1..=j.min(2) {
                acc -= l[i] * c[j - i];
            }
            c.push(acc / l[0]);
        }
        c
    }

    pub fn eval<S: Real>(&self, t: S) -> S {
        t.apply(&|x, k| self.derivative(x, k))
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Adaptive Simpson quadrature with a mixed absolute/relative tolerance.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let both = left + right;
    let err = both - whole;
    let bound = tol.max(tol * both.abs());
    if depth == 0 || err.abs() <= 15.0 * bound {
        both + err / 15.0
    } else {
        simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

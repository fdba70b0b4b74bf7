//! Dense 4×4 helpers, generic over [`Real`] so they differentiate.

use crate::autodiff::Real;

pub type Vec4<S = f64> = [S; 4];
pub type Mat4<S = f64> = [[S; 4]; 4];
/// Index order `[upper][lower][lower]` for connection-like arrays.
pub type Tensor3<S = f64> = [[[S; 4]; 4]; 4];

pub fn dot<S: Real>(a: &Vec4<S>, b: &Vec4<S>) -> S {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

pub fn mat_vec<S: Real>(m: &Mat4<S>, v: &Vec4<S>) -> Vec4<S> {
    std::array::from_fn(|i| dot(&m[i], v))
}

/// m_{ij} v^i w^j
pub fn quad<S: Real>(m: &Mat4<S>, v: &Vec4<S>, w: &Vec4<S>) -> S {
    dot(v, &mat_vec(m, w))
}

/// Gaussian elimination with partial pivoting. Returns the determinant and,
/// when it is nonzero, the inverse.
pub fn det_inverse<S: Real>(m: &Mat4<S>) -> (S, Option<Mat4<S>>) {
    let mut a = *m;
    let mut inv: Mat4<S> =
        std::array::from_fn(|i| std::array::from_fn(|j| S::from_f64(if i == j { 1.0 } else { 0.0 })));
    let mut det = S::one();
    for col in 0..4 {
        let piv = (col..4).max_by(|&i, &j| a[i][col].value().abs().total_cmp(&a[j][col].value().abs())).unwrap();
        if a[piv][col].value() == 0.0 {
            return (S::zero(), None);
        }
        if piv != col {
            a.swap(piv, col);
            inv.swap(piv, col);
            det = -det;
        }
        let p = a[col][col];
        det = det * p;
        let pinv = p.recip();
        for j in 0..4 {
            a[col][j] = a[col][j] * pinv;
            inv[col][j] = inv[col][j] * pinv;
        }
        for i in 0..4 {
            if i != col {
                let f = a[i][col];
                if f.value() != 0.0 {
                    for j in 0..4 {
                        a[i][j] = a[i][j] - f * a[col][j];
                        inv[i][j] = inv[i][j] - f * inv[col][j];
                    }
                }
            }
        }
    }
    (det, Some(inv))
}

pub fn det<S: Real>(m: &Mat4<S>) -> S {
    det_inverse(m).0
}

/// |det m| / Π‖row‖, which lies in [0, 1] and does not depend on units.
pub fn hadamard_ratio(m: &Mat4) -> f64 {
    let rows: f64 = m.iter().map(|r| dot(r, r).sqrt()).product();
    if rows == 0.0 {
        return 0.0;
    }
    det(m).abs() / rows
}

pub fn max_abs(m: &Mat4) -> f64 {
    m.iter().flatten().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

pub fn norm(v: &Vec4) -> f64 {
    dot(v, v).sqrt()
}

pub fn values<S: Real>(v: &Vec4<S>) -> Vec4 {
    std::array::from_fn(|i| v[i].value())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_roundtrip() {
        let m = [[2.0, 1.0, 0.0, 0.5], [1.0, -3.0, 0.2, 0.0], [0.0, 0.2, 1.0, 0.1], [0.5, 0.0, 0.1, 4.0]];
        let (d, inv) = det_inverse(&m);
        let inv = inv.unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let e: f64 = (0..4).map(|k| m[i][k] * inv[k][j]).sum();
                assert!((e - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
        assert!(d.abs() > 1.0);
    }

    #[test]
    fn singular_has_no_inverse() {
        let m = [[1.0, 2.0, 0.0, 0.0], [2.0, 4.0, 0.0, 0.0], [0.0; 4], [0.0, 0.0, 0.0, 1.0]];
        assert!(det_inverse(&m).1.is_none());
        assert_eq!(hadamard_ratio(&m), 0.0);
    }
}

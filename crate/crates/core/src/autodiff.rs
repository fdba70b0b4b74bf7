//! Forward-mode automatic differentiation.
//!
//! [`Dual`] carries first derivatives, [`Jet`] carries first and second
//! derivatives. Both are generic over an inner [`Real`], so they nest:
//! `Jet<Dual<f64, 4>, 8>` gives the Hessian of a function together with the
//! derivative of every Hessian entry along four extra seeds.
//!
//! Elementary functions are routed through [`Real::apply`], which receives
//! the function as a derivative oracle `f(x, k) = f⁽ᵏ⁾(x)`. Each layer of
//! nesting asks for one more derivative order.

#![allow(clippy::suspicious_arithmetic_impl)]

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// A scalar that behaves like a real number and may carry derivatives.
pub trait Real:
    Copy
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn from_f64(c: f64) -> Self;

    /// Plain value with all derivative parts dropped.
    fn value(&self) -> f64;

    /// Composes a univariate function, given through its derivatives, with `self`.
    fn apply(self, f: &dyn Fn(f64, usize) -> f64) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn recip(self) -> Self {
        self.apply(&|x, k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * factorial(k) * x.powi(-(k as i32) - 1)
        })
    }

    fn exp(self) -> Self {
        self.apply(&|x, _| x.exp())
    }

    fn ln(self) -> Self {
        self.apply(&|x, k| {
            if k == 0 {
                x.ln()
            } else {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * factorial(k - 1) * x.powi(-(k as i32))
            }
        })
    }

    fn powf(self, p: f64) -> Self {
        self.apply(&|x, k| falling(p, k) * x.powf(p - k as f64))
    }

    fn sqrt(self) -> Self {
        self.powf(0.5)
    }

    /// Integer power by repeated multiplication, exact for polynomials.
    fn powi(self, n: i32) -> Self {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut acc = Self::one();
        let mut base = self;
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    fn sin(self) -> Self {
        self.apply(&|x, k| match k % 4 {
            0 => x.sin(),
            1 => x.cos(),
            2 => -x.sin(),
            _ => -x.cos(),
        })
    }

    fn cos(self) -> Self {
        self.apply(&|x, k| match k % 4 {
            0 => x.cos(),
            1 => -x.sin(),
            2 => -x.cos(),
            _ => x.sin(),
        })
    }

    /// |x|, differentiated away from zero.
    fn abs(self) -> Self {
        if self.value() < 0.0 {
            -self
        } else {
            self
        }
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

/// p (p-1) ... (p-k+1)
fn falling(p: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (p - i as f64))
}

impl Real for f64 {
    fn from_f64(c: f64) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn apply(self, f: &dyn Fn(f64, usize) -> f64) -> Self {
        f(self, 0)
    }
    fn recip(self) -> Self {
        1.0 / self
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
}

/// First-order dual number with `N` independent seeds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T: Real, const N: usize> {
    pub v: T,
    pub d: [T; N],
}

impl<T: Real, const N: usize> Dual<T, N> {
    pub fn constant(v: T) -> Self {
        Self { v, d: [T::zero(); N] }
    }

    pub fn variable(v: T, i: usize) -> Self {
        let mut d = [T::zero(); N];
        d[i] = T::one();
        Self { v, d }
    }
}

impl<T: Real, const N: usize> Add for Dual<T, N> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { v: self.v + o.v, d: std::array::from_fn(|i| self.d[i] + o.d[i]) }
    }
}

impl<T: Real, const N: usize> Sub for Dual<T, N> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self { v: self.v - o.v, d: std::array::from_fn(|i| self.d[i] - o.d[i]) }
    }
}

impl<T: Real, const N: usize> Mul for Dual<T, N> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self { v: self.v * o.v, d: std::array::from_fn(|i| self.d[i] * o.v + self.v * o.d[i]) }
    }
}

impl<T: Real, const N: usize> Div for Dual<T, N> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let inv = o.v.recip();
        let q = self.v * inv;
        Self { v: q, d: std::array::from_fn(|i| (self.d[i] - q * o.d[i]) * inv) }
    }
}

impl<T: Real, const N: usize> Neg for Dual<T, N> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { v: -self.v, d: std::array::from_fn(|i| -self.d[i]) }
    }
}

impl<T: Real, const N: usize> Add<f64> for Dual<T, N> {
    type Output = Self;
    fn add(self, c: f64) -> Self {
        Self { v: self.v + c, d: self.d }
    }
}

impl<T: Real, const N: usize> Sub<f64> for Dual<T, N> {
    type Output = Self;
    fn sub(self, c: f64) -> Self {
        Self { v: self.v - c, d: self.d }
    }
}

impl<T: Real, const N: usize> Mul<f64> for Dual<T, N> {
    type Output = Self;
    fn mul(self, c: f64) -> Self {
        Self { v: self.v * c, d: std::array::from_fn(|i| self.d[i] * c) }
    }
}

impl<T: Real, const N: usize> Div<f64> for Dual<T, N> {
    type Output = Self;
    fn div(self, c: f64) -> Self {
        Self { v: self.v / c, d: std::array::from_fn(|i| self.d[i] / c) }
    }
}

impl<T: Real, const N: usize> Real for Dual<T, N> {
    fn from_f64(c: f64) -> Self {
        Self::constant(T::from_f64(c))
    }
    fn value(&self) -> f64 {
        self.v.value()
    }
    fn apply(self, f: &dyn Fn(f64, usize) -> f64) -> Self {
        let f1 = |x: f64, k: usize| f(x, k + 1);
        let v = self.v.apply(f);
        let d1 = self.v.apply(&f1);
        Self { v, d: std::array::from_fn(|i| d1 * self.d[i]) }
    }
}

/// Second-order jet: value, gradient and (symmetric) Hessian over `N` seeds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<T: Real, const N: usize> {
    pub v: T,
    pub g: [T; N],
    pub h: [[T; N]; N],
}

impl<T: Real, const N: usize> Jet<T, N> {
    pub fn constant(v: T) -> Self {
        Self { v, g: [T::zero(); N], h: [[T::zero(); N]; N] }
    }

    pub fn variable(v: T, i: usize) -> Self {
        let mut j = Self::constant(v);
        j.g[i] = T::one();
        j
    }

    fn sym(f: impl Fn(usize, usize) -> T) -> [[T; N]; N] {
        let mut h = [[T::zero(); N]; N];
        for i in 0..N {
            for j in i..N {
                let x = f(i, j);
                h[i][j] = x;
                h[j][i] = x;
            }
        }
        h
    }
}

impl<T: Real, const N: usize> Add for Jet<T, N> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            v: self.v + o.v,
            g: std::array::from_fn(|i| self.g[i] + o.g[i]),
            h: Self::sym(|i, j| self.h[i][j] + o.h[i][j]),
        }
    }
}

impl<T: Real, const N: usize> Sub for Jet<T, N> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self {
            v: self.v - o.v,
            g: std::array::from_fn(|i| self.g[i] - o.g[i]),
            h: Self::sym(|i, j| self.h[i][j] - o.h[i][j]),
        }
    }
}

impl<T: Real, const N: usize> Mul for Jet<T, N> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self {
            v: self.v * o.v,
            g: std::array::from_fn(|i| self.g[i] * o.v + self.v * o.g[i]),
            h: Self::sym(|i, j| self.h[i][j] * o.v + self.v * o.h[i][j] + (self.g[i] * o.g[j] + self.g[j] * o.g[i])),
        }
    }
}

impl<T: Real, const N: usize> Div for Jet<T, N> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl<T: Real, const N: usize> Neg for Jet<T, N> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { v: -self.v, g: std::array::from_fn(|i| -self.g[i]), h: Self::sym(|i, j| -self.h[i][j]) }
    }
}

impl<T: Real, const N: usize> Add<f64> for Jet<T, N> {
    type Output = Self;
    fn add(self, c: f64) -> Self {
        Self { v: self.v + c, ..self }
    }
}

impl<T: Real, const N: usize> Sub<f64> for Jet<T, N> {
    type Output = Self;
    fn sub(self, c: f64) -> Self {
        Self { v: self.v - c, ..self }
    }
}

impl<T: Real, const N: usize> Mul<f64> for Jet<T, N> {
    type Output = Self;
    fn mul(self, c: f64) -> Self {
        Self { v: self.v * c, g: std::array::from_fn(|i| self.g[i] * c), h: Self::sym(|i, j| self.h[i][j] * c) }
    }
}

impl<T: Real, const N: usize> Div<f64> for Jet<T, N> {
    type Output = Self;
    fn div(self, c: f64) -> Self {
        self * (1.0 / c)
    }
}

impl<T: Real, const N: usize> Real for Jet<T, N> {
    fn from_f64(c: f64) -> Self {
        Self::constant(T::from_f64(c))
    }
    fn value(&self) -> f64 {
        self.v.value()
    }
    fn apply(self, f: &dyn Fn(f64, usize) -> f64) -> Self {
        let f1 = |x: f64, k: usize| f(x, k + 1);
        let f2 = |x: f64, k: usize| f(x, k + 2);
        let v = self.v.apply(f);
        let d1 = self.v.apply(&f1);
        let d2 = self.v.apply(&f2);
        Self {
            v,
            g: std::array::from_fn(|i| d1 * self.g[i]),
            h: Self::sym(|i, j| d2 * self.g[i] * self.g[j] + d1 * self.h[i][j]),
        }
    }
}

/// Value, gradient and Hessian of a scalar field in the four chart coordinates.
pub type Scalar2Jet = Jet<f64, 4>;

/// Lifts an array of constants into any [`Real`].
pub fn lift<S: Real, const N: usize>(a: &[f64; N]) -> [S; N] {
    std::array::from_fn(|i| S::from_f64(a[i]))
}

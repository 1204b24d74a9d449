//! Forward-mode automatic differentiation.
//!
//! Expression evaluation is generic over [`Scalar`]: plain `f64` for values,
//! [`Jet2`] for value + gradient + Hessian in two variables, and [`Dual`] for
//! first derivatives in `N` variables (parametric maps, implicit validators).

use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Number type an expression can be evaluated in.
pub trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn constant(v: f64) -> Self;

    fn value(&self) -> f64;

    /// Compose with a univariate function whose value and first two
    /// derivatives at `self.value()` are `f`, `d1`, `d2`.
    fn chain(self, f: f64, d1: f64, d2: f64) -> Self;

    /// Replace the value, keeping all derivative parts.
    fn with_value(self, v: f64) -> Self;

    /// True when the value and every carried derivative are finite.
    fn is_finite(&self) -> bool;

    fn recip(self) -> Self {
        let v = self.value();
        self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }

    /// Integer power by binary exponentiation.
    fn powi(self, n: i64) -> Self {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut acc = Self::constant(1.0);
        let mut base = self;
        let mut k = n as u64;
        let mut first = true;
        while k > 0 {
            if k & 1 == 1 {
                acc = if first { base } else { acc * base };
                first = false;
            }
            k >>= 1;
            if k > 0 {
                base = base * base;
            }
        }
        acc
    }
}

impl Scalar for f64 {
    fn constant(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn chain(self, f: f64, _d1: f64, _d2: f64) -> Self {
        f
    }
    fn with_value(self, v: f64) -> Self {
        v
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

/// Second-order jet of a scalar field in (x, y).
///
/// The Hessian is stored once (`hxy`), so it is symmetric by construction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Jet2 {
    pub value: f64,
    pub gx: f64,
    pub gy: f64,
    pub hxx: f64,
    pub hxy: f64,
    pub hyy: f64,
}

impl Jet2 {
    /// The coordinate function x seeded at `v`.
    pub fn var_x(v: f64) -> Self {
        Self { value: v, gx: 1.0, ..Self::default() }
    }

    /// The coordinate function y seeded at `v`.
    pub fn var_y(v: f64) -> Self {
        Self { value: v, gy: 1.0, ..Self::default() }
    }

    pub fn gradient(&self) -> [f64; 2] {
        [self.gx, self.gy]
    }

    pub fn hessian_det(&self) -> f64 {
        self.hxx * self.hyy - self.hxy * self.hxy
    }

    /// Derivative along the (not necessarily unit) direction `d`.
    pub fn directional(&self, d: [f64; 2]) -> f64 {
        self.gx * d[0] + self.gy * d[1]
    }
}

impl Add for Jet2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            value: self.value + o.value,
            gx: self.gx + o.gx,
            gy: self.gy + o.gy,
            hxx: self.hxx + o.hxx,
            hxy: self.hxy + o.hxy,
            hyy: self.hyy + o.hyy,
        }
    }
}

impl Sub for Jet2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self {
            value: self.value - o.value,
            gx: self.gx - o.gx,
            gy: self.gy - o.gy,
            hxx: self.hxx - o.hxx,
            hxy: self.hxy - o.hxy,
            hyy: self.hyy - o.hyy,
        }
    }
}

impl Neg for Jet2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self { value: -self.value, gx: -self.gx, gy: -self.gy, hxx: -self.hxx, hxy: -self.hxy, hyy: -self.hyy }
    }
}

impl Mul for Jet2 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (a, b) = (self, o);
        Self {
            value: a.value * b.value,
            gx: a.gx * b.value + a.value * b.gx,
            gy: a.gy * b.value + a.value * b.gy,
            hxx: a.hxx * b.value + a.value * b.hxx + 2.0 * a.gx * b.gx,
            hxy: a.hxy * b.value + a.value * b.hxy + a.gx * b.gy + a.gy * b.gx,
            hyy: a.hyy * b.value + a.value * b.hyy + 2.0 * a.gy * b.gy,
        }
    }
}

impl Div for Jet2 {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl Scalar for Jet2 {
    fn constant(v: f64) -> Self {
        Self { value: v, ..Self::default() }
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn chain(self, f: f64, d1: f64, d2: f64) -> Self {
        Self {
            value: f,
            gx: d1 * self.gx,
            gy: d1 * self.gy,
            hxx: d2 * self.gx * self.gx + d1 * self.hxx,
            hxy: d2 * self.gx * self.gy + d1 * self.hxy,
            hyy: d2 * self.gy * self.gy + d1 * self.hyy,
        }
    }
    fn with_value(self, v: f64) -> Self {
        Self { value: v, ..self }
    }
    fn is_finite(&self) -> bool {
        [self.value, self.gx, self.gy, self.hxx, self.hxy, self.hyy].iter().all(|v| v.is_finite())
    }
}

/// First-order dual number in `N` variables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<const N: usize> {
    pub value: f64,
    pub grad: [f64; N],
}

impl<const N: usize> Dual<N> {
    pub fn var(index: usize, v: f64) -> Self {
        let mut grad = [0.0; N];
        grad[index] = 1.0;
        Self { value: v, grad }
    }

    /// Seeds one variable per coordinate of `point`.
    pub fn seed(point: [f64; N]) -> [Self; N] {
        std::array::from_fn(|i| Self::var(i, point[i]))
    }

    pub fn grad_norm(&self) -> f64 {
        self.grad.iter().map(|g| g * g).sum::<f64>().sqrt()
    }
}

impl<const N: usize> Add for Dual<N> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { value: self.value + o.value, grad: std::array::from_fn(|i| self.grad[i] + o.grad[i]) }
    }
}

impl<const N: usize> Sub for Dual<N> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self { value: self.value - o.value, grad: std::array::from_fn(|i| self.grad[i] - o.grad[i]) }
    }
}

impl<const N: usize> Neg for Dual<N> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { value: -self.value, grad: self.grad.map(|g| -g) }
    }
}

impl<const N: usize> Mul for Dual<N> {
    type Output = Self;
    // Product rule.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, o: Self) -> Self {
        Self {
            value: self.value * o.value,
            grad: std::array::from_fn(|i| self.grad[i] * o.value + self.value * o.grad[i]),
        }
    }
}

impl<const N: usize> Div for Dual<N> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl<const N: usize> Scalar for Dual<N> {
    fn constant(v: f64) -> Self {
        Self { value: v, grad: [0.0; N] }
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn chain(self, f: f64, d1: f64, _d2: f64) -> Self {
        Self { value: f, grad: self.grad.map(|g| d1 * g) }
    }
    fn with_value(self, v: f64) -> Self {
        Self { value: v, ..self }
    }
    fn is_finite(&self) -> bool {
        self.value.is_finite() && self.grad.iter().all(|g| g.is_finite())
    }
}

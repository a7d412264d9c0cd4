//! Forward-mode dual numbers carrying a full second-order jet.
//!
//! A [`Dual2`] propagates a value, a gradient against `m` active seed
//! variables, and the symmetric Hessian (packed lower triangle). Evaluating a
//! Lagrangian on seeded duals yields every first and second partial
//! derivative exactly (to machine precision), which is what the Herglotz and
//! Lagrange-Poincare-Herglotz linear systems consume. Finite differences are
//! used in this crate only as test oracles.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{CoreError, Result};
use crate::math;

/// Packed lower-triangle index for a symmetric matrix, requires `i >= j`.
#[inline]
fn tri(i: usize, j: usize) -> usize {
    i * (i + 1) / 2 + j
}

/// A truncated second-order Taylor jet in `m` seed variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Dual2 {
    val: f64,
    grad: Vec<f64>,
    /// Symmetric Hessian, packed lower triangle of length `m (m + 1) / 2`.
    hess: Vec<f64>,
}

impl Dual2 {
    /// A constant: zero gradient and Hessian against `m` seeds.
    pub fn constant(val: f64, m: usize) -> Self {
        Self { val, grad: vec![0.0; m], hess: vec![0.0; m * (m + 1) / 2] }
    }

    /// The `idx`-th seed variable with value `val`.
    pub fn seeded(val: f64, m: usize, idx: usize) -> Self {
        let mut d = Self::constant(val, m);
        d.grad[idx] = 1.0;
        d
    }

    /// A single-seed jet moving with velocity `dv` (directional derivative).
    pub fn directional(val: f64, dv: f64) -> Self {
        Self { val, grad: vec![dv], hess: vec![0.0] }
    }

    /// A jet with explicit first-order sensitivities against chosen seeds.
    pub fn with_seeds(val: f64, m: usize, seeds: &[(usize, f64)]) -> Self {
        let mut d = Self::constant(val, m);
        for &(idx, dv) in seeds {
            d.grad[idx] = dv;
        }
        d
    }

    /// Seeds every entry of `values` as an independent variable.
    pub fn seed_all(values: &[f64]) -> Vec<Self> {
        let m = values.len();
        values.iter().enumerate().map(|(i, &v)| Self::seeded(v, m, i)).collect()
    }

    /// Lifts a slice of plain values to constants against `m` seeds.
    pub fn constants(values: &[f64], m: usize) -> Vec<Self> {
        values.iter().map(|&v| Self::constant(v, m)).collect()
    }

    pub fn value(&self) -> f64 {
        self.val
    }

    pub fn seeds(&self) -> usize {
        self.grad.len()
    }

    pub fn gradient(&self) -> &[f64] {
        &self.grad
    }

    /// Second derivative against seeds `i` and `j`.
    pub fn hessian(&self, i: usize, j: usize) -> f64 {
        if i >= j {
            self.hess[tri(i, j)]
        } else {
            self.hess[tri(j, i)]
        }
    }

    fn binary_check(&self, other: &Self) -> usize {
        debug_assert_eq!(self.grad.len(), other.grad.len(), "mismatched seed counts");
        self.grad.len()
    }

    fn add_impl(&self, other: &Self) -> Self {
        self.binary_check(other);
        Self {
            val: self.val + other.val,
            grad: self.grad.iter().zip(&other.grad).map(|(a, b)| a + b).collect(),
            hess: self.hess.iter().zip(&other.hess).map(|(a, b)| a + b).collect(),
        }
    }

    fn sub_impl(&self, other: &Self) -> Self {
        self.binary_check(other);
        Self {
            val: self.val - other.val,
            grad: self.grad.iter().zip(&other.grad).map(|(a, b)| a - b).collect(),
            hess: self.hess.iter().zip(&other.hess).map(|(a, b)| a - b).collect(),
        }
    }

    fn mul_impl(&self, other: &Self) -> Self {
        let m = self.binary_check(other);
        let val = self.val * other.val;
        let grad: Vec<f64> = (0..m)
            .map(|i| self.grad[i] * other.val + other.grad[i] * self.val)
            .collect();
        let mut hess = Vec::with_capacity(self.hess.len());
        for i in 0..m {
            for j in 0..=i {
                hess.push(
                    self.hess[tri(i, j)] * other.val
                        + other.hess[tri(i, j)] * self.val
                        + self.grad[i] * other.grad[j]
                        + self.grad[j] * other.grad[i],
                );
            }
        }
        Self { val, grad, hess }
    }

    fn neg_impl(&self) -> Self {
        Self {
            val: -self.val,
            grad: self.grad.iter().map(|g| -g).collect(),
            hess: self.hess.iter().map(|h| -h).collect(),
        }
    }

    /// Applies a scalar function by the chain rule: `f(u)`, `f'(u)`, `f''(u)`.
    fn chain(&self, f: f64, df: f64, d2f: f64) -> Self {
        let m = self.grad.len();
        let grad: Vec<f64> = self.grad.iter().map(|g| df * g).collect();
        let mut hess = Vec::with_capacity(self.hess.len());
        for i in 0..m {
            for j in 0..=i {
                hess.push(df * self.hess[tri(i, j)] + d2f * self.grad[i] * self.grad[j]);
            }
        }
        Self { val: f, grad, hess }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.chain(c * self.val, c, 0.0)
    }

    pub fn exp(&self) -> Self {
        let e = math::exp(self.val);
        self.chain(e, e, e)
    }

    pub fn ln(&self) -> Result<Self> {
        if self.val <= 0.0 {
            return Err(CoreError::DomainError("log of a non-positive value"));
        }
        let inv = 1.0 / self.val;
        Ok(self.chain(math::ln(self.val), inv, -inv * inv))
    }

    pub fn sin(&self) -> Self {
        let (s, c) = (math::sin(self.val), math::cos(self.val));
        self.chain(s, c, -s)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = (math::sin(self.val), math::cos(self.val));
        self.chain(c, -s, -c)
    }

    pub fn sqrt(&self) -> Result<Self> {
        if self.val <= 0.0 {
            return Err(CoreError::DomainError("sqrt of a non-positive value"));
        }
        let r = math::sqrt(self.val);
        Ok(self.chain(r, 0.5 / r, -0.25 / (r * self.val)))
    }

    pub fn powi(&self, n: i32) -> Self {
        let f = math::powi(self.val, n);
        let df = n as f64 * math::powi(self.val, n - 1);
        let d2f = (n as f64) * (n as f64 - 1.0) * math::powi(self.val, n - 2);
        self.chain(f, df, d2f)
    }

    pub fn powf(&self, p: f64) -> Result<Self> {
        if self.val <= 0.0 {
            return Err(CoreError::DomainError("powf of a non-positive base"));
        }
        let f = math::powf(self.val, p);
        let df = p * math::powf(self.val, p - 1.0);
        let d2f = p * (p - 1.0) * math::powf(self.val, p - 2.0);
        Ok(self.chain(f, df, d2f))
    }

    pub fn recip(&self) -> Result<Self> {
        if self.val == 0.0 {
            return Err(CoreError::DomainError("division by zero"));
        }
        let inv = 1.0 / self.val;
        Ok(self.chain(inv, -inv * inv, 2.0 * inv * inv * inv))
    }

    fn div_impl(&self, other: &Self) -> Self {
        // Hessian solves never divide by an exact zero in-domain; the guard
        // lives in `recip` for user-facing code paths.
        match other.recip() {
            Ok(r) => self.mul_impl(&r),
            Err(_) => {
                let m = self.grad.len();
                Self::constant(f64::NAN, m)
            }
        }
    }
}

macro_rules! impl_binop {
    ($trait:ident, $fn:ident, $impl:ident) => {
        impl $trait for &Dual2 {
            type Output = Dual2;
            fn $fn(self, rhs: &Dual2) -> Dual2 {
                self.$impl(rhs)
            }
        }
        impl $trait for Dual2 {
            type Output = Dual2;
            fn $fn(self, rhs: Dual2) -> Dual2 {
                self.$impl(&rhs)
            }
        }
        impl $trait<&Dual2> for Dual2 {
            type Output = Dual2;
            fn $fn(self, rhs: &Dual2) -> Dual2 {
                self.$impl(rhs)
            }
        }
        impl $trait<Dual2> for &Dual2 {
            type Output = Dual2;
            fn $fn(self, rhs: Dual2) -> Dual2 {
                self.$impl(&rhs)
            }
        }
    };
}

impl_binop!(Add, add, add_impl);
impl_binop!(Sub, sub, sub_impl);
impl_binop!(Mul, mul, mul_impl);
impl_binop!(Div, div, div_impl);

impl Neg for &Dual2 {
    type Output = Dual2;
    fn neg(self) -> Dual2 {
        self.neg_impl()
    }
}

impl Neg for Dual2 {
    type Output = Dual2;
    fn neg(self) -> Dual2 {
        self.neg_impl()
    }
}

impl Mul<f64> for &Dual2 {
    type Output = Dual2;
    fn mul(self, rhs: f64) -> Dual2 {
        self.scale(rhs)
    }
}

impl Mul<f64> for Dual2 {
    type Output = Dual2;
    fn mul(self, rhs: f64) -> Dual2 {
        self.scale(rhs)
    }
}

impl Add<f64> for &Dual2 {
    type Output = Dual2;
    fn add(self, rhs: f64) -> Dual2 {
        let mut out = self.clone();
        out.val += rhs;
        out
    }
}

impl Add<f64> for Dual2 {
    type Output = Dual2;
    fn add(self, rhs: f64) -> Dual2 {
        &self + rhs
    }
}

impl Sub<f64> for &Dual2 {
    type Output = Dual2;
    fn sub(self, rhs: f64) -> Dual2 {
        self + (-rhs)
    }
}

impl Sub<f64> for Dual2 {
    type Output = Dual2;
    fn sub(self, rhs: f64) -> Dual2 {
        &self + (-rhs)
    }
}

/// Solves a square linear system over dual numbers by Gaussian elimination
/// with partial pivoting on the value parts.
pub fn dual_solve(a: &[Vec<Dual2>], b: &[Dual2]) -> Result<Vec<Dual2>> {
    let n = a.len();
    if b.len() != n {
        return Err(CoreError::DimensionMismatch { expected: n, got: b.len() });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut a: Vec<Vec<Dual2>> = a.to_vec();
    let mut x: Vec<Dual2> = b.to_vec();
    let max_entry = a
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0_f64, |m, d| m.max(d.value().abs()));

    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_val = a[col][col].value().abs();
        for r in (col + 1)..n {
            let v = a[r][col].value().abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = r;
            }
        }
        if pivot_val <= 1e-12 * max_entry {
            return Err(CoreError::SingularMatrix);
        }
        if pivot_row != col {
            a.swap(col, pivot_row);
            x.swap(col, pivot_row);
        }
        let pivot = a[col][col].clone();
        for r in (col + 1)..n {
            if a[r][col].value() == 0.0 && a[r][col].gradient().iter().all(|g| *g == 0.0) {
                continue;
            }
            let factor = &a[r][col] / &pivot;
            for j in (col + 1)..n {
                a[r][j] = &a[r][j] - &(&factor * &a[col][j]);
            }
            x[r] = &x[r] - &(&factor * &x[col]);
            a[r][col] = Dual2::constant(0.0, factor.seeds());
        }
    }
    for i in (0..n).rev() {
        let mut acc = x[i].clone();
        for j in (i + 1)..n {
            acc = &acc - &(&a[i][j] * &x[j]);
        }
        x[i] = &acc / &a[i][i];
    }
    Ok(x)
}

/// Multiplies two dual matrices stored as nested row vectors.
pub fn dual_mat_mul(a: &[Vec<Dual2>], b: &[Vec<Dual2>]) -> Vec<Vec<Dual2>> {
    let rows = a.len();
    let inner = b.len();
    let cols = if inner == 0 { 0 } else { b[0].len() };
    let m = if rows == 0 || a[0].is_empty() {
        b.first().and_then(|r| r.first()).map_or(0, |d| d.seeds())
    } else {
        a[0][0].seeds()
    };
    let mut out = vec![vec![Dual2::constant(0.0, m); cols]; rows];
    for i in 0..rows {
        for k in 0..inner {
            for j in 0..cols {
                out[i][j] = &out[i][j] + &(&a[i][k] * &b[k][j]);
            }
        }
    }
    out
}

/// Applies a dual matrix to a dual vector.
pub fn dual_mat_vec(a: &[Vec<Dual2>], x: &[Dual2]) -> Vec<Dual2> {
    let m = x.first().map_or(0, |d| d.seeds());
    a.iter()
        .map(|row| {
            let mut acc = Dual2::constant(0.0, m);
            for (entry, xi) in row.iter().zip(x) {
                acc = &acc + &(entry * xi);
            }
            acc
        })
        .collect()
}

//! Scalar abstraction shared by plain floats, forward-mode dual numbers and
//! intervals.
//!
//! Vector fields are written once against [`Arith`]; evaluating them with
//! [`Interval`](crate::interval::Interval) yields the natural interval
//! extension, and with [`Dual`] yields one directional derivative.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Field operations needed to evaluate closed-form dynamics.
pub trait Arith:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn cst(v: f64) -> Self;

    fn sqr(self) -> Self {
        self * self
    }
}

/// Point-valued scalars (floats and duals) with an ordering on the primal part.
pub trait Real: Arith {
    fn value(self) -> f64;

    fn abs(self) -> Self {
        if self.value() < 0.0 {
            -self
        } else {
            self
        }
    }
}

impl Arith for f64 {
    #[inline]
    fn cst(v: f64) -> Self {
        v
    }
}

impl Real for f64 {
    #[inline]
    fn value(self) -> f64 {
        self
    }
}

/// Single-tangent dual number `re + eps·ε`, `ε² = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dual {
    pub re: f64,
    pub eps: f64,
}

impl Dual {
    pub const fn new(re: f64, eps: f64) -> Self {
        Self { re, eps }
    }

    pub const fn constant(re: f64) -> Self {
        Self { re, eps: 0.0 }
    }

    pub const fn variable(re: f64) -> Self {
        Self { re, eps: 1.0 }
    }
}

impl Add for Dual {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self::new(self.re + rhs.re, self.eps + rhs.eps)
    }
}

impl Sub for Dual {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.re - rhs.re, self.eps - rhs.eps)
    }
}

impl Mul for Dual {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        Self::new(self.re * rhs.re, self.re * rhs.eps + self.eps * rhs.re)
    }
}

impl Div for Dual {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let q = self.re / rhs.re;
        Self::new(q, (self.eps - q * rhs.eps) / rhs.re)
    }
}

impl Neg for Dual {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.re, -self.eps)
    }
}

impl Arith for Dual {
    #[inline]
    fn cst(v: f64) -> Self {
        Self::constant(v)
    }
}

impl Real for Dual {
    #[inline]
    fn value(self) -> f64 {
        self.re
    }
}

/// Row-major dense helpers over [`Real`] scalars, used by the dual-number
/// linearization where nalgebra's float-only routines do not apply.
pub(crate) mod dense {
    use super::Real;

    pub fn matmul<T: Real>(a: &[T], b: &[T], m: usize, k: usize, n: usize) -> Vec<T> {
        let mut out = vec![T::cst(0.0); m * n];
        for i in 0..m {
            for j in 0..n {
                let mut acc = T::cst(0.0);
                for l in 0..k {
                    acc = acc + a[i * k + l] * b[l * n + j];
                }
                out[i * n + j] = acc;
            }
        }
        out
    }

    /// Gauss-Jordan inverse with partial pivoting on the primal value.
    pub fn inverse<T: Real>(a: &[T], n: usize) -> Option<Vec<T>> {
        let mut m = a.to_vec();
        let mut inv = vec![T::cst(0.0); n * n];
        for i in 0..n {
            inv[i * n + i] = T::cst(1.0);
        }
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r1, &r2| {
                    m[r1 * n + col]
                        .value()
                        .abs()
                        .total_cmp(&m[r2 * n + col].value().abs())
                })
                .unwrap();
            if m[pivot * n + col].value() == 0.0 || !m[pivot * n + col].value().is_finite() {
                return None;
            }
            if pivot != col {
                for j in 0..n {
                    m.swap(pivot * n + j, col * n + j);
                    inv.swap(pivot * n + j, col * n + j);
                }
            }
            let p = m[col * n + col];
            for j in 0..n {
                m[col * n + j] = m[col * n + j] / p;
                inv[col * n + j] = inv[col * n + j] / p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = m[r * n + col];
                for j in 0..n {
                    m[r * n + j] = m[r * n + j] - factor * m[col * n + j];
                    inv[r * n + j] = inv[r * n + j] - factor * inv[col * n + j];
                }
            }
        }
        Some(inv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_product_and_quotient_rules() {
        let x = Dual::variable(3.0);
        let f = x * x / (x + Dual::cst(1.0));
        // d/dx x²/(x+1) = (x² + 2x)/(x+1)² at 3 → 15/16
        assert!((f.re - 9.0 / 4.0).abs() < 1e-15);
        assert!((f.eps - 15.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn dense_inverse_matches_identity() {
        let a = [4.0, 1.0, -2.0, 0.5, 3.0, 1.0, 2.0, -1.0, 5.0];
        let inv = dense::inverse(&a, 3).unwrap();
        let prod = dense::matmul(&a, &inv, 3, 3, 3);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((prod[i * 3 + j] - e).abs() < 1e-14);
            }
        }
        assert!(dense::inverse(&[1.0, 2.0, 2.0, 4.0], 2).is_none());
    }

    #[test]
    fn dual_inverse_derivative() {
        // d(A⁻¹) = -A⁻¹ dA A⁻¹ for A = diag(2, t), dA = diag(0, 1) at t = 4
        let a = [
            Dual::cst(2.0),
            Dual::cst(0.0),
            Dual::cst(0.0),
            Dual::variable(4.0),
        ];
        let inv = dense::inverse(&a, 2).unwrap();
        assert_eq!(inv[3].re, 0.25);
        assert!((inv[3].eps + 1.0 / 16.0).abs() < 1e-15);
    }
}

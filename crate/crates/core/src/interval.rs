//! Interval scalars, vectors and matrices.
//!
//! Arithmetic is plain floating point without outward rounding, so enclosures
//! are exact only up to round-off.

use std::fmt;
use std::ops::{Add, Div, Index, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Arith;

/// Default limit on the number of corner matrices (k ≤ 8 non-singleton entries).
pub const DEFAULT_CORNER_CAP: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    /// Panics if `lo > hi` or either bound is NaN.
    pub fn new(lo: f64, hi: f64) -> Self {
        Self::try_new(lo, hi).expect("interval bounds out of order")
    }

    pub fn try_new(lo: f64, hi: f64) -> Result<Self> {
        if lo <= hi {
            Ok(Self { lo, hi })
        } else {
            Err(Error::InvalidInterval { lo, hi })
        }
    }

    pub const fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub const fn entire() -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    /// `c ± r` for `r ≥ 0`.
    pub fn centered(c: f64, r: f64) -> Self {
        Self::new(c - r, c + r)
    }

    pub fn is_singleton(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        if self.is_singleton() {
            self.lo
        } else {
            0.5 * (self.lo + self.hi)
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval {
            lo: self.lo + rhs.lo,
            hi: self.hi + rhs.hi,
        }
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        Interval {
            lo: self.lo - rhs.hi,
            hi: self.hi - rhs.lo,
        }
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        interval_mul(self, rhs)
    }
}

impl Div for Interval {
    type Output = Interval;
    /// Division by an interval containing zero yields [`Interval::entire`].
    fn div(self, rhs: Interval) -> Interval {
        if rhs.contains(0.0) {
            return Interval::entire();
        }
        interval_mul(self, Interval::new(1.0 / rhs.hi, 1.0 / rhs.lo))
    }
}

impl Arith for Interval {
    fn cst(v: f64) -> Self {
        Interval::point(v)
    }

    fn sqr(self) -> Self {
        let (a, b) = (self.lo * self.lo, self.hi * self.hi);
        if self.contains(0.0) {
            Interval::new(0.0, a.max(b))
        } else {
            Interval::new(a.min(b), a.max(b))
        }
    }
}

/// Product of two intervals: the hull of the four endpoint products.
pub fn interval_mul(a: Interval, b: Interval) -> Interval {
    if (a.is_singleton() && a.lo == 0.0) || (b.is_singleton() && b.lo == 0.0) {
        return Interval::point(0.0);
    }
    let p = [a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi];
    Interval {
        lo: p.iter().copied().fold(f64::INFINITY, f64::min),
        hi: p.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntervalVector(pub Vec<Interval>);

impl IntervalVector {
    pub fn new(entries: Vec<Interval>) -> Self {
        Self(entries)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn from_bounds(lo: &[f64], hi: &[f64]) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                found: hi.len(),
            });
        }
        lo.iter()
            .zip(hi)
            .map(|(&l, &h)| Interval::try_new(l, h))
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn from_points(v: &[f64]) -> Self {
        Self(v.iter().map(|&x| Interval::point(x)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Interval> {
        self.0.iter()
    }

    pub fn midpoint(&self) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.0.iter().map(Interval::midpoint))
    }

    pub fn contains(&self, v: &[f64]) -> bool {
        v.len() == self.len() && self.0.iter().zip(v).all(|(i, &x)| i.contains(x))
    }

    /// Cartesian product `self × other`.
    pub fn concat(&self, other: &IntervalVector) -> IntervalVector {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        IntervalVector(v)
    }

    pub fn lower(&self) -> Vec<f64> {
        self.0.iter().map(|i| i.lo).collect()
    }

    pub fn upper(&self) -> Vec<f64> {
        self.0.iter().map(|i| i.hi).collect()
    }
}

impl Index<usize> for IntervalVector {
    type Output = Interval;
    fn index(&self, i: usize) -> &Interval {
        &self.0[i]
    }
}

/// Row-major interval matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Interval>,
}

impl IntervalMatrix {
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Interval>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Interval) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn singleton(m: &DMatrix<f64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| Interval::point(m[(i, j)]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Interval {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Interval) {
        self.data[i * self.cols + j] = v;
    }

    pub fn nonsingleton_count(&self) -> usize {
        self.data.iter().filter(|i| !i.is_singleton()).count()
    }

    pub fn contains(&self, m: &DMatrix<f64>) -> bool {
        m.nrows() == self.rows
            && m.ncols() == self.cols
            && (0..self.rows).all(|i| (0..self.cols).all(|j| self.get(i, j).contains(m[(i, j)])))
    }

    /// Columns `range` as a new interval matrix.
    pub fn columns(&self, range: std::ops::Range<usize>) -> IntervalMatrix {
        IntervalMatrix::from_fn(self.rows, range.len(), |i, j| self.get(i, range.start + j))
    }

    pub fn lower(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).lo)
    }

    pub fn upper(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).hi)
    }

    /// All `2^k` corner matrices, `k` the number of non-singleton entries.
    ///
    /// Entries are visited in row-major order; the first non-singleton entry
    /// varies slowest and each entry takes its lower bound before its upper.
    pub fn corners(&self, cap: usize) -> Result<Vec<DMatrix<f64>>> {
        let free: Vec<usize> = (0..self.data.len())
            .filter(|&e| !self.data[e].is_singleton())
            .collect();
        let k = free.len();
        if k >= usize::BITS as usize || (1usize << k) > cap {
            return Err(Error::CornerBudgetExceeded {
                nonsingleton: k,
                cap,
            });
        }
        let base = DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).lo);
        let mut out = Vec::with_capacity(1 << k);
        for mask in 0..(1usize << k) {
            let mut m = base.clone();
            for (pos, &e) in free.iter().enumerate() {
                if (mask >> (k - 1 - pos)) & 1 == 1 {
                    m[(e / self.cols, e % self.cols)] = self.data[e].hi;
                }
            }
            out.push(m);
        }
        Ok(out)
    }
}

/// Interval matrix-vector product.
pub fn interval_matvec(m: &IntervalMatrix, v: &IntervalVector) -> Result<IntervalVector> {
    if m.cols() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: m.cols(),
            found: v.len(),
        });
    }
    Ok(IntervalVector(
        (0..m.rows())
            .map(|i| {
                (0..m.cols()).fold(Interval::point(0.0), |acc, j| acc + m.get(i, j) * v[j])
            })
            .collect(),
    ))
}

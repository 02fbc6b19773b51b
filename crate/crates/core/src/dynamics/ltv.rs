use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::VectorField;
use crate::scalar::Arith;

type MatrixFn = Arc<dyn Fn(f64) -> DMatrix<f64> + Send + Sync>;

/// Linear time-varying system `ẋ = A(t)x + Bw`.
#[derive(Clone)]
pub struct Ltv {
    name: String,
    n: usize,
    a: MatrixFn,
    input: DMatrix<f64>,
}

impl fmt::Debug for Ltv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Ltv")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("a(0)", &(self.a)(0.0))
            .field("input", &self.input)
            .finish()
    }
}

/// `ẋ = A(t)x` without disturbance.
pub fn ltv(n: usize, a: impl Fn(f64) -> DMatrix<f64> + Send + Sync + 'static) -> Ltv {
    Ltv {
        name: "ltv".to_string(),
        n,
        a: Arc::new(a),
        input: DMatrix::zeros(n, 0),
    }
}

impl Ltv {
    /// Rotation `A = [[0, 1], [−1, 0]]`.
    pub fn rotation() -> Self {
        let mut sys = Self::constant(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));
        sys.name = "ltv-rotation".to_string();
        sys
    }

    pub fn constant(a: DMatrix<f64>) -> Self {
        let n = a.nrows();
        ltv(n, move |_| a.clone())
    }

    /// Adds an additive disturbance channel `B w`.
    pub fn with_input(mut self, input: DMatrix<f64>) -> Self {
        assert_eq!(input.nrows(), self.n);
        self.input = input;
        self
    }

    pub fn a(&self, t: f64) -> DMatrix<f64> {
        (self.a)(t)
    }

    pub fn input(&self) -> &DMatrix<f64> {
        &self.input
    }
}

impl VectorField for Ltv {
    fn name(&self) -> &str {
        &self.name
    }

    fn state_dim(&self) -> usize {
        self.n
    }

    fn disturbance_dim(&self) -> usize {
        self.input.ncols()
    }

    fn field<T: Arith>(&self, t: f64, x: &[T], w: &[T]) -> Vec<T> {
        let a = (self.a)(t);
        (0..self.n)
            .map(|i| {
                let ax = (0..self.n).fold(T::cst(0.0), |acc, j| acc + T::cst(a[(i, j)]) * x[j]);
                (0..w.len()).fold(ax, |acc, j| acc + T::cst(self.input[(i, j)]) * w[j])
            })
            .collect()
    }

    fn jacobian<T: Arith>(&self, t: f64, _x: &[T], _w: &[T]) -> Vec<T> {
        let a = (self.a)(t);
        let nw = self.input.ncols();
        let mut out = Vec::with_capacity(self.n * (self.n + nw));
        for i in 0..self.n {
            out.extend((0..self.n).map(|j| T::cst(a[(i, j)])));
            out.extend((0..nw).map(|j| T::cst(self.input[(i, j)])));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::ldi_corners;
    use crate::interval::{Interval, IntervalVector};
    use nalgebra::DVector;

    #[test]
    fn linear_field_has_singleton_ldi() {
        let sys = Ltv::rotation();
        let xbox = IntervalVector::new(vec![Interval::new(-1.0, 1.0); 2]);
        let ldi = ldi_corners(&sys, 0.0, &xbox, &IntervalVector::empty(), &[0.0, 0.0], &[], 256).unwrap();
        assert_eq!(ldi.mx, vec![sys.a(0.0)]);
    }

    #[test]
    fn zero_field() {
        let sys = ltv(3, |_| DMatrix::zeros(3, 3));
        let x = DVector::from_vec(vec![1.0, -2.0, 3.0]);
        assert_eq!(sys.eval(1.0, &x, &DVector::zeros(0)), DVector::zeros(3));
    }

    #[test]
    fn anchor_outside_box_is_rejected() {
        let sys = Ltv::rotation();
        let xbox = IntervalVector::new(vec![Interval::new(-1.0, 1.0); 2]);
        let r = ldi_corners(&sys, 0.0, &xbox, &IntervalVector::empty(), &[2.0, 0.0], &[], 256);
        assert!(matches!(r, Err(crate::Error::AnchorOutsideBox)));
    }

    #[test]
    fn disturbance_columns() {
        let sys = Ltv::rotation().with_input(DMatrix::from_row_slice(2, 1, &[0.0, 1.0]));
        let j = sys.jac_w(0.0, &DVector::zeros(2), &DVector::zeros(1));
        assert_eq!(j, DMatrix::from_row_slice(2, 1, &[0.0, 1.0]));
        let xbox = IntervalVector::new(vec![Interval::new(-1.0, 1.0); 2]);
        let wbox = IntervalVector::new(vec![Interval::new(-0.1, 0.1)]);
        let ldi = ldi_corners(&sys, 0.0, &xbox, &wbox, &[0.0, 0.0], &[0.0], 256).unwrap();
        assert_eq!(ldi.mw.len(), 1);
    }
}

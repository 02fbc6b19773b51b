//! Vector fields `ẋ = f(t, x, w)` and the interval linear differential
//! inclusion built from their Jacobians.

mod ltv;
mod robot_arm;
mod vanderpol;

pub use ltv::{ltv, Ltv};
pub use robot_arm::{robot_arm, RobotArm};
pub use vanderpol::{vanderpol, VanDerPol};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalMatrix, IntervalVector};
use crate::scalar::Arith;

/// A C¹ vector field with closed-form Jacobian.
///
/// `field` and `jacobian` are generic over the scalar: one expression serves
/// plain evaluation, dual numbers and natural interval extension.
pub trait VectorField {
    fn name(&self) -> &str;

    fn state_dim(&self) -> usize;

    fn disturbance_dim(&self) -> usize {
        0
    }

    fn field<T: Arith>(&self, t: f64, x: &[T], w: &[T]) -> Vec<T>;

    /// Row-major `n_x × (n_x + n_w)` matrix `[∂f/∂x | ∂f/∂w]`.
    fn jacobian<T: Arith>(&self, t: f64, x: &[T], w: &[T]) -> Vec<T>;

    /// Rejects boxes on which the interval extension of the Jacobian is
    /// not defined.
    fn check_box(&self, _t: f64, _zbox: &IntervalVector) -> Result<()> {
        Ok(())
    }

    fn eval(&self, t: f64, x: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
        DVector::from_vec(self.field(t, x.as_slice(), w.as_slice()))
    }

    fn jac_x(&self, t: f64, x: &DVector<f64>, w: &DVector<f64>) -> DMatrix<f64> {
        let n = self.state_dim();
        let cols = n + self.disturbance_dim();
        let j = self.jacobian(t, x.as_slice(), w.as_slice());
        DMatrix::from_fn(n, n, |r, c| j[r * cols + c])
    }

    fn jac_w(&self, t: f64, x: &DVector<f64>, w: &DVector<f64>) -> DMatrix<f64> {
        let n = self.state_dim();
        let nw = self.disturbance_dim();
        let j = self.jacobian(t, x.as_slice(), w.as_slice());
        DMatrix::from_fn(n, nw, |r, c| j[r * (n + nw) + n + c])
    }

    /// Interval matrix `[M]` over the stacked variables `z = (x, w)` with
    /// `g(z) − g(ẑ) ∈ [M](z − ẑ)` on the box.
    ///
    /// Column `j` is the interval extension of `∂f/∂z_j` evaluated on
    /// `(Z_1, …, Z_j, ẑ_{j+1}, …, ẑ_n)`.
    fn interval_jacobian(&self, t: f64, zbox: &IntervalVector, anchor: &[f64]) -> Result<IntervalMatrix> {
        let n = self.state_dim();
        let cols = n + self.disturbance_dim();
        if zbox.len() != cols || anchor.len() != cols {
            return Err(Error::DimensionMismatch {
                expected: cols,
                found: zbox.len().min(anchor.len()),
            });
        }
        self.check_box(t, zbox)?;
        let mut m = IntervalMatrix::from_fn(n, cols, |_, _| Interval::point(0.0));
        let mut args: Vec<Interval> = anchor.iter().map(|&a| Interval::point(a)).collect();
        for j in 0..cols {
            args[j] = zbox[j];
            let jac = self.jacobian(t, &args[..n], &args[n..]);
            for i in 0..n {
                let entry = jac[i * cols + j];
                if !entry.is_finite() {
                    return Err(Error::IllDefined(format!(
                        "{}: entry ({i}, {j}) of the interval Jacobian is unbounded",
                        self.name()
                    )));
                }
                m.set(i, j, entry);
            }
        }
        Ok(m)
    }
}

/// Corner matrices of the interval LDI `f(t,x,w) − f(t,x̊,ẘ) ∈ co{Mx}(x − x̊) + co{Mw}(w − ẘ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LdiCorners {
    pub mx: Vec<DMatrix<f64>>,
    pub mw: Vec<DMatrix<f64>>,
}

/// Builds the LDI on `x_box × w_box`, anchored at `(anchor_x, anchor_w)`.
pub fn ldi_corners<S: VectorField>(
    sys: &S,
    t: f64,
    x_box: &IntervalVector,
    w_box: &IntervalVector,
    anchor_x: &[f64],
    anchor_w: &[f64],
    corner_cap: usize,
) -> Result<LdiCorners> {
    let n = sys.state_dim();
    let zbox = x_box.concat(w_box);
    let anchor: Vec<f64> = anchor_x.iter().chain(anchor_w).copied().collect();
    if zbox.len() != anchor.len() {
        return Err(Error::DimensionMismatch {
            expected: zbox.len(),
            found: anchor.len(),
        });
    }
    if !zbox.contains(&anchor) {
        return Err(Error::AnchorOutsideBox);
    }
    let m = sys.interval_jacobian(t, &zbox, &anchor)?;
    let mx = m.columns(0..n).corners(corner_cap)?;
    let mw = m.columns(n..zbox.len()).corners(corner_cap)?;
    Ok(LdiCorners { mx, mw })
}

/// Benchmark systems selectable by name.
#[derive(Debug, Clone)]
pub enum System {
    RobotArm(RobotArm),
    VanDerPol(VanDerPol),
    Ltv(Ltv),
}

impl System {
    /// `robot-arm`, `vanderpol` or `ltv-rotation` with default parameters.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "robot-arm" => Ok(System::RobotArm(RobotArm::default())),
            "vanderpol" => Ok(System::VanDerPol(VanDerPol::default())),
            "ltv-rotation" => Ok(System::Ltv(Ltv::rotation())),
            other => Err(Error::Config(format!(
                "unknown system `{other}` (expected robot-arm, vanderpol or ltv-rotation)"
            ))),
        }
    }

    pub fn is_ltv(&self) -> bool {
        matches!(self, System::Ltv(_))
    }
}

macro_rules! dispatch {
    ($self:ident, $s:ident => $e:expr) => {
        match $self {
            System::RobotArm($s) => $e,
            System::VanDerPol($s) => $e,
            System::Ltv($s) => $e,
        }
    };
}

impl VectorField for System {
    fn name(&self) -> &str {
        dispatch!(self, s => s.name())
    }
    fn state_dim(&self) -> usize {
        dispatch!(self, s => s.state_dim())
    }
    fn disturbance_dim(&self) -> usize {
        dispatch!(self, s => s.disturbance_dim())
    }
    fn field<T: Arith>(&self, t: f64, x: &[T], w: &[T]) -> Vec<T> {
        dispatch!(self, s => s.field(t, x, w))
    }
    fn jacobian<T: Arith>(&self, t: f64, x: &[T], w: &[T]) -> Vec<T> {
        dispatch!(self, s => s.jacobian(t, x, w))
    }
    fn check_box(&self, t: f64, zbox: &IntervalVector) -> Result<()> {
        dispatch!(self, s => s.check_box(t, zbox))
    }
}

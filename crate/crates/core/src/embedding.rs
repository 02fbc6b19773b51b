//! The controlled normotope embedding system.
//!
//! A single Euler rollout of
//!
//! ```text
//! ẋ̊ = f(t, x̊, ẘ)
//! α̇ = U
//! ẏ = max_i μ((U + α Mx_i) α⁻¹) y + max_j ‖α Mw_j‖
//! ```
//!
//! yields a normotope `⟨x̊(t), α(t), y(t)⟩` enclosing the reachable set for any
//! hypercontrol `U`. The LDI corners `Mx_i`, `Mw_j` are rebuilt at every step
//! on the interval hull of the current normotope crossed with the disturbance
//! box.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dynamics::{ldi_corners, LdiCorners, VectorField};
use crate::error::{Error, Result};
use crate::interval::{IntervalVector, DEFAULT_CORNER_CAP};
use crate::matrix_norms::{log_norm, op_norm};
use crate::normotope::{checked_inverse, log_det_volume_cost, rcond, row_major, NormKind, Normotope, MIN_RCOND};

/// Center, shape and offset of a normotope, packed as
/// `X = vec(x̊, α row-major, y)` of length `n + n² + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingState {
    pub center: DVector<f64>,
    pub shape: DMatrix<f64>,
    pub offset: f64,
}

pub const fn packed_len(n: usize) -> usize {
    n + n * n + 1
}

impl EmbeddingState {
    pub fn new(center: DVector<f64>, shape: DMatrix<f64>, offset: f64) -> Result<Self> {
        let s = Self {
            center,
            shape,
            offset,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn from_normotope(n: &Normotope) -> Self {
        Self {
            center: n.center.clone(),
            shape: n.shape.clone(),
            offset: n.offset,
        }
    }

    pub fn to_normotope(&self, kind: NormKind) -> Result<Normotope> {
        Normotope::new(kind, self.center.clone(), self.shape.clone(), self.offset)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Checks `y > 0`, finiteness and the conditioning of α.
    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        if self.shape.shape() != (n, n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.shape.nrows(),
            });
        }
        if !self.offset.is_finite()
            || self.center.iter().any(|v| !v.is_finite())
            || self.shape.iter().any(|v| !v.is_finite())
        {
            return Err(Error::NonFinite("embedding state".into()));
        }
        if !(self.offset > 0.0) {
            return Err(Error::NonFinite(format!("offset {} is not positive", self.offset)));
        }
        let rc = rcond(&self.shape);
        if !(rc >= MIN_RCOND) {
            return Err(Error::SingularShape { rcond: rc });
        }
        Ok(())
    }

    pub fn pack(&self) -> DVector<f64> {
        let n = self.dim();
        let mut v = DVector::zeros(packed_len(n));
        v.rows_mut(0, n).copy_from(&self.center);
        for i in 0..n {
            for j in 0..n {
                v[n + i * n + j] = self.shape[(i, j)];
            }
        }
        v[n + n * n] = self.offset;
        v
    }

    /// Inverse of [`pack`](Self::pack); does not validate.
    pub fn unpack(n: usize, v: &[f64]) -> Result<Self> {
        if v.len() != packed_len(n) {
            return Err(Error::DimensionMismatch {
                expected: packed_len(n),
                found: v.len(),
            });
        }
        Ok(Self {
            center: DVector::from_column_slice(&v[..n]),
            shape: DMatrix::from_row_slice(n, n, &v[n..n + n * n]),
            offset: v[n + n * n],
        })
    }

    pub fn volume_cost(&self) -> Result<f64> {
        log_det_volume_cost(&self.shape, self.offset)
    }
}

/// Uniform grid `t_k = t₀ + k·h`, `k = 0…steps`, with `steps·h = t_f − t₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub tf: f64,
    pub steps: usize,
}

impl TimeGrid {
    /// Smallest uniform grid on `[t0, tf]` whose step does not exceed `h_max`.
    pub fn new(t0: f64, tf: f64, h_max: f64) -> Result<Self> {
        if !(h_max > 0.0) || !(tf > t0) || !t0.is_finite() || !tf.is_finite() {
            return Err(Error::Config(format!(
                "invalid time grid t0={t0}, tf={tf}, h={h_max}"
            )));
        }
        let steps = ((tf - t0) / h_max - 1e-9).ceil().max(1.0) as usize;
        Ok(Self { t0, tf, steps })
    }

    pub fn step(&self) -> f64 {
        (self.tf - self.t0) / self.steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.steps {
            self.tf
        } else {
            self.t0 + k as f64 * self.step()
        }
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Piecewise-constant feed-forward hypercontrol on a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct HypercontrolSchedule {
    pub grid: TimeGrid,
    pub values: Vec<DMatrix<f64>>,
}

impl HypercontrolSchedule {
    pub fn zeros(grid: TimeGrid, n: usize) -> Self {
        Self {
            grid,
            values: vec![DMatrix::zeros(n, n); grid.len()],
        }
    }

    pub fn constant(grid: TimeGrid, u: DMatrix<f64>) -> Self {
        Self {
            grid,
            values: vec![u; grid.len()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleRecord {
    t0: f64,
    tf: f64,
    steps: usize,
    values: Vec<Vec<f64>>,
}

impl Serialize for HypercontrolSchedule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ScheduleRecord {
            t0: self.grid.t0,
            tf: self.grid.tf,
            steps: self.grid.steps,
            values: self.values.iter().map(row_major).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for HypercontrolSchedule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = ScheduleRecord::deserialize(d)?;
        if r.values.len() != r.steps + 1 {
            return Err(D::Error::custom("schedule length does not match its grid"));
        }
        let values = r
            .values
            .iter()
            .map(|v| square_from_row_major(v).ok_or_else(|| D::Error::custom("non-square hypercontrol")))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Self {
            grid: TimeGrid {
                t0: r.t0,
                tf: r.tf,
                steps: r.steps,
            },
            values,
        })
    }
}

fn square_from_row_major(v: &[f64]) -> Option<DMatrix<f64>> {
    let n = (v.len() as f64).sqrt().round() as usize;
    (n * n == v.len()).then(|| DMatrix::from_row_slice(n, n, v))
}

/// How the applied hypercontrol is formed from the feed-forward term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    /// `U = −α ∂f/∂x(x̊) + U_ff`.
    #[default]
    Adjoint,
    /// `U = U_ff`.
    Raw,
}

/// Euler rollout of the embedding system, possibly truncated.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<EmbeddingState>,
    /// Hypercontrol applied on each Euler step (one fewer than `states`).
    pub hypercontrols: Vec<DMatrix<f64>>,
    pub phi: Vec<f64>,
    pub truncated: bool,
    pub t_end: f64,
    pub truncation_reason: Option<String>,
    /// Truncated by a numerical failure rather than by `phi_max`.
    pub numerical_failure: bool,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last_state(&self) -> &EmbeddingState {
        self.states.last().expect("trajectory always holds its initial state")
    }

    pub fn terminal_cost(&self) -> f64 {
        *self.phi.last().expect("trajectory always holds its initial state")
    }

    pub fn normotope_at(&self, k: usize, kind: NormKind) -> Result<Normotope> {
        self.states[k].to_normotope(kind)
    }

    /// Offsets scaled by `factor`, e.g. to build deliberately unsound tubes.
    pub fn with_scaled_offsets(&self, factor: f64) -> Trajectory {
        let mut t = self.clone();
        for s in &mut t.states {
            s.offset *= factor;
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TrajectoryRecord {
    times: Vec<f64>,
    centers: Vec<Vec<f64>>,
    shapes: Vec<Vec<f64>>,
    offsets: Vec<f64>,
    phi: Vec<f64>,
    truncated: bool,
    t_end: f64,
    #[serde(default)]
    hypercontrols: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    truncation_reason: Option<String>,
    #[serde(default)]
    numerical_failure: bool,
}

impl Serialize for Trajectory {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TrajectoryRecord {
            times: self.times.clone(),
            centers: self.states.iter().map(|x| x.center.as_slice().to_vec()).collect(),
            shapes: self.states.iter().map(|x| row_major(&x.shape)).collect(),
            offsets: self.states.iter().map(|x| x.offset).collect(),
            phi: self.phi.clone(),
            truncated: self.truncated,
            t_end: self.t_end,
            hypercontrols: self.hypercontrols.iter().map(row_major).collect(),
            truncation_reason: self.truncation_reason.clone(),
            numerical_failure: self.numerical_failure,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Trajectory {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = TrajectoryRecord::deserialize(d)?;
        let len = r.times.len();
        if len == 0
            || r.centers.len() != len
            || r.shapes.len() != len
            || r.offsets.len() != len
            || r.phi.len() != len
        {
            return Err(D::Error::custom("trajectory columns have inconsistent lengths"));
        }
        let states = r
            .centers
            .iter()
            .zip(&r.shapes)
            .zip(&r.offsets)
            .map(|((c, s), &y)| {
                let n = c.len();
                if s.len() != n * n {
                    return Err(D::Error::custom("shape matrix does not match center dimension"));
                }
                Ok(EmbeddingState {
                    center: DVector::from_column_slice(c),
                    shape: DMatrix::from_row_slice(n, n, s),
                    offset: y,
                })
            })
            .collect::<std::result::Result<Vec<_>, D::Error>>()?;
        let hypercontrols = r
            .hypercontrols
            .iter()
            .map(|v| square_from_row_major(v).ok_or_else(|| D::Error::custom("non-square hypercontrol")))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Trajectory {
            times: r.times,
            states,
            hypercontrols,
            phi: r.phi,
            truncated: r.truncated,
            t_end: r.t_end,
            truncation_reason: r.truncation_reason,
            numerical_failure: r.numerical_failure,
        })
    }
}

/// Corner indices attaining the maxima in the offset dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActiveCorners {
    pub state: usize,
    pub disturbance: usize,
    pub log_norm: f64,
    pub disturbance_norm: f64,
}

/// The embedding system for one vector field, norm and disturbance box.
#[derive(Debug, Clone)]
pub struct Embedding<'a, S> {
    pub sys: &'a S,
    pub kind: NormKind,
    pub disturbance: IntervalVector,
    pub corner_cap: usize,
}

/// `−α ∂f/∂x(t, x̊, ẘ) + U_ff`.
pub fn adjoint_policy<S: VectorField>(
    sys: &S,
    t: f64,
    state: &EmbeddingState,
    w_anchor: &DVector<f64>,
    uff: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let rc = rcond(&state.shape);
    if !(rc >= MIN_RCOND) {
        return Err(Error::SingularShape { rcond: rc });
    }
    let jac = sys.jac_x(t, &state.center, w_anchor);
    Ok(-(&state.shape * jac) + uff)
}

impl<'a, S: VectorField> Embedding<'a, S> {
    pub fn new(sys: &'a S, kind: NormKind) -> Self {
        Self {
            sys,
            kind,
            disturbance: IntervalVector::from_points(&vec![0.0; sys.disturbance_dim()]),
            corner_cap: DEFAULT_CORNER_CAP,
        }
    }

    pub fn with_disturbance(mut self, w_box: IntervalVector) -> Self {
        self.disturbance = w_box;
        self
    }

    pub fn with_corner_cap(mut self, cap: usize) -> Self {
        self.corner_cap = cap;
        self
    }

    pub fn state_dim(&self) -> usize {
        self.sys.state_dim()
    }

    /// Disturbance anchor `ẘ`, the midpoint of the disturbance box.
    pub fn w_anchor(&self) -> DVector<f64> {
        self.disturbance.midpoint()
    }

    fn check_dims(&self, state: &EmbeddingState) -> Result<()> {
        let n = self.sys.state_dim();
        if state.dim() != n || state.shape.shape() != (n, n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: state.dim(),
            });
        }
        if self.disturbance.len() != self.sys.disturbance_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.sys.disturbance_dim(),
                found: self.disturbance.len(),
            });
        }
        Ok(())
    }

    /// Applied hypercontrol for the given policy.
    pub fn hypercontrol(
        &self,
        policy: Policy,
        t: f64,
        state: &EmbeddingState,
        uff: &DMatrix<f64>,
    ) -> Result<DMatrix<f64>> {
        match policy {
            Policy::Adjoint => adjoint_policy(self.sys, t, state, &self.w_anchor(), uff),
            Policy::Raw => Ok(uff.clone()),
        }
    }

    /// LDI corners on the interval hull of the state's normotope × W.
    pub fn ldi(&self, t: f64, state: &EmbeddingState) -> Result<LdiCorners> {
        self.check_dims(state)?;
        let hull = state.to_normotope(self.kind)?.interval_hull()?;
        let w = self.w_anchor();
        ldi_corners(
            self.sys,
            t,
            &hull,
            &self.disturbance,
            state.center.as_slice(),
            w.as_slice(),
            self.corner_cap,
        )
    }

    /// Packed time derivative `F(t, X, U)`.
    pub fn rhs(&self, t: f64, state: &EmbeddingState, u: &DMatrix<f64>) -> Result<DVector<f64>> {
        let ldi = self.ldi(t, state)?;
        Ok(self.rhs_with_ldi(t, state, u, &ldi)?.0)
    }

    /// `F(t, X, U)` for a given, fixed set of LDI corners.
    pub fn rhs_with_ldi(
        &self,
        t: f64,
        state: &EmbeddingState,
        u: &DMatrix<f64>,
        ldi: &LdiCorners,
    ) -> Result<(DVector<f64>, ActiveCorners)> {
        self.check_dims(state)?;
        let n = state.dim();
        if u.shape() != (n, n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: u.nrows(),
            });
        }
        let inv = checked_inverse(&state.shape)?;
        let alpha = &state.shape;

        let mut active = ActiveCorners {
            state: 0,
            disturbance: 0,
            log_norm: f64::NEG_INFINITY,
            disturbance_norm: 0.0,
        };
        for (i, m) in ldi.mx.iter().enumerate() {
            // (U + αM)α⁻¹ cancels exactly when U = −αM.
            let arg = (u + alpha * m) * &inv;
            let mu = log_norm(self.kind, &arg);
            if mu > active.log_norm {
                active.log_norm = mu;
                active.state = i;
            }
        }
        if !active.log_norm.is_finite() {
            return Err(Error::NonFinite("offset log-norm".into()));
        }
        active.disturbance_norm = f64::NEG_INFINITY;
        for (j, m) in ldi.mw.iter().enumerate() {
            let v = op_norm(self.kind, &(alpha * m));
            if v > active.disturbance_norm {
                active.disturbance_norm = v;
                active.disturbance = j;
            }
        }
        if ldi.mw.is_empty() {
            active.disturbance_norm = 0.0;
        }

        let w = self.w_anchor();
        let center_dot = self.sys.eval(t, &state.center, &w);
        let mut out = DVector::zeros(packed_len(n));
        out.rows_mut(0, n).copy_from(&center_dot);
        for i in 0..n {
            for j in 0..n {
                out[n + i * n + j] = u[(i, j)];
            }
        }
        out[n + n * n] = active.log_norm * state.offset + active.disturbance_norm;
        Ok((out, active))
    }

    /// Euler rollout under a feed-forward schedule.
    pub fn simulate(
        &self,
        x0: &EmbeddingState,
        schedule: &HypercontrolSchedule,
        policy: Policy,
        phi_max: f64,
    ) -> Result<Trajectory> {
        let n = self.state_dim();
        if schedule.values.len() != schedule.grid.len()
            || schedule.values.iter().any(|u| u.shape() != (n, n))
        {
            return Err(Error::Config("schedule does not match its grid or the state dimension".into()));
        }
        Ok(self
            .rollout(x0, &schedule.grid, policy, phi_max, |k, _| schedule.values[k].clone())?
            .0)
    }

    /// Euler rollout where `feedforward(k, X_k)` supplies `U_ff(t_k)`.
    ///
    /// Returns the trajectory and the feed-forward values that were requested.
    /// Stops at the first state with `Φ > phi_max` or on any numerical
    /// failure; the states kept are those before the failure.
    pub fn rollout(
        &self,
        x0: &EmbeddingState,
        grid: &TimeGrid,
        policy: Policy,
        phi_max: f64,
        mut feedforward: impl FnMut(usize, &EmbeddingState) -> DMatrix<f64>,
    ) -> Result<(Trajectory, Vec<DMatrix<f64>>)> {
        self.check_dims(x0)?;
        x0.validate()?;
        let h = grid.step();
        let n = x0.dim();
        let phi0 = x0.volume_cost()?;

        let mut traj = Trajectory {
            times: vec![grid.t0],
            states: vec![x0.clone()],
            hypercontrols: Vec::new(),
            phi: vec![phi0],
            truncated: false,
            t_end: grid.t0,
            truncation_reason: None,
            numerical_failure: false,
        };
        let mut uffs = Vec::new();
        if phi0 > phi_max {
            traj.truncated = true;
            traj.truncation_reason = Some(format!("initial cost {phi0} exceeds phi_max"));
            return Ok((traj, uffs));
        }

        for k in 0..grid.steps {
            let t = grid.time(k);
            let state = &traj.states[k];
            let uff = feedforward(k, state);
            let step = self
                .hypercontrol(policy, t, state, &uff)
                .and_then(|u| {
                    let d = self.rhs(t, state, &u)?;
                    let next = EmbeddingState::unpack(n, (state.pack() + d * h).as_slice())?;
                    next.validate()?;
                    let phi = next.volume_cost()?;
                    Ok((u, next, phi))
                });
            uffs.push(uff);
            match step {
                Ok((u, next, phi)) if phi <= phi_max => {
                    traj.times.push(grid.time(k + 1));
                    traj.states.push(next);
                    traj.hypercontrols.push(u);
                    traj.phi.push(phi);
                }
                Ok((_, _, phi)) => {
                    traj.truncated = true;
                    traj.truncation_reason = Some(format!("phi {phi} exceeds phi_max at t = {}", grid.time(k + 1)));
                    break;
                }
                Err(e) => {
                    traj.truncated = true;
                    traj.numerical_failure = true;
                    traj.truncation_reason = Some(e.to_string());
                    break;
                }
            }
        }
        traj.t_end = *traj.times.last().unwrap();
        Ok((traj, uffs))
    }
}

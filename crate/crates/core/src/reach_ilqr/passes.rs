//! Terminal conditions, the backward Riccati sweep and the forward rollout.

use nalgebra::{DMatrix, DVector};
use super::linearize::{linearize, Linearization};
use crate::dynamics::VectorField;
use crate::embedding::{packed_len, Embedding, EmbeddingState, HypercontrolSchedule, Policy, Trajectory};
use crate::error::{Error, Result};
use crate::normotope::checked_inverse;

/// Second-order expansion `σ + sᵀδX + ½ δXᵀ S δX` of the value function.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueExpansion {
    pub sigma: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

/// Closed-form expansion of `Φ(X) = −log det(αᵀα) + 2n log y`.
pub fn terminal_conditions(state: &EmbeddingState) -> Result<ValueExpansion> {
    let n = state.dim();
    let nx = packed_len(n);
    let inv = checked_inverse(&state.shape)?;
    let y = state.offset;
    let sigma = state.volume_cost()?;

    let mut gradient = DVector::zeros(nx);
    let mut hessian = DMatrix::zeros(nx, nx);
    let idx = |i: usize, j: usize| n + i * n + j;
    for i in 0..n {
        for j in 0..n {
            gradient[idx(i, j)] = -2.0 * inv[(j, i)];
            for k in 0..n {
                for l in 0..n {
                    hessian[(idx(i, j), idx(k, l))] = 2.0 * inv[(j, k)] * inv[(l, i)];
                }
            }
        }
    }
    let ny = n + n * n;
    gradient[ny] = 2.0 * n as f64 / y;
    hessian[(ny, ny)] = -2.0 * n as f64 / (y * y);
    Ok(ValueExpansion {
        sigma,
        gradient,
        hessian,
    })
}

/// Affine corrections `δU_k = −d_k − K_k δX_k` along a rollout, in
/// row-major `vec(U)` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct GainSchedule {
    pub feedforward: Vec<DVector<f64>>,
    pub feedback: Vec<DMatrix<f64>>,
    pub values: Vec<ValueExpansion>,
}

impl GainSchedule {
    pub fn len(&self) -> usize {
        self.feedforward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.feedforward.is_empty()
    }
}

/// Linearizes along `traj` and runs the backward sweep with weight `r`.
pub fn backward_pass<S: VectorField>(
    emb: &Embedding<'_, S>,
    policy: Policy,
    traj: &Trajectory,
    schedule: &HypercontrolSchedule,
    r: f64,
) -> Result<GainSchedule> {
    let lins = traj
        .states
        .iter()
        .enumerate()
        .map(|(k, s)| linearize(emb, policy, traj.times[k], s, &schedule.values[k]))
        .collect::<Result<Vec<_>>>()?;
    let terminal = terminal_conditions(traj.last_state())?;
    backward_pass_linearized(&lins, schedule.grid.step(), &terminal, r)
}

/// Backward Euler sweep of the Riccati equations from `terminal`, with
/// `lins[k]` the linearization at grid point `k`.
pub fn backward_pass_linearized(
    lins: &[Linearization],
    h: f64,
    terminal: &ValueExpansion,
    r: f64,
) -> Result<GainSchedule> {
    if !(r > 0.0) {
        return Err(Error::Config(format!("regularization must be positive, got {r}")));
    }
    let len = lins.len();
    let mut feedforward = vec![DVector::zeros(0); len];
    let mut feedback = vec![DMatrix::zeros(0, 0); len];
    let mut values = vec![terminal.clone(); len];

    let mut v = terminal.clone();
    for k in (0..len).rev() {
        let lin = &lins[k];
        let fut = lin.fu.transpose();
        let q_u = &fut * &v.gradient;
        let q_ux = &fut * &v.hessian;
        let d = &q_u / r;
        let gain = &q_ux / r;
        if d.iter().chain(gain.iter()).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("gains at grid point {k}")));
        }
        values[k] = v.clone();
        if k > 0 {
            let fxt = lin.fx.transpose();
            let q_uxt = q_ux.transpose();
            let gradient = &v.gradient + (&fxt * &v.gradient - &q_uxt * &d) * h;
            let mut hessian = &v.hessian + (&fxt * &v.hessian + &v.hessian * &lin.fx - &q_uxt * &gain) * h;
            hessian = (&hessian + hessian.transpose()) * 0.5;
            let sigma = v.sigma - 0.5 * h * q_u.dot(&d);
            v = ValueExpansion {
                sigma,
                gradient,
                hessian,
            };
        }
        feedforward[k] = d;
        feedback[k] = gain;
    }
    Ok(GainSchedule {
        feedforward,
        feedback,
        values,
    })
}

/// Rolls out `U_k = U_prev,k − γ d_k − K_k (X_k − X_prev,k)`.
///
/// Beyond the end of the previous rollout the last corrected value is held.
/// Grid points the new rollout never reaches keep their previous values.
#[allow(clippy::too_many_arguments)]
pub fn forward_pass<S: VectorField>(
    emb: &Embedding<'_, S>,
    policy: Policy,
    x0: &EmbeddingState,
    prev_schedule: &HypercontrolSchedule,
    prev: &Trajectory,
    gains: &GainSchedule,
    step_size: f64,
    phi_max: f64,
) -> Result<(HypercontrolSchedule, Trajectory)> {
    if gains.len() != prev.len() {
        return Err(Error::DimensionMismatch {
            expected: prev.len(),
            found: gains.len(),
        });
    }
    let n = emb.state_dim();
    let mut values = prev_schedule.values.clone();
    let mut held: Option<DMatrix<f64>> = None;
    let (traj, _) = emb.rollout(x0, &prev_schedule.grid, policy, phi_max, |k, x| {
        let u = if k < gains.len() {
            let dx = x.pack() - prev.states[k].pack();
            let correction = &gains.feedforward[k] * step_size + &gains.feedback[k] * dx;
            let mut u = prev_schedule.values[k].clone();
            for i in 0..n {
                for j in 0..n {
                    let c = correction[i * n + j];
                    if c != 0.0 {
                        u[(i, j)] -= c;
                    }
                }
            }
            u
        } else {
            held.clone().expect("gain schedule is never empty")
        };
        held = Some(u.clone());
        values[k] = u.clone();
        u
    })?;
    Ok((
        HypercontrolSchedule {
            grid: prev_schedule.grid,
            values,
        },
        traj,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{Ltv, VanDerPol};
    use crate::embedding::TimeGrid;
    use crate::normotope::NormKind;
    use nalgebra::dmatrix;

    fn perturbed(state: &EmbeddingState, dir: &DVector<f64>, h: f64) -> f64 {
        let n = state.dim();
        EmbeddingState::unpack(n, (state.pack() + dir * h).as_slice())
            .unwrap()
            .volume_cost()
            .unwrap()
    }

    #[test]
    fn terminal_conditions_match_finite_differences() {
        let s = EmbeddingState::new(
            DVector::from_vec(vec![0.1, -0.3]),
            dmatrix![2.0, 0.5; -0.7, 1.3],
            0.8,
        )
        .unwrap();
        let tc = terminal_conditions(&s).unwrap();
        assert!((tc.sigma - s.volume_cost().unwrap()).abs() < 1e-14);
        let nx = packed_len(2);
        let h = 1e-5;
        for i in 0..nx {
            let e = DVector::from_fn(nx, |k, _| if k == i { 1.0 } else { 0.0 });
            let fd = (perturbed(&s, &e, h) - perturbed(&s, &e, -h)) / (2.0 * h);
            assert!((fd - tc.gradient[i]).abs() < 1e-6 * (1.0 + fd.abs()), "grad {i}");
            for j in 0..nx {
                let f = DVector::from_fn(nx, |k, _| if k == j { 1.0 } else { 0.0 });
                let h2 = 1e-4;
                let fd2 = (perturbed(&s, &(&e + &f), h2) - perturbed(&s, &(&e - &f), h2)
                    - perturbed(&s, &(-&e + &f), h2)
                    + perturbed(&s, &(-&e - &f), h2))
                    / (4.0 * h2 * h2);
                assert!(
                    (fd2 - tc.hessian[(i, j)]).abs() < 1e-4 * (1.0 + fd2.abs()),
                    "hess {i},{j}: {fd2} vs {}",
                    tc.hessian[(i, j)]
                );
            }
        }
        assert_eq!(tc.hessian, tc.hessian.transpose());
    }

    #[test]
    fn terminal_conditions_example() {
        let s = EmbeddingState::new(DVector::zeros(2), DMatrix::identity(2, 2) * 2.0, 1.0).unwrap();
        let tc = terminal_conditions(&s).unwrap();
        assert!((tc.sigma + 4.0 * 2f64.ln()).abs() < 1e-14);
        assert_eq!(tc.gradient.as_slice(), &[0.0, 0.0, -1.0, 0.0, 0.0, -1.0, 4.0]);
    }

    fn vdp_setup() -> (VanDerPol, EmbeddingState, TimeGrid) {
        let x0 = EmbeddingState::new(DVector::from_vec(vec![-2.0, 0.0]), DMatrix::identity(2, 2) * 80.0, 1.0).unwrap();
        (VanDerPol::default(), x0, TimeGrid::new(0.0, 1.0, 0.01).unwrap())
    }

    #[test]
    fn zero_step_and_zero_feedback_reproduce_previous_iterate_bitwise() {
        let (sys, x0, grid) = vdp_setup();
        let emb = Embedding::new(&sys, NormKind::L2);
        let sched = HypercontrolSchedule::constant(grid, dmatrix![0.01, -0.02; 0.03, 0.0]);
        let traj = emb.simulate(&x0, &sched, Policy::Adjoint, f64::INFINITY).unwrap();
        let mut gains = backward_pass(&emb, Policy::Adjoint, &traj, &sched, 1.0).unwrap();
        for k in gains.feedback.iter_mut() {
            k.fill(0.0);
        }
        let (s2, t2) = forward_pass(&emb, Policy::Adjoint, &x0, &sched, &traj, &gains, 0.0, f64::INFINITY).unwrap();
        assert_eq!(s2, sched);
        assert_eq!(t2, traj);

        let zero = GainSchedule {
            feedforward: vec![DVector::zeros(4); traj.len()],
            feedback: vec![DMatrix::zeros(4, 7); traj.len()],
            values: gains.values.clone(),
        };
        let (s3, t3) = forward_pass(&emb, Policy::Adjoint, &x0, &sched, &traj, &zero, 1.0, f64::INFINITY).unwrap();
        assert_eq!(s3, sched);
        assert_eq!(t3, traj);
    }

    #[test]
    fn backward_pass_on_ltv_rotation_has_no_incentive_to_change() {
        let sys = Ltv::rotation();
        let emb = Embedding::new(&sys, NormKind::L2);
        let x0 = EmbeddingState::new(DVector::from_vec(vec![1.0, 0.0]), DMatrix::identity(2, 2), 1.0).unwrap();
        let grid = TimeGrid::new(0.0, 1.0, 0.05).unwrap();
        let sched = HypercontrolSchedule::zeros(grid, 2);
        let traj = emb.simulate(&x0, &sched, Policy::Adjoint, f64::INFINITY).unwrap();
        let gains = backward_pass(&emb, Policy::Adjoint, &traj, &sched, 1.0).unwrap();
        assert_eq!(gains.len(), traj.len());
        for (k, v) in gains.values.iter().enumerate() {
            assert!(v.hessian.iter().all(|x| x.is_finite()));
            assert!((&v.hessian - v.hessian.transpose()).amax() < 1e-12, "step {k}");
        }
    }

    #[test]
    fn descent_direction_decreases_terminal_cost() {
        let (sys, x0, grid) = vdp_setup();
        let emb = Embedding::new(&sys, NormKind::L2);
        let sched = HypercontrolSchedule::zeros(grid, 2);
        let traj = emb.simulate(&x0, &sched, Policy::Adjoint, f64::INFINITY).unwrap();
        let gains = backward_pass(&emb, Policy::Adjoint, &traj, &sched, 50.0).unwrap();
        let (_, t2) = forward_pass(&emb, Policy::Adjoint, &x0, &sched, &traj, &gains, 1.0, f64::INFINITY).unwrap();
        assert!(!t2.truncated);
        assert!(t2.terminal_cost() < traj.terminal_cost(), "{} vs {}", t2.terminal_cost(), traj.terminal_cost());
    }
}

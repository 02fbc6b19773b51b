//! First-order linearization of the embedding system along a rollout.
//!
//! The LDI corners are frozen at the nominal point and the active corner
//! (the one attaining the max in ẏ) is held fixed, so the offset dynamics
//! are differentiable along `μ((U + αM*)α⁻¹)`. Each column of `[F_X | F_U]`
//! is one forward pass with a single-tangent dual number.

use nalgebra::{DMatrix, DVector};

use crate::dynamics::{LdiCorners, VectorField};
use crate::embedding::{packed_len, ActiveCorners, Embedding, EmbeddingState, Policy};
use crate::error::{Error, Result};
use crate::matrix_norms::{log_norm_gradient, op_norm_gradient};
use crate::scalar::{dense, Arith, Dual};

/// `F(t, X, U_ff) ≈ value + F_X δX + F_U δvec(U_ff)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linearization {
    pub value: DVector<f64>,
    pub fx: DMatrix<f64>,
    pub fu: DMatrix<f64>,
    pub active: ActiveCorners,
}

/// Linearizes `X ↦ F(t, X, π(X, U_ff))` in `X` and `vec(U_ff)`, where π is
/// the hypercontrol policy.
pub fn linearize<S: VectorField>(
    emb: &Embedding<'_, S>,
    policy: Policy,
    t: f64,
    state: &EmbeddingState,
    uff: &DMatrix<f64>,
) -> Result<Linearization> {
    let ldi = emb.ldi(t, state)?;
    linearize_with_ldi(emb, policy, t, state, uff, &ldi)
}

pub fn linearize_with_ldi<S: VectorField>(
    emb: &Embedding<'_, S>,
    policy: Policy,
    t: f64,
    state: &EmbeddingState,
    uff: &DMatrix<f64>,
    ldi: &LdiCorners,
) -> Result<Linearization> {
    let n = state.dim();
    let nx = packed_len(n);
    let u = emb.hypercontrol(policy, t, state, uff)?;
    let (value, active) = emb.rhs_with_ldi(t, state, &u, ldi)?;

    let inv = state.shape.clone().try_inverse().ok_or(Error::SingularShape { rcond: 0.0 })?;
    let m_star = &ldi.mx[active.state];
    let g_state = log_norm_gradient(emb.kind, &((&u + &state.shape * m_star) * &inv));
    let m_w = ldi.mw.get(active.disturbance).filter(|m| m.ncols() > 0);
    let g_dist = m_w.map(|m| op_norm_gradient(emb.kind, &(&state.shape * m)));

    let frozen = Frozen {
        m_star,
        m_w,
        g_state: &g_state,
        g_dist: g_dist.as_ref(),
        log_norm: active.log_norm,
        dist_norm: active.disturbance_norm,
    };

    let base_x: Vec<Dual> = state.pack().iter().map(|&v| Dual::constant(v)).collect();
    let base_u: Vec<Dual> = row_major_iter(uff).map(Dual::constant).collect();
    let mut fx = DMatrix::zeros(nx, nx);
    let mut fu = DMatrix::zeros(nx, n * n);
    for dir in 0..nx + n * n {
        let mut x = base_x.clone();
        let mut uf = base_u.clone();
        if dir < nx {
            x[dir].eps = 1.0;
        } else {
            uf[dir - nx].eps = 1.0;
        }
        let col = dual_rhs(emb, policy, t, n, &x, &uf, &frozen)?;
        let target = if dir < nx {
            fx.column_mut(dir)
        } else {
            fu.column_mut(dir - nx)
        };
        for (dst, v) in target.into_iter().zip(&col) {
            *dst = v.eps;
        }
    }
    if fx.iter().chain(fu.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("linearization at t = {t}")));
    }
    Ok(Linearization {
        value,
        fx,
        fu,
        active,
    })
}

/// `F(t, X, π(X, U_ff))` with the LDI corners held fixed, on packed inputs.
pub fn frozen_rhs<S: VectorField>(
    emb: &Embedding<'_, S>,
    policy: Policy,
    t: f64,
    x: &DVector<f64>,
    uff: &DVector<f64>,
    ldi: &LdiCorners,
) -> Result<DVector<f64>> {
    let n = emb.state_dim();
    let state = EmbeddingState::unpack(n, x.as_slice())?;
    let uff = DMatrix::from_row_slice(n, n, uff.as_slice());
    let u = emb.hypercontrol(policy, t, &state, &uff)?;
    Ok(emb.rhs_with_ldi(t, &state, &u, ldi)?.0)
}

struct Frozen<'a> {
    m_star: &'a DMatrix<f64>,
    m_w: Option<&'a DMatrix<f64>>,
    g_state: &'a DMatrix<f64>,
    g_dist: Option<&'a DMatrix<f64>>,
    log_norm: f64,
    dist_norm: f64,
}

fn row_major_iter(m: &DMatrix<f64>) -> impl Iterator<Item = f64> + '_ {
    (0..m.nrows()).flat_map(move |i| (0..m.ncols()).map(move |j| m[(i, j)]))
}

fn constant_row_major(m: &DMatrix<f64>) -> Vec<Dual> {
    row_major_iter(m).map(Dual::constant).collect()
}

fn directional(g: &DMatrix<f64>, a: &[Dual]) -> f64 {
    row_major_iter(g).zip(a).map(|(gij, aij)| gij * aij.eps).sum()
}

fn dual_rhs<S: VectorField>(
    emb: &Embedding<'_, S>,
    policy: Policy,
    t: f64,
    n: usize,
    x: &[Dual],
    uff: &[Dual],
    frozen: &Frozen<'_>,
) -> Result<Vec<Dual>> {
    let nw = emb.sys.disturbance_dim();
    let center = &x[..n];
    let alpha = &x[n..n + n * n];
    let y = x[n + n * n];
    let w: Vec<Dual> = emb.w_anchor().iter().map(|&v| Dual::constant(v)).collect();

    let f = emb.sys.field(t, center, &w);
    let u: Vec<Dual> = match policy {
        Policy::Raw => uff.to_vec(),
        Policy::Adjoint => {
            let jac = emb.sys.jacobian(t, center, &w);
            let jx: Vec<Dual> = (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .map(|(i, j)| jac[i * (n + nw) + j])
                .collect();
            let aj = dense::matmul(alpha, &jx, n, n, n);
            aj.iter().zip(uff).map(|(&a, &b)| -a + b).collect()
        }
    };

    let inv = dense::inverse(alpha, n).ok_or(Error::SingularShape { rcond: 0.0 })?;
    let am = dense::matmul(alpha, &constant_row_major(frozen.m_star), n, n, n);
    let sum: Vec<Dual> = u.iter().zip(&am).map(|(&a, &b)| a + b).collect();
    let arg = dense::matmul(&sum, &inv, n, n, n);
    let mu = Dual::new(frozen.log_norm, directional(frozen.g_state, &arg));

    let dist = match (frozen.m_w, frozen.g_dist) {
        (Some(mw), Some(g)) => {
            let b = dense::matmul(alpha, &constant_row_major(mw), n, n, mw.ncols());
            Dual::new(frozen.dist_norm, directional(g, &b))
        }
        _ => Dual::cst(frozen.dist_norm),
    };

    let mut out = f;
    out.extend(u);
    out.push(mu * y + dist);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{Ltv, RobotArm, VanDerPol};
    use crate::interval::{Interval, IntervalVector};
    use crate::normotope::NormKind;
    use nalgebra::dmatrix;

    fn fd_columns<S: VectorField>(
        emb: &Embedding<'_, S>,
        policy: Policy,
        t: f64,
        state: &EmbeddingState,
        uff: &DMatrix<f64>,
        ldi: &LdiCorners,
    ) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = state.dim();
        let x0 = state.pack();
        let u0 = DVector::from_iterator(n * n, row_major_iter(uff));
        let nx = x0.len();
        let mut fx = DMatrix::zeros(nx, nx);
        let mut fu = DMatrix::zeros(nx, n * n);
        for d in 0..nx + n * n {
            let (mut xp, mut xm, mut up, mut um) = (x0.clone(), x0.clone(), u0.clone(), u0.clone());
            let h;
            if d < nx {
                h = 1e-6 * (1.0 + x0[d].abs());
                xp[d] += h;
                xm[d] -= h;
            } else {
                h = 1e-6 * (1.0 + u0[d - nx].abs());
                up[d - nx] += h;
                um[d - nx] -= h;
            }
            let col = (frozen_rhs(emb, policy, t, &xp, &up, ldi).unwrap()
                - frozen_rhs(emb, policy, t, &xm, &um, ldi).unwrap())
                / (2.0 * h);
            if d < nx {
                fx.set_column(d, &col);
            } else {
                fu.set_column(d - nx, &col);
            }
        }
        (fx, fu)
    }

    fn assert_close(a: &DMatrix<f64>, b: &DMatrix<f64>, rel: f64) {
        let scale = 1.0 + b.amax();
        assert!((a - b).amax() <= rel * scale, "max diff {} (scale {scale})", (a - b).amax());
    }

    #[test]
    fn vanderpol_matches_frozen_finite_differences() {
        let sys = VanDerPol::default();
        let emb = Embedding::new(&sys, NormKind::L2);
        let s = EmbeddingState::new(
            DVector::from_vec(vec![-1.5, 0.4]),
            dmatrix![30.0, 5.0; -4.0, 25.0],
            1.0,
        )
        .unwrap();
        let uff = dmatrix![0.3, -0.2; 0.1, 0.5];
        for policy in [Policy::Adjoint, Policy::Raw] {
            let ldi = emb.ldi(0.0, &s).unwrap();
            let lin = linearize_with_ldi(&emb, policy, 0.0, &s, &uff, &ldi).unwrap();
            let (fx, fu) = fd_columns(&emb, policy, 0.0, &s, &uff, &ldi);
            assert_close(&lin.fx, &fx, 1e-5);
            assert_close(&lin.fu, &fu, 1e-5);
        }
    }

    #[test]
    fn robot_arm_matches_frozen_finite_differences() {
        let sys = RobotArm::default();
        for kind in [NormKind::L2, NormKind::Linf, NormKind::L1] {
            let emb = Embedding::new(&sys, kind);
            let s = EmbeddingState::new(
                DVector::from_vec(vec![1.4, 1.6, 0.1, -0.2]),
                DMatrix::identity(4, 4) * 10.0 + DMatrix::from_fn(4, 4, |i, j| 0.3 * (i as f64 - j as f64)),
                1.0,
            )
            .unwrap();
            let uff = DMatrix::from_fn(4, 4, |i, j| 0.05 * (i + 2 * j) as f64);
            let ldi = emb.ldi(0.0, &s).unwrap();
            let lin = linearize_with_ldi(&emb, Policy::Adjoint, 0.0, &s, &uff, &ldi).unwrap();
            let (fx, fu) = fd_columns(&emb, Policy::Adjoint, 0.0, &s, &uff, &ldi);
            assert_close(&lin.fx, &fx, 1e-5);
            assert_close(&lin.fu, &fu, 1e-5);
        }
    }

    #[test]
    fn ltv_with_disturbance_matches_full_rhs() {
        let sys = Ltv::rotation().with_input(dmatrix![1.0; 0.5]);
        let emb = Embedding::new(&sys, NormKind::Linf)
            .with_disturbance(IntervalVector::new(vec![Interval::new(-0.1, 0.3)]));
        let s = EmbeddingState::new(DVector::from_vec(vec![0.2, -0.1]), dmatrix![2.0, 0.5; -0.3, 1.0], 0.8).unwrap();
        let uff = dmatrix![0.1, 0.0; 0.2, -0.1];
        let lin = linearize(&emb, Policy::Adjoint, 0.3, &s, &uff).unwrap();
        let ldi = emb.ldi(0.3, &s).unwrap();
        let (fx, fu) = fd_columns(&emb, Policy::Adjoint, 0.3, &s, &uff, &ldi);
        assert_close(&lin.fx, &fx, 1e-6);
        assert_close(&lin.fu, &fu, 1e-6);
    }
}

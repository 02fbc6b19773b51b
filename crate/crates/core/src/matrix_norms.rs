//! Induced operator norms and logarithmic norms (matrix measures) for the
//! ℓ1, ℓ2 and ℓ∞ norms.

use nalgebra::DMatrix;

use crate::normotope::NormKind;

/// Logarithmic norm `μ(A) = lim_{h↓0} (‖I + hA‖ − 1)/h` in closed form.
pub fn log_norm(kind: NormKind, a: &DMatrix<f64>) -> f64 {
    debug_assert!(a.is_square());
    let n = a.nrows();
    if n == 0 {
        return 0.0;
    }
    match kind {
        NormKind::Linf => (0..n)
            .map(|i| a[(i, i)] + (0..n).filter(|&j| j != i).map(|j| a[(i, j)].abs()).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max),
        NormKind::L1 => (0..n)
            .map(|j| a[(j, j)] + (0..n).filter(|&i| i != j).map(|i| a[(i, j)].abs()).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max),
        NormKind::L2 => {
            let sym = (a + a.transpose()) * 0.5;
            sym.symmetric_eigenvalues().max()
        }
    }
}

/// Operator norm `‖A‖` with the same norm on domain and codomain.
pub fn op_norm(kind: NormKind, a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    match kind {
        NormKind::Linf => a
            .row_iter()
            .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max),
        NormKind::L1 => a
            .column_iter()
            .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max),
        NormKind::L2 => a.singular_values().max(),
    }
}

/// Vector norm of the given kind.
pub fn vec_norm(kind: NormKind, v: &[f64]) -> f64 {
    match kind {
        NormKind::L1 => v.iter().map(|x| x.abs()).sum(),
        NormKind::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        NormKind::Linf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn first_argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// Matrix `G` with `dμ(A)[dA] = Σ G_ij dA_ij` wherever μ is differentiable.
///
/// At kinks the active row/column (or eigenvector) with the lowest index is
/// used, which yields a valid subgradient.
pub fn log_norm_gradient(kind: NormKind, a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut g = DMatrix::zeros(n, n);
    if n == 0 {
        return g;
    }
    match kind {
        NormKind::Linf => {
            let i = first_argmax((0..n).map(|i| {
                a[(i, i)] + (0..n).filter(|&j| j != i).map(|j| a[(i, j)].abs()).sum::<f64>()
            }));
            for j in 0..n {
                g[(i, j)] = if j == i { 1.0 } else { sign(a[(i, j)]) };
            }
        }
        NormKind::L1 => {
            let j = first_argmax((0..n).map(|j| {
                a[(j, j)] + (0..n).filter(|&i| i != j).map(|i| a[(i, j)].abs()).sum::<f64>()
            }));
            for i in 0..n {
                g[(i, j)] = if i == j { 1.0 } else { sign(a[(i, j)]) };
            }
        }
        NormKind::L2 => {
            let eig = ((a + a.transpose()) * 0.5).symmetric_eigen();
            let k = first_argmax(eig.eigenvalues.iter().copied());
            let v = eig.eigenvectors.column(k);
            g = v * v.transpose();
        }
    }
    g
}

/// Matrix `G` with `d‖A‖[dA] = Σ G_ij dA_ij` wherever the norm is differentiable.
pub fn op_norm_gradient(kind: NormKind, a: &DMatrix<f64>) -> DMatrix<f64> {
    let (m, n) = a.shape();
    let mut g = DMatrix::zeros(m, n);
    if a.is_empty() {
        return g;
    }
    match kind {
        NormKind::Linf => {
            let i = first_argmax(a.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()));
            for j in 0..n {
                g[(i, j)] = sign(a[(i, j)]);
            }
        }
        NormKind::L1 => {
            let j = first_argmax(a.column_iter().map(|c| c.iter().map(|x| x.abs()).sum::<f64>()));
            for i in 0..m {
                g[(i, j)] = sign(a[(i, j)]);
            }
        }
        NormKind::L2 => {
            let svd = a.clone().svd(true, true);
            let k = first_argmax(svd.singular_values.iter().copied());
            let u = svd.u.as_ref().unwrap().column(k);
            let vt = svd.v_t.as_ref().unwrap().row(k);
            g = u * vt;
        }
    }
    g
}

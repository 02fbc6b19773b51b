//! Independent checks of a computed tube.
//!
//! * [`mc_containment`] integrates the true system from random initial states
//!   (and random piecewise-constant disturbances) on the tube's own Euler grid
//!   and measures how far the samples stray outside each normotope.
//! * [`ltv_exactness`] checks that for linear systems the adjoint policy
//!   keeps the offset constant and the boundary on the boundary.
//! * [`pmp_check`] integrates the costates of the ℓ2 volume problem for an
//!   LTV system and evaluates the Hamiltonian gap for random `Ũ`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Ltv, VectorField};
use crate::embedding::{Embedding, EmbeddingState, Policy, TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::interval::IntervalVector;
use crate::normotope::{checked_inverse, NormKind, Normotope};

/// Environment variable capping the worker threads used by Monte Carlo checks.
pub const THREADS_ENV: &str = "NORMOTOPE_THREADS";

/// Result of a Monte Carlo containment check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainmentReport {
    pub samples: usize,
    /// Samples that left the tube at one or more grid times.
    pub violations: usize,
    /// Largest `‖α(x − x̊)‖ − y` over all samples and checked times.
    pub worst_margin: f64,
    /// Grid index where `worst_margin` was attained.
    pub worst_step: usize,
    pub tol: f64,
    /// Number of violating samples at each checked grid time.
    pub violations_per_step: Vec<usize>,
}

impl ContainmentReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Parallel iterator pool sized from [`THREADS_ENV`], or rayon's default.
fn pool() -> Result<rayon::ThreadPool> {
    let threads = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))
}

fn sample_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn draw_disturbance<R: Rng>(w_box: &IntervalVector, rng: &mut R) -> DVector<f64> {
    DVector::from_iterator(
        w_box.len(),
        w_box.iter().map(|iv| {
            if iv.is_singleton() {
                iv.lo
            } else {
                rng.random_range(iv.lo..=iv.hi)
            }
        }),
    )
}

/// Euler path of the true system over `steps` steps of size `h`.
///
/// Each disturbance is held constant over one step.
fn euler_path<S: VectorField, R: Rng>(
    sys: &S,
    x0: DVector<f64>,
    t0: f64,
    h: f64,
    steps: usize,
    w_box: &IntervalVector,
    rng: &mut R,
) -> Vec<DVector<f64>> {
    let mut path = Vec::with_capacity(steps + 1);
    path.push(x0);
    for k in 0..steps {
        let w = draw_disturbance(w_box, rng);
        let x = &path[k];
        let next = x + sys.eval(t0 + k as f64 * h, x, &w) * h;
        path.push(next);
    }
    path
}

/// Draws sample `index` of a Monte Carlo batch: even indices start on the
/// boundary of `n0`, odd ones in its interior.
fn initial_sample(n0: &Normotope, rng: &mut ChaCha8Rng, index: usize) -> Result<DVector<f64>> {
    Ok(n0.sample_with(rng, 1, index.is_multiple_of(2))?.remove(0))
}

/// True-system Euler paths on the grid of `traj`, one per sample.
///
/// These are the points the containment check evaluates; useful for plotting.
pub fn sample_paths<S: VectorField + Sync>(
    sys: &S,
    n0: &Normotope,
    traj: &Trajectory,
    w_box: &IntervalVector,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<Vec<DVector<f64>>>> {
    let (t0, h) = grid_of(traj);
    let steps = traj.len().saturating_sub(1);
    pool()?.install(|| {
        (0..n_samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = sample_rng(seed, i);
                let x0 = initial_sample(n0, &mut rng, i)?;
                Ok(euler_path(sys, x0, t0, h, steps, w_box, &mut rng))
            })
            .collect()
    })
}

fn grid_of(traj: &Trajectory) -> (f64, f64) {
    let t0 = traj.times.first().copied().unwrap_or(0.0);
    let h = if traj.times.len() > 1 {
        traj.times[1] - traj.times[0]
    } else {
        0.0
    };
    (t0, h)
}

struct SampleOutcome {
    worst: f64,
    worst_step: usize,
    violated: Vec<bool>,
}

/// Monte Carlo containment check of `traj` against the true dynamics.
///
/// `n0` should be the tube's initial set and `w_box` the disturbance box the
/// tube was computed for; the norm kind is taken from `n0`.
pub fn mc_containment<S: VectorField + Sync>(
    sys: &S,
    n0: &Normotope,
    traj: &Trajectory,
    w_box: &IntervalVector,
    n_samples: usize,
    seed: u64,
    tol: f64,
) -> Result<ContainmentReport> {
    if traj.is_empty() {
        return Err(Error::Config("cannot check an empty trajectory".into()));
    }
    if n0.dim() != sys.state_dim() || w_box.len() != sys.disturbance_dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.state_dim(),
            found: n0.dim(),
        });
    }
    let kind = n0.kind;
    let tubes: Vec<Normotope> = (0..traj.len())
        .map(|k| traj.normotope_at(k, kind))
        .collect::<Result<_>>()?;
    let (t0, h) = grid_of(traj);
    let steps = traj.len() - 1;

    let outcomes: Vec<SampleOutcome> = pool()?.install(|| {
        (0..n_samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = sample_rng(seed, i);
                let x0 = initial_sample(n0, &mut rng, i)?;
                let path = euler_path(sys, x0, t0, h, steps, w_box, &mut rng);
                let mut out = SampleOutcome {
                    worst: f64::NEG_INFINITY,
                    worst_step: 0,
                    violated: vec![false; tubes.len()],
                };
                for (k, (x, tube)) in path.iter().zip(&tubes).enumerate() {
                    let margin = tube.gauge(x)? - tube.offset;
                    // NaN margins count as violations.
                    let margin = if margin.is_nan() { f64::INFINITY } else { margin };
                    if margin > out.worst {
                        out.worst = margin;
                        out.worst_step = k;
                    }
                    out.violated[k] = margin > tol;
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut report = ContainmentReport {
        samples: n_samples,
        violations: 0,
        worst_margin: f64::NEG_INFINITY,
        worst_step: 0,
        tol,
        violations_per_step: vec![0; tubes.len()],
    };
    for o in &outcomes {
        if o.worst > report.worst_margin {
            report.worst_margin = o.worst;
            report.worst_step = o.worst_step;
        }
        if o.violated.iter().any(|&v| v) {
            report.violations += 1;
        }
        for (count, &v) in report.violations_per_step.iter_mut().zip(&o.violated) {
            *count += usize::from(v);
        }
    }
    Ok(report)
}

/// Deviation of the adjoint-policy tube from the true reachable set of an
/// LTV system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LtvExactnessReport {
    pub t_end: f64,
    pub steps: usize,
    /// `|y(t_end) − y₀|`.
    pub offset_deviation: f64,
    /// Largest `|‖α(t_end)(x(t_end) − x̊(t_end))‖ − y₀|` over boundary samples.
    pub boundary_deviation: f64,
    pub boundary_samples: usize,
    /// Tube set at `t_end`.
    pub final_set: Normotope,
}

/// Runs the embedding with the adjoint policy and no feed-forward, and
/// pushes boundary samples of `n0` through the same Euler grid.
pub fn ltv_exactness(sys: &Ltv, n0: &Normotope, tf: f64, h: f64) -> Result<LtvExactnessReport> {
    const BOUNDARY_SAMPLES: usize = 100;
    let emb = Embedding::new(sys, n0.kind);
    let grid = TimeGrid::new(0.0, tf, h)?;
    let schedule = crate::embedding::HypercontrolSchedule::zeros(grid, n0.dim());
    let traj = emb.simulate(&EmbeddingState::from_normotope(n0), &schedule, Policy::Adjoint, f64::INFINITY)?;
    let last = traj.last_state().clone();
    let steps = traj.len() - 1;
    let step = grid.step();

    let empty = IntervalVector::from_points(&vec![0.0; sys.disturbance_dim()]);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut boundary_deviation: f64 = 0.0;
    for x0 in n0.sample_boundary(0x5eed, BOUNDARY_SAMPLES)? {
        let path = euler_path(sys, x0, grid.t0, step, steps, &empty, &mut rng);
        let e = &last.shape * (path[steps].clone() - &last.center);
        let g = crate::matrix_norms::vec_norm(n0.kind, e.as_slice());
        boundary_deviation = boundary_deviation.max((g - n0.offset).abs());
    }
    Ok(LtvExactnessReport {
        t_end: traj.t_end,
        steps,
        offset_deviation: (last.offset - n0.offset).abs(),
        boundary_deviation,
        boundary_samples: BOUNDARY_SAMPLES,
        final_set: last.to_normotope(n0.kind)?,
    })
}

/// Outcome of the Pontryagin check for the ℓ2 volume problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmpReport {
    pub steps: usize,
    /// `max_t ‖α(t) p_α(t)ᵀ + 2I‖` (Frobenius).
    pub costate_residual: f64,
    pub random_trials: usize,
    /// Smallest Hamiltonian gap `H(Ũ) − H(0)` over the trials.
    pub min_gap: f64,
    /// Largest `|gap − Σᵢ(λ_max − λᵢ)(Ũᵀ + Ũ)|` over the trials.
    pub identity_residual: f64,
    /// Constant offset costate `p_y`.
    pub p_y: f64,
}

impl PmpReport {
    pub fn passed(&self, gap_tol: f64, identity_tol: f64, costate_tol: f64) -> bool {
        self.min_gap >= -gap_tol && self.identity_residual <= identity_tol && self.costate_residual <= costate_tol
    }
}

/// Gap and eigenvalue identity for one `Ũ` at one time.
///
/// Returns `(H(Ũ) − H(0), Σᵢ(λ_max − λᵢ)(Ũᵀ + Ũ))`.
pub fn hamiltonian_gap(p_alpha: &DMatrix<f64>, alpha: &DMatrix<f64>, p_y: f64, y: f64, u: &DMatrix<f64>) -> (f64, f64) {
    let sym = u.transpose() + u;
    let eig = SymmetricEigen::new(sym).eigenvalues;
    let lmax = eig.max();
    let inner = (p_alpha.component_mul(&(u * alpha))).sum();
    let gap = inner + 0.5 * p_y * y * lmax;
    let identity = eig.iter().map(|l| lmax - l).sum();
    (gap, identity)
}

/// Integrates the costates backward along the adjoint (`Ũ* = 0`) tube and
/// evaluates the Hamiltonian gap for `n_random` Gaussian `Ũ` at random times.
///
/// The costate recursion is the exact adjoint of the forward Euler map
/// `α_{k+1} = α_k (I − h A_k)`, so `α p_αᵀ` is conserved up to rounding.
pub fn pmp_check(sys: &Ltv, n0: &Normotope, tf: f64, h: f64, n_random: usize, seed: u64) -> Result<PmpReport> {
    if n0.kind != NormKind::L2 {
        return Err(Error::UnsupportedKind(n0.kind.name()));
    }
    let n = n0.dim();
    let grid = TimeGrid::new(0.0, tf, h)?;
    let step = grid.step();
    let mut alphas = Vec::with_capacity(grid.len());
    alphas.push(n0.shape.clone());
    for k in 0..grid.steps {
        let a = sys.a(grid.time(k));
        let next = &alphas[k] - &alphas[k] * a * step;
        alphas.push(next);
    }
    let y = n0.offset;
    let p_y = 2.0 * n as f64 / y;

    let last = &alphas[grid.steps];
    let mut p_alpha = vec![DMatrix::zeros(n, n); grid.len()];
    p_alpha[grid.steps] = checked_inverse(last)?.transpose() * -2.0;
    for k in (0..grid.steps).rev() {
        let a = sys.a(grid.time(k));
        p_alpha[k] = &p_alpha[k + 1] - &p_alpha[k + 1] * a.transpose() * step;
    }

    let target = DMatrix::<f64>::identity(n, n) * -2.0;
    let costate_residual = alphas
        .iter()
        .zip(&p_alpha)
        .map(|(a, p)| (a * p.transpose() - &target).norm())
        .fold(0.0, f64::max);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_gap = f64::INFINITY;
    let mut identity_residual: f64 = 0.0;
    for _ in 0..n_random {
        let k = rng.random_range(0..grid.len());
        let u = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let (gap, identity) = hamiltonian_gap(&p_alpha[k], &alphas[k], p_y, y, &u);
        min_gap = min_gap.min(gap);
        identity_residual = identity_residual.max((gap - identity).abs());
    }
    Ok(PmpReport {
        steps: grid.steps,
        costate_residual,
        random_trials: n_random,
        min_gap: if n_random == 0 { 0.0 } else { min_gap },
        identity_residual,
        p_y,
    })
}

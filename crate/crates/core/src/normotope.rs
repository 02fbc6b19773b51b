//! The normotope set `{x : ‖α(x − x̊)‖ ≤ y}`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalVector};
use crate::matrix_norms::vec_norm;

/// Reciprocal condition number below which a shape matrix counts as singular.
pub const MIN_RCOND: f64 = 1e-12;

/// Largest dimension for which the ℓ1 H-representation (2^n rows) is built.
pub const MAX_L1_HREP_DIM: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    L1,
    L2,
    Linf,
}

impl NormKind {
    pub fn name(self) -> &'static str {
        match self {
            NormKind::L1 => "l1",
            NormKind::L2 => "l2",
            NormKind::Linf => "linf",
        }
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for NormKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(NormKind::L1),
            "l2" => Ok(NormKind::L2),
            "linf" | "l-inf" | "inf" => Ok(NormKind::Linf),
            other => Err(Error::Config(format!("unknown norm kind `{other}`"))),
        }
    }
}

/// Reciprocal 2-norm condition number, `σ_min / σ_max`.
pub fn rcond(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 1.0;
    }
    if m.iter().any(|x| !x.is_finite()) {
        return 0.0;
    }
    let sv = m.singular_values();
    let max = sv.max();
    if max == 0.0 {
        0.0
    } else {
        sv.min() / max
    }
}

/// Inverse of a shape matrix, rejecting near-singular ones.
pub fn checked_inverse(alpha: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let rc = rcond(alpha);
    if !(rc >= MIN_RCOND) {
        return Err(Error::SingularShape { rcond: rc });
    }
    alpha
        .clone()
        .try_inverse()
        .ok_or(Error::SingularShape { rcond: rc })
}

/// `Φ = −log det(αᵀα / y²)` through a Cholesky factor of `αᵀα`.
pub fn log_det_volume_cost(alpha: &DMatrix<f64>, offset: f64) -> Result<f64> {
    let n = alpha.nrows() as f64;
    let gram = alpha.transpose() * alpha;
    let chol = gram
        .cholesky()
        .ok_or(Error::SingularShape { rcond: rcond(alpha) })?;
    let log_det: f64 = chol.l_dirty().diagonal().iter().map(|d| 2.0 * d.ln()).sum();
    Ok(-log_det + 2.0 * n * offset.ln())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Normotope {
    pub kind: NormKind,
    pub center: DVector<f64>,
    pub shape: DMatrix<f64>,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HPolytope {
    pub h: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl HPolytope {
    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        (&self.h * x - &self.b).iter().all(|&r| r <= tol)
    }
}

impl Normotope {
    pub fn new(kind: NormKind, center: DVector<f64>, shape: DMatrix<f64>, offset: f64) -> Result<Self> {
        let n = center.len();
        if shape.nrows() != n || shape.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: shape.nrows(),
            });
        }
        if !(offset > 0.0) || !offset.is_finite() {
            return Err(Error::Config(format!("offset must be positive, got {offset}")));
        }
        let rc = rcond(&shape);
        if !(rc >= MIN_RCOND) {
            return Err(Error::SingularShape { rcond: rc });
        }
        Ok(Self {
            kind,
            center,
            shape,
            offset,
        })
    }

    /// `⟨x̊, I/r, 1⟩`, the norm ball of radius `r` around `center`.
    pub fn ball(kind: NormKind, center: DVector<f64>, radius: f64) -> Result<Self> {
        let n = center.len();
        Self::new(kind, center, DMatrix::identity(n, n) / radius, 1.0)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// `‖α(x − x̊)‖`.
    pub fn gauge(&self, x: &DVector<f64>) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        let z = &self.shape * (x - &self.center);
        Ok(vec_norm(self.kind, z.as_slice()))
    }

    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> Result<bool> {
        Ok(self.gauge(x)? <= self.offset + tol)
    }

    /// Tightest axis-aligned box around the set, from the dual-norm rows of α⁻¹.
    pub fn interval_hull(&self) -> Result<IntervalVector> {
        let inv = checked_inverse(&self.shape)?;
        Ok(IntervalVector::new(
            (0..self.dim())
                .map(|i| {
                    let row = inv.row(i);
                    let r = match self.kind {
                        NormKind::Linf => row.iter().map(|v| v.abs()).sum::<f64>(),
                        NormKind::L2 => row.norm(),
                        NormKind::L1 => row.iter().fold(0.0, |m: f64, v| m.max(v.abs())),
                    };
                    Interval::centered(self.center[i], self.offset * r)
                })
                .collect(),
        ))
    }

    pub fn volume_cost(&self) -> Result<f64> {
        log_det_volume_cost(&self.shape, self.offset)
    }

    pub fn to_hrep(&self) -> Result<HPolytope> {
        let n = self.dim();
        let (h, b) = match self.kind {
            NormKind::L2 => return Err(Error::UnsupportedKind("l2")),
            NormKind::Linf => {
                let ac = &self.shape * &self.center;
                let mut h = DMatrix::zeros(2 * n, n);
                let mut b = DVector::zeros(2 * n);
                for i in 0..n {
                    for j in 0..n {
                        h[(i, j)] = self.shape[(i, j)];
                        h[(n + i, j)] = -self.shape[(i, j)];
                    }
                    b[i] = ac[i] + self.offset;
                    b[n + i] = -ac[i] + self.offset;
                }
                (h, b)
            }
            NormKind::L1 => {
                if n > MAX_L1_HREP_DIM {
                    return Err(Error::DimensionTooLarge {
                        n,
                        limit: MAX_L1_HREP_DIM,
                    });
                }
                // Rows of S range over all sign vectors; S is closed under
                // negation, so Sα(x − x̊) ≤ y𝟏 already covers both sides.
                let rows = 1usize << n;
                let signs = DMatrix::from_fn(rows, n, |k, j| {
                    if (k >> (n - 1 - j)) & 1 == 1 {
                        -1.0
                    } else {
                        1.0
                    }
                });
                let h = &signs * &self.shape;
                let b = &h * &self.center + DVector::from_element(rows, self.offset);
                (h, b)
            }
        };
        Ok(HPolytope { h, b })
    }

    /// `count` points drawn uniformly from the set.
    pub fn sample(&self, seed: u64, count: usize) -> Result<Vec<DVector<f64>>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(&mut rng, count, false)
    }

    /// `count` points on the boundary `‖α(x − x̊)‖ = y`.
    pub fn sample_boundary(&self, seed: u64, count: usize) -> Result<Vec<DVector<f64>>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(&mut rng, count, true)
    }

    pub(crate) fn sample_with<R: Rng>(
        &self,
        rng: &mut R,
        count: usize,
        boundary: bool,
    ) -> Result<Vec<DVector<f64>>> {
        let gen = &checked_inverse(&self.shape)? * self.offset;
        let n = self.dim();
        Ok((0..count)
            .map(|_| {
                let z = unit_ball_point(self.kind, n, rng, boundary);
                &gen * z + &self.center
            })
            .collect())
    }
}

fn unit_ball_point<R: Rng>(kind: NormKind, n: usize, rng: &mut R, boundary: bool) -> DVector<f64> {
    match kind {
        NormKind::Linf => {
            let mut z = DVector::from_fn(n, |_, _| rng.random_range(-1.0..=1.0));
            if boundary && n > 0 {
                let face = rng.random_range(0..n);
                z[face] = if rng.random::<bool>() { 1.0 } else { -1.0 };
            }
            z
        }
        NormKind::L1 => {
            // Normalized exponential spacings: uniform on the simplex (with an
            // extra slack coordinate for the interior).
            let extra = usize::from(!boundary);
            let e: Vec<f64> = (0..n + extra).map(|_| Exp1.sample(rng)).collect();
            let total: f64 = e.iter().sum();
            DVector::from_fn(n, |i, _| {
                let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
                s * e[i] / total
            })
        }
        NormKind::L2 => {
            let g: DVector<f64> = DVector::from_fn(n, |_, _| StandardNormal.sample(rng));
            let norm = g.norm();
            let r = if boundary {
                1.0
            } else {
                rng.random::<f64>().powf(1.0 / n as f64)
            };
            g * (r / norm)
        }
    }
}

/// JSON form: `{kind, center, shape (row-major), offset}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormotopeRecord {
    pub kind: NormKind,
    pub center: Vec<f64>,
    pub shape: Vec<f64>,
    pub offset: f64,
}

impl From<&Normotope> for NormotopeRecord {
    fn from(n: &Normotope) -> Self {
        Self {
            kind: n.kind,
            center: n.center.as_slice().to_vec(),
            shape: row_major(&n.shape),
            offset: n.offset,
        }
    }
}

impl TryFrom<NormotopeRecord> for Normotope {
    type Error = Error;
    fn try_from(r: NormotopeRecord) -> Result<Self> {
        let n = r.center.len();
        if r.shape.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: r.shape.len(),
            });
        }
        Normotope::new(
            r.kind,
            DVector::from_vec(r.center),
            DMatrix::from_row_slice(n, n, &r.shape),
            r.offset,
        )
    }
}

impl Serialize for Normotope {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        NormotopeRecord::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Normotope {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = NormotopeRecord::deserialize(d)?;
        Normotope::try_from(rec).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn dv(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }

    fn random_normotope(kind: NormKind, seed: u64, n: usize) -> Normotope {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = DMatrix::from_fn(n, n, |i, j| {
            rng.random_range(-0.5..0.5) + if i == j { 2.0 } else { 0.0 }
        });
        let center = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        Normotope::new(kind, center, shape, rng.random_range(0.3..2.0)).unwrap()
    }

    #[test]
    fn contains_examples() {
        let n = Normotope::new(NormKind::Linf, dv(&[1.0, -2.0]), DMatrix::identity(2, 2), 1.0).unwrap();
        assert!(n.contains(&dv(&[1.0, -2.0]), 0.0).unwrap());
        assert!(n.contains(&dv(&[2.0, -2.0]), 0.0).unwrap());
        assert!(!n.contains(&dv(&[2.001, -2.0]), 0.0).unwrap());

        let e = Normotope::new(NormKind::L2, dv(&[0.0, 0.0]), dmatrix![2.0, 0.0; 0.0, 1.0], 1.0).unwrap();
        assert!(e.contains(&dv(&[0.5, 0.0]), 0.0).unwrap());
        assert!(!e.contains(&dv(&[0.51, 0.0]), 0.0).unwrap());
        assert!(matches!(e.contains(&dv(&[0.0]), 0.0), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn hull_examples() {
        let z = dv(&[0.0, 0.0, 0.0]);
        let b = Normotope::new(NormKind::Linf, z.clone(), DMatrix::identity(3, 3), 1.0).unwrap();
        assert!(b.interval_hull().unwrap().iter().all(|i| *i == Interval::new(-1.0, 1.0)));

        let e = Normotope::new(NormKind::L2, dv(&[0.0, 0.0]), dmatrix![2.0, 0.0; 0.0, 1.0], 1.0).unwrap();
        let h = e.interval_hull().unwrap();
        assert_eq!(h[0], Interval::new(-0.5, 0.5));
        assert_eq!(h[1], Interval::new(-1.0, 1.0));

        let c = Normotope::new(NormKind::L1, dv(&[0.0, 0.0]), DMatrix::identity(2, 2), 1.0).unwrap();
        let h = c.interval_hull().unwrap();
        assert_eq!(h[0], Interval::new(-1.0, 1.0));
        assert_eq!(h[1], Interval::new(-1.0, 1.0));
    }

    #[test]
    fn singular_shape_is_rejected() {
        let r = Normotope::new(NormKind::L2, dv(&[0.0, 0.0]), dmatrix![1.0, 2.0; 2.0, 4.0], 1.0);
        assert!(matches!(r, Err(Error::SingularShape { .. })));
        assert!(Normotope::new(NormKind::L2, dv(&[0.0]), dmatrix![1.0], 0.0).is_err());
    }

    #[test]
    fn volume_cost_examples() {
        let id = Normotope::new(NormKind::L2, dv(&[0.0, 0.0]), DMatrix::identity(2, 2), 1.0).unwrap();
        assert_eq!(id.volume_cost().unwrap(), 0.0);
        let two = Normotope::new(NormKind::L2, dv(&[0.0, 0.0]), DMatrix::identity(2, 2) * 2.0, 1.0).unwrap();
        assert!((two.volume_cost().unwrap() + 16f64.ln()).abs() < 1e-12);

        let mut n = random_normotope(NormKind::L2, 5, 3);
        n.offset = 0.5;
        let det = n.shape.determinant();
        let oracle = -(det * det).ln() + 6.0 * 0.5f64.ln();
        let phi = n.volume_cost().unwrap();
        assert!(((phi - oracle) / oracle).abs() < 1e-10);
    }

    #[test]
    fn volume_cost_invariances() {
        for seed in 0..20 {
            let n = random_normotope(NormKind::L2, seed, 4);
            let phi = n.volume_cost().unwrap();
            let mut shifted = n.clone();
            shifted.center.add_scalar_mut(3.7);
            assert_eq!(shifted.volume_cost().unwrap(), phi);
            let scaled = Normotope::new(n.kind, n.center.clone(), &n.shape * 3.3, n.offset * 3.3).unwrap();
            assert!((scaled.volume_cost().unwrap() - phi).abs() < 1e-12);
        }
    }

    #[test]
    fn hrep_examples() {
        let b = Normotope::new(NormKind::Linf, dv(&[0.0, 0.0]), DMatrix::identity(2, 2), 1.0).unwrap();
        let p = b.to_hrep().unwrap();
        assert_eq!(p.h, dmatrix![1.0, 0.0; 0.0, 1.0; -1.0, 0.0; 0.0, -1.0]);
        assert_eq!(p.b, dv(&[1.0, 1.0, 1.0, 1.0]));

        let b = Normotope::new(NormKind::Linf, dv(&[1.0, 0.0]), dmatrix![2.0, 0.0; 0.0, 1.0], 1.0).unwrap();
        assert_eq!(b.to_hrep().unwrap().b, dv(&[3.0, 1.0, -1.0, 1.0]));

        let c = Normotope::new(NormKind::L1, dv(&[0.0, 0.0]), DMatrix::identity(2, 2), 1.0).unwrap();
        let p = c.to_hrep().unwrap();
        assert_eq!(p.h, dmatrix![1.0, 1.0; 1.0, -1.0; -1.0, 1.0; -1.0, -1.0]);
        assert_eq!(p.b, dv(&[1.0; 4]));

        let e = Normotope::new(NormKind::L2, dv(&[0.0]), dmatrix![1.0], 1.0).unwrap();
        assert!(matches!(e.to_hrep(), Err(Error::UnsupportedKind(_))));
        let big = Normotope::ball(NormKind::L1, DVector::zeros(11), 1.0).unwrap();
        assert!(matches!(big.to_hrep(), Err(Error::DimensionTooLarge { .. })));
    }

    #[test]
    fn hrep_agrees_with_membership() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for kind in [NormKind::Linf, NormKind::L1] {
            let n = random_normotope(kind, 3, 3);
            let p = n.to_hrep().unwrap();
            for _ in 0..1000 {
                let x = DVector::from_fn(3, |i, _| n.center[i] + rng.random_range(-1.5..1.5));
                let inside = n.contains(&x, 0.0).unwrap();
                // boundary-tight points are equally valid on either side
                let g = n.gauge(&x).unwrap();
                if (g - n.offset).abs() > 1e-9 {
                    assert_eq!(inside, p.contains(&x, 1e-9), "{kind:?}");
                }
            }
        }
    }

    #[test]
    fn samples_are_contained_and_inside_hull() {
        for kind in [NormKind::L1, NormKind::L2, NormKind::Linf] {
            let n = random_normotope(kind, 9, 3);
            let hull = n.interval_hull().unwrap();
            let pts = n.sample(42, 10_000).unwrap();
            for x in &pts {
                assert!(n.contains(x, 1e-9).unwrap());
                assert!(hull.contains(x.as_slice()));
            }
            assert_eq!(pts, n.sample(42, 10_000).unwrap());
            for x in n.sample_boundary(1, 100).unwrap() {
                assert!((n.gauge(&x).unwrap() - n.offset).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn tiny_radius_samples_collapse_to_center() {
        let n = Normotope::new(NormKind::L2, dv(&[1.0, 2.0]), DMatrix::identity(2, 2), 1e-12).unwrap();
        for x in n.sample(0, 5).unwrap() {
            assert!((x - &n.center).norm() < 1e-9);
        }
    }

    #[test]
    fn unit_box_sample_mean() {
        let n = Normotope::new(NormKind::Linf, dv(&[0.0, 0.0]), DMatrix::identity(2, 2), 1.0).unwrap();
        let pts = n.sample(3, 10_000).unwrap();
        let mean = pts.iter().fold(DVector::zeros(2), |acc, p| acc + p) / 10_000.0;
        assert!(mean.amax() < 0.05);
    }

    #[test]
    fn json_round_trip() {
        let n = random_normotope(NormKind::Linf, 21, 3);
        let s = serde_json::to_string(&n).unwrap();
        let back: Normotope = serde_json::from_str(&s).unwrap();
        assert_eq!(back, n);
        assert!(serde_json::from_str::<Normotope>(r#"{"kind":"l2","center":[0],"shape":[1],"offset":1,"x":1}"#).is_err());
    }
}

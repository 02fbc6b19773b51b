use serde::{Deserialize, Serialize};

use super::VectorField;
use crate::error::{Error, Result};
use crate::interval::IntervalVector;
use crate::scalar::Arith;

/// Smallest admissible value of the inertia term `m q₂² + M L²/3` on a box.
const MIN_INERTIA: f64 = 1e-9;

/// Two-link robot arm with PD control, state `(q₁, q₂, z₁, z₂)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RobotArm {
    pub u1: f64,
    pub u2: f64,
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    #[serde(rename = "L")]
    pub length: f64,
    pub kp1: f64,
    pub kp2: f64,
    pub kd1: f64,
    pub kd2: f64,
}

impl Default for RobotArm {
    fn default() -> Self {
        Self {
            u1: 2.0,
            u2: 1.0,
            m: 1.0,
            big_m: 1.0,
            length: 3f64.sqrt(),
            kp1: 2.0,
            kp2: 1.0,
            kd1: 2.0,
            kd2: 1.0,
        }
    }
}

pub fn robot_arm(params: RobotArm) -> RobotArm {
    params
}

impl RobotArm {
    fn inertia<T: Arith>(&self, q2: T) -> T {
        T::cst(self.m) * q2.sqr() + T::cst(self.big_m * self.length * self.length / 3.0)
    }
}

impl VectorField for RobotArm {
    fn name(&self) -> &str {
        "robot-arm"
    }

    fn state_dim(&self) -> usize {
        4
    }

    fn field<T: Arith>(&self, _t: f64, x: &[T], _w: &[T]) -> Vec<T> {
        let (q1, q2, z1, z2) = (x[0], x[1], x[2], x[3]);
        let c = T::cst;
        let num = -c(2.0 * self.m) * q2 * z1 * z2 - c(self.kd1) * z1 + c(self.kp1) * (c(self.u1) - q1);
        vec![
            z1,
            z2,
            num / self.inertia(q2),
            q2 * z1.sqr() + (-c(self.kd2) * z2 + c(self.kp2) * (c(self.u2) - q2)) / c(self.m),
        ]
    }

    fn jacobian<T: Arith>(&self, _t: f64, x: &[T], _w: &[T]) -> Vec<T> {
        let (q1, q2, z1, z2) = (x[0], x[1], x[2], x[3]);
        let c = T::cst;
        let d = self.inertia(q2);
        let num = -c(2.0 * self.m) * q2 * z1 * z2 - c(self.kd1) * z1 + c(self.kp1) * (c(self.u1) - q1);
        let zero = c(0.0);
        let one = c(1.0);
        vec![
            zero, zero, one, zero, //
            zero, zero, zero, one, //
            -c(self.kp1) / d,
            -c(2.0 * self.m) * z1 * z2 / d - num * c(2.0 * self.m) * q2 / d.sqr(),
            (-c(2.0 * self.m) * q2 * z2 - c(self.kd1)) / d,
            -c(2.0 * self.m) * q2 * z1 / d,
            zero,
            z1.sqr() - c(self.kp2 / self.m),
            c(2.0) * q2 * z1,
            -c(self.kd2 / self.m),
        ]
    }

    fn check_box(&self, _t: f64, zbox: &IntervalVector) -> Result<()> {
        let d = self.inertia(zbox[1]);
        if d.lo <= MIN_INERTIA {
            return Err(Error::IllDefined(format!(
                "robot-arm inertia term {d} is not bounded away from zero"
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::test_support::*;
    use crate::interval::Interval;
    use crate::normotope::{NormKind, Normotope};
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn jacobian_matches_finite_differences() {
        check_jacobian_against_fd(&RobotArm::default(), -2.0, 2.0, 1);
    }

    #[test]
    fn interval_jacobian_is_sound_on_initial_box() {
        let sys = RobotArm::default();
        let n0 = Normotope::ball(NormKind::L2, DVector::from_vec(vec![1.5, 1.5, 0.0, 0.0]), 0.1).unwrap();
        let hull = n0.interval_hull().unwrap();
        check_ldi_soundness(&sys, &hull, n0.center.as_slice(), 2);

        let m = sys.interval_jacobian(0.0, &hull, n0.center.as_slice()).unwrap();
        assert_eq!(m.nonsingleton_count(), 4);
        assert_eq!(m.corners(256).unwrap().len(), 16);

        // Entries of [Mx] freeze trailing coordinates at the anchor, so the
        // sampling oracle applies to the full-box extension of each entry.
        let full = sys.jacobian(0.0, &hull.0, &[]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let x = DVector::from_fn(4, |i, _| hull[i].lo + rng.random::<f64>() * hull[i].width());
            let j = sys.jac_x(0.0, &x, &DVector::zeros(0));
            for r in 0..4 {
                for c in 0..4 {
                    assert!(full[r * 4 + c].contains(j[(r, c)]));
                }
            }
        }
    }

    #[test]
    fn degenerate_inertia_is_rejected() {
        let sys = RobotArm {
            big_m: 0.0,
            ..RobotArm::default()
        };
        let zbox = IntervalVector::new(vec![Interval::new(-1.0, 1.0); 4]);
        assert!(matches!(
            sys.interval_jacobian(0.0, &zbox, &[0.0; 4]),
            Err(Error::IllDefined(_))
        ));
    }
}

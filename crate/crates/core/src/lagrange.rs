//! The five Lagrange points of two primaries at `(1, 0)` and `(-x, 0)`.
//!
//! L1, L2 and L3 are read off degenerate Euler solutions (one of the three
//! masses set to zero) through `f` and its inverse; L4 and L5 close
//! equilateral triangles with the primaries.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::euler_family::{self, build_solution, FamilyError};
use crate::numerics::Point2;
use crate::verify::{self, ResidualReport, VerifyError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LagrangeError {
    #[error("x = {0} must be positive and finite")]
    OutOfRange(f64),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

pub type Result<T> = std::result::Result<T, LagrangeError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LagrangeSet {
    pub x: f64,
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub l4: Point2,
    pub l5: Point2,
}

impl LagrangeSet {
    /// The five points as planar coordinates, L1 first.
    pub fn points(&self) -> [Point2; 5] {
        [
            Point2::new(self.l1, 0.0),
            Point2::new(self.l2, 0.0),
            Point2::new(self.l3, 0.0),
            self.l4,
            self.l5,
        ]
    }
}

fn check_x(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(LagrangeError::OutOfRange(x))
    }
}

/// L1: the point between the primaries.
pub fn l1(x: f64) -> Result<f64> {
    check_x(x)?;
    if x >= 1.0 {
        Ok(-euler_family::eval_f_inverse(x)?)
    } else {
        Ok(x * euler_family::eval_f_inverse(1.0 / x)?)
    }
}

/// L2: the point beyond the primary at `(1, 0)`.
pub fn l2(x: f64) -> Result<f64> {
    check_x(x)?;
    Ok(x * euler_family::eval_f(1.0 / x)?)
}

/// L3: the point beyond the primary at `(-x, 0)`.
pub fn l3(x: f64) -> Result<f64> {
    check_x(x)?;
    Ok(-euler_family::eval_f(x)?)
}

/// Upper equilateral point.
pub fn l4(x: f64) -> Point2 {
    Point2::new(0.5 * (1.0 - x), 0.5 * (1.0 + x) * 3f64.sqrt())
}

pub fn l5(x: f64) -> Point2 {
    l4(x).mirror()
}

pub fn lagrange_points(x: f64) -> Result<LagrangeSet> {
    check_x(x)?;
    Ok(LagrangeSet {
        x,
        l1: l1(x)?,
        l2: l2(x)?,
        l3: l3(x)?,
        l4: l4(x),
        l5: l5(x),
    })
}

/// Equilibrium residual of a massless probe at `point` for the two-primary
/// system with the second primary at `(-x, 0)`.
///
/// The primaries carry the masses of the degenerate Euler solution `ES(x, 0)`,
/// i.e. `x (1 + x)^2` and `(1 + x)^2`, which is the only mass pair that keeps
/// them on their circles at unit angular velocity.
pub fn probe_residual(x: f64, point: Point2) -> Result<f64> {
    check_x(x)?;
    let sol = build_solution(x, 0.0)?;
    Ok(verify::accel_residual(&sol, point.x, point.y)?.max_residual)
}

/// Residuals of all five Lagrange points, one entry per point.
pub fn verify_lagrange(x: f64) -> Result<ResidualReport> {
    let set = lagrange_points(x)?;
    let sol = build_solution(x, 0.0)?;
    let names = ["L1", "L2", "L3", "L4", "L5"];
    let mut entries = Vec::with_capacity(5);
    for (name, p) in names.into_iter().zip(set.points()) {
        entries.push((name, verify::accel_residual(&sol, p.x, p.y)?.max_residual));
    }
    Ok(ResidualReport::new(entries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler_family::{eval_f_inverse, masses_from_m3};

    #[test]
    fn unit_primaries() {
        let set = lagrange_points(1.0).unwrap();
        assert!((set.l2 - 2.396_812_2).abs() < 1e-6);
        assert!((set.l3 + 2.396_812_2).abs() < 1e-6);
        assert_eq!(set.l1, 0.0);
        assert!(set.l4.dist(Point2::new(0.0, 3f64.sqrt())) < 1e-15);
    }

    #[test]
    fn anchor_values() {
        let set = lagrange_points(2.0).unwrap();
        assert!((set.l1 + 0.712_25).abs() < 1e-4);
        assert!((set.l2 - 3.4090).abs() < 1e-3);
        assert!((l2(3.7471).unwrap() - 5.161).abs() < 5e-3);
    }

    #[test]
    fn rejects_non_positive() {
        assert!(matches!(
            lagrange_points(0.0),
            Err(LagrangeError::OutOfRange(_))
        ));
        assert!(matches!(
            lagrange_points(-1.0),
            Err(LagrangeError::OutOfRange(_))
        ));
    }

    #[test]
    fn ordering_and_equilateral_property() {
        for i in 1..=40 {
            let x = 0.1 * i as f64;
            let set = lagrange_points(x).unwrap();
            assert!(-x < set.l1 && set.l1 < 1.0, "x = {x}");
            assert!(set.l2 > 1.0 && set.l3 < -x, "x = {x}");
            let side = 1.0 + x;
            for p in [set.l4, set.l5] {
                assert!((p.dist(Point2::new(1.0, 0.0)) - side).abs() <= 1e-12 * side);
                assert!((p.dist(Point2::new(-x, 0.0)) - side).abs() <= 1e-12 * side);
            }
            assert_eq!(set.l5, set.l4.mirror());
        }
    }

    #[test]
    fn residuals_vanish_at_all_five_points() {
        for x in [0.3, 1.0, 2.0, 3.747_142_166_64] {
            let rep = verify_lagrange(x).unwrap();
            assert_eq!(rep.eq_residuals.len(), 5);
            assert!(rep.max_residual <= 1e-8, "x = {x}: {rep:?}");
        }
        assert!(verify_lagrange(1.0).unwrap().get("L2").unwrap() <= 1e-8);
        assert!(verify_lagrange(2.0).unwrap().get("L4").unwrap() <= 1e-8);
    }

    #[test]
    fn off_point_probe_is_not_an_equilibrium() {
        assert!(probe_residual(1.0, Point2::new(3.0, 0.0)).unwrap() > 1e-3);
    }

    #[test]
    fn l1_sign_convention_from_degenerate_family() {
        // With m3 = (1+x)^2 the middle body is massless and sits at L1.
        for x in [1.0, 1.5, 2.0, 4.0] {
            let r2 = eval_f_inverse(x).unwrap();
            let (_, m2) = masses_from_m3(r2, x, (1.0 + x).powi(2)).unwrap();
            assert_eq!(m2, 0.0);
            let r = probe_residual(x, Point2::new(-r2, 0.0)).unwrap();
            assert!(r <= 1e-9, "x = {x}: {r}");
            assert!((l1(x).unwrap() + r2).abs() < 1e-15);
        }
    }

    #[test]
    fn l1_continuous_at_one() {
        let below = l1(1.0 - 1e-7).unwrap();
        let above = l1(1.0 + 1e-7).unwrap();
        assert_eq!(l1(1.0).unwrap(), 0.0);
        assert!(below.abs() < 1e-6 && above.abs() < 1e-6);
    }
}

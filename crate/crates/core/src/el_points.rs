//! Equilibria of a massless fourth body riding along with an Euler solution.
//!
//! In the frame rotating with the primaries a massless body at `(r4, r5)` is
//! at rest exactly when the reduced equations `f1 = f2 = 0` hold. Every Euler
//! solution `ES(r2, m3)` with `0 < m3 < (1 + r3)^2` has six such points: four
//! on the line of the primaries and a mirror pair off it.
//!
//! On the line (`r5 = 0`) the reduced equation can be solved for `m3`, which
//! gives one closed-form branch function per gap between primaries (`g1..g4`
//! when the middle body sits at the centre, `h1..h4` otherwise). Collinear
//! points are found by inverting those branches on their brackets.
//! Off the line, `m3` can be solved from either reduced equation (`q3`, `q4`)
//! and the off-axis points lie on the curve `q3 = q4`.
//!
//! Every returned point is re-checked against the direct acceleration sum in
//! [`crate::verify`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::euler_family::{self, EulerSolution, FamilyError};
use crate::lagrange::{self, LagrangeError};
use crate::numerics::{self, Orientation, Point2, Rect, RootConfig, RootError, TraceEnd};
use crate::verify::{self, VerifyError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ElError {
    #[error("({r4}, {r5}) coincides with primary {primary}")]
    Collision { r4: f64, r5: f64, primary: usize },
    #[error("{which} vanishes at {at}")]
    Pole { which: &'static str, at: f64 },
    #[error("no {klass:?} point on ({lo}, {hi})")]
    RootNotFound { klass: ElClass, lo: f64, hi: f64 },
    #[error("{klass:?} bracket holds several candidates: {roots:?}")]
    MultipleRoots { klass: ElClass, roots: Vec<f64> },
    #[error("{klass:?} point ({r4}, {r5}) fails the equilibrium check: residual {residual:e}")]
    ResidualGateFailed {
        klass: ElClass,
        r4: f64,
        r5: f64,
        residual: f64,
    },
    #[error("m3 = {m3} not strictly inside (0, {max})")]
    MassNotInterior { m3: f64, max: f64 },
    #[error("r2 = {0} must be positive")]
    InvalidR2(f64),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Lagrange(#[from] LagrangeError),
    #[error(transparent)]
    Root(#[from] RootError),
}

impl From<VerifyError> for ElError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Collision { x, y, primary } => ElError::Collision {
                r4: x,
                r5: y,
                primary,
            },
            other => ElError::Lagrange(LagrangeError::Verify(other)),
        }
    }
}

pub type Result<T> = std::result::Result<T, ElError>;

/// Largest accepted equilibrium residual for a returned point.
pub const RESIDUAL_GATE: f64 = 1e-10;
/// Distance by which brackets are pulled in from a primary.
const POLE_MARGIN: f64 = 1e-9;
const COLLISION_RADIUS: f64 = 1e-12;
/// Relative cancellation below which a denominator is treated as zero.
const POLE_REL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ElClass {
    /// Beyond the third body.
    CollinearOuterLeft,
    /// Between the third and second bodies.
    CollinearMiddle,
    /// Between the second body and the first.
    CollinearInner,
    /// Beyond the first body.
    CollinearOuterRight,
    TriangularUpper,
    TriangularLower,
}

impl ElClass {
    pub const ALL: [ElClass; 6] = [
        ElClass::CollinearOuterLeft,
        ElClass::CollinearMiddle,
        ElClass::CollinearInner,
        ElClass::CollinearOuterRight,
        ElClass::TriangularUpper,
        ElClass::TriangularLower,
    ];

    pub fn is_collinear(self) -> bool {
        !matches!(self, ElClass::TriangularUpper | ElClass::TriangularLower)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElPoint {
    pub r4: f64,
    pub r5: f64,
    pub klass: ElClass,
    /// Max-norm of the direct acceleration residual.
    pub residual: f64,
}

impl ElPoint {
    pub fn position(&self) -> Point2 {
        Point2::new(self.r4, self.r5)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElSet {
    pub solution: EulerSolution,
    /// One point per class, in the order of [`ElClass::ALL`].
    pub points: [ElPoint; 6],
}

impl ElSet {
    pub fn get(&self, klass: ElClass) -> &ElPoint {
        self.points
            .iter()
            .find(|p| p.klass == klass)
            .expect("an ElSet holds every class")
    }
}

/// `|X4 - X_i|^3` for the three primaries.
#[derive(Debug, Clone, Copy)]
struct Cubes {
    d1: f64,
    d2: f64,
    d3: f64,
}

fn cubes(r2: f64, r3: f64, r4: f64, r5: f64) -> Result<Cubes> {
    // Squared distances in factored form; algebraically the same as the
    // expanded polynomials but free of cancellation near a primary.
    let squares = [
        (r4 - 1.0).powi(2) + r5 * r5,
        (r2 + r4).powi(2) + r5 * r5,
        (r3 + r4).powi(2) + r5 * r5,
    ];
    let mut out = [0.0; 3];
    for (i, s) in squares.into_iter().enumerate() {
        let d = s.sqrt();
        if !(d > COLLISION_RADIUS) {
            return Err(ElError::Collision {
                r4,
                r5,
                primary: i + 1,
            });
        }
        out[i] = s * d;
    }
    Ok(Cubes {
        d1: out[0],
        d2: out[1],
        d3: out[2],
    })
}

fn sol_cubes(sol: &EulerSolution, r4: f64, r5: f64) -> Result<Cubes> {
    cubes(sol.r2(), sol.r3(), r4, r5)
}

/// Reduced equilibrium equation along the line of the primaries.
pub fn eval_f1(sol: &EulerSolution, r4: f64, r5: f64) -> Result<f64> {
    let c = sol_cubes(sol, r4, r5)?;
    let (r2, r3) = (sol.r2(), sol.r3());
    let [m1, m2, m3] = sol.masses();
    Ok(
        m1 * r4 / c.d1 + m2 * r4 / c.d2 + m3 * r4 / c.d3 - r4 - m1 / c.d1
            + m2 * r2 / c.d2
            + m3 * r3 / c.d3,
    )
}

/// Reduced equilibrium equation across the line; has `r5` as a factor.
pub fn eval_f2(sol: &EulerSolution, r4: f64, r5: f64) -> Result<f64> {
    let c = sol_cubes(sol, r4, r5)?;
    let [m1, m2, m3] = sol.masses();
    Ok(r5 * (-m1 / c.d1 - m2 / c.d2 - m3 / c.d3 + 1.0))
}

/// `f2 = r5 · q1`.
pub fn eval_q1(sol: &EulerSolution, r4: f64, r5: f64) -> Result<f64> {
    let c = sol_cubes(sol, r4, r5)?;
    let [m1, m2, m3] = sol.masses();
    Ok(-m1 / c.d1 - m2 / c.d2 - m3 / c.d3 + 1.0)
}

/// Satisfies `f1 = q2 − r4 · q1`.
pub fn eval_q2(sol: &EulerSolution, r4: f64, r5: f64) -> Result<f64> {
    let c = sol_cubes(sol, r4, r5)?;
    let (r2, r3) = (sol.r2(), sol.r3());
    let [m1, m2, m3] = sol.masses();
    Ok(-m1 / c.d1 + m2 * r2 / c.d2 + m3 * r3 / c.d3)
}

/// `numerator / Σ den_terms`, reporting a pole when the sum cancels.
fn ratio(numerator: f64, den_terms: &[f64], which: &'static str, at: f64) -> Result<f64> {
    let den: f64 = den_terms.iter().sum();
    let scale: f64 = den_terms.iter().map(|t| t.abs()).sum();
    // A single infinite term (r4 on a primary that only enters the
    // denominator) gives the finite limit 0.
    if den.is_infinite() && numerator.is_finite() {
        return Ok(numerator / den);
    }
    if !den.is_finite() || !numerator.is_finite() || den.abs() <= POLE_REL * scale || den == 0.0 {
        return Err(ElError::Pole { which, at });
    }
    Ok(numerator / den)
}

/// Family constants `(r2+1)^2`, `(r3+1)^2`, `(r2-r3)^2`.
fn family_constants(r2: f64, r3: f64) -> (f64, f64, f64) {
    ((r2 + 1.0).powi(2), (r3 + 1.0).powi(2), (r2 - r3).powi(2))
}

/// `m3` solved from `q1 = 0` after eliminating `m1` and `m2`.
pub fn eval_q3(r2: f64, r3: f64, r4: f64, r5: f64) -> Result<f64> {
    let c = cubes(r2, r3, r4, r5)?;
    let (a, b, gap2) = family_constants(r2, r3);
    let num = a / c.d2 + r2 * a / c.d1 - 1.0;
    let den = [-a / (b * c.d2), a / (gap2 * c.d1), 1.0 / c.d3];
    ratio(-num, &den, "q3 denominator", r4)
}

/// `m3` solved from `q2 = 0` after eliminating `m1` and `m2`.
pub fn eval_q4(r2: f64, r3: f64, r4: f64, r5: f64) -> Result<f64> {
    let c = cubes(r2, r3, r4, r5)?;
    let (a, b, gap2) = family_constants(r2, r3);
    let num = r2 * a * (1.0 / c.d1 - 1.0 / c.d2);
    let den = [-r2 * a / (b * c.d2), -a / (gap2 * c.d1), r3 / c.d3];
    ratio(num, &den, "q4 denominator", r4)
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= COLLISION_RADIUS
}

/// Branch for `r4 > 1` when the middle body is fixed at the centre.
pub fn g1(r4: f64) -> Result<f64> {
    let num = 4.0 * (r4 - 1.0).powi(3) * (r4 + 1.0).powi(2) * (r4 * r4 + r4 + 1.0);
    let r2 = r4 * r4;
    ratio(num, &[7.0 * r2 * r2, 10.0 * r2, -1.0], "g1 denominator", r4)
}

/// Branch for `0 < r4 < 1`.
pub fn g2(r4: f64) -> Result<f64> {
    let num = -4.0 * (r4 - 1.0).powi(3) * (r4 + 1.0).powi(2) * (r4 * r4 + r4 + 1.0);
    let r2 = r4 * r4;
    ratio(
        num,
        &[r2 * r2, 16.0 * r2 * r4, -2.0 * r2, 1.0],
        "g2 denominator",
        r4,
    )
}

/// Branch for `-1 < r4 < 0`; equals `g2(-r4)`.
pub fn g3(r4: f64) -> Result<f64> {
    let r2 = r4 * r4;
    let num = 4.0 * (r4 - 1.0) * (r4 + 1.0) * (r2 - 1.0) * (r2 * r4 + 1.0);
    ratio(
        num,
        &[r2 * r2, -16.0 * r2 * r4, -2.0 * r2, 1.0],
        "g3 denominator",
        r4,
    )
}

/// Branch for `r4 < -1`; equals `g1(-r4)`.
pub fn g4(r4: f64) -> Result<f64> {
    let r2 = r4 * r4;
    let num = -4.0 * (r4 - 1.0) * (r4 + 1.0) * (r2 - 1.0) * (r2 * r4 + 1.0);
    ratio(num, &[7.0 * r2 * r2, 10.0 * r2, -1.0], "g4 denominator", r4)
}

/// Off-axis branch: `m3` for an equilibrium at `(0, r5)` when `r2 = 0`.
pub fn g5(r5: f64) -> Result<f64> {
    let s = (r5 * r5 + 1.0).powf(1.5);
    let num = 4.0 * s * (1.0 - r5.powi(3));
    ratio(num, &[s, -8.0 * r5.powi(3)], "g5 denominator", r5)
}

/// `m3` making `(r4, 0)` an equilibrium of `ES(0, m3)`.
pub fn collinear_m3_centerfixed(r4: f64) -> Result<f64> {
    for (primary, at) in [(1, 1.0), (2, 0.0), (3, -1.0)] {
        if near(r4, at) {
            return Err(ElError::Collision {
                r4,
                r5: 0.0,
                primary,
            });
        }
    }
    if r4 > 1.0 {
        g1(r4)
    } else if r4 > 0.0 {
        g2(r4)
    } else if r4 > -1.0 {
        g3(r4)
    } else {
        g4(r4)
    }
}

/// `m3` making `(0, r5)` an equilibrium of `ES(0, m3)`.
pub fn axis_m3_centerfixed(r5: f64) -> Result<f64> {
    g5(r5)
}

fn h_terms(r2: f64, r3: f64, r4: f64) -> [f64; 6] {
    let (a, b, gap2) = family_constants(r2, r3);
    let e1 = (r4 - 1.0).powi(2);
    let e2 = (r2 + r4).powi(2);
    let e3 = (r3 + r4).powi(2);
    [
        a * r2 / e1,
        a / e2,
        a / (e1 * gap2),
        a / (b * e2),
        1.0 / e3,
        r4,
    ]
}

/// Branch for `r4 < -r3`.
pub fn h1(r2: f64, r3: f64, r4: f64) -> Result<f64> {
    let [p, q, s, t, u, x] = h_terms(r2, r3, r4);
    ratio(-(p + q + x), &[s, -t, u], "h1 denominator", r4)
}

/// Branch for `-r3 < r4 < -r2`.
pub fn h2(r2: f64, r3: f64, r4: f64) -> Result<f64> {
    let [p, q, s, t, u, x] = h_terms(r2, r3, r4);
    ratio(p + q + x, &[-s, t, u], "h2 denominator", r4)
}

/// Branch for `-r2 < r4 < 1`.
pub fn h3(r2: f64, r3: f64, r4: f64) -> Result<f64> {
    let [p, q, s, t, u, x] = h_terms(r2, r3, r4);
    ratio(p - q + x, &[-s, -t, u], "h3 denominator", r4)
}

/// Branch for `r4 > 1`.
pub fn h4(r2: f64, r3: f64, r4: f64) -> Result<f64> {
    let [p, q, s, t, u, x] = h_terms(r2, r3, r4);
    ratio(-p - q + x, &[s, -t, u], "h4 denominator", r4)
}

/// `m3` making `(r4, 0)` an equilibrium of the Euler solution with radii
/// `(r2, r3)`.
pub fn collinear_m3_general(r2: f64, r3: f64, r4: f64) -> Result<f64> {
    for (primary, at) in [(1, 1.0), (2, -r2), (3, -r3)] {
        if near(r4, at) {
            return Err(ElError::Collision {
                r4,
                r5: 0.0,
                primary,
            });
        }
    }
    if r4 < -r3 {
        h1(r2, r3, r4)
    } else if r4 < -r2 {
        h2(r2, r3, r4)
    } else if r4 < 1.0 {
        h3(r2, r3, r4)
    } else {
        h4(r2, r3, r4)
    }
}

/// Solves `branch(r4) = m3` on `(lo, hi)`, insisting on exactly one root.
fn invert_branch<F>(
    klass: ElClass,
    branch: F,
    m3: f64,
    lo: f64,
    hi: f64,
    cfg: &RootConfig,
) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let shifted = |r4: f64| branch(r4).map_or(f64::NAN, |v| v - m3);
    let roots = numerics::scan_roots(shifted, lo, hi, &cfg.bracket_only())?;
    match roots.as_slice() {
        [] => Err(ElError::RootNotFound { klass, lo, hi }),
        [r] => Ok(*r),
        _ => Err(ElError::MultipleRoots { klass, roots }),
    }
}

/// Refines a collinear root on `f1` directly. Near the ends of the family a
/// branch function can be nearly flat in `r4`, so its inverse loses digits
/// that the force balance itself still resolves.
fn polish_on_axis(sol: &EulerSolution, r4: f64, cfg: &RootConfig) -> f64 {
    let f = |x: f64| eval_f1(sol, x, 0.0).unwrap_or(f64::NAN);
    let mut half = 1e-12 * (1.0 + r4.abs());
    for _ in 0..6 {
        let (lo, hi) = (r4 - half, r4 + half);
        let (a, b) = (f(lo), f(hi));
        if a.is_finite() && b.is_finite() && a * b <= 0.0 {
            return numerics::solve_bracketed(f, lo, hi, &cfg.bracket_only()).unwrap_or(r4);
        }
        half *= 10.0;
    }
    r4
}

fn gate(sol: &EulerSolution, klass: ElClass, r4: f64, r5: f64) -> Result<ElPoint> {
    let residual = verify::accel_residual(sol, r4, r5)?.max_residual;
    let reduced = eval_f1(sol, r4, r5)?.abs().max(eval_f2(sol, r4, r5)?.abs());
    if !(residual <= RESIDUAL_GATE) || !(reduced <= RESIDUAL_GATE) {
        return Err(ElError::ResidualGateFailed {
            klass,
            r4,
            r5,
            residual: residual.max(reduced),
        });
    }
    Ok(ElPoint {
        r4,
        r5,
        klass,
        residual,
    })
}

/// All six equilibria of a massless body added to `sol`.
pub fn find_el_points(sol: &EulerSolution) -> Result<ElSet> {
    find_el_points_with(sol, &RootConfig::default())
}

pub fn find_el_points_with(sol: &EulerSolution, cfg: &RootConfig) -> Result<ElSet> {
    let max = sol.family().max_m3();
    let m3 = sol.m3();
    if !(m3 > 0.0 && m3 < max) {
        return Err(ElError::MassNotInterior { m3, max });
    }
    let coords = if sol.r2() == 0.0 {
        center_fixed_coordinates(m3, cfg)?
    } else {
        general_coordinates(sol, cfg)?
    };
    let mut points = [ElPoint {
        r4: 0.0,
        r5: 0.0,
        klass: ElClass::TriangularUpper,
        residual: 0.0,
    }; 6];
    for ((slot, klass), (r4, r5)) in points.iter_mut().zip(ElClass::ALL).zip(coords) {
        let r4 = if klass.is_collinear() {
            polish_on_axis(sol, r4, cfg)
        } else {
            r4
        };
        *slot = gate(sol, klass, r4, r5)?;
    }
    Ok(ElSet {
        solution: *sol,
        points,
    })
}

/// Coordinates in [`ElClass::ALL`] order for `ES(0, m3)`.
fn center_fixed_coordinates(m3: f64, cfg: &RootConfig) -> Result<[(f64, f64); 6]> {
    let outer = lagrange::l2(1.0)?;
    let e = POLE_MARGIN;
    let outer_left = invert_branch(ElClass::CollinearOuterLeft, g4, m3, -outer, -1.0 - e, cfg)?;
    let middle = invert_branch(ElClass::CollinearMiddle, g3, m3, -1.0 + e, -e, cfg)?;
    let inner = invert_branch(ElClass::CollinearInner, g2, m3, e, 1.0 - e, cfg)?;
    let outer_right = invert_branch(ElClass::CollinearOuterRight, g1, m3, 1.0 + e, outer, cfg)?;
    let axis = invert_branch(ElClass::TriangularUpper, g5, m3, 1.0, 3f64.sqrt(), cfg)?;
    Ok([
        (outer_left, 0.0),
        (middle, 0.0),
        (inner, 0.0),
        (outer_right, 0.0),
        (0.0, axis),
        (0.0, -axis),
    ])
}

/// Coordinates in [`ElClass::ALL`] order for `r2 > 0`.
fn general_coordinates(sol: &EulerSolution, cfg: &RootConfig) -> Result<[(f64, f64); 6]> {
    let (r2, r3, m3) = (sol.r2(), sol.r3(), sol.m3());
    let e = POLE_MARGIN;
    let h = |branch: fn(f64, f64, f64) -> Result<f64>| move |r4: f64| branch(r2, r3, r4);

    let outer_left = invert_branch(
        ElClass::CollinearOuterLeft,
        h(h1),
        m3,
        lagrange::l3(r3)?,
        -r3 - e,
        cfg,
    )?;
    let middle = invert_branch(ElClass::CollinearMiddle, h(h2), m3, -r3 + e, -r2 - e, cfg)?;
    let inner = invert_branch(
        ElClass::CollinearInner,
        h(h3),
        m3,
        -r2 + e,
        lagrange::l1(r2)?,
        cfg,
    )?;
    let outer_right = invert_branch(
        ElClass::CollinearOuterRight,
        h(h4),
        m3,
        lagrange::l2(r2)?,
        lagrange::l2(r3)?,
        cfg,
    )?;
    let upper = triangular_point(r2, r3, m3, cfg)?;
    Ok([
        (outer_left, 0.0),
        (middle, 0.0),
        (inner, 0.0),
        (outer_right, 0.0),
        (upper.x, upper.y),
        (upper.x, -upper.y),
    ])
}

/// Upper off-axis equilibrium: `q3 = q4 = m3`, seeded on the segment between
/// the equilateral points of the two limiting two-primary systems.
fn triangular_point(r2: f64, r3: f64, m3: f64, cfg: &RootConfig) -> Result<Point2> {
    let max = (1.0 + r3).powi(2);
    let start = lagrange::l4(r2);
    let end = lagrange::l4(r3);
    let seed = start + (end - start) * (m3 / max);
    let residual = |p: Point2| {
        let q3 = eval_q3(r2, r3, p.x, p.y).unwrap_or(f64::NAN);
        let q4 = eval_q4(r2, r3, p.x, p.y).unwrap_or(f64::NAN);
        Point2::new(q3 - m3, q4 - m3)
    };
    let planar_cfg = cfg.with_abs_tol(cfg.abs_tol * (1.0 + m3));
    let p = numerics::solve_planar(residual, seed, &planar_cfg)?;
    Ok(Point2::new(p.x, p.y.abs()))
}

/// One sample of the curve `q3 = q4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub r4: f64,
    pub r5: f64,
    /// Common value of `q3` and `q4` at the sample.
    pub m3: f64,
    /// Whether `m3` lies in the admissible range `[0, (1 + r3)^2]`.
    pub physical: bool,
}

/// Traces the curve `q3 = q4` through the equilateral point `L4(r2)` with
/// spacing `resolution`, in both directions from the seed.
pub fn q3q4_locus(r2: f64, resolution: f64) -> Result<Vec<CurveSample>> {
    q3q4_locus_with(r2, resolution, &RootConfig::default())
}

pub fn q3q4_locus_with(r2: f64, resolution: f64, cfg: &RootConfig) -> Result<Vec<CurveSample>> {
    if !(r2 > 0.0) || !r2.is_finite() {
        return Err(ElError::InvalidR2(r2));
    }
    let r3 = euler_family::eval_f(r2)?;
    let max = (1.0 + r3).powi(2);
    let field = |p: Point2| match (eval_q3(r2, r3, p.x, p.y), eval_q4(r2, r3, p.x, p.y)) {
        (Ok(a), Ok(b)) => a - b,
        _ => f64::NAN,
    };
    // Wide enough for both pairs of equilateral points; further out the
    // curve runs alongside the poles of q3 and q4.
    let reach = r3 + 1.0;
    let domain = Rect::new(-reach, reach, -reach, reach);
    let max_points = ((8.0 * reach * std::f64::consts::PI) / resolution).ceil() as usize + 16;
    let seed = lagrange::l4(r2);

    let forward = numerics::trace_level_curve_oriented(
        field,
        seed,
        resolution,
        domain,
        max_points,
        Orientation::Clockwise,
        cfg,
    )?;
    let mut path = forward.points;
    if forward.end != TraceEnd::Closed {
        let backward = numerics::trace_level_curve_oriented(
            field,
            seed,
            resolution,
            domain,
            max_points,
            Orientation::CounterClockwise,
            cfg,
        )?;
        let mut joined: Vec<Point2> = backward.points.into_iter().skip(1).rev().collect();
        joined.extend(path);
        path = joined;
    }

    path.into_iter()
        .map(|p| {
            let m3 = eval_q3(r2, r3, p.x, p.y)?;
            Ok(CurveSample {
                r4: p.x,
                r5: p.y,
                m3,
                physical: (0.0..=max).contains(&m3),
            })
        })
        .collect()
}

//! Euler's collinear circular solutions of the 3-body problem.
//!
//! Units are fixed so that the gravitational constant and the angular
//! velocity are one and the body that sits alone on one side of the centre of
//! mass moves on the unit circle. The three bodies are at
//! `(cos t, sin t)`, `-r2 (cos t, sin t)` and `-r3 (cos t, sin t)`.
//!
//! For a circular solution to exist the radii must satisfy the quintic
//! relation `p(r2, r3) = 0`, which defines `r3 = f(r2)` for every `r2 >= 0`.
//! Once the radii are fixed the masses form a one-parameter family indexed by
//! `m3 ∈ [0, (1 + r3)^2]`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{self, Point2, RootConfig, RootError};
use crate::verify;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FamilyError {
    #[error("mass m3 = {m3} outside [0, {max}]")]
    MassOutOfRange { m3: f64, max: f64 },
    #[error("degenerate family point: r2 = r3 = {0}")]
    DegenerateFamily(f64),
    #[error("argument {value} out of range: {what}")]
    OutOfRange { value: f64, what: &'static str },
    #[error("no sign change for p({r2}, ·) after widening the bracket")]
    BracketFailure { r2: f64 },
    #[error("invariant violated: {0}")]
    InvariantViolated(String),
    #[error(transparent)]
    Root(#[from] RootError),
}

pub type Result<T> = std::result::Result<T, FamilyError>;

/// The quintic `p(r2, r3)` whose zero set relates the two radii.
///
/// Evaluated by Horner's rule in `r3` with coefficients polynomial in `r2`.
pub fn eval_p(r2: f64, r3: f64) -> f64 {
    let c5 = 1.0;
    let c4 = 2.0 - 2.0 * r2;
    let c3 = 1.0 + r2 * (-4.0 + r2);
    let c2 = -1.0 + r2 * (-5.0 + r2 * (-1.0 - r2));
    let c1 = -2.0 + r2 * (-4.0 + r2 * (1.0 + r2 * (4.0 + 2.0 * r2)));
    let c0 = -1.0 + r2 * (-2.0 + r2 * (-1.0 + r2 * (-1.0 + r2 * (-2.0 - r2))));
    ((((c5 * r3 + c4) * r3 + c3) * r3 + c2) * r3 + c1) * r3 + c0
}

/// `∂p/∂r3`.
pub fn eval_dp_dr3(r2: f64, r3: f64) -> f64 {
    let c4 = 5.0;
    let c3 = 8.0 - 8.0 * r2;
    let c2 = 3.0 + r2 * (-12.0 + 3.0 * r2);
    let c1 = -2.0 + r2 * (-10.0 + r2 * (-2.0 - 2.0 * r2));
    let c0 = -2.0 + r2 * (-4.0 + r2 * (1.0 + r2 * (4.0 + 2.0 * r2)));
    (((c4 * r3 + c3) * r3 + c2) * r3 + c1) * r3 + c0
}

/// Magnitude guard used when judging `|p|`.
pub fn p_scale(r3: f64) -> f64 {
    1.0 + r3.abs().powi(5)
}

const WIDENINGS: usize = 8;

/// `r3 = f(r2)`: the radius of the third body as a function of the second.
pub fn eval_f(r2: f64) -> Result<f64> {
    eval_f_with(r2, &RootConfig::default())
}

pub fn eval_f_with(r2: f64, cfg: &RootConfig) -> Result<f64> {
    if !(r2 >= 0.0) || !r2.is_finite() {
        return Err(FamilyError::OutOfRange {
            value: r2,
            what: "r2 must be finite and >= 0",
        });
    }
    // p(r2, max(1, r2)) is zero at r2 = 0 and negative for r2 > 0, so the
    // lower end needs no offset.
    let lo = r2.max(1.0);
    let mut hi = r2 + 3.0;
    for _ in 0..=WIDENINGS {
        if eval_p(r2, lo) * eval_p(r2, hi) <= 0.0 {
            let r3 = numerics::solve_bracketed_with_derivative(
                |r3| eval_p(r2, r3),
                |r3| eval_dp_dr3(r2, r3),
                lo,
                hi,
                &cfg.bracket_only(),
            )?;
            return Ok(r3);
        }
        hi = lo + 2.0 * (hi - lo);
    }
    Err(FamilyError::BracketFailure { r2 })
}

/// The unique `r2 >= 0` with `f(r2) = r3`.
pub fn eval_f_inverse(r3: f64) -> Result<f64> {
    eval_f_inverse_with(r3, &RootConfig::default())
}

pub fn eval_f_inverse_with(r3: f64, cfg: &RootConfig) -> Result<f64> {
    if !(r3 >= 1.0) || !r3.is_finite() {
        return Err(FamilyError::OutOfRange {
            value: r3,
            what: "r3 must be finite and >= 1",
        });
    }
    if r3 == 1.0 {
        return Ok(0.0);
    }
    // f(r2) > r2, so the root lies in [0, r3].
    let g = |r2: f64| eval_f_with(r2, cfg).map_or(f64::NAN, |v| v - r3);
    Ok(numerics::solve_bracketed(g, 0.0, r3, &cfg.bracket_only())?)
}

/// The quartic in `u` obtained by substituting `r2 = u`, `r3 = w + u + 1` into `p`.
pub fn eval_parametrization_quartic(u: f64, w: f64) -> f64 {
    let c4 = -1.0;
    let c3 = -2.0 * w - 6.0;
    let c2 = w * (w * (3.0 * w + 8.0) + 1.0) - 10.0;
    let c1 = w * (w * (w * (3.0 * w + 16.0) + 28.0) + 14.0) - 5.0;
    let c0 = w * (w * (w * (w * (w + 7.0) + 19.0) + 24.0) + 12.0);
    (((c4 * u + c3) * u + c2) * u + c1) * u + c0
}

fn quartic_du(u: f64, w: f64) -> f64 {
    let c3 = -2.0 * w - 6.0;
    let c2 = w * (w * (3.0 * w + 8.0) + 1.0) - 10.0;
    let c1 = w * (w * (w * (3.0 * w + 16.0) + 28.0) + 14.0) - 5.0;
    ((-4.0 * u + 3.0 * c3) * u + 2.0 * c2) * u + c1
}

fn quartic_dw(u: f64, w: f64) -> f64 {
    let h = numerics::fd_step(w);
    (eval_parametrization_quartic(u, w + h) - eval_parametrization_quartic(u, w - h)) / (2.0 * h)
}

/// Newton on the quartic at fixed `w`; `None` if it fails to settle.
fn quartic_newton(mut u: f64, w: f64) -> Option<f64> {
    for _ in 0..60 {
        let q = eval_parametrization_quartic(u, w);
        let dq = quartic_du(u, w);
        if !(dq.is_finite() && dq != 0.0) {
            return None;
        }
        let step = q / dq;
        u -= step;
        if !u.is_finite() {
            return None;
        }
        if step.abs() <= 4.0 * f64::EPSILON * (1.0 + u.abs()) {
            return Some(u);
        }
    }
    None
}

const G_MAX_DW: f64 = 0.05;

/// `G(w)`: the branch of the quartic root with `G(0) = 0`, so that
/// `(G(w), G(w) + w + 1)` runs over the whole curve `p = 0`, `r2 >= 0`.
///
/// Computed by natural-parameter continuation in `w` from the origin with a
/// tangent predictor and a Newton corrector; the step in `w` is halved
/// whenever the corrector fails or jumps.
pub fn parametrize_g(w: f64) -> Result<f64> {
    if !(w >= 0.0) || !w.is_finite() {
        return Err(FamilyError::OutOfRange {
            value: w,
            what: "w must be finite and >= 0",
        });
    }
    let mut u = 0.0;
    let mut at = 0.0;
    let mut dw = G_MAX_DW.min(w);
    while at < w {
        let target = (at + dw).min(w);
        let h = target - at;
        let slope = -quartic_dw(u, at) / quartic_du(u, at);
        let predicted = u + slope * h;
        match quartic_newton(predicted, target) {
            Some(next) if (next - predicted).abs() <= 0.1 * (1.0 + h) => {
                u = next;
                at = target;
                dw = (2.0 * dw).min(G_MAX_DW);
            }
            _ => {
                dw *= 0.5;
                if dw < 1e-12 {
                    return Err(FamilyError::Root(RootError::MaxIterExceeded(0)));
                }
            }
        }
    }
    Ok(u)
}

/// A point `(r2, r3)` on the curve `p = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerFamilyPoint {
    r2: f64,
    r3: f64,
}

impl EulerFamilyPoint {
    /// Builds the family point for `r2`, solving for `r3`.
    pub fn from_r2(r2: f64) -> Result<Self> {
        let r3 = eval_f(r2)?;
        Self::new(r2, r3)
    }

    /// Wraps an already known pair after checking it lies on the curve.
    pub fn new(r2: f64, r3: f64) -> Result<Self> {
        if !(r2 >= 0.0) || !(r3 > r2) || !(r3 >= 1.0) {
            return Err(FamilyError::InvariantViolated(format!(
                "need 0 <= r2 < r3 and r3 >= 1, got r2 = {r2}, r3 = {r3}"
            )));
        }
        let p = eval_p(r2, r3);
        if !(p.abs() <= 1e-10 * p_scale(r3)) {
            return Err(FamilyError::InvariantViolated(format!(
                "p({r2}, {r3}) = {p:e} is not on the family curve"
            )));
        }
        Ok(Self { r2, r3 })
    }

    pub fn r2(&self) -> f64 {
        self.r2
    }

    pub fn r3(&self) -> f64 {
        self.r3
    }

    /// Upper end of the admissible range of `m3`.
    pub fn max_m3(&self) -> f64 {
        (1.0 + self.r3).powi(2)
    }
}

/// `(m1, m2)` for a given `m3` on the family point `(r2, r3)`.
pub fn masses_from_m3(r2: f64, r3: f64, m3: f64) -> Result<(f64, f64)> {
    let max = (1.0 + r3).powi(2);
    if !(0.0..=max).contains(&m3) {
        return Err(FamilyError::MassOutOfRange { m3, max });
    }
    let gap2 = (r2 - r3).powi(2);
    if gap2 == 0.0 {
        return Err(FamilyError::DegenerateFamily(r2));
    }
    let a = (r2 + 1.0).powi(2);
    let m1 = a * (m3 + r2 * gap2) / gap2;
    let m2 = if m3 == max { 0.0 } else { a * (1.0 - m3 / max) };
    Ok((m1, m2))
}

/// A validated member `ES(r2, m3)` of Euler's two-parameter family.
///
/// Serializes as a flat `{r2, r3, m1, m2, m3}` record; deserializing re-runs
/// every check of [`EulerSolution::from_parts`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "SolutionRecord", try_from = "SolutionRecord")]
pub struct EulerSolution {
    family: EulerFamilyPoint,
    m1: f64,
    m2: f64,
    m3: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct SolutionRecord {
    r2: f64,
    r3: f64,
    m1: f64,
    m2: f64,
    m3: f64,
}

impl From<EulerSolution> for SolutionRecord {
    fn from(s: EulerSolution) -> Self {
        Self {
            r2: s.r2(),
            r3: s.r3(),
            m1: s.m1,
            m2: s.m2,
            m3: s.m3,
        }
    }
}

impl TryFrom<SolutionRecord> for EulerSolution {
    type Error = FamilyError;

    fn try_from(r: SolutionRecord) -> Result<Self> {
        EulerSolution::from_parts(r.r2, r.r3, r.m1, r.m2, r.m3)
    }
}

const MASS_REL_TOL: f64 = 1e-12;
const EQUATION_TOL: f64 = 1e-10;

impl EulerSolution {
    /// Reassembles a solution from stored values, re-checking every invariant.
    pub fn from_parts(r2: f64, r3: f64, m1: f64, m2: f64, m3: f64) -> Result<Self> {
        let family = EulerFamilyPoint::new(r2, r3)?;
        let sol = Self { family, m1, m2, m3 };
        sol.check()?;
        Ok(sol)
    }

    fn check(&self) -> Result<()> {
        let (r2, r3) = (self.r2(), self.r3());
        if !(self.m1 >= 0.0 && self.m2 >= 0.0 && self.m3 >= 0.0) {
            return Err(FamilyError::InvariantViolated("negative mass".into()));
        }
        let (m1, m2) = masses_from_m3(r2, r3, self.m3)?;
        let close = |a: f64, b: f64| (a - b).abs() <= MASS_REL_TOL * a.abs().max(b.abs()).max(1.0);
        if !close(m1, self.m1) || !close(m2, self.m2) {
            return Err(FamilyError::InvariantViolated(format!(
                "masses ({}, {}) disagree with the closed forms ({m1}, {m2})",
                self.m1, self.m2
            )));
        }
        if (self.m3 > 0.0 || r2 > 0.0) && !(self.m1 > 0.0) {
            return Err(FamilyError::InvariantViolated("m1 must be positive".into()));
        }
        let report = verify::check_es_equations(self);
        if !(report.max_residual <= EQUATION_TOL) {
            return Err(FamilyError::InvariantViolated(format!(
                "reduced equations not satisfied: max residual {:e}",
                report.max_residual
            )));
        }
        Ok(())
    }

    pub fn family(&self) -> EulerFamilyPoint {
        self.family
    }

    pub fn r2(&self) -> f64 {
        self.family.r2
    }

    pub fn r3(&self) -> f64 {
        self.family.r3
    }

    pub fn m1(&self) -> f64 {
        self.m1
    }

    pub fn m2(&self) -> f64 {
        self.m2
    }

    pub fn m3(&self) -> f64 {
        self.m3
    }

    pub fn masses(&self) -> [f64; 3] {
        [self.m1, self.m2, self.m3]
    }

    /// Positions of the three bodies at `t = 0`, which coincide with their
    /// rotating-frame coordinates.
    pub fn initial_positions(&self) -> [Point2; 3] {
        positions_at(self, 0.0)
    }
}

/// Constructs `ES(r2, m3)`.
pub fn build_solution(r2: f64, m3: f64) -> Result<EulerSolution> {
    let family = EulerFamilyPoint::from_r2(r2)?;
    let (m1, m2) = masses_from_m3(family.r2, family.r3, m3)?;
    let sol = EulerSolution { family, m1, m2, m3 };
    sol.check()?;
    Ok(sol)
}

/// Inertial positions of the three bodies at time `t`.
pub fn positions_at(sol: &EulerSolution, t: f64) -> [Point2; 3] {
    let (s, c) = t.sin_cos();
    let dir = Point2::new(c, s);
    [dir, dir * -sol.r2(), dir * -sol.r3()]
}

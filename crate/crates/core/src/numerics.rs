//! Scalar and planar root finding plus implicit-curve tracing.
//!
//! Everything here is a pure function of its inputs. The scalar solver is a
//! safeguarded Newton iteration: a sign-changing bracket is maintained at all
//! times and a Newton step is only taken when it lands strictly inside the
//! bracket and shrinks fast enough, otherwise the iteration bisects. This makes
//! it safe on functions with poles at (or just outside) the bracket ends.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised by the root finders and the curve tracer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootError {
    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },
    #[error("function returned the non-finite value {value} at {at}")]
    NonFinite { at: f64, value: f64 },
    #[error("maximum number of iterations ({0}) exceeded")]
    MaxIterExceeded(usize),
    #[error("numerically singular Jacobian (det = {det:e}, scale = {scale:e})")]
    Singular { det: f64, scale: f64 },
    #[error("line search could not decrease the residual {residual:e}")]
    NoDescent { residual: f64 },
    #[error("seed ({x}, {y}) could not be projected onto the zero level set")]
    SeedNotOnCurve { x: f64, y: f64 },
    #[error("gradient vanished at ({x}, {y}); possible singular point of the curve")]
    GradientVanished { x: f64, y: f64 },
    #[error("corrector failed to return to the curve near ({x}, {y})")]
    CorrectorFailed { x: f64, y: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, RootError>;

/// Tolerances shared by every solver in this module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootConfig {
    /// Residual tolerance: a point with `|f| <= abs_tol` is accepted as a root.
    pub abs_tol: f64,
    /// Argument tolerance: a bracket narrower than this is considered converged.
    pub step_tol: f64,
    pub max_iter: usize,
    /// Number of uniform subintervals used by [`scan_roots`].
    pub scan_samples: usize,
}

impl Default for RootConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            step_tol: 1e-13,
            max_iter: 200,
            scan_samples: 2048,
        }
    }
}

impl RootConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.abs_tol > 0.0
            && self.step_tol > 0.0
            && self.max_iter >= 1
            && self.scan_samples >= 2;
        if ok {
            Ok(())
        } else {
            Err(RootError::InvalidInput(format!("bad root config {self:?}")))
        }
    }

    pub fn with_abs_tol(self, abs_tol: f64) -> Self {
        Self { abs_tol, ..self }
    }

    /// Same config, but the residual test effectively disabled so that the
    /// scalar solver runs until the bracket itself has collapsed.
    pub fn bracket_only(self) -> Self {
        Self {
            abs_tol: f64::MIN_POSITIVE,
            ..self
        }
    }
}

/// A point (or vector) in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn max_norm(self) -> f64 {
        self.x.abs().max(self.y.abs())
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn dist(self, other: Self) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Reflection across the horizontal axis.
    pub fn mirror(self) -> Self {
        Self::new(self.x, -self.y)
    }
}

impl std::ops::Add for Point2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Point2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl std::ops::Mul<f64> for Point2 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

impl std::ops::Neg for Point2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Axis-aligned rectangle bounding a traced curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Self {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }
}

/// Finite-difference step used for every numerical derivative in the crate.
pub fn fd_step(x: f64) -> f64 {
    (1e-7 * x.abs()).max(1e-7)
}

fn central_difference<F: Fn(f64) -> f64>(func: &F, x: f64) -> f64 {
    let h = fd_step(x);
    (func(x + h) - func(x - h)) / (2.0 * h)
}

/// Finds a root of `func` in `[lo, hi]`, estimating derivatives by central
/// differences.
pub fn solve_bracketed<F>(func: F, lo: f64, hi: f64, cfg: &RootConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    hybrid(&func, |x: f64| central_difference(&func, x), lo, hi, cfg)
}

/// Like [`solve_bracketed`] but with an analytic derivative.
pub fn solve_bracketed_with_derivative<F, D>(
    func: F,
    deriv: D,
    lo: f64,
    hi: f64,
    cfg: &RootConfig,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    hybrid(&func, deriv, lo, hi, cfg)
}

/// Bracket state: `neg` and `pos` are the ends where the function is negative
/// and positive respectively.
struct Bracket {
    neg: f64,
    f_neg: f64,
    pos: f64,
    f_pos: f64,
}

impl Bracket {
    fn update(&mut self, x: f64, fx: f64) {
        if fx < 0.0 {
            self.neg = x;
            self.f_neg = fx;
        } else {
            self.pos = x;
            self.f_pos = fx;
        }
    }

    fn bounds(&self) -> (f64, f64) {
        (self.neg.min(self.pos), self.neg.max(self.pos))
    }

    fn width(&self) -> f64 {
        (self.pos - self.neg).abs()
    }

    fn best(&self) -> f64 {
        if self.f_neg.abs() <= self.f_pos.abs() {
            self.neg
        } else {
            self.pos
        }
    }
}

fn hybrid<F, D>(func: &F, deriv: D, lo: f64, hi: f64, cfg: &RootConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    cfg.validate()?;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(RootError::InvalidInput(format!(
            "bracket [{lo}, {hi}] is not a finite interval"
        )));
    }
    let eval = |x: f64| -> Result<f64> {
        let v = func(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(RootError::NonFinite { at: x, value: v })
        }
    };

    let f_lo = eval(lo)?;
    let f_hi = eval(hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(RootError::NoSignChange { lo, hi, f_lo, f_hi });
    }
    let mut br = if f_lo < 0.0 {
        Bracket {
            neg: lo,
            f_neg: f_lo,
            pos: hi,
            f_pos: f_hi,
        }
    } else {
        Bracket {
            neg: hi,
            f_neg: f_hi,
            pos: lo,
            f_pos: f_lo,
        }
    };

    let mut x = 0.5 * (lo + hi);
    let mut dx_old = hi - lo;
    for _ in 0..cfg.max_iter {
        let fx = eval(x)?;
        if fx.abs() <= cfg.abs_tol {
            return Ok(x);
        }
        br.update(x, fx);
        if br.width() <= cfg.step_tol {
            return Ok(br.best());
        }
        let (a, b) = br.bounds();
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            // Bracket ends are adjacent floats.
            return Ok(br.best());
        }

        let d = deriv(x);
        let step = fx / d;
        let newton = x - step;
        let take_newton = d.is_finite()
            && d != 0.0
            && newton > a
            && newton < b
            && step.abs() <= 0.5 * dx_old.abs();
        if !take_newton {
            dx_old = b - a;
            x = mid;
            continue;
        }
        dx_old = step;
        if step.abs() < 0.5 * cfg.step_tol {
            // Newton has converged below the argument tolerance; straddle the
            // estimate so the bracket itself collapses.
            let h = 0.5 * cfg.step_tol;
            for probe in [newton - h, newton + h] {
                if probe > a && probe < b {
                    let fp = eval(probe)?;
                    if fp.abs() <= cfg.abs_tol {
                        return Ok(probe);
                    }
                    br.update(probe, fp);
                }
            }
            if br.width() <= cfg.step_tol {
                return Ok(br.best());
            }
            let (a, b) = br.bounds();
            x = if newton > a && newton < b {
                newton
            } else {
                0.5 * (a + b)
            };
        } else {
            x = newton;
        }
    }
    Err(RootError::MaxIterExceeded(cfg.max_iter))
}

/// Finds every simple root of `func` on `[lo, hi]`.
///
/// The interval is sampled at `scan_samples + 1` uniform points; each
/// subinterval with a sign change is refined with [`solve_bracketed`]. Grid
/// points where `func` is not finite are skipped. A sign change through a
/// pole is recognised (the refined point has a larger residual than both
/// subinterval ends) and discarded.
pub fn scan_roots<F>(func: F, lo: f64, hi: f64, cfg: &RootConfig) -> Result<Vec<f64>>
where
    F: Fn(f64) -> f64,
{
    cfg.validate()?;
    if !(lo < hi) {
        return Err(RootError::InvalidInput(format!(
            "scan interval [{lo}, {hi}] is empty"
        )));
    }
    let n = cfg.scan_samples;
    let grid: Vec<f64> = (0..=n)
        .map(|i| {
            if i == n {
                hi
            } else {
                lo + (hi - lo) * (i as f64) / (n as f64)
            }
        })
        .collect();
    let values: Vec<f64> = grid.iter().map(|&x| func(x)).collect();

    let mut roots = Vec::new();
    for (i, (&x, &v)) in grid.iter().zip(&values).enumerate() {
        if v == 0.0 {
            roots.push(x);
            continue;
        }
        if i == n {
            break;
        }
        let w = values[i + 1];
        if !v.is_finite() || !w.is_finite() || w == 0.0 || v.signum() == w.signum() {
            continue;
        }
        let root = solve_bracketed(&func, x, grid[i + 1], cfg)?;
        let r = func(root).abs();
        if r > cfg.abs_tol && r > v.abs().max(w.abs()) {
            continue;
        }
        roots.push(root);
    }
    roots.sort_by(f64::total_cmp);
    let dedup_tol = 10.0 * cfg.step_tol;
    roots.dedup_by(|b, a| (*b - *a).abs() <= dedup_tol);
    Ok(roots)
}

/// Central-difference Jacobian of a planar map, columns are d/dx and d/dy.
fn jacobian<F: Fn(Point2) -> Point2>(residual: &F, p: Point2) -> [[f64; 2]; 2] {
    let hx = fd_step(p.x);
    let hy = fd_step(p.y);
    let dx =
        (residual(Point2::new(p.x + hx, p.y)) - residual(Point2::new(p.x - hx, p.y))) * (0.5 / hx);
    let dy =
        (residual(Point2::new(p.x, p.y + hy)) - residual(Point2::new(p.x, p.y - hy))) * (0.5 / hy);
    [[dx.x, dy.x], [dx.y, dy.y]]
}

/// Damped Newton iteration for a planar system `residual(p) = 0`.
///
/// The Newton step is halved up to 30 times until the max-norm of the
/// residual decreases. Converges when that norm is at most `cfg.abs_tol`.
pub fn solve_planar<F>(residual: F, seed: Point2, cfg: &RootConfig) -> Result<Point2>
where
    F: Fn(Point2) -> Point2,
{
    cfg.validate()?;
    let eval = |p: Point2| -> Result<Point2> {
        let r = residual(p);
        if r.is_finite() {
            Ok(r)
        } else {
            let bad = if r.x.is_finite() { r.y } else { r.x };
            Err(RootError::NonFinite {
                at: p.x,
                value: bad,
            })
        }
    };

    let mut p = seed;
    let mut r = eval(p)?;
    let mut norm = r.max_norm();
    for _ in 0..cfg.max_iter {
        if norm <= cfg.abs_tol {
            return Ok(p);
        }
        let j = jacobian(&residual, p);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let scale = (j[0][0] * j[1][1]).abs() + (j[0][1] * j[1][0]).abs();
        if !det.is_finite() || scale == 0.0 || det.abs() < 1e-14 * scale {
            return Err(RootError::Singular { det, scale });
        }
        let step = Point2::new(
            -(j[1][1] * r.x - j[0][1] * r.y) / det,
            -(-j[1][0] * r.x + j[0][0] * r.y) / det,
        );

        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=30 {
            let trial = p + step * lambda;
            let rt = residual(trial);
            if rt.is_finite() && rt.max_norm() < norm {
                accepted = Some((trial, rt));
                break;
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((trial, rt)) => {
                p = trial;
                r = rt;
                norm = rt.max_norm();
            }
            None => return Err(RootError::NoDescent { residual: norm }),
        }
    }
    if norm <= cfg.abs_tol {
        Ok(p)
    } else {
        Err(RootError::MaxIterExceeded(cfg.max_iter))
    }
}

/// Which way the tracer initially walks along the curve relative to the
/// gradient at the seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Tangent `(g_y, -g_x)`: the gradient rotated a quarter turn clockwise.
    Clockwise,
    CounterClockwise,
}

/// Why a trace stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TraceEnd {
    Closed,
    DomainBoundary,
    MaxPoints,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub points: Vec<Point2>,
    pub end: TraceEnd,
}

fn gradient<F: Fn(Point2) -> f64>(field: &F, p: Point2) -> Point2 {
    let hx = fd_step(p.x);
    let hy = fd_step(p.y);
    Point2::new(
        (field(Point2::new(p.x + hx, p.y)) - field(Point2::new(p.x - hx, p.y))) / (2.0 * hx),
        (field(Point2::new(p.x, p.y + hy)) - field(Point2::new(p.x, p.y - hy))) / (2.0 * hy),
    )
}

const GRADIENT_FLOOR: f64 = 1e-12;
const CORRECTOR_ITERS: usize = 50;

/// Projects `p` onto the zero level of `field` by Newton steps along the
/// gradient. Returns `Ok(None)` when the corrector does not converge.
fn correct<F: Fn(Point2) -> f64>(
    field: &F,
    mut p: Point2,
    cfg: &RootConfig,
) -> Result<Option<Point2>> {
    for _ in 0..CORRECTOR_ITERS.min(cfg.max_iter.max(1)) {
        let v = field(p);
        if !v.is_finite() {
            return Ok(None);
        }
        if v.abs() <= cfg.abs_tol {
            return Ok(Some(p));
        }
        let g = gradient(field, p);
        let gn2 = g.dot(g);
        if !gn2.is_finite() {
            return Ok(None);
        }
        if gn2.sqrt() < GRADIENT_FLOOR {
            return Err(RootError::GradientVanished { x: p.x, y: p.y });
        }
        p = p - g * (v / gn2);
    }
    Ok(None)
}

/// Traces the zero level set of `field` starting from `seed`, walking
/// clockwise relative to the gradient at the seed.
pub fn trace_level_curve<F>(
    field: F,
    seed: Point2,
    step: f64,
    domain: Rect,
    max_points: usize,
    cfg: &RootConfig,
) -> Result<Trace>
where
    F: Fn(Point2) -> f64,
{
    trace_level_curve_oriented(
        field,
        seed,
        step,
        domain,
        max_points,
        Orientation::Clockwise,
        cfg,
    )
}

/// Predictor-corrector continuation along `field = 0`.
///
/// Each predictor moves `step` along the unit tangent (the gradient rotated a
/// quarter turn, kept consistent with the previous direction); the corrector
/// projects back along the gradient. Stops at the domain boundary, after
/// `max_points` samples, or when the curve closes (a new point lands within
/// `step / 2` of the seed after at least ten samples). The closing point is
/// not repeated in the output.
pub fn trace_level_curve_oriented<F>(
    field: F,
    seed: Point2,
    step: f64,
    domain: Rect,
    max_points: usize,
    orientation: Orientation,
    cfg: &RootConfig,
) -> Result<Trace>
where
    F: Fn(Point2) -> f64,
{
    cfg.validate()?;
    if !(step > 0.0) || max_points == 0 {
        return Err(RootError::InvalidInput(format!(
            "step {step} must be positive and max_points {max_points} nonzero"
        )));
    }
    let start = match correct(&field, seed, cfg)? {
        Some(p) if p.dist(seed) <= step => p,
        _ => {
            return Err(RootError::SeedNotOnCurve {
                x: seed.x,
                y: seed.y,
            })
        }
    };

    let mut points = vec![start];
    let mut current = start;
    let mut prev_tangent: Option<Point2> = None;
    let sign = match orientation {
        Orientation::Clockwise => 1.0,
        Orientation::CounterClockwise => -1.0,
    };

    while points.len() < max_points {
        let g = gradient(&field, current);
        let gn = g.norm();
        if !(gn >= GRADIENT_FLOOR) {
            return Err(RootError::GradientVanished {
                x: current.x,
                y: current.y,
            });
        }
        let mut tangent = Point2::new(g.y, -g.x) * (sign / gn);
        if let Some(prev) = prev_tangent {
            if tangent.dot(prev) < 0.0 {
                tangent = -tangent;
            }
        }

        let mut h = step;
        let mut next = None;
        for _ in 0..12 {
            let predicted = current + tangent * h;
            if let Some(q) = correct(&field, predicted, cfg)? {
                // Reject corrections that jumped to another branch.
                if q.dist(current) < 1.5 * h && (q - current).dot(tangent) > 0.0 {
                    next = Some(q);
                    break;
                }
            }
            h *= 0.5;
        }
        let next = next.ok_or(RootError::CorrectorFailed {
            x: current.x,
            y: current.y,
        })?;

        if !domain.contains(next) {
            return Ok(Trace {
                points,
                end: TraceEnd::DomainBoundary,
            });
        }
        if points.len() >= 10 && next.dist(start) < 0.5 * step {
            return Ok(Trace {
                points,
                end: TraceEnd::Closed,
            });
        }
        points.push(next);
        prev_tangent = Some(tangent);
        current = next;
    }
    Ok(Trace {
        points,
        end: TraceEnd::MaxPoints,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg() -> RootConfig {
        RootConfig::default()
    }

    #[test]
    fn sqrt_two() {
        let x = solve_bracketed(|x| x * x - 2.0, 0.0, 2.0, &cfg()).unwrap();
        assert!((x - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn same_sign_is_an_error() {
        let err = solve_bracketed(|x| x - 5.0, 0.0, 1.0, &cfg()).unwrap_err();
        assert!(matches!(err, RootError::NoSignChange { .. }));
    }

    #[test]
    fn non_finite_evaluation_is_reported() {
        let err = solve_bracketed(
            |x| if x > 0.4 { f64::NAN } else { x - 0.7 },
            0.0,
            1.0,
            &cfg(),
        )
        .unwrap_err();
        assert!(matches!(err, RootError::NonFinite { .. }));
    }

    #[test]
    fn max_iter_is_reported() {
        let tight = RootConfig {
            max_iter: 2,
            ..cfg()
        };
        let err = solve_bracketed(|x| x.powi(3) - 0.3, 0.0, 1.0, &tight).unwrap_err();
        assert_eq!(err, RootError::MaxIterExceeded(2));
    }

    #[test]
    fn analytic_derivative_variant() {
        let x = solve_bracketed_with_derivative(|x| x.exp() - 3.0, |x| x.exp(), 0.0, 2.0, &cfg())
            .unwrap();
        assert!((x - 3f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn bracket_only_collapses_the_bracket() {
        // Large-magnitude function: |f| <= 1e-12 is out of reach, so the
        // solver must stop on bracket width instead.
        let f = |x: f64| 1e6 * (x - 1.234_567_890_123);
        let x = solve_bracketed(f, 0.0, 2.0, &cfg().bracket_only()).unwrap();
        assert!((x - 1.234_567_890_123).abs() <= 1e-13);
    }

    #[test]
    fn endpoint_root_is_returned() {
        assert_eq!(solve_bracketed(|x| x, 0.0, 1.0, &cfg()).unwrap(), 0.0);
    }

    #[test]
    fn scan_factored_cubic() {
        let roots = scan_roots(|x| x * (x - 1.0) * (x + 1.0), -2.0, 2.0, &cfg()).unwrap();
        assert_eq!(roots.len(), 3);
        for (r, e) in roots.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((r - e).abs() < 1e-12, "{r} vs {e}");
        }
    }

    #[test]
    fn scan_no_real_roots() {
        assert!(scan_roots(|x| x * x + 1.0, -1.0, 1.0, &cfg())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn scan_skips_poles() {
        // tan-like: sign change through the pole at 0.5 must not be reported.
        let roots = scan_roots(|x| 1.0 / (x - 0.5) - 4.0, 0.0, 1.0, &cfg()).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn scan_skips_non_finite_grid_points() {
        let f = |x: f64| {
            if (0.2..0.3).contains(&x) {
                f64::NAN
            } else {
                x - 0.6
            }
        };
        let roots = scan_roots(f, 0.0, 1.0, &cfg()).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn planar_linear() {
        let p = solve_planar(
            |p| Point2::new(p.x - 1.0, p.y + 2.0),
            Point2::new(0.0, 0.0),
            &cfg(),
        )
        .unwrap();
        assert!((p.x - 1.0).abs() < 1e-12 && (p.y + 2.0).abs() < 1e-12);
    }

    #[test]
    fn planar_circle_diagonal() {
        let f = |p: Point2| Point2::new(p.x * p.x + p.y * p.y - 1.0, p.x - p.y);
        let p = solve_planar(f, Point2::new(1.0, 1.0), &cfg()).unwrap();
        let h = 0.5 * 2f64.sqrt();
        assert!((p.x - h).abs() < 1e-12 && (p.y - h).abs() < 1e-12);
        assert!(f(p).max_norm() <= 1e-12);
    }

    #[test]
    fn planar_singular() {
        let f = |p: Point2| Point2::new(p.x + p.y - 1.0, 2.0 * (p.x + p.y) - 3.0);
        let err = solve_planar(f, Point2::new(0.0, 0.0), &cfg()).unwrap_err();
        assert!(matches!(err, RootError::Singular { .. }));
    }

    #[test]
    fn trace_unit_circle_closes() {
        let domain = Rect::new(-2.0, 2.0, -2.0, 2.0);
        let trace = trace_level_curve(
            |p: Point2| p.x * p.x + p.y * p.y - 1.0,
            Point2::new(1.0, 0.0),
            0.05,
            domain,
            10_000,
            &cfg(),
        )
        .unwrap();
        assert_eq!(trace.end, TraceEnd::Closed);
        // Circumference / step = 125.66...
        assert!(
            (125..=127).contains(&trace.points.len()),
            "{}",
            trace.points.len()
        );
        for p in &trace.points {
            assert!((p.x * p.x + p.y * p.y - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn trace_axis_until_boundary() {
        let domain = Rect::new(-3.0, 3.0, -3.0, 3.0);
        let trace = trace_level_curve(
            |p: Point2| p.x * p.y,
            Point2::new(1.0, 0.0),
            0.1,
            domain,
            10_000,
            &cfg(),
        )
        .unwrap();
        assert_eq!(trace.end, TraceEnd::DomainBoundary);
        let last = trace.points.last().unwrap();
        assert!(last.x > 2.8 && last.y.abs() < 1e-12);
        assert!(trace
            .points
            .iter()
            .all(|p| p.y.abs() <= 1e-12 && p.x >= 1.0));
    }

    #[test]
    fn trace_reports_singular_point() {
        let domain = Rect::new(-3.0, 3.0, -3.0, 3.0);
        let err = trace_level_curve_oriented(
            |p: Point2| p.x * p.y,
            Point2::new(1.0, 0.0),
            0.1,
            domain,
            10_000,
            Orientation::CounterClockwise,
            &cfg(),
        )
        .unwrap_err();
        assert!(matches!(err, RootError::GradientVanished { .. }));
    }

    #[test]
    fn trace_rejects_far_seed() {
        let domain = Rect::new(-3.0, 3.0, -3.0, 3.0);
        let err = trace_level_curve(
            |p: Point2| p.x * p.x + p.y * p.y + 1.0,
            Point2::new(1.0, 0.0),
            0.1,
            domain,
            100,
            &cfg(),
        )
        .unwrap_err();
        assert!(matches!(err, RootError::SeedNotOnCurve { .. }));
    }

    proptest! {
        #[test]
        fn scan_finds_all_factored_roots(
            mut roots in proptest::collection::vec(-4.5f64..4.5, 1..=6),
            lead in prop_oneof![-3.0f64..-0.5, 0.5f64..3.0],
        ) {
            roots.sort_by(f64::total_cmp);
            // Keep the roots well separated so each is simple and resolvable.
            prop_assume!(roots.windows(2).all(|w| w[1] - w[0] > 0.05));
            let poly = |x: f64| roots.iter().fold(lead, |acc, r| acc * (x - r));
            let found = scan_roots(poly, -5.0, 5.0, &RootConfig::default()).unwrap();
            prop_assert_eq!(found.len(), roots.len());
            for (f, r) in found.iter().zip(&roots) {
                prop_assert!((f - r).abs() < 1e-9, "found {} expected {}", f, r);
            }
        }

        #[test]
        fn bracketed_result_meets_its_bound(c in -0.95f64..0.95, k in 0.1f64..10.0) {
            let cfg = RootConfig::default();
            let f = |x: f64| k * (x - c) + 0.3 * (x - c).powi(3);
            let x = solve_bracketed(f, -1.0, 1.0, &cfg).unwrap();
            prop_assert!(f(x).abs() <= cfg.abs_tol || (x - c).abs() <= cfg.step_tol);
        }
    }
}

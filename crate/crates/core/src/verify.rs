//! First-principles checks straight from the n-body equations of motion.
//!
//! Nothing here reuses the reduced (branch-function) algebra of the other
//! modules: equilibria are checked by summing gravitational accelerations
//! directly, and the dynamics by integrating `Ẍ_i = Σ m_j (X_j − X_i)/|X_j − X_i|³`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::euler_family::EulerSolution;
use crate::numerics::Point2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("probe ({x}, {y}) coincides with primary {primary}")]
    Collision { x: f64, y: f64, primary: usize },
    #[error("bodies {a} and {b} came within {distance:e} at t = {t}")]
    CollisionDuringIntegration {
        a: usize,
        b: usize,
        distance: f64,
        t: f64,
    },
    #[error("invalid integration input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, VerifyError>;

/// Distance below which a probe is considered to sit on a primary.
pub const COLLISION_RADIUS: f64 = 1e-12;
/// Pairwise distance that aborts an integration.
pub const INTEGRATION_COLLISION_RADIUS: f64 = 1e-6;
/// Relative energy drift above which an integration is flagged.
pub const ENERGY_WARNING_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedResidual {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    pub radius_drift: f64,
    pub angular_rate_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub eq_residuals: Vec<NamedResidual>,
    pub max_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub drift: Option<Drift>,
}

impl ResidualReport {
    pub fn new<S: Into<String>>(entries: impl IntoIterator<Item = (S, f64)>) -> Self {
        let eq_residuals: Vec<NamedResidual> = entries
            .into_iter()
            .map(|(name, value)| NamedResidual {
                name: name.into(),
                value,
            })
            .collect();
        // NaN propagates so that a broken residual can never look small.
        let max_residual = eq_residuals
            .iter()
            .map(|r| r.value.abs())
            .fold(0.0, |acc: f64, v| {
                if v.is_nan() || acc.is_nan() {
                    f64::NAN
                } else {
                    acc.max(v)
                }
            });
        Self {
            eq_residuals,
            max_residual,
            drift: None,
        }
    }

    pub fn with_drift(mut self, drift: Drift) -> Self {
        self.drift = Some(drift);
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.eq_residuals
            .iter()
            .find(|r| r.name == name)
            .map(|r| r.value)
    }
}

/// Rotating-frame acceleration residual at `(r4, r5)` for a massless body
/// riding along with `sol`.
///
/// Uniform circular motion at unit rate has `Ẍ = −X`, so the residual is
/// `Σ m_i (X_i − X)/|X_i − X|³ + X`, evaluated at `t = 0`.
pub fn accel_residual(sol: &EulerSolution, r4: f64, r5: f64) -> Result<ResidualReport> {
    let r = accel_residual_vector(sol, r4, r5)?;
    Ok(ResidualReport::new([("x", r.x), ("y", r.y)]))
}

/// The residual of [`accel_residual`] as a plain vector.
pub fn accel_residual_vector(sol: &EulerSolution, r4: f64, r5: f64) -> Result<Point2> {
    let probe = Point2::new(r4, r5);
    let mut acc = probe;
    for (i, (pos, m)) in sol
        .initial_positions()
        .into_iter()
        .zip(sol.masses())
        .enumerate()
    {
        let d = pos - probe;
        let dist = d.norm();
        if m == 0.0 {
            continue;
        }
        if dist <= COLLISION_RADIUS {
            return Err(VerifyError::Collision {
                x: r4,
                y: r5,
                primary: i + 1,
            });
        }
        acc = acc + d * (m / (dist * dist * dist));
    }
    Ok(acc)
}

/// Residuals of the three reduced equations a circular collinear solution
/// must satisfy.
pub fn check_es_equations(sol: &EulerSolution) -> ResidualReport {
    let (r2, r3) = (sol.r2(), sol.r3());
    let [m1, m2, m3] = sol.masses();
    es_equation_report(r2, r3, m1, m2, m3)
}

/// Same as [`check_es_equations`] on raw values that need not form a valid
/// solution (used for sensitivity probes).
pub fn es_equation_report(r2: f64, r3: f64, m1: f64, m2: f64, m3: f64) -> ResidualReport {
    let a = (r2 + 1.0).powi(2);
    let b = (r3 + 1.0).powi(2);
    let gap2 = (r2 - r3).powi(2);
    let e1 = m2 / a + (m3 - b) / b;
    let e2 = (r2 * a - m1) / a + m3 / gap2;
    let e3 = (r3 * b - m1) / b - m2 / gap2;
    ResidualReport::new([("body1", e1), ("body2", e2), ("body3", e3)])
}

/// One body in an integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodyState {
    pub position: Point2,
    pub velocity: Point2,
    pub mass: f64,
}

impl BodyState {
    /// A body in uniform counter-clockwise circular motion at unit rate about
    /// the origin, currently at `position`.
    pub fn co_rotating(position: Point2, mass: f64) -> Self {
        Self {
            position,
            velocity: Point2::new(-position.y, position.x),
            mass,
        }
    }

    fn angular_rate(&self) -> f64 {
        let p = self.position;
        let v = self.velocity;
        (p.x * v.y - p.y * v.x) / p.dot(p)
    }
}

/// Initial states of the three primaries of `sol`, all co-rotating at unit rate.
pub fn solution_bodies(sol: &EulerSolution) -> Vec<BodyState> {
    sol.initial_positions()
        .into_iter()
        .zip(sol.masses())
        .map(|(p, m)| BodyState::co_rotating(p, m))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Integration {
    pub times: Vec<f64>,
    /// `states[k][i]` is body `i` at `times[k]`.
    pub states: Vec<Vec<BodyState>>,
    pub drift: Drift,
    pub body_drift: Vec<Drift>,
    /// Relative energy change of the massive subsystem.
    pub energy_drift: f64,
    /// Largest change of the massive subsystem's total linear momentum.
    pub momentum_drift: f64,
    /// Set when `energy_drift` exceeds [`ENERGY_WARNING_THRESHOLD`]; the step
    /// is probably too large.
    pub step_too_large: bool,
}

fn accelerations(pos: &[Point2], masses: &[f64], out: &mut [Point2]) {
    out.iter_mut().for_each(|a| *a = Point2::default());
    for (i, &pi) in pos.iter().enumerate() {
        for (j, (&pj, &mj)) in pos.iter().zip(masses).enumerate() {
            if i == j || mj == 0.0 {
                continue;
            }
            let d = pj - pi;
            let r = d.norm();
            out[i] = out[i] + d * (mj / (r * r * r));
        }
    }
}

fn closest_pair(pos: &[Point2], masses: &[f64]) -> Option<(usize, usize, f64)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for i in 0..pos.len() {
        for j in (i + 1)..pos.len() {
            // Two massless bodies never interact.
            if masses[i] == 0.0 && masses[j] == 0.0 {
                continue;
            }
            let d = pos[i].dist(pos[j]);
            if best.is_none_or(|(_, _, b)| d < b) {
                best = Some((i, j, d));
            }
        }
    }
    best
}

fn energy(bodies: &[BodyState]) -> f64 {
    let mut e = 0.0;
    for (i, a) in bodies.iter().enumerate() {
        if a.mass == 0.0 {
            continue;
        }
        e += 0.5 * a.mass * a.velocity.dot(a.velocity);
        for b in &bodies[i + 1..] {
            if b.mass != 0.0 {
                e -= a.mass * b.mass / a.position.dist(b.position);
            }
        }
    }
    e
}

fn momentum(bodies: &[BodyState]) -> Point2 {
    bodies
        .iter()
        .fold(Point2::default(), |acc, b| acc + b.velocity * b.mass)
}

/// Integrates the planar n-body problem (G = 1) with classical fixed-step RK4.
///
/// Massless bodies are accelerated by the others but exert no force. The
/// number of steps is `round(t_end / dt)` when that lands on `t_end` to
/// within a part in 1e9, otherwise `ceil` with a shortened final step. Every
/// step is recorded.
pub fn integrate_nbody(bodies: &[BodyState], t_end: f64, dt: f64) -> Result<Integration> {
    if !(dt > 0.0) || !(t_end >= 0.0) || !dt.is_finite() || !t_end.is_finite() {
        return Err(VerifyError::InvalidInput(format!(
            "t_end = {t_end}, dt = {dt}"
        )));
    }
    if bodies.iter().any(|b| !(b.mass >= 0.0)) {
        return Err(VerifyError::InvalidInput("negative mass".into()));
    }
    let n = bodies.len();
    let masses: Vec<f64> = bodies.iter().map(|b| b.mass).collect();
    let mut pos: Vec<Point2> = bodies.iter().map(|b| b.position).collect();
    let mut vel: Vec<Point2> = bodies.iter().map(|b| b.velocity).collect();

    let check_collision = |pos: &[Point2], t: f64| -> Result<()> {
        match closest_pair(pos, &masses) {
            Some((a, b, d)) if d < INTEGRATION_COLLISION_RADIUS => {
                Err(VerifyError::CollisionDuringIntegration {
                    a,
                    b,
                    distance: d,
                    t,
                })
            }
            _ => Ok(()),
        }
    };
    check_collision(&pos, 0.0)?;

    let ratio = t_end / dt;
    let steps = if (ratio - ratio.round()).abs() <= 1e-9 * ratio.max(1.0) {
        ratio.round() as usize
    } else {
        ratio.ceil() as usize
    };

    let initial: Vec<BodyState> = bodies.to_vec();
    let e0 = energy(&initial);
    let p0 = momentum(&initial);
    let r0: Vec<f64> = pos.iter().map(|p| p.norm()).collect();
    let w0: Vec<f64> = initial.iter().map(BodyState::angular_rate).collect();

    let mut body_drift = vec![
        Drift {
            radius_drift: 0.0,
            angular_rate_drift: 0.0
        };
        n
    ];
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push(initial);
    let mut momentum_drift: f64 = 0.0;

    let mut k1v = vec![Point2::default(); n];
    let mut k2v = k1v.clone();
    let mut k3v = k1v.clone();
    let mut k4v = k1v.clone();
    let mut tmp = k1v.clone();
    let mut t = 0.0;
    for step in 0..steps {
        let h = if step + 1 == steps { t_end - t } else { dt };
        accelerations(&pos, &masses, &mut k1v);
        let k1x = vel.clone();
        for i in 0..n {
            tmp[i] = pos[i] + k1x[i] * (0.5 * h);
        }
        accelerations(&tmp, &masses, &mut k2v);
        let k2x: Vec<Point2> = (0..n).map(|i| vel[i] + k1v[i] * (0.5 * h)).collect();
        for i in 0..n {
            tmp[i] = pos[i] + k2x[i] * (0.5 * h);
        }
        accelerations(&tmp, &masses, &mut k3v);
        let k3x: Vec<Point2> = (0..n).map(|i| vel[i] + k2v[i] * (0.5 * h)).collect();
        for i in 0..n {
            tmp[i] = pos[i] + k3x[i] * h;
        }
        accelerations(&tmp, &masses, &mut k4v);
        let k4x: Vec<Point2> = (0..n).map(|i| vel[i] + k3v[i] * h).collect();
        for i in 0..n {
            pos[i] = pos[i] + (k1x[i] + (k2x[i] + k3x[i]) * 2.0 + k4x[i]) * (h / 6.0);
            vel[i] = vel[i] + (k1v[i] + (k2v[i] + k3v[i]) * 2.0 + k4v[i]) * (h / 6.0);
        }
        t = if step + 1 == steps { t_end } else { t + h };
        check_collision(&pos, t)?;

        let snapshot: Vec<BodyState> = (0..n)
            .map(|i| BodyState {
                position: pos[i],
                velocity: vel[i],
                mass: masses[i],
            })
            .collect();
        for (i, b) in snapshot.iter().enumerate() {
            let d = &mut body_drift[i];
            d.radius_drift = d.radius_drift.max((b.position.norm() - r0[i]).abs());
            let w = b.angular_rate();
            if w.is_finite() && w0[i].is_finite() {
                d.angular_rate_drift = d.angular_rate_drift.max((w - w0[i]).abs());
            }
        }
        momentum_drift = momentum_drift.max((momentum(&snapshot) - p0).norm());
        times.push(t);
        states.push(snapshot);
    }

    let e1 = energy(states.last().expect("at least the initial state"));
    let energy_drift = if e0 != 0.0 {
        ((e1 - e0) / e0).abs()
    } else {
        (e1 - e0).abs()
    };
    let drift = body_drift.iter().fold(
        Drift {
            radius_drift: 0.0,
            angular_rate_drift: 0.0,
        },
        |acc, d| Drift {
            radius_drift: acc.radius_drift.max(d.radius_drift),
            angular_rate_drift: acc.angular_rate_drift.max(d.angular_rate_drift),
        },
    );
    Ok(Integration {
        times,
        states,
        drift,
        body_drift,
        energy_drift,
        momentum_drift,
        step_too_large: energy_drift > ENERGY_WARNING_THRESHOLD,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler_family::build_solution;
    use std::f64::consts::TAU;

    #[test]
    fn es_equations_close_for_built_solutions() {
        for (r2, m3) in [(2.0, 1.0), (0.0, 0.8), (0.5, 2.0), (7.0, 30.0)] {
            let sol = build_solution(r2, m3).unwrap();
            let rep = check_es_equations(&sol);
            assert_eq!(rep.eq_residuals.len(), 3);
            assert!(rep.max_residual <= 1e-10, "{rep:?}");
        }
    }

    #[test]
    fn es_equations_detect_perturbed_mass() {
        let sol = build_solution(2.0, 1.0).unwrap();
        let rep = es_equation_report(sol.r2(), sol.r3(), sol.m1(), sol.m2() + 1e-3, sol.m3());
        assert!(rep.max_residual > 1e-5);
    }

    #[test]
    fn center_of_mass_at_origin() {
        for (r2, m3) in [(2.0, 1.0), (0.0, 0.8), (1.3, 5.0), (4.0, 0.0)] {
            let sol = build_solution(r2, m3).unwrap();
            let [m1, m2, m3] = sol.masses();
            let com = m1 - m2 * sol.r2() - m3 * sol.r3();
            assert!(com.abs() <= 1e-9 * (m1 + m2 + m3));
        }
    }

    #[test]
    fn far_field_residual_is_large() {
        let sol = build_solution(2.0, 1.0).unwrap();
        assert!(accel_residual(&sol, 10.0, 10.0).unwrap().max_residual > 1e-3);
    }

    #[test]
    fn equilateral_point_is_an_equilibrium() {
        // Two primaries (m3 = 0): L4 is the apex of the equilateral triangle.
        for x in [0.5, 1.0, 2.0] {
            let sol = build_solution(x, 0.0).unwrap();
            let apex = Point2::new((1.0 - x) / 2.0, (1.0 + x) * 3f64.sqrt() / 2.0);
            let rep = accel_residual(&sol, apex.x, apex.y).unwrap();
            assert!(rep.max_residual <= 1e-10, "x = {x}: {rep:?}");
        }
    }

    #[test]
    fn collision_is_reported() {
        let sol = build_solution(2.0, 1.0).unwrap();
        assert!(matches!(
            accel_residual(&sol, -2.0, 0.0),
            Err(VerifyError::Collision { primary: 2, .. })
        ));
    }

    #[test]
    fn report_max_is_max_abs() {
        let rep = ResidualReport::new([("a", 1.0), ("b", -3.0), ("c", 2.0)]);
        assert_eq!(rep.max_residual, 3.0);
        let rep = ResidualReport::new([("a", 1.0), ("b", f64::NAN)]);
        assert!(rep.max_residual.is_nan());
    }

    fn two_body() -> Vec<BodyState> {
        // Unit case: m1 = x(1+x)^2, m2 = (1+x)^2 with x = 1.
        vec![
            BodyState::co_rotating(Point2::new(1.0, 0.0), 4.0),
            BodyState::co_rotating(Point2::new(-1.0, 0.0), 4.0),
        ]
    }

    #[test]
    fn two_body_circle_one_period() {
        let run = integrate_nbody(&two_body(), TAU, TAU / 4096.0).unwrap();
        assert_eq!(run.times.len(), 4097);
        assert!(run.drift.radius_drift <= 1e-8, "{:?}", run.drift);
        assert!(run.drift.angular_rate_drift <= 1e-8);
        assert!(run.momentum_drift <= 1e-9);
        assert!(!run.step_too_large);
        let last = &run.states.last().unwrap()[0];
        assert!(last.position.dist(Point2::new(1.0, 0.0)) < 1e-8);
    }

    #[test]
    fn rk4_is_fourth_order() {
        // Coarse steps so that truncation, not rounding, dominates.
        let err = |div: f64| {
            let run = integrate_nbody(&two_body(), TAU, TAU / div).unwrap();
            run.states.last().unwrap()[0]
                .position
                .dist(Point2::new(1.0, 0.0))
        };
        let (e1, e2) = (err(64.0), err(128.0));
        let order = (e1 / e2).log2();
        assert!(order > 3.5 && order < 4.5, "order {order}");
    }

    #[test]
    fn massless_bodies_exert_no_force() {
        let mut bodies = two_body();
        let reference = integrate_nbody(&bodies, 1.0, 1e-3).unwrap();
        bodies.push(BodyState::co_rotating(Point2::new(0.0, 3.0), 0.0));
        let with_tracer = integrate_nbody(&bodies, 1.0, 1e-3).unwrap();
        let a = reference.states.last().unwrap();
        let b = with_tracer.states.last().unwrap();
        assert_eq!(a[0], b[0]);
        assert_eq!(a[1], b[1]);
    }

    #[test]
    fn euler_solution_momentum_conserved() {
        let sol = build_solution(2.0, 1.0).unwrap();
        let run = integrate_nbody(&solution_bodies(&sol), TAU, TAU / 4096.0).unwrap();
        let scale: f64 = sol
            .masses()
            .iter()
            .zip([1.0, sol.r2(), sol.r3()])
            .map(|(m, r)| m * r)
            .sum();
        assert!(run.momentum_drift <= 1e-9 * scale, "{}", run.momentum_drift);
        assert!(run.drift.radius_drift <= 1e-8, "{:?}", run.drift);
    }

    #[test]
    fn collision_during_integration() {
        // A slow tracer heading straight at a (nearly) weightless body.
        let bodies = vec![
            BodyState {
                position: Point2::new(0.0, 0.0),
                velocity: Point2::default(),
                mass: 1e-30,
            },
            BodyState {
                position: Point2::new(1e-4, 0.0),
                velocity: Point2::new(-1e-4, 0.0),
                mass: 0.0,
            },
        ];
        let err = integrate_nbody(&bodies, 2.0, 1e-3).unwrap_err();
        assert!(matches!(
            err,
            VerifyError::CollisionDuringIntegration { a: 0, b: 1, .. }
        ));
        let stacked = vec![
            bodies[0],
            BodyState {
                position: Point2::new(1e-7, 0.0),
                ..bodies[1]
            },
        ];
        let err = integrate_nbody(&stacked, 1.0, 1e-3).unwrap_err();
        assert!(matches!(err, VerifyError::CollisionDuringIntegration { t, .. } if t == 0.0));
    }

    #[test]
    fn rejects_bad_step() {
        assert!(integrate_nbody(&two_body(), 1.0, 0.0).is_err());
        assert!(integrate_nbody(&two_body(), 1.0, -1.0).is_err());
    }

    #[test]
    fn partial_final_step_lands_on_t_end() {
        let run = integrate_nbody(&two_body(), 1.0, 0.3).unwrap();
        assert_eq!(*run.times.last().unwrap(), 1.0);
        assert_eq!(run.times.len(), 5);
    }
}

//! Built-in domains and test problems.
//!
//! All test problems solve `-eps lap u + u_x + u = f` with `u = 0` on the
//! boundary, so `a = b = 1` and `alpha = 1`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::geometry::{Orientation, ParametricBoundary};
use crate::operators::{CoefFn, ProblemData};

/// Radius function with its first two derivatives, `t -> (rho, rho', rho'')`.
type Radial = fn(f64, f64) -> [f64; 3];

/// Star-shaped curve `(rho cos t, rho sin t)`, or `(rho sin t, rho cos t)` when
/// `swap_xy` (which reverses the sense of traversal).
fn polar_boundary(beta: f64, rho: Radial, swap_xy: bool) -> ParametricBoundary {
    let order = move |v: [f64; 2]| if swap_xy { [v[1], v[0]] } else { v };
    let eval = move |t: f64| {
        let [r, _, _] = rho(t, beta);
        order([r * t.cos(), r * t.sin()])
    };
    let d1 = move |t: f64| {
        let [r, dr, _] = rho(t, beta);
        let (s, c) = t.sin_cos();
        order([dr * c - r * s, dr * s + r * c])
    };
    let d2 = move |t: f64| {
        let [r, dr, ddr] = rho(t, beta);
        let (s, c) = t.sin_cos();
        order([
            ddr * c - 2.0 * dr * s - r * c,
            ddr * s + 2.0 * dr * c - r * s,
        ])
    };
    let orientation = if swap_xy {
        Orientation::Clockwise
    } else {
        Orientation::Anticlockwise
    };
    ParametricBoundary::new(2.0 * PI, orientation, Arc::new(eval))
        .with_derivatives(Arc::new(d1), Arc::new(d2))
}

fn rho_circle(_t: f64, beta: f64) -> [f64; 3] {
    [beta, 0.0, 0.0]
}

fn rho_omega1(t: f64, beta: f64) -> [f64; 3] {
    let (s2, c2) = (2.0 * t).sin_cos();
    [beta + t.sin().powi(2), s2, 2.0 * c2]
}

fn rho_omega2(t: f64, beta: f64) -> [f64; 3] {
    let s = t.sin();
    let (s2, c2) = (2.0 * t).sin_cos();
    [
        2.5 * PI * PI + beta - t * t * s * s,
        -(2.0 * t * s * s + t * t * s2),
        -(2.0 * s * s + 4.0 * t * s2 + 2.0 * t * t * c2),
    ]
}

fn rho_omega3(t: f64, beta: f64) -> [f64; 3] {
    let (s2, c2) = (2.0 * t).sin_cos();
    [beta + t.cos().powi(2), -s2, -2.0 * c2]
}

/// Circle of radius `beta` about the origin, anticlockwise.
pub fn circle(beta: f64) -> ParametricBoundary {
    assert!(beta > 0.0, "radius must be positive");
    polar_boundary(beta, rho_circle, false)
}

/// `rho = beta + sin^2 t`, anticlockwise: a peanut elongated along y.
pub fn omega1(beta: f64) -> ParametricBoundary {
    assert!(beta > 0.0, "beta must be positive");
    polar_boundary(beta, rho_omega1, false)
}

/// `(rho sin t, rho cos t)` with `rho = 2.5 pi^2 + beta - t^2 sin^2 t`,
/// clockwise. Only `C^1` at `t = 0`: the curvature jumps there, and the
/// derivative closures return the right-sided (`t -> 0+`) values.
pub fn omega2(beta: f64) -> ParametricBoundary {
    assert!(beta > 0.0, "beta must be positive");
    polar_boundary(beta, rho_omega2, true)
}

/// `rho = beta + cos^2 t`, anticlockwise, `0 < beta < 2`: a peanut elongated
/// along x with six characteristic points.
pub fn omega3(beta: f64) -> ParametricBoundary {
    assert!(beta > 0.0 && beta < 2.0, "beta must lie in (0, 2)");
    polar_boundary(beta, rho_omega3, false)
}

/// Closed-form exact solution used to manufacture a right-hand side.
pub trait ExactSolution: Send + Sync {
    fn value(&self, x: f64, y: f64) -> f64;
    fn dx(&self, x: f64, y: f64) -> f64;
    fn laplacian(&self, x: f64, y: f64) -> f64;
}

/// `u = (beta^2 - x^2 - y^2) e^x`, vanishing on the circle of radius `beta`.
#[derive(Debug, Clone, Copy)]
pub struct CircleBump {
    pub beta: f64,
}

impl ExactSolution for CircleBump {
    fn value(&self, x: f64, y: f64) -> f64 {
        (self.beta * self.beta - x * x - y * y) * x.exp()
    }

    fn dx(&self, x: f64, y: f64) -> f64 {
        (self.beta * self.beta - x * x - y * y - 2.0 * x) * x.exp()
    }

    fn laplacian(&self, x: f64, y: f64) -> f64 {
        (self.beta * self.beta - x * x - y * y - 4.0 * x - 4.0) * x.exp()
    }
}

/// `u = beta^2 - x^2 - y^2`.
#[derive(Debug, Clone, Copy)]
pub struct Paraboloid {
    pub beta: f64,
}

impl ExactSolution for Paraboloid {
    fn value(&self, x: f64, y: f64) -> f64 {
        self.beta * self.beta - x * x - y * y
    }

    fn dx(&self, x: f64, _y: f64) -> f64 {
        -2.0 * x
    }

    fn laplacian(&self, _x: f64, _y: f64) -> f64 {
        -4.0
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Zero;

impl ExactSolution for Zero {
    fn value(&self, _x: f64, _y: f64) -> f64 {
        0.0
    }

    fn dx(&self, _x: f64, _y: f64) -> f64 {
        0.0
    }

    fn laplacian(&self, _x: f64, _y: f64) -> f64 {
        0.0
    }
}

#[derive(Clone)]
enum Source {
    Field(CoefFn),
    Manufactured(Arc<dyn ExactSolution>),
}

/// A domain together with coefficients, source and default solver settings.
#[derive(Clone)]
pub struct TestCase {
    pub label: String,
    pub boundary: ParametricBoundary,
    pub beta: f64,
    pub config: SolverConfig,
    source: Source,
}

impl fmt::Debug for TestCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestCase")
            .field("label", &self.label)
            .field("beta", &self.beta)
            .field("config", &self.config)
            .finish()
    }
}

impl TestCase {
    /// Coefficients for a given `eps`. For manufactured cases the source
    /// term depends on `eps`.
    pub fn data(&self, eps: f64) -> ProblemData {
        let f: CoefFn = match &self.source {
            Source::Field(f) => f.clone(),
            Source::Manufactured(u) => {
                let u = u.clone();
                Arc::new(move |x, y| -eps * u.laplacian(x, y) + u.dx(x, y) + u.value(x, y))
            }
        };
        ProblemData::new(Arc::new(|_, _| 1.0), Arc::new(|_, _| 1.0), f, eps, 1.0)
    }

    pub fn exact(&self) -> Option<Arc<dyn ExactSolution>> {
        match &self.source {
            Source::Manufactured(u) => Some(u.clone()),
            Source::Field(_) => None,
        }
    }

    /// Same case with the source replaced by `f`.
    pub fn with_source(mut self, f: CoefFn) -> Self {
        self.source = Source::Field(f);
        self
    }
}

/// Test problems 1 (on omega1), 2 (on omega2) and 3 (on omega3).
pub fn test_problem(id: u32, beta: f64) -> Result<TestCase> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidConfig(format!("beta must be positive, got {beta}")));
    }
    let defaults = SolverConfig::default();
    match id {
        1 => Ok(TestCase {
            label: format!("problem 1 (omega1, beta = {beta})"),
            boundary: omega1(beta),
            beta,
            config: defaults,
            source: Source::Field(Arc::new(move |_x, y| (1.0 + beta).powi(2) - y * y)),
        }),
        2 => {
            let m_y = 2.5 * PI * PI + beta;
            let m_x = 2.25 * PI * PI + beta;
            Ok(TestCase {
                label: format!("problem 2 (omega2, beta = {beta})"),
                boundary: omega2(beta),
                beta,
                config: SolverConfig {
                    strip_width: 1.0,
                    ..defaults
                },
                source: Source::Field(Arc::new(move |x, y| {
                    ((1.0 - y * y / (m_y * m_y)) * (x / m_x)).powi(4)
                })),
            })
        }
        3 => {
            if beta >= 2.0 {
                return Err(Error::InvalidConfig(format!(
                    "problem 3 needs 0 < beta < 2, got {beta}"
                )));
            }
            Ok(TestCase {
                label: format!("problem 3 (omega3, beta = {beta})"),
                boundary: omega3(beta),
                beta,
                config: defaults,
                // supported on |y| <= beta
                source: Source::Field(Arc::new(move |_x, y| {
                    if y.abs() <= beta {
                        ((1.0 - y / beta) * (1.0 + y / beta)).powi(4)
                    } else {
                        0.0
                    }
                })),
            })
        }
        other => Err(Error::UnknownProblem(other)),
    }
}

/// Case on `boundary` whose exact solution is `u_exact`; `u_exact` must vanish
/// on the boundary.
pub fn manufactured_case(
    boundary: ParametricBoundary,
    u_exact: Arc<dyn ExactSolution>,
) -> TestCase {
    TestCase {
        label: "manufactured".to_string(),
        boundary,
        beta: f64::NAN,
        config: SolverConfig::default(),
        source: Source::Manufactured(u_exact),
    }
}

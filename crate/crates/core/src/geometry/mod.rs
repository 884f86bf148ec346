//! Parametric boundaries and the boundary-fitted `(r, t)` coordinate system.
//!
//! A point near the boundary is written as `x = phi(t) + r n1(t)`,
//! `y = psi(t) + r n2(t)` where `(n1, n2)` is the inward unit normal. The
//! metric factors of this map are `eta = 1 - kappa r` and `zeta = 1/(tau eta)`,
//! with `kappa` signed so that `eta` shrinks when moving inward on convex parts.

mod characteristic;
mod inversion;
mod polygon;

use std::fmt;
use std::sync::{Arc, OnceLock};

pub use characteristic::{
    find_characteristic_points, outflow_arcs, theta_min, CharacteristicKind, CharacteristicPoint,
};
pub use inversion::{to_curvilinear, ArcSampler, INVERSION_SEEDS};
pub use polygon::PointClass;

use crate::error::{Error, Result};
use polygon::Polygon;

/// Vertices of the polygonal approximation used by [`ParametricBoundary::contains`].
pub const POLYGON_VERTICES: usize = 8192;

pub type CurveFn = Arc<dyn Fn(f64) -> [f64; 2] + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Anticlockwise,
    Clockwise,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Anticlockwise => 1.0,
            Orientation::Clockwise => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Orientation::Anticlockwise => Orientation::Clockwise,
            Orientation::Clockwise => Orientation::Anticlockwise,
        }
    }
}

/// A closed, regular curve `t -> (phi(t), psi(t))` on `[0, T]`.
///
/// Parameters outside `[0, T)` are reduced modulo the period, so arcs that
/// straddle `t = 0` can be written as `[a, b]` with `b > T`.
#[derive(Clone)]
pub struct ParametricBoundary {
    period: f64,
    orientation: Orientation,
    eval: CurveFn,
    deriv1: Option<CurveFn>,
    deriv2: Option<CurveFn>,
    polygon: Arc<OnceLock<Polygon>>,
}

impl fmt::Debug for ParametricBoundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParametricBoundary")
            .field("period", &self.period)
            .field("orientation", &self.orientation)
            .field("analytic_derivatives", &self.deriv1.is_some())
            .finish()
    }
}

impl ParametricBoundary {
    /// A curve without closed-form derivatives; they are taken by centered
    /// differences with step `1e-6 T`.
    pub fn new(period: f64, orientation: Orientation, eval: CurveFn) -> Self {
        assert!(period > 0.0 && period.is_finite(), "period must be positive");
        Self {
            period,
            orientation,
            eval,
            deriv1: None,
            deriv2: None,
            polygon: Arc::new(OnceLock::new()),
        }
    }

    pub fn with_derivatives(mut self, deriv1: CurveFn, deriv2: CurveFn) -> Self {
        self.deriv1 = Some(deriv1);
        self.deriv2 = Some(deriv2);
        self
    }

    /// The same point set traversed backwards, `t -> T - t`, with the
    /// orientation flag flipped accordingly.
    pub fn reversed(&self) -> Self {
        let period = self.period;
        let eval = self.eval.clone();
        let mut out = Self::new(
            period,
            self.orientation.flipped(),
            Arc::new(move |t| eval(period - t)),
        );
        if let (Some(d1), Some(d2)) = (self.deriv1.clone(), self.deriv2.clone()) {
            out = out.with_derivatives(
                Arc::new(move |t| {
                    let [a, b] = d1(period - t);
                    [-a, -b]
                }),
                Arc::new(move |t| d2(period - t)),
            );
        }
        out
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        self.deriv1.is_some()
    }

    pub fn reduce(&self, t: f64) -> f64 {
        let r = t.rem_euclid(self.period);
        if r >= self.period {
            0.0
        } else {
            r
        }
    }

    pub fn point(&self, t: f64) -> [f64; 2] {
        (self.eval)(self.reduce(t))
    }

    pub fn deriv1(&self, t: f64) -> [f64; 2] {
        let t = self.reduce(t);
        match &self.deriv1 {
            Some(d) => d(t),
            None => {
                let h = 1e-6 * self.period;
                let p = (self.eval)(self.reduce(t + h));
                let m = (self.eval)(self.reduce(t - h));
                [(p[0] - m[0]) / (2.0 * h), (p[1] - m[1]) / (2.0 * h)]
            }
        }
    }

    pub fn deriv2(&self, t: f64) -> [f64; 2] {
        let t = self.reduce(t);
        match &self.deriv2 {
            Some(d) => d(t),
            None => {
                let h = 1e-6 * self.period;
                let p = (self.eval)(self.reduce(t + h));
                let c = (self.eval)(t);
                let m = (self.eval)(self.reduce(t - h));
                [
                    (p[0] - 2.0 * c[0] + m[0]) / (h * h),
                    (p[1] - 2.0 * c[1] + m[1]) / (h * h),
                ]
            }
        }
    }

    /// Inward unit normal. Only first derivatives are needed.
    pub fn normal(&self, t: f64) -> [f64; 2] {
        let [dx, dy] = self.deriv1(t);
        let s = self.orientation.sign() / dx.hypot(dy);
        [-dy * s, dx * s]
    }

    /// Tangent magnitude, signed curvature, inward normal and unit tangent at `t`.
    pub fn frame(&self, t: f64) -> Result<FrameSample> {
        let [dx, dy] = self.deriv1(t);
        let tau = dx.hypot(dy);
        if !(tau >= 1e-14) {
            return Err(Error::SingularParameterization { t, tau });
        }
        let [ddx, ddy] = self.deriv2(t);
        let s = self.orientation.sign();
        let kappa = s * (dx * ddy - dy * ddx) / (tau * tau * tau);
        Ok(FrameSample {
            t,
            point: self.point(t),
            tau,
            kappa,
            normal: [-s * dy / tau, s * dx / tau],
            tangent: [dx / tau, dy / tau],
        })
    }

    pub fn to_cartesian(&self, p: CurvilinearPoint) -> [f64; 2] {
        let [x, y] = self.point(p.t);
        let [n1, n2] = self.normal(p.t);
        [x + p.r * n1, y + p.r * n2]
    }

    fn polygon(&self) -> &Polygon {
        self.polygon
            .get_or_init(|| Polygon::sample(self, POLYGON_VERTICES))
    }

    /// Inside / on / outside classification.
    ///
    /// Uses the winding number of an 8192-vertex polygon; within one polygon
    /// edge length of the curve the decision is made on the true curve by the
    /// sign of the normal offset to the foot point.
    pub fn classify(&self, x: f64, y: f64) -> PointClass {
        self.polygon().classify(self, [x, y])
    }

    /// True iff `(x, y)` is strictly inside the curve. Boundary points are outside.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.classify(x, y) == PointClass::Inside
    }

    /// Axis-aligned bounds `[x_min, x_max, y_min, y_max]` of the polygon samples.
    pub fn sampled_bounds(&self) -> [f64; 4] {
        self.polygon().bounds()
    }

    /// `n` uniformly spaced samples `(t_k, point_k)`, `t_k = k T / n`.
    pub fn samples(&self, n: usize) -> Vec<(f64, [f64; 2])> {
        (0..n)
            .map(|k| {
                let t = k as f64 * self.period / n as f64;
                (t, self.point(t))
            })
            .collect()
    }
}

/// Differential-geometric data at one boundary parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameSample {
    pub t: f64,
    pub point: [f64; 2],
    pub tau: f64,
    /// Curvature, positive where the boundary bends towards the inward normal.
    pub kappa: f64,
    /// Inward unit normal `(n1, n2)`.
    pub normal: [f64; 2],
    /// Unit tangent in the direction of increasing `t`.
    pub tangent: [f64; 2],
}

impl FrameSample {
    pub fn eta(&self, r: f64) -> f64 {
        1.0 - self.kappa * r
    }

    pub fn zeta(&self, r: f64) -> f64 {
        1.0 / (self.tau * self.eta(r))
    }
}

/// Boundary-fitted coordinates: `r` along the inward normal, `t` along the curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvilinearPoint {
    pub r: f64,
    pub t: f64,
}

/// A parameter interval `[start, end]`, `end > start`. `end` may exceed the
/// period when the interval wraps through `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamInterval {
    pub start: f64,
    pub end: f64,
}

impl ParamInterval {
    pub fn new(start: f64, end: f64) -> Self {
        debug_assert!(end > start);
        Self { start, end }
    }

    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.start + self.end)
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t <= self.end
    }

    pub fn lerp(&self, s: f64) -> f64 {
        self.start + s * (self.end - self.start)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{circle, omega1, omega2, omega3};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn circle_frame_identity() {
        let b = circle(0.5);
        for k in 0..16 {
            let t = k as f64 * 0.4;
            let f = b.frame(t).unwrap();
            assert!(close(f.kappa, 2.0, 1e-12));
            assert!(close(f.tau, 0.5, 1e-14));
            assert!(close(f.normal[0], -t.cos(), 1e-14));
            assert!(close(f.normal[1], -t.sin(), 1e-14));
        }
    }

    #[test]
    fn omega1_curvature_at_characteristic_point() {
        let beta = 0.5;
        let f = omega1(beta).frame(FRAC_PI_2).unwrap();
        assert!(close(f.kappa, (3.0 + beta) / (1.0 + beta).powi(2), 1e-12));
    }

    #[test]
    fn omega3_curvature_values() {
        // Exterior characteristic points carry kappa = 3/(2 sqrt 2) at beta = 0.5.
        let b = omega3(0.5);
        let f = b.frame(PI / 4.0).unwrap();
        assert!(close(f.kappa, 3.0 / (2.0 * 2f64.sqrt()), 1e-12));
        // The waist (interior characteristic point) is concave: kappa = (beta - 2)/beta^2.
        let f = b.frame(FRAC_PI_2).unwrap();
        assert!(close(f.kappa, -6.0, 1e-12));
        // Rightmost point: rho = 1.5, rho'' = -2.
        let f = b.frame(0.0).unwrap();
        assert!(close(f.kappa, 3.5 / 2.25, 1e-12));
    }

    #[test]
    fn frame_rejects_degenerate_tangent() {
        let b = ParametricBoundary::new(1.0, Orientation::Anticlockwise, Arc::new(|_| [0.0, 0.0]));
        assert!(matches!(
            b.frame(0.3),
            Err(Error::SingularParameterization { .. })
        ));
    }

    #[test]
    fn to_cartesian_examples() {
        let b = circle(1.0);
        let p = b.to_cartesian(CurvilinearPoint { r: 0.25, t: 0.0 });
        assert!(close(p[0], 0.75, 1e-15) && close(p[1], 0.0, 1e-15));
        let b1 = omega1(0.5);
        let p = b1.to_cartesian(CurvilinearPoint { r: 0.1, t: FRAC_PI_2 });
        assert!(close(p[0], 0.0, 1e-14) && close(p[1], 1.4, 1e-14));
        for t in [0.1, 1.3, 4.0] {
            let q = b1.to_cartesian(CurvilinearPoint { r: 0.0, t });
            assert_eq!(q, b1.point(t));
        }
    }

    #[test]
    fn builtins_are_closed_and_regular() {
        for b in [circle(1.0), omega1(0.5), omega2(0.5), omega3(0.5)] {
            let p0 = (b.eval)(0.0);
            let p1 = (b.eval)(b.period());
            assert!(close(p0[0], p1[0], 1e-12) && close(p0[1], p1[1], 1e-12));
            for k in 0..4096 {
                let t = k as f64 * b.period() / 4096.0;
                let [dx, dy] = b.deriv1(t);
                assert!(dx.hypot(dy) > 1e-3, "{b:?} degenerate at {t}");
            }
        }
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let h = 1e-5;
        for b in [circle(1.0), omega1(0.5), omega2(0.5), omega3(0.5)] {
            for k in 1..200 {
                let t = k as f64 * b.period() / 200.0 + 0.0123;
                let p = b.point(t + h);
                let m = b.point(t - h);
                let c = b.point(t);
                let d1 = b.deriv1(t);
                let d2 = b.deriv2(t);
                for c_ix in 0..2 {
                    let fd1 = (p[c_ix] - m[c_ix]) / (2.0 * h);
                    let fd2 = (p[c_ix] - 2.0 * c[c_ix] + m[c_ix]) / (h * h);
                    let scale1 = d1[0].hypot(d1[1]).max(1.0);
                    let scale2 = d2[0].hypot(d2[1]).max(1.0);
                    assert!((fd1 - d1[c_ix]).abs() <= 1e-6 * scale1);
                    // second differences lose ~eps/h^2 to cancellation
                    assert!((fd2 - d2[c_ix]).abs() <= 1e-4 * scale2, "{fd2} {}", d2[c_ix]);
                }
            }
        }
    }

    #[test]
    fn normal_is_unit_and_orthogonal() {
        for b in [omega1(0.5), omega2(0.5), omega3(0.5)] {
            for k in 0..1000 {
                let t = k as f64 * b.period() / 1000.0;
                let f = b.frame(t).unwrap();
                let [n1, n2] = f.normal;
                let [dx, dy] = b.deriv1(t);
                assert!(close(n1 * n1 + n2 * n2, 1.0, 1e-12));
                assert!((n1 * dx + n2 * dy).abs() <= 1e-12 * f.tau.max(1.0));
            }
        }
    }

    #[test]
    fn frame_derivative_relations() {
        // d n / dt = -kappa tau T; for anticlockwise curves T = (n2, -n1) so
        // this is n1' = -kappa tau n2 and n2' = kappa tau n1.
        let h = 1e-6;
        for b in [omega1(0.5), omega3(0.5), omega2(0.5)] {
            let s = b.orientation().sign();
            for k in 1..300 {
                let t = k as f64 * b.period() / 300.0 + 0.01;
                let f = b.frame(t).unwrap();
                let np = b.normal(t + h);
                let nm = b.normal(t - h);
                let dn1 = (np[0] - nm[0]) / (2.0 * h);
                let dn2 = (np[1] - nm[1]) / (2.0 * h);
                let kt = f.kappa * f.tau;
                assert!((dn1 + kt * f.tangent[0]).abs() <= 1e-6 * kt.abs().max(1.0));
                assert!((dn2 + kt * f.tangent[1]).abs() <= 1e-6 * kt.abs().max(1.0));
                if s > 0.0 {
                    assert!((dn1 + kt * f.normal[1]).abs() <= 1e-6 * kt.abs().max(1.0));
                    assert!((dn2 - kt * f.normal[0]).abs() <= 1e-6 * kt.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn coordinates_are_orthogonal() {
        use rand::{Rng, SeedableRng};
        let b = omega1(0.5);
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let h = 1e-6;
        for _ in 0..1000 {
            let t = rng.gen_range(0.0..b.period());
            let r = rng.gen_range(0.0..0.1);
            let at = |r: f64, t: f64| b.to_cartesian(CurvilinearPoint { r, t });
            let xr_p = at(r + h, t);
            let xr_m = at(r - h, t);
            let xt_p = at(r, t + h);
            let xt_m = at(r, t - h);
            let dr = [(xr_p[0] - xr_m[0]) / (2.0 * h), (xr_p[1] - xr_m[1]) / (2.0 * h)];
            let dt = [(xt_p[0] - xt_m[0]) / (2.0 * h), (xt_p[1] - xt_m[1]) / (2.0 * h)];
            assert!((dr[0] * dt[0] + dr[1] * dt[1]).abs() <= 1e-8);
        }
    }

    #[test]
    fn finite_difference_fallback_matches_analytic() {
        let analytic = omega1(0.5);
        let eval = analytic.eval.clone();
        let plain = ParametricBoundary::new(analytic.period(), Orientation::Anticlockwise, eval);
        for k in 0..50 {
            let t = k as f64 * 0.12;
            let a = analytic.frame(t).unwrap();
            let p = plain.frame(t).unwrap();
            assert!((a.tau - p.tau).abs() < 1e-8);
            assert!((a.kappa - p.kappa).abs() < 1e-3 * a.kappa.abs().max(1.0));
        }
    }

    #[test]
    fn reversed_curve_has_same_normals() {
        let b = omega3(0.5);
        let r = b.reversed();
        for k in 0..100 {
            let t = k as f64 * b.period() / 100.0;
            let fb = b.frame(t).unwrap();
            let fr = r.frame(b.period() - t).unwrap();
            assert!(close(fb.normal[0], fr.normal[0], 1e-12));
            assert!(close(fb.normal[1], fr.normal[1], 1e-12));
            assert!(close(fb.kappa, fr.kappa, 1e-10));
        }
    }

    #[test]
    fn contains_examples() {
        for b in [circle(1.0), omega1(0.5), omega2(0.5), omega3(0.5)] {
            assert!(b.contains(0.0, 0.0));
            let [x0, x1, y0, y1] = b.sampled_bounds();
            assert!(!b.contains(x1 + 1.0, 0.5 * (y0 + y1)));
            assert!(!b.contains(0.5 * (x0 + x1), y0 - 0.1));
            for k in 0..257 {
                let t = k as f64 * b.period() / 257.0 + 1e-3;
                let [x, y] = b.point(t);
                assert!(!b.contains(x, y), "boundary point at t = {t} classified inside");
            }
        }
    }

    #[test]
    fn contains_matches_radial_rule() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        let cases: Vec<(ParametricBoundary, Box<dyn Fn(f64) -> f64>, bool)> = vec![
            (omega1(0.5), Box::new(|t: f64| 0.5 + t.sin().powi(2)), false),
            (omega3(0.5), Box::new(|t: f64| 0.5 + t.cos().powi(2)), false),
            (
                omega2(0.5),
                Box::new(|t: f64| 2.5 * PI * PI + 0.5 - t * t * t.sin().powi(2)),
                true,
            ),
        ];
        for (b, rho, swapped) in cases {
            let [x0, x1, y0, y1] = b.sampled_bounds();
            for _ in 0..10_000 {
                let x = rng.gen_range(x0 - 0.1..x1 + 0.1);
                let y = rng.gen_range(y0 - 0.1..y1 + 0.1);
                let angle = y.atan2(x);
                let t = if swapped {
                    (FRAC_PI_2 - angle).rem_euclid(2.0 * PI)
                } else {
                    angle.rem_euclid(2.0 * PI)
                };
                let radius = x.hypot(y);
                let exact = radius < rho(t);
                if (radius - rho(t)).abs() > 1e-9 {
                    assert_eq!(b.contains(x, y), exact, "({x}, {y})");
                }
            }
        }
    }
}

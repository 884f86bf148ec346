use super::{CurvilinearPoint, ParamInterval, ParametricBoundary};
use crate::error::{Error, Result};

/// Seeds per arc for the inversion search.
pub const INVERSION_SEEDS: usize = 512;

const RESIDUAL_TOL: f64 = 1e-10;
const RANGE_TOL: f64 = 1e-12;

/// Presampled arc used to invert `x = phi(t) + r n(t)` for many points.
#[derive(Debug, Clone)]
pub struct ArcSampler {
    arc: ParamInterval,
    ts: Vec<f64>,
    pts: Vec<[f64; 2]>,
    bounds: [f64; 4],
    spacing: f64,
}

impl ArcSampler {
    pub fn new(boundary: &ParametricBoundary, arc: ParamInterval, seeds: usize) -> Self {
        let seeds = seeds.max(3);
        let ts: Vec<f64> = (0..seeds)
            .map(|k| arc.lerp(k as f64 / (seeds - 1) as f64))
            .collect();
        let pts: Vec<[f64; 2]> = ts.iter().map(|&t| boundary.point(t)).collect();
        let mut bounds = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
        let mut spacing = 0.0f64;
        for (k, p) in pts.iter().enumerate() {
            bounds[0] = bounds[0].min(p[0]);
            bounds[1] = bounds[1].max(p[0]);
            bounds[2] = bounds[2].min(p[1]);
            bounds[3] = bounds[3].max(p[1]);
            if k > 0 {
                let q = pts[k - 1];
                spacing = spacing.max((p[0] - q[0]).hypot(p[1] - q[1]));
            }
        }
        Self {
            arc,
            ts,
            pts,
            bounds,
            spacing,
        }
    }

    pub fn arc(&self) -> ParamInterval {
        self.arc
    }

    /// Find `(r, t)` with `t` in the arc and `0 <= r <= r_max` mapping onto
    /// `(x, y)`. `Ok(None)` when the point is not in that strip.
    pub fn invert(
        &self,
        boundary: &ParametricBoundary,
        x: f64,
        y: f64,
        r_max: f64,
    ) -> Result<Option<CurvilinearPoint>> {
        let pad = r_max + self.spacing;
        let [x0, x1, y0, y1] = self.bounds;
        if x < x0 - pad || x > x1 + pad || y < y0 - pad || y > y1 + pad {
            return Ok(None);
        }
        let d2: Vec<f64> = self
            .pts
            .iter()
            .map(|p| (p[0] - x).powi(2) + (p[1] - y).powi(2))
            .collect();
        let n = d2.len();
        let reach = (pad * pad) * 1.0001;
        let mut seeds: Vec<usize> = (0..n)
            .filter(|&k| {
                d2[k] <= reach
                    && (k == 0 || d2[k] <= d2[k - 1])
                    && (k + 1 == n || d2[k] <= d2[k + 1])
            })
            .collect();
        seeds.sort_by(|&a, &b| d2[a].total_cmp(&d2[b]));

        let p = [x, y];
        for k in seeds {
            let lo = self.ts[k.saturating_sub(1)];
            let hi = self.ts[(k + 1).min(n - 1)];
            let t = match foot_point(boundary, p, lo, hi) {
                Some(t) => t,
                None => return Err(Error::InversionFailed { x, y }),
            };
            let g = boundary.point(t);
            let nrm = boundary.normal(t);
            let r = (x - g[0]) * nrm[0] + (y - g[1]) * nrm[1];
            let residual = (x - g[0] - r * nrm[0]).hypot(y - g[1] - r * nrm[1]);
            if residual > RESIDUAL_TOL {
                // Minimum sits on an arc end without being a foot point.
                continue;
            }
            let tol = RANGE_TOL * r_max.max(1.0);
            if r >= -tol && r <= r_max + tol && self.arc.contains(t) {
                return Ok(Some(CurvilinearPoint {
                    r: r.clamp(0.0, r_max),
                    t,
                }));
            }
        }
        Ok(None)
    }
}

/// Minimiser of `|p - gamma(t)|^2` on `[lo, hi]`: safeguarded Newton on the
/// stationarity condition when it is bracketed, golden section otherwise.
fn foot_point(boundary: &ParametricBoundary, p: [f64; 2], lo: f64, hi: f64) -> Option<f64> {
    let g = |t: f64| {
        let c = boundary.point(t);
        let d = boundary.deriv1(t);
        (c[0] - p[0]) * d[0] + (c[1] - p[1]) * d[1]
    };
    let dg = |t: f64| {
        let c = boundary.point(t);
        let d1 = boundary.deriv1(t);
        let d2 = boundary.deriv2(t);
        d1[0] * d1[0] + d1[1] * d1[1] + (c[0] - p[0]) * d2[0] + (c[1] - p[1]) * d2[1]
    };
    let g_lo = g(lo);
    let g_hi = g(hi);
    if g_lo == 0.0 {
        return Some(lo);
    }
    if g_hi == 0.0 {
        return Some(hi);
    }
    if g_lo < 0.0 && g_hi > 0.0 {
        return safeguarded_newton(&g, &dg, lo, hi);
    }
    let d2 = |t: f64| {
        let c = boundary.point(t);
        (c[0] - p[0]).powi(2) + (c[1] - p[1]).powi(2)
    };
    let t = golden_section(&d2, lo, hi);
    // polish if the golden-section result is an interior stationary point
    if t > lo && t < hi {
        let a = (t - 1e-6 * (hi - lo)).max(lo);
        let b = (t + 1e-6 * (hi - lo)).min(hi);
        if g(a) < 0.0 && g(b) > 0.0 {
            return safeguarded_newton(&g, &dg, a, b);
        }
    }
    Some(t)
}

fn safeguarded_newton(
    g: &impl Fn(f64) -> f64,
    dg: &impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
) -> Option<f64> {
    let mut t = 0.5 * (lo + hi);
    for _ in 0..100 {
        let v = g(t);
        if v == 0.0 {
            return Some(t);
        }
        if v < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let d = dg(t);
        let mut next = if d > 0.0 { t - v / d } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() <= 4.0 * f64::EPSILON * t.abs().max(1.0) || hi - lo <= f64::EPSILON * t.abs().max(1.0) {
            return Some(next);
        }
        t = next;
    }
    if t.is_finite() {
        Some(t)
    } else {
        None
    }
}

fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * a.abs().max(1.0) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    // endpoints win ties so that arc-end minima are reported exactly
    let m = 0.5 * (a + b);
    [a, m, b]
        .into_iter()
        .min_by(|x, y| f(*x).total_cmp(&f(*y)))
        .unwrap_or(m)
}

/// Invert the boundary-fitted map on a single arc. Builds a throwaway
/// sampler; use [`ArcSampler`] directly for repeated queries.
pub fn to_curvilinear(
    boundary: &ParametricBoundary,
    x: f64,
    y: f64,
    arc: ParamInterval,
    r_max: f64,
) -> Result<Option<CurvilinearPoint>> {
    ArcSampler::new(boundary, arc, INVERSION_SEEDS).invert(boundary, x, y, r_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{find_characteristic_points, outflow_arcs};
    use crate::problems::{circle, omega1, omega3};
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    #[test]
    fn circle_inverse() {
        let c = circle(1.0);
        let arc = ParamInterval::new(-0.5 * PI, 1.5 * PI);
        let p = to_curvilinear(&c, 0.75, 0.0, arc, 0.5).unwrap().unwrap();
        assert!((p.r - 0.25).abs() < 1e-12);
        assert!(p.t.abs() < 1e-12);
    }

    #[test]
    fn far_point_is_not_in_strip() {
        let c = circle(1.0);
        let arc = ParamInterval::new(-0.5 * PI, 0.5 * PI);
        assert_eq!(to_curvilinear(&c, 0.2, 0.0, arc, 0.5).unwrap(), None);
        assert_eq!(to_curvilinear(&c, 1.2, 0.0, arc, 0.5).unwrap(), None);
        // beyond the arc end: foot point would be on the inflow side
        assert_eq!(to_curvilinear(&c, -0.9, 0.0, arc, 0.5).unwrap(), None);
    }

    #[test]
    fn round_trip_in_omega1_strip() {
        let b = omega1(0.5);
        let arcs = outflow_arcs(&b, &find_characteristic_points(&b, 8192).unwrap());
        let sampler = ArcSampler::new(&b, arcs[0], INVERSION_SEEDS);
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let r_max = 0.1;
        for _ in 0..1000 {
            let t = rng.gen_range(arcs[0].start..arcs[0].end);
            let r = rng.gen_range(0.0..r_max);
            let [x, y] = b.to_cartesian(CurvilinearPoint { r, t });
            let q = sampler.invert(&b, x, y, r_max).unwrap().expect("in strip");
            assert!((q.r - r).abs() < 1e-9, "r {r} vs {}", q.r);
            assert!((q.t - t).abs() < 1e-9, "t {t} vs {}", q.t);
            let back = b.to_cartesian(q);
            assert!((back[0] - x).hypot(back[1] - y) < 1e-10);
        }
    }

    #[test]
    fn round_trip_on_disconnected_strip() {
        let b = omega3(0.5);
        let arcs = outflow_arcs(&b, &find_characteristic_points(&b, 8192).unwrap());
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        for arc in &arcs {
            let sampler = ArcSampler::new(&b, *arc, INVERSION_SEEDS);
            for _ in 0..300 {
                let t = rng.gen_range(arc.start..arc.end);
                let r = rng.gen_range(0.0..0.1);
                let [x, y] = b.to_cartesian(CurvilinearPoint { r, t });
                let q = sampler.invert(&b, x, y, 0.1).unwrap().expect("in strip");
                assert!((q.r - r).abs() < 1e-9 && (q.t - t).abs() < 1e-9);
            }
        }
    }
}

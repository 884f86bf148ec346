use super::ParametricBoundary;

/// Where a point lies relative to a closed curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointClass {
    Inside,
    OnBoundary,
    Outside,
}

/// Closed points within this distance of the curve count as on the boundary.
const ON_BOUNDARY_TOL: f64 = 1e-12;

const SLABS: usize = 512;

/// Sampled polygon of a boundary with a horizontal slab index, so a point
/// query only visits edges whose (band-expanded) y-range covers the point.
#[derive(Debug, Clone)]
pub(crate) struct Polygon {
    verts: Vec<[f64; 2]>,
    params: Vec<f64>,
    dt: f64,
    bounds: [f64; 4],
    band: f64,
    y0: f64,
    slab_height: f64,
    slabs: Vec<Vec<u32>>,
}

impl Polygon {
    pub(crate) fn sample(boundary: &ParametricBoundary, n: usize) -> Self {
        let dt = boundary.period() / n as f64;
        let params: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
        let verts: Vec<[f64; 2]> = params.iter().map(|&t| boundary.point(t)).collect();

        let mut bounds = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
        let mut band = 0.0f64;
        for (k, v) in verts.iter().enumerate() {
            bounds[0] = bounds[0].min(v[0]);
            bounds[1] = bounds[1].max(v[0]);
            bounds[2] = bounds[2].min(v[1]);
            bounds[3] = bounds[3].max(v[1]);
            let w = verts[(k + 1) % n];
            band = band.max((w[0] - v[0]).hypot(w[1] - v[1]));
        }

        let y0 = bounds[2] - band;
        let slab_height = (bounds[3] - bounds[2] + 2.0 * band) / SLABS as f64;
        let mut slabs = vec![Vec::new(); SLABS];
        for k in 0..n {
            let a = verts[k];
            let b = verts[(k + 1) % n];
            let lo = a[1].min(b[1]) - band;
            let hi = a[1].max(b[1]) + band;
            let s0 = (((lo - y0) / slab_height).floor().max(0.0)) as usize;
            let s1 = (((hi - y0) / slab_height).floor() as usize).min(SLABS - 1);
            for slab in &mut slabs[s0..=s1] {
                slab.push(k as u32);
            }
        }
        Self {
            verts,
            params,
            dt,
            bounds,
            band,
            y0,
            slab_height,
            slabs,
        }
    }

    pub(crate) fn bounds(&self) -> [f64; 4] {
        self.bounds
    }

    pub(crate) fn classify(&self, boundary: &ParametricBoundary, p: [f64; 2]) -> PointClass {
        let [x0, x1, y0, y1] = self.bounds;
        let band = self.band;
        if p[0] < x0 - band || p[0] > x1 + band || p[1] < y0 - band || p[1] > y1 + band {
            return PointClass::Outside;
        }
        let slab = (((p[1] - self.y0) / self.slab_height) as usize).min(SLABS - 1);
        let n = self.verts.len();

        let mut winding = 0i32;
        let mut best = f64::INFINITY;
        let mut best_t = 0.0;
        for &k in &self.slabs[slab] {
            let k = k as usize;
            let a = self.verts[k];
            let b = self.verts[(k + 1) % n];
            // Sunday's winding-number crossing rule.
            let is_left = (b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1]);
            if a[1] <= p[1] {
                if b[1] > p[1] && is_left > 0.0 {
                    winding += 1;
                }
            } else if b[1] <= p[1] && is_left < 0.0 {
                winding -= 1;
            }
            let ex = b[0] - a[0];
            let ey = b[1] - a[1];
            let len2 = ex * ex + ey * ey;
            let s = if len2 > 0.0 {
                (((p[0] - a[0]) * ex + (p[1] - a[1]) * ey) / len2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let d = (p[0] - a[0] - s * ex).hypot(p[1] - a[1] - s * ey);
            if d < best {
                best = d;
                best_t = self.params[k] + s * self.dt;
            }
        }

        if best < band {
            if let Some(r) = signed_offset(boundary, p, best_t, self.dt) {
                return if r > ON_BOUNDARY_TOL {
                    PointClass::Inside
                } else if r < -ON_BOUNDARY_TOL {
                    PointClass::Outside
                } else {
                    PointClass::OnBoundary
                };
            }
            if best <= ON_BOUNDARY_TOL {
                return PointClass::OnBoundary;
            }
        }
        if winding != 0 {
            PointClass::Inside
        } else {
            PointClass::Outside
        }
    }
}

/// Signed offset `(p - gamma(t*)) . n(t*)` at the foot point `t*` near `seed`.
/// Positive inside. `None` if Newton leaves the seed neighbourhood.
fn signed_offset(boundary: &ParametricBoundary, p: [f64; 2], seed: f64, dt: f64) -> Option<f64> {
    let mut t = seed;
    for _ in 0..40 {
        let g = boundary.point(t);
        let d1 = boundary.deriv1(t);
        let d2 = boundary.deriv2(t);
        let rx = g[0] - p[0];
        let ry = g[1] - p[1];
        let f = rx * d1[0] + ry * d1[1];
        let df = d1[0] * d1[0] + d1[1] * d1[1] + rx * d2[0] + ry * d2[1];
        if df <= 0.0 {
            return None;
        }
        let step = f / df;
        t -= step;
        if (t - seed).abs() > 4.0 * dt {
            return None;
        }
        if step.abs() <= 1e-15 * boundary.period() {
            break;
        }
    }
    let g = boundary.point(t);
    let n = boundary.normal(t);
    Some((p[0] - g[0]) * n[0] + (p[1] - g[1]) * n[1])
}

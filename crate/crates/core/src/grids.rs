//! The uniform grid on the enclosing rectangle and the per-arc Shishkin
//! strip meshes.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::geometry::{ArcSampler, CurvilinearPoint, ParamInterval, ParametricBoundary};
use crate::par::Exec;

/// Uniform `(N+1) x (N+1)` grid on `[x_min, x_max] x [y_min, y_max]` with an
/// inside-the-domain mask.
#[derive(Debug, Clone)]
pub struct RectGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    n: usize,
    inside: Vec<bool>,
}

impl RectGrid {
    /// Bounding box from the boundary samples, padded by
    /// `padding * max(L_x, L_y)` on every side.
    pub fn build(
        boundary: &ParametricBoundary,
        n: usize,
        padding: f64,
        exec: Exec,
    ) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidConfig(format!("grid needs N >= 4, got {n}")));
        }
        let [x0, x1, y0, y1] = boundary.sampled_bounds();
        let pad = padding * (x1 - x0).max(y1 - y0);
        let mut grid = Self {
            x_min: x0 - pad,
            x_max: x1 + pad,
            y_min: y0 - pad,
            y_max: y1 + pad,
            n,
            inside: Vec::new(),
        };
        let rows = exec.map_range(n + 1, |j| {
            let y = grid.y(j);
            (0..=n)
                .map(|i| i != 0 && i != n && j != 0 && j != n && boundary.contains(grid.x(i), y))
                .collect::<Vec<bool>>()
        });
        grid.inside = rows.concat();
        Ok(grid)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn hx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n as f64
    }

    pub fn hy(&self) -> f64 {
        (self.y_max - self.y_min) / self.n as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * (self.x_max - self.x_min) / self.n as f64
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y_min + j as f64 * (self.y_max - self.y_min) / self.n as f64
    }

    /// Unknown index of node `(i, j)`; x varies fastest.
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * (self.n + 1) + i
    }

    pub fn node(&self, k: usize) -> (usize, usize) {
        (k % (self.n + 1), k / (self.n + 1))
    }

    pub fn node_count(&self) -> usize {
        (self.n + 1) * (self.n + 1)
    }

    pub fn inside(&self, i: usize, j: usize) -> bool {
        self.inside[self.index(i, j)]
    }

    pub fn inside_mask(&self) -> &[bool] {
        &self.inside
    }

    pub fn in_rectangle(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }
}

/// `build_rect_grid` with the default execution policy.
pub fn build_rect_grid(boundary: &ParametricBoundary, n: usize, padding: f64) -> Result<RectGrid> {
    RectGrid::build(boundary, n, padding, Exec::default())
}

/// `min{R/2, C* (eps/alpha) ln N}`.
pub fn shishkin_transition(width: f64, eps: f64, alpha: f64, c_star: f64, n: usize) -> f64 {
    (width / 2.0).min(c_star * (eps / alpha) * (n as f64).ln())
}

/// Largest `|kappa|` over `arc`, sampled at 1025 points.
pub fn max_abs_curvature(boundary: &ParametricBoundary, arc: ParamInterval) -> Result<f64> {
    let mut kmax = 0.0f64;
    for k in 0..=1024 {
        let f = boundary.frame(arc.lerp(k as f64 / 1024.0))?;
        kmax = kmax.max(f.kappa.abs());
    }
    Ok(kmax)
}

/// Piecewise-uniform mesh in `r` (N/2 cells on `[0, sigma]`, N/2 on
/// `[sigma, R]`) times a uniform mesh of N cells along the arc.
#[derive(Debug, Clone)]
pub struct StripMesh {
    pub arc: ParamInterval,
    pub width: f64,
    pub sigma: f64,
    pub theta: f64,
    pub alpha: f64,
    pub c_star: f64,
    pub eps: f64,
    r_nodes: Vec<f64>,
    t_nodes: Vec<f64>,
}

impl StripMesh {
    #[allow(clippy::too_many_arguments)]
    pub fn build(
        boundary: &ParametricBoundary,
        arc: ParamInterval,
        n: usize,
        width: f64,
        eps: f64,
        alpha: f64,
        c_star: f64,
        theta: f64,
    ) -> Result<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!("strip needs even N >= 4, got {n}")));
        }
        if !(eps > 0.0 && alpha > 0.0 && c_star > 0.0 && width > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "strip needs positive eps, alpha, C*, R (got {eps}, {alpha}, {c_star}, {width})"
            )));
        }
        if arc.is_empty() {
            return Err(Error::InvalidConfig("empty strip arc".into()));
        }
        let kmax = max_abs_curvature(boundary, arc)?;
        if kmax > 0.0 && width >= 1.0 / kmax {
            return Err(Error::StripTooWide {
                width,
                limit: 1.0 / kmax,
            });
        }
        if theta > 0.0 && c_star * theta <= 1.0 {
            log::debug!("C* = {c_star} does not exceed 1/theta = {}", 1.0 / theta);
        }

        let sigma = shishkin_transition(width, eps, alpha, c_star, n);
        let half = n / 2;
        let h = sigma / half as f64;
        let big_h = (width - sigma) / half as f64;
        let mut r_nodes: Vec<f64> = (0..=n)
            .map(|i| {
                if i <= half {
                    i as f64 * h
                } else {
                    sigma + (i - half) as f64 * big_h
                }
            })
            .collect();
        r_nodes[half] = sigma;
        r_nodes[n] = width;
        let t_nodes: Vec<f64> = (0..=n)
            .map(|j| arc.start + j as f64 * (arc.end - arc.start) / n as f64)
            .collect();

        Ok(Self {
            arc,
            width,
            sigma,
            theta,
            alpha,
            c_star,
            eps,
            r_nodes,
            t_nodes,
        })
    }

    pub fn n(&self) -> usize {
        self.r_nodes.len() - 1
    }

    pub fn r_nodes(&self) -> &[f64] {
        &self.r_nodes
    }

    pub fn t_nodes(&self) -> &[f64] {
        &self.t_nodes
    }

    /// Fine step `2 sigma / N`.
    pub fn h_fine(&self) -> f64 {
        2.0 * self.sigma / self.n() as f64
    }

    /// Coarse step `2 (R - sigma) / N`.
    pub fn h_coarse(&self) -> f64 {
        2.0 * (self.width - self.sigma) / self.n() as f64
    }

    pub fn k(&self) -> f64 {
        self.arc.len() / self.n() as f64
    }

    /// Unknown index of node `(r_i, t_j)`; r varies fastest.
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * (self.n() + 1) + i
    }

    pub fn node_count(&self) -> usize {
        (self.n() + 1) * (self.n() + 1)
    }

    /// Whitespace-separated `r t x y` lines, one per node.
    pub fn write_dump(&self, boundary: &ParametricBoundary, mut out: impl Write) -> io::Result<()> {
        for &t in &self.t_nodes {
            for &r in &self.r_nodes {
                let [x, y] = boundary.to_cartesian(CurvilinearPoint { r, t });
                writeln!(out, "{r:.16e} {t:.16e} {x:.16e} {y:.16e}")?;
            }
        }
        Ok(())
    }
}

/// First strip (by arc order) whose closed region contains `(x, y)`.
pub fn strip_membership(
    boundary: &ParametricBoundary,
    samplers: &[ArcSampler],
    width: f64,
    x: f64,
    y: f64,
) -> Result<Option<(usize, CurvilinearPoint)>> {
    for (k, s) in samplers.iter().enumerate() {
        if let Some(p) = s.invert(boundary, x, y, width)? {
            return Ok(Some((k, p)));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{find_characteristic_points, outflow_arcs, INVERSION_SEEDS};
    use crate::problems::{circle, omega1, omega2};
    use std::f64::consts::PI;

    fn samplers(b: &ParametricBoundary) -> Vec<ArcSampler> {
        outflow_arcs(b, &find_characteristic_points(b, 8192).unwrap())
            .into_iter()
            .map(|a| ArcSampler::new(b, a, INVERSION_SEEDS))
            .collect()
    }

    #[test]
    fn circle_box_without_padding() {
        let g = build_rect_grid(&circle(1.0), 16, 0.0).unwrap();
        for (v, e) in [(g.x_min, -1.0), (g.x_max, 1.0), (g.y_min, -1.0), (g.y_max, 1.0)] {
            assert!((v - e).abs() < 1e-6);
        }
    }

    #[test]
    fn omega2_box_height() {
        let beta = 0.5;
        let g = build_rect_grid(&omega2(beta), 8, 0.0).unwrap();
        let m_y = 2.5 * PI * PI + beta;
        assert!((g.y_max - m_y).abs() < 1e-9);
        assert!((g.y_min + m_y).abs() < 1e-6);
    }

    #[test]
    fn mask_properties() {
        let b = omega1(0.5);
        let g = build_rect_grid(&b, 32, 1e-3).unwrap();
        let n = g.n();
        for k in 0..=n {
            assert!(!g.inside(k, 0) && !g.inside(k, n) && !g.inside(0, k) && !g.inside(n, k));
        }
        // node nearest to the origin
        let i = ((0.0 - g.x_min) / g.hx()).round() as usize;
        let j = ((0.0 - g.y_min) / g.hy()).round() as usize;
        assert!(g.inside(i, j));
        for j in 0..=n {
            for i in 0..=n {
                let interior = i > 0 && j > 0 && i < n && j < n;
                assert_eq!(g.inside(i, j), interior && b.contains(g.x(i), g.y(j)));
            }
        }
        let seq = RectGrid::build(&b, 32, 1e-3, Exec::Sequential).unwrap();
        assert_eq!(seq.inside_mask(), g.inside_mask());
    }

    #[test]
    fn small_grid_rejected() {
        assert!(build_rect_grid(&circle(1.0), 3, 0.0).is_err());
    }

    #[test]
    fn transition_point_regimes() {
        assert_eq!(shishkin_transition(0.1, 1.0, 1.0, 2.0, 8), 0.05);
        let eps = 2f64.powi(-20);
        let s = shishkin_transition(0.1, eps, 1.0, 2.0, 64);
        assert_eq!(s, 2.0 * (eps / 1.0) * 64f64.ln());
        assert!((s - 7.93e-6).abs() < 1e-8);
        // switch-over at eps = alpha R / (2 C* ln N)
        let n = 32;
        let eps_switch = 1.0 * 0.1 / (2.0 * 2.0 * (n as f64).ln());
        assert!(shishkin_transition(0.1, eps_switch * 0.99, 1.0, 2.0, n) < 0.05);
        assert_eq!(shishkin_transition(0.1, eps_switch * 1.01, 1.0, 2.0, n), 0.05);
    }

    #[test]
    fn strip_mesh_layout() {
        let b = omega1(0.5);
        let arc = outflow_arcs(&b, &find_characteristic_points(&b, 8192).unwrap())[0];
        for eps in [1.0, 1e-3, 2f64.powi(-20)] {
            let m = StripMesh::build(&b, arc, 16, 0.1, eps, 1.0, 2.0, 0.0).unwrap();
            assert_eq!(m.sigma, shishkin_transition(0.1, eps, 1.0, 2.0, 16));
            let r = m.r_nodes();
            assert_eq!(r.len(), 17);
            assert_eq!(r[0], 0.0);
            assert_eq!(r[16], 0.1);
            for i in 1..=8 {
                assert!((r[i] - r[i - 1] - m.h_fine()).abs() < 1e-15);
            }
            for i in 9..=16 {
                assert!((r[i] - r[i - 1] - m.h_coarse()).abs() < 1e-15);
            }
            assert!(r.windows(2).all(|w| w[1] > w[0]));
            assert!(m.t_nodes().windows(2).all(|w| w[1] > w[0]));
            assert_eq!(m.t_nodes().len(), 17);
        }
    }

    #[test]
    fn strip_width_bound() {
        let b = omega1(0.5);
        let arc = outflow_arcs(&b, &find_characteristic_points(&b, 8192).unwrap())[0];
        assert!(StripMesh::build(&b, arc, 8, 0.16, 1e-2, 1.0, 2.0, 0.0).is_ok());
        let err = StripMesh::build(&b, arc, 8, 0.17, 1e-2, 1.0, 2.0, 0.0).unwrap_err();
        match err {
            Error::StripTooWide { limit, .. } => assert!((limit - 1.0 / 6.0).abs() < 1e-9),
            e => panic!("unexpected {e}"),
        }
        assert!(StripMesh::build(&b, arc, 7, 0.1, 1e-2, 1.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn membership_examples() {
        let b = omega1(0.5);
        let s = samplers(&b);
        let arc = s[0].arc();
        let t_mid = arc.midpoint();
        let [x, y] = b.point(t_mid);
        let (k, p) = strip_membership(&b, &s, 0.1, x, y).unwrap().unwrap();
        assert_eq!(k, 0);
        assert!(p.r.abs() < 1e-12);
        assert_eq!(strip_membership(&b, &s, 0.1, 0.0, 0.0).unwrap(), None);
        let [x, y] = b.to_cartesian(CurvilinearPoint { r: 0.05, t: t_mid });
        let (_, p) = strip_membership(&b, &s, 0.1, x, y).unwrap().unwrap();
        assert!((p.r - 0.05).abs() < 1e-9);
    }

    #[test]
    fn dump_has_one_line_per_node() {
        let b = circle(1.0);
        let arc = ParamInterval::new(-0.5 * PI, 0.5 * PI);
        let m = StripMesh::build(&b, arc, 4, 0.1, 1.0, 1.0, 2.0, 0.0).unwrap();
        let mut buf = Vec::new();
        m.write_dump(&b, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 25);
        assert!(text.lines().all(|l| l.split_whitespace().count() == 4));
    }
}

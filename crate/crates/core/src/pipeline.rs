//! The two-phase method: outer solve on the rectangle, then one strip
//! correction per outflow arc with interface data interpolated from the
//! outer solution.

use std::io::{self, Write};

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::geometry::{
    find_characteristic_points, outflow_arcs, theta_min, ArcSampler, CurvilinearPoint,
    ParamInterval, ParametricBoundary, PointClass, INVERSION_SEEDS,
};
use crate::grids::{max_abs_curvature, strip_membership, RectGrid, StripMesh};
use crate::linsolve::solve;
use crate::operators::{assemble_outer, assemble_strip, ProblemData, SparseSystem};
use crate::par::Exec;
use crate::problems::TestCase;

const CHARACTERISTIC_SAMPLES: usize = 8192;

/// Everything about a run that does not depend on `eps`: the rectangle grid,
/// the outflow arcs and which grid nodes fall in the strips.
#[derive(Debug, Clone)]
pub struct Layout {
    pub boundary: ParametricBoundary,
    pub config: SolverConfig,
    pub grid: RectGrid,
    pub arcs: Vec<ParamInterval>,
    pub theta: f64,
    samplers: Vec<ArcSampler>,
    membership: Vec<Option<(usize, CurvilinearPoint)>>,
}

impl Layout {
    pub fn new(boundary: &ParametricBoundary, n: usize, config: &SolverConfig, exec: Exec) -> Result<Self> {
        config.check()?;
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!("N must be even and at least 4, got {n}")));
        }
        let points = find_characteristic_points(boundary, CHARACTERISTIC_SAMPLES)?;
        let arcs = outflow_arcs(boundary, &points);
        if arcs.is_empty() {
            return Err(Error::StripArcsDegenerate { delta_trim: config.delta_trim });
        }
        let theta = theta_min(boundary, &arcs, config.delta_trim)?;

        let width = config.strip_width;
        let [_, x1, y0, y1] = boundary.sampled_bounds();
        let mut limit = x1.min(-y0).min(y1);
        for arc in &arcs {
            limit = limit.min(1.0 / max_abs_curvature(boundary, *arc)?);
        }
        if !(width < limit) {
            return Err(Error::StripTooWide { width, limit });
        }

        let grid = RectGrid::build(boundary, n, config.padding, exec)?;
        let samplers: Vec<ArcSampler> = arcs
            .iter()
            .map(|a| ArcSampler::new(boundary, *a, INVERSION_SEEDS))
            .collect();
        let membership = exec.map_range(grid.node_count(), |k| {
            let (i, j) = grid.node(k);
            if !grid.inside(i, j) {
                return None;
            }
            let (x, y) = (grid.x(i), grid.y(j));
            match strip_membership(boundary, &samplers, width, x, y) {
                Ok(m) => m,
                Err(e) => {
                    // only happens where the strip degenerates at arc ends
                    log::warn!("strip membership at ({x}, {y}) failed: {e}; treating as outer");
                    None
                }
            }
        });
        log::debug!(
            "layout N = {n}: {} arcs, theta = {theta:.3e}, {} inside nodes in strips",
            arcs.len(),
            membership.iter().filter(|m| m.is_some()).count()
        );
        Ok(Self {
            boundary: boundary.clone(),
            config: *config,
            grid,
            arcs,
            theta,
            samplers,
            membership,
        })
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn samplers(&self) -> &[ArcSampler] {
        &self.samplers
    }

    /// Strip membership of grid node `(i, j)` (closed strip); `None` for
    /// outside nodes and nodes of the outer region.
    pub fn node_membership(&self, i: usize, j: usize) -> Option<(usize, CurvilinearPoint)> {
        self.membership[self.grid.index(i, j)]
    }

    /// Inside node lying in the open strip `r < R`.
    pub fn in_open_strip(&self, i: usize, j: usize) -> bool {
        self.node_membership(i, j)
            .is_some_and(|(_, p)| p.r < self.config.strip_width)
    }
}

/// Cell index and local coordinate in `[0, 1]` of `v` among increasing
/// nodes, starting the search at `guess`.
fn locate(cells: usize, node: impl Fn(usize) -> f64, v: f64, guess: usize) -> (usize, f64) {
    let mut i = guess.min(cells - 1);
    while i > 0 && v < node(i) {
        i -= 1;
    }
    while i + 1 < cells && v >= node(i + 1) {
        i += 1;
    }
    let (a, b) = (node(i), node(i + 1));
    let s = if v == b { 1.0 } else { (v - a) / (b - a) };
    (i, s.clamp(0.0, 1.0))
}

fn bilinear(u: &[f64], nx: usize, i: usize, j: usize, s: f64, q: f64) -> f64 {
    let k = j * nx + i;
    (1.0 - s) * (1.0 - q) * u[k] + s * (1.0 - q) * u[k + 1] + (1.0 - s) * q * u[k + nx] + s * q * u[k + nx + 1]
}

/// Bilinear interpolant of grid values at `(x, y)`.
pub fn bilinear_eval(grid: &RectGrid, u: &[f64], x: f64, y: f64) -> Result<f64> {
    if u.len() != grid.node_count() {
        return Err(Error::DimensionMismatch {
            expected: grid.node_count(),
            got: u.len(),
        });
    }
    if !grid.in_rectangle(x, y) {
        return Err(Error::OutsideDomain {
            x,
            y,
            what: "the enclosing rectangle",
        });
    }
    let n = grid.n();
    let gi = ((x - grid.x_min) / grid.hx()).floor().max(0.0) as usize;
    let gj = ((y - grid.y_min) / grid.hy()).floor().max(0.0) as usize;
    let (i, s) = locate(n, |i| grid.x(i), x, gi);
    let (j, q) = locate(n, |j| grid.y(j), y, gj);
    Ok(bilinear(u, n + 1, i, j, s, q))
}

/// Bilinear interpolant of strip values at `(r, t)`, piecewise linear on the
/// Shishkin `r`-mesh.
pub fn bilinear_eval_strip(mesh: &StripMesh, u: &[f64], r: f64, t: f64) -> Result<f64> {
    if u.len() != mesh.node_count() {
        return Err(Error::DimensionMismatch {
            expected: mesh.node_count(),
            got: u.len(),
        });
    }
    let tol = 1e-12;
    if !(r >= -tol && r <= mesh.width + tol && mesh.arc.contains(t)) {
        return Err(Error::OutsideDomain {
            x: r,
            y: t,
            what: "the strip parameter rectangle",
        });
    }
    let n = mesh.n();
    let rn = mesh.r_nodes();
    let tn = mesh.t_nodes();
    let gi = rn.partition_point(|&v| v <= r).saturating_sub(1);
    let gj = ((t - mesh.arc.start) / mesh.k()).floor().max(0.0) as usize;
    let (i, s) = locate(n, |i| rn[i], r, gi);
    let (j, q) = locate(n, |j| tn[j], t, gj);
    Ok(bilinear(u, n + 1, i, j, s, q))
}

/// Strip correction on one outflow arc.
#[derive(Debug, Clone)]
pub struct StripSolution {
    pub mesh: StripMesh,
    pub u1: Vec<f64>,
    pub sampler: ArcSampler,
}

/// Outer solution `U0` plus the strip corrections `U1`.
#[derive(Debug, Clone)]
pub struct GlobalApproximation {
    pub boundary: ParametricBoundary,
    pub grid: RectGrid,
    pub u0: Vec<f64>,
    pub strips: Vec<StripSolution>,
    pub width: f64,
}

/// Run both phases on a prepared layout.
pub fn solve_on_layout(layout: &Layout, data: &ProblemData, exec: Exec) -> Result<GlobalApproximation> {
    let grid = &layout.grid;
    let n = grid.n();

    let outer = assemble_outer(grid, data, exec)?;
    let (u0, report) = solve(&outer)?;
    log::debug!("outer solve N = {n}, eps = {:e}: residual {:e}", data.eps, report.residual_norm);

    let strips = exec.map(layout.samplers(), |sampler| -> Result<StripSolution> {
        let (mesh, system) = strip_system(layout, sampler, data, &u0)?;
        let (u1, report) = solve(&system)?;
        log::debug!(
            "strip [{:.4}, {:.4}] sigma = {:e}: residual {:e}",
            mesh.arc.start,
            mesh.arc.end,
            mesh.sigma,
            report.residual_norm
        );
        Ok(StripSolution {
            mesh,
            u1,
            sampler: sampler.clone(),
        })
    });
    let strips = strips.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(GlobalApproximation {
        boundary: layout.boundary.clone(),
        grid: grid.clone(),
        u0,
        strips,
        width: layout.config.strip_width,
    })
}

/// Mesh and assembled system of the strip along `sampler`'s arc, with
/// interface data interpolated from the outer solution `u0`.
pub fn strip_system(
    layout: &Layout,
    sampler: &ArcSampler,
    data: &ProblemData,
    u0: &[f64],
) -> Result<(StripMesh, SparseSystem)> {
    let boundary = &layout.boundary;
    let cfg = &layout.config;
    let n = layout.n();
    let mesh = StripMesh::build(
        boundary,
        sampler.arc(),
        n,
        cfg.strip_width,
        data.eps,
        data.alpha,
        cfg.c_star,
        layout.theta,
    )?;
    // U0 at the Cartesian image of every r = R node and both arc-end columns
    let mut bc = vec![0.0; mesh.node_count()];
    for j in 0..=n {
        for i in 1..=n {
            if i == n || j == 0 || j == n {
                let [x, y] = boundary.to_cartesian(CurvilinearPoint {
                    r: mesh.r_nodes()[i],
                    t: mesh.t_nodes()[j],
                });
                bc[mesh.index(i, j)] = bilinear_eval(&layout.grid, u0, x, y)?;
            }
        }
    }
    let system = assemble_strip(&mesh, boundary, data, &|i, j| bc[mesh.index(i, j)], Exec::Sequential)?;
    Ok((mesh, system))
}

/// Build the layout and run both phases.
pub fn solve_problem(
    boundary: &ParametricBoundary,
    data: &ProblemData,
    n: usize,
    config: &SolverConfig,
    exec: Exec,
) -> Result<GlobalApproximation> {
    let layout = Layout::new(boundary, n, config, exec)?;
    solve_on_layout(&layout, data, exec)
}

/// `solve_problem` for a catalogued case with its default configuration.
pub fn solve_case(case: &TestCase, eps: f64, n: usize, exec: Exec) -> Result<GlobalApproximation> {
    solve_problem(&case.boundary, &case.data(eps), n, &case.config, exec)
}

impl GlobalApproximation {
    /// Strip index and curvilinear coordinates of `(x, y)` if it lies in the
    /// closed strip.
    pub fn strip_point(&self, x: f64, y: f64) -> Result<Option<(usize, CurvilinearPoint)>> {
        for (k, s) in self.strips.iter().enumerate() {
            if let Some(p) = s.sampler.invert(&self.boundary, x, y, self.width)? {
                return Ok(Some((k, p)));
            }
        }
        Ok(None)
    }

    /// The corrected approximation: the strip interpolant inside the closed
    /// strips, the outer interpolant elsewhere.
    pub fn evaluate(&self, x: f64, y: f64) -> Result<f64> {
        if self.boundary.classify(x, y) == PointClass::Outside {
            return Err(Error::OutsideDomain { x, y, what: "the domain" });
        }
        match self.strip_point(x, y)? {
            Some((k, p)) => {
                let s = &self.strips[k];
                bilinear_eval_strip(&s.mesh, &s.u1, p.r, p.t)
            }
            None => bilinear_eval(&self.grid, &self.u0, x, y),
        }
    }

    pub fn outer_value(&self, x: f64, y: f64) -> Result<f64> {
        bilinear_eval(&self.grid, &self.u0, x, y)
    }

    /// Cartesian position and value of every strip node.
    pub fn strip_nodes(&self) -> impl Iterator<Item = ([f64; 2], f64)> + '_ {
        self.strips.iter().flat_map(move |s| {
            let n = s.mesh.n();
            (0..=n).flat_map(move |j| {
                (0..=n).map(move |i| {
                    let p = CurvilinearPoint {
                        r: s.mesh.r_nodes()[i],
                        t: s.mesh.t_nodes()[j],
                    };
                    (self.boundary.to_cartesian(p), s.u1[s.mesh.index(i, j)])
                })
            })
        })
    }

    /// `x y u` lines on a `resolution x resolution` lattice over the enclosing
    /// rectangle, skipping points outside the domain.
    pub fn write_lattice(&self, resolution: usize, mut out: impl Write) -> io::Result<()> {
        let res = resolution.max(2);
        let g = &self.grid;
        for j in 0..res {
            let y = g.y_min + (g.y_max - g.y_min) * j as f64 / (res - 1) as f64;
            for i in 0..res {
                let x = g.x_min + (g.x_max - g.x_min) * i as f64 / (res - 1) as f64;
                match self.evaluate(x, y) {
                    Ok(u) => writeln!(out, "{x:.16e} {y:.16e} {u:.16e}")?,
                    Err(Error::OutsideDomain { .. }) => {}
                    Err(e) => return Err(io::Error::other(e)),
                }
            }
        }
        Ok(())
    }
}

//! Upwind finite-difference assembly for the rectangular grid and the
//! boundary-fitted strips.
//!
//! Every assembled row has a positive diagonal, non-positive off-diagonals and
//! a non-negative row sum, which makes the matrices M-matrices and gives the
//! discrete comparison principle.

use std::fmt;
use std::io::{self, Write};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{FrameSample, ParametricBoundary};
use crate::grids::{RectGrid, StripMesh};
use crate::par::Exec;

pub type CoefFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Data of `-eps lap u + a u_x + b u = f`, with `a >= alpha > 0`, `b >= 0`.
#[derive(Clone)]
pub struct ProblemData {
    pub a: CoefFn,
    pub b: CoefFn,
    pub f: CoefFn,
    pub eps: f64,
    pub alpha: f64,
}

impl fmt::Debug for ProblemData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemData")
            .field("eps", &self.eps)
            .field("alpha", &self.alpha)
            .finish_non_exhaustive()
    }
}

impl ProblemData {
    pub fn new(a: CoefFn, b: CoefFn, f: CoefFn, eps: f64, alpha: f64) -> Self {
        Self { a, b, f, eps, alpha }
    }

    pub fn with_eps(&self, eps: f64) -> Self {
        Self { eps, ..self.clone() }
    }

    /// `(a, b, f)` at a node, checking the coefficient bounds.
    fn at(&self, x: f64, y: f64) -> Result<(f64, f64, f64)> {
        let a = (self.a)(x, y);
        let b = (self.b)(x, y);
        if !(a >= self.alpha && b >= 0.0) {
            return Err(Error::CoefficientBound {
                x,
                y,
                a,
                b,
                alpha: self.alpha,
            });
        }
        Ok((a, b, (self.f)(x, y)))
    }

    fn check(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite() && self.alpha > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "need eps > 0 and alpha > 0, got eps = {}, alpha = {}",
                self.eps, self.alpha
            )));
        }
        Ok(())
    }
}

/// One assembled row: column-sorted entries, right-hand side, Dirichlet flag.
#[derive(Debug, Clone, Default)]
struct Row {
    entries: Vec<(usize, f64)>,
    rhs: f64,
    dirichlet: bool,
}

impl Row {
    fn dirichlet(k: usize, value: f64) -> Self {
        Self {
            entries: vec![(k, 1.0)],
            rhs: value,
            dirichlet: true,
        }
    }

    fn finish(mut self) -> Self {
        self.entries.sort_by_key(|e| e.0);
        self
    }
}

/// Row-compressed square matrix with right-hand side.
///
/// Unknowns are tensor-grid nodes numbered `j * nx + i` with `i` fastest;
/// `shape` is `(nx, ny)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSystem {
    shape: (usize, usize),
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    rhs: Vec<f64>,
    dirichlet: Vec<bool>,
}

impl SparseSystem {
    fn from_rows(shape: (usize, usize), rows: Vec<Row>) -> Self {
        let n = rows.len();
        debug_assert_eq!(n, shape.0 * shape.1);
        let nnz: usize = rows.iter().map(|r| r.entries.len()).sum();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        let mut rhs = Vec::with_capacity(n);
        let mut dirichlet = Vec::with_capacity(n);
        row_ptr.push(0);
        for row in rows {
            for (c, v) in row.entries {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
            rhs.push(row.rhs);
            dirichlet.push(row.dirichlet);
        }
        Self {
            shape,
            row_ptr,
            cols,
            vals,
            rhs,
            dirichlet,
        }
    }

    /// Build from explicit triplets (duplicates summed). Rows whose only
    /// entry is a unit diagonal are flagged as Dirichlet.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)], rhs: Vec<f64>) -> Result<Self> {
        if rhs.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: rhs.len(),
            });
        }
        let mut rows: Vec<Row> = (0..n).map(|_| Row::default()).collect();
        for &(r, c, v) in triplets {
            if r >= n || c >= n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: r.max(c) + 1,
                });
            }
            match rows[r].entries.iter_mut().find(|e| e.0 == c) {
                Some(e) => e.1 += v,
                None => rows[r].entries.push((c, v)),
            }
        }
        for (k, (row, b)) in rows.iter_mut().zip(rhs).enumerate() {
            row.rhs = b;
            row.dirichlet = row.entries.len() == 1 && row.entries[0] == (k, 1.0);
        }
        let rows = rows.into_iter().map(Row::finish).collect();
        Ok(Self::from_rows((n, 1), rows))
    }

    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn set_rhs(&mut self, rhs: Vec<f64>) -> Result<()> {
        if rhs.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: rhs.len(),
            });
        }
        self.rhs = rhs;
        Ok(())
    }

    pub fn is_dirichlet(&self, k: usize) -> bool {
        self.dirichlet[k]
    }

    pub fn row(&self, k: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.row_ptr[k], self.row_ptr[k + 1]);
        (&self.cols[a..b], &self.vals[a..b])
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        let (cols, vals) = self.row(row);
        cols.iter()
            .position(|&c| c == col)
            .map_or(0.0, |p| vals[p])
    }

    pub fn diag(&self, k: usize) -> f64 {
        self.entry(k, k)
    }

    /// Node `(i, j)` of unknown `k`.
    pub fn node(&self, k: usize) -> (usize, usize) {
        (k % self.shape.0, k / self.shape.0)
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.shape.0 + i
    }

    /// Iterate `(row, col, value)`.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim()).flat_map(move |k| {
            let (cols, vals) = self.row(k);
            cols.iter().zip(vals).map(move |(&c, &v)| (k, c, v))
        })
    }

    /// Matrix-vector product.
    pub fn apply(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: z.len(),
            });
        }
        Ok((0..self.dim())
            .map(|k| {
                let (cols, vals) = self.row(k);
                cols.iter().zip(vals).map(|(&c, &v)| v * z[c]).sum()
            })
            .collect())
    }

    /// Multiply every non-Dirichlet row and its right-hand side by `factor`.
    pub fn scale_equations(&mut self, factor: f64) {
        for k in 0..self.dim() {
            if self.dirichlet[k] {
                continue;
            }
            for v in &mut self.vals[self.row_ptr[k]..self.row_ptr[k + 1]] {
                *v *= factor;
            }
            self.rhs[k] *= factor;
        }
    }

    /// Positive diagonal, non-positive off-diagonals, non-negative row sums.
    pub fn check_m_matrix(&self) -> Result<()> {
        for k in 0..self.dim() {
            let (cols, vals) = self.row(k);
            let mut diag = 0.0;
            let mut sum = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                sum += v;
                if c == k {
                    diag = v;
                } else if !(v <= 0.0) {
                    return Err(Error::NonMonotoneRow {
                        row: k,
                        reason: format!("off-diagonal entry {v:e} in column {c}"),
                    });
                }
            }
            if !(diag > 0.0) {
                return Err(Error::NonMonotoneRow {
                    row: k,
                    reason: format!("diagonal {diag:e}"),
                });
            }
            if sum < -1e-12 * diag {
                return Err(Error::NonMonotoneRow {
                    row: k,
                    reason: format!("row sum {sum:e}"),
                });
            }
        }
        Ok(())
    }

    /// Matrix-market style coordinate dump (1-based indices) followed by the
    /// right-hand side.
    pub fn write_triplets(&self, mut out: impl Write) -> io::Result<()> {
        writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(out, "{} {} {}", self.dim(), self.dim(), self.nnz())?;
        for (r, c, v) in self.triplets() {
            writeln!(out, "{} {} {v:.17e}", r + 1, c + 1)?;
        }
        writeln!(out, "% rhs")?;
        for b in &self.rhs {
            writeln!(out, "% {b:.17e}")?;
        }
        Ok(())
    }
}

/// Add `c * D^{+/-}` upwinded by the sign of `c` to a row, given the steps to
/// the previous (`h_minus`) and next (`h_plus`) nodes.
fn upwind(c: f64, h_minus: f64, h_plus: f64) -> (f64, f64, f64) {
    // (minus neighbour, diagonal, plus neighbour)
    if c < 0.0 {
        (0.0, -c / h_plus, c / h_plus)
    } else {
        (-c / h_minus, c / h_minus, 0.0)
    }
}

/// Rectangular-grid system: `-eps (d2x + d2y) + a D-x + b` on inside nodes,
/// identity rows with zero data elsewhere.
pub fn assemble_outer(grid: &RectGrid, data: &ProblemData, exec: Exec) -> Result<SparseSystem> {
    data.check()?;
    let n = grid.n();
    let hx = grid.hx();
    let hy = grid.hy();
    let eps = data.eps;
    let dxx = eps / (hx * hx);
    let dyy = eps / (hy * hy);
    let lines: Vec<Result<Vec<Row>>> = exec.map_range(n + 1, |j| {
        (0..=n)
            .map(|i| {
                let k = grid.index(i, j);
                if !grid.inside(i, j) {
                    return Ok(Row::dirichlet(k, 0.0));
                }
                let (x, y) = (grid.x(i), grid.y(j));
                let (a, b, f) = data.at(x, y)?;
                let entries = vec![
                    (grid.index(i, j - 1), -dyy),
                    (grid.index(i - 1, j), -dxx - a / hx),
                    (k, 2.0 * dxx + 2.0 * dyy + a / hx + b),
                    (grid.index(i + 1, j), -dxx),
                    (grid.index(i, j + 1), -dyy),
                ];
                Ok(Row {
                    entries,
                    rhs: f,
                    dirichlet: false,
                })
            })
            .collect()
    });
    let mut rows = Vec::with_capacity(grid.node_count());
    for line in lines {
        rows.extend(line?);
    }
    let system = SparseSystem::from_rows((n + 1, n + 1), rows);
    system.check_m_matrix()?;
    Ok(system)
}

/// Strip system in `(r, t)`.
///
/// Interior rows discretise
/// `-eps [eta^-1 (eta u_r)_r + zeta (zeta u_t)_t] + a n1 u_r + a T_x zeta u_t + b u`
/// with upwinded convection, where `T_x` is the x-component of the unit
/// tangent (equal to `n2` on anticlockwise curves). Rows at `r = 0` carry
/// zero data; rows at `r = R` and at both arc ends take `inner_bc(i, j)`.
pub fn assemble_strip(
    mesh: &StripMesh,
    boundary: &ParametricBoundary,
    data: &ProblemData,
    inner_bc: &(dyn Fn(usize, usize) -> f64 + Sync),
    exec: Exec,
) -> Result<SparseSystem> {
    data.check()?;
    let n = mesh.n();
    let r = mesh.r_nodes();
    let t = mesh.t_nodes();
    let k = mesh.k();
    let eps = data.eps;

    let frames: Vec<FrameSample> = t.iter().map(|&tj| boundary.frame(tj)).collect::<Result<_>>()?;
    let half_frames: Vec<FrameSample> = t
        .windows(2)
        .map(|w| boundary.frame(0.5 * (w[0] + w[1])))
        .collect::<Result<_>>()?;

    let positive_eta = |eta: f64, i: usize, j: usize| {
        if eta > 0.0 {
            Ok(eta)
        } else {
            Err(Error::StripExceedsCurvature { i, j, eta })
        }
    };

    let lines: Vec<Result<Vec<Row>>> = exec.map_range(n + 1, |j| {
        (0..=n)
            .map(|i| {
                let idx = mesh.index(i, j);
                if i == 0 {
                    return Ok(Row::dirichlet(idx, 0.0));
                }
                if i == n || j == 0 || j == n {
                    return Ok(Row::dirichlet(idx, inner_bc(i, j)));
                }
                let fr = &frames[j];
                let ri = r[i];
                let h_minus = ri - r[i - 1];
                let h_plus = r[i + 1] - ri;
                let h_bar = 0.5 * (h_minus + h_plus);

                let eta = positive_eta(fr.eta(ri), i, j)?;
                let eta_minus = positive_eta(fr.eta(0.5 * (ri + r[i - 1])), i, j)?;
                let eta_plus = positive_eta(fr.eta(0.5 * (ri + r[i + 1])), i, j)?;
                let zeta = 1.0 / (fr.tau * eta);
                let south = &half_frames[j - 1];
                let north = &half_frames[j];
                let zeta_minus = 1.0 / (south.tau * positive_eta(south.eta(ri), i, j)?);
                let zeta_plus = 1.0 / (north.tau * positive_eta(north.eta(ri), i, j)?);

                let x = fr.point[0] + ri * fr.normal[0];
                let y = fr.point[1] + ri * fr.normal[1];
                let (a, b, f) = data.at(x, y)?;

                let diff_r = eps / (eta * h_bar);
                let mut r_minus = -diff_r * eta_minus / h_minus;
                let mut r_plus = -diff_r * eta_plus / h_plus;
                let diff_t = eps * zeta / k;
                let mut t_minus = -diff_t * zeta_minus / k;
                let mut t_plus = -diff_t * zeta_plus / k;
                let mut diag = -(r_minus + r_plus + t_minus + t_plus) + b;

                let (cm, cd, cp) = upwind(a * fr.normal[0], h_minus, h_plus);
                r_minus += cm;
                diag += cd;
                r_plus += cp;
                let (cm, cd, cp) = upwind(a * fr.tangent[0] * zeta, k, k);
                t_minus += cm;
                diag += cd;
                t_plus += cp;

                let entries = vec![
                    (mesh.index(i, j - 1), t_minus),
                    (mesh.index(i - 1, j), r_minus),
                    (idx, diag),
                    (mesh.index(i + 1, j), r_plus),
                    (mesh.index(i, j + 1), t_plus),
                ];
                Ok(Row {
                    entries,
                    rhs: f,
                    dirichlet: false,
                })
            })
            .collect()
    });
    let mut rows = Vec::with_capacity(mesh.node_count());
    for line in lines {
        rows.extend(line?);
    }
    let system = SparseSystem::from_rows((n + 1, n + 1), rows);
    system.check_m_matrix()?;
    Ok(system)
}

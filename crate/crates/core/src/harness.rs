//! Double-mesh convergence estimates and order tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::CurvilinearPoint;
use crate::par::Exec;
use crate::pipeline::{bilinear_eval, bilinear_eval_strip, solve_on_layout, GlobalApproximation, Layout};
use crate::problems::{ExactSolution, TestCase};

/// Maximum two-mesh difference between the approximations on `N` and `2N`.
///
/// The outer part compares the two `U0` interpolants at the inside nodes of
/// both grids that are not in the open strip; the strip part compares the two
/// `U1` interpolants in `(r, t)` at the union of both strip node sets.
pub fn two_mesh_difference(
    coarse_layout: &Layout,
    coarse: &GlobalApproximation,
    fine_layout: &Layout,
    fine: &GlobalApproximation,
) -> Result<f64> {
    if coarse.strips.len() != fine.strips.len() {
        return Err(Error::DimensionMismatch {
            expected: coarse.strips.len(),
            got: fine.strips.len(),
        });
    }
    let mut d = 0.0f64;
    for layout in [coarse_layout, fine_layout] {
        let g = &layout.grid;
        for j in 0..=g.n() {
            for i in 0..=g.n() {
                if !g.inside(i, j) || layout.in_open_strip(i, j) {
                    continue;
                }
                let (x, y) = (g.x(i), g.y(j));
                let a = bilinear_eval(&coarse.grid, &coarse.u0, x, y)?;
                let b = bilinear_eval(&fine.grid, &fine.u0, x, y)?;
                d = d.max((a - b).abs());
            }
        }
    }
    for (sc, sf) in coarse.strips.iter().zip(&fine.strips) {
        for mesh in [&sc.mesh, &sf.mesh] {
            for &t in mesh.t_nodes() {
                for &r in mesh.r_nodes() {
                    let a = bilinear_eval_strip(&sc.mesh, &sc.u1, r, t)?;
                    let b = bilinear_eval_strip(&sf.mesh, &sf.u1, r, t)?;
                    d = d.max((a - b).abs());
                }
            }
        }
    }
    Ok(d)
}

/// Solve at `N` and `2N` and return `D^N_eps`.
pub fn double_mesh_difference(case: &TestCase, eps: f64, n: usize, exec: Exec) -> Result<f64> {
    let data = case.data(eps);
    let lc = Layout::new(&case.boundary, n, &case.config, exec)?;
    let lf = Layout::new(&case.boundary, 2 * n, &case.config, exec)?;
    let uc = solve_on_layout(&lc, &data, exec)?;
    let uf = solve_on_layout(&lf, &data, exec)?;
    two_mesh_difference(&lc, &uc, &lf, &uf)
}

/// `log2(d / d_next)`, defined when both are present and `d_next > 0`.
pub fn order(d: Option<f64>, d_next: Option<f64>) -> Option<f64> {
    match (d, d_next) {
        (Some(a), Some(b)) if b > 0.0 && a > 0.0 => Some((a / b).log2()),
        _ => None,
    }
}

/// Two-mesh differences and orders for every `(eps, N)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub eps: Vec<f64>,
    pub n: Vec<usize>,
    /// `d[e][k]`: `D^{n[k]}_{eps[e]}`, `None` for failed runs.
    pub d: Vec<Vec<Option<f64>>>,
    /// `p[e][k]` from columns `k` and `k + 1`.
    pub p: Vec<Vec<Option<f64>>>,
    /// Column-wise maximum of `d` over `eps`.
    pub d_uniform: Vec<Option<f64>>,
    pub p_uniform: Vec<Option<f64>>,
}

impl ConvergenceTable {
    /// Assemble orders and the uniform row from raw differences.
    pub fn from_differences(eps: Vec<f64>, n: Vec<usize>, d: Vec<Vec<Option<f64>>>) -> Self {
        let cols = n.len();
        let orders = |row: &[Option<f64>]| -> Vec<Option<f64>> {
            (0..cols.saturating_sub(1)).map(|k| order(row[k], row[k + 1])).collect()
        };
        let p = d.iter().map(|row| orders(row)).collect();
        let d_uniform: Vec<Option<f64>> = (0..cols)
            .map(|k| {
                d.iter()
                    .filter_map(|row| row[k])
                    .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))))
            })
            .collect();
        let p_uniform = orders(&d_uniform);
        Self {
            eps,
            n,
            d,
            p,
            d_uniform,
            p_uniform,
        }
    }

    /// Order for the given `eps` row and `N` column, if present.
    pub fn order_at(&self, eps: f64, n: usize) -> Option<f64> {
        let e = self.eps.iter().position(|&v| v == eps)?;
        let k = self.n.iter().position(|&v| v == n)?;
        self.p[e].get(k).copied().flatten()
    }

    pub fn uniform_order_at(&self, n: usize) -> Option<f64> {
        let k = self.n.iter().position(|&v| v == n)?;
        self.p_uniform.get(k).copied().flatten()
    }

    /// `eps,N,D,p` rows, one per cell, followed by the uniform rows.
    /// Missing values are empty fields.
    pub fn to_csv(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:e}"));
        let mut s = String::from("eps,N,D,p\n");
        for (e, &eps) in self.eps.iter().enumerate() {
            for (k, &n) in self.n.iter().enumerate() {
                let p = self.p[e].get(k).copied().flatten();
                let _ = writeln!(s, "{eps:e},{n},{},{}", fmt(self.d[e][k]), fmt(p));
            }
        }
        for (k, &n) in self.n.iter().enumerate() {
            let p = self.p_uniform.get(k).copied().flatten();
            let _ = writeln!(s, "uniform,{n},{},{}", fmt(self.d_uniform[k]), fmt(p));
        }
        s
    }

    /// Fixed-width order table, one row per `eps` plus `p_uniform`.
    pub fn render(&self) -> String {
        let cols = self.n.len().saturating_sub(1);
        let cell = |v: Option<f64>| v.map_or(format!("{:>10}", "-"), |v| format!("{v:>10.4}"));
        let mut s = format!("{:<24}", "eps \\ N");
        for n in &self.n[..cols] {
            let _ = write!(s, "{n:>10}");
        }
        s.push('\n');
        for (e, &eps) in self.eps.iter().enumerate() {
            let _ = write!(s, "{:<24}", format!("{eps}"));
            for k in 0..cols {
                s.push_str(&cell(self.p[e][k]));
            }
            s.push('\n');
        }
        let _ = write!(s, "{:<24}", "p_uniform");
        for k in 0..cols {
            s.push_str(&cell(self.p_uniform[k]));
        }
        s.push('\n');
        s
    }
}

/// Double-mesh table over `eps_list x n_list`. Solves run at every `N` in the
/// list and at twice the last one; cells are independent jobs.
pub fn order_table(case: &TestCase, eps_list: &[f64], n_list: &[usize], exec: Exec) -> Result<ConvergenceTable> {
    if n_list.is_empty() || eps_list.is_empty() {
        return Err(Error::InvalidConfig("empty eps or N list".into()));
    }
    for w in n_list.windows(2) {
        if w[1] != 2 * w[0] {
            return Err(Error::InvalidConfig(format!(
                "N list must be consecutive doublings, got {n_list:?}"
            )));
        }
    }
    exec.install(|| {
        let mut sizes = n_list.to_vec();
        sizes.push(2 * n_list[n_list.len() - 1]);
        let layouts: Vec<Layout> = exec
            .map(&sizes, |&n| Layout::new(&case.boundary, n, &case.config, exec))
            .into_iter()
            .collect::<Result<_>>()?;

        let jobs: Vec<(usize, usize)> = (0..eps_list.len())
            .flat_map(|e| (0..sizes.len()).map(move |k| (e, k)))
            .collect();
        let solutions = exec.map(&jobs, |&(e, k)| {
            let eps = eps_list[e];
            solve_on_layout(&layouts[k], &case.data(eps), Exec::Sequential).map_err(|err| {
                log::warn!("solve failed at eps = {eps:e}, N = {}: {err}", sizes[k]);
                err
            })
        });
        let solution: BTreeMap<(usize, usize), &GlobalApproximation> = jobs
            .iter()
            .zip(&solutions)
            .filter_map(|(&key, s)| s.as_ref().ok().map(|s| (key, s)))
            .collect();

        let cells: Vec<(usize, usize)> = (0..eps_list.len())
            .flat_map(|e| (0..n_list.len()).map(move |k| (e, k)))
            .collect();
        let diffs = exec.map(&cells, |&(e, k)| {
            let (a, b) = (solution.get(&(e, k))?, solution.get(&(e, k + 1))?);
            match two_mesh_difference(&layouts[k], a, &layouts[k + 1], b) {
                Ok(d) => Some(d),
                Err(err) => {
                    log::warn!("difference failed at eps = {:e}, N = {}: {err}", eps_list[e], n_list[k]);
                    None
                }
            }
        });
        let mut d = vec![vec![None; n_list.len()]; eps_list.len()];
        for (&(e, k), v) in cells.iter().zip(diffs) {
            if v.is_none() {
                log::warn!("cell eps = {:e}, N = {} missing", eps_list[e], n_list[k]);
            }
            d[e][k] = v;
        }
        Ok(ConvergenceTable::from_differences(eps_list.to_vec(), n_list.to_vec(), d))
    })
}

/// Largest nodal error of the method: `U0` at outer inside nodes (not in the
/// open strip) and `U1` at every strip node.
pub fn max_nodal_error(layout: &Layout, approx: &GlobalApproximation, exact: &dyn ExactSolution) -> f64 {
    let g = &layout.grid;
    let mut err = 0.0f64;
    for j in 0..=g.n() {
        for i in 0..=g.n() {
            if g.inside(i, j) && !layout.in_open_strip(i, j) {
                let v = approx.u0[g.index(i, j)];
                err = err.max((v - exact.value(g.x(i), g.y(j))).abs());
            }
        }
    }
    for (p, v) in approx.strip_nodes() {
        err = err.max((v - exact.value(p[0], p[1])).abs());
    }
    err
}

/// Max nodal errors of a manufactured case at each `N`.
pub fn manufactured_errors(case: &TestCase, eps: f64, n_list: &[usize], exec: Exec) -> Result<Vec<f64>> {
    let exact = case
        .exact()
        .ok_or_else(|| Error::InvalidConfig(format!("{} has no exact solution", case.label)))?;
    let data = case.data(eps);
    exec.map(n_list, |&n| {
        let layout = Layout::new(&case.boundary, n, &case.config, Exec::Sequential)?;
        let approx = solve_on_layout(&layout, &data, Exec::Sequential)?;
        Ok(max_nodal_error(&layout, &approx, exact.as_ref()))
    })
    .into_iter()
    .collect()
}

/// Values of the approximation along the normal through `t`, at each `r`.
pub fn normal_profile(approx: &GlobalApproximation, t: f64, rs: &[f64]) -> Result<Vec<f64>> {
    rs.iter()
        .map(|&r| {
            let [x, y] = approx.boundary.to_cartesian(CurvilinearPoint { r, t });
            approx.evaluate(x, y)
        })
        .collect()
}

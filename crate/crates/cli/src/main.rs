use std::collections::HashMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use layerstrip::geometry::{find_characteristic_points, outflow_arcs, theta_min};
use layerstrip::grids::max_abs_curvature;
use layerstrip::harness::{manufactured_errors, order_table};
use layerstrip::problems::{circle, manufactured_case, test_problem, CircleBump};
use layerstrip::{Exec, Layout, SolverConfig, TestCase};

#[derive(Parser, Debug)]
#[command(name = "layerstrip", version, about = "Strip-corrected upwind solver for singularly perturbed convection-diffusion")]
struct Cli {
    /// Worker threads for independent jobs (1 = sequential). Defaults to all cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// key=value file with defaults; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve once and write a solution dump.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long = "N")]
        n: Option<usize>,
        /// Lattice points per direction in the dump.
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Double-mesh order table over eps = 2^-a, 2^-(a+s), ..., 2^-b and N = 2^c..2^d.
    Table {
        #[command(flatten)]
        common: Common,
        /// a:b:s
        #[arg(long = "eps-pows")]
        eps_pows: Option<String>,
        /// c:d
        #[arg(long = "N-pows")]
        n_pows: Option<String>,
    },
    /// Characteristic points, outflow arcs and curvature bounds.
    Geometry {
        #[command(flatten)]
        common: Common,
    },
    /// Manufactured-solution convergence check on the unit disc.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Comma-separated eps values.
        #[arg(long)]
        eps: Option<String>,
        #[arg(long = "N-pows")]
        n_pows: Option<String>,
        /// Smallest acceptable observed order.
        #[arg(long)]
        min_order: Option<f64>,
    },
}

#[derive(Args, Debug, Clone)]
struct Common {
    #[arg(long)]
    problem: Option<u32>,
    #[arg(long)]
    beta: Option<f64>,
    /// Strip width.
    #[arg(long = "R")]
    r: Option<f64>,
    #[arg(long = "c-star")]
    c_star: Option<f64>,
    #[arg(long = "delta-trim")]
    delta_trim: Option<f64>,
    #[arg(long)]
    padding: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Flags merged over the optional key=value file.
struct Settings {
    file: HashMap<String, String>,
}

impl Settings {
    fn load(path: Option<&Path>) -> Result<Self> {
        let mut file = HashMap::new();
        if let Some(path) = path {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            for (no, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((k, v)) = line.split_once('=') else {
                    bail!("{}:{}: expected key=value", path.display(), no + 1);
                };
                file.insert(k.trim().replace('-', "_"), v.trim().to_string());
            }
        }
        Ok(Self { file })
    }

    fn get<T: std::str::FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| anyhow::anyhow!("config key {key} = {v}: {e}")),
            None => Ok(None),
        }
    }

    fn case(&self, c: &Common) -> Result<TestCase> {
        let id = self.get(c.problem, "problem")?.unwrap_or(1);
        let beta = self.get(c.beta, "beta")?.unwrap_or(0.5);
        let mut case = test_problem(id, beta)?;
        self.apply_config(c, &mut case.config)?;
        Ok(case)
    }

    fn apply_config(&self, c: &Common, cfg: &mut SolverConfig) -> Result<()> {
        if let Some(v) = self.get(c.r, "R")? {
            cfg.strip_width = v;
        }
        if let Some(v) = self.get(c.c_star, "c_star")? {
            cfg.c_star = v;
        }
        if let Some(v) = self.get(c.delta_trim, "delta_trim")? {
            cfg.delta_trim = v;
        }
        if let Some(v) = self.get(c.padding, "padding")? {
            cfg.padding = v;
        }
        cfg.check()?;
        Ok(())
    }

    fn out_dir(&self, c: &Common) -> Result<PathBuf> {
        let dir = self.get(c.out.clone(), "out")?.unwrap_or_else(|| PathBuf::from("out"));
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(dir)
    }
}

fn parse_range(s: &str, parts: usize) -> Result<Vec<i32>> {
    let v: Vec<i32> = s
        .split(':')
        .map(|p| p.trim().parse::<i32>())
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("bad range {s:?}"))?;
    if v.len() != parts {
        bail!("range {s:?} needs {parts} colon-separated integers");
    }
    Ok(v)
}

/// `a:b:s` -> `2^-a, 2^-(a+s), ..., 2^-b`.
fn eps_powers(s: &str) -> Result<Vec<f64>> {
    let v = parse_range(s, 3)?;
    let (a, b, step) = (v[0], v[1], v[2]);
    if step <= 0 || b < a {
        bail!("eps powers {s:?} must satisfy a <= b and s > 0");
    }
    Ok((a..=b).step_by(step as usize).map(|k| 2f64.powi(-k)).collect())
}

/// `c:d` -> `2^c, ..., 2^d`.
fn n_powers(s: &str) -> Result<Vec<usize>> {
    let v = parse_range(s, 2)?;
    if v[0] < 2 || v[1] < v[0] || v[1] > 12 {
        bail!("N powers {s:?} must satisfy 2 <= c <= d <= 12");
    }
    Ok((v[0]..=v[1]).map(|k| 1usize << k).collect())
}

fn write_file(path: &Path, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    body(&mut w).with_context(|| format!("writing {}", path.display()))?;
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let settings = Settings::load(cli.config.as_deref())?;
    let jobs = settings.get(cli.jobs, "jobs")?;
    let exec = Exec::from_jobs(jobs);
    match cli.command {
        Command::Solve {
            common,
            eps,
            n,
            resolution,
        } => {
            let case = settings.case(&common)?;
            let eps = settings.get(eps, "eps")?.unwrap_or(1e-3);
            let n = settings.get(n, "N")?.unwrap_or(64);
            let res = settings.get(resolution, "resolution")?.unwrap_or(101);
            let dir = settings.out_dir(&common)?;
            let approx = exec.install(|| layerstrip::solve_case(&case, eps, n, exec))?;
            let path = dir.join(format!("solution_eps{eps:e}_N{n}.txt"));
            write_file(&path, |w| approx.write_lattice(res, w))?;
            for (k, s) in approx.strips.iter().enumerate() {
                let p = dir.join(format!("strip{k}_eps{eps:e}_N{n}.txt"));
                write_file(&p, |w| s.mesh.write_dump(&approx.boundary, w))?;
            }
            println!("{}: eps = {eps:e}, N = {n}, {} strip(s)", case.label, approx.strips.len());
            println!("wrote {}", path.display());
        }
        Command::Table {
            common,
            eps_pows,
            n_pows,
        } => {
            let case = settings.case(&common)?;
            let eps = eps_powers(&settings.get(eps_pows, "eps_pows")?.unwrap_or_else(|| "0:20:4".into()))?;
            let ns = n_powers(&settings.get(n_pows, "N_pows")?.unwrap_or_else(|| "3:7".into()))?;
            let dir = settings.out_dir(&common)?;
            log::info!("{}: {} eps values, N = {ns:?}", case.label, eps.len());
            let table = order_table(&case, &eps, &ns, exec)?;
            fs::write(dir.join("table.csv"), table.to_csv()).context("writing table.csv")?;
            fs::write(dir.join("table.txt"), table.render()).context("writing table.txt")?;
            println!("{}", case.label);
            print!("{}", table.render());
        }
        Command::Geometry { common } => {
            let case = settings.case(&common)?;
            let b = &case.boundary;
            let points = find_characteristic_points(b, 8192)?;
            let arcs = outflow_arcs(b, &points);
            println!("{}", case.label);
            println!("characteristic points: {}", points.len());
            for p in &points {
                println!(
                    "  t = {:.12}  (x, y) = ({:.12}, {:.12})  {:?}  kappa = {:.12}",
                    p.t, p.point[0], p.point[1], p.kind, p.kappa
                );
            }
            println!("outflow arcs: {}", arcs.len());
            let mut limit = f64::INFINITY;
            for a in &arcs {
                let kmax = max_abs_curvature(b, *a)?;
                limit = limit.min(1.0 / kmax);
                println!("  [{:.12}, {:.12}]  max |kappa| = {kmax:.12}", a.start, a.end);
            }
            let theta = theta_min(b, &arcs, case.config.delta_trim)?;
            let [x0, x1, y0, y1] = b.sampled_bounds();
            limit = limit.min(x1).min(-y0).min(y1);
            println!("bounds: x in [{x0:.12}, {x1:.12}], y in [{y0:.12}, {y1:.12}]");
            println!("theta (delta_trim = {}) = {theta:.12}", case.config.delta_trim);
            println!("strip width bound: R < {limit:.12} (R = {})", case.config.strip_width);
        }
        Command::Validate {
            common,
            eps,
            n_pows,
            min_order,
        } => {
            let mut case = manufactured_case(circle(1.0), Arc::new(CircleBump { beta: 1.0 }));
            settings.apply_config(&common, &mut case.config)?;
            let eps_list: Vec<f64> = match settings.get(eps, "eps")? {
                Some(s) => s
                    .split(',')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .context("bad --eps list")?,
                None => vec![1.0, 0.5],
            };
            let ns = n_powers(&settings.get(n_pows, "N_pows")?.unwrap_or_else(|| "5:7".into()))?;
            let min_order = settings.get(min_order, "min_order")?.unwrap_or(0.8);
            // keep the preflight check identical to what the solves use
            Layout::new(&case.boundary, ns[0], &case.config, Exec::Sequential)?;
            let mut worst = f64::INFINITY;
            for &e in &eps_list {
                let errs = exec.install(|| manufactured_errors(&case, e, &ns, exec))?;
                print!("eps = {e:e}:");
                for (n, err) in ns.iter().zip(&errs) {
                    print!("  N = {n}: {err:.6e}");
                }
                println!();
                for (k, w) in errs.windows(2).enumerate() {
                    let p = (w[0] / w[1]).log2();
                    worst = worst.min(p);
                    println!("  order {} -> {}: {p:.4}", ns[k], ns[k + 1]);
                }
            }
            if worst < min_order {
                bail!("observed order {worst:.4} below {min_order}");
            }
            println!("ok: minimum observed order {worst:.4}");
        }
    }
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

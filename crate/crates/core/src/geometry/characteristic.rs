use super::{ParamInterval, ParametricBoundary};
use crate::error::{Error, Result};

/// Whether the tangent line at a characteristic point enters the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CharacteristicKind {
    /// Tangent line enters the domain locally (concave boundary).
    Internal,
    /// Tangent line stays outside the domain locally (convex boundary).
    External,
}

/// Boundary point where `n1` changes sign, i.e. the tangent is parallel to the
/// convection direction `(1, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicPoint {
    pub t: f64,
    pub point: [f64; 2],
    pub kind: CharacteristicKind,
    pub kappa: f64,
}

/// Samples with `|n1|` below this are treated as exact zeros.
const ZERO_SAMPLE: f64 = 1e-13;

fn sign(v: f64) -> i8 {
    if v.abs() <= ZERO_SAMPLE {
        0
    } else if v > 0.0 {
        1
    } else {
        -1
    }
}

/// Locate every sign change of `n1(t)` on a uniform `samples`-point grid and
/// refine each one by bisection.
pub fn find_characteristic_points(
    boundary: &ParametricBoundary,
    samples: usize,
) -> Result<Vec<CharacteristicPoint>> {
    if samples < 1024 {
        return Err(Error::InvalidConfig(format!(
            "characteristic point search needs at least 1024 samples, got {samples}"
        )));
    }
    let period = boundary.period();
    let dt = period / samples as f64;
    let n1 = |t: f64| boundary.normal(t)[0];
    let values: Vec<f64> = (0..samples).map(|k| n1(k as f64 * dt)).collect();
    let signs: Vec<i8> = values.iter().map(|&v| sign(v)).collect();

    let mut roots = Vec::new();
    for k in 0..samples {
        let next = (k + 1) % samples;
        let prev = (k + samples - 1) % samples;
        let t = k as f64 * dt;
        match (signs[k], signs[next]) {
            (0, 0) => return Err(Error::NonIsolatedCharacteristicPoints { t }),
            (0, s_next) => {
                if signs[prev] != 0 && signs[prev] == -s_next {
                    roots.push(t);
                }
            }
            (s, s_next) if s_next == -s => {
                roots.push(bisect(&n1, t, t + dt, values[k]));
            }
            _ => {}
        }
    }

    roots
        .into_iter()
        .map(|t| {
            let t = boundary.reduce(t);
            let frame = boundary.frame(t)?;
            let kind = if frame.kappa >= 0.0 {
                CharacteristicKind::External
            } else {
                CharacteristicKind::Internal
            };
            Ok(CharacteristicPoint {
                t,
                point: frame.point,
                kind,
                kappa: frame.kappa,
            })
        })
        .collect()
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, f_lo: f64) -> f64 {
    let lo_positive = f_lo > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v == 0.0 {
            return mid;
        }
        if (v > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (a, b) = (f(lo).abs(), f(hi).abs());
    if a <= b {
        lo
    } else {
        hi
    }
}

/// Maximal parameter intervals where `n1 < 0`, bounded by consecutive
/// characteristic points. Intervals are sorted by start; the last one may run
/// past the period.
pub fn outflow_arcs(
    boundary: &ParametricBoundary,
    points: &[CharacteristicPoint],
) -> Vec<ParamInterval> {
    let mut ts: Vec<f64> = points.iter().map(|p| p.t).collect();
    ts.sort_by(f64::total_cmp);
    let period = boundary.period();
    let m = ts.len();
    let mut arcs = Vec::new();
    for i in 0..m {
        let start = ts[i];
        let end = if i + 1 < m { ts[i + 1] } else { ts[0] + period };
        if end <= start {
            continue;
        }
        let arc = ParamInterval::new(start, end);
        if boundary.normal(arc.midpoint())[0] < 0.0 {
            arcs.push(arc);
        }
    }
    arcs
}

/// `min |n1|` over the outflow arcs after trimming `delta_trim` (in parameter
/// units) off both ends of every arc.
pub fn theta_min(
    boundary: &ParametricBoundary,
    arcs: &[ParamInterval],
    delta_trim: f64,
) -> Result<f64> {
    const SAMPLES: usize = 4096;
    let mut theta = f64::INFINITY;
    for arc in arcs {
        let lo = arc.start + delta_trim;
        let hi = arc.end - delta_trim;
        if hi < lo {
            continue;
        }
        for k in 0..=SAMPLES {
            let t = lo + (hi - lo) * k as f64 / SAMPLES as f64;
            theta = theta.min(boundary.normal(t)[0].abs());
        }
    }
    if theta.is_finite() {
        Ok(theta)
    } else {
        Err(Error::StripArcsDegenerate { delta_trim })
    }
}

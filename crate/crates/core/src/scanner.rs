//! One-parameter sweeps of the cyclic-product ratios and the search for a
//! coupling where both change sign together.

use rayon::prelude::*;
use serde::Serialize;

use crate::constraints::cycle_indices;
use crate::error::{Error, Result};
use crate::model::{detect_bipartition, MlzModel};
use crate::propagate::{cyclic_products, evolve_unitary, CyclicProducts, PropagationSettings};

/// Environment variable capping the number of sweep threads.
pub const THREADS_VAR: &str = "MLZ_THREADS";

/// Index sets `(triple, quad)` of the two cyclic products.
pub type CycleIndices = ((usize, usize, usize), (usize, usize, usize, usize));

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointFlag {
    Ok,
    /// `|Re c| < 1e−14` for at least one product.
    Degenerate,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub g: f64,
    /// `(Re, Im)` of `c₃` and `c₄`.
    pub c3: [f64; 2],
    pub c4: [f64; 2],
    pub r3: Option<f64>,
    pub r4: Option<f64>,
    pub flag: PointFlag,
}

impl SweepPoint {
    fn failed(g: f64, err: &Error) -> Self {
        Self {
            g,
            c3: [f64::NAN; 2],
            c4: [f64::NAN; 2],
            r3: None,
            r4: None,
            flag: PointFlag::Failed(err.to_string()),
        }
    }

    fn from_products(g: f64, p: &CyclicProducts) -> Self {
        let flag = if p.r3.is_some() && p.r4.is_some() {
            PointFlag::Ok
        } else {
            PointFlag::Degenerate
        };
        Self {
            g,
            c3: [p.c3.re, p.c3.im],
            c4: [p.c4.re, p.c4.im],
            r3: p.r3,
            r4: p.r4,
            flag,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub family: String,
    pub t_max: f64,
    /// Fixed index sets, or `None` to derive them from each model's
    /// bipartition.
    pub indices: Option<CycleIndices>,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn grid(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.g).collect()
    }

    /// CSV rows `g,r3,r4,flags`; missing ratios are written as `nan`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "g,r3,r4,flags")?;
        for p in &self.points {
            let r = |x: Option<f64>| x.map_or("nan".to_string(), |v| format!("{v:.16e}"));
            let flag = match &p.flag {
                PointFlag::Ok => "ok".to_string(),
                PointFlag::Degenerate => "degenerate".to_string(),
                PointFlag::Failed(msg) => format!("failed: {}", msg.replace(',', ";")),
            };
            writeln!(w, "{:.16e},{},{},{flag}", p.g, r(p.r3), r(p.r4))?;
        }
        Ok(())
    }
}

/// `count` equally spaced values from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if count < 2 || !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "grid needs lo < hi and at least two points, got [{lo}, {hi}] × {count}"
        )));
    }
    let step = (hi - lo) / (count - 1) as f64;
    Ok((0..count).map(|k| lo + step * k as f64).collect())
}

/// Cyclic products of `U(T, −T)` for one member of the family.
pub fn evaluate(
    model: &MlzModel,
    settings: &PropagationSettings,
    indices: Option<CycleIndices>,
) -> Result<CyclicProducts> {
    let (triple, quad) = match indices {
        Some(idx) => idx,
        None => cycle_indices(&detect_bipartition(model)?)?,
    };
    let u = evolve_unitary(model, settings)?;
    cyclic_products(&u.u, triple, quad)
}

fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_VAR)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Evaluates every grid point independently; failures are recorded per
/// point. Parallelism is capped by `MLZ_THREADS` when set.
pub fn sweep<F>(
    family: &F,
    descriptor: &str,
    grid: &[f64],
    settings: &PropagationSettings,
    indices: Option<CycleIndices>,
) -> Result<SweepResult>
where
    F: Fn(f64) -> Result<MlzModel> + Sync,
{
    settings.validate()?;
    if grid.windows(2).any(|w| !(w[0] < w[1])) || grid.is_empty() {
        return Err(Error::InvalidParameter(
            "sweep grid must be nonempty and strictly increasing".into(),
        ));
    }
    let point = |&g: &f64| match family(g).and_then(|m| evaluate(&m, settings, indices)) {
        Ok(p) => SweepPoint::from_products(g, &p),
        Err(e) => SweepPoint::failed(g, &e),
    };
    let points = match thread_cap() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(|| grid.par_iter().map(point).collect()),
        None => grid.par_iter().map(point).collect(),
    };
    Ok(SweepResult {
        family: descriptor.to_string(),
        t_max: settings.t_max,
        indices,
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RefineSettings {
    /// Bracket width at which bisection stops.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Largest accepted distance between the two roots.
    pub window: f64,
    /// Largest accepted `|r₃|`, `|r₄|` at the midpoint.
    pub threshold: f64,
}

impl Default for RefineSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-3,
            max_iterations: 60,
            window: 0.02,
            threshold: 1e-2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroCandidate {
    pub g: f64,
    pub g3: f64,
    pub g4: f64,
    pub r3: f64,
    pub r4: f64,
    pub evaluations: usize,
}

/// Intervals `[g_k, g_{k+1}]` where `Im c` changes sign while `Re c` keeps
/// its sign.
fn brackets(points: &[SweepPoint], pick: fn(&SweepPoint) -> [f64; 2]) -> Vec<(f64, f64)> {
    points
        .windows(2)
        .filter(|w| w.iter().all(|p| p.flag == PointFlag::Ok))
        .filter_map(|w| {
            let (a, b) = (pick(&w[0]), pick(&w[1]));
            (a[0].signum() == b[0].signum() && a[1].signum() != b[1].signum())
                .then_some((w[0].g, w[1].g))
        })
        .collect()
}

fn gap(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0.max(b.0) - a.1.min(b.1)).max(0.0)
}

/// Bisects a bracket on the sign of `Im c`.
fn bisect(
    eval: &dyn Fn(f64) -> Result<CyclicProducts>,
    (mut lo, mut hi): (f64, f64),
    pick: fn(&CyclicProducts) -> f64,
    refine: &RefineSettings,
    evaluations: &mut usize,
) -> Result<Option<f64>> {
    let mut f_lo = pick(&eval(lo)?);
    *evaluations += 1;
    for _ in 0..refine.max_iterations {
        if hi - lo <= refine.tolerance {
            return Ok(Some(0.5 * (lo + hi)));
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = pick(&eval(mid)?);
        *evaluations += 1;
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(None)
}

/// Locates a coupling where `Im c₃` and `Im c₄` vanish together.
///
/// Sign-change brackets of both products closer than `window` are refined
/// by bisection with the family re-evaluated at `settings`; the candidate
/// is the midpoint of the two roots, accepted when the roots lie within
/// `window` and both ratios there are below `threshold`.
pub fn find_simultaneous_zero<F>(
    sweep: &SweepResult,
    family: &F,
    settings: &PropagationSettings,
    refine: &RefineSettings,
) -> Result<Option<ZeroCandidate>>
where
    F: Fn(f64) -> Result<MlzModel> + Sync,
{
    let b3 = brackets(&sweep.points, |p| p.c3);
    let b4 = brackets(&sweep.points, |p| p.c4);
    let mut pairs: Vec<((f64, f64), (f64, f64))> = b3
        .iter()
        .flat_map(|&a| b4.iter().map(move |&b| (a, b)))
        .filter(|&(a, b)| gap(a, b) <= refine.window)
        .collect();
    pairs.sort_by(|x, y| gap(x.0, x.1).total_cmp(&gap(y.0, y.1)));

    let settings = settings.with_t_max(sweep.t_max);
    let eval = |g: f64| family(g).and_then(|m| evaluate(&m, &settings, sweep.indices));
    let mut best: Option<ZeroCandidate> = None;
    for (a, b) in pairs {
        let mut evaluations = 0;
        let roots = (
            bisect(&eval, a, |p| p.c3.im, refine, &mut evaluations)?,
            bisect(&eval, b, |p| p.c4.im, refine, &mut evaluations)?,
        );
        let (Some(g3), Some(g4)) = roots else {
            continue;
        };
        if (g3 - g4).abs() > refine.window {
            continue;
        }
        let g = 0.5 * (g3 + g4);
        let at = eval(g)?;
        evaluations += 1;
        let (Some(r3), Some(r4)) = (at.r3, at.r4) else {
            continue;
        };
        if r3.abs() > refine.threshold || r4.abs() > refine.threshold {
            continue;
        }
        let candidate = ZeroCandidate {
            g,
            g3,
            g4,
            r3,
            r4,
            evaluations,
        };
        if best.is_none_or(|b| (g3 - g4).abs() < (b.g3 - b.g4).abs()) {
            best = Some(candidate);
        }
    }
    Ok(best)
}

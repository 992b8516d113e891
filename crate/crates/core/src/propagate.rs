//! Finite-time evolution matrices `U(T, −T)` by midpoint-exponential stepping.
//!
//! The half grid on `[0, T]` is built from zero outward and mirrored onto
//! `[−T, 0]`, so `U = R(T) L(T)` with `R` covering positive and `L` negative
//! times. Extending to a later checkpoint only multiplies new steps onto the
//! outer ends of `R` and `L`.

use std::io::{self, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    c, expm, hermitian_propagator, probabilities, pseudo_unitarity_residual, unitarity_residual,
    CMatrix, RMatrix, I,
};
use crate::model::{DualModel, MlzModel};

/// Unitarity residual above which a Hermitian run is rejected.
pub const UNITARITY_LIMIT: f64 = 1e-6;
/// Pseudo-unitarity residual above which a dual run is rejected.
pub const PSEUDO_UNITARITY_LIMIT: f64 = 1e-6;
/// Largest entry magnitude tolerated in a dual run.
pub const OVERFLOW_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    Fixed,
    /// `dt = dt0 / (1 + β_max |t|)`.
    #[default]
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// `exp(−i H(t_mid) dt)`.
    #[default]
    Midpoint,
    /// Midpoint exponential plus the commutator correction
    /// `i dt²/12 [A, B]`, fourth order for linear generators.
    Magnus4,
}

fn default_tolerance() -> f64 {
    1e-8
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagationSettings {
    pub t_max: f64,
    pub dt0: f64,
    #[serde(default)]
    pub rule: StepRule,
    #[serde(default)]
    pub scheme: Scheme,
    /// Target unitarity residual, reported against but not enforced.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

impl PropagationSettings {
    pub fn new(t_max: f64, dt0: f64) -> Result<Self> {
        let s = Self {
            t_max,
            dt0,
            rule: StepRule::Adaptive,
            scheme: Scheme::Midpoint,
            tolerance: default_tolerance(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_rule(mut self, rule: StepRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_t_max(mut self, t_max: f64) -> Self {
        self.t_max = t_max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !positive(self.t_max) || !positive(self.dt0) || !positive(self.tolerance) {
            return Err(Error::InvalidParameter(format!(
                "t_max, dt0 and tolerance must be positive, got {}, {}, {}",
                self.t_max, self.dt0, self.tolerance
            )));
        }
        if self.dt0 > self.t_max {
            return Err(Error::InvalidParameter(format!(
                "dt0 = {} exceeds t_max = {}",
                self.dt0, self.t_max
            )));
        }
        Ok(())
    }
}

/// `U(T, −T)` with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionMatrix {
    pub u: CMatrix,
    pub t_max: f64,
    /// `‖U†U − 1‖_max`, Hermitian runs only.
    pub unitarity_residual: Option<f64>,
    /// `‖UΣU† − Σ‖_max`, dual runs only.
    pub pseudo_unitarity_residual: Option<f64>,
    /// Number of exponential steps over `[−T, T]`.
    pub steps: usize,
}

impl EvolutionMatrix {
    pub fn probabilities(&self) -> RMatrix {
        probabilities(&self.u)
    }
}

/// Finite-T snapshots of `|U|²` and their stabilization.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringEstimate {
    pub p: RMatrix,
    pub snapshots: Vec<EvolutionMatrix>,
    /// `max_{k>k₀} |P(T_k) − P(T_{k−1})|` per entry over the later half of
    /// the schedule; `None` for a single checkpoint.
    pub convergence: Option<RMatrix>,
}

impl ScatteringEstimate {
    pub fn last(&self) -> &EvolutionMatrix {
        self.snapshots.last().expect("schedule is nonempty")
    }

    /// `|U|²` averaged over all snapshots, which damps the finite-T
    /// oscillation when the schedule spans a narrow window near its end.
    pub fn mean_probabilities(&self) -> RMatrix {
        let n = self.p.nrows();
        let sum = self
            .snapshots
            .iter()
            .fold(RMatrix::zeros(n, n), |acc, s| acc + s.probabilities());
        sum / self.snapshots.len() as f64
    }

    pub fn max_convergence(&self) -> Option<f64> {
        self.convergence
            .as_ref()
            .map(|m| m.iter().fold(0.0, |a: f64, &b| a.max(b)))
    }
}

/// Time-dependent generator `diag(slopes)·t + constant`, slopes centred.
struct Generator {
    slopes: Vec<f64>,
    constant: CMatrix,
    /// `i[constant, diag(slopes)] / 12`, the fourth-order correction per `dt²`.
    correction: Option<CMatrix>,
    hermitian: bool,
}

impl Generator {
    fn new(slopes: &[f64], constant: CMatrix, scheme: Scheme, hermitian: bool) -> Self {
        // Shifting all slopes by a constant multiplies U by a phase that is
        // 1 over a symmetric interval; centring keeps `|H dt|` small.
        let hi = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = slopes.iter().copied().fold(f64::INFINITY, f64::min);
        let mid = 0.5 * (hi + lo);
        let slopes: Vec<f64> = slopes.iter().map(|b| b - mid).collect();
        let correction = (scheme == Scheme::Magnus4).then(|| {
            let n = slopes.len();
            CMatrix::from_fn(n, n, |i, j| {
                I * constant[(i, j)] * (slopes[j] - slopes[i]) / 12.0
            })
        });
        Self {
            slopes,
            constant,
            correction,
            hermitian,
        }
    }

    fn beta_max(&self) -> f64 {
        self.slopes.iter().fold(0.0, |m, b| m.max(b.abs()))
    }

    fn step(&self, t_mid: f64, dt: f64) -> CMatrix {
        let mut h = self.constant.clone();
        for (k, b) in self.slopes.iter().enumerate() {
            h[(k, k)] += b * t_mid;
        }
        if let Some(k) = &self.correction {
            h += k * c(dt * dt, 0.0);
        }
        if self.hermitian {
            hermitian_propagator(h, dt)
        } else {
            expm(&(h * c(0.0, -dt)))
        }
    }
}

fn validate_schedule(schedule: &[f64]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::InvalidParameter("schedule is empty".into()));
    }
    if schedule.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidParameter(format!(
            "schedule {schedule:?} must hold positive times"
        )));
    }
    if schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(format!(
            "schedule {schedule:?} must be strictly increasing"
        )));
    }
    Ok(())
}

/// Steps outward through every checkpoint and hands `U(T_k, −T_k)` to `visit`.
fn sweep(
    gen: &Generator,
    settings: &PropagationSettings,
    schedule: &[f64],
    guard: Option<f64>,
    mut visit: impl FnMut(f64, &CMatrix, usize) -> Result<()>,
) -> Result<()> {
    let n = gen.constant.nrows();
    let beta_max = gen.beta_max();
    let mut right = CMatrix::identity(n, n);
    let mut left = CMatrix::identity(n, n);
    let mut scratch = CMatrix::zeros(n, n);
    let mut t = 0.0f64;
    let mut steps = 0usize;
    for &stop in schedule {
        while t < stop {
            let mut dt = match settings.rule {
                StepRule::Fixed => settings.dt0,
                StepRule::Adaptive => settings.dt0 / (1.0 + beta_max * t),
            };
            if t + dt >= stop {
                dt = stop - t;
            }
            let t_mid = t + 0.5 * dt;
            let outer = gen.step(t_mid, dt);
            scratch.gemm(
                Complex64::new(1.0, 0.0),
                &outer,
                &right,
                Complex64::new(0.0, 0.0),
            );
            std::mem::swap(&mut right, &mut scratch);
            let inner = gen.step(-t_mid, dt);
            scratch.gemm(
                Complex64::new(1.0, 0.0),
                &left,
                &inner,
                Complex64::new(0.0, 0.0),
            );
            std::mem::swap(&mut left, &mut scratch);
            steps += 2;
            t = if t + dt >= stop { stop } else { t + dt };
            if let Some(limit) = guard {
                if steps.is_multiple_of(32) || t == stop {
                    let magnitude = right
                        .iter()
                        .chain(left.iter())
                        .fold(0.0, |m: f64, z| m.max(z.norm()));
                    if !(magnitude <= limit) {
                        return Err(Error::Overflow { magnitude, time: t });
                    }
                }
            }
        }
        let u = &right * &left;
        if let Some(limit) = guard {
            let magnitude = u.iter().fold(0.0, |m: f64, z| m.max(z.norm()));
            if !(magnitude <= limit) {
                return Err(Error::Overflow {
                    magnitude,
                    time: stop,
                });
            }
        }
        visit(stop, &u, steps)?;
    }
    Ok(())
}

fn unitary_run(
    model: &MlzModel,
    settings: &PropagationSettings,
    schedule: &[f64],
) -> Result<Vec<EvolutionMatrix>> {
    settings.validate()?;
    validate_schedule(schedule)?;
    let gen = Generator::new(
        model.beta(),
        model.couplings().clone(),
        settings.scheme,
        true,
    );
    let mut out = Vec::with_capacity(schedule.len());
    sweep(&gen, settings, schedule, None, |t, u, steps| {
        let residual = unitarity_residual(u);
        if !(residual <= UNITARITY_LIMIT) {
            return Err(Error::ToleranceExceeded {
                what: "unitarity",
                residual,
                tolerance: UNITARITY_LIMIT,
            });
        }
        out.push(EvolutionMatrix {
            u: u.clone(),
            t_max: t,
            unitarity_residual: Some(residual),
            pseudo_unitarity_residual: None,
            steps,
        });
        Ok(())
    })?;
    Ok(out)
}

/// `U(T, −T)` for `T = settings.t_max`.
pub fn evolve_unitary(model: &MlzModel, settings: &PropagationSettings) -> Result<EvolutionMatrix> {
    let mut runs = unitary_run(model, settings, &[settings.t_max])?;
    Ok(runs.pop().expect("one checkpoint"))
}

/// Runs through every `T` of an increasing schedule, reusing the partial
/// product. `settings.t_max` is ignored.
pub fn scattering_estimate(
    model: &MlzModel,
    schedule: &[f64],
    settings: &PropagationSettings,
) -> Result<ScatteringEstimate> {
    validate_schedule(schedule)?;
    let settings = settings.with_t_max(*schedule.last().unwrap());
    let snapshots = unitary_run(model, &settings, schedule)?;
    let ps: Vec<RMatrix> = snapshots
        .iter()
        .map(EvolutionMatrix::probabilities)
        .collect();
    let convergence = (ps.len() >= 2).then(|| {
        let k0 = (ps.len() / 2).max(1);
        let n = model.n();
        let mut m = RMatrix::zeros(n, n);
        for k in k0..ps.len() {
            m.zip_apply(&(&ps[k] - &ps[k - 1]), |a, d| *a = a.max(d.abs()));
        }
        m
    });
    Ok(ScatteringEstimate {
        p: ps.last().unwrap().clone(),
        snapshots,
        convergence,
    })
}

/// Geometric schedule of `count` times ending at `t_max`, each a factor
/// `ratio` above the previous one.
pub fn geometric_schedule(t_max: f64, ratio: f64, count: usize) -> Vec<f64> {
    let mut s: Vec<f64> = (0..count)
        .map(|k| t_max / ratio.powi((count - 1 - k) as i32))
        .collect();
    s.dedup();
    s
}

/// Evolution of the dual model `i dψ/dτ = (−Bτ + iA) ψ` at every checkpoint.
pub fn evolve_nonunitary_schedule(
    dual: &DualModel,
    schedule: &[f64],
    settings: &PropagationSettings,
) -> Result<Vec<EvolutionMatrix>> {
    settings.validate()?;
    validate_schedule(schedule)?;
    let base = dual.base();
    let slopes: Vec<f64> = base.beta().iter().map(|b| -b).collect();
    let gen = Generator::new(&slopes, base.couplings() * I, settings.scheme, false);
    let signature = dual.bipartition().signature();
    let mut out = Vec::with_capacity(schedule.len());
    sweep(
        &gen,
        settings,
        schedule,
        Some(OVERFLOW_LIMIT),
        |t, u, steps| {
            let residual = pseudo_unitarity_residual(u, &signature);
            if !(residual <= PSEUDO_UNITARITY_LIMIT) {
                return Err(Error::ToleranceExceeded {
                    what: "pseudo-unitarity",
                    residual,
                    tolerance: PSEUDO_UNITARITY_LIMIT,
                });
            }
            out.push(EvolutionMatrix {
                u: u.clone(),
                t_max: t,
                unitarity_residual: None,
                pseudo_unitarity_residual: Some(residual),
                steps,
            });
            Ok(())
        },
    )?;
    Ok(out)
}

pub fn evolve_nonunitary(
    dual: &DualModel,
    settings: &PropagationSettings,
) -> Result<EvolutionMatrix> {
    let mut runs = evolve_nonunitary_schedule(dual, &[settings.t_max], settings)?;
    Ok(runs.pop().expect("one checkpoint"))
}

/// Cyclic products of a scattering-matrix estimate and their `Im/Re` ratios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CyclicProducts {
    pub c3: Complex64,
    pub c4: Complex64,
    pub r3: Option<f64>,
    pub r4: Option<f64>,
}

/// `Im z / Re z`, or `None` when `|Re z| < 1e−14`.
pub fn ratio(z: Complex64) -> Option<f64> {
    (z.re.abs() >= 1e-14).then(|| z.im / z.re)
}

fn check_indices(n: usize, idx: &[usize]) -> Result<()> {
    for (a, &i) in idx.iter().enumerate() {
        if i >= n {
            return Err(Error::IndexError(format!(
                "index {i} out of range for {n} states"
            )));
        }
        if idx[..a].contains(&i) {
            return Err(Error::IndexError(format!(
                "indices {idx:?} are not distinct"
            )));
        }
    }
    Ok(())
}

/// `S_ik S_kj S_ji`.
pub fn cycle3(s: &CMatrix, (i, j, k): (usize, usize, usize)) -> Result<Complex64> {
    check_indices(s.nrows(), &[i, j, k])?;
    Ok(s[(i, k)] * s[(k, j)] * s[(j, i)])
}

/// `S_ij S_jl S_lk S_ki`.
pub fn cycle4(s: &CMatrix, (i, j, k, l): (usize, usize, usize, usize)) -> Result<Complex64> {
    check_indices(s.nrows(), &[i, j, k, l])?;
    Ok(s[(i, j)] * s[(j, l)] * s[(l, k)] * s[(k, i)])
}

pub fn cyclic_products(
    s: &CMatrix,
    triple: (usize, usize, usize),
    quad: (usize, usize, usize, usize),
) -> Result<CyclicProducts> {
    let c3 = cycle3(s, triple)?;
    let c4 = cycle4(s, quad)?;
    Ok(CyclicProducts {
        c3,
        c4,
        r3: ratio(c3),
        r4: ratio(c4),
    })
}

/// Writes snapshots as CSV rows `T,i,j,Re,Im,P` with 17 significant digits.
pub fn write_snapshots_csv<W: Write>(mut w: W, snapshots: &[EvolutionMatrix]) -> io::Result<()> {
    writeln!(w, "T,i,j,Re,Im,P")?;
    for snap in snapshots {
        let u = &snap.u;
        for i in 0..u.nrows() {
            for j in 0..u.ncols() {
                let z = u[(i, j)];
                writeln!(
                    w,
                    "{:.16e},{i},{j},{:.16e},{:.16e},{:.16e}",
                    snap.t_max,
                    z.re,
                    z.im,
                    z.norm_sqr()
                )?;
            }
        }
    }
    Ok(())
}

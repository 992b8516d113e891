//! Command dispatch and artifact writing.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use mlz_core::constraints::{
    all_orders, check_bipartite_symmetry, check_cyclic_reality, check_hierarchy,
    check_trace_identity, cycle_indices, extract_alpha, ANALYTIC_TOLERANCE, GAUGE_THRESHOLD,
    NUMERIC_TOLERANCE,
};
use mlz_core::linalg::{max_abs, probabilities, stochasticity_residual};
use mlz_core::model::{invert_permutation, permute_matrix, sort_by_slope};
use mlz_core::propagate::{evolve_nonunitary, evolve_unitary, scattering_estimate};
use mlz_core::scanner::{find_simultaneous_zero, sweep};
use mlz_core::stokes::{
    check_monodromy, condensate_populations, dual_scattering, stokes_from_scattering,
    DualScattering,
};
use mlz_core::{
    detect_bipartition, dual_bosonic, BipartiteStructure, CMatrix, Error, MlzModel, RMatrix,
};
use serde::Serialize;

use crate::config::{Check, Command, Format, RunConfig, Source};
use crate::family::Family;
use crate::output::{
    rows, AnalyticOutput, AnalyticRecord, ComplexMatrix, DualOutput, Report, ScanOutput,
    SimulateOutput, SimulateRun, Snapshot, StokesOutput, StokesResiduals,
};
use crate::schema::Violation;

#[derive(Debug)]
pub enum RunError {
    /// The config is valid JSON but asks for something the model cannot
    /// provide.
    Config(Violation),
    Compute(Error),
    Io(PathBuf, std::io::Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Config(v) => write!(f, "{}: {}", v.pointer, v.message),
            Self::Compute(e) => write!(f, "{e}"),
            Self::Io(p, e) => write!(f, "{}: {e}", p.display()),
        }
    }
}

impl std::error::Error for RunError {}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        Self::Compute(e)
    }
}

fn config_error(pointer: &str, message: impl Into<String>) -> RunError {
    RunError::Config(Violation {
        pointer: pointer.into(),
        message: message.into(),
    })
}

/// What a run produced. `success` is false only for `verify` with a failing
/// report.
#[derive(Debug)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub success: bool,
}

pub fn run(cfg: &RunConfig, out_dir: &Path) -> Result<Outcome, RunError> {
    std::fs::create_dir_all(out_dir).map_err(|e| RunError::Io(out_dir.into(), e))?;
    let mut writer = Writer {
        dir: out_dir,
        files: Vec::new(),
    };
    let success = match cfg.command {
        Command::Simulate => simulate(cfg, &mut writer)?,
        Command::Analytic => analytic(cfg, &mut writer)?,
        Command::Verify => verify(cfg, &mut writer)?,
        Command::Stokes => stokes(cfg, &mut writer)?,
        Command::Dual => dual(cfg, &mut writer)?,
        Command::Scan => scan(cfg, &mut writer)?,
    };
    Ok(Outcome {
        files: writer.files,
        success,
    })
}

struct Writer<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
}

impl Writer<'_> {
    /// Writes through a temporary file in the same directory, then renames.
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), RunError> {
        let path = self.dir.join(name);
        let io = |e: std::io::Error| RunError::Io(path.clone(), e);
        let mut tmp = tempfile::NamedTempFile::new_in(self.dir).map_err(io)?;
        tmp.write_all(bytes).map_err(io)?;
        tmp.as_file().sync_all().map_err(io)?;
        tmp.persist(&path).map_err(|e| io(e.error))?;
        self.files.push(path);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), RunError> {
        let mut text = serde_json::to_string_pretty(value).expect("output records serialize");
        text.push('\n');
        self.write(name, text.as_bytes())
    }
}

/// Fixed-width scientific notation with 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Models of the run, one per sweep value or a single unswept one.
fn families(cfg: &RunConfig) -> Result<Vec<(Option<f64>, Family)>, RunError> {
    match &cfg.sweep {
        None => {
            let f = cfg
                .model
                .family_as_written()
                .map_err(|m| config_error("/model/params", m))?;
            Ok(vec![(None, f)])
        }
        Some(s) => s
            .values
            .iter()
            .enumerate()
            .map(|(k, &g)| {
                cfg.model
                    .family_with(&s.assign(g))
                    .map(|f| (Some(g), f))
                    .map_err(|m| config_error(&format!("/sweep/values/{k}"), m))
            })
            .collect(),
    }
}

fn build(family: &Family, pointer: &str) -> Result<MlzModel, RunError> {
    family
        .build()
        .map_err(|e| config_error(pointer, e.to_string()))
}

fn bipartition(model: &MlzModel) -> Result<BipartiteStructure, RunError> {
    detect_bipartition(model).map_err(|e| match e {
        Error::NotBipartite { .. } => config_error("/model", e.to_string()),
        other => RunError::Compute(other),
    })
}

fn simulate(cfg: &RunConfig, w: &mut Writer) -> Result<bool, RunError> {
    let settings = cfg.propagation.expect("validated");
    let schedule = cfg.schedule.clone().unwrap_or_else(|| vec![settings.t_max]);
    let mut runs = Vec::new();
    for (value, family) in families(cfg)? {
        let model = build(&family, "/model/params")?;
        let est = scattering_estimate(&model, &schedule, &settings)?;
        let snapshots = est
            .snapshots
            .iter()
            .map(|s| Snapshot {
                t: s.t_max,
                steps: s.steps,
                u: ComplexMatrix::from(&s.u),
                p: rows(&s.probabilities()),
                unitarity_residual: s.unitarity_residual,
            })
            .collect();
        runs.push(SimulateRun {
            value,
            snapshots,
            convergence: est.max_convergence(),
        });
    }
    let out = SimulateOutput {
        family: cfg.model.family.clone(),
        parameter: cfg.sweep.as_ref().map(|s| s.label()),
        runs,
    };
    match cfg.format {
        Format::Json => w.json("simulate.json", &out)?,
        Format::Csv => w.write("simulate.csv", simulate_csv(&out).as_bytes())?,
    }
    Ok(true)
}

/// Rows `T,i,j,Re,Im,P`, prefixed by a `param` column for sweeps.
pub fn simulate_csv(out: &SimulateOutput) -> String {
    let swept = out.parameter.is_some();
    let mut s = String::from(if swept {
        "param,T,i,j,Re,Im,P\n"
    } else {
        "T,i,j,Re,Im,P\n"
    });
    for run in &out.runs {
        for snap in &run.snapshots {
            for (i, (re_row, im_row)) in snap.u.re.iter().zip(&snap.u.im).enumerate() {
                for (j, (&re, &im)) in re_row.iter().zip(im_row).enumerate() {
                    if let Some(v) = run.value.filter(|_| swept) {
                        write!(s, "{},", num(v)).unwrap();
                    }
                    writeln!(
                        s,
                        "{},{i},{j},{},{},{}",
                        num(snap.t),
                        num(re),
                        num(im),
                        num(snap.p[i][j])
                    )
                    .unwrap();
                }
            }
        }
    }
    s
}

fn solve(family: &Family) -> Result<mlz_core::analytic::AnalyticSolution, RunError> {
    family
        .analytic()
        .map_err(|m| config_error("/model/family", m))?
        .map_err(RunError::Compute)
}

fn analytic(cfg: &RunConfig, w: &mut Writer) -> Result<bool, RunError> {
    let mut solutions = Vec::new();
    for (value, family) in families(cfg)? {
        let sol = solve(&family)?;
        solutions.push(AnalyticRecord {
            value,
            params: sol.params.clone(),
            p: rows(&sol.p),
            s: sol.s.as_ref().map(ComplexMatrix::from),
            stochasticity_residual: sol.stochasticity_residual(),
        });
    }
    let out = AnalyticOutput {
        family: cfg.model.family.clone(),
        parameter: cfg.sweep.as_ref().map(|s| s.label()),
        solutions,
    };
    match cfg.format {
        Format::Json => w.json("analytic.json", &out)?,
        Format::Csv => w.write("analytic.csv", analytic_csv(&out).as_bytes())?,
    }
    Ok(true)
}

/// Rows `family,param_record,i,j,P,Re,Im`; `Re` and `Im` stay empty where
/// only probabilities are known. `param_record` is `key=value` pairs joined
/// by `;`.
pub fn analytic_csv(out: &AnalyticOutput) -> String {
    let mut s = String::from("family,param_record,i,j,P,Re,Im\n");
    for sol in &out.solutions {
        let record: Vec<String> = sol.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let record = record.join(";");
        for (i, row) in sol.p.iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                let (re, im) = match &sol.s {
                    Some(m) => (num(m.re[i][j]), num(m.im[i][j])),
                    None => (String::new(), String::new()),
                };
                writeln!(s, "{},{record},{i},{j},{},{re},{im}", out.family, num(p)).unwrap();
            }
        }
    }
    s
}

/// Scattering amplitudes (if known) and probabilities in model order.
fn scattering(
    cfg: &RunConfig,
    source: Source,
    family: &Family,
    model: &MlzModel,
) -> Result<(Option<CMatrix>, RMatrix), RunError> {
    match source {
        Source::Analytic => {
            let sol = solve(family)?;
            Ok((sol.s, sol.p))
        }
        Source::Numeric => {
            let u = evolve_unitary(model, &cfg.propagation.expect("validated"))?;
            let p = u.probabilities();
            Ok((Some(u.u), p))
        }
    }
}

fn verify(cfg: &RunConfig, w: &mut Writer) -> Result<bool, RunError> {
    let opts = cfg.verify.as_ref().expect("validated");
    let family = cfg
        .model
        .family_as_written()
        .map_err(|m| config_error("/model/params", m))?;
    let model = build(&family, "/model/params")?;
    let (s, p) = scattering(cfg, opts.source, &family, &model)?;
    if s.is_none() {
        if let Some(k) = opts.checks.iter().position(|c| c.needs_amplitudes()) {
            return Err(config_error(
                &format!("/verify/checks/{k}"),
                "this family's closed form gives probabilities only",
            ));
        }
    }
    let bip = if opts.checks.iter().any(|c| c.needs_bipartition()) {
        Some(bipartition(&model)?)
    } else {
        None
    };
    let tol = opts.tolerance.unwrap_or(match opts.source {
        Source::Analytic => ANALYTIC_TOLERANCE,
        Source::Numeric => NUMERIC_TOLERANCE,
    });

    let mut reports = Vec::new();
    for &check in &opts.checks {
        let s = || s.as_ref().expect("amplitudes checked above");
        let bip = || bip.as_ref().expect("bipartition checked above");
        match check {
            Check::Stochasticity => reports.push(Report::new(
                "stochasticity",
                tol,
                vec![(
                    "max row/column sum deviation".into(),
                    stochasticity_residual(&p),
                )],
            )),
            Check::ProbabilitySymmetry => reports.push(Report::new(
                "probability_symmetry",
                tol,
                vec![("max |P - P^T|".into(), (&p - p.transpose()).abs().max())],
            )),
            Check::BipartiteSymmetry => {
                reports.push(Report::from(&check_bipartite_symmetry(s(), bip(), tol)?))
            }
            Check::TraceIdentity => {
                reports.push(Report::from(&check_trace_identity(s(), bip(), tol)?))
            }
            Check::Hierarchy => {
                let hc = check_hierarchy(s(), &model, &all_orders(&model), tol)?;
                reports.extend(hc.iter().map(Report::from));
            }
            Check::CyclicReality => {
                let (triple, quad) = match opts.indices {
                    Some(idx) => idx,
                    None => cycle_indices(bip())
                        .map_err(|e| config_error("/verify/indices", e.to_string()))?,
                };
                let details = match check_cyclic_reality(s(), triple, quad) {
                    Ok(c) => vec![
                        (format!("Im/Re c3{triple:?}"), c.r3.abs()),
                        (format!("Im/Re c4{quad:?}"), c.r4.abs()),
                    ],
                    Err(e) => vec![(e.to_string(), f64::NAN)],
                };
                reports.push(Report::new("cyclic_reality", tol, details));
            }
            Check::Alpha => {
                let details = match extract_alpha(s(), bip(), GAUGE_THRESHOLD.max(tol)) {
                    Ok(a) => vec![
                        ("ansatz".into(), a.residual),
                        ("alpha symmetry".into(), a.symmetry_residual()),
                        ("alpha involution".into(), a.involution_residual()),
                    ],
                    Err(e) => vec![(e.to_string(), f64::NAN)],
                };
                reports.push(Report::new("alpha", tol, details));
            }
        }
    }
    w.json("verify.json", &reports)?;
    Ok(reports.iter().all(|r| r.pass))
}

/// Stokes set of a family with closed-form amplitudes.
fn stokes_set(
    cfg: &RunConfig,
    tolerance: f64,
) -> Result<(MlzModel, BipartiteStructure, mlz_core::StokesSet, CMatrix), RunError> {
    let family = cfg
        .model
        .family_as_written()
        .map_err(|m| config_error("/model/params", m))?;
    let model = build(&family, "/model/params")?;
    let bip = bipartition(&model)?;
    let s = solve(&family)?.s.ok_or_else(|| {
        config_error(
            "/model/family",
            "this family's closed form gives probabilities only",
        )
    })?;
    let set = stokes_from_scattering(&s, &model, &bip, tolerance)?;
    Ok((model, bip, set, s))
}

fn stokes(cfg: &RunConfig, w: &mut Writer) -> Result<bool, RunError> {
    let tol = cfg.stokes_tolerance.unwrap_or(ANALYTIC_TOLERANCE);
    let (model, _, set, s) = stokes_set(cfg, tol)?;
    let (_, perm) = sort_by_slope(&model);
    let reconstruction = max_abs(&(set.scattering() - permute_matrix(&s, &perm)));
    let out = StokesOutput {
        family: cfg.model.family.clone(),
        states: set.states.clone(),
        eta: set.eta.values().to_vec(),
        s1: ComplexMatrix::from(&set.s1),
        s2: ComplexMatrix::from(&set.s2),
        s3: ComplexMatrix::from(&set.s3),
        s4: ComplexMatrix::from(&set.s4),
        residuals: StokesResiduals {
            monodromy: check_monodromy(&set, tol).residual,
            reconstruction,
        },
    };
    w.json("stokes.json", &out)?;
    Ok(true)
}

fn dual(cfg: &RunConfig, w: &mut Writer) -> Result<bool, RunError> {
    let opts = cfg.dual.as_ref().expect("validated");
    let (dual, model, t_max) = match opts.source {
        Source::Analytic => {
            let (model, bip, set, _) = stokes_set(cfg, ANALYTIC_TOLERANCE)?;
            let sorted = dual_scattering(&set, &bip.permuted(&set.states))?;
            let inv = invert_permutation(&set.states);
            let dual = DualScattering {
                s_prime: permute_matrix(&sorted.s_prime, &inv),
                signature: bip.signature(),
                states: (0..model.n()).collect(),
            };
            (dual, model, None)
        }
        Source::Numeric => {
            let family = cfg
                .model
                .family_as_written()
                .map_err(|m| config_error("/model/params", m))?;
            let model = build(&family, "/model/params")?;
            let bip = bipartition(&model)?;
            let settings = cfg.propagation.expect("validated");
            let u = evolve_nonunitary(&dual_bosonic(&model, &bip)?, &settings)?;
            let dual = DualScattering {
                s_prime: u.u,
                signature: bip.signature(),
                states: (0..model.n()).collect(),
            };
            (dual, model, Some(settings.t_max))
        }
    };
    let initial = opts.initial.clone().unwrap_or_else(|| vec![0.0; model.n()]);
    if initial.len() != model.n() {
        return Err(config_error(
            "/dual/initial",
            format!("expected {} occupations, got {}", model.n(), initial.len()),
        ));
    }
    let populations = condensate_populations(&dual, &initial)?;
    let conservation_residual = dual
        .signature
        .iter()
        .zip(populations.iter().zip(&initial))
        .map(|(sig, (out, inp))| sig * (out - inp))
        .sum::<f64>()
        .abs();
    let out = DualOutput {
        family: cfg.model.family.clone(),
        source: opts.source.name().into(),
        t_max,
        signature: dual.signature.clone(),
        s_prime: ComplexMatrix::from(&dual.s_prime),
        probabilities: rows(&probabilities(&dual.s_prime)),
        pseudo_unitarity_residual: dual.pseudo_unitarity_residual(),
        initial,
        populations,
        conservation_residual,
    };
    w.json("dual.json", &out)?;
    Ok(true)
}

fn scan(cfg: &RunConfig, w: &mut Writer) -> Result<bool, RunError> {
    let opts = cfg.scan.as_ref().expect("validated");
    let sw = cfg.sweep.as_ref().expect("validated");
    let settings = cfg.propagation.expect("validated");
    let family = |g: f64| {
        cfg.model
            .family_with(&sw.assign(g))
            .map_err(Error::InvalidParameter)
            .and_then(|f| f.build())
    };
    let descriptor = format!("{} {}", cfg.model.family, sw.label());
    let result = sweep(&family, &descriptor, &sw.values, &settings, opts.indices)?;
    let candidate = if opts.search {
        find_simultaneous_zero(&result, &family, &settings, &opts.refine)?
    } else {
        None
    };
    let mut csv = Vec::new();
    result.write_csv(&mut csv).expect("writing to memory");
    w.write("scan.csv", &csv)?;
    w.json(
        "scan.json",
        &ScanOutput::new(&sw.label(), &result, candidate),
    )?;
    Ok(true)
}

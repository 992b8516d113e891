//! Run configuration: one JSON document per invocation.

use mlz_core::propagate::{PropagationSettings, Scheme, StepRule};
use mlz_core::scanner::{linear_grid, CycleIndices, RefineSettings};
use serde_json::{Map, Value};

use crate::family::ModelSpec;
use crate::schema::{child, Checker, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Simulate,
    Analytic,
    Verify,
    Stokes,
    Dual,
    Scan,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Simulate => "simulate",
            Self::Analytic => "analytic",
            Self::Verify => "verify",
            Self::Stokes => "stokes",
            Self::Dual => "dual",
            Self::Scan => "scan",
        }
    }

    const ALL: [Command; 6] = [
        Self::Simulate,
        Self::Analytic,
        Self::Verify,
        Self::Stokes,
        Self::Dual,
        Self::Scan,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Analytic,
    Numeric,
}

impl Source {
    pub fn name(self) -> &'static str {
        match self {
            Self::Analytic => "analytic",
            Self::Numeric => "numeric",
        }
    }
}

/// One-parameter family: for each value `g`, every target pointer inside
/// the model params is set to `scale * g`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub targets: Vec<(String, f64)>,
    pub values: Vec<f64>,
}

impl Sweep {
    pub fn assign(&self, g: f64) -> Vec<(String, f64)> {
        self.targets
            .iter()
            .map(|(p, s)| (p.clone(), s * g))
            .collect()
    }

    /// Targets as `pointer` or `scale*pointer`, comma separated.
    pub fn label(&self) -> String {
        let parts: Vec<String> = self
            .targets
            .iter()
            .map(|(p, s)| {
                if *s == 1.0 {
                    p.clone()
                } else {
                    format!("{s}*{p}")
                }
            })
            .collect();
        parts.join(",")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    BipartiteSymmetry,
    TraceIdentity,
    Hierarchy,
    CyclicReality,
    Alpha,
    Stochasticity,
    ProbabilitySymmetry,
}

impl Check {
    pub const NAMES: [&'static str; 7] = [
        "bipartite_symmetry",
        "trace_identity",
        "hierarchy",
        "cyclic_reality",
        "alpha",
        "stochasticity",
        "probability_symmetry",
    ];

    fn from_name(s: &str) -> Self {
        match s {
            "bipartite_symmetry" => Self::BipartiteSymmetry,
            "trace_identity" => Self::TraceIdentity,
            "hierarchy" => Self::Hierarchy,
            "cyclic_reality" => Self::CyclicReality,
            "alpha" => Self::Alpha,
            "stochasticity" => Self::Stochasticity,
            _ => Self::ProbabilitySymmetry,
        }
    }

    /// Needs amplitudes rather than probabilities.
    pub fn needs_amplitudes(self) -> bool {
        !matches!(self, Self::Stochasticity | Self::ProbabilitySymmetry)
    }

    /// Needs a two-coloring of the connectivity graph.
    pub fn needs_bipartition(self) -> bool {
        matches!(
            self,
            Self::BipartiteSymmetry | Self::TraceIdentity | Self::CyclicReality | Self::Alpha
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub source: Source,
    pub checks: Vec<Check>,
    /// Defaults to the analytic or numeric tolerance of the source.
    pub tolerance: Option<f64>,
    pub indices: Option<CycleIndices>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualOptions {
    pub source: Source,
    pub initial: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanOptions {
    pub indices: Option<CycleIndices>,
    pub refine: RefineSettings,
    pub search: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub model: ModelSpec,
    pub propagation: Option<PropagationSettings>,
    /// Checkpoints for `simulate`; defaults to `[t_max]`.
    pub schedule: Option<Vec<f64>>,
    pub sweep: Option<Sweep>,
    pub format: Format,
    pub verify: Option<VerifyOptions>,
    pub stokes_tolerance: Option<f64>,
    pub dual: Option<DualOptions>,
    pub scan: Option<ScanOptions>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Parse(String),
    Schema(Vec<Violation>),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Parse(msg) => write!(f, "invalid JSON: {msg}"),
            Self::Schema(v) => {
                write!(f, "{} schema violation(s)", v.len())?;
                for x in v {
                    write!(f, "; {}: {}", x.pointer, x.message)?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ConfigError {}

const TOP_LEVEL: [&str; 10] = [
    "command",
    "model",
    "propagation",
    "sweep",
    "output",
    "simulate",
    "verify",
    "stokes",
    "dual",
    "scan",
];

/// Validates a config for `command`. A `"command"` field, if present, must
/// agree with it. Every violation is reported, not just the first.
pub fn parse_config(text: &str, command: Command) -> Result<RunConfig, ConfigError> {
    let root: Value = serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let mut c = Checker::default();
    let Some(top) = c.object(&root, "", &TOP_LEVEL) else {
        return Err(ConfigError::Schema(c.violations));
    };

    if let Some(v) = top.get("command") {
        let names = Command::ALL.map(Command::name);
        if let Some(name) = c.one_of(v, "/command", &names) {
            if name != command.name() {
                c.fail(
                    "/command",
                    format!("config is for '{name}', invoked as '{}'", command.name()),
                );
            }
        }
    }
    for (section, owner) in [
        ("simulate", Command::Simulate),
        ("verify", Command::Verify),
        ("stokes", Command::Stokes),
        ("dual", Command::Dual),
        ("scan", Command::Scan),
    ] {
        if top.contains_key(section) && owner != command {
            c.fail(
                child("", section),
                format!("section does not apply to '{}'", command.name()),
            );
        }
    }

    let model = c
        .required(top, "", "model")
        .and_then(|v| ModelSpec::parse(&mut c, v, "/model"));
    let propagation = top.get("propagation").and_then(|v| propagation(&mut c, v));
    let sweep = top.get("sweep").and_then(|v| sweep(&mut c, v));
    let format = output_format(&mut c, top, command);

    let verify = (command == Command::Verify).then(|| verify_options(&mut c, top.get("verify")));
    let stokes_tolerance = match (command, top.get("stokes")) {
        (Command::Stokes, Some(v)) => c
            .object(v, "/stokes", &["tolerance"])
            .and_then(|m| m.get("tolerance"))
            .and_then(|t| c.positive(t, "/stokes/tolerance")),
        _ => None,
    };
    let dual = (command == Command::Dual).then(|| dual_options(&mut c, top.get("dual")));
    let scan = (command == Command::Scan).then(|| scan_options(&mut c, top.get("scan")));
    let schedule = match (command, top.get("simulate")) {
        (Command::Simulate, Some(v)) => c
            .object(v, "/simulate", &["schedule"])
            .and_then(|m| m.get("schedule"))
            .and_then(|s| schedule(&mut c, s, "/simulate/schedule")),
        _ => None,
    };

    let numeric = match command {
        Command::Simulate | Command::Scan => true,
        Command::Verify => matches!(&verify, Some(Some(v)) if v.source == Source::Numeric),
        Command::Dual => matches!(&dual, Some(Some(d)) if d.source == Source::Numeric),
        Command::Analytic | Command::Stokes => false,
    };
    if numeric && propagation.is_none() && !top.contains_key("propagation") {
        c.fail("/propagation", "missing required field for numeric runs");
    }
    match command {
        Command::Scan if sweep.is_none() && !top.contains_key("sweep") => {
            c.fail("/sweep", "missing required field for scan");
        }
        Command::Verify | Command::Stokes | Command::Dual if top.contains_key("sweep") => {
            c.fail(
                "/sweep",
                format!("'{}' runs a single model", command.name()),
            );
        }
        _ => {}
    }
    if let (Some(model), Some(sweep)) = (&model, &sweep) {
        if let Some(&g) = sweep.values.first() {
            let base = c.violations.len();
            model.family_at(&mut c, "/model/params", &sweep.assign(g));
            for v in &mut c.violations[base..] {
                v.pointer = "/sweep/parameter".into();
            }
        }
    }

    if !c.is_clean() {
        return Err(ConfigError::Schema(c.violations));
    }
    Ok(RunConfig {
        command,
        model: model.expect("validated"),
        propagation,
        schedule,
        sweep,
        format,
        verify: verify.flatten(),
        stokes_tolerance,
        dual: dual.flatten(),
        scan: scan.flatten(),
    })
}

fn propagation(c: &mut Checker, v: &Value) -> Option<PropagationSettings> {
    let p = "/propagation";
    let m = c.object(v, p, &["t_max", "dt0", "rule", "scheme", "tolerance"])?;
    let t_max = c
        .required(m, p, "t_max")
        .and_then(|x| c.positive(x, "/propagation/t_max"));
    let dt0 = c
        .required(m, p, "dt0")
        .and_then(|x| c.positive(x, "/propagation/dt0"));
    let rule = match m.get("rule") {
        None => Some(StepRule::Adaptive),
        Some(x) => c
            .one_of(x, "/propagation/rule", &["adaptive", "fixed"])
            .map(|s| {
                if s == "fixed" {
                    StepRule::Fixed
                } else {
                    StepRule::Adaptive
                }
            }),
    };
    let scheme = match m.get("scheme") {
        None => Some(Scheme::Midpoint),
        Some(x) => c
            .one_of(x, "/propagation/scheme", &["midpoint", "magnus4"])
            .map(|s| {
                if s == "magnus4" {
                    Scheme::Magnus4
                } else {
                    Scheme::Midpoint
                }
            }),
    };
    let tolerance = match m.get("tolerance") {
        None => Some(1e-8),
        Some(x) => c.positive(x, "/propagation/tolerance"),
    };
    let (t_max, dt0) = (t_max?, dt0?);
    if dt0 > t_max {
        c.fail("/propagation/dt0", format!("exceeds t_max = {t_max}"));
        return None;
    }
    let mut s = PropagationSettings::new(t_max, dt0)
        .ok()?
        .with_rule(rule?)
        .with_scheme(scheme?);
    s.tolerance = tolerance?;
    Some(s)
}

fn schedule(c: &mut Checker, v: &Value, p: &str) -> Option<Vec<f64>> {
    let times = c.array_of(v, p, |c, x, q| c.positive(x, q))?;
    if times.is_empty() || times.windows(2).any(|w| w[0] >= w[1]) {
        c.fail(p, "must be a nonempty, strictly increasing list of times");
        return None;
    }
    Some(times)
}

/// `{"parameter": "/g/2", "values": [...]}` or with
/// `"grid": {"lo": .., "hi": .., "count": ..}`. `parameter` may also be a
/// list of pointers, with an optional `scale` list of the same length.
fn sweep(c: &mut Checker, v: &Value) -> Option<Sweep> {
    let p = "/sweep";
    let m = c.object(v, p, &["parameter", "scale", "values", "grid"])?;
    let pointers = c.required(m, p, "parameter").and_then(|x| match x {
        Value::Array(_) => c.array_of(x, "/sweep/parameter", |c, y, q| {
            c.string(y, q).map(|s| (s.to_string(), q.to_string()))
        }),
        _ => c
            .string(x, "/sweep/parameter")
            .map(|s| vec![(s.to_string(), "/sweep/parameter".into())]),
    });
    if let Some(pointers) = &pointers {
        if pointers.is_empty() {
            c.fail("/sweep/parameter", "needs at least one pointer");
        }
        for (ptr, at) in pointers {
            if !ptr.starts_with('/') {
                c.fail(
                    at,
                    "must be a JSON pointer into the model params, e.g. \"/g\"",
                );
            }
        }
    }
    let scale = m.get("scale").map(|x| c.numbers(x, "/sweep/scale"));
    if let (Some(pointers), Some(Some(scale))) = (&pointers, &scale) {
        if scale.len() != pointers.len() {
            c.fail(
                "/sweep/scale",
                format!("expected {} factors, one per pointer", pointers.len()),
            );
        }
    }
    let values = match (m.get("values"), m.get("grid")) {
        (Some(x), None) => c.numbers(x, "/sweep/values").and_then(|vals| {
            if vals.is_empty() || vals.windows(2).any(|w| w[0] >= w[1]) {
                c.fail("/sweep/values", "must be nonempty and strictly increasing");
                None
            } else {
                Some(vals)
            }
        }),
        (None, Some(x)) => {
            let q = "/sweep/grid";
            let g = c.object(x, q, &["lo", "hi", "count"])?;
            let lo = c.req_number(g, q, "lo");
            let hi = c.req_number(g, q, "hi");
            let count = c
                .required(g, q, "count")
                .and_then(|n| c.count(n, "/sweep/grid/count"));
            match linear_grid(lo?, hi?, count?) {
                Ok(vals) => Some(vals),
                Err(e) => {
                    c.fail(q, e.to_string());
                    None
                }
            }
        }
        _ => {
            c.fail(p, "exactly one of 'values' and 'grid' is required");
            None
        }
    };
    let pointers = pointers?;
    let scale = match scale {
        None => vec![1.0; pointers.len()],
        Some(s) => s.filter(|s| s.len() == pointers.len())?,
    };
    Some(Sweep {
        targets: pointers
            .into_iter()
            .map(|(ptr, _)| ptr)
            .zip(scale)
            .collect(),
        values: values?,
    })
}

fn output_format(c: &mut Checker, top: &Map<String, Value>, command: Command) -> Format {
    let default = match command {
        Command::Simulate | Command::Analytic | Command::Scan => Format::Csv,
        _ => Format::Json,
    };
    let Some(v) = top.get("output") else {
        return default;
    };
    let Some(m) = c.object(v, "/output", &["format"]) else {
        return default;
    };
    let Some(f) = m
        .get("format")
        .and_then(|f| c.one_of(f, "/output/format", &["csv", "json"]))
    else {
        return default;
    };
    match (f, command) {
        ("csv", Command::Verify | Command::Stokes | Command::Dual) => {
            c.fail(
                "/output/format",
                format!("'{}' writes JSON only", command.name()),
            );
            default
        }
        ("csv", _) => Format::Csv,
        _ => Format::Json,
    }
}

fn source(c: &mut Checker, m: &Map<String, Value>, p: &str, default: Source) -> Option<Source> {
    match m.get("source") {
        None => Some(default),
        Some(v) => c
            .one_of(v, &child(p, "source"), &["analytic", "numeric"])
            .map(|s| {
                if s == "analytic" {
                    Source::Analytic
                } else {
                    Source::Numeric
                }
            }),
    }
}

fn indices(c: &mut Checker, v: &Value, p: &str) -> Option<CycleIndices> {
    let m = c.object(v, p, &["triple", "quad"])?;
    let list = |c: &mut Checker, key: &str, len: usize| -> Option<Vec<usize>> {
        let q = child(p, key);
        let idx = c
            .required(m, p, key)
            .and_then(|x| c.array_of(x, &q, |c, y, r| c.count(y, r)))?;
        if idx.len() != len {
            c.fail(q, format!("expected {len} state indices"));
            return None;
        }
        Some(idx)
    };
    let t = list(c, "triple", 3);
    let q = list(c, "quad", 4);
    let (t, q) = (t?, q?);
    Some(((t[0], t[1], t[2]), (q[0], q[1], q[2], q[3])))
}

fn verify_options(c: &mut Checker, v: Option<&Value>) -> Option<VerifyOptions> {
    let p = "/verify";
    let empty = Map::new();
    let m = match v {
        Some(v) => c.object(v, p, &["source", "checks", "tolerance", "indices"])?,
        None => &empty,
    };
    let source = source(c, m, p, Source::Numeric);
    let checks = match m.get("checks") {
        None => Some(vec![
            Check::Stochasticity,
            Check::BipartiteSymmetry,
            Check::TraceIdentity,
            Check::Hierarchy,
        ]),
        Some(x) => c.array_of(x, "/verify/checks", |c, y, q| {
            c.one_of(y, q, &Check::NAMES).map(Check::from_name)
        }),
    };
    let tolerance = m
        .get("tolerance")
        .map(|t| c.positive(t, "/verify/tolerance"));
    let indices = m.get("indices").map(|x| indices(c, x, "/verify/indices"));
    Some(VerifyOptions {
        source: source?,
        checks: checks?,
        tolerance: tolerance.map_or(Some(None), |t| t.map(Some))?,
        indices: indices.map_or(Some(None), |i| i.map(Some))?,
    })
}

fn dual_options(c: &mut Checker, v: Option<&Value>) -> Option<DualOptions> {
    let p = "/dual";
    let empty = Map::new();
    let m = match v {
        Some(v) => c.object(v, p, &["source", "initial"])?,
        None => &empty,
    };
    let source = source(c, m, p, Source::Analytic);
    let initial = m.get("initial").map(|x| {
        c.array_of(x, "/dual/initial", |c, y, q| {
            let n = c.number(y, q)?;
            if n < 0.0 {
                c.fail(q, "occupation must be nonnegative");
                return None;
            }
            Some(n)
        })
    });
    Some(DualOptions {
        source: source?,
        initial: initial.map_or(Some(None), |i| i.map(Some))?,
    })
}

fn scan_options(c: &mut Checker, v: Option<&Value>) -> Option<ScanOptions> {
    let p = "/scan";
    let empty = Map::new();
    let m = match v {
        Some(v) => c.object(v, p, &["indices", "refine", "search"])?,
        None => &empty,
    };
    let indices = m.get("indices").map(|x| indices(c, x, "/scan/indices"));
    let refine = match m.get("refine") {
        None => Some(RefineSettings::default()),
        Some(x) => {
            let q = "/scan/refine";
            let r = c.object(
                x,
                q,
                &["tolerance", "max_iterations", "window", "threshold"],
            )?;
            let d = RefineSettings::default();
            let pos = |c: &mut Checker, key: &str, default: f64| match r.get(key) {
                Some(y) => c.positive(y, &child(q, key)),
                None => Some(default),
            };
            let tolerance = pos(c, "tolerance", d.tolerance);
            let window = pos(c, "window", d.window);
            let threshold = pos(c, "threshold", d.threshold);
            let max_iterations = match r.get("max_iterations") {
                Some(y) => c.count(y, "/scan/refine/max_iterations"),
                None => Some(d.max_iterations),
            };
            Some(RefineSettings {
                tolerance: tolerance?,
                max_iterations: max_iterations?,
                window: window?,
                threshold: threshold?,
            })
        }
    };
    let search = match m.get("search") {
        None => Some(true),
        Some(x) => {
            let b = x.as_bool();
            if b.is_none() {
                c.fail("/scan/search", "expected a boolean");
            }
            b
        }
    };
    Some(ScanOptions {
        indices: indices.map_or(Some(None), |i| i.map(Some))?,
        refine: refine?,
        search: search?,
    })
}

//! JSON output records. Each type is the published schema of one output
//! file; unknown fields are rejected when reading them back.

use std::collections::BTreeMap;

use mlz_core::constraints::ConstraintReport;
use mlz_core::scanner::{CycleIndices, PointFlag, SweepResult, ZeroCandidate};
use mlz_core::{CMatrix, RMatrix};
use serde::{Deserialize, Serialize};

/// `None` for NaN or infinite values, which JSON cannot carry.
pub fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Complex matrix as separate row-major real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexMatrix {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&CMatrix> for ComplexMatrix {
    fn from(m: &CMatrix) -> Self {
        let rows = |f: fn(&mlz_core::Complex64) -> f64| {
            m.row_iter().map(|r| r.iter().map(f).collect()).collect()
        };
        Self {
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }
}

pub fn rows(m: &RMatrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Snapshot {
    pub t: f64,
    pub steps: usize,
    pub u: ComplexMatrix,
    pub p: Vec<Vec<f64>>,
    pub unitarity_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateRun {
    /// Swept parameter value, if any.
    pub value: Option<f64>,
    pub snapshots: Vec<Snapshot>,
    /// Largest snapshot-to-snapshot change of `P` over the later half of
    /// the schedule.
    pub convergence: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateOutput {
    pub family: String,
    pub parameter: Option<String>,
    pub runs: Vec<SimulateRun>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticRecord {
    pub value: Option<f64>,
    pub params: BTreeMap<String, f64>,
    pub p: Vec<Vec<f64>>,
    pub s: Option<ComplexMatrix>,
    pub stochasticity_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticOutput {
    pub family: String,
    pub parameter: Option<String>,
    pub solutions: Vec<AnalyticRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDetail {
    pub label: String,
    pub residual: Option<f64>,
}

/// One constraint check. `residual` is `null` when it could not be
/// evaluated, which counts as a failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub name: String,
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    pub details: Vec<ReportDetail>,
}

impl Report {
    pub fn new(name: &str, tolerance: f64, details: Vec<(String, f64)>) -> Self {
        let residual = details
            .iter()
            .try_fold(0.0f64, |m, d| finite(d.1).map(|r| m.max(r)));
        Self {
            name: name.to_string(),
            residual,
            tolerance,
            pass: residual.is_some_and(|r| r <= tolerance),
            details: details
                .into_iter()
                .map(|(label, r)| ReportDetail {
                    label,
                    residual: finite(r),
                })
                .collect(),
        }
    }
}

impl From<&ConstraintReport> for Report {
    fn from(r: &ConstraintReport) -> Self {
        let details = r
            .details
            .iter()
            .map(|d| (d.label.clone(), d.residual))
            .collect();
        Self::new(&r.name, r.tolerance, details)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StokesResiduals {
    /// `‖S₄S₃S₂S₁e^{2πη} − 1‖_max`.
    pub monodromy: f64,
    /// `‖S₂S₁e^{πη} − S‖_max`.
    pub reconstruction: f64,
}

/// Stokes matrices in slope order, steepest level first; `states[k]` is
/// the model index of row `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StokesOutput {
    pub family: String,
    pub states: Vec<usize>,
    pub eta: Vec<f64>,
    pub s1: ComplexMatrix,
    pub s2: ComplexMatrix,
    pub s3: ComplexMatrix,
    pub s4: ComplexMatrix,
    pub residuals: StokesResiduals,
}

/// Dual (bosonic) scattering in model order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualOutput {
    pub family: String,
    pub source: String,
    pub t_max: Option<f64>,
    /// `+1` on group 2, `−1` on group 1.
    pub signature: Vec<f64>,
    pub s_prime: ComplexMatrix,
    pub probabilities: Vec<Vec<f64>>,
    pub pseudo_unitarity_residual: f64,
    pub initial: Vec<f64>,
    pub populations: Vec<f64>,
    /// `|Σ_k σ_k (n_k,out − n_k,in)|`, zero when both groups gain equally.
    pub conservation_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Indices {
    pub triple: [usize; 3],
    pub quad: [usize; 4],
}

impl From<CycleIndices> for Indices {
    fn from(((a, b, c), (d, e, f, g)): CycleIndices) -> Self {
        Self {
            triple: [a, b, c],
            quad: [d, e, f, g],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanPoint {
    pub g: f64,
    pub r3: Option<f64>,
    pub r4: Option<f64>,
    /// `ok`, `degenerate`, or `failed: <reason>`.
    pub flag: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Candidate {
    pub g: f64,
    pub g3: f64,
    pub g4: f64,
    pub r3: f64,
    pub r4: f64,
    pub evaluations: usize,
}

impl From<ZeroCandidate> for Candidate {
    fn from(z: ZeroCandidate) -> Self {
        Self {
            g: z.g,
            g3: z.g3,
            g4: z.g4,
            r3: z.r3,
            r4: z.r4,
            evaluations: z.evaluations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanOutput {
    pub family: String,
    pub parameter: String,
    pub t_max: f64,
    pub indices: Option<Indices>,
    pub points: Vec<ScanPoint>,
    pub candidates: Vec<Candidate>,
}

impl ScanOutput {
    pub fn new(parameter: &str, sweep: &SweepResult, candidate: Option<ZeroCandidate>) -> Self {
        let points = sweep
            .points
            .iter()
            .map(|p| ScanPoint {
                g: p.g,
                r3: p.r3.and_then(finite),
                r4: p.r4.and_then(finite),
                flag: match &p.flag {
                    PointFlag::Ok => "ok".into(),
                    PointFlag::Degenerate => "degenerate".into(),
                    PointFlag::Failed(m) => format!("failed: {m}"),
                },
            })
            .collect();
        Self {
            family: sweep.family.clone(),
            parameter: parameter.to_string(),
            t_max: sweep.t_max,
            indices: sweep.indices.map(Indices::from),
            points,
            candidates: candidate.into_iter().map(Candidate::from).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_residual_fails_the_report() {
        let r = Report::new("x", 1.0, vec![("a".into(), 0.5), ("b".into(), f64::NAN)]);
        assert_eq!(r.residual, None);
        assert!(!r.pass);
        assert_eq!(r.details[1].residual, None);
    }

    #[test]
    fn report_round_trips_through_json() {
        let r = Report::new("x", 1e-2, vec![("a".into(), 1e-3)]);
        let text = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<Report>(&text).unwrap(), r);
        assert!(r.pass);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"{"re": [[1.0]], "im": [[0.0]], "abs": [[1.0]]}"#;
        assert!(serde_json::from_str::<ComplexMatrix>(text).is_err());
    }
}

//! Closed-form scattering data: hierarchy-constraint right-hand sides, the
//! algebraic bowtie solution, DTCM sectors, and the composite six-state and
//! five-state matrices.
//!
//! DTCM matrices use the builder's index order, lowest slope first. Bowtie
//! outputs are ordered by descending slope; `states` maps rows back to model
//! indices.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, stochasticity_residual, CMatrix, RMatrix};
use crate::model::{
    five_state_couplings, permute_matrix, sort_by_slope, BipartiteStructure, MlzModel,
};

/// Which end of the slope-sorted spectrum a hierarchy constraint starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Steepest level first.
    #[default]
    Leading,
    /// Lowest-slope level first.
    Trailing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticSolution {
    pub p: RMatrix,
    /// Amplitudes in the gauge with removable phases set to zero.
    pub s: Option<CMatrix>,
    /// Real diagonal amplitudes, where known without the full matrix.
    pub diagonal: Option<Vec<f64>>,
    pub params: BTreeMap<String, f64>,
    /// Model index of each row.
    pub states: Vec<usize>,
}

impl AnalyticSolution {
    fn new(p: RMatrix, params: BTreeMap<String, f64>) -> Self {
        let states = (0..p.nrows()).collect();
        Self {
            p,
            s: None,
            diagonal: None,
            params,
            states,
        }
    }

    pub fn n(&self) -> usize {
        self.p.nrows()
    }

    pub fn stochasticity_residual(&self) -> f64 {
        stochasticity_residual(&self.p)
    }

    pub fn symmetry_residual(&self) -> f64 {
        (&self.p - self.p.transpose())
            .iter()
            .fold(0.0, |m: f64, x| m.max(x.abs()))
    }

    pub fn min_entry(&self) -> f64 {
        self.p.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `P` reindexed to the model's own state order.
    pub fn p_in_model_order(&self) -> RMatrix {
        let inv = crate::model::invert_permutation(&self.states);
        permute_matrix(&self.p, &inv)
    }
}

fn params<const K: usize>(entries: [(&str, f64); K]) -> BTreeMap<String, f64> {
    entries.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn symmetric_from_upper(n: usize, upper: impl Fn(usize, usize) -> f64) -> RMatrix {
    RMatrix::from_fn(n, n, |i, j| if i <= j { upper(i, j) } else { upper(j, i) })
}

/// Survival amplitude of the steepest (or, trailing, the lowest-slope) level.
pub fn be_formula(model: &MlzModel, orientation: Orientation) -> f64 {
    hc_rhs(model, 1, orientation).expect("order 1 is always valid")
}

/// Right-hand side of the order-`m` hierarchy constraint: the determinant
/// of the leading (or trailing) `m×m` block of `S` in slope-descending order.
pub fn hc_rhs(model: &MlzModel, m: usize, orientation: Orientation) -> Result<f64> {
    let n = model.n();
    if m == 0 || m >= n {
        return Err(Error::InvalidParameter(format!(
            "hierarchy order {m} outside 1..={}",
            n - 1
        )));
    }
    let (sorted, _) = sort_by_slope(model);
    let beta = sorted.beta();
    let (inner, outer): (Vec<usize>, Vec<usize>) = match orientation {
        Orientation::Leading => ((0..m).collect(), (m..n).collect()),
        Orientation::Trailing => ((n - m..n).collect(), (0..n - m).collect()),
    };
    let mut exponent = 0.0;
    for &r in &inner {
        for &k in &outer {
            exponent += sorted.coupling(k, r).norm_sqr() / (beta[r] - beta[k]).abs();
        }
    }
    Ok((-PI * exponent).exp())
}

/// `P₂₂` implied by `P₁₂` through the second-order hierarchy constraint of
/// a bipartite model. Trailing orientation relates the two lowest-slope
/// levels instead.
pub fn hc2_relation(
    model: &MlzModel,
    bipartition: &BipartiteStructure,
    p12: f64,
    orientation: Orientation,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&p12) {
        return Err(Error::InvalidParameter(format!(
            "p12 = {p12} outside [0, 1]"
        )));
    }
    if !bipartition.is_valid_for(model) {
        return Err(Error::InvalidParameter(
            "bipartition does not match the model".into(),
        ));
    }
    let (sorted, perm) = sort_by_slope(model);
    let n = sorted.n();
    let (a, b) = match orientation {
        Orientation::Leading => (perm[0], perm[1]),
        Orientation::Trailing => (perm[n - 1], perm[n - 2]),
    };
    let s11 = be_formula(model, orientation);
    let rhs2 = hc_rhs(model, 2.min(n - 1), orientation)?;
    let s22 = (bipartition.parity(a, b) * p12 + rhs2) / s11;
    Ok(s22 * s22)
}

/// Algebraic bowtie solution `α = 1 − 2vvᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BowtieSolution {
    /// Model index of the central level.
    pub center: usize,
    /// Positive components in slope-descending order.
    pub v: Vec<f64>,
    pub alpha: RMatrix,
    /// Bipartition in slope-descending order, centre in group 1.
    pub bipartition: BipartiteStructure,
    pub solution: AnalyticSolution,
}

/// Finds the level that every nonzero coupling touches, lowest index first.
pub fn bowtie_center(model: &MlzModel) -> Result<usize> {
    let edges = model.edges();
    if edges.is_empty() {
        return Ok(0);
    }
    (0..model.n())
        .find(|&k| edges.iter().all(|&(i, j)| i == k || j == k))
        .ok_or_else(|| {
            Error::InvalidParameter("couplings do not form a star around one level".into())
        })
}

pub fn bowtie_alpha(model: &MlzModel) -> Result<BowtieSolution> {
    let center = bowtie_center(model)?;
    bowtie_alpha_with_center(model, center)
}

pub fn bowtie_alpha_with_center(model: &MlzModel, center: usize) -> Result<BowtieSolution> {
    let n = model.n();
    if center >= n {
        return Err(Error::IndexError(format!("centre {center} out of range")));
    }
    if model
        .edges()
        .iter()
        .any(|&(i, j)| i != center && j != center)
    {
        return Err(Error::InvalidParameter(format!(
            "level {center} is not the centre of a bowtie"
        )));
    }
    let beta = model.beta();
    let b0 = beta[center];
    let p: Vec<f64> = (0..n)
        .map(|j| {
            if j == center {
                1.0
            } else {
                (-PI * model.coupling(center, j).norm_sqr() / (b0 - beta[j]).abs()).exp()
            }
        })
        .collect();
    let above = |j: usize| j != center && beta[j] > b0;
    let below = |j: usize| j != center && beta[j] < b0;
    let prod =
        |pred: &dyn Fn(usize) -> bool| (0..n).filter(|&k| pred(k)).map(|k| p[k]).product::<f64>();

    let mut two_v2 = vec![0.0; n];
    for j in 0..n {
        two_v2[j] = if j == center {
            prod(&above) + prod(&below)
        } else if above(j) {
            (1.0 - p[j]) * prod(&|k| above(k) && beta[k] > beta[j])
        } else {
            (1.0 - p[j]) * prod(&|k| below(k) && beta[k] < beta[j])
        };
    }

    let (_, perm) = sort_by_slope(model);
    let v: Vec<f64> = perm.iter().map(|&k| (0.5 * two_v2[k]).sqrt()).collect();
    let alpha = RMatrix::from_fn(n, n, |a, b| {
        let delta = if a == b { 1.0 } else { 0.0 };
        delta - 2.0 * v[a] * v[b]
    });
    let groups = perm
        .iter()
        .map(|&k| if k == center { 1 } else { 2 })
        .collect();
    let bipartition = BipartiteStructure::from_groups(groups)?;
    let s = CMatrix::from_fn(n, n, |a, b| bipartition.phase(a, b) * alpha[(a, b)]);
    let probabilities = alpha.map(|x| x * x);

    let mut record = BTreeMap::new();
    for (k, &pk) in p.iter().enumerate() {
        if k != center {
            record.insert(format!("p_{k}"), pk);
            record.insert(format!("q_{k}"), 1.0 - pk);
        }
    }
    let solution = AnalyticSolution {
        p: probabilities,
        s: Some(s),
        diagonal: None,
        params: record,
        states: perm,
    };
    Ok(BowtieSolution {
        center,
        v,
        alpha,
        bipartition,
        solution,
    })
}

/// Three-state bowtie amplitudes in slope order `(β₁, β₂, 0)`.
pub fn bowtie3_amplitudes(p1: f64, p2: f64) -> CMatrix {
    let (q1, q2) = (1.0 - p1, 1.0 - p2);
    let s12 = -(p1 * q1 * q2).sqrt();
    let s13 = c(0.0, (q1 * (1.0 + p1 * p2)).sqrt());
    let s23 = c(0.0, (p1 * q2 * (1.0 + p1 * p2)).sqrt());
    CMatrix::from_row_slice(
        3,
        3,
        &[
            c(p1, 0.0),
            c(s12, 0.0),
            s13,
            c(s12, 0.0),
            c(1.0 - p1 + p1 * p2, 0.0),
            s23,
            -s13.conj(),
            -s23.conj(),
            c(p1 * p2, 0.0),
        ],
    )
}

/// Exact three-state bowtie with outer slopes `β₁ > β₂ > 0` around a flat
/// central level.
pub fn bowtie3_scattering(beta1: f64, beta2: f64, g1: f64, g2: f64) -> Result<AnalyticSolution> {
    if !(beta1 > beta2 && beta2 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "bowtie needs β₁ > β₂ > 0, got ({beta1}, {beta2})"
        )));
    }
    let p1 = (-PI * g1 * g1 / beta1).exp();
    let p2 = (-PI * g2 * g2 / beta2).exp();
    let s = bowtie3_amplitudes(p1, p2);
    let mut sol = AnalyticSolution::new(
        s.map(|z| z.norm_sqr()),
        params([
            ("p_1", p1),
            ("p_2", p2),
            ("q_1", 1.0 - p1),
            ("q_2", 1.0 - p2),
        ]),
    );
    sol.s = Some(s);
    Ok(sol)
}

/// Extremal-level DTCM quantities, levels counted from the lowest slope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DtcmExtremal {
    pub x: f64,
    pub a: f64,
    pub s11_sq: f64,
    pub s12_sq: f64,
    pub s1n_sq: f64,
    pub snn_sq: f64,
    pub sn_nm1_sq: f64,
    /// Available for `N_B = 0` only.
    pub s22: Option<f64>,
    pub snm1_nm1: Option<f64>,
}

pub fn dtcm_extremal(n_states: usize, g: f64, n_b: f64) -> Result<DtcmExtremal> {
    if n_states < 2 {
        return Err(Error::InvalidParameter(format!(
            "DTCM needs at least two states, got {n_states}"
        )));
    }
    if !(n_b > -1.0) {
        return Err(Error::InvalidParameter(format!(
            "N_B = {n_b} must exceed -1"
        )));
    }
    let two_s = n_states - 1;
    let s = two_s as f64 / 2.0;
    let a = (-2.0 * PI * g * g * n_b).exp();
    let x = (-2.0 * PI * g * g).exp();
    let p = |k: usize| a * x.powi(k as i32);
    let q = |k: usize| 1.0 - p(k);
    let q_binomial = |hi: f64, lo: f64| -> f64 {
        (0..two_s)
            .map(|k| hi.powi((two_s - 1 - k) as i32) * lo.powi(k as i32))
            .sum()
    };
    let (s22, snm1_nm1) = if n_b == 0.0 {
        (
            Some(x.powf(3.0 * s - 2.0) - x.powf(s - 1.0) * (1.0 - x.powf(2.0 * s))),
            Some(
                x.powf(1.0 + 2.0 * s * (s - 2.0))
                    * (1.0 - (x.powf(2.0 * s) - 1.0).powi(2) / (1.0 - x)),
            ),
        )
    } else {
        (None, None)
    };
    Ok(DtcmExtremal {
        x,
        a,
        s11_sq: p(1).powi(two_s as i32),
        s12_sq: q(1) * q_binomial(p(1), p(2)),
        s1n_sq: (1..=two_s).map(q).product(),
        snn_sq: p(two_s).powi(two_s as i32),
        sn_nm1_sq: q(two_s) * q_binomial(p(two_s), p(two_s - 1)),
        s22,
        snm1_nm1,
    })
}

fn dtcm_x(g: f64) -> f64 {
    (-2.0 * PI * g * g).exp()
}

fn check_x(x: f64) -> Result<()> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::InvalidParameter(format!("x = {x} outside (0, 1]")));
    }
    Ok(())
}

/// Four-state DTCM (`S = 3/2`, `N_B = 0`) at coupling `g`.
pub fn dtcm4_probabilities(g: f64) -> AnalyticSolution {
    dtcm4_from_x(dtcm_x(g)).expect("x from a real coupling lies in (0, 1]")
}

pub fn dtcm4_from_x(x: f64) -> Result<AnalyticSolution> {
    check_x(x)?;
    let (x2, x3) = (x * x, x * x * x);
    let r = x3 + x2 + x - 1.0;
    let tri = 1.0 + x + x2;
    let upper = [
        [
            x3,
            x2 * (1.0 - x3),
            x * (1.0 + x) * (1.0 - x).powi(2) * tri,
            (1.0 - x).powi(3) * (1.0 + x) * tri,
        ],
        [
            0.0,
            x * (x3 + x2 - 1.0).powi(2),
            (1.0 - x2) * r * r,
            x * (1.0 + x) * (1.0 - x3).powi(2),
        ],
        [
            0.0,
            0.0,
            x * (x * r - 1.0).powi(2),
            x.powi(4) * (1.0 - x) * tri * tri,
        ],
        [0.0, 0.0, 0.0, x.powi(9)],
    ];
    let sx = x.sqrt();
    let mut sol = AnalyticSolution::new(
        symmetric_from_upper(4, |i, j| upper[i][j]),
        params([("x", x)]),
    );
    sol.diagonal = Some(vec![
        x * sx,
        sx * (x3 + x2 - 1.0),
        sx * (x.powi(4) + x3 + x2 - x - 1.0),
        x.powi(4) * sx,
    ]);
    Ok(sol)
}

fn poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Five-state DTCM (`S = 2`, `N_B = 0`) at coupling `g`.
pub fn dtcm5_probabilities(g: f64) -> AnalyticSolution {
    dtcm5_from_x(dtcm_x(g)).expect("x from a real coupling lies in (0, 1]")
}

pub fn dtcm5_from_x(x: f64) -> Result<AnalyticSolution> {
    check_x(x)?;
    let xp = |k: i32| x.powi(k);
    let (m1, m2, m3, m4) = (1.0 - x, 1.0 - xp(2), 1.0 - xp(3), 1.0 - xp(4));
    let diagonal = vec![
        xp(2),
        x * (-1.0 + xp(3) + xp(4)),
        poly(&[1.0, -1.0, -2.0, -1.0, 0.0, 2.0, 1.0, 1.0], x),
        xp(2) * poly(&[-1.0, -1.0, -1.0, 1.0, 1.0, 1.0, 1.0], x),
        xp(8),
    ];
    let p23 = poly(
        &[0., 1., 0., -2., -3., -1., 4., 5., 3., -1., -3., -2., -1.],
        x,
    );
    let p24 = poly(
        &[1., -2., -2., 1., 4., 6., 0., -4., -6., -4., 1., 2., 2., 1.],
        x,
    );
    let p34 = poly(
        &[
            0., 1., 2., 0., -4., -7., -4., 3., 8., 9., 4., -1., -4., -4., -2., -1.,
        ],
        x,
    );
    let d = &diagonal;
    let upper = [
        [
            xp(4),
            xp(3) * m4,
            xp(2) * m3 * m4,
            x * m2 * m3 * m4,
            m1 * m2 * m3 * m4,
        ],
        [
            0.0,
            d[1] * d[1],
            p23,
            p24,
            x * m2 * m3 * m4 * (1.0 + x + xp(2) + xp(3)),
        ],
        [
            0.0,
            0.0,
            d[2] * d[2],
            p34,
            xp(4) * m3 * m4 * (1.0 + xp(2)) * (1.0 + x + xp(2)),
        ],
        [
            0.0,
            0.0,
            0.0,
            d[3] * d[3],
            xp(9) * m4 * (1.0 + x + xp(2) + xp(3)),
        ],
        [0.0, 0.0, 0.0, 0.0, xp(16)],
    ];
    let mut sol = AnalyticSolution::new(
        symmetric_from_upper(5, |i, j| upper[i][j]),
        params([("x", x)]),
    );
    sol.diagonal = Some(diagonal);
    Ok(sol)
}

struct SixStateParams {
    p1: f64,
    p2: f64,
    p3: f64,
}

fn six_state_params(
    beta1: f64,
    beta2: f64,
    beta3: f64,
    g12: f64,
    g13: f64,
    g23: f64,
) -> Result<SixStateParams> {
    if !(beta1 > beta2 && beta2 > beta3 && beta3 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "six-state model needs β₁ > β₂ > β₃ > 0, got ({beta1}, {beta2}, {beta3})"
        )));
    }
    Ok(SixStateParams {
        p1: (-PI * g12 * g12 / (beta1 + beta2)).exp(),
        p2: (-PI * g13 * g13 / (beta1 + beta3)).exp(),
        p3: (-PI * g23 * g23 / (beta2 + beta3)).exp(),
    })
}

fn six_state_record(k: &SixStateParams) -> BTreeMap<String, f64> {
    params([
        ("p_1", k.p1),
        ("p_2", k.p2),
        ("p_3", k.p3),
        ("q_1", 1.0 - k.p1),
        ("q_2", 1.0 - k.p2),
        ("q_3", 1.0 - k.p3),
        ("p", 1.0 + k.p1 * k.p2 * k.p3),
    ])
}

/// Four-state bowtie sector of the composite model, basis
/// `(|0⟩, |12⟩, |13⟩, |23⟩)`.
pub fn four_state_bowtie_sector(
    beta1: f64,
    beta2: f64,
    beta3: f64,
    g12: f64,
    g13: f64,
    g23: f64,
) -> Result<AnalyticSolution> {
    let k = six_state_params(beta1, beta2, beta3, g12, g13, g23)?;
    let (p1, p2, p3) = (k.p1, k.p2, k.p3);
    let (q1, q2, q3) = (1.0 - p1, 1.0 - p2, 1.0 - p3);
    let p = 1.0 + p1 * p2 * p3;
    let upper = [
        [
            (p1 * p2 * p3).powi(2),
            p * q1,
            p * p1 * q2,
            p * p1 * p2 * q3,
        ],
        [0.0, p1 * p1, p1 * q1 * q2, p1 * p2 * q1 * q3],
        [0.0, 0.0, (1.0 - p1 * q2).powi(2), p1 * p1 * p2 * q2 * q3],
        [0.0, 0.0, 0.0, (1.0 - p1 * p2 * q3).powi(2)],
    ];
    Ok(AnalyticSolution::new(
        symmetric_from_upper(4, |i, j| upper[i][j]),
        six_state_record(&k),
    ))
}

/// Six-state composite model, levels `(β₁, β₂, β₃, −β₃, −β₂, −β₁)`.
pub fn six_state_probabilities(
    beta1: f64,
    beta2: f64,
    beta3: f64,
    g12: f64,
    g13: f64,
    g23: f64,
) -> Result<AnalyticSolution> {
    let k = six_state_params(beta1, beta2, beta3, g12, g13, g23)?;
    let (p1, p2, p3) = (k.p1, k.p2, k.p3);
    let (q1, q2, q3) = (1.0 - p1, 1.0 - p2, 1.0 - p3);
    let p = 1.0 + p1 * p2 * p3;
    // Upper triangle of the first three rows; the lower-right block mirrors
    // the upper-left one through the antidiagonal.
    let a = p1 * p1 * p2 * p2;
    let b = p1 * p1 * p2 * q2 * q3;
    let cc = p1 * p2 * q1 * q3;
    let d = p * p1 * q2;
    let e = p * q1;
    let f = p1 * p1 * (1.0 - p2 * q3).powi(2);
    let g = p1 * q1 * q2;
    let h = p * p1 * p2 * q3;
    let m = (p - p1).powi(2);
    let rows = [
        [a, b, cc, d, e, 0.0],
        [b, f, g, h, 0.0, e],
        [cc, g, m, 0.0, h, d],
        [d, h, 0.0, m, g, cc],
        [e, 0.0, h, g, f, b],
        [0.0, e, d, cc, b, a],
    ];
    Ok(AnalyticSolution::new(
        RMatrix::from_fn(6, 6, |i, j| rows[i][j]),
        six_state_record(&k),
    ))
}

/// Maps a sign pattern onto one of the three printed phases, using that a
/// global flip of all `τ` is a gauge transformation of level 2.
fn five_state_phase(taus: [i8; 3]) -> Result<usize> {
    let t = if taus[0] < 0 { taus.map(|x| -x) } else { taus };
    match t {
        [1, 1, 1] => Ok(0),
        [1, 1, -1] => Ok(1),
        [1, -1, -1] => Ok(2),
        _ => Err(Error::UnsupportedSignPattern(taus)),
    }
}

/// Five-state bipartite model, levels `(b, −b, b₃, b₄, b₅)`.
pub fn five_state_probabilities(
    b: f64,
    b3: f64,
    b4: f64,
    b5: f64,
    g13: f64,
    g14: f64,
    taus: [i8; 3],
) -> Result<AnalyticSolution> {
    five_state_couplings(b, b3, b4, b5, g13, g14, taus)?;
    let phase = five_state_phase(taus)?;
    let p3 = (-2.0 * PI * g13 * g13 / (b - b3).abs()).exp();
    let p4 = (-2.0 * PI * g14 * g14 / (b - b4).abs()).exp();
    let p5 = p3 * p4;
    let (q3, q4, q5) = (1.0 - p3, 1.0 - p4, 1.0 - p5);
    let d = p3 * p3 * p4 * p4;
    let rows: [[f64; 5]; 5] = match phase {
        0 => [
            [d, q5 * q5, p3 * p4 * q3, p3 * p3 * p4 * q4, p3 * p4 * q5],
            [q5 * q5, d, p3 * p4 * q3, p3 * p3 * p4 * q4, p3 * p4 * q5],
            [p3 * p4 * q3, p3 * p4 * q3, p3 * p3, p3 * q3 * q4, q3 * q5],
            [
                p3 * p3 * p4 * q4,
                p3 * p3 * p4 * q4,
                p3 * q3 * q4,
                (p4 + q3 * q4).powi(2),
                p3 * q4 * q5,
            ],
            [p3 * p4 * q5, p3 * p4 * q5, q3 * q5, p3 * q4 * q5, d],
        ],
        1 => [
            [d, 0.0, p3 * p4 * q3, p3 * p3 * p4 * q4, q5],
            [0.0, d, q3, p3 * q4, p3 * p4 * q5],
            [p3 * p4 * q3, q3, p3 * p3, p3 * q3 * q4, 0.0],
            [
                p3 * p3 * p4 * q4,
                p3 * q4,
                p3 * q3 * q4,
                (p4 + q3 * q4).powi(2),
                0.0,
            ],
            [q5, p3 * p4 * q5, 0.0, 0.0, d],
        ],
        _ => [
            [
                (p3 * p4 - q3 * q4).powi(2),
                p3 * q4 * q4,
                p3 * q3,
                p4 * q4,
                p4 * q5,
            ],
            [p3 * q4 * q4, d, q3, p3 * p4 * q4, p3 * p4 * q5],
            [p3 * q3, q3, p3 * p3, 0.0, 0.0],
            [p4 * q4, p3 * p4 * q4, 0.0, p4 * p4, q4 * q5],
            [p4 * q5, p3 * p4 * q5, 0.0, q4 * q5, d],
        ],
    };
    Ok(AnalyticSolution::new(
        RMatrix::from_fn(5, 5, |i, j| rows[i][j]),
        params([
            ("p_3", p3),
            ("p_4", p4),
            ("p_5", p5),
            ("tau_3", f64::from(taus[0])),
            ("tau_4", f64::from(taus[1])),
            ("tau_5", f64::from(taus[2])),
            ("phase", phase as f64),
        ]),
    ))
}

//! Stokes matrices of the scattering problem, their mirrored counterparts
//! for bipartite models, and the scattering matrix of the dual bosonic model.
//!
//! All matrices here are in slope-descending order.

use std::f64::consts::PI;

use nalgebra::DVector;

use crate::analytic::bowtie3_amplitudes;
use crate::constraints::{ConstraintReport, Detail};
use crate::error::{Error, Result};
use crate::linalg::{c, max_abs, pseudo_unitarity_residual, CMatrix, I};
use crate::model::{eta, permute_matrix, sort_by_slope, BipartiteStructure, EtaVector, MlzModel};

#[derive(Debug, Clone, PartialEq)]
pub struct StokesSet {
    /// Unit lower triangular, entries `x_ij` with `i > j`.
    pub s1: CMatrix,
    /// Unit upper triangular, entries `x_ij` with `i < j`.
    pub s2: CMatrix,
    /// Unit lower triangular, entries `y_ij`.
    pub s3: CMatrix,
    /// Unit upper triangular, entries `y_ij`.
    pub s4: CMatrix,
    pub eta: EtaVector,
    /// Model index of each row.
    pub states: Vec<usize>,
}

fn exp_eta(eta: &EtaVector, scale: f64) -> CMatrix {
    let d = eta.exp_pi(scale);
    CMatrix::from_diagonal(&DVector::from_iterator(
        d.len(),
        d.into_iter().map(|x| c(x, 0.0)),
    ))
}

impl StokesSet {
    pub fn n(&self) -> usize {
        self.s1.nrows()
    }

    /// `S₂S₁e^{πη}`.
    pub fn scattering(&self) -> CMatrix {
        &self.s2 * &self.s1 * exp_eta(&self.eta, 1.0)
    }

    /// `S₄S₃S₂S₁e^{2πη}`, the identity for a consistent set.
    pub fn monodromy(&self) -> CMatrix {
        &self.s4 * &self.s3 * &self.s2 * &self.s1 * exp_eta(&self.eta, 2.0)
    }
}

fn check_len(n: usize, found: usize) -> Result<()> {
    if n != found {
        return Err(Error::DimensionMismatch { expected: n, found });
    }
    Ok(())
}

/// Splits `S e^{−πη} = S₂S₁` into unit upper and unit lower factors, shell by
/// shell from the last row and column inward. Each shell's diagonal entry
/// must equal one to within `tolerance`.
pub fn factor_scattering(
    s: &CMatrix,
    eta: &EtaVector,
    tolerance: f64,
) -> Result<(CMatrix, CMatrix)> {
    let n = eta.values().len();
    check_len(n, s.nrows())?;
    check_len(n, s.ncols())?;
    if s.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Singular);
    }
    let mut rest = s * exp_eta(eta, -1.0);
    let mut lower = CMatrix::identity(n, n);
    let mut upper = CMatrix::identity(n, n);
    for m in (0..n).rev() {
        let residual = (rest[(m, m)] - c(1.0, 0.0)).norm();
        if residual > tolerance {
            return Err(Error::DiagonalConditionViolated { index: m, residual });
        }
        for j in 0..m {
            lower[(m, j)] = rest[(m, j)];
            upper[(j, m)] = rest[(j, m)];
        }
        for i in 0..m {
            for j in 0..m {
                let update = upper[(i, m)] * lower[(m, j)];
                rest[(i, j)] -= update;
            }
        }
    }
    Ok((lower, upper))
}

/// `y_ij = (−1)^{f_i+f_j} e^{π(η_j−η_i)} x_ij`.
pub fn mirror_stokes(
    s1: &CMatrix,
    s2: &CMatrix,
    eta: &EtaVector,
    bip: &BipartiteStructure,
) -> Result<(CMatrix, CMatrix)> {
    let n = bip.n();
    for m in [s1, s2] {
        check_len(n, m.nrows())?;
        check_len(n, m.ncols())?;
    }
    check_len(n, eta.values().len())?;
    let e = eta.values();
    let mirror = |x: &CMatrix| {
        CMatrix::from_fn(n, n, |i, j| {
            x[(i, j)] * bip.parity(i, j) * (PI * (e[j] - e[i])).exp()
        })
    };
    Ok((mirror(s1), mirror(s2)))
}

pub fn check_monodromy(set: &StokesSet, tolerance: f64) -> ConstraintReport {
    let n = set.n();
    let residual = max_abs(&(set.monodromy() - CMatrix::identity(n, n)));
    ConstraintReport::new(
        "monodromy",
        tolerance,
        vec![Detail {
            label: "S4 S3 S2 S1 exp(2 pi eta) - 1".into(),
            residual,
        }],
    )
}

/// Full Stokes set of a bipartite model from its scattering matrix in model
/// order.
pub fn stokes_from_scattering(
    s: &CMatrix,
    model: &MlzModel,
    bip: &BipartiteStructure,
    tolerance: f64,
) -> Result<StokesSet> {
    check_len(model.n(), bip.n())?;
    check_len(model.n(), s.nrows())?;
    let (sorted, perm) = sort_by_slope(model);
    let eta = eta(&sorted);
    let s_sorted = permute_matrix(s, &perm);
    let bip_sorted = bip.permuted(&perm);
    let (s1, s2) = factor_scattering(&s_sorted, &eta, tolerance)?;
    let (s3, s4) = mirror_stokes(&s1, &s2, &eta, &bip_sorted)?;
    Ok(StokesSet {
        s1,
        s2,
        s3,
        s4,
        eta,
        states: perm,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualScattering {
    pub s_prime: CMatrix,
    /// `+1` on group 2, `−1` on group 1.
    pub signature: Vec<f64>,
    pub states: Vec<usize>,
}

impl DualScattering {
    /// `‖S′ΣS′† − Σ‖_max`.
    pub fn pseudo_unitarity_residual(&self) -> f64 {
        pseudo_unitarity_residual(&self.s_prime, &self.signature)
    }

    pub fn probabilities(&self) -> crate::linalg::RMatrix {
        crate::linalg::probabilities(&self.s_prime)
    }
}

/// `S′ = e^{πη/2} S₃ S₂ e^{πη/2}`, with `bip` in the same order as the set.
pub fn dual_scattering(set: &StokesSet, bip: &BipartiteStructure) -> Result<DualScattering> {
    check_len(set.n(), bip.n())?;
    let half = exp_eta(&set.eta, 0.5);
    Ok(DualScattering {
        s_prime: &half * &set.s3 * &set.s2 * &half,
        signature: bip.signature(),
        states: set.states.clone(),
    })
}

/// Mean final occupations of the bosonic modes for number-state input.
pub fn condensate_populations(dual: &DualScattering, initial: &[f64]) -> Result<Vec<f64>> {
    let n = dual.signature.len();
    check_len(n, initial.len())?;
    if let Some(bad) = initial.iter().find(|&&x| !(x >= 0.0 && x.is_finite())) {
        return Err(Error::InvalidParameter(format!(
            "occupation {bad} must be finite and nonnegative"
        )));
    }
    let p = dual.probabilities();
    Ok((0..n)
        .map(|k| {
            (0..n)
                .map(|j| {
                    let same = dual.signature[k] == dual.signature[j];
                    let weight = if same { initial[j] } else { initial[j] + 1.0 };
                    weight * p[(k, j)]
                })
                .sum()
        })
        .collect())
}

fn check_bowtie3(beta1: f64, beta2: f64) -> Result<()> {
    if !(beta1 > beta2 && beta2 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "bowtie needs β₁ > β₂ > 0, got ({beta1}, {beta2})"
        )));
    }
    Ok(())
}

/// Closed-form Stokes matrices of the three-state bowtie, order `(β₁, β₂, 0)`.
pub fn bowtie3_stokes(beta1: f64, beta2: f64, g1: f64, g2: f64) -> Result<StokesSet> {
    check_bowtie3(beta1, beta2)?;
    let (e1, e2) = (g1 * g1 / beta1, g2 * g2 / beta2);
    let (p1, p2) = ((-PI * e1).exp(), (-PI * e2).exp());
    let s = bowtie3_amplitudes(p1, p2);
    let (s12, s13, s23) = (s[(0, 1)], s[(0, 2)], s[(1, 2)]);
    let one = c(1.0, 0.0);
    let zero = c(0.0, 0.0);
    let pp = p1 * p2;

    let s1 = CMatrix::from_row_slice(
        3,
        3,
        &[
            one,
            zero,
            zero,
            s12.conj() * p1 + s23 * s13.conj() / p2,
            one,
            zero,
            -s13.conj() * p1,
            -s23.conj() * p2,
            one,
        ],
    );
    let s2 = CMatrix::from_row_slice(
        3,
        3,
        &[
            one,
            s12 * p2 + s13 * s23.conj() / p1,
            s13 / pp,
            zero,
            one,
            s23 / pp,
            zero,
            zero,
            one,
        ],
    );
    let s3 = CMatrix::from_row_slice(
        3,
        3,
        &[
            one,
            zero,
            zero,
            s12.conj() * p2 + s23 * s13.conj() / p1,
            one,
            zero,
            s13.conj() / pp,
            s23.conj() / pp,
            one,
        ],
    );
    let s4 = CMatrix::from_row_slice(
        3,
        3,
        &[
            one,
            s12 * p1 + s13 * s23.conj() / p2,
            -s13 * p1,
            zero,
            one,
            -s23 * p2,
            zero,
            zero,
            one,
        ],
    );
    Ok(StokesSet {
        s1,
        s2,
        s3,
        s4,
        eta: EtaVector::from(vec![e1, e2, -e1 - e2]),
        states: vec![1, 2, 0],
    })
}

/// Closed-form scattering matrix of the dual model of the three-state
/// bowtie, order `(β₁, β₂, 0)`.
pub fn bowtie3_dual_amplitudes(p1: f64, p2: f64) -> CMatrix {
    let (q1, q2) = (1.0 - p1, 1.0 - p2);
    let pp = p1 * p2;
    let s12 = c((q1 * q2 / p2).sqrt() / p1, 0.0);
    let s13 = I * ((q1 * (1.0 + pp) / p2).sqrt() / p1);
    let s23 = I * ((q2 * (1.0 + pp)).sqrt() / pp);
    CMatrix::from_row_slice(
        3,
        3,
        &[
            c(1.0 / p1, 0.0),
            s12,
            s13,
            s12,
            c(1.0 / pp - q1 / p1, 0.0),
            s23,
            -s13,
            -s23,
            c(1.0 / pp, 0.0),
        ],
    )
}

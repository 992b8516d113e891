//! Checks of the identities obeyed by scattering matrices of bipartite
//! single-crossing models, and extraction of the real matrix `α`.

use std::collections::VecDeque;

use serde::Serialize;

use crate::analytic::{hc_rhs, Orientation};
use crate::error::{Error, Result};
use crate::linalg::{c, leading_minor, trailing_minor, CMatrix, RMatrix};
use crate::model::{permute_matrix, sort_by_slope, BipartiteStructure, MlzModel};
use crate::propagate::{cycle3, cycle4};

/// Tolerance for closed-form inputs.
pub const ANALYTIC_TOLERANCE: f64 = 1e-10;
/// Default tolerance for finite-time numerical inputs.
pub const NUMERIC_TOLERANCE: f64 = 1e-2;
/// Amplitudes below this magnitude do not fix a gauge phase.
pub const GAUGE_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Detail {
    pub label: String,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintReport {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub details: Vec<Detail>,
}

impl ConstraintReport {
    pub(crate) fn new(name: impl Into<String>, tolerance: f64, details: Vec<Detail>) -> Self {
        let residual = details.iter().map(|d| d.residual).fold(0.0, f64::max);
        let residual = if details.iter().any(|d| d.residual.is_nan()) {
            f64::NAN
        } else {
            residual
        };
        Self {
            name: name.into(),
            residual,
            tolerance,
            pass: residual <= tolerance,
            details,
        }
    }
}

fn check_square(s: &CMatrix, n: usize) -> Result<()> {
    if !s.is_square() {
        return Err(Error::DimensionMismatch {
            expected: s.nrows(),
            found: s.ncols(),
        });
    }
    if s.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: s.nrows(),
        });
    }
    Ok(())
}

/// `S_nm = (−1)^{f_n+f_m} S*_mn` and real diagonal.
pub fn check_bipartite_symmetry(
    s: &CMatrix,
    bip: &BipartiteStructure,
    tolerance: f64,
) -> Result<ConstraintReport> {
    let n = bip.n();
    check_square(s, n)?;
    let mut details = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        details.push(Detail {
            label: format!("Im S[{i},{i}]"),
            residual: s[(i, i)].im.abs(),
        });
        for j in i + 1..n {
            details.push(Detail {
                label: format!("S[{i},{j}]"),
                residual: (s[(i, j)] - s[(j, i)].conj() * bip.parity(i, j)).norm(),
            });
        }
    }
    Ok(ConstraintReport::new(
        "bipartite_symmetry",
        tolerance,
        details,
    ))
}

/// `Tr[SΘ] = Tr[Θ]`.
pub fn check_trace_identity(
    s: &CMatrix,
    bip: &BipartiteStructure,
    tolerance: f64,
) -> Result<ConstraintReport> {
    let n = bip.n();
    check_square(s, n)?;
    let theta = bip.theta();
    let lhs = (0..n).fold(c(0.0, 0.0), |acc, k| acc + s[(k, k)] * theta[k]);
    let rhs: f64 = theta.iter().sum();
    let details = vec![Detail {
        label: format!("Tr[S Theta] - ({rhs})"),
        residual: (lhs - rhs).norm(),
    }];
    Ok(ConstraintReport::new("trace_identity", tolerance, details))
}

/// Hierarchy constraints of the given orders, both orientations, with `s`
/// indexed like `model`.
pub fn check_hierarchy(
    s: &CMatrix,
    model: &MlzModel,
    orders: &[usize],
    tolerance: f64,
) -> Result<Vec<ConstraintReport>> {
    check_square(s, model.n())?;
    let (_, perm) = sort_by_slope(model);
    let sorted = permute_matrix(s, &perm);
    orders
        .iter()
        .map(|&m| {
            let lead = hc_rhs(model, m, Orientation::Leading)?;
            let trail = hc_rhs(model, m, Orientation::Trailing)?;
            let details = vec![
                Detail {
                    label: "leading".into(),
                    residual: (leading_minor(&sorted, m) - lead).norm(),
                },
                Detail {
                    label: "trailing".into(),
                    residual: (trailing_minor(&sorted, m) - trail).norm(),
                },
            ];
            Ok(ConstraintReport::new(
                format!("hierarchy_{m}"),
                tolerance,
                details,
            ))
        })
        .collect()
}

/// Orders `1..n` for [`check_hierarchy`].
pub fn all_orders(model: &MlzModel) -> Vec<usize> {
    (1..model.n()).collect()
}

/// Index triple of a three-amplitude cyclic product.
pub type Triple = (usize, usize, usize);
/// Index quadruple of a four-amplitude cyclic product.
pub type Quad = (usize, usize, usize, usize);

/// Index sets for the cyclic products with the first and third index in
/// group 1 and the others in group 2.
pub fn cycle_indices(bip: &BipartiteStructure) -> Result<(Triple, Quad)> {
    let members = |g: u8| -> Vec<usize> { (0..bip.n()).filter(|&k| bip.group(k) == g).collect() };
    let (g1, g2) = (members(1), members(2));
    if g1.len() < 2 || g2.len() < 2 {
        return Err(Error::InvalidParameter(
            "cyclic products need two states in each group".into(),
        ));
    }
    Ok(((g1[0], g2[0], g1[1]), (g1[0], g2[0], g1[1], g2[1])))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CyclicCheck {
    pub c3: [f64; 2],
    pub c4: [f64; 2],
    /// `Im c₃ / Re c₃`.
    pub r3: f64,
    /// `Im c₄ / Re c₄`.
    pub r4: f64,
}

fn checked_ratio(z: num_complex::Complex64) -> Result<f64> {
    if z.re.abs() < 1e-14 {
        return Err(Error::DegenerateRealPart(z.re));
    }
    Ok(z.im / z.re)
}

pub fn check_cyclic_reality(
    s: &CMatrix,
    triple: (usize, usize, usize),
    quad: (usize, usize, usize, usize),
) -> Result<CyclicCheck> {
    let c3 = cycle3(s, triple)?;
    let c4 = cycle4(s, quad)?;
    Ok(CyclicCheck {
        c3: [c3.re, c3.im],
        c4: [c4.re, c4.im],
        r3: checked_ratio(c3)?,
        r4: checked_ratio(c4)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendVerdict {
    pub final_ratio: f64,
    /// Least-squares slope of `ln|r|` against `ln T` over the later half of
    /// the schedule.
    pub log_slope: f64,
    /// `|r|` never increases over the last five checkpoints.
    pub monotone: bool,
    pub decreasing: bool,
    pub threshold: f64,
    pub pass: bool,
}

/// Trend of `|r|` along an increasing time schedule. Finite-time ratios
/// oscillate around a decaying envelope, so the verdict rests on the fitted
/// log-log slope over the later half of the schedule rather than on strict
/// monotonicity.
pub fn cyclic_trend(times: &[f64], ratios: &[f64], threshold: f64) -> Result<TrendVerdict> {
    if times.len() != ratios.len() {
        return Err(Error::DimensionMismatch {
            expected: times.len(),
            found: ratios.len(),
        });
    }
    if times.len() < 2 || times.windows(2).any(|w| !(0.0 < w[0] && w[0] < w[1])) {
        return Err(Error::InvalidParameter(
            "trend needs at least two increasing positive times".into(),
        ));
    }
    let n = ratios.len();
    let half = n.div_ceil(2).max(2);
    let xs: Vec<f64> = times[n - half..].iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = ratios[n - half..]
        .iter()
        .map(|r| r.abs().max(1e-300).ln())
        .collect();
    let (mx, my) = (
        xs.iter().sum::<f64>() / half as f64,
        ys.iter().sum::<f64>() / half as f64,
    );
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let log_slope = cov / var;
    let tail = &ratios[n - n.min(5)..];
    let monotone = tail.windows(2).all(|w| w[1].abs() <= w[0].abs());
    let final_ratio = ratios[n - 1].abs();
    let decreasing = log_slope < 0.0;
    Ok(TrendVerdict {
        final_ratio,
        log_slope,
        monotone,
        decreasing,
        threshold,
        pass: decreasing && final_ratio < threshold,
    })
}

/// Real `α` with `S_mn = α_mn i^{f_m+f_n} e^{i(φ_m−φ_n)}`, defined up to
/// conjugation by a diagonal ±1 matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaMatrix {
    pub alpha: RMatrix,
    /// The phases `φ`.
    pub gauge: Vec<f64>,
    /// Largest imaginary part left after removing the gauge.
    pub residual: f64,
    pub sign_class: &'static str,
}

impl AlphaMatrix {
    pub fn symmetry_residual(&self) -> f64 {
        (&self.alpha - self.alpha.transpose())
            .iter()
            .fold(0.0, |m: f64, x| m.max(x.abs()))
    }

    /// `‖α² − 1‖_max`.
    pub fn involution_residual(&self) -> f64 {
        let n = self.alpha.nrows();
        (&self.alpha * &self.alpha - RMatrix::identity(n, n))
            .iter()
            .fold(0.0, |m: f64, x| m.max(x.abs()))
    }

    pub fn negative_eigenvalues(&self) -> usize {
        let sym = (&self.alpha + self.alpha.transpose()) * 0.5;
        sym.symmetric_eigenvalues()
            .iter()
            .filter(|&&e| e < 0.0)
            .count()
    }
}

pub fn extract_alpha(s: &CMatrix, bip: &BipartiteStructure, tolerance: f64) -> Result<AlphaMatrix> {
    let n = bip.n();
    check_square(s, n)?;
    let stripped = CMatrix::from_fn(n, n, |a, b| s[(a, b)] / bip.phase(a, b));

    let mut phi: Vec<Option<f64>> = vec![None; n];
    phi[0] = Some(0.0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(m) = queue.pop_front() {
        let pm = phi[m].expect("queued states have a phase");
        for k in 0..n {
            if phi[k].is_none() && stripped[(m, k)].norm() > GAUGE_THRESHOLD {
                // α_mk taken positive along the tree edge.
                phi[k] = Some(pm - stripped[(m, k)].arg());
                queue.push_back(k);
            }
        }
    }
    let gauge = phi
        .iter()
        .enumerate()
        .map(|(k, p)| p.ok_or(Error::DisconnectedGauge(k)))
        .collect::<Result<Vec<f64>>>()?;

    let mut residual: f64 = 0.0;
    let mut alpha = RMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            let z = stripped[(a, b)] * num_complex::Complex64::from_polar(1.0, gauge[b] - gauge[a]);
            if z.im.abs() > tolerance {
                return Err(Error::AnsatzViolated {
                    row: a,
                    col: b,
                    residual: z.im.abs(),
                });
            }
            residual = residual.max(z.im.abs());
            alpha[(a, b)] = z.re;
        }
    }
    Ok(AlphaMatrix {
        alpha,
        gauge,
        residual,
        sign_class: "defined up to conjugation by a diagonal ±1 matrix",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{bowtie3_amplitudes, bowtie_alpha, dtcm5_from_x};
    use crate::linalg::max_abs_real;
    use crate::model::{build_bowtie, build_chain, build_dtcm, build_generic, detect_bipartition};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn bt3_model(p1: f64, p2: f64) -> MlzModel {
        let g = |p: f64, b: f64| (-p.ln() * b / PI).sqrt();
        build_bowtie(0.0, &[(2.0, g(p1, 2.0)), (1.0, g(p2, 1.0))]).unwrap()
    }

    /// Bipartition of the bowtie in its model order `(centre, β₁, β₂)`.
    fn bt3_model_order(p1: f64, p2: f64) -> (MlzModel, BipartiteStructure, CMatrix) {
        let model = bt3_model(p1, p2);
        let bip = detect_bipartition(&model).unwrap();
        let s = bowtie3_amplitudes(p1, p2);
        // Amplitudes come in slope order (β₁, β₂, centre).
        let to_model = [2, 0, 1];
        (model, bip, permute_matrix(&s, &to_model))
    }

    #[test]
    fn identity_passes_everything() {
        let model = build_generic(&[2.0, 1.0, 0.0, -1.0], &[]).unwrap();
        let bip = BipartiteStructure::from_groups(vec![2, 2, 2, 2]).unwrap();
        let s = CMatrix::identity(4, 4);
        assert_eq!(
            check_bipartite_symmetry(&s, &bip, 0.0).unwrap().residual,
            0.0
        );
        assert_eq!(check_trace_identity(&s, &bip, 0.0).unwrap().residual, 0.0);
        for r in check_hierarchy(&s, &model, &all_orders(&model), 0.0).unwrap() {
            assert!(r.pass, "{r:?}");
        }
        let alpha = extract_alpha(&s, &bip, 1e-12);
        assert_eq!(alpha, Err(Error::DisconnectedGauge(1)));
    }

    #[test]
    fn bowtie3_amplitudes_satisfy_identities() {
        let (model, bip, s) = bt3_model_order(0.5, 0.5);
        let sym = check_bipartite_symmetry(&s, &bip, 1e-12).unwrap();
        assert!(sym.pass, "{sym:?}");
        let trace = check_trace_identity(&s, &bip, 1e-12).unwrap();
        assert!(trace.pass, "{trace:?}");
        let hc = check_hierarchy(&s, &model, &[1, 2], ANALYTIC_TOLERANCE).unwrap();
        assert!(hc.iter().all(|r| r.pass), "{hc:?}");
        assert_eq!(hc.len(), 2);
    }

    #[test]
    fn dimension_mismatch() {
        let bip = BipartiteStructure::from_groups(vec![1, 2, 2]).unwrap();
        let s = CMatrix::identity(4, 4);
        assert!(matches!(
            check_bipartite_symmetry(&s, &bip, 1e-10),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            check_trace_identity(&s, &bip, 1e-10),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn dtcm5_diagonal_trace() {
        let sol = dtcm5_from_x(0.5).unwrap();
        let model = build_dtcm(5, 0.1, 0.0, 1.0).unwrap();
        let bip = detect_bipartition(&model).unwrap();
        let d = sol.diagonal.unwrap();
        let s = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            5,
            d.iter().map(|&x| c(x, 0.0)),
        ));
        let r = check_trace_identity(&s, &bip, 1e-14).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn real_orthogonal_cycles_are_real() {
        // A real orthogonal matrix from a symmetric generator.
        let h = RMatrix::from_fn(4, 4, |i, j| 0.3 * (i + j + 1) as f64);
        let eig = h.symmetric_eigen();
        let s = eig.eigenvectors.map(|x| c(x, 0.0));
        let check = check_cyclic_reality(&s, (0, 1, 2), (0, 1, 2, 3)).unwrap();
        assert_eq!((check.r3, check.r4), (0.0, 0.0));
        assert!(matches!(
            check_cyclic_reality(&CMatrix::identity(4, 4), (0, 1, 2), (0, 1, 2, 3)),
            Err(Error::DegenerateRealPart(_))
        ));
        assert!(matches!(
            check_cyclic_reality(&s, (0, 1, 7), (0, 1, 2, 3)),
            Err(Error::IndexError(_))
        ));
    }

    #[test]
    fn cycle_indices_follow_groups() {
        let chain = build_chain(&[5.0, 2.0, 1.0, 0.0], &[0.5, 0.3, 0.5]).unwrap();
        let bip = detect_bipartition(&chain).unwrap();
        let (t, q) = cycle_indices(&bip).unwrap();
        assert_eq!(bip.group(t.0), bip.group(t.2));
        assert_ne!(bip.group(t.0), bip.group(t.1));
        assert_eq!(bip.group(q.1), bip.group(q.3));
        assert!(cycle_indices(&detect_bipartition(&bt3_model(0.5, 0.5)).unwrap()).is_err());
    }

    #[test]
    fn trend_verdicts() {
        let times = [50.0, 100.0, 200.0, 400.0, 800.0, 1600.0];
        let v = cyclic_trend(&times, &[0.1, 0.2, 0.05, 0.02, 0.01, 0.005], 1e-2).unwrap();
        assert!(v.pass && v.decreasing && v.monotone);
        assert!(v.log_slope < 0.0);
        // Oscillation around a decaying envelope still counts as decreasing.
        let v = cyclic_trend(&times, &[0.1, 0.05, 0.02, 0.004, 0.006, 0.001], 1e-2).unwrap();
        assert!(v.pass && !v.monotone);
        let v = cyclic_trend(&times[..2], &[0.5, 0.2], 1e-2).unwrap();
        assert!(v.decreasing && !v.pass);
        let v = cyclic_trend(&times[..3], &[1e-3, 2e-3, 4e-3], 1e-2).unwrap();
        assert!(!v.decreasing && !v.pass);
        assert!(cyclic_trend(&[], &[], 1e-2).is_err());
        assert!(cyclic_trend(&[1.0, 2.0], &[0.1], 1e-2).is_err());
        assert!(cyclic_trend(&[2.0, 1.0], &[0.1, 0.1], 1e-2).is_err());
    }

    #[test]
    fn bowtie3_alpha_matches_algebraic_solution() {
        let (model, bip, s) = bt3_model_order(0.5, 0.5);
        let extracted = extract_alpha(&s, &bip, 1e-12).unwrap();
        assert_abs_diff_eq!(extracted.alpha[(0, 0)], -0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(extracted.alpha[(1, 1)], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(extracted.alpha[(2, 2)], 0.75, epsilon = 1e-15);
        let reference = bowtie_alpha(&model).unwrap();
        let p_ref = reference.solution.p_in_model_order();
        assert!(max_abs_real(&(extracted.alpha.map(|x| x * x) - p_ref)) < 1e-14);
        assert!(extracted.involution_residual() < 1e-14);
        assert!(extracted.symmetry_residual() < 1e-14);
        assert_eq!(extracted.negative_eigenvalues(), bip.m());
    }

    #[test]
    fn generic_phases_violate_the_ansatz() {
        // The (2, 1) entry carries a phase no gauge choice removes.
        let bip = BipartiteStructure::from_groups(vec![1, 2, 2]).unwrap();
        let s = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(0.5, 0.0),
                c(0.5, 0.0),
                c(0.5, 0.0),
                c(0.5, 0.0),
                c(0.5, 0.0),
                c(0.5, 0.0),
                c(0.5, 0.0),
                c(0.0, 0.5),
                c(0.5, 0.0),
            ],
        );
        assert!(matches!(
            extract_alpha(&s, &bip, 1e-8),
            Err(Error::AnsatzViolated { .. })
        ));
    }

    fn cycle_invariants(a: &RMatrix) -> Vec<f64> {
        let n = a.nrows();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    out.push(a[(i, j)] * a[(j, k)] * a[(k, i)]);
                }
            }
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn extract_alpha_inverts_the_ansatz(
            outer in proptest::collection::vec((0.2..4.0f64, 0.1..0.7f64), 1..6),
            phases in proptest::collection::vec(-PI..PI, 7),
        ) {
            let levels: Vec<(f64, f64)> = outer
                .iter()
                .enumerate()
                .map(|(k, &(b, g))| (if k % 2 == 0 { b + k as f64 * 5.0 } else { -b - k as f64 * 5.0 }, g))
                .collect();
            let model = build_bowtie(0.1, &levels).unwrap();
            let bt = bowtie_alpha(&model).unwrap();
            let n = model.n();
            let bip = bt.bipartition.clone();
            let s = CMatrix::from_fn(n, n, |a, b| {
                bt.alpha[(a, b)] * bip.phase(a, b) * num_complex::Complex64::from_polar(1.0, phases[a] - phases[b])
            });
            let got = extract_alpha(&s, &bip, 1e-10).unwrap();
            prop_assert!(max_abs_real(&(got.alpha.map(f64::abs) - bt.alpha.map(f64::abs))) < 1e-12);
            let (lhs, rhs) = (cycle_invariants(&got.alpha), cycle_invariants(&bt.alpha));
            for (x, y) in lhs.iter().zip(&rhs) {
                prop_assert!((x - y).abs() < 1e-12);
            }
            prop_assert!(check_bipartite_symmetry(&s, &bip, 1e-12).unwrap().pass);
            prop_assert!(check_trace_identity(&s, &bip, 1e-12).unwrap().pass);
        }
    }
}

//! Linear-in-time Hamiltonians `H(t) = B t + A` whose diabatic levels all
//! cross at `t = 0`, the named solvable families, and the bipartite structure
//! of their connectivity graphs.

use std::collections::{HashSet, VecDeque};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, I};

const HERMITIAN_TOL: f64 = 1e-12;
const DEGENERACY_TOL: f64 = 1e-9;

/// A single-crossing-point multistate Landau–Zener model.
#[derive(Debug, Clone, PartialEq)]
pub struct MlzModel {
    beta: Vec<f64>,
    a: CMatrix,
    labels: Option<Vec<String>>,
}

impl MlzModel {
    /// Validates slopes and coupling matrix.
    pub fn new(beta: Vec<f64>, a: CMatrix) -> Result<Self> {
        let n = beta.len();
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "a model needs at least two states, got {n}"
            )));
        }
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: a.nrows(),
            });
        }
        if let Some(b) = beta.iter().find(|b| !b.is_finite()) {
            return Err(Error::InvalidParameter(format!("slope {b} is not finite")));
        }
        check_distinct_slopes(&beta)?;
        for i in 0..n {
            if a[(i, i)] != Complex64::new(0.0, 0.0) {
                return Err(Error::DiagonalCoupling(i));
            }
            for j in 0..i {
                let (aij, aji) = (a[(i, j)], a[(j, i)]);
                if !aij.re.is_finite() || !aij.im.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "coupling ({i}, {j}) is not finite"
                    )));
                }
                if (aij - aji.conj()).norm() > HERMITIAN_TOL {
                    return Err(Error::InvalidParameter(format!(
                        "coupling matrix is not Hermitian at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self {
            beta,
            a,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.beta.len()
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn couplings(&self) -> &CMatrix {
        &self.a
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn coupling(&self, i: usize, j: usize) -> Complex64 {
        self.a[(i, j)]
    }

    /// `H(t) = B t + A`.
    pub fn hamiltonian(&self, t: f64) -> CMatrix {
        let mut h = self.a.clone();
        for (k, b) in self.beta.iter().enumerate() {
            h[(k, k)] = c(b * t, 0.0);
        }
        h
    }

    /// Nonzero couplings `(i, j)` with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if self.a[(i, j)].norm() > 0.0 {
                    edges.push((i, j));
                }
            }
        }
        edges
    }

    pub fn is_sorted_by_slope(&self) -> bool {
        self.beta.windows(2).all(|w| w[0] > w[1])
    }

    /// Relabels states so that new state `k` is old state `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n();
        check_permutation(perm, n)?;
        let beta = perm.iter().map(|&p| self.beta[p]).collect();
        let a = permute_matrix(&self.a, perm);
        let labels = self
            .labels
            .as_ref()
            .map(|l| perm.iter().map(|&p| l[p].clone()).collect());
        Ok(Self { beta, a, labels })
    }
}

fn check_distinct_slopes(beta: &[f64]) -> Result<()> {
    let scale = beta.iter().fold(0.0f64, |m, b| m.max(b.abs()));
    for i in 0..beta.len() {
        for j in 0..i {
            if (beta[i] - beta[j]).abs() <= DEGENERACY_TOL * scale || scale == 0.0 {
                return Err(Error::DegenerateSlopes(j, i));
            }
        }
    }
    Ok(())
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: perm.len(),
        });
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::IndexError(format!("{perm:?} is not a permutation")));
        }
        seen[p] = true;
    }
    Ok(())
}

/// `out[(i, j)] = m[(perm[i], perm[j])]`.
pub fn permute_matrix<T: nalgebra::Scalar + Copy>(
    m: &nalgebra::DMatrix<T>,
    perm: &[usize],
) -> nalgebra::DMatrix<T> {
    let n = perm.len();
    nalgebra::DMatrix::from_fn(n, n, |i, j| m[(perm[i], perm[j])])
}

pub fn invert_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (k, &p) in perm.iter().enumerate() {
        inv[p] = k;
    }
    inv
}

/// Arbitrary model from slopes and a list of upper-triangle couplings.
pub fn build_generic(beta: &[f64], couplings: &[(usize, usize, Complex64)]) -> Result<MlzModel> {
    let n = beta.len();
    let mut a = CMatrix::zeros(n, n);
    let mut seen = HashSet::new();
    for &(i, j, g) in couplings {
        if i >= n || j >= n {
            return Err(Error::IndexError(format!(
                "coupling ({i}, {j}) out of range for {n} states"
            )));
        }
        if i == j {
            return Err(Error::DiagonalCoupling(i));
        }
        if !seen.insert((i.min(j), i.max(j))) {
            return Err(Error::DuplicateCoupling(i.min(j), i.max(j)));
        }
        a[(i, j)] = g;
        a[(j, i)] = g.conj();
    }
    check_distinct_slopes(beta)?;
    MlzModel::new(beta.to_vec(), a)
}

fn real_couplings(
    edges: impl IntoIterator<Item = (usize, usize, f64)>,
) -> Vec<(usize, usize, Complex64)> {
    edges
        .into_iter()
        .map(|(i, j, g)| (i, j, c(g, 0.0)))
        .collect()
}

/// Star graph: state 0 with slope `beta0` couples to every other state.
pub fn build_bowtie(beta0: f64, others: &[(f64, f64)]) -> Result<MlzModel> {
    if others.is_empty() {
        return Err(Error::InvalidParameter(
            "bowtie model needs at least one outer level".into(),
        ));
    }
    let beta: Vec<f64> = std::iter::once(beta0)
        .chain(others.iter().map(|&(b, _)| b))
        .collect();
    let edges = others.iter().enumerate().map(|(k, &(_, g))| (0, k + 1, g));
    build_generic(&beta, &real_couplings(edges))
}

/// Path graph with `a[k][k+1] = g[k]`.
pub fn build_chain(beta: &[f64], g: &[f64]) -> Result<MlzModel> {
    if g.len() + 1 != beta.len() {
        return Err(Error::InvalidParameter(format!(
            "chain of {} states needs {} couplings, got {}",
            beta.len(),
            beta.len().saturating_sub(1),
            g.len()
        )));
    }
    let edges = g.iter().enumerate().map(|(k, &gk)| (k, k + 1, gk));
    build_generic(beta, &real_couplings(edges))
}

/// Couplings of the driven Tavis–Cummings chain with `2S + 1 = n_states`.
pub fn dtcm_couplings(n_states: usize, g: f64, n_b: f64) -> Vec<f64> {
    let s = (n_states as f64 - 1.0) / 2.0;
    (1..n_states)
        .map(|n| {
            let n = n as f64;
            g * (n_b + n).sqrt() * (s * (s + 1.0) - (s - n + 1.0) * (s - n)).sqrt()
        })
        .collect()
}

/// Driven Tavis–Cummings chain, slopes `beta_scale * n` for `n = 1..=n_states`.
pub fn build_dtcm(n_states: usize, g: f64, n_b: f64, beta_scale: f64) -> Result<MlzModel> {
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
    if beta_scale == 0.0 || !beta_scale.is_finite() {
        return Err(Error::InvalidParameter("beta_scale must be nonzero".into()));
    }
    let beta: Vec<f64> = (1..=n_states).map(|n| beta_scale * n as f64).collect();
    build_chain(&beta, &dtcm_couplings(n_states, g, n_b))
}

/// The `x`, `y` factors that make the four-state 4-cycle model solvable.
pub fn four_state_xy(beta: f64, beta1: f64, beta2: f64) -> Result<(f64, f64)> {
    if beta == beta2 {
        return Ok((1.0, 1.0));
    }
    let rx = (beta1 - beta) / (beta1 - beta2);
    let ry = (beta1 + beta) / (beta1 + beta2);
    if !(rx > 0.0 && ry > 0.0) || !rx.is_finite() || !ry.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "four-state radicands ({rx}, {ry}) must be positive"
        )));
    }
    Ok((rx.sqrt(), ry.sqrt()))
}

/// Four-state model on a 4-cycle with slopes `(β₁, β, −β₂, −β₁)`.
pub fn build_four_state(beta: f64, beta1: f64, beta2: f64, g1: f64, g2: f64) -> Result<MlzModel> {
    let (x, y) = four_state_xy(beta, beta1, beta2)?;
    build_generic(
        &[beta1, beta, -beta2, -beta1],
        &real_couplings([(0, 1, x * g1), (0, 2, g2), (1, 3, -y * g2), (2, 3, g1)]),
    )
}

/// Six-state composite model built from three fermionic modes, slopes
/// `(β₁, β₂, β₃, −β₃, −β₂, −β₁)`.
pub fn build_six_state(
    beta1: f64,
    beta2: f64,
    beta3: f64,
    g12: f64,
    g13: f64,
    g23: f64,
) -> Result<MlzModel> {
    if !(beta1 > beta2 && beta2 > beta3 && beta3 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "six-state model needs β₁ > β₂ > β₃ > 0, got ({beta1}, {beta2}, {beta3})"
        )));
    }
    build_generic(
        &[beta1, beta2, beta3, -beta3, -beta2, -beta1],
        &real_couplings([
            (0, 3, g13),
            (0, 4, g12),
            (1, 3, g23),
            (1, 5, -g12),
            (2, 4, -g23),
            (2, 5, -g13),
        ]),
    )
}

/// Coupling set of the solvable five-state bipartite model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiveStateCouplings {
    pub g13: f64,
    pub g14: f64,
    pub g15: f64,
    pub g23: f64,
    pub g24: f64,
    pub g25: f64,
}

pub fn five_state_couplings(
    b: f64,
    b3: f64,
    b4: f64,
    b5: f64,
    g13: f64,
    g14: f64,
    taus: [i8; 3],
) -> Result<FiveStateCouplings> {
    if !(b3 > b4 && b4 > b && b > 0.0 && -b > b5) {
        return Err(Error::InvalidParameter(format!(
            "five-state model needs b₃ > b₄ > b > 0 > −b > b₅, got b={b}, b₃={b3}, b₄={b4}, b₅={b5}"
        )));
    }
    if taus.iter().any(|t| t.abs() != 1) {
        return Err(Error::InvalidParameter(format!(
            "signs {taus:?} must be ±1"
        )));
    }
    let g15 = ((g13 * g13 / (b3 - b) + g14 * g14 / (b4 - b)) * (b - b5)).sqrt();
    let partner = |tau: i8, g1i: f64, bi: f64| f64::from(tau) * g1i * ((bi + b) / (bi - b)).sqrt();
    Ok(FiveStateCouplings {
        g13,
        g14,
        g15,
        g23: partner(taus[0], g13, b3),
        g24: partner(taus[1], g14, b4),
        g25: partner(taus[2], g15, b5),
    })
}

/// Five-state bipartite model with slopes `(b, −b, b₃, b₄, b₅)`.
pub fn build_five_state(
    b: f64,
    b3: f64,
    b4: f64,
    b5: f64,
    g13: f64,
    g14: f64,
    taus: [i8; 3],
) -> Result<MlzModel> {
    let k = five_state_couplings(b, b3, b4, b5, g13, g14, taus)?;
    build_generic(
        &[b, -b, b3, b4, b5],
        &real_couplings([
            (0, 2, k.g13),
            (0, 3, k.g14),
            (0, 4, k.g15),
            (1, 2, k.g23),
            (1, 3, k.g24),
            (1, 4, k.g25),
        ]),
    )
}

/// Two-coloring of the connectivity graph. Group 1 is the smaller side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteStructure {
    groups: Vec<u8>,
    m: usize,
}

impl BipartiteStructure {
    /// Takes group indices in `{1, 2}`; group 1 must not be the larger one.
    pub fn from_groups(groups: Vec<u8>) -> Result<Self> {
        if let Some(g) = groups.iter().find(|&&g| g != 1 && g != 2) {
            return Err(Error::InvalidParameter(format!(
                "group index {g} not in {{1, 2}}"
            )));
        }
        let m = groups.iter().filter(|&&g| g == 1).count();
        if 2 * m > groups.len() {
            return Err(Error::InvalidParameter(
                "group 1 must be the smaller group".into(),
            ));
        }
        Ok(Self { groups, m })
    }

    pub fn n(&self) -> usize {
        self.groups.len()
    }

    /// Size of group 1.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn groups(&self) -> &[u8] {
        &self.groups
    }

    pub fn group(&self, k: usize) -> u8 {
        self.groups[k]
    }

    /// Diagonal of `Θ`, `(−1)^{f_k}`.
    pub fn theta(&self) -> Vec<f64> {
        self.groups
            .iter()
            .map(|&g| if g == 1 { -1.0 } else { 1.0 })
            .collect()
    }

    /// Signature used for pseudo-unitarity: +1 on group 2, −1 on group 1.
    pub fn signature(&self) -> Vec<f64> {
        self.theta()
    }

    /// `(−1)^{f_a + f_b}`.
    pub fn parity(&self, a: usize, b: usize) -> f64 {
        if self.groups[a] == self.groups[b] {
            1.0
        } else {
            -1.0
        }
    }

    /// `i^{f_a + f_b}`.
    pub fn phase(&self, a: usize, b: usize) -> Complex64 {
        match (self.groups[a] + self.groups[b]) % 4 {
            0 => c(1.0, 0.0),
            1 => I,
            2 => c(-1.0, 0.0),
            _ => -I,
        }
    }

    /// No nonzero coupling joins two states of the same group.
    pub fn is_valid_for(&self, model: &MlzModel) -> bool {
        self.n() == model.n()
            && model
                .edges()
                .iter()
                .all(|&(i, j)| self.groups[i] != self.groups[j])
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            groups: perm.iter().map(|&p| self.groups[p]).collect(),
            m: self.m,
        }
    }
}

/// Two-colors the connectivity graph, or reports an odd cycle.
pub fn detect_bipartition(model: &MlzModel) -> Result<BipartiteStructure> {
    let n = model.n();
    let mut adjacency = vec![Vec::new(); n];
    for (i, j) in model.edges() {
        adjacency[i].push(j);
        adjacency[j].push(i);
    }
    let mut color: Vec<Option<bool>> = vec![None; n];
    let mut parent = vec![usize::MAX; n];
    for root in 0..n {
        if color[root].is_some() {
            continue;
        }
        color[root] = Some(false);
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            let cu = color[u].expect("queued nodes are colored");
            for &v in &adjacency[u] {
                match color[v] {
                    None => {
                        color[v] = Some(!cu);
                        parent[v] = u;
                        queue.push_back(v);
                    }
                    Some(cv) if cv == cu => {
                        return Err(Error::NotBipartite {
                            cycle: odd_cycle(&parent, u, v),
                        })
                    }
                    Some(_) => {}
                }
            }
        }
    }
    let seeded = color.iter().filter(|c| **c == Some(false)).count();
    // The seeded side holds state 0, so it wins ties.
    let seeded_is_group1 = 2 * seeded <= n;
    let groups = color
        .iter()
        .map(|c| {
            if (*c == Some(false)) == seeded_is_group1 {
                1
            } else {
                2
            }
        })
        .collect();
    BipartiteStructure::from_groups(groups)
}

fn odd_cycle(parent: &[usize], u: usize, v: usize) -> Vec<usize> {
    let path_to_root = |mut x: usize| {
        let mut path = vec![x];
        while parent[x] != usize::MAX {
            x = parent[x];
            path.push(x);
        }
        path
    };
    let pu = path_to_root(u);
    let pv = path_to_root(v);
    let on_pu: HashSet<usize> = pu.iter().copied().collect();
    let lca = *pv
        .iter()
        .find(|x| on_pu.contains(x))
        .expect("same BFS tree");
    let mut cycle: Vec<usize> = pu.iter().copied().take_while(|&x| x != lca).collect();
    cycle.push(lca);
    let tail: Vec<usize> = pv.iter().copied().take_while(|&x| x != lca).collect();
    cycle.extend(tail.into_iter().rev());
    cycle
}

/// `η_n = Σ_{m≠n} |g_nm|² / (β_n − β_m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaVector(Vec<f64>);

impl EtaVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// `e^{scale·π·η_n}` per component.
    pub fn exp_pi(&self, scale: f64) -> Vec<f64> {
        self.0
            .iter()
            .map(|e| (scale * std::f64::consts::PI * e).exp())
            .collect()
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self(perm.iter().map(|&p| self.0[p]).collect())
    }
}

impl From<Vec<f64>> for EtaVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

pub fn eta(model: &MlzModel) -> EtaVector {
    let n = model.n();
    let beta = model.beta();
    let values = (0..n)
        .map(|k| {
            (0..n)
                .filter(|&m| m != k)
                .map(|m| model.coupling(k, m).norm_sqr() / (beta[k] - beta[m]))
                .sum()
        })
        .collect();
    EtaVector(values)
}

/// Relabels states by descending slope. Returns the sorted model and the
/// permutation `perm` with sorted state `k` = input state `perm[k]`.
pub fn sort_by_slope(model: &MlzModel) -> (MlzModel, Vec<usize>) {
    let mut perm: Vec<usize> = (0..model.n()).collect();
    perm.sort_by(|&a, &b| model.beta()[b].total_cmp(&model.beta()[a]));
    let sorted = model
        .permuted(&perm)
        .expect("sorting yields a valid permutation");
    (sorted, perm)
}

/// Non-Hermitian evolution along imaginary time, `H′(τ) = −Bτ + iA`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualModel {
    base: MlzModel,
    bipartition: BipartiteStructure,
}

impl DualModel {
    pub fn base(&self) -> &MlzModel {
        &self.base
    }

    pub fn bipartition(&self) -> &BipartiteStructure {
        &self.bipartition
    }

    pub fn generator(&self, tau: f64) -> CMatrix {
        let mut h = self.base.couplings() * I;
        for (k, b) in self.base.beta().iter().enumerate() {
            h[(k, k)] = c(-b * tau, 0.0);
        }
        h
    }
}

pub fn dual_bosonic(model: &MlzModel, bipartition: &BipartiteStructure) -> Result<DualModel> {
    if !bipartition.is_valid_for(model) {
        // Report the offending structure the same way detection would.
        detect_bipartition(model)?;
        return Err(Error::InvalidParameter(
            "bipartition does not match the model's connectivity".into(),
        ));
    }
    Ok(DualModel {
        base: model.clone(),
        bipartition: bipartition.clone(),
    })
}

//! Small dense complex linear algebra shared by the propagator and the
//! constraint checks.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type RMatrix = DMatrix<f64>;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_real(m: &RMatrix) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// `‖U†U − 1‖_max`.
pub fn unitarity_residual(u: &CMatrix) -> f64 {
    let n = u.nrows();
    max_abs(&(u.adjoint() * u - CMatrix::identity(n, n)))
}

/// `‖U Σ U† − Σ‖_max` for a diagonal signature `Σ`.
pub fn pseudo_unitarity_residual(u: &CMatrix, signature: &[f64]) -> f64 {
    let sigma = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        signature.len(),
        signature.iter().map(|&s| c(s, 0.0)),
    ));
    max_abs(&(u * &sigma * u.adjoint() - &sigma))
}

/// Entrywise `|U_ij|²`.
pub fn probabilities(u: &CMatrix) -> RMatrix {
    u.map(|z| z.norm_sqr())
}

/// Largest deviation of any row or column sum from one.
pub fn stochasticity_residual(p: &RMatrix) -> f64 {
    let rows = p.row_iter().map(|r| (r.sum() - 1.0).abs());
    let cols = p.column_iter().map(|c| (c.sum() - 1.0).abs());
    rows.chain(cols).fold(0.0, f64::max)
}

/// `exp(-i H dt)` for Hermitian `H` via its eigendecomposition.
pub fn hermitian_propagator(h: CMatrix, dt: f64) -> CMatrix {
    let eig = SymmetricEigen::new(h);
    let mut v = eig.eigenvectors;
    let vh = v.adjoint();
    for (mut col, &lambda) in v.column_iter_mut().zip(eig.eigenvalues.iter()) {
        col *= Complex64::from_polar(1.0, -lambda * dt);
    }
    v * vh
}

/// General matrix exponential by scaling and squaring of a truncated Taylor
/// series.
pub fn expm(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let norm1 = a
        .column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0u32;
    if norm1 > 0.5 {
        squarings = (norm1 / 0.5).log2().ceil() as u32;
    }
    let scaled = a / c(2f64.powi(squarings as i32), 0.0);

    // ‖scaled‖ ≤ 1/2, so 18 terms reach double precision.
    let mut result = CMatrix::identity(n, n);
    let mut term = CMatrix::identity(n, n);
    for k in 1..=18 {
        term = &term * &scaled / c(k as f64, 0.0);
        result += &term;
        if max_abs(&term) < 1e-18 * max_abs(&result) {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Determinant of the leading `m×m` block.
pub fn leading_minor(s: &CMatrix, m: usize) -> Complex64 {
    s.view((0, 0), (m, m)).clone_owned().determinant()
}

/// Determinant of the trailing `m×m` block.
pub fn trailing_minor(s: &CMatrix, m: usize) -> Complex64 {
    let n = s.nrows();
    s.view((n - m, n - m), (m, m)).clone_owned().determinant()
}

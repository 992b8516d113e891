//! Multistate Landau–Zener models with a single crossing point: builders,
//! numerical propagation, closed-form scattering matrices, integrability
//! constraints and Stokes-matrix factorization.

// Parameter guards use `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod constraints;
pub mod error;
pub mod linalg;
pub mod model;
pub mod propagate;
pub mod scanner;
pub mod stokes;

pub use analytic::{AnalyticSolution, BowtieSolution, Orientation};
pub use constraints::{AlphaMatrix, ConstraintReport};
pub use error::{Error, Result};
pub use linalg::{CMatrix, RMatrix};
pub use model::{
    build_bowtie, build_chain, build_dtcm, build_five_state, build_four_state, build_generic,
    build_six_state, detect_bipartition, dual_bosonic, eta, sort_by_slope, BipartiteStructure,
    DualModel, EtaVector, MlzModel,
};
pub use num_complex::Complex64;
pub use stokes::{DualScattering, StokesSet};

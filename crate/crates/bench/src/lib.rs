//! Fixture models shared by the benchmarks.

use std::f64::consts::PI;

use mlz_core::{build_bowtie, build_chain, build_dtcm, MlzModel};

/// Coupling giving survival probability `p` across a crossing with slope
/// difference `beta`.
pub fn coupling_for(p: f64, beta: f64) -> f64 {
    (-p.ln() * beta / PI).sqrt()
}

/// Three-state bowtie with both outer survival probabilities 1/2.
pub fn bowtie3() -> MlzModel {
    build_bowtie(
        0.0,
        &[(2.0, coupling_for(0.5, 2.0)), (1.0, coupling_for(0.5, 1.0))],
    )
    .expect("valid bowtie")
}

/// Bowtie with `n - 1` outer levels at slopes `±1, ±2, ...`.
pub fn bowtie(n: usize) -> MlzModel {
    let outer: Vec<(f64, f64)> = (1..n)
        .map(|k| {
            let b = k.div_ceil(2) as f64 * if k % 2 == 1 { 1.0 } else { -1.0 };
            (b, 0.3)
        })
        .collect();
    build_bowtie(0.0, &outer).expect("valid bowtie")
}

pub fn dtcm5() -> MlzModel {
    build_dtcm(5, 0.3, 0.0, 1.0).expect("valid DTCM")
}

/// Four-level chain of the coupling scan at `g₃ = 0.47`.
pub fn scan_chain() -> MlzModel {
    build_chain(&[5.0, 2.0, 1.0, 0.0], &[0.5, 0.5, 0.47]).expect("valid chain")
}

//! Shared generators for integration tests.

#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use mlz_core::{build_bowtie, build_generic, Complex64, MlzModel};
use rand::Rng;

/// Coupling that gives survival probability `p` across a crossing with slope
/// difference `beta`.
pub fn g_for(p: f64, beta: f64) -> f64 {
    (-p.ln() * beta / PI).sqrt()
}

/// `n` slopes in `[-span, span)` with every pair at least `gap` apart.
pub fn random_slopes<R: Rng>(rng: &mut R, n: usize, span: f64, gap: f64) -> Vec<f64> {
    loop {
        let beta: Vec<f64> = (0..n).map(|_| rng.random_range(-span..span)).collect();
        let mut sorted = beta.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).all(|w| w[1] - w[0] >= gap) {
            return beta;
        }
    }
}

/// Random bipartite model with `2 ≤ n ≤ max_n` states, complex couplings of
/// modulus at most `g_max` between the two groups.
pub fn random_bipartite<R: Rng>(rng: &mut R, max_n: usize, g_max: f64) -> MlzModel {
    let n = rng.random_range(2..=max_n);
    let beta = random_slopes(rng, n, 2.0, 0.4);
    let side: Vec<bool> = loop {
        let side: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
        if side.iter().any(|&s| s) && side.iter().any(|&s| !s) {
            break side;
        }
    };
    let mut couplings = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if side[i] != side[j] && rng.random_bool(0.7) {
                let r = rng.random_range(0.05..g_max);
                couplings.push((i, j, Complex64::from_polar(r, rng.random_range(0.0..TAU))));
            }
        }
    }
    build_generic(&beta, &couplings).expect("generated model is valid")
}

/// Random bowtie with `3 ≤ n ≤ max_n` states, centre at index 0.
pub fn random_bowtie<R: Rng>(rng: &mut R, max_n: usize, g_max: f64) -> MlzModel {
    let n = rng.random_range(3..=max_n);
    let beta = random_slopes(rng, n, 2.5, 0.5);
    let outer: Vec<(f64, f64)> = beta[1..]
        .iter()
        .map(|&b| (b, rng.random_range(0.0..g_max)))
        .collect();
    build_bowtie(beta[0], &outer).expect("generated bowtie is valid")
}

//! Constraint checks on numerically propagated scattering matrices.

mod common;

use mlz_core::analytic::{dtcm4_probabilities, hc_rhs, Orientation};
use mlz_core::constraints::{
    all_orders, check_bipartite_symmetry, check_cyclic_reality, check_hierarchy,
    check_trace_identity, cyclic_trend, extract_alpha, NUMERIC_TOLERANCE,
};
use mlz_core::linalg::leading_minor;
use mlz_core::model::permute_matrix;
use mlz_core::propagate::{
    evolve_unitary, geometric_schedule, scattering_estimate, PropagationSettings, Scheme,
};
use mlz_core::{
    build_bowtie, build_chain, build_dtcm, build_four_state, detect_bipartition, sort_by_slope,
    Error,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn magnus(t_max: f64) -> PropagationSettings {
    PropagationSettings::new(t_max, 0.2)
        .unwrap()
        .with_scheme(Scheme::Magnus4)
}

#[test]
fn random_bipartite_models_satisfy_exact_identities_at_finite_t() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let model = common::random_bipartite(&mut rng, 5, 0.5);
        let bip = detect_bipartition(&model).unwrap();
        let u = evolve_unitary(&model, &magnus(80.0)).unwrap().u;
        assert!(check_bipartite_symmetry(&u, &bip, 1e-8).unwrap().pass);
        assert!(check_trace_identity(&u, &bip, 1e-8).unwrap().pass);
    }
}

#[test]
fn hierarchy_holds_for_random_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..6 {
        let model = common::random_bipartite(&mut rng, 4, 0.4);
        let u = evolve_unitary(&model, &magnus(150.0)).unwrap().u;
        for r in check_hierarchy(&u, &model, &all_orders(&model), NUMERIC_TOLERANCE).unwrap() {
            assert!(r.pass, "{r:?}");
        }
    }
}

#[test]
fn steepest_level_survival_is_brundobler_elser() {
    let model = build_bowtie(0.0, &[(2.0, 0.4), (1.0, 0.3), (-1.5, 0.5)]).unwrap();
    let u = evolve_unitary(&model, &magnus(200.0)).unwrap().u;
    let (_, perm) = sort_by_slope(&model);
    let s = permute_matrix(&u, &perm);
    let exact = hc_rhs(&model, 1, Orientation::Leading).unwrap();
    assert!((leading_minor(&s, 1).norm() - exact).abs() < 1e-3);
}

#[test]
fn alpha_of_numeric_dtcm4_matches_closed_form() {
    let g = 0.25;
    let model = build_dtcm(4, g, 0.0, 1.0).unwrap();
    let bip = detect_bipartition(&model).unwrap();
    let u = evolve_unitary(&model, &magnus(300.0)).unwrap().u;
    let alpha = extract_alpha(&u, &bip, 0.05).unwrap();
    let p = dtcm4_probabilities(g).p;
    for i in 0..4 {
        for j in 0..4 {
            assert!((alpha.alpha[(i, j)].powi(2) - p[(i, j)]).abs() < 1e-2);
        }
    }
    assert!(alpha.involution_residual() < 2e-2);
    assert_eq!(alpha.negative_eigenvalues(), bip.m());
}

#[test]
fn generic_chain_violates_the_ansatz() {
    let model = build_chain(&[3.0, 2.0, 1.0, 0.0], &[0.4, 0.4, 0.4]).unwrap();
    let bip = detect_bipartition(&model).unwrap();
    let u = evolve_unitary(&model, &magnus(200.0)).unwrap().u;
    assert!(matches!(
        extract_alpha(&u, &bip, NUMERIC_TOLERANCE),
        Err(Error::AnsatzViolated { .. })
    ));
}

#[test]
fn four_state_ratio_trends_to_zero() {
    let model = build_four_state(0.1, 1.25, 0.65, 0.37, 0.5).unwrap();
    let bip = detect_bipartition(&model).unwrap();
    let times = geometric_schedule(600.0, 1.3, 10);
    let est = scattering_estimate(&model, &times, &magnus(600.0)).unwrap();
    let ratios: Vec<f64> = est
        .snapshots
        .iter()
        .map(|s| {
            check_cyclic_reality(&s.u, (0, 1, 3), (0, 1, 2, 3))
                .unwrap()
                .r4
        })
        .collect();
    let verdict = cyclic_trend(&times, &ratios, 5e-3).unwrap();
    assert!(verdict.decreasing && verdict.pass, "{verdict:?}");
    assert!(
        check_bipartite_symmetry(&est.last().u, &bip, 1e-3)
            .unwrap()
            .pass
    );
}

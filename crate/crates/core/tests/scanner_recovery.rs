//! The scanner applied to families with a known solvable member.

use mlz_core::build_chain;
use mlz_core::model::dtcm_couplings;
use mlz_core::propagate::{PropagationSettings, Scheme};
use mlz_core::scanner::{find_simultaneous_zero, linear_grid, sweep, RefineSettings};

fn settings() -> PropagationSettings {
    PropagationSettings::new(150.0, 0.2)
        .unwrap()
        .with_scheme(Scheme::Magnus4)
}

#[test]
fn recovers_the_dtcm_coupling_of_a_deformed_chain() {
    let g = dtcm_couplings(4, 0.3, 0.0);
    let beta = [1.0, 2.0, 3.0, 4.0];
    let family = |g3: f64| build_chain(&beta, &[g[0], g[1], g3]);
    let grid = linear_grid(g[2] - 0.2, g[2] + 0.25, 10).unwrap();
    let result = sweep(&family, "deformed DTCM", &grid, &settings(), None).unwrap();
    let found = find_simultaneous_zero(&result, &family, &settings(), &RefineSettings::default())
        .unwrap()
        .expect("the solvable coupling is bracketed");
    assert!(
        (found.g - g[2]).abs() <= 0.02,
        "g* = {}, expected {}",
        found.g,
        g[2]
    );
}

#[test]
fn equidistant_equal_coupling_chain_has_no_simultaneous_zero() {
    let family = |g: f64| build_chain(&[3.0, 2.0, 1.0, 0.0], &[g, g, g]);
    let grid = linear_grid(0.1, 0.6, 8).unwrap();
    let result = sweep(&family, "equal chain", &grid, &settings(), None).unwrap();
    let found =
        find_simultaneous_zero(&result, &family, &settings(), &RefineSettings::default()).unwrap();
    assert!(found.is_none(), "{found:?}");
}

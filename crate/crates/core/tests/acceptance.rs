//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! Set `MLZ_ACCEPTANCE_EXTENDED=1` to add the long four-state run at T = 2038.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use mlz_core::analytic::{
    bowtie3_scattering, bowtie_alpha, dtcm4_from_x, dtcm5_probabilities, five_state_probabilities,
    four_state_bowtie_sector, six_state_probabilities,
};
use mlz_core::constraints::{
    all_orders, check_bipartite_symmetry, check_hierarchy, check_trace_identity,
};
use mlz_core::linalg::{max_abs, max_abs_real, stochasticity_residual, unitarity_residual};
use mlz_core::model::{build_five_state, build_four_state, invert_permutation, permute_matrix};
use mlz_core::propagate::{
    cycle4, evolve_nonunitary, evolve_unitary, geometric_schedule, scattering_estimate,
    PropagationSettings, Scheme,
};
use mlz_core::scanner::{find_simultaneous_zero, linear_grid, sweep, RefineSettings};
use mlz_core::stokes::{
    bowtie3_dual_amplitudes, bowtie3_stokes, check_monodromy, condensate_populations,
    dual_scattering, factor_scattering, mirror_stokes, DualScattering,
};
use mlz_core::{
    build_bowtie, build_chain, build_dtcm, build_six_state, detect_bipartition, dual_bosonic, eta,
    BipartiteStructure, CMatrix, RMatrix,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn within(label: &str, value: f64, tolerance: f64) -> Result<(), String> {
    ensure(value <= tolerance, || {
        format!("{label} = {value:.3e} exceeds {tolerance:.0e}")
    })
}

fn budget(start: Instant, limit: Duration) -> Result<(), String> {
    let spent = start.elapsed();
    ensure(spent <= limit, || {
        format!("took {spent:.1?}, budget {limit:?}")
    })
}

fn magnus(t_max: f64, dt0: f64) -> PropagationSettings {
    PropagationSettings::new(t_max, dt0)
        .expect("valid settings")
        .with_scheme(Scheme::Magnus4)
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Bowtie with outer slopes 2 and 1 and both survival probabilities 1/2.
fn half_bowtie() -> (f64, f64, f64, f64) {
    (2.0, 1.0, common::g_for(0.5, 2.0), common::g_for(0.5, 1.0))
}

/// Slope order `(β₁, β₂, 0)` of the three-state bowtie in model order.
const BT3_STATES: [usize; 3] = [1, 2, 0];

fn three_state_bowtie() -> Outcome {
    let start = Instant::now();
    let (b1, b2, g1, g2) = half_bowtie();
    let model = build_bowtie(0.0, &[(b1, g1), (b2, g2)]).map_err(err)?;
    let bip = detect_bipartition(&model).map_err(err)?;
    let s_sorted = bowtie3_scattering(b1, b2, g1, g2).map_err(err)?.s.unwrap();
    let s = permute_matrix(&s_sorted, &invert_permutation(&BT3_STATES));

    let settings = PropagationSettings::new(200.0, 0.1).map_err(err)?;
    let u = evolve_unitary(&model, &settings).map_err(err)?;
    let dp = max_abs_real(&(u.probabilities() - s.map(|z| z.norm_sqr())));
    within("max |P_num - |S|^2|", dp, 1e-2)?;

    let unit = unitarity_residual(&s);
    within("unitarity residual", unit, 1e-12)?;
    let sym = check_bipartite_symmetry(&s, &bip, 1e-12).map_err(err)?;
    within("bipartite symmetry residual", sym.residual, 1e-12)?;
    let trace = check_trace_identity(&s, &bip, 1e-12).map_err(err)?;
    within("trace residual", trace.residual, 1e-12)?;
    let hc = check_hierarchy(&s, &model, &all_orders(&model), 1e-10).map_err(err)?;
    let hc_worst = hc.iter().map(|r| r.residual).fold(0.0, f64::max);
    within("hierarchy residual", hc_worst, 1e-10)?;
    budget(start, Duration::from_secs(10))?;
    Ok(format!(
        "max |dP| {dp:.1e}; symmetry {:.0e}, trace {:.0e}, HC {hc_worst:.0e}",
        sym.residual, trace.residual
    ))
}

fn dtcm5_sweep() -> Outcome {
    let start = Instant::now();
    let settings = magnus(500.0, 0.2);
    let mut worst: f64 = 0.0;
    for g in [0.1, 0.2, 0.3, 0.4, 0.5] {
        let model = build_dtcm(5, g, 0.0, 1.0).map_err(err)?;
        let p = evolve_unitary(&model, &settings)
            .map_err(err)?
            .probabilities();
        let exact = dtcm5_probabilities(g).p;
        for n in 0..5 {
            let d = (p[(n, 2)] - exact[(n, 2)]).abs();
            within(&format!("|dP(3->{})| at g = {g}", n + 1), d, 2e-2)?;
            worst = worst.max(d);
        }
    }
    budget(start, Duration::from_secs(300))?;
    Ok(format!(
        "max |dP(3->n)| {worst:.1e} over 5 couplings at T = 500"
    ))
}

fn five_state_sweep() -> Outcome {
    let start = Instant::now();
    let (b, b3, b4, b5): (f64, f64, f64, f64) = (1.0, 4.0, 2.0, -3.0);
    let settings = magnus(200.0, 0.2);
    let mut worst: f64 = 0.0;
    for g in linear_grid(0.05, 0.5, 5).map_err(err)? {
        let (g13, g14) = (g * (b3 - b).sqrt(), g * (b4 - b).sqrt());
        let model = build_five_state(b, b3, b4, b5, g13, g14, [1, 1, 1]).map_err(err)?;
        let p = evolve_unitary(&model, &settings)
            .map_err(err)?
            .probabilities();
        let exact = five_state_probabilities(b, b3, b4, b5, g13, g14, [1, 1, 1])
            .map_err(err)?
            .p;
        for n in 0..5 {
            let d = (p[(n, 0)] - exact[(n, 0)]).abs();
            within(&format!("|dP(1->{})| at g = {g}", n + 1), d, 2e-2)?;
            worst = worst.max(d);
        }
    }
    budget(start, Duration::from_secs(300))?;
    Ok(format!(
        "max |dP(1->n)| {worst:.1e} over 5 couplings at T = 200"
    ))
}

fn six_state() -> Outcome {
    let start = Instant::now();
    let (b1, b2, b3, g) = (3.0, 2.0, 1.0, 0.3);
    let exact = six_state_probabilities(b1, b2, b3, g, g, g).map_err(err)?;
    within(
        "stochasticity residual",
        exact.stochasticity_residual(),
        1e-12,
    )?;
    within("symmetry residual", exact.symmetry_residual(), 1e-12)?;
    let anti_exact = (0..6)
        .map(|k| exact.p[(k, 5 - k)].abs())
        .fold(0.0, f64::max);
    within("analytic antidiagonal", anti_exact, 0.0)?;

    let sector = four_state_bowtie_sector(b1, b2, b3, g, g, g).map_err(err)?;
    ensure(
        exact.p[(0, 3)] == sector.p[(2, 0)]
            && exact.p[(0, 4)] == sector.p[(1, 0)]
            && exact.p[(1, 3)] == sector.p[(3, 0)],
        || "marginalization identities differ".into(),
    )?;

    let model = build_six_state(b1, b2, b3, g, g, g).map_err(err)?;
    let p = evolve_unitary(&model, &magnus(200.0, 0.2))
        .map_err(err)?
        .probabilities();
    let dp = max_abs_real(&(&p - &exact.p));
    within("max |P_num - P|", dp, 1e-2)?;
    let anti = (0..6).map(|k| p[(k, 5 - k)]).fold(0.0, f64::max);
    within("numeric antidiagonal", anti, 1e-3)?;
    budget(start, Duration::from_secs(120))?;
    Ok(format!(
        "max |dP| {dp:.1e}, antidiagonal {anti:.1e}, marginals exact"
    ))
}

/// `Im c₄ / Re c₄` along the connectivity cycle `0 → 1 → 3 → 2 → 0`.
fn four_state_ratio(u: &CMatrix) -> Result<f64, String> {
    let c4 = cycle4(u, (0, 1, 2, 3)).map_err(err)?;
    Ok(c4.im / c4.re)
}

fn four_state_model() -> Result<mlz_core::MlzModel, String> {
    build_four_state(0.1, 1.25, 0.65, 0.37, 0.5).map_err(err)
}

fn four_state_trend() -> Outcome {
    let start = Instant::now();
    let model = four_state_model()?;
    let est = scattering_estimate(&model, &[50.0, 1000.0], &magnus(1000.0, 0.2)).map_err(err)?;
    let r50 = four_state_ratio(&est.snapshots[0].u)?.abs();
    let r1000 = four_state_ratio(&est.snapshots[1].u)?.abs();
    within("|r4(T = 1000)|", r1000, 5e-3)?;
    ensure(r1000 < r50, || {
        format!("|r4| grew from {r50:.2e} to {r1000:.2e}")
    })?;
    budget(start, Duration::from_secs(300))?;
    Ok(format!("|r4| {r50:.1e} at T = 50, {r1000:.1e} at T = 1000"))
}

fn four_state_extended() -> Outcome {
    let model = four_state_model()?;
    let u = evolve_unitary(&model, &magnus(2038.0, 0.1)).map_err(err)?;
    let r = four_state_ratio(&u.u)?.abs();
    ensure((1.45e-4..=4.35e-4).contains(&r), || {
        format!("|r4(T = 2038)| = {r:.2e} outside 2.9e-4 ± 50%")
    })?;
    Ok(format!("|r4(T = 2038)| {r:.2e}"))
}

fn chain_scan() -> Outcome {
    let start = Instant::now();
    let family = |g: f64| build_chain(&[5.0, 2.0, 1.0, 0.0], &[0.5, 0.5, g]);
    let settings = magnus(250.0, 0.2);
    let grid = linear_grid(0.1, 0.9, 17).map_err(err)?;
    let result = sweep(
        &family,
        "chain (5, 2, 1, 0), g1 = g2 = 0.5",
        &grid,
        &settings,
        None,
    )
    .map_err(err)?;
    let found = find_simultaneous_zero(&result, &family, &settings, &RefineSettings::default())
        .map_err(err)?
        .ok_or("no simultaneous zero found")?;
    within("|g* - 0.47|", (found.g - 0.47).abs(), 0.02)?;
    within("|r3(g*)|", found.r3.abs(), 1e-2)?;
    within("|r4(g*)|", found.r4.abs(), 1e-2)?;
    budget(start, Duration::from_secs(600))?;
    Ok(format!(
        "g* = {:.4}, |r3| {:.1e}, |r4| {:.1e}",
        found.g,
        found.r3.abs(),
        found.r4.abs()
    ))
}

fn bt3_bip() -> BipartiteStructure {
    BipartiteStructure::from_groups(vec![2, 2, 1]).expect("valid groups")
}

fn stokes_closure() -> Outcome {
    let (b1, b2, g1, g2) = half_bowtie();
    let closed = bowtie3_stokes(b1, b2, g1, g2).map_err(err)?;
    let s = bowtie3_scattering(b1, b2, g1, g2).map_err(err)?.s.unwrap();
    let (s1, s2) = factor_scattering(&s, &closed.eta, 1e-12).map_err(err)?;
    let d12 = max_abs(&(&s1 - &closed.s1)).max(max_abs(&(&s2 - &closed.s2)));
    within("factorization vs closed forms", d12, 1e-12)?;
    let (s3, s4) = mirror_stokes(&s1, &s2, &closed.eta, &bt3_bip()).map_err(err)?;
    let d34 = max_abs(&(&s3 - &closed.s3)).max(max_abs(&(&s4 - &closed.s4)));
    within("mirrored vs closed forms", d34, 1e-12)?;
    let mono = check_monodromy(&closed, 1e-10);
    within("monodromy residual", mono.residual, 1e-10)?;
    let dual = dual_scattering(&closed, &bt3_bip()).map_err(err)?;
    let dd = max_abs(&(&dual.s_prime - bowtie3_dual_amplitudes(0.5, 0.5)));
    within("dual vs closed form", dd, 1e-12)?;
    Ok(format!(
        "factors {d12:.0e}, mirrored {d34:.0e}, monodromy {:.0e}, dual {dd:.0e}",
        mono.residual
    ))
}

fn condensate() -> Outcome {
    let start = Instant::now();
    let (b1, b2, g1, g2) = half_bowtie();
    let closed = bowtie3_stokes(b1, b2, g1, g2).map_err(err)?;
    let dual = dual_scattering(&closed, &bt3_bip()).map_err(err)?;
    let n = condensate_populations(&dual, &[0.0; 3]).map_err(err)?;
    let exact = [5.0, 10.0, 15.0];
    let dn = n
        .iter()
        .zip(&exact)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    within("closed-form populations vs (5, 10, 15)", dn, 1e-12)?;
    within(
        "closed-form conservation",
        (n[2] - n[0] - n[1]).abs(),
        1e-12,
    )?;

    let model = build_bowtie(0.0, &[(b1, g1), (b2, g2)]).map_err(err)?;
    let bip = detect_bipartition(&model).map_err(err)?;
    let u = evolve_nonunitary(
        &dual_bosonic(&model, &bip).map_err(err)?,
        &PropagationSettings::new(300.0, 0.1).map_err(err)?,
    )
    .map_err(err)?;
    let numeric = DualScattering {
        s_prime: permute_matrix(&u.u, &BT3_STATES),
        signature: bip.permuted(&BT3_STATES).signature(),
        states: BT3_STATES.to_vec(),
    };
    let m = condensate_populations(&numeric, &[0.0; 3]).map_err(err)?;
    let rel = m
        .iter()
        .zip(&exact)
        .map(|(a, b)| (a - b).abs() / b)
        .fold(0.0, f64::max);
    within("numeric relative deviation", rel, 2e-2)?;
    within("numeric conservation", (m[2] - m[0] - m[1]).abs(), 1e-3)?;
    budget(start, Duration::from_secs(60))?;
    Ok(format!(
        "(n_a, n_b1, n_b2) = ({:.0}, {:.0}, {:.0}); numeric ({:.3}, {:.3}, {:.3}) at T = 300",
        n[2], n[0], n[1], m[2], m[0], m[1]
    ))
}

fn property_suites() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let unitary = magnus(150.0, 0.2);
    let dual_settings = PropagationSettings::new(40.0, 0.05).map_err(err)?;
    let mut worst = [0.0f64; 5];
    const MODELS: usize = 100;
    for k in 0..MODELS {
        let model = common::random_bipartite(&mut rng, 6, 0.5);
        let bip = detect_bipartition(&model).map_err(err)?;
        let u =
            evolve_unitary(&model, &unitary).map_err(|e| format!("bipartite model {k}: {e}"))?;
        let unit = u.unitarity_residual.unwrap_or(f64::NAN);
        let sym = check_bipartite_symmetry(&u.u, &bip, 1e-2)
            .map_err(err)?
            .residual;
        let trace = check_trace_identity(&u.u, &bip, 1e-2)
            .map_err(err)?
            .residual;
        let eta_sum = eta(&model).sum().abs();
        let dual = evolve_nonunitary(&dual_bosonic(&model, &bip).map_err(err)?, &dual_settings)
            .map_err(|e| format!("dual of bipartite model {k}: {e}"))?;
        let pseudo = dual.pseudo_unitarity_residual.unwrap_or(f64::NAN);
        for (w, v) in worst.iter_mut().zip([unit, sym, trace, eta_sum, pseudo]) {
            *w = w.max(v);
        }
    }
    within("unitarity residual", worst[0], 1e-8)?;
    within("bipartite symmetry residual", worst[1], 1e-2)?;
    within("trace residual", worst[2], 1e-2)?;
    within("eta sum", worst[3], 1e-12)?;
    within("dual pseudo-unitarity", worst[4], 1e-6)?;

    let mut bw = [0.0f64; 5];
    for k in 0..MODELS {
        let model = common::random_bowtie(&mut rng, 8, 0.5);
        let n = model.n();
        let bt = bowtie_alpha(&model).map_err(err)?;
        let sol = &bt.solution;
        let m = bt.bipartition.m();
        let alpha2 = max_abs_real(&(&bt.alpha * &bt.alpha - RMatrix::identity(n, n)));
        let det = (bt.alpha.determinant() - (-1f64).powi(m as i32)).abs();
        let s_model = permute_matrix(sol.s.as_ref().unwrap(), &invert_permutation(&sol.states));
        let hc = check_hierarchy(&s_model, &model, &all_orders(&model), 1e-10)
            .map_err(err)?
            .iter()
            .map(|r| r.residual)
            .fold(0.0, f64::max);
        let schedule = geometric_schedule(150.0, 1.04, 8);
        let est = scattering_estimate(&model, &schedule, &unitary)
            .map_err(|e| format!("bowtie {k}: {e}"))?;
        let dp = max_abs_real(&(est.mean_probabilities() - sol.p_in_model_order()));
        for (w, v) in bw
            .iter_mut()
            .zip([stochasticity_residual(&sol.p), alpha2, det, hc, dp])
        {
            *w = w.max(v);
        }
    }
    within("bowtie stochasticity", bw[0], 1e-12)?;
    within("alpha^2 - 1", bw[1], 1e-12)?;
    within("det alpha - (-1)^M", bw[2], 1e-12)?;
    within("bowtie HC minors", bw[3], 1e-10)?;
    within("bowtie numeric |dP|", bw[4], 1e-2)?;
    Ok(format!(
        "{MODELS} bipartite: unitarity {:.0e}, symmetry {:.0e}, trace {:.0e}, dual {:.0e}; \
         {MODELS} bowties: HC {:.0e}, numeric |dP| {:.1e}",
        worst[0], worst[1], worst[2], worst[4], bw[3], bw[4]
    ))
}

fn misprint_regression() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_sum: f64 = 0.0;
    let mut min_entry = f64::INFINITY;
    for _ in 0..20 {
        let x = rng.random_range(f64::EPSILON..1.0);
        let p = dtcm4_from_x(x).map_err(err)?.p;
        for row in p.row_iter() {
            worst_sum = worst_sum.max((row.sum() - 1.0).abs());
        }
        min_entry = min_entry.min(p.min());
    }
    within("row-sum deviation", worst_sum, 4.0 * f64::EPSILON)?;
    ensure(min_entry >= 0.0, || {
        format!("negative entry {min_entry:.3e}")
    })?;
    Ok(format!(
        "row sums within {worst_sum:.0e}, smallest entry {min_entry:.1e}"
    ))
}

fn run(id: &str, name: &str, check: fn() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome =
        catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".to_string()));
    let secs = start.elapsed().as_secs_f64();
    let (tag, text, ok) = match outcome {
        Ok(msg) => ("PASS", msg, true),
        Err(msg) => ("FAIL", msg, false),
    };
    println!("{tag} {id:>2} {name}: {text} [{secs:.1} s]");
    ok
}

type Criterion = (&'static str, &'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("1", "three-state bowtie exactness", three_state_bowtie),
        ("2", "five-state DTCM", dtcm5_sweep),
        ("3", "five-state model, tau = (1, 1, 1)", five_state_sweep),
        ("4", "six-state composite", six_state),
        ("5", "cyclic-product trend", four_state_trend),
        ("6", "simultaneous-zero scan", chain_scan),
        ("7", "Stokes closure", stokes_closure),
        ("8", "condensate duality", condensate),
        ("9", "property suites", property_suites),
        ("10", "DTCM4 row sums", misprint_regression),
    ];
    let mut failed = 0;
    for (id, name, check) in criteria {
        if !run(id, name, check) {
            failed += 1;
        }
    }
    if std::env::var_os("MLZ_ACCEPTANCE_EXTENDED").is_some() {
        // Informational; not one of the ten criteria.
        run("5x", "four-state ratio at T = 2038", four_state_extended);
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//!
//! Every tolerance below is pinned here, next to the criterion it gates.
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use dnle_core::asymptotics::{
    barrier_residual, choose_lower_barrier, choose_upper_barrier, measure_profile_bounds,
    positivity_experiment, quasilinear_convergence_report, rate_report_degenerate, sandwich_check,
};
use dnle_core::evolution::{
    entropy, geometric_times, rescale_degenerate, solve, step, EvolutionState, SolverControls,
    Trajectory,
};
use dnle_core::operators::{gamma1, gamma2, monotonicity_gap, FluxRegularization};
use dnle_core::selfsimilar::{
    integrate_profile, BarenblattConstants, BarenblattSolution, SelfSimilarSpec, StepControls,
};
use dnle_core::stationary::{
    compute_first_eigenpair, compute_profile_f, interval_eigenvalue_formula, ProfileMethod,
};
use dnle_core::{Domain, Field, Parameters};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::Instant;

// Criterion 1: fitted slope of the weighted error, bump data.
const C1_SLOPE_BAND: f64 = 0.15;
// Criterion 2: relative match to the closed-form weighted error, and the
// band for C_num around mu.
const C2_REL_MATCH: f64 = 0.05;
const C2_CNUM_BAND: f64 = 0.05;
// Criterion 3: residual contraction factor per grid halving (order >= 0.85).
const C3_CONTRACTION: f64 = 1.8;
// Criterion 4: ODE / closed-form agreement in max norm.
const C4_MAX_NORM: f64 = 1e-6;
// Criterion 5: eigenvalue relative errors.
const C5_P2_REL: f64 = 5e-3;
const C5_P3_REL: f64 = 1e-2;
// Criterion 6: monotone-flow slacks.
const C6_ORDER_SLACK: f64 = 1e-10;
const C6_ENTROPY_SLACK: f64 = 1e-8;
const C6_V_MONOTONE_SLACK: f64 = 1e-8;
// Criterion 7: algebraic-inequality slack.
const C7_GAP_SLACK: f64 = 1e-12;
// Criterion 8: quasilinear convergence bands.
const C8_CSTAR_REL: f64 = 0.02;
const C8_GAP_LIMIT: f64 = 0.05;
const C8_REF_LIMIT: f64 = 0.05;
// Criterion 9: barrier residual floor.
const C9_RESIDUAL_FLOOR: f64 = -1e-8;
// Criterion 10: sandwich slack when re-verifying the fitted bounds.
const C10_PIN_SLACK: f64 = 1e-9;

fn pme_params() -> Parameters {
    Parameters::new(2.0, 2.0, 1).unwrap()
}

fn bump(center: f64, width: f64, height: f64) -> impl Fn(f64) -> f64 {
    move |x: f64| {
        let s = (x - center) / width;
        let b = 1.0 - s * s;
        if b > 0.0 {
            height * b * b
        } else {
            0.0
        }
    }
}

/// Criterion 1: degenerate rate. m=2, p=2, N=1 on (0,1), bump data,
/// h = 1/256, t in [e, e^6]: fitted slope of sup |t^mu u - f| / f within
/// -1 +/- 0.15, in under two minutes.
#[test]
fn c01_degenerate_weighted_rate() {
    let start = Instant::now();
    let params = pme_params();
    let domain = Domain::interval(1.0, 257).unwrap();
    let profile = compute_profile_f(&params, &domain, ProfileMethod::MinimizeJ, 1e-9).unwrap();

    let u0 = Field::from_fn(&domain, bump(0.5, 0.2, 1.0));
    let mut controls = SolverControls::for_params(&params);
    controls.dt_init = 1e-4;
    controls.dt_growth = 1.02;
    // A geometric dt settles onto a self-similar attractor with a slightly
    // shifted rate (an O(dt/t) floor in the weighted error); capping dt keeps
    // the late-time residual a pure s-shift, which the slope cannot see.
    controls.dt_max = 0.02;
    let t_end = 6f64.exp();
    let outputs = geometric_times(1f64.exp(), t_end, 40);
    let traj = solve(&u0, t_end, &params, &domain, &controls, &outputs).unwrap();
    let report = rate_report_degenerate(&traj, &profile.f, &params, &domain).unwrap();

    let elapsed = start.elapsed().as_secs_f64();
    assert!(
        (report.slope + 1.0).abs() <= C1_SLOPE_BAND,
        "criterion 01 FAIL: slope {} outside -1 +/- {C1_SLOPE_BAND}",
        report.slope
    );
    assert!(elapsed < 120.0, "criterion 01 FAIL: took {elapsed:.1} s");
    println!(
        "criterion 01 PASS: weighted-rate slope {:.4} (band -1 +/- {C1_SLOPE_BAND}), C_num = {:.4}, {elapsed:.1} s",
        report.slope, report.constant_envelope
    );
}

/// Criterion 2: sharpness on separate-variables data u0 = s^{-mu} f, s = 1.
/// The numerical weighted error matches |t^mu (1+t)^{-mu} - 1| within 5%
/// relative for t >= 1, and C_num lands in [0.95 mu, 1.05 mu].
#[test]
fn c02_sharpness_separate_variables() {
    let params = pme_params();
    let mu = params.mu().unwrap();
    let domain = Domain::interval(1.0, 257).unwrap();
    let profile = compute_profile_f(&params, &domain, ProfileMethod::MinimizeJ, 1e-10).unwrap();

    let s_offset: f64 = 1.0;
    let mut u0 = profile.f.clone();
    for v in u0.values_mut() {
        *v *= s_offset.powf(-mu);
    }
    let mut controls = SolverControls::for_params(&params);
    // Constant dt: its persistent error on the separate-variables family is a
    // drift of s of size (mu+1)/2 dt log(T/s), about 1.2% here — a uniform
    // relative offset of the weighted error, well inside the bands.
    controls.dt_init = 2e-3;
    controls.dt_max = 2e-3;
    controls.dt_growth = 1.0;
    controls.inner_tol = 1e-12;
    let t_end = 6f64.exp();
    let outputs = geometric_times(1.0, t_end, 30);
    let traj = solve(&u0, t_end, &params, &domain, &controls, &outputs).unwrap();
    let report = rate_report_degenerate(&traj, &profile.f, &params, &domain).unwrap();

    for (k, &t) in report.times.iter().enumerate() {
        let closed_form = 1.0 - (t / (s_offset + t)).powf(mu);
        let rel = (report.weighted_errors[k] - closed_form).abs() / closed_form;
        assert!(
            rel <= C2_REL_MATCH,
            "criterion 02 FAIL: t = {t}: weighted {} vs closed form {closed_form} (rel {rel:.3})",
            report.weighted_errors[k]
        );
    }
    let c_num = report.constant_envelope;
    assert!(
        c_num >= (1.0 - C2_CNUM_BAND) * mu && c_num <= (1.0 + C2_CNUM_BAND) * mu,
        "criterion 02 FAIL: C_num = {c_num} outside [{}, {}]",
        (1.0 - C2_CNUM_BAND) * mu,
        (1.0 + C2_CNUM_BAND) * mu
    );
    // Sharpness invariant: C_num equals mu s within 2% by closed-form algebra.
    assert!(
        (c_num - mu * s_offset).abs() <= 0.02 * mu * s_offset,
        "criterion 02 FAIL: C_num = {c_num} more than 2% away from mu s = {}",
        mu * s_offset
    );
    println!(
        "criterion 02 PASS: weighted error matches closed form within {C2_REL_MATCH}, C_num = {c_num:.4} (mu = {mu})"
    );
}

/// Discrete PDE residual of a closed-form solution on a radial N = 1 grid:
/// max over interior nodes with r <= r_cut of |u_t - Delta_p u^m|.
fn barenblatt_pde_residual(
    sol: &BarenblattSolution,
    params: &Parameters,
    n: usize,
    radius: f64,
    r_window: (f64, f64),
    t: f64,
) -> f64 {
    let domain = Domain::ball(radius, 1, n).unwrap();
    let u = Field::from_fn(&domain, |r| sol.value(r, t, params));
    let w = u.powf_clamped(params.m);
    let lap = dnle_core::operators::discrete_p_laplacian(
        &domain,
        &w,
        params.p,
        FluxRegularization::none(),
    )
    .unwrap();
    let mut res: f64 = 0.0;
    for i in domain.interior_indices() {
        let r = domain.nodes()[i];
        if r < r_window.0 || r > r_window.1 {
            continue;
        }
        res = res.max((sol.time_derivative(r, t, params) - lap[i]).abs());
    }
    res
}

/// Criterion 3: the derived Barenblatt coefficient q passes the interior
/// PDE-residual refinement test (factor >= 1.8 per halving) for
/// (m=2, p=2, N=1) and (m=1, p=3, N=1); the printed coefficient fails it for
/// m = 2, p = 2. The discrepancy is documented in the constants themselves.
#[test]
fn c03_barenblatt_coefficient_oracle() {
    let grids = [129usize, 257, 513, 1025];
    // Probe window: away from the free boundary (flat landing) and away from
    // the symmetry axis, where the p > 2 profile has an r^{p/(p-1)} cusp with
    // vanishing gradient and the flux stencil is not pointwise consistent.
    for (m, p) in [(2.0, 2.0), (1.0, 3.0)] {
        let params = Parameters::new(m, p, 1).unwrap();
        let sol = BarenblattSolution::from_height(&params, 1.0, 1.0).unwrap();
        let window = (0.2, 0.65 * sol.support_radius(0.0).min(3.0));
        let res: Vec<f64> = grids
            .iter()
            .map(|&n| barenblatt_pde_residual(&sol, &params, n, 3.0, window, 0.0))
            .collect();
        for k in 1..res.len() {
            let factor = res[k - 1] / res[k];
            assert!(
                factor >= C3_CONTRACTION,
                "criterion 03 FAIL: m={m} p={p}: residuals {res:?}, factor {factor:.2}"
            );
        }
    }

    // Negative control: the printed coefficient (missing the 1/m factor)
    // leaves an O(1) residual for m = 2, p = 2 that refinement cannot fix.
    let params = pme_params();
    let derived = BarenblattSolution::from_height(&params, 1.0, 1.0).unwrap();
    let printed = BarenblattSolution {
        constants: BarenblattConstants {
            coefficient: derived.constants.printed_coefficient,
            ..derived.constants
        },
        ..derived
    };
    assert!(
        (printed.constants.coefficient - 1.0 / 6.0).abs() < 1e-15,
        "printed coefficient should be 1/6 for m=2, p=2"
    );
    let window = (0.2, 0.65 * printed.support_radius(0.0).min(3.0));
    let res_coarse = barenblatt_pde_residual(&printed, &params, 129, 3.0, window, 0.0);
    let res_fine = barenblatt_pde_residual(&printed, &params, 1025, 3.0, window, 0.0);
    assert!(
        res_fine > 0.5 * res_coarse && res_fine > 1e-3,
        "criterion 03 FAIL: printed coefficient unexpectedly converges ({res_coarse} -> {res_fine})"
    );
    println!(
        "criterion 03 PASS: derived q converges at order >= 0.85 on both parameter sets; printed coefficient stalls at residual {res_fine:.3e} for m=2, p=2"
    );
}

/// Criterion 4: integrate_profile reproduces the closed-form Barenblatt
/// profile within 1e-6 in max norm for both parameter sets, in under 5 s.
#[test]
fn c04_ode_closed_form_equivalence() {
    let start = Instant::now();
    for (m, p) in [(2.0, 2.0), (1.0, 3.0)] {
        let params = Parameters::new(m, p, 1).unwrap();
        let spec = SelfSimilarSpec::barenblatt(&params, 0.0, 1.0).unwrap();
        let sol = BarenblattSolution::from_height(&params, 1.0, 0.0).unwrap();
        let curve =
            integrate_profile(&spec, &params, 1.1 * sol.a, &StepControls::default()).unwrap();
        let pp = p / (p - 1.0);
        let mut max_err: f64 = 0.0;
        for (idx, &r) in curve.r.iter().enumerate() {
            let bracket = sol.constants.coefficient * (sol.a.powf(pp) - r.powf(pp));
            let exact = if bracket <= 0.0 {
                0.0
            } else {
                bracket.powf(params.kappa / (params.kappa - 1.0))
            };
            max_err = max_err.max((curve.g[idx] - exact).abs());
        }
        assert!(
            max_err <= C4_MAX_NORM,
            "criterion 04 FAIL: m={m} p={p}: max-norm {max_err:.3e}"
        );
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 5.0, "criterion 04 FAIL: took {elapsed:.2} s");
    println!("criterion 04 PASS: ODE matches the closed form within {C4_MAX_NORM} ({elapsed:.2} s)");
}

/// Criterion 5: eigenvalue oracles at h = 1/512. p = 2 within 0.5% of pi^2;
/// p = 3 within 1% of (p-1) (2 pi / (p sin(pi/p)))^p.
#[test]
fn c05_eigenvalue_oracles() {
    let domain = Domain::interval(1.0, 513).unwrap();
    let eig2 = compute_first_eigenpair(2.0, &domain, 1e-8).unwrap();
    let exact2 = PI * PI;
    let rel2 = ((eig2.lambda1 - exact2) / exact2).abs();
    assert!(
        rel2 <= C5_P2_REL,
        "criterion 05 FAIL: p=2 lambda1 = {} (rel {rel2:.2e})",
        eig2.lambda1
    );

    let eig3 = compute_first_eigenpair(3.0, &domain, 1e-8).unwrap();
    let exact3 = interval_eigenvalue_formula(3.0, 1.0);
    let rel3 = ((eig3.lambda1 - exact3) / exact3).abs();
    assert!(
        rel3 <= C5_P3_REL,
        "criterion 05 FAIL: p=3 lambda1 = {} vs {exact3} (rel {rel3:.2e})",
        eig3.lambda1
    );
    println!(
        "criterion 05 PASS: lambda1(p=2) = {:.6} (rel {rel2:.1e}), lambda1(p=3) = {:.4} vs {exact3:.4} (rel {rel3:.1e})",
        eig2.lambda1, eig3.lambda1
    );
}

/// Criterion 6: monotone-flow property suite. 200 random ordered data pairs
/// stay ordered (slack 1e-10); along a rescaled degenerate orbit the entropy
/// is non-increasing (slack 1e-8) and v is nodewise non-decreasing (1e-8).
#[test]
fn c06_monotone_flow_suite() {
    let params = pme_params();
    let n = 33;
    let domain = Domain::interval(1.0, n).unwrap();
    let mut controls = SolverControls::for_params(&params);
    controls.dt_init = 1e-3;
    controls.dt_max = 1e-3;
    controls.dt_growth = 1.0;
    controls.inner_tol = 1e-12;

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for pair in 0..200 {
        let mut low = Field::zeros(n);
        let mut high = Field::zeros(n);
        for i in domain.interior_indices() {
            let base = rng.random::<f64>();
            let extra = rng.random::<f64>() * 0.5;
            low[i] = base;
            high[i] = base + extra;
        }
        let outputs = [0.02, 0.05];
        let traj_low = solve(&low, 0.05, &params, &domain, &controls, &outputs).unwrap();
        let traj_high = solve(&high, 0.05, &params, &domain, &controls, &outputs).unwrap();
        for (sl, sh) in traj_low.states.iter().zip(&traj_high.states) {
            for i in 0..n {
                assert!(
                    sl.u[i] <= sh.u[i] + C6_ORDER_SLACK,
                    "criterion 06 FAIL: pair {pair} t = {}: order violated by {}",
                    sl.t,
                    sl.u[i] - sh.u[i]
                );
            }
        }
    }

    // Rescaled degenerate orbit: exact geometric stepping after a burn-in.
    let domain = Domain::interval(1.0, 129).unwrap();
    let mut controls = SolverControls::for_params(&params);
    controls.dt_init = 1e-4;
    controls.dt_growth = 1.05;
    controls.inner_tol = 1e-12;
    let u0 = Field::from_fn(&domain, bump(0.45, 0.25, 1.0));
    let burn = solve(&u0, 1.0, &params, &domain, &controls, &[1.0]).unwrap();

    let ratio = 0.01f64.exp(); // dtau = 0.01 exactly
    let mut state = EvolutionState {
        t: 1.0,
        u: burn.states[0].u.clone(),
    };
    let mut states = vec![state.clone()];
    for k in 0..600 {
        let dt = state.t * (ratio - 1.0);
        state = step(&state, dt, &params, &domain, &controls).unwrap();
        if (k + 1) % 10 == 0 {
            states.push(state.clone());
        }
    }
    let traj = Trajectory {
        states,
        diagnostics: vec![],
    };
    let rescaled = rescale_degenerate(&traj, &params).unwrap();
    let mut worst_v: f64 = 0.0;
    let mut worst_e: f64 = 0.0;
    let mut prev_entropy = f64::INFINITY;
    for (k, v) in rescaled.fields.iter().enumerate() {
        if k > 0 {
            for i in 0..domain.len() {
                worst_v = worst_v.max(rescaled.fields[k - 1][i] - v[i]);
            }
        }
        let e = entropy(v, &params, &domain).unwrap();
        if k > 0 {
            worst_e = worst_e.max(e - prev_entropy);
        }
        prev_entropy = e;
    }
    assert!(
        worst_v <= C6_V_MONOTONE_SLACK,
        "criterion 06 FAIL: rescaled orbit decreased by {worst_v:.3e}"
    );
    assert!(
        worst_e <= C6_ENTROPY_SLACK,
        "criterion 06 FAIL: entropy increased by {worst_e:.3e}"
    );
    println!(
        "criterion 06 PASS: 200 ordered pairs stay ordered (slack {C6_ORDER_SLACK}); v-monotonicity slack {worst_v:.1e}, entropy slack {worst_e:.1e}"
    );
}

/// Criterion 7: algebraic-inequality suite. 1e4 random vector pairs per
/// exponent: weak monotonicity >= 0 always, strong form with
/// gamma_2 = min(1, 2(p-1)) for p in {1.3, 1.7} and gamma_1 = 2^{2-p} for
/// p in {2, 3, 4}; no violation beyond 1e-12.
#[test]
fn c07_vector_inequality_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for &p in &[1.3, 1.7, 2.0, 3.0, 4.0] {
        let mut min_gap = f64::INFINITY;
        for _ in 0..10_000 {
            let dim = rng.random_range(1..=5);
            let a: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() * 6.0 - 3.0).collect();
            let b: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() * 6.0 - 3.0).collect();
            // Weak form.
            let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
            let fa = if na == 0.0 { 0.0 } else { na.powf(p - 2.0) };
            let fb = if nb == 0.0 { 0.0 } else { nb.powf(p - 2.0) };
            let weak: f64 = (0..dim)
                .map(|i| (fa * a[i] - fb * b[i]) * (a[i] - b[i]))
                .sum();
            assert!(
                weak >= -C7_GAP_SLACK,
                "criterion 07 FAIL: weak monotonicity violated at p = {p}"
            );
            let gap = monotonicity_gap(&a, &b, p).unwrap();
            min_gap = min_gap.min(gap);
            assert!(
                gap >= -C7_GAP_SLACK,
                "criterion 07 FAIL: strong gap {gap:.3e} at p = {p}, a = {a:?}, b = {b:?}"
            );
        }
        let constant = if p < 2.0 { gamma2(p) } else { gamma1(p) };
        println!("  p = {p}: constant {constant:.4}, smallest gap {min_gap:.3e}");
    }
    println!("criterion 07 PASS: 1e4 pairs per exponent, no violation beyond {C7_GAP_SLACK}");
}

/// Criterion 8: quasilinear convergence. Heat case with
/// u0 = 3 sin(pi x) + positivized perturbation: c* within 2% of the first
/// discrete Fourier coefficient. Nonlinear case p = 3, m = 1/2: envelope gap
/// decreasing, below 0.05 at the horizon, and REF sup below 0.05.
#[test]
fn c08_quasilinear_convergence() {
    // Heat case: the exact discrete Fourier coefficient is the oracle.
    let params = Parameters::new(1.0, 2.0, 1).unwrap();
    let n = 257;
    let domain = Domain::interval(1.0, n).unwrap();
    let u0 = Field::from_fn(&domain, |x| {
        3.0 * (PI * x).sin() + 0.5 * (2.0 * PI * x).sin().max(0.0)
    });
    let intervals = (n - 1) as f64;
    let fourier1: f64 = (1..n - 1)
        .map(|i| 2.0 / intervals * u0[i] * (PI * domain.nodes()[i]).sin())
        .sum();

    let dt = 1e-4;
    let mut controls = SolverControls::for_params(&params);
    controls.dt_init = dt;
    controls.dt_max = dt;
    controls.dt_growth = 1.0;
    controls.inner_tol = 1e-12;
    let t_end = 0.5;
    let outputs: Vec<f64> = (1..=20).map(|k| t_end * k as f64 / 20.0).collect();
    let traj = solve(&u0, t_end, &params, &domain, &controls, &outputs).unwrap();
    let eig = compute_first_eigenpair(2.0, &domain, 1e-9).unwrap();
    // The fixed-dt backward-Euler flow decays by 1/(1 + lambda dt) per step.
    let rate = (1.0 + eig.lambda1 * dt).ln() / dt;
    let report =
        quasilinear_convergence_report(&traj, &eig, params.m, &domain, C8_GAP_LIMIT, Some(rate))
            .unwrap();
    let rel = ((report.c_star - fourier1) / fourier1).abs();
    assert!(
        rel <= C8_CSTAR_REL,
        "criterion 08 FAIL: c* = {} vs Fourier {fourier1} (rel {rel:.3e})",
        report.c_star
    );
    // Envelope invariants: c_upper non-increasing, c_lower non-decreasing
    // (slack 1e-8), and the estimate stays bracketed.
    let env = &report.envelopes;
    for k in 1..env.times.len() {
        assert!(
            env.c_upper[k] <= env.c_upper[k - 1] + 1e-8,
            "criterion 08 FAIL: c_upper grew at sample {k}"
        );
        assert!(
            env.c_lower[k] >= env.c_lower[k - 1] - 1e-8,
            "criterion 08 FAIL: c_lower fell at sample {k}"
        );
    }
    assert!(env.c_lower_inf() <= report.c_star && report.c_star <= env.c_upper_inf());

    // Nonlinear quasilinear case p = 3, m = 1/2.
    let params = Parameters::new(0.5, 3.0, 1).unwrap();
    let n = 129;
    let domain = Domain::interval(1.0, n).unwrap();
    let eig = compute_first_eigenpair(3.0, &domain, 1e-8).unwrap();
    let s_profile = eig.eigenfunction.powf_clamped(1.0 / params.m);
    let u0 = Field::from_fn(&domain, |x| 1.0 + 0.3 * (2.0 * PI * x).sin());
    let u0 = {
        let mut u = s_profile.clone();
        for (i, v) in u.values_mut().iter_mut().enumerate() {
            *v *= u0[i];
        }
        u
    };
    let dt = 2e-4;
    let mut controls = SolverControls::for_params(&params);
    controls.dt_init = dt;
    controls.dt_max = dt;
    controls.dt_growth = 1.0;
    controls.inner_tol = 1e-12;
    let t_end = 4.0;
    let outputs: Vec<f64> = (1..=40).map(|k| t_end * k as f64 / 40.0).collect();
    let traj = solve(&u0, t_end, &params, &domain, &controls, &outputs).unwrap();
    let rate = (1.0 + eig.lambda1 * dt).ln() / dt;
    let report =
        quasilinear_convergence_report(&traj, &eig, params.m, &domain, C8_GAP_LIMIT, Some(rate))
            .unwrap();
    let gaps: Vec<f64> = report
        .envelopes
        .c_upper
        .iter()
        .zip(&report.envelopes.c_lower)
        .map(|(u, l)| u - l)
        .collect();
    for k in 1..gaps.len() {
        assert!(
            gaps[k] <= gaps[k - 1] + 1e-10,
            "criterion 08 FAIL: envelope gap grew at sample {k}: {gaps:?}"
        );
    }
    assert!(
        report.final_gap <= C8_GAP_LIMIT,
        "criterion 08 FAIL: final gap {}",
        report.final_gap
    );
    assert!(
        report.final_ref_sup <= C8_REF_LIMIT,
        "criterion 08 FAIL: final REF sup {}",
        report.final_ref_sup
    );
    println!(
        "criterion 08 PASS: heat c* = {:.4} vs Fourier (rel {rel:.1e}); nonlinear gap {:.3}, REF sup {:.3}",
        fourier1, report.final_gap, report.final_ref_sup
    );
}

/// Criterion 9: barrier certification for the heat case and one nonlinear
/// quasilinear case; a deliberately broken constant set is the negative
/// control.
#[test]
fn c09_barrier_certification() {
    for (m, p) in [(1.0, 2.0), (0.5, 3.0)] {
        let domain = Domain::interval(1.0, 257).unwrap();
        let eig = compute_first_eigenpair(p, &domain, 1e-8).unwrap();
        let bounds = measure_profile_bounds(
            &eig.eigenfunction,
            eig.lambda1,
            &domain,
            0.25 * domain.xi0(),
            2.0,
        )
        .unwrap();

        let upper = choose_upper_barrier(0.1, &bounds, p).unwrap();
        assert!(
            upper.condition_slack >= 0.0,
            "criterion 09 FAIL: m={m} p={p}: condition slack {}",
            upper.condition_slack
        );
        let samples: Vec<f64> = (0..=16).map(|k| upper.horizon * k as f64 / 16.0).collect();
        let resid = barrier_residual(&upper, &eig.eigenfunction, eig.lambda1, p, &domain, &samples)
            .unwrap();
        assert!(
            resid >= C9_RESIDUAL_FLOOR,
            "criterion 09 FAIL: m={m} p={p}: upper residual {resid:.3e}"
        );

        let lower = choose_lower_barrier(0.1, &bounds, p).unwrap();
        assert!(lower.condition_slack >= 0.0);
        let samples: Vec<f64> = (0..=16).map(|k| lower.horizon * k as f64 / 16.0).collect();
        let resid_lo =
            barrier_residual(&lower, &eig.eigenfunction, eig.lambda1, p, &domain, &samples)
                .unwrap();
        assert!(
            resid_lo >= C9_RESIDUAL_FLOOR,
            "criterion 09 FAIL: m={m} p={p}: lower residual {resid_lo:.3e}"
        );

        // Negative control: gut the gradient term by shrinking B a lot.
        let mut broken = upper;
        broken.b /= 1000.0;
        let resid_broken =
            barrier_residual(&broken, &eig.eigenfunction, eig.lambda1, p, &domain, &samples)
                .unwrap();
        assert!(
            resid_broken < 0.0,
            "criterion 09 FAIL: m={m} p={p}: broken constants still certify ({resid_broken:.3e})"
        );
        println!(
            "  m={m} p={p}: upper residual {resid:.3e}, lower {resid_lo:.3e}, broken {resid_broken:.3e}"
        );
    }
    println!("criterion 09 PASS: barriers certify with residual >= {C9_RESIDUAL_FLOOR}; negative control rejected");
}

/// Criterion 10: positivity and sandwich for compact bump data, m=2, p=2.
/// Measured T_inner <= T_boundary, both below the Barenblatt-comparison
/// bound; the sandwich pins u between the two separate-variables solutions.
#[test]
fn c10_positivity_and_sandwich() {
    let params = pme_params();
    let domain = Domain::interval(1.0, 257).unwrap();
    let profile = compute_profile_f(&params, &domain, ProfileMethod::MinimizeJ, 1e-9).unwrap();
    let mu = params.mu().unwrap();

    let u0 = Field::from_fn(&domain, bump(0.5, 0.15, 0.5));
    let mut controls = SolverControls::for_params(&params);
    controls.dt_init = 1e-5;
    controls.dt_growth = 1.02;
    controls.inner_tol = 1e-12;
    let t_end = 40.0;
    let outputs = geometric_times(1e-3, t_end, 120);
    let traj = solve(&u0, t_end, &params, &domain, &controls, &outputs).unwrap();

    let delta = 0.1;
    let report = positivity_experiment(&traj, &domain, delta).unwrap();
    let t_inner = report.t_inner.expect("criterion 10 FAIL: inner positivity unreached");
    let t_boundary = report
        .t_boundary
        .expect("criterion 10 FAIL: boundary positivity unreached");
    assert!(t_inner <= t_boundary);

    // Barenblatt comparison bound: a subsolution of height inner_level with
    // support delta must fill the 2 delta shell by T2 = (2 delta / a)^{1/beta} - s.
    let comparison = BarenblattSolution::touching(report.inner_level, delta, &params).unwrap();
    let t2 = comparison.reach_time(2.0 * delta);
    assert!(
        t_boundary <= t_inner + t2,
        "criterion 10 FAIL: T_boundary = {t_boundary} above T_inner + T2 = {}",
        t_inner + t2
    );

    let sandwich = sandwich_check(&traj, &profile.f, &params, &domain).unwrap();
    assert!(
        sandwich.s1 <= sandwich.s0,
        "criterion 10 FAIL: sandwich ordered wrong: s0 = {}, s1 = {}",
        sandwich.s0,
        sandwich.s1
    );
    // Re-verify the pinning at every sampled time.
    for state in &traj.states {
        for i in domain.interior_indices() {
            let upper = (sandwich.s1 + state.t).powf(-mu) * profile.f[i];
            assert!(
                state.u[i] <= upper + C10_PIN_SLACK,
                "criterion 10 FAIL: upper pin violated at t = {}",
                state.t
            );
            if state.t >= sandwich.lower_start {
                let lower = (sandwich.s0 + state.t).powf(-mu) * profile.f[i];
                assert!(
                    state.u[i] >= lower - C10_PIN_SLACK,
                    "criterion 10 FAIL: lower pin violated at t = {}",
                    state.t
                );
            }
        }
    }
    println!(
        "criterion 10 PASS: T_inner = {t_inner:.3}, T_boundary = {t_boundary:.3} <= {:.3}; sandwich s0 = {:.3}, s1 = {:.3}",
        t_inner + t2,
        sandwich.s0,
        sandwich.s1
    );
}

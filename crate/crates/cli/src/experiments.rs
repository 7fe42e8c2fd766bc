//! Experiment runners: build the inputs from a config, dispatch the library
//! and write deterministic CSV/JSON artifacts.

use crate::config::{Config, ExperimentKind};
use dnle_core::asymptotics::{
    positivity_experiment, quasilinear_convergence_report, rate_report_degenerate, sandwich_check,
    relative_error_field,
};
use dnle_core::evolution::{geometric_times, rescale_quasilinear, solve, Trajectory};
use dnle_core::report::{
    read_field_csv, write_diagnostics_csv, write_field_csv, write_series_csv,
    write_trajectory_csv, Json,
};
use dnle_core::selfsimilar::{
    barenblatt_constants, check_alpha_beta, integrate_profile, BarenblattSolution,
    SelfSimilarCase, SelfSimilarSpec, StepControls,
};
use dnle_core::stationary::{
    compute_first_eigenpair, compute_profile_f, interval_eigenvalue_formula, ProfileMethod,
};
use dnle_core::{Domain, DomainKind, DnleError, Field, Parameters};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

/// Failure classes mapped to exit codes by main.
#[derive(Debug)]
pub enum RunError {
    /// Exit 2: the config does not describe a runnable experiment.
    Config(String),
    /// Exit 3: the solver gave up.
    Solver(String),
    /// Exit 4: a built-in assertion failed (only with --assert).
    Assertion(String),
}

impl RunError {
    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config",
            RunError::Solver(_) => "solver",
            RunError::Assertion(_) => "assertion",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            RunError::Config(m) | RunError::Solver(m) | RunError::Assertion(m) => m,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Solver(_) => 3,
            RunError::Assertion(_) => 4,
        }
    }
}

fn solver_err(e: DnleError) -> RunError {
    RunError::Solver(e.to_string())
}

fn timestamp_secs() -> i64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs() as i64)
        .unwrap_or(0)
}

/// Finish a report object with the single non-deterministic key and write it.
fn write_report(path: &Path, mut json: Json) -> Result<(), RunError> {
    json.push("timestamp", Json::Int(timestamp_secs()));
    std::fs::write(path, json.render())
        .map_err(|e| RunError::Solver(format!("cannot write {}: {e}", path.display())))
}

/// Initial data from the init.* block.
fn initial_data(
    cfg: &Config,
    params: &Parameters,
    domain: &Domain,
) -> Result<Field, RunError> {
    let kind = cfg
        .get("init.kind")
        .ok_or_else(|| RunError::Config("init.kind: required key missing".into()))?;
    let ext = domain.extent();
    let center = cfg
        .f64_or("init.center", 0.5 * ext)
        .map_err(|v| RunError::Config(v.to_string()))?;
    let width = cfg
        .f64_or("init.width", 0.2 * ext)
        .map_err(|v| RunError::Config(v.to_string()))?;
    let height = cfg
        .f64_or("init.height", 1.0)
        .map_err(|v| RunError::Config(v.to_string()))?;
    let mut field = match kind {
        "bump" => Field::from_fn(domain, |x| {
            let s = (x - center) / width;
            let b = 1.0 - s * s;
            if b > 0.0 {
                height * b * b
            } else {
                0.0
            }
        }),
        "indicator" => Field::from_fn(domain, |x| {
            if (x - center).abs() <= width {
                height
            } else {
                0.0
            }
        }),
        "eigenmode" => match domain.kind {
            DomainKind::Interval { length } => {
                Field::from_fn(domain, |x| height * (std::f64::consts::PI * x / length).sin())
            }
            DomainKind::Ball { radius, .. } => {
                Field::from_fn(domain, |r| height * (1.0 - (r / radius) * (r / radius)))
            }
        },
        "separate_variables" => {
            let mu = params.degenerate_mu().map_err(solver_err)?;
            let s = cfg
                .f64_or("init.s", 1.0)
                .map_err(|v| RunError::Config(v.to_string()))?;
            let tol = cfg
                .f64_or("profile.tolerance", 1e-9)
                .map_err(|v| RunError::Config(v.to_string()))?;
            let profile = compute_profile_f(params, domain, ProfileMethod::MinimizeJ, tol)
                .map_err(solver_err)?;
            let mut u = profile.f;
            for v in u.values_mut() {
                *v *= s.powf(-mu);
            }
            u
        }
        "custom" => {
            let path = cfg
                .get("init.path")
                .ok_or_else(|| RunError::Config("init.path: required key missing".into()))?;
            let (xs, vs) = read_field_csv(Path::new(path))
                .map_err(|e| RunError::Config(format!("init.path: {e}")))?;
            if xs.len() != domain.len() {
                return Err(RunError::Config(format!(
                    "init.path: CSV has {} rows, domain has {} nodes",
                    xs.len(),
                    domain.len()
                )));
            }
            Field::new(vs).map_err(|e| RunError::Config(e.to_string()))?
        }
        other => return Err(RunError::Config(format!("unknown init.kind `{other}`"))),
    };
    for i in 0..domain.len() {
        if domain.is_boundary(i) {
            field[i] = 0.0;
        }
    }
    Ok(field)
}

fn output_times(cfg: &Config, t_end: f64) -> Result<Vec<f64>, RunError> {
    let first = cfg
        .f64_or("time.first_output", (t_end * 1e-3).min(1.0))
        .map_err(|v| RunError::Config(v.to_string()))?;
    let samples = cfg
        .usize_opt("time.samples")
        .map_err(|v| RunError::Config(v.to_string()))?
        .unwrap_or(40);
    if !(first > 0.0 && first < t_end && samples >= 2) {
        return Err(RunError::Config(format!(
            "time.first_output: need 0 < {first} < t_end with at least 2 samples"
        )));
    }
    Ok(geometric_times(first, t_end, samples))
}

fn evolve(
    cfg: &Config,
    params: &Parameters,
    domain: &Domain,
) -> Result<(Trajectory, Vec<f64>), RunError> {
    let t_end = cfg
        .f64_required("time.t_end")
        .map_err(|v| RunError::Config(v.to_string()))?;
    let u0 = initial_data(cfg, params, domain)?;
    let controls = cfg
        .solver_controls(params)
        .map_err(|v| RunError::Config(v.to_string()))?;
    let outputs = output_times(cfg, t_end)?;
    let traj = solve(&u0, t_end, params, domain, &controls, &outputs).map_err(solver_err)?;
    Ok((traj, outputs))
}

fn require_valid(cfg: &Config, kind: ExperimentKind) -> Result<(), RunError> {
    let violations = cfg.validate(kind);
    if violations.is_empty() {
        Ok(())
    } else {
        let lines: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        Err(RunError::Config(lines.join("; ")))
    }
}

pub fn run(
    kind: ExperimentKind,
    cfg: &Config,
    out_dir: &Path,
    assert_checks: bool,
) -> Result<PathBuf, RunError> {
    require_valid(cfg, kind)?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| RunError::Solver(format!("cannot create {}: {e}", out_dir.display())))?;
    match kind {
        ExperimentKind::Simulate => run_simulate(cfg, out_dir),
        ExperimentKind::Profile => run_profile(cfg, out_dir, assert_checks),
        ExperimentKind::Eigen => run_eigen(cfg, out_dir, assert_checks),
        ExperimentKind::Selfsim => run_selfsim(cfg, out_dir, assert_checks),
        ExperimentKind::Rate => run_rate(cfg, out_dir, assert_checks),
        ExperimentKind::Quasilinear => run_quasilinear(cfg, out_dir, assert_checks),
        ExperimentKind::Positivity => run_positivity(cfg, out_dir, assert_checks),
    }
}

fn run_simulate(cfg: &Config, out: &Path) -> Result<PathBuf, RunError> {
    let params = cfg.parameters().map_err(|v| RunError::Config(v.to_string()))?;
    let domain = cfg.domain().map_err(|v| RunError::Config(v.to_string()))?;
    let (traj, _) = evolve(cfg, &params, &domain)?;
    write_trajectory_csv(&out.join("trajectory.csv"), &traj, &domain).map_err(solver_err)?;
    write_diagnostics_csv(&out.join("diagnostics.csv"), &traj).map_err(solver_err)?;
    let last = traj.diagnostics.last().unwrap();
    let mut json = Json::obj();
    json.push("experiment", Json::Str("simulate".into()));
    json.push("regime", Json::Str(params.regime.as_str().into()));
    json.push("final_time", Json::Num(last.t));
    json.push("final_mass", Json::Num(last.mass));
    json.push("final_sup_norm", Json::Num(last.sup_norm));
    json.push("final_entropy", Json::Num(last.entropy));
    let path = out.join("simulate.json");
    write_report(&path, json)?;
    Ok(path)
}

fn run_profile(cfg: &Config, out: &Path, assert_checks: bool) -> Result<PathBuf, RunError> {
    let params = cfg.parameters().map_err(|v| RunError::Config(v.to_string()))?;
    let domain = cfg.domain().map_err(|v| RunError::Config(v.to_string()))?;
    let tol = cfg
        .f64_or("profile.tolerance", 1e-8)
        .map_err(|v| RunError::Config(v.to_string()))?;
    let method = match cfg.get("profile.method").unwrap_or("minimize_j") {
        "minimize_j" => ProfileMethod::MinimizeJ,
        "long_time_limit" => ProfileMethod::LongTimeLimit,
        other => {
            return Err(RunError::Config(format!(
                "profile.method: unknown method `{other}`"
            )))
        }
    };
    let profile = compute_profile_f(&params, &domain, method, tol).map_err(solver_err)?;
    write_field_csv(&out.join("profile.csv"), &domain, &profile.f).map_err(solver_err)?;

    let w = profile.f.powf_clamped(params.m);
    let slope = dnle_core::stationary::boundary_principle_check(&w, &domain);
    // Numerical envelope of |grad f| / d^{1/m - 1} (no closed-form constant
    // is known; the measured value is the report).
    let h = domain.spacing();
    let mut grad_envelope: f64 = 0.0;
    for i in 0..domain.len() - 1 {
        let grad = ((profile.f[i + 1] - profile.f[i]) / h).abs();
        let d_mid = 0.5 * (domain.node_distances()[i] + domain.node_distances()[i + 1]);
        if d_mid > 0.0 {
            grad_envelope = grad_envelope.max(grad / d_mid.powf(1.0 / params.m - 1.0));
        }
    }
    let mut json = Json::obj();
    json.push("experiment", Json::Str("profile".into()));
    json.push("method", Json::Str(cfg.get("profile.method").unwrap_or("minimize_j").into()));
    json.push("residual", Json::Num(profile.residual_norm));
    json.push("c1", Json::Num(profile.boundary_constants.0));
    json.push("c2", Json::Num(profile.boundary_constants.1));
    json.push("gradient_envelope", Json::Num(grad_envelope));
    json.push("iterations", Json::Int(profile.iterations as i64));
    json.push("boundary_slope", Json::Num(slope));
    let path = out.join("profile.json");
    write_report(&path, json)?;

    if assert_checks {
        if profile.residual_norm > tol {
            return Err(RunError::Assertion(format!(
                "profile residual {} above tolerance {tol}",
                profile.residual_norm
            )));
        }
        if !(profile.boundary_constants.0 > 0.0 && slope > 0.0) {
            return Err(RunError::Assertion(
                "profile boundary envelope or boundary principle failed".into(),
            ));
        }
    }
    Ok(path)
}

fn run_eigen(cfg: &Config, out: &Path, assert_checks: bool) -> Result<PathBuf, RunError> {
    let params = cfg.parameters().map_err(|v| RunError::Config(v.to_string()))?;
    let domain = cfg.domain().map_err(|v| RunError::Config(v.to_string()))?;
    let tol = cfg
        .f64_or("eigen.tolerance", 1e-8)
        .map_err(|v| RunError::Config(v.to_string()))?;
    let eig = compute_first_eigenpair(params.p, &domain, tol).map_err(solver_err)?;
    write_field_csv(&out.join("eigen.csv"), &domain, &eig.eigenfunction).map_err(solver_err)?;
    let mut json = Json::obj();
    json.push("experiment", Json::Str("eigen".into()));
    json.push("lambda1", Json::Num(eig.lambda1));
    json.push("residual", Json::Num(eig.residual_norm));
    json.push("iterations", Json::Int(eig.iterations as i64));
    if let DomainKind::Interval { length } = domain.kind {
        json.push(
            "lambda1_formula",
            Json::Num(interval_eigenvalue_formula(params.p, length)),
        );
    }
    let path = out.join("eigen.json");
    write_report(&path, json)?;

    if assert_checks {
        if let DomainKind::Interval { length } = domain.kind {
            let exact = interval_eigenvalue_formula(params.p, length);
            let rel = ((eig.lambda1 - exact) / exact).abs();
            if rel > 0.01 {
                return Err(RunError::Assertion(format!(
                    "lambda1 = {} deviates from the 1D formula {exact} by {rel:.2e}",
                    eig.lambda1
                )));
            }
        }
    }
    Ok(path)
}

fn run_selfsim(cfg: &Config, out: &Path, assert_checks: bool) -> Result<PathBuf, RunError> {
    let params = cfg.parameters().map_err(|v| RunError::Config(v.to_string()))?;
    let height = cfg
        .f64_or("selfsim.height", 1.0)
        .map_err(|v| RunError::Config(v.to_string()))?;
    let s = cfg
        .f64_or("selfsim.s", 0.0)
        .map_err(|v| RunError::Config(v.to_string()))?;
    let spec = match cfg.get("selfsim.case") {
        Some("barenblatt") => {
            SelfSimilarSpec::barenblatt(&params, s, height).map_err(solver_err)?
        }
        Some("separate_variables") => {
            SelfSimilarSpec::separate_variables(&params, s, height).map_err(solver_err)?
        }
        Some(other) => {
            return Err(RunError::Config(format!(
                "selfsim.case: unknown case `{other}`"
            )))
        }
        None => {
            let beta = cfg
                .f64_required("selfsim.beta")
                .map_err(|v| RunError::Config(v.to_string()))?;
            match cfg.f64_opt("selfsim.alpha").map_err(|v| RunError::Config(v.to_string()))? {
                Some(alpha) => {
                    SelfSimilarSpec::new(alpha, beta, s, height, &params).map_err(solver_err)?
                }
                None => SelfSimilarSpec::from_beta(&params, beta, s, height).map_err(solver_err)?,
            }
        }
    };
    let bound = if spec.beta > 0.0 {
        dnle_core::selfsimilar::support_radius_bound(height, &params, spec.beta)
    } else {
        f64::INFINITY
    };
    let r_max = cfg
        .f64_or("selfsim.r_max", if bound.is_finite() { 1.5 * bound } else { 10.0 })
        .map_err(|v| RunError::Config(v.to_string()))?;
    let curve =
        integrate_profile(&spec, &params, r_max, &StepControls::default()).map_err(solver_err)?;
    write_series_csv(
        &out.join("selfsim_curve.csv"),
        &["r", "g", "g_prime"],
        &[&curve.r, &curve.g, &curve.g_prime],
    )
    .map_err(solver_err)?;

    let mut json = Json::obj();
    json.push("experiment", Json::Str("selfsim".into()));
    json.push("alpha", Json::Num(spec.alpha));
    json.push("beta", Json::Num(spec.beta));
    json.push(
        "constraint_residual",
        Json::Num(check_alpha_beta(spec.alpha, spec.beta, &params)),
    );
    json.push(
        "case",
        Json::Str(
            match curve.case {
                SelfSimilarCase::SeparateVariables => "separate_variables",
                SelfSimilarCase::Barenblatt => "barenblatt",
                SelfSimilarCase::Intermediate => "intermediate",
                SelfSimilarCase::SlowDecay => "slow_decay",
            }
            .into(),
        ),
    );
    match curve.support_radius {
        Some(a) => json.push("support_radius", Json::Num(a)),
        None => json.push("support_radius", Json::Str("none".into())),
    }
    match curve.crossing_slope {
        Some(k0) => json.push("crossing_slope", Json::Num(k0)),
        None => json.push("crossing_slope", Json::Str("none".into())),
    }
    if curve.case == SelfSimilarCase::Barenblatt {
        let constants = barenblatt_constants(&params).map_err(solver_err)?;
        json.push("coefficient", Json::Num(constants.coefficient));
        json.push(
            "printed_coefficient",
            Json::Num(constants.printed_coefficient),
        );
    }
    if curve.case == SelfSimilarCase::SlowDecay {
        let cls = dnle_core::selfsimilar::classify_decay(spec.alpha, spec.beta, &params)
            .map_err(solver_err)?;
        json.push("decay_exponent", Json::Num(cls.gamma));
        json.push("decay_coefficient_sign", Json::Num(cls.coefficient));
    }
    let path = out.join("selfsim.json");
    write_report(&path, json)?;

    if assert_checks {
        let resid = check_alpha_beta(spec.alpha, spec.beta, &params).abs();
        if resid > 1e-12 {
            return Err(RunError::Assertion(format!(
                "constraint-line residual {resid:.3e}"
            )));
        }
        if curve.case == SelfSimilarCase::Barenblatt {
            let sol = BarenblattSolution::from_height(&params, height, s).map_err(solver_err)?;
            let pp = params.p / (params.p - 1.0);
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
            if max_err > 1e-6 {
                return Err(RunError::Assertion(format!(
                    "ODE deviates from the closed form by {max_err:.3e}"
                )));
            }
        }
    }
    Ok(path)
}

fn run_rate(cfg: &Config, out: &Path, assert_checks: bool) -> Result<PathBuf, RunError> {
    let params = cfg.parameters().map_err(|v| RunError::Config(v.to_string()))?;
    let domain = cfg.domain().map_err(|v| RunError::Config(v.to_string()))?;
    let tol = cfg
        .f64_or("profile.tolerance", 1e-9)
        .map_err(|v| RunError::Config(v.to_string()))?;
    let profile =
        compute_profile_f(&params, &domain, ProfileMethod::MinimizeJ, tol).map_err(solver_err)?;
    let (traj, _) = evolve(cfg, &params, &domain)?;
    let report = rate_report_degenerate(&traj, &profile.f, &params, &domain).map_err(solver_err)?;
    write_series_csv(
        &out.join("rate_series.csv"),
        &["t", "error", "weighted_error"],
        &[&report.times, &report.errors, &report.weighted_errors],
    )
    .map_err(solver_err)?;
    let mut json = Json::obj();
    json.push("experiment", Json::Str("rate".into()));
    json.push("slope", Json::Num(report.slope));
    json.push("intercept", Json::Num(report.intercept));
    json.push("constant_envelope", Json::Num(report.constant_envelope));
    json.push("trivial", Json::Bool(report.trivial));
    json.push("profile_residual", Json::Num(profile.residual_norm));
    let path = out.join("rate_report.json");
    write_report(&path, json)?;

    if assert_checks && (report.slope + 1.0).abs() > 0.15 {
        return Err(RunError::Assertion(format!(
            "fitted slope {} outside -1 +/- 0.15",
            report.slope
        )));
    }
    Ok(path)
}

fn run_quasilinear(cfg: &Config, out: &Path, assert_checks: bool) -> Result<PathBuf, RunError> {
    let params = cfg.parameters().map_err(|v| RunError::Config(v.to_string()))?;
    let domain = cfg.domain().map_err(|v| RunError::Config(v.to_string()))?;
    let eig_tol = cfg
        .f64_or("eigen.tolerance", 1e-8)
        .map_err(|v| RunError::Config(v.to_string()))?;
    let eig = compute_first_eigenpair(params.p, &domain, eig_tol).map_err(solver_err)?;

    let dt = cfg
        .f64_or("quasilinear.dt", 2e-4)
        .map_err(|v| RunError::Config(v.to_string()))?;
    let horizon = cfg
        .f64_or("quasilinear.horizon", 2.0)
        .map_err(|v| RunError::Config(v.to_string()))?;
    let samples = cfg
        .usize_opt("quasilinear.samples")
        .map_err(|v| RunError::Config(v.to_string()))?
        .unwrap_or(25);
    let gap_threshold = cfg
        .f64_or("quasilinear.gap_threshold", 0.05)
        .map_err(|v| RunError::Config(v.to_string()))?;

    let u0 = initial_data(cfg, &params, &domain)?;
    let mut controls = cfg
        .solver_controls(&params)
        .map_err(|v| RunError::Config(v.to_string()))?;
    controls.dt_init = dt;
    controls.dt_max = dt;
    controls.dt_growth = 1.0;
    let outputs: Vec<f64> = (1..=samples)
        .map(|k| horizon * k as f64 / samples as f64)
        .collect();
    let traj = solve(&u0, horizon, &params, &domain, &controls, &outputs).map_err(solver_err)?;
    // Fixed-dt backward Euler decays by 1/(1 + lambda_1 dt) per step; use the
    // matching discrete rate so envelopes stay comparison-exact.
    let rate = (1.0 + eig.lambda1 * dt).ln() / dt;
    let report =
        quasilinear_convergence_report(&traj, &eig, params.m, &domain, gap_threshold, Some(rate));

    // The envelope series is written even when the gap is not yet converged.
    let (report, converged) = match report {
        Ok(r) => (r, true),
        Err(DnleError::NotConverged { .. }) => {
            let relaxed = quasilinear_convergence_report(
                &traj,
                &eig,
                params.m,
                &domain,
                f64::INFINITY,
                Some(rate),
            )
            .map_err(solver_err)?;
            (relaxed, false)
        }
        Err(e) => return Err(solver_err(e)),
    };

    // Per-sample REF sup against the normalized eigen-profile.
    let rescaled = rescale_quasilinear(&traj, rate).map_err(solver_err)?;
    let s_profile = eig.eigenfunction.powf_clamped(1.0 / params.m);
    let mut ref_sups = Vec::with_capacity(rescaled.fields.len());
    for v in &rescaled.fields {
        let phi = relative_error_field(v, &s_profile, params.m, &domain).map_err(solver_err)?;
        let mut sup: f64 = 0.0;
        for i in domain.interior_indices() {
            let scaled = (phi[i] + 1.0) / report.c_star.powf(params.m) - 1.0;
            sup = sup.max(scaled.abs());
        }
        ref_sups.push(sup);
    }
    let gaps: Vec<f64> = report
        .envelopes
        .c_upper
        .iter()
        .zip(&report.envelopes.c_lower)
        .map(|(u, l)| u - l)
        .collect();
    write_series_csv(
        &out.join("quasilinear_series.csv"),
        &["t", "error", "c_lower", "c_upper", "ref_sup"],
        &[
            &report.envelopes.times,
            &gaps,
            &report.envelopes.c_lower,
            &report.envelopes.c_upper,
            &ref_sups,
        ],
    )
    .map_err(solver_err)?;

    let mut json = Json::obj();
    json.push("experiment", Json::Str("quasilinear".into()));
    json.push("lambda1", Json::Num(eig.lambda1));
    json.push("c_star", Json::Num(report.c_star));
    json.push("final_gap", Json::Num(report.final_gap));
    json.push("final_ref_sup", Json::Num(report.final_ref_sup));
    json.push("converged", Json::Bool(converged));
    let path = out.join("quasilinear.json");
    write_report(&path, json)?;

    if assert_checks && !converged {
        return Err(RunError::Assertion(format!(
            "envelope gap {} above threshold {gap_threshold} at the horizon",
            report.final_gap
        )));
    }
    Ok(path)
}

fn run_positivity(cfg: &Config, out: &Path, assert_checks: bool) -> Result<PathBuf, RunError> {
    let params = cfg.parameters().map_err(|v| RunError::Config(v.to_string()))?;
    let domain = cfg.domain().map_err(|v| RunError::Config(v.to_string()))?;
    let delta = cfg
        .f64_or("positivity.delta", 0.1 * domain.extent())
        .map_err(|v| RunError::Config(v.to_string()))?;
    let tol = cfg
        .f64_or("profile.tolerance", 1e-9)
        .map_err(|v| RunError::Config(v.to_string()))?;
    let profile =
        compute_profile_f(&params, &domain, ProfileMethod::MinimizeJ, tol).map_err(solver_err)?;
    let (traj, _) = evolve(cfg, &params, &domain)?;

    let report = positivity_experiment(&traj, &domain, delta).map_err(solver_err)?;
    let mut json = Json::obj();
    json.push("experiment", Json::Str("positivity".into()));
    json.push("delta", Json::Num(delta));
    match report.t_inner {
        Some(t) => json.push("t_inner", Json::Num(t)),
        None => json.push("t_inner", Json::Str("unreached".into())),
    }
    match report.t_boundary {
        Some(t) => json.push("t_boundary", Json::Num(t)),
        None => json.push("t_boundary", Json::Str("unreached".into())),
    }
    json.push("inner_level", Json::Num(report.inner_level));

    let mut bound = None;
    if let (Some(t_inner), true) = (report.t_inner, report.inner_level > 0.0) {
        let comparison =
            BarenblattSolution::touching(report.inner_level, delta, &params).map_err(solver_err)?;
        let t2 = comparison.reach_time(2.0 * delta);
        bound = Some(t_inner + t2);
        json.push("barenblatt_bound", Json::Num(t_inner + t2));
    }
    let sandwich = sandwich_check(&traj, &profile.f, &params, &domain);
    match &sandwich {
        Ok(s) => {
            json.push("s0", Json::Num(s.s0));
            json.push("s1", Json::Num(s.s1));
            json.push("lower_start", Json::Num(s.lower_start));
        }
        Err(e) => json.push("sandwich_error", Json::Str(e.to_string())),
    }
    let path = out.join("positivity.json");
    write_report(&path, json)?;

    if assert_checks {
        let t_inner = report
            .t_inner
            .ok_or_else(|| RunError::Assertion("inner positivity unreached".into()))?;
        let t_boundary = report
            .t_boundary
            .ok_or_else(|| RunError::Assertion("boundary positivity unreached".into()))?;
        if t_inner > t_boundary {
            return Err(RunError::Assertion(format!(
                "T_inner = {t_inner} exceeds T_boundary = {t_boundary}"
            )));
        }
        if let Some(bound) = bound {
            if t_boundary > bound {
                return Err(RunError::Assertion(format!(
                    "T_boundary = {t_boundary} above the comparison bound {bound}"
                )));
            }
        }
        match sandwich {
            Ok(s) if s.s1 <= s.s0 => {}
            Ok(s) => {
                return Err(RunError::Assertion(format!(
                    "sandwich ordered wrong: s0 = {}, s1 = {}",
                    s.s0, s.s1
                )))
            }
            Err(e) => return Err(RunError::Assertion(format!("sandwich failed: {e}"))),
        }
    }
    Ok(path)
}

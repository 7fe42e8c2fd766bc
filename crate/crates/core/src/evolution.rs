//! Time integration of the Dirichlet problem u_t = Delta_p u^m in original
//! and rescaled variables.
//!
//! The update is backward Euler solved by a damped Newton iteration on the
//! nodal system; the implicit monotone structure preserves nonnegativity,
//! ordering of solutions and the Dirichlet constraint. Degenerate diffusion
//! forbids explicit stepping (CFL dt = O(h^p)), hence everything here is
//! implicit.

use crate::error::DnleError;
use crate::grid::{Domain, Field};
use crate::operators::{discrete_p_laplacian, p_laplacian_jacobian, FluxRegularization};
use crate::params::{Parameters, Regime};
use crate::Result;

/// Solution snapshot at one time instant.
#[derive(Debug, Clone)]
pub struct EvolutionState {
    pub t: f64,
    pub u: Field,
}

/// Inner/outer iteration controls for the implicit solver.
#[derive(Debug, Clone, Copy)]
pub struct SolverControls {
    /// First time step attempted by `solve`.
    pub dt_init: f64,
    /// Cap on the time step.
    pub dt_max: f64,
    /// Geometric growth factor of the step after each success.
    pub dt_growth: f64,
    /// Max-norm tolerance of the inner Newton residual.
    pub inner_tol: f64,
    /// Newton iteration budget per step.
    pub max_inner: usize,
    /// dt-halving budget per `solve` call.
    pub max_halvings: usize,
    pub regularization: FluxRegularization,
}

impl SolverControls {
    pub fn for_params(params: &Parameters) -> Self {
        SolverControls {
            dt_init: 1e-4,
            dt_max: f64::INFINITY,
            dt_growth: 1.2,
            inner_tol: 1e-10,
            max_inner: 50,
            max_halvings: 20,
            regularization: FluxRegularization::default_for(params.p),
        }
    }
}

/// Per-snapshot diagnostics: mass, sup-norm and the raw Dirichlet entropy
/// (the rate-0 Lyapunov functional of the unrescaled flow).
#[derive(Debug, Clone, Copy)]
pub struct Diagnostics {
    pub t: f64,
    pub mass: f64,
    pub sup_norm: f64,
    pub entropy: f64,
}

/// States at the requested output times plus their diagnostics.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<EvolutionState>,
    pub diagnostics: Vec<Diagnostics>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }
}

/// A trajectory after rescaling: `times` are tau = log t (degenerate) or t
/// itself (quasilinear), `fields` the rescaled solution v.
#[derive(Debug, Clone)]
pub struct RescaledTrajectory {
    pub times: Vec<f64>,
    pub fields: Vec<Field>,
}

/// Geometric (log-spaced) output times, the natural sampling for tau = log t.
pub fn geometric_times(t_start: f64, t_end: f64, count: usize) -> Vec<f64> {
    assert!(t_start > 0.0 && t_end > t_start && count >= 2);
    let log0 = t_start.ln();
    let log1 = t_end.ln();
    (0..count)
        .map(|k| (log0 + (log1 - log0) * k as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Solve `a_coef * u - dt * Delta_p(u^m) = b` for u >= 0 with Dirichlet zeros,
/// by damped Newton from `guess`. This is the backward Euler update when
/// a_coef = 1 and the rescaled update when a_coef = 1 - dt*mu.
///
/// The Newton unknown is u itself for m >= 1 (where u^{m-1} is continuous at
/// zero) and w = u^m for m < 1 (where the diagonal w^{1/m-1} vanishes at zero
/// instead of blowing up).
#[allow(clippy::too_many_arguments)]
pub(crate) fn implicit_step(
    a_coef: f64,
    dt: f64,
    b: &Field,
    guess: &Field,
    m: f64,
    p: f64,
    domain: &Domain,
    controls: &SolverControls,
) -> Result<Field> {
    let n = domain.len();
    let reg = controls.regularization;
    let in_w_variable = m < 1.0;
    // x is the Newton unknown: u for m >= 1, w = u^m for m < 1.
    let mut x = if in_w_variable {
        guess.powf_clamped(m)
    } else {
        guess.clone()
    };
    x.clamp_nonnegative();
    for i in 0..n {
        if domain.is_boundary(i) {
            x[i] = 0.0;
        }
    }

    let residual = |x: &Field| -> Result<(Field, f64)> {
        let w = if in_w_variable {
            x.clone()
        } else {
            x.powf_clamped(m)
        };
        let lap = discrete_p_laplacian(domain, &w, p, reg)?;
        let mut g = Field::zeros(n);
        let mut norm: f64 = 0.0;
        for i in 0..n {
            if domain.is_boundary(i) {
                continue;
            }
            let u_i = if in_w_variable {
                x[i].max(0.0).powf(1.0 / m)
            } else {
                x[i]
            };
            g[i] = a_coef * u_i - dt * lap[i] - b[i];
            norm = norm.max(g[i].abs());
        }
        Ok((g, norm))
    };

    // Relative tolerance: deep-decay runs (u ~ e^{-lambda t}) must keep their
    // relative accuracy, and the zero field satisfies the system exactly.
    let tol = controls.inner_tol * b.sup_norm().max(f64::MIN_POSITIVE);
    let (mut g, mut res) = residual(&x)?;
    for _ in 0..controls.max_inner {
        if res <= tol {
            break;
        }
        let w = if in_w_variable {
            x.clone()
        } else {
            x.powf_clamped(m)
        };
        let mut jac = p_laplacian_jacobian(domain, &w, p, reg);
        // Derivative of the zero-order term with respect to the unknown.
        let dzero = |xi: f64| -> f64 {
            if in_w_variable {
                // d(a w^{1/m})/dw; the exponent 1/m - 1 > 0 vanishes at zero.
                a_coef * (1.0 / m) * xi.max(0.0).powf(1.0 / m - 1.0)
            } else {
                a_coef
            }
        };
        // Chain factor multiplying the p-Laplacian Jacobian columns.
        let dchain = |xi: f64| -> f64 {
            if in_w_variable || m == 1.0 {
                1.0
            } else {
                m * xi.max(0.0).powf(m - 1.0)
            }
        };
        for i in 0..n {
            if domain.is_boundary(i) {
                jac.sub[i] = 0.0;
                jac.diag[i] = 1.0;
                jac.sup[i] = 0.0;
                continue;
            }
            if i > 0 {
                jac.sub[i] = -dt * jac.sub[i] * dchain(x[i - 1]);
            }
            if i + 1 < n {
                jac.sup[i] = -dt * jac.sup[i] * dchain(x[i + 1]);
            }
            jac.diag[i] = dzero(x[i]) - dt * jac.diag[i] * dchain(x[i]);
        }
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            rhs[i] = -g[i];
        }
        let delta = jac
            .solve(&rhs)
            .ok_or_else(|| DnleError::NonConvergence("singular Newton system".into()))?;

        // Backtracking on the residual norm with positivity projection.
        let mut eta = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let mut x_try = x.clone();
            for i in 0..n {
                if !domain.is_boundary(i) {
                    x_try[i] = (x[i] + eta * delta[i]).max(0.0);
                }
            }
            let (g_try, res_try) = residual(&x_try)?;
            if res_try <= (1.0 - 1e-4 * eta) * res || res_try <= tol {
                x = x_try;
                g = g_try;
                res = res_try;
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if !accepted {
            return Err(DnleError::NonConvergence(format!(
                "Newton stalled at residual {res:.3e} (dt = {dt:.3e})"
            )));
        }
    }
    if res <= tol {
        Ok(if in_w_variable {
            x.powf_clamped(1.0 / m)
        } else {
            x
        })
    } else {
        Err(DnleError::NonConvergence(format!(
            "residual {res:.3e} after {} Newton iterations (dt = {dt:.3e})",
            controls.max_inner
        )))
    }
}

fn validate_initial(u0: &Field, domain: &Domain) -> Result<Field> {
    domain.check_field(u0)?;
    let mut u = u0.clone();
    for i in 0..u.len() {
        if u[i] < -1e-12 {
            return Err(DnleError::Domain(format!(
                "initial data negative at node {i}: {}",
                u[i]
            )));
        }
        if domain.is_boundary(i) {
            if u[i].abs() > 1e-12 {
                return Err(DnleError::Domain(format!(
                    "initial data must vanish on the boundary, got {} at node {i}",
                    u[i]
                )));
            }
            u[i] = 0.0;
        } else if u[i] < 0.0 {
            u[i] = 0.0;
        }
    }
    Ok(u)
}

fn gate_regime(params: &Parameters) -> Result<()> {
    if params.regime == Regime::Fast {
        return Err(DnleError::Regime(format!(
            "fast-diffusion regime kappa = {} < 1 is not supported by this solver",
            params.kappa
        )));
    }
    Ok(())
}

/// One backward-Euler step: u_new - dt * Delta_p(u_new^m) = u_old.
///
/// Errors with `NonConvergence` when the inner iteration exceeds its budget,
/// signalling that dt is too large; the caller may halve dt and retry.
pub fn step(
    state: &EvolutionState,
    dt: f64,
    params: &Parameters,
    domain: &Domain,
    controls: &SolverControls,
) -> Result<EvolutionState> {
    gate_regime(params)?;
    if !(dt > 0.0) {
        return Err(DnleError::InvalidParameters(format!(
            "time step must be positive, got {dt}"
        )));
    }
    let u0 = validate_initial(&state.u, domain)?;
    let u = implicit_step(1.0, dt, &u0, &u0, params.m, params.p, domain, controls)?;
    Ok(EvolutionState {
        t: state.t + dt,
        u,
    })
}

fn snapshot(t: f64, u: &Field, params: &Parameters, domain: &Domain) -> Diagnostics {
    Diagnostics {
        t,
        mass: domain.integrate(u.values()),
        sup_norm: u.sup_norm(),
        entropy: entropy_with_rate(u, params.m, params.p, 0.0, domain).unwrap_or(f64::NAN),
    }
}

/// March the Dirichlet problem from u0 at t = 0 and record the states at
/// `output_times` (strictly increasing, within [0, t_end]).
pub fn solve(
    u0: &Field,
    t_end: f64,
    params: &Parameters,
    domain: &Domain,
    controls: &SolverControls,
    output_times: &[f64],
) -> Result<Trajectory> {
    gate_regime(params)?;
    let u0 = validate_initial(u0, domain)?;
    if output_times.is_empty() {
        return Err(DnleError::InvalidParameters(
            "at least one output time is required".into(),
        ));
    }
    for k in 0..output_times.len() {
        if k + 1 < output_times.len() && output_times[k] >= output_times[k + 1] {
            return Err(DnleError::InvalidParameters(
                "output times must be strictly increasing".into(),
            ));
        }
        if output_times[k] < 0.0 || output_times[k] > t_end * (1.0 + 1e-12) {
            return Err(DnleError::InvalidParameters(format!(
                "output time {} outside [0, {t_end}]",
                output_times[k]
            )));
        }
    }

    let mut states = Vec::with_capacity(output_times.len());
    let mut diagnostics = Vec::with_capacity(output_times.len());
    let mut next_out = 0;
    if output_times[0] == 0.0 {
        states.push(EvolutionState { t: 0.0, u: u0.clone() });
        diagnostics.push(snapshot(0.0, &u0, params, domain));
        next_out = 1;
    }

    let mut t = 0.0;
    let mut u = u0;
    let mut dt_policy = controls.dt_init.min(controls.dt_max);
    let mut halvings_left = controls.max_halvings;
    let t_final = t_end.min(*output_times.last().unwrap());

    while next_out < output_times.len() {
        let target = output_times[next_out];
        let mut dt = dt_policy.min(target - t).min(t_final - t).max(0.0);
        if dt == 0.0 {
            // Degenerate spacing; record and move on.
            states.push(EvolutionState { t: target, u: u.clone() });
            diagnostics.push(snapshot(target, &u, params, domain));
            next_out += 1;
            continue;
        }
        loop {
            match implicit_step(1.0, dt, &u, &u, params.m, params.p, domain, controls) {
                Ok(u_new) => {
                    t += dt;
                    u = u_new;
                    break;
                }
                Err(DnleError::NonConvergence(msg)) => {
                    if halvings_left == 0 {
                        return Err(DnleError::NonConvergence(format!(
                            "dt-halving budget exhausted at t = {t}: {msg}"
                        )));
                    }
                    halvings_left -= 1;
                    dt *= 0.5;
                    dt_policy = dt_policy.min(dt).max(f64::MIN_POSITIVE);
                }
                Err(e) => return Err(e),
            }
        }
        dt_policy = (dt_policy * controls.dt_growth).min(controls.dt_max);
        if (t - target).abs() <= 1e-9 * target.max(1.0) {
            states.push(EvolutionState { t: target, u: u.clone() });
            diagnostics.push(snapshot(target, &u, params, domain));
            next_out += 1;
        }
    }
    Ok(Trajectory { states, diagnostics })
}

/// Degenerate rescaling v(tau, x) = t^mu u(t, x), tau = log t.
///
/// Rejects non-degenerate parameters and samples at t <= 0.
pub fn rescale_degenerate(traj: &Trajectory, params: &Parameters) -> Result<RescaledTrajectory> {
    let mu = params.degenerate_mu()?;
    let mut times = Vec::with_capacity(traj.states.len());
    let mut fields = Vec::with_capacity(traj.states.len());
    for s in &traj.states {
        if s.t <= 0.0 {
            return Err(DnleError::InvalidParameters(format!(
                "degenerate rescaling needs t > 0, got t = {}",
                s.t
            )));
        }
        let scale = s.t.powf(mu);
        let mut v = s.u.clone();
        for x in v.values_mut() {
            *x *= scale;
        }
        times.push(s.t.ln());
        fields.push(v);
    }
    Ok(RescaledTrajectory { times, fields })
}

/// Quasilinear rescaling v(t, x) = e^{lambda_1 t} u(t, x); no time
/// transformation, only amplitude rescaling.
pub fn rescale_quasilinear(traj: &Trajectory, lambda1: f64) -> Result<RescaledTrajectory> {
    if !(lambda1 > 0.0) {
        return Err(DnleError::InvalidParameters(format!(
            "lambda1 must be positive, got {lambda1}"
        )));
    }
    let mut times = Vec::with_capacity(traj.states.len());
    let mut fields = Vec::with_capacity(traj.states.len());
    for s in &traj.states {
        let scale = (lambda1 * s.t).exp();
        let mut v = s.u.clone();
        for x in v.values_mut() {
            *x *= scale;
        }
        times.push(s.t);
        fields.push(v);
    }
    Ok(RescaledTrajectory { times, fields })
}

/// Entropy with an explicit zero-order rate:
/// E = (1/p) int |grad v^m|^p - (m/(m+1)) rate int v^{m+1}.
pub fn entropy_with_rate(
    v: &Field,
    m: f64,
    p: f64,
    rate: f64,
    domain: &Domain,
) -> Result<f64> {
    domain.check_field(v)?;
    let h = domain.spacing();
    let w = v.powf_clamped(m);
    let mut grad_term = 0.0;
    for i in 0..domain.len() - 1 {
        let d = (w[i + 1] - w[i]) / h;
        grad_term += domain.face_area()[i] * h * d.abs().powf(p);
    }
    let vpow = v.powf_clamped(m + 1.0);
    let lower_term = domain.integrate(vpow.values());
    Ok(grad_term / p - m / (m + 1.0) * rate * lower_term)
}

/// Entropy of the degenerate rescaled flow (rate mu). In the quasilinear
/// setting use [`entropy_with_rate`] with lambda_1 instead.
pub fn entropy(v: &Field, params: &Parameters, domain: &Domain) -> Result<f64> {
    let mu = params.degenerate_mu()?;
    entropy_with_rate(v, params.m, params.p, mu, domain)
}

/// Outcome of the Benilan-Crandall estimate checks along a trajectory.
#[derive(Debug, Clone, Copy)]
pub struct BenilanCrandallReport {
    /// min over interior output times and nodes of u_t + mu u / t.
    pub min_slack: f64,
    /// max over interior output times of t ||u_t||_1 / ||u_0||_1.
    pub l1_envelope: f64,
    /// Scale used to decide whether the slack violation is beyond scheme error.
    pub tolerance: f64,
    pub flagged: bool,
}

/// Check u_t >= -mu u / t and ||u_t||_1 <= mu ||u_0||_1 / t along a computed
/// trajectory, with u_t from centered differences at interior output times.
pub fn check_benilan_crandall(
    traj: &Trajectory,
    params: &Parameters,
    domain: &Domain,
) -> Result<BenilanCrandallReport> {
    let mu = params.degenerate_mu()?;
    if traj.states.len() < 3 {
        return Err(DnleError::InvalidParameters(
            "Benilan-Crandall check needs at least 3 output times".into(),
        ));
    }
    let mass0 = domain.integrate(traj.states[0].u.values()).max(1e-300);
    let mut min_slack = f64::INFINITY;
    let mut l1_env: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for k in 1..traj.states.len() - 1 {
        let (prev, cur, next) = (&traj.states[k - 1], &traj.states[k], &traj.states[k + 1]);
        if cur.t <= 0.0 {
            continue;
        }
        let dt2 = next.t - prev.t;
        let mut ut_l1 = 0.0;
        for i in 0..domain.len() {
            let ut = (next.u[i] - prev.u[i]) / dt2;
            ut_l1 += ut.abs() * domain.cell_mass()[i];
            let slack = ut + mu * cur.u[i] / cur.t;
            min_slack = min_slack.min(slack);
        }
        l1_env = l1_env.max(cur.t * ut_l1 / mass0);
        scale = scale.max(mu * cur.u.sup_norm() / cur.t);
    }
    // Scheme error budget: O(h) spatial plus the centered-difference window.
    let tolerance = (domain.spacing() + 1e-8) * scale.max(1.0);
    Ok(BenilanCrandallReport {
        min_slack,
        l1_envelope: l1_env,
        tolerance,
        flagged: min_slack < -tolerance,
    })
}

/// Numerical smoothing envelope: max over sampled times of t^mu ||u(t)||_inf.
/// Finite values demonstrate the absolute bound ||u|| <= C t^{-mu}.
pub fn smoothing_envelope(traj: &Trajectory, params: &Parameters) -> Result<f64> {
    let mu = params.degenerate_mu()?;
    let mut env: f64 = 0.0;
    for s in &traj.states {
        if s.t > 0.0 {
            env = env.max(s.t.powf(mu) * s.u.sup_norm());
        }
    }
    Ok(env)
}

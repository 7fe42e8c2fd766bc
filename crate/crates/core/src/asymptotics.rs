//! Verification harness: convergence-rate reports for the degenerate flow,
//! positivity and sandwich experiments, and the quasilinear envelope /
//! relative-error / barrier apparatus.

use crate::error::DnleError;
use crate::evolution::{rescale_quasilinear, RescaledTrajectory, Trajectory};
use crate::grid::{Domain, Field};
use crate::operators::{discrete_p_laplacian, FluxRegularization};
use crate::params::Parameters;
use crate::stationary::Eigenpair;
use crate::Result;

/// Nodes count as positive above this fraction of the trajectory sup.
const POSITIVITY_FRACTION: f64 = 1e-12;

/// Error series of a degenerate run against the asymptotic profile, with the
/// fitted log-log slope and the constant envelope C_num = max t * weighted.
#[derive(Debug, Clone)]
pub struct RateReport {
    pub times: Vec<f64>,
    /// sup_x |t^mu u - f| per sample.
    pub errors: Vec<f64>,
    /// sup over interior nodes of |t^mu u - f| / f per sample.
    pub weighted_errors: Vec<f64>,
    /// Least-squares slope of log(weighted error) vs log t over the last two
    /// decades of the sample window.
    pub slope: f64,
    pub intercept: f64,
    /// max over samples of t * weighted error.
    pub constant_envelope: f64,
    /// Set when the run is the trivial solution (errors equal sup f).
    pub trivial: bool,
}

/// Weighted-rate report |t^mu u - f| <= C f / t measured along a trajectory.
pub fn rate_report_degenerate(
    traj: &Trajectory,
    f: &Field,
    params: &Parameters,
    domain: &Domain,
) -> Result<RateReport> {
    let mu = params.degenerate_mu()?;
    if traj.states.is_empty() {
        return Err(DnleError::InvalidParameters(
            "rate report of an empty trajectory".into(),
        ));
    }
    domain.check_field(f)?;
    let mut times = Vec::new();
    let mut errors = Vec::new();
    let mut weighted = Vec::new();
    for s in &traj.states {
        if s.t <= 0.0 {
            return Err(DnleError::InvalidParameters(
                "rate report needs sample times t > 0".into(),
            ));
        }
        let scale = s.t.powf(mu);
        let mut e: f64 = 0.0;
        let mut w: f64 = 0.0;
        for i in 0..domain.len() {
            let diff = (scale * s.u[i] - f[i]).abs();
            e = e.max(diff);
            if !domain.is_boundary(i) {
                if f[i] <= 0.0 {
                    return Err(DnleError::Domain(format!(
                        "profile vanishes at interior node {i}; weighted error undefined"
                    )));
                }
                w = w.max(diff / f[i]);
            }
        }
        times.push(s.t);
        errors.push(e);
        weighted.push(w);
    }

    // Fit over the last two decades of log10 t, skipping the transient.
    let t_last = *times.last().unwrap();
    let window = t_last / 100.0;
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(&weighted)
        .filter(|(&t, &w)| t >= window && w > 0.0)
        .map(|(&t, &w)| (t.ln(), w.ln()))
        .collect();
    let (slope, intercept) = least_squares(&pts);

    let constant_envelope = times
        .iter()
        .zip(&weighted)
        .map(|(t, w)| t * w)
        .fold(0.0f64, f64::max);
    let trivial = traj.states.last().unwrap().u.sup_norm() == 0.0;
    Ok(RateReport {
        times,
        errors,
        weighted_errors: weighted,
        slope,
        intercept,
        constant_envelope,
        trivial,
    })
}

fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    if pts.len() < 2 {
        return (0.0, pts.first().map_or(0.0, |p| p.1));
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom == 0.0 {
        return (0.0, sy / n);
    }
    let slope = (n * sxy - sx * sy) / denom;
    (slope, (sy - slope * sx) / n)
}

/// First sampled times at which the solution is positive on the inner region
/// and on the whole interior; None marks an unreached horizon.
#[derive(Debug, Clone, Copy)]
pub struct PositivityReport {
    pub t_inner: Option<f64>,
    pub t_boundary: Option<f64>,
    /// min over the inner region of u at t_inner (the measured level).
    pub inner_level: f64,
}

/// Scan a trajectory for the first positivity times on Omega_{I,delta}
/// (distance > delta) and on the full interior.
pub fn positivity_experiment(
    traj: &Trajectory,
    domain: &Domain,
    delta: f64,
) -> Result<PositivityReport> {
    if traj.states.is_empty() {
        return Err(DnleError::InvalidParameters(
            "positivity experiment on an empty trajectory".into(),
        ));
    }
    let global_sup = traj
        .states
        .iter()
        .map(|s| s.u.sup_norm())
        .fold(0.0f64, f64::max);
    let threshold = POSITIVITY_FRACTION * global_sup;
    let mut t_inner = None;
    let mut t_boundary = None;
    let mut inner_level = 0.0;
    for s in &traj.states {
        let mut inner_ok = true;
        let mut all_ok = true;
        let mut level = f64::INFINITY;
        for i in domain.interior_indices() {
            let positive = s.u[i] > threshold;
            if domain.node_distances()[i] > delta {
                if !positive {
                    inner_ok = false;
                }
                level = level.min(s.u[i]);
            }
            if !positive {
                all_ok = false;
            }
        }
        if t_inner.is_none() && inner_ok {
            t_inner = Some(s.t);
            inner_level = level;
        }
        if t_boundary.is_none() && all_ok {
            t_boundary = Some(s.t);
        }
        if t_inner.is_some() && t_boundary.is_some() {
            break;
        }
    }
    Ok(PositivityReport {
        t_inner,
        t_boundary,
        inner_level,
    })
}

/// Fitted separate-variables sandwich (s0 + t)^{-mu} f <= u <= (s1 + t)^{-mu} f.
#[derive(Debug, Clone, Copy)]
pub struct SandwichReport {
    /// Smallest admissible s for the lower separate-variables solution.
    pub s0: f64,
    /// Largest admissible s for the upper separate-variables solution.
    pub s1: f64,
    /// First sampled time with a fully positive interior (start of the lower
    /// fit; the upper fit uses every sample).
    pub lower_start: f64,
}

/// Fit the tightest separate-variables sandwich around a trajectory.
pub fn sandwich_check(
    traj: &Trajectory,
    f: &Field,
    params: &Parameters,
    domain: &Domain,
) -> Result<SandwichReport> {
    let mu = params.degenerate_mu()?;
    domain.check_field(f)?;
    if traj.states.is_empty() {
        return Err(DnleError::InvalidParameters(
            "sandwich check on an empty trajectory".into(),
        ));
    }
    let global_sup = traj
        .states
        .iter()
        .map(|s| s.u.sup_norm())
        .fold(0.0f64, f64::max);
    let threshold = POSITIVITY_FRACTION * global_sup;

    let mut s1 = f64::INFINITY;
    for s in &traj.states {
        if s.t <= 0.0 {
            continue;
        }
        for i in domain.interior_indices() {
            if s.u[i] > threshold {
                s1 = s1.min((f[i] / s.u[i]).powf(1.0 / mu) - s.t);
            }
        }
    }
    if !s1.is_finite() || s1 <= 0.0 {
        return Err(DnleError::Infeasible(format!(
            "no admissible upper separate-variables offset (s1 = {s1})"
        )));
    }

    let mut lower_start = None;
    let mut s0 = 0.0f64;
    for s in &traj.states {
        if s.t <= 0.0 {
            continue;
        }
        let all_positive = domain.interior_indices().all(|i| s.u[i] > threshold);
        if lower_start.is_none() {
            if !all_positive {
                continue;
            }
            lower_start = Some(s.t);
        }
        for i in domain.interior_indices() {
            s0 = s0.max((f[i] / s.u[i]).powf(1.0 / mu) - s.t);
        }
    }
    let lower_start = lower_start.ok_or_else(|| {
        DnleError::Infeasible("solution never positive on the whole interior".into())
    })?;
    Ok(SandwichReport { s0, s1, lower_start })
}

/// Best per-time envelope constants of a rescaled quasilinear run:
/// c_upper(t) = sup v/S, c_lower(t) = inf v/S over interior nodes.
#[derive(Debug, Clone)]
pub struct EnvelopeConstants {
    pub times: Vec<f64>,
    pub c_upper: Vec<f64>,
    pub c_lower: Vec<f64>,
}

impl EnvelopeConstants {
    pub fn c_upper_inf(&self) -> f64 {
        *self.c_upper.last().unwrap()
    }

    pub fn c_lower_inf(&self) -> f64 {
        *self.c_lower.last().unwrap()
    }

    pub fn final_gap(&self) -> f64 {
        self.c_upper_inf() - self.c_lower_inf()
    }
}

pub fn envelope_constants(
    rescaled: &RescaledTrajectory,
    s_profile: &Field,
    domain: &Domain,
) -> Result<EnvelopeConstants> {
    domain.check_field(s_profile)?;
    for i in domain.interior_indices() {
        if s_profile[i] <= 0.0 {
            return Err(DnleError::Domain(format!(
                "asymptotic profile vanishes at interior node {i}"
            )));
        }
    }
    let mut times = Vec::new();
    let mut c_upper = Vec::new();
    let mut c_lower = Vec::new();
    for (k, v) in rescaled.fields.iter().enumerate() {
        let mut up = f64::NEG_INFINITY;
        let mut lo = f64::INFINITY;
        for i in domain.interior_indices() {
            let ratio = v[i] / s_profile[i];
            up = up.max(ratio);
            lo = lo.min(ratio);
        }
        times.push(rescaled.times[k]);
        c_upper.push(up);
        c_lower.push(lo);
    }
    Ok(EnvelopeConstants {
        times,
        c_upper,
        c_lower,
    })
}

/// Relative Error Function phi = v^m / S^m - 1 at interior nodes (boundary
/// entries set to zero, the ratio being 0/0 there).
pub fn relative_error_field(v: &Field, s_profile: &Field, m: f64, domain: &Domain) -> Result<Field> {
    domain.check_field(v)?;
    domain.check_field(s_profile)?;
    let mut phi = Field::zeros(domain.len());
    for i in domain.interior_indices() {
        if s_profile[i] <= 0.0 {
            return Err(DnleError::Domain(format!(
                "asymptotic profile not positive at interior node {i}"
            )));
        }
        phi[i] = v[i].max(0.0).powf(m) / s_profile[i].powf(m) - 1.0;
    }
    Ok(phi)
}

/// Constants measured from a computed eigen-profile V = S^m, feeding the
/// barrier construction.
#[derive(Debug, Clone, Copy)]
pub struct BarrierBounds {
    /// sup over interior of V/d (the envelope constant C1^m).
    pub c1_env: f64,
    /// inf over interior of V/d (the envelope constant C0^m).
    pub c0_env: f64,
    /// min |grad V| over the boundary strip (K1).
    pub grad_min: f64,
    /// max |grad V| over the boundary strip (K2).
    pub grad_max: f64,
    /// min of grad V . grad d over the strip (beta_0, the inward slope).
    pub beta0: f64,
    pub lambda1: f64,
    /// Uniform bound on |phi| feeding the initial comparison.
    pub phi_sup: f64,
    /// Regularity radius of the distance function.
    pub xi0: f64,
}

/// Measure the profile constants on the strip {d < xi}.
pub fn measure_profile_bounds(
    v_eig: &Field,
    lambda1: f64,
    domain: &Domain,
    xi: f64,
    phi_sup: f64,
) -> Result<BarrierBounds> {
    domain.check_field(v_eig)?;
    let h = domain.spacing();
    let mut c1_env: f64 = 0.0;
    let mut c0_env = f64::INFINITY;
    for i in domain.interior_indices() {
        let ratio = v_eig[i] / domain.node_distances()[i];
        c1_env = c1_env.max(ratio);
        c0_env = c0_env.min(ratio);
    }
    let mut grad_min = f64::INFINITY;
    let mut grad_max: f64 = 0.0;
    let mut beta0 = f64::INFINITY;
    for i in 0..domain.len() - 1 {
        let in_strip = domain.node_distances()[i] < xi || domain.node_distances()[i + 1] < xi;
        if in_strip {
            let g = (v_eig[i + 1] - v_eig[i]) / h;
            grad_min = grad_min.min(g.abs());
            grad_max = grad_max.max(g.abs());
            // grad d is +1 where the distance grows with x, -1 where it
            // shrinks; the product is the inward slope of V.
            let dd = (domain.node_distances()[i + 1] - domain.node_distances()[i]) / h;
            beta0 = beta0.min(g * dd.signum());
        }
    }
    if !(grad_min > 0.0) || !grad_min.is_finite() || !(beta0 > 0.0) {
        return Err(DnleError::Infeasible(format!(
            "gradient bounds on the strip: K1 = {grad_min}, beta0 = {beta0}"
        )));
    }
    Ok(BarrierBounds {
        c1_env,
        c0_env,
        grad_min,
        grad_max,
        beta0,
        lambda1,
        phi_sup,
        // The gradient bounds only hold on the measured strip.
        xi0: domain.xi0().min(xi),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BarrierSide {
    Upper,
    Lower,
}

/// Space-time barrier, affine in V and t:
/// upper Phi = C - B V - A (t - t0), lower Psi = C + B V - A (t - t0).
#[derive(Debug, Clone, Copy)]
pub struct BarrierSpec {
    pub side: BarrierSide,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Width of the boundary strip Omega_xi on which the barrier certifies.
    pub xi: f64,
    /// Inner-region margin delta < eps / (B C1^m).
    pub delta: f64,
    /// Comparison horizon T1 (upper) or T2 (lower).
    pub horizon: f64,
    pub t0: f64,
    /// Nonnegative slack in the defining sufficient condition.
    pub condition_slack: f64,
    /// The constant omega of the sufficient condition (upper side).
    pub omega: f64,
}

/// Choose upper-barrier constants satisfying
/// (lambda_1 (C+1) + A (p-1)) xi^{p-1} <= omega B, with
/// omega = min(1, 2^{2-p}) 2 (p-1) K1^p / C1, following the order: C large
/// first, then A and B, then delta small.
pub fn choose_upper_barrier(eps: f64, bounds: &BarrierBounds, p: f64) -> Result<BarrierSpec> {
    if !(eps > 0.0) {
        return Err(DnleError::Infeasible(format!("eps must be positive, got {eps}")));
    }
    if !(bounds.grad_min > 0.0) || !(bounds.c1_env > 0.0) || !(bounds.lambda1 > 0.0) {
        return Err(DnleError::Infeasible(format!(
            "inconsistent bounds: K1 = {}, C1^m = {}, lambda1 = {}",
            bounds.grad_min, bounds.c1_env, bounds.lambda1
        )));
    }
    // C1 = (C1^m)^{p-1} in the quasilinear relation m(p-1) = 1.
    let c1 = bounds.c1_env.powf(p - 1.0);
    let omega = 1f64.min(2f64.powf(2.0 - p)) * 2.0 * (p - 1.0) * bounds.grad_min.powf(p)
        / c1;
    let c = bounds.phi_sup + eps + 0.5;
    let a = bounds.lambda1;
    let safety = 2.0;

    let mut xi = bounds.xi0;
    let mut b = 0.0;
    let mut delta = 0.0;
    let mut horizon = 0.0;
    let mut converged = false;
    for _ in 0..200 {
        b = safety * (bounds.lambda1 * (c + 1.0) + a * (p - 1.0)) * xi.powf(p - 1.0) / omega;
        delta = (xi / 2.0).min(eps / (b * bounds.c1_env));
        horizon = (c - b * bounds.c1_env * delta - eps) / a;
        let k1_min = c + 1.0 - a * horizon;
        let xi_required = k1_min / (4.0 * b * bounds.c1_env);
        if xi <= xi_required * (1.0 + 1e-12) {
            converged = true;
            break;
        }
        xi = 0.95 * xi_required;
    }
    if !converged || !(horizon > 0.0) || !(delta > 0.0) {
        return Err(DnleError::Infeasible(
            "upper-barrier constant search did not settle".into(),
        ));
    }
    let condition_slack = omega * b - (bounds.lambda1 * (c + 1.0) + a * (p - 1.0)) * xi.powf(p - 1.0);
    Ok(BarrierSpec {
        side: BarrierSide::Upper,
        a,
        b,
        c,
        xi,
        delta,
        horizon,
        t0: 0.0,
        condition_slack,
        omega,
    })
}

/// Choose lower-barrier constants: Psi = C' + B' V - A'(t - t0) is a
/// supersolution of the psi-equation on {0 <= Psi <= 1/2} once the strip is
/// narrow enough that the gradient term dominates lambda_1.
pub fn choose_lower_barrier(eps: f64, bounds: &BarrierBounds, p: f64) -> Result<BarrierSpec> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(DnleError::Infeasible(format!(
            "lower barrier needs 0 < eps < 1, got {eps}"
        )));
    }
    if !(bounds.grad_min > 0.0) || !(bounds.c0_env > 0.0) {
        return Err(DnleError::Infeasible(format!(
            "inconsistent bounds: K1 = {}, C0^m = {}",
            bounds.grad_min, bounds.c0_env
        )));
    }
    let c = 1.0;
    let a = bounds.lambda1;
    let b = 1.0;

    let mut xi = bounds.xi0;
    let mut slack = 0.0;
    let mut horizon = 0.0;
    let mut delta = 0.0;
    for _ in 0..200 {
        delta = (xi / 2.0).min(eps / (b * bounds.c0_env));
        horizon = (c + b * bounds.c0_env * delta - eps) / a;
        // k1 = 1 - C' + A'(t - t0) ranges over [1/2, k1_max] on Sigma_Psi.
        let k1_max: f64 = 1.0 + b * bounds.c0_env * delta - eps;
        let k1_pow_min = if p >= 2.0 {
            0.25f64.powf(p - 2.0)
        } else {
            k1_max.max(0.5).powf(p - 2.0)
        };
        let k2_low = 1f64.min(2f64.powf(2.0 - p)) * k1_pow_min * bounds.grad_min.powf(p);
        let xi_grad = (2.0 * b * (p - 1.0) * k2_low / bounds.lambda1).powf(1.0 / (p - 1.0))
            / bounds.c1_env;
        let xi_fprime = 0.5 / (4.0 * b * bounds.c1_env);
        let xi_new = 0.9 * bounds.xi0.min(xi_grad).min(xi_fprime);
        slack = 2.0 * b * (p - 1.0) * k2_low / (bounds.c1_env * xi_new).powf(p - 1.0)
            - bounds.lambda1;
        if (xi_new - xi).abs() <= 1e-12 * xi_new {
            xi = xi_new;
            break;
        }
        xi = xi_new;
    }
    if !(xi > 0.0) || !(horizon > 0.0) || slack < 0.0 {
        return Err(DnleError::Infeasible(format!(
            "lower-barrier search failed: xi = {xi}, horizon = {horizon}, slack = {slack}"
        )));
    }
    Ok(BarrierSpec {
        side: BarrierSide::Lower,
        a,
        b,
        c,
        xi,
        delta,
        horizon,
        t0: 0.0,
        condition_slack: slack,
        omega: 0.0,
    })
}

/// Evaluate the supersolution inequality of the barrier on every grid node
/// and time sample inside the admissible region Sigma, returning the minimum
/// of LHS - RHS (nonnegative certifies the barrier).
pub fn barrier_residual(
    barrier: &BarrierSpec,
    v_eig: &Field,
    lambda1: f64,
    p: f64,
    domain: &Domain,
    time_samples: &[f64],
) -> Result<f64> {
    domain.check_field(v_eig)?;
    if time_samples.is_empty() {
        return Err(DnleError::InvalidParameters(
            "barrier residual needs at least one time sample".into(),
        ));
    }
    let reg = FluxRegularization::default_for(p);
    let mut min_resid = f64::INFINITY;
    let mut visited = 0usize;
    for &t in time_samples {
        if t < barrier.t0 || t > barrier.t0 + barrier.horizon {
            continue;
        }
        let shift = barrier.a * (t - barrier.t0);
        // Multiplier of V in (1 +/- barrier) V.
        let (lin, quad) = match barrier.side {
            BarrierSide::Upper => (1.0 + barrier.c - shift, -barrier.b),
            BarrierSide::Lower => (1.0 - barrier.c + shift, -barrier.b),
        };
        let mut w = Field::zeros(domain.len());
        for i in 0..domain.len() {
            w[i] = (lin + quad * v_eig[i]) * v_eig[i];
        }
        let lap = discrete_p_laplacian(domain, &w, p, reg)?;
        for i in domain.interior_indices() {
            if domain.node_distances()[i] >= barrier.xi {
                continue;
            }
            let barrier_value = match barrier.side {
                BarrierSide::Upper => barrier.c - barrier.b * v_eig[i] - shift,
                BarrierSide::Lower => barrier.c + barrier.b * v_eig[i] - shift,
            };
            let factor = match barrier.side {
                BarrierSide::Upper => {
                    if barrier_value < -1.0 {
                        continue;
                    }
                    1.0 + barrier_value
                }
                BarrierSide::Lower => {
                    if !(0.0..=0.5).contains(&barrier_value) {
                        continue;
                    }
                    1.0 - barrier_value
                }
            };
            if factor < 1e-12 && p < 2.0 {
                continue;
            }
            visited += 1;
            let lhs = match barrier.side {
                BarrierSide::Upper => -(p - 1.0) * barrier.a * factor.powf(p - 2.0),
                BarrierSide::Lower => (p - 1.0) * barrier.a * factor.powf(p - 2.0),
            };
            let rhs = v_eig[i].powf(-(p - 1.0)) * lap[i] + lambda1 * factor.powf(p - 1.0);
            min_resid = min_resid.min(lhs - rhs);
        }
    }
    if visited == 0 {
        return Err(DnleError::EmptyRegion);
    }
    Ok(min_resid)
}

/// Quasilinear large-time report: the asymptotic constant c*, the final
/// relative-error sup and the envelope series.
#[derive(Debug, Clone)]
pub struct QuasilinearReport {
    pub c_star: f64,
    pub final_gap: f64,
    pub final_ref_sup: f64,
    pub envelopes: EnvelopeConstants,
}

/// Estimate c* as the common limit of the envelope constants of
/// v = e^{lambda_1 t} u against S = V^{1/m}; errors with `NotConverged` when
/// the envelope gap is still above `gap_threshold` at the horizon.
///
/// `rescale_rate` overrides the rescaling exponent: a backward-Euler run with
/// fixed step dt decays by 1/(1 + lambda_1 dt) per step, so rescaling with
/// ln(1 + lambda_1 dt)/dt instead of lambda_1 keeps the envelopes
/// comparison-exact for the computed flow.
pub fn quasilinear_convergence_report(
    traj: &Trajectory,
    eigenpair: &Eigenpair,
    m: f64,
    domain: &Domain,
    gap_threshold: f64,
    rescale_rate: Option<f64>,
) -> Result<QuasilinearReport> {
    let rescaled = rescale_quasilinear(traj, rescale_rate.unwrap_or(eigenpair.lambda1))?;
    let s_profile = eigenpair.eigenfunction.powf_clamped(1.0 / m);
    let envelopes = envelope_constants(&rescaled, &s_profile, domain)?;
    let gap = envelopes.final_gap();
    let c_star = 0.5 * (envelopes.c_upper_inf() + envelopes.c_lower_inf());
    let phi = relative_error_field(
        rescaled.fields.last().unwrap(),
        &s_profile,
        m,
        domain,
    )?;
    // The REF compares v/ (c* S); the envelope midpoint fixes the scale.
    let mut final_ref_sup: f64 = 0.0;
    for i in domain.interior_indices() {
        let scaled = (phi[i] + 1.0) / c_star.powf(m) - 1.0;
        final_ref_sup = final_ref_sup.max(scaled.abs());
    }
    if gap > gap_threshold {
        return Err(DnleError::NotConverged {
            gap,
            threshold: gap_threshold,
        });
    }
    Ok(QuasilinearReport {
        c_star,
        final_gap: gap,
        final_ref_sup,
        envelopes,
    })
}

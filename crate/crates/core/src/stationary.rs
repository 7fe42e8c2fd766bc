//! Stationary objects of the large-time theory: the degenerate asymptotic
//! profile f (positive solution of Delta_p f^m + mu f = 0) and the first
//! Dirichlet eigenpair of the p-Laplacian.
//!
//! Both are computed by projected gradient descent in the variable where the
//! problem is variational: w = f^m for the profile functional J, and the
//! eigenfunction itself for the Rayleigh quotient. Step sizes come from a
//! Barzilai-Borwein estimate safeguarded by Armijo backtracking (initial step
//! 1.0, shrink 0.5, sufficient decrease 1e-4); once objective differences fall
//! below floating-point resolution the safeguard switches to decrease of the
//! stationarity residual, which is the quantity the tolerance certifies.

use crate::error::DnleError;
use crate::evolution::{implicit_step, SolverControls};
use crate::grid::{Domain, DomainKind, Field};
use crate::operators::{discrete_p_laplacian, FluxRegularization};
use crate::params::Parameters;
use crate::Result;

/// Degenerate asymptotic profile with its discrete residual certificate and
/// the d^{1/m} boundary-envelope constants.
#[derive(Debug, Clone)]
pub struct StationaryProfile {
    pub f: Field,
    /// Max-norm of Delta_p f^m + mu f over interior nodes.
    pub residual_norm: f64,
    /// (C1, C2) with C1 d^{1/m} <= f <= C2 d^{1/m} at interior nodes.
    pub boundary_constants: (f64, f64),
    pub iterations: usize,
}

/// First Dirichlet p-Laplacian eigenpair, eigenfunction normalized to max 1.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub lambda1: f64,
    pub eigenfunction: Field,
    /// Max-norm of Delta_p V + lambda_1 V^{p-1} over interior nodes.
    pub residual_norm: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileMethod {
    /// Projected gradient descent on the functional J in the w = f^m variable.
    MinimizeJ,
    /// Evolve the rescaled equation v_tau = Delta_p v^m + mu v to stationarity.
    LongTimeLimit,
}

/// The profile functional J(w) = (1/p) int |grad w|^p
/// - (m/(m+1)) mu int w^{(m+1)/m}, whose minimizer is w = f^m.
pub fn functional_j(w: &Field, params: &Parameters, domain: &Domain) -> Result<f64> {
    let mu = params.degenerate_mu()?;
    domain.check_field(w)?;
    let h = domain.spacing();
    let p = params.p;
    let mut grad_term = 0.0;
    for i in 0..domain.len() - 1 {
        let d = (w[i + 1] - w[i]) / h;
        grad_term += domain.face_area()[i] * h * d.abs().powf(p);
    }
    let pow = w.powf_clamped((params.m + 1.0) / params.m);
    Ok(grad_term / p - params.m / (params.m + 1.0) * mu * domain.integrate(pow.values()))
}

/// Discrete Rayleigh quotient int |grad phi|^p / int |phi|^p.
pub fn rayleigh_quotient(phi: &Field, p: f64, domain: &Domain) -> Result<f64> {
    domain.check_field(phi)?;
    let h = domain.spacing();
    let mut num = 0.0;
    for i in 0..domain.len() - 1 {
        let d = (phi[i + 1] - phi[i]) / h;
        num += domain.face_area()[i] * h * d.abs().powf(p);
    }
    let mut den = 0.0;
    for i in 0..domain.len() {
        den += domain.cell_mass()[i] * phi[i].abs().powf(p);
    }
    if den == 0.0 {
        return Err(DnleError::InvalidParameters(
            "Rayleigh quotient of the zero field".into(),
        ));
    }
    Ok(num / den)
}

/// Fitted boundary-envelope constants: C1 = min f / d^{1/m},
/// C2 = max f / d^{1/m} over interior nodes.
///
/// Rejects profiles with nonpositive interior values.
pub fn boundary_growth_check(f: &Field, domain: &Domain, m: f64) -> Result<(f64, f64)> {
    domain.check_field(f)?;
    let mut c1 = f64::INFINITY;
    let mut c2: f64 = 0.0;
    for i in domain.interior_indices() {
        if f[i] <= 0.0 {
            return Err(DnleError::Domain(format!(
                "profile not positive at interior node {i}: {}",
                f[i]
            )));
        }
        let ratio = f[i] / domain.node_distances()[i].powf(1.0 / m);
        c1 = c1.min(ratio);
        c2 = c2.max(ratio);
    }
    Ok((c1, c2))
}

/// One-sided inward slope of w at each Dirichlet node; the minimum certifies
/// the Boundary Principle (dw/dn < 0 outward) when strictly positive.
pub fn boundary_principle_check(w: &Field, domain: &Domain) -> f64 {
    let h = domain.spacing();
    let n = domain.len();
    let mut min_slope = f64::INFINITY;
    if domain.is_boundary(0) {
        min_slope = min_slope.min((w[1] - w[0]) / h);
    }
    if domain.is_boundary(n - 1) {
        min_slope = min_slope.min((w[n - 2] - w[n - 1]) / h);
    }
    min_slope
}

/// Barzilai-Borwein step proposal shared by the descent loops.
struct BbStep {
    prev_x: Option<Vec<f64>>,
    prev_g: Option<Vec<f64>>,
    last: f64,
}

impl BbStep {
    fn new() -> Self {
        BbStep {
            prev_x: None,
            prev_g: None,
            last: 1.0,
        }
    }

    fn propose(&self, x: &[f64], g: &[f64]) -> f64 {
        if let (Some(px), Some(pg)) = (&self.prev_x, &self.prev_g) {
            let mut ss = 0.0;
            let mut sy = 0.0;
            for i in 0..x.len() {
                let s = x[i] - px[i];
                let y = g[i] - pg[i];
                ss += s * s;
                sy += s * y;
            }
            if sy > 0.0 && ss > 0.0 {
                return (ss / sy).clamp(1e-14, 1e12);
            }
        }
        self.last
    }

    fn remember(&mut self, x: &[f64], g: &[f64], step: f64) {
        self.prev_x = Some(x.to_vec());
        self.prev_g = Some(g.to_vec());
        self.last = step;
    }

    fn reset(&mut self) {
        self.prev_x = None;
        self.prev_g = None;
    }
}

/// Generic projected BB descent. `evaluate` returns (objective, residual
/// norm); `gradient` fills the descent gradient in the discrete L2(mass)
/// metric (so the radial cells near the origin are not crushed by their tiny
/// volumes). Steps are accepted on Armijo sufficient decrease of the
/// objective, or on residual decrease once the Armijo target dips below
/// floating-point resolution.
fn projected_descent(
    x: &mut Field,
    domain: &Domain,
    tolerance: f64,
    max_iter: usize,
    evaluate: &dyn Fn(&Field) -> Result<(f64, f64)>,
    gradient: &dyn Fn(&Field) -> Result<Vec<f64>>,
    renormalize: Option<&dyn Fn(&mut Field)>,
) -> Result<usize> {
    let (mut obj, mut res) = evaluate(x)?;
    let mut bb = BbStep::new();
    let mut best = x.clone();
    let mut best_res = res;
    let mut since_best = 0usize;
    for it in 0..max_iter {
        if res <= tolerance {
            return Ok(it);
        }
        let g = gradient(x)?;
        // Directional derivative in the mass metric.
        let g2: f64 = g
            .iter()
            .zip(domain.cell_mass())
            .map(|(v, m)| v * v * m)
            .sum();
        if g2 == 0.0 {
            break;
        }
        let mut eta = bb.propose(x.values(), &g);
        let mut accepted = false;
        let mut endgame_step = false;
        for _ in 0..60 {
            let mut x_try = x.clone();
            for i in domain.interior_indices() {
                x_try[i] = (x_try[i] - eta * g[i]).max(0.0);
            }
            // The clamp must not collapse the iterate onto the trivial
            // critical point; the sought solution is the nontrivial one.
            if x_try.max() == 0.0 {
                eta *= 0.5;
                continue;
            }
            let (obj_try, res_try) = evaluate(&x_try)?;
            let target = 1e-4 * eta * g2;
            let below_resolution = target < 1e-14 * (1.0 + obj.abs());
            let ok_armijo = obj_try <= obj - target;
            // Nonmonotone BB endgame once objective differences fall below
            // rounding: small residual increases are allowed, the best
            // iterate is kept on the side.
            let ok_residual = below_resolution && res_try <= 1.01 * res;
            if ok_armijo || ok_residual {
                bb.remember(x.values(), &g, eta);
                *x = x_try;
                obj = obj_try;
                res = res_try;
                accepted = true;
                endgame_step = !ok_armijo;
                break;
            }
            eta *= 0.5;
        }
        if !accepted {
            break;
        }
        if res < best_res {
            best = x.clone();
            best_res = res;
            since_best = 0;
        } else if endgame_step {
            // Staleness only counts once objective progress is exhausted.
            since_best += 1;
            if since_best > 500 {
                break;
            }
        }
        if let Some(renorm) = renormalize {
            if it % 64 == 63 {
                renorm(x);
                let (o, r) = evaluate(x)?;
                obj = o;
                res = r;
                bb.reset();
            }
        }
    }
    if best_res < res {
        *x = best;
        res = best_res;
    }
    if res <= tolerance {
        Ok(max_iter)
    } else {
        Err(DnleError::NonConvergence(format!(
            "descent residual {res:.3e} above tolerance {tolerance:.3e} after {max_iter} iterations"
        )))
    }
}

fn profile_residual(
    w: &Field,
    params: &Parameters,
    domain: &Domain,
    reg: FluxRegularization,
) -> Result<(Field, f64)> {
    let mu = params.degenerate_mu()?;
    let lap = discrete_p_laplacian(domain, w, params.p, reg)?;
    let mut r = Field::zeros(domain.len());
    let mut norm: f64 = 0.0;
    for i in domain.interior_indices() {
        r[i] = lap[i] + mu * w[i].max(0.0).powf(1.0 / params.m);
        norm = norm.max(r[i].abs());
    }
    Ok((r, norm))
}

/// Projected gradient descent on J from the supplied positive start; exposed
/// for uniqueness probes. Returns the minimizer in the w variable.
pub fn minimize_j_from(
    start: &Field,
    params: &Parameters,
    domain: &Domain,
    tolerance: f64,
) -> Result<(Field, usize)> {
    let reg = FluxRegularization::default_for(params.p);
    let mut w = start.clone();
    for i in 0..domain.len() {
        if domain.is_boundary(i) {
            w[i] = 0.0;
        }
    }
    let evaluate = |w: &Field| -> Result<(f64, f64)> {
        let j = functional_j(w, params, domain)?;
        let (_, norm) = profile_residual(w, params, domain, reg)?;
        Ok((j, norm))
    };
    let gradient = |w: &Field| -> Result<Vec<f64>> {
        let (r, _) = profile_residual(w, params, domain, reg)?;
        Ok((0..domain.len()).map(|i| -r[i]).collect())
    };
    let iters = projected_descent(
        &mut w,
        domain,
        tolerance,
        400_000,
        &evaluate,
        &gradient,
        None,
    )?;
    Ok((w, iters))
}

/// Compute the asymptotic profile f of the rescaled degenerate flow.
pub fn compute_profile_f(
    params: &Parameters,
    domain: &Domain,
    method: ProfileMethod,
    tolerance: f64,
) -> Result<StationaryProfile> {
    let mu = params.degenerate_mu()?;
    let (m, p) = (params.m, params.p);
    let reg = FluxRegularization::default_for(p);

    let (w, iterations) = match method {
        ProfileMethod::MinimizeJ => {
            // Strictly positive start with the right linear boundary growth.
            let start = Field::new(domain.node_distances().to_vec())?;
            minimize_j_from(&start, params, domain, tolerance)?
        }
        ProfileMethod::LongTimeLimit => {
            let mut v = Field::zeros(domain.len());
            for i in domain.interior_indices() {
                v[i] = domain.node_distances()[i].powf(1.0 / m);
            }
            let controls = SolverControls::for_params(params);
            let dtau = 0.4 / mu;
            let a_coef = 1.0 - dtau * mu;
            let mut iters = 0usize;
            let max_steps = 40_000;
            loop {
                let w = v.powf_clamped(m);
                let (_, norm) = profile_residual(&w, params, domain, reg)?;
                if norm <= tolerance {
                    break (w, iters);
                }
                if iters >= max_steps {
                    return Err(DnleError::NonConvergence(format!(
                        "long-time limit residual {norm:.3e} after {iters} steps"
                    )));
                }
                v = implicit_step(a_coef, dtau, &v, &v, m, p, domain, &controls)?;
                iters += 1;
            }
        }
    };

    let (_, residual_norm) = profile_residual(&w, params, domain, reg)?;
    if residual_norm > tolerance {
        return Err(DnleError::NonConvergence(format!(
            "profile residual {residual_norm:.3e} above tolerance {tolerance:.3e}"
        )));
    }
    let f = w.powf_clamped(1.0 / m);
    let boundary_constants = boundary_growth_check(&f, domain, m)?;
    Ok(StationaryProfile {
        f,
        residual_norm,
        boundary_constants,
        iterations,
    })
}

/// Minimize the Rayleigh quotient to the first Dirichlet eigenpair of the
/// p-Laplacian, eigenfunction normalized to max = 1, starting from the
/// positive p = 2 eigenfunction shape.
pub fn compute_first_eigenpair(p: f64, domain: &Domain, tolerance: f64) -> Result<Eigenpair> {
    let ext = domain.extent();
    let start = match domain.kind {
        DomainKind::Interval { .. } => {
            Field::from_fn(domain, |x| (std::f64::consts::PI * x / ext).sin())
        }
        DomainKind::Ball { .. } => Field::from_fn(domain, |r| 1.0 - (r / ext) * (r / ext)),
    };
    compute_first_eigenpair_from(&start, p, domain, tolerance)
}

/// Rayleigh-quotient minimization from a supplied nonnegative start; the
/// quotient is 0-homogeneous, so rescaling the start leaves the computed
/// eigenvalue unchanged.
pub fn compute_first_eigenpair_from(
    start: &Field,
    p: f64,
    domain: &Domain,
    tolerance: f64,
) -> Result<Eigenpair> {
    if !(p > 1.0) {
        return Err(DnleError::InvalidParameters(format!(
            "eigenproblem needs p > 1, got {p}"
        )));
    }
    let reg = FluxRegularization::default_for(p);
    let n = domain.len();
    let mut phi = start.clone();
    phi.clamp_nonnegative();
    for i in 0..n {
        if domain.is_boundary(i) {
            phi[i] = 0.0;
        }
    }

    let eig_residual = |phi: &Field, lambda: f64| -> Result<(Field, f64)> {
        let lap = discrete_p_laplacian(domain, phi, p, reg)?;
        let mut r = Field::zeros(n);
        let mut norm: f64 = 0.0;
        for i in domain.interior_indices() {
            r[i] = lap[i] + lambda * phi[i].abs().powf(p - 2.0) * phi[i];
            // The residual is (p-1)-homogeneous; certify it on the
            // max-normalized eigenfunction.
            norm = norm.max(r[i].abs());
        }
        let scale = phi.max().max(1e-300).powf(p - 1.0);
        Ok((r, norm / scale))
    };
    let evaluate = |phi: &Field| -> Result<(f64, f64)> {
        let q = rayleigh_quotient(phi, p, domain)?;
        let (_, norm) = eig_residual(phi, q)?;
        Ok((q, norm))
    };
    let gradient = |phi: &Field| -> Result<Vec<f64>> {
        let q = rayleigh_quotient(phi, p, domain)?;
        let (r, _) = eig_residual(phi, q)?;
        Ok((0..n).map(|i| -r[i]).collect())
    };
    let renorm = |phi: &mut Field| {
        let mx = phi.max();
        if mx > 0.0 {
            for v in phi.values_mut() {
                *v /= mx;
            }
        }
    };

    let iterations = projected_descent(
        &mut phi,
        domain,
        tolerance,
        400_000,
        &evaluate,
        &gradient,
        Some(&renorm),
    )?;

    let mx = phi.max();
    if !(mx > 0.0) {
        return Err(DnleError::NonConvergence(
            "eigen iteration collapsed to zero".into(),
        ));
    }
    for v in phi.values_mut() {
        *v /= mx;
    }
    let lambda1 = rayleigh_quotient(&phi, p, domain)?;
    let (_, residual_norm) = eig_residual(&phi, lambda1)?;
    if residual_norm > tolerance {
        return Err(DnleError::NonConvergence(format!(
            "eigen residual {residual_norm:.3e} above tolerance {tolerance:.3e}"
        )));
    }
    for i in domain.interior_indices() {
        if phi[i] <= 0.0 {
            return Err(DnleError::NonConvergence(format!(
                "eigenfunction not positive at interior node {i}"
            )));
        }
    }
    Ok(Eigenpair {
        lambda1,
        eigenfunction: phi,
        residual_norm,
        iterations,
    })
}

/// First eigenvalue of the 1D p-Laplacian on (0, L):
/// lambda_1 = (p-1) (pi_p / L)^p with pi_p = 2 pi / (p sin(pi/p)).
/// Closed-form oracle for interval eigen computations.
pub fn interval_eigenvalue_formula(p: f64, length: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let pi_p = 2.0 * pi / (p * (pi / p).sin());
    (p - 1.0) * (pi_p / length).powf(p)
}

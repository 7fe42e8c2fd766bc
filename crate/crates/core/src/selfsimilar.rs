//! Self-similar solutions U(t,x) = (t+s)^{-alpha} h(|x|(t+s)^{-beta}) of the
//! degenerate equation: closed-form Barenblatt (source-type) solutions, the
//! profile ODE in integrated flux form, the height-scaling identity and the
//! slow-decay classification.
//!
//! The profile is carried as g = h^m. The integrated identity
//!
//! ```text
//! |g'|^{p-2} g' = -beta r g^{1/m} - (alpha - beta N) r^{1-N} int_0^r s^{N-1} g^{1/m} ds
//! ```
//!
//! determines g' algebraically from (g, the running integral), so the ODE
//! system integrated here is two-dimensional and the flux stays smooth through
//! g' = 0 at the origin.

use crate::error::DnleError;
use crate::params::{Parameters, Regime};
use crate::Result;

const CONSTRAINT_TOL: f64 = 1e-12;

/// Exponents (alpha, beta) on the constraint line, time offset s and the
/// profile height M (g(0) = M^m, g'(0) = 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfSimilarSpec {
    pub alpha: f64,
    pub beta: f64,
    pub s: f64,
    /// Height parameter M > 0.
    pub height: f64,
}

/// Taxonomy over (alpha, beta) for degenerate parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelfSimilarCase {
    /// beta = 0: separate-variables solutions (t+s)^{-mu} f(x).
    SeparateVariables,
    /// alpha = beta N: Barenblatt source-type solutions, flat landing.
    Barenblatt,
    /// alpha > beta N: compact support with a transversal crossing.
    Intermediate,
    /// alpha < beta N: positive profile decaying like r^{-alpha m / beta}.
    SlowDecay,
}

/// Residual of the exponent constraint: (m(p-1) - 1) alpha + p beta - 1.
pub fn check_alpha_beta(alpha: f64, beta: f64, params: &Parameters) -> f64 {
    (params.kappa - 1.0) * alpha + params.p * beta - 1.0
}

impl SelfSimilarSpec {
    pub fn new(alpha: f64, beta: f64, s: f64, height: f64, params: &Parameters) -> Result<Self> {
        params.require_regime(Regime::Degenerate, "self-similar solutions")?;
        if !(alpha > 0.0) || beta < 0.0 {
            return Err(DnleError::InvalidParameters(format!(
                "need alpha > 0 and beta >= 0, got alpha = {alpha}, beta = {beta}"
            )));
        }
        if !(height > 0.0) || s < 0.0 {
            return Err(DnleError::InvalidParameters(format!(
                "need height > 0 and s >= 0, got height = {height}, s = {s}"
            )));
        }
        let resid = check_alpha_beta(alpha, beta, params);
        if resid.abs() > CONSTRAINT_TOL {
            return Err(DnleError::InvalidParameters(format!(
                "(alpha, beta) off the constraint line by {resid:.3e}"
            )));
        }
        Ok(SelfSimilarSpec {
            alpha,
            beta,
            s,
            height,
        })
    }

    /// beta = 0, alpha = mu: the separate-variables family.
    pub fn separate_variables(params: &Parameters, s: f64, height: f64) -> Result<Self> {
        let mu = params.degenerate_mu()?;
        Self::new(mu, 0.0, s, height, params)
    }

    /// alpha = beta N: the Barenblatt family.
    pub fn barenblatt(params: &Parameters, s: f64, height: f64) -> Result<Self> {
        let c = barenblatt_constants(params)?;
        Self::new(c.alpha, c.beta, s, height, params)
    }

    /// alpha from beta via the constraint line.
    pub fn from_beta(params: &Parameters, beta: f64, s: f64, height: f64) -> Result<Self> {
        let alpha = (1.0 - params.p * beta) / (params.kappa - 1.0);
        Self::new(alpha, beta, s, height, params)
    }

    pub fn case(&self, params: &Parameters) -> SelfSimilarCase {
        let bn = self.beta * params.dim as f64;
        if self.beta == 0.0 {
            SelfSimilarCase::SeparateVariables
        } else if (self.alpha - bn).abs() <= 1e-12 * self.alpha.max(bn) {
            SelfSimilarCase::Barenblatt
        } else if self.alpha > bn {
            SelfSimilarCase::Intermediate
        } else {
            SelfSimilarCase::SlowDecay
        }
    }
}

/// Barenblatt exponents and profile coefficient.
///
/// `coefficient` is the residual-verified q in
/// U = (t+s)^{-alpha} (q (a^{p/(p-1)} - r^{p/(p-1)}))_+^{(p-1)/(m(p-1)-1)};
/// `printed_coefficient` is the commonly quoted value for the same position,
/// which lacks a 1/m factor and fails the PDE residual check whenever m != 1.
/// Both are reported; all evaluations use `coefficient`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarenblattConstants {
    pub alpha: f64,
    pub beta: f64,
    pub coefficient: f64,
    pub printed_coefficient: f64,
}

/// alpha_B = 1/(m(p-1) - 1 + p/N), beta_B = alpha_B/N and the profile
/// coefficient q = ((m(p-1)-1)/(mp)) (alpha_B/N)^{1/(p-1)}.
///
/// Requires the degenerate regime and the good range m(p-1) + p/N > 1.
pub fn barenblatt_constants(params: &Parameters) -> Result<BarenblattConstants> {
    params.require_regime(Regime::Degenerate, "Barenblatt solutions")?;
    let n = params.dim as f64;
    if params.kappa + params.p / n <= 1.0 {
        return Err(DnleError::InvalidParameters(format!(
            "outside the good range: m(p-1) + p/N = {} <= 1",
            params.kappa + params.p / n
        )));
    }
    let alpha = 1.0 / (params.kappa - 1.0 + params.p / n);
    let beta = alpha / n;
    let frac = beta.powf(1.0 / (params.p - 1.0));
    let coefficient = (params.kappa - 1.0) / (params.m * params.p) * frac;
    let printed_coefficient = (params.kappa - 1.0) / params.p * frac;
    Ok(BarenblattConstants {
        alpha,
        beta,
        coefficient,
        printed_coefficient,
    })
}

/// A concrete Barenblatt solution pinned by its dimensionless support
/// parameter `a` and time offset `s`.
#[derive(Debug, Clone, Copy)]
pub struct BarenblattSolution {
    pub constants: BarenblattConstants,
    pub a: f64,
    pub s: f64,
}

impl BarenblattSolution {
    /// Fix `a` from the height M via g(0) = M^m.
    pub fn from_height(params: &Parameters, height: f64, s: f64) -> Result<Self> {
        if !(height > 0.0) {
            return Err(DnleError::InvalidParameters(format!(
                "height must be positive, got {height}"
            )));
        }
        let constants = barenblatt_constants(params)?;
        let kappa = params.kappa;
        let pp = params.p / (params.p - 1.0);
        // q a^{p'} = M^{m(kappa-1)/kappa}
        let a = (height.powf(params.m * (kappa - 1.0) / kappa) / constants.coefficient)
            .powf(1.0 / pp);
        Ok(BarenblattSolution { constants, a, s })
    }

    /// Fix (a, s) so that at t = 0 the support radius is `delta` and the peak
    /// value is `epsilon`: the comparison subsolution of the positivity
    /// argument.
    pub fn touching(epsilon: f64, delta: f64, params: &Parameters) -> Result<Self> {
        if !(epsilon > 0.0 && delta > 0.0) {
            return Err(DnleError::InvalidParameters(
                "touching Barenblatt needs positive epsilon and delta".into(),
            ));
        }
        let constants = barenblatt_constants(params)?;
        let kappa = params.kappa;
        let n = params.dim as f64;
        let pp = params.p / (params.p - 1.0);
        let c_out = constants
            .coefficient
            .powf((params.p - 1.0) / (kappa - 1.0));
        let a = ((epsilon / c_out) * delta.powf(n)).powf(constants.beta * (kappa - 1.0));
        let s = delta.powf(params.p) * (c_out / epsilon).powf(kappa - 1.0);
        debug_assert!((a * s.powf(constants.beta) - delta).abs() <= 1e-9 * delta);
        let _ = pp;
        Ok(BarenblattSolution { constants, a, s })
    }

    /// Radius of the support at time t: a (t+s)^beta.
    pub fn support_radius(&self, t: f64) -> f64 {
        self.a * (t + self.s).powf(self.constants.beta)
    }

    /// Time at which the support reaches radius `rho`.
    pub fn reach_time(&self, rho: f64) -> f64 {
        (rho / self.a).powf(1.0 / self.constants.beta) - self.s
    }

    /// Pointwise value; zero outside the support, nonnegative everywhere.
    pub fn value(&self, x: f64, t: f64, params: &Parameters) -> f64 {
        let ts = t + self.s;
        if ts <= 0.0 {
            return 0.0;
        }
        let pp = params.p / (params.p - 1.0);
        let r = x.abs() * ts.powf(-self.constants.beta);
        let bracket =
            self.constants.coefficient * (self.a.powf(pp) - r.powf(pp));
        if bracket <= 0.0 {
            return 0.0;
        }
        ts.powf(-self.constants.alpha)
            * bracket.powf((params.p - 1.0) / (params.kappa - 1.0))
    }

    /// Time derivative of the closed form, for PDE-residual oracles.
    pub fn time_derivative(&self, x: f64, t: f64, params: &Parameters) -> f64 {
        let ts = t + self.s;
        let pp = params.p / (params.p - 1.0);
        let (alpha, beta, q) = (
            self.constants.alpha,
            self.constants.beta,
            self.constants.coefficient,
        );
        let r = x.abs() * ts.powf(-beta);
        let bracket = q * (self.a.powf(pp) - r.powf(pp));
        if bracket <= 0.0 {
            return 0.0;
        }
        let expo = (params.p - 1.0) / (params.kappa - 1.0);
        // d/dt [ts^{-alpha} G(r)] = ts^{-alpha-1} (-alpha G - beta r G').
        let g_val = bracket.powf(expo);
        let dg_dr = expo * bracket.powf(expo - 1.0) * q * (-pp * r.powf(pp - 1.0));
        ts.powf(-alpha - 1.0) * (-alpha * g_val - beta * r * dg_dr)
    }
}

/// Pointwise evaluation of the Barenblatt closed form for a spec with
/// alpha = alpha_B, height-matched support.
pub fn barenblatt_value(x: f64, t: f64, spec: &SelfSimilarSpec, params: &Parameters) -> Result<f64> {
    if spec.case(params) != SelfSimilarCase::Barenblatt {
        return Err(DnleError::InvalidParameters(format!(
            "spec (alpha = {}, beta = {}) is not on the Barenblatt ray",
            spec.alpha, spec.beta
        )));
    }
    if t + spec.s <= 0.0 {
        return Err(DnleError::InvalidParameters(format!(
            "need t + s > 0, got {}",
            t + spec.s
        )));
    }
    let sol = BarenblattSolution::from_height(params, spec.height, spec.s)?;
    Ok(sol.value(x, t, params))
}

/// Controls for the profile ODE integration.
#[derive(Debug, Clone, Copy)]
pub struct StepControls {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest step as a fraction of r_max (also the output density).
    pub max_step_frac: f64,
    /// First step as a fraction of r_max (series start offset).
    pub first_step_frac: f64,
    pub max_steps: usize,
}

impl Default for StepControls {
    fn default() -> Self {
        StepControls {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step_frac: 1.0 / 1024.0,
            first_step_frac: 1e-6,
            max_steps: 400_000,
        }
    }
}

/// The integrated radial profile g = h^m with detected support.
#[derive(Debug, Clone)]
pub struct ProfileCurve {
    pub r: Vec<f64>,
    pub g: Vec<f64>,
    pub g_prime: Vec<f64>,
    /// First zero of g (absent when g stays positive to r_max).
    pub support_radius: Option<f64>,
    /// g'(a) at the first zero, when it exists.
    pub crossing_slope: Option<f64>,
    pub case: SelfSimilarCase,
}

impl ProfileCurve {
    /// Cubic Hermite interpolation of g at radius r (the stored slopes make
    /// this fourth-order accurate between samples); None outside the range.
    pub fn interpolate(&self, r: f64) -> Option<f64> {
        if self.r.is_empty() || r < self.r[0] || r > *self.r.last().unwrap() {
            return None;
        }
        let idx = match self
            .r
            .binary_search_by(|probe| probe.partial_cmp(&r).unwrap())
        {
            Ok(i) => return Some(self.g[i]),
            Err(i) => i,
        };
        let (r0, r1) = (self.r[idx - 1], self.r[idx]);
        let dr = r1 - r0;
        let s = (r - r0) / dr;
        let (g0, g1) = (self.g[idx - 1], self.g[idx]);
        let (d0, d1) = (self.g_prime[idx - 1] * dr, self.g_prime[idx] * dr);
        let s2 = s * s;
        let s3 = s2 * s;
        Some(
            (2.0 * s3 - 3.0 * s2 + 1.0) * g0
                + (s3 - 2.0 * s2 + s) * d0
                + (-2.0 * s3 + 3.0 * s2) * g1
                + (s3 - s2) * d1,
        )
    }
}

struct ProfileOde {
    alpha: f64,
    beta: f64,
    n: f64,
    m: f64,
    p: f64,
}

impl ProfileOde {
    /// Flux |g'|^{p-2} g' from the integrated identity.
    fn flux(&self, r: f64, g: f64, q: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        -self.beta * r * g.max(0.0).powf(1.0 / self.m)
            - (self.alpha - self.beta * self.n) * q / r.powf(self.n - 1.0)
    }

    fn invert_flux(&self, flux: f64) -> f64 {
        flux.signum() * flux.abs().powf(1.0 / (self.p - 1.0))
    }

    fn rhs(&self, r: f64, y: [f64; 2]) -> [f64; 2] {
        let gp = self.invert_flux(self.flux(r, y[0], y[1]));
        [gp, r.powf(self.n - 1.0) * y[0].max(0.0).powf(1.0 / self.m)]
    }
}

/// One Dormand-Prince 5(4) step; returns (y5, error estimate).
fn dp45(ode: &ProfileOde, r: f64, y: [f64; 2], h: f64) -> ([f64; 2], f64) {
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let mut k = [[0.0; 2]; 7];
    k[0] = ode.rhs(r, y);
    for stage in 0..6 {
        let mut ys = y;
        for (j, kj) in k.iter().enumerate().take(stage + 1) {
            ys[0] += h * A[stage][j] * kj[0];
            ys[1] += h * A[stage][j] * kj[1];
        }
        k[stage + 1] = ode.rhs(r + C[stage] * h, ys);
    }
    // k[6] is the FSAL stage evaluated at the 5th-order solution.
    let mut y5 = y;
    for (j, kj) in k.iter().enumerate().take(6) {
        y5[0] += h * A[5][j] * kj[0];
        y5[1] += h * A[5][j] * kj[1];
    }
    let mut err: f64 = 0.0;
    for dim in 0..2 {
        let mut e = 0.0;
        for (j, kj) in k.iter().enumerate() {
            e += E[j] * kj[dim];
        }
        err = err.max((h * e).abs());
    }
    (y5, err)
}

/// Integrate the profile ODE from the series start at the origin out to
/// r_max, locating the first zero of g by bisection when it occurs.
pub fn integrate_profile(
    spec: &SelfSimilarSpec,
    params: &Parameters,
    r_max: f64,
    controls: &StepControls,
) -> Result<ProfileCurve> {
    params.require_regime(Regime::Degenerate, "profile integration")?;
    if !(r_max > 0.0) {
        return Err(DnleError::InvalidParameters(format!(
            "r_max must be positive, got {r_max}"
        )));
    }
    let ode = ProfileOde {
        alpha: spec.alpha,
        beta: spec.beta,
        n: params.dim as f64,
        m: params.m,
        p: params.p,
    };
    let m_height = spec.height;
    let g0 = m_height.powf(params.m);
    let case = spec.case(params);

    // Series start: g(r) = M^m - c_or r^{p/(p-1)} + ..., Q(r) = M r^N / N.
    let r_start = controls.first_step_frac * r_max;
    let pp = params.p / (params.p - 1.0);
    let c_or = (params.p - 1.0) / params.p
        * (m_height * spec.alpha / ode.n).powf(1.0 / (params.p - 1.0));
    let mut r = r_start;
    let mut y = [
        g0 - c_or * r_start.powf(pp),
        m_height * r_start.powf(ode.n) / ode.n,
    ];

    let mut rs = vec![0.0, r];
    let mut gs = vec![g0, y[0]];
    let mut gps = vec![0.0, ode.invert_flux(ode.flux(r, y[0], y[1]))];

    let h_max = controls.max_step_frac * r_max;
    let mut h = (h_max / 16.0).min(r_max - r);
    let mut support_radius = None;
    let mut crossing_slope = None;
    let floor = 1e-13 * g0;

    let mut steps = 0usize;
    while r < r_max {
        steps += 1;
        if steps > controls.max_steps {
            return Err(DnleError::IntegrationFailure(format!(
                "step budget exhausted at r = {r}"
            )));
        }
        h = h.min(r_max - r).min(h_max);
        if h < 1e-15 * r_max {
            return Err(DnleError::IntegrationFailure(format!(
                "step size underflow at r = {r}"
            )));
        }
        let (y_new, err) = dp45(&ode, r, y, h);
        let scale = controls.abs_tol + controls.rel_tol * y[0].abs().max(y_new[0].abs()).max(g0);
        if err > scale {
            h *= (0.9 * (scale / err).powf(0.2)).max(0.1);
            continue;
        }
        let r_new = r + h;
        if y_new[0] <= 0.0 {
            // Transversal crossing: bisect on g inside (r, r_new).
            let eval_g = |rr: f64| -> [f64; 2] {
                let mut yy = y;
                let sub = 8;
                let dh = (rr - r) / sub as f64;
                let mut rc = r;
                for _ in 0..sub {
                    // classic RK4 substep
                    let k1 = ode.rhs(rc, yy);
                    let k2 = ode.rhs(
                        rc + dh / 2.0,
                        [yy[0] + dh / 2.0 * k1[0], yy[1] + dh / 2.0 * k1[1]],
                    );
                    let k3 = ode.rhs(
                        rc + dh / 2.0,
                        [yy[0] + dh / 2.0 * k2[0], yy[1] + dh / 2.0 * k2[1]],
                    );
                    let k4 = ode.rhs(rc + dh, [yy[0] + dh * k3[0], yy[1] + dh * k3[1]]);
                    yy[0] += dh / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
                    yy[1] += dh / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
                    rc += dh;
                }
                yy
            };
            let mut lo = r;
            let mut hi = r_new;
            let mut y_at = y_new;
            for _ in 0..60 {
                if hi - lo <= 1e-10 {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                let ym = eval_g(mid);
                if ym[0] > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                    y_at = ym;
                }
            }
            let a = 0.5 * (lo + hi);
            let slope = ode.invert_flux(ode.flux(a, 0.0, y_at[1]));
            support_radius = Some(a);
            crossing_slope = Some(slope);
            rs.push(a);
            gs.push(0.0);
            gps.push(slope);
            break;
        }
        r = r_new;
        y = y_new;
        let gp = ode.invert_flux(ode.flux(r, y[0], y[1]));
        rs.push(r);
        gs.push(y[0]);
        gps.push(gp);
        if y[0] < floor {
            // Tangential touchdown (flat landing): extrapolate the contact
            // point from g ~ C (a - r)^{kappa/(kappa-1)}.
            let a = if gp < 0.0 {
                r + (params.kappa / (params.kappa - 1.0)) * y[0] / (-gp)
            } else {
                r
            };
            support_radius = Some(a);
            crossing_slope = Some(0.0);
            break;
        }
        h *= (0.9 * (scale / err.max(1e-300)).powf(0.2)).clamp(0.1, 5.0);
    }

    Ok(ProfileCurve {
        r: rs,
        g: gs,
        g_prime: gps,
        support_radius,
        crossing_slope,
        case,
    })
}

/// Upper bound for the first zero of the Intermediate profile:
/// a <= M^{(kappa-1)/p} (mp/(kappa-1))^{(p-1)/p} beta^{-1/p}.
pub fn support_radius_bound(height: f64, params: &Parameters, beta: f64) -> f64 {
    let kappa = params.kappa;
    height.powf((kappa - 1.0) / params.p)
        * (params.m * params.p / (kappa - 1.0)).powf((params.p - 1.0) / params.p)
        * beta.powf(-1.0 / params.p)
}

/// Residuals of the height-scaling identity
/// h(r; M) = M h(M^{-(kappa-1)/p} r; 1): max over the sampled radii of the
/// curve at height M, plus the support-radius identity residual when both
/// supports were detected.
pub fn rescale_profile_identity(
    curve_at_height: &ProfileCurve,
    curve_unit: &ProfileCurve,
    height: f64,
    params: &Parameters,
) -> (f64, Option<f64>) {
    let sigma = (params.kappa - 1.0) / params.p;
    let scale = height.powf(-sigma);
    let mut max_resid: f64 = 0.0;
    for (idx, &r) in curve_at_height.r.iter().enumerate() {
        let g_m = curve_at_height.g[idx];
        if g_m < 0.0 {
            continue;
        }
        if let Some(g_1) = curve_unit.interpolate(scale * r) {
            let h_m = g_m.max(0.0).powf(1.0 / params.m);
            let h_1 = g_1.max(0.0).powf(1.0 / params.m);
            max_resid = max_resid.max((h_m - height * h_1).abs());
        }
    }
    let support_resid = match (curve_at_height.support_radius, curve_unit.support_radius) {
        (Some(am), Some(a1)) => Some((am - height.powf(sigma) * a1).abs()),
        _ => None,
    };
    (max_resid, support_resid)
}

/// Slow-decay classification: decay exponent gamma = alpha m / beta and the
/// sign of gamma (p-1) + p - N with its thresholds.
#[derive(Debug, Clone, Copy)]
pub struct DecayClassification {
    pub gamma: f64,
    /// gamma (p-1) + p - N.
    pub coefficient: f64,
    pub sign: std::cmp::Ordering,
    pub gamma1: f64,
    pub beta1: f64,
    pub alpha1: f64,
}

/// Classify the decay of a slow-decay profile (requires alpha < beta N).
pub fn classify_decay(alpha: f64, beta: f64, params: &Parameters) -> Result<DecayClassification> {
    params.require_regime(Regime::Degenerate, "decay classification")?;
    let n = params.dim as f64;
    if !(alpha > 0.0) || !(beta > 0.0) {
        return Err(DnleError::InvalidParameters(format!(
            "decay classification needs positive exponents, got alpha = {alpha}, beta = {beta}"
        )));
    }
    if !(alpha < beta * n) {
        return Err(DnleError::InvalidParameters(format!(
            "decay classification needs alpha < beta N, got alpha = {alpha}, beta N = {}",
            beta * n
        )));
    }
    let gamma = alpha * params.m / beta;
    let coefficient = gamma * (params.p - 1.0) + params.p - n;
    let sign = if coefficient.abs() <= 1e-12 {
        std::cmp::Ordering::Equal
    } else if coefficient > 0.0 {
        std::cmp::Ordering::Greater
    } else {
        std::cmp::Ordering::Less
    };
    let beta_b = 1.0 / ((params.kappa - 1.0) * n + params.p);
    let beta1 = params.kappa * beta_b;
    let alpha1 = (1.0 - params.p * beta1) / (params.kappa - 1.0);
    Ok(DecayClassification {
        gamma,
        coefficient,
        sign,
        gamma1: (n - params.p) / (params.p - 1.0),
        beta1,
        alpha1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cmp::Ordering;

    fn pme() -> Parameters {
        Parameters::new(2.0, 2.0, 1).unwrap()
    }

    fn ple3() -> Parameters {
        Parameters::new(1.0, 3.0, 1).unwrap()
    }

    #[test]
    fn constraint_line_examples() {
        let params = pme();
        let mu = params.mu().unwrap();
        assert!(check_alpha_beta(mu, 0.0, &params).abs() < 1e-15);
        assert!(check_alpha_beta(1.0 / 3.0, 1.0 / 3.0, &params).abs() < 1e-15);
        assert!(check_alpha_beta(0.0, 1.0 / params.p, &params).abs() < 1e-15);
        assert!(check_alpha_beta(1.0, 1.0, &params).abs() > 0.1);
    }

    #[test]
    fn barenblatt_constants_examples() {
        let c = barenblatt_constants(&pme()).unwrap();
        assert!((c.alpha - 1.0 / 3.0).abs() < 1e-15);
        assert!((c.beta - 1.0 / 3.0).abs() < 1e-15);
        assert!((c.coefficient - 1.0 / 12.0).abs() < 1e-15);
        assert!((c.printed_coefficient - 1.0 / 6.0).abs() < 1e-15);

        let c = barenblatt_constants(&ple3()).unwrap();
        assert!((c.alpha - 0.25).abs() < 1e-15);
        assert!((c.beta - 0.25).abs() < 1e-15);
        assert!((c.coefficient - 1.0 / 6.0).abs() < 1e-15);
        // m = 1: printed and derived coefficients agree.
        assert_eq!(c.coefficient, c.printed_coefficient);

        // Quasilinear parameters are rejected by the regime gate even though
        // they sit inside the good range.
        let heat = Parameters::new(1.0, 2.0, 1).unwrap();
        assert!(matches!(
            barenblatt_constants(&heat),
            Err(DnleError::Regime(_))
        ));
    }

    #[test]
    fn barenblatt_value_examples() {
        let params = pme();
        // a = 1 corresponds to height M with q a^2 = M^{m(kappa-1)/kappa}:
        // M = (1/12)^{kappa/(m(kappa-1))} = (1/12)^{1}... kappa = 2, m = 2:
        // M^{2*1/2} = M, so M = q = 1/12.
        let spec = SelfSimilarSpec::barenblatt(&params, 0.0, 1.0 / 12.0).unwrap();
        let sol = BarenblattSolution::from_height(&params, spec.height, spec.s).unwrap();
        assert!((sol.a - 1.0).abs() < 1e-12, "a = {}", sol.a);
        // Center value at t = 1: q a^2 (t)^{-alpha} -> (1/12) * 1.
        let v = barenblatt_value(0.0, 1.0, &spec, &params).unwrap();
        assert!((v - 1.0 / 12.0).abs() < 1e-12, "v = {v}");
        // Beyond the support the positive part vanishes.
        let far = barenblatt_value(10.0, 1.0, &spec, &params).unwrap();
        assert_eq!(far, 0.0);
        assert!(barenblatt_value(0.0, -1.0, &spec, &params).is_err());
    }

    #[test]
    fn barenblatt_mass_is_conserved() {
        let params = pme();
        let sol = BarenblattSolution::from_height(&params, 1.0, 1.0).unwrap();
        // Quadrature over a wide window at two times.
        let mass = |t: f64| -> f64 {
            let n = 40_000;
            let half_width = 8.0;
            let dx = 2.0 * half_width / n as f64;
            (0..=n)
                .map(|i| {
                    let x = -half_width + i as f64 * dx;
                    let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                    w * sol.value(x, t, &params) * dx
                })
                .sum()
        };
        let m0 = mass(0.0);
        let m1 = mass(3.0);
        assert!(m0 > 0.0);
        assert!((m0 - m1).abs() < 1e-4, "mass {m0} vs {m1}");
    }

    #[test]
    fn ode_matches_closed_form_on_the_barenblatt_ray() {
        for params in [pme(), ple3()] {
            let spec = SelfSimilarSpec::barenblatt(&params, 0.0, 1.0).unwrap();
            let sol = BarenblattSolution::from_height(&params, 1.0, 0.0).unwrap();
            let curve =
                integrate_profile(&spec, &params, sol.a * 1.2, &StepControls::default()).unwrap();
            assert_eq!(curve.case, SelfSimilarCase::Barenblatt);
            let pp = params.p / (params.p - 1.0);
            let mut max_err: f64 = 0.0;
            for (idx, &r) in curve.r.iter().enumerate() {
                let bracket = sol.constants.coefficient * (sol.a.powf(pp) - r.powf(pp));
                let g_exact = if bracket <= 0.0 {
                    0.0
                } else {
                    bracket.powf(params.kappa / (params.kappa - 1.0))
                };
                max_err = max_err.max((curve.g[idx] - g_exact).abs());
            }
            assert!(max_err < 1e-6, "m={} p={}: err {max_err}", params.m, params.p);
            // The flat landing makes the contact point only sqrt-conditioned;
            // the profile values above are the tight check.
            let a = curve.support_radius.expect("support detected");
            assert!((a - sol.a).abs() < 2e-4, "a = {a} vs {}", sol.a);
        }
    }

    #[test]
    fn intermediate_profile_crosses_transversally() {
        let params = ple3();
        // beta < beta_B = 1/4 gives alpha > beta N.
        let spec = SelfSimilarSpec::from_beta(&params, 0.15, 0.0, 1.0).unwrap();
        assert_eq!(spec.case(&params), SelfSimilarCase::Intermediate);
        let curve = integrate_profile(&spec, &params, 6.0, &StepControls::default()).unwrap();
        let a = curve.support_radius.expect("finite support");
        let slope = curve.crossing_slope.unwrap();
        assert!(slope < -1e-4, "crossing slope {slope}");
        assert!(a < support_radius_bound(1.0, &params, 0.15) + 1e-9);
        // Monotone decreasing profile on (0, a).
        for idx in 1..curve.g.len() {
            assert!(curve.g[idx] <= curve.g[idx - 1] + 1e-12);
        }
    }

    #[test]
    fn slow_decay_profile_has_power_tail() {
        let params = Parameters::new(2.0, 2.0, 1).unwrap();
        // beta > beta_B = 1/3.
        let beta = 0.45;
        let spec = SelfSimilarSpec::from_beta(&params, beta, 0.0, 1.0).unwrap();
        assert_eq!(spec.case(&params), SelfSimilarCase::SlowDecay);
        let curve = integrate_profile(&spec, &params, 60.0, &StepControls::default()).unwrap();
        assert!(curve.support_radius.is_none());
        let gamma = spec.alpha * params.m / beta;
        // g r^gamma approaches a positive constant: compare two far radii.
        let probe = |r: f64| curve.interpolate(r).unwrap() * r.powf(gamma);
        let v1 = probe(35.0);
        let v2 = probe(55.0);
        assert!(v1 > 0.0 && v2 > 0.0);
        assert!(
            ((v1 - v2) / v1).abs() < 0.05,
            "tail constants {v1} vs {v2}"
        );
    }

    #[test]
    fn support_bound_examples() {
        let params = ple3();
        let bound = support_radius_bound(1.0, &params, 0.25);
        let expected = 3f64.powf(2.0 / 3.0) * 4f64.powf(1.0 / 3.0);
        assert!((bound - expected).abs() < 1e-12, "bound {bound}");
        // Height scaling of the bound is exact homogeneity.
        let m_height = 3.7;
        let b1 = support_radius_bound(m_height, &params, 0.2);
        let b2 = m_height.powf((params.kappa - 1.0) / params.p)
            * support_radius_bound(1.0, &params, 0.2);
        assert!((b1 - b2).abs() < 1e-12);
    }

    #[test]
    fn height_scaling_identity_holds() {
        let params = ple3();
        let beta = 0.15;
        let controls = StepControls::default();
        let unit = integrate_profile(
            &SelfSimilarSpec::from_beta(&params, beta, 0.0, 1.0).unwrap(),
            &params,
            8.0,
            &controls,
        )
        .unwrap();
        let m_height = 2.0;
        let tall = integrate_profile(
            &SelfSimilarSpec::from_beta(&params, beta, 0.0, m_height).unwrap(),
            &params,
            8.0,
            &controls,
        )
        .unwrap();
        let (resid, support_resid) = rescale_profile_identity(&tall, &unit, m_height, &params);
        assert!(resid <= 1e-5, "profile identity residual {resid}");
        assert!(
            support_resid.unwrap() <= 1e-5,
            "support identity residual {support_resid:?}"
        );

        // M = 1 is the identity.
        let (resid, _) = rescale_profile_identity(&unit, &unit, 1.0, &params);
        assert!(resid <= 1e-12);
    }

    #[test]
    fn support_ratio_follows_the_quarter_power() {
        let params = ple3();
        let beta = 0.15;
        let controls = StepControls::default();
        let a1 = integrate_profile(
            &SelfSimilarSpec::from_beta(&params, beta, 0.0, 1.0).unwrap(),
            &params,
            10.0,
            &controls,
        )
        .unwrap()
        .support_radius
        .unwrap();
        let a4 = integrate_profile(
            &SelfSimilarSpec::from_beta(&params, beta, 0.0, 4.0).unwrap(),
            &params,
            10.0,
            &controls,
        )
        .unwrap()
        .support_radius
        .unwrap();
        let expected = 4f64.powf((params.kappa - 1.0) / params.p);
        assert!(
            (a4 / a1 - expected).abs() < 1e-6,
            "ratio {} vs {expected}",
            a4 / a1
        );
    }

    #[test]
    fn decay_classification_examples() {
        // p >= N: sign positive always.
        let params = pme();
        let cls = classify_decay(0.2, 0.45, &params).unwrap();
        assert_eq!(cls.sign, Ordering::Greater);

        // The exact resonance gamma = gamma_1, beta = beta_1 gives sign zero,
        // and g = r^{-gamma} solves the ODE there (checked algebraically).
        let params = Parameters::new(2.0, 2.0, 3).unwrap();
        let beta_b = 1.0 / ((params.kappa - 1.0) * 3.0 + params.p);
        let beta1 = params.kappa * beta_b;
        let alpha1 = (1.0 - params.p * beta1) / (params.kappa - 1.0);
        let cls = classify_decay(alpha1, beta1, &params).unwrap();
        assert_eq!(cls.sign, Ordering::Equal);
        let gamma = cls.gamma;
        assert!((gamma - cls.gamma1).abs() < 1e-12);
        // Residual of g = r^{-gamma} in the ODE: the zero-order block
        // vanishes because gamma = alpha m / beta, and the divergence block
        // carries the factor N - 1 - (gamma+1)(p-1).
        let algebraic = 3.0 - 1.0 - (gamma + 1.0) * (params.p - 1.0);
        assert!(algebraic.abs() < 1e-12, "divergence factor {algebraic}");

        // Case 2: m=2, p=2, N=3, beta in (beta_1, 1/p) gives sign negative.
        let beta = 0.45;
        let alpha = (1.0 - params.p * beta) / (params.kappa - 1.0);
        assert!(beta > beta1 && beta < 1.0 / params.p);
        let cls = classify_decay(alpha, beta, &params).unwrap();
        assert_eq!(cls.sign, Ordering::Less);

        // alpha >= beta N rejected.
        assert!(classify_decay(1.0 / 3.0, 1.0 / 3.0, &pme()).is_err());
    }

    #[test]
    fn random_intermediate_supports_obey_the_bound() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let params = ple3();
        let beta_b = barenblatt_constants(&params).unwrap().beta;
        let controls = StepControls {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            ..StepControls::default()
        };
        for _ in 0..20 {
            let beta = rng.random::<f64>() * 0.8 * beta_b + 0.05 * beta_b;
            let height = 0.5 + rng.random::<f64>() * 2.0;
            let spec = SelfSimilarSpec::from_beta(&params, beta, 0.0, height).unwrap();
            let bound = support_radius_bound(height, &params, beta);
            let curve = integrate_profile(&spec, &params, bound * 1.5, &controls).unwrap();
            let a = curve
                .support_radius
                .expect("intermediate profiles have finite support");
            assert!(a <= bound * (1.0 + 1e-6), "a = {a}, bound = {bound}");
        }
    }
}

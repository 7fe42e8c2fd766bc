//! Discrete spatial operators: the p-Laplacian of w = u^m in flux
//! (conservative) form on interval and radial grids, plus the algebraic
//! monotonicity inequalities used as correctness oracles throughout.

use crate::error::DnleError;
use crate::grid::{Domain, Field};
use crate::linalg::Tridiag;
use crate::Result;

/// Gradient-magnitude floor for the singular range 1 < p < 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxRegularization {
    pub epsilon: f64,
}

impl FluxRegularization {
    pub fn none() -> Self {
        FluxRegularization { epsilon: 0.0 }
    }

    pub fn with_epsilon(epsilon: f64) -> Self {
        FluxRegularization { epsilon }
    }

    /// Default floor: 0 for p >= 2 (|g|^{p-2} is continuous at 0 there),
    /// 1e-10 for 1 < p < 2.
    pub fn default_for(p: f64) -> Self {
        FluxRegularization {
            epsilon: if p >= 2.0 { 0.0 } else { 1e-10 },
        }
    }
}

/// Regularized p-flux: (g^2 + eps^2)^{(p-2)/2} g; exact |g|^{p-2} g at eps = 0.
#[inline]
pub fn p_flux(g: f64, p: f64, reg: FluxRegularization) -> f64 {
    if p == 2.0 {
        return g;
    }
    let s2 = g * g + reg.epsilon * reg.epsilon;
    if s2 == 0.0 {
        return 0.0;
    }
    s2.powf(0.5 * (p - 2.0)) * g
}

/// Derivative of the regularized p-flux with respect to g:
/// (g^2 + eps^2)^{(p-4)/2} ((p-1) g^2 + eps^2), nonnegative for p > 1.
#[inline]
pub fn p_flux_derivative(g: f64, p: f64, reg: FluxRegularization) -> f64 {
    if p == 2.0 {
        return 1.0;
    }
    let mut s2 = g * g + reg.epsilon * reg.epsilon;
    if s2 == 0.0 {
        if p > 2.0 {
            return 0.0;
        }
        // Unregularized singular flux: keep the derivative finite.
        s2 = 1e-60;
    }
    s2.powf(0.5 * (p - 4.0)) * ((p - 1.0) * g * g + reg.epsilon * reg.epsilon)
}

/// Conservative discrete p-Laplacian of `w` by flux differencing at
/// half-nodes. Radial domains use the r^{N-1}-weighted divergence; the origin
/// takes the symmetric zero-flux stencil. Boundary rows are left at zero
/// (Dirichlet rows are never updated by the solvers).
pub fn discrete_p_laplacian(
    domain: &Domain,
    w: &Field,
    p: f64,
    reg: FluxRegularization,
) -> Result<Field> {
    domain.check_field(w)?;
    let n = domain.len();
    let h = domain.spacing();
    let area = domain.face_area();
    let mass = domain.cell_mass();
    let mut out = Field::zeros(n);
    for i in 0..n {
        if domain.is_boundary(i) {
            continue;
        }
        let flux_right = if i + 1 < n {
            area[i] * p_flux((w[i + 1] - w[i]) / h, p, reg)
        } else {
            0.0
        };
        let flux_left = if i > 0 {
            area[i - 1] * p_flux((w[i] - w[i - 1]) / h, p, reg)
        } else {
            // Symmetry axis of the ball: zero flux through r = 0.
            0.0
        };
        out[i] = (flux_right - flux_left) / mass[i];
    }
    Ok(out)
}

/// Jacobian d(discrete_p_laplacian)_i / d w_j as a tridiagonal matrix.
/// Boundary rows are zero.
pub(crate) fn p_laplacian_jacobian(
    domain: &Domain,
    w: &Field,
    p: f64,
    reg: FluxRegularization,
) -> Tridiag {
    let n = domain.len();
    let h = domain.spacing();
    let area = domain.face_area();
    let mass = domain.cell_mass();
    let mut jac = Tridiag::zeros(n);
    for i in 0..n {
        if domain.is_boundary(i) {
            continue;
        }
        let mut diag = 0.0;
        if i + 1 < n {
            let c = area[i] * p_flux_derivative((w[i + 1] - w[i]) / h, p, reg) / (h * mass[i]);
            jac.sup[i] = c;
            diag -= c;
        }
        if i > 0 {
            let c = area[i - 1] * p_flux_derivative((w[i] - w[i - 1]) / h, p, reg) / (h * mass[i]);
            jac.sub[i] = c;
            diag -= c;
        }
        jac.diag[i] = diag;
    }
    jac
}

/// Constant gamma_1 = 2^{2-p} in the strong monotonicity inequality for p >= 2.
pub fn gamma1(p: f64) -> f64 {
    2f64.powf(2.0 - p)
}

/// Optimal constant gamma_2 = min(1, 2(p-1)) for 1 < p < 2.
pub fn gamma2(p: f64) -> f64 {
    1f64.min(2.0 * (p - 1.0))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// LHS - RHS of the applicable vector monotonicity inequality:
///
/// * p >= 2:   <|a|^{p-2}a - |b|^{p-2}b, a-b>  -  gamma_1 |a-b|^p
/// * 1 < p < 2: <|a|^{p-2}a - |b|^{p-2}b, a-b>  -  gamma_2 |a-b|^2 / (|a|^{2-p} + |b|^{2-p})
///
/// Nonnegative by theory; rejects dimension mismatch.
pub fn monotonicity_gap(a: &[f64], b: &[f64], p: f64) -> Result<f64> {
    if a.len() != b.len() {
        return Err(DnleError::SizeMismatch {
            field: a.len(),
            nodes: b.len(),
        });
    }
    if p <= 1.0 {
        return Err(DnleError::InvalidParameters(format!(
            "monotonicity inequalities need p > 1, got {p}"
        )));
    }
    let na = norm(a);
    let nb = norm(b);
    let fa = if na == 0.0 { 0.0 } else { na.powf(p - 2.0) };
    let fb = if nb == 0.0 { 0.0 } else { nb.powf(p - 2.0) };
    let mut lhs = 0.0;
    let mut diff2 = 0.0;
    for i in 0..a.len() {
        let d = a[i] - b[i];
        lhs += (fa * a[i] - fb * b[i]) * d;
        diff2 += d * d;
    }
    let rhs = if p >= 2.0 {
        gamma1(p) * diff2.powf(0.5 * p)
    } else if diff2 == 0.0 {
        0.0
    } else {
        gamma2(p) * diff2 / (na.powf(2.0 - p) + nb.powf(2.0 - p))
    };
    Ok(lhs - rhs)
}

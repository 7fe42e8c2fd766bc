//! Equation parameters (m, p, N) and the diffusion regime they select.

use crate::error::DnleError;
use crate::Result;

/// Width of the band around kappa = 1 classified as quasilinear.
pub const QUASILINEAR_TOL: f64 = 1e-12;

/// Diffusion regime selected by kappa = m(p-1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Slow diffusion, kappa > 1: finite propagation, power-law decay t^{-mu}.
    Degenerate,
    /// kappa = 1: scalar-multiplication invariance, exponential decay e^{-lambda_1 t}.
    Quasilinear,
    /// kappa < 1: singular diffusion, out of scope for the solver.
    Fast,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Degenerate => "degenerate",
            Regime::Quasilinear => "quasilinear",
            Regime::Fast => "fast",
        }
    }
}

/// Classify the regime from the exponents alone.
///
/// Rejects m <= 0 or p <= 1.
pub fn classify_regime(m: f64, p: f64) -> Result<Regime> {
    if !m.is_finite() || m <= 0.0 {
        return Err(DnleError::InvalidParameters(format!(
            "m must be positive, got {m}"
        )));
    }
    if !p.is_finite() || p <= 1.0 {
        return Err(DnleError::InvalidParameters(format!(
            "p must exceed 1, got {p}"
        )));
    }
    let kappa = m * (p - 1.0);
    Ok(if (kappa - 1.0).abs() <= QUASILINEAR_TOL {
        Regime::Quasilinear
    } else if kappa > 1.0 {
        Regime::Degenerate
    } else {
        Regime::Fast
    })
}

/// Exponents (m, p), spatial dimension and the derived quantities that govern
/// every formula in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parameters {
    pub m: f64,
    pub p: f64,
    /// Spatial dimension N (1 for the interval, the ball dimension otherwise).
    pub dim: u32,
    /// kappa = m(p-1).
    pub kappa: f64,
    pub regime: Regime,
}

impl Parameters {
    pub fn new(m: f64, p: f64, dim: u32) -> Result<Self> {
        let regime = classify_regime(m, p)?;
        if dim == 0 {
            return Err(DnleError::InvalidParameters(
                "spatial dimension must be a positive integer".into(),
            ));
        }
        Ok(Parameters {
            m,
            p,
            dim,
            kappa: m * (p - 1.0),
            regime,
        })
    }

    /// Decay exponent mu = 1/(m(p-1) - 1), defined only in the degenerate regime.
    pub fn mu(&self) -> Option<f64> {
        match self.regime {
            Regime::Degenerate => Some(1.0 / (self.kappa - 1.0)),
            _ => None,
        }
    }

    /// mu, erroring outside the degenerate regime.
    pub fn degenerate_mu(&self) -> Result<f64> {
        self.mu().ok_or_else(|| {
            DnleError::Regime(format!(
                "mu requires the degenerate regime, but kappa = {} ({})",
                self.kappa,
                self.regime.as_str()
            ))
        })
    }

    pub fn require_regime(&self, wanted: Regime, what: &str) -> Result<()> {
        if self.regime == wanted {
            Ok(())
        } else {
            Err(DnleError::Regime(format!(
                "{what} requires the {} regime, but kappa = {} is {}",
                wanted.as_str(),
                self.kappa,
                self.regime.as_str()
            )))
        }
    }
}

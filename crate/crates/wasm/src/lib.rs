//! Browser bindings for the diffusion laboratory: evolution snapshots, the
//! stationary profile / eigenpair explorer and the self-similar profile ODE.
//!
//! Build with `wasm-pack build --target web crates/wasm` and open
//! `crates/wasm/www/index.html` from a static file server.

use dnle_core::evolution::{geometric_times, solve, SolverControls};
use dnle_core::selfsimilar::{integrate_profile, SelfSimilarCase, SelfSimilarSpec, StepControls};
use dnle_core::stationary::{compute_first_eigenpair, compute_profile_f, ProfileMethod};
use dnle_core::{Domain, Field, Parameters};
use wasm_bindgen::prelude::*;

/// Evolution snapshots of the Dirichlet problem on (0, 1): node positions
/// plus `frames` rows of nodal values at geometrically spaced times.
#[wasm_bindgen]
pub struct EvolutionFrames {
    positions: Vec<f64>,
    times: Vec<f64>,
    values: Vec<f64>,
    sup_norms: Vec<f64>,
}

#[wasm_bindgen]
impl EvolutionFrames {
    #[wasm_bindgen(getter)]
    pub fn positions(&self) -> Vec<f64> {
        self.positions.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn times(&self) -> Vec<f64> {
        self.times.clone()
    }

    /// Frame-major nodal values: frame k occupies [k*n, (k+1)*n).
    #[wasm_bindgen(getter)]
    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn sup_norms(&self) -> Vec<f64> {
        self.sup_norms.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn frame_count(&self) -> usize {
        self.times.len()
    }
}

#[allow(clippy::too_many_arguments)]
pub fn evolve_frames_impl(
    m: f64,
    p: f64,
    nodes: usize,
    t_end: f64,
    frames: usize,
    center: f64,
    width: f64,
    height: f64,
) -> Result<EvolutionFrames, String> {
    let params = Parameters::new(m, p, 1).map_err(|e| e.to_string())?;
    let domain = Domain::interval(1.0, nodes.clamp(32, 1025)).map_err(|e| e.to_string())?;
    let u0 = Field::from_fn(&domain, |x| {
        let s = (x - center) / width.max(1e-3);
        let b = 1.0 - s * s;
        if b > 0.0 {
            height * b * b
        } else {
            0.0
        }
    });
    let mut controls = SolverControls::for_params(&params);
    controls.dt_init = 1e-4;
    controls.dt_growth = 1.05;
    controls.dt_max = 0.02 * t_end.max(1e-3);
    let outputs = geometric_times(t_end * 1e-3, t_end, frames.clamp(2, 400));
    let traj = solve(&u0, t_end, &params, &domain, &controls, &outputs)
        .map_err(|e| e.to_string())?;
    let n = domain.len();
    let mut values = Vec::with_capacity(n * traj.states.len());
    let mut sup_norms = Vec::with_capacity(traj.states.len());
    for s in &traj.states {
        values.extend_from_slice(s.u.values());
        sup_norms.push(s.u.sup_norm());
    }
    Ok(EvolutionFrames {
        positions: domain.nodes().to_vec(),
        times: traj.times(),
        values,
        sup_norms,
    })
}

/// Evolve a compact bump under u_t = Delta_p u^m and return the snapshots.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn evolve_frames(
    m: f64,
    p: f64,
    nodes: usize,
    t_end: f64,
    frames: usize,
    center: f64,
    width: f64,
    height: f64,
) -> Result<EvolutionFrames, JsValue> {
    evolve_frames_impl(m, p, nodes, t_end, frames, center, width, height)
        .map_err(|e| JsValue::from_str(&e))
}

/// A sampled curve with one scalar of metadata and a label.
#[wasm_bindgen]
pub struct CurveResult {
    xs: Vec<f64>,
    ys: Vec<f64>,
    meta: f64,
    label: String,
}

#[wasm_bindgen]
impl CurveResult {
    #[wasm_bindgen(getter)]
    pub fn xs(&self) -> Vec<f64> {
        self.xs.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn ys(&self) -> Vec<f64> {
        self.ys.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn meta(&self) -> f64 {
        self.meta
    }

    #[wasm_bindgen(getter)]
    pub fn label(&self) -> String {
        self.label.clone()
    }
}

pub fn stationary_impl(m: f64, p: f64, nodes: usize) -> Result<CurveResult, String> {
    let params = Parameters::new(m, p, 1).map_err(|e| e.to_string())?;
    let domain = Domain::interval(1.0, nodes.clamp(32, 1025)).map_err(|e| e.to_string())?;
    match params.mu() {
        Some(mu) => {
            let profile = compute_profile_f(&params, &domain, ProfileMethod::MinimizeJ, 1e-7)
                .map_err(|e| e.to_string())?;
            Ok(CurveResult {
                xs: domain.nodes().to_vec(),
                ys: profile.f.values().to_vec(),
                meta: mu,
                label: format!("asymptotic profile f (mu = {mu:.4})"),
            })
        }
        None => {
            let eig = compute_first_eigenpair(p, &domain, 1e-7).map_err(|e| e.to_string())?;
            let s_profile = eig.eigenfunction.powf_clamped(1.0 / m);
            Ok(CurveResult {
                xs: domain.nodes().to_vec(),
                ys: s_profile.values().to_vec(),
                meta: eig.lambda1,
                label: format!("eigen-profile S = V^(1/m) (lambda1 = {:.4})", eig.lambda1),
            })
        }
    }
}

/// Stationary attractor on (0, 1): the asymptotic profile f when
/// m(p-1) > 1, or the normalized eigen-profile S when m(p-1) = 1.
/// `meta` carries mu or lambda_1 respectively.
#[wasm_bindgen]
pub fn stationary_profile(m: f64, p: f64, nodes: usize) -> Result<CurveResult, JsValue> {
    stationary_impl(m, p, nodes).map_err(|e| JsValue::from_str(&e))
}

pub fn selfsimilar_impl(
    m: f64,
    p: f64,
    beta_fraction: f64,
    height: f64,
) -> Result<CurveResult, String> {
    let params = Parameters::new(m, p, 1).map_err(|e| e.to_string())?;
    let constants =
        dnle_core::selfsimilar::barenblatt_constants(&params).map_err(|e| e.to_string())?;
    // beta sweeps through the taxonomy: below beta_B intermediate, at beta_B
    // Barenblatt, above it slow decay.
    let beta = (beta_fraction.clamp(0.05, 2.5)) * constants.beta;
    let spec =
        SelfSimilarSpec::from_beta(&params, beta, 0.0, height.max(0.05)).map_err(|e| e.to_string())?;
    let r_max = if beta < constants.beta * 1.001 {
        1.5 * dnle_core::selfsimilar::support_radius_bound(height.max(0.05), &params, beta)
    } else {
        12.0
    };
    let controls = StepControls {
        rel_tol: 1e-8,
        abs_tol: 1e-10,
        max_step_frac: 1.0 / 512.0,
        ..StepControls::default()
    };
    let curve = integrate_profile(&spec, &params, r_max, &controls).map_err(|e| e.to_string())?;
    let case = match curve.case {
        SelfSimilarCase::SeparateVariables => "separate variables",
        SelfSimilarCase::Barenblatt => "Barenblatt (flat landing)",
        SelfSimilarCase::Intermediate => "intermediate (transversal crossing)",
        SelfSimilarCase::SlowDecay => "slow decay (power tail)",
    };
    let label = match curve.support_radius {
        Some(a) => format!("{case}, support radius {a:.4}"),
        None => format!("{case}, positive up to r_max"),
    };
    Ok(CurveResult {
        meta: curve.support_radius.unwrap_or(f64::NAN),
        xs: curve.r,
        ys: curve.g,
        label,
    })
}

/// Self-similar profile g for alpha tied to beta on the constraint line;
/// `beta_fraction` is beta / beta_Barenblatt.
#[wasm_bindgen]
pub fn selfsimilar_profile(
    m: f64,
    p: f64,
    beta_fraction: f64,
    height: f64,
) -> Result<CurveResult, JsValue> {
    selfsimilar_impl(m, p, beta_fraction, height).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evolution_frames_have_consistent_shapes() {
        let frames = evolve_frames_impl(2.0, 2.0, 65, 1.0, 10, 0.5, 0.2, 1.0).unwrap();
        assert_eq!(frames.times.len(), 10);
        assert_eq!(frames.values.len(), 10 * frames.positions.len());
        assert_eq!(frames.sup_norms.len(), 10);
        // Mass leaves through the boundary eventually; sup decays after the
        // initial spreading phase.
        assert!(frames.sup_norms.last().unwrap() < &1.0);
    }

    #[test]
    fn stationary_switches_between_profile_and_eigenpair() {
        let degenerate = stationary_impl(2.0, 2.0, 65).unwrap();
        assert!((degenerate.meta - 1.0).abs() < 1e-12); // mu = 1
        assert!(degenerate.label.contains("asymptotic profile"));

        let quasilinear = stationary_impl(1.0, 2.0, 65).unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        assert!(((quasilinear.meta - pi2) / pi2).abs() < 1e-2);
        assert!(quasilinear.label.contains("lambda1"));
    }

    #[test]
    fn selfsimilar_cases_follow_the_beta_fraction() {
        let intermediate = selfsimilar_impl(1.0, 3.0, 0.6, 1.0).unwrap();
        assert!(intermediate.label.contains("intermediate"));
        assert!(intermediate.meta.is_finite());

        let slow = selfsimilar_impl(2.0, 2.0, 1.4, 1.0).unwrap();
        assert!(slow.label.contains("slow decay"));
        assert!(slow.meta.is_nan());
    }

    #[test]
    fn invalid_parameters_are_reported() {
        assert!(evolve_frames_impl(0.5, 2.0, 65, 1.0, 5, 0.5, 0.2, 1.0).is_err());
        assert!(stationary_impl(-1.0, 2.0, 65).is_err());
    }
}

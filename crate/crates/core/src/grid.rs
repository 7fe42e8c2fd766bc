//! Spatial domains: 1D interval and radially symmetric ball, their uniform
//! discretizations, quadrature weights and the distance to the boundary.
//!
//! The ball is represented by its radial coordinate r in [0, R]; all volume
//! integrals carry the surface measure of the (N-1)-sphere so that masses and
//! energies are honest N-dimensional quantities.

use crate::error::DnleError;
use crate::Result;

pub const MIN_RESOLUTION: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainKind {
    Interval { length: f64 },
    Ball { radius: f64, dim: u32 },
}

/// A uniform grid over an interval or the radial coordinate of a ball.
///
/// Immutable after construction; freely shareable across threads.
#[derive(Debug, Clone)]
pub struct Domain {
    pub kind: DomainKind,
    /// Node positions, strictly increasing, uniform spacing.
    nodes: Vec<f64>,
    /// Grid spacing h.
    spacing: f64,
    /// True at Dirichlet nodes (both interval endpoints; r = R for the ball).
    boundary_mask: Vec<bool>,
    /// Face "areas" A_{i+1/2} between node i and i+1 (length n-1).
    face_area: Vec<f64>,
    /// Quadrature weight (cell mass) per node.
    cell_mass: Vec<f64>,
    /// Distance to the boundary at each node.
    node_dist: Vec<f64>,
}

/// Surface area of the unit (dim-1)-sphere: 2 pi^{dim/2} / Gamma(dim/2).
fn unit_sphere_area(dim: u32) -> f64 {
    // Gamma at integers and half-integers, exact recursion.
    let half_gamma = |two_k: u32| -> f64 {
        // Gamma(two_k / 2)
        if two_k.is_multiple_of(2) {
            let mut g = 1.0;
            for i in 1..(two_k / 2) {
                g *= i as f64;
            }
            g
        } else {
            let mut g = std::f64::consts::PI.sqrt();
            let mut x = 0.5;
            for _ in 0..(two_k / 2) {
                g *= x;
                x += 1.0;
            }
            g
        }
    };
    2.0 * std::f64::consts::PI.powf(dim as f64 / 2.0) / half_gamma(dim)
}

impl Domain {
    /// Uniform grid on [0, L] with Dirichlet conditions at both endpoints.
    pub fn interval(length: f64, resolution: usize) -> Result<Self> {
        Self::build(DomainKind::Interval { length }, resolution)
    }

    /// Uniform radial grid on [0, R]: symmetry at r = 0, Dirichlet at r = R.
    pub fn ball(radius: f64, dim: u32, resolution: usize) -> Result<Self> {
        Self::build(DomainKind::Ball { radius, dim }, resolution)
    }

    pub fn build(kind: DomainKind, resolution: usize) -> Result<Self> {
        if resolution < MIN_RESOLUTION {
            return Err(DnleError::Domain(format!(
                "resolution {resolution} below minimum {MIN_RESOLUTION} for finite differences"
            )));
        }
        let extent = match kind {
            DomainKind::Interval { length } => length,
            DomainKind::Ball { radius, .. } => radius,
        };
        if !extent.is_finite() || extent <= 0.0 {
            return Err(DnleError::Domain(format!(
                "domain size must be positive, got {extent}"
            )));
        }
        if let DomainKind::Ball { dim, .. } = kind {
            if dim == 0 {
                return Err(DnleError::Domain("ball dimension must be positive".into()));
            }
        }
        let n = resolution;
        let h = extent / (n - 1) as f64;
        let nodes: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();

        let mut boundary_mask = vec![false; n];
        boundary_mask[n - 1] = true;
        if matches!(kind, DomainKind::Interval { .. }) {
            boundary_mask[0] = true;
        }

        let (face_area, cell_mass) = match kind {
            DomainKind::Interval { .. } => {
                let faces = vec![1.0; n - 1];
                let mut mass = vec![h; n];
                mass[0] = 0.5 * h;
                mass[n - 1] = 0.5 * h;
                (faces, mass)
            }
            DomainKind::Ball { radius, dim } => {
                let sigma = unit_sphere_area(dim);
                let nd = dim as f64;
                let faces: Vec<f64> = (0..n - 1)
                    .map(|i| sigma * (nodes[i] + 0.5 * h).powf(nd - 1.0))
                    .collect();
                let mass: Vec<f64> = (0..n)
                    .map(|i| {
                        let lo = (nodes[i] - 0.5 * h).max(0.0);
                        let hi = (nodes[i] + 0.5 * h).min(radius);
                        sigma * (hi.powf(nd) - lo.powf(nd)) / nd
                    })
                    .collect();
                (faces, mass)
            }
        };

        let node_dist = nodes
            .iter()
            .map(|&x| match kind {
                DomainKind::Interval { length } => x.min(length - x),
                DomainKind::Ball { radius, .. } => radius - x,
            })
            .collect();

        Ok(Domain {
            kind,
            nodes,
            spacing: h,
            boundary_mask,
            face_area,
            cell_mass,
            node_dist,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary_mask
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        self.boundary_mask[i]
    }

    pub fn interior_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&i| !self.boundary_mask[i])
    }

    /// Face areas A_{i+1/2}, length n-1.
    pub fn face_area(&self) -> &[f64] {
        &self.face_area
    }

    /// Quadrature weights (finite-volume cell masses), length n.
    pub fn cell_mass(&self) -> &[f64] {
        &self.cell_mass
    }

    /// Distance to the boundary at a position inside the closed domain.
    pub fn distance_to_boundary(&self, x: f64) -> Result<f64> {
        let slack = 1e-12 * self.extent();
        match self.kind {
            DomainKind::Interval { length } => {
                if x < -slack || x > length + slack {
                    return Err(DnleError::Domain(format!(
                        "position {x} outside the interval [0, {length}]"
                    )));
                }
                Ok(x.clamp(0.0, length).min(length - x.clamp(0.0, length)))
            }
            DomainKind::Ball { radius, .. } => {
                if x < -slack || x > radius + slack {
                    return Err(DnleError::Domain(format!(
                        "radius {x} outside the ball [0, {radius}]"
                    )));
                }
                Ok(radius - x.clamp(0.0, radius))
            }
        }
    }

    /// Distance to the boundary at each node.
    pub fn node_distances(&self) -> &[f64] {
        &self.node_dist
    }

    /// Regularity radius of the distance function: L/2 for the interval, R for
    /// the ball (closed form for these geometries).
    pub fn xi0(&self) -> f64 {
        match self.kind {
            DomainKind::Interval { length } => 0.5 * length,
            DomainKind::Ball { radius, .. } => radius,
        }
    }

    pub fn extent(&self) -> f64 {
        match self.kind {
            DomainKind::Interval { length } => length,
            DomainKind::Ball { radius, .. } => radius,
        }
    }

    /// Quadrature of a nodal field over the domain (volume integral).
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values
            .iter()
            .zip(&self.cell_mass)
            .map(|(v, m)| v * m)
            .sum()
    }

    pub fn check_field(&self, field: &Field) -> Result<()> {
        if field.len() != self.len() {
            return Err(DnleError::SizeMismatch {
                field: field.len(),
                nodes: self.len(),
            });
        }
        Ok(())
    }
}

/// Nodal values of a scalar function on a [`Domain`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    values: Vec<f64>,
}

impl Field {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(DnleError::Domain(format!(
                "field contains a non-finite value {bad}"
            )));
        }
        Ok(Field { values })
    }

    pub fn zeros(n: usize) -> Self {
        Field {
            values: vec![0.0; n],
        }
    }

    /// Evaluate a function at every node.
    pub fn from_fn(domain: &Domain, f: impl Fn(f64) -> f64) -> Self {
        Field {
            values: domain.nodes().iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |a, &v| a.min(v))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |a, &v| a.max(v))
    }

    /// Clamp tiny negative round-off to zero (degenerate powers reject it).
    pub fn clamp_nonnegative(&mut self) {
        for v in &mut self.values {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
    }

    /// Pointwise power with negative round-off clamped to zero first.
    pub fn powf_clamped(&self, e: f64) -> Field {
        Field {
            values: self.values.iter().map(|&v| v.max(0.0).powf(e)).collect(),
        }
    }
}

impl std::ops::Index<usize> for Field {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

impl std::ops::IndexMut<usize> for Field {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.values[i]
    }
}

//! Domains, meshes, nodal functions and discrete L^p quadrature.
//!
//! A domain is a finite union of disjoint open intervals. Meshes are uniform
//! grids of nodes strictly inside each interval; the homogeneous exterior
//! condition (u = 0 outside the domain) is enforced by representation: there
//! simply are no exterior degrees of freedom.

use std::ops::Range;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{abs_pow, pairwise_sum};

/// Union of disjoint open intervals (a_k, b_k), sorted left to right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain1D {
    intervals: Vec<(f64, f64)>,
}

impl Domain1D {
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::InvalidDomain("no intervals given".into()));
        }
        for &(a, b) in &intervals {
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::InvalidDomain("interval endpoints must be finite".into()));
            }
            if b - a <= 0.0 {
                return Err(Error::InvalidDomain(format!(
                    "interval ({a}, {b}) has nonpositive length"
                )));
            }
        }
        for w in intervals.windows(2) {
            if w[1].0 <= w[0].1 {
                return Err(Error::InvalidDomain(format!(
                    "intervals ({}, {}) and ({}, {}) are not disjoint and sorted",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )));
            }
        }
        Ok(Self { intervals })
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn component_count(&self) -> usize {
        self.intervals.len()
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    /// True when the domain is symmetric under x -> -x.
    pub fn is_mirror_symmetric(&self) -> bool {
        let n = self.intervals.len();
        let tol = 1e-12 * self.measure().max(1.0);
        (0..n).all(|k| {
            let (a, b) = self.intervals[k];
            let (a2, b2) = self.intervals[n - 1 - k];
            (a + b2).abs() <= tol && (b + a2).abs() <= tol
        })
    }
}

/// Uniform grid on a [`Domain1D`]. Nodes exclude the interval endpoints, so the
/// Dirichlet exterior condition is structural rather than penalized.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    domain: Domain1D,
    h: f64,
    nodes: Vec<f64>,
    node_component: Vec<usize>,
    components: Vec<Range<usize>>,
}

/// Builds a uniform grid with spacing h = 1/n_per_unit. Within each interval
/// the nodes are a + h, a + 2h, ... strictly below b.
pub fn build_mesh(domain: &Domain1D, n_per_unit: u32) -> Result<Mesh> {
    if n_per_unit == 0 {
        return Err(Error::InvalidParameter("n_per_unit must be positive".into()));
    }
    let h = 1.0 / f64::from(n_per_unit);
    let mut nodes = Vec::new();
    let mut node_component = Vec::new();
    let mut components = Vec::new();
    for (k, &(a, b)) in domain.intervals().iter().enumerate() {
        if b - a < 2.0 * h * (1.0 - 1e-12) {
            return Err(Error::IntervalUnresolvable { a, b, h });
        }
        // Largest j with a + j h strictly below b; the 0.01 slop keeps the
        // trailing boundary segment from degenerating when (b-a)/h is close
        // to an integer.
        let j_max = ((b - a) / h - 0.01).floor() as usize;
        let start = nodes.len();
        for j in 1..=j_max {
            nodes.push(a + j as f64 * h);
            node_component.push(k);
        }
        components.push(start..nodes.len());
    }
    Ok(Mesh {
        domain: domain.clone(),
        h,
        nodes,
        node_component,
        components,
    })
}

impl Mesh {
    pub fn domain(&self) -> &Domain1D {
        &self.domain
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node_component(&self) -> &[usize] {
        &self.node_component
    }

    /// Node index range of each connected component.
    pub fn components(&self) -> &[Range<usize>] {
        &self.components
    }

    pub fn component_interval(&self, k: usize) -> (f64, f64) {
        self.domain.intervals()[k]
    }

    /// True when the node lattice itself is symmetric under x -> -x.
    pub fn is_mirror_symmetric(&self) -> bool {
        if !self.domain.is_mirror_symmetric() {
            return false;
        }
        let n = self.nodes.len();
        let tol = 1e-9 * self.h;
        (0..n).all(|i| (self.nodes[i] + self.nodes[n - 1 - i]).abs() <= tol)
    }
}

/// Coefficients at the mesh nodes; stands in for a function vanishing on the
/// complement of the domain.
#[derive(Debug, Clone)]
pub struct NodalFunction {
    mesh: Arc<Mesh>,
    values: Vec<f64>,
}

impl NodalFunction {
    pub fn zeros(mesh: Arc<Mesh>) -> Self {
        let n = mesh.node_count();
        Self {
            mesh,
            values: vec![0.0; n],
        }
    }

    pub fn from_values(mesh: Arc<Mesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.node_count() {
            return Err(Error::InvalidParameter(format!(
                "nodal value count {} does not match mesh node count {}",
                values.len(),
                mesh.node_count()
            )));
        }
        Ok(Self { mesh, values })
    }

    pub fn from_fn(mesh: Arc<Mesh>, f: impl Fn(f64) -> f64) -> Self {
        let values = mesh.nodes().iter().map(|&x| f(x)).collect();
        Self { mesh, values }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            mesh: Arc::clone(&self.mesh),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// Bounded potential sampled at the mesh nodes.
#[derive(Debug, Clone)]
pub struct Potential {
    values: Vec<f64>,
    ess_sup: f64,
}

impl Potential {
    /// Requires a nonempty positivity set: at least one node with V > 0.
    pub fn new(mesh: &Mesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.node_count() {
            return Err(Error::InvalidParameter(format!(
                "potential sample count {} does not match mesh node count {}",
                values.len(),
                mesh.node_count()
            )));
        }
        if !values.iter().any(|&v| v > 0.0) {
            return Err(Error::InvalidParameter(
                "potential has an empty positivity set on this mesh".into(),
            ));
        }
        let ess_sup = values.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
        Ok(Self { values, ess_sup })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn ess_sup(&self) -> f64 {
        self.ess_sup
    }

    /// True when the samples are even under node reversal (V(x) = V(-x) on a
    /// mirror-symmetric mesh).
    pub fn is_even(&self) -> bool {
        let n = self.values.len();
        (0..n).all(|i| (self.values[i] - self.values[n - 1 - i]).abs() <= 1e-12 * self.ess_sup.max(1.0))
    }
}

/// Named potential catalog; keeps runs reproducible without an expression
/// interpreter. `Nodal` pins samples to one mesh and cannot be re-sampled in
/// mesh-coupled sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    One,
    Constant { value: f64 },
    SignStep { x0: f64 },
    GaussianBump { center: f64, width: f64 },
    Nodal { values: Vec<f64> },
}

impl PotentialSpec {
    pub fn sample(&self, mesh: &Mesh) -> Result<Potential> {
        let values = match self {
            PotentialSpec::One => vec![1.0; mesh.node_count()],
            PotentialSpec::Constant { value } => vec![*value; mesh.node_count()],
            PotentialSpec::SignStep { x0 } => mesh
                .nodes()
                .iter()
                .map(|&x| if x >= *x0 { 1.0 } else { -1.0 })
                .collect(),
            PotentialSpec::GaussianBump { center, width } => {
                if *width <= 0.0 {
                    return Err(Error::InvalidParameter("gaussian_bump width must be positive".into()));
                }
                mesh.nodes()
                    .iter()
                    .map(|&x| (-((x - center) / width).powi(2) / 2.0).exp())
                    .collect()
            }
            PotentialSpec::Nodal { values } => values.clone(),
        };
        Potential::new(mesh, values)
    }

    /// Whether the spec can be re-sampled on a different mesh.
    pub fn is_resamplable(&self) -> bool {
        !matches!(self, PotentialSpec::Nodal { .. })
    }
}

/// Mass-lumped ||u||_alpha^alpha = h * sum |u_i|^alpha.
pub fn lp_norm_p(u: &NodalFunction, exponent: f64) -> f64 {
    assert!(exponent > 1.0, "exponent must exceed 1");
    let terms: Vec<f64> = u.values().iter().map(|&v| abs_pow(v, exponent)).collect();
    u.mesh().h() * pairwise_sum(&terms)
}

/// Weighted mass h * sum V_i |u_i|^alpha; may be negative when V changes sign.
pub fn weighted_lp_norm_p(u: &NodalFunction, potential: &Potential, exponent: f64) -> f64 {
    assert!(exponent > 1.0, "exponent must exceed 1");
    assert_eq!(
        u.values().len(),
        potential.values().len(),
        "potential sampled on a different mesh"
    );
    let terms: Vec<f64> = u
        .values()
        .iter()
        .zip(potential.values())
        .map(|(&v, &w)| w * abs_pow(v, exponent))
        .collect();
    u.mesh().h() * pairwise_sum(&terms)
}

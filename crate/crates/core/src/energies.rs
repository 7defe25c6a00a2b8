//! Problem functionals with analytic gradients and the weak-form
//! eigen-residual.
//!
//! Symbols, with alpha ranging over {p, q}:
//!   I(u)      = \[u\]_{s,p}^p + ||u||_p^p
//!   J(u)      = integral of V |u|^p
//!   E(u)      = (1/p)(\[u\]_{s,p}^p + ||u||_p^p) + (mu/q)(\[u\]_{s,q}^q + ||u||_q^q)
//!   L(u)      = E(u) - (lambda/p) J(u)
//! Critical points of L are exactly the discrete eigenpairs.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gagliardo::{assemble, GagliardoOperator};
use crate::mesh::{lp_norm_p, weighted_lp_norm_p, Mesh, NodalFunction, Potential};
use crate::numeric::{euclid_norm, signed_pow};

/// Scalar problem parameters. The potential samples live in [`EnergyBundle`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub mu: f64,
    pub lambda: f64,
}

impl ProblemParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.s && self.s < 1.0) {
            return Err(Error::InvalidParameter(format!("s = {} outside (0, 1)", self.s)));
        }
        if !(1.0 < self.q && self.q < self.p) {
            return Err(Error::InvalidParameter(format!(
                "exponents must satisfy 1 < q < p (got q = {}, p = {})",
                self.q, self.p
            )));
        }
        if self.mu < 0.0 {
            return Err(Error::InvalidParameter(format!("mu = {} must be >= 0", self.mu)));
        }
        Ok(())
    }

    /// In one dimension the compact-embedding regime is p < 1/s. Recorded in
    /// reports; supercritical parameters are not forbidden.
    pub fn subcritical(&self) -> bool {
        self.p < 1.0 / self.s
    }
}

/// Assembled operators and potential for one parameter set. The q-operator
/// exists only when mu > 0, so mu = 0 runs are bit-identical to a build that
/// never constructs it.
#[derive(Debug, Clone)]
pub struct EnergyBundle {
    pub params: ProblemParams,
    op_p: Arc<GagliardoOperator>,
    op_q: Option<Arc<GagliardoOperator>>,
    potential: Potential,
    mesh: Arc<Mesh>,
}

impl EnergyBundle {
    pub fn new(mesh: &Arc<Mesh>, params: ProblemParams, potential: Potential) -> Result<Self> {
        params.validate()?;
        if potential.values().len() != mesh.node_count() {
            return Err(Error::InvalidParameter(
                "potential sampled on a different mesh".into(),
            ));
        }
        let op_p = Arc::new(assemble(mesh, params.s, params.p)?);
        let op_q = if params.mu > 0.0 {
            Some(Arc::new(assemble(mesh, params.s, params.q)?))
        } else {
            None
        };
        Ok(Self {
            params,
            op_p,
            op_q,
            potential,
            mesh: Arc::clone(mesh),
        })
    }

    /// Cheap view of the mu = 0 problem sharing the assembled p-operator.
    pub fn mu0_view(&self) -> Self {
        Self {
            params: ProblemParams {
                mu: 0.0,
                ..self.params
            },
            op_p: Arc::clone(&self.op_p),
            op_q: None,
            potential: self.potential.clone(),
            mesh: Arc::clone(&self.mesh),
        }
    }

    /// Same operators under a different (mu, lambda); reassembles the
    /// q-operator only when it is missing.
    pub fn with_mu_lambda(&self, mu: f64, lambda: f64) -> Result<Self> {
        let params = ProblemParams {
            mu,
            lambda,
            ..self.params
        };
        params.validate()?;
        let op_q = if mu > 0.0 {
            match &self.op_q {
                Some(op) => Some(Arc::clone(op)),
                None => Some(Arc::new(assemble(&self.mesh, params.s, params.q)?)),
            }
        } else {
            None
        };
        Ok(Self {
            params,
            op_p: Arc::clone(&self.op_p),
            op_q,
            potential: self.potential.clone(),
            mesh: Arc::clone(&self.mesh),
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn op_p(&self) -> &GagliardoOperator {
        &self.op_p
    }

    pub fn op_q(&self) -> Option<&GagliardoOperator> {
        self.op_q.as_deref()
    }
}

/// I(u) = \[u\]_{s,p}^p + ||u||_p^p. Ignores mu.
pub fn functional_i(b: &EnergyBundle, u: &NodalFunction) -> f64 {
    b.op_p.seminorm_pow(u) + lp_norm_p(u, b.params.p)
}

/// Gradient of [`functional_i`].
pub fn functional_i_gradient(b: &EnergyBundle, u: &NodalFunction) -> NodalFunction {
    let p = b.params.p;
    let h = b.mesh.h();
    let mut g = b.op_p.seminorm_gradient(u);
    for (gi, &ui) in g.values_mut().iter_mut().zip(u.values()) {
        *gi += h * p * signed_pow(ui, p);
    }
    g
}

/// J(u) = integral of V |u|^p; sign-indefinite when V changes sign.
pub fn functional_j(b: &EnergyBundle, u: &NodalFunction) -> f64 {
    weighted_lp_norm_p(u, &b.potential, b.params.p)
}

/// Gradient of [`functional_j`].
pub fn functional_j_gradient(b: &EnergyBundle, u: &NodalFunction) -> NodalFunction {
    let p = b.params.p;
    let h = b.mesh.h();
    let mut g = NodalFunction::zeros(Arc::clone(&b.mesh));
    for ((gi, &ui), &vi) in g
        .values_mut()
        .iter_mut()
        .zip(u.values())
        .zip(b.potential.values())
    {
        *gi = h * p * vi * signed_pow(ui, p);
    }
    g
}

/// Rayleigh quotient I(u)/J(u); requires J(u) > 0.
pub fn rayleigh_quotient(b: &EnergyBundle, u: &NodalFunction) -> Result<f64> {
    let j = functional_j(b, u);
    if j <= 0.0 {
        return Err(Error::DenominatorConstraint(j));
    }
    Ok(functional_i(b, u) / j)
}

/// E(u) = (1/p)(\[u\]_{s,p}^p + ||u||_p^p) + (mu/q)(\[u\]_{s,q}^q + ||u||_q^q).
pub fn pq_energy(b: &EnergyBundle, u: &NodalFunction) -> f64 {
    let p = b.params.p;
    let mut e = functional_i(b, u) / p;
    if let Some(op_q) = &b.op_q {
        let q = b.params.q;
        e += b.params.mu / q * (op_q.seminorm_pow(u) + lp_norm_p(u, q));
    }
    e
}

/// Gradient of [`pq_energy`].
pub fn pq_energy_gradient(b: &EnergyBundle, u: &NodalFunction) -> NodalFunction {
    let p = b.params.p;
    let h = b.mesh.h();
    let mut g = b.op_p.seminorm_gradient(u);
    for (gi, &ui) in g.values_mut().iter_mut().zip(u.values()) {
        *gi = *gi / p + h * signed_pow(ui, p);
    }
    if let Some(op_q) = &b.op_q {
        let q = b.params.q;
        let mu = b.params.mu;
        let gq = op_q.seminorm_gradient(u);
        for ((gi, &gqi), &ui) in g.values_mut().iter_mut().zip(gq.values()).zip(u.values()) {
            *gi += mu * (gqi / q + h * signed_pow(ui, q));
        }
    }
    g
}

/// Free energy L(u) = E(u) - (lambda/p) J(u) whose critical points solve the
/// eigen-equation.
pub fn lagrangian_j_functional(b: &EnergyBundle, u: &NodalFunction, lambda: f64) -> f64 {
    pq_energy(b, u) - lambda / b.params.p * functional_j(b, u)
}

/// Gradient of [`lagrangian_j_functional`]; this is the residual vector of
/// the discrete weak form.
pub fn lagrangian_gradient(b: &EnergyBundle, u: &NodalFunction, lambda: f64) -> NodalFunction {
    let mut g = pq_energy_gradient(b, u);
    let h = b.mesh.h();
    for ((gi, &ui), &vi) in g
        .values_mut()
        .iter_mut()
        .zip(u.values())
        .zip(b.potential.values())
    {
        *gi -= lambda * h * vi * signed_pow(ui, b.params.p);
    }
    g
}

/// Relative stationarity measure: ||grad L(u)|| / ||grad E(u)||. Zero exactly
/// at discrete eigenpairs; invariant under u -> c u at mu = 0.
pub fn eigen_residual(b: &EnergyBundle, u: &NodalFunction, lambda: f64) -> Result<f64> {
    if u.is_zero() {
        return Err(Error::ZeroFunction);
    }
    let r = lagrangian_gradient(b, u, lambda);
    let scale = euclid_norm(pq_energy_gradient(b, u).values());
    Ok(euclid_norm(r.values()) / scale.max(f64::MIN_POSITIVE))
}

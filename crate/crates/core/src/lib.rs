//! Spectral structure of the Dirichlet fractional p&q-Laplacian eigenvalue
//! problem on one-dimensional, possibly disconnected domains.
//!
//! The crate is organized along the pipeline:
//!
//! - [`mesh`]: domains, uniform grids, nodal functions, potentials and
//!   discrete L^p quadrature;
//! - [`gagliardo`]: the discrete Gagliardo energy (pairwise kernel weights,
//!   exterior tails, normalizing constant) with gradient and weak action;
//! - [`energies`]: the composed problem functionals and the weak-form
//!   eigen-residual;
//! - [`eigsolve`]: first/second eigenvalues of the single-exponent problem
//!   and the dense linear oracle at p = 2;
//! - [`nehari`]: the mu > 0 machinery (fibering map, level minimization,
//!   nonexistence certificates, sign-changing probe);
//! - [`continuation`]: parameter sweeps in mu and s, the local (s = 1)
//!   reference problem and the seminorm-limit check.

pub mod continuation;
mod descent;
pub mod eigsolve;
pub mod energies;
pub mod error;
pub mod gagliardo;
pub mod mesh;
pub mod nehari;
pub mod numeric;

pub use continuation::{
    bbm_check, bump_profile, local_gradient_energy, local_reference_lambda1, mu_quotient_decay,
    mu_sweep, s_stability_sweep, CouplingRule, SweepPoint, SweepResult,
};
pub use eigsolve::{
    check_ground_state_properties, isolation_probe, lambda1, lambda2_minimax, linear_oracle,
    EigenReport, GroundStateReport, SignProfile, TraceRow,
};
pub use energies::{
    eigen_residual, functional_i, functional_j, lagrangian_j_functional, pq_energy,
    rayleigh_quotient, EnergyBundle, ProblemParams,
};
pub use error::{Error, Result};
pub use gagliardo::{assemble, bbm_constant, exterior_tail_integral, GagliardoOperator};
pub use mesh::{
    build_mesh, lp_norm_p, weighted_lp_norm_p, Domain1D, Mesh, NodalFunction, Potential,
    PotentialSpec,
};
pub use nehari::{
    fibering, nonexistence_certificate, nonexistence_certificate_with_probes, sign_changing_probe,
    solve_m_lambda, CertificateReport, FiberingData, NehariReport, SignProbeReport,
};

//! Shared fixtures for the criterion benches.

use std::sync::Arc;

pub use fracpq_core::*;

pub fn unit_bundle(n_per_unit: u32, s: f64, p: f64, mu: f64) -> EnergyBundle {
    let domain = Domain1D::new(vec![(-1.0, 1.0)]).unwrap();
    let mesh = Arc::new(build_mesh(&domain, n_per_unit).unwrap());
    let potential = PotentialSpec::One.sample(&mesh).unwrap();
    let params = ProblemParams {
        s,
        p,
        q: 0.5 * (p + 1.0),
        mu,
        lambda: 0.0,
    };
    EnergyBundle::new(&mesh, params, potential).unwrap()
}

pub fn test_profile(bundle: &EnergyBundle) -> NodalFunction {
    NodalFunction::from_fn(Arc::clone(bundle.mesh()), |x| {
        (1.0 - x * x) * (0.3 + x).sin()
    })
}

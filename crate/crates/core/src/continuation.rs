//! Parameter sweeps: the mu -> 0+ quotient decay and level sweep, the
//! s -> 1- stability study with its local (s = 1) reference problem, and the
//! seminorm-limit check on coupled meshes.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::descent::{minimize_quotient, LocalNumerator, Start, WeightedMass};
use crate::eigsolve::{lambda1, linear_oracle, EigenReport, SignProfile};
use crate::energies::{functional_i, functional_j, EnergyBundle, ProblemParams};
use crate::error::{Error, Result};
use crate::mesh::{build_mesh, lp_norm_p, Domain1D, Mesh, NodalFunction, Potential, PotentialSpec};
use crate::nehari::solve_m_lambda;
use crate::numeric::{abs_pow, loglog_slope, pairwise_dot, pairwise_sum};

/// Mesh-fractional coupling h(s) = scale * (1 - s)^2. The near-diagonal
/// kernel weight concentrates as s -> 1, so any fixed mesh fails there; the
/// quadratic rule shrinks h fast enough for the seminorm limit. The default
/// scale is calibrated so the seminorm-limit error decreases monotonically
/// along the standard grid for both exponents 2 and 3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingRule {
    pub scale: f64,
}

impl Default for CouplingRule {
    fn default() -> Self {
        Self { scale: 3.0 }
    }
}

impl CouplingRule {
    pub fn h(&self, s: f64) -> f64 {
        self.scale * (1.0 - s) * (1.0 - s)
    }

    /// Resolution capped so the dense weight tables stay allocatable even
    /// for s very close to 1.
    pub fn n_per_unit(&self, s: f64) -> u32 {
        (1.0 / self.h(s)).ceil().clamp(4.0, 2048.0) as u32
    }
}

/// One grid point of a sweep. Field use varies by sweep; `aux`/`aux2` carry
/// the sweep-specific extras named in the result.
#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub parameter: f64,
    pub value: f64,
    pub seminorm_p: Option<f64>,
    pub lp_norm_p: Option<f64>,
    pub weighted_norm_p: Option<f64>,
    pub residual: Option<f64>,
    pub n_nodes: usize,
    pub h: f64,
    pub converged: bool,
    pub aux: Option<f64>,
    pub aux2: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub parameter_name: String,
    pub value_name: String,
    pub aux_name: Option<String>,
    pub aux2_name: Option<String>,
    pub points: Vec<SweepPoint>,
    pub fitted_exponent: Option<f64>,
    pub reference_value: Option<f64>,
}

fn require_strictly_monotone(grid: &[f64], name: &str) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::InvalidParameter(format!("{name} needs at least two points")));
    }
    let inc = grid.windows(2).all(|w| w[1] > w[0]);
    let dec = grid.windows(2).all(|w| w[1] < w[0]);
    if !(inc || dec) {
        return Err(Error::InvalidParameter(format!("{name} must be strictly monotone")));
    }
    Ok(())
}

/// Evaluates the mu-quotient along the ray t * u_1 of the mu = 0 ground
/// state. The gap above lambda_1 decays like t^{-(p-q)}; the fitted exponent
/// comes from a log-log least-squares fit.
pub fn mu_quotient_decay(
    bundle: &EnergyBundle,
    t_values: &[f64],
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<SweepResult> {
    let op_q = bundle
        .op_q()
        .ok_or_else(|| Error::InvalidParameter("mu_quotient_decay requires mu > 0".into()))?;
    require_strictly_monotone(t_values, "t_values")?;
    if t_values[0] < 1.0 || t_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("t_values must be increasing and >= 1".into()));
    }

    let ground = lambda1(&bundle.mu0_view(), tol, max_iter, seed)?;
    let u1 = &ground.eigenfunction;
    let lambda_ref = ground.lambda_est;
    let mu = bundle.params.mu;
    let q = bundle.params.q;

    let mut gaps = Vec::with_capacity(t_values.len());
    let mut points = Vec::with_capacity(t_values.len());
    for &t in t_values {
        let ut = u1.scaled(t);
        let numerator =
            functional_i(bundle, &ut) + mu / q * (op_q.seminorm_pow(&ut) + lp_norm_p(&ut, q));
        let quotient = numerator / functional_j(bundle, &ut);
        let gap = quotient - lambda_ref;
        gaps.push(gap);
        points.push(SweepPoint {
            parameter: t,
            value: quotient,
            seminorm_p: Some(bundle.op_p().seminorm_pow(&ut)),
            lp_norm_p: Some(lp_norm_p(&ut, bundle.params.p)),
            weighted_norm_p: Some(functional_j(bundle, &ut)),
            residual: None,
            n_nodes: bundle.mesh().node_count(),
            h: bundle.mesh().h(),
            converged: true,
            aux: Some(gap),
            aux2: None,
        });
    }
    let fitted = loglog_slope(t_values, &gaps);

    Ok(SweepResult {
        parameter_name: "t".into(),
        value_name: "mu_quotient".into(),
        aux_name: Some("gap_above_lambda1".into()),
        aux2_name: None,
        points,
        fitted_exponent: Some(fitted),
        reference_value: Some(lambda_ref),
    })
}

/// Runs the Nehari level solve on a decreasing mu grid at fixed lambda.
/// Per-point failures are flagged and the sweep continues.
pub fn mu_sweep(
    base: &EnergyBundle,
    lambda: f64,
    mu_grid: &[f64],
    tol: f64,
    seed: u64,
) -> Result<SweepResult> {
    require_strictly_monotone(mu_grid, "mu_grid")?;
    if mu_grid.windows(2).any(|w| w[1] >= w[0]) || mu_grid.iter().any(|&m| m <= 0.0) {
        return Err(Error::InvalidParameter("mu_grid must be positive and decreasing".into()));
    }
    // assemble the q-operator once; every grid point shares it
    let template = base.with_mu_lambda(mu_grid[0], lambda)?;

    let points: Vec<SweepPoint> = mu_grid
        .par_iter()
        .map(|&mu| {
            let b = template.with_mu_lambda(mu, lambda)?;
            let row = match solve_m_lambda(&b, lambda, tol, seed) {
                Ok(rep) => {
                    let u = &rep.minimizer;
                    SweepPoint {
                        parameter: mu,
                        value: rep.m_lambda,
                        seminorm_p: Some(b.op_p().seminorm_pow(u)),
                        lp_norm_p: Some(lp_norm_p(u, b.params.p)),
                        weighted_norm_p: Some(functional_j(&b, u)),
                        residual: Some(rep.eigen_residual),
                        n_nodes: b.mesh().node_count(),
                        h: b.mesh().h(),
                        converged: rep.eigen_residual <= tol,
                        aux: Some(rep.nehari_residual),
                        aux2: None,
                    }
                }
                Err(_) => SweepPoint {
                    parameter: mu,
                    value: f64::NAN,
                    seminorm_p: None,
                    lp_norm_p: None,
                    weighted_norm_p: None,
                    residual: None,
                    n_nodes: b.mesh().node_count(),
                    h: b.mesh().h(),
                    converged: false,
                    aux: None,
                    aux2: None,
                },
            };
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SweepResult {
        parameter_name: "mu".into(),
        value_name: "m_lambda".into(),
        aux_name: Some("nehari_residual".into()),
        aux2_name: None,
        points,
        fitted_exponent: None,
        reference_value: None,
    })
}

/// Discrete local gradient energy ||u'||_p^p with first differences over the
/// segment structure and zero exterior neighbors.
pub fn local_gradient_energy(mesh: &Mesh, u: &NodalFunction, p: f64) -> f64 {
    let xs = mesh.nodes();
    let h = mesh.h();
    let v = u.values();
    let mut terms = Vec::new();
    for (k, range) in mesh.components().iter().enumerate() {
        let (a, b) = mesh.component_interval(k);
        let lo = range.start;
        let m = range.len();
        terms.push({
            let w = xs[lo] - a;
            w * abs_pow(v[lo] / w, p)
        });
        for i in 0..m - 1 {
            terms.push(h * abs_pow((v[lo + i + 1] - v[lo + i]) / h, p));
        }
        terms.push({
            let w = b - xs[lo + m - 1];
            w * abs_pow(v[lo + m - 1] / w, p)
        });
    }
    pairwise_sum(&terms)
}

/// First eigenvalue of the local (s = 1) reference problem
/// -(|u'|^{p-2} u')' + |u|^{p-2} u = lambda V |u|^{p-2} u, by the same
/// projected-descent contract as the fractional solver.
pub fn local_reference_lambda1(
    mesh: &Arc<Mesh>,
    p: f64,
    potential: &Potential,
    tol: f64,
) -> Result<EigenReport> {
    let num = LocalNumerator { mesh, p };
    let den = WeightedMass {
        v: potential.values(),
        h: mesh.h(),
        p,
    };
    let raw = minimize_quotient(&num, &den, mesh, Start::Ground { seed: 0 }, tol, 400_000)?;

    let mut values = raw.u;
    let mut idx = 0;
    let mut best = 0.0;
    for (i, &v) in values.iter().enumerate() {
        if v.abs() > best {
            best = v.abs();
            idx = i;
        }
    }
    if values[idx] < 0.0 {
        for v in values.iter_mut() {
            *v = -*v;
        }
    }
    let eigenfunction = NodalFunction::from_values(Arc::clone(mesh), values)?;
    let max = eigenfunction.values().iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
    let sign_tol = 1e-12 * max;
    let pos = eigenfunction.values().iter().any(|&v| v > sign_tol);
    let neg = eigenfunction.values().iter().any(|&v| v < -sign_tol);
    let component_mins = mesh
        .components()
        .iter()
        .map(|r| {
            eigenfunction.values()[r.clone()]
                .iter()
                .fold(f64::INFINITY, |m, &v| m.min(v.abs()))
        })
        .collect();
    Ok(EigenReport {
        lambda_est: raw.quotient,
        residual: raw.residual,
        iterations: raw.iterations,
        sign_profile: match (pos, neg) {
            (true, true) => SignProfile::SignChanging,
            (false, true) => SignProfile::Negative,
            _ => SignProfile::Positive,
        },
        component_mins,
        trace: raw.trace,
        subcritical: false,
        eigenfunction,
    })
}

/// Smooth bump re-sampled per mesh for the seminorm-limit check: per
/// component, sin^2(pi (x - a)/(b - a)).
pub fn bump_profile(mesh: &Arc<Mesh>) -> NodalFunction {
    let intervals: Vec<(f64, f64)> = mesh.domain().intervals().to_vec();
    NodalFunction::from_fn(Arc::clone(mesh), move |x| {
        for &(a, b) in &intervals {
            if x > a && x < b {
                let t = (x - a) / (b - a);
                let s = (std::f64::consts::PI * t).sin();
                return s * s;
            }
        }
        0.0
    })
}

/// Seminorm-limit check: on meshes coupled to s by the given rule, compares
/// \[u\]_{s,p}^p of a fixed smooth bump against the discrete local gradient
/// energy. The relative error must decrease along the grid.
pub fn bbm_check(
    domain: &Domain1D,
    exponent: f64,
    s_grid: &[f64],
    coupling: &CouplingRule,
) -> Result<SweepResult> {
    require_strictly_monotone(s_grid, "s_grid")?;
    if s_grid.windows(2).any(|w| w[1] <= w[0]) || s_grid.iter().any(|&s| !(0.0 < s && s < 1.0)) {
        return Err(Error::InvalidParameter("s_grid must increase inside (0, 1)".into()));
    }

    let points: Vec<SweepPoint> = s_grid
        .par_iter()
        .map(|&s| {
            let mesh = Arc::new(build_mesh(domain, coupling.n_per_unit(s))?);
            let u = bump_profile(&mesh);
            let op = crate::gagliardo::assemble(&mesh, s, exponent)?;
            let semi = op.seminorm_pow(&u);
            let local = local_gradient_energy(&mesh, &u, exponent);
            let rel = (semi - local).abs() / local;
            Ok(SweepPoint {
                parameter: s,
                value: rel,
                seminorm_p: Some(semi),
                lp_norm_p: Some(lp_norm_p(&u, exponent)),
                weighted_norm_p: None,
                residual: None,
                n_nodes: mesh.node_count(),
                h: mesh.h(),
                converged: true,
                aux: Some(local),
                aux2: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SweepResult {
        parameter_name: "s".into(),
        value_name: "relative_error".into(),
        aux_name: Some("local_gradient_energy".into()),
        aux2_name: None,
        points,
        fitted_exponent: None,
        reference_value: None,
    })
}

/// Piecewise-linear resampling of a nodal function onto another mesh over the
/// same domain, with zero boundary values.
fn resample(from: &Mesh, values: &[f64], to: &Mesh) -> Vec<f64> {
    let mut out = vec![0.0; to.node_count()];
    for (k, range_to) in to.components().iter().enumerate() {
        let (a, b) = to.component_interval(k);
        let range_from = &from.components()[k];
        let mut knots = Vec::with_capacity(range_from.len() + 2);
        let mut vals = Vec::with_capacity(range_from.len() + 2);
        knots.push(a);
        vals.push(0.0);
        for i in range_from.clone() {
            knots.push(from.nodes()[i]);
            vals.push(values[i]);
        }
        knots.push(b);
        vals.push(0.0);
        for i in range_to.clone() {
            let x = to.nodes()[i];
            let j = knots.partition_point(|&t| t <= x).min(knots.len() - 1);
            let (x0, x1) = (knots[j - 1], knots[j]);
            let frac = (x - x0) / (x1 - x0);
            out[i] = vals[j - 1] * (1.0 - frac) + vals[j] * frac;
        }
    }
    out
}

/// Stability sweep in s toward 1: per grid point, the first eigenvalue on
/// the coupled mesh (cross-validated against the dense oracle at p = 2) and
/// the L^p distance between consecutive normalized eigenfunctions; the
/// reference value is the local (s = 1) first eigenvalue. With mu > 0 the
/// Nehari level at the base lambda is recorded as well.
#[allow(clippy::too_many_arguments)]
pub fn s_stability_sweep(
    domain: &Domain1D,
    potential: &PotentialSpec,
    base: ProblemParams,
    s_grid: &[f64],
    coupling: &CouplingRule,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<SweepResult> {
    require_strictly_monotone(s_grid, "s_grid")?;
    if s_grid.windows(2).any(|w| w[1] <= w[0]) || s_grid.iter().any(|&s| !(0.0 < s && s < 1.0)) {
        return Err(Error::InvalidParameter("s_grid must increase inside (0, 1)".into()));
    }
    if !potential.is_resamplable() {
        return Err(Error::InvalidParameter(
            "nodal potential tables cannot be re-sampled in an s-sweep".into(),
        ));
    }

    let ref_n = s_grid
        .iter()
        .map(|&s| coupling.n_per_unit(s))
        .max()
        .unwrap()
        .max(512);
    let ref_mesh = Arc::new(build_mesh(domain, ref_n)?);
    let ref_potential = potential.sample(&ref_mesh)?;
    let local = local_reference_lambda1(&ref_mesh, base.p, &ref_potential, tol)?;

    struct PointSolve {
        s: f64,
        report: Option<EigenReport>,
        seminorm_p: Option<f64>,
        lp_p: Option<f64>,
        weighted_p: Option<f64>,
        aux2: Option<f64>,
        n_nodes: usize,
        h: f64,
    }

    let solves: Vec<PointSolve> = s_grid
        .par_iter()
        .map(|&s| {
            let mesh = Arc::new(build_mesh(domain, coupling.n_per_unit(s))?);
            let pot = potential.sample(&mesh)?;
            let params = ProblemParams { s, ..base };
            let bundle = EnergyBundle::new(&mesh, ProblemParams { mu: 0.0, ..params }, pot.clone())?;
            let mut seminorm_p = None;
            let mut lp_p = None;
            let mut weighted_p = None;
            let (report, oracle_rel) = match lambda1(&bundle, tol, max_iter, seed) {
                Ok(rep) => {
                    seminorm_p = Some(bundle.op_p().seminorm_pow(&rep.eigenfunction));
                    lp_p = Some(lp_norm_p(&rep.eigenfunction, base.p));
                    weighted_p = Some(functional_j(&bundle, &rep.eigenfunction));
                    let oracle_rel = if base.p == 2.0 {
                        let spectrum = linear_oracle(&mesh, s, &pot)?;
                        Some((rep.lambda_est - spectrum[0].0).abs() / spectrum[0].0)
                    } else {
                        None
                    };
                    (Some(rep), oracle_rel)
                }
                Err(_) => (None, None),
            };
            // with mu > 0 record the Nehari level instead of the oracle check
            let aux2 = if base.mu > 0.0 {
                let full = EnergyBundle::new(&mesh, params, pot)?;
                solve_m_lambda(&full, base.lambda, tol, seed)
                    .ok()
                    .map(|r| r.m_lambda)
            } else {
                oracle_rel
            };
            Ok(PointSolve {
                s,
                report,
                seminorm_p,
                lp_p,
                weighted_p,
                aux2,
                n_nodes: mesh.node_count(),
                h: mesh.h(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    // consecutive eigenfunction distances on the reference mesh
    let mut prev_interp: Option<Vec<f64>> = None;
    let mut points = Vec::with_capacity(solves.len());
    for ps in &solves {
        let (value, residual, converged, distance) = match &ps.report {
            Some(rep) => {
                let interp = resample(rep.eigenfunction.mesh(), rep.eigenfunction.values(), &ref_mesh);
                let distance = prev_interp.as_ref().map(|prev| {
                    let aligned: Vec<f64> = if pairwise_dot(prev, &interp) < 0.0 {
                        interp.iter().map(|v| -v).collect()
                    } else {
                        interp.clone()
                    };
                    let diffs: Vec<f64> = prev
                        .iter()
                        .zip(&aligned)
                        .map(|(a, b)| abs_pow(a - b, base.p))
                        .collect();
                    (ref_mesh.h() * pairwise_sum(&diffs)).powf(1.0 / base.p)
                });
                prev_interp = Some(interp);
                (rep.lambda_est, Some(rep.residual), true, distance)
            }
            None => (f64::NAN, None, false, None),
        };
        points.push(SweepPoint {
            parameter: ps.s,
            value,
            seminorm_p: ps.seminorm_p,
            lp_norm_p: ps.lp_p,
            weighted_norm_p: ps.weighted_p,
            residual,
            n_nodes: ps.n_nodes,
            h: ps.h,
            converged,
            aux: distance,
            aux2: ps.aux2,
        });
    }

    Ok(SweepResult {
        parameter_name: "s".into(),
        value_name: "lambda1_s".into(),
        aux_name: Some("eigenfunction_distance_prev".into()),
        aux2_name: Some(if base.mu > 0.0 {
            "m_lambda".into()
        } else {
            "oracle_relative_error".into()
        }),
        points,
        fitted_exponent: None,
        reference_value: Some(local.lambda_est),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit_domain() -> Domain1D {
        Domain1D::new(vec![(0.0, 1.0)]).unwrap()
    }

    fn sym_domain() -> Domain1D {
        Domain1D::new(vec![(-1.0, 1.0)]).unwrap()
    }

    #[test]
    fn local_reference_recovers_dirichlet_eigenvalue() {
        // -u'' + u = lambda u on (0,1): lambda_1 = 1 + pi^2
        let mesh = Arc::new(build_mesh(&unit_domain(), 512).unwrap());
        let pot = PotentialSpec::One.sample(&mesh).unwrap();
        let rep = local_reference_lambda1(&mesh, 2.0, &pot, 1e-6).unwrap();
        let exact = 1.0 + PI * PI;
        let rel = (rep.lambda_est - exact).abs() / exact;
        assert!(rel <= 0.02, "lambda {} vs {exact} (rel {rel})", rep.lambda_est);
        assert!(rep.lambda_est > 1.0);
        assert_eq!(rep.sign_profile, SignProfile::Positive);

        // potential doubling halves the eigenvalue
        let pot2 = PotentialSpec::Constant { value: 2.0 }.sample(&mesh).unwrap();
        let rep2 = local_reference_lambda1(&mesh, 2.0, &pot2, 1e-6).unwrap();
        assert!((rep2.lambda_est - rep.lambda_est / 2.0).abs() <= 1e-8 * rep.lambda_est);
    }

    #[test]
    fn local_gradient_energy_of_linear_ramp() {
        // tent on (-1,1): |u'| = 1 everywhere
        let mesh = Arc::new(build_mesh(&sym_domain(), 64).unwrap());
        let u = NodalFunction::from_fn(Arc::clone(&mesh), |x| 1.0 - x.abs());
        for &p in &[2.0, 3.0] {
            let e = local_gradient_energy(&mesh, &u, p);
            assert!((e - 2.0).abs() <= 1e-12, "p = {p}: {e}");
        }
    }

    #[test]
    fn mu_quotient_decay_exponent_and_strictness() {
        let mesh = Arc::new(build_mesh(&sym_domain(), 24).unwrap());
        let pot = PotentialSpec::One.sample(&mesh).unwrap();
        let params = ProblemParams {
            s: 0.5,
            p: 3.0,
            q: 2.0,
            mu: 1.0,
            lambda: 0.0,
        };
        let b = EnergyBundle::new(&mesh, params, pot).unwrap();
        let ts = [10.0, 100.0, 1000.0, 10000.0];
        let sweep = mu_quotient_decay(&b, &ts, 1e-7, 100_000, 3).unwrap();
        let lambda1 = sweep.reference_value.unwrap();
        for w in sweep.points.windows(2) {
            assert!(w[1].value < w[0].value, "quotient strictly decreasing in t");
        }
        for pt in &sweep.points {
            assert!(pt.value > lambda1, "quotient stays above lambda_1");
        }
        let fitted = sweep.fitted_exponent.unwrap();
        assert!(
            (fitted + (params.p - params.q)).abs() <= 0.1 * (params.p - params.q),
            "fitted {fitted}"
        );
    }

    #[test]
    fn mu_sweep_levels_shrink_with_mu() {
        let mesh = Arc::new(build_mesh(&sym_domain(), 12).unwrap());
        let pot = PotentialSpec::One.sample(&mesh).unwrap();
        let params = ProblemParams {
            s: 0.5,
            p: 3.0,
            q: 2.0,
            mu: 1.0,
            lambda: 0.0,
        };
        let b = EnergyBundle::new(&mesh, params, pot.clone()).unwrap();
        let l1 = lambda1(&b.mu0_view(), 1e-7, 100_000, 1).unwrap().lambda_est;
        let lambda = 1.5 * l1;
        let grid = [1.0, 0.5, 0.25, 0.125];
        let sweep = mu_sweep(&b, lambda, &grid, 1e-6, 5).unwrap();
        assert_eq!(sweep.points.len(), 4);
        for pt in &sweep.points {
            assert!(pt.converged, "mu = {} failed", pt.parameter);
            assert!(pt.residual.unwrap() <= 1e-6);
            assert!(pt.value > 0.0);
        }
        for w in sweep.points.windows(2) {
            assert!(
                w[1].value < w[0].value,
                "level decreases as mu does: {} vs {}",
                w[0].value,
                w[1].value
            );
        }
        // measured vanishing trend of the level as mu -> 0+
        let first = sweep.points.first().unwrap().value;
        let last = sweep.points.last().unwrap().value;
        assert!(last <= 0.3 * first, "m_lambda barely dropped: {first} -> {last}");
    }

    #[test]
    fn bbm_error_decreases_toward_local_limit() {
        let sweep = bbm_check(
            &sym_domain(),
            2.0,
            &[0.6, 0.75, 0.9],
            &CouplingRule::default(),
        )
        .unwrap();
        for w in sweep.points.windows(2) {
            assert!(
                w[1].value < w[0].value,
                "relative error must decrease: {:?}",
                sweep.points.iter().map(|p| p.value).collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn bbm_error_invariant_under_profile_scaling() {
        // both sides p-homogeneous: the relative error of 3u equals that of u
        let mesh = Arc::new(build_mesh(&sym_domain(), 40).unwrap());
        let u = bump_profile(&mesh);
        let u3 = u.scaled(3.0);
        let op = crate::gagliardo::assemble(&mesh, 0.7, 2.0).unwrap();
        let r1 = (op.seminorm_pow(&u) - local_gradient_energy(&mesh, &u, 2.0)).abs()
            / local_gradient_energy(&mesh, &u, 2.0);
        let r3 = (op.seminorm_pow(&u3) - local_gradient_energy(&mesh, &u3, 2.0)).abs()
            / local_gradient_energy(&mesh, &u3, 2.0);
        assert!((r1 - r3).abs() <= 1e-12 * r1.max(1e-300));
    }

    #[test]
    fn s_sweep_cross_validates_oracle_and_tightens() {
        let base = ProblemParams {
            s: 0.5,
            p: 2.0,
            q: 1.5,
            mu: 0.0,
            lambda: 0.0,
        };
        let sweep = s_stability_sweep(
            &sym_domain(),
            &PotentialSpec::One,
            base,
            &[0.6, 0.75, 0.9],
            &CouplingRule::default(),
            1e-7,
            200_000,
            11,
        )
        .unwrap();
        let local = sweep.reference_value.unwrap();
        assert!(local > 1.0);
        for pt in &sweep.points {
            assert!(pt.converged);
            assert!(
                pt.aux2.unwrap() <= 1e-8,
                "oracle cross-validation at s = {}: {:?}",
                pt.parameter,
                pt.aux2
            );
        }
        // eigenfunction distance recorded from the second point on
        assert!(sweep.points[0].aux.is_none());
        assert!(sweep.points[1].aux.is_some());
        assert!(sweep.points[2].aux.is_some());
        // lambda_1^s approaches the local value
        let d_first = (sweep.points[0].value - local).abs();
        let d_last = (sweep.points[2].value - local).abs();
        assert!(d_last < d_first, "{d_last} vs {d_first}");
    }

    #[test]
    fn s_sweep_curve_is_smooth_in_s() {
        // measured smoothness probe: adjacent lambda_1^s jumps stay below
        // 10% of the local reference value
        let base = ProblemParams {
            s: 0.5,
            p: 2.0,
            q: 1.5,
            mu: 0.0,
            lambda: 0.0,
        };
        let sweep = s_stability_sweep(
            &sym_domain(),
            &PotentialSpec::One,
            base,
            &[0.7, 0.8, 0.9, 0.95],
            &CouplingRule::default(),
            1e-7,
            200_000,
            3,
        )
        .unwrap();
        let local = sweep.reference_value.unwrap();
        for w in sweep.points.windows(2) {
            let jump = (w[1].value - w[0].value).abs();
            assert!(
                jump <= 0.10 * local,
                "jump {jump} between s = {} and {} exceeds 10% of {local}",
                w[0].parameter,
                w[1].parameter
            );
        }
    }

    #[test]
    fn s_sweep_records_nehari_level_when_mu_positive() {
        let base = ProblemParams {
            s: 0.5,
            p: 3.0,
            q: 2.0,
            mu: 0.5,
            lambda: 8.0,
        };
        let sweep = s_stability_sweep(
            &sym_domain(),
            &PotentialSpec::One,
            base,
            &[0.5, 0.6],
            &CouplingRule { scale: 8.0 },
            1e-6,
            200_000,
            3,
        )
        .unwrap();
        assert_eq!(sweep.aux2_name.as_deref(), Some("m_lambda"));
        for pt in &sweep.points {
            assert!(pt.converged);
            let level = pt.aux2.expect("level recorded per point");
            assert!(level > 0.0);
        }
    }

    #[test]
    fn resample_reproduces_linear_functions() {
        let coarse = Arc::new(build_mesh(&sym_domain(), 8).unwrap());
        let fine = Arc::new(build_mesh(&sym_domain(), 32).unwrap());
        let tent = |x: f64| 1.0 - x.abs();
        let u = NodalFunction::from_fn(Arc::clone(&coarse), tent);
        let out = resample(&coarse, u.values(), &fine);
        for (i, &x) in fine.nodes().iter().enumerate() {
            assert!((out[i] - tent(x)).abs() <= 1e-12, "x = {x}");
        }
    }

    #[test]
    fn sweeps_reject_bad_grids() {
        let mesh = Arc::new(build_mesh(&sym_domain(), 8).unwrap());
        let pot = PotentialSpec::One.sample(&mesh).unwrap();
        let params = ProblemParams {
            s: 0.5,
            p: 3.0,
            q: 2.0,
            mu: 1.0,
            lambda: 0.0,
        };
        let b = EnergyBundle::new(&mesh, params, pot).unwrap();
        assert!(mu_quotient_decay(&b, &[10.0, 5.0], 1e-6, 1000, 0).is_err());
        assert!(mu_sweep(&b, 5.0, &[0.5, 1.0], 1e-6, 0).is_err());
        assert!(bbm_check(&sym_domain(), 2.0, &[0.9, 0.6], &CouplingRule::default()).is_err());
        assert!(s_stability_sweep(
            &sym_domain(),
            &PotentialSpec::Nodal { values: vec![1.0; mesh.node_count()] },
            params,
            &[0.6, 0.7],
            &CouplingRule::default(),
            1e-6,
            1000,
            0,
        )
        .is_err());
    }
}

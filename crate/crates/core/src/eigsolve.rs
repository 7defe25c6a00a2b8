//! First and second eigenvalues of the single-exponent (mu = 0) problem:
//! projected descent on the weighted-mass sphere, the odd two-parameter path
//! construction for the second eigenvalue, and a dense linear oracle at p = 2.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::descent::{
    minimize_quotient, FractionalNumerator, Numerator, RawSolve, Start, WeightedMass,
};
use crate::energies::{eigen_residual, lagrangian_gradient, EnergyBundle};
use crate::error::{Error, Result};
use crate::mesh::{lp_norm_p, Mesh, NodalFunction, Potential};
use crate::numeric::{abs_pow, euclid_norm, pairwise_dot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SignProfile {
    Positive,
    Negative,
    SignChanging,
}

/// One row of a solver iteration log.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TraceRow {
    pub iter: usize,
    pub quotient: f64,
    pub residual: f64,
}

/// Output of an eigenvalue solve. The eigenfunction is normalized to
/// J(u) = 1 and sign-normalized so its largest-magnitude node is positive.
#[derive(Debug, Clone)]
pub struct EigenReport {
    pub lambda_est: f64,
    pub eigenfunction: NodalFunction,
    pub residual: f64,
    pub iterations: usize,
    pub sign_profile: SignProfile,
    /// Per-component minimum of |u|.
    pub component_mins: Vec<f64>,
    pub trace: Vec<TraceRow>,
    pub subcritical: bool,
}

fn sign_normalize(values: &mut [f64]) {
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
}

fn classify_sign(values: &[f64]) -> SignProfile {
    let max = values.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
    let tol = 1e-12 * max;
    let pos = values.iter().any(|&v| v > tol);
    let neg = values.iter().any(|&v| v < -tol);
    match (pos, neg) {
        (true, true) => SignProfile::SignChanging,
        (false, true) => SignProfile::Negative,
        _ => SignProfile::Positive,
    }
}

fn component_mins(mesh: &Mesh, values: &[f64]) -> Vec<f64> {
    mesh.components()
        .iter()
        .map(|r| values[r.clone()].iter().fold(f64::INFINITY, |m, &v| m.min(v.abs())))
        .collect()
}

fn finish_report(b: &EnergyBundle, raw: RawSolve, lambda: f64) -> Result<EigenReport> {
    let mut values = raw.u;
    sign_normalize(&mut values);
    let eigenfunction = NodalFunction::from_values(Arc::clone(b.mesh()), values)?;
    let residual = eigen_residual(b, &eigenfunction, lambda)?;
    Ok(EigenReport {
        lambda_est: lambda,
        sign_profile: classify_sign(eigenfunction.values()),
        component_mins: component_mins(b.mesh(), eigenfunction.values()),
        residual,
        iterations: raw.iterations,
        trace: raw.trace,
        subcritical: b.params.subcritical(),
        eigenfunction,
    })
}

/// First eigenvalue: constrained minimum of the Rayleigh quotient over
/// { J(u) = 1 }, by projected descent with Armijo backtracking.
pub fn lambda1(b: &EnergyBundle, tol: f64, max_iter: usize, seed: u64) -> Result<EigenReport> {
    if b.params.mu != 0.0 {
        return Err(Error::InvalidParameter(
            "lambda1 solves the mu = 0 problem; pass a mu0 view".into(),
        ));
    }
    let num = FractionalNumerator {
        op: b.op_p(),
        h: b.mesh().h(),
        p: b.params.p,
    };
    let den = WeightedMass {
        v: b.potential().values(),
        h: b.mesh().h(),
        p: b.params.p,
    };
    let raw = minimize_quotient(&num, &den, b.mesh(), Start::Ground { seed }, tol, max_iter)?;
    let lambda = raw.quotient;
    finish_report(b, raw, lambda)
}

/// Dense generalized eigensolve for the linear case p = 2, mu = 0:
/// (A_2 + M) u = lambda M_V u with lumped mass matrices. Eigenvalues are
/// ascending; when V changes sign only directions of positive weighted mass
/// are reported.
pub fn linear_oracle(
    mesh: &Arc<Mesh>,
    s: f64,
    potential: &Potential,
) -> Result<Vec<(f64, NodalFunction)>> {
    let n = mesh.node_count();
    if n < 3 {
        return Err(Error::MeshTooSmall(n));
    }
    let op = crate::gagliardo::assemble(mesh, s, 2.0)?;
    let h = mesh.h();
    let mut a = op.quadratic_form_matrix();
    for i in 0..n {
        a[i * n + i] += h;
    }
    let a_mat = DMatrix::from_fn(n, n, |i, j| a[i * n + j]);
    let vvals = potential.values();

    let constant_v = vvals.iter().all(|&v| (v - vvals[0]).abs() <= 1e-15 * vvals[0].abs());
    let mut pairs: Vec<(f64, Vec<f64>)> = Vec::new();

    if constant_v && vvals[0] > 0.0 {
        let scale = h * vvals[0];
        let eig = SymmetricEigen::new(a_mat / scale);
        for k in 0..n {
            let col: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
            pairs.push((eig.eigenvalues[k], col));
        }
    } else {
        // Reciprocal pencil: with S = (A + M)^{-1/2}, the symmetric matrix
        // S M_V S has eigenvalues 1/lambda on directions of positive
        // weighted mass.
        let eig_a = SymmetricEigen::new(a_mat);
        let mut s_mat = DMatrix::zeros(n, n);
        for k in 0..n {
            let lk = eig_a.eigenvalues[k];
            if lk <= 0.0 {
                return Err(Error::InvalidParameter(
                    "stiffness pencil is not positive definite".into(),
                ));
            }
            let qk = eig_a.eigenvectors.column(k);
            let w = 1.0 / lk.sqrt();
            for i in 0..n {
                for j in 0..n {
                    s_mat[(i, j)] += w * qk[i] * qk[j];
                }
            }
        }
        let mut c = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += s_mat[(i, k)] * h * vvals[k] * s_mat[(k, j)];
                }
                c[(i, j)] = acc;
            }
        }
        let c = (&c + c.transpose()) * 0.5;
        let eig_c = SymmetricEigen::new(c);
        let gamma_max = eig_c.eigenvalues.iter().fold(0.0_f64, |m, &g: &f64| m.max(g.abs()));
        for k in 0..n {
            let gamma = eig_c.eigenvalues[k];
            if gamma > 1e-12 * gamma_max {
                let z = eig_c.eigenvectors.column(k);
                let u = &s_mat * z;
                pairs.push((1.0 / gamma, u.iter().copied().collect()));
            }
        }
    }

    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    pairs
        .into_iter()
        .map(|(lambda, mut values)| {
            let terms: Vec<f64> = values
                .iter()
                .zip(vvals)
                .map(|(&u, &v)| h * v * u * u)
                .collect();
            let j = crate::numeric::pairwise_sum(&terms);
            let c = j.sqrt().recip();
            for v in values.iter_mut() {
                *v *= c;
            }
            sign_normalize(&mut values);
            Ok((lambda, NodalFunction::from_values(Arc::clone(mesh), values)?))
        })
        .collect()
}

/// Inner maximization state of the two-parameter odd path through a
/// sign-changing candidate.
struct PathMax {
    angle: f64,
    quotient: f64,
}

struct PathObjective<'a> {
    b: &'a EnergyBundle,
}

impl PathObjective<'_> {
    /// Rayleigh quotient of cos(angle) w_plus + sin(angle) w_minus.
    fn value_at(&self, wp: &[f64], wm: &[f64], angle: f64) -> (f64, Vec<f64>) {
        let (c, s) = (angle.cos(), angle.sin());
        let v: Vec<f64> = wp.iter().zip(wm).map(|(&a, &b)| c * a + s * b).collect();
        let vf = NodalFunction::from_values(Arc::clone(self.b.mesh()), v.clone()).unwrap();
        let i = crate::energies::functional_i(self.b, &vf);
        let j = crate::energies::functional_j(self.b, &vf);
        (i / j, v)
    }

    /// Grid scan (128 points of the circle, ties to the smallest index)
    /// followed by golden-section refinement around the discrete argmax.
    fn maximize(&self, wp: &[f64], wm: &[f64]) -> PathMax {
        const GRID: usize = 128;
        let step = 2.0 * std::f64::consts::PI / GRID as f64;
        let mut best = (0usize, f64::NEG_INFINITY);
        for k in 0..GRID {
            let (q, _) = self.value_at(wp, wm, k as f64 * step);
            if q > best.1 {
                best = (k, q);
            }
        }
        let (mut lo, mut hi) = (best.0 as f64 * step - step, best.0 as f64 * step + step);
        let phi = 0.5 * (5.0_f64.sqrt() - 1.0);
        let mut x1 = hi - phi * (hi - lo);
        let mut x2 = lo + phi * (hi - lo);
        let mut f1 = self.value_at(wp, wm, x1).0;
        let mut f2 = self.value_at(wp, wm, x2).0;
        for _ in 0..45 {
            if f1 < f2 {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + phi * (hi - lo);
                f2 = self.value_at(wp, wm, x2).0;
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - phi * (hi - lo);
                f1 = self.value_at(wp, wm, x1).0;
            }
        }
        let angle = 0.5 * (lo + hi);
        let (quotient, _) = self.value_at(wp, wm, angle);
        PathMax { angle, quotient }
    }
}

fn split_parts(w: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let wp: Vec<f64> = w.iter().map(|&v| v.max(0.0)).collect();
    let wm: Vec<f64> = w.iter().map(|&v| v.min(0.0)).collect();
    (wp, wm)
}

/// Second eigenvalue via the odd-path minimax: minimize over sign-changing
/// candidates the maximum of the Rayleigh quotient along the two-parameter
/// path through the candidate's positive and negative parts, then refine the
/// maximizing profile to an eigenpair.
pub fn lambda2_minimax(b: &EnergyBundle, tol: f64, seed: u64) -> Result<EigenReport> {
    if b.params.mu != 0.0 {
        return Err(Error::InvalidParameter(
            "lambda2_minimax solves the mu = 0 problem; pass a mu0 view".into(),
        ));
    }
    let mesh = b.mesh();
    let n = mesh.node_count();
    let p = b.params.p;
    let h = mesh.h();
    let den = WeightedMass {
        v: b.potential().values(),
        h,
        p,
    };

    let mut w: Vec<f64> = if p == 2.0 {
        let spectrum = linear_oracle(mesh, b.params.s, b.potential())?;
        if spectrum.len() < 2 {
            return Err(Error::NoSignChangingCandidate);
        }
        spectrum[1].1.values().to_vec()
    } else {
        let ground = lambda1(b, tol.max(1e-8), 200_000, seed)?;
        let mut v = ground.eigenfunction.values().to_vec();
        for (i, vi) in v.iter_mut().enumerate() {
            if i >= n / 2 {
                *vi = -*vi;
            }
        }
        v
    };

    let objective = PathObjective { b };
    let num = FractionalNumerator { op: b.op_p(), h, p };

    let mut trace: Vec<TraceRow> = Vec::new();
    let mut alpha = 1.0;
    let mut prev_g: Option<(Vec<f64>, Vec<f64>)> = None; // (w, grad)
    let mut best: Option<(f64, Vec<f64>, f64)> = None; // (quotient, profile, residual)
    let max_outer = 2000;
    let mut iterations = 0;

    for it in 0..max_outer {
        iterations = it + 1;
        let (mut wp, mut wm) = split_parts(&w);
        let jp = den.value(&wp);
        let jm = den.value(&wm);
        if jp <= 0.0 || jm <= 0.0 {
            return Err(Error::NoSignChangingCandidate);
        }
        let cp = jp.powf(-1.0 / p);
        let cm = jm.powf(-1.0 / p);
        for v in wp.iter_mut() {
            *v *= cp;
        }
        for v in wm.iter_mut() {
            *v *= cm;
        }
        w = wp.iter().zip(&wm).map(|(&a, &b)| a + b).collect();

        let pm = objective.maximize(&wp, &wm);
        let (cos_a, sin_a) = (pm.angle.cos(), pm.angle.sin());
        let v: Vec<f64> = wp.iter().zip(&wm).map(|(&a, &b)| cos_a * a + sin_a * b).collect();
        let vf = NodalFunction::from_values(Arc::clone(mesh), v.clone())?;

        // gradient of the quotient at the maximizing profile, pulled back to
        // the candidate through the fixed angle (Danskin direction)
        let jv = crate::energies::functional_j(b, &vf);
        let mut grad_i = vec![0.0; n];
        num.gradient(&v, &mut grad_i);
        let mut grad_j = vec![0.0; n];
        den.gradient(&v, &mut grad_j);
        let quotient = pm.quotient;
        let grad_v: Vec<f64> = grad_i
            .iter()
            .zip(&grad_j)
            .map(|(gi, gj)| (gi - quotient * gj) / jv)
            .collect();
        let g: Vec<f64> = (0..n)
            .map(|i| {
                if w[i] > 0.0 {
                    grad_v[i] * cos_a
                } else if w[i] < 0.0 {
                    grad_v[i] * sin_a
                } else {
                    0.0
                }
            })
            .collect();

        let res = eigen_residual(b, &vf, quotient)?;
        trace.push(TraceRow {
            iter: it,
            quotient,
            residual: res,
        });
        if best.as_ref().is_none_or(|(q, _, _)| quotient <= *q) {
            best = Some((quotient, v.clone(), res));
        }
        let q_prev = if trace.len() >= 2 {
            trace[trace.len() - 2].quotient
        } else {
            f64::INFINITY
        };
        if res <= tol && (q_prev - quotient).abs() <= tol * tol * quotient.max(1.0) {
            break;
        }

        // Barzilai-Borwein trial with Armijo backtracking on the minimax value
        if let Some((w_old, g_old)) = &prev_g {
            let s: Vec<f64> = w.iter().zip(w_old).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = g.iter().zip(g_old).map(|(a, b)| a - b).collect();
            let sy = pairwise_dot(&s, &y);
            if sy > 0.0 {
                alpha = (pairwise_dot(&s, &s) / sy).clamp(1e-16, 1e16);
            }
        }
        let gg = pairwise_dot(&g, &g);
        if gg == 0.0 {
            break;
        }
        let mut accepted = false;
        let mut step = alpha;
        for _ in 0..50 {
            let cand: Vec<f64> = w.iter().zip(&g).map(|(wi, gi)| wi - step * gi).collect();
            let (cp2, cm2) = split_parts(&cand);
            let (jp2, jm2) = (den.value(&cp2), den.value(&cm2));
            if jp2 > 0.0 && jm2 > 0.0 {
                let mut cpn = cp2;
                let mut cmn = cm2;
                let (a2, b2) = (jp2.powf(-1.0 / p), jm2.powf(-1.0 / p));
                for v in cpn.iter_mut() {
                    *v *= a2;
                }
                for v in cmn.iter_mut() {
                    *v *= b2;
                }
                let q = objective.maximize(&cpn, &cmn).quotient;
                if q.is_finite() && q <= quotient - 1e-4 * step * gg {
                    prev_g = Some((w.clone(), g.clone()));
                    w = cand;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }

    let (quotient, profile, residual) = best.ok_or(Error::NoSignChangingCandidate)?;
    if residual > tol {
        return Err(Error::NonConvergence {
            iterations,
            residual,
            trace,
        });
    }
    let jv = {
        let vf = NodalFunction::from_values(Arc::clone(mesh), profile.clone())?;
        crate::energies::functional_j(b, &vf)
    };
    let mut values = profile;
    let c = jv.powf(-1.0 / p);
    for v in values.iter_mut() {
        *v *= c;
    }
    sign_normalize(&mut values);
    let eigenfunction = NodalFunction::from_values(Arc::clone(mesh), values)?;
    if classify_sign(eigenfunction.values()) != SignProfile::SignChanging {
        return Err(Error::NoSignChangingCandidate);
    }
    Ok(EigenReport {
        lambda_est: quotient,
        residual,
        iterations,
        sign_profile: SignProfile::SignChanging,
        component_mins: component_mins(mesh, eigenfunction.values()),
        trace,
        subcritical: b.params.subcritical(),
        eigenfunction,
    })
}

/// Findings report for the ground-state checks.
#[derive(Debug, Clone, Serialize)]
pub struct GroundStateReport {
    pub constant_sign: bool,
    pub strictly_positive: bool,
    pub component_mins: Vec<f64>,
    /// Max L^p distance between the base profile and re-runs from fresh seeds.
    pub simplicity_max_lp_distance: f64,
    pub symmetry_defect: Option<f64>,
    pub radially_monotone: Option<bool>,
    pub findings: Vec<String>,
}

/// Numerical checks of the ground-state properties: constant sign with
/// strict positivity on every component, simplicity under re-seeding, and
/// mirror symmetry / radial monotonicity on symmetric configurations.
pub fn check_ground_state_properties(
    rep: &EigenReport,
    b: &EnergyBundle,
    tol: f64,
    max_iter: usize,
    seeds: u64,
) -> Result<GroundStateReport> {
    let mesh = b.mesh();
    let p = b.params.p;
    let mut findings = Vec::new();

    let constant_sign = rep.sign_profile != SignProfile::SignChanging;
    if !constant_sign {
        findings.push("ground state changes sign".to_string());
    }
    let mins = component_mins(mesh, rep.eigenfunction.values());
    let strictly_positive = constant_sign && mins.iter().all(|&m| m > 0.0);
    if !strictly_positive {
        findings.push("ground state is not strictly positive on every component".to_string());
    }

    // simplicity probe: re-run from fresh seeds, compare normalized profiles
    let mut max_dist = 0.0_f64;
    for k in 1..=seeds {
        let other = lambda1(b, tol, max_iter, rep_seed(k))?;
        let mut diff = other.eigenfunction.clone();
        for (d, &u) in diff.values_mut().iter_mut().zip(rep.eigenfunction.values()) {
            *d -= u;
        }
        let dist = lp_norm_p(&diff, p).powf(1.0 / p);
        max_dist = max_dist.max(dist);
    }
    if max_dist > 1e-3 {
        findings.push(format!("simplicity probe distance {max_dist:.3e} exceeds 1e-3"));
    }

    let symmetric = mesh.is_mirror_symmetric() && b.potential().is_even();
    let symmetry_defect = symmetric.then(|| {
        let u = rep.eigenfunction.values();
        let n = u.len();
        let mirrored: Vec<f64> = (0..n).map(|i| u[i] - u[n - 1 - i]).collect();
        let m =
            NodalFunction::from_values(Arc::clone(mesh), mirrored).expect("mirror on same mesh");
        lp_norm_p(&m, p).powf(1.0 / p)
    });
    if let Some(d) = symmetry_defect {
        if d > 1e-3 {
            findings.push(format!("symmetry defect {d:.3e} exceeds 1e-3"));
        }
    }

    // discrete radial monotonicity on a single symmetric interval
    let radially_monotone = (symmetric && mesh.components().len() == 1).then(|| {
        let u = rep.eigenfunction.values();
        let n = u.len();
        let max = u.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
        let slack = 1e-9 * max;
        let mid = n / 2;
        let right_ok = (mid..n.saturating_sub(1)).all(|i| u[i + 1].abs() <= u[i].abs() + slack);
        let left_ok = (1..=mid).all(|i| u[i - 1].abs() <= u[i].abs() + slack);
        right_ok && left_ok
    });
    if radially_monotone == Some(false) {
        findings.push("profile is not radially monotone".to_string());
    }

    Ok(GroundStateReport {
        constant_sign,
        strictly_positive,
        component_mins: mins,
        simplicity_max_lp_distance: max_dist,
        symmetry_defect,
        radially_monotone,
        findings,
    })
}

fn rep_seed(k: u64) -> u64 {
    0x5eed_0000_u64.wrapping_add(k.wrapping_mul(0x9e37_79b9))
}

/// Residual-refinement probe at a fixed lambda strictly between the computed
/// first and second eigenvalues: Gauss-Newton-style descent on the squared
/// residual from random starts. Returns the smallest relative residual seen;
/// staying well above tol across a lambda grid is the numerical signature of
/// an isolated first eigenvalue. Requires p >= 2.
pub fn isolation_probe(
    b: &EnergyBundle,
    lambda: f64,
    starts: usize,
    iters: usize,
    seed: u64,
) -> Result<f64> {
    if b.params.mu != 0.0 || b.params.p < 2.0 {
        return Err(Error::InvalidParameter(
            "isolation probe requires mu = 0 and p >= 2".into(),
        ));
    }
    let mesh = b.mesh();
    let n = mesh.node_count();
    let p = b.params.p;
    let h = mesh.h();
    let vvals = b.potential().values();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;

    for _ in 0..starts {
        let mut u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0_f64..1.0)).collect();
        let norm = euclid_norm(&u);
        for v in u.iter_mut() {
            *v /= norm;
        }
        let mut alpha = 1.0;
        for _ in 0..iters {
            let uf = NodalFunction::from_values(Arc::clone(mesh), u.clone())?;
            let r = lagrangian_gradient(b, &uf, lambda);
            best = best.min(eigen_residual(b, &uf, lambda)?);

            // gradient of ||r||^2: 2 H(u) r with H the lagrangian Hessian
            let mut hr = vec![0.0; n];
            b.op_p().seminorm_hessian_vec(&u, r.values(), &mut hr);
            let mut g = vec![0.0; n];
            for i in 0..n {
                let mass = h * p * (p - 1.0) * abs_pow(u[i], p - 2.0);
                g[i] = 2.0 * (hr[i] / p + mass / p * (1.0 - lambda * vvals[i]) * r.values()[i]);
            }
            let rho = pairwise_dot(r.values(), r.values());
            let gg = pairwise_dot(&g, &g);
            if gg == 0.0 {
                break;
            }
            let mut accepted = false;
            let mut step = alpha;
            for _ in 0..40 {
                let mut cand: Vec<f64> = u.iter().zip(&g).map(|(ui, gi)| ui - step * gi).collect();
                let cn = euclid_norm(&cand);
                if cn > 0.0 {
                    for v in cand.iter_mut() {
                        *v /= cn;
                    }
                    let cf = NodalFunction::from_values(Arc::clone(mesh), cand.clone())?;
                    let rc = lagrangian_gradient(b, &cf, lambda);
                    let rho_c = pairwise_dot(rc.values(), rc.values());
                    if rho_c < rho {
                        u = cand;
                        accepted = true;
                        alpha = step * 1.5;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energies::ProblemParams;
    use crate::mesh::{build_mesh, Domain1D, PotentialSpec};

    fn bundle(intervals: Vec<(f64, f64)>, n_per_unit: u32, s: f64, p: f64) -> EnergyBundle {
        let domain = Domain1D::new(intervals).unwrap();
        let mesh = Arc::new(build_mesh(&domain, n_per_unit).unwrap());
        let pot = PotentialSpec::One.sample(&mesh).unwrap();
        let params = ProblemParams {
            s,
            p,
            q: 0.5 * (1.0 + p),
            mu: 0.0,
            lambda: 0.0,
        };
        EnergyBundle::new(&mesh, params, pot).unwrap()
    }

    #[test]
    fn lambda1_exceeds_one_for_unit_potential() {
        let b = bundle(vec![(-1.0, 1.0)], 24, 0.5, 2.5);
        let rep = lambda1(&b, 1e-6, 50_000, 7).unwrap();
        assert!(rep.lambda_est > 1.0);
        assert!(rep.residual <= 1e-6);
        assert_eq!(rep.sign_profile, SignProfile::Positive);
        // normalized to J(u) = 1
        let j = crate::energies::functional_j(&b, &rep.eigenfunction);
        assert!((j - 1.0).abs() < 1e-10);
        // monotone nonincreasing trace
        for w in rep.trace.windows(2) {
            assert!(w[1].quotient <= w[0].quotient + 1e-14);
        }
    }

    #[test]
    fn lambda1_scales_inversely_with_potential() {
        let domain = Domain1D::new(vec![(-1.0, 1.0)]).unwrap();
        let mesh = Arc::new(build_mesh(&domain, 16).unwrap());
        let params = ProblemParams {
            s: 0.6,
            p: 2.0,
            q: 1.5,
            mu: 0.0,
            lambda: 0.0,
        };
        let b1 = EnergyBundle::new(&mesh, params, PotentialSpec::One.sample(&mesh).unwrap()).unwrap();
        let b2 = EnergyBundle::new(
            &mesh,
            params,
            PotentialSpec::Constant { value: 2.0 }.sample(&mesh).unwrap(),
        )
        .unwrap();
        let r1 = lambda1(&b1, 1e-7, 100_000, 3).unwrap();
        let r2 = lambda1(&b2, 1e-7, 100_000, 3).unwrap();
        assert!((r2.lambda_est - r1.lambda_est / 2.0).abs() <= 1e-10 * r1.lambda_est);
        // identical minimizer profile up to the J-normalization rescale
        let scale = 2.0_f64.sqrt();
        for (a, b) in r1
            .eigenfunction
            .values()
            .iter()
            .zip(r2.eigenfunction.values())
        {
            assert!((a - b * scale).abs() <= 1e-6 * a.abs().max(1e-9));
        }
    }

    #[test]
    fn lambda1_matches_linear_oracle_at_p2() {
        let b = bundle(vec![(-1.0, 1.0)], 32, 0.5, 2.0);
        let rep = lambda1(&b, 1e-7, 200_000, 11).unwrap();
        let spectrum = linear_oracle(b.mesh(), 0.5, b.potential()).unwrap();
        let rel = (rep.lambda_est - spectrum[0].0).abs() / spectrum[0].0;
        assert!(rel <= 1e-8, "relative error {rel}");
    }

    #[test]
    fn oracle_structure_and_gap_stability() {
        let b64 = bundle(vec![(-1.0, 1.0)], 64, 0.5, 2.0);
        let b128 = bundle(vec![(-1.0, 1.0)], 128, 0.5, 2.0);
        let s64 = linear_oracle(b64.mesh(), 0.5, b64.potential()).unwrap();
        let s128 = linear_oracle(b128.mesh(), 0.5, b128.potential()).unwrap();
        assert!(s64[0].0 > 1.0);
        for w in s64.windows(2) {
            assert!(w[1].0 >= w[0].0);
        }
        let gap64 = s64[1].0 - s64[0].0;
        let gap128 = s128[1].0 - s128[0].0;
        assert!(
            (gap64 - gap128).abs() <= 0.02 * gap128,
            "gap {gap64} vs {gap128}"
        );
    }

    #[test]
    fn oracle_converges_to_interval_half_laplacian_reference() {
        // Reference eigenvalues of the integral half-Laplacian on (-1,1) in
        // the standard C(1,s) normalization: lambda_1 ~ 1.157773,
        // lambda_2 ~ 2.754755 (Kwasnicki's interval spectrum). Our energy at
        // s = 0.5, p = 2 carries K = 0.5 on the full double integral while
        // the standard form carries C/2 with C = 1/pi, so eigenvalues map
        // through a factor pi plus the unit mass term.
        let expect1 = std::f64::consts::PI * 1.157773 + 1.0;
        let expect2 = std::f64::consts::PI * 2.754755 + 1.0;
        let mut errors = Vec::new();
        for n in [64u32, 128, 256] {
            let b = bundle(vec![(-1.0, 1.0)], n, 0.5, 2.0);
            let spectrum = linear_oracle(b.mesh(), 0.5, b.potential()).unwrap();
            errors.push((
                (spectrum[0].0 - expect1).abs() / expect1,
                (spectrum[1].0 - expect2).abs() / expect2,
            ));
        }
        for w in errors.windows(2) {
            assert!(w[1].0 < w[0].0 && w[1].1 < w[0].1, "errors must shrink: {errors:?}");
        }
        let (e1, e2) = errors[2];
        assert!(e1 <= 3e-3, "lambda_1 reference error {e1:.3e}");
        assert!(e2 <= 4e-3, "lambda_2 reference error {e2:.3e}");
    }

    #[test]
    fn oracle_rejects_tiny_mesh() {
        let domain = Domain1D::new(vec![(0.0, 1.0)]).unwrap();
        let mesh = Arc::new(build_mesh(&domain, 2).unwrap());
        let pot = PotentialSpec::One.sample(&mesh).unwrap();
        assert!(matches!(
            linear_oracle(&mesh, 0.5, &pot),
            Err(Error::MeshTooSmall(_))
        ));
    }

    #[test]
    fn oracle_handles_sign_changing_potential() {
        let domain = Domain1D::new(vec![(-1.0, 1.0)]).unwrap();
        let mesh = Arc::new(build_mesh(&domain, 12).unwrap());
        let pot = PotentialSpec::SignStep { x0: 0.0 }.sample(&mesh).unwrap();
        let spectrum = linear_oracle(&mesh, 0.5, &pot).unwrap();
        assert!(!spectrum.is_empty());
        assert!(spectrum.len() < mesh.node_count());
        for (lambda, u) in &spectrum {
            assert!(*lambda > 0.0);
            let j = crate::energies::functional_j(
                &EnergyBundle::new(
                    &mesh,
                    ProblemParams {
                        s: 0.5,
                        p: 2.0,
                        q: 1.5,
                        mu: 0.0,
                        lambda: 0.0,
                    },
                    pot.clone(),
                )
                .unwrap(),
                u,
            );
            assert!((j - 1.0).abs() <= 1e-8);
        }
    }

    #[test]
    fn lambda1_with_sign_changing_potential_matches_oracle() {
        // experimental surface: descent must land on the positive-mass
        // ground state that the oracle reports
        let domain = Domain1D::new(vec![(-1.0, 1.0)]).unwrap();
        let mesh = Arc::new(build_mesh(&domain, 16).unwrap());
        let pot = PotentialSpec::SignStep { x0: 0.0 }.sample(&mesh).unwrap();
        let params = ProblemParams {
            s: 0.5,
            p: 2.0,
            q: 1.5,
            mu: 0.0,
            lambda: 0.0,
        };
        let b = EnergyBundle::new(&mesh, params, pot.clone()).unwrap();
        let rep = lambda1(&b, 1e-7, 200_000, 3).unwrap();
        let spectrum = linear_oracle(&mesh, 0.5, &pot).unwrap();
        let rel = (rep.lambda_est - spectrum[0].0).abs() / spectrum[0].0;
        assert!(rel <= 1e-7, "relative error {rel}");
        assert!(crate::energies::functional_j(&b, &rep.eigenfunction) > 0.0);
    }

    #[test]
    fn lambda2_reports_collapse_when_no_candidate_survives() {
        // potential positive only near the right edge: the flipped half of
        // the ground profile has nonpositive weighted mass, so no
        // sign-changing candidate is admissible
        let domain = Domain1D::new(vec![(-1.0, 1.0)]).unwrap();
        let mesh = Arc::new(build_mesh(&domain, 16).unwrap());
        let pot = PotentialSpec::SignStep { x0: 0.8 }.sample(&mesh).unwrap();
        let params = ProblemParams {
            s: 0.5,
            p: 2.5,
            q: 1.5,
            mu: 0.0,
            lambda: 0.0,
        };
        let b = EnergyBundle::new(&mesh, params, pot).unwrap();
        match lambda2_minimax(&b, 1e-5, 3) {
            Err(Error::NoSignChangingCandidate) => {}
            other => panic!("expected NoSignChangingCandidate, got {other:?}"),
        }
    }

    #[test]
    fn lambda2_matches_oracle_and_changes_sign() {
        let b = bundle(vec![(-1.0, 1.0)], 24, 0.5, 2.0);
        let l1 = lambda1(&b, 1e-7, 100_000, 3).unwrap();
        let l2 = lambda2_minimax(&b, 1e-6, 3).unwrap();
        let spectrum = linear_oracle(b.mesh(), 0.5, b.potential()).unwrap();
        let rel = (l2.lambda_est - spectrum[1].0).abs() / spectrum[1].0;
        assert!(rel <= 1e-6, "relative error {rel}");
        assert_eq!(l2.sign_profile, SignProfile::SignChanging);
        assert!(l2.lambda_est > l1.lambda_est + 1e-3 * l1.lambda_est);
        assert!(l2.residual <= 1e-6);
    }

    #[test]
    fn path_quotient_bounded_by_lambda2_along_the_circle() {
        // the two-parameter odd path through the refined eigenfunction stays
        // at or below the eigenvalue, with the diagonal attaining it
        let b = bundle(vec![(-1.0, 1.0)], 16, 0.5, 2.0);
        let rep = lambda2_minimax(&b, 1e-7, 5).unwrap();
        let u = rep.eigenfunction.values();
        let mesh = b.mesh();
        let wp: Vec<f64> = u.iter().map(|&v| v.max(0.0)).collect();
        let wm: Vec<f64> = u.iter().map(|&v| v.min(0.0)).collect();
        let mut max_seen = f64::NEG_INFINITY;
        for k in 0..128 {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / 128.0;
            let v: Vec<f64> = wp
                .iter()
                .zip(&wm)
                .map(|(&a, &b)| theta.cos() * a + theta.sin() * b)
                .collect();
            let vf = NodalFunction::from_values(Arc::clone(mesh), v).unwrap();
            let j = crate::energies::functional_j(&b, &vf);
            if j <= 0.0 {
                continue;
            }
            let q = crate::energies::functional_i(&b, &vf) / j;
            max_seen = max_seen.max(q);
            assert!(
                q <= rep.lambda_est * (1.0 + 1e-9) + 1e-9,
                "path value {q} exceeds lambda2 {}",
                rep.lambda_est
            );
        }
        assert!(
            (max_seen - rep.lambda_est).abs() <= 1e-6 * rep.lambda_est,
            "the path maximum {max_seen} should attain lambda2 {}",
            rep.lambda_est
        );
    }

    #[test]
    fn no_spurious_eigenvalues_between_lambda1_and_lambda2() {
        // residual refinement at fixed lambda strictly inside the gap never
        // approaches an eigenpair; recorded as a statistical finding
        let b = bundle(vec![(-1.0, 1.0)], 16, 0.5, 2.0);
        let spectrum = linear_oracle(b.mesh(), 0.5, b.potential()).unwrap();
        let (l1, l2) = (spectrum[0].0, spectrum[1].0);
        let delta = 0.05 * (l2 - l1);
        for frac in [0.0, 0.5, 1.0] {
            let lambda = l1 + delta + frac * (l2 - l1 - 2.0 * delta);
            let best = isolation_probe(&b, lambda, 3, 400, 7).unwrap();
            assert!(
                best > 1e-2,
                "probe at lambda = {lambda} refined to residual {best}"
            );
        }
    }

    #[test]
    fn ground_state_checks_on_disconnected_domain() {
        let b = bundle(vec![(-1.0, -0.2), (0.2, 1.0)], 20, 0.5, 2.0);
        let rep = lambda1(&b, 1e-7, 100_000, 5).unwrap();
        let props = check_ground_state_properties(&rep, &b, 1e-7, 100_000, 3).unwrap();
        assert!(props.constant_sign);
        assert!(props.strictly_positive, "mins: {:?}", props.component_mins);
        assert_eq!(props.component_mins.len(), 2);
        assert!(props.simplicity_max_lp_distance <= 1e-3);
        assert!(props.symmetry_defect.unwrap() <= 1e-3);
        assert!(props.findings.is_empty(), "{:?}", props.findings);
    }
}

//! Monotone projected descent on the constrained Rayleigh quotient
//! I(u) / J(u) over { J(u) = 1 }.
//!
//! Steps use a Barzilai-Borwein trial length safeguarded by Armijo
//! backtracking, so the quotient trace is nonincreasing by construction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eigsolve::TraceRow;
use crate::error::{Error, Result};
use crate::gagliardo::GagliardoOperator;
use crate::mesh::Mesh;
use crate::numeric::{abs_pow, euclid_norm, pairwise_dot, pairwise_sum, signed_pow};

/// Numerator energy I(u) of a quotient, with its gradient and an optional
/// preconditioner for the descent direction.
pub(crate) trait Numerator: Sync {
    fn value(&self, u: &[f64]) -> f64;
    fn gradient(&self, u: &[f64], out: &mut [f64]);

    /// Approximate inverse-Hessian application; identity when absent.
    fn precondition(&self, _u: &[f64], _g: &[f64]) -> Option<Vec<f64>> {
        None
    }
}

/// I(u) = \[u\]_{s,p}^p + ||u||_p^p.
pub(crate) struct FractionalNumerator<'a> {
    pub op: &'a GagliardoOperator,
    pub h: f64,
    pub p: f64,
}

impl Numerator for FractionalNumerator<'_> {
    fn value(&self, u: &[f64]) -> f64 {
        let mass: Vec<f64> = u.iter().map(|&v| crate::numeric::abs_pow(v, self.p)).collect();
        self.op.seminorm_pow_raw(u) + self.h * pairwise_sum(&mass)
    }

    fn gradient(&self, u: &[f64], out: &mut [f64]) {
        self.op.seminorm_gradient_into(u, out);
        for (g, &v) in out.iter_mut().zip(u) {
            *g += self.h * self.p * signed_pow(v, self.p);
        }
    }

    /// Tridiagonal truncation of the energy Hessian: adjacent pair weights
    /// plus the tail and mass diagonals. Near s = 1 the band carries almost
    /// the whole operator, which is where plain descent degrades.
    fn precondition(&self, u: &[f64], g: &[f64]) -> Option<Vec<f64>> {
        let n = u.len();
        let alpha = self.op.exponent();
        let k_const = self.op.constant() * alpha * (alpha - 1.0);
        let diff_scale = (0..n.saturating_sub(1))
            .map(|i| (u[i] - u[i + 1]).abs())
            .fold(1e-12_f64, f64::max);
        let u_scale = u.iter().fold(1e-12_f64, |m, &v| m.max(v.abs()));
        let curv = |d: f64, scale: f64| -> f64 {
            if alpha == 2.0 {
                1.0
            } else {
                abs_pow(d.abs().clamp(1e-6 * scale, scale), alpha - 2.0)
            }
        };
        let mass_curv = |v: f64| -> f64 {
            if self.p == 2.0 {
                1.0
            } else {
                abs_pow(v.abs().clamp(1e-6 * u_scale, u_scale), self.p - 2.0)
            }
        };
        let mut diag = vec![0.0; n];
        let mut lower = vec![0.0; n];
        for i in 0..n {
            if i + 1 < n {
                let c = k_const * 2.0 * self.op.pair_weight(i, i + 1) * curv(u[i] - u[i + 1], diff_scale);
                diag[i] += c;
                diag[i + 1] += c;
                lower[i + 1] -= c;
            }
            diag[i] += k_const * self.op.tail_weights()[i] * curv(u[i], u_scale)
                + self.h * self.p * (self.p - 1.0) * mass_curv(u[i]);
        }
        solve_tridiagonal(&diag, &lower, g)
    }
}

/// Thomas solve of a symmetric positive-definite tridiagonal system;
/// `lower[i]` couples node i with node i - 1.
fn solve_tridiagonal(diag: &[f64], lower: &[f64], g: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    if denom <= 0.0 {
        return None;
    }
    d[0] = g[0] / denom;
    for i in 1..n {
        c[i - 1] = lower[i] / denom;
        denom = diag[i] - lower[i] * c[i - 1];
        if denom <= 0.0 {
            return None;
        }
        d[i] = (g[i] - lower[i] * d[i - 1]) / denom;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= c[i] * next;
    }
    Some(x)
}

/// Local (s = 1) energy ||u'||_p^p + ||u||_p^p with first differences and
/// zero exterior neighbors.
pub(crate) struct LocalNumerator<'a> {
    pub mesh: &'a Mesh,
    pub p: f64,
}

impl LocalNumerator<'_> {
    /// Segment widths and endpoint values (with the virtual zero boundary
    /// nodes) for one component.
    fn segments(&self) -> Vec<(usize, usize, f64)> {
        // (left node or USIZE_MAX for boundary, right node or USIZE_MAX, width)
        let mut out = Vec::new();
        let xs = self.mesh.nodes();
        let h = self.mesh.h();
        for (k, range) in self.mesh.components().iter().enumerate() {
            let (a, b) = self.mesh.component_interval(k);
            let lo = range.start;
            let m = range.len();
            out.push((usize::MAX, lo, xs[lo] - a));
            for i in 0..m - 1 {
                out.push((lo + i, lo + i + 1, h));
            }
            out.push((lo + m - 1, usize::MAX, b - xs[lo + m - 1]));
        }
        out
    }
}

impl Numerator for LocalNumerator<'_> {
    fn value(&self, u: &[f64]) -> f64 {
        let p = self.p;
        let h = self.mesh.h();
        let grad_terms: Vec<f64> = self
            .segments()
            .iter()
            .map(|&(l, r, w)| {
                let ul = if l == usize::MAX { 0.0 } else { u[l] };
                let ur = if r == usize::MAX { 0.0 } else { u[r] };
                w * crate::numeric::abs_pow((ur - ul) / w, p)
            })
            .collect();
        let mass: Vec<f64> = u.iter().map(|&v| crate::numeric::abs_pow(v, p)).collect();
        pairwise_sum(&grad_terms) + h * pairwise_sum(&mass)
    }

    fn gradient(&self, u: &[f64], out: &mut [f64]) {
        let p = self.p;
        let h = self.mesh.h();
        for (g, &v) in out.iter_mut().zip(u) {
            *g = h * p * signed_pow(v, p);
        }
        for &(l, r, w) in &self.segments() {
            let ul = if l == usize::MAX { 0.0 } else { u[l] };
            let ur = if r == usize::MAX { 0.0 } else { u[r] };
            let d = p * signed_pow((ur - ul) / w, p);
            if r != usize::MAX {
                out[r] += d;
            }
            if l != usize::MAX {
                out[l] -= d;
            }
        }
    }

    /// Tridiagonal solve against the linearized stiffness-plus-mass form;
    /// makes the ill-conditioned local quotient tractable for descent.
    fn precondition(&self, u: &[f64], g: &[f64]) -> Option<Vec<f64>> {
        let n = u.len();
        let p = self.p;
        let h = self.mesh.h();
        let mut diag = vec![0.0; n];
        let mut lower = vec![0.0; n]; // lower[i] couples node i with i-1
        let mut slope_scale = 0.0_f64;
        let segs = self.segments();
        for &(l, r, w) in &segs {
            let ul = if l == usize::MAX { 0.0 } else { u[l] };
            let ur = if r == usize::MAX { 0.0 } else { u[r] };
            slope_scale = slope_scale.max(((ur - ul) / w).abs());
        }
        let scale = slope_scale.max(1e-12);
        for &(l, r, w) in &segs {
            let ul = if l == usize::MAX { 0.0 } else { u[l] };
            let ur = if r == usize::MAX { 0.0 } else { u[r] };
            let slope = ((ur - ul) / w).abs();
            // clamp |u'|^{p-2} away from its degenerate limits so the
            // tridiagonal form stays positive definite
            let weight = if p == 2.0 {
                1.0
            } else {
                slope.clamp(1e-6 * scale, scale).powf(p - 2.0)
            };
            let k = p * (p - 1.0) * weight / w;
            if l != usize::MAX {
                diag[l] += k;
            }
            if r != usize::MAX {
                diag[r] += k;
            }
            if l != usize::MAX && r != usize::MAX {
                lower[r] -= k;
            }
        }
        let u_scale = u.iter().fold(1e-12_f64, |m, &v| m.max(v.abs()));
        for (d, &v) in diag.iter_mut().zip(u) {
            let m = if p == 2.0 {
                1.0
            } else {
                abs_pow(v.abs().max(1e-6 * u_scale), p - 2.0)
            };
            *d += h * p * (p - 1.0) * m;
        }
        solve_tridiagonal(&diag, &lower, g)
    }
}

/// Weighted mass J(u) = h sum V_i |u_i|^p and its gradient.
pub(crate) struct WeightedMass<'a> {
    pub v: &'a [f64],
    pub h: f64,
    pub p: f64,
}

impl WeightedMass<'_> {
    pub fn value(&self, u: &[f64]) -> f64 {
        let terms: Vec<f64> = u
            .iter()
            .zip(self.v)
            .map(|(&ui, &vi)| vi * crate::numeric::abs_pow(ui, self.p))
            .collect();
        self.h * pairwise_sum(&terms)
    }

    pub fn gradient(&self, u: &[f64], out: &mut [f64]) {
        for ((g, &ui), &vi) in out.iter_mut().zip(u).zip(self.v) {
            *g = self.h * self.p * vi * signed_pow(ui, self.p);
        }
    }
}

pub(crate) struct RawSolve {
    pub quotient: f64,
    pub u: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub trace: Vec<TraceRow>,
}

/// Strictly positive bump biased toward the constant-sign ground state:
/// product of distances to the component endpoints, plus seeded relative
/// noise of size 0.01.
pub(crate) fn bump_start(mesh: &Mesh, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = vec![0.0; mesh.node_count()];
    for (k, range) in mesh.components().iter().enumerate() {
        let (a, b) = mesh.component_interval(k);
        for i in range.clone() {
            let x = mesh.nodes()[i];
            let bump = (x - a) * (b - x) / (0.25 * (b - a) * (b - a));
            u[i] = bump * (1.0 + 0.01 * rng.random_range(-1.0..1.0));
        }
    }
    u
}

fn random_start(mesh: &Mesh, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..mesh.node_count()).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub(crate) enum Start {
    /// Bump plus noise, with random retries if the weighted mass is not
    /// positive.
    Ground { seed: u64 },
}

/// Minimizes I(u)/J(u) over {J(u) = 1}. Stops once the residual
/// ||grad I - R grad J|| / ||grad I|| falls below `tol` and the quotient is
/// stable to tol^2 in two consecutive iterations.
pub(crate) fn minimize_quotient(
    num: &dyn Numerator,
    den: &WeightedMass,
    mesh: &Mesh,
    start: Start,
    tol: f64,
    max_iter: usize,
) -> Result<RawSolve> {
    if tol <= 0.0 {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    let n = mesh.node_count();
    let p = den.p;

    let mut u = match start {
        Start::Ground { seed } => {
            let mut chosen = None;
            let bump = bump_start(mesh, seed);
            if den.value(&bump) > 0.0 {
                chosen = Some(bump);
            } else {
                // restrict the bump to the positivity set of the weight
                let masked: Vec<f64> = bump
                    .iter()
                    .zip(den.v)
                    .map(|(&b, &v)| if v > 0.0 { b } else { 0.0 })
                    .collect();
                if den.value(&masked) > 0.0 {
                    chosen = Some(masked);
                } else {
                    for retry in 0..50 {
                        let cand = random_start(mesh, seed.wrapping_add(1 + retry));
                        if den.value(&cand) > 0.0 {
                            chosen = Some(cand);
                            break;
                        }
                    }
                }
            }
            chosen.ok_or(Error::PositivitySetUnresolved)?
        }
    };

    let normalize = |u: &mut Vec<f64>, j: f64| {
        let c = j.powf(-1.0 / p);
        for v in u.iter_mut() {
            *v *= c;
        }
    };
    let j0 = den.value(&u);
    normalize(&mut u, j0);

    let mut grad_i = vec![0.0; n];
    let mut grad_j = vec![0.0; n];
    num.gradient(&u, &mut grad_i);
    den.gradient(&u, &mut grad_j);
    let mut quotient = num.value(&u);
    let mut g: Vec<f64> = grad_i
        .iter()
        .zip(&grad_j)
        .map(|(gi, gj)| gi - quotient * gj)
        .collect();
    let mut residual = euclid_norm(&g) / euclid_norm(&grad_i).max(f64::MIN_POSITIVE);

    let mut trace = vec![TraceRow {
        iter: 0,
        quotient,
        residual,
    }];
    let mut alpha = 1.0 / (1.0 + euclid_norm(&g));
    let mut streak = 0usize;
    let mut iterations = 0usize;
    let mut restarts = 0usize;

    for it in 1..=max_iter {
        iterations = it;
        let gg = pairwise_dot(&g, &g);
        if gg == 0.0 {
            residual = 0.0;
            break;
        }
        let mut newton_like = false;
        let (dir, gd) = match num.precondition(&u, &g) {
            Some(d) => {
                let gd = pairwise_dot(&g, &d);
                if gd > 0.0 {
                    newton_like = true;
                    (d, gd)
                } else {
                    (g.clone(), gg)
                }
            }
            None => (g.clone(), gg),
        };
        if newton_like {
            alpha = 1.0;
        }

        let mut accepted = false;
        let mut u_new = Vec::new();
        let mut q_new = quotient;
        let mut step = alpha;
        for _ in 0..60 {
            let mut cand: Vec<f64> = u.iter().zip(&dir).map(|(ui, di)| ui - step * di).collect();
            let j = den.value(&cand);
            if j > f64::MIN_POSITIVE {
                normalize(&mut cand, j);
                let q = num.value(&cand);
                // sufficient decrease, or a flat step once the decrease falls
                // below representable precision (keeps the trace monotone
                // while the eigenvector keeps rotating)
                let flat = step * gd <= 1e-13 * quotient.abs().max(1.0) && q <= quotient;
                if q.is_finite() && (q <= quotient - 1e-4 * step * gd || flat) {
                    u_new = cand;
                    q_new = q;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            restarts += 1;
            if restarts > 3 {
                break;
            }
            alpha = 1.0 / (1.0 + euclid_norm(&g));
            continue;
        }
        restarts = 0;

        let mut grad_i_new = vec![0.0; n];
        let mut grad_j_new = vec![0.0; n];
        num.gradient(&u_new, &mut grad_i_new);
        den.gradient(&u_new, &mut grad_j_new);
        let g_new: Vec<f64> = grad_i_new
            .iter()
            .zip(&grad_j_new)
            .map(|(gi, gj)| gi - q_new * gj)
            .collect();

        // Barzilai-Borwein trial for the next iteration.
        let s: Vec<f64> = u_new.iter().zip(&u).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = pairwise_dot(&s, &y);
        alpha = if sy > 0.0 {
            (pairwise_dot(&s, &s) / sy).clamp(1e-18, 1e18)
        } else {
            (step * 4.0).clamp(1e-18, 1e18)
        };

        let q_drop = quotient - q_new;
        u = u_new;
        grad_i = grad_i_new;
        g = g_new;
        quotient = q_new;
        residual = euclid_norm(&g) / euclid_norm(&grad_i).max(f64::MIN_POSITIVE);
        trace.push(TraceRow {
            iter: it,
            quotient,
            residual,
        });

        if residual <= tol && q_drop <= tol * tol * quotient.abs().max(1.0) {
            streak += 1;
            if streak >= 2 {
                break;
            }
        } else {
            streak = 0;
        }
    }

    if residual <= tol {
        Ok(RawSolve {
            quotient,
            u,
            residual,
            iterations,
            trace,
        })
    } else {
        Err(Error::NonConvergence {
            iterations,
            residual,
            trace,
        })
    }
}

//! Discrete Gagliardo energy \[u\]_{s,alpha}^alpha on a mesh: pairwise kernel
//! weights, exterior tail weights and the normalizing constant.
//!
//! The discrete energy has the form
//!
//!   K * [ sum_{i != j} w_ij |u_i - u_j|^alpha + sum_i t_i |u_i|^alpha ]
//!
//! with w symmetric and all weights nonnegative. Cell pairs away from the
//! diagonal integrate the kernel |x-y|^{-(1+s alpha)} in closed form against
//! piecewise-constant differences; the same-segment region integrates it
//! against piecewise-linear differences (the integrand |x-y|^{alpha-1-s alpha}
//! is integrable for every s < 1); exterior tails are closed-form primitives
//! over every gap and the two unbounded tails.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::{Domain1D, Mesh, NodalFunction};
use crate::numeric::{abs_pow, pairwise_dot, pairwise_sum, signed_pow};

/// Inverse of (1/alpha) * integral over the unit sphere of |w_1|^alpha.
/// In one dimension the sphere is {-1, +1}, so the value is alpha/2.
pub fn bbm_constant(n_dim: usize, exponent: f64) -> Result<f64> {
    if n_dim != 1 {
        return Err(Error::UnsupportedDimension(n_dim));
    }
    if exponent <= 1.0 {
        return Err(Error::InvalidParameter("exponent must exceed 1".into()));
    }
    Ok(exponent / 2.0)
}

/// F(d) = (d^{1-e} - 1)/(e - 1), the cancellation-safe second primitive of the
/// kernel. Continuous through e = 1 where it equals -ln d.
#[inline]
fn rect_primitive(d: f64, e: f64) -> f64 {
    debug_assert!(d > 0.0);
    if (e - 1.0).abs() < 1e-12 {
        -d.ln()
    } else {
        ((1.0 - e) * d.ln()).exp_m1() / (e - 1.0)
    }
}

/// Ordered double integral of (y - x)^{-1-e} over [x0,x1] x [y0,y1], which
/// must be disjoint with y0 >= x1 (strict separation required when e >= 1).
fn rect_kernel_integral(x0: f64, x1: f64, y0: f64, y1: f64, e: f64) -> f64 {
    debug_assert!(x1 > x0 && y1 > y0 && y0 >= x1);
    (rect_primitive(y0 - x1, e) - rect_primitive(y0 - x0, e) - rect_primitive(y1 - x1, e)
        + rect_primitive(y1 - x0, e))
        / e
}

/// Same-segment energy integral: int over [0,w]^2 of |x-y|^{beta-1} dx dy
/// with beta = alpha (1 - s) > 0.
#[inline]
fn same_segment_integral(w: f64, beta: f64) -> f64 {
    2.0 * w.powf(beta + 1.0) / (beta * (beta + 1.0))
}

/// Corner integral int_0^A int_0^B (a + b)^{beta-1} da db, the kernel mass of
/// the two within-cell slivers straddling a node.
#[inline]
fn sliver_integral(a: f64, b: f64, beta: f64) -> f64 {
    ((a + b).powf(beta + 1.0) - a.powf(beta + 1.0) - b.powf(beta + 1.0)) / (beta * (beta + 1.0))
}

/// Exterior integral T(x) = int over R \ Omega of |x - y|^{-1-e} dy, as a
/// signed sum of the primitive d^{-e}/e over every gap and both unbounded
/// tails. x must lie inside the domain.
pub fn exterior_tail_integral(x: f64, domain: &Domain1D, e: f64) -> f64 {
    let intervals = domain.intervals();
    let prim = |d: f64| d.powf(-e) / e;
    let mut total = prim(x - intervals[0].0) + prim(intervals[intervals.len() - 1].1 - x);
    for gap in intervals.windows(2) {
        let (lo, hi) = (gap[0].1, gap[1].0);
        total += if x > hi {
            prim(x - hi) - prim(x - lo)
        } else {
            prim(lo - x) - prim(hi - x)
        };
    }
    total
}

/// Precomputed discrete Gagliardo energy for one (s, exponent) pair.
#[derive(Debug)]
pub struct GagliardoOperator {
    s: f64,
    exponent: f64,
    constant: f64,
    pair_weights: Vec<f64>,
    tail_weights: Vec<f64>,
    mesh: Arc<Mesh>,
}

/// Assembles the weight tables for the kernel |x - y|^{-(1 + s * exponent)}.
pub fn assemble(mesh: &Arc<Mesh>, s: f64, exponent: f64) -> Result<GagliardoOperator> {
    if !(0.0 < s && s < 1.0) {
        return Err(Error::InvalidParameter(format!("s = {s} outside (0, 1)")));
    }
    if exponent <= 1.0 {
        return Err(Error::InvalidParameter(format!("exponent = {exponent} must exceed 1")));
    }
    let e = s * exponent;
    let beta = exponent - e;
    let h = mesh.h();
    let n = mesh.node_count();
    let xs = mesh.nodes();
    let constant = (1.0 - s) * bbm_constant(1, exponent)?;

    // Right segment width per node: h everywhere except the trailing boundary
    // segment of each component.
    let mut right_w = vec![h; n];
    for (k, range) in mesh.components().iter().enumerate() {
        let (_, b) = mesh.component_interval(k);
        right_w[range.end - 1] = b - xs[range.end - 1];
    }

    let mut tail = vec![0.0; n];
    let mut pair = vec![0.0; n * n];

    // Same-segment (piecewise-linear) contributions and node slivers.
    for (k, range) in mesh.components().iter().enumerate() {
        let (a, b) = mesh.component_interval(k);
        let (lo, m) = (range.start, range.len());
        let ell = b - xs[lo + m - 1];
        let pow_a = |w: f64| w.powf(-exponent);

        tail[lo] += same_segment_integral(h, beta) * pow_a(h);
        tail[lo + m - 1] += same_segment_integral(ell, beta) * pow_a(ell);
        for i in 0..m.saturating_sub(1) {
            pair[(lo + i) * n + lo + i + 1] += 0.5 * same_segment_integral(h, beta) * pow_a(h);
        }

        if m >= 2 {
            for i in 0..m {
                let sliver = sliver_integral(0.5 * h, 0.5 * right_w[lo + i], beta);
                if i == 0 {
                    let span = xs[lo + 1] - a;
                    tail[lo + 1] += 2.0 * sliver * pow_a(span);
                } else if i == m - 1 {
                    let span = b - xs[lo + m - 2];
                    tail[lo + m - 2] += 2.0 * sliver * pow_a(span);
                } else {
                    let span = xs[lo + i + 1] - xs[lo + i - 1];
                    pair[(lo + i - 1) * n + lo + i + 1] += sliver * pow_a(span);
                }
            }
        }
    }

    // Cell-pair kernel integrals. For adjacent nodes the shared-segment block
    // is excluded (it already carries the exact piecewise-linear term).
    let comp = mesh.node_component();
    let cell = |i: usize| (xs[i] - 0.5 * h, xs[i] + 0.5 * right_w[i]);
    let additions: Vec<(usize, f64)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let (il, ir) = cell(i);
            (i + 1..n)
                .map(move |j| {
                    let (jl, jr) = cell(j);
                    let w = if comp[i] == comp[j] && j == i + 1 {
                        rect_kernel_integral(il, xs[i], jl, xs[j], e)
                            + rect_kernel_integral(il, xs[i], xs[j], jr, e)
                            + rect_kernel_integral(xs[i], ir, xs[j], jr, e)
                    } else {
                        rect_kernel_integral(il, ir, jl, jr, e)
                    };
                    (i * n + j, w)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    for (idx, w) in additions {
        pair[idx] += w;
    }

    // Exterior tails: midpoint in x over the node cell, exact in y.
    for i in 0..n {
        let cell_width = 0.5 * (h + right_w[i]);
        tail[i] += 2.0 * cell_width * exterior_tail_integral(xs[i], mesh.domain(), e);
    }

    // Boundary strips: the uncovered half segments next to each interval
    // endpoint, where the interpolant ramps to zero. Their interaction with
    // every node cell enters the |u_i|^alpha weights; the same-segment block
    // is already carried by the exact piecewise-linear term.
    for (k, range) in mesh.components().iter().enumerate() {
        let (a, b) = mesh.component_interval(k);
        let (lo, hi) = (range.start, range.end - 1);
        let ell = b - xs[hi];
        let strips = [
            (a, a + 0.5 * h, true),
            (b - 0.5 * ell, b, false),
        ];
        for &(s0, s1, is_left) in &strips {
            for j in 0..n {
                let (mut c0, mut c1) = (xs[j] - 0.5 * h, xs[j] + 0.5 * right_w[j]);
                if is_left && j == lo {
                    c0 = xs[j]; // right piece only; the left piece shares the strip's segment
                } else if !is_left && j == hi {
                    c1 = xs[j]; // left piece only
                }
                if c1 <= c0 {
                    continue;
                }
                let integral = if c0 >= s1 {
                    rect_kernel_integral(s0, s1, c0, c1, e)
                } else {
                    rect_kernel_integral(c0, c1, s0, s1, e)
                };
                tail[j] += 2.0 * integral;
            }
        }
    }

    // Mirror the upper triangle.
    for i in 0..n {
        for j in i + 1..n {
            pair[j * n + i] = pair[i * n + j];
        }
    }

    Ok(GagliardoOperator {
        s,
        exponent,
        constant,
        pair_weights: pair,
        tail_weights: tail,
        mesh: Arc::clone(mesh),
    })
}

impl GagliardoOperator {
    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// K(1, s, exponent) = (1 - s) * exponent / 2.
    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn pair_weight(&self, i: usize, j: usize) -> f64 {
        self.pair_weights[i * self.mesh.node_count() + j]
    }

    pub fn tail_weights(&self) -> &[f64] {
        &self.tail_weights
    }

    fn check(&self, u: &NodalFunction) {
        assert!(
            Arc::ptr_eq(u.mesh(), &self.mesh) || u.values().len() == self.mesh.node_count(),
            "nodal function lives on a different mesh"
        );
    }

    /// \[u\]_{s,alpha}^alpha. Nonnegative; zero iff u vanishes.
    pub fn seminorm_pow(&self, u: &NodalFunction) -> f64 {
        self.check(u);
        self.seminorm_pow_raw(u.values())
    }

    pub(crate) fn seminorm_pow_raw(&self, v: &[f64]) -> f64 {
        let n = self.mesh.node_count();
        let alpha = self.exponent;
        let rows: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let row = &self.pair_weights[i * n..(i + 1) * n];
                let mut acc = self.tail_weights[i] * abs_pow(v[i], alpha);
                for j in i + 1..n {
                    let w = row[j];
                    if w != 0.0 {
                        acc += 2.0 * w * abs_pow(v[i] - v[j], alpha);
                    }
                }
                acc
            })
            .collect();
        self.constant * pairwise_sum(&rows)
    }

    /// Euclidean gradient of [`Self::seminorm_pow`].
    pub fn seminorm_gradient(&self, u: &NodalFunction) -> NodalFunction {
        self.check(u);
        let mut out = NodalFunction::zeros(Arc::clone(&self.mesh));
        self.seminorm_gradient_into(u.values(), out.values_mut());
        out
    }

    pub(crate) fn seminorm_gradient_into(&self, v: &[f64], out: &mut [f64]) {
        let n = self.mesh.node_count();
        let alpha = self.exponent;
        out.par_iter_mut().enumerate().for_each(|(k, g)| {
            let row = &self.pair_weights[k * n..(k + 1) * n];
            let mut acc = self.tail_weights[k] * signed_pow(v[k], alpha);
            for j in 0..n {
                let w = row[j];
                if w != 0.0 {
                    acc += 2.0 * w * signed_pow(v[k] - v[j], alpha);
                }
            }
            *g = self.constant * alpha * acc;
        });
    }

    /// Weak pairing <A_s(u), v>: linear in v, and equal to the seminorm power
    /// at v = u. Coincides with (1/alpha) <seminorm_gradient(u), v>.
    pub fn weak_action(&self, u: &NodalFunction, v: &NodalFunction) -> f64 {
        self.check(u);
        self.check(v);
        let mut grad = vec![0.0; self.mesh.node_count()];
        self.seminorm_gradient_into(u.values(), &mut grad);
        pairwise_dot(&grad, v.values()) / self.exponent
    }

    /// Hessian-vector product of the seminorm power. Requires exponent >= 2.
    pub(crate) fn seminorm_hessian_vec(&self, u: &[f64], dir: &[f64], out: &mut [f64]) {
        assert!(self.exponent >= 2.0, "hessian only defined for exponent >= 2");
        let n = self.mesh.node_count();
        let alpha = self.exponent;
        let c = self.constant * alpha * (alpha - 1.0);
        out.par_iter_mut().enumerate().for_each(|(k, g)| {
            let row = &self.pair_weights[k * n..(k + 1) * n];
            let mut acc = self.tail_weights[k] * abs_pow(u[k], alpha - 2.0) * dir[k];
            for j in 0..n {
                let w = row[j];
                if w != 0.0 {
                    acc += 2.0 * w * abs_pow(u[k] - u[j], alpha - 2.0) * (dir[k] - dir[j]);
                }
            }
            *g = c * acc;
        });
    }

    /// Dense quadratic-form matrix A with u^T A u = seminorm_pow(u); only
    /// meaningful at exponent = 2.
    pub fn quadratic_form_matrix(&self) -> Vec<f64> {
        assert_eq!(self.exponent, 2.0, "quadratic form requires exponent 2");
        let n = self.mesh.node_count();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            let mut diag = self.tail_weights[i];
            for j in 0..n {
                if j != i {
                    let w = self.pair_weights[i * n + j];
                    diag += 2.0 * w;
                    a[i * n + j] = -2.0 * w * self.constant;
                }
            }
            a[i * n + i] = diag * self.constant;
        }
        a
    }
}

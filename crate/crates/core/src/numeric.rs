//! Deterministic reductions and power helpers.
//!
//! Every energy in this crate is a large sum; results must not depend on the
//! number of worker threads. Reductions therefore always go through
//! [`pairwise_sum`] on partials collected in index order.

/// Pairwise (tree) summation. Deterministic for a fixed slice, and much more
/// accurate than a naive left fold on long sums.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        let mut acc = 0.0;
        for &x in xs {
            acc += x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Dot product with pairwise accumulation.
pub fn pairwise_dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let terms: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
    pairwise_sum(&terms)
}

/// Euclidean norm with pairwise accumulation.
pub fn euclid_norm(a: &[f64]) -> f64 {
    pairwise_dot(a, a).sqrt()
}

/// |t|^alpha with fast paths for the common integer exponents.
#[inline]
pub fn abs_pow(t: f64, alpha: f64) -> f64 {
    if alpha == 2.0 {
        t * t
    } else if alpha == 3.0 {
        let a = t.abs();
        a * a * a
    } else {
        t.abs().powf(alpha)
    }
}

/// Signed power |t|^{alpha-2} t, the derivative kernel of |t|^alpha / alpha.
/// Continuous at t = 0 for alpha > 1 (value 0).
#[inline]
pub fn signed_pow(t: f64, alpha: f64) -> f64 {
    if alpha == 2.0 {
        t
    } else if alpha == 3.0 {
        t.abs() * t
    } else if t == 0.0 {
        0.0
    } else {
        t.abs().powf(alpha - 1.0) * t.signum()
    }
}

/// Least-squares slope of ln(y) against ln(x). Used for decay-exponent fits.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2);
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = pairwise_sum(&lx) / n;
    let my = pairwise_sum(&ly) / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in lx.iter().zip(&ly) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    sxy / sxx
}

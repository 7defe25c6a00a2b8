//! Property tests for the quadrature and operator invariants.

use std::sync::Arc;

use proptest::prelude::*;

use fracpq_core::{
    assemble, build_mesh, lp_norm_p, weighted_lp_norm_p, Domain1D, Mesh, NodalFunction, Potential,
};

fn test_mesh() -> Arc<Mesh> {
    let domain = Domain1D::new(vec![(-1.0, -0.2), (0.2, 1.0)]).unwrap();
    Arc::new(build_mesh(&domain, 10).unwrap())
}

fn nodal_values(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lp_norm_triangle_inequality(
        a in nodal_values(14),
        b in nodal_values(14),
        p in 1.5..4.0f64,
    ) {
        let mesh = test_mesh();
        let ua = NodalFunction::from_values(Arc::clone(&mesh), a.clone()).unwrap();
        let ub = NodalFunction::from_values(Arc::clone(&mesh), b.clone()).unwrap();
        let sum = NodalFunction::from_values(
            Arc::clone(&mesh),
            a.iter().zip(&b).map(|(x, y)| x + y).collect(),
        )
        .unwrap();
        let lhs = lp_norm_p(&sum, p).powf(1.0 / p);
        let rhs = lp_norm_p(&ua, p).powf(1.0 / p) + lp_norm_p(&ub, p).powf(1.0 / p);
        prop_assert!(lhs <= rhs + 1e-12 * rhs.max(1.0));
    }

    #[test]
    fn weighted_norm_scales_linearly_in_the_weight(
        vals in nodal_values(14),
        weights in nodal_values(14),
        c in prop::sample::select(vec![0.5, 1.0, 2.0, 3.0, 0.25, 7.0]),
        p in 1.5..4.0f64,
    ) {
        let mesh = test_mesh();
        // keep the positivity set nonempty
        let mut w = weights;
        w[0] = w[0].abs().max(0.5);
        let u = NodalFunction::from_values(Arc::clone(&mesh), vals).unwrap();
        let v = Potential::new(&mesh, w.clone()).unwrap();
        let cv = Potential::new(&mesh, w.iter().map(|x| c * x).collect()).unwrap();
        let lhs = weighted_lp_norm_p(&u, &cv, p);
        let rhs = c * weighted_lp_norm_p(&u, &v, p);
        prop_assert!((lhs - rhs).abs() <= 1e-13 * rhs.abs().max(1e-12));
    }

    #[test]
    fn seminorm_homogeneity_and_contraction(
        vals in nodal_values(14),
        c in -4.0..4.0f64,
        s in 0.2..0.9f64,
        alpha in 1.5..3.5f64,
    ) {
        let mesh = test_mesh();
        let op = assemble(&mesh, s, alpha).unwrap();
        let u = NodalFunction::from_values(Arc::clone(&mesh), vals.clone()).unwrap();
        let base = op.seminorm_pow(&u);
        prop_assert!(base >= 0.0);

        let scaled = op.seminorm_pow(&u.scaled(c));
        let expect = c.abs().powf(alpha) * base;
        prop_assert!((scaled - expect).abs() <= 1e-11 * expect.abs().max(1e-12));

        let abs_u = NodalFunction::from_values(
            Arc::clone(&mesh),
            vals.iter().map(|v| v.abs()).collect(),
        )
        .unwrap();
        prop_assert!(op.seminorm_pow(&abs_u) <= base * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn weak_action_diagonal_identity(
        vals in nodal_values(14),
        s in 0.2..0.9f64,
        alpha in 1.5..3.5f64,
    ) {
        let mesh = test_mesh();
        let op = assemble(&mesh, s, alpha).unwrap();
        let u = NodalFunction::from_values(Arc::clone(&mesh), vals).unwrap();
        let lhs = op.weak_action(&u, &u);
        let rhs = op.seminorm_pow(&u);
        prop_assert!((lhs - rhs).abs() <= 1e-11 * rhs.max(1e-12));
    }

    #[test]
    fn weak_operator_monotone(
        a in nodal_values(14),
        b in nodal_values(14),
        s in 0.2..0.9f64,
        alpha in 1.5..3.5f64,
    ) {
        let mesh = test_mesh();
        let op = assemble(&mesh, s, alpha).unwrap();
        let ua = NodalFunction::from_values(Arc::clone(&mesh), a.clone()).unwrap();
        let ub = NodalFunction::from_values(Arc::clone(&mesh), b.clone()).unwrap();
        let diff = NodalFunction::from_values(
            Arc::clone(&mesh),
            a.iter().zip(&b).map(|(x, y)| x - y).collect(),
        )
        .unwrap();
        let gap = op.weak_action(&ua, &diff) - op.weak_action(&ub, &diff);
        prop_assert!(gap >= -1e-11 * (1.0 + gap.abs()));
    }
}

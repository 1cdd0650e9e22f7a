use fkmg::analysis::mu_decomposition;
use fkmg::coarsen::{closed_form_coeffs, closed_form_tridiag, galerkin_step, galerkin_step_2d, ClosedFormConstants};
use fkmg::transfer::{dense_prolongation, dense_restriction};
use fkmg::{SymmetricToeplitzStencil, TensorOperator2D};
use nalgebra::DMatrix;
use proptest::prelude::*;

/// `R A P` applied `k - 1` times to the dense `(2^K - 1)`-point matrix.
fn dense_chain(a: &SymmetricToeplitzStencil, depth: u32) -> Vec<DMatrix<f64>> {
    let mut m = (1usize << depth) - 1;
    let mut mats = vec![a.to_dense(m)];
    while m > 1 {
        let last = mats.last().unwrap();
        let next = dense_restriction(m).unwrap() * last * dense_prolongation((m - 1) / 2).unwrap();
        m = (m - 1) / 2;
        mats.push(next);
    }
    mats
}

fn rel_max(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max() / b.abs().max()
}

fn spd_tridiag() -> impl Strategy<Value = (f64, f64)> {
    (0.1f64..10.0, -0.5f64..0.5).prop_map(|(a0, r)| (a0, r * a0 * 0.999))
}

#[test]
fn dense_triple_product_example() {
    let d = dense_chain(&SymmetricToeplitzStencil::tridiagonal(2.0, 1.0), 3);
    let want = SymmetricToeplitzStencil::tridiagonal(2.5, 0.75).to_dense(3);
    assert!(rel_max(&d[1], &want) < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn recursion_closed_form_and_dense_product_agree((a0, a1) in spd_tridiag()) {
        let depth = 6;
        let dense = dense_chain(&SymmetricToeplitzStencil::tridiagonal(a0, a1), depth);
        let mut s = SymmetricToeplitzStencil::tridiagonal(a0, a1);
        for k in 1..=depth {
            let size = (1usize << (depth - k + 1)) - 1;
            let closed = closed_form_tridiag(a0, a1, k);
            prop_assert!(s.is_tridiagonal());
            prop_assert!(rel_max(&s.to_dense(size), &closed.to_dense(size)) <= 1e-12);
            prop_assert!(rel_max(&dense[(k - 1) as usize], &closed.to_dense(size)) <= 1e-12);
            s = galerkin_step(&s);
        }
    }

    #[test]
    fn galerkin_preserves_strict_dominance((a0, a1) in spd_tridiag()) {
        let mut s = SymmetricToeplitzStencil::tridiagonal(a0, a1);
        for _ in 0..8 {
            s = galerkin_step(&s);
            prop_assert!(s.band(0) > 2.0 * s.band(1).abs());
        }
    }

    #[test]
    fn decomposition_reconstructs_closed_form((a0, a1) in spd_tridiag(), k in 1u32..12) {
        let (mu1, mu2) = mu_decomposition(a0, a1, k);
        prop_assert!(mu1 > 0.0 && mu2 >= 0.0);
        let s = closed_form_tridiag(a0, a1, k);
        let tol = 1e-14 * s.band(0);
        prop_assert!((2.0 * mu1 + 2.0 * mu2 - s.band(0)).abs() <= tol);
        prop_assert!((mu2 - mu1 - s.band(1)).abs() <= tol);
    }

    #[test]
    fn wide_stencils_match_dense_product(bands in prop::collection::vec(-1.0f64..1.0, 2..6)) {
        let mut b = bands.clone();
        b[0] = 8.0;
        let s = SymmetricToeplitzStencil::new(b).unwrap();
        let m = 31;
        let rap = dense_restriction(m).unwrap() * s.to_dense(m) * dense_prolongation(15).unwrap();
        let coarse = galerkin_step(&s).to_dense(15);
        prop_assert!((rap - coarse).abs().max() <= 1e-13);
    }
}

#[test]
fn coefficient_tables_reproduce_recursion() {
    let fine: Vec<f64> = (0..40).map(|m| ((m * 37 % 11) as f64 - 5.0) / (m as f64 + 1.0)).collect();
    for k in 2..=6u32 {
        let table = closed_form_coeffs(k).unwrap();
        let mut s = SymmetricToeplitzStencil::new(fine.clone()).unwrap();
        for _ in 1..k {
            s = galerkin_step(&s);
        }
        let scale = 8f64.powi(k as i32 - 1);
        for j in 0..=(1usize << k) {
            let want = s.band(j) * scale;
            let got = table.evaluate(&fine, j);
            assert!((got - want).abs() <= 1e-11 * want.abs().max(1.0), "k={k} j={j}: {got} vs {want}");
        }
        assert_eq!(table.coarse_stencil(&fine).bands().len(), s.bands().len());
    }
}

#[test]
fn closed_form_constants_invariants() {
    for k in 1..30 {
        let t = ClosedFormConstants::new(k);
        assert!(t.theta1 > 0.0 && t.theta2 > 0.0 && t.theta3 >= 0.0);
        let i = closed_form_tridiag(1.0, 0.0, k);
        assert!((i.band(0) - (t.theta1 + 2.0 * t.theta3)).abs() < 1e-15);
        assert!((i.band(1) - t.theta3).abs() < 1e-15);
    }
}

#[test]
fn two_dimensional_galerkin_matches_dense_kronecker_product() {
    let fine = TensorOperator2D::laplacian_model(0.37, 1.9);
    let coarse = galerkin_step_2d(&fine);
    let (c1, c2, mass, stiff) = coarse.as_model().expect("three-term form is preserved");
    assert_eq!((c1, c2), (0.37, 1.9));
    assert_eq!(mass.bands(), &[0.75, 0.125]);
    assert_eq!(stiff.bands(), &[0.5, -0.25]);

    let r = dense_restriction(7).unwrap();
    let p = dense_prolongation(3).unwrap();
    let r2 = r.kronecker(&r);
    let p2 = p.kronecker(&p);
    let rap = r2 * fine.to_dense(7) * p2;
    assert!((rap - coarse.to_dense(3)).abs().max() < 1e-12);
}

#[test]
fn pure_laplacian_sum_scales_by_theta2() {
    let mut op = TensorOperator2D::laplacian_model(0.0, 1.0);
    for k in 2..6 {
        op = galerkin_step_2d(&op);
        let t = ClosedFormConstants::new(k);
        let stiff = &op.terms()[1].inner;
        assert!((stiff.band(0) - 2.0 * t.theta2).abs() < 1e-15);
        assert!((stiff.band(1) + t.theta2).abs() < 1e-15);
    }
}

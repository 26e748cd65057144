mod common;

use common::{naive_matvec, rng, simpson};
use frontera::discretization::{
    apply, assemble_operator, kernel_weights, min_off_diagonal, DriftSign, Grid1D,
};
use frontera::KernelSpec;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

fn kernel_strategy() -> impl Strategy<Value = KernelSpec> {
    prop_oneof![
        (-1.0f64..0.0, 0.05f64..1.5).prop_map(|(lo, w)| KernelSpec::uniform(lo, lo + w).unwrap()),
        (0.5f64..6.0, 0.5f64..6.0, 0.0f64..=1.0)
            .prop_map(|(l, r, w)| KernelSpec::asymmetric_laplace(l, r, w).unwrap()),
        (-0.5f64..0.5, 0.05f64..1.0).prop_map(|(m, s)| KernelSpec::shifted_gaussian(m, s).unwrap()),
    ]
}

#[test]
fn row_sums_against_interval_mass() {
    let grid = Grid1D::new(-5.0, 5.0, 200).unwrap();
    let k = KernelSpec::uniform(-0.5, 0.5).unwrap();
    let n = grid.len();
    let op = assemble_operator(&grid, 1.0, &k, &vec![0.0; n], &vec![0.0; n], DriftSign::Plus).unwrap();
    let row_sum = |i: usize| op.entries.row(i).sum();
    let oracle = |i: usize| {
        let x = grid.center(i);
        -(1.0 - k.interval_mass(x - grid.xmax(), x - grid.xmin()))
    };
    assert!(row_sum(100).abs() < 2e-3);
    assert!(oracle(100).abs() < 1e-15);
    assert!((grid.center(0) + 4.975).abs() < 1e-12);
    assert!((row_sum(0) + 0.475).abs() < 2e-2, "{}", row_sum(0));
    assert!((oracle(0) + 0.475).abs() < 1e-12);
}

#[test]
fn matvec_against_double_loop() {
    let mut r = rng(7);
    let m = DMatrix::from_fn(5, 5, |_, _| r.random_range(-2.0..2.0));
    let x: Vec<f64> = (0..5).map(|_| r.random_range(-1.0..1.0)).collect();
    let fast = apply(&m, &x).unwrap();
    for (a, b) in fast.iter().zip(naive_matvec(&m, &x)) {
        assert!((a - b).abs() < 1e-13);
    }
    assert_eq!(
        apply(&DMatrix::from_diagonal_element(3, 3, 0.3), &[1.0, 2.0, 3.0]).unwrap(),
        vec![0.3, 0.3 * 2.0, 0.3 * 3.0]
    );
    assert_eq!(apply(&DMatrix::zeros(2, 2), &[4.0, 5.0]).unwrap(), vec![0.0, 0.0]);
}

#[test]
fn drift_rows_are_conservative() {
    let grid = Grid1D::new(0.0, 1.0, 20).unwrap();
    let k = KernelSpec::uniform(-0.5, 0.5).unwrap();
    for (p, sign) in [(0.7, DriftSign::Plus), (0.7, DriftSign::Minus), (-0.4, DriftSign::Plus)] {
        let op = assemble_operator(&grid, 0.0, &k, &[p; 20], &[0.0; 20], sign).unwrap();
        let edge = if p * sign.factor() > 0.0 { 19 } else { 0 };
        for i in 0..20 {
            let s = op.entries.row(i).sum();
            if i == edge {
                assert!((s + p.abs() / grid.dx()).abs() < 1e-12, "row {i}: {s}");
            } else {
                assert_eq!(s, 0.0, "row {i}");
            }
        }
    }
}

#[test]
fn refinement_order() {
    // L[cos] on (-1, 1) with a Gaussian kernel, d = 1, p = 0.3, c = 0.2.
    let k = KernelSpec::shifted_gaussian(0.1, 0.3).unwrap();
    let (d, p, c) = (1.0, 0.3, 0.2);
    let exact = |x: f64| {
        let conv = simpson(&|y: f64| k.evaluate(x - y) * y.cos(), -1.0, 1.0, 1e-13);
        d * (conv - x.cos()) - p * x.sin() + c * x.cos()
    };
    let error = |n: usize| {
        let grid = Grid1D::new(-1.0, 1.0, n).unwrap();
        let op = assemble_operator(&grid, d, &k, &vec![p; n], &vec![c; n], DriftSign::Plus).unwrap();
        let phi: Vec<f64> = grid.centers().iter().map(|x| x.cos()).collect();
        let got = op.apply(&phi).unwrap();
        grid.centers()
            .iter()
            .enumerate()
            .filter(|(_, x)| x.abs() <= 0.5)
            .map(|(i, x)| (got[i] - exact(*x)).abs())
            .fold(0.0, f64::max)
    };
    let errs: Vec<f64> = [50, 100, 200, 400].iter().map(|n| error(*n)).collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 0.9, "orders from {errs:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn assembled_operators_are_metzler_and_leaky(
        k in kernel_strategy(),
        d in 0.0f64..3.0,
        n in 3usize..60,
        drift in proptest::collection::vec(-2.0f64..2.0, 60),
        zeroth in proptest::collection::vec(-2.0f64..2.0, 60),
        minus in any::<bool>(),
    ) {
        let grid = Grid1D::new(-1.0, 1.5, n).unwrap();
        let sign = if minus { DriftSign::Minus } else { DriftSign::Plus };
        let op = assemble_operator(&grid, d, &k, &drift[..n], &zeroth[..n], sign).unwrap();
        prop_assert!(op.min_off_diagonal() >= 0.0);
        prop_assert!(min_off_diagonal(&op.entries) >= 0.0);
        // Midpoint-rule defect of the kernel on the whole lattice dx·Z.
        let dx = grid.dx();
        let reach = (40.0 / dx) as i64 + 2000;
        let lattice: f64 = (-reach..=reach).map(|j| k.evaluate(j as f64 * dx) * dx).sum();
        let tol = (lattice - 1.0).abs() + 1e-12;
        let w = kernel_weights(&grid, &k);
        for i in 0..n {
            let s: f64 = w.row(i).sum();
            prop_assert!(s <= 1.0 + 5.0 * tol, "row {} sums to {} (tol {})", i, s, tol);
        }
    }

    #[test]
    fn restriction_matches_subinterval_assembly(
        k in kernel_strategy(),
        d in 0.0f64..3.0,
        drift in proptest::collection::vec(-2.0f64..2.0, 40),
        zeroth in proptest::collection::vec(-2.0f64..2.0, 40),
        lo in 0usize..20,
        len in 3usize..20,
    ) {
        let grid = Grid1D::new(-2.0, 2.0, 40).unwrap();
        let hi = lo + len - 1;
        let full = assemble_operator(&grid, d, &k, &drift, &zeroth, DriftSign::Plus).unwrap();
        let sub = grid.subgrid(lo, hi).unwrap();
        let part = assemble_operator(&sub, d, &k, &drift[lo..=hi], &zeroth[lo..=hi], DriftSign::Plus).unwrap();
        let block = full.entries.view((lo, lo), (len, len));
        prop_assert_eq!(block.clone_owned(), part.entries);
    }
}

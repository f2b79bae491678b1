use std::f64::consts::PI;

use nalgebra::DMatrix;
use proptest::prelude::*;
use tubeq_core::geometry::{Axis, SampleGrid};
use tubeq_core::linalg::Matrix;
use tubeq_core::operators::{half_density_transform, laplace_beltrami, DiscreteOperator, FnMetric, Gauge};
use tubeq_core::spectra::{eigen_lowest, weighted_inner_product};
use tubeq_core::Error;

/// Periodic Schrödinger matrix −u'' + V with a given potential.
fn periodic_schrodinger(potential: &[f64]) -> DiscreteOperator {
    let n = potential.len();
    let h = 2.0 * PI / n as f64;
    let c = 1.0 / (h * h);
    let mut t = Vec::new();
    for (i, v) in potential.iter().enumerate() {
        t.push((i, i, 2.0 * c + v));
        t.push((i, (i + 1) % n, -c));
        t.push(((i + 1) % n, i, -c));
    }
    let grid = SampleGrid::new(vec![Axis::new(n, 0.0, 2.0 * PI, true)]).unwrap();
    DiscreteOperator::new(grid, Matrix::sparse_from_triplets(n, &t), Gauge::HalfDensity, vec![1.0; n]).unwrap()
}

fn oracle(op: &DiscreteOperator) -> Vec<f64> {
    let n = op.dim();
    let mut ev: Vec<f64> = DMatrix::from_row_slice(n, n, &op.matrix().to_dense()).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn dense_path_matches_nalgebra(seed in proptest::collection::vec(-3.0f64..3.0, 60..120)) {
        let op = periodic_schrodinger(&seed);
        let s = eigen_lowest(&op, 8).unwrap();
        let reference = oracle(&op);
        for (x, y) in s.eigenvalues().iter().zip(&reference) {
            prop_assert!((x - y).abs() <= 1e-9 * y.abs().max(1.0));
        }
        prop_assert!(s.orthonormality_defect() <= 1e-10);
    }

    #[test]
    fn dirichlet_eigenvalues_grow_as_the_interval_shrinks(short in 0.3f64..0.95) {
        let lowest = |len: f64| {
            let grid = SampleGrid::new(vec![Axis::new(48, 0.0, len, false)]).unwrap();
            let metric = FnMetric::new(1, |p: &[f64]| vec![1.0 + 0.5 * p[0]]);
            let op = half_density_transform(&laplace_beltrami(&metric, &grid).unwrap()).unwrap().scaled(-1.0);
            eigen_lowest(&op, 3).unwrap().eigenvalues().to_vec()
        };
        let (inner, outer) = (lowest(short), lowest(1.0));
        prop_assert!(inner.iter().zip(&outer).all(|(a, b)| a > b));
    }

    #[test]
    fn full_decomposition_satisfies_parseval(u in proptest::collection::vec(-1.0f64..1.0, 40)) {
        let grid = SampleGrid::new(vec![Axis::new(40, 0.0, 2.0 * PI, true)]).unwrap();
        let metric = FnMetric::new(1, |p: &[f64]| vec![1.2 + p[0].sin()]);
        let op = laplace_beltrami(&metric, &grid).unwrap().scaled(-1.0);
        let s = eigen_lowest(&op, 40).unwrap();
        let norm = weighted_inner_product(&u, &u, &op).unwrap().re;
        let captured: f64 = s.eigenvectors().iter().map(|v| weighted_inner_product(v, &u, &op).unwrap().norm_sqr()).sum();
        prop_assert!((norm - captured).abs() <= 1e-8 * norm.max(1e-300));
    }
}

#[test]
fn lanczos_path_matches_nalgebra() {
    let n = 720;
    let potential: Vec<f64> = (0..n).map(|i| 2.0 * (3.0 * i as f64 * 2.0 * PI / n as f64).cos() + (i % 7) as f64 * 0.01).collect();
    let op = periodic_schrodinger(&potential);
    let s = eigen_lowest(&op, 10).unwrap();
    let reference = oracle(&op);
    for (x, y) in s.eigenvalues().iter().zip(&reference) {
        assert!((x - y).abs() <= 1e-8 * y.abs().max(1.0), "{x} vs {y}");
    }
    assert!(s.max_relative_residual() <= 1e-8);
}

#[test]
fn degenerate_pairs_are_complete() {
    let n = 900;
    let op = periodic_schrodinger(&vec![0.0; n]);
    let s = eigen_lowest(&op, 7).unwrap();
    let h = 2.0 * PI / n as f64;
    let mode = |m: f64| (2.0 - 2.0 * (m * h).cos()) / (h * h);
    let expected = [0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0].map(mode);
    for (x, y) in s.eigenvalues().iter().zip(&expected) {
        assert!((x - y).abs() < 1e-8, "{x} vs {y}");
    }
}

#[test]
fn asymmetric_matrices_are_rejected() {
    let grid = SampleGrid::new(vec![Axis::new(10, 0.0, 1.0, true)]).unwrap();
    let m = Matrix::from_triplets(10, &[(0, 1, 1.0), (1, 0, 2.0)]);
    let op = DiscreteOperator::new(grid, m, Gauge::HalfDensity, vec![1.0; 10]).unwrap();
    assert!(matches!(eigen_lowest(&op, 2), Err(Error::NotSymmetric { .. })));
}

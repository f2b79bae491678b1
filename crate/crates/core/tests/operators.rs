use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use tubeq_core::geometry::{Axis, SampleGrid};
use tubeq_core::operators::{
    adjoint, beltrami_sa_expansion, half_density_transform, laplace_beltrami, momentum_operator, raw_transform, FnMetric,
    Gauge,
};

fn metric_from(a: f64, b: f64, phase: f64) -> FnMetric<impl Fn(&[f64]) -> Vec<f64> + Sync> {
    FnMetric::new(1, move |p: &[f64]| vec![(a * (p[0] + phase).sin() + b * (2.0 * p[0]).cos()).exp()])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn laplacian_is_self_adjoint_in_both_gauges(a in -0.5f64..0.5, b in -0.3f64..0.3, phase in 0.0f64..6.0, n in 16usize..80) {
        let grid = SampleGrid::new(vec![Axis::new(n, 0.0, 2.0 * PI, true)]).unwrap();
        let metric = metric_from(a, b, phase);
        let raw = laplace_beltrami(&metric, &grid).unwrap();
        prop_assert!(raw.self_adjointness_residual() <= 1e-10);
        prop_assert!(raw.apply(&vec![1.0; n]).iter().all(|v| v.abs() <= 1e-9));
        let half = half_density_transform(&raw).unwrap();
        prop_assert_eq!(half.gauge(), Gauge::HalfDensity);
        prop_assert!(half.matrix().symmetry_residual() <= 1e-12);
        let back = raw_transform(&half).unwrap();
        prop_assert!(back.matrix().frobenius_distance(raw.matrix()) <= 1e-12 * raw.matrix().frobenius_norm());
    }

    #[test]
    fn momentum_is_self_adjoint_and_adjoint_is_an_involution(a in -0.5f64..0.5, b in -0.3f64..0.3, phase in 0.0f64..6.0) {
        let grid = SampleGrid::new(vec![Axis::new(40, 0.0, 2.0 * PI, true)]).unwrap();
        let p = momentum_operator(0, &metric_from(a, b, phase), &grid).unwrap();
        prop_assert!(p.self_adjointness_residual() <= 1e-10);
        let twice = adjoint(&adjoint(&p));
        prop_assert!(twice.matrix().frobenius_distance(p.matrix()) <= 1e-14 * p.matrix().frobenius_norm());
    }
}

/// Δ cos s for g = exp(a sin s): with w = g^{-1/2}, Δf = w (w f')'.
fn exact_laplacian(s: f64, a: f64) -> f64 {
    let w = (-0.5 * a * s.sin()).exp();
    let dw = -0.5 * a * s.cos() * w;
    w * (dw * -s.sin() + w * -s.cos())
}

fn laplacian_errors(n: usize, a: f64) -> (f64, f64) {
    let grid = SampleGrid::new(vec![Axis::new(n, 0.0, 2.0 * PI, true)]).unwrap();
    let metric = FnMetric::new(1, move |p: &[f64]| vec![(a * p[0].sin()).exp()]);
    let f: Vec<f64> = (0..n).map(|i| grid.params(i)[0].cos()).collect();
    let exact: Vec<f64> = (0..n).map(|i| exact_laplacian(grid.params(i)[0], a)).collect();
    let err = |values: Vec<f64>| values.iter().zip(&exact).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let flux = laplace_beltrami(&metric, &grid).unwrap().apply(&f);
    let expanded = beltrami_sa_expansion(&metric, &grid).unwrap().apply(&f);
    (err(flux), err(expanded))
}

#[test]
fn both_laplacians_converge_at_second_order() {
    let a = 0.4;
    let coarse = laplacian_errors(64, a);
    let fine = laplacian_errors(128, a);
    for ratio in [coarse.0 / fine.0, coarse.1 / fine.1] {
        assert!((3.6..=4.4).contains(&ratio), "{ratio}");
    }
}

#[test]
fn radial_momentum_carries_half_inverse_radius() {
    let grid = SampleGrid::new(vec![Axis::new(50, 0.5, 4.0, false)]).unwrap();
    let radial = FnMetric::new(1, |p: &[f64]| vec![p[0] * p[0]]);
    let p = momentum_operator(0, &radial, &grid).unwrap();
    let out = p.apply(&vec![Complex64::new(1.0, 0.0); 50]);
    for (node, value) in out.iter().enumerate().take(49).skip(1) {
        let r = grid.params(node)[0];
        assert!((value - Complex64::new(0.0, 0.5 / r)).norm() < 1e-12);
    }
}

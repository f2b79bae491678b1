use proptest::prelude::*;
use tubeq_core::frames::{build_frames, connection_coefficients, curvature_data, hashimoto_rotate};
use tubeq_core::geometry::{catalog_shape, Boundary, SampleGrid};
use tubeq_core::tubular::effective_potential;

fn cross(a: &[f64], b: &[f64]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn helix_frames_reproduce_frenet_serret(a in 0.5f64..4.0, b in 0.2f64..4.0) {
        let e = catalog_shape("helix", &[a, b]).unwrap();
        let grid = SampleGrid::on_domain(e.domain(), &[40], Boundary::Dirichlet).unwrap();
        let frames = build_frames(&e, &grid).unwrap();
        let coeffs = connection_coefficients(&e, &frames).unwrap();
        let data = curvature_data(&e, &frames, &coeffs).unwrap();
        let c = data.as_curve().unwrap();
        for node in 0..grid.len() {
            let jet = e.jet(&grid.params(node), 3).unwrap();
            let (d1, d2, d3) = (jet.first(0), jet.second(0, 0), jet.third(0, 0, 0));
            let w = cross(d1, d2);
            let speed = dot(d1, d1).sqrt();
            let kappa = dot(&w, &w).sqrt() / speed.powi(3);
            let tau = dot(&w, d3) / dot(&w, &w);
            prop_assert!((c.kappa_c_frame[node].norm() - kappa).abs() <= 1e-7);
            prop_assert!((c.torsion[node] - tau).abs() <= 1e-7);
        }
        prop_assert!(coeffs.weingarten_relation_defect(&frames) <= 1e-9);
        let (_, rotated) = hashimoto_rotate(&coeffs, &frames).unwrap();
        prop_assert!(rotated.max_normal_connection() <= 1e-8);
        let (v0, v1) = (effective_potential(&coeffs), effective_potential(&rotated));
        prop_assert!(v0.iter().zip(&v1).all(|(x, y)| (x - y).abs() <= 1e-9));
    }
}

#[test]
fn torus_curvatures_match_closed_forms() {
    let (major, minor) = (2.0, 0.7);
    let e = catalog_shape("torus", &[major, minor]).unwrap();
    let grid = SampleGrid::on_domain(e.domain(), &[16, 24], Boundary::Periodic).unwrap();
    let frames = build_frames(&e, &grid).unwrap();
    let coeffs = connection_coefficients(&e, &frames).unwrap();
    let data = curvature_data(&e, &frames, &coeffs).unwrap();
    let s = data.as_surface().unwrap();
    for node in 0..grid.len() {
        let v = grid.params(node)[1];
        let rho = major + minor * v.cos();
        let gauss = v.cos() / (minor * rho);
        let mean = (major + 2.0 * minor * v.cos()) / (2.0 * minor * rho);
        assert!((s.gauss[node] - gauss).abs() < 1e-10);
        assert!((s.mean[node].abs() - mean).abs() < 1e-10);
    }
    assert!(coeffs.second_form_asymmetry() < 1e-10);
    assert!(coeffs.antisymmetry_defect() < 1e-10);
}

#[test]
fn flat_torus_in_four_space_has_no_gauss_curvature() {
    let e = catalog_shape("flat_torus4", &[1.0]).unwrap();
    let grid = SampleGrid::on_domain(e.domain(), &[12, 12], Boundary::Periodic).unwrap();
    let frames = build_frames(&e, &grid).unwrap();
    let coeffs = connection_coefficients(&e, &frames).unwrap();
    let data = curvature_data(&e, &frames, &coeffs).unwrap();
    assert!(data.as_surface().unwrap().gauss.iter().all(|k| k.abs() < 1e-10));
}

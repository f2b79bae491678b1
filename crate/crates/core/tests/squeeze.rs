use tubeq_core::geometry::{catalog_shape, Boundary, SampleGrid};
use tubeq_core::operators::submanifold_hamiltonian;
use tubeq_core::spectra::eigen_lowest;
use tubeq_core::squeeze::{
    default_epsilons, squeeze, squeeze_extrapolate, transverse_ground_energy, tube_dirichlet_spectrum, TubeResolution,
};

fn effective_levels(name: &str, params: &[f64], n: usize, boundary: Boundary) -> Vec<f64> {
    let e = catalog_shape(name, params).unwrap();
    let grid = SampleGrid::on_domain(e.domain(), &[n], boundary).unwrap();
    eigen_lowest(&submanifold_hamiltonian(&e, &grid).unwrap(), 3).unwrap().eigenvalues().to_vec()
}

fn assert_agreement(name: &str, params: &[f64], along: usize, across: usize, boundary: Boundary) {
    let e = catalog_shape(name, params).unwrap();
    let eps = default_epsilons(&e, along).unwrap();
    let run = squeeze(&e, &eps, TubeResolution { along, across, levels: 3 }).unwrap();
    let limits = squeeze_extrapolate(&run).unwrap();
    let reference = effective_levels(name, params, along, boundary);
    for (x, r) in limits.iter().zip(&reference) {
        let tolerance = (3.0 * x.error_estimate).max(1e-2);
        assert!((x.limit - r).abs() <= tolerance, "{name} level {}: {} vs {r}", x.level, x.limit);
    }
}

#[test]
fn ellipse_tube_matches_effective_operator() {
    assert_agreement("ellipse", &[1.5, 1.0], 256, 16, Boundary::Periodic);
}

#[test]
fn helix_tube_matches_effective_operator() {
    assert_agreement("helix", &[3.0, 4.0], 48, 16, Boundary::Dirichlet);
}

#[test]
fn subtracted_levels_stay_bounded() {
    let circle = catalog_shape("circle", &[1.0]).unwrap();
    let r = TubeResolution { along: 128, across: 16, levels: 1 };
    let levels: Vec<f64> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&eps| {
            let t = tube_dirichlet_spectrum(&circle, eps, r).unwrap();
            assert!(t.eigenvalues[0] > 0.9 * transverse_ground_energy(eps, 1));
            t.subtracted()[0]
        })
        .collect();
    assert!(levels.iter().all(|e| (-0.3..-0.2).contains(e)));
    // approaching −1/4 from below
    assert!(levels.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn default_schedule_is_a_fraction_of_the_focal_radius() {
    let circle = catalog_shape("circle", &[2.0]).unwrap();
    let eps = default_epsilons(&circle, 64).unwrap();
    assert_eq!(eps.len(), 3);
    for (e, f) in eps.iter().zip([0.2, 0.1, 0.05]) {
        assert!((e - 2.0 * f).abs() < 1e-9);
    }
}

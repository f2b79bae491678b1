//! Invariant suite: every module's structural identities evaluated on small
//! deterministic problems, reported as a pass/fail table.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::frames::{build_frames, connection_coefficients, curvature_data, hashimoto_rotate, ConnectionCoefficients, FrameField};
use crate::geometry::{catalog_shape, jets_fd, sampled_curve, Axis, Boundary, Embedding, SampleGrid};
use crate::linalg::symmetric_eigen;
use crate::math;
use crate::operators::{half_density_transform, laplace_beltrami, momentum_operator, submanifold_hamiltonian, FnMetric};
use crate::spectra::{eigen_lowest, weighted_inner_product};
use crate::squeeze::{squeeze, squeeze_extrapolate, TubeResolution};
use crate::tubular::{effective_potential, tube_metric};
use crate::Result;

/// One row of the table.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub module: &'static str,
    pub name: &'static str,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub passed: bool,
    /// Error message when the computation itself failed.
    pub failure: Option<String>,
}

impl Check {
    fn between(module: &'static str, name: &'static str, value: Result<f64>, lower: f64, upper: f64) -> Check {
        match value {
            Ok(v) => Check {
                module,
                name,
                value: v,
                lower,
                upper,
                passed: v >= lower && v <= upper,
                failure: None,
            },
            Err(e) => Check {
                module,
                name,
                value: f64::NAN,
                lower,
                upper,
                passed: false,
                failure: Some(format!("{e}")),
            },
        }
    }

    fn at_most(module: &'static str, name: &'static str, value: Result<f64>, bound: f64) -> Check {
        Check::between(module, name, value, f64::NEG_INFINITY, bound)
    }
}

/// Runs the whole suite.
pub fn run_checks() -> Vec<Check> {
    let mut out = Vec::new();
    out.extend(geometry_checks());
    out.extend(frame_checks());
    out.extend(tubular_checks());
    out.extend(operator_checks());
    out.extend(spectra_checks());
    out.extend(squeeze_checks());
    out
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

/// Deterministic points spread over a domain (Weyl sequence).
fn sample_points(embedding: &Embedding, count: usize) -> Vec<Vec<f64>> {
    const ALPHA: [f64; 2] = [0.618_033_988_749_894_9, 0.754_877_666_246_692_7];
    let dom = embedding.domain();
    (1..=count)
        .map(|i| {
            dom.iter()
                .enumerate()
                .map(|(a, d)| {
                    let t = (i as f64 * ALPHA[a]) % 1.0;
                    d.lo + (0.05 + 0.9 * t) * d.length()
                })
                .collect()
        })
        .collect()
}

fn setup(name: &str, params: &[f64], counts: &[usize], boundary: Boundary) -> Result<(Embedding, SampleGrid, FrameField, ConnectionCoefficients)> {
    let embedding = catalog_shape(name, params)?;
    let grid = SampleGrid::on_domain(embedding.domain(), counts, boundary)?;
    let frames = build_frames(&embedding, &grid)?;
    let coeffs = connection_coefficients(&embedding, &frames)?;
    Ok((embedding, grid, frames, coeffs))
}

fn geometry_checks() -> Vec<Check> {
    let fd = || -> Result<f64> {
        let shapes: [(&str, &[f64]); 6] = [
            ("circle", &[1.0]),
            ("ellipse", &[2.0, 1.0]),
            ("helix", &[3.0, 4.0]),
            ("torus", &[2.0, 1.0]),
            ("sphere", &[2.0]),
            ("flat_torus4", &[1.0]),
        ];
        let mut worst: f64 = 0.0;
        for (name, params) in shapes {
            let e = catalog_shape(name, params)?;
            for p in sample_points(&e, 20) {
                let exact = e.jet(&p, 2)?;
                worst = worst.max(jets_fd(&e, &p, 2)?.relative_difference(&exact, 2));
            }
        }
        Ok(worst)
    };
    let reparam = || -> Result<f64> {
        let n = 128;
        let kappa = |phase: f64| -> Result<Vec<f64>> {
            let s: Vec<f64> = (0..=n).map(|i| 2.0 * PI * i as f64 / n as f64).collect();
            let pts: Vec<Vec<f64>> = s.iter().map(|&t| vec![math::cos(t + phase), math::sin(t + phase)]).collect();
            let e = sampled_curve(&s, &pts)?;
            let grid = SampleGrid::on_domain(e.domain(), &[64], Boundary::Periodic)?;
            let frames = build_frames(&e, &grid)?;
            let coeffs = connection_coefficients(&e, &frames)?;
            let data = curvature_data(&e, &frames, &coeffs)?;
            Ok(data.as_curve().map(|c| c.kappa.clone()).unwrap_or_default())
        };
        let (a, b) = (kappa(0.0)?, kappa(0.7)?);
        Ok(a.iter().zip(&b).map(|(x, y)| math::abs(x - y)).fold(0.0, f64::max))
    };
    vec![
        Check::at_most("geometry", "fd jets match exact jets (relative)", fd(), 1e-7),
        Check::at_most("geometry", "curvature independent of sampling origin", reparam(), 1e-9),
    ]
}

fn frame_checks() -> Vec<Check> {
    let weingarten = || -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (name, params, counts) in [("torus", &[2.0, 1.0][..], &[32usize, 16][..]), ("helix", &[3.0, 4.0], &[64])] {
            let boundary = if name == "torus" { Boundary::Periodic } else { Boundary::Dirichlet };
            let (_, _, frames, coeffs) = setup(name, params, counts, boundary)?;
            worst = worst.max(coeffs.weingarten_relation_defect(&frames));
        }
        Ok(worst)
    };
    let helix = || setup("helix", &[3.0, 4.0], &[128], Boundary::Dirichlet);
    let frenet = || -> Result<f64> {
        let (e, _, frames, coeffs) = helix()?;
        let data = curvature_data(&e, &frames, &coeffs)?;
        let c = data.as_curve().ok_or(crate::Error::Unsupported("not a curve".into()))?;
        Ok(c.kappa.iter().zip(&c.kappa_c_frame).map(|(k, z)| math::abs(k - z.norm())).fold(0.0, f64::max))
    };
    let hashimoto = || -> Result<(f64, f64)> {
        let (e, _, frames, coeffs) = helix()?;
        let before = curvature_data(&e, &frames, &coeffs)?;
        let (rotated, rc) = hashimoto_rotate(&coeffs, &frames)?;
        let after = curvature_data(&e, &rotated, &rc)?;
        let (b, a) = (before.as_curve().unwrap(), after.as_curve().unwrap());
        let drift = b
            .kappa_c_frame
            .iter()
            .zip(&a.kappa_c_frame)
            .map(|(x, y)| math::abs(x.norm() - y.norm()))
            .fold(0.0, f64::max);
        Ok((rc.max_normal_connection(), drift))
    };
    let h = hashimoto();
    vec![
        Check::at_most("frames", "second form equals lowered Weingarten map", weingarten(), 1e-9),
        Check::at_most("frames", "|κ_C| equals Frenet κ on helix", frenet(), 1e-7),
        Check::at_most("frames", "rotated normal connection vanishes", h.clone().map(|x| x.0), 1e-8),
        Check::at_most("frames", "|κ_C| unchanged by rotation", h.map(|x| x.1), 1e-9),
    ]
}

fn tubular_checks() -> Vec<Check> {
    let order = || -> Result<f64> {
        let (_, _, frames, coeffs) = setup("torus", &[2.0, 1.0], &[16, 8], Boundary::Periodic)?;
        let m = tube_metric(&frames, &coeffs)?;
        let mut worst = f64::INFINITY;
        for node in [0, 5, 37, 90] {
            let err = |q: f64| math::abs(m.exact_det(node, &[q]) - m.det_expansion(node, &[q]));
            let (a, b) = (err(1e-2), err(5e-3));
            if b > 0.0 {
                worst = worst.min(a / b);
            }
        }
        Ok(math::ln(worst) / math::ln(2.0))
    };
    let sign = || -> Result<f64> {
        let mut worst = f64::NEG_INFINITY;
        let cases: [(&str, &[f64], &[usize], Boundary); 4] = [
            ("circle", &[1.0], &[32], Boundary::Periodic),
            ("helix", &[3.0, 4.0], &[32], Boundary::Dirichlet),
            ("torus", &[2.0, 1.0], &[16, 8], Boundary::Periodic),
            ("ellipse", &[2.0, 1.0], &[32], Boundary::Periodic),
        ];
        for (name, params, counts, boundary) in cases {
            let (_, _, _, coeffs) = setup(name, params, counts, boundary)?;
            worst = effective_potential(&coeffs).into_iter().fold(worst, f64::max);
        }
        Ok(worst)
    };
    let identity = || -> Result<f64> {
        let (e, _, frames, coeffs) = setup("torus", &[2.0, 1.0], &[32, 16], Boundary::Periodic)?;
        let data = curvature_data(&e, &frames, &coeffs)?;
        let s = data.as_surface().unwrap();
        let v = effective_potential(&coeffs);
        Ok((0..v.len())
            .map(|i| math::abs(v[i] + s.mean[i] * s.mean[i] - s.gauss[i]))
            .fold(0.0, f64::max))
    };
    let umbilic = || -> Result<f64> {
        let (_, _, _, coeffs) = setup("sphere", &[2.0], &[16, 32], Boundary::Periodic)?;
        Ok(math::max_abs(&effective_potential(&coeffs)))
    };
    vec![
        Check::between("tubular", "determinant expansion remainder order", order(), 2.8, f64::INFINITY),
        Check::at_most("tubular", "V_eff is non-positive", sign(), 1e-12),
        Check::at_most("tubular", "torus V_eff + H² − K", identity(), 1e-9),
        Check::at_most("tubular", "sphere V_eff vanishes", umbilic(), 1e-10),
    ]
}

fn operator_checks() -> Vec<Check> {
    let grid = SampleGrid::new(vec![Axis::new(64, 0.0, 2.0 * PI, true)]);
    let metric = FnMetric::new(1, |p: &[f64]| vec![1.0 + 0.4 * math::sin(p[0]) + 0.1 * math::cos(3.0 * p[0])]);
    let raw = grid.clone().and_then(|g| laplace_beltrami(&metric, &g));
    let kernel = || -> Result<f64> {
        let op = raw.clone()?;
        Ok(math::max_abs(&op.apply(&vec![1.0; op.dim()])))
    };
    let adjoint = || -> Result<f64> { Ok(raw.clone()?.self_adjointness_residual()) };
    let symmetric = || -> Result<f64> { Ok(half_density_transform(&raw.clone()?)?.matrix().symmetry_residual()) };
    let similar = || -> Result<f64> {
        let op = raw.clone()?.scaled(-1.0);
        let n = op.dim();
        let (reference, _) = symmetric_eigen(&half_density_transform(&op)?.matrix().to_dense(), n);
        // eigenpairs of the raw operator, residuals measured in the raw gauge
        let s = eigen_lowest(&op, 10)?;
        let gap = s
            .eigenvalues()
            .iter()
            .zip(&reference)
            .map(|(x, y)| math::abs(x - y))
            .fold(0.0, f64::max);
        Ok(gap.max(s.max_relative_residual()))
    };
    let momentum = || -> Result<f64> {
        let g = grid.clone()?;
        let p = momentum_operator(0, &metric, &g)?;
        Ok(p.self_adjointness_residual())
    };
    let convergence = || -> Result<f64> {
        let circle = catalog_shape("circle", &[1.0])?;
        let mut errors = Vec::new();
        for n in [32usize, 64, 128] {
            let g = SampleGrid::on_domain(circle.domain(), &[n], Boundary::Periodic)?;
            let s = eigen_lowest(&submanifold_hamiltonian(&circle, &g)?, 3)?;
            errors.push(math::abs(s.eigenvalues()[1] - 0.75));
        }
        Ok(errors[1] / errors[2])
    };
    vec![
        Check::at_most("operators", "periodic Laplacian annihilates constants", kernel(), 1e-12),
        Check::at_most("operators", "raw Laplacian weighted self-adjoint", adjoint(), 1e-10),
        Check::at_most("operators", "half-density Laplacian symmetric", symmetric(), 1e-12),
        Check::at_most("operators", "raw and half-density spectra agree", similar(), 1e-9),
        Check::at_most("operators", "momentum weighted self-adjoint", momentum(), 1e-10),
        Check::between("operators", "second-order convergence ratio", convergence(), 3.6, 4.4),
    ]
}

fn spectra_checks() -> Vec<Check> {
    let lowest = |len: f64| -> Result<f64> {
        let g = SampleGrid::new(vec![Axis::new(40, 0.0, len, false)])?;
        let flat = FnMetric::new(1, |_: &[f64]| vec![1.0]);
        let op = half_density_transform(&laplace_beltrami(&flat, &g)?)?.scaled(-1.0);
        Ok(eigen_lowest(&op, 1)?.eigenvalues()[0])
    };
    let monotone = || -> Result<f64> { Ok(lowest(0.8)? - lowest(1.0)?) };
    let parseval = || -> Result<f64> {
        let g = SampleGrid::new(vec![Axis::new(48, 0.0, 2.0 * PI, true)])?;
        let metric = FnMetric::new(1, |p: &[f64]| vec![1.0 + 0.3 * math::cos(p[0])]);
        let op = half_density_transform(&laplace_beltrami(&metric, &g)?)?.scaled(-1.0);
        let s = eigen_lowest(&op, op.dim())?;
        let u: Vec<f64> = (0..op.dim()).map(|i| math::sin(0.37 * i as f64 + 1.0) + 0.2).collect();
        let norm = weighted_inner_product(&u, &u, &op)?.re;
        let mut captured = 0.0;
        for v in s.eigenvectors() {
            captured += weighted_inner_product(v, &u, &op)?.norm_sqr();
        }
        Ok(math::abs(norm - captured) / norm)
    };
    vec![
        Check::between("spectra", "Dirichlet eigenvalue grows as the interval shrinks", monotone(), 1e-6, f64::INFINITY),
        Check::at_most("spectra", "Parseval identity for a full decomposition", parseval(), 1e-8),
    ]
}

fn squeeze_checks() -> Vec<Check> {
    let agreement = || -> Result<f64> {
        let circle = catalog_shape("circle", &[1.0])?;
        let run = squeeze(&circle, &[0.2, 0.1, 0.05], TubeResolution { along: 256, across: 16, levels: 3 })?;
        let limits = squeeze_extrapolate(&run)?;
        let g = SampleGrid::on_domain(circle.domain(), &[256], Boundary::Periodic)?;
        let h = eigen_lowest(&submanifold_hamiltonian(&circle, &g)?, 3)?;
        Ok(limits
            .iter()
            .zip(h.eigenvalues())
            .map(|(x, e)| math::abs(x.limit - e))
            .fold(0.0, f64::max))
    };
    vec![Check::at_most("squeeze", "circle tube limits match the effective operator", agreement(), 1e-2)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes() {
        let checks = run_checks();
        for c in &checks {
            assert!(c.passed, "{c:?}");
        }
        assert!(checks.len() >= 15);
    }
}

//! Thin-tube Dirichlet problems around a curve.
//!
//! The particle lives in the tube `|q| ≤ ε` (a band for planar curves, a
//! square cross-section in E³) with Dirichlet walls. Removing the transverse
//! ground energy and sending ε → 0 should reproduce the spectrum of
//! `−Δ_S + V_eff`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::frames::{build_frames, connection_coefficients, hashimoto_rotate, FrameField, LocalFrame};
use crate::geometry::{Axis, Boundary, Embedding, SampleGrid};
use crate::math;
use crate::operators::{half_density_transform, laplace_beltrami, MetricField};
use crate::spectra::eigen_lowest;
use crate::tubular::tube_frame_local;
use crate::{Error, Result};

/// Fewest nodes allowed across the tube.
pub const MIN_TRANSVERSE_NODES: usize = 16;
/// Largest admissible `|q|_max · κ_max`.
pub const MAX_THICKNESS: f64 = 0.9;
/// Default half-widths as fractions of the focal radius.
pub const DEFAULT_FRACTIONS: [f64; 3] = [0.2, 0.1, 0.05];

/// Ground energy `d·(π/2ε)²` of the Dirichlet box `[−ε, ε]^d`.
pub fn transverse_ground_energy(epsilon: f64, dims: usize) -> f64 {
    let k = PI / (2.0 * epsilon);
    dims as f64 * k * k
}

/// Lowest eigenvalue of the discrete Dirichlet Laplacian on `[−ε, ε]^d`
/// with `nodes` cell-centred points per direction. This is what the tube
/// solve actually contains, so it is what gets subtracted.
pub fn discrete_transverse_energy(epsilon: f64, nodes: usize, dims: usize) -> f64 {
    let h = 2.0 * epsilon / nodes as f64;
    dims as f64 * (2.0 - 2.0 * math::cos(PI / nodes as f64)) / (h * h)
}

/// Grid resolution of one tube solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TubeResolution {
    pub along: usize,
    pub across: usize,
    pub levels: usize,
}

impl Default for TubeResolution {
    fn default() -> Self {
        TubeResolution { along: 512, across: 32, levels: 3 }
    }
}

/// Lowest levels of one tube.
#[derive(Clone, Debug, PartialEq)]
pub struct TubeSpectrum {
    pub epsilon: f64,
    /// Number of transverse directions (1 for a band, 2 for a square tube).
    pub cross_dims: usize,
    pub eigenvalues: Vec<f64>,
    /// Discrete transverse ground energy removed from each level.
    pub transverse: f64,
    pub max_residual: f64,
}

impl TubeSpectrum {
    pub fn subtracted(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|e| e - self.transverse).collect()
    }
}

/// Tube coordinates `(s, q)` with the exact metric of `X(s) + q^ȧ e_ȧ(s)`
/// in the rotated frame. Frames are cached on the half-step lattice the
/// flux assembly visits.
struct TubeCoordinates<'a> {
    embedding: &'a Embedding,
    frames: FrameField,
    axis: Axis,
    normals: Vec<usize>,
    cache: Vec<LocalFrame>,
}

impl<'a> TubeCoordinates<'a> {
    fn new(embedding: &'a Embedding, frames: FrameField, axis: Axis, normals: Vec<usize>) -> Result<Self> {
        let half = 0.5 * axis.spacing();
        let start = axis.node(0);
        let samples = 2 * axis.count + if axis.periodic { 2 } else { 1 };
        let cache = (0..samples)
            .map(|j| {
                let s = start + (j as f64 - 1.0) * half;
                let s = if axis.periodic { s } else { s.clamp(axis.lo, axis.hi) };
                frames.frame_at(embedding, &[s])
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TubeCoordinates { embedding, frames, axis, normals, cache })
    }

    fn frame(&self, s: f64) -> Result<LocalFrame> {
        let t = (s - self.axis.node(0)) / (0.5 * self.axis.spacing()) + 1.0;
        let j = math::round(t);
        if math::abs(t - j) < 1e-6 && j >= 0.0 && (j as usize) < self.cache.len() {
            return Ok(self.cache[j as usize].clone());
        }
        self.frames.frame_at(self.embedding, &[s])
    }
}

impl MetricField for TubeCoordinates<'_> {
    fn dim(&self) -> usize {
        1 + self.normals.len()
    }

    fn metric(&self, params: &[f64]) -> Result<Vec<f64>> {
        let frame = self.frame(params[0])?;
        let mut q = vec![0.0; frame.normals.len()];
        for (i, &a) in self.normals.iter().enumerate() {
            q[a] = params[1 + i];
        }
        let tube = tube_frame_local(&frame, &q)?;
        let d = self.dim();
        let mut g = vec![0.0; d * d];
        g[0] = math::dot(&tube.vectors[0], &tube.vectors[0]);
        for i in 1..d {
            g[i * d + i] = 1.0;
        }
        Ok(g)
    }

    fn is_diagonal(&self) -> bool {
        true
    }
}

/// Which rotated normals span the cross-section, and `κ_max` within it.
fn cross_section(embedding: &Embedding, grid: &SampleGrid) -> Result<(FrameField, Vec<usize>, f64)> {
    let frames = build_frames(embedding, grid)?;
    let coeffs = connection_coefficients(embedding, &frames)?;
    let curvature = |coeffs: &crate::frames::ConnectionCoefficients, a: usize| {
        (0..coeffs.len()).map(|node| math::abs(coeffs.weingarten(node, a, 0, 0))).fold(0.0, f64::max)
    };
    match embedding.codim() {
        1 => {
            let kappa = curvature(&coeffs, 0);
            Ok((frames, vec![0], kappa))
        }
        2 => {
            let (rotated, coeffs) = hashimoto_rotate(&coeffs, &frames)?;
            let kappas = [curvature(&coeffs, 0), curvature(&coeffs, 1)];
            let flat = 1e-9 * kappas[0].max(kappas[1]).max(1.0);
            // a planar curve keeps one normal constant
            if kappas[1] <= flat {
                return Ok((rotated, vec![0], kappas[0]));
            }
            if kappas[0] <= flat {
                return Ok((rotated, vec![1], kappas[1]));
            }
            if let Some(Some(h)) = rotated.rotation().and_then(|r| r.holonomy().first().copied()) {
                let wrapped = math::atan2(math::sin(h), math::cos(h));
                if math::abs(wrapped) > 1e-8 {
                    return Err(Error::Unsupported(format!(
                        "closed curve with normal holonomy {wrapped:.3e}: the rotated frame does not close"
                    )));
                }
            }
            let kappa = (0..coeffs.len())
                .map(|node| math::hypot(coeffs.weingarten(node, 0, 0, 0), coeffs.weingarten(node, 1, 0, 0)))
                .fold(0.0, f64::max);
            Ok((rotated, vec![0, 1], kappa))
        }
        c => Err(Error::Unsupported(format!("tube squeeze needs codimension 1 or 2, got {c}"))),
    }
}

fn along_grid(embedding: &Embedding, along: usize) -> Result<SampleGrid> {
    let boundary = if embedding.is_closed() { Boundary::Periodic } else { Boundary::Dirichlet };
    SampleGrid::on_domain(embedding.domain(), &[along], boundary)
}

/// Lowest levels of `−Δ` on the tube of half-width `epsilon` with Dirichlet
/// walls; periodic along closed curves and Dirichlet at open ends.
pub fn tube_dirichlet_spectrum(embedding: &Embedding, epsilon: f64, resolution: TubeResolution) -> Result<TubeSpectrum> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidParameter {
            index: 0,
            reason: format!("tube half-width must be positive, got {epsilon}"),
        });
    }
    if resolution.across < MIN_TRANSVERSE_NODES {
        return Err(Error::Underresolved {
            nodes: resolution.across,
            required: MIN_TRANSVERSE_NODES,
        });
    }
    if embedding.intrinsic_dim() != 1 {
        return Err(Error::Unsupported("tube squeeze is implemented for curves only".into()));
    }
    let grid = along_grid(embedding, resolution.along)?;
    let (frames, normals, kappa) = cross_section(embedding, &grid)?;
    let dims = normals.len();
    let reach = epsilon * math::sqrt(dims as f64);
    let product = reach * kappa;
    if product >= 1.0 {
        return Err(Error::FocalRadius {
            offset: reach,
            radius: 1.0 / kappa,
        });
    }
    if product >= MAX_THICKNESS {
        return Err(Error::TubeTooThick { product });
    }
    let along = *grid.axis(0);
    let mut axes = vec![along];
    axes.extend((0..dims).map(|_| Axis::new(resolution.across, -epsilon, epsilon, false)));
    let tube = SampleGrid::new(axes)?;
    let coords = TubeCoordinates::new(embedding, frames, along, normals)?;
    let op = half_density_transform(&laplace_beltrami(&coords, &tube)?)?.scaled(-1.0);
    let spectrum = eigen_lowest(&op, resolution.levels)?;
    Ok(TubeSpectrum {
        epsilon,
        cross_dims: dims,
        eigenvalues: spectrum.eigenvalues().to_vec(),
        transverse: discrete_transverse_energy(epsilon, resolution.across, dims),
        max_residual: spectrum.max_relative_residual(),
    })
}

/// Default half-widths: [`DEFAULT_FRACTIONS`] of the focal radius, or of
/// `L/π` when that is smaller (straight pieces have no focal radius).
pub fn default_epsilons(embedding: &Embedding, along: usize) -> Result<Vec<f64>> {
    if embedding.intrinsic_dim() != 1 {
        return Err(Error::Unsupported("tube squeeze is implemented for curves only".into()));
    }
    let grid = along_grid(embedding, along)?;
    let (_, normals, kappa) = cross_section(embedding, &grid)?;
    let reach = math::sqrt(normals.len() as f64);
    let focal = if kappa > 0.0 { 1.0 / kappa } else { f64::INFINITY };
    let scale = focal.min(embedding.domain()[0].length() / PI) / reach;
    Ok(DEFAULT_FRACTIONS.iter().map(|f| f * scale).collect())
}

/// Limit of one level as ε → 0.
#[derive(Clone, Debug, PartialEq)]
pub struct Extrapolation {
    pub level: usize,
    /// Extrapolated value, or the value at the smallest ε when refused.
    pub limit: f64,
    /// `dE/dε` at ε = 0 of the interpolating polynomial.
    pub slope: f64,
    /// Change in the limit when the widest tube is dropped.
    pub error_estimate: f64,
    /// Set when the subtracted levels are not monotone in ε.
    pub refused: bool,
}

/// Tube spectra for a descending sequence of half-widths.
#[derive(Clone, Debug, PartialEq)]
pub struct SqueezeRun {
    pub spectra: Vec<TubeSpectrum>,
}

impl SqueezeRun {
    /// Sorts by descending ε.
    pub fn new(mut spectra: Vec<TubeSpectrum>) -> Self {
        spectra.sort_by(|a, b| b.epsilon.total_cmp(&a.epsilon));
        SqueezeRun { spectra }
    }

    pub fn epsilons(&self) -> Vec<f64> {
        self.spectra.iter().map(|s| s.epsilon).collect()
    }

    pub fn levels(&self) -> usize {
        self.spectra.iter().map(|s| s.eigenvalues.len()).min().unwrap_or(0)
    }
}

/// Runs every ε in turn; callers wanting parallelism can build the
/// [`TubeSpectrum`]s themselves and use [`SqueezeRun::new`].
pub fn squeeze(embedding: &Embedding, epsilons: &[f64], resolution: TubeResolution) -> Result<SqueezeRun> {
    let spectra = epsilons
        .iter()
        .map(|&e| tube_dirichlet_spectrum(embedding, e, resolution))
        .collect::<Result<Vec<_>>>()?;
    Ok(SqueezeRun::new(spectra))
}

/// Polynomial extrapolation to ε = 0 of every subtracted level.
pub fn squeeze_extrapolate(run: &SqueezeRun) -> Result<Vec<Extrapolation>> {
    let eps = run.epsilons();
    let subtracted: Vec<Vec<f64>> = run.spectra.iter().map(|s| s.subtracted()).collect();
    (0..run.levels())
        .map(|level| {
            let values: Vec<f64> = subtracted.iter().map(|v| v[level]).collect();
            let mut out = extrapolate_to_zero(&eps, &values)?;
            out.level = level;
            Ok(out)
        })
        .collect()
}

/// Extrapolates `values(ε)` to ε = 0 through the interpolating polynomial.
/// `epsilons` must be a strictly decreasing geometric sequence of length at
/// least 3.
pub fn extrapolate_to_zero(epsilons: &[f64], values: &[f64]) -> Result<Extrapolation> {
    let n = epsilons.len();
    if n < 3 || values.len() != n {
        return Err(Error::Extrapolation(format!(
            "need at least 3 half-widths with one value each, got {} and {}",
            n,
            values.len()
        )));
    }
    if epsilons.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::Extrapolation("half-widths must be positive".into()));
    }
    let ratio = epsilons[1] / epsilons[0];
    let geometric = epsilons
        .windows(2)
        .all(|w| math::abs(w[1] / w[0] - ratio) <= 1e-9 * ratio);
    if !(ratio < 1.0) || !geometric {
        return Err(Error::Extrapolation("half-widths must decrease in geometric progression".into()));
    }
    let scale = values.iter().fold(1.0f64, |m, v| m.max(math::abs(*v)));
    let steps: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let tol = 1e-12 * scale;
    let monotone = steps.iter().all(|d| *d >= -tol) || steps.iter().all(|d| *d <= tol);
    if !monotone {
        let last = n - 1;
        return Ok(Extrapolation {
            level: 0,
            limit: values[last],
            slope: (values[last] - values[last - 1]) / (epsilons[last] - epsilons[last - 1]),
            error_estimate: f64::NAN,
            refused: true,
        });
    }
    let (limit, slope) = polynomial_at_zero(epsilons, values);
    let (narrow, _) = polynomial_at_zero(&epsilons[1..], &values[1..]);
    Ok(Extrapolation {
        level: 0,
        limit,
        slope,
        error_estimate: math::abs(limit - narrow),
        refused: false,
    })
}

/// Value and derivative at 0 of the interpolating polynomial (Newton form).
fn polynomial_at_zero(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len();
    let mut c = y.to_vec();
    for j in 1..n {
        for i in (j..n).rev() {
            c[i] = (c[i] - c[i - 1]) / (x[i] - x[i - j]);
        }
    }
    // Horner with derivative on p(t) = c0 + (t − x0)(c1 + (t − x1)(…))
    let (mut p, mut dp) = (c[n - 1], 0.0);
    for i in (0..n - 1).rev() {
        dp = dp * (-x[i]) + p;
        p = p * (-x[i]) + c[i];
    }
    (p, dp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{catalog_shape, sampled_curve};

    fn segment() -> Embedding {
        let s: Vec<f64> = (0..=64).map(|i| PI * i as f64 / 64.0).collect();
        let pts: Vec<Vec<f64>> = s.iter().map(|&t| vec![t, 0.0]).collect();
        sampled_curve(&s, &pts).unwrap()
    }

    #[test]
    fn transverse_energy_of_the_well() {
        assert!((transverse_ground_energy(0.05, 1) - 100.0 * PI * PI).abs() < 1e-9);
        assert!((transverse_ground_energy(0.05, 1) - 986.96).abs() < 5e-3);
        let fine = discrete_transverse_energy(0.05, 4096, 1);
        assert!((fine / transverse_ground_energy(0.05, 1) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn straight_segment_separates() {
        let run = tube_dirichlet_spectrum(&segment(), 0.1, TubeResolution { along: 64, across: 16, levels: 2 }).unwrap();
        let exact = transverse_ground_energy(0.1, 1) + 1.0;
        assert!((run.eigenvalues[0] / exact - 1.0).abs() < 5e-3);
        // with the discrete transverse energy removed only the axial error is left
        let axial = (2.0 - 2.0 * (PI / 64.0f64).cos()) / (PI / 64.0).powi(2);
        assert!((run.subtracted()[0] - axial).abs() < 1e-8);
    }

    #[test]
    fn thin_ring_binds_below_zero() {
        let circle = catalog_shape("circle", &[1.0]).unwrap();
        let run = tube_dirichlet_spectrum(&circle, 0.05, TubeResolution { along: 256, across: 16, levels: 1 }).unwrap();
        assert_eq!(run.cross_dims, 1);
        let e = run.subtracted()[0];
        assert!(e > -0.26 && e < -0.22, "{e}");
    }

    #[test]
    fn linear_model_extrapolates_exactly() {
        let eps = [0.2, 0.1, 0.05];
        let vals: Vec<f64> = eps.iter().map(|e| -0.25 + 0.3 * e).collect();
        let x = extrapolate_to_zero(&eps, &vals).unwrap();
        assert!((x.limit + 0.25).abs() < 1e-12);
        assert!((x.slope - 0.3).abs() < 1e-10);
        assert!(x.error_estimate < 1e-12);
        assert!(!x.refused);
    }

    #[test]
    fn quadratic_model_is_exact_with_three_points() {
        let eps = [0.4, 0.2, 0.1];
        let vals: Vec<f64> = eps.iter().map(|e| 1.5 - 2.0 * e + 7.0 * e * e).collect();
        let x = extrapolate_to_zero(&eps, &vals).unwrap();
        assert!((x.limit - 1.5).abs() < 1e-12);
        assert!((x.slope + 2.0).abs() < 1e-10);
    }

    #[test]
    fn non_monotone_data_is_refused() {
        let x = extrapolate_to_zero(&[0.2, 0.1, 0.05], &[1.0, 0.5, 0.9]).unwrap();
        assert!(x.refused);
        assert_eq!(x.limit, 0.9);
    }

    #[test]
    fn bad_schedules_are_errors() {
        assert!(matches!(extrapolate_to_zero(&[0.2, 0.1], &[0.0, 0.0]), Err(Error::Extrapolation(_))));
        assert!(matches!(
            extrapolate_to_zero(&[0.2, 0.1, 0.07], &[0.0, 0.1, 0.2]),
            Err(Error::Extrapolation(_))
        ));
        assert!(matches!(
            extrapolate_to_zero(&[0.05, 0.1, 0.2], &[0.0, 0.1, 0.2]),
            Err(Error::Extrapolation(_))
        ));
    }

    #[test]
    fn guards_on_thickness_and_resolution() {
        let circle = catalog_shape("circle", &[1.0]).unwrap();
        let r = TubeResolution { along: 64, across: 8, levels: 1 };
        assert!(matches!(
            tube_dirichlet_spectrum(&circle, 0.05, r),
            Err(Error::Underresolved { nodes: 8, required: 16 })
        ));
        let r = TubeResolution { across: 16, ..r };
        assert!(matches!(tube_dirichlet_spectrum(&circle, 0.95, r), Err(Error::TubeTooThick { .. })));
        assert!(matches!(tube_dirichlet_spectrum(&circle, 1.2, r), Err(Error::FocalRadius { .. })));
        let sphere = catalog_shape("sphere", &[1.0]).unwrap();
        assert!(matches!(tube_dirichlet_spectrum(&sphere, 0.1, r), Err(Error::Unsupported(_))));
    }
}

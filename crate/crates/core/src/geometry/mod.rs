//! Embeddings `ι: S ↪ Eⁿ` of curves (k = 1) and surfaces (k = 2) together
//! with their derivative jets up to order 3.

mod catalog;
mod fd;
mod grid;
mod spline;

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::math;
use crate::{Error, Result};

pub use catalog::{catalog_shape, Shape, SHAPE_NAMES};
pub use fd::{jets_fd, jets_fd_with, FdOptions};
pub use grid::{Axis, Boundary, SampleGrid};
pub use spline::{sampled_curve, CLOSURE_TOLERANCE, MIN_SAMPLES};

/// Highest derivative order a [`Jet`] carries.
pub const MAX_JET_ORDER: usize = 3;

/// One coordinate interval of a parameter domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub periodic: bool,
}

impl Interval {
    pub fn new(lo: f64, hi: f64, periodic: bool) -> Self {
        Interval { lo, hi, periodic }
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Position and partial derivatives `∂_α Y`, `∂_α∂_β Y`, `∂_α∂_β∂_γ Y` at one
/// parameter point, stored contiguously.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    ambient: usize,
    intrinsic: usize,
    order: usize,
    data: Vec<f64>,
}

impl Jet {
    pub fn zeros(ambient: usize, intrinsic: usize, order: usize) -> Self {
        let order = order.min(MAX_JET_ORDER);
        let mut blocks = 1;
        let mut level = 1;
        for _ in 0..order {
            level *= intrinsic;
            blocks += level;
        }
        Jet {
            ambient,
            intrinsic,
            order,
            data: vec![0.0; blocks * ambient],
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.intrinsic
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn block(&self, level: usize, flat: usize) -> usize {
        let k = self.intrinsic;
        let base = match level {
            0 => 0,
            1 => 1,
            2 => 1 + k,
            _ => 1 + k + k * k,
        };
        assert!(level <= self.order, "jet of order {} has no level {}", self.order, level);
        (base + flat) * self.ambient
    }

    fn slice(&self, level: usize, flat: usize) -> &[f64] {
        let start = self.block(level, flat);
        &self.data[start..start + self.ambient]
    }

    fn slice_mut(&mut self, level: usize, flat: usize) -> &mut [f64] {
        let start = self.block(level, flat);
        let n = self.ambient;
        &mut self.data[start..start + n]
    }

    pub fn position(&self) -> &[f64] {
        self.slice(0, 0)
    }

    pub fn first(&self, a: usize) -> &[f64] {
        self.slice(1, a)
    }

    pub fn second(&self, a: usize, b: usize) -> &[f64] {
        self.slice(2, a * self.intrinsic + b)
    }

    pub fn third(&self, a: usize, b: usize, c: usize) -> &[f64] {
        let k = self.intrinsic;
        self.slice(3, (a * k + b) * k + c)
    }

    pub fn position_mut(&mut self) -> &mut [f64] {
        self.slice_mut(0, 0)
    }

    pub fn first_mut(&mut self, a: usize) -> &mut [f64] {
        self.slice_mut(1, a)
    }

    pub fn second_mut(&mut self, a: usize, b: usize) -> &mut [f64] {
        let k = self.intrinsic;
        self.slice_mut(2, a * k + b)
    }

    pub fn third_mut(&mut self, a: usize, b: usize, c: usize) -> &mut [f64] {
        let k = self.intrinsic;
        self.slice_mut(3, (a * k + b) * k + c)
    }

    /// Induced metric `g_{αβ} = ⟨∂_α Y, ∂_β Y⟩`, row-major k×k.
    pub fn metric(&self) -> Vec<f64> {
        let k = self.intrinsic;
        let mut g = vec![0.0; k * k];
        for a in 0..k {
            for b in 0..k {
                g[a * k + b] = math::dot(self.first(a), self.first(b));
            }
        }
        g
    }

    /// Builds a jet from a function returning the mixed partial for a given
    /// per-axis derivative count.
    pub(crate) fn from_partials<F>(ambient: usize, intrinsic: usize, order: usize, mut partial: F) -> Jet
    where
        F: FnMut(&[usize], &mut [f64]),
    {
        let mut jet = Jet::zeros(ambient, intrinsic, order);
        let k = intrinsic;
        let mut counts = vec![0usize; k];
        partial(&counts, jet.position_mut());
        if jet.order >= 1 {
            for a in 0..k {
                counts.iter_mut().for_each(|c| *c = 0);
                counts[a] += 1;
                partial(&counts, jet.first_mut(a));
            }
        }
        if jet.order >= 2 {
            for a in 0..k {
                for b in 0..k {
                    counts.iter_mut().for_each(|c| *c = 0);
                    counts[a] += 1;
                    counts[b] += 1;
                    partial(&counts, jet.second_mut(a, b));
                }
            }
        }
        if jet.order >= 3 {
            for a in 0..k {
                for b in 0..k {
                    for c in 0..k {
                        counts.iter_mut().for_each(|x| *x = 0);
                        counts[a] += 1;
                        counts[b] += 1;
                        counts[c] += 1;
                        partial(&counts, jet.third_mut(a, b, c));
                    }
                }
            }
        }
        jet
    }

    /// Largest norm among the vectors of one derivative level.
    pub fn level_scale(&self, level: usize) -> f64 {
        let k = self.intrinsic;
        let count = match level {
            0 => 1,
            1 => k,
            2 => k * k,
            _ => k * k * k,
        };
        (0..count)
            .map(|i| math::norm(self.slice(level, i)))
            .fold(0.0, f64::max)
    }

    /// Max over levels ≤ `order` of the relative difference between two jets,
    /// each level normalised by the larger of the two level scales.
    pub fn relative_difference(&self, other: &Jet, order: usize) -> f64 {
        let k = self.intrinsic;
        let mut worst: f64 = 0.0;
        for level in 0..=order.min(self.order).min(other.order) {
            let count = match level {
                0 => 1,
                1 => k,
                2 => k * k,
                _ => k * k * k,
            };
            let scale = self.level_scale(level).max(other.level_scale(level)).max(f64::MIN_POSITIVE);
            for i in 0..count {
                let d = self
                    .slice(level, i)
                    .iter()
                    .zip(other.slice(level, i))
                    .fold(0.0f64, |m, (x, y)| m.max(math::abs(x - y)));
                worst = worst.max(d / scale);
            }
        }
        worst
    }
}

/// Source of exact jets for an embedding.
pub trait Parametrization: Send + Sync {
    fn ambient_dim(&self) -> usize;
    fn intrinsic_dim(&self) -> usize;
    fn domain(&self) -> Vec<Interval>;
    fn jet(&self, params: &[f64], order: usize) -> Jet;
}

/// An embedding of a k-dimensional parameter domain into Eⁿ.
///
/// Immutable after construction; jet evaluation is a pure function.
pub struct Embedding {
    name: String,
    domain: Vec<Interval>,
    source: Box<dyn Parametrization>,
}

impl fmt::Debug for Embedding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Embedding")
            .field("name", &self.name)
            .field("ambient_dim", &self.ambient_dim())
            .field("intrinsic_dim", &self.intrinsic_dim())
            .field("domain", &self.domain)
            .finish()
    }
}

impl Embedding {
    pub fn new(name: impl Into<String>, source: Box<dyn Parametrization>) -> Result<Self> {
        let n = source.ambient_dim();
        let k = source.intrinsic_dim();
        let domain = source.domain();
        if n < 2 || !(1..=2).contains(&k) || k >= n {
            return Err(Error::Unsupported(alloc::format!(
                "embedding of dimension {} into E^{}",
                k,
                n
            )));
        }
        if domain.len() != k || domain.iter().any(|d| !(d.hi > d.lo)) {
            return Err(Error::InvalidGrid("domain must have one non-empty interval per intrinsic axis".into()));
        }
        Ok(Embedding {
            name: name.into(),
            domain,
            source,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ambient_dim(&self) -> usize {
        self.source.ambient_dim()
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.source.intrinsic_dim()
    }

    pub fn codim(&self) -> usize {
        self.ambient_dim() - self.intrinsic_dim()
    }

    pub fn domain(&self) -> &[Interval] {
        &self.domain
    }

    pub fn is_closed(&self) -> bool {
        self.domain.iter().all(|d| d.periodic)
    }

    /// Exact jet; parameters on a non-periodic axis must lie in the closed
    /// interval.
    pub fn jet(&self, params: &[f64], order: usize) -> Result<Jet> {
        self.check_params(params)?;
        Ok(self.source.jet(params, order))
    }

    /// Jet without the domain check (finite-difference stencils may step
    /// slightly outside).
    pub fn jet_unchecked(&self, params: &[f64], order: usize) -> Jet {
        self.source.jet(params, order)
    }

    pub fn position(&self, params: &[f64]) -> Vec<f64> {
        self.source.jet(params, 0).position().to_vec()
    }

    pub fn check_params(&self, params: &[f64]) -> Result<()> {
        for (axis, (x, d)) in params.iter().zip(&self.domain).enumerate() {
            if !x.is_finite() || (!d.periodic && (*x < d.lo || *x > d.hi)) {
                return Err(Error::OutsideDomain { axis, value: *x });
            }
        }
        Ok(())
    }

    /// Ratio of smallest to largest singular value of the Jacobian `[∂_α Y]`.
    pub fn immersion_ratio(&self, params: &[f64]) -> f64 {
        let jet = self.source.jet(params, 1);
        singular_value_ratio(&jet.metric(), self.intrinsic_dim())
    }

    /// Checks the embedding invariants on a grid: immersion (σ_min > 1e-10
    /// σ_max), mixed-partial symmetry and periodic closure of the jets.
    pub fn check_invariants(&self, grid: &SampleGrid) -> InvariantReport {
        let k = self.intrinsic_dim();
        let mut report = InvariantReport {
            min_singular_ratio: f64::INFINITY,
            mixed_partial_asymmetry: 0.0,
            periodic_mismatch: 0.0,
        };
        for idx in 0..grid.len() {
            let p = grid.params(idx);
            let jet = self.source.jet(&p, 3);
            report.min_singular_ratio = report.min_singular_ratio.min(singular_value_ratio(&jet.metric(), k));
            let scale2 = jet.level_scale(2).max(f64::MIN_POSITIVE);
            let scale3 = jet.level_scale(3).max(f64::MIN_POSITIVE);
            for a in 0..k {
                for b in 0..k {
                    let d = vec_max_diff(jet.second(a, b), jet.second(b, a)) / scale2;
                    report.mixed_partial_asymmetry = report.mixed_partial_asymmetry.max(d);
                    for c in 0..k {
                        let d1 = vec_max_diff(jet.third(a, b, c), jet.third(b, a, c));
                        let d2 = vec_max_diff(jet.third(a, b, c), jet.third(a, c, b));
                        report.mixed_partial_asymmetry = report.mixed_partial_asymmetry.max(d1.max(d2) / scale3);
                    }
                }
            }
        }
        for (axis, d) in self.domain.iter().enumerate() {
            if !d.periodic {
                continue;
            }
            // compare both ends of a few lines through the domain
            for t in [0.1, 0.37, 0.8] {
                let mut lo: Vec<f64> = self.domain.iter().map(|d| d.lo + t * d.length()).collect();
                let mut hi = lo.clone();
                lo[axis] = d.lo;
                hi[axis] = d.hi;
                let ja = self.source.jet(&lo, 3);
                let jb = self.source.jet(&hi, 3);
                report.periodic_mismatch = report.periodic_mismatch.max(ja.relative_difference(&jb, 3));
            }
        }
        report
    }
}

/// Outcome of [`Embedding::check_invariants`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvariantReport {
    pub min_singular_ratio: f64,
    pub mixed_partial_asymmetry: f64,
    pub periodic_mismatch: f64,
}

impl InvariantReport {
    pub fn passes(&self) -> bool {
        self.min_singular_ratio > 1e-10 && self.mixed_partial_asymmetry <= 1e-9 && self.periodic_mismatch <= 1e-10
    }
}

fn vec_max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max(math::abs(x - y)))
}

/// σ_min/σ_max of a Jacobian given its Gram matrix (k ≤ 2).
pub(crate) fn singular_value_ratio(gram: &[f64], k: usize) -> f64 {
    match k {
        1 => {
            if gram[0] > 0.0 {
                1.0
            } else {
                0.0
            }
        }
        _ => {
            let (a, b, d) = (gram[0], gram[1], gram[3]);
            let tr = a + d;
            let disc = math::sqrt(((a - d) * (a - d) + 4.0 * b * b).max(0.0));
            let hi = 0.5 * (tr + disc);
            let lo = 0.5 * (tr - disc);
            if hi <= 0.0 {
                0.0
            } else {
                math::sqrt(lo.max(0.0) / hi)
            }
        }
    }
}

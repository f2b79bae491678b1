//! Tangent and normal frames, connection coefficients, the Hashimoto rotation
//! and scalar curvature data.
//!
//! Normal orientation: curves of nonvanishing curvature start from the Frenet
//! normal, which points to the centre of curvature (`γ = −κ` along it).
//! Otherwise normals are seeded by coordinate axes and the last normal is
//! oriented so that `tr γ ≤ 0` for it; a sphere of radius R gets the inward
//! normal with `γ = −1/R`.

mod connection;
mod curvature;
mod hashimoto;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::dual::{self, Dual, Real};
use crate::geometry::{Embedding, SampleGrid};
use crate::math;
use crate::{Error, Result};

pub use connection::{connection_coefficients, ConnectionCoefficients};
pub(crate) use connection::spectral_radius;
pub use curvature::{curvature_data, CurvatureData, CurveCurvature, SurfaceCurvature};
pub use hashimoto::{hashimoto_rotate, Rotation};

/// Candidate vectors projected against the tangent space to seed normals.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormalSeed {
    /// The curvature vector `∂_s² Y` of a curve, giving the Frenet normal.
    Curvature,
    /// `−Y`, pointing from the point towards the origin.
    Inward,
    /// A fixed ambient coordinate axis.
    Axis(usize),
}

/// Smallest acceptable seed residual `|P⊥ v| / |v|` over the grid.
pub const SEED_THRESHOLD: f64 = 1e-6;
/// Axis seeds with at least this residual everywhere are taken directly.
const COMFORTABLE_SEED: f64 = 0.5;

/// Everything needed to rebuild the frame at an arbitrary parameter point.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Recipe {
    pub seeds: Vec<NormalSeed>,
    /// Sign applied to the last (cross-product) normal.
    pub sign: f64,
}

/// Frame vectors at one parameter point.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalFrame {
    pub position: Vec<f64>,
    /// `k` tangent vectors `∂_α Y`.
    pub tangents: Vec<Vec<f64>>,
    /// `n − k` orthonormal normals.
    pub normals: Vec<Vec<f64>>,
    /// `∂_α e_ȧ`, indexed `[ȧ][α]`.
    pub normal_derivatives: Vec<Vec<Vec<f64>>>,
}

impl LocalFrame {
    /// `γ^β_{ȧα} = ⟨∂_α e_ȧ, e^β⟩` as `(γ_ȧ)[β·k + α]`.
    pub fn weingarten(&self, a: usize) -> Vec<f64> {
        let k = self.tangents.len();
        let inv = inverse_small(&gram(&self.tangents), k);
        let mut out = vec![0.0; k * k];
        for alpha in 0..k {
            for beta in 0..k {
                let mut v = 0.0;
                for g in 0..k {
                    v += inv[beta * k + g] * math::dot(&self.normal_derivatives[a][alpha], &self.tangents[g]);
                }
                out[beta * k + alpha] = v;
            }
        }
        out
    }

    /// `γ^ḃ_{ȧα} = ⟨∂_α e_ȧ, e_ḃ⟩`.
    pub fn normal_connection(&self, a: usize, b: usize, alpha: usize) -> f64 {
        math::dot(&self.normal_derivatives[a][alpha], &self.normals[b])
    }
}

/// Frames sampled on a grid.
#[derive(Clone, Debug)]
pub struct FrameField {
    grid: SampleGrid,
    n: usize,
    k: usize,
    tangents: Vec<f64>,
    normals: Vec<f64>,
    normal_derivatives: Vec<f64>,
    metric: Vec<f64>,
    metric_det: Vec<f64>,
    recipe: Recipe,
    rotation: Option<Rotation>,
}

impl FrameField {
    pub fn grid(&self) -> &SampleGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.k
    }

    pub fn codim(&self) -> usize {
        self.n - self.k
    }

    pub fn tangent(&self, node: usize, alpha: usize) -> &[f64] {
        let start = (node * self.k + alpha) * self.n;
        &self.tangents[start..start + self.n]
    }

    pub fn normal(&self, node: usize, a: usize) -> &[f64] {
        let start = (node * self.codim() + a) * self.n;
        &self.normals[start..start + self.n]
    }

    /// `∂_α e_ȧ` at a node.
    pub fn normal_derivative(&self, node: usize, a: usize, alpha: usize) -> &[f64] {
        let start = ((node * self.codim() + a) * self.k + alpha) * self.n;
        &self.normal_derivatives[start..start + self.n]
    }

    /// Induced metric `g_{S,αβ}`, row-major k×k.
    pub fn metric(&self, node: usize) -> &[f64] {
        let kk = self.k * self.k;
        &self.metric[node * kk..(node + 1) * kk]
    }

    pub fn metric_det(&self, node: usize) -> f64 {
        self.metric_det[node]
    }

    pub fn metric_dets(&self) -> &[f64] {
        &self.metric_det
    }

    /// `√g_S` at every node.
    pub fn volume_weights(&self) -> Vec<f64> {
        self.metric_det.iter().map(|d| math::sqrt(*d)).collect()
    }

    pub fn seeds(&self) -> &[NormalSeed] {
        &self.recipe.seeds
    }

    /// Hashimoto rotation data when the frame has been rotated.
    pub fn rotation(&self) -> Option<&Rotation> {
        self.rotation.as_ref()
    }

    /// Max of `|⟨e_ȧ,e_ḃ⟩ − δ|` and max of `|⟨e_α,e_ȧ⟩| / |e_α|` over the grid.
    pub fn orthonormality_defect(&self) -> (f64, f64) {
        let c = self.codim();
        let mut normal_defect: f64 = 0.0;
        let mut mixed: f64 = 0.0;
        for node in 0..self.len() {
            for a in 0..c {
                for b in 0..c {
                    let target = if a == b { 1.0 } else { 0.0 };
                    let d = math::dot(self.normal(node, a), self.normal(node, b)) - target;
                    normal_defect = normal_defect.max(math::abs(d));
                }
                for alpha in 0..self.k {
                    let t = self.tangent(node, alpha);
                    let d = math::dot(t, self.normal(node, a)) / math::norm(t);
                    mixed = mixed.max(math::abs(d));
                }
            }
        }
        (normal_defect, mixed)
    }

    /// Frame at an arbitrary parameter point, consistent with the grid frame
    /// (same seeds and orientation, and the same rotation when rotated).
    pub fn frame_at(&self, embedding: &Embedding, params: &[f64]) -> Result<LocalFrame> {
        let frame = local_frame(embedding, params, &self.recipe)?;
        match &self.rotation {
            None => Ok(frame),
            Some(rot) => {
                let theta = rot.angle_at(self, embedding, params)?;
                let rates: Vec<f64> = (0..self.k).map(|alpha| frame.normal_connection(0, 1, alpha)).collect();
                Ok(hashimoto::rotate_local(&frame, theta, &rates))
            }
        }
    }

    pub(crate) fn recipe(&self) -> &Recipe {
        &self.recipe
    }
}

/// Builds tangent and normal frames with exact normal derivatives on a grid.
///
/// Tangents are `∂_α Y`. Normals are a Gram–Schmidt completion seeded by
/// the candidate vectors that stay most transversal over the whole grid,
/// with the last normal given by the oriented cross product, so the frame is
/// smooth wherever the embedding is.
pub fn build_frames(embedding: &Embedding, grid: &SampleGrid) -> Result<FrameField> {
    let n = embedding.ambient_dim();
    let k = embedding.intrinsic_dim();
    let c = n - k;
    if grid.dim() != k {
        return Err(Error::GridMismatch { expected: k, got: grid.dim() });
    }
    let mut jets = Vec::with_capacity(grid.len());
    for node in 0..grid.len() {
        let jet = embedding.jet(&grid.params(node), 3)?;
        let ratio = crate::geometry::singular_value_ratio(&jet.metric(), k);
        if !(ratio > 1e-10) {
            return Err(Error::NotImmersed { node, ratio });
        }
        jets.push(jet);
    }

    // Seeds: the Frenet normal of a curve or else the first coordinate axis
    // that stays comfortably transversal over the whole grid, otherwise the
    // candidate whose worst residual is largest.
    let mut seeds = Vec::new();
    let mut candidates: Vec<NormalSeed> = Vec::new();
    if k == 1 {
        candidates.push(NormalSeed::Curvature);
    }
    candidates.extend((0..n).map(NormalSeed::Axis));
    candidates.push(NormalSeed::Inward);
    for _ in 0..c.saturating_sub(1) {
        let mut best: Option<(NormalSeed, f64)> = None;
        for cand in &candidates {
            if seeds.contains(cand) {
                continue;
            }
            let mut trial = seeds.clone();
            trial.push(*cand);
            let recipe = Recipe { seeds: trial, sign: 1.0 };
            let worst = jets
                .iter()
                .map(|jet| {
                    let tangents: Vec<Vec<f64>> = (0..k).map(|a| jet.first(a).to_vec()).collect();
                    let accel = if k == 1 { Some(jet.second(0, 0)) } else { None };
                    construct(jet.position(), &tangents, accel, &recipe).1
                })
                .fold(f64::INFINITY, f64::min);
            if !matches!(cand, NormalSeed::Inward) && worst >= COMFORTABLE_SEED {
                best = Some((*cand, worst));
                break;
            }
            if best.is_none_or(|(_, b)| worst > b) {
                best = Some((*cand, worst));
            }
        }
        let (seed, residual) = best.unwrap_or((NormalSeed::Inward, 0.0));
        if !(residual >= SEED_THRESHOLD) {
            return Err(Error::NoNormalSeed { residual });
        }
        seeds.push(seed);
    }

    let mut recipe = Recipe { seeds, sign: 1.0 };
    let mut field = FrameField {
        grid: grid.clone(),
        n,
        k,
        tangents: Vec::with_capacity(grid.len() * k * n),
        normals: Vec::with_capacity(grid.len() * c * n),
        normal_derivatives: Vec::with_capacity(grid.len() * c * k * n),
        metric: Vec::with_capacity(grid.len() * k * k),
        metric_det: Vec::with_capacity(grid.len()),
        recipe: recipe.clone(),
        rotation: None,
    };
    for (node, jet) in jets.iter().enumerate() {
        let frame = frame_from_jet(jet, &recipe);
        let g = jet.metric();
        let det = det_small(&g, k);
        if !(det > 0.0) {
            return Err(Error::DegenerateMetric { node });
        }
        for t in &frame.tangents {
            field.tangents.extend_from_slice(t);
        }
        for nv in &frame.normals {
            field.normals.extend_from_slice(nv);
        }
        for per_a in &frame.normal_derivatives {
            for d in per_a {
                field.normal_derivatives.extend_from_slice(d);
            }
        }
        field.metric.extend_from_slice(&g);
        field.metric_det.push(det);
    }

    {
        // orient the last normal so that its tr γ ≤ 0 at the first node
        // where the trace is visible
        let last = c - 1;
        for node in 0..field.len() {
            let frame = field.local(node);
            let w = frame.weingarten(last);
            let tr: f64 = (0..k).map(|a| w[a * k + a]).sum();
            if math::abs(tr) > 1e-10 {
                if tr > 0.0 {
                    recipe.sign = -1.0;
                    for node in 0..field.len() {
                        let start = (node * c + last) * n;
                        field.normals[start..start + n].iter_mut().for_each(|v| *v = -*v);
                        let start = (node * c + last) * k * n;
                        field.normal_derivatives[start..start + k * n].iter_mut().for_each(|v| *v = -*v);
                    }
                    field.recipe = recipe.clone();
                }
                break;
            }
        }
    }
    Ok(field)
}

impl FrameField {
    /// Stored frame at a node as a [`LocalFrame`].
    pub fn local(&self, node: usize) -> LocalFrame {
        let c = self.codim();
        LocalFrame {
            position: Vec::new(),
            tangents: (0..self.k).map(|a| self.tangent(node, a).to_vec()).collect(),
            normals: (0..c).map(|a| self.normal(node, a).to_vec()).collect(),
            normal_derivatives: (0..c)
                .map(|a| (0..self.k).map(|al| self.normal_derivative(node, a, al).to_vec()).collect())
                .collect(),
        }
    }

    pub(crate) fn with_rotation(
        &self,
        normals: Vec<f64>,
        normal_derivatives: Vec<f64>,
        rotation: Rotation,
    ) -> FrameField {
        FrameField {
            grid: self.grid.clone(),
            n: self.n,
            k: self.k,
            tangents: self.tangents.clone(),
            normals,
            normal_derivatives,
            metric: self.metric.clone(),
            metric_det: self.metric_det.clone(),
            recipe: self.recipe.clone(),
            rotation: Some(rotation),
        }
    }
}

/// Unrotated frame at arbitrary parameters.
pub(crate) fn local_frame(embedding: &Embedding, params: &[f64], recipe: &Recipe) -> Result<LocalFrame> {
    let jet = embedding.jet(params, 3)?;
    Ok(frame_from_jet(&jet, recipe))
}

fn frame_from_jet(jet: &crate::geometry::Jet, recipe: &Recipe) -> LocalFrame {
    let n = jet.ambient_dim();
    let k = jet.intrinsic_dim();
    let lift = |value: &[f64], derivs: [&[f64]; 2], i: usize| -> Dual {
        let d1 = if k > 1 { derivs[1][i] } else { 0.0 };
        Dual::new(value[i], [derivs[0][i], d1])
    };
    let zero = vec![0.0; n];
    let pos_d: [&[f64]; 2] = [jet.first(0), if k > 1 { jet.first(1) } else { &zero }];
    let position: Vec<Dual> = (0..n).map(|i| lift(jet.position(), pos_d, i)).collect();
    let tangents: Vec<Vec<Dual>> = (0..k)
        .map(|a| {
            let d: [&[f64]; 2] = [jet.second(0, a), if k > 1 { jet.second(1, a) } else { &zero }];
            (0..n).map(|i| lift(jet.first(a), d, i)).collect()
        })
        .collect();
    let accel: Option<Vec<Dual>> = if k == 1 {
        Some((0..n).map(|i| Dual::new(jet.second(0, 0)[i], [jet.third(0, 0, 0)[i], 0.0])).collect())
    } else {
        None
    };
    let (normals, _) = construct(&position, &tangents, accel.as_deref(), recipe);
    LocalFrame {
        position: jet.position().to_vec(),
        tangents: (0..k).map(|a| jet.first(a).to_vec()).collect(),
        normal_derivatives: normals
            .iter()
            .map(|nv| (0..k).map(|al| nv.iter().map(|x| x.d[al]).collect()).collect())
            .collect(),
        normals: normals.iter().map(|nv| nv.iter().map(|x| x.v).collect()).collect(),
    }
}

/// Normal completion of the tangent span. Returns the normals and the
/// smallest seed residual `|P⊥ v|/|v|` (∞ without seeds).
fn construct<T: Real>(position: &[T], tangents: &[Vec<T>], accel: Option<&[T]>, recipe: &Recipe) -> (Vec<Vec<T>>, f64) {
    let n = position.len();
    let k = tangents.len();
    let c = n - k;
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(n);
    for t in tangents {
        let mut v = t.clone();
        orthogonalize(&mut v, &basis);
        normalize(&mut v);
        basis.push(v);
    }
    let mut normals = Vec::with_capacity(c);
    let mut worst = f64::INFINITY;
    for seed in &recipe.seeds {
        let mut v: Vec<T> = match seed {
            NormalSeed::Inward => position.iter().map(|x| -*x).collect(),
            NormalSeed::Curvature => match accel {
                Some(a) => a.to_vec(),
                None => vec![T::constant(0.0); n],
            },
            NormalSeed::Axis(i) => (0..n).map(|j| T::constant(if j == *i { 1.0 } else { 0.0 })).collect(),
        };
        let len = dual::dot(&v, &v).sqrt().value();
        orthogonalize(&mut v, &basis);
        let residual = dual::dot(&v, &v).sqrt().value();
        worst = worst.min(if len > 0.0 { residual / len } else { 0.0 });
        if !(residual > 0.0) {
            // degenerate seed; keep a finite frame for residual reporting
            normals.push(v.clone());
            basis.push(v);
            continue;
        }
        normalize(&mut v);
        normals.push(v.clone());
        basis.push(v);
    }
    if worst.is_infinite() && !recipe.seeds.is_empty() {
        worst = 0.0;
    }
    let mut last = vec![T::constant(0.0); n];
    {
        let refs: Vec<&[T]> = tangents.iter().map(|t| t.as_slice()).chain(normals.iter().map(|v| v.as_slice())).collect();
        dual::cross(&refs, &mut last);
    }
    normalize(&mut last);
    if recipe.sign < 0.0 {
        last.iter_mut().for_each(|x| *x = -*x);
    }
    normals.push(last);
    (normals, worst)
}

fn orthogonalize<T: Real>(v: &mut [T], basis: &[Vec<T>]) {
    // two passes keep the result orthogonal to working precision
    for _ in 0..2 {
        for b in basis {
            let p = dual::dot(v, b);
            for (x, y) in v.iter_mut().zip(b) {
                *x = *x - p * *y;
            }
        }
    }
}

fn normalize<T: Real>(v: &mut [T]) {
    let len = dual::dot(v, v).sqrt();
    if len.value() > 0.0 {
        for x in v.iter_mut() {
            *x = *x / len;
        }
    }
}

pub(crate) fn gram(vectors: &[Vec<f64>]) -> Vec<f64> {
    let k = vectors.len();
    let mut g = vec![0.0; k * k];
    for a in 0..k {
        for b in 0..k {
            g[a * k + b] = math::dot(&vectors[a], &vectors[b]);
        }
    }
    g
}

pub(crate) fn det_small(g: &[f64], k: usize) -> f64 {
    match k {
        1 => g[0],
        2 => g[0] * g[3] - g[1] * g[2],
        3 => {
            g[0] * (g[4] * g[8] - g[5] * g[7]) - g[1] * (g[3] * g[8] - g[5] * g[6]) + g[2] * (g[3] * g[7] - g[4] * g[6])
        }
        _ => panic!("{}", format!("det_small: unsupported size {}", k)),
    }
}

pub(crate) fn inverse_small(g: &[f64], k: usize) -> Vec<f64> {
    let d = det_small(g, k);
    match k {
        1 => vec![1.0 / g[0]],
        2 => vec![g[3] / d, -g[1] / d, -g[2] / d, g[0] / d],
        3 => {
            let mut inv = vec![0.0; 9];
            for i in 0..3 {
                for j in 0..3 {
                    let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
                    let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
                    inv[i * 3 + j] = (g[r0 * 3 + c0] * g[r1 * 3 + c1] - g[r0 * 3 + c1] * g[r1 * 3 + c0]) / d;
                }
            }
            inv
        }
        _ => panic!("{}", format!("inverse_small: unsupported size {}", k)),
    }
}

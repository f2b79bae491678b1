//! Laplace–Beltrami, momentum and Schrödinger operators on sample grids.
//!
//! Sign convention: [`laplace_beltrami`] discretises `Δ` itself, which is
//! negative semi-definite; Hamiltonians are `−Δ + V`.
//!
//! Boundary handling follows the grid: periodic axes wrap, open axes are
//! cell-centred with a mirrored ghost node (`f = 0` on the outer face).
//! Faces where the metric degenerates carry no flux, which is how the sphere
//! poles are treated.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::frames::{build_frames, connection_coefficients, det_small, hashimoto_rotate, inverse_small};
use crate::geometry::{Axis, Boundary, Embedding, SampleGrid};
use crate::linalg::{Matrix, Scalar};
use crate::math;
use crate::tubular::effective_potential;
use crate::{Error, Result};

/// Which inner product an operator is self-adjoint in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gauge {
    /// Functions; pairing `Σ ū v √g h^k`.
    Raw,
    /// Half densities `g^{1/4} f`; plain pairing `Σ ū v h^k`.
    HalfDensity,
}

/// Square operator on the nodes of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteOperator<T: Scalar = f64> {
    grid: SampleGrid,
    matrix: Matrix<T>,
    gauge: Gauge,
    weight: Vec<f64>,
    boundary: Boundary,
}

impl<T: Scalar> DiscreteOperator<T> {
    /// Wraps a matrix. `weight` is `√g` per node.
    pub fn new(grid: SampleGrid, matrix: Matrix<T>, gauge: Gauge, weight: Vec<f64>) -> Result<Self> {
        if matrix.dim() != grid.len() {
            return Err(Error::GridMismatch {
                expected: grid.len(),
                got: matrix.dim(),
            });
        }
        if weight.len() != grid.len() {
            return Err(Error::GridMismatch {
                expected: grid.len(),
                got: weight.len(),
            });
        }
        let boundary = if grid.axes().iter().all(|a| a.periodic) {
            Boundary::Periodic
        } else {
            Boundary::Dirichlet
        };
        Ok(DiscreteOperator {
            grid,
            matrix,
            gauge,
            weight,
            boundary,
        })
    }

    pub fn grid(&self) -> &SampleGrid {
        &self.grid
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn gauge(&self) -> Gauge {
        self.gauge
    }

    /// `√g` at each node.
    pub fn weight(&self) -> &[f64] {
        &self.weight
    }

    /// `Periodic` when every axis wraps, otherwise `Dirichlet` on the open
    /// axes.
    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        self.matrix.apply(x)
    }

    /// Quadrature weights of the gauge pairing: `√g h^k` or `h^k`.
    pub fn pairing_weights(&self) -> Vec<f64> {
        let cell = self.grid.cell_volume();
        match self.gauge {
            Gauge::Raw => self.weight.iter().map(|w| w * cell).collect(),
            Gauge::HalfDensity => vec![cell; self.weight.len()],
        }
    }

    /// `‖W A − Aᴴ W‖_F / ‖W A‖_F` with `W` the pairing weights; zero for an
    /// operator that is self-adjoint in its gauge.
    pub fn self_adjointness_residual(&self) -> f64 {
        let w = self.pairing_weights();
        let wa = self.matrix.map(|i, _, v| v.scale(w[i]));
        let norm = wa.frobenius_norm();
        if norm == 0.0 {
            return 0.0;
        }
        wa.frobenius_distance(&wa.conj_transpose()) / norm
    }

    /// `A + diag(v)` in the same gauge.
    pub fn plus_diagonal(&self, v: &[T]) -> Result<Self> {
        if v.len() != self.dim() {
            return Err(Error::GridMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        Ok(DiscreteOperator {
            matrix: self.matrix.add_diagonal(v),
            ..self.clone()
        })
    }

    /// `c·A`.
    pub fn scaled(&self, c: f64) -> Self {
        DiscreteOperator {
            matrix: self.matrix.map(|_, _, v| v.scale(c)),
            ..self.clone()
        }
    }
}

impl DiscreteOperator<f64> {
    /// `−A + diag(potential)`, the Schrödinger operator built on a Laplacian.
    pub fn schrodinger(&self, potential: &[f64]) -> Result<Self> {
        self.scaled(-1.0).plus_diagonal(potential)
    }

    /// Promotes a real operator to complex entries.
    pub fn to_complex(&self) -> DiscreteOperator<Complex64> {
        DiscreteOperator {
            grid: self.grid.clone(),
            matrix: match &self.matrix {
                Matrix::Dense { n, data } => Matrix::Dense {
                    n: *n,
                    data: data.iter().map(|v| Complex64::new(*v, 0.0)).collect(),
                },
                Matrix::Sparse { n, row_ptr, cols, vals } => Matrix::Sparse {
                    n: *n,
                    row_ptr: row_ptr.clone(),
                    cols: cols.clone(),
                    vals: vals.iter().map(|v| Complex64::new(*v, 0.0)).collect(),
                },
            },
            gauge: self.gauge,
            weight: self.weight.clone(),
            boundary: self.boundary,
        }
    }
}

/// Metric, first and second derivatives at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricJet {
    pub dim: usize,
    /// `g_{αβ}`, row-major `k × k`.
    pub g: Vec<f64>,
    /// `∂_γ g_{αβ}` at `[γ·k² + α·k + β]`.
    pub dg: Vec<f64>,
    /// `∂_γ∂_δ g_{αβ}` at `[(γ·k + δ)·k² + α·k + β]`.
    pub ddg: Vec<f64>,
}

/// A Riemannian metric in coordinates.
pub trait MetricField: Sync {
    fn dim(&self) -> usize;

    /// `g_{αβ}` row-major.
    fn metric(&self, params: &[f64]) -> Result<Vec<f64>>;

    /// Metric with derivatives; the default uses Richardson-extrapolated
    /// central differences.
    fn metric_jet(&self, params: &[f64]) -> Result<MetricJet> {
        fd_metric_jet(self, params)
    }

    /// Lets assembly skip the mixed-derivative stencil.
    fn is_diagonal(&self) -> bool {
        false
    }
}

const FD_STEP: f64 = 2e-3;

fn fd_metric_jet<M: MetricField + ?Sized>(m: &M, params: &[f64]) -> Result<MetricJet> {
    let k = m.dim();
    let kk = k * k;
    let g = m.metric(params)?;
    let at = |shift: &[(usize, f64)]| -> Result<Vec<f64>> {
        let mut p = params.to_vec();
        for &(a, d) in shift {
            p[a] += d;
        }
        m.metric(&p)
    };
    let mut dg = vec![0.0; k * kk];
    let mut ddg = vec![0.0; kk * kk];
    for a in 0..k {
        let mut first = [vec![0.0; kk], vec![0.0; kk]];
        let mut second = [vec![0.0; kk], vec![0.0; kk]];
        for (level, h) in [FD_STEP, 0.5 * FD_STEP].into_iter().enumerate() {
            let (p, q) = (at(&[(a, h)])?, at(&[(a, -h)])?);
            for e in 0..kk {
                first[level][e] = (p[e] - q[e]) / (2.0 * h);
                second[level][e] = (p[e] - 2.0 * g[e] + q[e]) / (h * h);
            }
        }
        for e in 0..kk {
            dg[a * kk + e] = (4.0 * first[1][e] - first[0][e]) / 3.0;
            ddg[(a * k + a) * kk + e] = (4.0 * second[1][e] - second[0][e]) / 3.0;
        }
        for b in (a + 1)..k {
            let mut mixed = [vec![0.0; kk], vec![0.0; kk]];
            for (level, h) in [FD_STEP, 0.5 * FD_STEP].into_iter().enumerate() {
                let pp = at(&[(a, h), (b, h)])?;
                let pm = at(&[(a, h), (b, -h)])?;
                let mp = at(&[(a, -h), (b, h)])?;
                let mm = at(&[(a, -h), (b, -h)])?;
                for e in 0..kk {
                    mixed[level][e] = (pp[e] - pm[e] - mp[e] + mm[e]) / (4.0 * h * h);
                }
            }
            for e in 0..kk {
                let v = (4.0 * mixed[1][e] - mixed[0][e]) / 3.0;
                ddg[(a * k + b) * kk + e] = v;
                ddg[(b * k + a) * kk + e] = v;
            }
        }
    }
    Ok(MetricJet { dim: k, g, dg, ddg })
}

impl MetricField for Embedding {
    fn dim(&self) -> usize {
        self.intrinsic_dim()
    }

    fn metric(&self, params: &[f64]) -> Result<Vec<f64>> {
        Ok(self.jet(params, 1)?.metric())
    }

    /// Exact, from the third-order jet.
    fn metric_jet(&self, params: &[f64]) -> Result<MetricJet> {
        let k = self.intrinsic_dim();
        let kk = k * k;
        let jet = self.jet(params, 3)?;
        let g = jet.metric();
        let mut dg = vec![0.0; k * kk];
        let mut ddg = vec![0.0; kk * kk];
        for c in 0..k {
            for a in 0..k {
                for b in 0..k {
                    dg[c * kk + a * k + b] =
                        math::dot(jet.second(a, c), jet.first(b)) + math::dot(jet.first(a), jet.second(b, c));
                    for d in 0..k {
                        ddg[(c * k + d) * kk + a * k + b] = math::dot(jet.third(a, c, d), jet.first(b))
                            + math::dot(jet.second(a, c), jet.second(b, d))
                            + math::dot(jet.second(a, d), jet.second(b, c))
                            + math::dot(jet.first(a), jet.third(b, c, d));
                    }
                }
            }
        }
        Ok(MetricJet { dim: k, g, dg, ddg })
    }
}

/// A metric given by a closure returning `g_{αβ}` row-major.
pub struct FnMetric<F> {
    dim: usize,
    f: F,
    diagonal: bool,
}

impl<F: Fn(&[f64]) -> Vec<f64> + Sync> FnMetric<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnMetric { dim, f, diagonal: false }
    }

    /// Declares the metric diagonal so assembly skips mixed terms.
    pub fn diagonal(dim: usize, f: F) -> Self {
        FnMetric { dim, f, diagonal: true }
    }
}

impl<F: Fn(&[f64]) -> Vec<f64> + Sync> MetricField for FnMetric<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn metric(&self, params: &[f64]) -> Result<Vec<f64>> {
        let g = (self.f)(params);
        if g.len() != self.dim * self.dim {
            return Err(Error::GridMismatch {
                expected: self.dim * self.dim,
                got: g.len(),
            });
        }
        Ok(g)
    }

    fn is_diagonal(&self) -> bool {
        self.diagonal
    }
}

fn check_dims(metric: &dyn MetricField, grid: &SampleGrid) -> Result<()> {
    if metric.dim() != grid.dim() {
        return Err(Error::InvalidGrid(alloc::format!(
            "{}-dimensional grid for a {}-dimensional metric",
            grid.dim(),
            metric.dim()
        )));
    }
    if metric.dim() > 3 {
        return Err(Error::Unsupported("metrics of dimension above 3".to_string()));
    }
    Ok(())
}

/// `√det g` at every node; fails on a non-positive-definite node.
pub fn node_weights(metric: &dyn MetricField, grid: &SampleGrid) -> Result<Vec<f64>> {
    check_dims(metric, grid)?;
    let k = grid.dim();
    (0..grid.len())
        .map(|node| {
            let g = metric.metric(&grid.params(node))?;
            if !positive_definite(&g, k) {
                return Err(Error::DegenerateMetric { node });
            }
            Ok(math::sqrt(det_small(&g, k)))
        })
        .collect()
}

fn positive_definite(g: &[f64], k: usize) -> bool {
    // leading principal minors
    (1..=k).all(|m| {
        let mut sub = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                sub[i * m + j] = g[i * k + j];
            }
        }
        det_small(&sub, m) > 0.0
    })
}

/// Relative determinant below which a face counts as degenerate.
const DEGENERATE_FACE: f64 = 1e-24;

/// Flux coefficient on a face: `√g g̃` (`densitised`) or `g̃`. Zero on a
/// degenerate face.
fn face_coefficient(g: &[f64], k: usize, densitised: bool) -> Vec<f64> {
    let det = det_small(g, k);
    let scale = (0..k).map(|a| math::abs(g[a * k + a])).fold(0.0, f64::max);
    let mut ref_det = 1.0;
    for _ in 0..k {
        ref_det *= scale;
    }
    if !(det > DEGENERATE_FACE * ref_det) {
        return vec![0.0; k * k];
    }
    let inv = inverse_small(g, k);
    let s = if densitised { math::sqrt(det) } else { 1.0 };
    inv.iter().map(|v| v * s).collect()
}

/// Face between nodes `i` and `i + 1`; the outer faces of an open axis sit
/// exactly on the domain ends.
fn face(axis: &Axis, i: isize) -> f64 {
    if !axis.periodic && i == axis.count as isize - 1 {
        axis.hi
    } else if !axis.periodic && i == -1 {
        axis.lo
    } else {
        coordinate(axis, i) + 0.5 * axis.spacing()
    }
}

fn coordinate(axis: &Axis, i: isize) -> f64 {
    let h = axis.spacing();
    if axis.periodic {
        axis.lo + i as f64 * h
    } else {
        axis.lo + (i as f64 + 0.5) * h
    }
}

/// Real node for index `i` along axis `a` of a multi-index, with the sign of
/// the mirrored ghost.
fn fold(grid: &SampleGrid, a: usize, i: isize) -> (usize, f64) {
    let n = grid.axis(a).count as isize;
    if grid.axis(a).periodic {
        (i.rem_euclid(n) as usize, 1.0)
    } else if i < 0 {
        (0, -1.0)
    } else if i >= n {
        ((n - 1) as usize, -1.0)
    } else {
        (i as usize, 1.0)
    }
}

/// Symmetric flux-form assembly of `M f = ∂_α(c^{αβ} ∂_β f)` where `c` is a
/// coefficient field evaluated exactly on faces and edges.
///
/// The matrix is minus half the Hessian of the discrete Dirichlet energy
/// `Σ c^{αβ} δ_α f δ_β f`, so it is symmetric by construction.
fn assemble_flux(metric: &dyn MetricField, grid: &SampleGrid, densitised: bool) -> Result<Vec<(usize, usize, f64)>> {
    let k = grid.dim();
    let mut triplets = Vec::new();
    let mut node_multi = vec![0isize; k];
    let mut params = vec![0.0; k];
    // diagonal terms on faces
    for a in 0..k {
        let axis = *grid.axis(a);
        let h = axis.spacing();
        let lower = if axis.periodic { 0 } else { -1 };
        let upper = axis.count as isize - 1;
        for base in 0..grid.len() {
            if grid.coordinate(base, a) != 0 {
                continue;
            }
            for d in 0..k {
                node_multi[d] = grid.coordinate(base, d) as isize;
            }
            for i in lower..=upper {
                node_multi[a] = i;
                for d in 0..k {
                    params[d] = coordinate(grid.axis(d), node_multi[d]);
                }
                params[a] = face(&axis, i);
                let g = metric.metric(&params)?;
                let c = face_coefficient(&g, k, densitised)[a * k + a];
                if c == 0.0 {
                    continue;
                }
                let boundary = !axis.periodic && (i == -1 || i == upper);
                let wgt = if boundary { 0.5 } else { 1.0 };
                let lo = node_index(grid, &node_multi, a, i);
                let hi = node_index(grid, &node_multi, a, i + 1);
                let stencil = [(lo.0, -lo.1 / h), (hi.0, hi.1 / h)];
                push_product(&mut triplets, -wgt * c, &stencil, &stencil);
            }
        }
    }
    if metric.is_diagonal() {
        return Ok(triplets);
    }
    // mixed terms on edges (corners in 2D)
    for a in 0..k {
        for b in (a + 1)..k {
            let (ax, bx) = (*grid.axis(a), *grid.axis(b));
            let (ha, hb) = (ax.spacing(), bx.spacing());
            let a_range = if ax.periodic { 0 } else { -1 }..ax.count as isize;
            let b_range = if bx.periodic { 0 } else { -1 }..bx.count as isize;
            for base in 0..grid.len() {
                if grid.coordinate(base, a) != 0 || grid.coordinate(base, b) != 0 {
                    continue;
                }
                for d in 0..k {
                    node_multi[d] = grid.coordinate(base, d) as isize;
                }
                for i in a_range.clone() {
                    for j in b_range.clone() {
                        node_multi[a] = i;
                        node_multi[b] = j;
                        for d in 0..k {
                            params[d] = coordinate(grid.axis(d), node_multi[d]);
                        }
                        params[a] = face(&ax, i);
                        params[b] = face(&bx, j);
                        let g = metric.metric(&params)?;
                        let c = face_coefficient(&g, k, densitised)[a * k + b];
                        if c == 0.0 {
                            continue;
                        }
                        let mut wgt = 1.0;
                        if !ax.periodic && (i == -1 || i == ax.count as isize - 1) {
                            wgt *= 0.5;
                        }
                        if !bx.periodic && (j == -1 || j == bx.count as isize - 1) {
                            wgt *= 0.5;
                        }
                        let corner = |di: isize, dj: isize| {
                            let mut m = node_multi.clone();
                            m[a] = i + di;
                            m[b] = j + dj;
                            let (p, s1) = fold(grid, a, m[a]);
                            let (q, s2) = fold(grid, b, m[b]);
                            m[a] = p as isize;
                            m[b] = q as isize;
                            let idx: usize = (0..k).map(|d| m[d] as usize * grid.stride(d)).sum();
                            (idx, s1 * s2)
                        };
                        let n00 = corner(0, 0);
                        let n10 = corner(1, 0);
                        let n01 = corner(0, 1);
                        let n11 = corner(1, 1);
                        let u = [
                            (n00.0, -n00.1 / (2.0 * ha)),
                            (n10.0, n10.1 / (2.0 * ha)),
                            (n01.0, -n01.1 / (2.0 * ha)),
                            (n11.0, n11.1 / (2.0 * ha)),
                        ];
                        let w = [
                            (n00.0, -n00.1 / (2.0 * hb)),
                            (n10.0, -n10.1 / (2.0 * hb)),
                            (n01.0, n01.1 / (2.0 * hb)),
                            (n11.0, n11.1 / (2.0 * hb)),
                        ];
                        push_product(&mut triplets, -wgt * c, &u, &w);
                        push_product(&mut triplets, -wgt * c, &w, &u);
                    }
                }
            }
        }
    }
    Ok(triplets)
}

fn node_index(grid: &SampleGrid, multi: &[isize], a: usize, i: isize) -> (usize, f64) {
    let (p, sign) = fold(grid, a, i);
    let idx: usize = multi
        .iter()
        .enumerate()
        .map(|(d, &m)| if d == a { p } else { m as usize } * grid.stride(d))
        .sum();
    (idx, sign)
}

/// Appends `scale · u vᵀ`.
fn push_product(out: &mut Vec<(usize, usize, f64)>, scale: f64, u: &[(usize, f64)], v: &[(usize, f64)]) {
    for &(i, x) in u {
        for &(j, y) in v {
            out.push((i, j, scale * x * y));
        }
    }
}

/// `Δ = g^{−1/2} ∂_i (g^{1/2} g̃^{ij} ∂_j)` in conservative flux form, raw
/// gauge.
///
/// Face coefficients use the exact metric at face centres. With periodic
/// axes the rows sum to zero.
pub fn laplace_beltrami(metric: &dyn MetricField, grid: &SampleGrid) -> Result<DiscreteOperator> {
    let weight = node_weights(metric, grid)?;
    let triplets: Vec<(usize, usize, f64)> = assemble_flux(metric, grid, true)?
        .into_iter()
        .map(|(i, j, v)| (i, j, v / weight[i]))
        .collect();
    let matrix = Matrix::from_triplets(grid.len(), &triplets);
    DiscreteOperator::new(grid.clone(), matrix, Gauge::Raw, weight)
}

/// Conjugation `P ↦ g^{1/4} P g^{−1/4}` from the raw to the half-density
/// gauge. Half-density operators are returned unchanged.
pub fn half_density_transform<T: Scalar>(op: &DiscreteOperator<T>) -> Result<DiscreteOperator<T>> {
    if op.gauge == Gauge::HalfDensity {
        return Ok(op.clone());
    }
    let quarter = quarter_powers(&op.weight)?;
    let matrix = op.matrix.map(|i, j, v| v.scale(quarter[i] / quarter[j]));
    Ok(DiscreteOperator {
        matrix,
        gauge: Gauge::HalfDensity,
        ..op.clone()
    })
}

/// Inverse of [`half_density_transform`].
pub fn raw_transform<T: Scalar>(op: &DiscreteOperator<T>) -> Result<DiscreteOperator<T>> {
    if op.gauge == Gauge::Raw {
        return Ok(op.clone());
    }
    let quarter = quarter_powers(&op.weight)?;
    let matrix = op.matrix.map(|i, j, v| v.scale(quarter[j] / quarter[i]));
    Ok(DiscreteOperator {
        matrix,
        gauge: Gauge::Raw,
        ..op.clone()
    })
}

/// `g^{1/4} = √(√g)` per node.
pub(crate) fn quarter_powers(weight: &[f64]) -> Result<Vec<f64>> {
    weight
        .iter()
        .enumerate()
        .map(|(node, w)| {
            if *w > 0.0 && w.is_finite() {
                Ok(math::sqrt(*w))
            } else {
                Err(Error::ZeroWeight { node })
            }
        })
        .collect()
}

/// Skew central difference along `axis`; zero extension past open ends.
fn central_difference(grid: &SampleGrid, axis: usize) -> Vec<(usize, usize, f64)> {
    let h = grid.spacing(axis);
    let mut t = Vec::with_capacity(2 * grid.len());
    for p in 0..grid.len() {
        if let Some(q) = grid.neighbor(p, axis, true) {
            t.push((p, q, 0.5 / h));
        }
        if let Some(q) = grid.neighbor(p, axis, false) {
            t.push((p, q, -0.5 / h));
        }
    }
    t
}

fn check_axis(grid: &SampleGrid, axis: usize) -> Result<()> {
    if axis >= grid.dim() {
        return Err(Error::InvalidGrid(alloc::format!("no axis {} on a {}-dimensional grid", axis, grid.dim())));
    }
    Ok(())
}

/// Self-adjoint connection `∇^{SA}_α = g^{−1/4} ∂_α g^{1/4} = ∂_α + ¼ ∂_α log g`
/// as `½(D + W⁻¹ D W)` with `D` the central difference and `W = diag(√g)`.
///
/// The symmetrised form makes `∇^{SA}` skew in the weighted pairing, and on
/// the constant function it yields the drift `(w₊ − w₋)/(4h w)` exactly.
pub fn self_adjoint_connection(axis: usize, metric: &dyn MetricField, grid: &SampleGrid) -> Result<DiscreteOperator> {
    check_axis(grid, axis)?;
    let weight = node_weights(metric, grid)?;
    let mut t = Vec::new();
    for (p, q, d) in central_difference(grid, axis) {
        t.push((p, q, 0.5 * d));
        t.push((p, q, 0.5 * d * weight[q] / weight[p]));
    }
    let matrix = Matrix::from_triplets(grid.len(), &t);
    DiscreteOperator::new(grid.clone(), matrix, Gauge::Raw, weight)
}

/// Momentum operator `𝔭_α = √−1 ∇^{SA}_α`, self-adjoint in the weighted
/// pairing.
pub fn momentum_operator(axis: usize, metric: &dyn MetricField, grid: &SampleGrid) -> Result<DiscreteOperator<Complex64>> {
    let op = self_adjoint_connection(axis, metric, grid)?.to_complex();
    let i = Complex64::new(0.0, 1.0);
    Ok(DiscreteOperator {
        matrix: op.matrix.map(|_, _, v| i * v),
        ..op
    })
}

/// Plain `√−1 ∂_α` by central differences, without the drift term. Not
/// self-adjoint in the weighted pairing unless `g` is constant.
pub fn plain_momentum(axis: usize, metric: &dyn MetricField, grid: &SampleGrid) -> Result<DiscreteOperator<Complex64>> {
    check_axis(grid, axis)?;
    let weight = node_weights(metric, grid)?;
    let t: Vec<(usize, usize, Complex64)> = central_difference(grid, axis)
        .into_iter()
        .map(|(p, q, d)| (p, q, Complex64::new(0.0, d)))
        .collect();
    let matrix = Matrix::from_triplets(grid.len(), &t);
    DiscreteOperator::new(grid.clone(), matrix, Gauge::Raw, weight)
}

/// Adjoint in the operator's own pairing: `W⁻¹ Aᴴ W` in the raw gauge,
/// `Aᴴ` in the half-density gauge.
pub fn adjoint<T: Scalar>(op: &DiscreteOperator<T>) -> DiscreteOperator<T> {
    let t = op.matrix.conj_transpose();
    let matrix = match op.gauge {
        Gauge::HalfDensity => t,
        Gauge::Raw => {
            let w = &op.weight;
            t.map(|i, j, v| v.scale(w[j] / w[i]))
        }
    };
    DiscreteOperator {
        matrix,
        ..op.clone()
    }
}

/// `Δ` assembled as `∇^{SA}_i g̃^{ij} ∇^{SA}_j − Z` with
///
/// ```text
/// Z = ¼ (∂_i g̃^{ij}) ∂_j ℓ + ¼ g̃^{ij} ∂_i ∂_j ℓ + 1/16 g̃^{ij} ∂_i ℓ ∂_j ℓ,   ℓ = log g.
/// ```
///
/// The principal part is `g^{−1/4} ∂_i g̃^{ij} ∂_j g^{1/4}` in flux form, so
/// the result differs from [`laplace_beltrami`] only by `O(h²)`.
pub fn beltrami_sa_expansion(metric: &dyn MetricField, grid: &SampleGrid) -> Result<DiscreteOperator> {
    let weight = node_weights(metric, grid)?;
    let quarter = quarter_powers(&weight)?;
    let k = grid.dim();
    let mut triplets: Vec<(usize, usize, f64)> = assemble_flux(metric, grid, false)?
        .into_iter()
        .map(|(i, j, v)| (i, j, v * quarter[j] / quarter[i]))
        .collect();
    for node in 0..grid.len() {
        let jet = metric.metric_jet(&grid.params(node))?;
        triplets.push((node, node, -zeroth_order_term(&jet, k)));
    }
    let matrix = Matrix::from_triplets(grid.len(), &triplets);
    DiscreteOperator::new(grid.clone(), matrix, Gauge::Raw, weight)
}

/// `Z` of [`beltrami_sa_expansion`] from a metric jet.
pub fn zeroth_order_term(jet: &MetricJet, k: usize) -> f64 {
    let kk = k * k;
    let inv = inverse_small(&jet.g, k);
    let prod = |x: &[f64], y: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; kk];
        for i in 0..k {
            for j in 0..k {
                out[i * k + j] = (0..k).map(|m| x[i * k + m] * y[m * k + j]).sum();
            }
        }
        out
    };
    let trace = |x: &[f64]| (0..k).map(|i| x[i * k + i]).sum::<f64>();
    let dg = |c: usize| &jet.dg[c * kk..(c + 1) * kk];
    // ∂_i ℓ = tr(g̃ ∂_i g)
    let dl: Vec<f64> = (0..k).map(|i| trace(&prod(&inv, dg(i)))).collect();
    let mut z = 0.0;
    for i in 0..k {
        // ∂_i g̃ = −g̃ ∂_i g g̃
        let dinv = prod(&prod(&inv, dg(i)), &inv);
        for j in 0..k {
            z -= 0.25 * dinv[i * k + j] * dl[j];
            let ddg = &jet.ddg[(i * k + j) * kk..(i * k + j + 1) * kk];
            let ddl = trace(&prod(&inv, ddg)) - trace(&prod(&prod(&inv, dg(i)), &prod(&inv, dg(j))));
            z += 0.25 * inv[i * k + j] * ddl;
            z += inv[i * k + j] * dl[i] * dl[j] / 16.0;
        }
    }
    z
}

/// `−Δ_S + V_eff` on the half-density gauge for a catalog or sampled
/// submanifold.
///
/// The normal frame is Hashimoto-rotated when the codimension allows it; the
/// potential is invariant under normal rotations either way.
pub fn submanifold_hamiltonian(embedding: &Embedding, grid: &SampleGrid) -> Result<DiscreteOperator> {
    let frames = build_frames(embedding, grid)?;
    let coeffs = connection_coefficients(embedding, &frames)?;
    let coeffs = if coeffs.codim() <= 2 {
        hashimoto_rotate(&coeffs, &frames)?.1
    } else {
        coeffs
    };
    let potential = effective_potential(&coeffs);
    let laplacian = half_density_transform(&laplace_beltrami(embedding, grid)?)?;
    laplacian.schrodinger(&potential)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::catalog_shape;
    use crate::linalg::symmetric_eigen;
    use core::f64::consts::PI;

    fn periodic_line(n: usize) -> SampleGrid {
        SampleGrid::new(vec![Axis::new(n, 0.0, 2.0 * PI, true)]).unwrap()
    }

    #[test]
    fn flat_periodic_stencil() {
        let grid = periodic_line(16);
        let flat = FnMetric::new(1, |_: &[f64]| vec![1.0]);
        let op = laplace_beltrami(&flat, &grid).unwrap();
        let h = grid.spacing(0);
        let m = op.matrix();
        assert!((m.get(3, 3) + 2.0 / (h * h)).abs() < 1e-10);
        assert!((m.get(3, 4) - 1.0 / (h * h)).abs() < 1e-10);
        assert!((m.get(0, 15) - 1.0 / (h * h)).abs() < 1e-10);
        let ones = vec![1.0; 16];
        assert!(op.apply(&ones).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn dirichlet_cell_centred_spectrum_is_exact_sine_series() {
        let grid = SampleGrid::new(vec![Axis::new(20, 0.0, 1.0, false)]).unwrap();
        let flat = FnMetric::new(1, |_: &[f64]| vec![1.0]);
        let op = laplace_beltrami(&flat, &grid).unwrap();
        let (d, _) = symmetric_eigen(&op.scaled(-1.0).matrix().to_dense(), 20);
        let h = 0.05;
        for m in 1..=4 {
            let exact = (2.0 - 2.0 * (PI * m as f64 * h).cos()) / (h * h);
            assert!((d[m - 1] - exact).abs() < 1e-9 * exact);
        }
    }

    #[test]
    fn raw_gauge_is_weighted_self_adjoint_and_half_density_symmetric() {
        let grid = periodic_line(40);
        let metric = FnMetric::new(1, |p: &[f64]| vec![(1.0 + 0.3 * p[0].sin()).powi(2)]);
        let raw = laplace_beltrami(&metric, &grid).unwrap();
        assert!(raw.self_adjointness_residual() < 1e-13);
        let half = half_density_transform(&raw).unwrap();
        assert!(half.matrix().symmetry_residual() < 1e-13);
        let back = raw_transform(&half).unwrap();
        assert!(back.matrix().frobenius_distance(raw.matrix()) < 1e-12 * raw.matrix().frobenius_norm());
    }

    #[test]
    fn mixed_metric_is_symmetric_and_annihilates_constants() {
        let grid = SampleGrid::new(vec![Axis::new(12, 0.0, 2.0 * PI, true), Axis::new(10, 0.0, 2.0 * PI, true)]).unwrap();
        let metric = FnMetric::new(2, |p: &[f64]| {
            let c = 0.3 * (p[0] + p[1]).cos();
            vec![2.0 + p[1].sin() * 0.5, c, c, 1.5 + 0.2 * p[0].cos()]
        });
        let op = laplace_beltrami(&metric, &grid).unwrap();
        assert!(op.self_adjointness_residual() < 1e-13);
        let ones = vec![1.0; grid.len()];
        assert!(op.apply(&ones).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn mixed_stencil_reproduces_cross_derivative() {
        // g̃ has an off-diagonal part; f = sin x sin y
        let grid = SampleGrid::new(vec![Axis::new(64, 0.0, 2.0 * PI, true), Axis::new(64, 0.0, 2.0 * PI, true)]).unwrap();
        let metric = FnMetric::new(2, |_: &[f64]| vec![1.0, 0.5, 0.5, 1.0]);
        let op = laplace_beltrami(&metric, &grid).unwrap();
        let f: Vec<f64> = (0..grid.len()).map(|i| {
            let p = grid.params(i);
            p[0].sin() * p[1].sin()
        }).collect();
        let lf = op.apply(&f);
        // g̃ = [[4/3, −2/3], [−2/3, 4/3]]
        let worst = (0..grid.len()).map(|i| {
            let p = grid.params(i);
            let exact = -(8.0 / 3.0) * p[0].sin() * p[1].sin() - (4.0 / 3.0) * p[0].cos() * p[1].cos();
            (lf[i] - exact).abs()
        }).fold(0.0, f64::max);
        assert!(worst < 5e-3, "{worst}");
    }

    #[test]
    fn momentum_drift_and_self_adjointness() {
        let grid = SampleGrid::new(vec![Axis::new(32, 1.0, 3.0, false)]).unwrap();
        let radial = FnMetric::new(1, |p: &[f64]| vec![p[0] * p[0]]);
        let p = momentum_operator(0, &radial, &grid).unwrap();
        let ones = vec![Complex64::new(1.0, 0.0); 32];
        let drift = p.apply(&ones);
        for node in 1..31 {
            let r = grid.params(node)[0];
            assert!((drift[node] - Complex64::new(0.0, 0.5 / r)).norm() < 1e-12);
        }
        assert!(p.self_adjointness_residual() < 1e-14);
        let plain = plain_momentum(0, &radial, &grid).unwrap();
        assert!(plain.self_adjointness_residual() > 1e-2);
        let adj = adjoint(&p);
        assert!(adj.matrix().frobenius_distance(p.matrix()) < 1e-12 * p.matrix().frobenius_norm());
    }

    #[test]
    fn outer_faces_stay_inside_open_domains() {
        let helix = catalog_shape("helix", &[3.0, 4.0]).unwrap();
        for n in [48, 100, 333] {
            let grid = SampleGrid::on_domain(helix.domain(), &[n], Boundary::Dirichlet).unwrap();
            assert!(submanifold_hamiltonian(&helix, &grid).is_ok(), "n = {n}");
        }
    }

    #[test]
    fn adjoint_is_an_involution() {
        let grid = periodic_line(24);
        let metric = FnMetric::new(1, |p: &[f64]| vec![1.0 + 0.5 * p[0].cos()]);
        let plain = plain_momentum(0, &metric, &grid).unwrap();
        let twice = adjoint(&adjoint(&plain));
        assert!(twice.matrix().frobenius_distance(plain.matrix()) <= 1e-15 * plain.matrix().frobenius_norm());
    }

    #[test]
    fn expansion_zeroth_terms_vanish_for_flat_metric() {
        let grid = periodic_line(16);
        let flat = FnMetric::new(1, |_: &[f64]| vec![4.0]);
        let a = beltrami_sa_expansion(&flat, &grid).unwrap();
        let b = laplace_beltrami(&flat, &grid).unwrap();
        assert!(a.matrix().frobenius_distance(b.matrix()) < 1e-12 * b.matrix().frobenius_norm());
    }

    #[test]
    fn embedding_metric_jet_matches_finite_differences() {
        let torus = catalog_shape("torus", &[2.0, 1.0]).unwrap();
        let p = [0.4, 1.1];
        let exact = torus.metric_jet(&p).unwrap();
        let fd = fd_metric_jet(&torus, &p).unwrap();
        for (x, y) in exact.dg.iter().zip(&fd.dg) {
            assert!((x - y).abs() < 1e-9);
        }
        for (x, y) in exact.ddg.iter().zip(&fd.ddg) {
            assert!((x - y).abs() < 1e-7);
        }
    }

    #[test]
    fn arclength_circle_hamiltonian() {
        let circle = catalog_shape("circle", &[1.0]).unwrap();
        let grid = SampleGrid::on_domain(circle.domain(), &[64], Boundary::Periodic).unwrap();
        let h = submanifold_hamiltonian(&circle, &grid).unwrap();
        assert_eq!(h.gauge(), Gauge::HalfDensity);
        let (d, _) = symmetric_eigen(&h.matrix().to_dense(), 64);
        assert!((d[0] + 0.25).abs() < 1e-12);
        assert!((d[1] - 0.75).abs() < 1e-3 && (d[2] - 0.75).abs() < 1e-3);
    }
}

//! Lowest eigenpairs of self-adjoint operators and the gauge pairings.
//!
//! Small operators use a dense symmetric decomposition. Larger ones use
//! shift-invert Lanczos with full reorthogonalisation on an `L D Lᵀ`
//! envelope factorisation: the shift is placed inside the wanted window by
//! inertia counts, converged pairs are locked and deflated, and a final
//! inertia count at the top of the window proves no eigenvalue (or copy of a
//! multiple one) was missed.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::geometry::SampleGrid;
use crate::linalg::{symmetric_eigen, tridiagonal_eigen, Envelope, Matrix, Scalar, SkylineLdl};
use crate::math;
use crate::operators::{half_density_transform, quarter_powers, DiscreteOperator, Gauge};
use crate::{Error, Result};

/// Dimension up to which the dense decomposition is used.
pub const DENSE_EIGEN_LIMIT: usize = 400;
/// Relative asymmetry beyond which an operator is rejected.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;
/// Residual bound `‖Av − λv‖/‖v‖ ≤ RESIDUAL_TOLERANCE·max(1, |λ|)`, floored
/// at [`ROUNDING_FLOOR`]`·ε·‖A‖_∞` where rounding makes the bound unreachable.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;
pub const ROUNDING_FLOOR: f64 = 100.0;
/// Relative spacing under which eigenvalues count as one cluster.
const CLUSTER_TOLERANCE: f64 = 1e-8;
const MAX_PHASES: usize = 24;
const MAX_LANCZOS_STEPS: usize = 400;

/// Lowest eigenpairs of an operator, eigenvectors in the operator's gauge.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<Vec<f64>>,
    residuals: Vec<f64>,
    gauge: Gauge,
    weight: Vec<f64>,
    grid: SampleGrid,
}

impl Spectrum {
    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenvector `i`, normalised in the gauge pairing.
    pub fn eigenvector(&self, i: usize) -> &[f64] {
        &self.eigenvectors[i]
    }

    pub fn eigenvectors(&self) -> &[Vec<f64>] {
        &self.eigenvectors
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn gauge(&self) -> Gauge {
        self.gauge
    }

    pub fn weight(&self) -> &[f64] {
        &self.weight
    }

    pub fn grid(&self) -> &SampleGrid {
        &self.grid
    }

    /// `‖Av − λv‖ / ‖v‖` per pair.
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    /// Largest `residual / max(1, |λ|)`.
    pub fn max_relative_residual(&self) -> f64 {
        self.residuals
            .iter()
            .zip(&self.eigenvalues)
            .map(|(r, l)| r / math::abs(*l).max(1.0))
            .fold(0.0, f64::max)
    }

    /// `max |⟨v_i, v_j⟩ − δ_ij|` in the gauge pairing.
    pub fn orthonormality_defect(&self) -> f64 {
        let w = pairing(self.gauge, &self.weight, &self.grid);
        let mut worst: f64 = 0.0;
        for i in 0..self.len() {
            for j in 0..=i {
                let p: f64 = (0..w.len())
                    .map(|n| self.eigenvectors[i][n] * self.eigenvectors[j][n] * w[n])
                    .sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max(math::abs(p - target));
            }
        }
        worst
    }
}

fn pairing(gauge: Gauge, weight: &[f64], grid: &SampleGrid) -> Vec<f64> {
    let cell = grid.cell_volume();
    match gauge {
        Gauge::Raw => weight.iter().map(|w| w * cell).collect(),
        Gauge::HalfDensity => vec![cell; weight.len()],
    }
}

/// Gauge pairing `Σ ū v √g h^k` (raw) or `Σ ū v h^k` (half density).
pub fn weighted_inner_product<T: Scalar, S: Scalar>(u: &[T], v: &[T], op: &DiscreteOperator<S>) -> Result<Complex64> {
    let n = op.dim();
    for len in [u.len(), v.len()] {
        if len != n {
            return Err(Error::GridMismatch { expected: n, got: len });
        }
    }
    let w = op.pairing_weights();
    Ok(u.iter()
        .zip(v)
        .zip(&w)
        .map(|((a, b), c)| a.conj().to_complex() * b.to_complex() * *c)
        .sum())
}

/// `u ↦ g^{1/4} u`, carrying raw-gauge vectors to half densities.
pub fn half_density_map<T: Scalar>(u: &[T], weight: &[f64]) -> Result<Vec<T>> {
    if u.len() != weight.len() {
        return Err(Error::GridMismatch {
            expected: weight.len(),
            got: u.len(),
        });
    }
    let quarter = quarter_powers(weight)?;
    Ok(u.iter().zip(&quarter).map(|(x, q)| x.scale(*q)).collect())
}

/// The `count` lowest eigenpairs of a real self-adjoint operator.
///
/// Raw-gauge operators are solved in the half-density gauge and mapped back.
/// Members of a degenerate cluster are put into a reproducible basis and
/// ordered by their dominant Fourier index along axis 0.
pub fn eigen_lowest(op: &DiscreteOperator, count: usize) -> Result<Spectrum> {
    let n = op.dim();
    if count > n {
        return Err(Error::TooManyEigenpairs { wanted: count, dim: n });
    }
    let symmetric = match op.gauge() {
        Gauge::HalfDensity => op.clone(),
        Gauge::Raw => {
            let residual = op.self_adjointness_residual();
            if residual > SYMMETRY_TOLERANCE {
                return Err(Error::NotSymmetric { residual });
            }
            half_density_transform(op)?
        }
    };
    let s = symmetric.matrix();
    let residual = s.symmetry_residual();
    if residual > SYMMETRY_TOLERANCE {
        return Err(Error::NotSymmetric { residual });
    }
    let (mut values, mut vectors) = if count == 0 {
        (Vec::new(), Vec::new())
    } else if n <= DENSE_EIGEN_LIMIT {
        dense_lowest(s, count)
    } else {
        lanczos_lowest(s, count)?
    };
    canonicalize(s, op.grid(), &mut values, &mut vectors);
    values.truncate(count);
    vectors.truncate(count);

    let gauge = op.gauge();
    let weight = op.weight().to_vec();
    let quarter = quarter_powers(&weight)?;
    let pair = pairing(gauge, &weight, op.grid());
    let mut residuals = Vec::with_capacity(count);
    for (lambda, v) in values.iter().zip(vectors.iter_mut()) {
        if gauge == Gauge::Raw {
            for (x, q) in v.iter_mut().zip(&quarter) {
                *x /= q;
            }
        }
        let norm = math::sqrt(v.iter().zip(&pair).map(|(x, w)| x * x * w).sum());
        for x in v.iter_mut() {
            *x /= norm;
        }
        let av = op.apply(v);
        let r: f64 = av.iter().zip(v.iter()).map(|(a, x)| (a - lambda * x) * (a - lambda * x)).sum();
        residuals.push(math::sqrt(r) / math::norm(v));
    }
    Ok(Spectrum {
        eigenvalues: values,
        eigenvectors: vectors,
        residuals,
        gauge,
        weight,
        grid: op.grid().clone(),
    })
}

/// Ascending eigenpairs of a symmetric matrix, at least `count` of them and
/// never splitting a cluster at the cut.
fn dense_lowest(s: &Matrix<f64>, count: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = s.dim();
    let (d, v) = symmetric_eigen(&s.to_dense(), n);
    let mut take = count;
    while take < n && clustered(d[take - 1], d[take]) {
        take += 1;
    }
    let vectors = (0..take).map(|c| (0..n).map(|r| v[r * n + c]).collect()).collect();
    (d[..take].to_vec(), vectors)
}

fn clustered(a: f64, b: f64) -> bool {
    math::abs(b - a) <= CLUSTER_TOLERANCE * math::abs(a).max(math::abs(b)).max(1.0)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(c: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += c * xi;
    }
}

/// Deterministic start vector with components along every direction.
fn start_vector(n: usize, phase: usize) -> Vec<f64> {
    const GOLDEN: f64 = 0.618_033_988_749_894_9;
    (0..n)
        .map(|i| {
            let x = (i + 1 + 7919 * phase) as f64;
            (x * GOLDEN).fract() - 0.5 + 0.25 * math::sin(0.37 * x)
        })
        .collect()
}

fn orthogonalize(w: &mut [f64], against: &[Vec<f64>]) {
    for _ in 0..2 {
        for v in against {
            let c = dot(w, v);
            axpy(-c, v, w);
        }
    }
}

/// Factorises `S − σ` nudging σ away from an exactly singular pivot.
fn factor_near(env: &Envelope, sigma: f64) -> Result<(SkylineLdl, f64)> {
    let mut shift = sigma;
    for attempt in 0..4 {
        match env.factor(shift) {
            Ok(f) => return Ok((f, shift)),
            Err(Error::NotPositiveDefinite) => {
                shift = sigma - (1e-10 * math::abs(sigma).max(1.0)) * (attempt + 1) as f64;
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::NotPositiveDefinite)
}

struct ShiftInvert<'a> {
    s: &'a Matrix<f64>,
    ldl: SkylineLdl,
    floor: f64,
}

/// Residual a computed pair must reach.
fn residual_bound(lambda: f64, floor: f64) -> f64 {
    (RESIDUAL_TOLERANCE * math::abs(lambda).max(1.0)).max(floor)
}

impl ShiftInvert<'_> {
    /// Lanczos on `(S − σ)⁻¹` restricted to the complement of `locked`.
    /// Returns the converged pairs nearest the shift, at most `needed`.
    fn phase(&self, locked: &[Vec<f64>], needed: usize, max_steps: usize, start: Vec<f64>) -> Vec<(f64, Vec<f64>)> {
        let mut q = start;
        orthogonalize(&mut q, locked);
        let norm = math::norm(&q);
        if !(norm > 0.0) {
            return Vec::new();
        }
        q.iter_mut().for_each(|x| *x /= norm);
        let mut basis = vec![q];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        for j in 0..max_steps {
            let mut w = self.ldl.solve(&basis[j]);
            let a = dot(&w, &basis[j]);
            alpha.push(a);
            orthogonalize(&mut w, locked);
            orthogonalize(&mut w, &basis);
            let b = math::norm(&w);
            let steps = j + 1;
            let scale = alpha.iter().map(|x| math::abs(*x)).fold(0.0, f64::max);
            let exhausted = !(b > 1e-13 * scale) || steps == max_steps;
            if steps % 5 == 0 || exhausted {
                let accepted = self.converged(&basis, &alpha, &beta, b, needed);
                if accepted.len() >= needed || exhausted {
                    return accepted;
                }
            }
            beta.push(b);
            w.iter_mut().for_each(|x| *x /= b);
            basis.push(w);
        }
        Vec::new()
    }

    fn converged(&self, basis: &[Vec<f64>], alpha: &[f64], beta: &[f64], b: f64, needed: usize) -> Vec<(f64, Vec<f64>)> {
        let m = alpha.len();
        let (mu, s) = tridiagonal_eigen(alpha, beta);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|x, y| math::abs(mu[*y]).total_cmp(&math::abs(mu[*x])));
        let mut accepted = Vec::new();
        for &i in &order {
            if accepted.len() >= needed {
                break;
            }
            if b * math::abs(s[(m - 1) * m + i]) > 1e-6 * math::abs(mu[i]) {
                break;
            }
            let mut y = vec![0.0; basis[0].len()];
            for (k, v) in basis.iter().enumerate() {
                axpy(s[k * m + i], v, &mut y);
            }
            // one inverse-iteration step strips rounding noise from the
            // stiff end of the spectrum
            let mut y = self.ldl.solve(&y);
            let norm = math::norm(&y);
            y.iter_mut().for_each(|x| *x /= norm);
            let sy = self.s.apply(&y);
            let rho = dot(&y, &sy);
            let r: f64 = sy.iter().zip(&y).map(|(a, x)| (a - rho * x) * (a - rho * x)).sum();
            if math::sqrt(r) > 0.5 * residual_bound(rho, self.floor) {
                break;
            }
            accepted.push((rho, y));
        }
        accepted
    }
}

fn lanczos_lowest(s: &Matrix<f64>, count: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = s.dim();
    let env = Envelope::new(s);
    let (sigma, ldl, below) = choose_shift(s, &env, count)?;
    let floor = ROUNDING_FLOOR * f64::EPSILON * s.row_sum_norm();
    let solver = ShiftInvert { s, ldl, floor };

    let mut locked_vals: Vec<f64> = Vec::new();
    let mut locked: Vec<Vec<f64>> = Vec::new();
    let mut target = count.max(below);
    let mut idle = 0;
    for phase in 0..MAX_PHASES {
        if locked.len() < target {
            let needed = target - locked.len();
            let room = n - locked.len();
            let steps = (3 * needed + 40).clamp(60, MAX_LANCZOS_STEPS).min(room);
            let got = solver.phase(&locked, needed, steps, start_vector(n, phase));
            if got.is_empty() {
                idle += 1;
                if idle >= 3 {
                    break;
                }
            } else {
                idle = 0;
            }
            for (l, v) in got {
                locked_vals.push(l);
                locked.push(v);
            }
            continue;
        }
        let found_below = locked_vals.iter().filter(|l| **l < sigma).count();
        if found_below < below {
            target = locked.len() + (below - found_below);
            continue;
        }
        let mut sorted = locked_vals.clone();
        sorted.sort_by(f64::total_cmp);
        let top = sorted[count - 1];
        let check = top + 1e-7 * math::abs(top).max(1.0);
        let (ldl, check) = factor_near(&env, check)?;
        let have = locked_vals.iter().filter(|l| **l < check).count();
        if have >= ldl.negative_count() {
            return rayleigh_ritz(s, &solver.ldl, locked, count, floor);
        }
        target = locked.len() + (ldl.negative_count() - have);
    }
    Err(Error::NoConvergence {
        converged: locked.len().min(count),
        wanted: count,
    })
}

/// Places σ with `1 ≤ #{λ < σ} ≤ count` (or just under a cluster that
/// exceeds `count`). Returns σ, its factorisation and the inertia.
///
/// `lo` always has inertia zero. A short shift-invert Lanczos run at `lo`
/// bounds λ₁ from above; bisection shrinks the bracket and every new `lo`
/// sharpens the bound.
fn choose_shift(s: &Matrix<f64>, env: &Envelope, count: usize) -> Result<(f64, SkylineLdl, usize)> {
    let mut lo = s.gershgorin_lower() - 1.0;
    let (mut lo_ldl, shift) = factor_near(env, lo)?;
    lo = shift;
    let mut hi = plain_ritz_minimum(s, 30);
    let mut refresh = true;
    for _ in 0..200 {
        if refresh {
            let bound = shifted_ritz_minimum(&lo_ldl, lo, s.dim(), 20);
            hi = hi.min(bound);
            refresh = false;
        }
        let width = hi - lo;
        if !(width > 1e-11 * math::abs(hi).max(1.0)) {
            let below = lo_ldl.negative_count();
            return Ok((lo, lo_ldl, below));
        }
        // probe just above the bound first, then bisect
        let probe = if hi < f64::INFINITY { hi + 1e-3 * width } else { lo + 1.0 };
        for trial in [probe, 0.5 * (lo + hi)] {
            let (ldl, shift) = factor_near(env, trial)?;
            let below = ldl.negative_count();
            if below == 0 {
                lo = shift;
                lo_ldl = ldl;
                refresh = true;
                break;
            } else if below > count {
                hi = hi.min(shift);
            } else {
                return Ok((shift, ldl, below));
            }
        }
    }
    Err(Error::NoConvergence { converged: 0, wanted: count })
}

/// Upper bound for λ₁ from Lanczos on `(S − σ)⁻¹` with `σ` below the
/// spectrum: the largest Ritz value `μ` gives `σ + 1/μ ≥ λ₁`.
fn shifted_ritz_minimum(ldl: &SkylineLdl, sigma: f64, n: usize, steps: usize) -> f64 {
    let (alpha, beta) = lanczos_coefficients(|x| ldl.solve(x), n, steps);
    let (mu, _) = tridiagonal_eigen(&alpha, &beta);
    let top = mu[mu.len() - 1];
    if top > 0.0 {
        sigma + 1.0 / top
    } else {
        f64::INFINITY
    }
}

fn plain_ritz_minimum(s: &Matrix<f64>, steps: usize) -> f64 {
    let (alpha, beta) = lanczos_coefficients(|x| s.apply(x), s.dim(), steps);
    let (mu, _) = tridiagonal_eigen(&alpha, &beta);
    mu[0]
}

/// Tridiagonal Lanczos coefficients of a symmetric map, fully
/// reorthogonalised.
fn lanczos_coefficients<F: Fn(&[f64]) -> Vec<f64>>(apply: F, n: usize, steps: usize) -> (Vec<f64>, Vec<f64>) {
    let steps = steps.min(n);
    let mut q = start_vector(n, 0);
    let norm = math::norm(&q);
    q.iter_mut().for_each(|x| *x /= norm);
    let mut basis = vec![q];
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    for j in 0..steps {
        let mut w = apply(&basis[j]);
        alpha.push(dot(&w, &basis[j]));
        orthogonalize(&mut w, &basis);
        let b = math::norm(&w);
        if j + 1 == steps || !(b > 1e-12 * math::abs(alpha[j]).max(f64::MIN_POSITIVE)) {
            break;
        }
        beta.push(b);
        w.iter_mut().for_each(|x| *x /= b);
        basis.push(w);
    }
    (alpha, beta)
}

/// Rayleigh–Ritz on the locked vectors, polished by inverse subspace
/// iteration when a residual is still above tolerance.
fn rayleigh_ritz(
    s: &Matrix<f64>,
    ldl: &SkylineLdl,
    mut basis: Vec<Vec<f64>>,
    count: usize,
    floor: f64,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    for sweep in 0..4 {
        if sweep > 0 {
            basis = basis.iter().map(|v| ldl.solve(v)).collect();
        }
        // modified Gram–Schmidt, twice
        for i in 0..basis.len() {
            let (done, rest) = basis.split_at_mut(i);
            let v = &mut rest[0];
            orthogonalize(v, done);
            let norm = math::norm(v);
            v.iter_mut().for_each(|x| *x /= norm);
        }
        let p = basis.len();
        let images: Vec<Vec<f64>> = basis.iter().map(|v| s.apply(v)).collect();
        let mut g = vec![0.0; p * p];
        for i in 0..p {
            for j in 0..p {
                g[i * p + j] = 0.5 * (dot(&basis[i], &images[j]) + dot(&basis[j], &images[i]));
            }
        }
        let (values, u) = symmetric_eigen(&g, p);
        let n = s.dim();
        let mut vectors = vec![vec![0.0; n]; p];
        for (c, out) in vectors.iter_mut().enumerate() {
            for (k, v) in basis.iter().enumerate() {
                axpy(u[k * p + c], v, out);
            }
        }
        let mut take = count;
        while take < p && clustered(values[take - 1], values[take]) {
            take += 1;
        }
        let ok = (0..take).all(|i| {
            let sv = s.apply(&vectors[i]);
            let r: f64 = sv.iter().zip(&vectors[i]).map(|(a, x)| (a - values[i] * x) * (a - values[i] * x)).sum();
            math::sqrt(r) <= residual_bound(values[i], floor)
        });
        if ok {
            vectors.truncate(take);
            return Ok((values[..take].to_vec(), vectors));
        }
        basis = vectors;
    }
    Err(Error::NoConvergence {
        converged: 0,
        wanted: count,
    })
}

/// Puts every degenerate cluster into a reproducible basis: diagonalise the
/// position ramp inside the cluster, order by dominant Fourier index along
/// axis 0, and fix signs.
fn canonicalize(s: &Matrix<f64>, grid: &SampleGrid, values: &mut [f64], vectors: &mut [Vec<f64>]) {
    let n = grid.len();
    let mut i = 0;
    while i < values.len() {
        let mut j = i + 1;
        while j < values.len() && clustered(values[j - 1], values[j]) {
            j += 1;
        }
        if j - i > 1 {
            let m = j - i;
            let ramp: Vec<f64> = (0..n).map(|p| (p as f64 + 0.5) / n as f64).collect();
            let mut c = vec![0.0; m * m];
            for a in 0..m {
                for b in 0..m {
                    c[a * m + b] = (0..n).map(|p| vectors[i + a][p] * ramp[p] * vectors[i + b][p]).sum();
                }
            }
            let (keys, u) = symmetric_eigen(&c, m);
            let mut rotated: Vec<(usize, f64, Vec<f64>)> = (0..m)
                .map(|col| {
                    let mut v = vec![0.0; n];
                    for a in 0..m {
                        axpy(u[a * m + col], &vectors[i + a], &mut v);
                    }
                    (dominant_frequency(&v, grid), keys[col], v)
                })
                .collect();
            rotated.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
            for (slot, (_, _, v)) in rotated.into_iter().enumerate() {
                let sv = s.apply(&v);
                values[i + slot] = dot(&v, &sv) / dot(&v, &v);
                vectors[i + slot] = v;
            }
        }
        i = j;
    }
    for v in vectors.iter_mut() {
        let peak = v.iter().map(|x| math::abs(*x)).fold(0.0, f64::max);
        if let Some(first) = v.iter().find(|x| math::abs(**x) >= 0.5 * peak) {
            if *first < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
        }
    }
}

/// Frequency `m ≤ min(n₀/2, 32)` carrying the most energy along axis 0.
fn dominant_frequency(v: &[f64], grid: &SampleGrid) -> usize {
    let n0 = grid.axis(0).count;
    let lines = grid.len() / n0;
    let top = (n0 / 2).min(32);
    let mut best = (0usize, -1.0);
    for m in 0..=top {
        let omega = 2.0 * core::f64::consts::PI * m as f64 / n0 as f64;
        let mut energy = 0.0;
        for line in 0..lines {
            let (mut re, mut im) = (0.0, 0.0);
            for i in 0..n0 {
                let x = v[line * n0 + i];
                re += x * math::cos(omega * i as f64);
                im -= x * math::sin(omega * i as f64);
            }
            energy += re * re + im * im;
        }
        if energy > best.1 * (1.0 + 1e-9) {
            best = (m, energy);
        }
    }
    best.0
}

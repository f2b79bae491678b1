//! Matrix storage and the dense/sparse kernels behind the eigensolver.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Debug;
use core::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::math;
use crate::{Error, Result};

/// Operators with fewer nodes than this are stored densely.
pub const DENSE_LIMIT: usize = 4096;

/// Matrix entry type: `f64` or `Complex64`.
pub trait Scalar:
    Copy + Debug + PartialEq + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> + AddAssign + 'static
{
    fn zero() -> Self;
    fn from_real(x: f64) -> Self;
    fn conj(self) -> Self;
    fn abs_sqr(self) -> f64;
    fn scale(self, x: f64) -> Self;
    fn to_complex(self) -> Complex64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn conj(self) -> Self {
        self
    }
    fn abs_sqr(self) -> f64 {
        self * self
    }
    fn scale(self, x: f64) -> Self {
        self * x
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn abs_sqr(self) -> f64 {
        self.norm_sqr()
    }
    fn scale(self, x: f64) -> Self {
        self * x
    }
    fn to_complex(self) -> Complex64 {
        self
    }
}

/// Square matrix, dense row-major or compressed sparse rows.
#[derive(Clone, Debug, PartialEq)]
pub enum Matrix<T: Scalar> {
    Dense { n: usize, data: Vec<T> },
    Sparse { n: usize, row_ptr: Vec<usize>, cols: Vec<usize>, vals: Vec<T> },
}

impl<T: Scalar> Matrix<T> {
    /// Assembles from `(row, col, value)` triplets, summing duplicates.
    /// Storage is dense below [`DENSE_LIMIT`] rows.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, T)]) -> Self {
        if n < DENSE_LIMIT {
            Self::dense_from_triplets(n, triplets)
        } else {
            Self::sparse_from_triplets(n, triplets)
        }
    }

    pub fn dense_from_triplets(n: usize, triplets: &[(usize, usize, T)]) -> Self {
        let mut data = vec![T::zero(); n * n];
        for &(i, j, v) in triplets {
            data[i * n + j] += v;
        }
        Matrix::Dense { n, data }
    }

    pub fn sparse_from_triplets(n: usize, triplets: &[(usize, usize, T)]) -> Self {
        let mut sorted: Vec<(usize, usize, T)> = triplets.to_vec();
        sorted.sort_by_key(|a| (a.0, a.1));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols: Vec<usize> = Vec::with_capacity(sorted.len());
        let mut vals: Vec<T> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in sorted {
            if last == Some((i, j)) {
                if let Some(x) = vals.last_mut() {
                    *x += v;
                }
                continue;
            }
            last = Some((i, j));
            cols.push(j);
            vals.push(v);
            row_ptr[i + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Matrix::Sparse { n, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        match self {
            Matrix::Dense { n, .. } | Matrix::Sparse { n, .. } => *n,
        }
    }

    pub fn is_dense(&self) -> bool {
        matches!(self, Matrix::Dense { .. })
    }

    /// Number of stored entries (dense storage counts nonzeros).
    pub fn nnz(&self) -> usize {
        match self {
            Matrix::Dense { data, .. } => data.iter().filter(|v| **v != T::zero()).count(),
            Matrix::Sparse { vals, .. } => vals.len(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        match self {
            Matrix::Dense { n, data } => data[i * n + j],
            Matrix::Sparse { row_ptr, cols, vals, .. } => {
                let range = row_ptr[i]..row_ptr[i + 1];
                match cols[range.clone()].binary_search(&j) {
                    Ok(p) => vals[range.start + p],
                    Err(_) => T::zero(),
                }
            }
        }
    }

    /// Calls `f(col, value)` for the stored entries of row `i` (dense rows skip
    /// exact zeros).
    pub fn for_each_in_row<F: FnMut(usize, T)>(&self, i: usize, mut f: F) {
        match self {
            Matrix::Dense { n, data } => {
                for (j, v) in data[i * n..(i + 1) * n].iter().enumerate() {
                    if *v != T::zero() {
                        f(j, *v);
                    }
                }
            }
            Matrix::Sparse { row_ptr, cols, vals, .. } => {
                for p in row_ptr[i]..row_ptr[i + 1] {
                    f(cols[p], vals[p]);
                }
            }
        }
    }

    /// Stored entries as triplets in row order.
    pub fn triplets(&self) -> Vec<(usize, usize, T)> {
        let mut out = Vec::new();
        for i in 0..self.dim() {
            self.for_each_in_row(i, |j, v| out.push((i, j, v)));
        }
        out
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[T], y: &mut [T]) {
        match self {
            Matrix::Dense { n, data } => {
                for i in 0..*n {
                    let row = &data[i * n..(i + 1) * n];
                    let mut s = T::zero();
                    for (a, b) in row.iter().zip(x) {
                        s += *a * *b;
                    }
                    y[i] = s;
                }
            }
            Matrix::Sparse { n, row_ptr, cols, vals } => {
                for i in 0..*n {
                    let mut s = T::zero();
                    for p in row_ptr[i]..row_ptr[i + 1] {
                        s += vals[p] * x[cols[p]];
                    }
                    y[i] = s;
                }
            }
        }
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.dim()];
        self.matvec(x, &mut y);
        y
    }

    /// Entry-wise map `a_ij ↦ f(i, j, a_ij)` keeping the storage pattern.
    pub fn map<F: Fn(usize, usize, T) -> T>(&self, f: F) -> Self {
        match self {
            Matrix::Dense { n, data } => Matrix::Dense {
                n: *n,
                data: data.iter().enumerate().map(|(p, v)| f(p / n, p % n, *v)).collect(),
            },
            Matrix::Sparse { n, row_ptr, cols, vals } => {
                let mut out = vals.clone();
                for i in 0..*n {
                    for p in row_ptr[i]..row_ptr[i + 1] {
                        out[p] = f(i, cols[p], vals[p]);
                    }
                }
                Matrix::Sparse {
                    n: *n,
                    row_ptr: row_ptr.clone(),
                    cols: cols.clone(),
                    vals: out,
                }
            }
        }
    }

    /// Conjugate transpose `Aᴴ`, same storage kind.
    pub fn conj_transpose(&self) -> Self {
        let n = self.dim();
        let t: Vec<(usize, usize, T)> = self.triplets().into_iter().map(|(i, j, v)| (j, i, v.conj())).collect();
        match self {
            Matrix::Dense { .. } => Self::dense_from_triplets(n, &t),
            Matrix::Sparse { .. } => Self::sparse_from_triplets(n, &t),
        }
    }

    /// `A + diag(d)`.
    pub fn add_diagonal(&self, d: &[T]) -> Self {
        let n = self.dim();
        let mut t = self.triplets();
        t.extend(d.iter().enumerate().map(|(i, v)| (i, i, *v)));
        match self {
            Matrix::Dense { .. } => Self::dense_from_triplets(n, &t),
            Matrix::Sparse { .. } => Self::sparse_from_triplets(n, &t),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim() {
            self.for_each_in_row(i, |_, v| s += v.abs_sqr());
        }
        math::sqrt(s)
    }

    /// `‖A − B‖_F`.
    pub fn frobenius_distance(&self, other: &Matrix<T>) -> f64 {
        let n = self.dim();
        let mut t = self.triplets();
        t.extend(other.triplets().into_iter().map(|(i, j, v)| (i, j, -v)));
        Matrix::sparse_from_triplets(n, &t).frobenius_norm()
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<T> {
        match self {
            Matrix::Dense { data, .. } => data.clone(),
            Matrix::Sparse { n, .. } => {
                let mut d = vec![T::zero(); n * n];
                for (i, j, v) in self.triplets() {
                    d[i * n + j] = v;
                }
                d
            }
        }
    }
}

impl Matrix<f64> {
    /// Smallest Gershgorin lower bound `min_i (a_ii − Σ_{j≠i} |a_ij|)`.
    pub fn gershgorin_lower(&self) -> f64 {
        let mut lo = f64::INFINITY;
        for i in 0..self.dim() {
            let mut diag = 0.0;
            let mut off = 0.0;
            self.for_each_in_row(i, |j, v| {
                if j == i {
                    diag += v;
                } else {
                    off += math::abs(v);
                }
            });
            lo = lo.min(diag - off);
        }
        lo
    }

    /// `max_i Σ_j |a_ij|`, an upper bound for the spectral norm of a
    /// symmetric matrix.
    pub fn row_sum_norm(&self) -> f64 {
        let mut hi: f64 = 0.0;
        for i in 0..self.dim() {
            let mut s = 0.0;
            self.for_each_in_row(i, |_, v| s += math::abs(v));
            hi = hi.max(s);
        }
        hi
    }

    /// `‖A − Aᵀ‖_F / ‖A‖_F`.
    pub fn symmetry_residual(&self) -> f64 {
        let norm = self.frobenius_norm();
        if norm == 0.0 {
            return 0.0;
        }
        self.frobenius_distance(&self.conj_transpose()) / norm
    }
}

/// Eigen-decomposition of a dense symmetric matrix (Householder
/// tridiagonalisation followed by implicit QL).
///
/// Returns ascending eigenvalues and the eigenvector matrix `V` (row-major,
/// column `i` is the eigenvector of eigenvalue `i`).
pub fn symmetric_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut v = a.to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    if n == 0 {
        return (d, v);
    }
    tred2(n, &mut v, &mut d, &mut e);
    tql2(n, &mut v, &mut d, &mut e);
    (d, v)
}

/// Eigen-decomposition of a symmetric tridiagonal matrix with diagonal
/// `diag` and off-diagonal `off` (`off[i]` couples `i` and `i + 1`).
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = diag.len();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let mut d = diag.to_vec();
    // tql2 expects the subdiagonal in e[1..n]
    let mut e = vec![0.0; n];
    e[1..n].copy_from_slice(&off[..n - 1]);
    if n > 0 {
        tql2(n, &mut v, &mut d, &mut e);
    }
    (d, v)
}

fn tred2(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    for j in 0..n {
        d[j] = v[(n - 1) * n + j];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += math::abs(d[k]);
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1) * n + j];
                v[i * n + j] = 0.0;
                v[j * n + i] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = math::sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for j in 0..i {
                e[j] = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[j * n + i] = f;
                g = e[j] + v[j * n + j] * f;
                for k in (j + 1)..i {
                    g += v[k * n + j] * d[k];
                    e[k] += v[k * n + j] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k * n + j] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1) * n + j];
                v[i * n + j] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..(n - 1) {
        v[(n - 1) * n + i] = v[i * n + i];
        v[i * n + i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k * n + i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[k * n + i + 1] * v[k * n + j];
                }
                for k in 0..=i {
                    v[k * n + j] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[k * n + i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1) * n + j];
        v[(n - 1) * n + j] = 0.0;
    }
    v[(n - 1) * n + n - 1] = 1.0;
    e[0] = 0.0;
}

fn tql2(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(math::abs(d[l]) + math::abs(e[l]));
        let mut m = l;
        while m < n {
            if math::abs(e[m]) <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iterations = 0;
            loop {
                iterations += 1;
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = math::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = math::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = v[k * n + i + 1];
                        v[k * n + i + 1] = s * v[k * n + i] + c * h;
                        v[k * n + i] = c * v[k * n + i] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if math::abs(e[l]) <= eps * tst1 || iterations > 60 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    // selection sort of eigenvalues and vectors
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for (j, dj) in d.iter().enumerate().skip(i + 1) {
            if *dj < p {
                k = j;
                p = *dj;
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            for r in 0..n {
                v.swap(r * n + i, r * n + k);
            }
        }
    }
}

/// Reverse Cuthill–McKee ordering of a symmetric sparsity pattern.
/// Returns `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee(n: usize, adjacency: &[Vec<usize>]) -> Vec<usize> {
    let degree: Vec<usize> = adjacency.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut level = vec![usize::MAX; n];
    while order.len() < n {
        // lowest-degree unvisited node, then refine to a pseudo-peripheral one
        let mut start = (0..n).filter(|i| !visited[*i]).min_by_key(|i| degree[*i]).unwrap_or(0);
        for _ in 0..4 {
            let far = bfs_farthest(start, adjacency, &visited, &degree, &mut level);
            if far == start {
                break;
            }
            start = far;
        }
        let mut queue = VecDeque::new();
        queue.push_back(start);
        visited[start] = true;
        while let Some(i) = queue.pop_front() {
            order.push(i);
            let mut next: Vec<usize> = adjacency[i].iter().copied().filter(|j| !visited[*j]).collect();
            next.sort_by_key(|j| (degree[*j], *j));
            for j in next {
                visited[j] = true;
                queue.push_back(j);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_farthest(start: usize, adjacency: &[Vec<usize>], blocked: &[bool], degree: &[usize], level: &mut [usize]) -> usize {
    let mut touched = Vec::new();
    let mut queue = VecDeque::new();
    level[start] = 0;
    touched.push(start);
    queue.push_back(start);
    let mut best = (0usize, usize::MAX, start);
    while let Some(i) = queue.pop_front() {
        let key = (level[i], usize::MAX - degree[i]);
        if key > (best.0, best.1) || (key.0 > best.0) {
            best = (key.0, key.1, i);
        }
        for &j in &adjacency[i] {
            if !blocked[j] && level[j] == usize::MAX {
                level[j] = level[i] + 1;
                touched.push(j);
                queue.push_back(j);
            }
        }
    }
    for t in touched {
        level[t] = usize::MAX;
    }
    best.2
}

/// `L D Lᵀ` factorisation of `A − shift·I` in envelope (skyline) storage
/// after a reverse Cuthill–McKee permutation.
///
/// No pivoting is done, so the shift may sit inside the spectrum; the number
/// of negative pivots is then the number of eigenvalues below the shift
/// (Sylvester's law of inertia).
#[derive(Clone, Debug)]
pub struct SkylineLdl {
    n: usize,
    perm: Vec<usize>,
    first: Vec<usize>,
    offsets: Vec<usize>,
    /// Strict lower part of `L` row by row; the diagonal slot holds `D`.
    values: Vec<f64>,
    negative: usize,
}

/// Sparsity pattern and RCM permutation of a symmetric matrix, reusable
/// across shifts.
#[derive(Clone, Debug)]
pub struct Envelope {
    perm: Vec<usize>,
    first: Vec<usize>,
    offsets: Vec<usize>,
    /// Lower-triangle entries `(slot, value)` of the permuted matrix.
    entries: Vec<(usize, f64)>,
    diagonal: Vec<usize>,
}

impl Envelope {
    pub fn new(a: &Matrix<f64>) -> Self {
        let n = a.dim();
        let triplets = a.triplets();
        let mut adjacency = vec![Vec::new(); n];
        for &(i, j, _) in &triplets {
            if i != j {
                adjacency[i].push(j);
                adjacency[j].push(i);
            }
        }
        for adj in adjacency.iter_mut() {
            adj.sort_unstable();
            adj.dedup();
        }
        let perm = reverse_cuthill_mckee(n, &adjacency);
        let mut inverse = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for &(i, j, _) in &triplets {
            let (pi, pj) = (inverse[i], inverse[j]);
            let (r, c) = if pi >= pj { (pi, pj) } else { (pj, pi) };
            first[r] = first[r].min(c);
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + (i - first[i] + 1);
        }
        let entries = triplets
            .iter()
            .filter_map(|&(i, j, v)| {
                let (pi, pj) = (inverse[i], inverse[j]);
                (pi >= pj).then(|| (offsets[pi] + (pj - first[pi]), v))
            })
            .collect();
        let diagonal = (0..n).map(|i| offsets[i] + (i - first[i])).collect();
        Envelope {
            perm,
            first,
            offsets,
            entries,
            diagonal,
        }
    }

    /// Stored envelope size.
    pub fn size(&self) -> usize {
        self.offsets[self.offsets.len() - 1]
    }

    /// Factorises `A − shift·I`. Fails with [`Error::NotPositiveDefinite`]
    /// only when a pivot vanishes.
    pub fn factor(&self, shift: f64) -> Result<SkylineLdl> {
        let n = self.perm.len();
        let (first, offsets) = (&self.first, &self.offsets);
        let mut values = vec![0.0; self.size()];
        for &(slot, v) in &self.entries {
            values[slot] += v;
        }
        let mut scale: f64 = 0.0;
        for &d in &self.diagonal {
            values[d] -= shift;
            scale = scale.max(math::abs(values[d]));
        }
        let tiny = f64::EPSILON * f64::EPSILON * scale.max(f64::MIN_POSITIVE);
        let mut work = vec![0.0; n];
        let mut negative = 0;
        for i in 0..n {
            let fi = first[i];
            // work[j] = L_ij D_j
            for j in fi..i {
                let fj = first[j];
                let start = fi.max(fj);
                let mut s = values[offsets[i] + (j - fi)];
                if start < j {
                    let lj = &values[offsets[j] + (start - fj)..offsets[j] + (j - fj)];
                    s -= work[start..j].iter().zip(lj).map(|(x, y)| x * y).sum::<f64>();
                }
                work[j] = s;
            }
            let mut d = values[offsets[i] + (i - fi)];
            for j in fi..i {
                let dj = values[offsets[j] + (j - first[j])];
                let l = work[j] / dj;
                values[offsets[i] + (j - fi)] = l;
                d -= l * work[j];
            }
            if !(math::abs(d) > tiny) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite);
            }
            if d < 0.0 {
                negative += 1;
            }
            values[offsets[i] + (i - fi)] = d;
        }
        Ok(SkylineLdl {
            n,
            perm: self.perm.clone(),
            first: first.clone(),
            offsets: offsets.clone(),
            values,
            negative,
        })
    }
}

impl SkylineLdl {
    /// Factorises `A − shift·I` from scratch.
    pub fn factor(a: &Matrix<f64>, shift: f64) -> Result<Self> {
        Envelope::new(a).factor(shift)
    }

    /// Number of negative pivots, i.e. eigenvalues of `A` below the shift.
    pub fn negative_count(&self) -> usize {
        self.negative
    }

    /// Solves `(A − shift·I) x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.values[self.offsets[i]..self.offsets[i + 1]];
            let s: f64 = row[..i - fi].iter().zip(&y[fi..i]).map(|(l, x)| l * x).sum();
            y[i] -= s;
        }
        for i in 0..n {
            y[i] /= self.values[self.offsets[i] + (i - self.first[i])];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.values[self.offsets[i]..self.offsets[i + 1]];
            let xi = y[i];
            for (k, l) in (fi..i).zip(row) {
                y[k] -= l * xi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize, periodic: bool) -> Matrix<f64> {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        if periodic {
            t.push((0, n - 1, -1.0));
            t.push((n - 1, 0, -1.0));
        }
        Matrix::from_triplets(n, &t)
    }

    #[test]
    fn dense_eigen_of_diagonal() {
        let a = [3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0];
        let (d, _) = symmetric_eigen(&a, 3);
        assert_eq!(d, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn dense_eigen_reconstructs_matrix() {
        let n = 7;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = 1.0 / (1.0 + i as f64 + j as f64) + if i == j { 0.5 * i as f64 } else { 0.0 };
            }
        }
        let (d, v) = symmetric_eigen(&a, n);
        for i in 0..n {
            for j in 0..n {
                let r: f64 = (0..n).map(|k| v[i * n + k] * d[k] * v[j * n + k]).sum();
                assert!((r - a[i * n + j]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn tridiagonal_path_matrix_spectrum() {
        let n = 10;
        let (d, _) = tridiagonal_eigen(&vec![2.0; n], &vec![-1.0; n - 1]);
        for (k, lam) in d.iter().enumerate() {
            let exact = 2.0 - 2.0 * math::cos(core::f64::consts::PI * (k + 1) as f64 / (n + 1) as f64);
            assert!((lam - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn csr_and_dense_agree() {
        let a = laplacian_1d(12, true);
        let t = a.triplets();
        let s = Matrix::sparse_from_triplets(12, &t);
        let x: Vec<f64> = (0..12).map(|i| (i as f64).sin()).collect();
        let (ya, ys) = (a.apply(&x), s.apply(&x));
        assert!(ya.iter().zip(&ys).all(|(p, q)| (p - q).abs() < 1e-15));
        assert_eq!(s.get(0, 11), -1.0);
        assert!(a.symmetry_residual() == 0.0);
    }

    #[test]
    fn skyline_ldl_solves_and_counts_inertia() {
        let n = 50;
        let a = laplacian_1d(n, true);
        let env = Envelope::new(&a);
        // periodic corner coupling keeps the RCM envelope narrow
        assert!(env.size() < 4 * n);
        let b: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 * 0.3).cos()).collect();
        for shift in [-0.5, 0.7] {
            let ldl = env.factor(shift).unwrap();
            let x = ldl.solve(&b);
            let ax = a.apply(&x);
            for i in 0..n {
                assert!((ax[i] - shift * x[i] - b[i]).abs() < 1e-10);
            }
        }
        // eigenvalues 2 − 2cos(2πm/n): below 0.7 are m = 0, ±1, ±2, ±3
        let below = (0..n).filter(|m| 2.0 - 2.0 * (2.0 * core::f64::consts::PI * *m as f64 / n as f64).cos() < 0.7).count();
        assert_eq!(env.factor(0.7).unwrap().negative_count(), below);
        assert_eq!(env.factor(-0.5).unwrap().negative_count(), 0);
    }
}

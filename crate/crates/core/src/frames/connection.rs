use alloc::vec;
use alloc::vec::Vec;

use super::{inverse_small, FrameField};
use crate::geometry::Embedding;
use crate::math;
use crate::{Error, Result};

/// Connection coefficients of the adapted frame at every node.
///
/// * Weingarten block `γ^β_{ȧα} = ⟨∂_α e_ȧ, e^β⟩`,
/// * normal connection `γ^ḃ_{ȧα} = ⟨∂_α e_ȧ, e_ḃ⟩`,
/// * second fundamental form `γ^ȧ_{βα} = ⟨∂_α∂_β Y, e_ȧ⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionCoefficients {
    len: usize,
    k: usize,
    c: usize,
    weingarten: Vec<f64>,
    normal: Vec<f64>,
    second: Vec<f64>,
}

impl ConnectionCoefficients {
    pub(crate) fn zeros(len: usize, k: usize, c: usize) -> Self {
        ConnectionCoefficients {
            len,
            k,
            c,
            weingarten: vec![0.0; len * c * k * k],
            normal: vec![0.0; len * c * c * k],
            second: vec![0.0; len * c * k * k],
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.k
    }

    pub fn codim(&self) -> usize {
        self.c
    }

    fn w_index(&self, node: usize, a: usize, beta: usize, alpha: usize) -> usize {
        ((node * self.c + a) * self.k + beta) * self.k + alpha
    }

    fn n_index(&self, node: usize, a: usize, b: usize, alpha: usize) -> usize {
        ((node * self.c + a) * self.c + b) * self.k + alpha
    }

    /// `γ^β_{ȧα}`.
    pub fn weingarten(&self, node: usize, a: usize, beta: usize, alpha: usize) -> f64 {
        self.weingarten[self.w_index(node, a, beta, alpha)]
    }

    /// `γ^ḃ_{ȧα}`.
    pub fn normal(&self, node: usize, a: usize, b: usize, alpha: usize) -> f64 {
        self.normal[self.n_index(node, a, b, alpha)]
    }

    /// `γ^ȧ_{βα}`.
    pub fn second(&self, node: usize, a: usize, beta: usize, alpha: usize) -> f64 {
        self.second[self.w_index(node, a, beta, alpha)]
    }

    pub(crate) fn set_weingarten(&mut self, node: usize, a: usize, beta: usize, alpha: usize, v: f64) {
        let i = self.w_index(node, a, beta, alpha);
        self.weingarten[i] = v;
    }

    pub(crate) fn set_normal(&mut self, node: usize, a: usize, b: usize, alpha: usize, v: f64) {
        let i = self.n_index(node, a, b, alpha);
        self.normal[i] = v;
    }

    pub(crate) fn set_second(&mut self, node: usize, a: usize, beta: usize, alpha: usize, v: f64) {
        let i = self.w_index(node, a, beta, alpha);
        self.second[i] = v;
    }

    /// Shape matrix `(γ_ȧ)^β_α` row-major (`[β·k + α]`).
    pub fn shape_matrix(&self, node: usize, a: usize) -> &[f64] {
        let kk = self.k * self.k;
        let start = (node * self.c + a) * kk;
        &self.weingarten[start..start + kk]
    }

    /// `tr γ_ȧ`.
    pub fn trace(&self, node: usize, a: usize) -> f64 {
        (0..self.k).map(|al| self.weingarten(node, a, al, al)).sum()
    }

    /// `tr(γ_ȧ γ_ḃ)`.
    pub fn trace_product(&self, node: usize, a: usize, b: usize) -> f64 {
        let k = self.k;
        let mut t = 0.0;
        for al in 0..k {
            for be in 0..k {
                t += self.weingarten(node, a, al, be) * self.weingarten(node, b, be, al);
            }
        }
        t
    }

    /// Largest `|γ^ḃ_{ȧα}|` over the grid.
    pub fn max_normal_connection(&self) -> f64 {
        math::max_abs(&self.normal)
    }

    /// Largest `|γ^ḃ_{ȧα} + γ^ȧ_{ḃα}|`.
    pub fn antisymmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for node in 0..self.len {
            for a in 0..self.c {
                for b in 0..self.c {
                    for al in 0..self.k {
                        let d = self.normal(node, a, b, al) + self.normal(node, b, a, al);
                        worst = worst.max(math::abs(d));
                    }
                }
            }
        }
        worst
    }

    /// Largest `|γ^ȧ_{βα} + g_{βγ} γ^γ_{ȧα}|`.
    pub fn weingarten_relation_defect(&self, frames: &FrameField) -> f64 {
        let k = self.k;
        let mut worst: f64 = 0.0;
        for node in 0..self.len {
            let g = frames.metric(node);
            for a in 0..self.c {
                for be in 0..k {
                    for al in 0..k {
                        let lowered: f64 = (0..k).map(|ga| g[be * k + ga] * self.weingarten(node, a, ga, al)).sum();
                        worst = worst.max(math::abs(self.second(node, a, be, al) + lowered));
                    }
                }
            }
        }
        worst
    }

    /// Largest `|γ^ȧ_{βα} − γ^ȧ_{αβ}|`.
    pub fn second_form_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for node in 0..self.len {
            for a in 0..self.c {
                for be in 0..self.k {
                    for al in 0..self.k {
                        worst = worst.max(math::abs(self.second(node, a, be, al) - self.second(node, a, al, be)));
                    }
                }
            }
        }
        worst
    }

    /// Largest absolute Weingarten eigenvalue over all nodes and normals,
    /// the inverse of the focal radius.
    pub fn max_principal_curvature(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for node in 0..self.len {
            for a in 0..self.c {
                worst = worst.max(spectral_radius(self.shape_matrix(node, a), self.k));
            }
        }
        worst
    }
}

/// Spectral radius of a k×k matrix with real eigenvalues (k ≤ 2).
pub(crate) fn spectral_radius(m: &[f64], k: usize) -> f64 {
    match k {
        1 => math::abs(m[0]),
        _ => {
            let tr = m[0] + m[3];
            let det = m[0] * m[3] - m[1] * m[2];
            let disc = math::sqrt((0.25 * tr * tr - det).max(0.0));
            math::abs(0.5 * tr).max(0.0) + disc
        }
    }
}

/// Connection coefficients from a frame field and the embedding's second
/// jets.
pub fn connection_coefficients(embedding: &Embedding, frames: &FrameField) -> Result<ConnectionCoefficients> {
    let k = frames.intrinsic_dim();
    let c = frames.codim();
    if embedding.intrinsic_dim() != k || embedding.ambient_dim() != frames.ambient_dim() {
        return Err(Error::GridMismatch {
            expected: k,
            got: embedding.intrinsic_dim(),
        });
    }
    let grid = frames.grid();
    let mut out = ConnectionCoefficients::zeros(grid.len(), k, c);
    for node in 0..grid.len() {
        let inv = inverse_small(frames.metric(node), k);
        let jet = embedding.jet(&grid.params(node), 2)?;
        for a in 0..c {
            for al in 0..k {
                let d = frames.normal_derivative(node, a, al);
                let proj: Vec<f64> = (0..k).map(|ga| math::dot(d, frames.tangent(node, ga))).collect();
                for be in 0..k {
                    let v: f64 = (0..k).map(|ga| inv[be * k + ga] * proj[ga]).sum();
                    out.set_weingarten(node, a, be, al, v);
                    out.set_second(node, a, be, al, math::dot(jet.second(be, al), frames.normal(node, a)));
                }
                for b in 0..c {
                    out.set_normal(node, a, b, al, math::dot(d, frames.normal(node, b)));
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::build_frames;
    use crate::geometry::{catalog_shape, Boundary, SampleGrid};

    fn coeffs(name: &str, params: &[f64], counts: &[usize], boundary: Boundary) -> (FrameField, ConnectionCoefficients) {
        let e = catalog_shape(name, params).unwrap();
        let g = SampleGrid::on_domain(e.domain(), counts, boundary).unwrap();
        let f = build_frames(&e, &g).unwrap();
        let c = connection_coefficients(&e, &f).unwrap();
        (f, c)
    }

    #[test]
    fn sphere_shape_operator_is_umbilic() {
        for r in [1.0, 2.0] {
            let (_, c) = coeffs("sphere", &[r], &[8, 16], Boundary::Periodic);
            for node in 0..c.len() {
                let m = c.shape_matrix(node, 0);
                assert!((m[0] + 1.0 / r).abs() < 1e-12 && (m[3] + 1.0 / r).abs() < 1e-12);
                assert!(m[1].abs() < 1e-12 && m[2].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn circle_single_coefficient() {
        let (_, c) = coeffs("circle", &[2.5], &[32], Boundary::Periodic);
        for node in 0..c.len() {
            assert!((c.weingarten(node, 0, 0, 0) + 0.4).abs() < 1e-14);
            assert!(c.weingarten(node, 1, 0, 0).abs() < 1e-14);
        }
    }

    #[test]
    fn helix_normal_connection_is_torsion() {
        let (_, c) = coeffs("helix", &[3.0, 4.0], &[64], Boundary::Dirichlet);
        for node in 0..c.len() {
            assert!((c.normal(node, 0, 1, 0).abs() - 0.16).abs() < 1e-12);
        }
        assert!(c.antisymmetry_defect() < 1e-12);
    }

    #[test]
    fn structural_identities_on_torus() {
        let (f, c) = coeffs("torus", &[2.0, 1.0], &[24, 16], Boundary::Periodic);
        assert!(c.weingarten_relation_defect(&f) < 1e-12);
        assert!(c.second_form_asymmetry() < 1e-12);
        assert!((c.max_principal_curvature() - 1.0).abs() < 1e-12);
    }
}

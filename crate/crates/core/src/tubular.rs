//! Tubular neighbourhood: offset frames, the tube metric with its small-q
//! expansion, and the curvature-induced effective potential.

use alloc::vec;
use alloc::vec::Vec;

use crate::frames::{ConnectionCoefficients, FrameField, LocalFrame};
use crate::geometry::Embedding;
use crate::math;
use crate::{Error, Result};

/// Frame `E_μ` of the tube map `X + q^ȧ e_ȧ` at one offset point.
#[derive(Clone, Debug, PartialEq)]
pub struct TubeFrame {
    /// `k` tangential vectors followed by `n − k` normal vectors.
    pub vectors: Vec<Vec<f64>>,
}

impl TubeFrame {
    /// Gram matrix `⟨E_μ, E_ν⟩`, row-major n×n.
    pub fn metric(&self) -> Vec<f64> {
        let m = self.vectors.len();
        let mut g = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                g[i * m + j] = math::dot(&self.vectors[i], &self.vectors[j]);
            }
        }
        g
    }
}

/// `E_α = e_α + q^ȧ γ^β_{ȧα} e_β`, `E_ȧ = e_ȧ`, from a local frame.
///
/// The normal connection is dropped, so the frame is the derivative of the
/// tube map only for a Hashimoto-rotated (or codimension-1) frame.
pub fn tube_frame_local(frame: &LocalFrame, q: &[f64]) -> Result<TubeFrame> {
    let k = frame.tangents.len();
    let c = frame.normals.len();
    if q.len() != c {
        return Err(Error::GridMismatch { expected: c, got: q.len() });
    }
    let shapes: Vec<Vec<f64>> = (0..c).map(|a| frame.weingarten(a)).collect();
    let radius = focal_radius(&shapes, k);
    let offset = math::norm(q);
    if offset >= radius {
        return Err(Error::FocalRadius { offset, radius });
    }
    let n = frame.normals[0].len();
    let mut vectors = Vec::with_capacity(k + c);
    for al in 0..k {
        let mut v = frame.tangents[al].clone();
        for a in 0..c {
            for be in 0..k {
                let coef = q[a] * shapes[a][be * k + al];
                for i in 0..n {
                    v[i] += coef * frame.tangents[be][i];
                }
            }
        }
        vectors.push(v);
    }
    vectors.extend(frame.normals.iter().cloned());
    Ok(TubeFrame { vectors })
}

/// Tube frame at grid node `node` with normal offset `q`.
pub fn tube_frame(frames: &FrameField, node: usize, q: &[f64]) -> Result<TubeFrame> {
    tube_frame_local(&frames.local(node), q)
}

/// Tube frame at arbitrary parameters, using the frame field's seeds and
/// rotation.
pub fn tube_frame_at(embedding: &Embedding, frames: &FrameField, params: &[f64], q: &[f64]) -> Result<TubeFrame> {
    tube_frame_local(&frames.frame_at(embedding, params)?, q)
}

/// Largest normal offset before `I + q^ȧ γ_ȧ` can become singular.
pub fn focal_radius(shapes: &[Vec<f64>], k: usize) -> f64 {
    let c = shapes.len();
    let rho = if c == 1 {
        crate::frames::spectral_radius(&shapes[0], k)
    } else if k == 1 {
        math::sqrt(shapes.iter().map(|m| m[0] * m[0]).sum())
    } else {
        // sample unit directions in the normal plane
        let mut worst: f64 = 0.0;
        for step in 0..256 {
            let t = core::f64::consts::PI * step as f64 / 256.0;
            let (s, co) = (math::sin(t), math::cos(t));
            let m: Vec<f64> = (0..k * k).map(|i| co * shapes[0][i] + s * shapes[1][i]).collect();
            worst = worst.max(crate::frames::spectral_radius(&m, k));
        }
        worst
    };
    if rho > 0.0 {
        1.0 / rho
    } else {
        f64::INFINITY
    }
}

/// Tangential tube metric `g_{T∥}(q) = g_S + q^ȧ L_ȧ + q^ȧ q^ḃ Q_ȧḃ` and the
/// determinant expansion `g_T = g_S (1 + c_ȧ q^ȧ + c_ȧḃ q^ȧ q^ḃ + O(q³))` per
/// node. The normal block is the identity and the mixed block vanishes.
#[derive(Clone, Debug, PartialEq)]
pub struct TubeMetric {
    len: usize,
    k: usize,
    c: usize,
    metric: Vec<f64>,
    metric_det: Vec<f64>,
    linear: Vec<f64>,
    quadratic: Vec<f64>,
    shapes: Vec<f64>,
    det_linear: Vec<f64>,
    det_quadratic: Vec<f64>,
}

impl TubeMetric {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn codim(&self) -> usize {
        self.c
    }

    /// `g_S`, row-major k×k.
    pub fn surface_metric(&self, node: usize) -> &[f64] {
        let kk = self.k * self.k;
        &self.metric[node * kk..(node + 1) * kk]
    }

    /// `L_ȧ,αβ = γ^γ_{ȧα} g_{γβ} + g_{αγ} γ^γ_{ȧβ}`.
    pub fn linear(&self, node: usize, a: usize) -> &[f64] {
        let kk = self.k * self.k;
        let start = (node * self.c + a) * kk;
        &self.linear[start..start + kk]
    }

    /// `Q_ȧḃ,αβ = γ^δ_{ȧα} g_{δγ} γ^γ_{ḃβ}`.
    pub fn quadratic(&self, node: usize, a: usize, b: usize) -> &[f64] {
        let kk = self.k * self.k;
        let start = ((node * self.c + a) * self.c + b) * kk;
        &self.quadratic[start..start + kk]
    }

    /// `c_ȧ = 2 tr γ_ȧ`.
    pub fn det_linear(&self, node: usize) -> &[f64] {
        &self.det_linear[node * self.c..(node + 1) * self.c]
    }

    /// `c_ȧḃ = 2 tr γ_ȧ tr γ_ḃ − tr(γ_ȧ γ_ḃ)` (symmetric), row-major c×c.
    pub fn det_quadratic(&self, node: usize) -> &[f64] {
        let cc = self.c * self.c;
        &self.det_quadratic[node * cc..(node + 1) * cc]
    }

    /// Tangential block at offset `q`; exact, since the tube frame is affine
    /// in q.
    pub fn tangential_block(&self, node: usize, q: &[f64]) -> Vec<f64> {
        let kk = self.k * self.k;
        let mut out = self.surface_metric(node).to_vec();
        for a in 0..self.c {
            let l = self.linear(node, a);
            for i in 0..kk {
                out[i] += q[a] * l[i];
            }
            for b in 0..self.c {
                let qq = self.quadratic(node, a, b);
                for i in 0..kk {
                    out[i] += q[a] * q[b] * qq[i];
                }
            }
        }
        out
    }

    /// `g_S (1 + c_ȧ q^ȧ + c_ȧḃ q^ȧ q^ḃ)`.
    pub fn det_expansion(&self, node: usize, q: &[f64]) -> f64 {
        let cl = self.det_linear(node);
        let cq = self.det_quadratic(node);
        let mut f = 1.0;
        for a in 0..self.c {
            f += cl[a] * q[a];
            for b in 0..self.c {
                f += cq[a * self.c + b] * q[a] * q[b];
            }
        }
        self.metric_det[node] * f
    }

    /// `g_S det(I + q^ȧ γ_ȧ)²`, the exact tube determinant.
    pub fn exact_det(&self, node: usize, q: &[f64]) -> f64 {
        let k = self.k;
        let kk = k * k;
        let mut m = vec![0.0; kk];
        for i in 0..k {
            m[i * k + i] = 1.0;
        }
        for a in 0..self.c {
            let s = &self.shapes[(node * self.c + a) * kk..(node * self.c + a + 1) * kk];
            for i in 0..kk {
                m[i] += q[a] * s[i];
            }
        }
        let d = crate::frames::det_small(&m, k);
        self.metric_det[node] * d * d
    }
}

/// Tube metric coefficients from connection coefficients.
pub fn tube_metric(frames: &FrameField, coeffs: &ConnectionCoefficients) -> Result<TubeMetric> {
    let len = frames.len();
    let k = frames.intrinsic_dim();
    let c = frames.codim();
    if coeffs.len() != len {
        return Err(Error::GridMismatch { expected: len, got: coeffs.len() });
    }
    let kk = k * k;
    let mut out = TubeMetric {
        len,
        k,
        c,
        metric: Vec::with_capacity(len * kk),
        metric_det: frames.metric_dets().to_vec(),
        linear: vec![0.0; len * c * kk],
        quadratic: vec![0.0; len * c * c * kk],
        shapes: Vec::with_capacity(len * c * kk),
        det_linear: vec![0.0; len * c],
        det_quadratic: vec![0.0; len * c * c],
    };
    for node in 0..len {
        let g = frames.metric(node);
        out.metric.extend_from_slice(g);
        for a in 0..c {
            out.shapes.extend_from_slice(coeffs.shape_matrix(node, a));
            for al in 0..k {
                for be in 0..k {
                    let mut v = 0.0;
                    for ga in 0..k {
                        v += coeffs.weingarten(node, a, ga, al) * g[ga * k + be] + g[al * k + ga] * coeffs.weingarten(node, a, ga, be);
                    }
                    out.linear[(node * c + a) * kk + al * k + be] = v;
                }
            }
            for b in 0..c {
                for al in 0..k {
                    for be in 0..k {
                        let mut v = 0.0;
                        for de in 0..k {
                            for ga in 0..k {
                                v += coeffs.weingarten(node, a, de, al) * g[de * k + ga] * coeffs.weingarten(node, b, ga, be);
                            }
                        }
                        out.quadratic[((node * c + a) * c + b) * kk + al * k + be] = v;
                    }
                }
                out.det_quadratic[(node * c + a) * c + b] =
                    2.0 * coeffs.trace(node, a) * coeffs.trace(node, b) - coeffs.trace_product(node, a, b);
            }
            out.det_linear[node * c + a] = 2.0 * coeffs.trace(node, a);
        }
    }
    Ok(out)
}

/// `V_eff = ¼ Σ_ȧ (tr γ_ȧ)² − ½ Σ_ȧ tr(γ_ȧ γ_ȧ)` at every node.
///
/// This is `−¼|κ_C|²` for curves and `−(H² − K)` for surfaces in E³.
pub fn effective_potential(coeffs: &ConnectionCoefficients) -> Vec<f64> {
    (0..coeffs.len())
        .map(|node| {
            (0..coeffs.codim())
                .map(|a| {
                    let t = coeffs.trace(node, a);
                    0.25 * t * t - 0.5 * coeffs.trace_product(node, a, a)
                })
                .sum()
        })
        .collect()
}

/// Focal radius over the whole grid.
pub fn grid_focal_radius(coeffs: &ConnectionCoefficients) -> f64 {
    let k = coeffs.intrinsic_dim();
    let c = coeffs.codim();
    let mut radius = f64::INFINITY;
    for node in 0..coeffs.len() {
        let shapes: Vec<Vec<f64>> = (0..c).map(|a| coeffs.shape_matrix(node, a).to_vec()).collect();
        radius = radius.min(focal_radius(&shapes, k));
    }
    radius
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::{build_frames, connection_coefficients, hashimoto_rotate};
    use crate::geometry::{catalog_shape, Boundary, SampleGrid};

    fn setup(name: &str, params: &[f64], counts: &[usize], boundary: Boundary) -> (Embedding, FrameField, ConnectionCoefficients) {
        let e = catalog_shape(name, params).unwrap();
        let g = SampleGrid::on_domain(e.domain(), counts, boundary).unwrap();
        let f = build_frames(&e, &g).unwrap();
        let c = connection_coefficients(&e, &f).unwrap();
        let (f, c) = hashimoto_rotate(&c, &f).unwrap();
        (e, f, c)
    }

    #[test]
    fn zero_offset_returns_surface_frame() {
        let (_, f, _) = setup("torus", &[2.0, 1.0], &[16, 16], Boundary::Periodic);
        let t = tube_frame(&f, 5, &[0.0]).unwrap();
        assert_eq!(t.vectors[0], f.tangent(5, 0));
        assert_eq!(t.vectors[2], f.normal(5, 0));
    }

    #[test]
    fn circle_inward_offset_shrinks_tangent() {
        let (_, f, _) = setup("circle", &[1.0], &[32], Boundary::Periodic);
        // normal 0 is the inward Frenet normal
        let t = tube_frame(&f, 3, &[0.1, 0.0]).unwrap();
        assert!((math::norm(&t.vectors[0]) - 0.9).abs() < 1e-14);
    }

    #[test]
    fn sphere_offset_scales_tangential_block() {
        let (_, f, c) = setup("sphere", &[2.0], &[16, 32], Boundary::Periodic);
        let m = tube_metric(&f, &c).unwrap();
        for node in [0usize, 77, 300] {
            let block = m.tangential_block(node, &[0.1]);
            let g = m.surface_metric(node);
            for i in 0..4 {
                assert!((block[i] - 0.9025 * g[i]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn circle_det_coefficient() {
        let (_, f, c) = setup("circle", &[1.0], &[32], Boundary::Periodic);
        let m = tube_metric(&f, &c).unwrap();
        assert!((m.det_linear(0)[0] + 2.0).abs() < 1e-14);
        assert!(m.det_linear(0)[1].abs() < 1e-14);
    }

    #[test]
    fn focal_radius_is_enforced() {
        let (_, f, _) = setup("circle", &[1.0], &[32], Boundary::Periodic);
        assert!(matches!(tube_frame(&f, 0, &[1.0, 0.0]), Err(Error::FocalRadius { .. })));
    }

    #[test]
    fn potentials_of_catalog_shapes() {
        let (_, _, c) = setup("circle", &[1.0], &[32], Boundary::Periodic);
        assert!(effective_potential(&c).iter().all(|v| (v + 0.25).abs() < 1e-14));
        let (_, _, c) = setup("sphere", &[3.0], &[16, 32], Boundary::Periodic);
        assert!(effective_potential(&c).iter().all(|v| v.abs() < 1e-14));
        let (_, _, c) = setup("torus", &[2.0, 1.0], &[16, 16], Boundary::Periodic);
        assert!((effective_potential(&c)[0] + 1.0 / 9.0).abs() < 1e-14);
    }
}

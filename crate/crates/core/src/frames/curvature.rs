use alloc::vec::Vec;

use num_complex::Complex64;

use super::{ConnectionCoefficients, FrameField};
use crate::dual;
use crate::geometry::Embedding;
use crate::math;
use crate::{Error, Result};

/// Frenet–Serret data of a curve.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveCurvature {
    /// κ = |Y′ ∧ Y″| / |Y′|³.
    pub kappa: Vec<f64>,
    /// τ, signed in E³, unsigned in E⁴, zero in E².
    pub torsion: Vec<f64>,
    /// Complex curvature κ·exp(i∫τ ds), the torsion integral starting at
    /// node 0.
    pub kappa_c: Vec<Complex64>,
    /// `−(γ^s_{1s} + i γ^s_{2s})` read off the frame; equals `kappa_c` up to
    /// a constant phase once the frame is Hashimoto-rotated.
    pub kappa_c_frame: Vec<Complex64>,
}

/// Mean and Gauss curvature of a surface.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceCurvature {
    /// `H = −½ tr γ` in E³ and `|H_c|` in E⁴.
    pub mean: Vec<f64>,
    /// `K = Σ_ȧ det γ_ȧ`.
    pub gauss: Vec<f64>,
    /// `H_c = H_1 + i H_2`, `H_ȧ = −½ tr γ_ȧ`, for surfaces in E⁴.
    pub mean_complex: Option<Vec<Complex64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CurvatureData {
    Curve(CurveCurvature),
    Surface(SurfaceCurvature),
}

impl CurvatureData {
    pub fn as_curve(&self) -> Option<&CurveCurvature> {
        match self {
            CurvatureData::Curve(c) => Some(c),
            CurvatureData::Surface(_) => None,
        }
    }

    pub fn as_surface(&self) -> Option<&SurfaceCurvature> {
        match self {
            CurvatureData::Surface(s) => Some(s),
            CurvatureData::Curve(_) => None,
        }
    }
}

/// Scalar curvature fields on the frame grid.
///
/// Curve curvature and torsion come straight from the jets (independent of
/// the frame); the frame only enters `kappa_c_frame` and the surface shape
/// operators.
pub fn curvature_data(embedding: &Embedding, frames: &FrameField, coeffs: &ConnectionCoefficients) -> Result<CurvatureData> {
    let grid = frames.grid();
    let k = frames.intrinsic_dim();
    let c = frames.codim();
    if coeffs.len() != grid.len() {
        return Err(Error::GridMismatch {
            expected: grid.len(),
            got: coeffs.len(),
        });
    }
    if k == 1 {
        let n = frames.ambient_dim();
        let len = grid.len();
        let mut kappa = Vec::with_capacity(len);
        let mut torsion = Vec::with_capacity(len);
        let mut speed = Vec::with_capacity(len);
        for node in 0..len {
            let jet = embedding.jet(&grid.params(node), 3)?;
            let (d1, d2, d3) = (jet.first(0), jet.second(0, 0), jet.third(0, 0, 0));
            let v = math::norm(d1);
            let w12 = gram_det(&[d1, d2]);
            let area = math::sqrt(w12.max(0.0));
            kappa.push(area / (v * v * v));
            let tau = if n == 3 {
                dual::det(&[d1, d2, d3]) / w12
            } else if n >= 4 {
                math::sqrt(gram_det(&[d1, d2, d3]).max(0.0)) / w12
            } else {
                0.0
            };
            torsion.push(if w12 > 0.0 { tau } else { 0.0 });
            speed.push(v);
        }
        // cumulative ∫τ ds by the trapezoid rule in the grid parameter
        let h = grid.spacing(0);
        let mut phase = 0.0;
        let mut kappa_c = Vec::with_capacity(len);
        for node in 0..len {
            if node > 0 {
                phase += 0.5 * h * (torsion[node - 1] * speed[node - 1] + torsion[node] * speed[node]);
            }
            kappa_c.push(Complex64::from_polar(kappa[node], phase));
        }
        let kappa_c_frame = (0..len)
            .map(|node| {
                let re = -coeffs.weingarten(node, 0, 0, 0);
                let im = if c > 1 { -coeffs.weingarten(node, 1, 0, 0) } else { 0.0 };
                Complex64::new(re, im)
            })
            .collect();
        return Ok(CurvatureData::Curve(CurveCurvature {
            kappa,
            torsion,
            kappa_c,
            kappa_c_frame,
        }));
    }

    let len = grid.len();
    let mut mean = Vec::with_capacity(len);
    let mut gauss = Vec::with_capacity(len);
    let mut complex = Vec::with_capacity(len);
    for node in 0..len {
        let mut kk = 0.0;
        let mut parts = [0.0; 2];
        for a in 0..c {
            let m = coeffs.shape_matrix(node, a);
            kk += m[0] * m[3] - m[1] * m[2];
            if a < 2 {
                parts[a] = -0.5 * coeffs.trace(node, a);
            }
        }
        gauss.push(kk);
        if c == 1 {
            mean.push(parts[0]);
        } else {
            let hc = Complex64::new(parts[0], parts[1]);
            mean.push(hc.norm());
            complex.push(hc);
        }
    }
    Ok(CurvatureData::Surface(SurfaceCurvature {
        mean,
        gauss,
        mean_complex: if c == 1 { None } else { Some(complex) },
    }))
}

/// Gram determinant `|v₁ ∧ … ∧ v_m|²`.
fn gram_det(vectors: &[&[f64]]) -> f64 {
    let m = vectors.len();
    let mut rows = [[0.0; 3]; 3];
    for i in 0..m {
        for j in 0..m {
            rows[i][j] = math::dot(vectors[i], vectors[j]);
        }
    }
    let refs: [&[f64]; 3] = [&rows[0][..m], &rows[1][..m], &rows[2][..m]];
    dual::det(&refs[..m])
}

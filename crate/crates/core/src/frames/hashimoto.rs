use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{local_frame, ConnectionCoefficients, FrameField, LocalFrame};
use crate::geometry::Embedding;
use crate::math;
use crate::{Error, Result};

/// Rotation angles of a Hashimoto-rotated codimension-2 frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Rotation {
    angles: Vec<f64>,
    holonomy: Vec<Option<f64>>,
    path_defect: f64,
}

impl Rotation {
    /// Angle θ at every node, `θ = 0` at node 0.
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// Accumulated angle once around each periodic axis (`None` on open
    /// axes). A nonzero value means the rotated frame is not periodic.
    pub fn holonomy(&self) -> &[Option<f64>] {
        &self.holonomy
    }

    /// For surfaces: largest difference between integrating axis 0 first and
    /// axis 1 first. Nonzero when the normal bundle is curved, in which case
    /// no rotation removes the normal connection exactly.
    pub fn path_defect(&self) -> f64 {
        self.path_defect
    }

    /// θ at an arbitrary parameter point: the node angle of the cell corner
    /// plus the Gauss–Legendre integral of the unrotated normal connection
    /// from there, continued across periodic wraps by the holonomy.
    pub(crate) fn angle_at(&self, frames: &FrameField, embedding: &Embedding, params: &[f64]) -> Result<f64> {
        let grid = frames.grid();
        let recipe = frames.recipe();
        let k = grid.dim();
        let mut reduced = params.to_vec();
        let mut corner = vec![0usize; k];
        let mut theta = 0.0;
        for a in 0..k {
            let axis = grid.axis(a);
            let h = axis.spacing();
            let x = if axis.periodic {
                let len = axis.hi - axis.lo;
                let wraps = libm::floor((params[a] - axis.lo) / len);
                theta += wraps * self.holonomy[a].unwrap_or(0.0);
                params[a] - wraps * len
            } else {
                params[a]
            };
            reduced[a] = x;
            let offset = if axis.periodic { 0.0 } else { 0.5 };
            let i = libm::floor((x - axis.lo) / h - offset).max(0.0) as usize;
            corner[a] = i.min(axis.count - 1);
        }
        theta += self.angles[grid.index(&corner)];
        let mut point: Vec<f64> = (0..k).map(|a| grid.axis(a).node(corner[a])).collect();
        for a in 0..k {
            let from = point[a];
            let to = reduced[a];
            if from != to {
                let mut failure = None;
                let integral = math::gauss_legendre(
                    |t| {
                        let mut p = point.clone();
                        p[a] = t;
                        match local_frame(embedding, &p, recipe) {
                            Ok(f) => f.normal_connection(0, 1, a),
                            Err(e) => {
                                failure = Some(e);
                                0.0
                            }
                        }
                    },
                    from,
                    to,
                );
                if let Some(e) = failure {
                    return Err(e);
                }
                theta += integral;
            }
            point[a] = to;
        }
        Ok(theta)
    }
}

/// Rotates a local codimension-2 frame by θ with angular rates `θ_α`.
pub(crate) fn rotate_local(frame: &LocalFrame, theta: f64, rates: &[f64]) -> LocalFrame {
    let (s, c) = (math::sin(theta), math::cos(theta));
    let n = frame.position.len().max(frame.normals[0].len());
    let k = frame.tangents.len();
    let e1: Vec<f64> = (0..n).map(|i| c * frame.normals[0][i] - s * frame.normals[1][i]).collect();
    let e2: Vec<f64> = (0..n).map(|i| s * frame.normals[0][i] + c * frame.normals[1][i]).collect();
    let mut d1 = Vec::with_capacity(k);
    let mut d2 = Vec::with_capacity(k);
    for al in 0..k {
        let (a, b) = (&frame.normal_derivatives[0][al], &frame.normal_derivatives[1][al]);
        d1.push((0..n).map(|i| c * a[i] - s * b[i] - rates[al] * e2[i]).collect::<Vec<f64>>());
        d2.push((0..n).map(|i| s * a[i] + c * b[i] + rates[al] * e1[i]).collect::<Vec<f64>>());
    }
    LocalFrame {
        position: frame.position.clone(),
        tangents: frame.tangents.clone(),
        normals: vec![e1, e2],
        normal_derivatives: vec![d1, d2],
    }
}

/// Cumulative trapezoid of `rate` along one grid line starting at `start`.
/// Returns the node values and, on periodic axes, the closed-loop total.
fn integrate_line(frames: &FrameField, coeffs: &ConnectionCoefficients, start: usize, axis: usize, theta0: f64, out: &mut [f64]) -> Option<f64> {
    let grid = frames.grid();
    let ax = grid.axis(axis);
    let h = ax.spacing();
    let stride = grid.stride(axis);
    let rate = |node: usize| coeffs.normal(node, 0, 1, axis);
    let mut theta = theta0;
    out[start] = theta;
    for i in 1..ax.count {
        let prev = start + (i - 1) * stride;
        let node = start + i * stride;
        theta += 0.5 * h * (rate(prev) + rate(node));
        out[node] = theta;
    }
    if ax.periodic {
        let last = start + (ax.count - 1) * stride;
        Some(theta + 0.5 * h * (rate(last) + rate(start)) - theta0)
    } else {
        None
    }
}

/// Hashimoto rotation: turns the normal pair by θ with `∂_α θ = γ̃^2_{1α}`
/// so the normal connection vanishes.
///
/// Codimension 1 is returned unchanged; codimension above 2 needs
/// path-ordered SO(n−k) transport and is rejected.
pub fn hashimoto_rotate(coeffs: &ConnectionCoefficients, frames: &FrameField) -> Result<(FrameField, ConnectionCoefficients)> {
    let c = frames.codim();
    let k = frames.intrinsic_dim();
    if coeffs.len() != frames.len() || coeffs.codim() != c {
        return Err(Error::GridMismatch {
            expected: frames.len(),
            got: coeffs.len(),
        });
    }
    if c == 1 || frames.rotation().is_some() {
        return Ok((frames.clone(), coeffs.clone()));
    }
    if c > 2 {
        return Err(Error::Unsupported(format!(
            "normal-connection elimination in codimension {} (only 1 and 2 are implemented)",
            c
        )));
    }
    let grid = frames.grid();
    let len = grid.len();
    let mut angles = vec![0.0; len];
    let mut holonomy = vec![None; k];
    let mut path_defect = 0.0;
    if k == 1 {
        holonomy[0] = integrate_line(frames, coeffs, 0, 0, 0.0, &mut angles);
    } else {
        // axis 0 along the first row, then axis 1 up every column
        holonomy[0] = integrate_line(frames, coeffs, 0, 0, 0.0, &mut angles);
        let mut first_column = vec![0.0; len];
        let mut scratch = vec![0.0; len];
        for i in 0..grid.axis(0).count {
            let start = i * grid.stride(0);
            let theta0 = angles[start];
            let h = integrate_line(frames, coeffs, start, 1, theta0, &mut scratch);
            if i == 0 {
                holonomy[1] = h;
            }
            for j in 0..grid.axis(1).count {
                let node = start + j * grid.stride(1);
                angles[node] = scratch[node];
            }
        }
        // the other order, for the path-dependence diagnostic
        integrate_line(frames, coeffs, 0, 1, 0.0, &mut first_column);
        for j in 0..grid.axis(1).count {
            let start = j * grid.stride(1);
            let theta0 = first_column[start];
            integrate_line(frames, coeffs, start, 0, theta0, &mut scratch);
            for i in 0..grid.axis(0).count {
                let node = start + i * grid.stride(0);
                path_defect = f64::max(path_defect, math::abs(scratch[node] - angles[node]));
            }
        }
    }

    let n = frames.ambient_dim();
    let mut normals = Vec::with_capacity(len * 2 * n);
    let mut derivatives = Vec::with_capacity(len * 2 * k * n);
    let mut rotated = ConnectionCoefficients::zeros(len, k, 2);
    for node in 0..len {
        let rates: Vec<f64> = (0..k).map(|al| coeffs.normal(node, 0, 1, al)).collect();
        let frame = rotate_local(&frames.local(node), angles[node], &rates);
        for v in &frame.normals {
            normals.extend_from_slice(v);
        }
        for per_a in &frame.normal_derivatives {
            for d in per_a {
                derivatives.extend_from_slice(d);
            }
        }
        let (s, co) = (math::sin(angles[node]), math::cos(angles[node]));
        for be in 0..k {
            for al in 0..k {
                let (w1, w2) = (coeffs.weingarten(node, 0, be, al), coeffs.weingarten(node, 1, be, al));
                rotated.set_weingarten(node, 0, be, al, co * w1 - s * w2);
                rotated.set_weingarten(node, 1, be, al, s * w1 + co * w2);
                let (f1, f2) = (coeffs.second(node, 0, be, al), coeffs.second(node, 1, be, al));
                rotated.set_second(node, 0, be, al, co * f1 - s * f2);
                rotated.set_second(node, 1, be, al, s * f1 + co * f2);
            }
        }
        for al in 0..k {
            for a in 0..2 {
                for b in 0..2 {
                    let v = math::dot(&frame.normal_derivatives[a][al], &frame.normals[b]);
                    rotated.set_normal(node, a, b, al, v);
                }
            }
        }
    }
    let rotation = Rotation {
        angles,
        holonomy,
        path_defect,
    };
    Ok((frames.with_rotation(normals, derivatives, rotation), rotated))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::{build_frames, connection_coefficients};
    use crate::geometry::{catalog_shape, Boundary, SampleGrid};

    fn rotated(name: &str, params: &[f64], counts: &[usize], boundary: Boundary) -> (Embedding, FrameField, ConnectionCoefficients, ConnectionCoefficients) {
        let e = catalog_shape(name, params).unwrap();
        let g = SampleGrid::on_domain(e.domain(), counts, boundary).unwrap();
        let f = build_frames(&e, &g).unwrap();
        let c = connection_coefficients(&e, &f).unwrap();
        let (rf, rc) = hashimoto_rotate(&c, &f).unwrap();
        (e, rf, c, rc)
    }

    #[test]
    fn helix_connection_eliminated() {
        let (e, rf, _, rc) = rotated("helix", &[3.0, 4.0], &[128], Boundary::Dirichlet);
        assert!(rc.max_normal_connection() < 1e-12);
        // recomputing from the rotated frame agrees
        let again = connection_coefficients(&e, &rf).unwrap();
        assert!(again.max_normal_connection() < 1e-12);
        assert_eq!(rf.rotation().unwrap().holonomy(), &[None]);
    }

    #[test]
    fn rotated_frame_matches_its_derivatives_between_nodes() {
        let (e, rf, _, _) = rotated("helix", &[3.0, 4.0], &[64], Boundary::Dirichlet);
        let s = 7.31;
        let h = 1e-5;
        let mid = rf.frame_at(&e, &[s]).unwrap();
        let lo = rf.frame_at(&e, &[s - h]).unwrap();
        let hi = rf.frame_at(&e, &[s + h]).unwrap();
        for a in 0..2 {
            for i in 0..3 {
                let fd = (hi.normals[a][i] - lo.normals[a][i]) / (2.0 * h);
                assert!((fd - mid.normal_derivatives[a][0][i]).abs() < 1e-7);
            }
        }
        assert!(mid.normal_connection(0, 1, 0).abs() < 1e-12);
    }

    #[test]
    fn planar_circle_has_no_rotation() {
        let (_, rf, c, _) = rotated("circle", &[1.0], &[64], Boundary::Periodic);
        assert!(c.max_normal_connection() < 1e-14);
        let rot = rf.rotation().unwrap();
        assert!(rot.angles().iter().all(|a| a.abs() < 1e-14));
        assert!(rot.holonomy()[0].unwrap().abs() < 1e-14);
    }

    #[test]
    fn codimension_one_is_identity() {
        let (_, rf, c, rc) = rotated("sphere", &[1.0], &[8, 16], Boundary::Periodic);
        assert!(rf.rotation().is_none());
        assert_eq!(c, rc);
    }

    #[test]
    fn flat_torus_normal_bundle() {
        let (_, rf, _, rc) = rotated("flat_torus4", &[1.0], &[16, 16], Boundary::Periodic);
        assert!(rc.max_normal_connection() < 1e-12);
        assert!(rf.rotation().unwrap().path_defect() < 1e-12);
    }
}

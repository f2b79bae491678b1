use alloc::boxed::Box;
use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::{Embedding, Interval, Jet, Parametrization};
use crate::math::{dcos, dsin, sqrt};
use crate::{Error, Result};

/// Analytic catalog shapes with exact jets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape {
    /// Circle of radius R in the z = 0 plane of E³, parametrised by arclength.
    Circle { radius: f64 },
    /// Ellipse `(a cos t, b sin t, 0)`, t ∈ [0, 2π).
    Ellipse { a: f64, b: f64 },
    /// Helix `(a cos(s/c), a sin(s/c), b s/c)`, c = √(a² + b²), arclength s ∈ [0, L].
    Helix { radius: f64, pitch: f64, length: f64 },
    /// Torus of revolution with tube centre radius `major` and tube radius `minor`.
    Torus { major: f64, minor: f64 },
    /// Round sphere in polar angle θ ∈ [0, π] and azimuth φ ∈ [0, 2π).
    Sphere { radius: f64 },
    /// Flat torus `(a cos u, a sin u, a cos v, a sin v)` in E⁴.
    FlatTorus4 { radius: f64 },
}

pub const SHAPE_NAMES: [&str; 6] = ["circle", "ellipse", "helix", "torus", "sphere", "flat_torus4"];

fn positive(params: &[f64], index: usize) -> Result<f64> {
    let v = params[index];
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidParameter {
            index,
            reason: format!("must be a positive finite number, got {}", v),
        })
    }
}

fn expect_count(shape: &'static str, expected: &'static str, params: &[f64], allowed: &[usize]) -> Result<()> {
    if allowed.contains(&params.len()) {
        Ok(())
    } else {
        Err(Error::ParameterCount {
            shape,
            expected,
            got: params.len(),
        })
    }
}

impl Shape {
    pub fn parse(name: &str, params: &[f64]) -> Result<Shape> {
        match name {
            "circle" => {
                expect_count("circle", "1 (R)", params, &[1])?;
                Ok(Shape::Circle { radius: positive(params, 0)? })
            }
            "ellipse" => {
                expect_count("ellipse", "2 (a, b)", params, &[2])?;
                Ok(Shape::Ellipse {
                    a: positive(params, 0)?,
                    b: positive(params, 1)?,
                })
            }
            "helix" => {
                expect_count("helix", "2 or 3 (a, b[, L])", params, &[2, 3])?;
                let radius = positive(params, 0)?;
                let pitch = positive(params, 1)?;
                let length = if params.len() == 3 {
                    positive(params, 2)?
                } else {
                    2.0 * PI * sqrt(radius * radius + pitch * pitch)
                };
                Ok(Shape::Helix { radius, pitch, length })
            }
            "torus" => {
                expect_count("torus", "2 (A, a)", params, &[2])?;
                let major = positive(params, 0)?;
                let minor = positive(params, 1)?;
                if major <= minor {
                    return Err(Error::InvalidParameter {
                        index: 0,
                        reason: format!("major radius {} must exceed minor radius {}", major, minor),
                    });
                }
                Ok(Shape::Torus { major, minor })
            }
            "sphere" => {
                expect_count("sphere", "1 (R)", params, &[1])?;
                Ok(Shape::Sphere { radius: positive(params, 0)? })
            }
            "flat_torus4" => {
                expect_count("flat_torus4", "1 (a)", params, &[1])?;
                Ok(Shape::FlatTorus4 { radius: positive(params, 0)? })
            }
            other => Err(Error::UnknownShape(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Shape::Circle { .. } => "circle",
            Shape::Ellipse { .. } => "ellipse",
            Shape::Helix { .. } => "helix",
            Shape::Torus { .. } => "torus",
            Shape::Sphere { .. } => "sphere",
            Shape::FlatTorus4 { .. } => "flat_torus4",
        }
    }

    /// Mixed partial `∂^{counts} Y` at `x`.
    fn partial(&self, x: &[f64], counts: &[usize], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        match *self {
            Shape::Circle { radius: r } => {
                let m = counts[0];
                let t = x[0] / r;
                let scale = r / crate::math::powi(r, m as i32);
                out[0] = scale * dcos(t, m);
                out[1] = scale * dsin(t, m);
            }
            Shape::Ellipse { a, b } => {
                let m = counts[0];
                out[0] = a * dcos(x[0], m);
                out[1] = b * dsin(x[0], m);
            }
            Shape::Helix { radius, pitch, .. } => {
                let c = sqrt(radius * radius + pitch * pitch);
                let m = counts[0];
                let t = x[0] / c;
                let scale = crate::math::powi(c, -(m as i32));
                out[0] = radius * scale * dcos(t, m);
                out[1] = radius * scale * dsin(t, m);
                out[2] = match m {
                    0 => pitch * t,
                    1 => pitch / c,
                    _ => 0.0,
                };
            }
            Shape::Torus { major, minor } => {
                let (i, j) = (counts[0], counts[1]);
                let (u, v) = (x[0], x[1]);
                let radial = if j == 0 { major + minor * dcos(v, 0) } else { minor * dcos(v, j) };
                out[0] = radial * dcos(u, i);
                out[1] = radial * dsin(u, i);
                out[2] = if i == 0 { minor * dsin(v, j) } else { 0.0 };
            }
            Shape::Sphere { radius } => {
                let (i, j) = (counts[0], counts[1]);
                let (theta, phi) = (x[0], x[1]);
                out[0] = radius * dsin(theta, i) * dcos(phi, j);
                out[1] = radius * dsin(theta, i) * dsin(phi, j);
                out[2] = if j == 0 { radius * dcos(theta, i) } else { 0.0 };
            }
            Shape::FlatTorus4 { radius } => {
                let (i, j) = (counts[0], counts[1]);
                if j == 0 {
                    out[0] = radius * dcos(x[0], i);
                    out[1] = radius * dsin(x[0], i);
                }
                if i == 0 {
                    out[2] = radius * dcos(x[1], j);
                    out[3] = radius * dsin(x[1], j);
                }
            }
        }
    }
}

impl Parametrization for Shape {
    fn ambient_dim(&self) -> usize {
        match self {
            Shape::FlatTorus4 { .. } => 4,
            _ => 3,
        }
    }

    fn intrinsic_dim(&self) -> usize {
        match self {
            Shape::Circle { .. } | Shape::Ellipse { .. } | Shape::Helix { .. } => 1,
            _ => 2,
        }
    }

    fn domain(&self) -> Vec<Interval> {
        let full = Interval::new(0.0, 2.0 * PI, true);
        match *self {
            Shape::Circle { radius } => vec![Interval::new(0.0, 2.0 * PI * radius, true)],
            Shape::Ellipse { .. } => vec![full],
            Shape::Helix { length, .. } => vec![Interval::new(0.0, length, false)],
            Shape::Torus { .. } | Shape::FlatTorus4 { .. } => vec![full, full],
            Shape::Sphere { .. } => vec![Interval::new(0.0, PI, false), full],
        }
    }

    fn jet(&self, params: &[f64], order: usize) -> Jet {
        Jet::from_partials(self.ambient_dim(), self.intrinsic_dim(), order, |counts, out| {
            self.partial(params, counts, out)
        })
    }
}

/// Builds a catalog embedding from a shape name and its parameters:
/// `circle(R)`, `ellipse(a,b)`, `helix(a,b[,L])`, `torus(A,a)`, `sphere(R)`,
/// `flat_torus4(a)`.
pub fn catalog_shape(name: &str, params: &[f64]) -> Result<Embedding> {
    let shape = Shape::parse(name, params)?;
    Embedding::new(shape.name(), Box::new(shape))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::norm;

    #[test]
    fn unit_circle_at_origin_angle() {
        let c = catalog_shape("circle", &[1.0]).unwrap();
        let j = c.jet(&[0.0], 1).unwrap();
        assert_eq!(j.position(), &[1.0, 0.0, 0.0]);
        assert_eq!(j.first(0), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn helix_is_unit_speed() {
        let h = catalog_shape("helix", &[3.0, 4.0]).unwrap();
        for s in [0.0, 1.3, 7.7, 20.0] {
            let j = h.jet(&[s], 1).unwrap();
            assert!((norm(j.first(0)) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn sphere_equator_point() {
        let s = catalog_shape("sphere", &[2.0]).unwrap();
        let j = s.jet(&[PI / 2.0, 0.0], 0).unwrap();
        assert!((j.position()[0] - 2.0).abs() < 1e-15);
        assert!(j.position()[1].abs() < 1e-15 && j.position()[2].abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(catalog_shape("circle", &[-1.0]), Err(Error::InvalidParameter { index: 0, .. })));
        assert!(matches!(catalog_shape("torus", &[1.0, 2.0]), Err(Error::InvalidParameter { index: 0, .. })));
        assert!(matches!(catalog_shape("torus", &[1.0, 1.0]), Err(Error::InvalidParameter { .. })));
        assert!(matches!(catalog_shape("blob", &[1.0]), Err(Error::UnknownShape(_))));
        assert!(matches!(catalog_shape("sphere", &[1.0, 2.0]), Err(Error::ParameterCount { .. })));
    }

    #[test]
    fn names_round_trip() {
        for name in SHAPE_NAMES {
            let params: &[f64] = match name {
                "ellipse" | "helix" | "torus" => &[2.0, 1.0],
                _ => &[1.5],
            };
            assert_eq!(Shape::parse(name, params).unwrap().name(), name);
        }
    }
}

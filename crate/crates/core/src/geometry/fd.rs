use alloc::vec;
use alloc::vec::Vec;

use super::{Embedding, Jet};
use crate::Result;

/// Step and Richardson depth for [`jets_fd_with`].
///
/// `levels = 0` is the plain second-order central stencil; each level removes
/// the next even power of the step (`levels = 1` is fourth order).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdOptions {
    pub step: f64,
    pub levels: usize,
}

impl Default for FdOptions {
    fn default() -> Self {
        FdOptions { step: 0.05, levels: 3 }
    }
}

/// Finite-difference jets with the default step and Richardson depth.
pub fn jets_fd(embedding: &Embedding, params: &[f64], order: usize) -> Result<Jet> {
    jets_fd_with(embedding, params, order, FdOptions::default())
}

/// Central differences of the position map, Richardson-extrapolated in the
/// step. Only positions of the embedding are sampled.
pub fn jets_fd_with(embedding: &Embedding, params: &[f64], order: usize, options: FdOptions) -> Result<Jet> {
    embedding.check_params(params)?;
    let n = embedding.ambient_dim();
    let k = embedding.intrinsic_dim();
    let order = order.clamp(1, super::MAX_JET_ORDER);
    let eval = |axes: &[usize], h: f64| -> Vec<f64> { nested_central(embedding, params, axes, h) };

    let mut jet = Jet::zeros(n, k, order);
    jet.position_mut().copy_from_slice(&embedding.position(params));

    let mut axes = Vec::with_capacity(3);
    let fill = |axes: &[usize], out: &mut [f64]| {
        let v = richardson(|h| eval(axes, h), options);
        out.copy_from_slice(&v);
    };
    for a in 0..k {
        axes.clear();
        axes.push(a);
        fill(&axes, jet.first_mut(a));
    }
    if order >= 2 {
        for a in 0..k {
            for b in 0..k {
                axes.clear();
                axes.extend([a, b]);
                fill(&axes, jet.second_mut(a, b));
            }
        }
    }
    if order >= 3 {
        for a in 0..k {
            for b in 0..k {
                for c in 0..k {
                    axes.clear();
                    axes.extend([a, b, c]);
                    fill(&axes, jet.third_mut(a, b, c));
                }
            }
        }
    }
    Ok(jet)
}

/// `D_{a_1}(h) … D_{a_m}(h) Y` with the two-point central difference `D`.
fn nested_central(embedding: &Embedding, params: &[f64], axes: &[usize], h: f64) -> Vec<f64> {
    let n = embedding.ambient_dim();
    let m = axes.len();
    let mut acc = vec![0.0; n];
    let mut point = params.to_vec();
    // each of the 2^m sign patterns contributes ±Y(x + Σ ±h e_a)
    for pattern in 0..(1u32 << m) {
        point.copy_from_slice(params);
        let mut sign = 1.0;
        for (bit, &a) in axes.iter().enumerate() {
            if pattern & (1 << bit) != 0 {
                point[a] -= h;
                sign = -sign;
            } else {
                point[a] += h;
            }
        }
        let y = embedding.jet_unchecked(&point, 0);
        for (acc, y) in acc.iter_mut().zip(y.position()) {
            *acc += sign * y;
        }
    }
    let denom = crate::math::powi(2.0 * h, m as i32);
    acc.iter_mut().for_each(|v| *v /= denom);
    acc
}

/// Richardson tableau over steps h, h/2, …, h/2^levels for an even error
/// expansion.
pub(crate) fn richardson<F>(mut estimate: F, options: FdOptions) -> Vec<f64>
where
    F: FnMut(f64) -> Vec<f64>,
{
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(options.levels + 1);
    let mut h = options.step;
    for _ in 0..=options.levels {
        rows.push(estimate(h));
        h *= 0.5;
    }
    // in-place Neville-style elimination of h², h⁴, …
    for level in 1..=options.levels {
        let factor = crate::math::powi(4.0, level as i32);
        for i in (level..rows.len()).rev() {
            let (lo, hi) = rows.split_at_mut(i);
            let coarse = &lo[i - 1];
            for (f, c) in hi[0].iter_mut().zip(coarse) {
                *f = (factor * *f - c) / (factor - 1.0);
            }
        }
    }
    rows.pop().unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::catalog_shape;

    #[test]
    fn circle_first_derivative_matches_exact() {
        let c = catalog_shape("circle", &[1.0]).unwrap();
        for s in [0.0, 0.4, 2.0, 5.9] {
            let fd = jets_fd(&c, &[s], 1).unwrap();
            let exact = c.jet(&[s], 1).unwrap();
            let diff = fd
                .first(0)
                .iter()
                .zip(exact.first(0))
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(diff < 1e-8, "diff {diff}");
        }
    }

    #[test]
    fn helix_second_derivative_relative_error() {
        let h = catalog_shape("helix", &[3.0, 4.0]).unwrap();
        let fd = jets_fd(&h, &[5.0], 2).unwrap();
        let exact = h.jet(&[5.0], 2).unwrap();
        let scale = crate::math::norm(exact.second(0, 0));
        let err = fd
            .second(0, 0)
            .iter()
            .zip(exact.second(0, 0))
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err / scale < 1e-7, "rel err {}", err / scale);
    }

    #[test]
    fn fourth_order_stencil_halving_ratio() {
        let e = catalog_shape("ellipse", &[2.0, 1.0]).unwrap();
        let exact = e.jet(&[0.7], 2).unwrap();
        let err = |h: f64| {
            let fd = jets_fd_with(&e, &[0.7], 2, FdOptions { step: h, levels: 1 }).unwrap();
            fd.second(0, 0)
                .iter()
                .zip(exact.second(0, 0))
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        };
        let ratio = err(0.2) / err(0.1);
        assert!((ratio - 16.0).abs() < 1.0, "ratio {ratio}");
    }

    #[test]
    fn rejects_points_outside_open_domain() {
        let h = catalog_shape("helix", &[3.0, 4.0, 10.0]).unwrap();
        assert!(jets_fd(&h, &[-1.0], 1).is_err());
        assert!(jets_fd(&h, &[11.0], 1).is_err());
    }
}

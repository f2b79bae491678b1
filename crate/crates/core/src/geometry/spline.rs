//! Quintic B-spline interpolation of sampled curves.
//!
//! Samples are interpolated against their row index `u`; both the position
//! and the parameter column `s(u)` are splines and jets with respect to `s`
//! follow from the chain rule through the inverse `u(s)`.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{Embedding, Interval, Jet, Parametrization};
use crate::math::{abs, norm};
use crate::{Error, Result};

/// First and last samples closer than this close the curve.
pub const CLOSURE_TOLERANCE: f64 = 1e-8;
/// Minimum number of sample rows.
pub const MIN_SAMPLES: usize = 16;

const DEGREE: usize = 5;
/// Ghost samples appended on each side of an open curve.
const GHOSTS: usize = 8;
/// Values of the quintic cardinal B-spline at its interior knots 1..5.
const KNOT_WEIGHTS: [f64; 5] = [1.0 / 120.0, 26.0 / 120.0, 66.0 / 120.0, 26.0 / 120.0, 1.0 / 120.0];

/// d-th derivative of the cardinal B-spline of degree `p` (support `[0, p+1]`).
fn cardinal(p: usize, x: f64, d: usize) -> f64 {
    if x < 0.0 || x >= (p + 1) as f64 {
        return 0.0;
    }
    if d > 0 {
        if p == 0 {
            return 0.0;
        }
        return cardinal(p - 1, x, d - 1) - cardinal(p - 1, x - 1.0, d - 1);
    }
    if p == 0 {
        return 1.0;
    }
    let pf = p as f64;
    (x * cardinal(p - 1, x, 0) + (pf + 1.0 - x) * cardinal(p - 1, x - 1.0, 0)) / pf
}

/// Uniform quintic spline through values at integer abscissae.
#[derive(Clone, Debug)]
struct Spline1 {
    /// Coefficient for basis centred at integer `offset + i`.
    coeffs: Vec<f64>,
    offset: isize,
    /// Period in index units for closed splines.
    period: Option<usize>,
}

impl Spline1 {
    fn periodic(values: &[f64]) -> Spline1 {
        let n = values.len();
        let coeffs = solve_banded(values, |j| Some(j.rem_euclid(n as isize) as usize), n);
        Spline1 {
            coeffs,
            offset: 0,
            period: Some(n),
        }
    }

    fn open(values: &[f64]) -> Spline1 {
        let n = values.len();
        let extended = extend(values, GHOSTS);
        let m = extended.len();
        // Coefficients outside the extended range are approximated by the
        // extrapolated data itself; the error decays geometrically inwards.
        let far = extend(values, GHOSTS + 2);
        let outer = |j: isize| far[(j + 2) as usize];
        let coeffs = solve_banded_open(&extended, outer);
        let _ = n;
        Spline1 {
            coeffs,
            offset: -(GHOSTS as isize),
            period: None,
        }
        .with_len_check(m)
    }

    fn with_len_check(self, m: usize) -> Self {
        debug_assert_eq!(self.coeffs.len(), m);
        self
    }

    fn coeff(&self, i: isize) -> f64 {
        match self.period {
            Some(n) => self.coeffs[i.rem_euclid(n as isize) as usize],
            None => {
                let j = i - self.offset;
                let j = j.clamp(0, self.coeffs.len() as isize - 1);
                self.coeffs[j as usize]
            }
        }
    }

    /// Value and derivatives up to order 3 at `u`.
    fn eval(&self, u: f64) -> [f64; 4] {
        let span = libm::floor(u) as isize;
        let mut out = [0.0; 4];
        for i in (span - 2)..=(span + 3) {
            let x = u - i as f64 + 3.0;
            let c = self.coeff(i);
            for (d, o) in out.iter_mut().enumerate() {
                *o += c * cardinal(DEGREE, x, d);
            }
        }
        out
    }
}

/// Degree-5 polynomial extrapolation of `ghosts` extra samples at each end.
fn extend(values: &[f64], ghosts: usize) -> Vec<f64> {
    let n = values.len();
    let mut out = Vec::with_capacity(n + 2 * ghosts);
    for g in (1..=ghosts).rev() {
        out.push(lagrange_extrapolate(&values[..6], -(g as f64)));
    }
    out.extend_from_slice(values);
    for g in 1..=ghosts {
        out.push(lagrange_extrapolate(&values[n - 6..], 5.0 + g as f64));
    }
    out
}

/// Lagrange interpolant through `(i, ys[i])` evaluated at `x`.
fn lagrange_extrapolate(ys: &[f64], x: f64) -> f64 {
    let m = ys.len();
    let mut total = 0.0;
    for i in 0..m {
        let mut w = 1.0;
        for j in 0..m {
            if i != j {
                w *= (x - j as f64) / (i as f64 - j as f64);
            }
        }
        total += w * ys[i];
    }
    total
}

/// Gauss–Seidel on the diagonally dominant circulant system
/// `Σ_d w_d c_{j+d} = y_j`.
fn solve_banded(values: &[f64], wrap: impl Fn(isize) -> Option<usize>, n: usize) -> Vec<f64> {
    let mut c = values.to_vec();
    for _ in 0..400 {
        let mut change: f64 = 0.0;
        for j in 0..n {
            let mut rhs = values[j];
            for (d, w) in KNOT_WEIGHTS.iter().enumerate() {
                if d == 2 {
                    continue;
                }
                if let Some(idx) = wrap(j as isize + d as isize - 2) {
                    rhs -= w * c[idx];
                }
            }
            let new = rhs / KNOT_WEIGHTS[2];
            change = change.max(abs(new - c[j]));
            c[j] = new;
        }
        let scale = values.iter().fold(1.0f64, |m, v| m.max(abs(*v)));
        if change <= 1e-16 * scale {
            break;
        }
    }
    c
}

fn solve_banded_open(values: &[f64], outer: impl Fn(isize) -> f64) -> Vec<f64> {
    let m = values.len() as isize;
    let mut c = values.to_vec();
    for _ in 0..400 {
        let mut change: f64 = 0.0;
        for j in 0..m {
            let mut rhs = values[j as usize];
            for (d, w) in KNOT_WEIGHTS.iter().enumerate() {
                if d == 2 {
                    continue;
                }
                let idx = j + d as isize - 2;
                let v = if idx < 0 || idx >= m { outer(idx) } else { c[idx as usize] };
                rhs -= w * v;
            }
            let new = rhs / KNOT_WEIGHTS[2];
            change = change.max(abs(new - c[j as usize]));
            c[j as usize] = new;
        }
        let scale = values.iter().fold(1.0f64, |m, v| m.max(abs(*v)));
        if change <= 1e-16 * scale {
            break;
        }
    }
    c
}

/// Interpolated sampled curve.
#[derive(Clone, Debug)]
struct SplineCurve {
    coords: Vec<Spline1>,
    /// `s(u) = s0 + slope·u + residual(u)`.
    residual: Spline1,
    s0: f64,
    slope: f64,
    closed: bool,
    /// Number of index intervals covered (`u ∈ [0, span]`).
    span: f64,
    domain: Interval,
}

impl SplineCurve {
    fn s_of_u(&self, u: f64) -> [f64; 4] {
        let r = self.residual.eval(u);
        [self.s0 + self.slope * u + r[0], self.slope + r[1], r[2], r[3]]
    }

    /// Inverts `s(u)` by safeguarded Newton iteration.
    fn u_of_s(&self, s: f64) -> f64 {
        let mut target = s;
        let mut shift = 0.0;
        if self.closed {
            let period = self.domain.length();
            let k = libm::floor((s - self.domain.lo) / period);
            target = s - k * period;
            shift = k * self.span;
        }
        let mut u = (target - self.s0) / self.slope;
        for _ in 0..60 {
            let [val, der, _, _] = self.s_of_u(u);
            let step = (val - target) / der;
            u -= step;
            if abs(step) <= 1e-15 * (1.0 + abs(u)) {
                break;
            }
        }
        u + shift
    }
}

impl Parametrization for SplineCurve {
    fn ambient_dim(&self) -> usize {
        self.coords.len()
    }

    fn intrinsic_dim(&self) -> usize {
        1
    }

    fn domain(&self) -> Vec<Interval> {
        vec![self.domain]
    }

    fn jet(&self, params: &[f64], order: usize) -> Jet {
        let u = self.u_of_s(params[0]);
        let [_, s1, s2, s3] = self.s_of_u(u);
        // derivatives of the inverse map u(s)
        let u1 = 1.0 / s1;
        let u2 = -s2 * u1 * u1 * u1;
        let u3 = (3.0 * s2 * s2 - s1 * s3) * crate::math::powi(u1, 5);
        let n = self.coords.len();
        let mut jet = Jet::zeros(n, 1, order);
        for (i, spline) in self.coords.iter().enumerate() {
            let [y, y1, y2, y3] = spline.eval(u);
            jet.position_mut()[i] = y;
            if jet.order() >= 1 {
                jet.first_mut(0)[i] = y1 * u1;
            }
            if jet.order() >= 2 {
                jet.second_mut(0, 0)[i] = y2 * u1 * u1 + y1 * u2;
            }
            if jet.order() >= 3 {
                jet.third_mut(0, 0, 0)[i] = y3 * u1 * u1 * u1 + 3.0 * y2 * u1 * u2 + y1 * u3;
            }
        }
        jet
    }
}

/// Builds an embedding from sampled points `(s_i, Y_i)`.
///
/// The curve is closed when the first and last points coincide within
/// [`CLOSURE_TOLERANCE`]; the last row is then dropped and the spline is
/// periodic with period `s_last − s_first`.
pub fn sampled_curve(s: &[f64], points: &[Vec<f64>]) -> Result<Embedding> {
    let rows = s.len();
    if rows != points.len() {
        return Err(Error::MalformedSamples(format!(
            "{} parameter values for {} points",
            rows,
            points.len()
        )));
    }
    if rows < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            rows,
            required: MIN_SAMPLES,
        });
    }
    let n = points[0].len();
    if !(2..=4).contains(&n) {
        return Err(Error::MalformedSamples(format!("ambient dimension {} not supported", n)));
    }
    for (row, p) in points.iter().enumerate() {
        if p.len() != n {
            return Err(Error::MalformedSamples(format!("row {} has {} coordinates, expected {}", row, p.len(), n)));
        }
        if p.iter().chain(core::iter::once(&s[row])).any(|v| !v.is_finite()) {
            return Err(Error::MalformedSamples(format!("row {} contains a non-finite value", row)));
        }
    }
    for row in 1..rows {
        if !(s[row] > s[row - 1]) {
            return Err(Error::NotIncreasing { row });
        }
    }
    let gap: Vec<f64> = points[rows - 1].iter().zip(&points[0]).map(|(a, b)| a - b).collect();
    let closed = norm(&gap) <= CLOSURE_TOLERANCE;

    let curve = if closed {
        let m = rows - 1;
        let period = s[rows - 1] - s[0];
        let slope = period / m as f64;
        let residual: Vec<f64> = (0..m).map(|i| s[i] - s[0] - slope * i as f64).collect();
        let coords = (0..n)
            .map(|c| Spline1::periodic(&points[..m].iter().map(|p| p[c]).collect::<Vec<_>>()))
            .collect();
        SplineCurve {
            coords,
            residual: Spline1::periodic(&residual),
            s0: s[0],
            slope,
            closed: true,
            span: m as f64,
            domain: Interval::new(s[0], s[rows - 1], true),
        }
    } else {
        let span = (rows - 1) as f64;
        let slope = (s[rows - 1] - s[0]) / span;
        let residual: Vec<f64> = (0..rows).map(|i| s[i] - s[0] - slope * i as f64).collect();
        let coords = (0..n)
            .map(|c| Spline1::open(&points.iter().map(|p| p[c]).collect::<Vec<_>>()))
            .collect();
        SplineCurve {
            coords,
            residual: Spline1::open(&residual),
            s0: s[0],
            slope,
            closed: false,
            span,
            domain: Interval::new(s[0], s[rows - 1], false),
        }
    };
    Embedding::new("sampled", Box::new(curve))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn circle_samples(count: usize, shift: f64) -> (Vec<f64>, Vec<Vec<f64>>) {
        let s: Vec<f64> = (0..=count).map(|i| 2.0 * PI * i as f64 / count as f64).collect();
        let p = s
            .iter()
            .map(|t| vec![libm::cos(t + shift), libm::sin(t + shift), 0.0])
            .collect();
        (s, p)
    }

    #[test]
    fn cardinal_spline_knot_values() {
        for (i, w) in KNOT_WEIGHTS.iter().enumerate() {
            assert!((cardinal(5, (i + 1) as f64, 0) - w).abs() < 1e-15);
        }
        // partition of unity
        let total: f64 = (0..6).map(|i| cardinal(5, 0.3 + i as f64, 0)).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn periodic_spline_interpolates_samples() {
        let (s, p) = circle_samples(64, 0.0);
        let e = sampled_curve(&s, &p).unwrap();
        assert!(e.is_closed());
        for i in [0usize, 5, 33, 63] {
            let y = e.position(&[s[i]]);
            assert!((y[0] - p[i][0]).abs() < 1e-12 && (y[1] - p[i][1]).abs() < 1e-12);
        }
    }

    #[test]
    fn open_samples_are_not_closed() {
        let s: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let p: Vec<Vec<f64>> = s.iter().map(|t| vec![*t, t * t, 0.0]).collect();
        let e = sampled_curve(&s, &p).unwrap();
        assert!(!e.is_closed());
        let j = e.jet(&[0.95], 2).unwrap();
        assert!((j.first(0)[1] - 1.9).abs() < 1e-8);
        assert!((j.second(0, 0)[1] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn precondition_errors() {
        let (s, p) = circle_samples(3, 0.0);
        assert!(matches!(sampled_curve(&s, &p), Err(Error::TooFewSamples { rows: 4, .. })));
        let (mut s, p) = circle_samples(32, 0.0);
        s.swap(4, 5);
        assert!(matches!(sampled_curve(&s, &p), Err(Error::NotIncreasing { row: 5 })));
    }
}

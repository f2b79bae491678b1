//! Forward-mode dual numbers with up to two derivative directions, used to
//! differentiate the frame construction exactly.

use core::ops::{Add, Div, Mul, Neg, Sub};

use crate::math;

/// Scalar arithmetic shared by `f64` and [`Dual`].
pub(crate) trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn constant(v: f64) -> Self;
    fn value(self) -> f64;
    fn sqrt(self) -> Self;
}

impl Real for f64 {
    fn constant(v: f64) -> Self {
        v
    }

    fn value(self) -> f64 {
        self
    }

    fn sqrt(self) -> Self {
        math::sqrt(self)
    }
}

/// `v + d₀ε₀ + d₁ε₁` with `εᵢεⱼ = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Dual {
    pub v: f64,
    pub d: [f64; 2],
}

impl Dual {
    pub fn new(v: f64, d: [f64; 2]) -> Self {
        Dual { v, d }
    }
}

impl Real for Dual {
    fn constant(v: f64) -> Self {
        Dual { v, d: [0.0; 2] }
    }

    fn value(self) -> f64 {
        self.v
    }

    fn sqrt(self) -> Self {
        let r = math::sqrt(self.v);
        let s = 0.5 / r;
        Dual {
            v: r,
            d: [self.d[0] * s, self.d[1] * s],
        }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual {
            v: self.v + o.v,
            d: [self.d[0] + o.d[0], self.d[1] + o.d[1]],
        }
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual {
            v: self.v - o.v,
            d: [self.d[0] - o.d[0], self.d[1] - o.d[1]],
        }
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual {
            v: self.v * o.v,
            d: [self.d[0] * o.v + self.v * o.d[0], self.d[1] * o.v + self.v * o.d[1]],
        }
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        let inv = 1.0 / o.v;
        let q = self.v * inv;
        Dual {
            v: q,
            d: [(self.d[0] - q * o.d[0]) * inv, (self.d[1] - q * o.d[1]) * inv],
        }
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual {
            v: -self.v,
            d: [-self.d[0], -self.d[1]],
        }
    }
}

pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::constant(0.0), |acc, (x, y)| acc + *x * *y)
}

/// Determinant of a square matrix given as rows (size ≤ 4).
pub(crate) fn det<T: Real>(rows: &[&[T]]) -> T {
    let m = rows.len();
    match m {
        0 => T::constant(1.0),
        1 => rows[0][0],
        2 => rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0],
        _ => {
            // Laplace expansion along the first row
            let mut total = T::constant(0.0);
            let mut minor: [[T; 4]; 4] = [[T::constant(0.0); 4]; 4];
            for col in 0..m {
                for r in 1..m {
                    let mut cc = 0;
                    for c in 0..m {
                        if c != col {
                            minor[r - 1][cc] = rows[r][c];
                            cc += 1;
                        }
                    }
                }
                let refs: [&[T]; 4] = [&minor[0][..m - 1], &minor[1][..m - 1], &minor[2][..m - 1], &minor[3][..m - 1]];
                let d = det(&refs[..m - 1]);
                let term = rows[0][col] * d;
                total = if col % 2 == 0 { total + term } else { total - term };
            }
            total
        }
    }
}

/// Generalised cross product of `n − 1` vectors in Rⁿ: the vector `w` with
/// `⟨w, x⟩ = det[v₁, …, v_{n−1}, x]`, so `det[v…, w] = |w|² ≥ 0`.
pub(crate) fn cross<T: Real>(vectors: &[&[T]], out: &mut [T]) {
    let n = out.len();
    debug_assert_eq!(vectors.len() + 1, n);
    let mut minor: [[T; 4]; 4] = [[T::constant(0.0); 4]; 4];
    for j in 0..n {
        for (r, v) in vectors.iter().enumerate() {
            let mut cc = 0;
            for c in 0..n {
                if c != j {
                    minor[r][cc] = v[c];
                    cc += 1;
                }
            }
        }
        let refs: [&[T]; 4] = [&minor[0][..n - 1], &minor[1][..n - 1], &minor[2][..n - 1], &minor[3][..n - 1]];
        let d = det(&refs[..n - 1]);
        // cofactor sign of entry (n, j) in 1-based indexing
        out[j] = if (n + j + 1).is_multiple_of(2) { d } else { -d };
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_quotient_rules() {
        let x = Dual::new(2.0, [1.0, 0.0]);
        let y = Dual::new(3.0, [0.0, 1.0]);
        let f = x * y / (x + y);
        // f = xy/(x+y): ∂x = y²/(x+y)², ∂y = x²/(x+y)²
        assert!((f.v - 1.2).abs() < 1e-15);
        assert!((f.d[0] - 9.0 / 25.0).abs() < 1e-15);
        assert!((f.d[1] - 4.0 / 25.0).abs() < 1e-15);
        let r = Dual::new(4.0, [1.0, 0.0]).sqrt();
        assert_eq!(r.v, 2.0);
        assert_eq!(r.d[0], 0.25);
    }

    #[test]
    fn cross_matches_r3_cross_product() {
        let a = [1.0, 2.0, 3.0];
        let b = [-1.0, 0.5, 2.0];
        let mut w = [0.0; 3];
        cross(&[&a[..], &b[..]], &mut w);
        let expected = [2.0 * 2.0 - 3.0 * 0.5, -3.0 - 1.0 * 2.0, 1.0 * 0.5 - -2.0];
        assert_eq!(w, expected);
    }

    #[test]
    fn cross_in_r4_is_orthogonal_and_oriented() {
        let v: [[f64; 4]; 3] = [[1.0, 0.2, 0.0, 0.3], [0.0, 1.0, 0.5, 0.0], [0.1, 0.0, 1.0, 2.0]];
        let mut w = [0.0; 4];
        cross(&[&v[0][..], &v[1][..], &v[2][..]], &mut w);
        for r in &v {
            assert!(dot(r, &w).abs() < 1e-14);
        }
        let d = det(&[&v[0][..], &v[1][..], &v[2][..], &w[..]]);
        assert!((d - dot(&w, &w)).abs() < 1e-12);
    }
}

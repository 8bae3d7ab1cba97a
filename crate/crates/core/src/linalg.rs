//! Fixed-size 2x2 / 3x3 helpers for the method family.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Mat2 {
    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2 { a11, a12, a21, a22 }
    }

    pub fn identity() -> Self {
        Mat2::new(1.0, 0.0, 0.0, 1.0)
    }

    /// Clockwise rotation `[[cos t, sin t], [-sin t, cos t]]`, the exact flow of the
    /// noise-free oscillator over a time `t`.
    pub fn rotation(t: f64) -> Self {
        let (s, c) = t.sin_cos();
        Mat2::new(c, s, -s, c)
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn scale(&self, k: f64) -> Self {
        Mat2::new(k * self.a11, k * self.a12, k * self.a21, k * self.a22)
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2::new(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )
    }

    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        (self.a11 * x + self.a12 * y, self.a21 * x + self.a22 * y)
    }

    pub fn pow(&self, mut n: u64) -> Mat2 {
        let mut acc = Mat2::identity();
        let mut base = *self;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            n >>= 1;
        }
        acc
    }

    pub fn is_finite(&self) -> bool {
        self.a11.is_finite() && self.a12.is_finite() && self.a21.is_finite() && self.a22.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub b1: f64,
    pub b2: f64,
}

impl Vec2 {
    pub const fn new(b1: f64, b2: f64) -> Self {
        Vec2 { b1, b2 }
    }

    pub fn norm_sq(&self) -> f64 {
        self.b1 * self.b1 + self.b2 * self.b2
    }

    pub fn scale(&self, k: f64) -> Self {
        Vec2::new(k * self.b1, k * self.b2)
    }
}

/// The pair `(A, b)` of a one-step method at a fixed step size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub a: Mat2,
    pub b: Vec2,
}

impl Coefficients {
    pub const fn new(a: Mat2, b: Vec2) -> Self {
        Coefficients { a, b }
    }

    pub fn det(&self) -> f64 {
        self.a.det()
    }

    pub fn trace(&self) -> f64 {
        self.a.trace()
    }

    /// Weight of the current increment in the position update, `b1`.
    pub fn direct_weight(&self) -> f64 {
        self.b.b1
    }

    /// Weight of the previous increment in the two-step position recursion,
    /// `a12 b2 - a22 b1`.
    pub fn lagged_weight(&self) -> f64 {
        self.a.a12 * self.b.b2 - self.a.a22 * self.b.b1
    }

    /// `b1 + a12 b2 - a22 b1`.
    pub fn total_weight(&self) -> f64 {
        self.direct_weight() + self.lagged_weight()
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.b1.is_finite() && self.b.b2.is_finite()
    }
}

pub type Mat3 = [[f64; 3]; 3];

pub fn mat3_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn mat3_transpose(a: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[j][i];
        }
    }
    out
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite 3x3 matrix.
/// Returns `None` if a pivot is not strictly positive.
pub fn cholesky3(m: &Mat3) -> Option<Mat3> {
    let mut l = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = m[i][i] - s;
                if d <= 0.0 || !d.is_finite() {
                    return None;
                }
                l[i][j] = d.sqrt();
            } else {
                l[i][j] = (m[i][j] - s) / l[j][j];
            }
        }
    }
    Some(l)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_power_is_rotation_of_multiple_angle() {
        let r = Mat2::rotation(0.3).pow(7);
        let e = Mat2::rotation(2.1);
        assert!((r.a11 - e.a11).abs() < 1e-14 && (r.a12 - e.a12).abs() < 1e-14);
        assert!((r.a21 - e.a21).abs() < 1e-14 && (r.a22 - e.a22).abs() < 1e-14);
    }

    #[test]
    fn cholesky_reconstructs() {
        let m = [[4.0, 2.0, 0.4], [2.0, 3.0, 0.5], [0.4, 0.5, 1.0]];
        let l = cholesky3(&m).unwrap();
        let back = mat3_mul(&l, &mat3_transpose(&l));
        for i in 0..3 {
            for j in 0..3 {
                assert!((back[i][j] - m[i][j]).abs() < 1e-14);
            }
        }
        assert!(cholesky3(&[[1.0, 2.0, 0.0], [2.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).is_none());
    }

    #[test]
    fn weights_for_euler_maruyama() {
        let h = 0.25;
        let c = Coefficients::new(Mat2::new(1.0, h, -h, 1.0), Vec2::new(0.0, 1.0));
        assert_eq!(c.direct_weight(), 0.0);
        assert_eq!(c.lagged_weight(), h);
        assert_eq!(c.total_weight(), h);
        assert_eq!(c.det(), 1.0 + h * h);
    }
}

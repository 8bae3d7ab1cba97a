//! Rotation angle of `A` and the trigonometric sums built on it.
//!
//! When `4 det(A) > tr(A)^2` the position component obeys the two-step
//! recursion `x_{n+1} = tr x_n - det x_{n-1} + noise`, whose fundamental
//! solution is `alpha_hat(n) = det^{n/2} sin((n+1) theta) / sin(theta)` with
//! `cos(theta) = tr / (2 sqrt(det))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat2;

/// Spectra with `|sin(theta)|` below this are rejected.
pub const MIN_SIN_THETA: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    pub det: f64,
    pub tr: f64,
    pub theta: f64,
    pub sqrt_det: f64,
    pub sin_theta: f64,
    pub cos_theta: f64,
}

impl SpectralData {
    pub fn new(det: f64, tr: f64) -> Result<Self> {
        let disc = 4.0 * det - tr * tr;
        if !(disc > 0.0) {
            return Err(Error::ComplexPairFailed(disc));
        }
        let sqrt_det = det.sqrt();
        let cos_theta = tr / (2.0 * sqrt_det);
        let sin_theta = disc.sqrt() / (2.0 * sqrt_det);
        if sin_theta < MIN_SIN_THETA {
            return Err(Error::NearDegenerateSpectrum(sin_theta));
        }
        Ok(SpectralData {
            det,
            tr,
            theta: sin_theta.atan2(cos_theta),
            sqrt_det,
            sin_theta,
            cos_theta,
        })
    }

    pub fn from_matrix(a: &Mat2) -> Result<Self> {
        Self::new(a.det(), a.trace())
    }

    /// Spectral data for a prescribed angle in `(0, pi)` and determinant `> 0`.
    pub fn from_angle(det: f64, theta: f64) -> Result<Self> {
        if !(det > 0.0) || !(theta > 0.0 && theta < std::f64::consts::PI) {
            return Err(Error::domain(format!("need det>0 and theta in (0,pi), got det={det}, theta={theta}")));
        }
        let (s, c) = theta.sin_cos();
        if s < MIN_SIN_THETA {
            return Err(Error::NearDegenerateSpectrum(s));
        }
        let sqrt_det = det.sqrt();
        Ok(SpectralData {
            det,
            tr: 2.0 * sqrt_det * c,
            theta,
            sqrt_det,
            sin_theta: s,
            cos_theta: c,
        })
    }

    /// `1 - 2 sqrt(det) cos(theta) + det`, written as a sum of squares.
    fn geometric_denominator(&self) -> f64 {
        let s2 = (0.5 * self.theta).sin();
        let d = (self.sqrt_det - 1.0) + 2.0 * s2 * s2;
        d * d + self.sin_theta * self.sin_theta
    }
}

/// `1 - 2a cos(theta) + a^2 = (a - cos theta)^2 + sin^2 theta`, evaluated
/// without cancellation.
fn geometric_denominator(theta: f64, a: f64) -> f64 {
    let s2 = (0.5 * theta).sin();
    let d = (a - 1.0) + 2.0 * s2 * s2;
    let s = theta.sin();
    d * d + s * s
}

/// `sum_{n=1}^{count} a^n sin(n theta)` in closed form.
pub fn geom_sin_sum(theta: f64, a: f64, count: u64) -> f64 {
    if count == 0 {
        return 0.0;
    }
    let n = count as f64;
    if a == 1.0 {
        let s = (0.5 * theta).sin();
        return ((0.5 * theta).cos() - ((n + 0.5) * theta).cos()) / (2.0 * s);
    }
    let denom = geometric_denominator(theta, a);
    assert!(denom > 0.0, "geometric denominator vanished at theta={theta}, a={a}");
    let an1 = a.powf(n + 1.0);
    let an2 = an1 * a;
    (a * theta.sin() - an1 * ((n + 1.0) * theta).sin() + an2 * (n * theta).sin()) / denom
}

pub fn geom_sin_sum_direct(theta: f64, a: f64, count: u64) -> f64 {
    let mut pow = 1.0;
    let mut sum = 0.0;
    for n in 1..=count {
        pow *= a;
        sum += pow * (n as f64 * theta).sin();
    }
    sum
}

/// `alpha_hat(n) = det^{n/2} sin((n+1) theta) / sin(theta)`, with
/// `alpha_hat(-1) = 0` and `alpha_hat(0) = 1`.
pub fn alpha_hat(n: i64, sd: &SpectralData) -> f64 {
    match n {
        i64::MIN..=-2 => panic!("alpha_hat is defined for n >= -1, got {n}"),
        -1 => 0.0,
        0 => 1.0,
        _ => {
            let r = if sd.det == 1.0 { 1.0 } else { sd.sqrt_det.powf(n as f64) };
            r * ((n + 1) as f64 * sd.theta).sin() / sd.sin_theta
        }
    }
}

/// `beta_hat(n) = -det * alpha_hat(n - 1)`, `n >= 0`.
pub fn beta_hat(n: i64, sd: &SpectralData) -> f64 {
    assert!(n >= 0, "beta_hat is defined for n >= 0, got {n}");
    -sd.det * alpha_hat(n - 1, sd)
}

/// `sum_{n=0}^{big_n-2} alpha_hat(n)`; zero for `big_n <= 1`.
pub fn s_alpha(big_n: u64, sd: &SpectralData) -> f64 {
    if cfg!(feature = "naive-sums") {
        s_alpha_direct(big_n, sd)
    } else {
        s_alpha_closed(big_n, sd)
    }
}

pub fn s_alpha_closed(big_n: u64, sd: &SpectralData) -> f64 {
    if big_n <= 1 {
        return 0.0;
    }
    let n = big_n as f64;
    let r = sd.sqrt_det;
    let (rn1, rn) = if sd.det == 1.0 {
        (1.0, 1.0)
    } else {
        let rn1 = r.powf(n - 1.0);
        (rn1, rn1 * r)
    };
    let num = sd.sin_theta - rn1 * (n * sd.theta).sin() + rn * ((n - 1.0) * sd.theta).sin();
    num / (sd.sin_theta * sd.geometric_denominator())
}

/// Unit-determinant form `[cos(theta/2) - cos((N - 1/2) theta)] / [2 sin(theta) sin(theta/2)]`.
pub fn s_alpha_unit_det(big_n: u64, theta: f64) -> f64 {
    if big_n <= 1 {
        return 0.0;
    }
    let n = big_n as f64;
    ((0.5 * theta).cos() - ((n - 0.5) * theta).cos()) / (2.0 * theta.sin() * (0.5 * theta).sin())
}

pub fn s_alpha_direct(big_n: u64, sd: &SpectralData) -> f64 {
    (0..big_n.saturating_sub(1) as i64).map(|k| alpha_hat(k, sd)).sum()
}

/// `sum_{n=0}^{big_n-2} beta_hat(n) = -det * s_alpha(big_n - 1)`.
pub fn s_beta(big_n: u64, sd: &SpectralData) -> f64 {
    if big_n <= 1 {
        return 0.0;
    }
    if cfg!(feature = "naive-sums") {
        s_beta_direct(big_n, sd)
    } else {
        -sd.det * s_alpha_closed(big_n - 1, sd)
    }
}

pub fn s_beta_direct(big_n: u64, sd: &SpectralData) -> f64 {
    (0..big_n.saturating_sub(1) as i64).map(|k| beta_hat(k, sd)).sum()
}

/// Weight of `dW_j` in `N A_N` (before the factor `alpha`):
/// `c_j = b1 alpha_hat(N-2-j) + (b1 + q) s_alpha(N-1-j)` for `0 <= j <= N-2`,
/// where `q = a12 b2 - a22 b1`.
pub fn weight_c(j: u64, big_n: u64, sd: &SpectralData, b1: f64, q: f64) -> Result<f64> {
    if big_n < 2 || j > big_n - 2 {
        return Err(Error::IndexOutOfRange {
            index: j as usize,
            max: big_n.saturating_sub(2) as usize,
        });
    }
    let k = big_n - 2 - j;
    Ok(b1 * alpha_hat(k as i64, sd) + (b1 + q) * s_alpha(k + 1, sd))
}

/// Unit-determinant form of [`weight_c`]:
/// `[(b1+q) cos(theta/2) - b1 cos((N-1/2-j) theta) - q cos((N-3/2-j) theta)] / [2 sin(theta) sin(theta/2)]`.
pub fn weight_c_unit_det(j: u64, big_n: u64, theta: f64, b1: f64, q: f64) -> Result<f64> {
    if big_n < 2 || j > big_n - 2 {
        return Err(Error::IndexOutOfRange {
            index: j as usize,
            max: big_n.saturating_sub(2) as usize,
        });
    }
    let m = big_n as f64 - j as f64;
    let num = (b1 + q) * (0.5 * theta).cos() - b1 * ((m - 0.5) * theta).cos() - q * ((m - 1.5) * theta).cos();
    Ok(num / (2.0 * theta.sin() * (0.5 * theta).sin()))
}

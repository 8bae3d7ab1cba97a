//! The continuous-time linear stochastic oscillator
//! `dX = Y dt, dY = -X dt + alpha dW`, its exact Gaussian laws and the rate
//! functions of its mean position `A_T = (1/T) int_0^T X dt` and mean velocity
//! `B_T = X_T / T`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky3, Mat2, Mat3};
use crate::rng::Stream;

/// Steps shorter than this are rejected by the exact sampler.
pub const MIN_EXACT_STEP: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorParams {
    /// Noise intensity.
    pub alpha: f64,
    pub x0: f64,
    pub y0: f64,
}

impl OscillatorParams {
    pub fn new(alpha: f64, x0: f64, y0: f64) -> Result<Self> {
        let p = OscillatorParams { alpha, x0, y0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::domain(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.x0.is_finite() && self.y0.is_finite()) {
            return Err(Error::domain("initial values must be finite"));
        }
        Ok(())
    }
}

impl Default for OscillatorParams {
    fn default() -> Self {
        OscillatorParams {
            alpha: 1.0,
            x0: 0.0,
            y0: 0.0,
        }
    }
}

/// A scalar normal law `N(mean, variance)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianLaw {
    pub mean: f64,
    pub variance: f64,
}

impl GaussianLaw {
    pub fn new(mean: f64, variance: f64) -> Self {
        debug_assert!(variance >= 0.0, "negative variance {variance}");
        GaussianLaw { mean, variance }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    /// Law of `k * X`.
    pub fn scaled(&self, k: f64) -> GaussianLaw {
        GaussianLaw::new(k * self.mean, k * k * self.variance)
    }

    /// `ln E exp(lambda X) = lambda mean + lambda^2 variance / 2`.
    pub fn log_mgf(&self, lambda: f64) -> f64 {
        lambda * self.mean + 0.5 * lambda * lambda * self.variance
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Observable {
    MeanPosition,
    MeanVelocity,
}

impl Observable {
    pub const ALL: [Observable; 2] = [Observable::MeanPosition, Observable::MeanVelocity];
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Observable::MeanPosition => "mean-position",
            Observable::MeanVelocity => "mean-velocity",
        })
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mean-position" | "position" | "a" => Ok(Observable::MeanPosition),
            "mean-velocity" | "velocity" | "b" => Ok(Observable::MeanVelocity),
            other => Err(Error::Usage(format!(
                "unknown observable '{other}' (expected mean-position or mean-velocity)"
            ))),
        }
    }
}

/// Rate functions met in this problem: `y -> c y^2`, or the degenerate
/// function that is 0 at the origin and infinite elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RateFunction {
    Quadratic(f64),
    Degenerate,
}

impl RateFunction {
    pub fn eval(&self, y: f64) -> f64 {
        match *self {
            RateFunction::Quadratic(c) => c * y * y,
            RateFunction::Degenerate if y == 0.0 => 0.0,
            RateFunction::Degenerate => f64::INFINITY,
        }
    }

    pub fn coefficient(&self) -> Option<f64> {
        match *self {
            RateFunction::Quadratic(c) => Some(c),
            RateFunction::Degenerate => None,
        }
    }

    /// Coefficient, with the degenerate case reported as `+inf`.
    pub fn coefficient_or_inf(&self) -> f64 {
        self.coefficient().unwrap_or(f64::INFINITY)
    }

    /// `inf { I(y) : lo <= y <= hi }`.
    pub fn inf_over(&self, lo: f64, hi: f64) -> f64 {
        if lo <= 0.0 && 0.0 <= hi {
            0.0
        } else {
            let nearest = if lo > 0.0 { lo } else { hi };
            self.eval(nearest)
        }
    }

    /// The rate rescaled by `1/h` (degenerate stays degenerate).
    pub fn divided_by(&self, h: f64) -> RateFunction {
        match *self {
            RateFunction::Quadratic(c) => RateFunction::Quadratic(c / h),
            RateFunction::Degenerate => RateFunction::Degenerate,
        }
    }
}

fn check_horizon(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("time horizon must be positive, got {t}")))
    }
}

/// `1 - cos(x)` without cancellation.
pub(crate) fn one_minus_cos(x: f64) -> f64 {
    let s = (0.5 * x).sin();
    2.0 * s * s
}

/// `x - sin(x)` without cancellation for small `x`.
pub(crate) fn x_minus_sin(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        return x - x.sin();
    }
    // x^3/3! - x^5/5! + ...
    let x2 = x * x;
    let mut term = x * x2 / 6.0;
    let mut sum = term;
    let mut k = 1.0;
    while term.abs() > 1e-18 * sum.abs() {
        term *= -x2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
        sum += term;
        k += 1.0;
    }
    sum
}

/// `int_0^t (1 - cos u)^2 du = 3t/2 - 2 sin t + sin(2t)/4`, stable near 0.
pub(crate) fn integral_one_minus_cos_sq(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        return 1.5 * t - 2.0 * t.sin() + 0.25 * (2.0 * t).sin();
    }
    // sum_{k>=2} (-1)^k (2^{2k-1} - 2) t^{2k+1} / (2k+1)!
    let t2 = t * t;
    let mut sum = 0.0;
    let mut power = t * t2 * t2; // t^5
    let mut fact = 120.0; // 5!
    let mut sign = 1.0;
    for k in 2..30 {
        let term = sign * ((2f64).powi(2 * k - 1) - 2.0) * power / fact;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
        power *= t2;
        fact *= ((2 * k + 2) * (2 * k + 3)) as f64;
        sign = -sign;
    }
    sum
}

/// `int_0^t sin^2 u du = t/2 - sin(2t)/4`, stable near 0.
pub(crate) fn integral_sin_sq(t: f64) -> f64 {
    0.25 * x_minus_sin(2.0 * t)
}

/// Law of `T A_T = int_0^T X_t dt`.
pub fn mean_position_law(params: &OscillatorParams, t: f64) -> Result<GaussianLaw> {
    check_horizon(t)?;
    let mean = params.x0 * t.sin() + params.y0 * one_minus_cos(t);
    let variance = params.alpha * params.alpha * integral_one_minus_cos_sq(t);
    Ok(GaussianLaw::new(mean, variance))
}

/// Law of the position `X_T`.
pub fn terminal_position_law(params: &OscillatorParams, t: f64) -> Result<GaussianLaw> {
    check_horizon(t)?;
    let (s, c) = t.sin_cos();
    let mean = params.x0 * c + params.y0 * s;
    let variance = params.alpha * params.alpha * integral_sin_sq(t);
    Ok(GaussianLaw::new(mean, variance))
}

/// Rate function of the continuous mean position (`y^2 / (3 alpha^2)`) or mean
/// velocity (`y^2 / alpha^2`).
pub fn continuous_rate(observable: Observable, params: &OscillatorParams) -> RateFunction {
    let a2 = params.alpha * params.alpha;
    match observable {
        Observable::MeanPosition => RateFunction::Quadratic(1.0 / (3.0 * a2)),
        Observable::MeanVelocity => RateFunction::Quadratic(1.0 / a2),
    }
}

/// Log-MGF coefficient of the continuous observable: `Lambda(lambda) = c lambda^2`.
pub fn continuous_log_mgf_coefficient(observable: Observable, params: &OscillatorParams) -> f64 {
    let a2 = params.alpha * params.alpha;
    match observable {
        Observable::MeanPosition => 0.75 * a2,
        Observable::MeanVelocity => 0.25 * a2,
    }
}

/// Covariance of `(dW, I1, I2)` over one step of length `delta`, where
/// `I1 = int sin(delta - s) dW_s` and `I2 = int cos(delta - s) dW_s`.
pub fn exact_step_covariance(delta: f64) -> Mat3 {
    let (s, c) = delta.sin_cos();
    let v1 = delta / 2.0 - (2.0 * delta).sin() / 4.0;
    let v2 = delta / 2.0 + (2.0 * delta).sin() / 4.0;
    let c1w = 1.0 - c;
    let c2w = s;
    let c12 = s * s / 2.0;
    [[delta, c1w, c2w], [c1w, v1, c12], [c2w, c12, v2]]
}

/// Joint sampler for the stochastic convolutions of one exact step.
///
/// The triple is drawn through `(dW, I1, K)` with `K = int (1 - cos(delta - s)) dW_s`
/// and `I2 = dW - K`. Rescaled by `delta^{1/2}, delta^{3/2}, delta^{5/2}`, that
/// basis has an O(1), well-conditioned covariance for every step size, so the
/// Cholesky factor stays accurate where the raw `(dW, I1, I2)` matrix would be
/// numerically singular.
#[derive(Debug, Clone)]
pub struct ExactStepNoise {
    delta: f64,
    scales: [f64; 3],
    factor: Mat3,
}

impl ExactStepNoise {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta >= MIN_EXACT_STEP) {
            return Err(Error::domain(format!(
                "exact step must be at least {MIN_EXACT_STEP:e}, got {delta}"
            )));
        }
        let g = Self::basis_gram(delta);
        let scales = [delta.sqrt(), delta.powf(1.5), delta.powf(2.5)];
        let mut normalized = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                normalized[i][j] = g[i][j] / (scales[i] * scales[j]);
            }
        }
        let factor = cholesky3(&normalized).ok_or_else(|| {
            Error::Invariant(format!("exact-step covariance not positive definite at delta={delta}"))
        })?;
        Ok(ExactStepNoise {
            delta,
            scales,
            factor,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Gram matrix of `{1, sin u, 1 - cos u}` on `[0, delta]`.
    fn basis_gram(delta: f64) -> Mat3 {
        let g01 = one_minus_cos(delta);
        let g02 = x_minus_sin(delta);
        let g11 = integral_sin_sq(delta);
        let sh = (0.5 * delta).sin();
        let g12 = 2.0 * sh.powi(4);
        let g22 = integral_one_minus_cos_sq(delta);
        [[delta, g01, g02], [g01, g11, g12], [g02, g12, g22]]
    }

    /// Covariance of `(dW, I1, I2)` implied by the sampler's factorization.
    pub fn implied_covariance(&self) -> Mat3 {
        let g = Self::basis_gram(self.delta);
        // (dW, I1, I2) = T (dW, I1, K) with T = [[1,0,0],[0,1,0],[1,0,-1]]
        let t = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 0.0, -1.0]];
        let tg = crate::linalg::mat3_mul(&t, &g);
        crate::linalg::mat3_mul(&tg, &crate::linalg::mat3_transpose(&t))
    }

    /// Draws `(dW, I1, I2)`; consumes three normals from the stream.
    #[inline]
    pub fn sample(&self, stream: &mut Stream) -> (f64, f64, f64) {
        let xi = [
            stream.standard_normal(),
            stream.standard_normal(),
            stream.standard_normal(),
        ];
        let l = &self.factor;
        let z0 = l[0][0] * xi[0];
        let z1 = l[1][0] * xi[0] + l[1][1] * xi[1];
        let z2 = l[2][0] * xi[0] + l[2][1] * xi[1] + l[2][2] * xi[2];
        let dw = self.scales[0] * z0;
        let i1 = self.scales[1] * z1;
        let k = self.scales[2] * z2;
        (dw, i1, dw - k)
    }
}

/// An exact-solution path on a uniform grid, with the Brownian increments that
/// generated it.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactPath {
    pub delta: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `dw[n] = W((n+1) delta) - W(n delta)`.
    pub dw: Vec<f64>,
}

/// Samples the exact solution at `t_n = n delta`, `n = 0..=steps`.
pub fn sample_exact_path(
    params: &OscillatorParams,
    delta: f64,
    steps: usize,
    seed: u64,
) -> Result<ExactPath> {
    let noise = ExactStepNoise::new(delta)?;
    let mut stream = Stream::new(seed, 0);
    Ok(sample_exact_path_with(params, &noise, steps, &mut stream))
}

pub fn sample_exact_path_with(
    params: &OscillatorParams,
    noise: &ExactStepNoise,
    steps: usize,
    stream: &mut Stream,
) -> ExactPath {
    let rot = Mat2::rotation(noise.delta());
    let mut x = Vec::with_capacity(steps + 1);
    let mut y = Vec::with_capacity(steps + 1);
    let mut dw = Vec::with_capacity(steps);
    let (mut cx, mut cy) = (params.x0, params.y0);
    x.push(cx);
    y.push(cy);
    for _ in 0..steps {
        let (w, i1, i2) = noise.sample(stream);
        let (rx, ry) = rot.apply(cx, cy);
        cx = rx + params.alpha * i1;
        cy = ry + params.alpha * i2;
        x.push(cx);
        y.push(cy);
        dw.push(w);
    }
    ExactPath {
        delta: noise.delta(),
        x,
        y,
        dw,
    }
}

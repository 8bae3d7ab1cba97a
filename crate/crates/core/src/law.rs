//! Exact finite-N laws of `N A_N = sum_{n<N} x_n` and `x_N`, a brute-force
//! moment recursion that checks them, and Gaussian probability helpers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Coefficients, Mat3};
use crate::method::{check_conditions, MethodDef, DEFAULT_TOLERANCE};
use crate::normal;
pub use crate::oscillator::GaussianLaw;
use crate::oscillator::OscillatorParams;
use crate::spectral::{alpha_hat, beta_hat, s_alpha, s_beta, weight_c, SpectralData};

/// Probabilities below this are reported through their logarithm.
pub const LOG_CHANNEL_THRESHOLD: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Probability {
    Value(f64),
    /// Natural logarithm of a probability too small for an `f64`-friendly value.
    Log(f64),
}

impl Probability {
    pub fn ln(&self) -> f64 {
        match *self {
            Probability::Value(p) => p.ln(),
            Probability::Log(l) => l,
        }
    }

    /// The probability itself; underflows to 0 on the log channel.
    pub fn value(&self) -> f64 {
        match *self {
            Probability::Value(p) => p,
            Probability::Log(l) => l.exp(),
        }
    }

    fn from_ln(l: f64) -> Self {
        if l < LOG_CHANNEL_THRESHOLD.ln() {
            Probability::Log(l)
        } else {
            Probability::Value(l.exp())
        }
    }
}

fn spectral_for(c: &Coefficients) -> Result<SpectralData> {
    SpectralData::from_matrix(&c.a)
}

fn check_params(params: &OscillatorParams) -> Result<()> {
    if params.alpha < 0.0 || !params.alpha.is_finite() || !params.x0.is_finite() || !params.y0.is_finite() {
        return Err(Error::domain("alpha must be finite and nonnegative, initial values finite"));
    }
    Ok(())
}

/// Law of `N A_N` from the closed forms.
pub fn law_na_n(method: &MethodDef, h: f64, n: u64, params: &OscillatorParams) -> Result<GaussianLaw> {
    law_na_n_coeffs(&method.evaluate(h)?, h, n, params)
}

pub fn law_na_n_coeffs(c: &Coefficients, h: f64, n: u64, params: &OscillatorParams) -> Result<GaussianLaw> {
    check_params(params)?;
    if n < 2 {
        return Err(Error::domain(format!("N A_N needs N >= 2, got {n}")));
    }
    let sd = spectral_for(c)?;
    let sa = s_alpha(n, &sd);
    let sb = s_beta(n, &sd);
    let mean = (1.0 + c.a.a11 * sa + sb) * params.x0 + c.a.a12 * sa * params.y0;
    let (b1, q) = (c.direct_weight(), c.lagged_weight());
    let mut sum = 0.0;
    for j in 0..=n - 2 {
        let w = weight_c(j, n, &sd, b1, q)?;
        sum += w * w;
    }
    Ok(GaussianLaw::new(mean, params.alpha * params.alpha * h * sum))
}

/// Law of the position `x_N` from the closed forms.
pub fn law_x_n(method: &MethodDef, h: f64, n: u64, params: &OscillatorParams) -> Result<GaussianLaw> {
    law_x_n_coeffs(&method.evaluate(h)?, h, n, params)
}

pub fn law_x_n_coeffs(c: &Coefficients, h: f64, n: u64, params: &OscillatorParams) -> Result<GaussianLaw> {
    check_params(params)?;
    if n < 1 {
        return Err(Error::domain("x_N needs N >= 1"));
    }
    let sd = spectral_for(c)?;
    let last = n as i64 - 1;
    let ah = alpha_hat(last, &sd);
    let mean = (c.a.a11 * ah + beta_hat(last, &sd)) * params.x0 + c.a.a12 * ah * params.y0;
    let (b1, q) = (c.direct_weight(), c.lagged_weight());
    let sum = if check_conditions(c, DEFAULT_TOLERANCE).symplectic {
        unit_det_position_sum(n, sd.theta, b1, q)
    } else {
        (0..n as i64)
            .map(|m| {
                let w = b1 * alpha_hat(m, &sd) + q * alpha_hat(m - 1, &sd);
                w * w
            })
            .sum()
    };
    Ok(GaussianLaw::new(mean, params.alpha * params.alpha * h * sum))
}

/// `sum_{m=0}^{N-1} [b1 sin((m+1)t) + q sin(m t)]^2 / sin^2 t` in closed form.
fn unit_det_position_sum(n: u64, theta: f64, b1: f64, q: f64) -> f64 {
    let nf = n as f64;
    let s = theta.sin();
    // sum_{k=1}^{M} sin^2(k t) = M/2 - sin(M t) cos((M+1) t) / (2 sin t)
    let sin_sq_sum = |m: f64| 0.5 * m - (m * theta).sin() * ((m + 1.0) * theta).cos() / (2.0 * s);
    // sum_{m=0}^{N-1} sin((m+1) t) sin(m t)
    let cross = 0.5 * nf * theta.cos() - (2.0 * nf * theta).sin() / (4.0 * s);
    (b1 * b1 * sin_sq_sum(nf) + q * q * sin_sq_sum(nf - 1.0) + 2.0 * b1 * q * cross) / (s * s)
}

/// Law of `A_N = (N A_N) / N`.
pub fn law_a_n(method: &MethodDef, h: f64, n: u64, params: &OscillatorParams) -> Result<GaussianLaw> {
    Ok(law_na_n(method, h, n, params)?.scaled(1.0 / n as f64))
}

/// Law of `B_N = x_N / (N h)`.
pub fn law_b_n(method: &MethodDef, h: f64, n: u64, params: &OscillatorParams) -> Result<GaussianLaw> {
    Ok(law_x_n(method, h, n, params)?.scaled(1.0 / (n as f64 * h)))
}

/// Moments of `(x_N, y_N, s_N)` with `s_N = sum_{k<N} x_k = N A_N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentedMoments {
    pub mean: [f64; 3],
    pub covariance: Mat3,
}

impl AugmentedMoments {
    pub fn position(&self) -> GaussianLaw {
        GaussianLaw::new(self.mean[0], self.covariance[0][0])
    }

    pub fn running_sum(&self) -> GaussianLaw {
        GaussianLaw::new(self.mean[2], self.covariance[2][2])
    }
}

/// Propagates mean and covariance of `(x, y, s)` through `N` steps of the
/// augmented affine recursion. Independent of the closed forms.
pub fn oracle_moments(method: &MethodDef, h: f64, n: u64, params: &OscillatorParams) -> Result<AugmentedMoments> {
    oracle_moments_coeffs(&method.evaluate(h)?, h, n, params)
}

pub fn oracle_moments_coeffs(c: &Coefficients, h: f64, n: u64, params: &OscillatorParams) -> Result<AugmentedMoments> {
    check_params(params)?;
    let a: Mat3 = [[c.a.a11, c.a.a12, 0.0], [c.a.a21, c.a.a22, 0.0], [1.0, 0.0, 1.0]];
    let b = [c.b.b1, c.b.b2, 0.0];
    let noise = params.alpha * params.alpha * h;
    let mut m = [params.x0, params.y0, 0.0];
    let mut cov = [[0.0; 3]; 3];
    for _ in 0..n {
        let mut next = [0.0; 3];
        for i in 0..3 {
            next[i] = (0..3).map(|k| a[i][k] * m[k]).sum();
        }
        m = next;
        let mut ac = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                ac[i][j] = (0..3).map(|k| a[i][k] * cov[k][j]).sum();
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                cov[i][j] = (0..3).map(|k| ac[i][k] * a[j][k]).sum::<f64>() + noise * b[i] * b[j];
            }
        }
    }
    Ok(AugmentedMoments { mean: m, covariance: cov })
}

/// `P(lo <= X <= hi)` for `X ~ law`; infinite endpoints are allowed.
pub fn interval_probability(law: &GaussianLaw, lo: f64, hi: f64) -> Result<Probability> {
    if lo.is_nan() || hi.is_nan() || lo > hi {
        return Err(Error::domain(format!("interval [{lo}, {hi}] is not ordered")));
    }
    if law.variance == 0.0 {
        let inside = lo <= law.mean && law.mean <= hi;
        return Ok(Probability::Value(if inside { 1.0 } else { 0.0 }));
    }
    let sd = law.std_dev();
    let z_lo = (lo - law.mean) / sd;
    let z_hi = (hi - law.mean) / sd;
    Ok(Probability::from_ln(normal::ln_interval(z_lo, z_hi)))
}

/// Upper bound `(1/sqrt(2 pi)) (sigma/(x-mu)) exp(-(x-mu)^2/(2 sigma^2))` on
/// `P(X >= x)`, valid for `x > mu`.
pub fn gaussian_tail_bound(mu: f64, sigma: f64, x: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::domain("sigma must be positive"));
    }
    if !(x > mu) {
        return Err(Error::domain(format!("tail bound needs x > mu, got x={x}, mu={mu}")));
    }
    let d = x - mu;
    Ok((sigma / d) * (-d * d / (2.0 * sigma * sigma)).exp() / (2.0 * std::f64::consts::PI).sqrt())
}

/// Mirror image of [`gaussian_tail_bound`]: bounds `P(X <= x)` for `x < mu`.
pub fn gaussian_lower_tail_bound(mu: f64, sigma: f64, x: f64) -> Result<f64> {
    if !(x < mu) {
        return Err(Error::domain(format!("lower tail bound needs x < mu, got x={x}, mu={mu}")));
    }
    gaussian_tail_bound(-mu, sigma, -x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::method::{catalog, lookup};

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn zero_initial_state_has_zero_mean() {
        let m = lookup("midpoint").unwrap();
        let p = OscillatorParams::new(2.3, 0.0, 0.0).unwrap();
        assert_eq!(law_na_n(&m, 0.3, 50, &p).unwrap().mean, 0.0);
    }

    #[test]
    fn closed_forms_match_oracle() {
        let p = OscillatorParams::new(1.0, 0.4, -0.3).unwrap();
        for m in catalog() {
            for h in [0.1, 0.5] {
                for n in [2u64, 10, 100] {
                    let o = oracle_moments(&m, h, n, &p).unwrap();
                    let na = law_na_n(&m, h, n, &p).unwrap();
                    let xn = law_x_n(&m, h, n, &p).unwrap();
                    let s = o.running_sum();
                    let x = o.position();
                    assert!(rel_close(na.mean, s.mean, 1e-9), "{} h={h} n={n}", m.name());
                    assert!(rel_close(na.variance, s.variance, 1e-9), "{} h={h} n={n}", m.name());
                    assert!(rel_close(xn.mean, x.mean, 1e-9), "{} h={h} n={n}", m.name());
                    assert!(rel_close(xn.variance, x.variance, 1e-9), "{} h={h} n={n}", m.name());
                }
            }
        }
    }

    #[test]
    fn single_step_position_law() {
        let m = lookup("theta:1").unwrap();
        let p = OscillatorParams::new(1.7, 0.0, 0.0).unwrap();
        let h = 0.4;
        let c = m.evaluate(h).unwrap();
        let law = law_x_n(&m, h, 1, &p).unwrap();
        assert!((law.variance - p.alpha * p.alpha * h * c.b.b1 * c.b.b1).abs() < 1e-15);
    }

    #[test]
    fn exponential_mean_is_a_rotation() {
        let m = lookup("ex").unwrap();
        let p = OscillatorParams::new(1.0, 0.6, 0.8).unwrap();
        for (h, n) in [(0.3, 7u64), (1.1, 40), (2.9, 333)] {
            let law = law_x_n(&m, h, n, &p).unwrap();
            let (x, _) = m.evaluate(h).unwrap().a.pow(n).apply(p.x0, p.y0);
            assert!((law.mean - x).abs() < 1e-10, "h={h} n={n}");
            let t = n as f64 * h;
            assert!((law.mean - (p.x0 * t.cos() + p.y0 * t.sin())).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_noise_oracle_has_zero_covariance() {
        let p = OscillatorParams {
            alpha: 0.0,
            x0: 1.0,
            y0: 0.0,
        };
        let o = oracle_moments(&lookup("opt").unwrap(), 0.2, 30, &p).unwrap();
        assert!(o.covariance.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn contractive_position_variance_stabilizes() {
        let m = lookup("theta:1").unwrap();
        let p = OscillatorParams::default();
        let v1 = law_x_n(&m, 0.5, 10_000, &p).unwrap().variance;
        let v2 = law_x_n(&m, 0.5, 100_000, &p).unwrap().variance;
        assert!(v1.is_finite() && (v1 - v2).abs() < 1e-12 * v1.max(1.0));
    }

    #[test]
    fn probabilities() {
        let std = GaussianLaw::new(0.0, 1.0);
        assert_eq!(interval_probability(&std, f64::NEG_INFINITY, 0.0).unwrap(), Probability::Value(0.5));
        let p = interval_probability(&std, 1.0, 2.0).unwrap().value();
        assert!((p - 0.13590512198327784421).abs() < 1e-15);
        match interval_probability(&std, 40.0, f64::INFINITY).unwrap() {
            Probability::Log(l) => assert!((l + 804.608).abs() < 1e-3),
            other => panic!("{other:?}"),
        }
        let total = interval_probability(&GaussianLaw::new(3.0, 4.0), f64::NEG_INFINITY, f64::INFINITY).unwrap();
        assert!((total.value() - 1.0).abs() < 1e-12);
        assert!(interval_probability(&std, 1.0, 0.0).is_err());
        let point = GaussianLaw::new(0.5, 0.0);
        assert_eq!(interval_probability(&point, 0.0, 1.0).unwrap(), Probability::Value(1.0));
        assert_eq!(interval_probability(&point, 0.6, 1.0).unwrap(), Probability::Value(0.0));
    }

    #[test]
    fn tail_bounds() {
        let b = gaussian_tail_bound(0.0, 1.0, 1.0).unwrap();
        assert!((b - 0.24197072451914337).abs() < 1e-15);
        assert!(gaussian_tail_bound(0.0, 1.0, 0.0).is_err());
        assert!(gaussian_tail_bound(0.0, 1.0, 1e-12).unwrap() > 1e10);
        let lower = gaussian_lower_tail_bound(1.0, 2.0, -1.0).unwrap();
        assert!((lower - gaussian_tail_bound(1.0, 2.0, 3.0).unwrap()).abs() < 1e-16);
    }

    #[test]
    fn unit_det_position_sum_matches_direct_summation() {
        for &(theta, b1, q) in &[(0.3, 0.2, 0.7), (2.1, -0.5, 0.1), (0.01, 0.005, 0.005)] {
            let sd = SpectralData::from_angle(1.0, theta).unwrap();
            for n in [1u64, 2, 7, 500] {
                let direct: f64 = (0..n as i64)
                    .map(|m| (b1 * alpha_hat(m, &sd) + q * alpha_hat(m - 1, &sd)).powi(2))
                    .sum();
                let closed = unit_det_position_sum(n, theta, b1, q);
                assert!(rel_close(closed, direct, 1e-9), "theta={theta} n={n}: {closed} vs {direct}");
            }
        }
    }

    #[test]
    fn unit_det_position_sum_matches_alternative_grouping() {
        // (b1^2+q^2+2b1q cos t)(N-1)/(2 sin^2 t) - (b1^2+q^2)(sin((2N-1)t) - sin t)/(4 sin^3 t)
        //   + b1^2 sin^2(N t)/sin^2 t - b1 q (sin(2N t) - sin(2t))/(2 sin^3 t)
        let (theta, b1, q) = (0.8f64, 0.3, -0.45);
        let s = theta.sin();
        for n in [1u64, 3, 20, 301] {
            let nf = n as f64;
            let alt = (b1 * b1 + q * q + 2.0 * b1 * q * theta.cos()) * (nf - 1.0) / (2.0 * s * s)
                - (b1 * b1 + q * q) * (((2.0 * nf - 1.0) * theta).sin() - s) / (4.0 * s.powi(3))
                + b1 * b1 * (nf * theta).sin().powi(2) / (s * s)
                - b1 * q * ((2.0 * nf * theta).sin() - (2.0 * theta).sin()) / (2.0 * s.powi(3));
            let closed = unit_det_position_sum(n, theta, b1, q);
            assert!(rel_close(closed, alt, 1e-12), "n={n}: {closed} vs {alt}");
        }
    }
}

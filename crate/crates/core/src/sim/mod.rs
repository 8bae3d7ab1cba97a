//! Monte Carlo paths of the method recursion and the mean-square order
//! experiment.
//!
//! Path `i` draws from `Stream::new(seed, i)` only. Work is split into fixed
//! chunks of [`CHUNK`] paths whose partial sums are combined in chunk order,
//! so results do not depend on the number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ldp::fitted_log_slope;
use crate::method::MethodDef;
use crate::oscillator::{ExactStepNoise, GaussianLaw, OscillatorParams};
use crate::rng::Stream;

/// Paths per reduction chunk. Fixed, so the summation tree is too.
pub const CHUNK: usize = 512;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "LDP_OSC_THREADS";

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub method: MethodDef,
    pub h: f64,
    /// Steps per path.
    pub n: u64,
    pub samples: u64,
    pub seed: u64,
    pub params: OscillatorParams,
    /// Overrides [`THREADS_ENV`] when set.
    pub threads: Option<usize>,
}

impl SimConfig {
    pub fn new(method: MethodDef, h: f64, n: u64, samples: u64, seed: u64, params: OscillatorParams) -> Self {
        SimConfig {
            method,
            h,
            n,
            samples,
            seed,
            params,
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::domain("samples must be at least 1"));
        }
        if self.n == 0 {
            return Err(Error::domain("N must be at least 1"));
        }
        // alpha = 0 is allowed here: it gives the noise-free recursion.
        let p = &self.params;
        if !(p.alpha >= 0.0 && p.alpha.is_finite() && p.x0.is_finite() && p.y0.is_finite()) {
            return Err(Error::domain("alpha must be >= 0 and initial values finite"));
        }
        self.method.evaluate(self.h).map(|_| ())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
}

impl SampleStats {
    /// Standard error of the mean.
    pub fn mean_std_error(&self, samples: u64) -> f64 {
        (self.variance / samples as f64).sqrt()
    }

    /// Standard error of the sample variance under a Gaussian law.
    pub fn variance_std_error(&self, samples: u64) -> f64 {
        self.variance * (2.0 / (samples as f64 - 1.0)).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub samples: u64,
    pub a_n: SampleStats,
    pub b_n: SampleStats,
    /// Statistics of `N A_N`, the running position sum.
    pub na_n: SampleStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub a_n: Vec<f64>,
    pub b_n: Vec<f64>,
    pub summary: SimSummary,
}

impl SimResult {
    /// Fraction of paths with `lo <= A_N <= hi` and its standard error.
    pub fn empirical_probability_a(&self, lo: f64, hi: f64) -> (f64, f64) {
        empirical_probability(&self.a_n, lo, hi)
    }

    pub fn empirical_probability_b(&self, lo: f64, hi: f64) -> (f64, f64) {
        empirical_probability(&self.b_n, lo, hi)
    }
}

fn empirical_probability(xs: &[f64], lo: f64, hi: f64) -> (f64, f64) {
    let n = xs.len() as f64;
    let p = xs.iter().filter(|&&x| lo <= x && x <= hi).count() as f64 / n;
    (p, (p * (1.0 - p) / n).sqrt())
}

/// Distance from the exact law in standard errors, for mean and variance.
pub fn z_scores(stats: &SampleStats, law: &GaussianLaw, samples: u64) -> (f64, f64) {
    let se_mean = (law.variance / samples as f64).sqrt();
    let se_var = law.variance * (2.0 / (samples as f64 - 1.0)).sqrt();
    let z = |d: f64, se: f64| if se == 0.0 { if d == 0.0 { 0.0 } else { f64::INFINITY } } else { d.abs() / se };
    (z(stats.mean - law.mean, se_mean), z(stats.variance - law.variance, se_var))
}

/// Worker count from the argument, else [`THREADS_ENV`], else all cores.
pub fn resolve_threads(explicit: Option<usize>) -> Result<usize> {
    if let Some(t) = explicit {
        return if t == 0 {
            Err(Error::Usage("thread count must be at least 1".into()))
        } else {
            Ok(t)
        };
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t > 0 => Ok(t),
            _ => Err(Error::Usage(format!("{THREADS_ENV} must be a positive integer, got '{v}'"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(resolve_threads(threads)?)
        .build()
        .map_err(|e| Error::Invariant(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// `(A_N, B_N)` of a single path.
fn one_path(cfg: &SimConfig, a: &crate::Coefficients, index: u64) -> (f64, f64) {
    let mut stream = Stream::new(cfg.seed, index);
    let sqrt_h = cfg.h.sqrt();
    let (ab1, ab2) = (cfg.params.alpha * a.b.b1, cfg.params.alpha * a.b.b2);
    let m = a.a;
    let (mut x, mut y) = (cfg.params.x0, cfg.params.y0);
    let mut sum = 0.0;
    for _ in 0..cfg.n {
        sum += x;
        let dw = if cfg.params.alpha == 0.0 { 0.0 } else { sqrt_h * stream.standard_normal() };
        let nx = m.a11 * x + m.a12 * y + ab1 * dw;
        let ny = m.a21 * x + m.a22 * y + ab2 * dw;
        x = nx;
        y = ny;
    }
    let n = cfg.n as f64;
    (sum / n, x / (n * cfg.h))
}

/// Sample mean and unbiased variance, summed per fixed chunk then across
/// chunks in order.
fn stats(xs: &[f64]) -> SampleStats {
    let n = xs.len() as f64;
    let sum: f64 = xs.chunks(CHUNK).map(|c| c.iter().sum::<f64>()).sum();
    let mean = sum / n;
    let ss: f64 = xs
        .chunks(CHUNK)
        .map(|c| c.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>())
        .sum();
    let variance = if xs.len() > 1 { ss / (n - 1.0) } else { 0.0 };
    SampleStats { mean, variance }
}

/// Simulates `samples` independent paths of `z_{n+1} = A z_n + alpha b dW_n`.
pub fn simulate_paths(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let coeffs = cfg.method.evaluate(cfg.h)?;
    let pairs: Vec<(f64, f64)> = with_pool(cfg.threads, || {
        (0..cfg.samples)
            .into_par_iter()
            .map(|i| one_path(cfg, &coeffs, i))
            .collect()
    })?;
    let (a_n, b_n): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let n = cfg.n as f64;
    let na: Vec<f64> = a_n.iter().map(|a| a * n).collect();
    let summary = SimSummary {
        samples: cfg.samples,
        a_n: stats(&a_n),
        b_n: stats(&b_n),
        na_n: stats(&na),
    };
    Ok(SimResult { a_n, b_n, summary })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MsqReport {
    pub method: String,
    pub t0: f64,
    pub samples: u64,
    pub h_values: Vec<f64>,
    /// Per step size, the largest root-mean-square `(x, y)` error over the grid.
    pub rms_errors: Vec<f64>,
    /// Least-squares slope of `ln error` against `ln h`.
    pub slope: f64,
    /// RMS residual of that fit, in log units.
    pub residual: f64,
    pub warnings: Vec<String>,
}

/// Sum over a chunk of paths of the squared error at every grid point.
fn msq_chunk(
    coeffs: &crate::Coefficients,
    noise: &ExactStepNoise,
    params: &OscillatorParams,
    steps: usize,
    seed: u64,
    paths: std::ops::Range<u64>,
) -> Vec<f64> {
    let rot = crate::Mat2::rotation(noise.delta());
    let m = coeffs.a;
    let (b1, b2) = (params.alpha * coeffs.b.b1, params.alpha * coeffs.b.b2);
    let mut acc = vec![0.0; steps + 1];
    for p in paths {
        let mut stream = Stream::new(seed, p);
        let (mut ex, mut ey) = (params.x0, params.y0);
        let (mut x, mut y) = (params.x0, params.y0);
        for slot in acc.iter_mut().skip(1) {
            let (dw, i1, i2) = noise.sample(&mut stream);
            let (rx, ry) = rot.apply(ex, ey);
            ex = rx + params.alpha * i1;
            ey = ry + params.alpha * i2;
            let nx = m.a11 * x + m.a12 * y + b1 * dw;
            let ny = m.a21 * x + m.a22 * y + b2 * dw;
            x = nx;
            y = ny;
            *slot += (x - ex).powi(2) + (y - ey).powi(2);
        }
    }
    acc
}

/// Strong error of a method against the exact solution driven by the same
/// Brownian path, over `[0, t0]`, for each step size.
pub fn msq_order(
    method: &MethodDef,
    h_values: &[f64],
    t0: f64,
    samples: u64,
    seed: u64,
    params: &OscillatorParams,
    threads: Option<usize>,
) -> Result<MsqReport> {
    if h_values.len() < 2 {
        return Err(Error::Usage("sweep requires >= 2 points".into()));
    }
    if h_values.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Usage("step sequence must be strictly decreasing".into()));
    }
    if !(t0 > 0.0 && t0.is_finite()) {
        return Err(Error::domain(format!("T0 must be positive, got {t0}")));
    }
    if samples == 0 {
        return Err(Error::domain("samples must be at least 1"));
    }
    params.validate()?;
    let mut warnings = Vec::new();
    let mut rms_errors = Vec::with_capacity(h_values.len());
    for &h in h_values {
        let coeffs = method.evaluate(h)?;
        let noise = ExactStepNoise::new(h)?;
        let ratio = t0 / h;
        let steps = ratio.round().max(1.0) as usize;
        if (ratio - steps as f64).abs() > 1e-9 * ratio {
            warnings.push(format!("T0/h = {ratio} is not an integer; using {steps} steps"));
        }
        let chunks: Vec<std::ops::Range<u64>> = (0..samples)
            .step_by(CHUNK)
            .map(|s| s..(s + CHUNK as u64).min(samples))
            .collect();
        let partial: Vec<Vec<f64>> = with_pool(threads, || {
            chunks
                .into_par_iter()
                .map(|r| msq_chunk(&coeffs, &noise, params, steps, seed, r))
                .collect()
        })?;
        let mut total = vec![0.0; steps + 1];
        for part in &partial {
            for (t, v) in total.iter_mut().zip(part) {
                *t += v;
            }
        }
        let worst = total.iter().fold(0.0f64, |m, &v| m.max(v));
        rms_errors.push((worst / samples as f64).sqrt());
    }
    let (slope, residual) = fitted_log_slope(h_values, &rms_errors)
        .ok_or_else(|| Error::domain("mean-square errors vanish; no order can be fitted"))?;
    Ok(MsqReport {
        method: method.name().to_string(),
        t0,
        samples,
        h_values: h_values.to_vec(),
        rms_errors,
        slope,
        residual,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::law::law_na_n;
    use crate::method::lookup;

    fn cfg(sel: &str, h: f64, n: u64, samples: u64, params: OscillatorParams) -> SimConfig {
        SimConfig::new(lookup(sel).unwrap(), h, n, samples, 7, params)
    }

    #[test]
    fn noise_free_paths_follow_the_recursion() {
        let params = OscillatorParams {
            alpha: 0.0,
            x0: 0.3,
            y0: -1.2,
        };
        let r = simulate_paths(&cfg("ex", 0.2, 50, 4, params)).unwrap();
        let a = lookup("ex").unwrap().evaluate(0.2).unwrap().a;
        let (mut x, mut y, mut s) = (0.3, -1.2, 0.0);
        for _ in 0..50 {
            s += x;
            (x, y) = a.apply(x, y);
        }
        for (an, bn) in r.a_n.iter().zip(&r.b_n) {
            assert_eq!(*an, s / 50.0);
            assert_eq!(*bn, x / (50.0 * 0.2));
        }
        assert_eq!(r.summary.a_n.variance, 0.0);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let mut c = cfg("midpoint", 0.1, 100, 3000, OscillatorParams::default());
        c.threads = Some(1);
        let one = simulate_paths(&c).unwrap();
        c.threads = Some(5);
        let five = simulate_paths(&c).unwrap();
        assert_eq!(one, five);
    }

    #[test]
    fn variance_agrees_with_exact_law() {
        let p = OscillatorParams::default();
        let c = cfg("theta:0.75", 0.2, 200, 20_000, p);
        let r = simulate_paths(&c).unwrap();
        let law = law_na_n(&c.method, 0.2, 200, &p).unwrap();
        let (zm, zv) = z_scores(&r.summary.na_n, &law, 20_000);
        assert!(zm < 4.0 && zv < 4.0, "{zm} {zv}");
    }

    #[test]
    fn rejects_bad_configs() {
        let p = OscillatorParams::default();
        assert!(simulate_paths(&cfg("ex", 0.1, 10, 0, p)).is_err());
        assert!(simulate_paths(&cfg("ex", 4.0, 10, 5, p)).is_err());
        let mut c = cfg("ex", 0.1, 10, 5, p);
        c.threads = Some(0);
        assert!(simulate_paths(&c).is_err());
    }

    #[test]
    fn exact_rotation_only_propagates_noise_error() {
        let m = lookup("ex").unwrap();
        let r = msq_order(&m, &[0.2, 0.1, 0.05], 1.0, 40_000, 3, &OscillatorParams::default(), None).unwrap();
        assert!(r.slope >= 1.0, "{r:?}");
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn msq_warns_on_non_integer_grid() {
        let m = lookup("midpoint").unwrap();
        let r = msq_order(&m, &[0.3, 0.1], 1.0, 100, 3, &OscillatorParams::default(), Some(2)).unwrap();
        assert_eq!(r.warnings.len(), 1);
    }
}

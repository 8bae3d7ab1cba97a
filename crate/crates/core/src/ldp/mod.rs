//! Rate functions of the discrete mean position `A_N = (1/N) sum_{n<N} x_n`
//! and mean velocity `B_N = x_N / (N h)`, their modified (time-rescaled)
//! versions, preservation verdicts, finite-N decay rates and the search for
//! exactly-preserving methods.
//!
//! All rates here are quadratic or degenerate. Each is computed twice: once
//! from the closed-form rate expressions and once as the Legendre transform of
//! the limiting log-MGF, and the two are checked against each other in tests.

mod preservation;
mod search;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::law::{interval_probability, law_a_n, law_b_n, Probability};
use crate::linalg::Coefficients;
use crate::method::{check_conditions, ConditionReport, MethodDef, DEFAULT_TOLERANCE};
use crate::oscillator::{continuous_rate, Observable, OscillatorParams, RateFunction};

pub use preservation::{
    default_preservation_steps, fitted_log_slope, preservation_report, Evidence, PreservationReport,
    PreservationRow, RowStatus, Verdict, EXACT_TOLERANCE,
};
pub use search::{
    ansatz_coefficients, default_d_grid, default_probe_steps, default_sigma_grid, exact_preservation_search,
    matching_catalog_method, SearchCandidate,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `det(A) = 1`.
    Symplectic,
    /// `0 < det(A) < 1`.
    NonSymplectic,
}

/// Outcome of classifying `(method, h, observable)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdpClassification {
    pub method: String,
    pub h: f64,
    pub observable: Observable,
    pub regime: Option<Regime>,
    /// Rate of the discrete observable in `N`.
    pub rate: Option<RateFunction>,
    /// `rate / h`, the rate on the continuous time scale `t_N = N h`.
    pub modified_rate: Option<RateFunction>,
    /// Coefficient `c` of the limiting log-MGF `c lambda^2`.
    pub log_mgf: Option<f64>,
    pub applicable: bool,
    /// Failed assumption when not applicable.
    pub reason: Option<String>,
    pub conditions: ConditionReport,
}

/// Determines the regime for an observable, or the assumption that fails.
pub fn classify(c: &Coefficients, observable: Observable) -> (ConditionReport, std::result::Result<Regime, String>) {
    let report = check_conditions(c, DEFAULT_TOLERANCE);
    let require_a4 = observable == Observable::MeanPosition;
    let outcome = match report.first_failure(require_a4) {
        Some(reason) => Err(reason.to_string()),
        None if report.a2 => Ok(Regime::Symplectic),
        None => Ok(Regime::NonSymplectic),
    };
    (report, outcome)
}

fn invariant_positive(label: &str, value: f64, c: &Coefficients) -> Result<()> {
    if value > 0.0 {
        Ok(())
    } else {
        Err(Error::Invariant(format!(
            "{label} = {value:e} is not positive under (A1),(A2) for A={:?}, b={:?}",
            c.a, c.b
        )))
    }
}

/// `(b1+q)^2 (4+tr) - 2 b1 q (2-tr)`; positive for symplectic methods with a
/// complex eigenvalue pair and nonzero `b`.
pub fn position_weight(c: &Coefficients) -> f64 {
    let (p, q, tr) = (c.direct_weight(), c.lagged_weight(), c.trace());
    let s = p + q;
    s * s * (4.0 + tr) - 2.0 * p * q * (2.0 - tr)
}

/// `(b1+q)^2 - b1 q (2-tr)`; positive under the same assumptions.
pub fn velocity_weight(c: &Coefficients) -> f64 {
    let (p, q, tr) = (c.direct_weight(), c.lagged_weight(), c.trace());
    let s = p + q;
    s * s - p * q * (2.0 - tr)
}

/// Log-MGF coefficient from coefficients, or the failed assumption.
pub fn log_mgf_coefficient_coeffs(c: &Coefficients, h: f64, observable: Observable, alpha: f64) -> Result<f64> {
    let (_, regime) = classify(c, observable);
    let regime = regime.map_err(Error::Inapplicable)?;
    let a2 = alpha * alpha;
    let tr = c.trace();
    Ok(match (regime, observable) {
        (Regime::Symplectic, Observable::MeanPosition) => {
            let s = position_weight(c);
            invariant_positive("position weight", s, c)?;
            a2 * h * s / (2.0 * (2.0 + tr) * (2.0 - tr) * (2.0 - tr))
        }
        (Regime::Symplectic, Observable::MeanVelocity) => {
            let t = velocity_weight(c);
            invariant_positive("velocity weight", t, c)?;
            a2 * t / ((4.0 - tr * tr) * h)
        }
        (Regime::NonSymplectic, Observable::MeanPosition) => {
            let r = c.total_weight() / (1.0 - tr + c.det());
            0.5 * a2 * h * r * r
        }
        (Regime::NonSymplectic, Observable::MeanVelocity) => 0.0,
    })
}

pub fn log_mgf_coefficient(method: &MethodDef, h: f64, observable: Observable, params: &OscillatorParams) -> Result<f64> {
    log_mgf_coefficient_coeffs(&method.evaluate(h)?, h, observable, params.alpha)
}

/// Rate of the discrete observable from the closed-form rate expressions
/// (independent of the log-MGF path).
pub fn discrete_rate_coeffs(c: &Coefficients, h: f64, observable: Observable, alpha: f64) -> Result<RateFunction> {
    let (_, regime) = classify(c, observable);
    let regime = regime.map_err(Error::Inapplicable)?;
    let a2 = alpha * alpha;
    let tr = c.trace();
    Ok(match (regime, observable) {
        (Regime::Symplectic, Observable::MeanPosition) => {
            let s = position_weight(c);
            invariant_positive("position weight", s, c)?;
            RateFunction::Quadratic((2.0 + tr) * (2.0 - tr) * (2.0 - tr) / (2.0 * a2 * h * s))
        }
        (Regime::Symplectic, Observable::MeanVelocity) => {
            let t = velocity_weight(c);
            invariant_positive("velocity weight", t, c)?;
            RateFunction::Quadratic(h * (4.0 - tr * tr) / (4.0 * a2 * t))
        }
        (Regime::NonSymplectic, Observable::MeanPosition) => {
            let r = (1.0 - tr + c.det()) / c.total_weight();
            RateFunction::Quadratic(r * r / (2.0 * a2 * h))
        }
        (Regime::NonSymplectic, Observable::MeanVelocity) => RateFunction::Degenerate,
    })
}

/// `sup_lambda (y lambda - c lambda^2)`: `y^2/(4c)` for `c > 0`, degenerate for `c = 0`.
pub fn legendre_transform(c: f64) -> Result<RateFunction> {
    if c.is_nan() || c < 0.0 {
        Err(Error::domain(format!("log-MGF coefficient must be nonnegative, got {c}")))
    } else if c == 0.0 {
        Ok(RateFunction::Degenerate)
    } else {
        Ok(RateFunction::Quadratic(1.0 / (4.0 * c)))
    }
}

pub fn rate_function_coeffs(
    name: &str,
    c: &Coefficients,
    h: f64,
    observable: Observable,
    params: &OscillatorParams,
) -> Result<LdpClassification> {
    let (conditions, regime) = classify(c, observable);
    let mut out = LdpClassification {
        method: name.to_string(),
        h,
        observable,
        regime: None,
        rate: None,
        modified_rate: None,
        log_mgf: None,
        applicable: false,
        reason: None,
        conditions,
    };
    match regime {
        Err(reason) => out.reason = Some(reason),
        Ok(regime) => {
            let rate = discrete_rate_coeffs(c, h, observable, params.alpha)?;
            out.regime = Some(regime);
            out.rate = Some(rate);
            out.modified_rate = Some(rate.divided_by(h));
            out.log_mgf = Some(log_mgf_coefficient_coeffs(c, h, observable, params.alpha)?);
            out.applicable = true;
        }
    }
    Ok(out)
}

/// Classifies `(method, h, observable)` and computes its rate functions.
/// Inapplicable regimes are reported through `applicable = false`.
pub fn rate_function(
    method: &MethodDef,
    h: f64,
    observable: Observable,
    params: &OscillatorParams,
) -> Result<LdpClassification> {
    let c = method.evaluate(h)?;
    rate_function_coeffs(method.name(), &c, h, observable, params)
}

/// Coefficient of the continuous-time rate function.
pub fn target_coefficient(observable: Observable, params: &OscillatorParams) -> f64 {
    continuous_rate(observable, params).coefficient_or_inf()
}

/// `-(1/N) ln P(observable_N in [lo, hi])` from the exact finite-N law.
pub fn finite_n_decay_rate(
    method: &MethodDef,
    observable: Observable,
    h: f64,
    n: u64,
    lo: f64,
    hi: f64,
    params: &OscillatorParams,
) -> Result<f64> {
    let law = match observable {
        Observable::MeanPosition => law_a_n(method, h, n, params)?,
        Observable::MeanVelocity => law_b_n(method, h, n, params)?,
    };
    let p = interval_probability(&law, lo, hi)?;
    if p == Probability::Value(0.0) {
        return Err(Error::domain(format!(
            "interval [{lo}, {hi}] has zero probability under a point-mass law"
        )));
    }
    Ok(-p.ln() / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::method::lookup;
    use std::f64::consts::PI;

    const UNIT: OscillatorParams = OscillatorParams {
        alpha: 1.0,
        x0: 0.0,
        y0: 0.0,
    };

    fn modified(sel: &str, h: f64, obs: Observable) -> f64 {
        let m = lookup(sel).unwrap();
        rate_function(&m, h, obs, &UNIT).unwrap().modified_rate.unwrap().coefficient().unwrap()
    }

    #[test]
    fn legendre() {
        let a2 = 2.5f64 * 2.5;
        assert_eq!(legendre_transform(0.75 * a2).unwrap(), RateFunction::Quadratic(1.0 / (3.0 * a2)));
        assert_eq!(legendre_transform(0.0).unwrap(), RateFunction::Degenerate);
        assert_eq!(legendre_transform(0.25).unwrap(), RateFunction::Quadratic(1.0));
        assert!(legendre_transform(-1.0).is_err());
    }

    #[test]
    fn continuous_rate_is_legendre_of_continuous_log_mgf() {
        for alpha in [0.5, 1.0, 3.0] {
            let p = OscillatorParams::new(alpha, 0.0, 0.0).unwrap();
            for obs in Observable::ALL {
                let c = crate::oscillator::continuous_log_mgf_coefficient(obs, &p);
                let l = legendre_transform(c).unwrap().coefficient().unwrap();
                let direct = continuous_rate(obs, &p).coefficient().unwrap();
                assert!((l - direct).abs() <= 1e-15 * direct);
            }
        }
    }

    #[test]
    fn midpoint_log_mgf() {
        let m = lookup("midpoint").unwrap();
        for h in [0.1, 0.5, 1.3] {
            let c = log_mgf_coefficient(&m, h, Observable::MeanPosition, &UNIT).unwrap();
            assert!((c - 3.0 / (4.0 * h)).abs() < 1e-12 * c, "h={h}: {c}");
        }
    }

    #[test]
    fn non_symplectic_velocity_is_degenerate() {
        let m = lookup("theta:1").unwrap();
        let r = rate_function(&m, 0.5, Observable::MeanVelocity, &UNIT).unwrap();
        assert_eq!(r.log_mgf, Some(0.0));
        assert_eq!(r.rate, Some(RateFunction::Degenerate));
        assert_eq!(r.modified_rate, Some(RateFunction::Degenerate));
        assert_eq!(r.regime, Some(Regime::NonSymplectic));
    }

    #[test]
    fn published_modified_rates() {
        use Observable::*;
        // beta-method, beta = 0, h = 1: (1/3)(3/2 - 3/5)
        assert!((modified("beta:0", 1.0, MeanPosition) - 0.3).abs() < 1e-12);
        for h in [0.3, 1.0, 2.5] {
            assert!((modified("opt", h, MeanPosition) - 1.0 / 3.0).abs() < 1e-12);
            assert!((modified("ex", h, MeanVelocity) - 1.0).abs() < 1e-12);
            assert!((modified("theta:1", h, MeanPosition) - 0.5).abs() < 1e-12);
        }
        let h = PI / 2.0;
        assert!((modified("ex", h, MeanPosition) - 4.0 / (PI * PI)).abs() < 1e-12);
        assert!((modified("beta:0.5", 0.2, MeanVelocity) - 1.01).abs() < 1e-12);
        assert!((modified("pc-em-bem", 0.5, MeanPosition) - 0.5).abs() < 1e-12);
        assert!((modified("pc-pem-mr", 0.5, MeanPosition) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn beta_method_formula() {
        for beta in [0.0, 0.3, 0.5, 0.8, 1.0] {
            let sel = format!("beta:{beta}");
            for h in [0.1, 0.7, 1.9] {
                let g = (2.0 * beta - 1.0) * h;
                let i_mod = (1.0 / 3.0) * (1.5 - 3.0 / (6.0 - g * g));
                let d = 1.0 + beta * (1.0 - beta) * h * h;
                let j_mod = (4.0 - g * g) * d / 4.0;
                assert!((modified(&sel, h, Observable::MeanPosition) - i_mod).abs() < 1e-12);
                assert!((modified(&sel, h, Observable::MeanVelocity) - j_mod).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn excluded_and_a4_failures_are_inapplicable() {
        let em = lookup("em").unwrap();
        let r = rate_function(&em, 0.5, Observable::MeanPosition, &UNIT).unwrap();
        assert!(!r.applicable);
        assert_eq!(r.reason.as_deref(), Some("excluded, det(A)>1"));
        assert!(matches!(
            log_mgf_coefficient(&em, 0.5, Observable::MeanPosition, &UNIT),
            Err(Error::Inapplicable(_))
        ));

        // contractive, A4 fails: b1 + a12 b2 - a22 b1 = 0
        use crate::linalg::{Mat2, Vec2};
        let c = Coefficients::new(Mat2::new(0.5, 0.5, -0.5, 0.5), Vec2::new(1.0, -1.0));
        assert!(c.total_weight().abs() < 1e-15);
        let r = rate_function_coeffs("x", &c, 0.1, Observable::MeanPosition, &UNIT).unwrap();
        assert!(!r.applicable && r.reason.unwrap().contains("(A4)"));
        let r = rate_function_coeffs("x", &c, 0.1, Observable::MeanVelocity, &UNIT).unwrap();
        assert!(r.applicable);
    }

    #[test]
    fn duality_on_catalog() {
        for m in crate::method::catalog() {
            for h in [0.05, 0.3, 0.9] {
                for obs in Observable::ALL {
                    let Ok(r) = rate_function(&m, h, obs, &UNIT) else { continue };
                    if !r.applicable {
                        continue;
                    }
                    let dual = legendre_transform(r.log_mgf.unwrap()).unwrap();
                    match (dual, r.rate.unwrap()) {
                        (RateFunction::Quadratic(a), RateFunction::Quadratic(b)) => {
                            assert!((a - b).abs() <= 1e-12 * b, "{} h={h} {obs}", m.name())
                        }
                        (a, b) => assert_eq!(a, b),
                    }
                }
            }
        }
    }

    #[test]
    fn exponential_beats_continuous_on_small_steps() {
        for h in [0.05, 0.2, 0.5] {
            assert!(modified("ex", h, Observable::MeanPosition) > 1.0 / 3.0);
        }
        for beta in ["beta:0", "beta:0.25", "beta:1"] {
            assert!(modified(beta, 0.4, Observable::MeanPosition) < 1.0 / 3.0);
        }
    }

    #[test]
    fn decay_rate_with_mean_inside_vanishes() {
        let m = lookup("midpoint").unwrap();
        let r2 = finite_n_decay_rate(&m, Observable::MeanPosition, 0.1, 100, -0.5, 0.5, &UNIT).unwrap();
        let r4 = finite_n_decay_rate(&m, Observable::MeanPosition, 0.1, 10_000, -0.5, 0.5, &UNIT).unwrap();
        assert!(r4 < r2 && r4 < 1e-3);
    }
}

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{rate_function, target_coefficient};
use crate::error::{Error, Result};
use crate::method::MethodDef;
use crate::oscillator::{Observable, OscillatorParams, RateFunction};

/// Relative tolerance for "modified coefficient equals the target".
pub const EXACT_TOLERANCE: f64 = 1e-10;

/// Slope of `log|coefficient - target|` against `log h` above which a
/// shrinking error counts as convergence.
const MIN_CONVERGENCE_SLOPE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    ExactlyPreserves,
    AsymptoticallyPreserves,
    DoesNotPreserve,
    /// No tested step size satisfies the assumptions of any regime.
    NotApplicable,
}

impl Verdict {
    pub fn preserves(self) -> bool {
        matches!(self, Verdict::ExactlyPreserves | Verdict::AsymptoticallyPreserves)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::ExactlyPreserves => "exactly-preserves",
            Verdict::AsymptoticallyPreserves => "asymptotically-preserves",
            Verdict::DoesNotPreserve => "does-not-preserve",
            Verdict::NotApplicable => "not-applicable",
        })
    }
}

/// How an exact verdict was established.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Evidence {
    /// The method is catalogued as exact and every probe agrees.
    Declared,
    /// Every probe agrees; no analytic claim backs it.
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowStatus {
    Quadratic(f64),
    Degenerate,
    Inapplicable(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreservationRow {
    pub h: f64,
    pub status: RowStatus,
}

impl PreservationRow {
    pub fn coefficient(&self) -> Option<f64> {
        match self.status {
            RowStatus::Quadratic(c) => Some(c),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreservationReport {
    pub method: String,
    pub observable: Observable,
    pub rows: Vec<PreservationRow>,
    /// Coefficient of the continuous rate function.
    pub target: f64,
    pub verdict: Verdict,
    pub evidence: Option<Evidence>,
    /// Least-squares slope of `log|coefficient - target|` against `log h`.
    pub fitted_order: Option<f64>,
    pub note: Option<String>,
}

impl PreservationReport {
    pub fn h_values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.h).collect()
    }
}

/// `0.5 * 2^{-k}`, `k = 0..=6`.
pub fn default_preservation_steps() -> Vec<f64> {
    (0..=6).map(|k| 0.5 * 0.5f64.powi(k)).collect()
}

/// Least-squares slope of `ln y` on `ln x` and the RMS residual of the fit.
pub fn fitted_log_slope(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let ss: f64 = pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum();
    Some((slope, (ss / n).sqrt()))
}

/// Compares the modified rate with the continuous rate along a decreasing
/// step sequence.
///
/// - exact: every applicable coefficient within [`EXACT_TOLERANCE`] (relative)
///   of the target;
/// - asymptotic: on the tail (the smaller half of the applicable steps, at
///   least three) the error shrinks monotonically with fitted slope above 0.5;
/// - otherwise, or as soon as any rate is degenerate, no preservation.
pub fn preservation_report(
    method: &MethodDef,
    observable: Observable,
    h_values: &[f64],
    params: &OscillatorParams,
) -> Result<PreservationReport> {
    if h_values.len() < 2 {
        return Err(Error::Usage("sweep requires >= 2 points".into()));
    }
    if h_values.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Usage("step sequence must be strictly decreasing".into()));
    }
    let target = target_coefficient(observable, params);
    let mut rows = Vec::with_capacity(h_values.len());
    for &h in h_values {
        let status = match rate_function(method, h, observable, params) {
            Ok(r) if r.applicable => match r.modified_rate.expect("applicable rows carry a rate") {
                RateFunction::Quadratic(c) => RowStatus::Quadratic(c),
                RateFunction::Degenerate => RowStatus::Degenerate,
            },
            Ok(r) => RowStatus::Inapplicable(r.reason.unwrap_or_default()),
            Err(e @ Error::Invariant(_)) => return Err(e),
            Err(e) => RowStatus::Inapplicable(e.to_string()),
        };
        rows.push(PreservationRow { h, status });
    }

    let applicable: Vec<&PreservationRow> = rows
        .iter()
        .filter(|r| !matches!(r.status, RowStatus::Inapplicable(_)))
        .collect();
    let quad: Vec<(f64, f64)> = applicable
        .iter()
        .filter_map(|r| r.coefficient().map(|c| (r.h, (c - target).abs())))
        .collect();
    let fitted_order = {
        let (hs, es): (Vec<f64>, Vec<f64>) = quad.iter().cloned().unzip();
        fitted_log_slope(&hs, &es).map(|f| f.0)
    };
    let declared = method.declared_exact().contains(&observable);

    let mut note = None;
    let (verdict, evidence) = if applicable.is_empty() {
        (Verdict::NotApplicable, None)
    } else if applicable.iter().any(|r| r.status == RowStatus::Degenerate) {
        (Verdict::DoesNotPreserve, None)
    } else if quad.iter().all(|&(_, e)| e <= EXACT_TOLERANCE * target) {
        let ev = if declared { Evidence::Declared } else { Evidence::Numeric };
        (Verdict::ExactlyPreserves, Some(ev))
    } else {
        if declared {
            note = Some("catalogued as exact but the numeric check disagrees".to_string());
        }
        let tail_len = (quad.len() / 2).max(3).min(quad.len());
        let tail = &quad[quad.len() - tail_len..];
        let monotone = tail.windows(2).all(|w| w[1].1 < w[0].1);
        let (hs, es): (Vec<f64>, Vec<f64>) = tail.iter().cloned().unzip();
        let slope = fitted_log_slope(&hs, &es).map(|f| f.0);
        if tail_len >= 3 && monotone && slope.is_some_and(|s| s > MIN_CONVERGENCE_SLOPE) {
            (Verdict::AsymptoticallyPreserves, None)
        } else {
            (Verdict::DoesNotPreserve, None)
        }
    };

    // An order only means something when the error is not at rounding level.
    let fitted_order = if verdict == Verdict::ExactlyPreserves { None } else { fitted_order };
    Ok(PreservationReport {
        method: method.name().to_string(),
        observable,
        rows,
        target,
        verdict,
        evidence,
        fitted_order,
        note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::method::{catalog, lookup, MethodKind};
    use Observable::*;

    fn verdict(sel: &str, obs: Observable) -> PreservationReport {
        let m = lookup(sel).unwrap();
        preservation_report(&m, obs, &default_preservation_steps(), &OscillatorParams::default()).unwrap()
    }

    #[test]
    fn published_verdicts() {
        let r = verdict("midpoint", MeanPosition);
        assert_eq!(r.verdict, Verdict::ExactlyPreserves);
        assert_eq!(r.evidence, Some(Evidence::Declared));
        assert_eq!(verdict("theta:1", MeanPosition).verdict, Verdict::DoesNotPreserve);
        assert_eq!(verdict("theta:1", MeanVelocity).verdict, Verdict::DoesNotPreserve);
        assert_eq!(verdict("ex", MeanVelocity).verdict, Verdict::ExactlyPreserves);
        assert_eq!(verdict("ex", MeanPosition).verdict, Verdict::AsymptoticallyPreserves);
        assert_eq!(verdict("opt", MeanVelocity).verdict, Verdict::AsymptoticallyPreserves);
        assert_eq!(verdict("em", MeanPosition).verdict, Verdict::NotApplicable);
    }

    #[test]
    fn beta_zero_converges_at_second_order() {
        let hs: Vec<f64> = (2..=8).map(|k| 0.5f64.powi(k)).collect();
        let r = preservation_report(&lookup("beta:0").unwrap(), MeanPosition, &hs, &OscillatorParams::default())
            .unwrap();
        assert_eq!(r.verdict, Verdict::AsymptoticallyPreserves);
        let order = r.fitted_order.unwrap();
        assert!((order - 2.0).abs() < 0.05, "{order}");
        // |I_mod - 1/3| = h^2 / (6 (6 - h^2))
        for row in &r.rows {
            let h = row.h;
            let err = (row.coefficient().unwrap() - 1.0 / 3.0).abs();
            assert!((err - h * h / (6.0 * (6.0 - h * h))).abs() < 1e-13);
        }
    }

    #[test]
    fn catalog_classes() {
        for m in catalog() {
            for obs in Observable::ALL {
                let r = preservation_report(&m, obs, &default_preservation_steps(), &OscillatorParams::default())
                    .unwrap();
                match m.kind() {
                    MethodKind::SymplecticCatalog => assert!(r.verdict.preserves(), "{} {obs}", m.name()),
                    MethodKind::NonSymplecticCatalog => {
                        assert_eq!(r.verdict, Verdict::DoesNotPreserve, "{} {obs}", m.name())
                    }
                    _ => {}
                }
            }
        }
    }

    #[test]
    fn slope_fit() {
        let xs = [1.0, 0.5, 0.25];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powi(2)).collect();
        let (s, res) = fitted_log_slope(&xs, &ys).unwrap();
        assert!((s - 2.0).abs() < 1e-12 && res < 1e-12);
        assert!(fitted_log_slope(&[1.0], &[1.0]).is_none());
    }

    #[test]
    fn rejects_bad_sequences() {
        let m = lookup("ex").unwrap();
        let p = OscillatorParams::default();
        assert!(preservation_report(&m, MeanPosition, &[0.1], &p).is_err());
        assert!(preservation_report(&m, MeanPosition, &[0.1, 0.2], &p).is_err());
    }
}

//! One-step methods `z_{n+1} = A(h) z_n + alpha b(h) dW_n`, their structural
//! assumptions and the built-in catalog.

mod catalog;
pub mod expr;
mod file;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Coefficients, Mat2};
use crate::oscillator::Observable;

pub use catalog::{beta_method, catalog, lookup, theta_method};
pub use file::MethodFile;

/// Default absolute tolerance on `|det(A) - 1|` and on `|b1 + a12 b2 - a22 b1|`.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodKind {
    /// Symplectic methods from the literature.
    SymplecticCatalog,
    /// Non-symplectic methods with `0 < det(A) < 1`.
    NonSymplecticCatalog,
    /// Symplectic methods constructed to match a continuous rate exactly.
    ExactConstruction,
    /// Euler-Maruyama; `det(A) = 1 + h^2`, kept as a reference point.
    Baseline,
    /// Parsed from a method-definition file.
    User,
}

/// Open interval `(lo, hi)` of admissible step sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRange {
    pub lo: f64,
    pub hi: f64,
    /// Human-readable form, e.g. `(0, pi)`.
    pub label: String,
}

impl StepRange {
    pub fn new(lo: f64, hi: f64, label: impl Into<String>) -> Self {
        StepRange {
            lo,
            hi,
            label: label.into(),
        }
    }

    pub fn numeric(lo: f64, hi: f64) -> Self {
        let fmt = |v: f64| {
            if v.is_infinite() {
                "inf".to_string()
            } else {
                format!("{v}")
            }
        };
        let label = format!("({}, {})", fmt(lo), fmt(hi));
        StepRange { lo, hi, label }
    }

    pub fn contains(&self, h: f64) -> bool {
        h > self.lo && h < self.hi
    }

    /// Largest step worth probing: `0.9 * hi`, or `0.9 * cap` for unbounded ranges.
    pub fn probe_max(&self, cap: f64) -> f64 {
        0.9 * if self.hi.is_finite() { self.hi } else { cap }
    }
}

impl fmt::Display for StepRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

type Evaluator = Arc<dyn Fn(f64) -> Coefficients + Send + Sync>;

/// A named one-step method.
#[derive(Clone)]
pub struct MethodDef {
    name: String,
    description: String,
    kind: MethodKind,
    range: StepRange,
    eval: Evaluator,
    /// Observables whose continuous rate this method matches for every step.
    exact_for: Vec<Observable>,
    source: Option<MethodFile>,
}

impl fmt::Debug for MethodDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MethodDef")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("range", &self.range.label)
            .finish_non_exhaustive()
    }
}

impl MethodDef {
    pub fn new(
        name: impl Into<String>,
        description: impl Into<String>,
        kind: MethodKind,
        range: StepRange,
        eval: impl Fn(f64) -> Coefficients + Send + Sync + 'static,
    ) -> Self {
        MethodDef {
            name: name.into(),
            description: description.into(),
            kind,
            range,
            eval: Arc::new(eval),
            exact_for: Vec::new(),
            source: None,
        }
    }

    pub(crate) fn with_exact_for(mut self, obs: &[Observable]) -> Self {
        self.exact_for = obs.to_vec();
        self
    }

    pub fn from_file(file: MethodFile) -> Self {
        let f = file.clone();
        let eval = move |h: f64| f.coefficients(h);
        let mut m = MethodDef::new(
            file.name.clone(),
            file.description.clone(),
            MethodKind::User,
            StepRange::numeric(file.h_min, file.h_max),
            eval,
        );
        m.source = Some(file);
        m
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn kind(&self) -> MethodKind {
        self.kind
    }

    pub fn range(&self) -> &StepRange {
        &self.range
    }

    /// Observables for which the method is known to reproduce the continuous
    /// rate at every admissible step. Empty for user methods.
    pub fn declared_exact(&self) -> &[Observable] {
        &self.exact_for
    }

    pub fn source(&self) -> Option<&MethodFile> {
        self.source.as_ref()
    }

    /// Method-definition file text, for methods that have an expression form.
    pub fn to_file_text(&self) -> Option<String> {
        self.source.as_ref().map(MethodFile::to_text)
    }

    /// `(A, b)` at step `h`, without the admissible-range check.
    pub fn coefficients(&self, h: f64) -> Result<Coefficients> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::domain(format!("step size must be positive, got {h}")));
        }
        let c = (self.eval)(h);
        if !c.is_finite() {
            return Err(Error::InvalidMethod {
                method: self.name.clone(),
                reason: format!("non-finite coefficients at h={h}"),
            });
        }
        if c.b.norm_sq() == 0.0 {
            return Err(Error::InvalidMethod {
                method: self.name.clone(),
                reason: format!("noise vector b vanishes at h={h}"),
            });
        }
        Ok(c)
    }

    /// `(A, b)` at step `h`, which must lie in the admissible range.
    pub fn evaluate(&self, h: f64) -> Result<Coefficients> {
        if h > 0.0 && !self.range.contains(h) {
            return Err(Error::OutOfRange {
                method: self.name.clone(),
                h,
                range: self.range.label.clone(),
            });
        }
        self.coefficients(h)
    }
}

/// Structural assumptions on `(A, b)` at a fixed step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    /// Complex eigenvalue pair: `4 det(A) - tr(A)^2 > 0`.
    pub a1: bool,
    /// `det(A) = 1` within tolerance.
    pub a2: bool,
    /// `0 < det(A) < 1`.
    pub a3: bool,
    /// `b1 + a12 b2 - a22 b1 != 0`.
    pub a4: bool,
    pub symplectic: bool,
    /// `det(A) > 1`.
    pub excluded: bool,
    pub det: f64,
    pub trace: f64,
    pub total_weight: f64,
}

impl ConditionReport {
    /// Name of the first failed assumption for the given regime, if any.
    pub fn first_failure(&self, require_a4: bool) -> Option<&'static str> {
        if self.excluded {
            return Some("excluded, det(A)>1");
        }
        if !self.a1 {
            return Some("(A1) 4det(A)-tr(A)^2>0 fails");
        }
        if !(self.a2 || self.a3) {
            return Some("neither (A2) nor (A3) holds");
        }
        if require_a4 && self.a3 && !self.a4 {
            return Some("(A4) b1+a12b2-a22b1=0");
        }
        None
    }
}

pub fn check_conditions(c: &Coefficients, tolerance: f64) -> ConditionReport {
    let det = c.det();
    let trace = c.trace();
    let total = c.total_weight();
    let a2 = (det - 1.0).abs() <= tolerance;
    let a3 = !a2 && det > 0.0 && det < 1.0;
    ConditionReport {
        a1: 4.0 * det - trace * trace > 0.0,
        a2,
        a3,
        a4: total.abs() > tolerance,
        symplectic: a2,
        excluded: !a2 && det > 1.0,
        det,
        trace,
        total_weight: total,
    }
}

/// Distance ratios from Euler-Maruyama at one step size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionBRow {
    pub h: f64,
    /// `(|a11-1| + |a22-1| + |a12-h| + |a21+h|) / h^2`
    pub r1: f64,
    /// `(|b1| + |b2-1|) / h`
    pub r2: f64,
    /// `(1 - tr + det) / h^2`
    pub r3: f64,
    /// `(b1 + a12 b2 - a22 b1) / h`
    pub r4: f64,
}

impl ConditionBRow {
    pub fn at(c: &Coefficients, h: f64) -> Self {
        let a = &c.a;
        ConditionBRow {
            h,
            r1: ((a.a11 - 1.0).abs() + (a.a22 - 1.0).abs() + (a.a12 - h).abs() + (a.a21 + h).abs()) / (h * h),
            r2: (c.b.b1.abs() + (c.b.b2 - 1.0).abs()) / h,
            r3: (1.0 - c.trace() + c.det()) / (h * h),
            r4: c.total_weight() / h,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionBDiagnostics {
    pub rows: Vec<ConditionBRow>,
    pub consistent: bool,
    /// Why `consistent` is false; empty otherwise.
    pub failures: Vec<String>,
}

/// Growth allowed for `r1`, `r2` over the sequence relative to their first value.
const BOUNDED_FACTOR: f64 = 10.0;
/// Relative tolerance for `r3, r4 -> 1` at the smallest step.
const LIMIT_TOLERANCE: f64 = 0.1;

/// Ratio table against Euler-Maruyama over a decreasing step sequence.
///
/// `r1` and `r2` count as bounded when no entry exceeds ten times the entry at
/// the largest step (floored at 1e-12, so identically zero columns pass).
pub fn condition_b_diagnostics(method: &MethodDef, h_values: &[f64]) -> Result<ConditionBDiagnostics> {
    if h_values.is_empty() {
        return Err(Error::Usage("condition (B) diagnostics need at least one step".into()));
    }
    if h_values.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Usage("step sequence must be strictly decreasing".into()));
    }
    let rows = h_values
        .iter()
        .map(|&h| method.coefficients(h).map(|c| ConditionBRow::at(&c, h)))
        .collect::<Result<Vec<_>>>()?;
    let mut failures = Vec::new();
    for (label, pick) in [("r1", (|r: &ConditionBRow| r.r1) as fn(&ConditionBRow) -> f64), ("r2", |r| r.r2)] {
        let first = pick(&rows[0]).abs().max(1e-12);
        let max = rows.iter().map(|r| pick(r).abs()).fold(0.0, f64::max);
        if !(max <= BOUNDED_FACTOR * first) {
            failures.push(format!("{label} grows from {first:e} to {max:e}"));
        }
    }
    let last = rows.last().expect("non-empty");
    for (label, v) in [("r3", last.r3), ("r4", last.r4)] {
        if !((v - 1.0).abs() <= LIMIT_TOLERANCE) {
            failures.push(format!("{label}={v} at h={} is not within 10% of 1", last.h));
        }
    }
    Ok(ConditionBDiagnostics {
        rows,
        consistent: failures.is_empty(),
        failures,
    })
}

/// `2^{-k}` for `k = 3..=12`.
pub fn default_condition_b_steps() -> Vec<f64> {
    (3..=12).map(|k| 0.5f64.powi(k)).collect()
}

/// The Euler-Maruyama matrix `[[1, h], [-h, 1]]`.
pub fn euler_maruyama_matrix(h: f64) -> Mat2 {
    Mat2::new(1.0, h, -h, 1.0)
}

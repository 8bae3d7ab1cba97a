//! Tabular output of the CLI commands as CSV, JSON or `key=value` text.
//!
//! Every row type round-trips through both CSV and JSON. JSON has no
//! encoding for non-finite numbers, so `inf`, `-inf` and `nan` are written as
//! strings in both formats.

use std::fmt::Write as _;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA: &str = "ldp-osc/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Text,
}

/// Serde adapter for `f64` that writes non-finite values as strings.
pub mod num {
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};
    use std::fmt;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub(super) struct NumVisitor;

    impl<'de> Visitor<'de> for NumVisitor {
        type Value = f64;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
        }

        fn visit_f64<E>(self, v: f64) -> Result<f64, E> {
            Ok(v)
        }

        fn visit_i64<E>(self, v: i64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_u64<E>(self, v: u64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
            match v.trim() {
                "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
                "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
                "nan" | "NaN" => Ok(f64::NAN),
                t => t.parse().map_err(|_| E::invalid_value(de::Unexpected::Str(v), &self)),
            }
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        d.deserialize_any(NumVisitor)
    }
}

/// [`num`] for optional values; `None` is an empty CSV field or JSON null.
pub mod opt_num {
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};
    use std::fmt;

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => super::num::serialize(x, s),
            None => s.serialize_none(),
        }
    }

    struct OptVisitor;

    impl<'de> Visitor<'de> for OptVisitor {
        type Value = Option<f64>;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("an optional number")
        }

        fn visit_none<E>(self) -> Result<Self::Value, E> {
            Ok(None)
        }

        fn visit_unit<E>(self) -> Result<Self::Value, E> {
            Ok(None)
        }

        fn visit_some<D: Deserializer<'de>>(self, d: D) -> Result<Self::Value, D::Error> {
            super::num::deserialize(d).map(Some)
        }

        fn visit_f64<E>(self, v: f64) -> Result<Self::Value, E> {
            Ok(Some(v))
        }

        fn visit_i64<E>(self, v: i64) -> Result<Self::Value, E> {
            Ok(Some(v as f64))
        }

        fn visit_u64<E>(self, v: u64) -> Result<Self::Value, E> {
            Ok(Some(v as f64))
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
            if v.trim().is_empty() {
                Ok(None)
            } else {
                super::num::NumVisitor.visit_str(v).map(Some)
            }
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        d.deserialize_any(OptVisitor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogRow {
    pub method: String,
    pub kind: String,
    pub range: String,
    #[serde(with = "num")]
    pub h: f64,
    pub symplectic: bool,
    #[serde(with = "num")]
    pub det: f64,
    #[serde(with = "num")]
    pub trace: f64,
    pub a1: bool,
    pub a2: bool,
    pub a3: bool,
    pub a4: bool,
    pub condition_b: bool,
    pub exact_for: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionsRow {
    pub method: String,
    #[serde(with = "num")]
    pub h: f64,
    #[serde(with = "num")]
    pub det: f64,
    #[serde(with = "num")]
    pub trace: f64,
    #[serde(with = "num")]
    pub total_weight: f64,
    pub a1: bool,
    pub a2: bool,
    pub a3: bool,
    pub a4: bool,
    pub excluded: bool,
    #[serde(with = "num")]
    pub r1: f64,
    #[serde(with = "num")]
    pub r2: f64,
    #[serde(with = "num")]
    pub r3: f64,
    #[serde(with = "num")]
    pub r4: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub method: String,
    pub observable: String,
    #[serde(with = "num")]
    pub h: f64,
    pub regime: Option<String>,
    /// Coefficient of the discrete rate; `inf` when degenerate.
    #[serde(with = "opt_num")]
    pub coefficient: Option<f64>,
    #[serde(with = "opt_num")]
    pub modified: Option<f64>,
    #[serde(with = "num")]
    pub target: f64,
    pub verdict: String,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbRow {
    pub method: String,
    pub observable: String,
    #[serde(with = "num")]
    pub h: f64,
    pub n: u64,
    #[serde(with = "num")]
    pub lo: f64,
    #[serde(with = "num")]
    pub hi: f64,
    /// Probability, or 0 when it underflows; see `ln_probability`.
    #[serde(with = "num")]
    pub probability: f64,
    #[serde(with = "num")]
    pub ln_probability: f64,
    /// `-(1/N) ln P`.
    #[serde(with = "num")]
    pub decay: f64,
    /// Infimum of the discrete rate over the interval.
    #[serde(with = "opt_num")]
    pub prediction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MsqRow {
    pub method: String,
    #[serde(with = "num")]
    pub h: f64,
    #[serde(with = "num")]
    pub rms_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRow {
    pub method: String,
    #[serde(with = "num")]
    pub h: f64,
    pub n: u64,
    pub samples: u64,
    pub seed: u64,
    pub statistic: String,
    #[serde(with = "num")]
    pub sample_mean: f64,
    #[serde(with = "num")]
    pub sample_variance: f64,
    #[serde(with = "num")]
    pub exact_mean: f64,
    #[serde(with = "num")]
    pub exact_variance: f64,
    #[serde(with = "num")]
    pub z_mean: f64,
    #[serde(with = "num")]
    pub z_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRow {
    pub path: u64,
    #[serde(with = "num")]
    pub a_n: f64,
    #[serde(with = "num")]
    pub b_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchRow {
    pub name: String,
    pub observable: String,
    #[serde(with = "num")]
    pub sigma: f64,
    #[serde(with = "num")]
    pub c11: f64,
    #[serde(with = "num")]
    pub c22: f64,
    #[serde(with = "num")]
    pub d1: f64,
    #[serde(with = "num")]
    pub d2: f64,
    pub matches: Option<String>,
    pub file: Option<String>,
}

/// Top-level JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document<T> {
    pub schema: String,
    pub command: String,
    pub rows: Vec<T>,
    /// Ordered `key, value` pairs printed after the rows.
    pub summary: Vec<(String, String)>,
    pub warnings: Vec<String>,
}

impl<T> Document<T> {
    pub fn new(command: &str, rows: Vec<T>) -> Self {
        Document {
            schema: SCHEMA.to_string(),
            command: command.to_string(),
            rows,
            summary: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn with_summary(mut self, key: &str, value: impl ToString) -> Self {
        self.summary.push((key.to_string(), value.to_string()));
        self
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(format!("csv: {e}"))
}

/// Header and rows as CSV; summary lines follow as `# key: value`.
pub fn to_csv<T: Serialize>(doc: &Document<T>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &doc.rows {
        w.serialize(row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    let mut out = String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))?;
    for (k, v) in &doc.summary {
        let _ = writeln!(out, "# {k}: {v}");
    }
    Ok(out)
}

/// Rows of a CSV table; `#` lines are skipped.
pub fn from_csv<T: DeserializeOwned>(text: &str) -> Result<Vec<T>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

pub fn to_json<T: Serialize>(doc: &Document<T>) -> Result<String> {
    serde_json::to_string_pretty(doc).map_err(|e| Error::Io(format!("json: {e}")))
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<Document<T>> {
    let doc: Document<T> = serde_json::from_str(text).map_err(|e| Error::Io(format!("json: {e}")))?;
    if doc.schema != SCHEMA {
        return Err(Error::Io(format!("unsupported schema '{}'", doc.schema)));
    }
    Ok(doc)
}

/// One line per row: first column bare, the rest as `key=value`.
pub fn to_text<T: Serialize>(doc: &Document<T>) -> Result<String> {
    let mut out = String::new();
    for row in &doc.rows {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.serialize(row).map_err(csv_err)?;
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        let mut r = csv::Reader::from_reader(bytes.as_slice());
        let headers = r.headers().map_err(csv_err)?.clone();
        let record = r.records().next().transpose().map_err(csv_err)?.unwrap_or_default();
        let mut parts = Vec::new();
        for (i, (k, v)) in headers.iter().zip(record.iter()).enumerate() {
            if v.is_empty() {
                continue;
            }
            if i == 0 {
                parts.push(v.to_string());
            } else if v.contains(' ') {
                parts.push(format!("{k}=\"{v}\""));
            } else {
                parts.push(format!("{k}={v}"));
            }
        }
        out.push_str(&parts.join(" "));
        out.push('\n');
    }
    for (k, v) in &doc.summary {
        let _ = writeln!(out, "{k}: {v}");
    }
    Ok(out)
}

pub fn render<T: Serialize>(doc: &Document<T>, format: Format) -> Result<String> {
    match format {
        Format::Csv => to_csv(doc),
        Format::Json => to_json(doc),
        Format::Text => to_text(doc),
    }
}

/// Gnuplot script plotting column `y` against column `x` of a CSV file.
pub fn gnuplot_script(data_file: &str, x: &str, y: &[&str], columns: &[&str], log_log: bool) -> String {
    let col = |name: &str| columns.iter().position(|c| *c == name).map(|i| i + 1).unwrap_or(1);
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set key autotitle columnhead\n");
    if log_log {
        s.push_str("set logscale xy\n");
    }
    let _ = writeln!(s, "set xlabel '{x}'");
    let plots: Vec<String> = y
        .iter()
        .map(|name| format!("'{data_file}' using {}:{} with linespoints", col(x), col(name)))
        .collect();
    let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    s
}

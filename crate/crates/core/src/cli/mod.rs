//! `ldp-osc` command-line driver.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 no applicable
//! configuration, 3 internal invariant violation.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::law::{interval_probability, law_a_n, law_b_n, law_na_n};
use crate::ldp::{
    default_d_grid, default_preservation_steps, default_probe_steps, default_sigma_grid, exact_preservation_search,
    matching_catalog_method, preservation_report, rate_function, target_coefficient, Regime,
};
use crate::method::{
    catalog, check_conditions, condition_b_diagnostics, default_condition_b_steps, lookup, ConditionBRow, MethodDef,
    DEFAULT_TOLERANCE,
};
use crate::oscillator::{GaussianLaw, Observable, OscillatorParams};
use crate::report::{
    gnuplot_script, render, CatalogRow, ConditionsRow, Document, Format, MsqRow, PathRow, ProbRow, RateRow,
    SearchRow, SimRow,
};
use crate::sim::{msq_order, simulate_paths, z_scores, SimConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NOT_APPLICABLE: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ldp-osc", version, about = "Large-deviation rate functions of one-step methods for the stochastic oscillator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
    Text,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "text")]
    pub format: FormatArg,
    /// Write the table here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a gnuplot script for the table (expects CSV data in --out).
    #[arg(long)]
    pub gnuplot: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub x0: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub y0: f64,
}

impl ModelArgs {
    fn params(&self) -> OscillatorParams {
        OscillatorParams {
            alpha: self.alpha,
            x0: self.x0,
            y0: self.y0,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List built-in methods with their assumptions at a probe step.
    Catalog {
        /// Probe step; methods whose range excludes it use 0.9 of their upper bound.
        #[arg(long, default_value_t = 1.0)]
        h: f64,
        /// Show a single method (catalog id or method file) instead.
        #[arg(long)]
        method: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Assumption checks and distance-from-Euler-Maruyama ratios.
    Conditions {
        #[arg(long)]
        method: String,
        #[arg(long)]
        h: Option<f64>,
        /// `lo:hi:n` (log-spaced, descending) or a comma list.
        #[arg(long = "h-sweep")]
        h_sweep: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Rate-function coefficients and preservation verdicts.
    Rates {
        #[arg(long)]
        method: String,
        /// Both observables when omitted.
        #[arg(long, value_parser = parse_observable)]
        observable: Option<Observable>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long = "h-sweep")]
        h_sweep: Option<String>,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exact interval probabilities and their decay rates in N.
    Prob {
        #[arg(long)]
        method: String,
        #[arg(long, value_parser = parse_observable, default_value = "mean-position")]
        observable: Observable,
        #[arg(long)]
        h: f64,
        #[arg(long = "N")]
        n: Option<u64>,
        /// Comma list or `lo:hi:n` (log-spaced).
        #[arg(long = "N-sweep")]
        n_sweep: Option<String>,
        /// `a:b`; either end may be `inf`/`-inf`.
        #[arg(long, allow_hyphen_values = true)]
        interval: String,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Mean-square error against the exact solution on shared noise.
    Msq {
        #[arg(long)]
        method: String,
        /// Defaults to `0.1 * 2^-k`, `k = 0..=4`.
        #[arg(long = "h-sweep")]
        h_sweep: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        t0: f64,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Monte Carlo paths compared with the exact laws.
    Simulate {
        #[arg(long)]
        method: String,
        #[arg(long)]
        h: f64,
        #[arg(long = "N")]
        n: u64,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print one row per path instead of the summary.
        #[arg(long)]
        paths: bool,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Search the quadratic unit-determinant ansatz for exactly preserving methods.
    Search {
        #[arg(long, value_parser = parse_observable)]
        observable: Observable,
        /// Write each found method as a definition file into this directory.
        #[arg(long)]
        emit_dir: Option<PathBuf>,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn parse_observable(s: &str) -> std::result::Result<Observable, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_f64(s: &str) -> Result<f64> {
    match s.trim() {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        t => t
            .parse::<f64>()
            .ok()
            .filter(|v| !v.is_nan())
            .ok_or_else(|| Error::Usage(format!("not a number: '{s}'"))),
    }
}

/// `lo:hi:n` log-spaced from `hi` down to `lo`, or a comma list (kept in order).
pub fn parse_h_sweep(s: &str) -> Result<Vec<f64>> {
    let v = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Usage(format!("h-sweep '{s}' is not lo:hi:n")));
        }
        let lo = parse_f64(parts[0])?;
        let hi = parse_f64(parts[1])?;
        let n: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| Error::Usage(format!("bad point count in '{s}'")))?;
        if n < 2 {
            return Err(Error::Usage("sweep requires >= 2 points".into()));
        }
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::Usage(format!("h-sweep needs 0 < lo < hi, got '{s}'")));
        }
        let (a, b) = (hi.ln(), lo.ln());
        let mut v: Vec<f64> = (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect();
        v[0] = hi;
        v[n - 1] = lo;
        v
    } else {
        s.split(',').map(parse_f64).collect::<Result<Vec<_>>>()?
    };
    if v.len() < 2 {
        return Err(Error::Usage("sweep requires >= 2 points".into()));
    }
    if v.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
        return Err(Error::Usage("step sizes must be positive and finite".into()));
    }
    Ok(v)
}

/// Comma list or `lo:hi:n` log-spaced and rounded; duplicates removed.
pub fn parse_n_sweep(s: &str) -> Result<Vec<u64>> {
    let mut v: Vec<u64> = if s.contains(':') {
        parse_h_sweep(s)?.iter().rev().map(|x| x.round() as u64).collect()
    } else {
        s.split(',')
            .map(|t| t.trim().parse::<u64>().map_err(|_| Error::Usage(format!("bad N '{t}'"))))
            .collect::<Result<Vec<_>>>()?
    };
    v.dedup();
    if v.len() < 2 {
        return Err(Error::Usage("sweep requires >= 2 points".into()));
    }
    if v.contains(&0) {
        return Err(Error::Usage("N must be at least 1".into()));
    }
    Ok(v)
}

pub fn parse_interval(s: &str) -> Result<(f64, f64)> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| Error::Usage(format!("interval '{s}' is not a:b")))?;
    let (lo, hi) = (parse_f64(a)?, parse_f64(b)?);
    if !(lo < hi) {
        return Err(Error::Usage(format!("interval needs a < b, got '{s}'")));
    }
    Ok((lo, hi))
}

fn steps(h: Option<f64>, sweep: &Option<String>, default: impl FnOnce() -> Vec<f64>) -> Result<Vec<f64>> {
    match (h, sweep) {
        (Some(_), Some(_)) => Err(Error::Usage("give either --h or --h-sweep, not both".into())),
        (Some(h), None) if h > 0.0 && h.is_finite() => Ok(vec![h]),
        (Some(h), None) => Err(Error::Usage(format!("step size must be positive, got {h}"))),
        (None, Some(s)) => parse_h_sweep(s),
        (None, None) => Ok(default()),
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Invariant(_) => EXIT_INVARIANT,
        Error::Inapplicable(_) | Error::ComplexPairFailed(_) | Error::NearDegenerateSpectrum(_) => EXIT_NOT_APPLICABLE,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(&cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn emit<T: Serialize>(doc: &Document<T>, out: &OutputArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let format = match out.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
        FormatArg::Text => Format::Text,
    };
    let text = render(doc, format)?;
    match &out.out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
        None => stdout.write_all(text.as_bytes())?,
    }
    for w in &doc.warnings {
        writeln!(stderr, "warning: {w}")?;
    }
    Ok(())
}

fn emit_gnuplot(out: &OutputArgs, x: &str, y: &[&str], columns: &[&str], log_log: bool) -> Result<()> {
    if let Some(p) = &out.gnuplot {
        let data = out
            .out
            .as_deref()
            .map(|d| d.display().to_string())
            .unwrap_or_else(|| "data.csv".to_string());
        std::fs::write(p, gnuplot_script(&data, x, y, columns, log_log))
            .map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn regime_label(r: Regime) -> &'static str {
    match r {
        Regime::Symplectic => "symplectic",
        Regime::NonSymplectic => "non-symplectic",
    }
}

fn execute(cmd: &Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Catalog { h, method, output } => cmd_catalog(*h, method.as_deref(), output, stdout, stderr),
        Command::Conditions {
            method,
            h,
            h_sweep,
            output,
        } => cmd_conditions(&lookup(method)?, &steps(*h, h_sweep, default_condition_b_steps)?, output, stdout, stderr),
        Command::Rates {
            method,
            observable,
            h,
            h_sweep,
            model,
            output,
        } => {
            let hs = steps(*h, h_sweep, default_preservation_steps)?;
            let obs = observable.map(|o| vec![o]).unwrap_or_else(|| Observable::ALL.to_vec());
            cmd_rates(&lookup(method)?, &obs, &hs, &model.params(), output, stdout, stderr)
        }
        Command::Prob {
            method,
            observable,
            h,
            n,
            n_sweep,
            interval,
            model,
            output,
        } => {
            let ns = match (n, n_sweep) {
                (Some(_), Some(_)) => return Err(Error::Usage("give either --N or --N-sweep, not both".into())),
                (Some(0), None) => return Err(Error::Usage("N must be at least 1".into())),
                (Some(n), None) => vec![*n],
                (None, Some(s)) => parse_n_sweep(s)?,
                (None, None) => return Err(Error::Usage("--N or --N-sweep is required".into())),
            };
            let (lo, hi) = parse_interval(interval)?;
            cmd_prob(&lookup(method)?, *observable, *h, &ns, lo, hi, &model.params(), output, stdout, stderr)
        }
        Command::Msq {
            method,
            h_sweep,
            t0,
            samples,
            seed,
            model,
            output,
        } => {
            let hs = steps(None, h_sweep, || (0..=4).map(|k| 0.1 * 0.5f64.powi(k)).collect())?;
            let report = msq_order(&lookup(method)?, &hs, *t0, *samples, *seed, &model.params(), None)?;
            let rows = report
                .h_values
                .iter()
                .zip(&report.rms_errors)
                .map(|(&h, &e)| MsqRow {
                    method: report.method.clone(),
                    h,
                    rms_error: e,
                })
                .collect();
            let mut doc = Document::new("msq", rows)
                .with_summary("slope", report.slope)
                .with_summary("residual", report.residual)
                .with_summary("t0", report.t0)
                .with_summary("samples", report.samples)
                .with_summary("seed", seed);
            doc.warnings = report.warnings.clone();
            emit(&doc, output, stdout, stderr)?;
            emit_gnuplot(output, "h", &["rms_error"], &["method", "h", "rms_error"], true)?;
            Ok(EXIT_OK)
        }
        Command::Simulate {
            method,
            h,
            n,
            samples,
            seed,
            paths,
            model,
            output,
        } => cmd_simulate(&lookup(method)?, *h, *n, *samples, *seed, *paths, &model.params(), output, stdout, stderr),
        Command::Search {
            observable,
            emit_dir,
            model,
            output,
        } => cmd_search(*observable, emit_dir.as_deref(), &model.params(), output, stdout, stderr),
    }
}

fn cmd_catalog(
    h: f64,
    method: Option<&str>,
    output: &OutputArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Usage(format!("probe step must be positive, got {h}")));
    }
    let methods = match method {
        Some(sel) => vec![lookup(sel)?],
        None => catalog(),
    };
    let mut rows = Vec::new();
    for m in &methods {
        let probe = if m.range().contains(h) { h } else { m.range().probe_max(2.0) };
        let c = m.evaluate(probe)?;
        let cond = check_conditions(&c, DEFAULT_TOLERANCE);
        let cb = condition_b_diagnostics(m, &default_condition_b_steps())
            .map(|d| d.consistent)
            .unwrap_or(false);
        let exact: Vec<String> = m.declared_exact().iter().map(|o| o.to_string()).collect();
        rows.push(CatalogRow {
            method: m.name().to_string(),
            kind: serde_json::to_value(m.kind())
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default(),
            range: m.range().to_string(),
            h: probe,
            symplectic: cond.symplectic,
            det: cond.det,
            trace: cond.trace,
            a1: cond.a1,
            a2: cond.a2,
            a3: cond.a3,
            a4: cond.a4,
            condition_b: cb,
            exact_for: exact.join("+"),
        });
    }
    emit(&Document::new("catalog", rows), output, stdout, stderr)?;
    Ok(EXIT_OK)
}

fn cmd_conditions(
    m: &MethodDef,
    hs: &[f64],
    output: &OutputArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32> {
    let mut rows = Vec::new();
    for &h in hs {
        let c = m.evaluate(h)?;
        let cond = check_conditions(&c, DEFAULT_TOLERANCE);
        let b = ConditionBRow::at(&c, h);
        rows.push(ConditionsRow {
            method: m.name().to_string(),
            h,
            det: cond.det,
            trace: cond.trace,
            total_weight: cond.total_weight,
            a1: cond.a1,
            a2: cond.a2,
            a3: cond.a3,
            a4: cond.a4,
            excluded: cond.excluded,
            r1: b.r1,
            r2: b.r2,
            r3: b.r3,
            r4: b.r4,
        });
    }
    let mut doc = Document::new("conditions", rows);
    let mut sorted = hs.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    sorted.dedup();
    if let Ok(d) = condition_b_diagnostics(m, &sorted) {
        doc = doc.with_summary("condition_b", d.consistent);
        for f in d.failures {
            doc = doc.with_summary("condition_b_failure", f);
        }
    }
    emit(&doc, output, stdout, stderr)?;
    emit_gnuplot(output, "h", &["r1", "r2", "r3", "r4"], &ROW_CONDITIONS, true)?;
    Ok(EXIT_OK)
}

const ROW_CONDITIONS: [&str; 14] = [
    "method", "h", "det", "trace", "total_weight", "a1", "a2", "a3", "a4", "excluded", "r1", "r2", "r3", "r4",
];

fn cmd_rates(
    m: &MethodDef,
    observables: &[Observable],
    hs: &[f64],
    params: &OscillatorParams,
    output: &OutputArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32> {
    params.validate()?;
    let mut rows = Vec::new();
    let mut doc_summary = Vec::new();
    let mut warnings = Vec::new();
    for &obs in observables {
        // The verdict needs a decreasing sweep; a single step borrows the default one.
        let mut sweep: Vec<f64> = if hs.len() >= 2 { hs.to_vec() } else { default_preservation_steps() };
        sweep.sort_by(|a, b| b.total_cmp(a));
        sweep.dedup();
        let report = preservation_report(m, obs, &sweep, params)?;
        let verdict = report.verdict.to_string();
        doc_summary.push((format!("verdict[{obs}]"), verdict.clone()));
        if let Some(o) = report.fitted_order {
            doc_summary.push((format!("fitted_order[{obs}]"), o.to_string()));
        }
        if let Some(n) = &report.note {
            warnings.push(format!("{}: {n}", m.name()));
        }
        let target = target_coefficient(obs, params);
        for &h in hs {
            let row = match rate_function(m, h, obs, params) {
                Ok(cls) => RateRow {
                    method: m.name().to_string(),
                    observable: obs.to_string(),
                    h,
                    regime: cls.regime.map(|r| regime_label(r).to_string()),
                    coefficient: cls.rate.map(|r| r.coefficient_or_inf()),
                    modified: cls.modified_rate.map(|r| r.coefficient_or_inf()),
                    target,
                    verdict: verdict.clone(),
                    reason: cls.reason,
                },
                Err(e @ Error::Invariant(_)) => return Err(e),
                Err(e) => RateRow {
                    method: m.name().to_string(),
                    observable: obs.to_string(),
                    h,
                    regime: None,
                    coefficient: None,
                    modified: None,
                    target,
                    verdict: verdict.clone(),
                    reason: Some(e.to_string()),
                },
            };
            if let Some(r) = &row.reason {
                warnings.push(format!("{} {obs} h={h}: {r}", m.name()));
            }
            rows.push(row);
        }
    }
    let all_inapplicable = rows.iter().all(|r| r.coefficient.is_none());
    let mut doc = Document::new("rates", rows);
    doc.summary = doc_summary;
    doc.warnings = warnings;
    emit(&doc, output, stdout, stderr)?;
    emit_gnuplot(
        output,
        "h",
        &["modified", "target"],
        &["method", "observable", "h", "regime", "coefficient", "modified", "target", "verdict", "reason"],
        false,
    )?;
    Ok(if all_inapplicable { EXIT_NOT_APPLICABLE } else { EXIT_OK })
}

#[allow(clippy::too_many_arguments)]
fn cmd_prob(
    m: &MethodDef,
    obs: Observable,
    h: f64,
    ns: &[u64],
    lo: f64,
    hi: f64,
    params: &OscillatorParams,
    output: &OutputArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32> {
    params.validate()?;
    let cls = rate_function(m, h, obs, params)?;
    let prediction = cls.rate.map(|r| r.inf_over(lo, hi));
    let mut doc = Document::new("prob", Vec::new());
    if let Some(r) = &cls.reason {
        doc.warnings.push(format!("no rate function: {r}"));
    }
    for &n in ns {
        let law = match obs {
            Observable::MeanPosition => law_a_n(m, h, n, params)?,
            Observable::MeanVelocity => law_b_n(m, h, n, params)?,
        };
        let p = interval_probability(&law, lo, hi)?;
        let ln = p.ln();
        doc.rows.push(ProbRow {
            method: m.name().to_string(),
            observable: obs.to_string(),
            h,
            n,
            lo,
            hi,
            probability: p.value(),
            ln_probability: ln,
            decay: -ln / n as f64,
            prediction,
        });
    }
    emit(&doc, output, stdout, stderr)?;
    emit_gnuplot(
        output,
        "n",
        &["decay", "prediction"],
        &["method", "observable", "h", "n", "lo", "hi", "probability", "ln_probability", "decay", "prediction"],
        false,
    )?;
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    m: &MethodDef,
    h: f64,
    n: u64,
    samples: u64,
    seed: u64,
    paths: bool,
    params: &OscillatorParams,
    output: &OutputArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32> {
    let cfg = SimConfig::new(m.clone(), h, n, samples, seed, *params);
    let res = simulate_paths(&cfg)?;
    if paths {
        let rows = res
            .a_n
            .iter()
            .zip(&res.b_n)
            .enumerate()
            .map(|(i, (&a, &b))| PathRow {
                path: i as u64,
                a_n: a,
                b_n: b,
            })
            .collect();
        emit(&Document::new("simulate", rows), output, stdout, stderr)?;
        return Ok(EXIT_OK);
    }
    let s = &res.summary;
    let laws: [(&str, &crate::sim::SampleStats, GaussianLaw); 3] = [
        ("A_N", &s.a_n, law_a_n(m, h, n, params)?),
        ("B_N", &s.b_n, law_b_n(m, h, n, params)?),
        ("N*A_N", &s.na_n, law_na_n(m, h, n, params)?),
    ];
    let rows = laws
        .iter()
        .map(|(name, st, law)| {
            let (zm, zv) = z_scores(st, law, samples);
            SimRow {
                method: m.name().to_string(),
                h,
                n,
                samples,
                seed,
                statistic: name.to_string(),
                sample_mean: st.mean,
                sample_variance: st.variance,
                exact_mean: law.mean,
                exact_variance: law.variance,
                z_mean: zm,
                z_variance: zv,
            }
        })
        .collect();
    emit(&Document::new("simulate", rows), output, stdout, stderr)?;
    Ok(EXIT_OK)
}

fn cmd_search(
    obs: Observable,
    emit_dir: Option<&Path>,
    params: &OscillatorParams,
    output: &OutputArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32> {
    params.validate()?;
    let probes = default_probe_steps();
    let hits = exact_preservation_search(obs, &default_sigma_grid(), &default_d_grid(), &probes, params);
    if let Some(dir) = emit_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    }
    let mut rows = Vec::new();
    for (k, method) in &hits {
        let file = match emit_dir {
            Some(dir) => {
                let p = dir.join(format!("{}.method", method.name()));
                let text = method.to_file_text().expect("search results carry their source");
                std::fs::write(&p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
                Some(p.display().to_string())
            }
            None => None,
        };
        rows.push(SearchRow {
            name: method.name().to_string(),
            observable: obs.to_string(),
            sigma: k.sigma,
            c11: k.c11,
            c22: k.c22,
            d1: k.d1,
            d2: k.d2,
            matches: matching_catalog_method(method, &probes),
            file,
        });
    }
    let count = rows.len();
    let doc = Document::new("search", rows).with_summary("found", count);
    emit(&doc, output, stdout, stderr)?;
    Ok(EXIT_OK)
}

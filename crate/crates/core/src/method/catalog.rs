use std::f64::consts::PI;
use std::path::Path;

use super::{MethodDef, MethodFile, MethodKind, StepRange};
use crate::error::{Error, Result};
use crate::linalg::{Coefficients, Mat2, Vec2};
use crate::oscillator::Observable::{MeanPosition, MeanVelocity};

fn coeffs(a11: f64, a12: f64, a21: f64, a22: f64, b1: f64, b2: f64) -> Coefficients {
    Coefficients::new(Mat2::new(a11, a12, a21, a22), Vec2::new(b1, b2))
}

fn param_label(x: f64) -> String {
    format!("{x:?}")
}

fn symplectic_range() -> StepRange {
    StepRange::new(0.0, 2.0, "(0, 2)")
}

fn rotation_range() -> StepRange {
    StepRange::new(0.0, PI, "(0, pi)")
}

/// Symplectic beta-method, `beta` in `[0, 1]`; `beta = 1/2` is the midpoint rule.
pub fn beta_method(beta: f64) -> Result<MethodDef> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidMethod {
            method: format!("beta:{beta}"),
            reason: "beta must lie in [0, 1]".into(),
        });
    }
    let m = MethodDef::new(
        format!("beta:{}", param_label(beta)),
        "symplectic beta-method (beta = 1/2 is the midpoint rule)",
        MethodKind::SymplecticCatalog,
        symplectic_range(),
        move |h| {
            let d = 1.0 + beta * (1.0 - beta) * h * h;
            let g = 1.0 - beta;
            coeffs(
                (1.0 - g * g * h * h) / d,
                h / d,
                -h / d,
                (1.0 - beta * beta * h * h) / d,
                g * h / d,
                1.0 / d,
            )
        },
    );
    Ok(if beta == 0.5 {
        m.with_exact_for(&[MeanPosition])
    } else {
        m
    })
}

/// Stochastic theta-method, `theta` in `[0, 1]`; contractive for `theta > 1/2`.
pub fn theta_method(theta: f64) -> Result<MethodDef> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidMethod {
            method: format!("theta:{theta}"),
            reason: "theta must lie in [0, 1]".into(),
        });
    }
    Ok(MethodDef::new(
        format!("theta:{}", param_label(theta)),
        "stochastic theta-method",
        MethodKind::NonSymplecticCatalog,
        StepRange::new(0.0, f64::INFINITY, "(0, inf)"),
        move |h| {
            let d = 1.0 + theta * theta * h * h;
            let diag = (1.0 - (1.0 - theta) * theta * h * h) / d;
            coeffs(diag, h / d, -h / d, diag, theta * h / d, 1.0 / d)
        },
    ))
}

fn exponential() -> MethodDef {
    MethodDef::new(
        "EX",
        "exponential method: exact rotation, noise in the velocity only",
        MethodKind::SymplecticCatalog,
        rotation_range(),
        |h| {
            let (s, c) = h.sin_cos();
            coeffs(c, s, -s, c, 0.0, 1.0)
        },
    )
    .with_exact_for(&[MeanVelocity])
}

fn integral() -> MethodDef {
    MethodDef::new(
        "INT",
        "integral method: exact rotation applied to the noise as well",
        MethodKind::SymplecticCatalog,
        rotation_range(),
        |h| {
            let (s, c) = h.sin_cos();
            coeffs(c, s, -s, c, s, c)
        },
    )
    .with_exact_for(&[MeanVelocity])
}

fn optimal() -> MethodDef {
    MethodDef::new(
        "OPT",
        "optimal method: exact rotation with step-averaged noise weights",
        MethodKind::SymplecticCatalog,
        rotation_range(),
        |h| {
            let (s, c) = h.sin_cos();
            let half = (0.5 * h).sin();
            coeffs(c, s, -s, c, 2.0 * half * half / h, s / h)
        },
    )
    .with_exact_for(&[MeanPosition])
}

fn pc_pem_mr() -> MethodDef {
    MethodDef::new(
        "PC(PEM-MR)",
        "predictor-corrector, Euler predictor with midpoint corrector",
        MethodKind::NonSymplecticCatalog,
        StepRange::new(0.0, 2f64.sqrt(), "(0, sqrt(2))"),
        |h| {
            let d = 1.0 - h * h / 2.0;
            coeffs(d, h * d, -h, d, h / 2.0, 1.0)
        },
    )
}

fn pc_em_bem() -> MethodDef {
    MethodDef::new(
        "PC(EM-BEM)",
        "predictor-corrector, Euler predictor with backward Euler corrector",
        MethodKind::NonSymplecticCatalog,
        StepRange::new(0.0, 1.0, "(0, 1)"),
        |h| coeffs(1.0 - h * h, h, -h, 1.0 - h * h, h, 1.0),
    )
}

fn euler_maruyama() -> MethodDef {
    MethodDef::new(
        "EM",
        "Euler-Maruyama (det(A) = 1 + h^2 > 1, so no LDP regime applies)",
        MethodKind::Baseline,
        StepRange::new(0.0, 1.0, "(0, 1)"),
        |h| coeffs(1.0, h, -h, 1.0, 0.0, 1.0),
    )
}

/// Constructed method `index` in `1..=6`.
fn constructed(index: u8) -> MethodDef {
    let (desc, exact): (&str, &[_]) = match index {
        1..=3 => (
            "constructed symplectic method matching the continuous mean-position rate",
            &[MeanPosition, MeanVelocity],
        ),
        _ => (
            "constructed symplectic method matching the continuous mean-velocity rate",
            &[MeanVelocity],
        ),
    };
    let f: fn(f64) -> Coefficients = match index {
        1 => |h| coeffs(1.0 - h * h, h, -h, 1.0, h / 2.0, 1.0),
        2 => |h| {
            let q = h * h / 2.0;
            coeffs(1.0 - q, h + q, -h + q, 1.0 - q, h / 2.0, 1.0 - h / 2.0)
        },
        3 => |h| {
            let q = h * h / 2.0;
            coeffs(1.0 - q, h - q, -h - q, 1.0 - q, h / 2.0, 1.0 + h / 2.0)
        },
        4 => |h| coeffs(1.0, h, -h, 1.0 - h * h, -h / 2.0, 1.0),
        5 => |h| {
            let q = h * h / 2.0;
            coeffs(1.0 - q, h + q, -h + q, 1.0 - q, -h / 2.0, 1.0 - h / 2.0)
        },
        6 => |h| {
            let q = h * h / 2.0;
            coeffs(1.0 - q, h - q, -h - q, 1.0 - q, -h / 2.0, 1.0 + h / 2.0)
        },
        _ => unreachable!("constructed methods are M1..M6"),
    };
    MethodDef::new(format!("M{index}"), desc, MethodKind::ExactConstruction, symplectic_range(), f)
        .with_exact_for(exact)
}

/// All built-in methods, in display order.
pub fn catalog() -> Vec<MethodDef> {
    let mut v = Vec::new();
    for beta in [0.0, 0.5, 1.0] {
        v.push(beta_method(beta).expect("valid beta"));
    }
    v.push(exponential());
    v.push(integral());
    v.push(optimal());
    for theta in [1.0, 0.75] {
        v.push(theta_method(theta).expect("valid theta"));
    }
    v.push(pc_pem_mr());
    v.push(pc_em_bem());
    v.extend((1..=6).map(constructed));
    v.push(euler_maruyama());
    v
}

fn parse_param(sel: &str, text: &str) -> Result<f64> {
    text.trim()
        .parse::<f64>()
        .map_err(|_| Error::UnknownMethod(format!("{sel} (bad parameter '{text}')")))
}

/// Resolves a method selector.
///
/// Accepted forms: `beta:<x>`, `midpoint`, `theta:<x>`, `ex`, `int`, `opt`,
/// `em`, `pc-pem-mr`, `pc-em-bem`, `m1`..`m6`, any catalog display name
/// (case-insensitive), `file:<path>`, or a path to an existing method file.
pub fn lookup(selector: &str) -> Result<MethodDef> {
    let sel = selector.trim();
    if let Some(path) = sel.strip_prefix("file:") {
        return MethodFile::read(Path::new(path)).map(MethodDef::from_file);
    }
    let lower = sel.to_ascii_lowercase();
    if let Some(p) = lower.strip_prefix("beta:") {
        return beta_method(parse_param(sel, p)?);
    }
    if let Some(p) = lower.strip_prefix("theta:") {
        return theta_method(parse_param(sel, p)?);
    }
    let found = match lower.as_str() {
        "midpoint" => Some(beta_method(0.5)?),
        "ex" | "exponential" => Some(exponential()),
        "int" | "integral" => Some(integral()),
        "opt" | "optimal" => Some(optimal()),
        "em" | "euler-maruyama" => Some(euler_maruyama()),
        "pc-pem-mr" | "pc(pem-mr)" => Some(pc_pem_mr()),
        "pc-em-bem" | "pc(em-bem)" => Some(pc_em_bem()),
        "m1" | "m2" | "m3" | "m4" | "m5" | "m6" => Some(constructed(lower.as_bytes()[1] - b'0')),
        _ => None,
    };
    if let Some(m) = found {
        return Ok(m);
    }
    let path = Path::new(sel);
    if path.is_file() {
        return MethodFile::read(path).map(MethodDef::from_file);
    }
    Err(Error::UnknownMethod(sel.to_string()))
}

//! Plain-text method definitions.
//!
//! One `key = value` pair per line; `#` starts a comment. Keys:
//!
//! ```text
//! name        = free text (required)
//! description = free text (optional)
//! h_min       = constant expression (optional, default 0)
//! h_max       = constant expression (optional, default inf)
//! a11 a12 a21 a22 b1 b2 = expressions in h (all required)
//! ```
//!
//! Expressions follow the grammar in [`super::expr`].

use std::path::Path;

use super::expr::{self, Expr};
use crate::error::{Error, Result};
use crate::linalg::{Coefficients, Mat2, Vec2};

const COEFF_KEYS: [&str; 6] = ["a11", "a12", "a21", "a22", "b1", "b2"];

#[derive(Debug, Clone, PartialEq)]
pub struct MethodFile {
    pub name: String,
    pub description: String,
    pub h_min: f64,
    pub h_max: f64,
    /// `a11, a12, a21, a22, b1, b2`.
    pub exprs: [Expr; 6],
}

impl MethodFile {
    pub fn coefficients(&self, h: f64) -> Coefficients {
        let v: Vec<f64> = self.exprs.iter().map(|e| e.eval(h)).collect();
        Coefficients::new(Mat2::new(v[0], v[1], v[2], v[3]), Vec2::new(v[4], v[5]))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut name = None;
        let mut description = String::new();
        let mut h_min = 0.0;
        let mut h_max = f64::INFINITY;
        let mut exprs: [Option<Expr>; 6] = Default::default();
        let mut seen: Vec<String> = Vec::new();
        let mut last_line = 0;
        let mut saw_content = false;

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            last_line = line;
            let body = raw.split('#').next().unwrap_or("");
            if body.trim().is_empty() {
                continue;
            }
            saw_content = true;
            let indent = body.len() - body.trim_start().len();
            let Some(eq) = body.find('=') else {
                return Err(Error::Parse {
                    line,
                    column: indent + 1,
                    message: "expected 'key = value'".into(),
                });
            };
            let key = body[..eq].trim();
            let value_raw = &body[eq + 1..];
            let value_col = eq + 2 + (value_raw.len() - value_raw.trim_start().len());
            let value = value_raw.trim();
            if seen.iter().any(|k| k == key) {
                return Err(Error::Parse {
                    line,
                    column: indent + 1,
                    message: format!("duplicate key '{key}'"),
                });
            }
            seen.push(key.to_string());
            match key {
                "name" => {
                    if value.is_empty() {
                        return Err(Error::Parse {
                            line,
                            column: value_col,
                            message: "empty name".into(),
                        });
                    }
                    name = Some(value.to_string());
                }
                "description" => description = value.to_string(),
                "h_min" | "h_max" => {
                    let e = expr::parse_at(value, line, value_col)?;
                    if e.depends_on_h() {
                        return Err(Error::Parse {
                            line,
                            column: value_col,
                            message: format!("{key} must not depend on h"),
                        });
                    }
                    let v = e.eval(f64::NAN);
                    if key == "h_min" {
                        h_min = v;
                    } else {
                        h_max = v;
                    }
                }
                _ => match COEFF_KEYS.iter().position(|k| *k == key) {
                    Some(i) => exprs[i] = Some(expr::parse_at(value, line, value_col)?),
                    None => {
                        return Err(Error::Parse {
                            line,
                            column: indent + 1,
                            message: format!("unknown key '{key}'"),
                        })
                    }
                },
            }
        }

        let at_end = |message: String| Error::Parse {
            line: last_line.max(1),
            column: 1,
            message,
        };
        if !saw_content {
            return Err(at_end("empty method file".into()));
        }
        let name = name.ok_or_else(|| at_end("missing key 'name'".into()))?;
        if !(h_min >= 0.0 && h_max > h_min) {
            return Err(at_end(format!("invalid step range ({h_min}, {h_max})")));
        }
        let mut out: Vec<Expr> = Vec::with_capacity(6);
        for (i, e) in exprs.into_iter().enumerate() {
            out.push(e.ok_or_else(|| at_end(format!("missing key '{}'", COEFF_KEYS[i])))?);
        }
        let exprs: [Expr; 6] = out.try_into().expect("six coefficients");
        Ok(MethodFile {
            name,
            description,
            h_min,
            h_max,
            exprs,
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("name = {}\n", self.name));
        if !self.description.is_empty() {
            s.push_str(&format!("description = {}\n", self.description.replace('#', "")));
        }
        s.push_str(&format!("h_min = {}\n", Expr::Num(self.h_min)));
        s.push_str(&format!("h_max = {}\n", Expr::Num(self.h_max)));
        for (k, e) in COEFF_KEYS.iter().zip(&self.exprs) {
            s.push_str(&format!("{k} = {e}\n"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const M1: &str = "\
# first construction
name = M1-copy
description = test copy
h_max = 2
a11 = 1 - h^2
a12 = h
a21 = -h
a22 = 1
b1 = h/2   # half step
b2 = 1
";

    #[test]
    fn parses_and_evaluates() {
        let f = MethodFile::parse(M1).unwrap();
        assert_eq!(f.name, "M1-copy");
        assert_eq!((f.h_min, f.h_max), (0.0, 2.0));
        let c = f.coefficients(1.0);
        assert_eq!(c.a, Mat2::new(0.0, 1.0, -1.0, 1.0));
        assert_eq!(c.b, Vec2::new(0.5, 1.0));
    }

    #[test]
    fn text_round_trip() {
        let f = MethodFile::parse(M1).unwrap();
        let g = MethodFile::parse(&f.to_text()).unwrap();
        assert_eq!(f.name, g.name);
        assert_eq!((f.h_min, f.h_max), (g.h_min, g.h_max));
        for h in [0.1, 0.9, 1.7] {
            assert_eq!(f.coefficients(h), g.coefficients(h));
        }
    }

    fn parse_err(text: &str) -> (usize, usize, String) {
        match MethodFile::parse(text) {
            Err(Error::Parse { line, column, message }) => (line, column, message),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_an_error() {
        let (line, column, msg) = parse_err("");
        assert_eq!((line, column), (1, 1));
        assert!(msg.contains("empty"));
        assert!(parse_err("# only a comment\n\n").2.contains("empty"));
    }

    #[test]
    fn errors_point_at_the_offending_token() {
        let (line, column, _) = parse_err("name = x\na11 = 1 + * h\n");
        assert_eq!((line, column), (2, 11));
        let (line, _, msg) = parse_err("name = x\nfoo = 1\n");
        assert_eq!(line, 2);
        assert!(msg.contains("unknown key"));
        let (_, _, msg) = parse_err("name = x\na11 = 1\n");
        assert!(msg.contains("missing key 'a12'"));
        let (line, _, msg) = parse_err("name = x\nname = y\n");
        assert_eq!(line, 2);
        assert!(msg.contains("duplicate"));
        assert!(parse_err("name = x\nh_max = h\n").2.contains("must not depend"));
        assert!(parse_err("just text\n").2.contains("key = value"));
    }
}

//! The polynomial-set file format.
//!
//! ```text
//! p=5 d=1
//! # optional comments
//! b=2 c=2
//! b=3 c=2
//! b=0 c=3
//! ```
//!
//! The header carries `modulus=<c0>:<c1>:...:<cd>` when d > 1; if omitted
//! the deterministic default modulus is used and echoed back in outputs.
//! Elements use the canonical colon-separated little-endian encoding.

use crate::closure::DISetInstance;
use crate::field::{FieldCtx, FieldError};
use crate::quad::MonicQuad;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: coefficient out of range or wrong length")]
    CoefficientOutOfRange { line: usize },
    #[error("bad modulus: {0}")]
    BadModulus(FieldError),
    #[error("missing header line")]
    MissingHeader,
    #[error("no polynomials in file")]
    Empty,
}

fn parse_header(line: &str, lineno: usize) -> Result<FieldCtx, FormatError> {
    let mut p = None;
    let mut d = None;
    let mut modulus: Option<Vec<u64>> = None;
    for token in line.split_whitespace() {
        let (key, value) = token.split_once('=').ok_or_else(|| FormatError::Parse {
            line: lineno,
            msg: format!("expected key=value, got '{token}'"),
        })?;
        match key {
            "p" => {
                p = Some(value.parse::<u64>().map_err(|_| FormatError::Parse {
                    line: lineno,
                    msg: format!("bad prime '{value}'"),
                })?)
            }
            "d" => {
                d = Some(value.parse::<usize>().map_err(|_| FormatError::Parse {
                    line: lineno,
                    msg: format!("bad degree '{value}'"),
                })?)
            }
            "modulus" => {
                let coeffs: Result<Vec<u64>, _> =
                    value.split(':').map(|t| t.parse::<u64>()).collect();
                modulus = Some(coeffs.map_err(|_| FormatError::Parse {
                    line: lineno,
                    msg: format!("bad modulus '{value}'"),
                })?);
            }
            other => {
                return Err(FormatError::Parse {
                    line: lineno,
                    msg: format!("unknown header key '{other}'"),
                })
            }
        }
    }
    let p = p.ok_or(FormatError::Parse {
        line: lineno,
        msg: "header missing p=".into(),
    })?;
    let d = d.ok_or(FormatError::Parse {
        line: lineno,
        msg: "header missing d=".into(),
    })?;
    match modulus {
        Some(m) => FieldCtx::new(p, d, m).map_err(FormatError::BadModulus),
        None => FieldCtx::with_default_modulus(p, d).map_err(FormatError::BadModulus),
    }
}

fn parse_poly_line(ctx: &FieldCtx, line: &str, lineno: usize) -> Result<MonicQuad, FormatError> {
    let mut b = None;
    let mut c = None;
    for token in line.split_whitespace() {
        let (key, value) = token.split_once('=').ok_or_else(|| FormatError::Parse {
            line: lineno,
            msg: format!("expected b=... c=..., got '{token}'"),
        })?;
        let elem = ctx
            .parse_elem(value)
            .map_err(|_| FormatError::CoefficientOutOfRange { line: lineno })?;
        match key {
            "b" => b = Some(elem),
            "c" => c = Some(elem),
            other => {
                return Err(FormatError::Parse {
                    line: lineno,
                    msg: format!("unknown polynomial key '{other}'"),
                })
            }
        }
    }
    match (b, c) {
        (Some(b), Some(c)) => Ok(MonicQuad { b, c }),
        _ => Err(FormatError::Parse {
            line: lineno,
            msg: "polynomial line needs both b= and c=".into(),
        }),
    }
}

/// Parse a polynomial-set file. Returns the deduplicated instance together
/// with human-readable diagnostics (dropped duplicates).
pub fn parse_poly_set(text: &str) -> Result<(DISetInstance, Vec<String>), FormatError> {
    let mut ctx: Option<FieldCtx> = None;
    let mut polys = Vec::new();
    let mut poly_lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match &ctx {
            None => ctx = Some(parse_header(line, lineno)?),
            Some(c) => {
                polys.push(parse_poly_line(c, line, lineno)?);
                poly_lines.push(lineno);
            }
        }
    }
    let ctx = ctx.ok_or(FormatError::MissingHeader)?;
    if polys.is_empty() {
        return Err(FormatError::Empty);
    }
    let inst = DISetInstance::new(ctx, polys).expect("validated during parse");
    let diagnostics = inst
        .dropped_duplicates
        .iter()
        .map(|&pos| format!("line {}: duplicate polynomial dropped", poly_lines[pos]))
        .collect();
    Ok((inst, diagnostics))
}

/// Emit the canonical polynomial-set file for an instance.
pub fn emit_poly_set(inst: &DISetInstance) -> String {
    let mut out = String::new();
    out.push_str(&inst.ctx.header());
    out.push('\n');
    for f in &inst.polys {
        out.push_str(&format!("b={} c={}\n", f.b, f.c));
    }
    out
}

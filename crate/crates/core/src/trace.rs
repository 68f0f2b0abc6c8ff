//! Per-iteration certificate traces and their CSV form.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::diagnostics::VerificationReport;
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::methods::{Method, PlaneVariant};

/// Column order of the CSV trace.
pub const CSV_HEADER: [&str; 13] = [
    "iter",
    "a",
    "A",
    "a_prime",
    "f_x",
    "f_y",
    "grad_norm",
    "U",
    "L_anchored",
    "G_anchored",
    "Phi",
    "coupling_residual",
    "bound_rhs",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalStatus {
    MaxIters,
    GradTol,
    Exact,
    /// Stopped once `f(y) − f*` reached the requested target (sweeps only).
    TargetGap,
}

impl TerminalStatus {
    pub fn name(&self) -> &'static str {
        match self {
            TerminalStatus::MaxIters => "max_iters",
            TerminalStatus::GradTol => "grad_tol",
            TerminalStatus::Exact => "exact",
            TerminalStatus::TargetGap => "target_gap",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowVectors {
    pub x: Vector,
    pub y: Vector,
    /// Gradient at the query point `x`.
    pub g: Vector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Vector>,
}

/// One iteration. For conjugate gradients, row `k` carries CG's iterate
/// `y_k` and the shadow certificate of index `k − 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    pub a: Option<f64>,
    #[serde(rename = "A")]
    pub big_a: Option<f64>,
    pub a_prime: Option<f64>,
    pub f_x: f64,
    pub f_y: f64,
    pub grad_norm: f64,
    #[serde(rename = "U")]
    pub upper: f64,
    #[serde(rename = "L_anchored")]
    pub lower: Option<f64>,
    #[serde(rename = "G_anchored")]
    pub gap: Option<f64>,
    #[serde(rename = "Phi")]
    pub potential: Option<f64>,
    pub coupling_residual: Option<f64>,
    pub bound_rhs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vectors: Option<RowVectors>,
}

impl TraceRow {
    pub fn has_certificate(&self) -> bool {
        self.potential.is_some()
    }
}

/// Run-level facts the verifier needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plane_variant: Option<PlaneVariant>,
    pub n: usize,
    pub mu: f64,
    #[serde(rename = "L")]
    pub l: f64,
    /// μ used by the weight schedule (0 for the Nemirovski methods).
    pub schedule_mu: Option<f64>,
    pub f_x0: f64,
    pub anchored: bool,
    pub f_star: Option<f64>,
    /// `‖x₀ − x*‖²`
    pub r2: Option<f64>,
    /// Tolerance scale `1 + |f(x₀)| + L‖x₀ − x*‖²` (with `‖∇f(x₀)‖²/L` in
    /// place of the last term when unanchored).
    pub scale: f64,
    pub claims_certificate: bool,
    /// Iterates stay in `x₀ + K_k` (false for the linear-span plane search).
    pub krylov_consistent: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParanoidStats {
    pub max_v_rel_err: f64,
    pub v_at_iter: usize,
    pub max_m_rel_err: f64,
    pub m_at_iter: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub max_abs_diff: f64,
    pub at_iter: usize,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifiedTrace {
    pub meta: TraceMeta,
    pub status: TerminalStatus,
    pub rows: Vec<TraceRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paranoid: Option<ParanoidStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleComparison>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationReport>,
}

/// Metadata stored next to a CSV trace (`<file>.meta.json`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvSidecar {
    pub meta: TraceMeta,
    pub status: TerminalStatus,
}

fn fmt_float(out: &mut String, x: f64) {
    let _ = write!(out, "{x:.16e}");
}

fn fmt_opt(out: &mut String, x: Option<f64>) {
    if let Some(x) = x {
        fmt_float(out, x);
    }
}

impl CertifiedTrace {
    pub fn iterations(&self) -> usize {
        self.rows.len().saturating_sub(1)
    }

    pub fn last(&self) -> &TraceRow {
        self.rows.last().expect("trace has a k = 0 row")
    }

    /// `f(y_K) − f*` for anchored traces.
    pub fn final_gap(&self) -> Option<f64> {
        self.meta.f_star.map(|fs| self.last().f_y - fs)
    }

    pub fn sidecar(&self) -> CsvSidecar {
        CsvSidecar {
            meta: self.meta.clone(),
            status: self.status,
        }
    }

    /// CSV with 17 significant digits per float; absent values are empty fields.
    pub fn to_csv(&self) -> String {
        let mut out = CSV_HEADER.join(",");
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{}", r.k);
            for x in [r.a, r.big_a, r.a_prime] {
                out.push(',');
                fmt_opt(&mut out, x);
            }
            for x in [r.f_x, r.f_y, r.grad_norm, r.upper] {
                out.push(',');
                fmt_float(&mut out, x);
            }
            for x in [r.lower, r.gap, r.potential, r.coupling_residual, r.bound_rhs] {
                out.push(',');
                fmt_opt(&mut out, x);
            }
            out.push('\n');
        }
        out
    }

    /// Reads a CSV trace (scalars only) back, given its sidecar metadata.
    pub fn from_csv(text: &str, sidecar: CsvSidecar) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidInput("empty trace file".into()))?;
        if header.trim() != CSV_HEADER.join(",") {
            return Err(Error::InvalidInput(format!("unexpected CSV header '{header}'")));
        }
        let mut rows = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != CSV_HEADER.len() {
                return Err(Error::InvalidInput(format!(
                    "row {}: expected {} fields, found {}",
                    lineno + 1,
                    CSV_HEADER.len(),
                    fields.len()
                )));
            }
            let opt = |i: usize| -> Result<Option<f64>> {
                if fields[i].is_empty() {
                    Ok(None)
                } else {
                    fields[i].parse::<f64>().map(Some).map_err(|_| {
                        Error::InvalidInput(format!(
                            "row {}: bad {} value '{}'",
                            lineno + 1,
                            CSV_HEADER[i],
                            fields[i]
                        ))
                    })
                }
            };
            let req = |i: usize| -> Result<f64> {
                opt(i)?.ok_or_else(|| {
                    Error::InvalidInput(format!("row {}: missing {}", lineno + 1, CSV_HEADER[i]))
                })
            };
            let k = fields[0]
                .parse::<usize>()
                .map_err(|_| Error::InvalidInput(format!("row {}: bad iter", lineno + 1)))?;
            rows.push(TraceRow {
                k,
                a: opt(1)?,
                big_a: opt(2)?,
                a_prime: opt(3)?,
                f_x: req(4)?,
                f_y: req(5)?,
                grad_norm: req(6)?,
                upper: req(7)?,
                lower: opt(8)?,
                gap: opt(9)?,
                potential: opt(10)?,
                coupling_residual: opt(11)?,
                bound_rhs: opt(12)?,
                vectors: None,
            });
        }
        if rows.is_empty() {
            return Err(Error::InvalidInput("trace has no rows".into()));
        }
        Ok(CertifiedTrace {
            meta: sidecar.meta,
            status: sidecar.status,
            rows,
            paranoid: None,
            oracle: None,
            verification: None,
        })
    }
}

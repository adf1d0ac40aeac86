//! Per-sample simulation log and its CSV form.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub x: Vec<f64>,
    pub e: Vec<f64>,
    pub u: f64,
    pub theta_hat: Vec<f64>,
    pub theta_err_norm: f64,
    /// `||theta_err||` restricted to the channels of the current stage.
    pub theta_err_zeta_norm: f64,
    pub eps_norm: f64,
    pub xi_norm: f64,
    pub sigma_c: f64,
    pub t_e: f64,
    /// Number of excitation stages started so far.
    pub stage: usize,
    pub v_theta: f64,
}

/// Signals kept in memory only (not part of the CSV).
#[derive(Debug, Clone, PartialEq)]
pub struct SampleDiagnostics {
    pub t: f64,
    pub psi: DMatrix<f64>,
    pub q: DVector<f64>,
    /// Index set used for `Psi_zeta` at this sample.
    pub active: Vec<usize>,
    pub sigma_min: Option<f64>,
    pub stage_start: f64,
    pub p: DVector<f64>,
    pub phi: DMatrix<f64>,
    pub phi_s: DMatrix<f64>,
    pub phi_f: DMatrix<f64>,
    pub q_mat: DMatrix<f64>,
    pub q_f: DVector<f64>,
    pub eps: DVector<f64>,
    pub xi: DVector<f64>,
    pub z: DVector<f64>,
    /// `[theta_hat, theta_hat', ..., theta_hat^(n-1)]`.
    pub estimates: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub order: usize,
    pub n_params: usize,
    pub rows: Vec<TraceRow>,
    pub diagnostics: Vec<SampleDiagnostics>,
}

impl Trace {
    pub fn new(order: usize, n_params: usize) -> Self {
        Self {
            order,
            n_params,
            rows: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    pub fn columns(order: usize, n_params: usize) -> Vec<String> {
        let mut cols = vec!["t".to_string()];
        cols.extend((1..=order).map(|i| format!("x{i}")));
        cols.extend((1..=order).map(|i| format!("e{i}")));
        cols.push("u".into());
        cols.extend((1..=n_params).map(|i| format!("theta_hat_{i}")));
        for c in [
            "theta_err_norm",
            "theta_err_zeta_norm",
            "eps_norm",
            "xi_norm",
            "sigma_c",
            "t_e",
            "stage",
            "V_theta",
        ] {
            cols.push(c.into());
        }
        cols
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|r| r.t)
    }

    /// CSV with a header row. Numbers use the shortest representation that
    /// parses back to the same `f64`.
    pub fn to_csv(&self) -> String {
        let mut out = Self::columns(self.order, self.n_params).join(",");
        out.push('\n');
        for r in &self.rows {
            let mut first = true;
            let mut put = |v: &dyn std::fmt::Display| {
                if !first {
                    out.push(',');
                }
                first = false;
                let _ = write!(out, "{v}");
            };
            put(&r.t);
            r.x.iter().for_each(|v| put(v));
            r.e.iter().for_each(|v| put(v));
            put(&r.u);
            r.theta_hat.iter().for_each(|v| put(v));
            put(&r.theta_err_norm);
            put(&r.theta_err_zeta_norm);
            put(&r.eps_norm);
            put(&r.xi_norm);
            put(&r.sigma_c);
            put(&r.t_e);
            put(&r.stage);
            put(&r.v_theta);
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// Parses [`to_csv`](Self::to_csv) output. Diagnostics are not restored.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().ok_or(Error::EmptyTrace)?.split(',').collect();
        let order = header
            .iter()
            .filter(|c| c.strip_prefix('x').is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit())))
            .count();
        let n_params = header.iter().filter(|c| c.starts_with("theta_hat_")).count();
        let expected = Self::columns(order, n_params);
        if header != expected {
            return Err(Error::TraceFormat(format!("unexpected header {}", header.join(","))));
        }
        let mut trace = Trace::new(order, n_params);
        for (idx, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != expected.len() {
                return Err(Error::TraceFormat(format!(
                    "row {} has {} fields, expected {}",
                    idx + 1,
                    fields.len(),
                    expected.len()
                )));
            }
            let num = |i: usize| -> Result<f64> {
                fields[i]
                    .parse::<f64>()
                    .map_err(|e| Error::TraceFormat(format!("row {}, column {}: {e}", idx + 1, expected[i])))
            };
            let mut i = 0;
            let mut take = |k: usize| -> Result<Vec<f64>> {
                let v = (i..i + k).map(&num).collect::<Result<Vec<_>>>();
                i += k;
                v
            };
            let t = take(1)?[0];
            let x = take(order)?;
            let e = take(order)?;
            let u = take(1)?[0];
            let theta_hat = take(n_params)?;
            let rest = take(8)?;
            let stage = fields[1 + 2 * order + 1 + n_params + 6]
                .parse::<usize>()
                .map_err(|e| Error::TraceFormat(format!("row {}, stage: {e}", idx + 1)))?;
            trace.rows.push(TraceRow {
                t,
                x,
                e,
                u,
                theta_hat,
                theta_err_norm: rest[0],
                theta_err_zeta_norm: rest[1],
                eps_norm: rest[2],
                xi_norm: rest[3],
                sigma_c: rest[4],
                t_e: rest[5],
                stage,
                v_theta: rest[7],
            });
        }
        Ok(trace)
    }
}

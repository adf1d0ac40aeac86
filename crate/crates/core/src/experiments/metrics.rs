//! Summary metrics computed from a trace alone.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::experiments::scenario::MetricsConfig;
use crate::experiments::trace::Trace;

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub peak_abs_e1: f64,
    /// RMS of `e1` over the samples in `[t_end - tail, t_end]`.
    pub tail_rms_e1: f64,
    pub checkpoints: Vec<f64>,
    /// `||theta_err||` at the last sample not after each checkpoint (NaN when
    /// the checkpoint precedes the trace).
    pub theta_err_at: Vec<f64>,
    pub theta_err_zeta_at: Vec<f64>,
    pub threshold: f64,
    /// First sample time with `||theta_err|| <= threshold`.
    pub time_to_threshold: Option<f64>,
    pub stage_count: usize,
    pub final_sigma_c: f64,
}

pub fn summarize(trace: &Trace, config: &MetricsConfig) -> Result<MetricsRecord> {
    let last = trace.last().ok_or(Error::EmptyTrace)?;
    let peak_abs_e1 = trace.rows.iter().map(|r| r.e[0].abs()).fold(0.0, f64::max);
    let tail_start = last.t - config.tail;
    let tail: Vec<f64> = trace
        .rows
        .iter()
        .filter(|r| r.t >= tail_start - 1e-9)
        .map(|r| r.e[0])
        .collect();
    let tail_rms_e1 = (tail.iter().map(|e| e * e).sum::<f64>() / tail.len() as f64).sqrt();
    let at = |c: f64, f: fn(&crate::experiments::trace::TraceRow) -> f64| {
        trace
            .rows
            .iter()
            .take_while(|r| r.t <= c + 1e-9 * c.abs().max(1.0))
            .last()
            .map_or(f64::NAN, f)
    };
    Ok(MetricsRecord {
        peak_abs_e1,
        tail_rms_e1,
        checkpoints: config.checkpoints.clone(),
        theta_err_at: config.checkpoints.iter().map(|c| at(*c, |r| r.theta_err_norm)).collect(),
        theta_err_zeta_at: config
            .checkpoints
            .iter()
            .map(|c| at(*c, |r| r.theta_err_zeta_norm))
            .collect(),
        threshold: config.threshold,
        time_to_threshold: trace
            .rows
            .iter()
            .find(|r| r.theta_err_norm <= config.threshold)
            .map(|r| r.t),
        stage_count: last.stage,
        final_sigma_c: last.sigma_c,
    })
}

impl MetricsRecord {
    /// Header plus one data row.
    pub fn to_csv(&self) -> String {
        let mut head = vec!["peak_abs_e1".to_string(), "tail_rms_e1".to_string()];
        head.extend(self.checkpoints.iter().map(|c| format!("theta_err_norm@{c}")));
        head.extend(self.checkpoints.iter().map(|c| format!("theta_err_zeta_norm@{c}")));
        head.push(format!("time_to_theta_err_{}", self.threshold));
        head.push("stage_count".into());
        head.push("final_sigma_c".into());

        let mut row = format!("{},{}", self.peak_abs_e1, self.tail_rms_e1);
        for v in self.theta_err_at.iter().chain(&self.theta_err_zeta_at) {
            let _ = write!(row, ",{v}");
        }
        match self.time_to_threshold {
            Some(t) => {
                let _ = write!(row, ",{t}");
            }
            None => row.push_str(",none"),
        }
        let _ = write!(row, ",{},{}", self.stage_count, self.final_sigma_c);
        format!("{}\n{row}\n", head.join(","))
    }
}

//! Browser bindings for the demo page in `www/`.
//!
//! The `*_native` functions carry the logic and are testable off the browser;
//! the exported wrappers only convert errors.

use std::fmt::Write as _;

use clbc::baselines::ControllerKind;
use clbc::experiments::{builtin, builtin_case3, run_scenario, ScenarioSpec, Trace};
use clbc::numerics::{FilterCascade, Rk4};
use wasm_bindgen::prelude::*;

/// Columns of one simulated run, ready for plotting.
#[wasm_bindgen]
#[derive(Debug, Clone, Default)]
pub struct RunSeries {
    t: Vec<f64>,
    e1: Vec<f64>,
    u: Vec<f64>,
    theta_err: Vec<f64>,
    sigma_c: Vec<f64>,
    summary: String,
    diverged_at: Option<f64>,
}

#[wasm_bindgen]
impl RunSeries {
    #[wasm_bindgen(getter)]
    pub fn t(&self) -> Vec<f64> {
        self.t.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn e1(&self) -> Vec<f64> {
        self.e1.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn u(&self) -> Vec<f64> {
        self.u.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn theta_err(&self) -> Vec<f64> {
        self.theta_err.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn sigma_c(&self) -> Vec<f64> {
        self.sigma_c.clone()
    }

    /// Summary CSV (header and one row), empty for a diverged run.
    #[wasm_bindgen(getter)]
    pub fn summary(&self) -> String {
        self.summary.clone()
    }

    /// Time of the last valid sample when the run blew up.
    #[wasm_bindgen(getter)]
    pub fn diverged_at(&self) -> Option<f64> {
        self.diverged_at
    }
}

fn series_of(trace: &Trace) -> RunSeries {
    RunSeries {
        t: trace.rows.iter().map(|r| r.t).collect(),
        e1: trace.rows.iter().map(|r| r.e[0]).collect(),
        u: trace.rows.iter().map(|r| r.u).collect(),
        theta_err: trace.rows.iter().map(|r| r.theta_err_norm).collect(),
        sigma_c: trace.rows.iter().map(|r| r.sigma_c).collect(),
        ..RunSeries::default()
    }
}

fn scenario(name: &str, controller: &str, kd: f64) -> Result<ScenarioSpec, String> {
    let mut spec = if name == "case3" {
        builtin_case3(kd).map_err(|e| e.to_string())?
    } else {
        let mut s = builtin(name).map_err(|e| e.to_string())?;
        s.kd = vec![kd; s.kd.len()];
        s
    };
    spec.controller = controller.parse().map_err(|e: clbc::Error| e.to_string())?;
    Ok(spec)
}

pub fn simulate_native(name: &str, controller: &str, kd: f64, duration: f64, noise_std: f64) -> Result<RunSeries, String> {
    let mut spec = scenario(name, controller, kd)?;
    spec.duration = duration;
    spec.noise_std = noise_std;
    spec.validate().map_err(|e| e.to_string())?;
    match run_scenario(&spec) {
        Ok((trace, metrics)) => Ok(RunSeries {
            summary: metrics.to_csv(),
            ..series_of(&trace)
        }),
        Err(clbc::Error::Diverged {
            last_valid_time,
            partial,
            ..
        }) => Ok(RunSeries {
            diverged_at: Some(last_valid_time),
            ..series_of(&partial)
        }),
        Err(e) => Err(e.to_string()),
    }
}

/// Runs a preset (`case1`, `case2`, `case3`) with one controller.
#[wasm_bindgen]
pub fn simulate(name: &str, controller: &str, kd: f64, duration: f64, noise_std: f64) -> Result<RunSeries, JsError> {
    simulate_native(name, controller, kd, duration, noise_std).map_err(|e| JsError::new(&e))
}

pub fn compare_damping_native(kd: f64) -> Result<String, String> {
    let mut table = String::from("controller,kd,peak_abs_e1,time_to_theta_err_0.1\n");
    for kind in ControllerKind::ALL {
        let gain = if kind == ControllerKind::Clbc { 0.0 } else { kd };
        let mut spec = builtin_case3(gain).map_err(|e| e.to_string())?;
        spec.controller = kind;
        let (peak, time) = match run_scenario(&spec) {
            Ok((_, m)) => (m.peak_abs_e1.to_string(), m.time_to_threshold.map_or("none".into(), |t| t.to_string())),
            Err(clbc::Error::Diverged { last_valid_time, .. }) => ("inf".into(), format!("diverged at {last_valid_time}")),
            Err(e) => return Err(e.to_string()),
        };
        let _ = writeln!(table, "{kind},{gain},{peak},{time}");
    }
    Ok(table)
}

/// Second-order plant transients: the undamped composite law against both
/// ablations with damping gain `kd`, as CSV.
#[wasm_bindgen]
pub fn compare_damping(kd: f64) -> Result<String, JsError> {
    compare_damping_native(kd).map_err(|e| JsError::new(&e))
}

pub fn filter_step_native(pole: f64, order: usize, duration: f64, dt: f64) -> Result<Vec<f64>, String> {
    if !(dt > 0.0) || !(duration > 0.0) || order == 0 {
        return Err("need dt > 0, duration > 0 and order >= 1".into());
    }
    let cascade = FilterCascade::new(vec![pole; order], 1).map_err(|e| e.to_string())?;
    let mut state = vec![0.0; cascade.state_len()];
    let mut rk = Rk4::new(state.len());
    let steps = (duration / dt).round() as usize;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(0.0);
    for k in 0..steps {
        rk.step(|_, s, d| cascade.derive_into(s, &[1.0], d), &mut state, k as f64 * dt, dt)
            .map_err(|e| e.to_string())?;
        out.push(state[state.len() - 1]);
    }
    Ok(out)
}

/// Unit-step response of `(pole / (s + pole))^order`, sampled every `dt`.
#[wasm_bindgen]
pub fn filter_step(pole: f64, order: usize, duration: f64, dt: f64) -> Result<Vec<f64>, JsError> {
    filter_step_native(pole, order, duration, dt).map_err(|e| JsError::new(&e))
}

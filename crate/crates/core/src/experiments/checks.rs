//! Quick self-checks of the closed loop, runnable from the command line.
//!
//! Each check runs short horizons so the whole set finishes in seconds. The
//! full-length versions live in the acceptance tests.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::backstepping::{Backstepper, ControlGains, JetLayout};
use crate::error::Result;
use crate::experiments::metrics::summarize;
use crate::experiments::scenario::{builtin_case1, builtin_case2, builtin_case3, ScenarioSpec};
use crate::experiments::simulation::{run_scenario, run_scenario_with, RunOptions, Simulation};
use crate::experiments::trace::Trace;
use crate::plant::{benchmark_msd, benchmark_second_order, PlantModel};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn bound(name: &'static str, value: f64, limit: f64) -> Self {
        Self {
            name,
            passed: value <= limit,
            detail: format!("{value:.3e} (limit {limit:.0e})"),
        }
    }

    fn failed(name: &'static str, err: impl std::fmt::Display) -> Self {
        Self {
            name,
            passed: false,
            detail: format!("error: {err}"),
        }
    }
}

/// Largest `|e(t) - exp(Lambda t) e(0)|` over `horizon` seconds with the
/// estimate frozen at the true parameter.
pub fn oracle_loop_error(spec: &ScenarioSpec, horizon: f64) -> Result<f64> {
    let mut spec = spec.clone();
    spec.adaptation = false;
    spec.theta0 = spec.theta.clone();
    spec.noise_std = 0.0;
    spec.disturbance = crate::plant::DisturbanceSpec::None;
    spec.duration = horizon;
    let mut sim = Simulation::new(&spec)?;
    let lambda = sim.controller().backstepper().lambda().clone();
    let e0 = sim.probe()?.eval.e;
    let mut worst: f64 = 0.0;
    while sim.time() < horizon - 0.5 * spec.dt {
        sim.step()?;
        if sim.step_index() % sim.steps_per_sample() == 0 {
            let e = sim.probe()?.eval.e;
            let exact = (&lambda * sim.time()).exp() * &e0;
            worst = worst.max((e - exact).amax());
        }
    }
    Ok(worst)
}

/// Maximum residuals of the swapping and prediction-error identities over a
/// trace recorded with diagnostics: `(p - Phi_s^T theta, eps - Phi_f^T
/// theta_err, xi - Q theta_err)`.
pub fn identity_residuals(trace: &Trace, theta: &DVector<f64>) -> (f64, f64, f64) {
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for d in &trace.diagnostics {
        let theta_hat = d.estimates.column(0).into_owned();
        let err = theta - &theta_hat;
        worst.0 = worst.0.max((&d.p - d.phi_s.tr_mul(theta)).norm());
        worst.1 = worst.1.max((&d.eps - d.phi_f.tr_mul(&err)).norm());
        worst.2 = worst.2.max((&d.xi - &d.q_mat * &err).norm());
    }
    worst
}

/// Largest per-sample increase of `V_theta`.
pub fn max_v_increase(trace: &Trace) -> f64 {
    trace
        .rows
        .windows(2)
        .map(|w| w[1].v_theta - w[0].v_theta)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// The operating-point entry behind jet variable `var`.
fn input_slot<'a>(
    layout: &JetLayout,
    var: usize,
    x: &'a mut [f64],
    lower: &'a mut DMatrix<f64>,
    reference: &'a mut [f64],
) -> &'a mut f64 {
    let np = layout.n_params;
    let depth = layout.order - 1;
    if var < depth {
        &mut x[var]
    } else if var < depth * (1 + np) {
        let k = var - depth;
        &mut lower[(k % np, k / np)]
    } else {
        &mut reference[var - depth * (1 + np)]
    }
}

/// Largest relative error between the jet first partials of every `v_i` and
/// `psi_i` entry and fourth-order central differences, over `points` random
/// operating points.
pub fn jet_partial_error(model: &PlantModel, points: usize, seed: u64) -> Result<f64> {
    let n = model.order();
    let np = model.n_params();
    let stepper = Backstepper::new(model.clone(), ControlGains::new(vec![1.0; n], vec![0.05; n])?)?;
    let layout = stepper.layout();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..points {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let lower = DMatrix::from_fn(np, (n - 1).max(1), |_, j| {
            if j == 0 {
                rng.gen_range(-2.0..2.0)
            } else {
                rng.gen_range(-1.0..1.0)
            }
        });
        let reference: Vec<f64> = (0..=n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let jets = stepper.jets(&x, &lower, &reference)?;
        let values = |x: &[f64], lower: &DMatrix<f64>, reference: &[f64]| -> Result<Vec<f64>> {
            let j = stepper.jets(x, lower, reference)?;
            Ok(j.v.iter().chain(j.psi.iter().flatten()).map(|v| v.value()).collect())
        };
        for var in 0..layout.vars() {
            let shifted = |delta: f64| -> Result<(f64, Vec<f64>)> {
                let (mut xs, mut lo, mut re) = (x.clone(), lower.clone(), reference.clone());
                let slot = input_slot(&layout, var, &mut xs, &mut lo, &mut re);
                let base = *slot;
                *slot += delta;
                Ok((base, values(&xs, &lo, &re)?))
            };
            let base = shifted(0.0)?.0;
            let h = 1e-3 * base.abs().max(1.0);
            let (p2, p1, m1, m2) = (shifted(2.0 * h)?.1, shifted(h)?.1, shifted(-h)?.1, shifted(-2.0 * h)?.1);
            let ad: Vec<f64> = jets
                .v
                .iter()
                .chain(jets.psi.iter().flatten())
                .map(|j| j.first_partial(var))
                .collect();
            for (k, a) in ad.iter().enumerate() {
                let fd = (-p2[k] + 8.0 * p1[k] - 8.0 * m1[k] + m2[k]) / (12.0 * h);
                let scale = a.abs().max(fd.abs());
                if scale > 1e-9 {
                    worst = worst.max((a - fd).abs() / scale);
                }
            }
        }
    }
    Ok(worst)
}

fn short(mut spec: ScenarioSpec, duration: f64) -> ScenarioSpec {
    spec.duration = duration;
    spec
}

/// Runs every quick check.
pub fn run_all() -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    let case1 = builtin_case1();

    out.push(match oracle_loop_error(&case1, 5.0) {
        Ok(v) => CheckOutcome::bound("frozen-estimate loop matches exp(Lambda t) e(0)", v, 1e-5),
        Err(e) => CheckOutcome::failed("frozen-estimate loop matches exp(Lambda t) e(0)", e),
    });

    let mut clean = short(case1.clone(), 10.0);
    clean.noise_std = 0.0;
    match run_scenario_with(&clean, RunOptions { diagnostics: true }) {
        Ok((trace, _)) => {
            let theta = DVector::from_vec(clean.theta.clone());
            let (p, eps, xi) = identity_residuals(&trace, &theta);
            out.push(CheckOutcome::bound("swapping output p = Phi_s^T theta", p, 1e-4));
            out.push(CheckOutcome::bound("eps = Phi_f^T theta_err", eps, 1e-4));
            out.push(CheckOutcome::bound("xi = Q theta_err", xi, 1e-4));
            out.push(CheckOutcome::bound("V_theta non-increasing", max_v_increase(&trace).max(0.0), 1e-8));
        }
        Err(e) => out.push(CheckOutcome::failed("noise-free closed loop", e)),
    }

    for (name, model) in [
        ("jet partials, mass-spring-damper", benchmark_msd()),
        ("jet partials, second-order plant", benchmark_second_order()),
    ] {
        out.push(match jet_partial_error(&model, 20, 7) {
            Ok(v) => CheckOutcome::bound(name, v, 1e-4),
            Err(e) => CheckOutcome::failed(name, e),
        });
    }

    let det = short(builtin_case2(), 3.0);
    out.push(match (run_scenario(&det), run_scenario(&det)) {
        (Ok((a, _)), Ok((b, _))) => CheckOutcome {
            name: "same seed gives identical trace",
            passed: a.to_csv() == b.to_csv(),
            detail: format!("{} rows", a.rows.len()),
        },
        (Err(e), _) | (_, Err(e)) => CheckOutcome::failed("same seed gives identical trace", e),
    });

    let specs = [builtin_case1(), builtin_case2(), builtin_case3(0.1).expect("valid damping")];
    let lossless = specs
        .iter()
        .all(|s| ScenarioSpec::from_config(&s.to_config()).is_ok_and(|back| &back == s));
    out.push(CheckOutcome {
        name: "scenario config round-trip",
        passed: lossless,
        detail: format!("{} presets", specs.len()),
    });

    let m = short(builtin_case3(0.1).expect("valid damping"), 2.0);
    out.push(match run_scenario(&m) {
        Ok((trace, summary)) => {
            let again = Trace::from_csv(&trace.to_csv()).and_then(|t| summarize(&t, &m.metrics));
            CheckOutcome {
                name: "metrics recomputed from CSV",
                passed: again.is_ok_and(|a| a == summary),
                detail: summary.to_csv().lines().nth(1).unwrap_or_default().to_string(),
            }
        }
        Err(e) => CheckOutcome::failed("metrics recomputed from CSV", e),
    });
    out
}

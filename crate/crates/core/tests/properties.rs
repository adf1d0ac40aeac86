//! Closed-loop and numerical invariants checked on runs and random inputs.

use clbc::excitation::{min_singular, sub_matrix};
use clbc::experiments::{builtin, run_scenario, summarize, ReferenceSpec, SampleDiagnostics, ScenarioSpec, Simulation, Trace};
use clbc::numerics::{min_eigenvalue, FilterCascade, Rk4, SlidingWindow};
use clbc::plant::DisturbanceSpec;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

struct Run {
    diags: Vec<SampleDiagnostics>,
    psi_store: Vec<DMatrix<f64>>,
    snapshot_gaps: Vec<f64>,
    sigma_c: Vec<(usize, f64)>,
}

/// Steps a run sample by sample, keeping what the memory exposes.
fn observe(spec: &ScenarioSpec) -> Run {
    let mut sim = Simulation::new(spec).unwrap();
    sim.record_diagnostics(true);
    let mut run = Run {
        diags: Vec::new(),
        psi_store: Vec::new(),
        snapshot_gaps: Vec::new(),
        sigma_c: Vec::new(),
    };
    let steps = (spec.duration / spec.dt).round() as usize;
    let mut snapshot_set = Vec::new();
    for _ in 0..steps {
        if let Some((row, diag)) = sim.advance().unwrap() {
            let mem = sim.memory();
            run.diags.push(diag.unwrap());
            run.psi_store.push(mem.psi_store().clone());
            run.sigma_c.push((row.stage, row.sigma_c));
            if mem.t_e() == row.t {
                snapshot_set = mem.active().to_vec();
            }
            if mem.sigma_c() > mem.sigma() {
                let sub = sub_matrix(mem.psi_store(), &snapshot_set);
                let s = min_singular(&sub).unwrap().unwrap();
                run.snapshot_gaps.push((s - mem.sigma_c()).abs());
            }
        }
    }
    run
}

fn quiet(mut spec: ScenarioSpec, duration: f64) -> ScenarioSpec {
    spec.noise_std = 0.0;
    spec.disturbance = DisturbanceSpec::None;
    spec.duration = duration;
    spec
}

#[test]
fn excitation_matrix_is_psd_and_satisfies_regression() {
    for name in ["case1", "case2"] {
        let spec = quiet(builtin(name).unwrap(), 8.0);
        let theta = DVector::from_vec(spec.theta.clone());
        for d in observe(&spec).diags {
            assert_eq!(d.psi, d.psi.transpose());
            assert!(min_eigenvalue(&d.psi).unwrap().unwrap() >= -1e-12, "{name} t={}", d.t);
            let resid = (&d.psi * &theta - &d.q).norm();
            assert!(resid <= 1e-4 * (1.0 + d.psi.norm()), "{name} t={} resid {resid:e}", d.t);
        }
    }
}

#[test]
fn stored_strength_matches_snapshot_and_is_monotone_within_stages() {
    let spec = builtin("case2").unwrap();
    let run = observe(&ScenarioSpec { duration: 30.0, ..spec });
    assert!(!run.snapshot_gaps.is_empty());
    assert!(run.snapshot_gaps.iter().all(|g| *g == 0.0));
    for w in run.sigma_c.windows(2) {
        if w[0].0 == w[1].0 {
            assert!(w[1].1 >= w[0].1, "{w:?}");
        }
    }
}

#[test]
fn filtered_memory_has_no_jumps() {
    let spec = builtin("case1").unwrap();
    let ts = spec.ts;
    let pole = spec.poles.iter().cloned().fold(0.0, f64::max);
    let run = observe(&ScenarioSpec { duration: 10.0, ..spec });
    let np = run.psi_store[0].nrows();
    // each lag keeps its state within the input range, so every entry moves
    // at most 2 * pole * sup|input| per unit time
    let bound = DMatrix::from_fn(np, np, |i, j| {
        run.psi_store.iter().map(|m| m[(i, j)].abs()).fold(0.0, f64::max) * 2.0 * pole * ts + 1e-12
    });
    for w in run.diags.windows(2) {
        let jump = (&w[1].q_mat - &w[0].q_mat).abs();
        assert!(jump.iter().zip(bound.iter()).all(|(j, b)| j <= b), "t={}", w[1].t);
    }
}

#[test]
fn exact_model_at_rest_stays_at_rest() {
    let mut spec = quiet(builtin("case2").unwrap(), 3.0);
    spec.reference = ReferenceSpec::Sinusoid { amplitude: 0.0, frequency: 1.0 };
    spec.theta0 = spec.theta.clone();
    spec.x0 = vec![0.0; spec.x0.len()];
    let (trace, metrics) = run_scenario(&spec).unwrap();
    assert!(trace.rows.iter().all(|r| r.e.iter().all(|e| *e == 0.0) && r.u == 0.0));
    assert_eq!(metrics.peak_abs_e1, 0.0);
}

#[test]
fn metrics_recompute_from_written_trace() {
    let spec = ScenarioSpec { duration: 4.0, ..builtin("case1").unwrap() };
    let (trace, metrics) = run_scenario(&spec).unwrap();
    let back = Trace::from_csv(&trace.to_csv()).unwrap();
    assert_eq!(summarize(&back, &spec.metrics).unwrap(), metrics);
}

fn brute_trapezoid(samples: &[(f64, Vec<f64>)], width: usize) -> Vec<f64> {
    let mut acc = vec![0.0; width];
    for k in 1..samples.len() {
        let (t0, a) = &samples[k - 1];
        let (t1, b) = &samples[k];
        for i in 0..width {
            acc[i] += 0.5 * (t1 - t0) * (a[i] + b[i]);
        }
    }
    acc
}

proptest! {
    #[test]
    fn cascade_settles_to_input(
        gains in prop::collection::vec(0.5f64..20.0, 1..4),
        input in -3.0f64..3.0,
    ) {
        let cascade = FilterCascade::new(gains.clone(), 1).unwrap();
        let mut state = vec![0.0; cascade.state_len()];
        let mut rk = Rk4::new(state.len());
        let dt = 0.1 / gains.iter().cloned().fold(0.0, f64::max);
        let horizon: f64 = 20.0 * gains.iter().map(|a| 1.0 / a).sum::<f64>();
        let steps = (horizon / dt).ceil() as usize;
        for k in 0..steps {
            rk.step(|_, s, d| cascade.derive_into(s, &[input], d), &mut state, k as f64 * dt, dt).unwrap();
        }
        prop_assert!((state[state.len() - 1] - input).abs() <= 1e-6 * (1.0 + input.abs()));
    }

    #[test]
    fn window_integral_equals_resum(
        steps in prop::collection::vec(0.001f64..0.05, 1..60),
        values in prop::collection::vec(-10.0f64..10.0, 120),
        length in 0.05f64..0.6,
    ) {
        let mut w = SlidingWindow::new(length, 0.01, 2).unwrap();
        let mut t = 0.0;
        let mut pushed = Vec::new();
        for (k, dt) in steps.iter().enumerate() {
            t += dt;
            let s = vec![values[2 * k], values[2 * k + 1]];
            w.push(&s, t).unwrap();
            pushed.push((t, s));
        }
        let kept: Vec<(f64, Vec<f64>)> = w.samples().map(|(t, s)| (t, s.to_vec())).collect();
        prop_assert_eq!(&kept[..], &pushed[pushed.len() - kept.len()..]);
        prop_assert_eq!(w.integral(), &brute_trapezoid(&kept, 2)[..]);
    }

    #[test]
    fn config_text_round_trips(
        kd in 0.0f64..0.99,
        gamma in 0.01f64..100.0,
        kappa in 0.0f64..10.0,
        tau in 0.05f64..5.0,
        noise in 0.0f64..0.1,
        seed in any::<u64>(),
        which in 0usize..3,
    ) {
        let mut spec = builtin(["case1", "case2", "case3"][which]).unwrap();
        spec.kd = vec![kd; spec.kd.len()];
        spec.gamma = vec![gamma; spec.gamma.len()];
        spec.kappa = kappa;
        spec.tau_d = tau;
        spec.noise_std = noise;
        spec.seed = seed;
        let text = spec.to_config();
        let back = ScenarioSpec::from_config(&text).unwrap();
        prop_assert_eq!(&back, &spec);
        prop_assert_eq!(back.to_config(), text);
    }
}

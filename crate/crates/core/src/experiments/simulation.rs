//! Joint fixed-step simulation of plant, reference model, swapping filters
//! and tuner, with the sampled excitation logic on the `T_s` grid.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::backstepping::EstimateBundle;
use crate::baselines::{make_controller, ControlEval, Controller};
use crate::error::{Error, Result};
use crate::excitation::ExcitationMemory;
use crate::experiments::metrics::{summarize, MetricsRecord};
use crate::experiments::scenario::{ReferenceSpec, ScenarioSpec};
use crate::experiments::trace::{SampleDiagnostics, Trace, TraceRow};
use crate::numerics::{gaussian_noise, LtiGenerator, Rk4, SlidingWindow};
use crate::plant::{plant_derivative, PlantModel};
use crate::swapping::{excitation_integrands, output_p, swapping_derivative, SwappingState};
use crate::tuner::lyapunov_v_theta;

/// States beyond this magnitude count as divergence.
const BLOW_UP: f64 = 1e8;

#[derive(Debug, Clone, Copy)]
struct Layout {
    n: usize,
    np: usize,
    gen: usize,
    tuner: usize,
}

impl Layout {
    fn x(&self) -> std::ops::Range<usize> {
        0..self.n
    }
    fn gen(&self) -> std::ops::Range<usize> {
        let s = self.n;
        s..s + self.gen
    }
    fn zeta(&self) -> std::ops::Range<usize> {
        let s = self.gen().end;
        s..s + self.n
    }
    fn phi_s(&self) -> std::ops::Range<usize> {
        let s = self.zeta().end;
        s..s + self.np * self.n
    }
    fn tuner(&self) -> std::ops::Range<usize> {
        let s = self.phi_s().end;
        s..s + self.tuner
    }
    fn theta(&self) -> std::ops::Range<usize> {
        let s = self.tuner().end;
        s..s + self.np
    }
    fn len(&self) -> usize {
        self.theta().end
    }
}

/// Controller-side view of the closed loop at the current state.
#[derive(Debug, Clone)]
pub struct Probe {
    pub t: f64,
    /// True plant state.
    pub x: Vec<f64>,
    /// State as seen by the controller (with measurement noise).
    pub x_measured: Vec<f64>,
    /// `y_r, ..., y_r^(n)`.
    pub reference: Vec<f64>,
    pub eval: ControlEval,
    pub swapping: SwappingState,
    pub p: DVector<f64>,
}

impl Probe {
    pub fn theta_hat(&self) -> DVector<f64> {
        self.eval.estimates.derivative(0)
    }
}

/// A closed-loop run that can be advanced one integration step at a time.
#[derive(Debug, Clone)]
pub struct Simulation {
    spec: ScenarioSpec,
    model: PlantModel,
    controller: Controller,
    generator: Option<LtiGenerator>,
    layout: Layout,
    state: Vec<f64>,
    step_index: usize,
    steps_per_sample: usize,
    rk: Rk4,
    rng: ChaCha8Rng,
    noise: Vec<f64>,
    memory: ExcitationMemory,
    psi_window: SlidingWindow,
    q_window: SlidingWindow,
    record_diagnostics: bool,
}

impl Simulation {
    pub fn new(spec: &ScenarioSpec) -> Result<Self> {
        spec.validate()?;
        let model = spec.plant_model()?;
        let controller = make_controller(spec.controller, &model, &spec.controller_params())?;
        let (n, np) = (model.order(), model.n_params());
        let generator = match &spec.reference {
            ReferenceSpec::Model { gain, denominator, .. } => Some(LtiGenerator::new(*gain, denominator.clone())?),
            ReferenceSpec::Sinusoid { .. } => None,
        };
        let layout = Layout {
            n,
            np,
            gen: generator.as_ref().map_or(0, LtiGenerator::degree),
            tuner: controller.tuner().state_len(),
        };
        let mut sim = Self {
            model,
            controller,
            generator,
            layout,
            state: vec![0.0; layout.len()],
            step_index: 0,
            steps_per_sample: spec.steps_per_sample(),
            rk: Rk4::new(layout.len()),
            rng: ChaCha8Rng::seed_from_u64(spec.seed),
            noise: vec![0.0; n],
            memory: ExcitationMemory::new(np, spec.sigma, spec.mu, spec.tau_d)?,
            psi_window: SlidingWindow::new(spec.tau_d, spec.ts, np * np)?,
            q_window: SlidingWindow::new(spec.tau_d, spec.ts, np)?,
            record_diagnostics: false,
            spec: spec.clone(),
        };
        sim.initialize()?;
        Ok(sim)
    }

    /// Keep per-sample [`SampleDiagnostics`] in the trace rows produced by [`advance`](Self::advance).
    pub fn record_diagnostics(&mut self, on: bool) {
        self.record_diagnostics = on;
    }

    fn initialize(&mut self) -> Result<()> {
        let lay = self.layout;
        self.state[lay.x()].copy_from_slice(&self.spec.x0);
        self.state[lay.theta()].copy_from_slice(&self.spec.theta0);
        self.resample_noise();
        let x_meas = self.measured(&self.state[lay.x()]);
        let reference = self.reference_taps(0.0, &self.state)?;
        let n = lay.n;
        let mut lower = DMatrix::zeros(lay.np, (n - 1).max(1));
        lower.set_column(0, &DVector::from_column_slice(&self.spec.theta0));
        let e0 = self
            .controller
            .backstepper()
            .prepare(&x_meas, &lower, &reference)?
            .e()
            .clone();
        let swap = SwappingState::new(&e0, lay.np);
        self.state[lay.zeta()].copy_from_slice(swap.zeta.as_slice());
        self.state[lay.phi_s()].copy_from_slice(swap.phi_s.as_slice());
        let tuner0 = self.controller.tuner().initial_states(&e0)?;
        self.state[lay.tuner()].copy_from_slice(&tuner0);
        Ok(())
    }

    pub fn spec(&self) -> &ScenarioSpec {
        &self.spec
    }

    pub fn model(&self) -> &PlantModel {
        &self.model
    }

    pub fn controller(&self) -> &Controller {
        &self.controller
    }

    pub fn memory(&self) -> &ExcitationMemory {
        &self.memory
    }

    pub fn time(&self) -> f64 {
        self.step_index as f64 * self.spec.dt
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    pub fn steps_per_sample(&self) -> usize {
        self.steps_per_sample
    }

    /// The flat joint state.
    pub fn state(&self) -> &[f64] {
        &self.state
    }

    fn resample_noise(&mut self) {
        let std = self.spec.noise_std;
        for v in self.noise.iter_mut() {
            *v = gaussian_noise(std, &mut self.rng);
        }
    }

    fn measured(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.noise).map(|(a, b)| a + b).collect()
    }

    fn reference_taps(&self, t: f64, state: &[f64]) -> Result<Vec<f64>> {
        let n = self.layout.n;
        match (&self.spec.reference, &self.generator) {
            (ReferenceSpec::Sinusoid { amplitude, frequency }, _) => {
                Ok(ReferenceSpec::sinusoid_taps(*amplitude, *frequency, t, n))
            }
            (ReferenceSpec::Model { input, .. }, Some(gen)) => {
                let mut taps = gen.taps_of(&state[self.layout.gen()], input.value(t));
                taps.truncate(n + 1);
                Ok(taps)
            }
            (ReferenceSpec::Model { .. }, None) => unreachable!("generator exists for model references"),
        }
    }

    fn swapping_of(&self, state: &[f64]) -> SwappingState {
        let lay = self.layout;
        SwappingState {
            zeta: DVector::from_column_slice(&state[lay.zeta()]),
            phi_s: DMatrix::from_column_slice(lay.np, lay.n, &state[lay.phi_s()]),
        }
    }

    fn evaluate(&self, t: f64, state: &[f64]) -> Result<(Vec<f64>, Vec<f64>, ControlEval)> {
        let lay = self.layout;
        let x_meas = self.measured(&state[lay.x()]);
        let reference = self.reference_taps(t, state)?;
        let theta_hat = DVector::from_column_slice(&state[lay.theta()]);
        let eval = self.controller.evaluate(
            &x_meas,
            &reference,
            &theta_hat,
            &state[lay.tuner()],
            self.spec.adaptation,
        )?;
        Ok((x_meas, reference, eval))
    }

    fn field(&self, t: f64, state: &[f64], out: &mut [f64]) -> Result<()> {
        let lay = self.layout;
        let (_, _, eval) = self.evaluate(t, state)?;
        let x = &state[lay.x()];
        let d = self.spec.disturbance.sample(t, lay.n);
        let dx = plant_derivative(&self.model, x, eval.u, d.as_slice())?;
        out[lay.x()].copy_from_slice(dx.as_slice());
        if let (Some(gen), ReferenceSpec::Model { input, .. }) = (&self.generator, &self.spec.reference) {
            gen.derive_into(&state[lay.gen()], input.value(t), &mut out[lay.gen()])?;
        }
        let theta_hat = eval.estimates.derivative(0);
        let (zeta_dot, phi_s_dot) =
            swapping_derivative(self.controller.backstepper().lambda(), &self.swapping_of(state), &eval.phi, &theta_hat)?;
        out[lay.zeta()].copy_from_slice(zeta_dot.as_slice());
        out[lay.phi_s()].copy_from_slice(phi_s_dot.as_slice());
        self.controller.filter_derivatives(
            &eval,
            &state[lay.tuner()],
            self.memory.psi_store(),
            self.memory.q_store(),
            &mut out[lay.tuner()],
        )?;
        out[lay.theta()].copy_from_slice(eval.theta_dot().as_slice());
        Ok(())
    }

    /// Controller signals at the current state.
    pub fn probe(&self) -> Result<Probe> {
        let t = self.time();
        let (x_measured, reference, eval) = self.evaluate(t, &self.state)?;
        let swapping = self.swapping_of(&self.state);
        let p = output_p(&eval.e, &swapping.zeta);
        Ok(Probe {
            t,
            x: self.state[self.layout.x()].to_vec(),
            x_measured,
            reference,
            eval,
            swapping,
            p,
        })
    }

    /// Integrates one `dt` step. Does not run the sampled logic.
    pub fn step(&mut self) -> Result<()> {
        let t = self.time();
        let h = self.spec.dt;
        let mut state = std::mem::take(&mut self.state);
        let mut rk = std::mem::replace(&mut self.rk, Rk4::new(0));
        let this = &*self;
        let res = rk.step(|tt, s, d| this.field(tt, s, d), &mut state, t, h);
        self.state = state;
        self.rk = rk;
        res?;
        self.step_index += 1;
        if let Some(v) = self.state.iter().find(|v| v.abs() > BLOW_UP) {
            return Err(Error::BlowUp {
                magnitude: *v,
                limit: BLOW_UP,
                time: self.time(),
            });
        }
        Ok(())
    }

    /// Sampled logic at the current time: noise resampling, window update,
    /// staged exciting-strength maximization and one trace row.
    pub fn sample(&mut self) -> Result<(TraceRow, Option<SampleDiagnostics>)> {
        if self.step_index > 0 {
            self.resample_noise();
        }
        let probe = self.probe()?;
        let t = probe.t;
        let (gram, aux) = excitation_integrands(&probe.swapping.phi_s, &probe.p);
        let np = self.layout.np;
        let psi = DMatrix::from_column_slice(np, np, self.psi_window.push(gram.as_slice(), t)?);
        // the trapezoid sum of symmetric samples can differ from its transpose by rounding
        let psi = DMatrix::from_fn(np, np, |i, j| if i <= j { psi[(i, j)] } else { psi[(j, i)] });
        let q = DVector::from_column_slice(self.q_window.push(aux.as_slice(), t)?);
        let outcome = self.memory.staged_update(&psi, &q, t)?;

        let theta = self.model.theta();
        let theta_hat = probe.theta_hat();
        let err = theta - &theta_hat;
        let zeta_err = self.memory.stage_set().iter().fold(0.0, |acc, j| acc + err[*j] * err[*j]).sqrt();
        let row = TraceRow {
            t,
            x: probe.x.clone(),
            e: probe.eval.e.as_slice().to_vec(),
            u: probe.eval.u,
            theta_hat: theta_hat.as_slice().to_vec(),
            theta_err_norm: err.norm(),
            theta_err_zeta_norm: zeta_err,
            eps_norm: probe.eval.eps.norm(),
            xi_norm: probe.eval.xi.norm(),
            sigma_c: self.memory.sigma_c(),
            t_e: self.memory.t_e(),
            stage: self.memory.stages(),
            v_theta: lyapunov_v_theta(&err, self.controller.tuner().gamma()),
        };
        let diag = self.record_diagnostics.then(|| SampleDiagnostics {
            t,
            psi,
            q,
            active: outcome.active,
            sigma_min: outcome.sigma_min,
            stage_start: self.memory.stage_start(),
            p: probe.p.clone(),
            phi: probe.eval.phi.clone(),
            phi_s: probe.swapping.phi_s.clone(),
            phi_f: probe.eval.phi_f().clone(),
            q_mat: probe.eval.q_mat().clone(),
            q_f: probe.eval.taps.q_vec[0].clone(),
            eps: probe.eval.eps.clone(),
            xi: probe.eval.xi.clone(),
            z: probe.eval.z.clone(),
            estimates: probe.eval.estimates.0.clone(),
        });
        Ok((row, diag))
    }

    /// One integration step, followed by the sampled logic when the new time
    /// lies on the `T_s` grid.
    pub fn advance(&mut self) -> Result<Option<(TraceRow, Option<SampleDiagnostics>)>> {
        self.step()?;
        if self.step_index % self.steps_per_sample == 0 {
            return self.sample().map(Some);
        }
        Ok(None)
    }

    /// Estimate bundle at the current state.
    pub fn estimates(&self) -> Result<EstimateBundle> {
        Ok(self.probe()?.eval.estimates)
    }
}

/// Options beyond the scenario itself.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub diagnostics: bool,
}

pub fn run_scenario(spec: &ScenarioSpec) -> Result<(Trace, MetricsRecord)> {
    run_scenario_with(spec, RunOptions::default())
}

pub fn run_scenario_with(spec: &ScenarioSpec, options: RunOptions) -> Result<(Trace, MetricsRecord)> {
    let mut sim = Simulation::new(spec)?;
    sim.record_diagnostics(options.diagnostics);
    let mut trace = Trace::new(sim.layout.n, sim.layout.np);
    let push = |trace: &mut Trace, (row, diag): (TraceRow, Option<SampleDiagnostics>)| {
        trace.rows.push(row);
        if let Some(d) = diag {
            trace.diagnostics.push(d);
        }
    };
    let diverged = |trace: Trace, e: Error| {
        let last_valid_time = trace.last().map_or(0.0, |r| r.t);
        log::warn!("run aborted after t = {last_valid_time}: {e}");
        Error::Diverged {
            last_valid_time,
            reason: e.to_string(),
            partial: Box::new(trace),
        }
    };
    match sim.sample() {
        Ok(s) => push(&mut trace, s),
        Err(e) => return Err(diverged(trace, e)),
    }
    for _ in 0..spec.total_steps() {
        match sim.advance() {
            Ok(Some(s)) => push(&mut trace, s),
            Ok(None) => {}
            Err(e) => return Err(diverged(trace, e)),
        }
    }
    let metrics = summarize(&trace, &spec.metrics)?;
    Ok((trace, metrics))
}

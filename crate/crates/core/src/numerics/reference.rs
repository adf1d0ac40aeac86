//! Reference trajectories with derivatives: `y_r = a0 / a(s) [r]`.

use crate::error::{Error, Result};
use crate::numerics::Rk4;

/// Chain-of-integrators realization of `a0 / a(s)` with monic `a(s)` of degree `d`.
///
/// The state is `(y_r, y_r', ..., y_r^(d-1))`; the last tap `y_r^(d)` is the
/// derivative of the last state and depends on the current input.
#[derive(Debug, Clone, PartialEq)]
pub struct LtiGenerator {
    /// `a(s)` coefficients, highest power first, leading entry 1.
    denominator: Vec<f64>,
    gain: f64,
    state: Vec<f64>,
    time: f64,
}

impl LtiGenerator {
    pub fn new(gain: f64, denominator: Vec<f64>) -> Result<Self> {
        if denominator.len() < 2 {
            return Err(Error::invalid("reference model denominator needs degree >= 1"));
        }
        if denominator[0] != 1.0 {
            return Err(Error::invalid(format!(
                "reference model denominator must be monic, leading coefficient is {}",
                denominator[0]
            )));
        }
        if !gain.is_finite() || denominator.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("reference model coefficients must be finite"));
        }
        let d = denominator.len() - 1;
        Ok(Self {
            denominator,
            gain,
            state: vec![0.0; d],
            time: 0.0,
        })
    }

    pub fn degree(&self) -> usize {
        self.denominator.len() - 1
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn denominator(&self) -> &[f64] {
        &self.denominator
    }

    pub fn state(&self) -> &[f64] {
        &self.state
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Steady output for a constant input `r`, i.e. `a0 r / a(0)`.
    pub fn dc_output(&self, r: f64) -> f64 {
        self.gain * r / self.denominator[self.degree()]
    }

    /// Highest derivative `y_r^(d)` from the chain state and current input.
    fn top_derivative(&self, state: &[f64], r: f64) -> f64 {
        let d = self.degree();
        // a(s) = s^d + c[1] s^(d-1) + ... + c[d]; state[k] multiplies c[d - k].
        let feedback: f64 = (0..d).map(|k| self.denominator[d - k] * state[k]).sum();
        self.gain * r - feedback
    }

    pub fn derive_into(&self, state: &[f64], r: f64, out: &mut [f64]) -> Result<()> {
        let d = self.degree();
        if state.len() != d || out.len() != d {
            return Err(Error::Shape {
                expected: d,
                actual: state.len().min(out.len()),
            });
        }
        out[..d - 1].copy_from_slice(&state[1..]);
        out[d - 1] = self.top_derivative(state, r);
        Ok(())
    }

    /// `[y_r, y_r', ..., y_r^(d)]` for a chain state and current input.
    pub fn taps_of(&self, state: &[f64], r: f64) -> Vec<f64> {
        let mut taps = state.to_vec();
        taps.push(self.top_derivative(state, r));
        taps
    }

    pub fn taps(&self, r: f64) -> Vec<f64> {
        self.taps_of(&self.state, r)
    }

    /// Integrates one RK4 step with the input evaluated as a function of time,
    /// then returns all taps at the new time.
    pub fn step_with<R: Fn(f64) -> f64>(&mut self, r: R, h: f64) -> Result<Vec<f64>> {
        if !r(self.time).is_finite() {
            return Err(Error::NonFinite {
                what: "reference input",
                time: self.time,
            });
        }
        let mut rk = Rk4::new(self.degree());
        let mut state = std::mem::take(&mut self.state);
        let this = &*self;
        let res = rk.step(|t, s, d| this.derive_into(s, r(t), d), &mut state, self.time, h);
        self.state = state;
        res?;
        self.time += h;
        Ok(self.taps(r(self.time)))
    }

    /// One step with the input held constant.
    pub fn step(&mut self, r: f64, h: f64) -> Result<Vec<f64>> {
        self.step_with(|_| r, h)
    }
}

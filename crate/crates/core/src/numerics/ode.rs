//! Fixed-step classical Runge-Kutta integration.

use crate::error::{Error, Result};

/// Reusable RK4 stepper; holds the stage buffers for one state dimension.
#[derive(Debug, Clone)]
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    scratch: Vec<f64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        Self {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            scratch: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.k1.len()
    }

    /// Advances `state` from `t` to `t + h` in place.
    ///
    /// The field writes the derivative into its third argument. A non-finite
    /// derivative at any stage aborts the step and leaves `state` untouched.
    pub fn step<F>(&mut self, mut field: F, state: &mut [f64], t: f64, h: f64) -> Result<()>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    {
        if state.len() != self.dim() {
            return Err(Error::Shape {
                expected: self.dim(),
                actual: state.len(),
            });
        }
        if !(h > 0.0) {
            return Err(Error::invalid(format!("step size must be positive, got {h}")));
        }
        let half = 0.5 * h;

        field(t, state, &mut self.k1)?;
        check_finite(&self.k1, t)?;
        for i in 0..state.len() {
            self.scratch[i] = state[i] + half * self.k1[i];
        }
        field(t + half, &self.scratch, &mut self.k2)?;
        check_finite(&self.k2, t + half)?;
        for i in 0..state.len() {
            self.scratch[i] = state[i] + half * self.k2[i];
        }
        field(t + half, &self.scratch, &mut self.k3)?;
        check_finite(&self.k3, t + half)?;
        for i in 0..state.len() {
            self.scratch[i] = state[i] + h * self.k3[i];
        }
        field(t + h, &self.scratch, &mut self.k4)?;
        check_finite(&self.k4, t + h)?;

        let sixth = h / 6.0;
        for i in 0..state.len() {
            state[i] += sixth * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
        Ok(())
    }
}

fn check_finite(v: &[f64], time: f64) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite {
            what: "vector field",
            time,
        })
    }
}

/// One classical RK4 step of `field` from `(t, state)` with step `h`.
pub fn rk4_step<F>(field: F, state: &[f64], t: f64, h: f64) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let mut next = state.to_vec();
    Rk4::new(state.len()).step(field, &mut next, t, h)?;
    Ok(next)
}

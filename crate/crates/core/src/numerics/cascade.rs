//! Cascades of unity-gain first-order lags with exact derivative taps.
//!
//! A cascade of `m` stages realizes `H(s) = prod_j a_j / (s + a_j)` on every
//! element of its input independently:
//!
//! ```text
//! x_j' = a_j (u_j - x_j),   u_1 = input,   u_{j+1} = x_j
//! ```
//!
//! The output is the last stage. Because `H` has relative degree `m`, the
//! derivatives `y', ..., y^(m-1)` are algebraic in the stage states and
//! `y^(m)` additionally needs the instantaneous input.
//!
//! State layout for the slice-based methods is stage-major: stage `j`
//! occupies `states[j * width..(j + 1) * width]`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FilterCascade {
    gains: Vec<f64>,
    width: usize,
    states: Vec<f64>,
}

impl FilterCascade {
    /// New cascade with zero initial states. `width` is the number of input
    /// elements (1 for scalars, `rows * cols` for matrices in column-major order).
    pub fn new(gains: Vec<f64>, width: usize) -> Result<Self> {
        if let Some(bad) = gains.iter().find(|a| !(**a > 0.0) || !a.is_finite()) {
            return Err(Error::invalid(format!("filter stage gain must be positive, got {bad}")));
        }
        let states = vec![0.0; gains.len() * width];
        Ok(Self { gains, width, states })
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn order(&self) -> usize {
        self.gains.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Number of scalar states (`order * width`).
    pub fn state_len(&self) -> usize {
        self.gains.len() * self.width
    }

    pub fn states(&self) -> &[f64] {
        &self.states
    }

    pub fn states_mut(&mut self) -> &mut [f64] {
        &mut self.states
    }

    /// Sets every stage to `value`, the steady state for a held input equal to `value`.
    pub fn hold_at(&mut self, value: &[f64]) -> Result<()> {
        self.check_input(value)?;
        for stage in self.states.chunks_mut(self.width.max(1)) {
            stage.copy_from_slice(value);
        }
        Ok(())
    }

    /// Current output `H[u]` (the input itself when the cascade has no stages).
    pub fn output<'a>(&'a self, input: &'a [f64]) -> &'a [f64] {
        output_of(&self.gains, self.width, &self.states, input)
    }

    /// Per-stage state derivatives for the current states.
    pub fn derive(&self, input: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.state_len()];
        self.derive_into(&self.states, input, &mut out)?;
        Ok(out)
    }

    /// Slice form of [`derive`](Self::derive) for states held outside the struct.
    pub fn derive_into(&self, states: &[f64], input: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_input(input)?;
        self.check_states(states)?;
        self.check_states(out)?;
        let w = self.width;
        for (j, &a) in self.gains.iter().enumerate() {
            for k in 0..w {
                let upstream = if j == 0 { input[k] } else { states[(j - 1) * w + k] };
                out[j * w + k] = a * (upstream - states[j * w + k]);
            }
        }
        Ok(())
    }

    /// `[y, y', ..., y^(max_order)]` for the current states.
    pub fn output_derivatives(&self, input: &[f64], max_order: usize) -> Result<Vec<Vec<f64>>> {
        self.taps_of(&self.states, input, max_order)
    }

    /// Slice form of [`output_derivatives`](Self::output_derivatives).
    ///
    /// Tap `k` equals `s^k H[u]`. Taps below the cascade order ignore `input`.
    pub fn taps_of(&self, states: &[f64], input: &[f64], max_order: usize) -> Result<Vec<Vec<f64>>> {
        let m = self.order();
        if max_order > m {
            return Err(Error::TapOrder {
                requested: max_order,
                order: m,
            });
        }
        self.check_input(input)?;
        self.check_states(states)?;
        let w = self.width;
        // table[j][k] = k-th derivative of stage j (stage 0 is the input),
        // only defined for k <= j.
        let mut table: Vec<Vec<Vec<f64>>> = Vec::with_capacity(m + 1);
        table.push(vec![input.to_vec()]);
        for j in 1..=m {
            let a = self.gains[j - 1];
            let depth = j.min(max_order);
            let mut row = Vec::with_capacity(depth + 1);
            row.push(states[(j - 1) * w..j * w].to_vec());
            for k in 1..=depth {
                let up = &table[j - 1][k - 1];
                let own: &Vec<f64> = &row[k - 1];
                let next: Vec<f64> = up.iter().zip(own).map(|(u, x)| a * (u - x)).collect();
                row.push(next);
            }
            table.push(row);
        }
        let mut last = table.pop().unwrap_or_default();
        last.truncate(max_order + 1);
        Ok(last)
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.width {
            return Err(Error::Shape {
                expected: self.width,
                actual: input.len(),
            });
        }
        Ok(())
    }

    fn check_states(&self, states: &[f64]) -> Result<()> {
        if states.len() != self.state_len() {
            return Err(Error::Shape {
                expected: self.state_len(),
                actual: states.len(),
            });
        }
        Ok(())
    }
}

fn output_of<'a>(gains: &[f64], width: usize, states: &'a [f64], input: &'a [f64]) -> &'a [f64] {
    match gains.len() {
        0 => input,
        m => &states[(m - 1) * width..m * width],
    }
}

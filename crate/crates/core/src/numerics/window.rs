//! Sliding-window trapezoidal integral over uniformly sampled vector signals.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Trapezoidal integral of the last `window_length` seconds of a sampled signal.
///
/// Before a full window has been collected the integral spans from the first
/// sample, so the window grows from zero length.
#[derive(Debug, Clone)]
pub struct SlidingWindow {
    window_length: f64,
    sample_period: f64,
    width: usize,
    capacity: usize,
    samples: VecDeque<(f64, Vec<f64>)>,
    integral: Vec<f64>,
}

impl SlidingWindow {
    pub fn new(window_length: f64, sample_period: f64, width: usize) -> Result<Self> {
        if !(sample_period > 0.0) || !(window_length >= sample_period) {
            return Err(Error::invalid(format!(
                "window needs 0 < T_s <= tau_d, got T_s = {sample_period}, tau_d = {window_length}"
            )));
        }
        let capacity = window_capacity(window_length, sample_period);
        Ok(Self {
            window_length,
            sample_period,
            width,
            capacity,
            samples: VecDeque::with_capacity(capacity),
            integral: vec![0.0; width],
        })
    }

    pub fn window_length(&self) -> f64 {
        self.window_length
    }

    pub fn sample_period(&self) -> f64 {
        self.sample_period
    }

    /// Maximum number of buffered samples, `ceil(tau_d / T_s) + 1`.
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn integral(&self) -> &[f64] {
        &self.integral
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, &[f64])> {
        self.samples.iter().map(|(t, s)| (*t, s.as_slice()))
    }

    /// Appends a sample taken at `t` and returns the updated integral.
    pub fn push(&mut self, sample: &[f64], t: f64) -> Result<&[f64]> {
        if sample.len() != self.width {
            return Err(Error::Shape {
                expected: self.width,
                actual: sample.len(),
            });
        }
        if let Some((last, _)) = self.samples.back() {
            if !(t > *last) {
                return Err(Error::OutOfOrder { time: t, last: *last });
            }
        }
        if self.samples.len() == self.capacity {
            self.samples.pop_front();
        }
        self.samples.push_back((t, sample.to_vec()));
        self.resum();
        Ok(&self.integral)
    }

    pub fn reset(&mut self) {
        self.samples.clear();
        self.integral.fill(0.0);
    }

    fn resum(&mut self) {
        self.integral.fill(0.0);
        for ((t0, a), (t1, b)) in self.samples.iter().zip(self.samples.iter().skip(1)) {
            let half = 0.5 * (t1 - t0);
            for ((acc, x), y) in self.integral.iter_mut().zip(a).zip(b) {
                *acc += half * (x + y);
            }
        }
    }
}

/// `ceil(tau_d / T_s) + 1`, treating ratios within 1e-9 of an integer as exact.
pub fn window_capacity(window_length: f64, sample_period: f64) -> usize {
    let ratio = window_length / sample_period;
    let nearest = ratio.round();
    let intervals = if (ratio - nearest).abs() < 1e-9 * ratio.max(1.0) {
        nearest
    } else {
        ratio.ceil()
    };
    intervals as usize + 1
}

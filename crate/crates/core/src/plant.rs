//! Strict-feedback plants
//!
//! ```text
//! x_i' = phi_i(x_1..x_i)^T theta + x_{i+1} + d_i,   i < n
//! x_n' = phi_n(x)^T theta + beta(x) u + d_n
//! ```
//!
//! plus the two benchmark plants and bounded additive disturbances.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::jet::{Jet, Scalar};

/// Known structure of a strict-feedback plant: its regressors and input gain.
///
/// Regressor `stage` (0-based) takes `x_1..x_{stage+1}` and returns an
/// `N`-vector. Implementors provide both a plain and a jet evaluation; the
/// two must agree on values.
pub trait StrictFeedback: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;
    fn order(&self) -> usize;
    fn n_params(&self) -> usize;
    fn regressor(&self, stage: usize, x: &[f64]) -> Vec<f64>;
    fn regressor_jet(&self, stage: usize, x: &[Jet]) -> Vec<Jet>;
    fn input_gain(&self, x: &[f64]) -> f64;
}

#[derive(Debug, Clone)]
pub struct PlantModel {
    dynamics: Arc<dyn StrictFeedback>,
    theta: DVector<f64>,
    theta_bound: f64,
}

impl PlantModel {
    pub fn new(dynamics: Arc<dyn StrictFeedback>, theta: DVector<f64>, theta_bound: f64) -> Result<Self> {
        if theta.len() != dynamics.n_params() {
            return Err(Error::Shape {
                expected: dynamics.n_params(),
                actual: theta.len(),
            });
        }
        if theta.norm() > theta_bound {
            return Err(Error::invalid(format!(
                "parameter norm {} exceeds bound {theta_bound}",
                theta.norm()
            )));
        }
        Ok(Self {
            dynamics,
            theta,
            theta_bound,
        })
    }

    /// Same structure with a different true parameter.
    pub fn with_theta(&self, theta: DVector<f64>) -> Result<Self> {
        Self::new(Arc::clone(&self.dynamics), theta, self.theta_bound)
    }

    pub fn name(&self) -> &str {
        self.dynamics.name()
    }

    pub fn order(&self) -> usize {
        self.dynamics.order()
    }

    pub fn n_params(&self) -> usize {
        self.dynamics.n_params()
    }

    pub fn theta(&self) -> &DVector<f64> {
        &self.theta
    }

    pub fn theta_bound(&self) -> f64 {
        self.theta_bound
    }

    pub fn dynamics(&self) -> &Arc<dyn StrictFeedback> {
        &self.dynamics
    }

    pub fn regressor(&self, stage: usize, x: &[f64]) -> DVector<f64> {
        DVector::from_vec(self.dynamics.regressor(stage, &x[..=stage]))
    }

    pub fn regressor_jet(&self, stage: usize, x: &[Jet]) -> Vec<Jet> {
        self.dynamics.regressor_jet(stage, &x[..=stage])
    }

    pub fn input_gain(&self, x: &[f64]) -> f64 {
        self.dynamics.input_gain(x)
    }
}

/// State derivative of the plant under input `u` and disturbance `d`.
pub fn plant_derivative(model: &PlantModel, x: &[f64], u: f64, d: &[f64]) -> Result<DVector<f64>> {
    let n = model.order();
    if x.len() != n || d.len() != n {
        return Err(Error::Shape {
            expected: n,
            actual: if x.len() != n { x.len() } else { d.len() },
        });
    }
    let mut dx = DVector::zeros(n);
    plant_derivative_into(model, x, u, d, dx.as_mut_slice());
    if dx.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "plant derivative",
            time: f64::NAN,
        });
    }
    Ok(dx)
}

pub(crate) fn plant_derivative_into(model: &PlantModel, x: &[f64], u: f64, d: &[f64], out: &mut [f64]) {
    let n = model.order();
    for i in 0..n {
        let phi = model.dynamics.regressor(i, &x[..=i]);
        let drift: f64 = phi.iter().zip(model.theta.iter()).map(|(p, t)| p * t).sum();
        let coupling = if i + 1 < n {
            x[i + 1]
        } else {
            model.dynamics.input_gain(x) * u
        };
        out[i] = drift + coupling + d[i];
    }
}

fn zeros<S: Scalar>(like: &S, n: usize) -> Vec<S> {
    vec![like.lift(0.0); n]
}

/// Mass-spring-damper: `n = 3`, `N = 3`, only the second stage is uncertain.
#[derive(Debug, Clone, Copy, Default)]
pub struct MassSpringDamper;

impl MassSpringDamper {
    fn phi<S: Scalar>(stage: usize, x: &[S]) -> Vec<S> {
        match stage {
            1 => {
                let (x1, x2) = (&x[0], &x[1]);
                vec![-x2.clone(), -x1.clone(), -x2.powi(3)]
            }
            _ => zeros(&x[0], 3),
        }
    }
}

impl StrictFeedback for MassSpringDamper {
    fn name(&self) -> &str {
        "msd"
    }
    fn order(&self) -> usize {
        3
    }
    fn n_params(&self) -> usize {
        3
    }
    fn regressor(&self, stage: usize, x: &[f64]) -> Vec<f64> {
        Self::phi(stage, x)
    }
    fn regressor_jet(&self, stage: usize, x: &[Jet]) -> Vec<Jet> {
        Self::phi(stage, x)
    }
    fn input_gain(&self, _x: &[f64]) -> f64 {
        1.0
    }
}

/// Second-order plant `x1' = x2 + x1^2 theta`, `x2' = u`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SecondOrder;

impl SecondOrder {
    fn phi<S: Scalar>(stage: usize, x: &[S]) -> Vec<S> {
        match stage {
            0 => vec![x[0].powi(2)],
            _ => zeros(&x[0], 1),
        }
    }
}

impl StrictFeedback for SecondOrder {
    fn name(&self) -> &str {
        "second_order"
    }
    fn order(&self) -> usize {
        2
    }
    fn n_params(&self) -> usize {
        1
    }
    fn regressor(&self, stage: usize, x: &[f64]) -> Vec<f64> {
        Self::phi(stage, x)
    }
    fn regressor_jet(&self, stage: usize, x: &[Jet]) -> Vec<Jet> {
        Self::phi(stage, x)
    }
    fn input_gain(&self, _x: &[f64]) -> f64 {
        1.0
    }
}

/// Parameter-ball radius used by the benchmark factories.
pub const BENCHMARK_THETA_BOUND: f64 = 10.0;

/// Mass-spring-damper with `theta = [0.1, 0.5, 1.5]`.
pub fn benchmark_msd() -> PlantModel {
    PlantModel::new(
        Arc::new(MassSpringDamper),
        DVector::from_vec(vec![0.1, 0.5, 1.5]),
        BENCHMARK_THETA_BOUND,
    )
    .expect("benchmark parameters lie inside the bound")
}

/// Second-order plant with `theta = 2`.
pub fn benchmark_second_order() -> PlantModel {
    PlantModel::new(
        Arc::new(SecondOrder),
        DVector::from_vec(vec![2.0]),
        BENCHMARK_THETA_BOUND,
    )
    .expect("benchmark parameters lie inside the bound")
}

/// Plant factory by id as used in scenario files.
pub fn plant_by_name(name: &str) -> Result<PlantModel> {
    match name {
        "msd" => Ok(benchmark_msd()),
        "second_order" => Ok(benchmark_second_order()),
        other => Err(Error::invalid(format!("unknown plant '{other}'"))),
    }
}

/// Bounded additive disturbance `d(t)` with `||d(t)|| <= bound`.
///
/// Channels are 0-based here and 1-based in the text form.
#[derive(Debug, Clone, PartialEq)]
pub enum DisturbanceSpec {
    None,
    Constant { bound: f64, channel: usize },
    Sinusoid { bound: f64, frequency: f64, channel: usize },
    /// Uniform draws from the ball of radius `bound`, held for `hold` seconds.
    /// The draw for each hold slot is a pure function of `(seed, slot)`.
    Random { bound: f64, hold: f64, seed: u64 },
}

impl DisturbanceSpec {
    pub fn bound(&self) -> f64 {
        match self {
            DisturbanceSpec::None => 0.0,
            DisturbanceSpec::Constant { bound, .. }
            | DisturbanceSpec::Sinusoid { bound, .. }
            | DisturbanceSpec::Random { bound, .. } => *bound,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let bound = self.bound();
        if !(bound >= 0.0) || !bound.is_finite() {
            return Err(Error::invalid(format!("disturbance bound must be >= 0, got {bound}")));
        }
        match self {
            DisturbanceSpec::Constant { channel, .. } | DisturbanceSpec::Sinusoid { channel, .. }
                if *channel >= n =>
            {
                Err(Error::invalid(format!(
                    "disturbance channel {} outside 1..={n}",
                    channel + 1
                )))
            }
            DisturbanceSpec::Random { hold, .. } if !(*hold > 0.0) => {
                Err(Error::invalid("random disturbance hold must be positive"))
            }
            _ => Ok(()),
        }
    }

    /// `d(t)` for an `n`-th order plant.
    pub fn sample(&self, t: f64, n: usize) -> DVector<f64> {
        let mut d = DVector::zeros(n);
        self.sample_into(t, d.as_mut_slice());
        d
    }

    pub(crate) fn sample_into(&self, t: f64, out: &mut [f64]) {
        out.fill(0.0);
        match *self {
            DisturbanceSpec::None => {}
            DisturbanceSpec::Constant { bound, channel } => out[channel] = bound,
            DisturbanceSpec::Sinusoid {
                bound,
                frequency,
                channel,
            } => out[channel] = bound * (frequency * t).sin(),
            DisturbanceSpec::Random { bound, hold, seed } => {
                let slot = (t / hold).floor().max(0.0) as u64;
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ slot.wrapping_mul(0x9E37_79B9_7F4A_7C15));
                // Rejection sampling inside the unit ball.
                loop {
                    for v in out.iter_mut() {
                        *v = rng.gen_range(-1.0..=1.0);
                    }
                    let norm2: f64 = out.iter().map(|v| v * v).sum();
                    if norm2 <= 1.0 {
                        break;
                    }
                }
                out.iter_mut().for_each(|v| *v *= bound);
            }
        }
    }
}

impl fmt::Display for DisturbanceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DisturbanceSpec::None => write!(f, "none"),
            DisturbanceSpec::Constant { bound, channel } => write!(f, "const:{bound}:{}", channel + 1),
            DisturbanceSpec::Sinusoid {
                bound,
                frequency,
                channel,
            } => write!(f, "sin:{bound}:{frequency}:{}", channel + 1),
            DisturbanceSpec::Random { bound, hold, seed } => write!(f, "rand:{bound}:{hold}:{seed}"),
        }
    }
}

impl FromStr for DisturbanceSpec {
    type Err = Error;

    /// `none`, `const:<bound>:<channel>`, `sin:<bound>:<omega>:<channel>` or
    /// `rand:<bound>:<hold>:<seed>`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').map(str::trim).collect();
        let num = |i: usize| -> Result<f64> {
            parts
                .get(i)
                .ok_or_else(|| Error::invalid(format!("disturbance '{s}' is missing a field")))?
                .parse::<f64>()
                .map_err(|e| Error::invalid(format!("disturbance '{s}': {e}")))
        };
        let channel = |i: usize| -> Result<usize> {
            let c = num(i)?;
            if c < 1.0 || c.fract() != 0.0 {
                return Err(Error::invalid(format!("disturbance channel must be a positive integer in '{s}'")));
            }
            Ok(c as usize - 1)
        };
        let spec = match parts[0] {
            "none" if parts.len() == 1 => DisturbanceSpec::None,
            "const" if parts.len() == 3 => DisturbanceSpec::Constant {
                bound: num(1)?,
                channel: channel(2)?,
            },
            "sin" if parts.len() == 4 => DisturbanceSpec::Sinusoid {
                bound: num(1)?,
                frequency: num(2)?,
                channel: channel(3)?,
            },
            "rand" if parts.len() == 4 => DisturbanceSpec::Random {
                bound: num(1)?,
                hold: num(2)?,
                seed: parts[3]
                    .parse()
                    .map_err(|e| Error::invalid(format!("disturbance seed in '{s}': {e}")))?,
            },
            _ => return Err(Error::invalid(format!("unrecognized disturbance '{s}'"))),
        };
        if !(spec.bound() >= 0.0) {
            return Err(Error::invalid(format!("disturbance bound must be >= 0 in '{s}'")));
        }
        Ok(spec)
    }
}

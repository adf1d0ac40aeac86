//! Modular backstepping: virtual controls, tracking errors, the closed-loop
//! regressor `Phi = [psi_1, ..., psi_n]` and the control input.
//!
//! The partial derivatives of each virtual control with respect to states,
//! estimate derivatives and reference derivatives are obtained by evaluating
//! the whole recursion on jets of order `n - 1`. Stage `i` consumes first
//! partials of `v_{i-1}`, whose jet has just enough order left for that.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::jet::{Jet, JetSpace};
use crate::plant::PlantModel;

#[derive(Debug, Clone, PartialEq)]
pub struct ControlGains {
    kc: Vec<f64>,
    kd: Vec<f64>,
}

impl ControlGains {
    pub fn new(kc: Vec<f64>, kd: Vec<f64>) -> Result<Self> {
        if kc.len() != kd.len() {
            return Err(Error::Shape {
                expected: kc.len(),
                actual: kd.len(),
            });
        }
        if let Some(k) = kc.iter().find(|k| !(**k > 0.0) || !k.is_finite()) {
            return Err(Error::invalid(format!("control gain must be positive, got {k}")));
        }
        if let Some(k) = kd.iter().find(|k| !(**k >= 0.0) || !k.is_finite()) {
            return Err(Error::invalid(format!("damping gain must be >= 0, got {k}")));
        }
        if kc.iter().any(|k| *k <= 0.25) {
            log::warn!("control gains {kc:?}: stability guarantees need every k_c > 1/4");
        }
        Ok(Self { kc, kd })
    }

    /// Gains without nonlinear damping.
    pub fn undamped(kc: Vec<f64>) -> Result<Self> {
        let kd = vec![0.0; kc.len()];
        Self::new(kc, kd)
    }

    pub fn with_damping(&self, kd: Vec<f64>) -> Result<Self> {
        Self::new(self.kc.clone(), kd)
    }

    pub fn kc(&self) -> &[f64] {
        &self.kc
    }

    pub fn kd(&self) -> &[f64] {
        &self.kd
    }

    pub fn is_damped(&self) -> bool {
        self.kd.iter().any(|k| *k != 0.0)
    }

    pub fn order(&self) -> usize {
        self.kc.len()
    }
}

/// `Theta_{n-1} = [theta_hat, theta_hat', ..., theta_hat^(n-1)]`, one column per derivative order.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateBundle(pub DMatrix<f64>);

impl EstimateBundle {
    pub fn zeros(n_params: usize, order: usize) -> Self {
        Self(DMatrix::zeros(n_params, order))
    }

    /// Estimate with all derivatives zero.
    pub fn at_rest(theta: &DVector<f64>, order: usize) -> Self {
        let mut m = DMatrix::zeros(theta.len(), order);
        m.set_column(0, theta);
        Self(m)
    }

    pub fn derivative(&self, k: usize) -> DVector<f64> {
        self.0.column(k).into_owned()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackstepOutput {
    /// Virtual controls `v_1..v_n`.
    pub v: Vec<f64>,
    /// Closed-loop regressor, column `i` is `psi_{i+1}`.
    pub phi: DMatrix<f64>,
    pub e: DVector<f64>,
    pub u: f64,
    pub lambda: DMatrix<f64>,
}

/// The tridiagonal closed-loop matrix: `-k_ci` on the diagonal, `+1` above, `-1` below.
pub fn closed_loop_matrix(gains: &ControlGains) -> DMatrix<f64> {
    let n = gains.order();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            -gains.kc[i]
        } else if j == i + 1 {
            1.0
        } else if i == j + 1 {
            -1.0
        } else {
            0.0
        }
    })
}

/// Index map of the differentiation variables: `x_1..x_{n-1}`, then
/// `theta_hat^(j)` for `j = 0..n-2` (each `N` entries), then `y_r^(j)` for `j = 0..n-2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JetLayout {
    pub order: usize,
    pub n_params: usize,
}

impl JetLayout {
    pub fn vars(&self) -> usize {
        self.order.saturating_sub(1) * (self.n_params + 2)
    }

    fn depth(&self) -> usize {
        self.order.saturating_sub(1)
    }

    /// Variable index of `x_k` (0-based), if it is differentiated.
    pub fn x(&self, k: usize) -> Option<usize> {
        (k < self.depth()).then_some(k)
    }

    /// Variable index of entry `l` of `theta_hat^(j)`.
    pub fn theta(&self, j: usize, l: usize) -> Option<usize> {
        (j < self.depth()).then(|| self.depth() + j * self.n_params + l)
    }

    /// Variable index of `y_r^(j)`.
    pub fn reference(&self, j: usize) -> Option<usize> {
        (j < self.depth()).then(|| self.depth() * (1 + self.n_params) + j)
    }
}

/// Jet values of every virtual control and regressor column.
#[derive(Debug, Clone)]
pub struct BackstepJets {
    pub layout: JetLayout,
    pub v: Vec<Jet>,
    /// `psi[i][l]`: entry `l` of `psi_{i+1}`.
    pub psi: Vec<Vec<Jet>>,
}

/// Controller evaluated up to everything that does not depend on the top
/// estimate derivative `theta_hat^(n-1)`. Finish with [`PendingControl::finish`].
#[derive(Debug, Clone)]
pub struct PendingControl {
    output: BackstepOutput,
    /// `d v_{n-1} / d theta_hat^(n-2)`; `v_n` is affine in `theta_hat^(n-1)` with this slope.
    top_sensitivity: DVector<f64>,
    beta: f64,
    reference_top: f64,
}

impl PendingControl {
    pub fn e(&self) -> &DVector<f64> {
        &self.output.e
    }

    pub fn phi(&self) -> &DMatrix<f64> {
        &self.output.phi
    }

    pub fn lambda(&self) -> &DMatrix<f64> {
        &self.output.lambda
    }

    /// Completes `v_n` and `u`. For first-order plants `top` is ignored.
    pub fn finish(mut self, top: &DVector<f64>) -> Result<BackstepOutput> {
        let n = self.output.v.len();
        if self.top_sensitivity.len() > 0 {
            self.output.v[n - 1] += self.top_sensitivity.dot(top);
        }
        let vn = self.output.v[n - 1];
        if !vn.is_finite() {
            return Err(Error::BackstepStage { stage: n });
        }
        self.output.u = (vn + self.reference_top) / self.beta;
        Ok(self.output)
    }
}

/// Backstepping controller for one plant structure and gain set. Holds the
/// jet tables so repeated evaluation does not rebuild them.
#[derive(Debug, Clone)]
pub struct Backstepper {
    model: PlantModel,
    gains: ControlGains,
    lambda: DMatrix<f64>,
    layout: JetLayout,
    space: Arc<JetSpace>,
}

impl Backstepper {
    pub fn new(model: PlantModel, gains: ControlGains) -> Result<Self> {
        if gains.order() != model.order() {
            return Err(Error::Shape {
                expected: model.order(),
                actual: gains.order(),
            });
        }
        let layout = JetLayout {
            order: model.order(),
            n_params: model.n_params(),
        };
        let space = JetSpace::new(layout.vars(), layout.depth());
        let lambda = closed_loop_matrix(&gains);
        Ok(Self {
            model,
            gains,
            lambda,
            layout,
            space,
        })
    }

    pub fn model(&self) -> &PlantModel {
        &self.model
    }

    pub fn gains(&self) -> &ControlGains {
        &self.gains
    }

    pub fn lambda(&self) -> &DMatrix<f64> {
        &self.lambda
    }

    pub fn layout(&self) -> JetLayout {
        self.layout
    }

    /// Full evaluation with `Theta_{n-1}` known.
    pub fn evaluate(&self, x: &[f64], estimates: &EstimateBundle, reference: &[f64]) -> Result<BackstepOutput> {
        let n = self.model.order();
        if estimates.0.ncols() != n || estimates.0.nrows() != self.model.n_params() {
            return Err(Error::Shape {
                expected: n * self.model.n_params(),
                actual: estimates.0.len(),
            });
        }
        let lower = estimates.0.columns(0, n.saturating_sub(1).max(1)).into_owned();
        let top = estimates.0.column(n - 1).into_owned();
        self.prepare(x, &lower, reference)?.finish(&top)
    }

    /// Evaluation from `theta_hat..theta_hat^(n-2)` (columns of `lower`; just
    /// `theta_hat` when `n = 1`) and `y_r..y_r^(n)`.
    pub fn prepare(&self, x: &[f64], lower: &DMatrix<f64>, reference: &[f64]) -> Result<PendingControl> {
        let jets = self.jets(x, lower, reference)?;
        let n = self.model.order();
        let np = self.model.n_params();
        let beta = self.model.input_gain(x);
        if beta == 0.0 || !beta.is_finite() {
            return Err(Error::ZeroInputGain);
        }
        let v: Vec<f64> = jets.v.iter().map(Jet::value).collect();
        let phi = DMatrix::from_fn(np, n, |l, i| jets.psi[i][l].value());
        let mut e = DVector::zeros(n);
        e[0] = x[0] - reference[0];
        for i in 1..n {
            e[i] = x[i] - v[i - 1] - reference[i];
        }
        let top_sensitivity = if n >= 2 {
            let prev = &jets.v[n - 2];
            DVector::from_fn(np, |l, _| {
                prev.first_partial(self.layout.theta(n - 2, l).expect("n >= 2 has theta^(n-2) vars"))
            })
        } else {
            DVector::zeros(0)
        };
        Ok(PendingControl {
            output: BackstepOutput {
                v,
                phi,
                e,
                u: f64::NAN,
                lambda: self.lambda.clone(),
            },
            top_sensitivity,
            beta,
            reference_top: reference[n],
        })
    }

    /// Jet evaluation of the recursion. `v_n` is computed with `theta_hat^(n-1) = 0`.
    pub fn jets(&self, x: &[f64], lower: &DMatrix<f64>, reference: &[f64]) -> Result<BackstepJets> {
        let n = self.model.order();
        let np = self.model.n_params();
        let lay = self.layout;
        let depth = lay.depth();
        if x.len() != n {
            return Err(Error::Shape {
                expected: n,
                actual: x.len(),
            });
        }
        if reference.len() < n + 1 {
            return Err(Error::Shape {
                expected: n + 1,
                actual: reference.len(),
            });
        }
        if lower.nrows() != np || lower.ncols() < depth.max(1) {
            return Err(Error::Shape {
                expected: np * depth.max(1),
                actual: lower.len(),
            });
        }
        let sp = &self.space;
        let seed = |var: Option<usize>, value: f64| match var {
            Some(v) => Jet::variable(sp, v, value),
            None => Jet::constant(sp, value),
        };

        let xs: Vec<Jet> = (0..n).map(|k| seed(lay.x(k), x[k])).collect();
        // theta_hat^(j) for j = 0..n-1; the top one is zero until finish().
        let th: Vec<Vec<Jet>> = (0..n)
            .map(|j| {
                (0..np)
                    .map(|l| {
                        let value = if j < depth.max(1) { lower[(l, j)] } else { 0.0 };
                        seed(lay.theta(j, l), value)
                    })
                    .collect()
            })
            .collect();
        let yr: Vec<Jet> = (0..=n).map(|j| seed(lay.reference(j), reference[j])).collect();
        let phis: Vec<Vec<Jet>> = (0..n).map(|i| self.model.regressor_jet(i, &xs)).collect();

        let dot = |a: &[Jet], b: &[Jet]| -> Jet {
            a.iter()
                .zip(b)
                .map(|(p, q)| p * q)
                .reduce(|acc, t| acc + t)
                .unwrap_or_else(|| Jet::constant(sp, 0.0))
        };

        let mut v: Vec<Jet> = Vec::with_capacity(n);
        let mut psi: Vec<Vec<Jet>> = Vec::with_capacity(n);
        let mut e: Vec<Jet> = Vec::with_capacity(n);
        for i in 0..n {
            let (ei, psi_i, mut vi) = if i == 0 {
                let e0 = &xs[0] - &yr[0];
                let psi0 = phis[0].clone();
                let v0 = -(&e0 * self.gains.kc[0]) - dot(&psi0, &th[0]);
                (e0, psi0, v0)
            } else {
                let prev = &v[i - 1];
                let ei = &xs[i] - prev - &yr[i];
                let dv_dx: Vec<Jet> = (0..i)
                    .map(|k| prev.partial(lay.x(k).expect("x_k is a variable below n")))
                    .collect();
                let mut psi_i = phis[i].clone();
                for (k, d) in dv_dx.iter().enumerate() {
                    for (p, f) in psi_i.iter_mut().zip(&phis[k]) {
                        *p = &*p - &(d * f);
                    }
                }
                let mut drift = Jet::constant(sp, 0.0);
                for k in 0..i {
                    drift = drift + &dv_dx[k] * &xs[k + 1];
                    for l in 0..np {
                        let var = lay.theta(k, l).expect("theta^(k) is a variable below n-1");
                        drift = drift + prev.partial(var) * &th[k + 1][l];
                    }
                    let var = lay.reference(k).expect("y_r^(k) is a variable below n-1");
                    drift = drift + prev.partial(var) * &yr[k + 1];
                }
                let vi = -(&ei * self.gains.kc[i]) - &e[i - 1] - dot(&psi_i, &th[0]) + drift;
                (ei, psi_i, vi)
            };
            let kd = self.gains.kd[i];
            if kd != 0.0 {
                let norm2 = dot(&psi_i, &psi_i);
                vi = vi - &norm2 * &ei * kd;
            }
            if !vi.value().is_finite() || !ei.value().is_finite() || psi_i.iter().any(|p| !p.value().is_finite())
            {
                return Err(Error::BackstepStage { stage: i + 1 });
            }
            e.push(ei);
            psi.push(psi_i);
            v.push(vi);
        }
        Ok(BackstepJets { layout: lay, v, psi })
    }
}

/// One-shot backstepping evaluation.
pub fn backstep(
    model: &PlantModel,
    gains: &ControlGains,
    x: &[f64],
    estimates: &EstimateBundle,
    reference: &[f64],
) -> Result<BackstepOutput> {
    Backstepper::new(model.clone(), gains.clone())?.evaluate(x, estimates, reference)
}

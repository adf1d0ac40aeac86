//! Controller variants: the composite law and its two ablations, each with
//! optional nonlinear damping in the virtual controls.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::backstepping::{Backstepper, ControlGains, EstimateBundle};
use crate::error::{Error, Result};
use crate::plant::PlantModel;
use crate::tuner::{epsilon, xi, LawTerms, Tuner, TunerParams, TunerTaps};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ControllerKind {
    /// Both prediction errors drive adaptation.
    Clbc,
    /// Pure gradient law on `epsilon` (`kappa = 0`).
    EpsOnly,
    /// Memory term `xi` only.
    XiOnly,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 3] = [ControllerKind::Clbc, ControllerKind::EpsOnly, ControllerKind::XiOnly];

    pub fn terms(self) -> LawTerms {
        match self {
            ControllerKind::Clbc => LawTerms::COMPOSITE,
            ControllerKind::EpsOnly => LawTerms { epsilon: true, xi: false },
            ControllerKind::XiOnly => LawTerms { epsilon: false, xi: true },
        }
    }
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ControllerKind::Clbc => "clbc",
            ControllerKind::EpsOnly => "eps-only",
            ControllerKind::XiOnly => "xi-only",
        })
    }
}

impl FromStr for ControllerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().replace('_', "-").as_str() {
            "clbc" => Ok(ControllerKind::Clbc),
            "eps-only" => Ok(ControllerKind::EpsOnly),
            "xi-only" => Ok(ControllerKind::XiOnly),
            other => Err(Error::invalid(format!(
                "unknown controller '{other}' (expected clbc, eps-only or xi-only)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerParams {
    pub kc: Vec<f64>,
    pub kd: Vec<f64>,
    /// Diagonal of `Gamma`.
    pub gamma: DVector<f64>,
    pub kappa: f64,
    pub poles: Vec<f64>,
}

/// Everything the controller computes at one instant.
#[derive(Debug, Clone)]
pub struct ControlEval {
    pub e: DVector<f64>,
    pub phi: DMatrix<f64>,
    pub u: f64,
    /// `[theta_hat, theta_hat', ..., theta_hat^(n-1)]`.
    pub estimates: EstimateBundle,
    pub taps: TunerTaps,
    /// Input of the `H[w]` filter, `Phi^T theta_hat - Lambda e`.
    pub w: DVector<f64>,
    pub z: DVector<f64>,
    pub eps: DVector<f64>,
    pub xi: DVector<f64>,
}

impl ControlEval {
    pub fn theta_dot(&self) -> DVector<f64> {
        self.estimates.derivative(1)
    }

    /// `Phi_f = H[Phi]`.
    pub fn phi_f(&self) -> &DMatrix<f64> {
        &self.taps.phi[0]
    }

    /// `Q(t, t_e)`.
    pub fn q_mat(&self) -> &DMatrix<f64> {
        &self.taps.q_mat[0]
    }
}

#[derive(Debug, Clone)]
pub struct Controller {
    kind: ControllerKind,
    backstepper: Backstepper,
    tuner: Tuner,
}

pub fn make_controller(kind: ControllerKind, model: &PlantModel, params: &ControllerParams) -> Result<Controller> {
    let n = model.order();
    let gains = ControlGains::new(params.kc.clone(), params.kd.clone())?;
    let tuner_params = TunerParams {
        gamma: params.gamma.clone(),
        kappa: if kind == ControllerKind::EpsOnly { 0.0 } else { params.kappa },
        poles: params.poles.clone(),
        terms: kind.terms(),
    };
    Ok(Controller {
        kind,
        backstepper: Backstepper::new(model.clone(), gains)?,
        tuner: Tuner::new(n, model.n_params(), tuner_params)?,
    })
}

impl Controller {
    pub fn kind(&self) -> ControllerKind {
        self.kind
    }

    pub fn backstepper(&self) -> &Backstepper {
        &self.backstepper
    }

    pub fn tuner(&self) -> &Tuner {
        &self.tuner
    }

    pub fn order(&self) -> usize {
        self.tuner.order()
    }

    /// Evaluates the control law. With `adapt = false` every estimate
    /// derivative is zero and `theta_hat` stays frozen.
    pub fn evaluate(
        &self,
        x: &[f64],
        reference: &[f64],
        theta_hat: &DVector<f64>,
        tuner_states: &[f64],
        adapt: bool,
    ) -> Result<ControlEval> {
        let n = self.order();
        let np = self.tuner.n_params();
        let mut taps = self.tuner.taps(tuner_states)?;
        let mut est = vec![theta_hat.clone()];
        // theta_hat^(1..=n-2) only use state taps
        for k in 0..n.saturating_sub(2) {
            let next = if adapt {
                self.tuner.theta_high_derivative(&taps, &est, k)?
            } else {
                DVector::zeros(np)
            };
            est.push(next);
        }
        let lower = DMatrix::from_columns(&est);
        let pending = self.backstepper.prepare(x, &lower, reference)?;
        let e = pending.e().clone();
        let phi = pending.phi().clone();
        self.tuner.complete_taps(tuner_states, &mut taps, &e)?;
        let top = if adapt {
            self.tuner.theta_high_derivative(&taps, &est, n - 2)?
        } else {
            DVector::zeros(np)
        };
        let w = phi.tr_mul(theta_hat) - pending.lambda() * &e;
        let out = pending.finish(&top)?;
        est.push(top);
        let z = taps.z(0);
        let eps = epsilon(&z, &taps.phi[0], theta_hat);
        let xi = xi(&taps.q_vec[0], &taps.q_mat[0], theta_hat);
        Ok(ControlEval {
            e,
            phi,
            u: out.u,
            estimates: EstimateBundle(DMatrix::from_columns(&est)),
            taps,
            w,
            z,
            eps,
            xi,
        })
    }

    pub fn filter_derivatives(
        &self,
        eval: &ControlEval,
        tuner_states: &[f64],
        psi_store: &DMatrix<f64>,
        q_store: &DVector<f64>,
        out: &mut [f64],
    ) -> Result<()> {
        self.tuner
            .derive_into(tuner_states, &eval.phi, &eval.e, &eval.w, psi_store, q_store, out)
    }
}

//! Composite-learning high-order tuner.
//!
//! Every signal entering the adaptive law passes through the same cascade
//! `H(s) = prod a_j / (s + a_j)` with `n - 1` stages, which makes
//! `theta_hat', ..., theta_hat^(n-1)` algebraic in the filter states plus the
//! instantaneous tracking error.
//!
//! The tuner states live in one flat slice, block by block:
//! `H[Phi]`, `H[e]`, `H[w]` with `w = Phi^T theta_hat - Lambda e`,
//! `H[Psi(t_e)]`, `H[q(t_e)]`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numerics::FilterCascade;

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `z = sH[e] + H[Phi^T theta_hat - Lambda e]`.
pub fn compute_z(s_h_e: &DVector<f64>, h_w: &DVector<f64>) -> DVector<f64> {
    s_h_e + h_w
}

/// `epsilon = z - Phi_f^T theta_hat`.
pub fn epsilon(z: &DVector<f64>, phi_f: &DMatrix<f64>, theta_hat: &DVector<f64>) -> DVector<f64> {
    z - phi_f.tr_mul(theta_hat)
}

/// `xi = q_f - Q theta_hat`.
pub fn xi(q_f: &DVector<f64>, q_mat: &DMatrix<f64>, theta_hat: &DVector<f64>) -> DVector<f64> {
    q_f - q_mat * theta_hat
}

/// `theta_hat' = Gamma (Phi_f epsilon + kappa xi)` with `Gamma = diag(gamma)`.
pub fn theta_dot(
    gamma: &DVector<f64>,
    phi_f: &DMatrix<f64>,
    eps: &DVector<f64>,
    kappa: f64,
    xi: &DVector<f64>,
) -> DVector<f64> {
    (phi_f * eps + xi * kappa).component_mul(gamma)
}

/// `V_theta = theta_err^T Gamma^-1 theta_err`.
pub fn lyapunov_v_theta(theta_err: &DVector<f64>, gamma: &DVector<f64>) -> f64 {
    theta_err.iter().zip(gamma.iter()).map(|(e, g)| e * e / g).sum()
}

/// Which prediction errors drive the adaptive law.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LawTerms {
    pub epsilon: bool,
    pub xi: bool,
}

impl LawTerms {
    pub const COMPOSITE: Self = Self { epsilon: true, xi: true };
}

#[derive(Debug, Clone, PartialEq)]
pub struct TunerParams {
    /// Diagonal of `Gamma`.
    pub gamma: DVector<f64>,
    pub kappa: f64,
    /// Stage rates `a_1..a_{n-1}` of `H(s)`.
    pub poles: Vec<f64>,
    pub terms: LawTerms,
}

/// Derivative taps of the filtered signals, orders `0..=n-2` (state-only).
#[derive(Debug, Clone, PartialEq)]
pub struct TunerTaps {
    /// `s^k H[Phi]`, `N x n`.
    pub phi: Vec<DMatrix<f64>>,
    /// `s^k H[e]`; holds `n` entries once [`Tuner::complete_taps`] added the biproper tap.
    pub e: Vec<DVector<f64>>,
    pub w: Vec<DVector<f64>>,
    /// `Q^(k)`.
    pub q_mat: Vec<DMatrix<f64>>,
    /// `q_f^(k)`.
    pub q_vec: Vec<DVector<f64>>,
}

impl TunerTaps {
    /// `z^(i) = s^(i+1) H[e] + s^i H[w]`.
    pub fn z(&self, i: usize) -> DVector<f64> {
        &self.e[i + 1] + &self.w[i]
    }
}

#[derive(Debug, Clone)]
pub struct Tuner {
    n: usize,
    n_params: usize,
    gamma: DVector<f64>,
    kappa: f64,
    terms: LawTerms,
    f_phi: FilterCascade,
    f_e: FilterCascade,
    f_w: FilterCascade,
    f_q_mat: FilterCascade,
    f_q_vec: FilterCascade,
}

impl Tuner {
    pub fn new(n: usize, n_params: usize, params: TunerParams) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("the high-order tuner needs plant order n >= 2"));
        }
        if params.poles.len() != n - 1 {
            return Err(Error::Shape {
                expected: n - 1,
                actual: params.poles.len(),
            });
        }
        if params.gamma.len() != n_params {
            return Err(Error::Shape {
                expected: n_params,
                actual: params.gamma.len(),
            });
        }
        if params.gamma.iter().any(|g| !(*g > 0.0) || !g.is_finite()) {
            return Err(Error::invalid("learning rates must be positive"));
        }
        if !(params.kappa >= 0.0) || !params.kappa.is_finite() {
            return Err(Error::invalid(format!("kappa must be >= 0, got {}", params.kappa)));
        }
        let cascade = |width| FilterCascade::new(params.poles.clone(), width);
        Ok(Self {
            n,
            n_params,
            f_phi: cascade(n_params * n)?,
            f_e: cascade(n)?,
            f_w: cascade(n)?,
            f_q_mat: cascade(n_params * n_params)?,
            f_q_vec: cascade(n_params)?,
            gamma: params.gamma,
            kappa: params.kappa,
            terms: params.terms,
        })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn gamma(&self) -> &DVector<f64> {
        &self.gamma
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn terms(&self) -> LawTerms {
        self.terms
    }

    pub fn poles(&self) -> &[f64] {
        self.f_e.gains()
    }

    fn blocks(&self) -> [&FilterCascade; 5] {
        [&self.f_phi, &self.f_e, &self.f_w, &self.f_q_mat, &self.f_q_vec]
    }

    pub fn state_len(&self) -> usize {
        self.blocks().iter().map(|c| c.state_len()).sum()
    }

    fn split<'a>(&self, states: &'a [f64]) -> Result<[&'a [f64]; 5]> {
        if states.len() != self.state_len() {
            return Err(Error::Shape {
                expected: self.state_len(),
                actual: states.len(),
            });
        }
        let mut out: [&[f64]; 5] = [&[]; 5];
        let mut rest = states;
        for (slot, c) in out.iter_mut().zip(self.blocks()) {
            let (head, tail) = rest.split_at(c.state_len());
            *slot = head;
            rest = tail;
        }
        Ok(out)
    }

    /// Initial filter states: `H[e]` held at `e(0)` so that `z = Phi_f^T theta`
    /// holds from the first instant, everything else at rest.
    pub fn initial_states(&self, e0: &DVector<f64>) -> Result<Vec<f64>> {
        let mut f_e = self.f_e.clone();
        f_e.hold_at(e0.as_slice())?;
        let mut states = Vec::with_capacity(self.state_len());
        states.extend_from_slice(self.f_phi.states());
        states.extend_from_slice(f_e.states());
        states.extend_from_slice(self.f_w.states());
        states.extend_from_slice(self.f_q_mat.states());
        states.extend_from_slice(self.f_q_vec.states());
        Ok(states)
    }

    /// All taps of order `<= n - 2`; none of them depends on the current inputs.
    pub fn taps(&self, states: &[f64]) -> Result<TunerTaps> {
        let [s_phi, s_e, s_w, s_qm, s_qv] = self.split(states)?;
        let k = self.n - 2;
        let (n, np) = (self.n, self.n_params);
        let zeros = |c: &FilterCascade| vec![0.0; c.width()];
        let mats = |c: &FilterCascade, s: &[f64], rows: usize, cols: usize| -> Result<Vec<DMatrix<f64>>> {
            Ok(c.taps_of(s, &zeros(c), k)?
                .into_iter()
                .map(|v| DMatrix::from_vec(rows, cols, v))
                .collect())
        };
        let vecs = |c: &FilterCascade, s: &[f64]| -> Result<Vec<DVector<f64>>> {
            Ok(c.taps_of(s, &zeros(c), k)?.into_iter().map(DVector::from_vec).collect())
        };
        Ok(TunerTaps {
            phi: mats(&self.f_phi, s_phi, np, n)?,
            e: vecs(&self.f_e, s_e)?,
            w: vecs(&self.f_w, s_w)?,
            q_mat: mats(&self.f_q_mat, s_qm, np, np)?,
            q_vec: vecs(&self.f_q_vec, s_qv)?,
        })
    }

    /// Appends the biproper tap `s^(n-1) H[e]`, which needs the current `e`.
    pub fn complete_taps(&self, states: &[f64], taps: &mut TunerTaps, e: &DVector<f64>) -> Result<()> {
        let [_, s_e, ..] = self.split(states)?;
        let all = self.f_e.taps_of(s_e, e.as_slice(), self.n - 1)?;
        let top = all.into_iter().last().expect("taps_of returns order + 1 entries");
        taps.e.truncate(self.n - 1);
        taps.e.push(DVector::from_vec(top));
        Ok(())
    }

    /// `epsilon^(i)` given `theta_hat^(0..=i)`.
    pub fn epsilon_derivative(&self, taps: &TunerTaps, estimates: &[DVector<f64>], i: usize) -> DVector<f64> {
        let mut eps = taps.z(i);
        for j in 0..=i {
            eps -= taps.phi[i - j].tr_mul(&estimates[j]) * binomial(i, j);
        }
        eps
    }

    /// `xi^(k)` given `theta_hat^(0..=k)`.
    pub fn xi_derivative(&self, taps: &TunerTaps, estimates: &[DVector<f64>], k: usize) -> DVector<f64> {
        let mut x = taps.q_vec[k].clone();
        for i in 0..=k {
            x -= &taps.q_mat[k - i] * &estimates[i] * binomial(k, i);
        }
        x
    }

    /// `theta_hat^(k+1)` for `0 <= k <= n - 2`, given `theta_hat^(0..=k)`.
    ///
    /// Needs `taps.e` up to order `k + 1`, so `k = n - 2` requires
    /// [`complete_taps`](Self::complete_taps) first.
    pub fn theta_high_derivative(&self, taps: &TunerTaps, estimates: &[DVector<f64>], k: usize) -> Result<DVector<f64>> {
        if k > self.n - 2 {
            return Err(Error::DerivativeOrder { k, max: self.n - 2 });
        }
        if taps.e.len() < k + 2 || estimates.len() < k + 1 {
            return Err(Error::Shape {
                expected: k + 2,
                actual: taps.e.len().min(estimates.len() + 1),
            });
        }
        let mut drive = DVector::zeros(self.n_params);
        if self.terms.epsilon {
            for i in 0..=k {
                let eps_i = self.epsilon_derivative(taps, estimates, i);
                drive += &taps.phi[k - i] * eps_i * binomial(k, i);
            }
        }
        if self.terms.xi {
            drive += self.xi_derivative(taps, estimates, k) * self.kappa;
        }
        Ok(drive.component_mul(&self.gamma))
    }

    /// Filter state derivatives for the current inputs.
    pub fn derive_into(
        &self,
        states: &[f64],
        phi: &DMatrix<f64>,
        e: &DVector<f64>,
        w: &DVector<f64>,
        psi_store: &DMatrix<f64>,
        q_store: &DVector<f64>,
        out: &mut [f64],
    ) -> Result<()> {
        let parts = self.split(states)?;
        if out.len() != states.len() {
            return Err(Error::Shape {
                expected: states.len(),
                actual: out.len(),
            });
        }
        let inputs: [&[f64]; 5] = [
            phi.as_slice(),
            e.as_slice(),
            w.as_slice(),
            psi_store.as_slice(),
            q_store.as_slice(),
        ];
        let mut rest = out;
        for ((c, s), input) in self.blocks().into_iter().zip(parts).zip(inputs) {
            let (head, tail) = rest.split_at_mut(c.state_len());
            c.derive_into(s, input, head)?;
            rest = tail;
        }
        Ok(())
    }
}

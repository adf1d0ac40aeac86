//! Staged exciting-strength maximization and the offline excitation predicates.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numerics::{min_eigenvalue, SlidingWindow};

/// Default activity threshold per unit window length.
pub const DEFAULT_MU: f64 = 1e-6;

/// Indices `j` (0-based) with `psi_diag[j] > threshold`.
pub fn detect_active(psi_diag: &[f64], threshold: f64) -> Vec<usize> {
    psi_diag
        .iter()
        .enumerate()
        .filter(|(_, d)| **d > threshold)
        .map(|(j, _)| j)
        .collect()
}

/// Principal submatrix on the (sorted) index set. Empty set gives a 0x0 matrix.
pub fn sub_matrix(psi: &DMatrix<f64>, active: &[usize]) -> DMatrix<f64> {
    let m = active.len();
    DMatrix::from_fn(m, m, |i, j| psi[(active[i], active[j])])
}

pub fn sub_vector(q: &DVector<f64>, active: &[usize]) -> DVector<f64> {
    DVector::from_fn(active.len(), |i, _| q[active[i]])
}

/// Smallest singular value of a symmetric PSD matrix (its smallest eigenvalue).
/// `None` for an empty matrix.
pub fn min_singular(psi_zeta: &DMatrix<f64>) -> Result<Option<f64>> {
    min_eigenvalue(psi_zeta)
}

/// What one call to [`ExcitationMemory::staged_update`] did.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateOutcome {
    /// `sigma_min(Psi_zeta(t))`, `None` when no channel is active.
    pub sigma_min: Option<f64>,
    /// Index set used for `Psi_zeta` at this sample.
    pub active: Vec<usize>,
    pub reset: bool,
    pub improved: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationMemory {
    n_params: usize,
    sigma: f64,
    threshold: f64,
    active: Vec<usize>,
    previous: Vec<usize>,
    stage_start: f64,
    sigma_c: f64,
    t_e: f64,
    psi_store: DMatrix<f64>,
    q_store: DVector<f64>,
    stages: usize,
}

impl ExcitationMemory {
    /// `sigma` is the strength floor; a channel is active when `Psi_jj > mu * tau_d`.
    pub fn new(n_params: usize, sigma: f64, mu: f64, tau_d: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
        }
        if !(mu >= 0.0) || !mu.is_finite() {
            return Err(Error::invalid(format!("mu must be >= 0, got {mu}")));
        }
        if !(tau_d > 0.0) {
            return Err(Error::invalid(format!("tau_d must be positive, got {tau_d}")));
        }
        Ok(Self {
            n_params,
            sigma,
            threshold: mu * tau_d,
            active: Vec::new(),
            previous: Vec::new(),
            stage_start: 0.0,
            sigma_c: sigma,
            t_e: 0.0,
            psi_store: DMatrix::zeros(n_params, n_params),
            q_store: DVector::zeros(n_params),
            stages: 0,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Index set detected at the latest sample.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    /// Index set of the current stage.
    pub fn stage_set(&self) -> &[usize] {
        &self.previous
    }

    pub fn stage_start(&self) -> f64 {
        self.stage_start
    }

    pub fn sigma_c(&self) -> f64 {
        self.sigma_c
    }

    pub fn t_e(&self) -> f64 {
        self.t_e
    }

    pub fn psi_store(&self) -> &DMatrix<f64> {
        &self.psi_store
    }

    pub fn q_store(&self) -> &DVector<f64> {
        &self.q_store
    }

    /// Number of stage resets so far.
    pub fn stages(&self) -> usize {
        self.stages
    }

    pub fn full_excitation(&self) -> bool {
        self.previous.len() == self.n_params
    }

    pub fn staged_update(&mut self, psi: &DMatrix<f64>, q: &DVector<f64>, t: f64) -> Result<UpdateOutcome> {
        let n = self.n_params;
        if psi.shape() != (n, n) || q.len() != n {
            return Err(Error::Shape {
                expected: n,
                actual: q.len(),
            });
        }
        let mut reset = false;
        let set = if self.previous.len() < n {
            let diag: Vec<f64> = psi.diagonal().iter().copied().collect();
            self.active = detect_active(&diag, self.threshold);
            if self.active.iter().any(|j| !self.previous.contains(j)) {
                self.sigma_c = self.sigma;
                self.stage_start = t;
                self.previous = self.active.clone();
                self.stages += 1;
                reset = true;
            }
            self.active.clone()
        } else {
            self.active = (0..n).collect();
            self.active.clone()
        };
        let sigma_min = min_singular(&sub_matrix(psi, &set))?;
        let mut improved = false;
        if let Some(s) = sigma_min {
            if s >= self.sigma_c {
                self.sigma_c = s;
                self.t_e = t;
                self.psi_store.copy_from(psi);
                self.q_store.copy_from(q);
                improved = true;
            }
        }
        Ok(UpdateOutcome {
            sigma_min,
            active: set,
            reset,
            improved,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExcitationPredicates {
    pub persistent: bool,
    pub interval: bool,
    pub partial_interval: bool,
}

/// Offline check of the PE / IE / partial-IE definitions on a sampled
/// regressor trace `(t, Phi_s(t))`, with windows of length `tau_d` ending at
/// each sample once a full window is available.
pub fn excitation_predicates(trace: &[(f64, DMatrix<f64>)], sigma: f64, tau_d: f64) -> Result<ExcitationPredicates> {
    let none = ExcitationPredicates {
        persistent: false,
        interval: false,
        partial_interval: false,
    };
    let Some((t0, first)) = trace.first() else {
        return Ok(none);
    };
    let n = first.nrows();
    if trace.len() < 2 || n == 0 {
        return Ok(none);
    }
    let ts = trace[1].0 - t0;
    if !(ts > 0.0) || ts > tau_d {
        return Err(Error::invalid("trace spacing must be positive and below tau_d"));
    }
    if n > 20 {
        return Err(Error::invalid("subset enumeration supports at most 20 channels"));
    }
    let mut window = SlidingWindow::new(tau_d, ts, n * n)?;
    let mut persistent = true;
    let mut interval = false;
    let mut partial = false;
    let mut windows = 0usize;
    for (t, phi) in trace {
        let gram = phi * phi.transpose();
        let integral = window.push(gram.as_slice(), *t)?;
        if t - t0 < tau_d - 1e-9 * tau_d {
            continue;
        }
        windows += 1;
        let g = DMatrix::from_column_slice(n, n, integral);
        let g = (&g + g.transpose()) * 0.5;
        let full = min_eigenvalue(&g)?.unwrap_or(0.0) >= sigma;
        persistent &= full;
        interval |= full;
        if !partial {
            partial = (1u32..(1u32 << n) - 1).any(|mask| {
                let rows: Vec<usize> = (0..n).filter(|j| mask & (1 << j) != 0).collect();
                matches!(min_eigenvalue(&sub_matrix(&g, &rows)), Ok(Some(s)) if s >= sigma)
            });
        }
    }
    Ok(ExcitationPredicates {
        persistent: persistent && windows > 0,
        interval,
        partial_interval: partial,
    })
}

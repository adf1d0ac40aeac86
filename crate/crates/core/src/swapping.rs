//! Swapping filters turning the tracking-error dynamics into the static
//! regression `p = Phi_s^T theta`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SwappingState {
    pub zeta: DVector<f64>,
    /// `N x n`, transposed relative to the error dimension like `Phi`.
    pub phi_s: DMatrix<f64>,
}

impl SwappingState {
    /// `zeta(0) = -e(0)`, `Phi_s(0) = 0`.
    pub fn new(e0: &DVector<f64>, n_params: usize) -> Self {
        Self {
            zeta: -e0,
            phi_s: DMatrix::zeros(n_params, e0.len()),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.zeta.iter().chain(self.phi_s.iter()).all(|v| v.is_finite())
    }
}

/// `zeta' = Lambda zeta + Phi^T theta_hat`, `Phi_s'^T = Lambda Phi_s^T + Phi^T`.
pub fn swapping_derivative(
    lambda: &DMatrix<f64>,
    state: &SwappingState,
    phi: &DMatrix<f64>,
    theta_hat: &DVector<f64>,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = lambda.nrows();
    if state.zeta.len() != n || phi.ncols() != n || state.phi_s.shape() != phi.shape() {
        return Err(Error::Shape {
            expected: n,
            actual: phi.ncols(),
        });
    }
    if theta_hat.len() != phi.nrows() {
        return Err(Error::Shape {
            expected: phi.nrows(),
            actual: theta_hat.len(),
        });
    }
    let zeta_dot = lambda * &state.zeta + phi.tr_mul(theta_hat);
    let phi_s_dot = &state.phi_s * lambda.transpose() + phi;
    Ok((zeta_dot, phi_s_dot))
}

/// `p = e + zeta`.
pub fn output_p(e: &DVector<f64>, zeta: &DVector<f64>) -> DVector<f64> {
    e + zeta
}

/// Integrands `Phi_s Phi_s^T` and `Phi_s p` of the excitation matrix and auxiliary vector.
pub fn excitation_integrands(phi_s: &DMatrix<f64>, p: &DVector<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let gram = phi_s * phi_s.transpose();
    // exact symmetry, so downstream eigen solvers never see rounding asymmetry
    let gram = DMatrix::from_fn(gram.nrows(), gram.ncols(), |i, j| if i <= j { gram[(i, j)] } else { gram[(j, i)] });
    (gram, phi_s * p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::symmetric_eigenvalues;
    use proptest::prelude::*;

    #[test]
    fn scalar_zeta_derivative() {
        let lambda = DMatrix::from_element(1, 1, -1.0);
        let state = SwappingState {
            zeta: DVector::from_element(1, 2.0),
            phi_s: DMatrix::zeros(1, 1),
        };
        let phi = DMatrix::from_element(1, 1, 3.0);
        let (zd, psd) = swapping_derivative(&lambda, &state, &phi, &DVector::from_element(1, 1.0)).unwrap();
        assert_eq!(zd[0], 1.0);
        assert_eq!(psd[(0, 0)], 3.0);
    }

    #[test]
    fn zero_regressor_leaves_phi_s_still() {
        let lambda = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, -1.0, -1.0]);
        let state = SwappingState {
            zeta: DVector::from_vec(vec![0.3, -0.2]),
            phi_s: DMatrix::zeros(3, 2),
        };
        let (zd, psd) =
            swapping_derivative(&lambda, &state, &DMatrix::zeros(3, 2), &DVector::from_vec(vec![1.0, 2.0, 3.0]))
                .unwrap();
        assert_eq!(zd, &lambda * &state.zeta);
        assert!(psd.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn initial_output_vanishes() {
        let e0 = DVector::from_vec(vec![0.6, -0.1, 0.25]);
        let s = SwappingState::new(&e0, 3);
        assert!(output_p(&e0, &s.zeta).iter().all(|v| *v == 0.0));
        assert_eq!(output_p(&e0, &DVector::zeros(3)), e0);
    }

    #[test]
    fn basis_integrands() {
        let mut phi_s = DMatrix::zeros(3, 3);
        phi_s[(0, 0)] = 1.0;
        let p = DVector::from_vec(vec![2.0, 0.0, 0.0]);
        let (g, v) = excitation_integrands(&phi_s, &p);
        let mut expected = DMatrix::zeros(3, 3);
        expected[(0, 0)] = 1.0;
        assert_eq!(g, expected);
        assert_eq!(v, p);
        let (g0, v0) = excitation_integrands(&DMatrix::zeros(3, 3), &p);
        assert!(g0.iter().chain(v0.iter()).all(|x| *x == 0.0));
    }

    proptest! {
        #[test]
        fn gram_integrand_is_psd(entries in prop::collection::vec(-5.0f64..5.0, 9)) {
            let phi_s = DMatrix::from_vec(3, 3, entries);
            let (g, _) = excitation_integrands(&phi_s, &DVector::zeros(3));
            let eig = symmetric_eigenvalues(&g).unwrap();
            prop_assert!(eig[0] >= -1e-12 * (1.0 + eig[2].abs()));
        }
    }
}

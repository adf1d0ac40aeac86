use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// One zero-mean Gaussian draw with standard deviation `std`.
///
/// `std == 0` returns exactly zero without consuming randomness.
pub fn gaussian_noise<R: Rng + ?Sized>(std: f64, rng: &mut R) -> f64 {
    if std == 0.0 {
        return 0.0;
    }
    let z: f64 = StandardNormal.sample(rng);
    std * z
}

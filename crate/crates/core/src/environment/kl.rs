use rand::Rng;

use crate::environment::{Instance, NoiseModel};
use crate::tensor::ArmMeansTensor;

/// KL divergence between two fully dependent unit-Gaussian reward vectors
/// whose means differ by `alpha` in every coordinate.
pub fn kl_fully_dependent(alpha: f64) -> f64 {
    alpha * alpha / 2.0
}

/// Monte-Carlo estimate of the same divergence: the average log-likelihood
/// ratio of `samples` draws from `X`, where `Y` has means `mu_x - alpha`.
///
/// `mu_x` must lie in [0, 1]. Returns `(estimate, standard_error)`. Panics
/// if a draw leaves the one-dimensional support shared by both distributions.
pub fn kl_monte_carlo<R: Rng + ?Sized>(mu_x: &[f64], alpha: f64, samples: u64, rng: &mut R) -> (f64, f64) {
    assert!(samples >= 2);
    let d = mu_x.len();
    let mu_y: Vec<f64> = mu_x.iter().map(|m| m - alpha).collect();
    let tensor = ArmMeansTensor::new(1, 1, d, mu_x.to_vec()).expect("means must lie in [0, 1]");
    let inst = Instance::new(tensor, NoiseModel::fully_dependent(), "kl").expect("valid noise");

    let mut x = vec![0.0; d];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        inst.sample_into(0, 0, rng, &mut x);
        for k in 1..d {
            let dx = x[k] - x[0] - (mu_x[k] - mu_x[0]);
            let dy = x[k] - x[0] - (mu_y[k] - mu_y[0]);
            assert!(dx.abs() < 1e-9 && dy.abs() < 1e-9, "draw left the shared support");
        }
        // Both densities live on the same line, parameterised by x[0].
        let llr = 0.5 * ((x[0] - mu_y[0]).powi(2) - (x[0] - mu_x[0]).powi(2));
        sum += llr;
        sum_sq += llr * llr;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq - n * mean * mean) / (n - 1.0);
    (mean, (var / n).sqrt())
}

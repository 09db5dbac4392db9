//! Empirical smoothing error from seeded simulation.
//!
//! Trial `t` draws from a ChaCha8 stream keyed by `(seed, t)`, so the result
//! does not depend on how trials are scheduled across threads. Per-trial
//! errors are summed in trial order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{SensorSet, SystemModel};

use super::smoother::{simulate_states, Smoother};

pub const MIN_TRIALS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloMse {
    pub trials: usize,
    /// Mean of `‖z̄ - z̃‖²`, the quantity whose expectation is `tr[(L + U_S)⁻¹]`.
    pub mean: f64,
    pub std_error: f64,
    /// Mean of `Σ_k ‖x_k - x̃_k‖²` with `x̃ = Φ z̃`; its expectation is
    /// `tr[Φ (L + U_S)⁻¹ Φᵀ]`.
    pub state_mean: f64,
    pub state_std_error: f64,
    /// Largest `‖x̄ - Φ z̄‖_∞` seen between the simulated recursion and the stacked map.
    pub max_reconstruction_error: f64,
}

pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

pub fn monte_carlo_mse(model: &SystemModel, s: &SensorSet, trials: usize, seed: u64) -> Result<MonteCarloMse> {
    if trials < MIN_TRIALS {
        return Err(Error::validation(format!(
            "Monte-Carlo needs at least {MIN_TRIALS} trials, got {trials}"
        )));
    }
    let smoother = Smoother::new(model, s)?;
    let n = model.n();
    let phi = smoother.phi();

    let per_trial: Vec<(f64, f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let sample = smoother.sample(&mut trial_rng(seed, t));
            let z_err = (&sample.z_bar - &sample.z_tilde).norm_squared();
            let states = simulate_states(model, &sample.z_bar);
            let stacked_states = phi * &sample.z_bar;
            let estimates = phi * &sample.z_tilde;
            let mut x_err = 0.0;
            let mut recon = 0.0f64;
            for (k, x) in states.iter().enumerate() {
                let est = estimates.rows(k * n, n);
                x_err += (x - est).norm_squared();
                recon = recon.max((x - stacked_states.rows(k * n, n)).amax());
            }
            (z_err, x_err, recon)
        })
        .collect();

    let (mean, std_error) = mean_and_std_error(per_trial.iter().map(|t| t.0), trials);
    let (state_mean, state_std_error) = mean_and_std_error(per_trial.iter().map(|t| t.1), trials);
    let max_reconstruction_error = per_trial.iter().map(|t| t.2).fold(0.0, f64::max);
    Ok(MonteCarloMse {
        trials,
        mean,
        std_error,
        state_mean,
        state_std_error,
        max_reconstruction_error,
    })
}

fn mean_and_std_error(values: impl Iterator<Item = f64> + Clone, count: usize) -> (f64, f64) {
    let nf = count as f64;
    let mean = values.clone().sum::<f64>() / nf;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (nf - 1.0);
    (mean, (var / nf).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn too_few_trials() {
        let m = SystemModel::new(
            DMatrix::zeros(1, 1),
            DMatrix::identity(1, 1),
            DMatrix::identity(1, 1),
            DMatrix::identity(1, 1),
            DVector::from_element(1, 1.0),
            1,
        )
        .unwrap();
        assert!(monte_carlo_mse(&m, &SensorSet::full(1), 99, 0).is_err());
    }

    #[test]
    fn stream_per_trial() {
        use rand::Rng;
        let a: u64 = trial_rng(7, 3).random();
        let b: u64 = trial_rng(7, 3).random();
        let c: u64 = trial_rng(7, 4).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}

//! Exponential-cost ground truth used to check the fast paths: exhaustive
//! optimum, exact submodularity ratio / curvature / β, the explicit batch
//! smoother, and a Monte-Carlo estimate of its error.

mod checks;
mod enumeration;
mod monte_carlo;
mod smoother;

pub use checks::{verify_instance, Check, VerifyReport, CHECK_SLACK, IDENTITY_RTOL, MC_SIGMAS};
pub use enumeration::{
    brute_force_optimum, exact_ratios, subset_count, BruteForceResult, ExactRatios, RatioWitness, BRUTE_FORCE_BUDGET,
    EXACT_RATIOS_MAX_P,
};
pub use monte_carlo::{monte_carlo_mse, trial_rng, MonteCarloMse, MIN_TRIALS};
pub use smoother::{
    error_covariance_information_form, observation_matrix, simulate_states, smoother_estimate, Smoother,
    SmoothingSample,
};

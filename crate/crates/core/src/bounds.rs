//! Polynomial-time lower bounds on the greedy approximation ratio.
//!
//! From the spectra of `L` and `L + U_I` we get a lower bound `γ̲` on the
//! submodularity ratio and an upper bound `ᾱ` on the curvature:
//!
//! ```text
//! γ̲ = λ_min(L) / λ_max(L + U_I)
//! ᾱ = 1 - γ̲²
//! ```
//!
//! and the guarantee `f(S^g) ≥ (1/ᾱ)(1 - e^{-ᾱγ̲}) f(S*)`. Two reference
//! bounds are reported alongside: the β-submodularity bound `1 - e^{-γ̲}`
//! and the trace-ratio bound `γ̲'` with `ᾱ' = 1 - γ̲'`.

use log::{info, warn};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::{relative_diff, sym_eigenvalues, sym_extreme_eigenvalues, symmetrize};
use crate::model::StackedModel;

/// Below this curvature the guarantee coefficient is evaluated by its series.
const SMALL_ALPHA: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub gamma_lower: f64,
    pub alpha_upper: f64,
    /// `(1/ᾱ)(1 - e^{-ᾱγ̲})`.
    pub coeff_ours: f64,
    /// `1 - e^{-γ̲}`.
    pub coeff_chamon: f64,
    pub gamma_summers: f64,
    pub alpha_summers: f64,
    pub coeff_summers: f64,
    pub lambda_min_l: f64,
    pub lambda_max_lui: f64,
    /// `min_ω tr(U_ω)`.
    pub min_sensor_trace: f64,
    /// `max_ω tr(U_ω)`.
    pub max_sensor_trace: f64,
    /// `min_ω λ_min(L + U_ω)`.
    pub min_sensor_lambda: f64,
}

impl BoundsReport {
    /// Assembles every bound from the spectral quantities they depend on.
    ///
    /// `sensor_traces[ω]` is `tr(U_ω)` and `sensor_min_eigs[ω]` is
    /// `λ_min(L + U_ω)`.
    pub fn from_spectra(
        lambda_min_l: f64,
        lambda_max_lui: f64,
        sensor_traces: &[f64],
        sensor_min_eigs: &[f64],
    ) -> Self {
        let gamma_lower = lambda_min_l / lambda_max_lui;
        let alpha_upper = 1.0 - gamma_lower * gamma_lower;

        let min_trace = sensor_traces.iter().copied().fold(f64::INFINITY, f64::min);
        let max_trace = sensor_traces.iter().copied().fold(0.0, f64::max);
        let min_lambda = sensor_min_eigs.iter().copied().fold(f64::INFINITY, f64::min);
        let raw_summers = if min_trace <= 0.0 || max_trace <= 0.0 {
            0.0
        } else {
            (min_trace * min_lambda * min_lambda) / (max_trace * lambda_max_lui * lambda_max_lui)
        };
        let gamma_summers = raw_summers.clamp(0.0, 1.0);
        if gamma_summers != raw_summers {
            info!("trace-ratio bound {raw_summers} clamped to {gamma_summers}");
        }
        let alpha_summers = 1.0 - gamma_summers;

        Self {
            gamma_lower,
            alpha_upper,
            coeff_ours: guarantee_coefficient(gamma_lower, alpha_upper),
            coeff_chamon: -(-gamma_lower).exp_m1(),
            gamma_summers,
            alpha_summers,
            coeff_summers: guarantee_coefficient(gamma_summers, alpha_summers),
            lambda_min_l,
            lambda_max_lui,
            min_sensor_trace: min_trace,
            max_sensor_trace: max_trace,
            min_sensor_lambda: min_lambda,
        }
    }
}

/// `(1/α)(1 - e^{-αγ})`, the greedy guarantee for submodularity ratio `γ`
/// and curvature `α`. Continuous at `α = 0`, where it equals `γ`.
pub fn guarantee_coefficient(gamma: f64, alpha: f64) -> f64 {
    if alpha < SMALL_ALPHA {
        let x = alpha * gamma;
        gamma * (1.0 - x / 2.0 + x * x / 6.0)
    } else {
        -(-alpha * gamma).exp_m1() / alpha
    }
}

pub fn compute_bounds(stacked: &StackedModel) -> BoundsReport {
    let l = stacked.l();
    let (lambda_min_l_direct, _) = sym_extreme_eigenvalues(l);
    // Z is block diagonal; its largest eigenvalue is the largest over blocks.
    let lambda_max_z = sym_extreme_eigenvalues(stacked.z()).1;
    let lambda_min_l = lambda_max_z.recip();
    let drift = relative_diff(lambda_min_l, lambda_min_l_direct);
    if drift > 1e-8 {
        warn!("λ_min(L) = {lambda_min_l_direct:e} disagrees with 1/λ_max(Z) = {lambda_min_l:e} (rel {drift:e})");
    }

    let mut lui = l.clone();
    for u in stacked.sensor_infos() {
        lui += u;
    }
    let lambda_max_lui = sym_extreme_eigenvalues(&lui).1;

    let per_sensor: Vec<(f64, f64)> = stacked
        .sensor_infos()
        .par_iter()
        .map(|u| (u.trace(), sym_extreme_eigenvalues(&(l + u)).0))
        .collect();
    let (traces, mins): (Vec<f64>, Vec<f64>) = per_sensor.into_iter().unzip();

    BoundsReport::from_spectra(lambda_min_l, lambda_max_lui, &traces, &mins)
}

/// Closed-form bounds for the isotropic case `C = I`, `X0 = W = σ_z² I`,
/// `V = σ_v² I`:
///
/// ```text
/// γ_iso = 1 / (1 + λ_max(ΦᵀΦ) σ_z²/σ_v²)²,   α_iso = 1 - γ_iso
/// ```
///
/// Only valid for `C = I`; the caller is responsible for that.
pub fn isotropic_bounds(sigma_z: f64, sigma_v: f64, phi: &DMatrix<f64>) -> (f64, f64) {
    let lambda = sym_extreme_eigenvalues(&(phi.transpose() * phi)).1;
    isotropic_bounds_from_lambda(sigma_z, sigma_v, lambda)
}

pub fn isotropic_bounds_from_lambda(sigma_z: f64, sigma_v: f64, lambda_max_phtph: f64) -> (f64, f64) {
    let ratio = (sigma_z * sigma_z) / (sigma_v * sigma_v);
    let d = 1.0 + lambda_max_phtph * ratio;
    let gamma = 1.0 / (d * d);
    (gamma, 1.0 - gamma)
}

/// Noise-independent spectral data of an isotropic model (`C = I`).
///
/// With `L = σ_z⁻² I` every bound is a function of these numbers and the two
/// variances, so one decomposition serves a whole noise sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotropicSpectra {
    /// `λ_max(ΦᵀΦ)`.
    pub lambda_max_phtph: f64,
    /// `tr(Φᵀ E_ω Φ)` where `E_ω` picks state `ω` at every time step.
    pub sensor_traces: Vec<f64>,
    /// `λ_min(Φᵀ E_ω Φ)`.
    pub sensor_min_eigs: Vec<f64>,
}

impl IsotropicSpectra {
    pub fn new(phi: &DMatrix<f64>, n: usize, ell: usize) -> Self {
        let dim = n * ell;
        let lambda_max_phtph = sym_extreme_eigenvalues(&(phi.transpose() * phi)).1;
        let (sensor_traces, sensor_min_eigs) = (0..n)
            .map(|w| {
                let rows = DMatrix::from_fn(ell, dim, |k, j| phi[(k * n + w, j)]);
                // BᵀB (dim × dim) shares its nonzero spectrum with the ℓ × ℓ Gram BBᵀ;
                // the remaining dim - ℓ eigenvalues are exactly zero.
                let gram = symmetrize(&(&rows * rows.transpose()));
                let gram_min = sym_eigenvalues(&gram)[0];
                let min = if dim > ell { gram_min.min(0.0) } else { gram_min };
                (rows.norm_squared(), min)
            })
            .unzip();
        Self {
            lambda_max_phtph,
            sensor_traces,
            sensor_min_eigs,
        }
    }

    pub fn report(&self, sigma_z_sq: f64, sigma_v_sq: f64) -> BoundsReport {
        let prior = sigma_z_sq.recip();
        let meas = sigma_v_sq.recip();
        let traces: Vec<f64> = self.sensor_traces.iter().map(|t| meas * t).collect();
        let mins: Vec<f64> = self.sensor_min_eigs.iter().map(|m| prior + meas * m).collect();
        BoundsReport::from_spectra(prior, prior + meas * self.lambda_max_phtph, &traces, &mins)
    }
}

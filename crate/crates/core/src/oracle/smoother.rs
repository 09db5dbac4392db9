//! The batch least-mean-square smoother written out with explicit stacked
//! matrices:
//!
//! ```text
//! ȳ = G z̄ + v̄,   G = (I_ℓ ⊗ S_S C) Φ,   V_S = I_ℓ ⊗ S_S V S_Sᵀ
//! z̃ = Z Gᵀ (V_S + G Z Gᵀ)⁻¹ ȳ
//! ```

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{cholesky, spd_solve, symmetrize};
use crate::model::{build_phi, SensorSet, SystemModel};

/// One simulated draw of the stacked quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingSample {
    /// `[x_0; w_0; …; w_{ℓ-2}]`.
    pub z_bar: DVector<f64>,
    /// Selected outputs stacked time-major.
    pub y_bar: DVector<f64>,
    pub v_bar: DVector<f64>,
    pub z_tilde: DVector<f64>,
}

/// `G = (I_ℓ ⊗ S_S C) Φ`, rows ordered time-major then by sensor index.
pub fn observation_matrix(model: &SystemModel, phi: &DMatrix<f64>, s: &SensorSet) -> DMatrix<f64> {
    let (n, ell) = (model.n(), model.ell());
    let m = s.len();
    let mut g = DMatrix::zeros(m * ell, n * ell);
    for k in 0..ell {
        let block = phi.rows(k * n, n);
        for (r, theta) in s.iter().enumerate() {
            let row = model.c().row(theta - 1) * block;
            g.row_mut(k * m + r).copy_from(&row);
        }
    }
    g
}

fn noise_variances(model: &SystemModel, s: &SensorSet) -> DVector<f64> {
    let ell = model.ell();
    let m = s.len();
    DVector::from_fn(m * ell, |r, _| model.v_diag()[s.indices()[r % m] - 1])
}

fn prior_covariance(model: &SystemModel) -> DMatrix<f64> {
    let (n, ell) = (model.n(), model.ell());
    let mut z = DMatrix::zeros(n * ell, n * ell);
    z.view_mut((0, 0), (n, n)).copy_from(&symmetrize(model.x0()));
    for k in 1..ell {
        z.view_mut((k * n, k * n), (n, n)).copy_from(&symmetrize(model.w()));
    }
    z
}

/// Precomputed smoother for one model and one sensor set.
#[derive(Debug, Clone)]
pub struct Smoother {
    model: SystemModel,
    set: SensorSet,
    phi: DMatrix<f64>,
    z: DMatrix<f64>,
    z_factor: DMatrix<f64>,
    g: DMatrix<f64>,
    noise_var: DVector<f64>,
    gain: DMatrix<f64>,
}

impl Smoother {
    pub fn new(model: &SystemModel, s: &SensorSet) -> Result<Self> {
        if let Some(m) = s.max_index().filter(|&m| m > model.p()) {
            return Err(Error::validation(format!("sensor index {m} outside 1..={}", model.p())));
        }
        let phi = build_phi(model.a(), model.ell());
        let z = prior_covariance(model);
        let z_factor = cholesky(&z, "Z")?.l();
        let g = observation_matrix(model, &phi, s);
        let noise_var = noise_variances(model, s);
        let zgt = &z * g.transpose();
        let innovation = DMatrix::from_diagonal(&noise_var) + &g * &zgt;
        // K = Z Gᵀ (V_S + G Z Gᵀ)⁻¹, from the transposed system (V_S + G Z Gᵀ) Kᵀ = G Z.
        let gain = if s.is_empty() {
            DMatrix::zeros(z.nrows(), 0)
        } else {
            spd_solve(&innovation, &zgt.transpose(), "V_S + G Z Gᵀ")?.transpose()
        };
        Ok(Self {
            model: model.clone(),
            set: s.clone(),
            phi,
            z,
            z_factor,
            g,
            noise_var,
            gain,
        })
    }

    pub fn set(&self) -> &SensorSet {
        &self.set
    }

    pub fn phi(&self) -> &DMatrix<f64> {
        &self.phi
    }

    pub fn observation(&self) -> &DMatrix<f64> {
        &self.g
    }

    /// Gain `K` with `z̃ = K ȳ`.
    pub fn gain(&self) -> &DMatrix<f64> {
        &self.gain
    }

    pub fn estimate(&self, y_bar: &DVector<f64>) -> Result<DVector<f64>> {
        if y_bar.len() != self.g.nrows() {
            return Err(Error::validation(format!(
                "ȳ has length {}, expected {}",
                y_bar.len(),
                self.g.nrows()
            )));
        }
        Ok(&self.gain * y_bar)
    }

    /// `Z - Z Gᵀ (V_S + G Z Gᵀ)⁻¹ G Z`.
    pub fn error_covariance_gain_form(&self) -> DMatrix<f64> {
        symmetrize(&(&self.z - &self.gain * &self.g * &self.z))
    }

    /// Draws `z̄ ~ N(0, Z)` and `v̄ ~ N(0, V_S)`, simulates the states through
    /// the recursion, and smooths the resulting outputs.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SmoothingSample {
        let dim = self.z.nrows();
        let xi = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let z_bar = &self.z_factor * xi;
        let v_bar = DVector::from_fn(self.noise_var.len(), |r, _| {
            rng.sample::<f64, _>(StandardNormal) * self.noise_var[r].sqrt()
        });
        let states = simulate_states(&self.model, &z_bar);
        let m = self.set.len();
        let y_bar = DVector::from_fn(m * self.model.ell(), |r, _| {
            let (k, idx) = (r / m, r % m);
            let theta = self.set.indices()[idx];
            self.model.c().row(theta - 1).dot(&states[k].transpose()) + v_bar[r]
        });
        let z_tilde = &self.gain * &y_bar;
        SmoothingSample {
            z_bar,
            y_bar,
            v_bar,
            z_tilde,
        }
    }
}

/// States `x_0, …, x_{ℓ-1}` from `x_{k+1} = A x_k + w_k` with `z̄ = [x_0; w_0; …]`.
pub fn simulate_states(model: &SystemModel, z_bar: &DVector<f64>) -> Vec<DVector<f64>> {
    let n = model.n();
    let mut states = Vec::with_capacity(model.ell());
    states.push(z_bar.rows(0, n).into_owned());
    for k in 1..model.ell() {
        let next = model.a() * &states[k - 1] + z_bar.rows(k * n, n);
        states.push(next);
    }
    states
}

pub fn smoother_estimate(model: &SystemModel, s: &SensorSet, y_bar: &DVector<f64>) -> Result<DVector<f64>> {
    Smoother::new(model, s)?.estimate(y_bar)
}

/// `(Z⁻¹ + Gᵀ V_S⁻¹ G)⁻¹` assembled from the explicit `G` (for `S = ∅` this is `Z`).
pub fn error_covariance_information_form(model: &SystemModel, s: &SensorSet) -> Result<DMatrix<f64>> {
    let phi = build_phi(model.a(), model.ell());
    let z = prior_covariance(model);
    let mut info = cholesky(&z, "Z")?.inverse();
    if !s.is_empty() {
        let g = observation_matrix(model, &phi, s);
        let inv_var = noise_variances(model, s).map(f64::recip);
        info += g.transpose() * DMatrix::from_diagonal(&inv_var) * &g;
    }
    Ok(symmetrize(&cholesky(&info, "Z⁻¹ + Gᵀ V_S⁻¹ G")?.inverse()))
}

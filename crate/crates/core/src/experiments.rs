//! Noise-ratio sweep of the three guarantee coefficients over random
//! Schur-stable systems, and random problem instances for test fleets.
//!
//! Each trial draws `A` with i.i.d. standard-normal entries and rescales it to
//! the configured spectral radius. The sweep uses the isotropic model
//! `C = I`, `X0 = W = σ_z² I`, `V = σ_v² I` with `σ_z² = σ_v² · 10^{dB/10}`.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector, Schur};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::IsotropicSpectra;
use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::model::{build_phi, SystemModel};

pub const RANDOM_A_RECIPE: &str = "iid-standard-normal-spectral-rescale";

pub const SWEEP_CSV_HEADER: [&str; 7] = [
    "ratio_db",
    "ours_mean",
    "ours_std",
    "chamon_mean",
    "chamon_std",
    "summers_mean",
    "summers_std",
];

const MAX_DRAW_ATTEMPTS: u64 = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub ell: usize,
    pub trials: usize,
    /// `σ_z²/σ_v²` grid in dB, strictly increasing.
    pub ratio_db_grid: Vec<f64>,
    pub sigma_v_sq: f64,
    pub spectral_radius: f64,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 20,
            ell: 10,
            trials: 200,
            ratio_db_grid: db_grid(-30.0, 10.0, 1.0),
            sigma_v_sq: 1.0,
            spectral_radius: 0.9,
            seed: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.ell == 0 {
            return Err(Error::validation("n and ell must be positive"));
        }
        if self.trials == 0 {
            return Err(Error::validation("trials must be at least 1"));
        }
        if !(self.spectral_radius > 0.0 && self.spectral_radius < 1.0) {
            return Err(Error::validation(format!(
                "spectral_radius must lie in (0, 1), got {}",
                self.spectral_radius
            )));
        }
        if !(self.sigma_v_sq > 0.0 && self.sigma_v_sq.is_finite()) {
            return Err(Error::validation("sigma_v_sq must be positive"));
        }
        if self.ratio_db_grid.is_empty() {
            return Err(Error::validation("ratio_db_grid must not be empty"));
        }
        if self.ratio_db_grid.iter().any(|v| !v.is_finite()) || self.ratio_db_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::validation(
                "ratio_db_grid must be finite and strictly increasing",
            ));
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// `start, start + step, …` up to and including `stop` (within rounding).
pub fn db_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    (0..count).map(|k| start + k as f64 * step).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub ratio_db: f64,
    pub ours_mean: f64,
    pub ours_std: f64,
    pub chamon_mean: f64,
    pub chamon_std: f64,
    pub summers_mean: f64,
    pub summers_std: f64,
}

/// Derives an independent 64-bit seed for item `index` of a run seeded by `seed` (SplitMix64).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Largest eigenvalue modulus of a square matrix.
pub fn spectral_radius(a: &DMatrix<f64>) -> Option<f64> {
    let schur = Schur::try_new(a.clone(), f64::EPSILON, 10_000)?;
    Some(schur.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// An `n × n` matrix with i.i.d. standard-normal entries rescaled to the
/// given spectral radius. A draw with zero spectral radius is replaced by
/// the next sub-stream, up to ten attempts.
pub fn random_stable_system(n: usize, spectral_radius_target: f64, seed: u64) -> Result<DMatrix<f64>> {
    if !(spectral_radius_target > 0.0 && spectral_radius_target < 1.0) {
        return Err(Error::validation(format!(
            "spectral radius must lie in (0, 1), got {spectral_radius_target}"
        )));
    }
    for attempt in 0..MAX_DRAW_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt);
        let a = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        match spectral_radius(&a) {
            Some(rho) if rho > 0.0 && rho.is_finite() => return Ok(a * (spectral_radius_target / rho)),
            _ => continue,
        }
    }
    Err(Error::Numerical(format!(
        "no usable random matrix after {MAX_DRAW_ATTEMPTS} draws (seed {seed})"
    )))
}

/// The isotropic model `C = I`, `X0 = W = σ_z² I`, `V = σ_v² I`.
pub fn isotropic_model(a: DMatrix<f64>, ell: usize, sigma_z_sq: f64, sigma_v_sq: f64) -> Result<SystemModel> {
    let n = a.nrows();
    SystemModel::new(
        a,
        DMatrix::identity(n, n),
        DMatrix::identity(n, n) * sigma_z_sq,
        DMatrix::identity(n, n) * sigma_z_sq,
        DVector::from_element(n, sigma_v_sq),
        ell,
    )
}

/// A generic random instance: stable `A`, Gaussian `C`, random SPD `X0` and
/// `W`, and noise variances in `[0.2, 2]`.
pub fn random_instance(n: usize, p: usize, ell: usize, seed: u64) -> Result<SystemModel> {
    let a = random_stable_system(n, 0.9, derive_seed(seed, 0))?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 1));
    let mut normal = |r, c| DMatrix::from_fn(r, c, |_, _| rng.sample::<f64, _>(StandardNormal));
    let c = normal(p, n);
    let spd = |m: DMatrix<f64>| (&m * m.transpose()) / n as f64 + DMatrix::identity(n, n) * 0.5;
    let x0 = spd(normal(n, n));
    let w = spd(normal(n, n));
    let v_diag = DVector::from_fn(p, |_, _| rng.random_range(0.2..2.0));
    SystemModel::new(a, c, x0, w, v_diag, ell)
}

pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<SweepRecord>> {
    config.validate()?;
    let spectra: Vec<IsotropicSpectra> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let a = random_stable_system(config.n, config.spectral_radius, derive_seed(config.seed, t as u64))?;
            let phi = build_phi(&a, config.ell);
            Ok(IsotropicSpectra::new(&phi, config.n, config.ell))
        })
        .collect::<Result<_>>()?;

    let records = config
        .ratio_db_grid
        .iter()
        .map(|&db| {
            let sigma_z_sq = config.sigma_v_sq * 10f64.powf(db / 10.0);
            let reports: Vec<_> = spectra
                .iter()
                .map(|s| s.report(sigma_z_sq, config.sigma_v_sq))
                .collect();
            let (ours_mean, ours_std) = mean_std(reports.iter().map(|r| r.coeff_ours));
            let (chamon_mean, chamon_std) = mean_std(reports.iter().map(|r| r.coeff_chamon));
            let (summers_mean, summers_std) = mean_std(reports.iter().map(|r| r.coeff_summers));
            SweepRecord {
                ratio_db: db,
                ours_mean,
                ours_std,
                chamon_mean,
                chamon_std,
                summers_mean,
                summers_std,
            }
        })
        .collect();
    Ok(records)
}

/// Mean and population standard deviation, summed in iteration order.
fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let count = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / count;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / count;
    (mean, var.sqrt())
}

/// Renders records as CSV text: exact header, `{:?}` floats (shortest
/// round-trip form), `\n` line endings.
pub fn sweep_csv_string(records: &[SweepRecord]) -> String {
    let mut out = SWEEP_CSV_HEADER.join(",");
    out.push('\n');
    for r in records {
        let fields = [
            r.ratio_db,
            r.ours_mean,
            r.ours_std,
            r.chamon_mean,
            r.chamon_std,
            r.summers_mean,
            r.summers_std,
        ];
        let row: Vec<String> = fields.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn write_sweep_csv(records: &[SweepRecord], path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), sweep_csv_string(records).as_bytes())
}

pub fn read_sweep_csv(path: impl AsRef<Path>) -> Result<Vec<SweepRecord>> {
    let path = path.as_ref();
    let parse_err = |message: String| Error::Parse {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| parse_err(e.to_string()))?;
    let header = reader.headers().map_err(|e| parse_err(e.to_string()))?;
    if header.iter().ne(SWEEP_CSV_HEADER.iter().copied()) {
        return Err(parse_err(format!(
            "unexpected header {:?}, expected {}",
            header.iter().collect::<Vec<_>>(),
            SWEEP_CSV_HEADER.join(",")
        )));
    }
    reader
        .deserialize()
        .map(|row| row.map_err(|e| parse_err(e.to_string())))
        .collect()
}

/// Reproducibility record written next to a sweep CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub recipe: String,
    pub spectral_radius: f64,
    pub code_version: String,
}

impl SweepMetadata {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            config: config.clone(),
            seed: config.seed,
            recipe: RANDOM_A_RECIPE.to_string(),
            spectral_radius: config.spectral_radius,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// `<output>.meta.json`.
pub fn metadata_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

pub fn write_sweep_metadata(config: &ExperimentConfig, output: &Path) -> Result<PathBuf> {
    let path = metadata_path(output);
    let text = serde_json::to_string_pretty(&SweepMetadata::new(config)).expect("metadata serializes");
    write_atomic(&path, text.as_bytes())?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_arithmetic() {
        let g = db_grid(-30.0, 10.0, 1.0);
        assert_eq!(g.len(), 41);
        assert_eq!(g[0], -30.0);
        assert_eq!(g[40], 10.0);
    }

    #[test]
    fn scalar_system_is_rescaled_sign() {
        let a = random_stable_system(1, 0.7, 42).unwrap();
        assert!((a[(0, 0)].abs() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn spectral_radius_hits_target() {
        for seed in 0..5 {
            let a = random_stable_system(6, 0.9, seed).unwrap();
            assert!((spectral_radius(&a).unwrap() - 0.9).abs() < 1e-8);
        }
    }

    #[test]
    fn invalid_configs() {
        let bad = [
            ExperimentConfig {
                spectral_radius: 1.0,
                ..Default::default()
            },
            ExperimentConfig {
                ratio_db_grid: vec![0.0, -1.0],
                ..Default::default()
            },
            ExperimentConfig {
                trials: 0,
                ..Default::default()
            },
        ];
        for c in bad {
            assert!(c.validate().is_err());
        }
    }

    #[test]
    fn csv_row_format() {
        let r = SweepRecord {
            ratio_db: -30.0,
            ours_mean: 0.5,
            ours_std: 0.125,
            chamon_mean: 0.25,
            chamon_std: 0.0,
            summers_mean: 1e-7,
            summers_std: 0.1,
        };
        assert_eq!(
            sweep_csv_string(&[r]),
            "ratio_db,ours_mean,ours_std,chamon_mean,chamon_std,summers_mean,summers_std\n\
             -30.0,0.5,0.125,0.25,0.0,1e-7,0.1\n"
        );
        assert_eq!(sweep_csv_string(&[]), format!("{}\n", SWEEP_CSV_HEADER.join(",")));
    }

    #[test]
    fn metadata_sidecar_name() {
        assert_eq!(
            metadata_path(Path::new("out/sweep.csv")),
            PathBuf::from("out/sweep.csv.meta.json")
        );
    }
}

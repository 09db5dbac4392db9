//! Sensor selection for batch linear-Gaussian smoothing.
//!
//! Outputs of a linear system are chosen greedily to minimize the smoothing
//! MSE `J(S) = tr[(L + U_S)⁻¹]`. The normalized objective `f(S) = J(∅) - J(S)`
//! is monotone but neither submodular nor supermodular, so the greedy result
//! comes with a guarantee built from a submodularity-ratio lower bound and a
//! curvature upper bound ([`bounds`]). The [`oracle`] module checks all of it
//! against brute force and simulation.
//!
//! ```no_run
//! use sensor_select::{build_stacked, compute_bounds, greedy_select, SystemModel};
//!
//! let model = SystemModel::load("fixtures/small_random.json")?;
//! let stacked = build_stacked(&model)?;
//! let selection = greedy_select(&stacked, 2)?;
//! let bounds = compute_bounds(&stacked);
//! println!("{} guarantees {:.3}", selection.selected, bounds.coeff_ours);
//! # Ok::<(), sensor_select::Error>(())
//! ```
//!
//! Runnable walkthroughs live in `examples/`.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod greedy;
mod io;
pub mod linalg;
pub mod model;
pub mod objective;
pub mod oracle;

pub use bounds::{compute_bounds, guarantee_coefficient, isotropic_bounds, BoundsReport, IsotropicSpectra};
pub use error::{Error, Result};
pub use experiments::{run_sweep, ExperimentConfig, SweepRecord};
pub use greedy::{greedy_select, GreedyStep, SelectionResult};
pub use model::{build_phi, build_stacked, sensor_info_matrix, SensorSet, StackedModel, SystemModel};
pub use objective::{info_sum, marginal_gain, mse, ScoreValue};

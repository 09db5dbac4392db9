//! Runs every oracle-backed invariant on one instance and tabulates the outcome.

use serde::Serialize;

use crate::bounds::{compute_bounds, guarantee_coefficient, BoundsReport};
use crate::error::Result;
use crate::greedy::{greedy_select, SelectionResult};
use crate::linalg::relative_diff;
use crate::model::{build_phi, StackedModel};
use crate::objective::mse;

use super::enumeration::{
    brute_force_optimum, exact_ratios, subset_count, BruteForceResult, ExactRatios, BRUTE_FORCE_BUDGET,
    EXACT_RATIOS_MAX_P,
};
use super::monte_carlo::{monte_carlo_mse, MonteCarloMse};
use super::smoother::{error_covariance_information_form, Smoother};

/// Absolute slack on every inequality between set-function values.
pub const CHECK_SLACK: f64 = 1e-9;
/// Relative agreement required between the two error-covariance forms.
pub const IDENTITY_RTOL: f64 = 1e-7;
/// Monte-Carlo agreement, in standard errors.
pub const MC_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub selection: SelectionResult,
    pub bounds: BoundsReport,
    pub optimum: Option<BruteForceResult>,
    pub ratios: Option<ExactRatios>,
    pub monte_carlo: MonteCarloMse,
    pub checks: Vec<Check>,
    pub notices: Vec<String>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

struct Checks(Vec<Check>);

impl Checks {
    fn push(&mut self, name: &str, passed: bool, detail: String) {
        self.0.push(Check {
            name: name.to_string(),
            passed,
            detail,
        });
    }
}

pub fn verify_instance(stacked: &StackedModel, s: usize, trials: usize, seed: u64) -> Result<VerifyReport> {
    let mut checks = Checks(Vec::new());
    let mut notices = Vec::new();

    let selection = greedy_select(stacked, s)?;
    let greedy_f = selection.score().f;
    let bounds = compute_bounds(stacked);
    let coeff_bound = guarantee_coefficient(bounds.gamma_lower, bounds.alpha_upper);

    checks.push(
        "bounds strictly inside range",
        bounds.gamma_lower > 0.0 && bounds.alpha_upper < 1.0,
        format!("γ̲ = {:e}, ᾱ = {:e}", bounds.gamma_lower, bounds.alpha_upper),
    );
    let monotone = selection
        .steps
        .windows(2)
        .all(|w| w[1].f_after >= w[0].f_after - CHECK_SLACK)
        && selection.steps[0].f_after >= -CHECK_SLACK;
    checks.push("f nondecreasing along greedy steps", monotone, String::new());

    let optimum = if subset_count(stacked.p(), s) <= BRUTE_FORCE_BUDGET {
        Some(brute_force_optimum(stacked, s)?)
    } else {
        notices.push(format!("brute force skipped: more than {BRUTE_FORCE_BUDGET} subsets"));
        None
    };
    let ratios = if stacked.p() <= EXACT_RATIOS_MAX_P {
        Some(exact_ratios(stacked)?)
    } else {
        notices.push(format!(
            "exact ratios skipped: p = {} exceeds {EXACT_RATIOS_MAX_P}",
            stacked.p()
        ));
        None
    };

    if let Some(opt) = &optimum {
        let f_star = opt.score.f;
        checks.push(
            "optimum dominates greedy",
            f_star >= greedy_f - CHECK_SLACK,
            format!("f* = {f_star}, f(S^g) = {greedy_f}"),
        );
        checks.push(
            "guarantee with bounds",
            greedy_f >= coeff_bound * f_star - CHECK_SLACK,
            format!("f(S^g) = {greedy_f} vs {coeff_bound} · f* = {}", coeff_bound * f_star),
        );
        if let Some(r) = &ratios {
            let coeff_exact = guarantee_coefficient(r.gamma_exact, r.alpha_exact);
            checks.push(
                "guarantee with exact ratios",
                greedy_f >= coeff_exact * f_star - CHECK_SLACK,
                format!("f(S^g) = {greedy_f} vs {coeff_exact} · f* = {}", coeff_exact * f_star),
            );
            checks.push(
                "exact guarantee dominates bound guarantee",
                coeff_exact * f_star >= coeff_bound * f_star - CHECK_SLACK,
                format!("{coeff_exact} vs {coeff_bound}"),
            );
        }
    }
    if let Some(r) = &ratios {
        checks.push(
            "gamma_exact >= gamma_lower",
            r.gamma_exact >= bounds.gamma_lower - CHECK_SLACK,
            format!("{} vs {}", r.gamma_exact, bounds.gamma_lower),
        );
        checks.push(
            "alpha_exact <= alpha_upper",
            r.alpha_exact <= bounds.alpha_upper + CHECK_SLACK,
            format!("{} vs {}", r.alpha_exact, bounds.alpha_upper),
        );
        checks.push(
            "beta_exact <= gamma_exact",
            r.beta_exact <= r.gamma_exact + CHECK_SLACK,
            format!("{} vs {}", r.beta_exact, r.gamma_exact),
        );
        let in_range = |v: f64| (-CHECK_SLACK..=1.0 + CHECK_SLACK).contains(&v);
        checks.push(
            "gamma_exact and alpha_exact in [0, 1]",
            in_range(r.gamma_exact) && in_range(r.alpha_exact),
            format!("γ = {}, α = {}", r.gamma_exact, r.alpha_exact),
        );
    }

    let set = &selection.selected;
    let j = mse(stacked, set)?.j;
    let smoother = Smoother::new(stacked.model(), set)?;
    let sigma_gain = smoother.error_covariance_gain_form();
    let sigma_info = error_covariance_information_form(stacked.model(), set)?;
    let rel_gain = relative_diff(sigma_gain.trace(), j);
    let rel_info = relative_diff(sigma_info.trace(), j);
    checks.push(
        "matrix inversion lemma",
        rel_gain < IDENTITY_RTOL && rel_info < IDENTITY_RTOL,
        format!("rel diff {rel_gain:e} (gain form), {rel_info:e} (information form)"),
    );

    let mc = monte_carlo_mse(stacked.model(), set, trials, seed)?;
    checks.push(
        "Monte-Carlo error matches J(S^g)",
        (mc.mean - j).abs() <= MC_SIGMAS * mc.std_error,
        format!("mean {} ± {} vs J = {j}", mc.mean, mc.std_error),
    );
    let phi = build_phi(stacked.model().a(), stacked.ell());
    let state_trace = (&phi * &sigma_info * phi.transpose()).trace();
    checks.push(
        "Monte-Carlo state error matches tr(Φ Σ Φᵀ)",
        (mc.state_mean - state_trace).abs() <= MC_SIGMAS * mc.state_std_error,
        format!("mean {} ± {} vs {state_trace}", mc.state_mean, mc.state_std_error),
    );
    checks.push(
        "state recursion equals Φ z̄",
        mc.max_reconstruction_error <= 1e-9,
        format!("max deviation {:e}", mc.max_reconstruction_error),
    );

    Ok(VerifyReport {
        selection,
        bounds,
        optimum,
        ratios,
        monte_carlo: mc,
        checks: checks.0,
        notices,
    })
}

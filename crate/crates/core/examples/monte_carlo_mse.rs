//! Simulated smoothing error against the analytic trace.

use sensor_select::experiments::random_instance;
use sensor_select::oracle::{error_covariance_information_form, monte_carlo_mse};
use sensor_select::{build_stacked, mse, SensorSet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = random_instance(2, 4, 3, 11)?;
    let stacked = build_stacked(&model)?;
    let trials = 50_000;

    for indices in [vec![], vec![1], vec![2, 4], vec![1, 2, 3, 4]] {
        let s = SensorSet::new(indices, 4)?;
        let j = mse(&stacked, &s)?.j;
        let mc = monte_carlo_mse(&model, &s, trials, 3)?;
        let sigma = error_covariance_information_form(&model, &s)?;
        let state = (stacked.phi() * sigma * stacked.phi().transpose()).trace();
        println!(
            "{:<12} J {:.4}  simulated {:.4} ± {:.4}   state error {:.4}  simulated {:.4} ± {:.4}",
            s.to_string(),
            j,
            mc.mean,
            mc.std_error,
            state,
            mc.state_mean,
            mc.state_std_error
        );
    }
    Ok(())
}

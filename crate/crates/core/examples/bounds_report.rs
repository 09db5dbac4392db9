//! Certified guarantee coefficients for a model, next to the exact ratios.

use sensor_select::oracle::exact_ratios;
use sensor_select::{build_stacked, compute_bounds, guarantee_coefficient, SystemModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/small_random.json").to_string());
    let stacked = build_stacked(&SystemModel::load(&path)?)?;
    let b = compute_bounds(&stacked);

    println!("gamma lower  {:.6}", b.gamma_lower);
    println!("alpha upper  {:.6}", b.alpha_upper);
    println!("ours         {:.6}", b.coeff_ours);
    println!("chamon       {:.6}", b.coeff_chamon);
    println!("summers      {:.6}  (gamma' = {:.6})", b.coeff_summers, b.gamma_summers);

    if stacked.model().p() <= 8 {
        let r = exact_ratios(&stacked)?;
        println!(
            "exact: gamma {:.6}  alpha {:.6}  beta {:.6}  coefficient {:.6}",
            r.gamma_exact,
            r.alpha_exact,
            r.beta_exact,
            guarantee_coefficient(r.gamma_exact, r.alpha_exact.max(0.0))
        );
    }
    Ok(())
}

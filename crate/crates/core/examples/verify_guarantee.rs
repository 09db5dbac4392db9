//! Greedy against the brute-force optimum on random instances, with the
//! certified fraction it must reach.

use sensor_select::experiments::random_instance;
use sensor_select::oracle::brute_force_optimum;
use sensor_select::{build_stacked, compute_bounds, greedy_select, guarantee_coefficient};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("seed   greedy f   optimal f   ratio   certified");
    for seed in 0..10 {
        let stacked = build_stacked(&random_instance(3, 7, 3, seed)?)?;
        let greedy = greedy_select(&stacked, 3)?.score().f;
        let opt = brute_force_optimum(&stacked, 3)?.score.f;
        let b = compute_bounds(&stacked);
        let coeff = guarantee_coefficient(b.gamma_lower, b.alpha_upper);
        assert!(greedy >= coeff * opt - 1e-9);
        println!(
            "{seed:>4}   {greedy:>8.4}   {opt:>9.4}   {:.4}   {coeff:.4}",
            greedy / opt
        );
    }
    Ok(())
}

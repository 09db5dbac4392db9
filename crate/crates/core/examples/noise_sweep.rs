//! Guarantee coefficients across process-to-measurement noise ratios for
//! random stable systems. Writes the CSV consumed by the plotting script.
//!
//! cargo run --release --example noise_sweep -- [out.csv]

use sensor_select::experiments::{db_grid, run_sweep, write_sweep_csv, write_sweep_metadata, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "noise_sweep.csv".to_string());
    let cfg = ExperimentConfig {
        n: 10,
        trials: 50,
        ratio_db_grid: db_grid(-30.0, 10.0, 5.0),
        ..ExperimentConfig::default()
    };
    let records = run_sweep(&cfg)?;
    println!("{:>6}  {:>8}  {:>8}  {:>8}", "dB", "ours", "chamon", "summers");
    for r in &records {
        println!(
            "{:>6}  {:.6}  {:.6}  {:.6}",
            r.ratio_db, r.ours_mean, r.chamon_mean, r.summers_mean
        );
    }
    write_sweep_csv(&records, &out)?;
    let meta = write_sweep_metadata(&cfg, out.as_ref())?;
    println!("wrote {out} and {}", meta.display());
    Ok(())
}

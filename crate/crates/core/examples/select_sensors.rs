//! Greedy selection on a model file.
//!
//! cargo run --example select_sensors -- [model.json] [s]

use std::path::PathBuf;

use sensor_select::{build_stacked, greedy_select, SystemModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/tracking_6.json"));
    let s: usize = args.next().map(|v| v.parse()).transpose()?.unwrap_or(3);

    let model = SystemModel::load(&path)?;
    let stacked = build_stacked(&model)?;
    let result = greedy_select(&stacked, s)?;

    println!("J(empty) = {:.6}", stacked.j_empty());
    for (k, step) in result.steps.iter().enumerate() {
        println!(
            "step {}: sensor {:>2}  gain {:.6}  J {:.6}",
            k + 1,
            step.chosen,
            step.gain,
            step.j_after
        );
    }
    println!("selected {}  f = {:.6}", result.selected, result.score().f);
    Ok(())
}

//! Exhaustive submodularity ratio, curvature and approximate submodularity
//! for a small model, with the sets attaining each extreme.

use sensor_select::oracle::{exact_ratios, RatioWitness};
use sensor_select::{build_stacked, SystemModel};

fn show(name: &str, value: f64, w: &Option<RatioWitness>) {
    match w {
        Some(w) => match w.j {
            Some(j) => println!("{name:<6} {value:.6}  S = {}  Omega = {}  j = {j}", w.s, w.omega),
            None => println!("{name:<6} {value:.6}  S = {}  Omega = {}", w.s, w.omega),
        },
        None => println!("{name:<6} {value:.6}  (no admissible pair)"),
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/tracking_6.json").to_string());
    let stacked = build_stacked(&SystemModel::load(&path)?)?;
    let r = exact_ratios(&stacked)?;
    show("gamma", r.gamma_exact, &r.gamma_witness);
    show("alpha", r.alpha_exact, &r.alpha_witness);
    show("beta", r.beta_exact, &r.beta_witness);
    Ok(())
}

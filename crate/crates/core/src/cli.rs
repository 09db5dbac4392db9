//! `sensor-select` command line: `select`, `bounds`, `verify`, `sweep`.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 bad input or usage,
//! 3 a verification check failed.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::bounds::compute_bounds;
use crate::error::Error;
use crate::experiments::{run_sweep, write_sweep_csv, write_sweep_metadata, ExperimentConfig};
use crate::greedy::greedy_select;
use crate::model::{build_stacked, SystemModel};
use crate::oracle::verify_instance;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "sensor-select",
    version,
    about = "Greedy sensor selection with approximation guarantees"
)]
pub struct Cli {
    /// Machine-readable JSON output
    #[arg(long, global = true)]
    pub json: bool,

    /// Cap on worker threads
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Greedy selection of at most S sensors
    Select {
        model: PathBuf,
        #[arg(short = 's', long = "size", value_parser = clap::value_parser!(u64).range(1..))]
        s: u64,
    },
    /// Approximation-ratio bounds of a model
    Bounds { model: PathBuf },
    /// Check greedy, bounds and smoother against brute force and simulation
    Verify {
        model: PathBuf,
        #[arg(short = 's', long = "size", value_parser = clap::value_parser!(u64).range(1..))]
        s: u64,
        #[arg(long, default_value_t = 20_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Noise-ratio sweep of the guarantee coefficients over random stable systems
    Sweep {
        config: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Overrides the seed in the config file
        #[arg(long)]
        seed: Option<u64>,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start thread pool: {e}");
            return EXIT_NUMERICAL;
        }
    };
    match pool.install(|| execute(&cli, out)) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_input_error() {
                EXIT_INPUT
            } else {
                EXIT_NUMERICAL
            }
        }
    }
}

fn execute(cli: &Cli, out: &mut (dyn Write + Send)) -> Result<i32, Error> {
    let io_err = |source| Error::Io {
        path: PathBuf::from("<stdout>"),
        source,
    };
    match &cli.command {
        Command::Select { model, s } => {
            let stacked = build_stacked(&SystemModel::load(model)?)?;
            let result = greedy_select(&stacked, *s as usize)?;
            if cli.json {
                let score = result.score();
                let doc = json!({
                    "steps": result.steps,
                    "selected": result.selected,
                    "s": result.s,
                    "j": score.j,
                    "f": score.f,
                    "j_empty": stacked.j_empty(),
                });
                writeln!(out, "{}", serde_json::to_string_pretty(&doc).unwrap()).map_err(io_err)?;
            } else {
                writeln!(
                    out,
                    "{:>4}  {:>6}  {:>12}  {:>12}  {:>12}",
                    "step", "sensor", "gain", "J", "f"
                )
                .map_err(io_err)?;
                for (i, st) in result.steps.iter().enumerate() {
                    writeln!(
                        out,
                        "{:>4}  {:>6}  {:>12}  {:>12}  {:>12}",
                        i + 1,
                        st.chosen,
                        sig6(st.gain),
                        sig6(st.j_after),
                        sig6(st.f_after)
                    )
                    .map_err(io_err)?;
                }
                writeln!(out, "selected: {}", result.selected).map_err(io_err)?;
            }
            Ok(EXIT_OK)
        }
        Command::Bounds { model } => {
            let stacked = build_stacked(&SystemModel::load(model)?)?;
            let b = compute_bounds(&stacked);
            if cli.json {
                writeln!(out, "{}", serde_json::to_string_pretty(&b).unwrap()).map_err(io_err)?;
            } else {
                let rows = [
                    ("gamma_lower", b.gamma_lower),
                    ("alpha_upper", b.alpha_upper),
                    ("coeff_ours", b.coeff_ours),
                    ("coeff_chamon", b.coeff_chamon),
                    ("gamma_summers", b.gamma_summers),
                    ("alpha_summers", b.alpha_summers),
                    ("coeff_summers", b.coeff_summers),
                    ("lambda_min_l", b.lambda_min_l),
                    ("lambda_max_lui", b.lambda_max_lui),
                    ("min_sensor_trace", b.min_sensor_trace),
                    ("max_sensor_trace", b.max_sensor_trace),
                    ("min_sensor_lambda", b.min_sensor_lambda),
                ];
                for (name, v) in rows {
                    writeln!(out, "{name:<18} {}", sig6(v)).map_err(io_err)?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Verify { model, s, trials, seed } => {
            let stacked = build_stacked(&SystemModel::load(model)?)?;
            let report = verify_instance(&stacked, *s as usize, *trials, *seed)?;
            if cli.json {
                writeln!(out, "{}", serde_json::to_string_pretty(&report).unwrap()).map_err(io_err)?;
            } else {
                for notice in &report.notices {
                    writeln!(out, "note: {notice}").map_err(io_err)?;
                }
                for c in &report.checks {
                    let mark = if c.passed { "PASS" } else { "FAIL" };
                    writeln!(out, "{mark}  {:<44} {}", c.name, c.detail).map_err(io_err)?;
                }
                writeln!(out, "selected: {}", report.selection.selected).map_err(io_err)?;
            }
            Ok(if report.all_passed() {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            })
        }
        Command::Sweep { config, output, seed } => {
            let mut cfg = ExperimentConfig::load(config)?;
            if let Some(seed) = seed {
                cfg.seed = *seed;
            }
            let records = run_sweep(&cfg)?;
            write_sweep_csv(&records, output)?;
            let meta = write_sweep_metadata(&cfg, output)?;
            if cli.json {
                writeln!(out, "{}", serde_json::to_string_pretty(&records).unwrap()).map_err(io_err)?;
            } else {
                writeln!(out, "{:>8}  {:>10}  {:>10}  {:>10}", "dB", "ours", "chamon", "summers").map_err(io_err)?;
                for r in &records {
                    writeln!(
                        out,
                        "{:>8}  {:>10}  {:>10}  {:>10}",
                        sig6(r.ratio_db),
                        sig6(r.ours_mean),
                        sig6(r.chamon_mean),
                        sig6(r.summers_mean)
                    )
                    .map_err(io_err)?;
                }
                writeln!(out, "wrote {} and {}", output.display(), meta.display()).map_err(io_err)?;
            }
            Ok(EXIT_OK)
        }
    }
}

/// Six significant digits.
pub fn sig6(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let mag = v.abs().log10().floor() as i32;
    if (-4..6).contains(&mag) {
        let decimals = (5 - mag).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.5e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_digits() {
        assert_eq!(sig6(1.0 / 3.0), "0.333333");
        assert_eq!(sig6(8.0 / 9.0), "0.888889");
        assert_eq!(sig6(-30.0), "-30.0000");
        assert_eq!(sig6(123456.0), "123456");
        assert_eq!(sig6(1234567.0), "1.23457e6");
        assert_eq!(sig6(0.0), "0");
    }
}

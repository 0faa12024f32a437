//! Sweep the neighbor pulse width at fixed strength.
//!
//! Wider pulses spread the same charge v over a longer window, lowering the
//! instantaneous potential, so the period grows with w. The law captures
//! this through the effective drive v0 + 4qv/w. Run with:
//!
//!     cargo run --release --example width_sweep

use std::path::PathBuf;

use qnet::dynamics::SimParams;
use qnet::experiments::{self, SweepParam};
use qnet::lattice::{Boundary, LatticeSpec};
use qnet::output::{self, OutputFormat};

fn main() -> Result<(), qnet::Error> {
    let spec = LatticeSpec::new(24, 24, Boundary::Periodic)?;
    let params = SimParams {
        t_total: 0.3,
        burn_in: 0.1,
        seed: 2024,
        ..SimParams::default()
    };
    let values = [0.1, 0.2, 0.3, 0.5, 1.0];
    let runs = 5;

    println!("sweeping pulse width over {values:?} with {runs} runs per point...");
    let results = experiments::sweep(&values, SweepParam::PulseWidth, &params, &spec, runs)?;

    println!();
    println!("{:>6} {:>10} {:>10} {:>10} {:>7}", "w", "measured", "stderr", "predicted", "ratio");
    for r in &results {
        let value = r.sweep_value.expect("sweep point").1;
        let est = r.period.as_ref().expect("period");
        let pred = r.prediction.as_ref().expect("prediction");
        println!(
            "{value:>6} {:>10.5} {:>10.5} {:>10.5} {:>7.3}",
            est.mean_period,
            est.std_error,
            pred.period,
            est.mean_period / pred.period
        );
    }

    let dir = std::env::var_os(qnet::cli::OUT_ENV_VAR)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("qnet-out"))
        .join("width_sweep");
    let manifest = output::write_sweep_outputs(&results, &dir, &[OutputFormat::Csv, OutputFormat::Json])?;
    println!();
    println!("wrote {} files under {}", manifest.files.len(), manifest.dir.display());
    Ok(())
}

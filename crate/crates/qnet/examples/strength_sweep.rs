//! Sweep the neighbor pulse strength and compare measured periods against
//! the closed-form law.
//!
//! Every point runs several independent seeded lattices from warm random
//! starts and pools their inter-spike intervals. Per-point spike logs and a
//! sweep.csv land under $QNET_OUT/strength_sweep (default ./qnet-out). Run
//! with:
//!
//!     cargo run --release --example strength_sweep

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
    let values = [0.1, 0.2, 0.3, 0.4, 0.5, 1.0, 10.0];
    let runs = 5;

    println!("sweeping pulse strength over {values:?} with {runs} runs per point...");
    let results = experiments::sweep(&values, SweepParam::PulseStrength, &params, &spec, runs)?;

    println!();
    println!("{:>6} {:>10} {:>10} {:>10} {:>7}", "v", "measured", "stderr", "predicted", "ratio");
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
        .join("strength_sweep");
    let manifest = output::write_sweep_outputs(&results, &dir, &[OutputFormat::Csv, OutputFormat::Json])?;
    println!();
    println!("wrote {} files under {}", manifest.files.len(), manifest.dir.display());
    Ok(())
}

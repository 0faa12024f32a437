//! One full simulation with diagnostics and output files.
//!
//! Runs a 24x24 periodic lattice for one second of simulated time, measures
//! the mean firing period, fits straight lines to the pooled and single-
//! neuron cumulative spike counts, and writes the spike log, cumulative
//! counts, rate series, and a JSON summary. Run with:
//!
//!     cargo run --release --example single_run
//!
//! Output lands in $QNET_OUT/single_run, or ./qnet-out/single_run if the
//! variable is unset.

use std::path::PathBuf;

use qnet::dynamics::SimParams;
use qnet::experiments;
use qnet::lattice::{Boundary, LatticeSpec, Node};
use qnet::output::{self, OutputFormat};

fn out_dir(name: &str) -> PathBuf {
    std::env::var_os(qnet::cli::OUT_ENV_VAR)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("qnet-out"))
        .join(name)
}

fn main() -> Result<(), qnet::Error> {
    let spec = LatticeSpec::new(24, 24, Boundary::Periodic)?;
    let params = SimParams {
        t_total: 1.0,
        burn_in: 0.2,
        seed: 7,
        ..SimParams::default()
    };
    let tracked = Node::new(12, 12);

    println!("running {}x{} lattice for {} time units...", spec.rows, spec.cols, params.t_total);
    let result = experiments::single_run_diagnostics(&params, &spec, tracked)?;

    let n_events = result.raster.as_ref().map_or(0, |log| log.events.len());
    println!("total spikes: {n_events}");
    if let Some(est) = &result.period {
        println!(
            "mean period: {:.5} +/- {:.5}  ({} intervals)",
            est.mean_period, est.std_error, est.n_intervals
        );
    }
    if let Some(pred) = &result.prediction {
        println!("predicted period: {:.5}  (k = {:.3}, q = {})", pred.period, pred.k, pred.q);
    }
    if let Some(fit) = &result.pooled_fit {
        println!("pooled cumulative fit:  slope {:.1}, R^2 = {:.6}", fit.slope, fit.r_squared);
    }
    if let Some(fit) = &result.tracked_fit {
        println!(
            "tracked neuron {tracked}: slope {:.2}, R^2 = {:.4}",
            fit.slope, fit.r_squared
        );
    }

    let dir = out_dir("single_run");
    let manifest = output::write_outputs(
        &result,
        &dir,
        &[OutputFormat::Csv, OutputFormat::Dat, OutputFormat::Json],
    )?;
    println!();
    for file in &manifest.files {
        println!("wrote {}", file.display());
    }
    Ok(())
}

//! Drive a run from a TOML config file, the same way the `qnet` binary does.
//!
//! Writes a config to a temporary directory, loads it back, and runs the
//! experiment it describes. Anything left out of the file keeps its default;
//! unknown keys are rejected at parse time rather than silently ignored. Run
//! with:
//!
//!     cargo run --release --example from_config

use qnet::config::RunConfig;
use qnet::experiments;

const CONFIG: &str = r#"
[lattice]
rows = 16
cols = 16
boundary = "periodic"

[dynamics]
v = 0.3
t_total = 0.5
seed = 12

[experiment]
kind = "simulate"
tracked = [8, 8]
"#;

fn main() -> Result<(), qnet::Error> {
    let cfg = RunConfig::from_toml(CONFIG)?;

    // burn_in was not given, so it defaults to 20% of t_total.
    let params = cfg.sim_params();
    println!(
        "lattice {}x{} ({}), v = {}, t_total = {}, burn_in = {}",
        cfg.lattice.rows,
        cfg.lattice.cols,
        cfg.lattice.boundary,
        params.v,
        params.t_total,
        params.burn_in
    );

    let result =
        experiments::single_run_diagnostics(&params, &cfg.lattice_spec()?, cfg.tracked_node())?;
    if let Some(est) = &result.period {
        println!("measured period: {:.5} +/- {:.5}", est.mean_period, est.std_error);
    }
    if let Some(pred) = &result.prediction {
        println!("predicted period: {:.5}", pred.period);
    }

    // Configs round-trip, so a run can always re-emit the exact file that
    // produced it.
    println!();
    println!("normalized config:\n{}", cfg.to_toml());
    Ok(())
}

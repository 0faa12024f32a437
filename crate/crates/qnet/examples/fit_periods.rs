//! Measure periods across two small sweeps, then recover the law constants
//! from the measurements alone.
//!
//! This is the self-consistency loop: simulate, fit (k, q) by profile
//! likelihood on the log-residuals, and check the residuals of the fit. The
//! fitted prefactor also gets compared against the renewal-theory value that
//! needs no data at all. Run with:
//!
//!     cargo run --release --example fit_periods

use qnet::dynamics::SimParams;
use qnet::experiments::{self, SweepParam};
use qnet::lattice::{Boundary, LatticeSpec};
use qnet::predictor::{self, Observation};

fn main() -> Result<(), qnet::Error> {
    let spec = LatticeSpec::new(24, 24, Boundary::Periodic)?;
    let params = SimParams {
        t_total: 0.3,
        burn_in: 0.1,
        seed: 51,
        ..SimParams::default()
    };
    let runs = 4;

    let mut observations = Vec::new();
    println!("measuring periods (runs per point: {runs})...");
    for r in experiments::sweep(&[0.1, 0.2, 0.5, 1.0], SweepParam::PulseStrength, &params, &spec, runs)? {
        observations.push(Observation {
            v0: params.v0,
            v: r.sweep_value.unwrap().1,
            width: params.width,
            period: r.period.as_ref().unwrap().mean_period,
        });
    }
    for r in experiments::sweep(&[0.1, 0.3, 1.0], SweepParam::PulseWidth, &params, &spec, runs)? {
        observations.push(Observation {
            v0: params.v0,
            v: params.v,
            width: r.sweep_value.unwrap().1,
            period: r.period.as_ref().unwrap().mean_period,
        });
    }

    let fit = predictor::fit_kq(&observations)?;
    println!();
    println!("fitted constants: k = {:.4}, q = {:.4}", fit.k, fit.q);
    println!(
        "residuals: rms {:.2}%, worst {:.2}%",
        fit.rms_residual() * 100.0,
        fit.max_abs_residual() * 100.0
    );
    println!();
    println!("{:>6} {:>6} {:>10} {:>9}", "v", "w", "period", "residual");
    for (o, r) in observations.iter().zip(&fit.residuals) {
        println!("{:>6} {:>6} {:>10.5} {:>+8.2}%", o.v, o.width, o.period, r * 100.0);
    }

    let (mk, _) = predictor::mean_field_constants(params.k_rate);
    println!();
    println!(
        "renewal-theory prefactor at rate {}: k = {mk:.4} (fitted: {:.4})",
        params.k_rate, fit.k
    );
    Ok(())
}

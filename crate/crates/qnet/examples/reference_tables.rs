//! Reproduce the two bundled reference tables from a single calibration.
//!
//! The crate ships reference period measurements for a 40x40 lattice: one
//! table varies the pulse strength v at fixed width, the other varies the
//! width w at fixed strength. Calibrating k on the first strength row alone
//! predicts every other entry of both tables. Run with:
//!
//!     cargo run --example reference_tables

use qnet::predictor::PredictionParams;
use qnet::reference::{
    self, REFERENCE_Q, REFERENCE_V0, STRENGTH_TABLE, STRENGTH_TABLE_WIDTH, WIDTH_TABLE,
    WIDTH_TABLE_V,
};

fn main() {
    let k = reference::reference_k();
    println!("k calibrated on the first strength row: {k:.6}  (q = {REFERENCE_Q})");

    println!();
    println!("strength table (w = {STRENGTH_TABLE_WIDTH}):");
    println!("{:>8} {:>10} {:>10} {:>10}", "v", "reference", "predicted", "simulated");
    for row in &STRENGTH_TABLE {
        let tau = PredictionParams::new(k, REFERENCE_Q, REFERENCE_V0, row.v, STRENGTH_TABLE_WIDTH)
            .unwrap()
            .period();
        println!(
            "{:>8} {:>10.4} {:>10.4} {:>10.4}",
            row.v, row.predicted, tau, row.simulated
        );
    }

    println!();
    println!("width table (v = {WIDTH_TABLE_V}):");
    println!("{:>8} {:>10} {:>10} {:>10}", "w", "reference", "predicted", "simulated");
    for row in &WIDTH_TABLE {
        let tau = PredictionParams::new(k, REFERENCE_Q, REFERENCE_V0, WIDTH_TABLE_V, row.width)
            .unwrap()
            .period();
        println!(
            "{:>8} {:>10.4} {:>10.4} {:>10.4}",
            row.width, row.predicted, tau, row.simulated
        );
    }

    // Cross-validation: fit (k, q) to the simulated strength column, then
    // evaluate that fit against the simulated width column. The widest pulse
    // is where the power law strains the most.
    let (fit, width_residuals) = reference::cross_validate_tables().unwrap();
    println!();
    println!(
        "fit to the simulated strength column: k = {:.4}, q = {:.4}, rms residual {:.2}%",
        fit.k,
        fit.q,
        fit.rms_residual() * 100.0
    );
    println!("cross-validation on the simulated width column:");
    for (row, r) in WIDTH_TABLE.iter().zip(&width_residuals) {
        println!("  w = {:>4}: residual {:>+7.2}%", row.width, r * 100.0);
    }
}

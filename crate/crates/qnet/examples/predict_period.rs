//! Evaluate the closed-form firing-period law without running any simulation.
//!
//! The period of a neuron driven by a constant bias v0 plus four neighbor
//! pulses of strength v and duration w follows
//!
//!     tau = (v0 + 4 q v / w)^(-2/3) / k
//!
//! with k calibrated once and q weighting how much of a neighbor pulse the
//! integration window actually catches. Run with:
//!
//!     cargo run --example predict_period

use qnet::predictor::{self, PredictionParams};
use qnet::reference;

fn main() {
    let k = reference::reference_k();
    let q = reference::REFERENCE_Q;
    println!("calibrated constants: k = {k:.4}, q = {q}");
    println!();

    println!("{:>6} {:>6} {:>10} {:>12}", "v", "w", "tau", "classical");
    for (v, w) in [(0.1, 0.2), (0.2, 0.2), (0.5, 0.2), (0.2, 0.5), (0.2, 1.0), (2.0, 0.2)] {
        let tau = PredictionParams::new(k, q, 1.0, v, w).unwrap().period();
        // A deterministic neuron charging from 0 to threshold 1 at rate c
        // would fire with this period instead; the stochastic lattice is
        // always faster because high potentials only make firing likely,
        // never certain, and the rate grows with the squared potential.
        let classical =
            predictor::classical_period(0.0, predictor::effective_drive(1.0, q, v, w)).unwrap();
        println!("{v:>6} {w:>6} {tau:>10.5} {classical:>12.5}");
    }
    println!();

    // The same law can be stated as a cubic in tau. Both forms agree to
    // floating-point precision when the prefactors are matched.
    let (v, w) = (0.2, 0.2);
    let law = PredictionParams::new(2.0, 1.0, 1.0, v, w).unwrap().period();
    let cubic = predictor::solve_period_cubic(8.0, 1.0, v, w).unwrap();
    println!("law with k = 2:          tau = {law:.12}");
    println!("cubic with k_p = 2^3:    tau = {cubic:.12}");

    // Renewal theory fixes the constants from the microscopic rate alone:
    // no fit needed if the rate normalization is known.
    let (mk, mq) = predictor::mean_field_constants(2000.0);
    println!();
    println!("mean-field constants at rate 2000: k = {mk:.4}, q = {mq}");
    println!("mean-field tau at v = 0.2, w = 0.2: {:.5}", predictor::mean_field_period(2000.0, 1.0, 0.2, 0.2));
}

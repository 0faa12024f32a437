//! Acceptance gate for the crate's published behavior.
//!
//! Each test checks one criterion end to end at its stated tolerance and
//! prints a single `criterion N (...): PASS` line (run with
//! `cargo test --test acceptance -- --nocapture` to see them). The two sweep
//! criteria share one set of simulations through a `OnceLock`.

use std::fs;
use std::process::Command;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qnet::analytics::{pooled_period, PeriodEstimate};
use qnet::dynamics::{run, SimParams};
use qnet::experiments::{self, InputOptions, InputPattern, SweepParam};
use qnet::lattice::{Boundary, LatticeSpec, Node};
use qnet::predictor::{self, Observation, PredictionParams};
use qnet::reference::{
    self, REFERENCE_Q, REFERENCE_V0, STRENGTH_TABLE, STRENGTH_TABLE_WIDTH, WIDTH_TABLE,
    WIDTH_TABLE_V,
};

/// Calibrating on the first strength row and predicting the remaining six
/// periods must land within the table's printing precision.
#[test]
fn criterion_1_strength_table_predictions() {
    let k = reference::reference_k();
    let mut worst = 0.0f64;
    for row in &STRENGTH_TABLE[1..] {
        let tau = PredictionParams::new(k, REFERENCE_Q, REFERENCE_V0, row.v, STRENGTH_TABLE_WIDTH)
            .unwrap()
            .period();
        let err = (tau - row.predicted).abs();
        worst = worst.max(err);
        assert!(
            err <= 0.0005,
            "v = {}: predicted {tau:.6}, reference {:.4}, error {err:.6} > 0.0005",
            row.v,
            row.predicted
        );
    }
    println!(
        "criterion 1 (strength-table predictions): PASS - max abs error {worst:.6} <= 0.0005 \
         over 6 rows"
    );
}

/// The same constant, with no re-tuning, must reproduce the width table.
#[test]
fn criterion_2_width_table_predictions() {
    let k = reference::reference_k();
    let mut worst = 0.0f64;
    for row in &WIDTH_TABLE {
        let tau = PredictionParams::new(k, REFERENCE_Q, REFERENCE_V0, WIDTH_TABLE_V, row.width)
            .unwrap()
            .period();
        let err = (tau - row.predicted).abs();
        worst = worst.max(err);
        assert!(
            err <= 0.001,
            "width = {}: predicted {tau:.6}, reference {:.4}, error {err:.6} > 0.001",
            row.width,
            row.predicted
        );
    }
    println!(
        "criterion 2 (width-table predictions): PASS - max abs error {worst:.6} <= 0.001 \
         over 5 rows"
    );
}

/// The cubic-equation solver and the closed-form law are the same statement:
/// with unit neighbor weight, tau from k_p c^2 tau^3 = 1 must equal the law
/// evaluated with prefactor k_p^(1/3).
#[test]
fn criterion_3_cubic_and_closed_form_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let kp = 10f64.powf(rng.random_range(-1.0..2.0));
        let v0 = 10f64.powf(rng.random_range(-2.0..1.0));
        let v = 10f64.powf(rng.random_range(-2.0..1.0));
        let width = 10f64.powf(rng.random_range(-2.0..1.0));
        let cubic = predictor::solve_period_cubic(kp, v0, v, width).unwrap();
        let law = PredictionParams::new(kp.cbrt(), 1.0, v0, v, width).unwrap().period();
        worst = worst.max((cubic - law).abs() / cubic);
    }
    assert!(worst < 1e-10, "worst relative gap {worst:.3e} >= 1e-10");
    println!(
        "criterion 3 (cubic vs closed form): PASS - worst relative gap {worst:.3e} < 1e-10 \
         over 1000 draws"
    );
}

struct Sweeps {
    /// (pulse strength, measured period), strength ascending.
    by_strength: Vec<(f64, PeriodEstimate)>,
    /// (pulse width, measured period), width ascending.
    by_width: Vec<(f64, PeriodEstimate)>,
    fit: predictor::FitResult,
}

/// Both desk-scale sweeps, run once and shared between criteria 4 and 5.
fn desk_sweeps() -> &'static Sweeps {
    static DATA: OnceLock<Sweeps> = OnceLock::new();
    DATA.get_or_init(|| {
        let spec = LatticeSpec::new(40, 40, Boundary::Periodic).unwrap();
        let params = SimParams { t_total: 0.3, burn_in: 0.1, seed: 2024, ..SimParams::default() };
        let strengths = [0.1, 0.2, 0.3, 0.4, 0.5, 1.0, 10.0];
        let widths = [0.1, 0.2, 0.3, 0.5, 1.0];

        let mut observations = Vec::new();
        let mut by_strength = Vec::new();
        for r in experiments::sweep(&strengths, SweepParam::PulseStrength, &params, &spec, 20)
            .unwrap()
        {
            let value = r.sweep_value.unwrap().1;
            let est = r.period.expect("strength sweep point with no period");
            observations.push(Observation {
                v0: params.v0,
                v: value,
                width: params.width,
                period: est.mean_period,
            });
            by_strength.push((value, est));
        }
        let mut by_width = Vec::new();
        for r in experiments::sweep(&widths, SweepParam::PulseWidth, &params, &spec, 20).unwrap() {
            let value = r.sweep_value.unwrap().1;
            let est = r.period.expect("width sweep point with no period");
            observations.push(Observation {
                v0: params.v0,
                v: params.v,
                width: value,
                period: est.mean_period,
            });
            by_width.push((value, est));
        }
        let fit = predictor::fit_kq(&observations).unwrap();
        Sweeps { by_strength, by_width, fit }
    })
}

/// Measured periods across both sweeps must follow the two-thirds power law
/// in the effective drive: the joint fit's worst relative residual stays
/// within 15 percent.
#[test]
fn criterion_4_sweeps_follow_the_power_law() {
    let s = desk_sweeps();
    let max = s.fit.max_abs_residual();
    assert!(
        max <= 0.15,
        "fit k = {:.4}, q = {:.4}, max |relative residual| {:.4} > 0.15",
        s.fit.k,
        s.fit.q,
        max
    );
    println!(
        "criterion 4 (sweep power-law shape): PASS - joint fit k = {:.3}, q = {:.3}, \
         max |residual| = {:.2}% <= 15% over 12 points",
        s.fit.k,
        s.fit.q,
        max * 100.0
    );
}

/// Even at extreme drive the lattice keeps firing with a finite positive
/// period, and the period moves strictly monotonically with both knobs.
#[test]
fn criterion_5_positivity_and_monotonicity() {
    let s = desk_sweeps();
    let (v_max, extreme) = s.by_strength.last().unwrap();
    assert!(
        extreme.mean_period.is_finite() && extreme.mean_period > 0.0,
        "period at v = {v_max} is not finite and positive"
    );
    for pair in s.by_strength.windows(2) {
        assert!(
            pair[1].1.mean_period < pair[0].1.mean_period,
            "period did not decrease from v = {} to v = {}",
            pair[0].0,
            pair[1].0
        );
    }
    for pair in s.by_width.windows(2) {
        assert!(
            pair[1].1.mean_period > pair[0].1.mean_period,
            "period did not increase from width = {} to width = {}",
            pair[0].0,
            pair[1].0
        );
    }
    println!(
        "criterion 5 (positivity and monotonicity): PASS - period at v = {v_max} is \
         {:.5}, strictly decreasing in v (7 points) and increasing in width (5 points)",
        extreme.mean_period
    );
}

/// Post burn-in, cumulative spike counts grow linearly: almost perfectly for
/// the whole lattice, and still strongly for one tracked neuron.
#[test]
fn criterion_6_cumulative_counts_grow_linearly() {
    let spec = LatticeSpec::new(40, 40, Boundary::Periodic).unwrap();
    let params = SimParams { t_total: 2.0, burn_in: 0.4, seed: 77, ..SimParams::default() };
    let result = experiments::single_run_diagnostics(&params, &spec, Node::new(20, 20)).unwrap();
    let pooled = result.pooled_fit.expect("pooled cumulative fit");
    let tracked = result.tracked_fit.expect("tracked cumulative fit");
    assert!(pooled.r_squared >= 0.999, "pooled R^2 = {:.6} < 0.999", pooled.r_squared);
    assert!(tracked.r_squared >= 0.97, "tracked R^2 = {:.6} < 0.97", tracked.r_squared);
    println!(
        "criterion 6 (cumulative linearity): PASS - pooled R^2 = {:.5} >= 0.999, \
         tracked R^2 = {:.4} >= 0.97",
        pooled.r_squared, tracked.r_squared
    );
}

/// Averaged over 100 runs per pattern, the early firing rate remembers the
/// initial boundary pattern and the late rate forgets it.
#[test]
fn criterion_7_input_memory() {
    let spec = LatticeSpec::new(40, 40, Boundary::Open).unwrap();
    let params = SimParams {
        v0: 0.2,
        dt: 2e-4,
        t_total: 1.0,
        burn_in: 0.2,
        seed: 9,
        ..SimParams::default()
    };
    let run_one = |pattern: InputPattern| {
        experiments::input_experiment_with(pattern, &params, &spec, 100, InputOptions::default())
            .unwrap()
    };
    let all_one = run_one(InputPattern::AllPeripheralOne);
    let alternating = run_one(InputPattern::PeripheralAlternating);
    let random = run_one(InputPattern::PeripheralRandom);
    let all_zero = run_one(InputPattern::AllZero);

    let first_bin = |r: &experiments::ExperimentResult| r.rate_series.as_ref().unwrap().bins[0].mean;
    let plateau = |r: &experiments::ExperimentResult| r.plateau.as_ref().unwrap().mean;

    let ratio = first_bin(&all_one) / first_bin(&alternating);
    assert!(
        (1.6..=2.4).contains(&ratio),
        "first-bin rate ratio all-one / alternating = {ratio:.3}, outside [1.6, 2.4]"
    );

    let plateaus = [
        plateau(&all_one),
        plateau(&alternating),
        plateau(&random),
        plateau(&all_zero),
    ];
    let mean = plateaus.iter().sum::<f64>() / plateaus.len() as f64;
    let spread = plateaus.iter().fold(0.0f64, |m, p| m.max((p - mean).abs() / mean));
    assert!(spread <= 0.05, "plateau spread {:.2}% > 5% ({plateaus:?})", spread * 100.0);

    let decay = all_one.memory_decay.expect("decay time for all-one");
    assert!(decay > 0.0, "all-one pattern left no measurable memory");
    assert!(
        first_bin(&all_zero) < plateau(&all_zero),
        "all-zero start should approach its plateau from below ({} vs {})",
        first_bin(&all_zero),
        plateau(&all_zero)
    );

    println!(
        "criterion 7 (input memory): PASS - first-bin ratio {ratio:.2} in [1.6, 2.4], \
         plateau spread {:.1}% <= 5%, all-one decay {decay:.3} > 0, all-zero rises \
         ({:.1} -> {:.1})",
        spread * 100.0,
        first_bin(&all_zero),
        plateau(&all_zero)
    );
}

const DETERMINISM_CONFIG: &str = "\
[lattice]
rows = 12
cols = 12
boundary = \"periodic\"

[dynamics]
t_total = 0.3
burn_in = 0.06
seed = 31
";

/// Same config and seed give byte-identical output files, and halving the
/// integration step moves the measured period by well under 2 percent.
#[test]
fn criterion_8_determinism_and_step_size() {
    // Byte-level reproducibility through the real binary.
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, DETERMINISM_CONFIG).unwrap();
    for sub in ["a", "b"] {
        let out = Command::new(env!("CARGO_BIN_EXE_qnet"))
            .args([
                "simulate",
                "--config",
                cfg.to_str().unwrap(),
                "--out",
                dir.path().join(sub).to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["spikes.csv", "summary.json"] {
        let a = fs::read(dir.path().join("a").join(name)).unwrap();
        let b = fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical invocations");
    }

    // Step-size robustness at reference parameters.
    let spec = LatticeSpec::new(40, 40, Boundary::Periodic).unwrap();
    let measure = |dt: f64| {
        let mut logs = Vec::new();
        for seed in 0..4 {
            let params =
                SimParams { dt, t_total: 0.3, burn_in: 0.1, seed: 4000 + seed, ..SimParams::default() };
            let initial: Vec<f64> = {
                let mut rng = ChaCha8Rng::seed_from_u64(900 + seed);
                (0..spec.len()).map(|_| rng.random::<f64>()).collect()
            };
            logs.push(run(&params, &spec, &initial).unwrap());
        }
        pooled_period(&logs, 0.1).unwrap().mean_period
    };
    let coarse = measure(1e-4);
    let fine = measure(5e-5);
    let rel = (coarse - fine).abs() / fine;
    assert!(rel < 0.02, "dt halving moved the period by {:.3}% >= 2%", rel * 100.0);

    println!(
        "criterion 8 (determinism): PASS - byte-identical spikes.csv and summary.json; \
         dt halving moved the period by {:.2}% < 2% ({coarse:.5} vs {fine:.5})",
        rel * 100.0
    );
}

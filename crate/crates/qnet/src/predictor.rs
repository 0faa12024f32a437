//! Closed-form period predictors for the lattice dynamics, from the crude
//! classical estimate through the 2/3-power law, plus calibration and
//! least-squares fitting of the law's constants.
//!
//! The headline result: a neuron driven at constant rate `c = v0 + 4qv/width`
//! fires with mean period `tau = c^(-2/3) / k`. The prefactor `k` and the
//! neighbor weight `q` can be calibrated from one observation, fitted from
//! many, or derived parameter-free from the microscopic firing rate via
//! [`mean_field_constants`].

use serde::{Deserialize, Serialize};

use crate::analytics::PeriodEstimate;
use crate::error::{Error, Result};

/// Gamma(4/3), the mean of a unit-scale Weibull distribution with shape 3.
pub const GAMMA_4_3: f64 = 0.892_979_511_569_249_2;

/// Combined drive seen by a neuron: background `v0` plus four neighbors
/// contributing `v/width` each, weighted by `q`.
pub fn effective_drive(v0: f64, q: f64, v: f64, width: f64) -> f64 {
    v0 + 4.0 * q * v / width
}

/// Constants of the 2/3-power period law together with the drive parameters
/// it is evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionParams {
    pub k: f64,
    pub q: f64,
    pub v0: f64,
    pub v: f64,
    pub width: f64,
}

impl PredictionParams {
    pub fn new(k: f64, q: f64, v0: f64, v: f64, width: f64) -> Result<Self> {
        for (name, value) in [("k", k), ("q", q), ("v0", v0), ("v", v), ("width", width)] {
            if !value.is_finite() {
                return Err(Error::invalid(format!("{name} must be finite, got {value}")));
            }
        }
        if k <= 0.0 {
            return Err(Error::invalid(format!("k must be positive, got {k}")));
        }
        if width <= 0.0 {
            return Err(Error::invalid(format!("width must be positive, got {width}")));
        }
        if v0 < 0.0 {
            return Err(Error::invalid(format!("v0 must be nonnegative, got {v0}")));
        }
        let drive = effective_drive(v0, q, v, width);
        if drive <= 0.0 {
            return Err(Error::invalid(format!(
                "effective drive v0 + 4qv/width must be positive, got {drive}"
            )));
        }
        Ok(PredictionParams { k, q, v0, v, width })
    }

    /// Period under the 2/3-power law: `tau = (v0 + 4qv/width)^(-2/3) / k`.
    pub fn period(&self) -> f64 {
        let c = effective_drive(self.v0, self.q, self.v, self.width);
        1.0 / (self.k * (c * c).cbrt())
    }
}

/// Deterministic ramp-to-threshold period: starting amplitude `a0`, unit
/// threshold, constant drive. `tau = (1 - a0) / drive`.
pub fn classical_period(a0: f64, drive: f64) -> Result<f64> {
    if !a0.is_finite() || !drive.is_finite() {
        return Err(Error::invalid("classical_period arguments must be finite"));
    }
    if drive <= 0.0 {
        return Err(Error::invalid(format!("drive must be positive, got {drive}")));
    }
    if a0 >= 1.0 {
        return Err(Error::invalid(format!(
            "starting amplitude must be below threshold 1, got {a0}"
        )));
    }
    Ok((1.0 - a0) / drive)
}

/// First-order perturbative period: `tau = k_p (1 - neighbor_amp^2) / v0^2`,
/// valid for weak neighbor amplitude.
pub fn perturbative_period(k_p: f64, v0: f64, neighbor_amp: f64) -> Result<f64> {
    for (name, value) in [("k_p", k_p), ("v0", v0), ("neighbor_amp", neighbor_amp)] {
        if !value.is_finite() {
            return Err(Error::invalid(format!("{name} must be finite, got {value}")));
        }
    }
    if k_p <= 0.0 {
        return Err(Error::invalid(format!("k_p must be positive, got {k_p}")));
    }
    if v0 == 0.0 {
        return Err(Error::invalid("v0 must be nonzero"));
    }
    if neighbor_amp.abs() > 1.0 {
        return Err(Error::invalid(format!(
            "neighbor amplitude magnitude must not exceed 1, got {neighbor_amp}"
        )));
    }
    Ok(k_p * (1.0 - neighbor_amp * neighbor_amp) / (v0 * v0))
}

fn check_cubic_args(k_p: f64, v0: f64, v: f64, width: f64) -> Result<f64> {
    for (name, value) in [("k_p", k_p), ("v0", v0), ("v", v), ("width", width)] {
        if !value.is_finite() {
            return Err(Error::invalid(format!("{name} must be finite, got {value}")));
        }
    }
    if k_p <= 0.0 {
        return Err(Error::invalid(format!("k_p must be positive, got {k_p}")));
    }
    if width <= 0.0 {
        return Err(Error::invalid(format!("width must be positive, got {width}")));
    }
    let c = effective_drive(v0, 1.0, v, width);
    if c <= 0.0 {
        return Err(Error::invalid(format!(
            "effective drive v0 + 4v/width must be positive, got {c}"
        )));
    }
    Ok(c)
}

/// Self-consistent period: the root of `k_p c^2 tau^3 = 1` with
/// `c = v0 + 4v/width`, in closed form.
pub fn solve_period_cubic(k_p: f64, v0: f64, v: f64, width: f64) -> Result<f64> {
    let c = check_cubic_args(k_p, v0, v, width)?;
    Ok((k_p * c * c).cbrt().recip())
}

/// Same root as [`solve_period_cubic`], found by bracketing and bisection.
/// Kept as an independent cross-check of the closed form; the two agree to
/// better than 1e-10 relative.
pub fn solve_period_cubic_bisect(k_p: f64, v0: f64, v: f64, width: f64) -> Result<f64> {
    let c = check_cubic_args(k_p, v0, v, width)?;
    let f = |tau: f64| k_p * c * c * tau * tau * tau - 1.0;
    let mut lo = f64::MIN_POSITIVE;
    let mut hi = 1.0;
    while f(hi) < 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::invalid("cubic solve failed to bracket a root"));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) < 1e-14 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Solve the period law for `k` given one observed period.
pub fn calibrate_k(observed: &PeriodEstimate, q: f64, v0: f64, v: f64, width: f64) -> Result<f64> {
    let tau = observed.mean_period;
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::invalid(format!("observed period must be positive, got {tau}")));
    }
    if width <= 0.0 {
        return Err(Error::invalid(format!("width must be positive, got {width}")));
    }
    let c = effective_drive(v0, q, v, width);
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::invalid(format!(
            "effective drive v0 + 4qv/width must be positive, got {c}"
        )));
    }
    Ok(1.0 / (tau * (c * c).cbrt()))
}

/// One measured period at a given parameter point, input to [`fit_kq`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub v0: f64,
    pub v: f64,
    pub width: f64,
    pub period: f64,
}

/// Result of a two-parameter fit of the period law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub k: f64,
    pub q: f64,
    /// Per-observation relative residuals, `(predicted - measured) / measured`,
    /// in input order.
    pub residuals: Vec<f64>,
}

impl FitResult {
    pub fn rms_residual(&self) -> f64 {
        if self.residuals.is_empty() {
            return 0.0;
        }
        let ss: f64 = self.residuals.iter().map(|r| r * r).sum();
        (ss / self.residuals.len() as f64).sqrt()
    }

    pub fn max_abs_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

/// Relative residuals of the period law at (`k`, `q`) against observations.
pub fn relative_residuals(k: f64, q: f64, observations: &[Observation]) -> Vec<f64> {
    observations
        .iter()
        .map(|o| {
            let c = effective_drive(o.v0, q, o.v, o.width);
            let pred = 1.0 / (k * (c * c).cbrt());
            (pred - o.period) / o.period
        })
        .collect()
}

/// Fit `k` and `q` of the period law to measured periods by least squares in
/// log space. For fixed `q` the optimal `ln k` is linear, so `k` is profiled
/// out and `q` found by a log-grid scan refined with golden-section search.
pub fn fit_kq(observations: &[Observation]) -> Result<FitResult> {
    if observations.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "fit needs at least 2 observations, got {}",
            observations.len()
        )));
    }
    for (i, o) in observations.iter().enumerate() {
        if !(o.period.is_finite() && o.period > 0.0) {
            return Err(Error::invalid(format!(
                "observation {i}: period must be positive, got {}",
                o.period
            )));
        }
        if o.width <= 0.0 {
            return Err(Error::invalid(format!(
                "observation {i}: width must be positive, got {}",
                o.width
            )));
        }
        if o.v0 < 0.0 || o.v < 0.0 {
            return Err(Error::invalid(format!(
                "observation {i}: v0 and v must be nonnegative"
            )));
        }
        if o.v0 == 0.0 && o.v == 0.0 {
            return Err(Error::invalid(format!("observation {i}: zero drive")));
        }
    }
    if observations.iter().all(|o| o.v == 0.0) {
        return Err(Error::InsufficientData(
            "q is unidentifiable: every observation has v = 0".into(),
        ));
    }
    let mut distinct: Vec<(f64, f64)> = Vec::new();
    for o in observations {
        let key = (o.v0, o.v / o.width);
        if !distinct.iter().any(|d| d == &key) {
            distinct.push(key);
        }
    }
    if distinct.len() < 2 {
        return Err(Error::InsufficientData(
            "q is unidentifiable: all observations share one drive combination".into(),
        ));
    }

    // Profiled sum of squares in log space; see the z_i construction below.
    let sse = |q: f64| -> f64 {
        let n = observations.len() as f64;
        let z: Vec<f64> = observations
            .iter()
            .map(|o| {
                let c = effective_drive(o.v0, q, o.v, o.width);
                (2.0 / 3.0) * c.ln() + o.period.ln()
            })
            .collect();
        let mean = z.iter().sum::<f64>() / n;
        z.iter().map(|zi| (zi - mean) * (zi - mean)).sum()
    };

    // Coarse scan over six decades of q, then golden-section refinement.
    let (q_lo, q_hi) = (1e-3_f64, 1e3_f64);
    let grid = 601usize;
    let mut best_i = 0usize;
    let mut best = f64::INFINITY;
    let log_lo = q_lo.ln();
    let step = (q_hi / q_lo).ln() / (grid - 1) as f64;
    for i in 0..grid {
        let q = (log_lo + step * i as f64).exp();
        let s = sse(q);
        if s < best {
            best = s;
            best_i = i;
        }
    }
    let mut a = (log_lo + step * best_i.saturating_sub(1) as f64).exp();
    let mut b = (log_lo + step * (best_i + 1).min(grid - 1) as f64).exp();
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = sse(x1);
    let mut f2 = sse(x2);
    while (b - a) > 1e-12 * b.max(1.0) {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = sse(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = sse(x2);
        }
    }
    let q = 0.5 * (a + b);

    let n = observations.len() as f64;
    let z_mean = observations
        .iter()
        .map(|o| {
            let c = effective_drive(o.v0, q, o.v, o.width);
            (2.0 / 3.0) * c.ln() + o.period.ln()
        })
        .sum::<f64>()
        / n;
    let k = (-z_mean).exp();
    let residuals = relative_residuals(k, q, observations);
    Ok(FitResult { k, q, residuals })
}

/// Parameter-free mean period of the stochastic lattice at firing-rate
/// constant `k_rate`: renewal theory with every neighbor pulse window fully
/// covered gives amplitude `c*s` at age `s`, a Weibull shape-3 survival, and
/// `tau = Gamma(4/3) * (3 / (k_rate c^2))^(1/3)`.
pub fn mean_field_period(k_rate: f64, v0: f64, v: f64, width: f64) -> f64 {
    let c = effective_drive(v0, 1.0, v, width);
    if c <= 0.0 {
        return f64::INFINITY;
    }
    GAMMA_4_3 * (3.0 / (k_rate * c * c)).cbrt()
}

/// The same mean-field result expressed as period-law constants:
/// `q = 1` and `k = (k_rate / 3)^(1/3) / Gamma(4/3)`.
pub fn mean_field_constants(k_rate: f64) -> (f64, f64) {
    ((k_rate / 3.0).cbrt() / GAMMA_4_3, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn estimate(period: f64) -> PeriodEstimate {
        PeriodEstimate { mean_period: period, std_error: 0.0, n_intervals: 1 }
    }

    #[test]
    fn classical_examples() {
        assert_relative_eq!(classical_period(0.0, 2.0).unwrap(), 0.5);
        assert_relative_eq!(classical_period(0.5, 1.0).unwrap(), 0.5);
        assert!(classical_period(1.0, 1.0).is_err());
        assert!(classical_period(0.0, 0.0).is_err());
    }

    #[test]
    fn perturbative_examples() {
        assert_relative_eq!(perturbative_period(1.0, 1.0, 0.0).unwrap(), 1.0);
        assert_relative_eq!(perturbative_period(2.0, 2.0, 0.5).unwrap(), 2.0 * 0.75 / 4.0);
        assert!(perturbative_period(1.0, 0.0, 0.0).is_err());
        assert!(perturbative_period(1.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn cubic_closed_form_examples() {
        assert_relative_eq!(solve_period_cubic(1.0, 1.0, 0.0, 0.2).unwrap(), 1.0);
        assert_relative_eq!(
            solve_period_cubic(1.0, 1.0, 0.2, 0.2).unwrap(),
            25.0_f64.cbrt().recip(),
            max_relative = 1e-15
        );
        assert_relative_eq!(solve_period_cubic(8.0, 1.0, 0.0, 1.0).unwrap(), 0.5);
        assert!(solve_period_cubic(0.0, 1.0, 0.0, 0.2).is_err());
        assert!(solve_period_cubic(1.0, 0.0, 0.0, 0.2).is_err());
    }

    #[test]
    fn power_law_means_doubling_drive_shrinks_period() {
        let p1 = PredictionParams::new(2.0, 1.0, 1.0, 0.25, 1.0).unwrap().period();
        let p2 = PredictionParams::new(2.0, 1.0, 2.0, 0.5, 1.0).unwrap().period();
        assert_relative_eq!(p1 / p2, 2.0_f64.powf(2.0 / 3.0), max_relative = 1e-12);
    }

    #[test]
    fn calibration_roundtrip_is_exact() {
        let p = PredictionParams::new(8.2, 1.4, 1.0, 0.3, 0.25).unwrap();
        let tau = p.period();
        let k = calibrate_k(&estimate(tau), 1.4, 1.0, 0.3, 0.25).unwrap();
        assert_relative_eq!(k, 8.2, max_relative = 1e-12);
    }

    #[test]
    fn calibration_with_zero_coupling_is_identity_at_unit_drive() {
        let k = calibrate_k(&estimate(1.0), 1.4, 1.0, 0.0, 0.2).unwrap();
        assert_relative_eq!(k, 1.0);
    }

    #[test]
    fn invalid_calibration_inputs_are_rejected() {
        assert!(calibrate_k(&estimate(0.0), 1.4, 1.0, 0.1, 0.2).is_err());
        assert!(calibrate_k(&estimate(-1.0), 1.4, 1.0, 0.1, 0.2).is_err());
        assert!(calibrate_k(&estimate(1.0), 1.4, 0.0, 0.0, 0.2).is_err());
        assert!(calibrate_k(&estimate(1.0), 1.4, 1.0, 0.1, 0.0).is_err());
    }

    #[test]
    fn fit_recovers_noiseless_constants() {
        let p_true = (7.5, 1.25);
        let grid = [
            (1.0, 0.1, 0.2),
            (1.0, 0.2, 0.2),
            (1.0, 0.5, 0.2),
            (1.0, 0.2, 0.5),
            (0.5, 0.3, 0.3),
            (2.0, 1.0, 0.4),
        ];
        let obs: Vec<Observation> = grid
            .iter()
            .map(|&(v0, v, width)| {
                let tau = PredictionParams::new(p_true.0, p_true.1, v0, v, width)
                    .unwrap()
                    .period();
                Observation { v0, v, width, period: tau }
            })
            .collect();
        let fit = fit_kq(&obs).unwrap();
        assert_relative_eq!(fit.k, p_true.0, max_relative = 1e-6);
        assert_relative_eq!(fit.q, p_true.1, max_relative = 1e-6);
        assert!(fit.max_abs_residual() < 1e-8);
    }

    #[test]
    fn fit_rejects_degenerate_inputs() {
        assert!(matches!(
            fit_kq(&[Observation { v0: 1.0, v: 0.1, width: 0.2, period: 0.05 }]),
            Err(crate::error::Error::InsufficientData(_))
        ));
        let all_zero_v: Vec<Observation> = (0..4)
            .map(|i| Observation { v0: 1.0 + i as f64, v: 0.0, width: 0.2, period: 0.1 })
            .collect();
        assert!(matches!(fit_kq(&all_zero_v), Err(crate::error::Error::InsufficientData(_))));
        let one_drive: Vec<Observation> = (0..4)
            .map(|_| Observation { v0: 1.0, v: 0.2, width: 0.2, period: 0.05 })
            .collect();
        assert!(fit_kq(&one_drive).is_err());
        let bad_period = vec![
            Observation { v0: 1.0, v: 0.1, width: 0.2, period: 0.05 },
            Observation { v0: 1.0, v: 0.2, width: 0.2, period: -0.1 },
        ];
        assert!(fit_kq(&bad_period).is_err());
    }

    #[test]
    fn mean_field_matches_law_constants() {
        let (k, q) = mean_field_constants(2000.0);
        assert_relative_eq!(q, 1.0);
        for (v0, v, width) in [(1.0, 0.2, 0.2), (0.2, 0.2, 0.2), (1.0, 10.0, 0.2)] {
            let direct = mean_field_period(2000.0, v0, v, width);
            let via_law = PredictionParams::new(k, q, v0, v, width).unwrap().period();
            assert_relative_eq!(direct, via_law, max_relative = 1e-12);
        }
    }

    #[test]
    fn mean_field_spot_value() {
        // Hand check: c = 1 + 4*0.1/0.2 = 3, tau = Gamma(4/3) * (3/(2000*9))^(1/3).
        let tau = mean_field_period(2000.0, 1.0, 0.1, 0.2);
        assert_relative_eq!(tau, 0.8929795115692492 * (3.0 / 18000.0_f64).cbrt(), max_relative = 1e-15);
        assert!(mean_field_period(2000.0, 0.0, 0.0, 0.2).is_infinite());
    }

    proptest! {
        #[test]
        fn cubic_solvers_agree(
            k_p in 1e-3_f64..1e3,
            v0 in 0.0_f64..10.0,
            v in 0.0_f64..10.0,
            width in 0.05_f64..2.0,
        ) {
            prop_assume!(v0 + 4.0 * v / width > 1e-6);
            let closed = solve_period_cubic(k_p, v0, v, width).unwrap();
            let bisect = solve_period_cubic_bisect(k_p, v0, v, width).unwrap();
            prop_assert!(((closed - bisect) / closed).abs() < 1e-10);
        }

        #[test]
        fn law_with_unit_q_matches_cubic_with_cubed_prefactor(
            k in 0.1_f64..100.0,
            v0 in 0.0_f64..10.0,
            v in 0.0_f64..10.0,
            width in 0.05_f64..2.0,
        ) {
            prop_assume!(v0 + 4.0 * v / width > 1e-6);
            let law = PredictionParams::new(k, 1.0, v0, v, width).unwrap().period();
            let cubic = solve_period_cubic(k * k * k, v0, v, width).unwrap();
            prop_assert!(((law - cubic) / cubic).abs() < 1e-12);
        }

        #[test]
        fn calibrate_inverts_prediction(
            k in 0.1_f64..100.0,
            q in 0.1_f64..5.0,
            v0 in 0.1_f64..5.0,
            v in 0.0_f64..5.0,
            width in 0.05_f64..2.0,
        ) {
            let p = PredictionParams::new(k, q, v0, v, width).unwrap();
            let cal = calibrate_k(&estimate(p.period()), q, v0, v, width).unwrap();
            prop_assert!(((cal - k) / k).abs() < 1e-12);
        }

        #[test]
        fn period_decreases_with_coupling(
            k in 0.1_f64..100.0,
            q in 0.1_f64..5.0,
            v0 in 0.1_f64..5.0,
            width in 0.05_f64..2.0,
        ) {
            let lo = PredictionParams::new(k, q, v0, 0.1, width).unwrap().period();
            let hi = PredictionParams::new(k, q, v0, 0.2, width).unwrap().period();
            prop_assert!(hi < lo);
        }
    }
}

//! Reference period data: measured and predicted mean periods on a
//! 40x40 periodic lattice at the standard drive parameters, one sweep over
//! pulse strength and one over pulse width. These values calibrate the
//! period-law prefactor and serve as golden data for the predictor tests.

use crate::analytics::PeriodEstimate;
use crate::error::Result;
use crate::predictor::{self, Observation};

/// Background drive shared by both reference sweeps.
pub const REFERENCE_V0: f64 = 1.0;
/// Neighbor weight of the period law used for the reference predictions.
pub const REFERENCE_Q: f64 = 1.4;
/// Pulse width held fixed in the strength sweep.
pub const STRENGTH_TABLE_WIDTH: f64 = 0.2;
/// Pulse strength held fixed in the width sweep.
pub const WIDTH_TABLE_V: f64 = 0.2;

/// One row of the strength sweep: pulse strength, predicted period,
/// simulated period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrengthRow {
    pub v: f64,
    pub predicted: f64,
    pub simulated: f64,
}

/// One row of the width sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidthRow {
    pub width: f64,
    pub predicted: f64,
    pub simulated: f64,
}

/// Period versus pulse strength at width 0.2. The v = 10 simulated value is
/// printed as 0.028 in the source table; the prediction column and the
/// 2/3-power scaling fix the decimal at 0.0028, kept here (the as-printed
/// value is [`STRENGTH_V10_AS_PRINTED`]).
pub const STRENGTH_TABLE: [StrengthRow; 7] = [
    StrengthRow { v: 0.1, predicted: 0.050, simulated: 0.050 },
    StrengthRow { v: 0.2, predicted: 0.035, simulated: 0.035 },
    StrengthRow { v: 0.3, predicted: 0.027, simulated: 0.028 },
    StrengthRow { v: 0.4, predicted: 0.023, simulated: 0.023 },
    StrengthRow { v: 0.5, predicted: 0.020, simulated: 0.020 },
    StrengthRow { v: 1.0, predicted: 0.013, simulated: 0.013 },
    StrengthRow { v: 10.0, predicted: 0.0028, simulated: 0.0028 },
];

/// The uncorrected v = 10 simulated entry, kept for the record.
pub const STRENGTH_V10_AS_PRINTED: f64 = 0.028;

/// Period versus pulse width at strength 0.2.
pub const WIDTH_TABLE: [WidthRow; 5] = [
    WidthRow { width: 0.1, predicted: 0.023, simulated: 0.023 },
    WidthRow { width: 0.2, predicted: 0.035, simulated: 0.035 },
    WidthRow { width: 0.3, predicted: 0.044, simulated: 0.043 },
    WidthRow { width: 0.5, predicted: 0.056, simulated: 0.054 },
    WidthRow { width: 1.0, predicted: 0.074, simulated: 0.065 },
];

/// Period-law prefactor calibrated on the first strength row
/// (v = 0.1, simulated period 0.050) at q = [`REFERENCE_Q`]. Roughly 8.213.
pub fn reference_k() -> f64 {
    let first = STRENGTH_TABLE[0];
    let observed = PeriodEstimate {
        mean_period: first.simulated,
        std_error: 0.0,
        n_intervals: 1,
    };
    predictor::calibrate_k(&observed, REFERENCE_Q, REFERENCE_V0, first.v, STRENGTH_TABLE_WIDTH)
        .expect("reference table row is a valid calibration point")
}

/// The strength sweep's simulated column as fit observations.
pub fn strength_observations() -> Vec<Observation> {
    STRENGTH_TABLE
        .iter()
        .map(|row| Observation {
            v0: REFERENCE_V0,
            v: row.v,
            width: STRENGTH_TABLE_WIDTH,
            period: row.simulated,
        })
        .collect()
}

/// The width sweep's simulated column as fit observations.
pub fn width_observations() -> Vec<Observation> {
    WIDTH_TABLE
        .iter()
        .map(|row| Observation {
            v0: REFERENCE_V0,
            v: WIDTH_TABLE_V,
            width: row.width,
            period: row.simulated,
        })
        .collect()
}

/// Fit the period law to the strength sweep and evaluate it on the width
/// sweep; returns the fit and the width-sweep relative residuals.
pub fn cross_validate_tables() -> Result<(predictor::FitResult, Vec<f64>)> {
    let fit = predictor::fit_kq(&strength_observations())?;
    let residuals = predictor::relative_residuals(fit.k, fit.q, &width_observations());
    Ok((fit, residuals))
}

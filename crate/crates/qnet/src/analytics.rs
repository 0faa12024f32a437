//! Spike-log analysis: inter-spike interval statistics, cumulative counts,
//! least-squares lines, binned rate time series averaged across runs, and
//! the time for a rate series to settle onto its plateau.

use serde::{Deserialize, Serialize};

use crate::dynamics::SpikeLog;
use crate::error::{Error, Result};
use crate::lattice::Node;

/// Bins used to define the plateau at the end of a rate series.
pub const PLATEAU_TAIL_BINS: usize = 10;

/// Mean inter-spike interval with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodEstimate {
    pub mean_period: f64,
    /// Standard error of the mean, 0 when only one interval was seen.
    pub std_error: f64,
    pub n_intervals: usize,
}

/// Least-squares line through a series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination; by convention 0 for a constant series.
    pub r_squared: f64,
}

/// One bin of a rate series: per-neuron firing rate averaged across runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateBin {
    pub start: f64,
    pub mean: f64,
    /// Across-run standard error, 0 for a single run.
    pub std_err: f64,
}

/// Binned per-neuron firing rate over time, averaged across runs. The last
/// bin may be shorter than `bin_width` when it runs into `t_total`; rates
/// are always normalized by the actual bin span.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSeries {
    pub bin_width: f64,
    pub n_runs: usize,
    pub bins: Vec<RateBin>,
}

/// Inter-spike intervals of one log, pooled over all neurons, keeping only
/// intervals whose both endpoints lie strictly after `burn_in`.
pub fn intervals_after(log: &SpikeLog, burn_in: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for times in log.per_node_times() {
        for pair in times.windows(2) {
            if pair[0] > burn_in {
                out.push(pair[1] - pair[0]);
            }
        }
    }
    out
}

fn estimate_from_intervals(intervals: &[f64]) -> Result<PeriodEstimate> {
    let n = intervals.len();
    if n == 0 {
        return Err(Error::InsufficientData(
            "no inter-spike intervals after burn-in".into(),
        ));
    }
    let mean = intervals.iter().sum::<f64>() / n as f64;
    let std_error = if n < 2 {
        0.0
    } else {
        let var = intervals.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>()
            / (n - 1) as f64;
        (var / n as f64).sqrt()
    };
    Ok(PeriodEstimate { mean_period: mean, std_error, n_intervals: n })
}

/// Mean period of one run: all post-burn-in inter-spike intervals pooled
/// across neurons.
pub fn mean_period(log: &SpikeLog, burn_in: f64) -> Result<PeriodEstimate> {
    estimate_from_intervals(&intervals_after(log, burn_in))
}

/// Mean period pooled across several runs of the same experiment.
pub fn pooled_period(logs: &[SpikeLog], burn_in: f64) -> Result<PeriodEstimate> {
    let mut all = Vec::new();
    for log in logs {
        all.extend(intervals_after(log, burn_in));
    }
    estimate_from_intervals(&all)
}

/// Cumulative spike count over time: an initial `(0, 0)` entry, then one
/// entry per event. `node` restricts the count to a single neuron.
pub fn cumulative_counts(log: &SpikeLog, node: Option<Node>) -> Vec<(f64, u64)> {
    let mut out = Vec::with_capacity(log.events.len() + 1);
    out.push((0.0, 0));
    let mut count = 0u64;
    for e in &log.events {
        if node.is_none_or(|n| n == e.node) {
            count += 1;
            out.push((e.t, count));
        }
    }
    out
}

/// Ordinary least squares through `(x, y)` points.
pub fn linear_fit(series: &[(f64, f64)]) -> Result<LineFit> {
    let n = series.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "linear fit needs at least 2 points, got {n}"
        )));
    }
    let nf = n as f64;
    let mean_x = series.iter().map(|p| p.0).sum::<f64>() / nf;
    let mean_y = series.iter().map(|p| p.1).sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in series {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::InsufficientData(
            "linear fit needs at least two distinct x values".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let r_squared = if syy == 0.0 { 0.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(LineFit { slope, intercept, r_squared })
}

/// Binned per-neuron firing rate averaged across runs. All logs must come
/// from the same lattice and time span. An event is binned by the midpoint
/// of the step that produced it, which makes bin membership insensitive to
/// boundary rounding.
pub fn rate_timeseries(logs: &[SpikeLog], bin_width: f64) -> Result<RateSeries> {
    let first = logs
        .first()
        .ok_or_else(|| Error::InsufficientData("rate series needs at least one run".into()))?;
    if !(bin_width.is_finite() && bin_width > 0.0) {
        return Err(Error::invalid(format!("bin_width must be positive, got {bin_width}")));
    }
    let t_total = first.params.t_total;
    let n_nodes = first.spec.len();
    for log in logs {
        if log.spec != first.spec || log.params.t_total != t_total || log.params.dt != first.params.dt
        {
            return Err(Error::invalid(
                "all runs in a rate series must share lattice, dt, and t_total",
            ));
        }
    }
    if bin_width > t_total {
        return Err(Error::invalid(format!(
            "bin_width {bin_width} exceeds t_total {t_total}"
        )));
    }
    let n_bins = (t_total / bin_width - 1e-9).ceil().max(1.0) as usize;
    let span = |b: usize| -> f64 {
        let start = b as f64 * bin_width;
        (t_total - start).min(bin_width)
    };
    let mut mean = vec![0.0f64; n_bins];
    let mut m2 = vec![0.0f64; n_bins];
    let mut counts = vec![0u64; n_bins];
    for (r, log) in logs.iter().enumerate() {
        counts.iter_mut().for_each(|c| *c = 0);
        let half_step = 0.5 * log.params.dt;
        for e in &log.events {
            let b = (((e.t - half_step) / bin_width) as usize).min(n_bins - 1);
            counts[b] += 1;
        }
        // Welford across runs, per bin.
        for b in 0..n_bins {
            let rate = counts[b] as f64 / (n_nodes as f64 * span(b));
            let delta = rate - mean[b];
            mean[b] += delta / (r + 1) as f64;
            m2[b] += delta * (rate - mean[b]);
        }
    }
    let n_runs = logs.len();
    let bins = (0..n_bins)
        .map(|b| {
            let std_err = if n_runs < 2 {
                0.0
            } else {
                (m2[b] / (n_runs - 1) as f64 / n_runs as f64).sqrt()
            };
            RateBin { start: b as f64 * bin_width, mean: mean[b], std_err }
        })
        .collect();
    Ok(RateSeries { bin_width, n_runs, bins })
}

/// Mean rate over the last [`PLATEAU_TAIL_BINS`] bins of a series.
pub fn plateau_rate(series: &RateSeries) -> Result<f64> {
    let n = series.bins.len();
    if n < PLATEAU_TAIL_BINS {
        return Err(Error::InsufficientData(format!(
            "plateau needs at least {PLATEAU_TAIL_BINS} bins, got {n}"
        )));
    }
    let tail = &series.bins[n - PLATEAU_TAIL_BINS..];
    Ok(tail.iter().map(|b| b.mean).sum::<f64>() / PLATEAU_TAIL_BINS as f64)
}

/// Time after which the rate stays within `epsilon` (relative) of its
/// plateau, the plateau being the mean of the last [`PLATEAU_TAIL_BINS`]
/// bins. Returns 0 when the whole series is already within the band.
pub fn memory_decay_time(series: &RateSeries, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid(format!(
            "epsilon must be in (0, 1), got {epsilon}"
        )));
    }
    let plateau = plateau_rate(series)?;
    let band = epsilon * plateau.abs();
    let mut decay = 0.0;
    for (i, bin) in series.bins.iter().enumerate() {
        if (bin.mean - plateau).abs() > band {
            // Settled only after this bin ends.
            decay = series.bin_width * (i + 1) as f64;
        }
    }
    Ok(decay)
}

//! Experiment harness: parameter sweeps, input-memory experiments, and
//! single-run diagnostics, all reproducible from one master seed.
//!
//! Each (experiment, parameter point, run) tuple derives its own RNG stream
//! from the master seed via [`substream_seed`], so results do not depend on
//! scheduling and rerunning any experiment with the same seed reproduces it
//! bit for bit. Runs within a parameter point execute in parallel.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{
    self, LineFit, PeriodEstimate, RateSeries, PLATEAU_TAIL_BINS,
};
use crate::dynamics::{self, substream_seed, SimParams, SpikeLog};
use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, Node};
use crate::predictor;

const TAG_SWEEP: u64 = 0x53_57_45_45_50; // "SWEEP"
const TAG_INPUT: u64 = 0x49_4e_50_55_54; // "INPUT"
const ASSIGN_SALT: u64 = 0xA5A5_A5A5_A5A5_A5A5;

/// Initial-amplitude pattern laid onto the lattice at t = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InputPattern {
    /// Every peripheral node starts at `a_init`.
    #[serde(rename = "all-one")]
    AllPeripheralOne,
    /// Alternate peripheral nodes start at `a_init`, walking the ring
    /// clockwise from the top-left corner; the rest start at zero.
    #[serde(rename = "alternating")]
    PeripheralAlternating,
    /// Peripheral nodes start at independent uniform draws in `[0, a_init)`.
    #[serde(rename = "random")]
    PeripheralRandom,
    /// Everything starts at zero.
    #[serde(rename = "all-zero")]
    AllZero,
}

impl InputPattern {
    pub const ALL: [InputPattern; 4] = [
        InputPattern::AllPeripheralOne,
        InputPattern::PeripheralAlternating,
        InputPattern::PeripheralRandom,
        InputPattern::AllZero,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            InputPattern::AllPeripheralOne => "all-one",
            InputPattern::PeripheralAlternating => "alternating",
            InputPattern::PeripheralRandom => "random",
            InputPattern::AllZero => "all-zero",
        }
    }

    fn tag(&self) -> u64 {
        match self {
            InputPattern::AllPeripheralOne => 1,
            InputPattern::PeripheralAlternating => 2,
            InputPattern::PeripheralRandom => 3,
            InputPattern::AllZero => 4,
        }
    }

    /// Per-node initial amplitudes for this pattern, row-major. `rng` is
    /// only consumed by [`InputPattern::PeripheralRandom`].
    pub fn assign<R: Rng>(&self, spec: &LatticeSpec, a_init: f64, rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; spec.len()];
        match self {
            InputPattern::AllZero => {}
            InputPattern::AllPeripheralOne => {
                for node in spec.peripheral_nodes() {
                    out[spec.flat_index(node)] = a_init;
                }
            }
            InputPattern::PeripheralAlternating => {
                for (i, node) in spec.peripheral_walk().into_iter().enumerate() {
                    if i % 2 == 0 {
                        out[spec.flat_index(node)] = a_init;
                    }
                }
            }
            InputPattern::PeripheralRandom => {
                for node in spec.peripheral_walk() {
                    out[spec.flat_index(node)] = rng.random::<f64>() * a_init;
                }
            }
        }
        out
    }
}

impl std::fmt::Display for InputPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for InputPattern {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        InputPattern::ALL
            .into_iter()
            .find(|p| p.label() == s)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown input pattern {s:?}; expected one of all-one, alternating, random, all-zero"
                ))
            })
    }
}

/// Which dynamics parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepParam {
    #[serde(rename = "v")]
    PulseStrength,
    #[serde(rename = "width")]
    PulseWidth,
}

impl SweepParam {
    pub fn label(&self) -> &'static str {
        match self {
            SweepParam::PulseStrength => "v",
            SweepParam::PulseWidth => "width",
        }
    }

    fn tag(&self) -> u64 {
        match self {
            SweepParam::PulseStrength => 1,
            SweepParam::PulseWidth => 2,
        }
    }

    fn apply(&self, params: &SimParams, value: f64) -> SimParams {
        match self {
            SweepParam::PulseStrength => SimParams { v: value, ..*params },
            SweepParam::PulseWidth => SimParams { width: value, ..*params },
        }
    }
}

impl std::fmt::Display for SweepParam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for SweepParam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "v" => Ok(SweepParam::PulseStrength),
            "width" => Ok(SweepParam::PulseWidth),
            other => Err(Error::invalid(format!(
                "unknown sweep parameter {other:?}; expected v or width"
            ))),
        }
    }
}

/// What an experiment actually ran: parameters, lattice, pattern (input
/// experiments only), and the run count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub params: SimParams,
    pub spec: LatticeSpec,
    pub pattern: Option<InputPattern>,
    pub runs: usize,
}

/// Period predicted for an experiment's parameter point, with the law
/// constants used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodPrediction {
    pub k: f64,
    pub q: f64,
    pub period: f64,
}

/// Mean rate over the tail bins of a rate series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateauStats {
    pub mean: f64,
    pub std_error: f64,
    pub tail_bins: usize,
}

/// Everything measured in one experiment (one sweep point, one input
/// pattern, or one diagnostic run). Fields are `None` when the experiment
/// kind does not produce them.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    /// Set by sweeps: which parameter was varied and its value here.
    pub sweep_value: Option<(SweepParam, f64)>,
    /// One estimate per run that produced at least one interval.
    pub per_run_periods: Vec<PeriodEstimate>,
    /// Pooled over all runs; `None` if nothing fired after burn-in.
    pub period: Option<PeriodEstimate>,
    pub prediction: Option<PeriodPrediction>,
    pub rate_series: Option<RateSeries>,
    pub memory_decay: Option<f64>,
    pub plateau: Option<PlateauStats>,
    /// Cumulative count of the first run, all neurons.
    pub cumulative: Option<Vec<(f64, u64)>>,
    pub tracked_node: Option<Node>,
    pub tracked_cumulative: Option<Vec<(f64, u64)>>,
    pub pooled_fit: Option<LineFit>,
    pub tracked_fit: Option<LineFit>,
    /// Spike log of the first run.
    pub raster: Option<SpikeLog>,
}

impl ExperimentResult {
    fn empty(config: ExperimentConfig) -> Self {
        ExperimentResult {
            config,
            sweep_value: None,
            per_run_periods: Vec::new(),
            period: None,
            prediction: None,
            rate_series: None,
            memory_decay: None,
            plateau: None,
            cumulative: None,
            tracked_node: None,
            tracked_cumulative: None,
            pooled_fit: None,
            tracked_fit: None,
            raster: None,
        }
    }
}

/// The parameter-free mean-field prediction for these parameters, or `None`
/// when the drive vanishes and the predicted period diverges.
fn mean_field_prediction(params: &SimParams) -> Option<PeriodPrediction> {
    let (k, q) = predictor::mean_field_constants(params.k_rate);
    let period = predictor::mean_field_period(params.k_rate, params.v0, params.v, params.width);
    period.is_finite().then_some(PeriodPrediction { k, q, period })
}

fn check_runs(runs: usize) -> Result<()> {
    if runs == 0 {
        return Err(Error::invalid("runs must be positive"));
    }
    Ok(())
}

/// Simulate `runs` independent realizations of `params`, with initial
/// amplitudes produced by `make_initial(run_index)`.
fn parallel_runs<F>(
    params: &SimParams,
    spec: &LatticeSpec,
    runs: usize,
    seed_tags: &[u64],
    make_initial: F,
) -> Result<Vec<SpikeLog>>
where
    F: Fn(u64) -> Vec<f64> + Sync,
{
    (0..runs as u64)
        .into_par_iter()
        .map(|run| {
            let mut tags = seed_tags.to_vec();
            tags.push(run);
            let run_params = SimParams {
                seed: substream_seed(params.seed, &tags),
                ..*params
            };
            let mut log = dynamics::run(&run_params, spec, &make_initial(run))?;
            log.run_id = run;
            // Keep the master seed in the log so the config echo stays the
            // experiment-level one.
            log.params.seed = params.seed;
            Ok(log)
        })
        .collect()
}

/// Uniform random amplitudes in `[0, a_init)`, the warm start used by
/// sweeps: it lands within a few percent of the steady state in about one
/// period, so a short burn-in suffices at every point of the grid.
fn warm_start(spec: &LatticeSpec, a_init: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..spec.len()).map(|_| rng.random::<f64>() * a_init).collect()
}

/// Sweep one dynamics parameter over `values`, running `runs_per_value`
/// realizations at each point. Every point gets the measured pooled period
/// and the mean-field prediction.
pub fn sweep(
    values: &[f64],
    which: SweepParam,
    base: &SimParams,
    spec: &LatticeSpec,
    runs_per_value: usize,
) -> Result<Vec<ExperimentResult>> {
    check_runs(runs_per_value)?;
    if values.is_empty() {
        return Err(Error::invalid("sweep needs at least one value"));
    }
    base.validate()?;
    let mut results = Vec::with_capacity(values.len());
    for &value in values {
        let params = which.apply(base, value);
        params.validate().map_err(|e| {
            Error::invalid(format!("sweep value {} = {value}: {e}", which.label()))
        })?;
        let tags = [TAG_SWEEP, which.tag(), value.to_bits()];
        let logs = parallel_runs(&params, spec, runs_per_value, &tags, |run| {
            let mut assign_tags = tags.to_vec();
            assign_tags.extend([run, ASSIGN_SALT]);
            warm_start(spec, params.a_init, substream_seed(params.seed, &assign_tags))
        })?;
        let per_run: Vec<PeriodEstimate> = logs
            .iter()
            .map(|log| analytics::mean_period(log, params.burn_in))
            .collect::<Result<_>>()
            .map_err(|e| {
                Error::InsufficientData(format!(
                    "sweep value {} = {value}: {e}",
                    which.label()
                ))
            })?;
        let pooled = analytics::pooled_period(&logs, params.burn_in)?;
        let mut result = ExperimentResult::empty(ExperimentConfig {
            params,
            spec: *spec,
            pattern: None,
            runs: runs_per_value,
        });
        result.sweep_value = Some((which, value));
        result.per_run_periods = per_run;
        result.period = Some(pooled);
        result.prediction = mean_field_prediction(&params);
        result.cumulative = Some(analytics::cumulative_counts(&logs[0], None));
        result.raster = Some(logs.into_iter().next().unwrap());
        results.push(result);
    }
    Ok(results)
}

/// Options for [`input_experiment_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputOptions {
    /// Rate-series bin width; defaults to the mean-field period, falling
    /// back to `t_total / 20` when that is unusable.
    pub bin_width: Option<f64>,
    /// Relative band defining the rate plateau.
    pub decay_epsilon: f64,
}

impl Default for InputOptions {
    fn default() -> Self {
        InputOptions { bin_width: None, decay_epsilon: 0.05 }
    }
}

/// [`input_experiment_with`] under default options.
pub fn input_experiment(
    pattern: InputPattern,
    base: &SimParams,
    spec: &LatticeSpec,
    runs: usize,
) -> Result<ExperimentResult> {
    input_experiment_with(pattern, base, spec, runs, InputOptions::default())
}

/// Run an input-memory experiment: lay `pattern` onto the lattice, simulate
/// `runs` realizations, and measure how the across-run firing rate forgets
/// the input, via the rate time series, its decay time, and its plateau.
pub fn input_experiment_with(
    pattern: InputPattern,
    base: &SimParams,
    spec: &LatticeSpec,
    runs: usize,
    options: InputOptions,
) -> Result<ExperimentResult> {
    check_runs(runs)?;
    base.validate()?;
    let tags = [TAG_INPUT, pattern.tag()];
    let logs = parallel_runs(base, spec, runs, &tags, |run| {
        let mut assign_tags = tags.to_vec();
        assign_tags.extend([run, ASSIGN_SALT]);
        let mut rng = ChaCha8Rng::seed_from_u64(substream_seed(base.seed, &assign_tags));
        pattern.assign(spec, base.a_init, &mut rng)
    })?;

    let bin_width = match options.bin_width {
        Some(b) => b,
        None => {
            let tau = predictor::mean_field_period(base.k_rate, base.v0, base.v, base.width);
            if tau.is_finite() && tau > 0.0 && tau <= base.t_total {
                tau
            } else {
                base.t_total / 20.0
            }
        }
    };
    let series = analytics::rate_timeseries(&logs, bin_width)?;
    let decay = analytics::memory_decay_time(&series, options.decay_epsilon)?;
    let plateau_mean = analytics::plateau_rate(&series)?;
    let tail = &series.bins[series.bins.len() - PLATEAU_TAIL_BINS..];
    let plateau_se = (tail.iter().map(|b| b.std_err * b.std_err).sum::<f64>()).sqrt()
        / PLATEAU_TAIL_BINS as f64;

    let mut per_run = Vec::new();
    for log in &logs {
        match analytics::mean_period(log, base.burn_in) {
            Ok(est) => per_run.push(est),
            Err(Error::InsufficientData(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let period = match analytics::pooled_period(&logs, base.burn_in) {
        Ok(est) => Some(est),
        Err(Error::InsufficientData(_)) => None,
        Err(e) => return Err(e),
    };

    let mut result = ExperimentResult::empty(ExperimentConfig {
        params: *base,
        spec: *spec,
        pattern: Some(pattern),
        runs,
    });
    result.per_run_periods = per_run;
    result.period = period;
    result.prediction = mean_field_prediction(base);
    result.rate_series = Some(series);
    result.memory_decay = Some(decay);
    result.plateau = Some(PlateauStats {
        mean: plateau_mean,
        std_error: plateau_se,
        tail_bins: PLATEAU_TAIL_BINS,
    });
    result.cumulative = Some(analytics::cumulative_counts(&logs[0], None));
    result.raster = Some(logs.into_iter().next().unwrap());
    Ok(result)
}

/// One cold-start run with full diagnostics: spike raster, cumulative
/// counts (all neurons and one tracked neuron), linear fits to both
/// post-burn-in cumulative curves, the binned rate, and the measured versus
/// predicted period. Uses `params.seed` directly, so it is the run most
/// easily reproduced by hand.
pub fn single_run_diagnostics(
    params: &SimParams,
    spec: &LatticeSpec,
    tracked: Node,
) -> Result<ExperimentResult> {
    params.validate()?;
    if !spec.contains(tracked) {
        return Err(Error::invalid(format!(
            "tracked node {tracked} out of range for {}x{} lattice",
            spec.rows, spec.cols
        )));
    }
    let log = dynamics::run(params, spec, &vec![0.0; spec.len()])?;
    let period = analytics::mean_period(&log, params.burn_in)?;

    let fit_after_burn_in = |counts: &[(f64, u64)]| -> Result<LineFit> {
        let pts: Vec<(f64, f64)> = counts
            .iter()
            .filter(|(t, _)| *t > params.burn_in)
            .map(|(t, c)| (*t, *c as f64))
            .collect();
        analytics::linear_fit(&pts)
    };
    let cumulative = analytics::cumulative_counts(&log, None);
    let tracked_cumulative = analytics::cumulative_counts(&log, Some(tracked));
    let pooled_fit = fit_after_burn_in(&cumulative)?;
    let tracked_fit = fit_after_burn_in(&tracked_cumulative)?;

    let tau = predictor::mean_field_period(params.k_rate, params.v0, params.v, params.width);
    let bin_width = if tau.is_finite() && tau > 0.0 && tau <= params.t_total {
        tau
    } else {
        params.t_total / 20.0
    };
    let series = analytics::rate_timeseries(&std::slice::from_ref(&log), bin_width)?;

    let mut result = ExperimentResult::empty(ExperimentConfig {
        params: *params,
        spec: *spec,
        pattern: None,
        runs: 1,
    });
    result.per_run_periods = vec![period];
    result.period = Some(period);
    result.prediction = mean_field_prediction(params);
    result.rate_series = Some(series);
    result.cumulative = Some(cumulative);
    result.tracked_node = Some(tracked);
    result.tracked_cumulative = Some(tracked_cumulative);
    result.pooled_fit = Some(pooled_fit);
    result.tracked_fit = Some(tracked_fit);
    result.raster = Some(log);
    Ok(result)
}

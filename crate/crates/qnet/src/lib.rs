//! Stochastic integrate-and-fire dynamics on a 2D lattice, with a
//! closed-form predictor for the firing period.
//!
//! Neurons accumulate a potential integral (a steady background plus square
//! pulses from their four lattice neighbors) and fire at a rate proportional
//! to its square; firing resets the integral, emits a pulse, and permanently
//! erases any initial amplitude the neuron still carried. Despite the noise,
//! the lattice settles into steady firing whose mean period follows a
//! 2/3-power law in the combined drive; [`predictor`] evaluates, calibrates,
//! and fits that law, and [`reference`] carries the golden data it is
//! validated against.
//!
//! The crate is organized as a library plus a thin `qnet` binary:
//!
//! - [`lattice`]: geometry, neighborhoods, boundary conditions.
//! - [`dynamics`]: the simulation engine and its parameters.
//! - [`predictor`]: period laws, calibration, fitting.
//! - [`analytics`]: spike-log statistics (periods, rates, fits).
//! - [`experiments`]: sweeps, input-memory experiments, diagnostics.
//! - [`reference`]: golden period tables and the reference calibration.
//! - [`config`], [`output`], [`cli`]: TOML configs, file writers, and the
//!   command-line front end.
//!
//! Every run is reproducible: one master seed determines every draw, runs
//! get independent derived streams, and identical invocations produce
//! byte-identical outputs. See the `examples/` directory for end-to-end
//! usage of each capability.

pub mod analytics;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod lattice;
pub mod output;
pub mod predictor;
pub mod reference;

pub use analytics::{LineFit, PeriodEstimate, RateBin, RateSeries};
pub use config::RunConfig;
pub use dynamics::{run, SimParams, SpikeEvent, SpikeLog};
pub use error::{Error, Result};
pub use experiments::{
    input_experiment, single_run_diagnostics, sweep, ExperimentResult, InputPattern, SweepParam,
};
pub use lattice::{Boundary, LatticeSpec, Node};
pub use predictor::{fit_kq, PredictionParams};

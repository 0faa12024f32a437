//! TOML run configuration. Sections mirror the library modules:
//! `[lattice]`, `[dynamics]`, `[experiment]`, `[output]`. Every key has a
//! default, so the empty string is a valid config; unknown keys are
//! rejected with the offending key named.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::dynamics::SimParams;
use crate::error::{Error, Result};
use crate::experiments::{InputPattern, SweepParam};
use crate::lattice::{Boundary, LatticeSpec, Node};
use crate::output::OutputFormat;

/// Fraction of `t_total` used as burn-in when the config does not set one.
pub const DEFAULT_BURN_IN_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LatticeSection {
    pub rows: usize,
    pub cols: usize,
    pub boundary: Boundary,
}

impl Default for LatticeSection {
    fn default() -> Self {
        LatticeSection { rows: 40, cols: 40, boundary: Boundary::Periodic }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsSection {
    pub v0: f64,
    pub v: f64,
    pub width: f64,
    pub k_rate: f64,
    pub dt: f64,
    pub t_total: f64,
    /// Defaults to 20% of `t_total` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<f64>,
    pub a_init: f64,
    pub seed: u64,
    pub max_steps: u64,
}

impl Default for DynamicsSection {
    fn default() -> Self {
        let p = SimParams::default();
        DynamicsSection {
            v0: p.v0,
            v: p.v,
            width: p.width,
            k_rate: p.k_rate,
            dt: p.dt,
            t_total: p.t_total,
            burn_in: None,
            a_init: p.a_init,
            seed: p.seed,
            max_steps: p.max_steps,
        }
    }
}

/// Which experiment a config describes when run without an explicit
/// subcommand choice; also sets the default run count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Simulate,
    Sweep,
    Input,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    pub kind: ExperimentKind,
    /// Sweep parameter; the `sweep` subcommand's `--param` overrides it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub param: Option<SweepParam>,
    /// Sweep grid; `--values` overrides it.
    pub values: Vec<f64>,
    /// Runs per parameter point / per pattern. Defaults by kind: 1 for
    /// simulate, 20 for sweeps, 100 for input experiments.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runs: Option<usize>,
    pub pattern: InputPattern,
    /// Rate-series bin width; defaults to the predicted mean period.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bin_width: Option<f64>,
    pub decay_epsilon: f64,
    /// Node highlighted in single-run diagnostics, `[row, col]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tracked: Option<[usize; 2]>,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            kind: ExperimentKind::Simulate,
            param: None,
            values: Vec::new(),
            runs: None,
            pattern: InputPattern::AllZero,
            bin_width: None,
            decay_epsilon: 0.05,
            tracked: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Output directory; falls back to `$QNET_OUT`, then `qnet-out`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    pub formats: Vec<OutputFormat>,
}

/// A full run configuration. Parse with [`RunConfig::from_toml`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub lattice: LatticeSection,
    pub dynamics: DynamicsSection,
    pub experiment: ExperimentSection,
    pub output: OutputSection,
}

impl RunConfig {
    /// Parse and validate. Syntax errors and unknown keys surface with the
    /// offending location; semantic errors name the offending key.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialization cannot fail")
    }

    /// Dynamics parameters with the burn-in default applied.
    pub fn sim_params(&self) -> SimParams {
        let d = &self.dynamics;
        SimParams {
            v0: d.v0,
            v: d.v,
            width: d.width,
            k_rate: d.k_rate,
            dt: d.dt,
            t_total: d.t_total,
            burn_in: d.burn_in.unwrap_or(DEFAULT_BURN_IN_FRACTION * d.t_total),
            a_init: d.a_init,
            seed: d.seed,
            max_steps: d.max_steps,
        }
    }

    pub fn lattice_spec(&self) -> Result<LatticeSpec> {
        LatticeSpec::new(self.lattice.rows, self.lattice.cols, self.lattice.boundary)
    }

    /// The diagnostics node, defaulting to the origin.
    pub fn tracked_node(&self) -> Node {
        match self.experiment.tracked {
            Some([row, col]) => Node::new(row, col),
            None => Node::new(0, 0),
        }
    }

    /// Run count with the per-kind default applied.
    pub fn resolved_runs(&self, kind: ExperimentKind) -> usize {
        self.experiment.runs.unwrap_or(match kind {
            ExperimentKind::Simulate => 1,
            ExperimentKind::Sweep => 20,
            ExperimentKind::Input => 100,
        })
    }

    /// Output formats, defaulting to all of them.
    pub fn formats(&self) -> Vec<OutputFormat> {
        if self.output.formats.is_empty() {
            vec![OutputFormat::Csv, OutputFormat::Dat, OutputFormat::Json]
        } else {
            self.output.formats.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let section = |name: &str, e: Error| Error::Config(format!("[{name}] {e}"));
        let spec = self.lattice_spec().map_err(|e| section("lattice", e))?;
        self.sim_params().validate().map_err(|e| section("dynamics", e))?;
        let x = &self.experiment;
        if let Some(runs) = x.runs {
            if runs == 0 {
                return Err(Error::Config("[experiment] runs must be positive".into()));
            }
        }
        if let Some(b) = x.bin_width {
            if !(b.is_finite() && b > 0.0) {
                return Err(Error::Config(format!(
                    "[experiment] bin_width must be positive, got {b}"
                )));
            }
        }
        if !(x.decay_epsilon > 0.0 && x.decay_epsilon < 1.0) {
            return Err(Error::Config(format!(
                "[experiment] decay_epsilon must be in (0, 1), got {}",
                x.decay_epsilon
            )));
        }
        for v in &x.values {
            if !v.is_finite() {
                return Err(Error::Config(format!(
                    "[experiment] values must be finite, got {v}"
                )));
            }
        }
        if let Some([row, col]) = x.tracked {
            if !spec.contains(Node::new(row, col)) {
                return Err(Error::Config(format!(
                    "[experiment] tracked node [{row}, {col}] out of range for {}x{} lattice",
                    spec.rows, spec.cols
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn empty_config_is_all_defaults() {
        let cfg = RunConfig::from_toml("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        let spec = cfg.lattice_spec().unwrap();
        assert_eq!((spec.rows, spec.cols), (40, 40));
        assert_eq!(spec.boundary, Boundary::Periodic);
        let p = cfg.sim_params();
        assert_relative_eq!(p.v0, 1.0);
        assert_relative_eq!(p.burn_in, 0.1);
        assert_eq!(cfg.resolved_runs(ExperimentKind::Sweep), 20);
        assert_eq!(cfg.resolved_runs(ExperimentKind::Input), 100);
        assert_eq!(cfg.formats().len(), 3);
        assert_eq!(cfg.tracked_node(), Node::new(0, 0));
    }

    #[test]
    fn partial_overrides_merge_with_defaults() {
        let cfg = RunConfig::from_toml(
            r#"
            [lattice]
            rows = 12
            boundary = "open"

            [dynamics]
            v = 0.4
            burn_in = 0.05

            [experiment]
            kind = "input"
            pattern = "alternating"
            runs = 7

            [output]
            formats = ["csv"]
            "#,
        )
        .unwrap();
        assert_eq!(cfg.lattice.rows, 12);
        assert_eq!(cfg.lattice.cols, 40);
        assert_eq!(cfg.lattice.boundary, Boundary::Open);
        assert_relative_eq!(cfg.sim_params().v, 0.4);
        assert_relative_eq!(cfg.sim_params().burn_in, 0.05);
        assert_eq!(cfg.experiment.kind, ExperimentKind::Input);
        assert_eq!(cfg.experiment.pattern, InputPattern::PeripheralAlternating);
        assert_eq!(cfg.resolved_runs(ExperimentKind::Input), 7);
        assert_eq!(cfg.formats(), vec![OutputFormat::Csv]);
    }

    #[test]
    fn unknown_keys_are_rejected_by_name() {
        let err = RunConfig::from_toml("[dynamics]\nbogus = 1\n").unwrap_err().to_string();
        assert!(err.contains("bogus"), "{err}");
        let err = RunConfig::from_toml("[mystery]\nx = 1\n").unwrap_err().to_string();
        assert!(err.contains("mystery"), "{err}");
    }

    #[test]
    fn semantic_errors_name_the_key() {
        let err = RunConfig::from_toml("[dynamics]\nwidth = -0.5\n").unwrap_err().to_string();
        assert!(err.contains("width must be positive"), "{err}");
        let err = RunConfig::from_toml("[dynamics]\ndt = 0.5\nwidth = 0.2\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("dt must be smaller than width"), "{err}");
        let err = RunConfig::from_toml("[lattice]\nrows = 1\n").unwrap_err().to_string();
        assert!(err.contains("rows"), "{err}");
        let err = RunConfig::from_toml("[experiment]\ndecay_epsilon = 1.5\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("decay_epsilon"), "{err}");
        let err = RunConfig::from_toml("[experiment]\ntracked = [40, 0]\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("tracked"), "{err}");
    }

    #[test]
    fn burn_in_defaults_to_a_fifth_of_the_span() {
        let cfg = RunConfig::from_toml("[dynamics]\nt_total = 2.0\n").unwrap();
        assert_relative_eq!(cfg.sim_params().burn_in, 0.4);
    }

    #[test]
    fn serialization_round_trips() {
        let mut cfg = RunConfig::default();
        cfg.lattice.rows = 8;
        cfg.lattice.boundary = Boundary::Open;
        cfg.dynamics.v = 0.35;
        cfg.dynamics.burn_in = Some(0.07);
        cfg.experiment.kind = ExperimentKind::Sweep;
        cfg.experiment.param = Some(SweepParam::PulseWidth);
        cfg.experiment.values = vec![0.1, 0.2];
        cfg.experiment.tracked = Some([2, 3]);
        cfg.output.dir = Some(PathBuf::from("out"));
        cfg.output.formats = vec![OutputFormat::Json, OutputFormat::Csv];
        let text = cfg.to_toml();
        let back = RunConfig::from_toml(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn malformed_toml_reports_location() {
        let err = RunConfig::from_toml("[dynamics\nv=1").unwrap_err().to_string();
        assert!(err.to_lowercase().contains("line"), "{err}");
    }
}

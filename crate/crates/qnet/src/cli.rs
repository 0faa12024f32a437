//! Command-line interface. Exit codes: 0 on success, 1 for usage errors,
//! 2 for validation errors (bad config values, bad inputs), 3 for runtime
//! and I/O errors. The output directory resolves in order: `--out` flag,
//! `output.dir` in the config, the `QNET_OUT` environment variable, then
//! `./qnet-out`.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::analytics::PeriodEstimate;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::experiments::{self, InputOptions, InputPattern, SweepParam};
use crate::output::{self, Manifest};
use crate::predictor::{self, Observation, PredictionParams};
use crate::reference;

/// Environment variable naming the default output directory.
pub const OUT_ENV_VAR: &str = "QNET_OUT";

#[derive(Debug, Parser)]
#[command(name = "qnet", version, about = "Integrate-and-fire lattice simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one simulation with full diagnostics.
    Simulate {
        /// TOML config file.
        #[arg(long)]
        config: PathBuf,
        /// Override the config's RNG seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep a dynamics parameter and measure the period at each value.
    Sweep {
        /// Which parameter to vary.
        #[arg(long, value_parser = parse_sweep_param)]
        param: Option<SweepParam>,
        /// Comma-separated parameter values.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the closed-form period law.
    Predict {
        #[arg(long)]
        v0: f64,
        #[arg(long)]
        v: f64,
        #[arg(long)]
        width: f64,
        /// Law prefactor; defaults to the reference calibration.
        #[arg(long)]
        k: Option<f64>,
        /// Neighbor weight; defaults to the reference value.
        #[arg(long)]
        q: Option<f64>,
    },
    /// Fit the period law to measured periods.
    Fit {
        /// CSV with columns v0,v,width,period (header optional).
        #[arg(long)]
        data: PathBuf,
    },
    /// Run an input-memory experiment.
    InputExp {
        /// Initial pattern: all-one, alternating, random, or all-zero.
        #[arg(long, value_parser = parse_pattern)]
        pattern: Option<InputPattern>,
        /// Independent runs to average over.
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_sweep_param(s: &str) -> std::result::Result<SweepParam, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_pattern(s: &str) -> std::result::Result<InputPattern, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Run the CLI on explicit arguments and return the process exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidInput(_) | Error::InsufficientData(_) | Error::Config(_) => 2,
                Error::ResourceLimit(_) | Error::Io(_) => 3,
            }
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Simulate { config, seed, out } => simulate(&config, seed, out),
        Command::Sweep { param, values, config, seed, out } => {
            sweep(param, values, &config, seed, out)
        }
        Command::Predict { v0, v, width, k, q } => predict(v0, v, width, k, q),
        Command::Fit { data } => fit(&data),
        Command::InputExp { pattern, runs, config, seed, out } => {
            input_exp(pattern, runs, &config, seed, out)
        }
    }
}

fn load_config(path: &std::path::Path, seed: Option<u64>) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("cannot read config {}: {e}", path.display()),
        ))
    })?;
    let mut cfg = RunConfig::from_toml(&text)?;
    if let Some(seed) = seed {
        cfg.dynamics.seed = seed;
    }
    Ok(cfg)
}

fn resolve_out_dir(flag: Option<PathBuf>, cfg: &RunConfig) -> PathBuf {
    flag.or_else(|| cfg.output.dir.clone())
        .or_else(|| std::env::var_os(OUT_ENV_VAR).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("qnet-out"))
}

fn print_manifest(manifest: &Manifest) {
    for file in &manifest.files {
        println!("wrote {}", file.display());
    }
}

fn print_period(label: &str, est: &PeriodEstimate) {
    println!(
        "{label} = {:.9} +/- {:.9} ({} intervals)",
        est.mean_period, est.std_error, est.n_intervals
    );
}

fn simulate(config: &std::path::Path, seed: Option<u64>, out: Option<PathBuf>) -> Result<()> {
    let cfg = load_config(config, seed)?;
    let spec = cfg.lattice_spec()?;
    let result =
        experiments::single_run_diagnostics(&cfg.sim_params(), &spec, cfg.tracked_node())?;
    let manifest = output::write_outputs(&result, &resolve_out_dir(out, &cfg), &cfg.formats())?;
    print_manifest(&manifest);
    if let Some(est) = &result.period {
        print_period("period", est);
    }
    if let Some(pred) = &result.prediction {
        println!("predicted = {:.9}", pred.period);
    }
    if let Some(fit) = &result.pooled_fit {
        println!("pooled_fit_r2 = {:.6}", fit.r_squared);
    }
    Ok(())
}

fn sweep(
    param: Option<SweepParam>,
    values: Option<Vec<f64>>,
    config: &std::path::Path,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> Result<()> {
    let cfg = load_config(config, seed)?;
    let spec = cfg.lattice_spec()?;
    let which = param.or(cfg.experiment.param).ok_or_else(|| {
        Error::invalid("no sweep parameter: pass --param or set experiment.param")
    })?;
    let values = values
        .filter(|v| !v.is_empty())
        .or_else(|| (!cfg.experiment.values.is_empty()).then(|| cfg.experiment.values.clone()))
        .ok_or_else(|| {
            Error::invalid("no sweep values: pass --values or set experiment.values")
        })?;
    let runs = cfg.experiment.runs.unwrap_or(20);
    let results = experiments::sweep(&values, which, &cfg.sim_params(), &spec, runs)?;
    let manifest =
        output::write_sweep_outputs(&results, &resolve_out_dir(out, &cfg), &cfg.formats())?;
    print_manifest(&manifest);
    for r in &results {
        let (_, value) = r.sweep_value.expect("sweep results carry their value");
        let measured = r.period.as_ref().map_or(f64::NAN, |e| e.mean_period);
        let predicted = r.prediction.as_ref().map_or(f64::NAN, |p| p.period);
        println!(
            "{} = {value}: measured {measured:.9}, predicted {predicted:.9}",
            which.label()
        );
    }
    Ok(())
}

fn predict(v0: f64, v: f64, width: f64, k: Option<f64>, q: Option<f64>) -> Result<()> {
    let k = k.unwrap_or_else(reference::reference_k);
    let q = q.unwrap_or(reference::REFERENCE_Q);
    let params = PredictionParams::new(k, q, v0, v, width)?;
    println!("tau = {:.9}", params.period());
    Ok(())
}

fn fit(data: &std::path::Path) -> Result<()> {
    let text = std::fs::read_to_string(data).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("cannot read data {}: {e}", data.display()),
        ))
    })?;
    let mut observations = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if line_no == 0 && fields.iter().any(|f| f.parse::<f64>().is_err()) {
            continue; // header line
        }
        if fields.len() != 4 {
            return Err(Error::invalid(format!(
                "line {}: expected 4 fields v0,v,width,period, got {}",
                line_no + 1,
                fields.len()
            )));
        }
        let parse = |i: usize| -> Result<f64> {
            fields[i].parse().map_err(|_| {
                Error::invalid(format!("line {}: bad number {:?}", line_no + 1, fields[i]))
            })
        };
        observations.push(Observation {
            v0: parse(0)?,
            v: parse(1)?,
            width: parse(2)?,
            period: parse(3)?,
        });
    }
    let fit = predictor::fit_kq(&observations)?;
    println!("k = {:.9}", fit.k);
    println!("q = {:.9}", fit.q);
    println!("rms_residual = {:.9}", fit.rms_residual());
    println!("max_residual = {:.9}", fit.max_abs_residual());
    for (o, r) in observations.iter().zip(&fit.residuals) {
        println!(
            "v0 = {}, v = {}, width = {}: period {:.9}, residual {:+.4}%",
            o.v0,
            o.v,
            o.width,
            o.period,
            r * 100.0
        );
    }
    Ok(())
}

fn input_exp(
    pattern: Option<InputPattern>,
    runs: Option<usize>,
    config: &std::path::Path,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> Result<()> {
    let cfg = load_config(config, seed)?;
    let spec = cfg.lattice_spec()?;
    let pattern = pattern.unwrap_or(cfg.experiment.pattern);
    let runs = runs.or(cfg.experiment.runs).unwrap_or(100);
    let options = InputOptions {
        bin_width: cfg.experiment.bin_width,
        decay_epsilon: cfg.experiment.decay_epsilon,
    };
    let result =
        experiments::input_experiment_with(pattern, &cfg.sim_params(), &spec, runs, options)?;
    let manifest = output::write_outputs(&result, &resolve_out_dir(out, &cfg), &cfg.formats())?;
    print_manifest(&manifest);
    println!("pattern = {pattern}");
    if let Some(series) = &result.rate_series {
        if let Some(first) = series.bins.first() {
            println!("first_bin_rate = {:.9}", first.mean);
        }
    }
    if let Some(decay) = result.memory_decay {
        println!("memory_decay_time = {decay:.9}");
    }
    if let Some(plateau) = &result.plateau {
        println!("plateau_rate = {:.9} +/- {:.9}", plateau.mean, plateau.std_error);
    }
    if let Some(est) = &result.period {
        print_period("period", est);
    }
    Ok(())
}

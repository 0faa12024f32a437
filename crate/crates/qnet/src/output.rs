//! Experiment output writers: `spikes`, `cumulative`, and `rates` tables as
//! CSV and/or whitespace `.dat` mirrors, plus a `summary.json` with enough
//! information to reproduce the run. Writes are atomic (temp file + rename),
//! floats carry 9 significant digits, and a lock file guards each output
//! directory against concurrent experiments.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{ExperimentResult, SweepParam};

/// Lock-file name used to serialize writers on one directory.
pub const LOCK_FILE: &str = ".qnet.lock";

/// On-disk table formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    /// Comma-separated tables with a header line.
    Csv,
    /// Whitespace-separated mirrors with a `#` header line.
    Dat,
    /// The `summary.json` document.
    Json,
}

/// What a writer produced: the directory and every file written, in order.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
}

/// Format a float with 9 significant digits, scientific notation.
pub fn format_float(x: f64) -> String {
    format!("{x:.8e}")
}

fn round9(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        x
    } else {
        format_float(x).parse().expect("9-digit float round-trips")
    }
}

fn round_floats(value: &mut serde_json::Value) {
    use serde_json::Value;
    match value {
        Value::Number(n) => {
            if n.is_f64() {
                let x = n.as_f64().expect("checked f64");
                if let Some(r) = serde_json::Number::from_f64(round9(x)) {
                    *value = Value::Number(r);
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

struct DirLock {
    path: PathBuf,
}

impl DirLock {
    fn acquire(dir: &Path) -> Result<Self> {
        let path = dir.join(LOCK_FILE);
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                use std::io::Write;
                let _ = writeln!(f, "{}", std::process::id());
                Ok(DirLock { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                Err(Error::ResourceLimit(format!(
                    "output directory {} is locked by another experiment \
                     (remove {} if stale)",
                    dir.display(),
                    path.display()
                )))
            }
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let tmp = tempfile::NamedTempFile::new_in(dir)?;
    fs::write(tmp.path(), bytes)?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// One table, rendered as CSV or as a `#`-headed whitespace `.dat`.
struct Table {
    name: &'static str,
    header: &'static [&'static str],
    rows: Vec<Vec<String>>,
}

impl Table {
    fn render(&self, format: OutputFormat) -> String {
        let mut out = String::new();
        match format {
            OutputFormat::Csv => {
                let _ = writeln!(out, "{}", self.header.join(","));
                for row in &self.rows {
                    let _ = writeln!(out, "{}", row.join(","));
                }
            }
            OutputFormat::Dat => {
                let _ = writeln!(out, "# {}", self.header.join(" "));
                for row in &self.rows {
                    let _ = writeln!(out, "{}", row.join(" "));
                }
            }
            OutputFormat::Json => unreachable!("tables are not rendered as JSON"),
        }
        out
    }

    fn file_name(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => format!("{}.csv", self.name),
            OutputFormat::Dat => format!("{}.dat", self.name),
            OutputFormat::Json => unreachable!(),
        }
    }
}

fn tables_for(result: &ExperimentResult) -> Vec<Table> {
    let spikes = Table {
        name: "spikes",
        header: &["t", "row", "col"],
        rows: result
            .raster
            .iter()
            .flat_map(|log| &log.events)
            .map(|e| vec![format_float(e.t), e.node.row.to_string(), e.node.col.to_string()])
            .collect(),
    };
    let cumulative = Table {
        name: "cumulative",
        header: &["t", "count"],
        rows: result
            .cumulative
            .iter()
            .flatten()
            .map(|(t, c)| vec![format_float(*t), c.to_string()])
            .collect(),
    };
    let rates = Table {
        name: "rates",
        header: &["bin_start", "mean_rate", "stderr"],
        rows: result
            .rate_series
            .iter()
            .flat_map(|s| &s.bins)
            .map(|b| vec![format_float(b.start), format_float(b.mean), format_float(b.std_err)])
            .collect(),
    };
    vec![spikes, cumulative, rates]
}

#[derive(Serialize)]
struct ToolInfo {
    name: &'static str,
    version: &'static str,
    git: &'static str,
}

fn tool_info() -> ToolInfo {
    ToolInfo {
        name: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        git: env!("QNET_GIT_DESCRIBE"),
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    tool: ToolInfo,
    config: &'a crate::experiments::ExperimentConfig,
    seed: u64,
    n_events: Option<usize>,
    period: Option<&'a crate::analytics::PeriodEstimate>,
    prediction: Option<&'a crate::experiments::PeriodPrediction>,
    per_run_periods: &'a [crate::analytics::PeriodEstimate],
    pooled_fit: Option<&'a crate::analytics::LineFit>,
    tracked_node: Option<crate::lattice::Node>,
    tracked_fit: Option<&'a crate::analytics::LineFit>,
    memory_decay: Option<f64>,
    plateau: Option<&'a crate::experiments::PlateauStats>,
}

fn summary_for(result: &ExperimentResult) -> Summary<'_> {
    Summary {
        tool: tool_info(),
        config: &result.config,
        seed: result.config.params.seed,
        n_events: result.raster.as_ref().map(|log| log.events.len()),
        period: result.period.as_ref(),
        prediction: result.prediction.as_ref(),
        per_run_periods: &result.per_run_periods,
        pooled_fit: result.pooled_fit.as_ref(),
        tracked_node: result.tracked_node,
        tracked_fit: result.tracked_fit.as_ref(),
        memory_decay: result.memory_decay,
        plateau: result.plateau.as_ref(),
    }
}

fn render_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_value(value)
        .map_err(|e| Error::invalid(format!("summary serialization failed: {e}")))?;
    round_floats(&mut v);
    let mut bytes = serde_json::to_vec_pretty(&v)
        .map_err(|e| Error::invalid(format!("summary serialization failed: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn dedup_formats(formats: &[OutputFormat]) -> Vec<OutputFormat> {
    let mut out = Vec::new();
    for f in formats {
        if !out.contains(f) {
            out.push(*f);
        }
    }
    out
}

fn write_result_files(
    result: &ExperimentResult,
    dir: &Path,
    formats: &[OutputFormat],
    files: &mut Vec<PathBuf>,
) -> Result<()> {
    let tables = tables_for(result);
    for format in formats {
        match format {
            OutputFormat::Csv | OutputFormat::Dat => {
                for table in &tables {
                    let path = dir.join(table.file_name(*format));
                    write_atomic(&path, table.render(*format).as_bytes())?;
                    files.push(path);
                }
            }
            OutputFormat::Json => {
                let path = dir.join("summary.json");
                write_atomic(&path, &render_json(&summary_for(result))?)?;
                files.push(path);
            }
        }
    }
    Ok(())
}

/// Write one experiment's outputs into `dir`, creating it if needed.
pub fn write_outputs(
    result: &ExperimentResult,
    dir: &Path,
    formats: &[OutputFormat],
) -> Result<Manifest> {
    fs::create_dir_all(dir)?;
    let _lock = DirLock::acquire(dir)?;
    let mut files = Vec::new();
    write_result_files(result, dir, &dedup_formats(formats), &mut files)?;
    Ok(Manifest { dir: dir.to_path_buf(), files })
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    tool: ToolInfo,
    param: &'static str,
    values: Vec<f64>,
    runs_per_value: usize,
    seed: u64,
    points: Vec<SweepRow<'a>>,
}

#[derive(Serialize)]
struct SweepRow<'a> {
    value: f64,
    predicted: Option<f64>,
    measured: Option<&'a crate::analytics::PeriodEstimate>,
    dir: String,
}

/// Directory name for one sweep point, e.g. `v_0.3` or `width_0.5`.
fn point_dir_name(param: SweepParam, value: f64) -> String {
    format!("{}_{}", param.label(), value)
}

/// Write a whole sweep: one subdirectory per parameter point plus a
/// top-level `sweep` table and `summary.json` collecting the periods.
pub fn write_sweep_outputs(
    results: &[ExperimentResult],
    dir: &Path,
    formats: &[OutputFormat],
) -> Result<Manifest> {
    let first = results
        .first()
        .ok_or_else(|| Error::invalid("sweep produced no results"))?;
    let (param, _) = first
        .sweep_value
        .ok_or_else(|| Error::invalid("write_sweep_outputs needs sweep results"))?;
    fs::create_dir_all(dir)?;
    let _lock = DirLock::acquire(dir)?;
    let formats = dedup_formats(formats);
    let mut files = Vec::new();

    let mut points = Vec::new();
    for result in results {
        let (p, value) = result
            .sweep_value
            .ok_or_else(|| Error::invalid("sweep result missing its parameter value"))?;
        if p != param {
            return Err(Error::invalid("sweep results mix parameters"));
        }
        let sub = dir.join(point_dir_name(param, value));
        fs::create_dir_all(&sub)?;
        write_result_files(result, &sub, &formats, &mut files)?;
        points.push(SweepRow {
            value,
            predicted: result.prediction.as_ref().map(|p| p.period),
            measured: result.period.as_ref(),
            dir: point_dir_name(param, value),
        });
    }

    let sweep_table = Table {
        name: "sweep",
        header: &["value", "predicted", "measured", "stderr", "n_intervals"],
        rows: results
            .iter()
            .map(|r| {
                let (_, value) = r.sweep_value.expect("checked above");
                vec![
                    format_float(value),
                    r.prediction
                        .as_ref()
                        .map_or_else(|| "nan".into(), |p| format_float(p.period)),
                    r.period
                        .as_ref()
                        .map_or_else(|| "nan".into(), |e| format_float(e.mean_period)),
                    r.period
                        .as_ref()
                        .map_or_else(|| "nan".into(), |e| format_float(e.std_error)),
                    r.period.as_ref().map_or(0, |e| e.n_intervals).to_string(),
                ]
            })
            .collect(),
    };
    for format in &formats {
        match format {
            OutputFormat::Csv | OutputFormat::Dat => {
                let path = dir.join(sweep_table.file_name(*format));
                write_atomic(&path, sweep_table.render(*format).as_bytes())?;
                files.push(path);
            }
            OutputFormat::Json => {
                let summary = SweepSummary {
                    tool: tool_info(),
                    param: param.label(),
                    values: results
                        .iter()
                        .map(|r| r.sweep_value.expect("checked above").1)
                        .collect(),
                    runs_per_value: first.config.runs,
                    seed: first.config.params.seed,
                    points: std::mem::take(&mut points),
                };
                let path = dir.join("summary.json");
                write_atomic(&path, &render_json(&summary)?)?;
                files.push(path);
            }
        }
    }
    Ok(Manifest { dir: dir.to_path_buf(), files })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::SimParams;
    use crate::experiments::{self, SweepParam};
    use crate::lattice::{Boundary, LatticeSpec, Node};

    fn small_result() -> ExperimentResult {
        let spec = LatticeSpec::new(6, 6, Boundary::Periodic).unwrap();
        let params = SimParams { t_total: 0.3, burn_in: 0.06, seed: 3, ..SimParams::default() };
        experiments::single_run_diagnostics(&params, &spec, Node::new(1, 2)).unwrap()
    }

    #[test]
    fn float_formatting_has_nine_significant_digits() {
        assert_eq!(format_float(0.05), "5.00000000e-2");
        assert_eq!(format_float(123456.789), "1.23456789e5");
        assert_eq!(format_float(-0.25), "-2.50000000e-1");
        assert_eq!(format_float(0.0), "0.00000000e0");
        assert_eq!(round9(0.123456789123), 0.123456789);
    }

    #[test]
    fn all_files_written_with_expected_headers() {
        let dir = tempfile::tempdir().unwrap();
        let result = small_result();
        let formats = [OutputFormat::Csv, OutputFormat::Dat, OutputFormat::Json];
        let manifest = write_outputs(&result, dir.path(), &formats).unwrap();
        let names: Vec<String> = manifest
            .files
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        assert_eq!(
            names,
            vec![
                "spikes.csv",
                "cumulative.csv",
                "rates.csv",
                "spikes.dat",
                "cumulative.dat",
                "rates.dat",
                "summary.json"
            ]
        );
        let spikes = fs::read_to_string(dir.path().join("spikes.csv")).unwrap();
        assert!(spikes.starts_with("t,row,col\n"));
        assert!(spikes.lines().count() > 1);
        let dat = fs::read_to_string(dir.path().join("spikes.dat")).unwrap();
        assert!(dat.starts_with("# t row col\n"));
        let cumulative = fs::read_to_string(dir.path().join("cumulative.csv")).unwrap();
        assert!(cumulative.starts_with("t,count\n0.00000000e0,0\n"));
        let rates = fs::read_to_string(dir.path().join("rates.csv")).unwrap();
        assert!(rates.starts_with("bin_start,mean_rate,stderr\n"));
        // The lock is released once writing finishes.
        assert!(!dir.path().join(LOCK_FILE).exists());
    }

    #[test]
    fn summary_json_is_complete_and_rounded() {
        let dir = tempfile::tempdir().unwrap();
        let result = small_result();
        write_outputs(&result, dir.path(), &[OutputFormat::Json]).unwrap();
        let text = fs::read_to_string(dir.path().join("summary.json")).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["tool"]["name"], "qnet");
        assert!(v["tool"]["version"].is_string());
        assert_eq!(v["config"]["params"]["seed"], 3);
        assert_eq!(v["config"]["spec"]["rows"], 6);
        assert!(v["period"]["mean_period"].as_f64().unwrap() > 0.0);
        assert!(v["prediction"]["period"].as_f64().unwrap() > 0.0);
        assert_eq!(v["tracked_node"]["row"], 1);
        // Every float in the document fits 9 significant digits.
        fn check(v: &serde_json::Value) {
            match v {
                serde_json::Value::Number(n) if n.is_f64() => {
                    let x = n.as_f64().unwrap();
                    assert_eq!(x, round9(x), "unrounded float {x}");
                }
                serde_json::Value::Array(a) => a.iter().for_each(check),
                serde_json::Value::Object(o) => o.values().for_each(check),
                _ => {}
            }
        }
        check(&v);
    }

    #[test]
    fn format_subset_writes_only_those_files() {
        let dir = tempfile::tempdir().unwrap();
        let result = small_result();
        let manifest =
            write_outputs(&result, dir.path(), &[OutputFormat::Json, OutputFormat::Json])
                .unwrap();
        assert_eq!(manifest.files.len(), 1);
        assert!(!dir.path().join("spikes.csv").exists());
        assert!(dir.path().join("summary.json").exists());
    }

    #[test]
    fn rewrites_are_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let result = small_result();
        let formats = [OutputFormat::Csv, OutputFormat::Dat, OutputFormat::Json];
        let first = write_outputs(&result, dir.path(), &formats).unwrap();
        let snapshot: Vec<Vec<u8>> =
            first.files.iter().map(|p| fs::read(p).unwrap()).collect();
        let second = write_outputs(&result, dir.path(), &formats).unwrap();
        assert_eq!(first, second);
        for (path, bytes) in second.files.iter().zip(snapshot) {
            assert_eq!(fs::read(path).unwrap(), bytes, "file {} changed", path.display());
        }
    }

    #[test]
    fn locked_directory_is_refused() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join(LOCK_FILE), "held\n").unwrap();
        let err = write_outputs(&small_result(), dir.path(), &[OutputFormat::Json]).unwrap_err();
        assert!(matches!(err, Error::ResourceLimit(_)), "{err}");
        assert!(err.to_string().contains("locked"));
        fs::remove_file(dir.path().join(LOCK_FILE)).unwrap();
        assert!(write_outputs(&small_result(), dir.path(), &[OutputFormat::Json]).is_ok());
    }

    #[test]
    fn sweep_outputs_build_per_point_directories() {
        let dir = tempfile::tempdir().unwrap();
        let spec = LatticeSpec::new(6, 6, Boundary::Periodic).unwrap();
        let params = SimParams { t_total: 0.3, burn_in: 0.06, seed: 9, ..SimParams::default() };
        let results =
            experiments::sweep(&[0.1, 0.3], SweepParam::PulseStrength, &params, &spec, 2)
                .unwrap();
        let formats = [OutputFormat::Csv, OutputFormat::Json];
        let manifest = write_sweep_outputs(&results, dir.path(), &formats).unwrap();
        assert!(dir.path().join("v_0.1/spikes.csv").exists());
        assert!(dir.path().join("v_0.3/summary.json").exists());
        let sweep_csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
        assert!(sweep_csv.starts_with("value,predicted,measured,stderr,n_intervals\n"));
        assert_eq!(sweep_csv.lines().count(), 3);
        let summary: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap())
                .unwrap();
        assert_eq!(summary["param"], "v");
        assert_eq!(summary["points"].as_array().unwrap().len(), 2);
        assert!(manifest.files.len() > 6);
    }
}

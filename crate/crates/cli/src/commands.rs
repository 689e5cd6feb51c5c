//! Command implementations behind the `fingersim` subcommands, factored so
//! they can be driven from tests without spawning a process.
//!
//! Every failure is classified into one of three stable exit codes:
//! configuration or input-data problems (2), closed-loop divergence (3), and
//! file-system trouble (4). Diagnostics go to the returned error — the
//! binary prints them on stderr; nothing is ever logged silently.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use fingersim_core::analysis::{step_metrics, tracking_metrics};
use fingersim_core::{simulator, Error as CoreError, SimConfig, TraceRecord};

use crate::config::parse_config;
use crate::plot;
use crate::trace_io::{format_trace, parse_trace};

/// Exit code for configuration and input-data errors.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code for closed-loop divergence.
pub const EXIT_DIVERGED: i32 = 3;
/// Exit code for file-system errors (including overwrite refusal).
pub const EXIT_IO: i32 = 4;

/// Marker type stating that runs take no random seed: nothing in the
/// pipeline draws random numbers, so identical inputs give identical bytes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Seedless;

/// Everything a simulation run needs from the command line.
#[derive(Debug, Clone, Default)]
pub struct RunManifest {
    /// Config file to read; `None` means the built-in defaults.
    pub config_path: Option<PathBuf>,
    /// Output directory, created if absent.
    pub out_dir: PathBuf,
    /// Also render the five figures next to the trace.
    pub emit_plots: bool,
    /// Replace an existing `trace.csv` instead of refusing.
    pub overwrite: bool,
    /// Determinism marker; runs are seedless by construction.
    pub seedless: Seedless,
}

/// A command failure carrying its exit-code class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CmdError {
    /// Bad configuration or unreadable/invalid input data (exit 2).
    Config(String),
    /// The simulated closed loop left the representable range (exit 3).
    Diverged(String),
    /// File-system failure (exit 4).
    Io(String),
}

impl CmdError {
    /// The process exit code this error class maps to.
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Config(_) => EXIT_CONFIG,
            CmdError::Diverged(_) => EXIT_DIVERGED,
            CmdError::Io(_) => EXIT_IO,
        }
    }
}

impl fmt::Display for CmdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CmdError::Config(m) | CmdError::Diverged(m) | CmdError::Io(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CmdError {}

/// Which metric family `fingersim metrics` reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MetricKind {
    /// Settling time, overshoot, and steady-state error against the final
    /// reference value.
    Step,
    /// Worst-case and RMS tracking error over the post-transient window.
    Tracking,
}

fn read_config(config_path: Option<&Path>) -> Result<SimConfig, CmdError> {
    let text = match config_path {
        Some(p) => fs::read_to_string(p)
            .map_err(|e| CmdError::Io(format!("cannot read config `{}`: {e}", p.display())))?,
        None => String::new(),
    };
    parse_config(&text).map_err(|e| CmdError::Config(e.to_string()))
}

fn read_trace_file(trace_path: &Path) -> Result<Vec<TraceRecord>, CmdError> {
    let text = fs::read_to_string(trace_path)
        .map_err(|e| CmdError::Config(format!("cannot read trace `{}`: {e}", trace_path.display())))?;
    parse_trace(&text)
        .map_err(|e| CmdError::Config(format!("{}: {e}", trace_path.display())))
}

/// Runs `config` and writes `trace.csv` (plus figures when asked) into
/// `out_dir`. Returns the number of records written.
fn simulate_into(
    config: &SimConfig,
    out_dir: &Path,
    overwrite: bool,
    emit_plots: bool,
) -> Result<usize, CmdError> {
    fs::create_dir_all(out_dir)
        .map_err(|e| CmdError::Io(format!("cannot create `{}`: {e}", out_dir.display())))?;
    let trace_path = out_dir.join("trace.csv");
    if trace_path.exists() && !overwrite {
        return Err(CmdError::Io(format!(
            "refusing to overwrite `{}` (pass --overwrite to replace it)",
            trace_path.display()
        )));
    }

    let trace = simulator::run(config).map_err(|e| match e {
        CoreError::Diverged { .. } => CmdError::Diverged(e.to_string()),
        other => CmdError::Config(other.to_string()),
    })?;

    fs::write(&trace_path, format_trace(&trace))
        .map_err(|e| CmdError::Io(format!("cannot write `{}`: {e}", trace_path.display())))?;
    if emit_plots {
        plot::emit_all(out_dir, &trace).map_err(CmdError::Io)?;
    }
    Ok(trace.len())
}

/// `fingersim simulate`: run the configured experiment into a directory.
pub fn cmd_simulate(manifest: &RunManifest) -> Result<(), CmdError> {
    let config = read_config(manifest.config_path.as_deref())?;
    let n = simulate_into(
        &config,
        &manifest.out_dir,
        manifest.overwrite,
        manifest.emit_plots,
    )?;
    println!(
        "wrote {} ({n} records{})",
        manifest.out_dir.join("trace.csv").display(),
        if manifest.emit_plots {
            ", 5 figures"
        } else {
            ""
        }
    );
    Ok(())
}

/// `fingersim metrics`: summarize a trace into `metrics.txt`.
pub fn cmd_metrics(
    trace_path: &Path,
    kind: MetricKind,
    out_dir: &Path,
    band: f64,
    window_start: f64,
) -> Result<(), CmdError> {
    let trace = read_trace_file(trace_path)?;
    if trace.is_empty() {
        return Err(CmdError::Config(format!(
            "`{}` has no records",
            trace_path.display()
        )));
    }

    let mut report = String::new();
    let mut kv = |k: &str, v: String| {
        report.push_str(k);
        report.push_str(" = ");
        report.push_str(&v);
        report.push('\n');
    };
    match kind {
        MetricKind::Step => {
            let amplitude = trace.last().expect("nonempty").x1d;
            let m = step_metrics(&trace, amplitude, band)
                .map_err(|e| CmdError::Config(e.to_string()))?;
            kv("kind", "step".into());
            kv("records", trace.len().to_string());
            kv("amplitude_rad", amplitude.to_string());
            kv("band", m.band.to_string());
            kv("overshoot_pct", format!("{:.3}", m.overshoot_pct));
            kv("settled", m.settling_time.is_some().to_string());
            kv(
                "settling_time_s",
                m.settling_time.map_or("none".into(), |t| t.to_string()),
            );
            kv("steady_state_error_rad", m.steady_state_error.to_string());
        }
        MetricKind::Tracking => {
            let m = tracking_metrics(&trace, window_start)
                .map_err(|e| CmdError::Config(e.to_string()))?;
            kv("kind", "tracking".into());
            kv("records", trace.len().to_string());
            kv("window_start_s", m.window_start.to_string());
            kv("max_abs_error_rad", m.max_abs_error.to_string());
            kv(
                "max_abs_error_deg",
                m.max_abs_error.to_degrees().to_string(),
            );
            kv("rms_error_rad", m.rms_error.to_string());
            kv("rms_error_deg", m.rms_error.to_degrees().to_string());
        }
    }

    fs::create_dir_all(out_dir)
        .map_err(|e| CmdError::Io(format!("cannot create `{}`: {e}", out_dir.display())))?;
    let report_path = out_dir.join("metrics.txt");
    fs::write(&report_path, &report)
        .map_err(|e| CmdError::Io(format!("cannot write `{}`: {e}", report_path.display())))?;
    print!("{report}");
    Ok(())
}

/// `fingersim plot`: render the five figures from a trace.
pub fn cmd_plot(trace_path: &Path, out_dir: &Path) -> Result<(), CmdError> {
    let trace = read_trace_file(trace_path)?;
    if trace.is_empty() {
        return Err(CmdError::Config(format!(
            "`{}` has no records",
            trace_path.display()
        )));
    }
    fs::create_dir_all(out_dir)
        .map_err(|e| CmdError::Io(format!("cannot create `{}`: {e}", out_dir.display())))?;
    let paths = plot::emit_all(out_dir, &trace).map_err(CmdError::Io)?;
    for p in paths {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn sanitize_dir_name(value: &str) -> String {
    let name: String = value
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '+' | '.' | '_') {
                c
            } else {
                '_'
            }
        })
        .collect();
    if name.is_empty() {
        "_".into()
    } else {
        name
    }
}

/// `fingersim sweep`: one simulation per value of a single overridden key,
/// run in parallel, each into its own subdirectory of `out_base`.
pub fn cmd_sweep(
    config_path: Option<&Path>,
    param: &str,
    values: &[String],
    out_base: &Path,
    overwrite: bool,
    emit_plots: bool,
) -> Result<(), CmdError> {
    if values.is_empty() {
        return Err(CmdError::Config("sweep needs at least one value".into()));
    }
    let base_text = match config_path {
        Some(p) => fs::read_to_string(p)
            .map_err(|e| CmdError::Io(format!("cannot read config `{}`: {e}", p.display())))?,
        None => String::new(),
    };

    // Parse each variant up front so a bad key or value fails before any
    // simulation starts. Later assignments win, so appending the override is
    // all a variant needs.
    let mut runs = Vec::with_capacity(values.len());
    for value in values {
        let text = format!("{base_text}\n{param} = {value}\n");
        let config = parse_config(&text).map_err(|e| {
            CmdError::Config(format!("sweep value `{value}`: {e}"))
        })?;
        runs.push((value.as_str(), config, out_base.join(sanitize_dir_name(value))));
    }

    let results: Vec<(usize, Result<usize, CmdError>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = runs
            .iter()
            .enumerate()
            .map(|(i, (_, config, dir))| {
                scope.spawn(move || (i, simulate_into(config, dir, overwrite, emit_plots)))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });

    let mut ordered = results;
    ordered.sort_by_key(|(i, _)| *i);
    for (i, result) in ordered {
        let (value, _, dir) = &runs[i];
        let contextualize = |e: CmdError| match e {
            CmdError::Config(m) => CmdError::Config(format!("sweep value `{value}`: {m}")),
            CmdError::Diverged(m) => CmdError::Diverged(format!("sweep value `{value}`: {m}")),
            CmdError::Io(m) => CmdError::Io(format!("sweep value `{value}`: {m}")),
        };
        let n = result.map_err(contextualize)?;
        println!("{param} = {value}: wrote {} ({n} records)", dir.display());
    }
    Ok(())
}

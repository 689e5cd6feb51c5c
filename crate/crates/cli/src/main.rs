//! `fingersim` — simulate a tendon-driven two-link finger under a
//! backstepping voltage controller, and post-process the resulting traces.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fingersim_cli::commands::{
    cmd_metrics, cmd_plot, cmd_simulate, cmd_sweep, MetricKind, RunManifest, Seedless,
};

#[derive(Parser)]
#[command(
    name = "fingersim",
    version,
    about = "Tendon-driven finger simulation with a backstepping voltage controller",
    long_about = "Runs closed-loop simulations of a two-link, tendon-coupled robotic finger \
                  driven by a DC motor, writes full-precision CSV traces, and derives metrics \
                  and figures from them. Everything is deterministic: identical inputs produce \
                  byte-identical outputs."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation and write trace.csv into the output directory.
    Simulate {
        /// Config file (flat `section.key = value`); defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory, created if absent.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Replace an existing trace.csv instead of refusing.
        #[arg(long)]
        overwrite: bool,
        /// Also render the five figures next to the trace.
        #[arg(long)]
        plots: bool,
    },
    /// Summarize a trace into metrics.txt (printed to stdout too).
    Metrics {
        /// Trace CSV produced by `simulate`.
        trace: PathBuf,
        /// Which metric family to report.
        #[arg(long, value_enum, default_value_t = MetricKind::Step)]
        kind: MetricKind,
        /// Report directory; defaults to the trace's directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Settling band as a fraction of the step amplitude.
        #[arg(long, default_value_t = 0.02)]
        band: f64,
        /// Start of the tracking evaluation window (s).
        #[arg(long, default_value_t = 1.0)]
        window_start: f64,
    },
    /// Render the five SVG figures from a trace.
    Plot {
        /// Trace CSV produced by `simulate`.
        trace: PathBuf,
        /// Figure directory; defaults to the trace's directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one simulation per value of a single config key, in parallel.
    Sweep {
        /// Base config file; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Key to override, e.g. `controller.k1` or `sim.dt`.
        #[arg(long)]
        param: String,
        /// Comma-separated values; each becomes a run under OUT/<value>/.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        /// Base output directory.
        #[arg(long, default_value = "sweep")]
        out: PathBuf,
        /// Replace existing trace.csv files instead of refusing.
        #[arg(long)]
        overwrite: bool,
        /// Also render figures for every run.
        #[arg(long)]
        plots: bool,
    },
}

fn sibling_dir(trace: &Path, out: Option<PathBuf>) -> PathBuf {
    out.unwrap_or_else(|| {
        let parent = trace.parent().unwrap_or_else(|| Path::new("."));
        if parent.as_os_str().is_empty() {
            PathBuf::from(".")
        } else {
            parent.to_path_buf()
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate {
            config,
            out,
            overwrite,
            plots,
        } => cmd_simulate(&RunManifest {
            config_path: config,
            out_dir: out,
            emit_plots: plots,
            overwrite,
            seedless: Seedless,
        }),
        Command::Metrics {
            trace,
            kind,
            out,
            band,
            window_start,
        } => {
            let out_dir = sibling_dir(&trace, out);
            cmd_metrics(&trace, kind, &out_dir, band, window_start)
        }
        Command::Plot { trace, out } => {
            let out_dir = sibling_dir(&trace, out);
            cmd_plot(&trace, &out_dir)
        }
        Command::Sweep {
            config,
            param,
            values,
            out,
            overwrite,
            plots,
        } => cmd_sweep(config.as_deref(), &param, &values, &out, overwrite, plots),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

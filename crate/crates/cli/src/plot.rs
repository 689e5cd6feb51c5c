//! SVG plot emission for simulation traces.
//!
//! Five figures summarize a run: the joint step response, the tracking
//! error, the virtual-control (torque-surface) error, a reference-vs-actual
//! overlay, and the Lyapunov function. Angles are plotted in degrees, time
//! in seconds. Plots are derived artifacts only — nothing ever reads them
//! back.

use std::path::{Path, PathBuf};

use fingersim_core::TraceRecord;
use plotters::prelude::*;

/// File names of the five emitted figures, in emission order.
pub const PLOT_FILES: [&str; 5] = [
    "fig3_step_response.svg",
    "fig4_tracking_error.svg",
    "fig5_virtual_control_error.svg",
    "fig6_reference_overlay.svg",
    "fig7_lyapunov.svg",
];

const REFERENCE_COLOR: RGBColor = RGBColor(200, 30, 30);
const ACTUAL_COLOR: RGBColor = RGBColor(30, 30, 200);

struct Series {
    label: &'static str,
    color: RGBColor,
    points: Vec<(f64, f64)>,
}

fn render(path: &Path, caption: &str, y_desc: &str, series: &[Series]) -> Result<(), String> {
    let fail = |e: String| format!("{}: {e}", path.display());

    let xs = series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for x in xs {
        x_min = x_min.min(x);
        x_max = x_max.max(x);
    }
    let ys = series.iter().flat_map(|s| s.points.iter().map(|p| p.1));
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for y in ys {
        y_min = y_min.min(y);
        y_max = y_max.max(y);
    }
    if x_min >= x_max {
        x_max = x_min + 1.0;
    }
    let pad = if y_min < y_max {
        0.05 * (y_max - y_min)
    } else {
        1.0
    };

    let root = SVGBackend::new(path, (800, 480)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| fail(e.to_string()))?;
    let mut chart = ChartBuilder::on(&root)
        .caption(caption, ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(42)
        .y_label_area_size(64)
        .build_cartesian_2d(x_min..x_max, (y_min - pad)..(y_max + pad))
        .map_err(|e| fail(e.to_string()))?;
    chart
        .configure_mesh()
        .x_desc("Time (s)")
        .y_desc(y_desc)
        .draw()
        .map_err(|e| fail(e.to_string()))?;

    for s in series {
        let color = s.color;
        chart
            .draw_series(LineSeries::new(s.points.iter().copied(), &color))
            .map_err(|e| fail(e.to_string()))?
            .label(s.label)
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], color));
    }
    if series.len() > 1 {
        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.85))
            .border_style(BLACK)
            .draw()
            .map_err(|e| fail(e.to_string()))?;
    }
    root.present().map_err(|e| fail(e.to_string()))
}

/// Writes all five figures for `trace` into `out_dir` and returns their
/// paths. The directory must exist; files are overwritten freely since plots
/// are derived artifacts.
pub fn emit_all(out_dir: &Path, trace: &[TraceRecord]) -> Result<Vec<PathBuf>, String> {
    if trace.is_empty() {
        return Err("cannot plot an empty trace".into());
    }

    let reference: Vec<(f64, f64)> = trace.iter().map(|r| (r.t, r.x1d.to_degrees())).collect();
    let actual: Vec<(f64, f64)> = trace.iter().map(|r| (r.t, r.x1.to_degrees())).collect();
    let error: Vec<(f64, f64)> = trace.iter().map(|r| (r.t, r.e.to_degrees())).collect();
    let eta: Vec<(f64, f64)> = trace.iter().map(|r| (r.t, r.eta)).collect();
    let v: Vec<(f64, f64)> = trace.iter().map(|r| (r.t, r.v)).collect();

    let two_series = |points_ref: &[(f64, f64)], points_act: &[(f64, f64)]| {
        vec![
            Series {
                label: "reference",
                color: REFERENCE_COLOR,
                points: points_ref.to_vec(),
            },
            Series {
                label: "actual",
                color: ACTUAL_COLOR,
                points: points_act.to_vec(),
            },
        ]
    };

    let jobs: [(&str, &str, &str, Vec<Series>); 5] = [
        (
            PLOT_FILES[0],
            "Proximal joint response",
            "Angle (deg)",
            two_series(&reference, &actual),
        ),
        (
            PLOT_FILES[1],
            "Tracking error",
            "Error (deg)",
            vec![Series {
                label: "e",
                color: ACTUAL_COLOR,
                points: error,
            }],
        ),
        (
            PLOT_FILES[2],
            "Virtual control error",
            "eta (N·m)",
            vec![Series {
                label: "eta",
                color: ACTUAL_COLOR,
                points: eta,
            }],
        ),
        (
            PLOT_FILES[3],
            "Reference vs actual joint angle",
            "Angle (deg)",
            two_series(&reference, &actual),
        ),
        (
            PLOT_FILES[4],
            "Lyapunov function",
            "V",
            vec![Series {
                label: "V",
                color: ACTUAL_COLOR,
                points: v,
            }],
        ),
    ];

    let mut paths = Vec::with_capacity(jobs.len());
    for (file, caption, y_desc, series) in jobs {
        let path = out_dir.join(file);
        render(&path, caption, y_desc, &series)?;
        paths.push(path);
    }
    Ok(paths)
}

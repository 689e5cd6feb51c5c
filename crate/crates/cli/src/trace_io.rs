//! CSV serialization of simulation traces.
//!
//! The trace file is the single data artifact of a run: a fixed sixteen-
//! column header followed by one row per sample. Values are written with the
//! shortest decimal representation that parses back to the identical `f64`,
//! so write → read → write is byte-stable and read → write is lossless.

use std::fmt;

use fingersim_core::TraceRecord;

/// The exact header line of `trace.csv`.
pub const TRACE_HEADER: &str = "t,x1,theta2,x2,x3,current,x1d,dx1d,e,s,eta,x3d,u,e_volt,v,vdot";

const COLUMNS: usize = 16;

/// A malformed trace file, pointing at the offending 1-based line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceError {
    /// 1-based line number (the header is line 1).
    pub line: usize,
    /// Human-readable description.
    pub message: String,
}

impl fmt::Display for TraceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "trace error at line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for TraceError {}

/// Renders a trace as CSV text, header included.
pub fn format_trace(trace: &[TraceRecord]) -> String {
    let mut out = String::with_capacity(32 + trace.len() * 192);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for rec in trace {
        let fields = [
            rec.t, rec.x1, rec.theta2, rec.x2, rec.x3, rec.current, rec.x1d, rec.dx1d, rec.e,
            rec.s, rec.eta, rec.x3d, rec.u, rec.e_volt, rec.v, rec.vdot,
        ];
        for (i, v) in fields.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

/// Parses CSV text produced by [`format_trace`] back into records.
///
/// The header must match [`TRACE_HEADER`] exactly; every data row must have
/// all sixteen fields as parseable numbers. Errors name the offending line.
pub fn parse_trace(text: &str) -> Result<Vec<TraceRecord>, TraceError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end() == TRACE_HEADER => {}
        Some((_, header)) => {
            return Err(TraceError {
                line: 1,
                message: format!("unexpected header `{header}` (expected `{TRACE_HEADER}`)"),
            })
        }
        None => {
            return Err(TraceError {
                line: 1,
                message: "file is empty (missing header)".into(),
            })
        }
    }

    let mut trace = Vec::new();
    for (i, row) in lines {
        let line = i + 1;
        if row.trim().is_empty() {
            continue;
        }
        let mut fields = [0.0_f64; COLUMNS];
        let mut count = 0;
        for part in row.split(',') {
            if count == COLUMNS {
                count += 1;
                break;
            }
            fields[count] = part.trim().parse::<f64>().map_err(|_| TraceError {
                line,
                message: format!("field {} (`{}`) is not a number", count + 1, part.trim()),
            })?;
            count += 1;
        }
        if count != COLUMNS {
            return Err(TraceError {
                line,
                message: format!(
                    "expected {COLUMNS} fields, found {}",
                    if count > COLUMNS { "more".into() } else { count.to_string() }
                ),
            });
        }
        trace.push(TraceRecord {
            t: fields[0],
            x1: fields[1],
            theta2: fields[2],
            x2: fields[3],
            x3: fields[4],
            current: fields[5],
            x1d: fields[6],
            dx1d: fields[7],
            e: fields[8],
            s: fields[9],
            eta: fields[10],
            x3d: fields[11],
            u: fields[12],
            e_volt: fields[13],
            v: fields[14],
            vdot: fields[15],
        });
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use fingersim_core::{simulator, SimConfig};

    #[test]
    fn round_trip_is_exact_and_byte_stable() {
        let config = SimConfig {
            t_end: 1.0,
            ..Default::default()
        };
        let trace = simulator::run(&config).unwrap();
        let text = format_trace(&trace);
        let reparsed = parse_trace(&text).unwrap();
        assert_eq!(reparsed, trace);
        assert_eq!(format_trace(&reparsed), text);
    }

    #[test]
    fn header_must_match() {
        let e = parse_trace("time,stuff\n1,2\n").unwrap_err();
        assert_eq!(e.line, 1);
        assert!(e.message.contains("unexpected header"), "{e}");

        let e = parse_trace("").unwrap_err();
        assert_eq!(e.line, 1);
    }

    #[test]
    fn truncated_and_corrupt_rows_name_their_line() {
        let good = format!("{TRACE_HEADER}\n{}\n", vec!["0"; 16].join(","));
        assert_eq!(parse_trace(&good).unwrap().len(), 1);

        let short = format!("{TRACE_HEADER}\n{}\n0,1,2\n", vec!["0"; 16].join(","));
        let e = parse_trace(&short).unwrap_err();
        assert_eq!(e.line, 3);
        assert!(e.message.contains("expected 16 fields"), "{e}");

        let corrupt = format!("{TRACE_HEADER}\n{}\n", vec!["x"; 16].join(","));
        let e = parse_trace(&corrupt).unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.message.contains("not a number"), "{e}");
    }

    #[test]
    // The long digit strings deliberately stress shortest-round-trip
    // formatting; shortening them would change which floats get tested.
    #[allow(clippy::excessive_precision)]
    fn extreme_values_survive_the_round_trip() {
        let mut rec = TraceRecord {
            t: 0.1 + 0.2,
            x1: -0.0,
            theta2: f64::MIN_POSITIVE,
            x2: 1.0 / 3.0,
            x3: 1e300,
            current: -2.2250738585072014e-308,
            x1d: 60.0_f64.to_radians(),
            dx1d: f64::EPSILON,
            e: -1e-17,
            s: 9.999999999999999e22,
            eta: 0.0,
            x3d: -123.45678901234567,
            u: 5e-324,
            e_volt: -0.1,
            v: 2.0_f64.sqrt(),
            vdot: -std::f64::consts::PI,
        };
        let one = parse_trace(&format_trace(std::slice::from_ref(&rec))).unwrap();
        assert_eq!(one[0], rec);
        assert_eq!(one[0].x1.to_bits(), rec.x1.to_bits(), "-0.0 preserved");
        rec.t = f64::MAX;
        let two = parse_trace(&format_trace(std::slice::from_ref(&rec))).unwrap();
        assert_eq!(two[0].t, f64::MAX);
    }
}

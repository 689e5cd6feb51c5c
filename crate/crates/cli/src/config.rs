//! Flat `section.key = value` configuration files.
//!
//! The format is line-oriented plain text: one assignment per line, `#`
//! starts a comment, blank lines are ignored. Sections are fixed —
//! `finger`, `actuator`, `controller`, `traj` (alias `trajectory`), and
//! `sim` — and every key has a default, so the empty file is a complete,
//! runnable configuration (the bundled step experiment). Angles may be given
//! in radians or, through the `*_deg` key variants, in degrees; setting the
//! same quantity in both units is an error rather than a silent pick.
//!
//! Unknown keys are rejected with their line number. Re-assigning the same
//! key later in the file wins, which is what makes mechanical overrides
//! (e.g. parameter sweeps appending one line) cheap.
//!
//! [`write_config`] serializes a configuration canonically such that parsing
//! it back yields the identical value.

use std::fmt;

use fingersim_core::trajectory::CubicCoeffs;
use fingersim_core::{ControllerMode, SimConfig, TrajectorySpec};

/// A configuration problem: either a specific line (parse/unknown-key
/// errors) or the assembled config as a whole (validation errors).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// 1-based line number, when the problem is attributable to one line.
    pub line: Option<usize>,
    /// Human-readable description.
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "config error at line {line}: {}", self.message),
            None => write!(f, "config error: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line: Some(line),
        message: message.into(),
    }
}

/// One settable quantity, remembering which key form set it and where, so
/// unit conflicts and kind mismatches can cite both offending lines.
#[derive(Debug, Clone, Default)]
struct Slot<V> {
    entry: Option<(V, &'static str, usize)>,
}

impl<V> Slot<V> {
    fn set(&mut self, value: V, key: &'static str, line: usize) -> Result<(), ConfigError> {
        if let Some((_, prev_key, prev_line)) = &self.entry {
            if *prev_key != key {
                return Err(err(
                    line,
                    format!(
                        "`{key}` conflicts with `{prev_key}` (line {prev_line}); \
                         set this quantity in one unit only"
                    ),
                ));
            }
        }
        self.entry = Some((value, key, line));
        Ok(())
    }

    fn value(&self) -> Option<&V> {
        self.entry.as_ref().map(|(v, _, _)| v)
    }

    fn provenance(&self) -> Option<(&'static str, usize)> {
        self.entry.as_ref().map(|(_, k, l)| (*k, *l))
    }
}

/// Trajectory keys are collected first and assembled once the kind is known,
/// because which keys are legal depends on the kind.
#[derive(Debug, Clone, Default)]
struct TrajBuilder {
    kind: Slot<String>,
    amplitude: Slot<f64>,
    a3: Slot<f64>,
    a2: Slot<f64>,
    a1: Slot<f64>,
    a0: Slot<f64>,
    start: Slot<f64>,
    end: Slot<f64>,
    duration: Slot<f64>,
    hold_after: Slot<bool>,
}

impl TrajBuilder {
    fn any_set(&self) -> bool {
        self.kind.value().is_some()
            || self.amplitude.value().is_some()
            || self.a3.value().is_some()
            || self.a2.value().is_some()
            || self.a1.value().is_some()
            || self.a0.value().is_some()
            || self.start.value().is_some()
            || self.end.value().is_some()
            || self.duration.value().is_some()
            || self.hold_after.value().is_some()
    }

    fn reject(&self, kind: &str, slots: &[&Slot<f64>]) -> Result<(), ConfigError> {
        for slot in slots {
            if let Some((key, line)) = slot.provenance() {
                return Err(err(
                    line,
                    format!("key `traj.{key}` is not valid for trajectory kind `{kind}`"),
                ));
            }
        }
        Ok(())
    }

    fn build(self, default: TrajectorySpec) -> Result<TrajectorySpec, ConfigError> {
        if !self.any_set() {
            return Ok(default);
        }
        let kind = self.kind.value().cloned().unwrap_or_else(|| "step".into());
        match kind.as_str() {
            "step" => {
                self.reject(
                    &kind,
                    &[
                        &self.a3,
                        &self.a2,
                        &self.a1,
                        &self.a0,
                        &self.start,
                        &self.end,
                        &self.duration,
                    ],
                )?;
                if let Some((key, line)) = self.hold_after.provenance() {
                    return Err(err(
                        line,
                        format!("key `traj.{key}` is not valid for trajectory kind `step`"),
                    ));
                }
                Ok(TrajectorySpec::Step {
                    amplitude: self
                        .amplitude
                        .value()
                        .copied()
                        .unwrap_or_else(|| 60.0_f64.to_radians()),
                })
            }
            "cubic_poly" => {
                self.reject(
                    &kind,
                    &[&self.amplitude, &self.start, &self.end, &self.duration],
                )?;
                Ok(TrajectorySpec::CubicPoly {
                    coeffs: CubicCoeffs {
                        a3: self.a3.value().copied().unwrap_or(0.0),
                        a2: self.a2.value().copied().unwrap_or(0.0),
                        a1: self.a1.value().copied().unwrap_or(0.0),
                        a0: self.a0.value().copied().unwrap_or(0.0),
                    },
                    hold_after: self.hold_after.value().copied().unwrap_or(true),
                })
            }
            "cubic_boundary" => {
                self.reject(
                    &kind,
                    &[&self.amplitude, &self.a3, &self.a2, &self.a1, &self.a0],
                )?;
                Ok(TrajectorySpec::CubicBoundary {
                    start: self.start.value().copied().unwrap_or(0.0),
                    end: self
                        .end
                        .value()
                        .copied()
                        .unwrap_or_else(|| 60.0_f64.to_radians()),
                    duration: self.duration.value().copied().unwrap_or(10.0),
                    hold_after: self.hold_after.value().copied().unwrap_or(true),
                })
            }
            other => {
                let (_, line) = self.kind.provenance().expect("kind was set");
                Err(err(
                    line,
                    format!(
                        "unknown trajectory kind `{other}` \
                         (expected step, cubic_poly, or cubic_boundary)"
                    ),
                ))
            }
        }
    }
}

struct Parser {
    config: SimConfig,
    x0_x1: Slot<f64>,
    traj: TrajBuilder,
}

impl Parser {
    fn new() -> Self {
        Self {
            config: SimConfig::default(),
            x0_x1: Slot::default(),
            traj: TrajBuilder::default(),
        }
    }

    fn apply(&mut self, key: &str, value: &str, line: usize) -> Result<(), ConfigError> {
        let f = |v: &str, l: usize, k: &str| -> Result<f64, ConfigError> {
            v.parse::<f64>()
                .map_err(|_| err(l, format!("invalid number `{v}` for `{k}`")))
        };
        let c = &mut self.config;
        match key {
            "finger.m1" => c.fp.m1 = f(value, line, key)?,
            "finger.m2" => c.fp.m2 = f(value, line, key)?,
            "finger.l1" => c.fp.l1 = f(value, line, key)?,
            "finger.l2" => c.fp.l2 = f(value, line, key)?,
            "finger.lc1" => c.fp.lc1 = f(value, line, key)?,
            "finger.lc2" => c.fp.lc2 = f(value, line, key)?,
            "finger.i1" => c.fp.i1 = f(value, line, key)?,
            "finger.i2" => c.fp.i2 = f(value, line, key)?,
            "finger.r1" => c.fp.r1 = f(value, line, key)?,
            "finger.r2" => c.fp.r2 = f(value, line, key)?,
            "finger.k1s" => c.fp.k1s = f(value, line, key)?,
            "finger.k2s" => c.fp.k2s = f(value, line, key)?,
            "finger.grav" => c.fp.grav = f(value, line, key)?,
            "actuator.j" => c.ap.j = f(value, line, key)?,
            "actuator.b" => c.ap.b = f(value, line, key)?,
            "actuator.ra" => c.ap.ra = f(value, line, key)?,
            "actuator.ms" => c.ap.ms = f(value, line, key)?,
            "actuator.l" => c.ap.l = f(value, line, key)?,
            "actuator.rarm" => c.ap.rarm = f(value, line, key)?,
            "actuator.kt" => c.ap.kt = f(value, line, key)?,
            "actuator.kb" => c.ap.kb = f(value, line, key)?,
            "controller.lambda" => c.gains.lambda_s = f(value, line, key)?,
            "controller.k1" => c.gains.k1 = f(value, line, key)?,
            "controller.k2" => c.gains.k2 = f(value, line, key)?,
            "sim.dt" => c.dt = f(value, line, key)?,
            "sim.t_end" => c.t_end = f(value, line, key)?,
            "sim.x0_x1" => self.x0_x1.set(f(value, line, key)?, "sim.x0_x1", line)?,
            "sim.x0_x1_deg" => {
                self.x0_x1
                    .set(f(value, line, key)?.to_radians(), "sim.x0_x1_deg", line)?
            }
            "sim.x0_x2" => c.x0.x2 = f(value, line, key)?,
            "sim.x0_x3" => c.x0.x3 = f(value, line, key)?,
            "sim.controller_mode" => {
                c.controller_mode = match value {
                    "continuous" => ControllerMode::Continuous,
                    "zero_order_hold" => ControllerMode::ZeroOrderHold,
                    other => {
                        return Err(err(
                            line,
                            format!(
                                "unknown controller mode `{other}` \
                                 (expected continuous or zero_order_hold)"
                            ),
                        ))
                    }
                }
            }
            "sim.voltage_clamp" => c.voltage_clamp = Some(f(value, line, key)?),
            _ => {
                let suffix = key
                    .strip_prefix("traj.")
                    .or_else(|| key.strip_prefix("trajectory."));
                match suffix {
                    Some(s) => self.apply_traj(s, value, line)?,
                    None => return Err(err(line, format!("unknown key `{key}`"))),
                }
            }
        }
        Ok(())
    }

    fn apply_traj(&mut self, suffix: &str, value: &str, line: usize) -> Result<(), ConfigError> {
        let f = |v: &str, l: usize, k: &str| -> Result<f64, ConfigError> {
            v.parse::<f64>()
                .map_err(|_| err(l, format!("invalid number `{v}` for `traj.{k}`")))
        };
        let t = &mut self.traj;
        match suffix {
            "kind" => t.kind.set(value.to_string(), "kind", line)?,
            "amplitude" => t.amplitude.set(f(value, line, suffix)?, "amplitude", line)?,
            "amplitude_deg" => {
                t.amplitude
                    .set(f(value, line, suffix)?.to_radians(), "amplitude_deg", line)?
            }
            "a3" => t.a3.set(f(value, line, suffix)?, "a3", line)?,
            "a2" => t.a2.set(f(value, line, suffix)?, "a2", line)?,
            "a1" => t.a1.set(f(value, line, suffix)?, "a1", line)?,
            "a0" => t.a0.set(f(value, line, suffix)?, "a0", line)?,
            "start" => t.start.set(f(value, line, suffix)?, "start", line)?,
            "start_deg" => {
                t.start
                    .set(f(value, line, suffix)?.to_radians(), "start_deg", line)?
            }
            "end" => t.end.set(f(value, line, suffix)?, "end", line)?,
            "end_deg" => {
                t.end
                    .set(f(value, line, suffix)?.to_radians(), "end_deg", line)?
            }
            "duration" => t.duration.set(f(value, line, suffix)?, "duration", line)?,
            "hold_after" => {
                let b = match value {
                    "true" => true,
                    "false" => false,
                    other => {
                        return Err(err(
                            line,
                            format!("invalid boolean `{other}` for `traj.hold_after`"),
                        ))
                    }
                };
                t.hold_after.set(b, "hold_after", line)?
            }
            other => return Err(err(line, format!("unknown key `traj.{other}`"))),
        }
        Ok(())
    }

    fn finish(mut self) -> Result<SimConfig, ConfigError> {
        if let Some(v) = self.x0_x1.value() {
            self.config.x0.x1 = *v;
        }
        self.config.traj = self.traj.build(self.config.traj)?;
        self.config.validate().map_err(|e| ConfigError {
            line: None,
            message: e.to_string(),
        })?;
        Ok(self.config)
    }
}

/// Parses configuration text into a validated [`SimConfig`].
///
/// Missing keys fall back to the bundled step-experiment defaults; the empty
/// string therefore parses to [`SimConfig::default`]. Errors carry the
/// offending line number where one exists.
pub fn parse_config(text: &str) -> Result<SimConfig, ConfigError> {
    let mut parser = Parser::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            return Err(err(
                line_no,
                format!("malformed line `{content}`: expected `section.key = value`"),
            ));
        };
        let key = k.trim().to_ascii_lowercase();
        let value = v.trim();
        if value.is_empty() {
            return Err(err(line_no, format!("key `{key}` has no value")));
        }
        parser.apply(&key, value, line_no)?;
    }
    parser.finish()
}

/// Serializes a configuration so that [`parse_config`] reproduces it
/// exactly. Floats use the shortest decimal form that round-trips.
pub fn write_config(config: &SimConfig) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    };

    kv("finger.m1", config.fp.m1.to_string());
    kv("finger.m2", config.fp.m2.to_string());
    kv("finger.l1", config.fp.l1.to_string());
    kv("finger.l2", config.fp.l2.to_string());
    kv("finger.lc1", config.fp.lc1.to_string());
    kv("finger.lc2", config.fp.lc2.to_string());
    kv("finger.i1", config.fp.i1.to_string());
    kv("finger.i2", config.fp.i2.to_string());
    kv("finger.r1", config.fp.r1.to_string());
    kv("finger.r2", config.fp.r2.to_string());
    kv("finger.k1s", config.fp.k1s.to_string());
    kv("finger.k2s", config.fp.k2s.to_string());
    kv("finger.grav", config.fp.grav.to_string());
    kv("actuator.j", config.ap.j.to_string());
    kv("actuator.b", config.ap.b.to_string());
    kv("actuator.ra", config.ap.ra.to_string());
    kv("actuator.ms", config.ap.ms.to_string());
    kv("actuator.l", config.ap.l.to_string());
    kv("actuator.rarm", config.ap.rarm.to_string());
    kv("actuator.kt", config.ap.kt.to_string());
    kv("actuator.kb", config.ap.kb.to_string());
    kv("controller.lambda", config.gains.lambda_s.to_string());
    kv("controller.k1", config.gains.k1.to_string());
    kv("controller.k2", config.gains.k2.to_string());
    match &config.traj {
        TrajectorySpec::Step { amplitude } => {
            kv("traj.kind", "step".into());
            kv("traj.amplitude", amplitude.to_string());
        }
        TrajectorySpec::CubicPoly { coeffs, hold_after } => {
            kv("traj.kind", "cubic_poly".into());
            kv("traj.a3", coeffs.a3.to_string());
            kv("traj.a2", coeffs.a2.to_string());
            kv("traj.a1", coeffs.a1.to_string());
            kv("traj.a0", coeffs.a0.to_string());
            kv("traj.hold_after", hold_after.to_string());
        }
        TrajectorySpec::CubicBoundary {
            start,
            end,
            duration,
            hold_after,
        } => {
            kv("traj.kind", "cubic_boundary".into());
            kv("traj.start", start.to_string());
            kv("traj.end", end.to_string());
            kv("traj.duration", duration.to_string());
            kv("traj.hold_after", hold_after.to_string());
        }
    }
    kv("sim.dt", config.dt.to_string());
    kv("sim.t_end", config.t_end.to_string());
    kv("sim.x0_x1", config.x0.x1.to_string());
    kv("sim.x0_x2", config.x0.x2.to_string());
    kv("sim.x0_x3", config.x0.x3.to_string());
    kv(
        "sim.controller_mode",
        match config.controller_mode {
            ControllerMode::Continuous => "continuous".into(),
            ControllerMode::ZeroOrderHold => "zero_order_hold".into(),
        },
    );
    if let Some(clamp) = config.voltage_clamp {
        kv("sim.voltage_clamp", clamp.to_string());
    }
    out
}

//! Fixed-step closed-loop integration of plant and controller.
//!
//! A run is a strictly sequential recurrence: classical fourth-order
//! Runge–Kutta at a fixed step, with the controller either re-evaluated at
//! every integrator stage (the default, matching the continuous-time
//! analysis) or held over each step. Runs are fully deterministic — there is
//! no randomness anywhere — so identical configurations produce bit-identical
//! traces. Divergence aborts with the failure time and the last finite state
//! rather than clamping, which would mask controller bugs.

use crate::controller::{control_step, ControlSignals, ControllerGains};
use crate::dynamics::{
    expand_state, state_derivative, ActuatorParams, FingerParams, ReducedState,
};
use crate::error::{require, Error, Result};
use crate::scalar::{lit, Scalar};
use crate::trajectory::{sample, ReferencePoint, TrajectorySpec};


/// How the discrete integrator sees the controller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ControllerMode {
    /// Re-evaluate the control law inside every integration stage. This is
    /// the continuous-control idealization: the voltage law's cancellation of
    /// the fast armature dynamics then holds at every stage point, and the
    /// Lyapunov decay survives the 10 ms default step.
    #[default]
    Continuous,
    /// Compute the voltage once per step and hold it. Faithful to a discrete
    /// implementation, but the uncancelled armature pole (at -Ra/L) then
    /// limits the usable step to well below a millisecond.
    ZeroOrderHold,
}

/// Complete description of one simulation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig<T> {
    /// Integration step (s).
    pub dt: T,
    /// Horizon (s); the run emits records at `t = 0, dt, …` up to `t_end`.
    pub t_end: T,
    /// Initial reduced state.
    pub x0: ReducedState<T>,
    /// Finger constants.
    pub fp: FingerParams<T>,
    /// Slider and motor constants.
    pub ap: ActuatorParams<T>,
    /// Controller gains.
    pub gains: ControllerGains<T>,
    /// Reference trajectory.
    pub traj: TrajectorySpec<T>,
    /// Controller discretization mode.
    pub controller_mode: ControllerMode,
    /// Optional symmetric saturation |E| ≤ clamp on the commanded armature
    /// voltage, for experimentation; `None` (the default everywhere) leaves
    /// the law unbounded.
    pub voltage_clamp: Option<T>,
}

impl<T: Scalar> Default for SimConfig<T> {
    /// The bundled step experiment ([`SimConfig::step_experiment`]).
    fn default() -> Self {
        Self::step_experiment()
    }
}

impl<T: Scalar> SimConfig<T> {
    /// Bundled step experiment: 60° step on the proximal joint, default
    /// plant and gains, 5 s horizon at a 10 ms step.
    pub fn step_experiment() -> Self {
        Self {
            dt: lit(0.01),
            t_end: lit(5.0),
            x0: ReducedState::zero(),
            fp: FingerParams::default(),
            ap: ActuatorParams::default(),
            gains: ControllerGains::default(),
            traj: TrajectorySpec::Step {
                amplitude: lit::<T>(60.0).to_radians(),
            },
            controller_mode: ControllerMode::Continuous,
            voltage_clamp: None,
        }
    }

    /// Bundled tracking experiment: rest-to-rest cubic move from 0° to 60°
    /// over 10 s (coefficients ≈ `-0.0021 t³ + 0.0314 t²`), default plant and
    /// gains, 10 s horizon at a 10 ms step.
    pub fn tracking_experiment() -> Self {
        Self {
            t_end: lit(10.0),
            traj: TrajectorySpec::CubicBoundary {
                start: T::zero(),
                end: lit::<T>(60.0).to_radians(),
                duration: lit(10.0),
                hold_after: true,
            },
            ..Self::step_experiment()
        }
    }

    /// Validates the run description: step and horizon, initial state, and
    /// all parameter blocks.
    pub fn validate(&self) -> Result<()> {
        require(
            self.dt.is_finite() && self.dt > T::zero(),
            "sim.dt",
            "must be strictly positive",
        )?;
        require(
            self.t_end.is_finite() && self.t_end >= T::zero(),
            "sim.t_end",
            "must be non-negative",
        )?;
        if self.t_end > T::zero() {
            require(self.dt <= self.t_end, "sim.dt", "must not exceed t_end")?;
        }
        require(
            self.t_end / self.dt <= lit(1e9),
            "sim.t_end",
            "t_end/dt exceeds the supported step count",
        )?;
        require(self.x0.is_finite(), "sim.x0", "must be finite")?;
        if let Some(clamp) = self.voltage_clamp {
            require(
                clamp.is_finite() && clamp > T::zero(),
                "sim.voltage_clamp",
                "must be strictly positive when set",
            )?;
        }
        self.fp.validate()?;
        self.ap.validate()?;
        self.gains.validate()?;
        self.traj.validate()?;
        Ok(())
    }

    /// Number of integration steps; the trace holds `steps() + 1` records.
    pub fn steps(&self) -> usize {
        step_count(self.dt, self.t_end)
    }
}

/// `⌊t_end/dt⌋`, with a relative tolerance so a horizon that is an exact
/// multiple of the step is honored despite the rounding in `t_end/dt`.
fn step_count<T: Scalar>(dt: T, t_end: T) -> usize {
    let ratio = t_end / dt;
    let rounded = ratio.round();
    let near_integer = (ratio - rounded).abs() <= lit::<T>(1e-9) * rounded.max(T::one());
    let n = if near_integer { rounded } else { ratio.floor() };
    n.to_usize().unwrap_or(0)
}

/// One time-stamped row of plant, reference, and controller data; the unit
/// of CSV output and metric computation.
///
/// `theta2` is derived from `x1` through the pulley ratio (the constraint
/// holds by construction) and `current` is the armature current `x3 / Kt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord<T> {
    /// Time (s).
    pub t: T,
    /// Proximal joint angle (rad).
    pub x1: T,
    /// Distal joint angle `(r1/r2) x1` (rad).
    pub theta2: T,
    /// Proximal joint rate (rad/s).
    pub x2: T,
    /// Actuator torque (N·m).
    pub x3: T,
    /// Armature current `x3 / Kt` (A).
    pub current: T,
    /// Reference angle (rad).
    pub x1d: T,
    /// Reference rate (rad/s).
    pub dx1d: T,
    /// Tracking error (rad).
    pub e: T,
    /// Error-surface value (rad/s).
    pub s: T,
    /// Virtual-control error (N·m).
    pub eta: T,
    /// Virtual control (N·m).
    pub x3d: T,
    /// Torque-loop input (N·m/s).
    pub u: T,
    /// Applied armature voltage (V).
    pub e_volt: T,
    /// Lyapunov value.
    pub v: T,
    /// Lyapunov rate.
    pub vdot: T,
}

/// Classical fourth-order Runge–Kutta update of `y' = f(t, y)` over one step.
///
/// The arithmetic is sign-agnostic in `dt`; ordinary integration uses
/// `dt > 0`, while verification code may flow backwards.
///
/// # Errors
///
/// [`Error::NonFiniteStage`] as soon as any stage derivative evaluates
/// non-finite, which is the integrator's divergence detector.
pub fn rk4_step<T: Scalar, const N: usize>(
    f: impl Fn(T, [T; N]) -> [T; N],
    y: [T; N],
    t: T,
    dt: T,
) -> Result<[T; N]> {
    let half_dt = lit::<T>(0.5) * dt;
    let two = lit::<T>(2.0);
    let k1 = finite_stage(f(t, y), t)?;
    let k2 = finite_stage(f(t + half_dt, add_scaled(y, k1, half_dt)), t + half_dt)?;
    let k3 = finite_stage(f(t + half_dt, add_scaled(y, k2, half_dt)), t + half_dt)?;
    let k4 = finite_stage(f(t + dt, add_scaled(y, k3, dt)), t + dt)?;
    let sixth = dt / lit::<T>(6.0);
    Ok(core::array::from_fn(|i| {
        y[i] + sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i])
    }))
}

fn add_scaled<T: Scalar, const N: usize>(y: [T; N], k: [T; N], h: T) -> [T; N] {
    core::array::from_fn(|i| y[i] + h * k[i])
}

fn finite_stage<T: Scalar, const N: usize>(k: [T; N], t: T) -> Result<[T; N]> {
    if k.iter().all(|v| v.is_finite()) {
        Ok(k)
    } else {
        Err(Error::NonFiniteStage {
            t: t.to_f64().unwrap_or(f64::NAN),
        })
    }
}

/// Runs the closed loop and returns one record per sample time
/// `t = 0, dt, …, t_end` (`⌊t_end/dt⌋ + 1` records).
///
/// Deterministic: identical configs yield bit-identical traces.
///
/// # Errors
///
/// Validation failures before the run starts; [`Error::Diverged`] with the
/// failure time, step index, and last finite state if the state leaves the
/// representable range mid-run.
pub fn run<T: Scalar>(config: &SimConfig<T>) -> Result<Vec<TraceRecord<T>>> {
    config.validate()?;
    let n = config.steps();
    let mut records = Vec::with_capacity(n + 1);
    let mut state = config.x0;
    for i in 0..=n {
        let t = lit::<T>(i as f64) * config.dt;
        let refp = sample(&config.traj, t);
        let mut sig = control_step(&config.fp, &config.ap, state, refp, &config.gains)?;
        sig.e_volt = clamp_voltage(sig.e_volt, config.voltage_clamp);
        records.push(make_record(config, t, state, refp, sig));
        if i < n {
            let last = state;
            state = advance(config, state, t).map_err(|e| divergence_context(e, t, i, last))?;
            if !state.is_finite() {
                return Err(diverged_at(
                    (t + config.dt).to_f64().unwrap_or(f64::NAN),
                    i + 1,
                    last,
                ));
            }
        }
    }
    Ok(records)
}

fn diverged_at<T: Scalar>(t: f64, step: usize, last: ReducedState<T>) -> Error {
    Error::Diverged {
        t,
        step,
        x1: last.x1.to_f64().unwrap_or(f64::NAN),
        x2: last.x2.to_f64().unwrap_or(f64::NAN),
        x3: last.x3.to_f64().unwrap_or(f64::NAN),
    }
}

/// Attaches run context (step index, last finite state) to stage failures.
fn divergence_context<T: Scalar>(e: Error, t: T, step: usize, last: ReducedState<T>) -> Error {
    match e {
        Error::NonFiniteStage { t: ts } => diverged_at(ts, step, last),
        Error::NonPositiveGain { .. } => {
            diverged_at(t.to_f64().unwrap_or(f64::NAN), step, last)
        }
        other => other,
    }
}

fn clamp_voltage<T: Scalar>(e_volt: T, clamp: Option<T>) -> T {
    match clamp {
        Some(c) => e_volt.max(-c).min(c),
        None => e_volt,
    }
}

fn make_record<T: Scalar>(
    config: &SimConfig<T>,
    t: T,
    state: ReducedState<T>,
    refp: ReferencePoint<T>,
    sig: ControlSignals<T>,
) -> TraceRecord<T> {
    let joints = expand_state(&config.fp, state.x1, state.x2);
    TraceRecord {
        t,
        x1: state.x1,
        theta2: joints.theta[1],
        x2: state.x2,
        x3: state.x3,
        current: state.x3 / config.ap.kt,
        x1d: refp.x1d,
        dx1d: refp.dx1d,
        e: sig.e,
        s: sig.s,
        eta: sig.eta,
        x3d: sig.x3d,
        u: sig.u,
        e_volt: sig.e_volt,
        v: sig.v,
        vdot: sig.vdot,
    }
}

/// One integration step under the configured controller mode. Control-law
/// failures inside a stage poison that stage with NaNs so the integrator's
/// divergence detector reports them uniformly.
fn advance<T: Scalar>(config: &SimConfig<T>, state: ReducedState<T>, t: T) -> Result<ReducedState<T>> {
    let y = [state.x1, state.x2, state.x3];
    let next = match config.controller_mode {
        ControllerMode::Continuous => {
            let deriv = |tt: T, yy: [T; 3]| {
                let s = ReducedState {
                    x1: yy[0],
                    x2: yy[1],
                    x3: yy[2],
                };
                match control_step(&config.fp, &config.ap, s, sample(&config.traj, tt), &config.gains)
                {
                    Ok(sig) => state_derivative(
                        &config.fp,
                        &config.ap,
                        s,
                        clamp_voltage(sig.e_volt, config.voltage_clamp),
                    ),
                    Err(_) => [T::nan(); 3],
                }
            };
            rk4_step(deriv, y, t, config.dt)?
        }
        ControllerMode::ZeroOrderHold => {
            let sig = control_step(&config.fp, &config.ap, state, sample(&config.traj, t), &config.gains)?;
            let e_volt = clamp_voltage(sig.e_volt, config.voltage_clamp);
            let deriv = |_tt: T, yy: [T; 3]| {
                state_derivative(
                    &config.fp,
                    &config.ap,
                    ReducedState {
                        x1: yy[0],
                        x2: yy[1],
                        x3: yy[2],
                    },
                    e_volt,
                )
            };
            rk4_step(deriv, y, t, config.dt)?
        }
    };
    Ok(ReducedState {
        x1: next[0],
        x2: next[1],
        x3: next[2],
    })
}
